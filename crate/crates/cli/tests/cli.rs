use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn oslab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oslab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("OSLAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn rp_check_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = oslab(&["rp-check", "--samples", "1000"], dir.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let table = std::fs::read_to_string(dir.path().join("rp-check.csv")).unwrap();
    assert!(table.starts_with("certificate,dimension,verdict,min_eigenvalue,spectral_norm,threshold\n"));
    assert!(!table.contains("indefinite"));
    assert!(!dir.path().join("witness.toml").exists());
}

#[test]
fn corrupted_functional_fails_with_witness_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("corrupted.toml");
    let o = oslab(&["rp-check", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    let witness = std::fs::read_to_string(dir.path().join("witness.toml")).unwrap();
    assert!(witness.contains("verdict = \"indefinite\""));
    assert!(witness.contains("witness_re"));
}

#[test]
fn damped_cosine_is_not_reflection_positive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("damped_cosine.toml");
    assert_eq!(code(&oslab(&["rp-check", "--config", cfg.to_str().unwrap()], dir.path())), 1);
    assert_eq!(code(&oslab(&["reconstruct", "--config", cfg.to_str().unwrap()], dir.path())), 1);
}

#[test]
fn reconstruct_default_reports_unit_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let o = oslab(&["reconstruct", "--samples", "20000"], dir.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let spectrum = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let gaps: Vec<f64> = spectrum
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    for (k, g) in gaps.iter().take(3).enumerate() {
        let want = (k + 1) as f64;
        assert!((g - want).abs() <= 0.01 * want, "{g}");
    }
    for name in ["space.toml", "contraction.csv", "npoint.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn step_too_large_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("step_too_large.toml");
    let o = oslab(&["reconstruct", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("max representable step is 4"));
}

#[test]
fn mc_disabled_table_has_exact_columns_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("mc_disabled.toml");
    let o = oslab(&["npoint", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0);
    let table = std::fs::read_to_string(dir.path().join("npoint.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("case,lhs_re,lhs_im,rhs_exact"));
    assert!(lines.all(|l| l.split(',').count() == 4));
}

#[test]
fn cdual_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = oslab(&["cdual", "sl2R-cartan"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("matches su(2)"));
    assert!(dir.path().join("su2-comparison.csv").exists());

    let o = oslab(&["cdual", "abelian-5"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("c-dual is abelian"));

    let bad = fixture("perturbed_jacobi.toml");
    let o = oslab(&["cdual", bad.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Jacobi"));
}

#[test]
fn cdual_output_reloads_as_an_example() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&oslab(&["cdual", "sl2R-adH"], dir.path())), 0);
    let dual = dir.path().join("cdual.toml");
    let again = dir.path().join("again");
    assert_eq!(code(&oslab(&["cdual", dual.to_str().unwrap()], &again)), 0);
}

#[test]
fn cone_check_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = oslab(&["cone-check", "sl2R-adH"], dir.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("semigroup membership: 200/200"));
    assert_eq!(code(&oslab(&["cone-check", "heisenberg"], dir.path())), 2);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&oslab(&["rp-check", "--config", "/definitely/missing.toml"], dir.path())), 2);
    assert_eq!(code(&oslab(&["cdual", "no-such-example"], dir.path())), 2);
    assert_eq!(code(&oslab(&["reconstruct", "--samples", "10"], dir.path())), 2);
    assert_eq!(code(&oslab(&["not-a-command"], dir.path())), 2);
}

#[test]
fn empty_config_uses_defaults_and_says_so() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("empty.toml");
    let o = oslab(
        &["suite", "--config", cfg.to_str().unwrap(), "--samples", "20000"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.lines().next().unwrap().contains("built-in defaults used"));
    assert_eq!(summary.lines().filter(|l| l.contains(",PASS,")).count(), 10);
}

#[test]
fn injected_failure_names_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("subset.toml");
    std::fs::write(&cfg, "checks = [\"rp-certification\", \"c-duality\"]\n").unwrap();
    // Zero tolerance demands exact nonnegativity, which round-off breaks.
    let o = oslab(&["suite", "--config", cfg.to_str().unwrap(), "--tolerance", "0"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("failed checks: rp-certification"));
}

#[test]
fn out_dir_defaults_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_oslab"))
        .args(["cdual", "heisenberg", "--quiet"])
        .env("OSLAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert!(dir.path().join("cdual.toml").exists());
}

#[test]
fn free_field_passes_certificates_but_is_not_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("free_field.toml");
    assert_eq!(code(&oslab(&["rp-check", "--config", cfg.to_str().unwrap()], dir.path())), 0);
    let o = oslab(&["reconstruct", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not Hermitian"));
}
