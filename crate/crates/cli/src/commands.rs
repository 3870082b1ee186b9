use nalgebra::DMatrix;
use oslab_core::lie::{
    builtin_example, c_dual, hyperbolic_cone_check, semigroup_membership_sample, split_by_involution, su2_basis_change,
    su2_table, ConeCheckConfig, LieAlgebraData, LieExample, Sl2SemigroupExample,
};
use oslab_core::linalg::{self, sci17, C64};
use oslab_core::positivity::{
    corrupted_functional, non_rp_witness_family, pd_gram_certificate, random_complex_function, random_dplus_function,
    rp_gram_certificate,
};
use oslab_core::reconstruction::{
    build_k0, extract_hamiltonian, transfer_operator, verify_npoint_identity, BasisSpec, Hamiltonian, McParams,
    NpointReport, ReconstructedSpace,
};
use oslab_core::reference::mehler_gaps;
use oslab_core::suite::{self, SuiteConfig, CRITERIA};
use oslab_core::{GaussianEuclideanMeasure, PsdCertificate, TestFunction, TimeLattice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Instance, Settings};
use crate::report::{six, status, OutDir, Table};
use crate::CliError;

/// Result of a subcommand: overall verdict plus human-readable lines.
#[derive(Debug, Default)]
pub struct Outcome {
    pub passed: bool,
    pub lines: Vec<String>,
}

fn measure_for(s: &Settings) -> Result<GaussianEuclideanMeasure, CliError> {
    let lattice = TimeLattice::new(s.n_points, s.spacing)?;
    Ok(match s.instance {
        Instance::Ou | Instance::Corrupted => GaussianEuclideanMeasure::ou(s.mass, lattice)?,
        Instance::FreeField => GaussianEuclideanMeasure::lattice_free_field(s.mass, lattice)?,
        Instance::DampedCosine => GaussianEuclideanMeasure::damped_cosine(s.mass, s.omega, lattice)?,
    })
}

pub fn rp_check(s: &Settings, out: &mut OutDir) -> Result<Outcome, CliError> {
    let measure = measure_for(s)?;
    let eps = s.tolerance_flag.unwrap_or(s.psd);
    let broken = corrupted_functional(&measure, s.corruption);
    let functional = |f: &TestFunction| {
        if s.instance == Instance::Corrupted {
            broken(f)
        } else {
            measure.generating_functional(f)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut certs: Vec<(String, PsdCertificate)> = Vec::new();
    for k in 0..s.families {
        let size = rng.random_range(1..=s.max_family_size);
        let real: Vec<_> = (0..size)
            .map(|_| {
                let target = rng.random_range(0.05..2.0);
                random_dplus_function(&measure, target, &mut rng)
            })
            .collect();
        let complex: Vec<_> = (0..size)
            .map(|_| {
                let target = rng.random_range(0.05..1.0);
                random_complex_function(&measure, target, 0.2, &mut rng)
            })
            .collect();
        certs.push((format!("rp-{k:03}"), rp_gram_certificate(functional, &real, eps)?));
        certs.push((format!("pd-real-{k:03}"), pd_gram_certificate(functional, &real, eps)?));
        certs.push((format!("pd-complex-{k:03}"), pd_gram_certificate(functional, &complex, eps)?));
    }
    // Deterministic probe along the most negative reflected direction.
    if let Some(fam) = non_rp_witness_family(&measure, eps) {
        certs.push(("rp-block".into(), rp_gram_certificate(functional, &fam, eps)?));
    }

    let mut table = Table::new("certificate,dimension,verdict,min_eigenvalue,spectral_norm,threshold");
    let mut failing = Vec::new();
    for (name, cert) in &certs {
        out.write(&format!("certificates/{name}.toml"), &cert.to_report())?;
        table.row(&[
            name.clone(),
            cert.gram.nrows().to_string(),
            format!("{:?}", cert.verdict).to_lowercase(),
            sci17(cert.min_eigenvalue),
            sci17(cert.spectral_norm),
            sci17(cert.threshold),
        ]);
        if !cert.is_positive() {
            failing.push(name.clone());
        }
    }
    out.write("rp-check.csv", &table.render())?;
    let mut lines = vec![format!(
        "rp-check {} m={} n={} h={}: {} certificates, {} not positive",
        s.instance.name(),
        s.mass,
        s.n_points,
        s.spacing,
        certs.len(),
        failing.len()
    )];
    if failing.is_empty() {
        out.remove("witness.toml")?;
    }
    if let Some(first) = failing.first() {
        let cert = &certs.iter().find(|(n, _)| n == first).expect("listed").1;
        let path = out.write("witness.toml", &cert.to_report())?;
        lines.push(format!(
            "first failure {first}: min eigenvalue {} (threshold {}), witness in {}",
            six(cert.min_eigenvalue),
            six(cert.threshold),
            path.display()
        ));
    }
    Ok(Outcome {
        passed: failing.is_empty(),
        lines,
    })
}

struct Reconstruction {
    measure: GaussianEuclideanMeasure,
    space: ReconstructedSpace,
    hamiltonian: Hamiltonian,
}

fn reconstruct_instance(s: &Settings) -> Result<Reconstruction, CliError> {
    if s.instance == Instance::Corrupted {
        return Err(CliError::Usage("the corrupted instance only applies to rp-check".into()));
    }
    if s.step == 0 {
        return Err(CliError::Usage("step must be at least 1".into()));
    }
    let measure = measure_for(s)?;
    let spec = BasisSpec::monomials(s.max_degree, s.basis_indices());
    let space = build_k0(&measure, &spec, s.null)?;
    let transfer = transfer_operator(&space, &measure, s.step)?;
    let hamiltonian = extract_hamiltonian(&transfer, s.step as f64 * s.spacing)?;
    Ok(Reconstruction {
        measure,
        space,
        hamiltonian,
    })
}

pub fn reconstruct(s: &Settings, out: &mut OutDir) -> Result<Outcome, CliError> {
    let r = reconstruct_instance(s)?;
    let tau = s.step as f64 * s.spacing;
    out.write("space.toml", &r.space.to_report(Some(&r.hamiltonian)))?;
    let mut lines = vec![format!(
        "reconstruct {} m={} n={} h={}: dim K = {}, step {}",
        s.instance.name(),
        s.mass,
        s.n_points,
        s.spacing,
        r.space.physical_dim,
        s.step
    )];
    let mut passed = true;

    // Spectrum, with the grid oracle for the Markov instance.
    let levels = r.hamiltonian.shifted_spectrum.len();
    let oracle = (s.instance == Instance::Ou).then(|| mehler_gaps(s.mass, tau, levels - 1));
    let tol = s.tolerance_flag.unwrap_or(s.spectrum);
    let mut table = Table::new(if oracle.is_some() {
        "level,raw_energy,shifted_energy,oracle,relative_error"
    } else {
        "level,raw_energy,shifted_energy"
    });
    let mut worst = 0.0_f64;
    for k in 0..levels {
        let mut row = vec![
            k.to_string(),
            sci17(r.hamiltonian.raw_spectrum[k]),
            sci17(r.hamiltonian.shifted_spectrum[k]),
        ];
        if let Some(o) = &oracle {
            let (want, err) = if k == 0 {
                (0.0, r.hamiltonian.shifted_spectrum[0].abs())
            } else {
                let w = o[k - 1];
                (w, (r.hamiltonian.shifted_spectrum[k] - w).abs() / w)
            };
            worst = worst.max(err);
            row.push(sci17(want));
            row.push(sci17(err));
        }
        table.row(&row);
    }
    out.write("spectrum.csv", &table.render())?;
    let gaps: Vec<String> = r.hamiltonian.shifted_spectrum.iter().skip(1).take(3).map(|g| six(*g)).collect();
    if oracle.is_some() {
        passed &= worst <= tol;
        lines.push(format!(
            "gaps [{}], max relative error vs oracle {} ({})",
            gaps.join(", "),
            six(worst),
            status(worst <= tol)
        ));
    } else {
        lines.push(format!("gaps [{}] (no closed-form oracle for this instance)", gaps.join(", ")));
    }

    // Contraction norms and the semigroup law; enforced only for stationary
    // covariances, where the shift is a symmetry of the measure.
    let stationary = r.measure.check_stationarity(1e-12).holds;
    let max_step = r.space.max_step().min(8);
    let ts: Vec<DMatrix<C64>> = (0..=max_step)
        .map(|k| transfer_operator(&r.space, &r.measure, k))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new("step,norm,semigroup_residual");
    let mut max_norm = 0.0_f64;
    let mut worst_sg = 0.0_f64;
    for k in 1..=max_step {
        let norm = linalg::spectral_norm_c(&ts[k]);
        let residual = if k >= 2 {
            (&ts[k - 1] * &ts[1] - &ts[k]).norm() / ts[k].norm().max(f64::MIN_POSITIVE)
        } else {
            0.0
        };
        max_norm = max_norm.max(norm);
        worst_sg = worst_sg.max(residual);
        table.row(&[k.to_string(), sci17(norm), sci17(residual)]);
    }
    out.write("contraction.csv", &table.render())?;
    let contraction_ok = max_norm <= 1.0 + suite::tol::CONTRACTION && worst_sg <= suite::tol::SEMIGROUP_RELATIVE;
    if stationary {
        passed &= contraction_ok;
    }
    lines.push(format!(
        "max norm {}, semigroup residual {} ({})",
        six(max_norm),
        six(worst_sg),
        if stationary { status(contraction_ok) } else { "not enforced: covariance is not stationary" }
    ));

    let np = npoint_table(s, &r, out)?;
    passed &= np.passed;
    lines.extend(np.lines);
    Ok(Outcome { passed, lines })
}

pub fn npoint(s: &Settings, out: &mut OutDir) -> Result<Outcome, CliError> {
    let r = reconstruct_instance(s)?;
    npoint_table(s, &r, out)
}

fn npoint_table(s: &Settings, r: &Reconstruction, out: &mut OutDir) -> Result<Outcome, CliError> {
    let n = r.measure.lattice().n_points();
    let cases: Vec<_> = suite::npoint_cases(r.measure.lattice().first_positive())
        .into_iter()
        .filter(|(_, obs)| obs.iter().all(|o| o.index < n))
        .collect();
    if cases.is_empty() {
        return Err(CliError::Usage("lattice too short for the n-point cases".into()));
    }
    let tol = s.tolerance_flag.unwrap_or(s.npoint);
    let mut table = Table::new(if s.mc_enabled {
        NpointReport::CSV_HEADER
    } else {
        NpointReport::CSV_HEADER_EXACT
    });
    let mut passed = true;
    let mut worst_rel = 0.0_f64;
    let mut worst_z = 0.0_f64;
    for (k, (label, obs)) in cases.iter().enumerate() {
        let mc = s.mc_enabled.then(|| McParams {
            samples: s.samples,
            seed: s.seed.wrapping_add(k as u64),
        });
        let rep = verify_npoint_identity(&r.space, &r.measure, &r.hamiltonian, obs, mc, label.clone())?;
        let agree = if rep.rhs_exact.abs() > 1e-12 {
            worst_rel = worst_rel.max(rep.relative_error());
            rep.relative_error() <= tol
        } else {
            rep.lhs.norm() <= 1e-10
        };
        let z = rep.mc_z_score();
        if let Some(z) = z {
            worst_z = worst_z.max(z);
        }
        passed &= agree && z.is_none_or(|z| z <= suite::tol::MC_SIGMAS);
        table.raw(rep.csv_row());
    }
    out.write("npoint.csv", &table.render())?;
    let mc_note = if s.mc_enabled {
        format!(", max MC z-score {}", six(worst_z))
    } else {
        ", Monte Carlo disabled".into()
    };
    Ok(Outcome {
        passed,
        lines: vec![format!(
            "n-point identity: {} cases, max relative error {}{} ({})",
            cases.len(),
            six(worst_rel),
            mc_note,
            status(passed)
        )],
    })
}

fn load_example(name: &str) -> Result<LieExample, CliError> {
    let path = std::path::Path::new(name);
    if name.ends_with(".toml") || path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read example {}: {e}", path.display())))?;
        return Ok(LieExample::from_text(&text)?);
    }
    Ok(builtin_example(name)?)
}

fn structure_table(alg: &LieAlgebraData) -> String {
    let d = alg.dim();
    let labels = alg.labels();
    let mut t = Table::new("x,y,z,coefficient");
    for i in 0..d {
        for j in (i + 1)..d {
            for k in 0..d {
                let c = alg.c(i, j, k);
                if c != 0.0 {
                    t.row(&[labels[i].clone(), labels[j].clone(), labels[k].clone(), sci17(c)]);
                }
            }
        }
    }
    t.render()
}

pub fn cdual(s: &Settings, out: &mut OutDir) -> Result<Outcome, CliError> {
    let ex = load_example(&s.example)?;
    ex.algebra.validated()?;
    let split = split_by_involution(&ex.algebra, &ex.involution)?;
    let once = c_dual(&ex.algebra, &split)?;
    let tol = s.tolerance_flag.unwrap_or(s.structure);
    let jacobi = once.algebra.validate().jacobi_residual;
    let split2 = split_by_involution(&once.algebra, &once.involution)?;
    let twice = c_dual(&once.algebra, &split2)?;
    let aligned = ex.algebra.change_basis(&once.basis_change, once.algebra.labels().to_vec())?;
    let involution = twice.algebra.max_difference(&aligned);
    let dual = LieExample {
        name: format!("{}^c", ex.name),
        algebra: once.algebra.clone(),
        involution: once.involution.clone(),
        cone: None,
    };
    out.write("cdual.toml", &dual.to_text())?;
    out.write("cdual-structure.csv", &structure_table(&once.algebra))?;
    let mut basis = Table::new("original_coordinates_of_new_basis");
    for j in 0..once.basis_change.ncols() {
        basis.row(&[format!(
            "{}: {}",
            once.algebra.labels()[j],
            linalg::row_text(once.basis_change.column(j).iter().copied())
        )]);
    }
    out.write("cdual-basis-change.csv", &basis.render())?;

    let mut passed = jacobi <= tol && involution <= tol;
    let mut lines = vec![format!(
        "c-dual of {}: dim h = {}, dim q = {}, labels [{}]",
        ex.name,
        split.dim_h(),
        split.dim_q(),
        once.algebra.labels().join(", ")
    )];
    lines.push(format!(
        "jacobi residual {}, involution residual {} ({})",
        six(jacobi),
        six(involution),
        status(passed)
    ));
    if once.algebra.structure().iter().all(|&c| c == 0.0) {
        lines.push("c-dual is abelian".into());
    }
    if ex.name == "sl2R-cartan" {
        let target = su2_table();
        let moved = once.algebra.change_basis(&su2_basis_change(), target.labels().to_vec())?;
        let residual = moved.max_difference(&target);
        let ok = residual <= suite::tol::SU2_TABLE;
        passed &= ok;
        let d = target.dim();
        let mut t = Table::new("x,y,z,transformed,su2");
        for i in 0..d {
            for j in (i + 1)..d {
                for k in 0..d {
                    let l = target.labels();
                    t.row(&[l[i].clone(), l[j].clone(), l[k].clone(), sci17(moved.c(i, j, k)), sci17(target.c(i, j, k))]);
                }
            }
        }
        out.write("su2-comparison.csv", &t.render())?;
        lines.push(format!("matches su(2) under the recorded basis change: residual {} ({})", six(residual), status(ok)));
    }
    Ok(Outcome { passed, lines })
}

pub fn cone_check(s: &Settings, out: &mut OutDir) -> Result<Outcome, CliError> {
    let ex = load_example(&s.example)?;
    ex.algebra.validated()?;
    let cone = ex
        .cone
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("example `{}` has no cone", ex.name)))?;
    let split = split_by_involution(&ex.algebra, &ex.involution)?;
    let mut cfg = ConeCheckConfig {
        seed: s.seed,
        ..ConeCheckConfig::default()
    };
    if let Some(t) = s.tolerance_flag {
        cfg.imaginary_tolerance = t;
    }
    let rep = hyperbolic_cone_check(&ex.algebra, &split, cone, &cfg);
    let mut t = Table::new("point,status,failure,max_imaginary,ad_norm,eigenvalues_re,eigenvalues_im");
    for e in std::iter::once(&rep.witness).chain(&rep.samples) {
        t.row(&[
            e.label.clone(),
            status(e.passed()).into(),
            e.failure.as_ref().map_or(String::new(), |f| f.name().into()),
            sci17(e.max_imaginary),
            sci17(e.ad_norm),
            linalg::row_text(e.eigenvalues.iter().map(|z| z.re)),
            linalg::row_text(e.eigenvalues.iter().map(|z| z.im)),
        ]);
    }
    out.write("cone-check.csv", &t.render())?;
    let mut passed = rep.passed();
    let mut lines = vec![format!(
        "cone check {}: {} points, witness interior {}, invariance residual {}, conjugation deviation {} ({})",
        ex.name,
        rep.samples.len() + 1,
        rep.witness_interior,
        six(rep.invariance_residual),
        six(rep.conjugation_deviation),
        status(rep.passed())
    )];
    for f in &rep.failures {
        lines.push(format!("failure: {f}"));
    }
    if let Ok(example) = Sl2SemigroupExample::by_name(&ex.name) {
        let sg = semigroup_membership_sample(&example, 200, s.seed);
        let mut t = Table::new("sample,reason");
        for (i, reason) in &sg.failures {
            t.row(&[i.to_string(), reason.clone()]);
        }
        out.write("semigroup.csv", &t.render())?;
        let ok = sg.members == sg.samples;
        passed &= ok;
        lines.push(format!(
            "semigroup membership: {}/{} sampled elements factor as h*exp(X), worst residual {} ({})",
            sg.members,
            sg.samples,
            six(sg.worst_residual),
            status(ok)
        ));
    }
    Ok(Outcome { passed, lines })
}

pub const SUMMARY_FILE: &str = "summary.csv";

pub fn suite_run(s: &Settings, source: &str, out: &mut OutDir) -> Result<Outcome, CliError> {
    let config = SuiteConfig {
        seed: s.seed,
        mc_samples: s.samples,
        families: s.families,
        max_family_size: s.max_family_size,
        psd_tolerance: s.tolerance_flag.unwrap_or(s.psd),
        ..SuiteConfig::default()
    };
    let outcomes = match &s.checks {
        None => suite::run_suite(&config),
        Some(names) => {
            let mut ids = Vec::new();
            for name in names {
                let id = CRITERIA
                    .iter()
                    .find(|(_, n)| n == name)
                    .map(|(id, _)| *id)
                    .ok_or_else(|| CliError::Usage(format!("unknown check `{name}`")))?;
                ids.push(id);
            }
            ids.into_iter().map(|id| suite::run_criterion(id, &config)).collect()
        }
    };
    let mut table = Table::new("id,check,status,metrics,detail");
    let mut lines = vec![format!("suite seed {}: {source}", s.seed)];
    for o in &outcomes {
        let metrics: Vec<String> = o.metrics.iter().map(|(k, v)| format!("{k}={}", six(*v))).collect();
        table.row(&[
            o.id.to_string(),
            o.name.into(),
            status(o.passed).into(),
            metrics.join(";"),
            format!("\"{}\"", o.detail.replace('"', "\"\"")),
        ]);
        let shown = if metrics.is_empty() { o.detail.clone() } else { metrics.join(" ") };
        lines.push(format!("[{}] {:>2} {:<24} {shown}", status(o.passed), o.id, o.name));
    }
    let mut text = format!("# seed {}; {source}\n", s.seed);
    text.push_str(&table.render());
    out.write(SUMMARY_FILE, &text)?;
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if !failed.is_empty() {
        lines.push(format!("failed checks: {}", failed.join(", ")));
    }
    Ok(Outcome {
        passed: failed.is_empty(),
        lines,
    })
}
