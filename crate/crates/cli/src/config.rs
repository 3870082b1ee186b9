use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

pub const OUT_DIR_ENV: &str = "OSLAB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "oslab-out";

/// Run configuration as read from TOML. Every field is optional; missing
/// values fall back to built-in defaults and command-line flags win.
///
/// ```toml
/// instance = "ou"            # ou | free-field | damped-cosine | corrupted
/// n_points = 64
/// spacing = 0.05
/// mass = 1.0
/// step = 1
///
/// [basis]
/// max_degree = 3
/// times = [0, 1, 2]          # offsets from the first positive site
///
/// [monte_carlo]
/// enabled = true
/// samples = 100000
/// seed = 1
///
/// [tolerance]
/// psd = 1e-10
/// ```
#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instance: Option<String>,
    pub n_points: Option<usize>,
    pub spacing: Option<f64>,
    pub mass: Option<f64>,
    /// Frequency of the damped-cosine kernel.
    pub omega: Option<f64>,
    /// Offset added by the corrupted functional.
    pub corruption: Option<f64>,
    /// Transfer step in lattice sites.
    pub step: Option<usize>,
    pub families: Option<usize>,
    pub max_family_size: Option<usize>,
    /// Built-in Lie example name or path to an example file.
    pub example: Option<String>,
    /// Subset of suite checks by name.
    pub checks: Option<Vec<String>>,
    pub output_dir: Option<PathBuf>,
    pub basis: Option<BasisConfig>,
    pub monte_carlo: Option<McConfig>,
    pub tolerance: Option<ToleranceConfig>,
}

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub max_degree: Option<u32>,
    pub times: Option<Vec<usize>>,
}

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub enabled: Option<bool>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub psd: Option<f64>,
    pub null: Option<f64>,
    pub spectrum: Option<f64>,
    pub npoint: Option<f64>,
    pub structure: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instance {
    Ou,
    FreeField,
    DampedCosine,
    Corrupted,
}

impl Instance {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "ou" => Ok(Self::Ou),
            "free-field" => Ok(Self::FreeField),
            "damped-cosine" => Ok(Self::DampedCosine),
            "corrupted" => Ok(Self::Corrupted),
            _ => Err(CliError::Usage(format!(
                "unknown instance `{s}` (expected ou, free-field, damped-cosine or corrupted)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Ou => "ou",
            Self::FreeField => "free-field",
            Self::DampedCosine => "damped-cosine",
            Self::Corrupted => "corrupted",
        }
    }
}

/// Flag values that override the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub tolerance: Option<f64>,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub instance: Instance,
    pub n_points: usize,
    pub spacing: f64,
    pub mass: f64,
    pub omega: f64,
    pub corruption: f64,
    pub step: usize,
    pub families: usize,
    pub max_family_size: usize,
    pub example: String,
    pub checks: Option<Vec<String>>,
    pub max_degree: u32,
    pub times: Vec<usize>,
    pub mc_enabled: bool,
    pub samples: usize,
    pub seed: u64,
    pub psd: f64,
    pub null: f64,
    pub spectrum: f64,
    pub npoint: f64,
    pub structure: f64,
    /// `--tolerance`, applied to each command's primary check.
    pub tolerance_flag: Option<f64>,
    pub out_dir: PathBuf,
    /// True when no file was given or the file set nothing.
    pub defaults_only: bool,
}

pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

impl Settings {
    pub fn resolve(cfg: &RunConfig, flags: &Overrides) -> Result<Self, CliError> {
        let basis = cfg.basis.clone().unwrap_or_default();
        let mc = cfg.monte_carlo.clone().unwrap_or_default();
        let tol = cfg.tolerance.clone().unwrap_or_default();
        let out_dir = flags
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let s = Self {
            instance: Instance::parse(cfg.instance.as_deref().unwrap_or("ou"))?,
            n_points: cfg.n_points.unwrap_or(64),
            spacing: cfg.spacing.unwrap_or(0.05),
            mass: cfg.mass.unwrap_or(1.0),
            omega: cfg.omega.unwrap_or(4.0),
            corruption: cfg.corruption.unwrap_or(0.5),
            step: cfg.step.unwrap_or(1),
            families: cfg.families.unwrap_or(50),
            max_family_size: cfg.max_family_size.unwrap_or(16),
            example: cfg.example.clone().unwrap_or_else(|| "sl2R-cartan".into()),
            checks: cfg.checks.clone(),
            max_degree: basis.max_degree.unwrap_or(3),
            times: basis.times.unwrap_or_else(|| vec![0, 1, 2]),
            mc_enabled: mc.enabled.unwrap_or(true),
            samples: flags.samples.or(mc.samples).unwrap_or(100_000),
            seed: flags.seed.or(mc.seed).unwrap_or(1),
            psd: tol.psd.unwrap_or(1e-10),
            null: tol.null.unwrap_or(1e-10),
            spectrum: tol.spectrum.unwrap_or(0.01),
            npoint: tol.npoint.unwrap_or(0.01),
            structure: tol.structure.unwrap_or(1e-12),
            tolerance_flag: flags.tolerance,
            out_dir,
            defaults_only: *cfg == RunConfig::default(),
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        if !self.n_points.is_multiple_of(2) || !(4..=4096).contains(&self.n_points) {
            return bad(format!("n_points must be even and in 4..=4096, got {}", self.n_points));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return bad(format!("spacing must be positive, got {}", self.spacing));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return bad(format!("mass must be positive, got {}", self.mass));
        }
        if !self.omega.is_finite() || !self.corruption.is_finite() {
            return bad("omega and corruption must be finite".into());
        }
        if self.mc_enabled && self.samples < 1000 {
            return bad(format!("samples must be at least 1000 when Monte Carlo is enabled, got {}", self.samples));
        }
        if self.families == 0 || self.max_family_size == 0 {
            return bad("families and max_family_size must be positive".into());
        }
        if self.max_degree == 0 {
            return bad("basis max_degree must be at least 1".into());
        }
        if self.times.is_empty() || self.times.iter().any(|&t| t >= self.n_points / 2) {
            return bad(format!(
                "basis times must be nonempty offsets below {} (half the lattice)",
                self.n_points / 2
            ));
        }
        let tols = [self.psd, self.null, self.spectrum, self.npoint, self.structure];
        if tols.iter().chain(self.tolerance_flag.as_ref()).any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("tolerances must be finite and nonnegative".into());
        }
        Ok(())
    }

    /// Absolute lattice indices of the basis times.
    pub fn basis_indices(&self) -> Vec<usize> {
        let fp = self.n_points / 2;
        let mut idx: Vec<usize> = self.times.iter().map(|t| fp + t).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    pub fn describe_source(&self, path: Option<&Path>) -> String {
        match path {
            Some(p) if !self.defaults_only => format!("config {}", p.display()),
            Some(p) => format!("config {} is empty; built-in defaults used", p.display()),
            None => "no config; built-in defaults used".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let cfg: RunConfig = toml::from_str("[monte_carlo]\nseed = 5\nsamples = 2000\n").unwrap();
        let flags = Overrides {
            seed: Some(9),
            ..Default::default()
        };
        let s = Settings::resolve(&cfg, &flags).unwrap();
        assert_eq!((s.seed, s.samples), (9, 2000));
        assert!(!s.defaults_only);
    }

    #[test]
    fn empty_file_means_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        let s = Settings::resolve(&cfg, &Overrides::default()).unwrap();
        assert!(s.defaults_only);
        assert_eq!(s.n_points, 64);
    }

    #[test]
    fn out_of_range_values_are_usage_errors() {
        for text in [
            "n_points = 7",
            "n_points = 8192",
            "spacing = -1.0",
            "instance = \"nope\"",
            "[monte_carlo]\nsamples = 10",
            "[basis]\ntimes = [40]",
        ] {
            let cfg: RunConfig = toml::from_str(text).unwrap();
            assert!(matches!(Settings::resolve(&cfg, &Overrides::default()), Err(CliError::Usage(_))), "{text}");
        }
        assert!(toml::from_str::<RunConfig>("unknown_key = 1").is_err());
    }
}
