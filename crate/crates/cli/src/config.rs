//! Run configuration: command-line flags over an optional JSON file over defaults.

use std::path::{Path, PathBuf};

use bkm_core::analysis::{log_space, SweepConfig};
use bkm_core::{Boundary, FdSpec, PotentialModel, QuadratureSpec, SpinChainSpec};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Closed1,
    Closed2,
    Closed3,
    Thermo,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Open,
    Periodic,
}

/// Every setting that can come from a flag or the config file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
pub struct Settings {
    /// Potential model.
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Number of sites (exact model).
    #[arg(long)]
    pub n: Option<usize>,
    /// Boundary condition (exact model).
    #[arg(long, value_enum)]
    pub bc: Option<Bc>,
    /// Coupling J.
    #[arg(long, allow_hyphen_values = true)]
    pub j: Option<f64>,
    /// Longitudinal field h (closed1 only).
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<f64>,
    /// Transverse field Γ.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of log-spaced temperatures.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub mono_tol: Option<f64>,
    #[arg(long)]
    pub neg_tol: Option<f64>,
    /// Gauss–Legendre nodes per panel (thermo model).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Finite-difference step scale (exact model).
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Richardson levels (exact model).
    #[arg(long)]
    pub fd_levels: Option<usize>,
    /// Finite-difference agreement tolerance.
    #[arg(long)]
    pub fd_tol: Option<f64>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
    /// Logarithmic y axis in the SVG chart.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log_y: Option<bool>,
}

/// Settings for a single point.
#[derive(Debug, Clone, Default, Args, Deserialize)]
pub struct PointSettings {
    /// Temperature; the point is (J/T, Γ/T).
    #[arg(long)]
    pub t: Option<f64>,
    /// First natural parameter, given directly.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Second natural parameter, given directly.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Also write the eigenvalues at the point (exact model).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dump_spectrum: Option<bool>,
}

/// Settings for a Γ scan.
#[derive(Debug, Clone, Default, Args, Deserialize)]
pub struct ScanSettings {
    /// Explicit comma-separated transverse fields.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gammas: Option<Vec<f64>>,
    #[arg(long)]
    pub gamma_min: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub gamma_count: Option<usize>,
}

/// Contents of the optional JSON config file; keys are the long flag names with
/// underscores.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    pub settings: Settings,
    pub point: PointSettings,
    pub scan: ScanSettings,
}

const FILE_KEYS: [&str; 27] = [
    "model", "n", "bc", "j", "h", "gamma", "t_min", "t_max", "points", "mono_tol", "neg_tol",
    "nodes", "fd_step", "fd_levels", "fd_tol", "out_csv", "out_json", "out_svg", "log_y", "t",
    "theta", "x", "dump_spectrum", "gammas", "gamma_min", "gamma_max", "gamma_count",
];

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| CliError::Config(format!("config file {}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    let Some(object) = value.as_object() else {
        return Err(CliError::Config(format!(
            "config file {}: expected a JSON object",
            path.display()
        )));
    };
    if let Some(key) = object.keys().find(|k| !FILE_KEYS.contains(&k.as_str())) {
        return Err(CliError::Config(format!(
            "config file {}: unknown key \"{key}\"",
            path.display()
        )));
    }
    Ok(FileConfig {
        settings: serde_json::from_value(value.clone()).map_err(bad)?,
        point: serde_json::from_value(value.clone()).map_err(bad)?,
        scan: serde_json::from_value(value).map_err(bad)?,
    })
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),+ $(,)?) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field.clone(); } )+
    };
}

impl Settings {
    pub fn overlay(mut self, file: &Settings) -> Self {
        overlay!(
            self, file, model, n, bc, j, h, gamma, t_min, t_max, points, mono_tol, neg_tol,
            nodes, fd_step, fd_levels, fd_tol, out_csv, out_json, out_svg, log_y,
        );
        self
    }

    pub fn model_name(&self) -> Result<ModelName, CliError> {
        self.model.ok_or_else(|| {
            CliError::Config(
                "no model given: use --model closed1|closed2|closed3|thermo|exact".into(),
            )
        })
    }

    pub fn fd_spec(&self) -> FdSpec {
        let d = FdSpec::default();
        FdSpec {
            base_step: self.fd_step.unwrap_or(d.base_step),
            richardson_levels: self.fd_levels.unwrap_or(d.richardson_levels),
            rel_tol: self.fd_tol.unwrap_or(d.rel_tol),
        }
    }

    pub fn potential(&self) -> Result<PotentialModel, CliError> {
        let name = self.model_name()?;
        if name != ModelName::Exact && (self.n.is_some() || self.bc.is_some()) {
            return Err(CliError::Config(
                "--n and --bc apply only to --model exact".into(),
            ));
        }
        let model = match name {
            ModelName::Closed1 => PotentialModel::ClosedForm1,
            ModelName::Closed2 => PotentialModel::ClosedForm2,
            ModelName::Closed3 => PotentialModel::ClosedForm3,
            ModelName::Thermo => PotentialModel::ThermoLimit(QuadratureSpec {
                nodes_per_panel: self.nodes.unwrap_or(QuadratureSpec::default().nodes_per_panel),
                ..QuadratureSpec::default()
            }),
            ModelName::Exact => {
                let n = self
                    .n
                    .ok_or_else(|| CliError::Config("--model exact requires --n".into()))?;
                let boundary = match self.bc.unwrap_or(Bc::Open) {
                    Bc::Open => Boundary::Open,
                    Bc::Periodic => Boundary::Periodic,
                };
                PotentialModel::ExactDiag {
                    chain: SpinChainSpec::new(n, boundary)?,
                    fd: self.fd_spec(),
                }
            }
        };
        model.validate()?;
        Ok(model)
    }

    /// The first coupling: `h` for the single qubit, `J` otherwise.
    pub fn coupling(&self) -> Result<f64, CliError> {
        match self.model_name()? {
            ModelName::Closed1 => {
                if self.j.is_some() {
                    return Err(CliError::Config(
                        "closed1 has no coupling J; its first parameter is the longitudinal field, use --h".into(),
                    ));
                }
                Ok(self.h.unwrap_or(1.0))
            }
            _ => {
                if self.h.is_some() {
                    return Err(CliError::Config(
                        "--h applies only to closed1; use --j for the coupling".into(),
                    ));
                }
                Ok(self.j.unwrap_or(1.0))
            }
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(1.0)
    }

    pub fn sweep(&self) -> Result<SweepConfig, CliError> {
        let mut cfg = SweepConfig::new(self.potential()?, self.coupling()?, self.gamma());
        cfg.t_min = self.t_min.unwrap_or(cfg.t_min);
        cfg.t_max = self.t_max.unwrap_or(cfg.t_max);
        cfg.n_points = self.points.unwrap_or(cfg.n_points);
        cfg.mono_tol = self.mono_tol.unwrap_or(cfg.mono_tol);
        cfg.neg_tol = self.neg_tol.unwrap_or(cfg.neg_tol);
        cfg.validate()?;
        Ok(cfg)
    }
}

impl PointSettings {
    pub fn overlay(mut self, file: &PointSettings) -> Self {
        overlay!(self, file, t, theta, x, dump_spectrum);
        self
    }
}

impl ScanSettings {
    pub fn overlay(mut self, file: &ScanSettings) -> Self {
        overlay!(self, file, gammas, gamma_min, gamma_max, gamma_count);
        self
    }

    /// Explicit list, or `gamma_count` log-spaced values (default 24 over [0.1, 3]).
    pub fn gammas(&self) -> Result<Vec<f64>, CliError> {
        if let Some(list) = &self.gammas {
            if self.gamma_min.is_some() || self.gamma_max.is_some() || self.gamma_count.is_some() {
                return Err(CliError::Config(
                    "give either --gammas or a --gamma-min/--gamma-max/--gamma-count range".into(),
                ));
            }
            return Ok(list.clone());
        }
        let lo = self.gamma_min.unwrap_or(0.1);
        let hi = self.gamma_max.unwrap_or(3.0);
        let n = self.gamma_count.unwrap_or(24);
        if !(lo > 0.0 && hi >= lo && n >= 1) {
            return Err(CliError::Config(format!(
                "invalid gamma range [{lo}, {hi}] with {n} points"
            )));
        }
        Ok(log_space(lo, hi, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_model(model: ModelName) -> Settings {
        Settings {
            model: Some(model),
            ..Settings::default()
        }
    }

    #[test]
    fn flags_win_over_file() {
        let flags = Settings {
            gamma: Some(2.0),
            ..with_model(ModelName::Closed2)
        };
        let file = Settings {
            gamma: Some(0.5),
            points: Some(9),
            ..with_model(ModelName::Thermo)
        };
        let s = flags.overlay(&file);
        assert_eq!(s.model, Some(ModelName::Closed2));
        assert_eq!(s.gamma, Some(2.0));
        assert_eq!(s.points, Some(9));
    }

    #[test]
    fn coupling_names_follow_the_model() {
        let mut s = with_model(ModelName::Closed1);
        s.h = Some(0.7);
        assert_eq!(s.coupling().unwrap(), 0.7);
        s.j = Some(1.0);
        assert!(s.coupling().is_err());
        let mut s = with_model(ModelName::Thermo);
        assert_eq!(s.coupling().unwrap(), 1.0);
        s.h = Some(1.0);
        assert!(s.coupling().is_err());
    }

    #[test]
    fn exact_defaults_to_open_chain() {
        let mut s = with_model(ModelName::Exact);
        assert!(s.potential().is_err());
        s.n = Some(3);
        assert_eq!(s.potential().unwrap().name(), "exact(n=3,open)");
    }

    #[test]
    fn gamma_range_defaults() {
        let g = ScanSettings::default().gammas().unwrap();
        assert_eq!(g.len(), 24);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[23], 3.0);
        let bad = ScanSettings {
            gamma_min: Some(2.0),
            gamma_max: Some(1.0),
            ..ScanSettings::default()
        };
        assert!(bad.gammas().is_err());
    }
}
