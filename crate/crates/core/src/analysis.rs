//! Temperature sweeps, monotonicity classification, Γ scans and power-law fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, CurvatureReport};
use crate::jet::Jet2;
use crate::potentials::{psi_jet_adapted, FramedJet, NaturalPoint, PotentialModel};
use crate::spinchain::FdJet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub model: PotentialModel,
    /// Coupling `J`; the longitudinal field `h` for the single qubit.
    pub j: f64,
    pub gamma: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub mono_tol: f64,
    pub neg_tol: f64,
}

impl SweepConfig {
    pub fn new(model: PotentialModel, j: f64, gamma: f64) -> Self {
        Self {
            model,
            j,
            gamma,
            t_min: 0.05,
            t_max: 50.0,
            n_points: 400,
            mono_tol: 1e-9,
            neg_tol: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(Error::Config(format!(
                "temperature bounds must satisfy 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.n_points < 2 {
            return Err(Error::Config(format!(
                "n_points must be >= 2, got {}",
                self.n_points
            )));
        }
        if !self.j.is_finite() || !self.gamma.is_finite() {
            return Err(Error::Config("couplings must be finite".into()));
        }
        if self.gamma == 0.0 {
            return Err(Error::Config(
                "gamma must be nonzero: without a transverse field the family is classical and the metric degenerates".into(),
            ));
        }
        if !(self.mono_tol >= 0.0 && self.neg_tol >= 0.0) {
            return Err(Error::Config("tolerances must be non-negative".into()));
        }
        self.model.validate()
    }

    /// Log-spaced temperatures from `t_min` to `t_max` inclusive.
    pub fn temperatures(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let last = self.n_points - 1;
        (0..self.n_points)
            .map(|i| match i {
                0 => self.t_min,
                i if i == last => self.t_max,
                i => (a + (b - a) * i as f64 / last as f64).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Ok,
    Degenerate,
    FdNoisy,
}

impl Quality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quality::Ok => "ok",
            Quality::Degenerate => "degenerate",
            Quality::FdNoisy => "fd_noisy",
        }
    }
}

/// One sample of a curvature curve. Fields that could not be computed are NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub theta: f64,
    pub x: f64,
    pub psi: f64,
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub det_g: f64,
    pub r1212: f64,
    pub scalar_r: f64,
    /// The same curvature from the contraction formula.
    pub scalar_r_contraction: f64,
    pub quality: Quality,
}

/// A point evaluation: the potential, the curvature when available, and its quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEvaluation {
    pub psi: f64,
    pub report: Option<CurvatureReport>,
    pub quality: Quality,
}

/// Evaluate `ψ` and its curvature at one point, turning degeneracy and
/// finite-difference noise into quality flags.
pub fn evaluate(model: &PotentialModel, at: NaturalPoint) -> Result<PointEvaluation> {
    let framed = psi_jet_adapted(model, at)?;
    let psi = framed.jet.value();
    match model {
        PotentialModel::ExactDiag { fd, .. } => Ok(evaluate_fd(&framed, fd.rel_tol, psi)),
        _ => match geometry::curvature_from_framed(&framed, geometry::ANALYTIC_CROSS_CHECK_TOL) {
            Ok(report) => Ok(PointEvaluation {
                psi,
                report: Some(report),
                quality: Quality::Ok,
            }),
            Err(Error::DegenerateMetric { .. }) => Ok(PointEvaluation {
                psi,
                report: None,
                quality: Quality::Degenerate,
            }),
            Err(Error::InternalMismatch { .. }) => Ok(PointEvaluation {
                psi,
                report: None,
                quality: Quality::FdNoisy,
            }),
            Err(e) => Err(e),
        },
    }
}

fn evaluate_fd(framed: &FramedJet, rel_tol: f64, psi: f64) -> PointEvaluation {
    let tol = geometry::FD_CROSS_CHECK_TOL;
    let flagged = |quality| PointEvaluation {
        psi,
        report: None,
        quality,
    };
    let report = match geometry::curvature_from_framed(framed, tol) {
        Ok(r) => r,
        Err(Error::DegenerateMetric { .. }) => return flagged(Quality::Degenerate),
        Err(_) => return flagged(Quality::FdNoisy),
    };
    let trusted = framed.fd.is_some_and(|fd| {
        fd.check(rel_tol).is_ok()
            && fd_curvature_error(framed, &fd, report.scalar_r)
                .is_some_and(|err| err <= FD_CURVATURE_TOL * report.scalar_r.abs())
    });
    PointEvaluation {
        psi,
        report: Some(report),
        quality: if trusted { Quality::Ok } else { Quality::FdNoisy },
    }
}

/// Relative accuracy a finite-difference curvature must reach to be flagged `ok`.
pub const FD_CURVATURE_TOL: f64 = 1e-4;

/// Error estimate for `R` from a finite-difference jet: the change against the
/// previous Richardson level plus the response to rounding noise in each coefficient.
fn fd_curvature_error(framed: &FramedJet, fd: &FdJet, r: f64) -> Option<f64> {
    let curvature = |jet: Jet2| {
        geometry::curvature_from_framed(
            &FramedJet { jet, ..*framed },
            geometry::FD_CROSS_CHECK_TOL,
        )
        .ok()
        .map(|rep| rep.scalar_r)
    };
    let mut err = (curvature(fd.previous)? - r).abs();
    for (k, &delta) in fd.noise.iter().enumerate() {
        if delta == 0.0 {
            continue;
        }
        let mut c = *fd.jet.coeffs();
        c[k] += delta;
        err += (curvature(Jet2::from_coeffs(c))? - r).abs();
    }
    Some(err)
}

fn curve_point(t: f64, at: NaturalPoint, eval: PointEvaluation) -> CurvePoint {
    let nan = f64::NAN;
    let r = eval.report;
    CurvePoint {
        t,
        theta: at.p1,
        x: at.p2,
        psi: eval.psi,
        g11: r.map_or(nan, |r| r.g11),
        g12: r.map_or(nan, |r| r.g12),
        g22: r.map_or(nan, |r| r.g22),
        det_g: r.map_or(nan, |r| r.det_g),
        r1212: r.map_or(nan, |r| r.r1212),
        scalar_r: r.map_or(nan, |r| r.scalar_r),
        scalar_r_contraction: r.map_or(nan, |r| r.scalar_r_contraction),
        quality: eval.quality,
    }
}

/// Evaluate the curvature on the configured temperature grid, in ascending `T`.
pub fn sweep(config: &SweepConfig) -> Result<Vec<CurvePoint>> {
    config.validate()?;
    let temps = config.temperatures();
    let eval_one = |&t: &f64| -> Result<CurvePoint> {
        let at = NaturalPoint::new(config.j / t, config.gamma / t);
        Ok(curve_point(t, at, evaluate(&config.model, at)?))
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        temps.par_iter().map(eval_one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        temps.iter().map(eval_one).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    MonotoneDecreasing,
    NonMonotone,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::MonotoneDecreasing => "monotone_decreasing",
            Classification::NonMonotone => "non_monotone",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityVerdict {
    pub classification: Classification,
    /// Temperature intervals over which `R` increases.
    pub violations: Vec<(f64, f64)>,
    pub min_r: f64,
    /// Temperature intervals over which `R < −neg_tol`.
    pub negative_windows: Vec<(f64, f64)>,
    pub r_at_tmax: f64,
}

/// Group consecutive flagged indices into maximal `(start, end)` runs.
fn runs(flags: impl Iterator<Item = bool>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    let mut last = 0;
    for (i, f) in flags.enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
        last = i;
    }
    if let Some(s) = start {
        out.push((s, last));
    }
    out
}

/// Classify a curve sorted by increasing `T` using its `ok` points.
pub fn classify(points: &[CurvePoint], mono_tol: f64, neg_tol: f64) -> Result<MonotonicityVerdict> {
    let ok: Vec<&CurvePoint> = points.iter().filter(|p| p.quality == Quality::Ok).collect();
    let total = points.len();
    if ok.len() < 2 || 10 * ok.len() < 9 * total {
        return Err(Error::InsufficientData {
            ok: ok.len(),
            total,
        });
    }

    // Step i runs from ok[i] to ok[i + 1].
    let rising = ok.windows(2).map(|w| {
        let (a, b) = (w[0].scalar_r, w[1].scalar_r);
        b - a > mono_tol * a.abs().max(1.0)
    });
    let violations: Vec<(f64, f64)> = runs(rising)
        .into_iter()
        .map(|(s, e)| (ok[s].t, ok[e + 1].t))
        .collect();
    let negative_windows = runs(ok.iter().map(|p| p.scalar_r < -neg_tol))
        .into_iter()
        .map(|(s, e)| (ok[s].t, ok[e].t))
        .collect();
    let min_r = ok.iter().map(|p| p.scalar_r).fold(f64::INFINITY, f64::min);
    Ok(MonotonicityVerdict {
        classification: if violations.is_empty() {
            Classification::MonotoneDecreasing
        } else {
            Classification::NonMonotone
        },
        violations,
        min_r,
        negative_windows,
        r_at_tmax: ok.last().expect("at least two points").scalar_r,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub gamma: f64,
    pub verdict: Result<MonotonicityVerdict>,
}

/// Sweep and classify once per transverse field, in the order given.
pub fn scan_gamma(
    model: &PotentialModel,
    j: f64,
    gammas: &[f64],
    defaults: &SweepConfig,
) -> Result<Vec<ScanRow>> {
    if gammas.is_empty() {
        return Err(Error::Config("gamma list is empty".into()));
    }
    if let Some(g) = gammas.iter().find(|g| **g == 0.0 || !g.is_finite()) {
        return Err(Error::Config(format!("invalid gamma {g} in scan")));
    }
    Ok(gammas
        .iter()
        .map(|&gamma| {
            let config = SweepConfig {
                model: *model,
                j,
                gamma,
                ..*defaults
            };
            let verdict =
                sweep(&config).and_then(|pts| classify(&pts, config.mono_tol, config.neg_tol));
            ScanRow { gamma, verdict }
        })
        .collect())
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i == n - 1 => hi,
                    i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least-squares fit of `ln R = ln A + p ln T` over the `ok` points in `[t_lo, t_hi]`.
pub fn powerlaw_fit(points: &[CurvePoint], t_lo: f64, t_hi: f64) -> Result<PowerLawFit> {
    let window: Vec<&CurvePoint> = points
        .iter()
        .filter(|p| p.t >= t_lo && p.t <= t_hi)
        .collect();
    let ok: Vec<&CurvePoint> = window
        .iter()
        .copied()
        .filter(|p| p.quality == Quality::Ok)
        .collect();
    if ok.len() < 8 {
        return Err(Error::InsufficientData {
            ok: ok.len(),
            total: window.len(),
        });
    }
    if let Some(p) = ok.iter().find(|p| !(p.scalar_r > 0.0)) {
        return Err(Error::NonPositiveCurvature {
            t: p.t,
            r: p.scalar_r,
        });
    }
    let n = ok.len() as f64;
    let xs: Vec<f64> = ok.iter().map(|p| p.t.ln()).collect();
    let ys: Vec<f64> = ok.iter().map(|p| p.scalar_r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(PowerLawFit {
        exponent: slope,
        amplitude: intercept.exp(),
        r_squared,
        n_points: ok.len(),
    })
}
