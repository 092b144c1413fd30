//! The acceptance checks behind `bkm validate`.

use std::time::Instant;

use bkm_core::analysis::{
    classify, log_space, powerlaw_fit, scan_gamma, sweep, Classification, CurvePoint,
    MonotonicityVerdict, Quality, ScanRow, SweepConfig,
};
use bkm_core::geometry::{r1_closed_form, scalar_curvature};
use bkm_core::jet::{MULTI_INDICES, N_COEFFS};
use bkm_core::output::curve_csv;
use bkm_core::potentials::{psi3_value, ThreeSiteVariant};
use bkm_core::{
    psi_exact, psi_fd_jet, psi_jet, Axis, Boundary, FdSpec, Jet2, NaturalPoint, PotentialModel,
    QuadratureSpec, SpinChainSpec,
};

struct Check {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn pt(a: f64, b: f64) -> NaturalPoint {
    NaturalPoint::new(a, b)
}

/// Deterministic low-discrepancy samples in `[0, 1)²`.
fn weyl(i: usize) -> (f64, f64) {
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_3;
    let k = (i + 1) as f64;
    ((0.5 + A1 * k).fract(), (0.5 + A2 * k).fract())
}

// Seven-point central stencils on offsets -3..=3.
const D7: [[f64; 7]; 4] = [
    [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [-1.0 / 60.0, 9.0 / 60.0, -45.0 / 60.0, 0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0],
    [2.0 / 180.0, -27.0 / 180.0, 270.0 / 180.0, -490.0 / 180.0, 270.0 / 180.0, -27.0 / 180.0, 2.0 / 180.0],
    [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0],
];

fn fd_taylor(f: fn(f64, f64) -> f64, t: f64, x: f64, h: f64) -> [f64; N_COEFFS] {
    const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
    let mut grid = [[0.0; 7]; 7];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = f(t + (i as f64 - 3.0) * h, x + (j as f64 - 3.0) * h);
        }
    }
    let mut out = [0.0; N_COEFFS];
    for (k, &(a, b)) in MULTI_INDICES.iter().enumerate() {
        let mut acc = 0.0;
        for (i, row) in grid.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                acc += D7[a][i] * D7[b][j] * v;
            }
        }
        out[k] = acc / (h.powi((a + b) as i32) * FACT[a] * FACT[b]);
    }
    out
}

fn worst_rel(a: &[f64; N_COEFFS], b: &[f64; N_COEFFS]) -> f64 {
    let mut scale = [0.0f64; 4];
    for (k, &(p, q)) in MULTI_INDICES.iter().enumerate() {
        scale[p + q] = scale[p + q].max(a[k].abs()).max(b[k].abs());
    }
    MULTI_INDICES
        .iter()
        .enumerate()
        .map(|(k, &(p, q))| (a[k] - b[k]).abs() / scale[p + q].max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn psi1(z: f64, x: f64) -> f64 {
    (2.0 * z.hypot(x).cosh()).ln()
}

fn psi2(t: f64, x: f64) -> f64 {
    (2.0 * t.cosh() + 2.0 * (t * t + 4.0 * x * x).sqrt().cosh()).ln()
}

fn psi3(t: f64, x: f64) -> f64 {
    let a = 2.0 * (t * t + t * x + x * x).sqrt();
    let b = 2.0 * (t * t - t * x + x * x).sqrt();
    (4.0 * (-t).exp() * x.cosh() + 2.0 * (t - x).exp() * a.cosh() + 2.0 * (t + x).exp() * b.cosh())
        .ln()
}

type Oracle = fn(f64, f64) -> f64;

fn check_jets() -> Check {
    let mut worst = 0.0f64;
    let mut evaluated = 0;
    let models: [(PotentialModel, Oracle); 3] = [
        (PotentialModel::ClosedForm1, psi1),
        (PotentialModel::ClosedForm2, psi2),
        (PotentialModel::ClosedForm3, psi3),
    ];
    let mut failure = None;
    for i in 0..20 {
        let (u, v) = weyl(i);
        let (t, x) = (5.0 * u - 2.5, 5.0 * v - 2.5);
        if t.hypot(x) <= 0.1 {
            continue;
        }
        for (model, f) in models {
            match psi_jet(&model, pt(t, x)) {
                Ok(j) => {
                    worst = worst.max(worst_rel(j.coeffs(), &fd_taylor(f, t, x, 0.01)));
                    evaluated += 1;
                }
                Err(e) => failure = Some(e.to_string()),
            }
        }
    }
    Check {
        id: "1",
        name: "jet engine vs finite differences",
        pass: failure.is_none() && worst < 1e-5,
        detail: match failure {
            Some(e) => e,
            None => format!("{evaluated} jets, worst relative deviation {worst:.2e} (limit 1e-5)"),
        },
    }
}

fn check_backends() -> Check {
    let run = || -> bkm_core::Result<(f64, f64, f64, f64, f64)> {
        let open2 = SpinChainSpec::new(2, Boundary::Open)?;
        let ring3 = SpinChainSpec::new(3, Boundary::Periodic)?;
        let (mut d2, mut d3) = (0.0f64, 0.0f64);
        for t in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                d2 = d2.max((psi_exact(&open2, pt(t, x))? - psi2(t, x)).abs());
                let corrected = psi3_value(pt(t, x), ThreeSiteVariant::Corrected)?;
                d3 = d3.max((psi_exact(&ring3, pt(t, x))? - corrected).abs());
            }
        }
        let printed = psi3_value(pt(0.0, 0.0), ThreeSiteVariant::AsPrinted)?;
        let corrected = psi3_value(pt(0.0, 0.0), ThreeSiteVariant::Corrected)?;
        let exact = psi_exact(&ring3, pt(0.0, 0.0))?;
        Ok((d2, d3, printed, corrected, exact))
    };
    match run() {
        Ok((d2, d3, printed, corrected, exact)) => Check {
            id: "2",
            name: "exact diagonalisation vs closed forms",
            pass: d2 < 1e-10 && d3 < 1e-10 && (exact - 8f64.ln()).abs() < 1e-12,
            detail: format!(
                "N=2 open max |Δψ| {d2:.2e}; N=3 ring max |Δψ| {d3:.2e} (limit 1e-10); \
                 three-site formula at (0,0): as printed {printed:.12} = ln 6, corrected {corrected:.12}, \
                 diagonalisation {exact:.12} = ln 8"
            ),
        },
        Err(e) => Check {
            id: "2",
            name: "exact diagonalisation vs closed forms",
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn check_curvature_oracle() -> Check {
    let run = || -> bkm_core::Result<(f64, f64)> {
        let mut worst = 0.0f64;
        for i in 0..50 {
            let (u, v) = weyl(100 + i);
            let r = 0.1 + 3.9 * u;
            let phi = std::f64::consts::TAU * v;
            let j = psi_jet(&PotentialModel::ClosedForm1, pt(r * phi.cos(), r * phi.sin()))?;
            let rep = scalar_curvature(&j)?;
            worst = worst.max((rep.scalar_r - r1_closed_form(r)).abs() / r1_closed_form(r));
        }
        let mut series = 0.0f64;
        for r in [0.05, 0.1, 0.2] {
            let j = psi_jet(&PotentialModel::ClosedForm1, pt(0.0, r))?;
            let lead = 4.0 / 9.0 * r * r;
            series = series.max((scalar_curvature(&j)?.scalar_r - lead).abs() / lead);
        }
        Ok((worst, series))
    };
    match run() {
        Ok((worst, series)) => Check {
            id: "3",
            name: "single-qubit curvature vs closed form",
            pass: worst < 1e-8 && series < 0.02,
            detail: format!(
                "50 points, worst relative error {worst:.2e} (limit 1e-8); (4/9)r² series worst {series:.2e} (limit 2e-2)"
            ),
        },
        Err(e) => Check {
            id: "3",
            name: "single-qubit curvature vs closed form",
            pass: false,
            detail: e.to_string(),
        },
    }
}

struct Curve {
    label: String,
    points: Vec<CurvePoint>,
    verdict: bkm_core::Result<MonotonicityVerdict>,
}

fn curve(model: PotentialModel, label: &str, gamma: f64) -> bkm_core::Result<Curve> {
    let cfg = SweepConfig::new(model, 1.0, gamma);
    let points = sweep(&cfg)?;
    let verdict = classify(&points, cfg.mono_tol, cfg.neg_tol);
    Ok(Curve {
        label: format!("{label} Γ={gamma}"),
        points,
        verdict,
    })
}

fn nearest(points: &[CurvePoint], t: f64) -> &CurvePoint {
    points
        .iter()
        .min_by(|a, b| (a.t.ln() - t.ln()).abs().total_cmp(&(b.t.ln() - t.ln()).abs()))
        .expect("curves are non-empty")
}

fn monotone_check(id: &'static str, name: &'static str, curves: &[Curve]) -> Check {
    let mut parts = Vec::new();
    let mut pass = true;
    for c in curves {
        match &c.verdict {
            Ok(v) => {
                let ok = v.classification == Classification::MonotoneDecreasing && v.min_r >= -1e-10;
                pass &= ok;
                parts.push(format!("{}: {} (min R {:.3e})", c.label, v.classification.as_str(), v.min_r));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{}: {e}", c.label));
            }
        }
    }
    Check {
        id,
        name,
        pass,
        detail: parts.join("; "),
    }
}

fn quadrature_doubling(gammas: &[f64]) -> bkm_core::Result<f64> {
    let q = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for &g in gammas {
        for t in SweepConfig::new(PotentialModel::thermo(), 1.0, g).temperatures() {
            let at = pt(1.0 / t, g / t);
            let a = bkm_core::psi_jet_adapted(&PotentialModel::ThermoLimit(q), at)?.jet;
            let b = bkm_core::psi_jet_adapted(&PotentialModel::ThermoLimit(q.doubled()), at)?.jet;
            for k in 0..N_COEFFS {
                let (u, v) = (a.coeffs()[k], b.coeffs()[k]);
                let s = u.abs().max(v.abs());
                if s > 0.0 {
                    worst = worst.max((u - v).abs() / s);
                }
            }
        }
    }
    Ok(worst)
}

fn symmetry_check(curves: &[&Curve]) -> Check {
    let run = || -> bkm_core::Result<(f64, f64, usize, f64)> {
        let mut models = vec![
            PotentialModel::ClosedForm1,
            PotentialModel::ClosedForm2,
            PotentialModel::ClosedForm3,
            PotentialModel::thermo(),
        ];
        for (n, bc) in [(2, Boundary::Open), (3, Boundary::Periodic), (4, Boundary::Periodic)] {
            models.push(PotentialModel::exact(SpinChainSpec::new(n, bc)?));
        }
        let mut field = 0.0f64;
        let mut coupling = 0.0f64;
        for i in 0..10 {
            let (u, v) = weyl(200 + i);
            let (t, x) = (4.0 * u - 2.0, 2.0 * v + 0.05);
            for m in &models {
                let value = |a: f64, b: f64| -> bkm_core::Result<f64> {
                    match m {
                        PotentialModel::ExactDiag { chain, .. } => psi_exact(chain, pt(a, b)),
                        _ => Ok(psi_jet(m, pt(a, b))?.value()),
                    }
                };
                field = field.max((value(t, x)? - value(t, -x)?).abs());
                if matches!(m, PotentialModel::ClosedForm2 | PotentialModel::ThermoLimit(_)) {
                    coupling = coupling.max((value(t, x)? - value(-t, x)?).abs());
                }
            }
        }
        let mut not_pd = 0;
        for c in curves {
            not_pd += c
                .points
                .iter()
                .filter(|p| p.quality == Quality::Ok)
                .filter(|p| !(p.g11 > 0.0 && p.g22 > 0.0 && p.det_g > 0.0))
                .count();
        }
        let t = Jet2::var(0.7, Axis::Theta);
        let x = Jet2::var(-1.1, Axis::X);
        let bits = Jet2::log_sum_exp(&[t + x, t - x, -t + x, -t - x])?;
        let flat = scalar_curvature(&bits)?.scalar_r.abs();
        Ok((field, coupling, not_pd, flat))
    };
    match run() {
        Ok((field, coupling, not_pd, flat)) => Check {
            id: "10",
            name: "symmetries, positivity, flat fixture",
            pass: field <= 1e-12 && coupling <= 1e-12 && not_pd == 0 && flat < 1e-9,
            detail: format!(
                "max |ψ(θ,x)−ψ(θ,−x)| {field:.1e}; max |ψ(θ,x)−ψ(−θ,x)| {coupling:.1e}; \
                 {not_pd} ok-points with non-positive metric; independent bits |R| {flat:.1e}"
            ),
        },
        Err(e) => Check {
            id: "10",
            name: "symmetries, positivity, flat fixture",
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn fd_precision_check(fd_tol: f64) -> Check {
    let spec = match SpinChainSpec::new(2, Boundary::Open) {
        Ok(s) => s,
        Err(e) => {
            return Check {
                id: "fd",
                name: "finite-difference precision",
                pass: false,
                detail: e.to_string(),
            }
        }
    };
    let fd = FdSpec {
        rel_tol: fd_tol,
        ..FdSpec::default()
    };
    let at = pt(0.8, 0.6);
    let result = psi_fd_jet(&spec, at, &fd).and_then(|j| {
        let analytic = psi_jet(&PotentialModel::ClosedForm2, at)?;
        Ok(worst_rel(j.coeffs(), analytic.coeffs()))
    });
    match result {
        Ok(dev) => Check {
            id: "fd",
            name: "finite-difference precision",
            pass: dev < 1e-6,
            detail: format!(
                "exact N=2 at (0.8, 0.6): Richardson levels agree to {fd_tol:.0e}, worst deviation from closed form {dev:.2e} (limit 1e-6)"
            ),
        },
        Err(e) => Check {
            id: "fd",
            name: "finite-difference precision",
            pass: false,
            detail: format!("{} error: {e}", e.kind()),
        },
    }
}

fn scan_summary(rows: &[ScanRow]) -> (usize, f64) {
    let non_monotone = rows
        .iter()
        .filter(|r| {
            r.verdict
                .as_ref()
                .is_ok_and(|v| v.classification == Classification::NonMonotone)
        })
        .count();
    let min_r = rows
        .iter()
        .filter_map(|r| r.verdict.as_ref().ok())
        .map(|v| v.min_r)
        .fold(f64::INFINITY, f64::min);
    (non_monotone, min_r)
}

/// Run every check, print one line per check, and return the number of failures.
pub fn run(fd_tol: f64, color: bool) -> usize {
    let mut checks = Vec::new();
    let started = Instant::now();

    checks.push(check_jets());
    checks.push(check_backends());
    checks.push(check_curvature_oracle());

    let gammas = [0.5, 1.0, 2.0];
    let load = |model: PotentialModel, label: &str| -> bkm_core::Result<Vec<Curve>> {
        gammas.iter().map(|&g| curve(model, label, g)).collect()
    };
    let n1 = load(PotentialModel::ClosedForm1, "N=1");
    let ninf = load(PotentialModel::thermo(), "N=∞");
    let scan_gammas = log_space(0.1, 3.0, 24);
    let scan_points = |model: PotentialModel, label: &str| -> bkm_core::Result<Vec<Curve>> {
        scan_gammas.iter().map(|&g| curve(model, label, g)).collect()
    };
    let n2 = scan_points(PotentialModel::ClosedForm2, "N=2");
    let n3 = scan_points(PotentialModel::ClosedForm3, "N=3");

    let all_ok = n1.is_ok() && ninf.is_ok() && n2.is_ok() && n3.is_ok();
    let failed_sweep = |id, name, e: String| Check {
        id,
        name,
        pass: false,
        detail: e,
    };
    if !all_ok {
        let err = [&n1, &ninf, &n2, &n3]
            .iter()
            .find_map(|r| r.as_ref().err().map(|e| e.to_string()))
            .unwrap_or_default();
        for (id, name) in [
            ("4", "determinant vs contraction form"),
            ("5", "N=1 monotone"),
            ("6", "N=∞ monotone"),
            ("7", "N=2, N=3 non-monotone"),
            ("8", "high- and low-temperature limits"),
            ("9", "power law at Γ=J"),
        ] {
            checks.push(failed_sweep(id, name, err.clone()));
        }
    } else {
        let (n1, ninf, n2, n3) = (n1.unwrap(), ninf.unwrap(), n2.unwrap(), n3.unwrap());
        let every: Vec<&Curve> = n1.iter().chain(&ninf).chain(&n2).chain(&n3).collect();

        let mut worst = 0.0f64;
        let mut count = 0;
        for c in &every {
            for p in c.points.iter().filter(|p| p.quality == Quality::Ok) {
                worst = worst.max((p.scalar_r - p.scalar_r_contraction).abs() / p.scalar_r.abs());
                count += 1;
            }
        }
        let flagged: usize = every
            .iter()
            .map(|c| c.points.iter().filter(|p| p.quality != Quality::Ok).count())
            .sum();
        checks.push(Check {
            id: "4",
            name: "determinant vs contraction form",
            pass: worst <= 1e-9 && flagged == 0,
            detail: format!(
                "{count} sweep points, worst relative difference {worst:.2e} (limit 1e-9), {flagged} flagged points"
            ),
        });

        checks.push(monotone_check("5", "N=1 monotone", &n1));
        let mut c6 = monotone_check("6", "N=∞ monotone", &ninf);
        match quadrature_doubling(&gammas) {
            Ok(d) => {
                c6.pass &= d < 1e-10;
                c6.detail
                    .push_str(&format!("; node doubling changes jets by ≤ {d:.2e} (limit 1e-10)"));
            }
            Err(e) => {
                c6.pass = false;
                c6.detail.push_str(&format!("; node doubling failed: {e}"));
            }
        }
        checks.push(c6);

        let base2 = SweepConfig::new(PotentialModel::ClosedForm2, 1.0, 1.0);
        let rows2 = scan_gamma(&base2.model, 1.0, &scan_gammas, &base2).unwrap_or_default();
        let base3 = SweepConfig::new(PotentialModel::ClosedForm3, 1.0, 1.0);
        let rows3 = scan_gamma(&base3.model, 1.0, &scan_gammas, &base3).unwrap_or_default();
        let (nm2, min2) = scan_summary(&rows2);
        let (nm3, min3) = scan_summary(&rows3);
        checks.push(Check {
            id: "7",
            name: "N=2, N=3 non-monotone",
            pass: nm2 >= 1 && nm3 >= 1 && min2.min(min3) < -1e-9,
            detail: format!(
                "closed2: {nm2}/24 non_monotone, min R {min2:.3e}; closed3: {nm3}/24 non_monotone, min R {min3:.3e}"
            ),
        });

        let mut tail_worst = 0.0f64;
        let mut ratio_worst = f64::INFINITY;
        let mut monotone_count = 0;
        for c in &every {
            let last = c.points.last().expect("non-empty");
            tail_worst = tail_worst.max(last.scalar_r.abs());
            if c
                .verdict
                .as_ref()
                .is_ok_and(|v| v.classification == Classification::MonotoneDecreasing)
            {
                monotone_count += 1;
                let ratio = c.points[0].scalar_r / nearest(&c.points, 1.0).scalar_r;
                ratio_worst = ratio_worst.min(ratio);
            }
        }
        checks.push(Check {
            id: "8",
            name: "high- and low-temperature limits",
            pass: tail_worst < 1e-2 && ratio_worst > 10.0,
            detail: format!(
                "{} curves, max |R(50)| {tail_worst:.3e} (limit 1e-2); {monotone_count} monotone curves, min R(0.05)/R(1) {ratio_worst:.3e} (limit 10)",
                every.len()
            ),
        });

        let critical = &ninf[1];
        checks.push(match powerlaw_fit(&critical.points, 0.05, 0.3) {
            Ok(fit) => Check {
                id: "9",
                name: "power law at Γ=J",
                pass: fit.r_squared > 0.99,
                detail: format!(
                    "N=∞, J=Γ=1, T in [0.05, 0.3]: exponent {:.4}, amplitude {:.4}, R² {:.6} over {} points (limit R² > 0.99)",
                    fit.exponent, fit.amplitude, fit.r_squared, fit.n_points
                ),
            },
            Err(e) => Check {
                id: "9",
                name: "power law at Γ=J",
                pass: false,
                detail: e.to_string(),
            },
        });

        checks.push(symmetry_check(&every));
    }
    if checks.iter().all(|c| c.id != "10") {
        checks.push(symmetry_check(&[]));
    }

    let determinism = (|| -> bkm_core::Result<bool> {
        let cfg = SweepConfig::new(PotentialModel::thermo(), 1.0, 1.0);
        Ok(curve_csv(&sweep(&cfg)?) == curve_csv(&sweep(&cfg)?))
    })();
    checks.push(Check {
        id: "11",
        name: "deterministic CSV",
        pass: determinism == Ok(true),
        detail: match determinism {
            Ok(true) => "two N=∞ sweeps produced byte-identical CSV".into(),
            Ok(false) => "two N=∞ sweeps produced different CSV".into(),
            Err(e) => e.to_string(),
        },
    });
    checks.push(fd_precision_check(fd_tol));

    let (green, red, reset) = if color {
        ("\x1b[32m", "\x1b[31m", "\x1b[0m")
    } else {
        ("", "", "")
    };
    let mut failures = 0;
    for c in &checks {
        let status = if c.pass {
            format!("{green}PASS{reset}")
        } else {
            failures += 1;
            format!("{red}FAIL{reset}")
        };
        println!("{status} [{}] {}: {}", c.id, c.name, c.detail);
    }
    println!(
        "{} of {} checks passed in {:.1} s",
        checks.len() - failures,
        checks.len(),
        started.elapsed().as_secs_f64()
    );
    failures
}
