use bkm_core::analysis::{self, classify, scan_gamma, sweep, Quality};
use bkm_core::geometry::{self, ANALYTIC_CROSS_CHECK_TOL, FD_CROSS_CHECK_TOL};
use bkm_core::output::{curve_csv, curve_series, format_f64, render_svg, SvgOptions};
use bkm_core::{build_observables, psi_jet_adapted, NaturalPoint, PotentialModel};
use serde_json::{json, Map, Value};

use crate::config::{ModelName, PointSettings, ScanSettings, Settings};
use crate::output::{num, stdout, to_json, write_atomic};
use crate::CliError;

fn reject(flag: &str, present: bool, command: &str) -> Result<(), CliError> {
    if present {
        return Err(CliError::Config(format!(
            "--{flag} is not used by the {command} command"
        )));
    }
    Ok(())
}

fn coupling_key(name: ModelName) -> &'static str {
    if name == ModelName::Closed1 {
        "h"
    } else {
        "j"
    }
}

/// The error that made a point unusable, recomputed for the report.
fn point_failure(model: &PotentialModel, at: NaturalPoint) -> CliError {
    let tol = match model {
        PotentialModel::ExactDiag { .. } => FD_CROSS_CHECK_TOL,
        _ => ANALYTIC_CROSS_CHECK_TOL,
    };
    match psi_jet_adapted(model, at).and_then(|f| geometry::curvature_from_framed(&f, tol)) {
        Err(e) => e.into(),
        Ok(_) => CliError::Numerical(bkm_core::Error::Config(
            "curvature could not be evaluated reliably".into(),
        )),
    }
}

pub fn point(s: &Settings, p: &PointSettings) -> Result<(), CliError> {
    reject("out-svg", s.out_svg.is_some(), "point")?;
    reject("log-y", s.log_y.is_some(), "point")?;
    let name = s.model_name()?;
    let model = s.potential()?;

    let mut input = Map::new();
    input.insert("model".into(), json!(model.name()));
    let at = match (p.t, p.theta, p.x) {
        (Some(t), None, None) => {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("--t must be positive, got {t}")));
            }
            let c = s.coupling()?;
            input.insert(coupling_key(name).into(), json!(c));
            input.insert("gamma".into(), json!(s.gamma()));
            input.insert("t".into(), json!(t));
            NaturalPoint::new(c / t, s.gamma() / t)
        }
        (None, Some(theta), Some(x)) => {
            if s.j.is_some() || s.h.is_some() || s.gamma.is_some() {
                return Err(CliError::Config(
                    "--j/--h/--gamma are only used together with --t".into(),
                ));
            }
            NaturalPoint::new(theta, x)
        }
        _ => {
            return Err(CliError::Config(
                "give either --t, or both --theta and --x".into(),
            ))
        }
    };
    if !at.is_finite() {
        return Err(CliError::Config(format!("non-finite point {at:?}")));
    }
    input.insert("theta".into(), json!(at.p1));
    input.insert("x".into(), json!(at.p2));

    let spectrum = if p.dump_spectrum.unwrap_or(false) {
        let PotentialModel::ExactDiag { chain, .. } = model else {
            return Err(CliError::Config(
                "--dump-spectrum needs --model exact".into(),
            ));
        };
        let values = build_observables(&chain)?.spectrum(at)?;
        let mut csv = String::from("index,eigenvalue\n");
        for (i, v) in values.iter().enumerate() {
            csv.push_str(&format!("{i},{}\n", format_f64(*v)));
        }
        Some(csv)
    } else {
        reject("out-csv", s.out_csv.is_some(), "point without --dump-spectrum")?;
        None
    };

    let eval = analysis::evaluate(&model, at)?;
    let Some(rep) = eval.report else {
        return Err(point_failure(&model, at));
    };
    let out = json!({
        "input": input,
        "psi": num(eval.psi),
        "g11": num(rep.g11),
        "g12": num(rep.g12),
        "g22": num(rep.g22),
        "det_g": num(rep.det_g),
        "gamma": rep.gamma.iter().map(|v| num(*v)).collect::<Vec<_>>(),
        "r1212": num(rep.r1212),
        "scalar_r": num(rep.scalar_r),
        "scalar_r_contraction": num(rep.scalar_r_contraction),
        "condition": num(rep.condition),
        "quality": eval.quality.as_str(),
    });
    let text = to_json(&out);
    if let Some(path) = &s.out_json {
        write_atomic(path, text.as_bytes())?;
    }
    stdout(&text)?;
    if let Some(csv) = spectrum {
        match &s.out_csv {
            Some(path) => write_atomic(path, csv.as_bytes())?,
            None => stdout(&csv)?,
        }
    }
    Ok(())
}

fn verdict_json(v: &analysis::MonotonicityVerdict) -> Value {
    let pairs = |w: &[(f64, f64)]| w.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>();
    json!({
        "classification": v.classification.as_str(),
        "violations": pairs(&v.violations),
        "min_r": num(v.min_r),
        "negative_windows": pairs(&v.negative_windows),
        "r_at_tmax": num(v.r_at_tmax),
    })
}

fn error_json(e: &bkm_core::Error) -> Value {
    json!({ "kind": e.kind(), "message": e.to_string() })
}

fn fmt_short(v: f64) -> String {
    format!("{v:.6e}")
}

pub fn curve(s: &Settings) -> Result<(), CliError> {
    let name = s.model_name()?;
    let cfg = s.sweep()?;
    let points = sweep(&cfg)?;
    let csv = curve_csv(&points);
    let ok = points.iter().filter(|p| p.quality == Quality::Ok).count();
    let verdict = classify(&points, cfg.mono_tol, cfg.neg_tol);

    let label = format!(
        "{}, {}={}, Γ={}",
        cfg.model.name(),
        if name == ModelName::Closed1 { "h" } else { "J" },
        cfg.j,
        cfg.gamma
    );
    if let Some(path) = &s.out_svg {
        let svg = render_svg(
            &[curve_series(&label, &points)],
            &SvgOptions {
                title: format!("R(T): {label}"),
                log_y: s.log_y.unwrap_or(false),
                ..SvgOptions::default()
            },
        );
        write_atomic(path, svg.as_bytes())?;
    }
    if let Some(path) = &s.out_json {
        let out = json!({
            "model": cfg.model.name(),
            coupling_key(name): cfg.j,
            "gamma": cfg.gamma,
            "t_min": cfg.t_min,
            "t_max": cfg.t_max,
            "points": cfg.n_points,
            "ok_points": ok,
            "verdict": match &verdict { Ok(v) => verdict_json(v), Err(e) => json!({ "error": error_json(e) }) },
        });
        write_atomic(path, to_json(&out).as_bytes())?;
    }

    let summary = match &verdict {
        Ok(v) => format!(
            "{label}: {} points, {ok} ok, {}, {} violation interval(s), min R = {}",
            points.len(),
            v.classification.as_str(),
            v.violations.len(),
            fmt_short(v.min_r)
        ),
        Err(e) => format!("{label}: {} points, {ok} ok, unclassified ({e})", points.len()),
    };
    match &s.out_csv {
        Some(path) => {
            write_atomic(path, csv.as_bytes())?;
            stdout(&format!("{summary}\n"))?;
        }
        None => {
            stdout(&csv)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

pub fn scan(s: &Settings, sc: &ScanSettings) -> Result<(), CliError> {
    reject("out-csv", s.out_csv.is_some(), "scan")?;
    reject("out-svg", s.out_svg.is_some(), "scan")?;
    reject("log-y", s.log_y.is_some(), "scan")?;
    if s.gamma.is_some() {
        return Err(CliError::Config(
            "scan takes --gammas or --gamma-min/--gamma-max/--gamma-count, not --gamma".into(),
        ));
    }
    let name = s.model_name()?;
    let gammas = sc.gammas()?;
    let base = s.sweep()?;
    let rows = scan_gamma(&base.model, base.j, &gammas, &base)?;

    let mut non_monotone = 0;
    let mut negative = 0;
    let mut failed = 0;
    let table: Vec<Value> = rows
        .iter()
        .map(|row| match &row.verdict {
            Ok(v) => {
                if v.classification == analysis::Classification::NonMonotone {
                    non_monotone += 1;
                }
                if v.min_r < -base.neg_tol {
                    negative += 1;
                }
                let mut obj = verdict_json(v);
                obj["gamma"] = json!(row.gamma);
                obj
            }
            Err(e) => {
                failed += 1;
                json!({ "gamma": row.gamma, "error": error_json(e) })
            }
        })
        .collect();
    let text = to_json(&Value::Array(table));
    let summary = format!(
        "{}, {}={}: {} of {} fields non_monotone, {} with negative R, {} failed",
        base.model.name(),
        if name == ModelName::Closed1 { "h" } else { "J" },
        base.j,
        non_monotone,
        rows.len(),
        negative,
        failed
    );
    match &s.out_json {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            stdout(&format!("{summary}\n"))?;
        }
        None => {
            stdout(&text)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}
