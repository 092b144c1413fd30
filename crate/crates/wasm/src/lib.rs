//! WebAssembly bindings for the browser demo in `www/`.

use bkm_core::analysis::{classify, evaluate, scan_gamma, sweep, MonotonicityVerdict, Quality, SweepConfig};
use bkm_core::output::{curve_series, render_svg, SvgOptions};
use bkm_core::{Boundary, FdSpec, NaturalPoint, PotentialModel, SpinChainSpec};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn model(name: &str, n: usize) -> Result<PotentialModel, String> {
    let m = match name {
        "closed1" => PotentialModel::ClosedForm1,
        "closed2" => PotentialModel::ClosedForm2,
        "closed3" => PotentialModel::ClosedForm3,
        "thermo" => PotentialModel::thermo(),
        "exact" => PotentialModel::ExactDiag {
            chain: SpinChainSpec::new(n, Boundary::Periodic).map_err(|e| e.to_string())?,
            fd: FdSpec::default(),
        },
        other => return Err(format!("unknown model {other}")),
    };
    Ok(m)
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn verdict(v: &MonotonicityVerdict) -> Value {
    json!({
        "classification": v.classification.as_str(),
        "violations": v.violations,
        "min_r": num(v.min_r),
        "negative_windows": v.negative_windows,
        "r_at_tmax": num(v.r_at_tmax),
    })
}

pub fn curve(name: &str, n: usize, j: f64, gamma: f64, points: usize, log_y: bool) -> Result<String, String> {
    let mut cfg = SweepConfig::new(model(name, n)?, j, gamma);
    cfg.n_points = points;
    cfg.validate().map_err(|e| e.to_string())?;
    let curve = sweep(&cfg).map_err(|e| e.to_string())?;
    let label = format!("{}, Γ={gamma}", cfg.model.name());
    let svg = render_svg(
        &[curve_series(&label, &curve)],
        &SvgOptions {
            title: format!("R(T): {label}"),
            log_y,
            ..SvgOptions::default()
        },
    );
    let v = match classify(&curve, cfg.mono_tol, cfg.neg_tol) {
        Ok(v) => verdict(&v),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let ok = curve.iter().filter(|p| p.quality == Quality::Ok).count();
    Ok(json!({ "svg": svg, "verdict": v, "ok_points": ok, "points": curve.len() }).to_string())
}

pub fn point(name: &str, n: usize, theta: f64, x: f64) -> Result<String, String> {
    let m = model(name, n)?;
    let e = evaluate(&m, NaturalPoint::new(theta, x)).map_err(|e| e.to_string())?;
    let Some(r) = e.report else {
        return Ok(json!({ "psi": num(e.psi), "quality": e.quality.as_str() }).to_string());
    };
    Ok(json!({
        "psi": num(e.psi),
        "g11": r.g11, "g12": r.g12, "g22": r.g22, "det_g": r.det_g,
        "r1212": r.r1212, "scalar_r": r.scalar_r,
        "quality": e.quality.as_str(),
    })
    .to_string())
}

pub fn scan(name: &str, n: usize, j: f64, gamma_min: f64, gamma_max: f64, count: usize) -> Result<String, String> {
    if !(gamma_min > 0.0 && gamma_max >= gamma_min && count >= 1) {
        return Err(format!("invalid range [{gamma_min}, {gamma_max}] with {count} points"));
    }
    let m = model(name, n)?;
    let gammas = bkm_core::analysis::log_space(gamma_min, gamma_max, count);
    let base = SweepConfig::new(m, j, 1.0);
    let rows = scan_gamma(&m, j, &gammas, &base).map_err(|e| e.to_string())?;
    let out: Vec<Value> = rows
        .iter()
        .map(|row| match &row.verdict {
            Ok(v) => {
                let mut o = verdict(v);
                o["gamma"] = json!(row.gamma);
                o
            }
            Err(e) => json!({ "gamma": row.gamma, "error": e.to_string() }),
        })
        .collect();
    Ok(Value::Array(out).to_string())
}

#[wasm_bindgen]
pub fn curve_json(model: &str, n: usize, j: f64, gamma: f64, points: usize, log_y: bool) -> Result<String, JsError> {
    curve(model, n, j, gamma, points, log_y).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn point_json(model: &str, n: usize, theta: f64, x: f64) -> Result<String, JsError> {
    point(model, n, theta, x).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn scan_json(model: &str, n: usize, j: f64, gamma_min: f64, gamma_max: f64, count: usize) -> Result<String, JsError> {
    scan(model, n, j, gamma_min, gamma_max, count).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_carries_svg_and_verdict() {
        let v: Value = serde_json::from_str(&curve("closed1", 0, 1.0, 1.0, 40, false).unwrap()).unwrap();
        assert!(v["svg"].as_str().unwrap().contains("<polyline"));
        assert_eq!(v["verdict"]["classification"], "monotone_decreasing");
    }

    #[test]
    fn point_reports_curvature() {
        let v: Value = serde_json::from_str(&point("closed2", 0, 0.4, 0.3).unwrap()).unwrap();
        assert!(v["scalar_r"].as_f64().unwrap().is_finite());
    }

    #[test]
    fn scan_flags_small_fields() {
        let v: Value = serde_json::from_str(&scan("closed2", 0, 1.0, 0.1, 0.2, 2).unwrap()).unwrap();
        assert_eq!(v[0]["classification"], "non_monotone");
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(curve("closed9", 0, 1.0, 1.0, 40, false).is_err());
        assert!(curve("closed2", 0, 1.0, 0.0, 40, false).is_err());
        assert!(scan("closed2", 0, 1.0, 1.0, 0.5, 3).is_err());
    }
}
