//! BKM metric, Christoffel symbols and scalar curvature from a jet of `ψ`.
//!
//! With `ψ_ij` the Hessian and `ψ_ijk` the third derivatives,
//!
//! ```text
//! g_ij = ψ_ij,   Γ_ijk = ψ_ijk / 2,
//! R_1212 = ¼ g^{ab} (ψ_a11 ψ_b22 − ψ_a12 ψ_b12),   R = 2 R_1212 / det g,
//! ```
//!
//! and equivalently `R = det[[ψ11, ψ12, ψ22], [ψ111, ψ112, ψ122], [ψ112, ψ122, ψ222]] / (2 (det g)²)`.
//! Both forms are evaluated and compared. The sign convention makes a sphere
//! negatively curved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::potentials::{Frame, FramedJet};

/// Default agreement required between the two curvature formulas for analytic jets.
pub const ANALYTIC_CROSS_CHECK_TOL: f64 = 1e-9;
/// Agreement required for finite-difference jets.
pub const FD_CROSS_CHECK_TOL: f64 = 1e-4;
/// A metric with `det g <= DEGENERACY_RATIO · g11 · g22` is rejected.
pub const DEGENERACY_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub det_g: f64,
    /// Distinct Christoffel symbols `Γ_111, Γ_112, Γ_122, Γ_222`.
    pub gamma: [f64; 4],
    pub r1212: f64,
    /// Determinant form.
    pub scalar_r: f64,
    /// Contraction form.
    pub scalar_r_contraction: f64,
    /// Ratio of the larger to the smaller metric eigenvalue.
    pub condition: f64,
}

/// Hessian `(g11, g12, g22)` of the jet, rejecting near-singular metrics.
pub fn metric_from_jet(psi: &Jet2) -> Result<(f64, f64, f64)> {
    let g = hessian(psi);
    check_metric(g)?;
    Ok(g)
}

fn hessian(psi: &Jet2) -> (f64, f64, f64) {
    (2.0 * psi.c(2, 0), psi.c(1, 1), 2.0 * psi.c(0, 2))
}

fn third(psi: &Jet2) -> [f64; 4] {
    [
        6.0 * psi.c(3, 0),
        2.0 * psi.c(2, 1),
        2.0 * psi.c(1, 2),
        6.0 * psi.c(0, 3),
    ]
}

fn check_metric((g11, g12, g22): (f64, f64, f64)) -> Result<f64> {
    let det_g = g11 * g22 - g12 * g12;
    let ok = g11 > 0.0 && g22 > 0.0 && det_g > DEGENERACY_RATIO * g11 * g22;
    if ok && det_g.is_finite() {
        Ok(det_g)
    } else {
        Err(Error::DegenerateMetric { det_g, g11, g22 })
    }
}

struct Curvature {
    det_g: f64,
    r1212: f64,
    det_form: f64,
    contraction_form: f64,
}

fn curvature_parts(g: (f64, f64, f64), t: [f64; 4], tol: f64) -> Result<Curvature> {
    let det_g = check_metric(g)?;
    let (a, b, c) = g;
    let [d, e, f, h] = t;

    let products = [a * e * h, a * f * f, b * d * h, b * e * f, c * d * f, c * e * e];
    let det3 = products[0] - products[1] - products[2] + products[3] + products[4] - products[5];
    let det_form = det3 / (2.0 * det_g * det_g);

    // g^{ab} = [[c, -b], [-b, a]] / det g
    let inv = [[c / det_g, -b / det_g], [-b / det_g, a / det_g]];
    let psi_a11 = [d, e];
    let psi_a12 = [e, f];
    let psi_a22 = [f, h];
    let mut r1212 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            r1212 += inv[i][j] * (psi_a11[i] * psi_a22[j] - psi_a12[i] * psi_a12[j]);
        }
    }
    r1212 *= 0.25;
    let contraction_form = 2.0 * r1212 / det_g;

    let scale = products.iter().map(|p| p.abs()).sum::<f64>() / (2.0 * det_g * det_g);
    let diff = (det_form - contraction_form).abs();
    if !(diff <= tol * det_form.abs().max(scale)) {
        return Err(Error::InternalMismatch {
            det_form,
            contraction_form,
        });
    }
    Ok(Curvature {
        det_g,
        r1212,
        det_form,
        contraction_form,
    })
}

fn condition((g11, g12, g22): (f64, f64, f64), det_g: f64) -> f64 {
    let half_trace = 0.5 * (g11 + g22);
    let disc = (0.5 * (g11 - g22)).hypot(g12);
    let big = half_trace + disc;
    big / (det_g / big)
}

/// Full curvature report for a `(θ, x)` jet, cross-checked to 1e-9.
pub fn scalar_curvature(psi: &Jet2) -> Result<CurvatureReport> {
    scalar_curvature_with_tol(psi, ANALYTIC_CROSS_CHECK_TOL)
}

pub fn scalar_curvature_with_tol(psi: &Jet2, tol: f64) -> Result<CurvatureReport> {
    let g = hessian(psi);
    let t = third(psi);
    let parts = curvature_parts(g, t, tol)?;
    Ok(CurvatureReport {
        g11: g.0,
        g12: g.1,
        g22: g.2,
        det_g: parts.det_g,
        gamma: t.map(|v| 0.5 * v),
        r1212: parts.r1212,
        scalar_r: parts.det_form,
        scalar_r_contraction: parts.contraction_form,
        condition: condition(g, parts.det_g),
    })
}

/// Curvature report for a jet expressed in any frame, with tensor components
/// reported in `(θ, x)`.
///
/// The determinant, `R_1212` and `R` are invariant under the rotation between
/// frames, so they are taken from the frame in which the jet was computed.
pub fn curvature_from_framed(framed: &FramedJet, tol: f64) -> Result<CurvatureReport> {
    let g_frame = hessian(&framed.jet);
    let parts = curvature_parts(g_frame, third(&framed.jet), tol)?;
    let (g, t) = match framed.frame {
        Frame::Standard => (g_frame, third(&framed.jet)),
        frame => {
            let std = frame.to_standard(&framed.jet);
            (frame.metric_to_standard(g_frame), third(&std))
        }
    };
    Ok(CurvatureReport {
        g11: g.0,
        g12: g.1,
        g22: g.2,
        det_g: parts.det_g,
        gamma: t.map(|v| 0.5 * v),
        r1212: parts.r1212,
        scalar_r: parts.det_form,
        scalar_r_contraction: parts.contraction_form,
        condition: condition(g_frame, parts.det_g),
    })
}

/// Below this radius the single-qubit curvature switches to its Taylor series.
pub const R_SWITCH: f64 = 1e-2;

/// Scalar curvature of the single-qubit family as a function of `r = √(z² + x²)`:
///
/// ```text
/// R₁(r) = (2r − tanh r) cosh²r / (2r² tanh r) − (1 + tanh²r) / (2 tanh²r)
/// ```
pub fn r1_closed_form(r: f64) -> f64 {
    let r = r.abs();
    if r <= R_SWITCH {
        let r2 = r * r;
        return r2 * (4.0 / 9.0 + r2 * (16.0 / 135.0 + r2 * 16.0 / 1575.0));
    }
    let t = r.tanh();
    let c = r.cosh();
    (2.0 * r - t) / (2.0 * r * r * t) * c * c - (1.0 + t * t) / (2.0 * t * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Axis;
    use crate::potentials::{psi_jet, psi_jet_adapted, NaturalPoint, PotentialModel};
    use approx::assert_relative_eq;

    fn closed1(z: f64, x: f64) -> Jet2 {
        psi_jet(&PotentialModel::ClosedForm1, NaturalPoint::new(z, x)).unwrap()
    }

    #[test]
    fn identity_metric_at_origin() {
        let g = metric_from_jet(&closed1(0.0, 0.0)).unwrap();
        assert_eq!(g, (1.0, 0.0, 1.0));
    }

    #[test]
    fn metric_on_the_field_axis() {
        let (g11, g12, g22) = metric_from_jet(&closed1(0.0, 1.0)).unwrap();
        assert_relative_eq!(g11, 1f64.tanh(), max_relative = 1e-14);
        assert_eq!(g12, 0.0);
        assert_relative_eq!(g22, 1.0 / 1f64.cosh().powi(2), max_relative = 1e-14);
        assert!((g11 - 0.761594).abs() < 1e-6 && (g22 - 0.419974).abs() < 1e-6);
    }

    #[test]
    fn affine_jet_is_degenerate() {
        let j = Jet2::var(1.0, Axis::Theta).scale(3.0) + Jet2::var(2.0, Axis::X) + 1.0;
        assert!(matches!(
            metric_from_jet(&j),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn single_qubit_at_unit_radius() {
        let rep = scalar_curvature(&closed1(0.0, 1.0)).unwrap();
        assert_relative_eq!(rep.scalar_r, 0.573_885_7, max_relative = 1e-6);
        assert_relative_eq!(rep.scalar_r, r1_closed_form(1.0), max_relative = 1e-12);
        assert_relative_eq!(rep.scalar_r, rep.scalar_r_contraction, max_relative = 1e-12);
    }

    #[test]
    fn near_origin_series() {
        for r in [0.05f64, 0.1, 0.2] {
            let rep = scalar_curvature(&closed1(r * 0.6, r * 0.8)).unwrap();
            let lead = 4.0 / 9.0 * r * r;
            assert!((rep.scalar_r - lead).abs() < 0.02 * lead, "r={r}");
        }
    }

    #[test]
    fn quadratic_potential_is_flat() {
        let t = Jet2::var(0.3, Axis::Theta);
        let x = Jet2::var(-0.7, Axis::X);
        let psi = (t * t + x * x).scale(0.5);
        let rep = scalar_curvature(&psi).unwrap();
        assert_eq!(rep.scalar_r, 0.0);
        assert_eq!(rep.gamma, [0.0; 4]);
    }

    #[test]
    fn independent_bits_are_flat() {
        let t = Jet2::var(0.9, Axis::Theta);
        let x = Jet2::var(-0.4, Axis::X);
        let psi = Jet2::log_sum_exp(&[t + x, t - x, -t + x, -t - x]).unwrap();
        let rep = scalar_curvature(&psi).unwrap();
        assert!(rep.scalar_r.abs() < 1e-12, "{}", rep.scalar_r);
    }

    #[test]
    fn closed_form_branches_meet() {
        let below = r1_closed_form(R_SWITCH);
        let above = r1_closed_form(R_SWITCH * (1.0 + 1e-12));
        assert_relative_eq!(below, above, max_relative = 1e-6);
        assert_eq!(r1_closed_form(0.0), 0.0);
        assert!(r1_closed_form(5.0) > 100.0);
        assert!(r1_closed_form(5.1) > r1_closed_form(5.0));
    }

    #[test]
    fn framed_report_matches_standard_report() {
        for model in [PotentialModel::ClosedForm2, PotentialModel::ClosedForm3] {
            let at = NaturalPoint::new(0.8, 0.6);
            let plain = scalar_curvature(&psi_jet(&model, at).unwrap()).unwrap();
            let framed = curvature_from_framed(
                &psi_jet_adapted(&model, at).unwrap(),
                ANALYTIC_CROSS_CHECK_TOL,
            )
            .unwrap();
            assert_relative_eq!(plain.scalar_r, framed.scalar_r, max_relative = 1e-9);
            assert_relative_eq!(plain.det_g, framed.det_g, max_relative = 1e-10);
            assert_relative_eq!(plain.g11, framed.g11, max_relative = 1e-12);
            assert_relative_eq!(plain.g12, framed.g12, max_relative = 1e-10, epsilon = 1e-14);
            assert_relative_eq!(plain.g22, framed.g22, max_relative = 1e-12);
            for k in 0..4 {
                assert_relative_eq!(plain.gamma[k], framed.gamma[k], max_relative = 1e-9, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn framed_jet_reaches_low_temperature() {
        let t = 0.05;
        let at = NaturalPoint::new(1.0 / t, 2.0 / t);
        let framed = psi_jet_adapted(&PotentialModel::ClosedForm1, at).unwrap();
        let rep = curvature_from_framed(&framed, ANALYTIC_CROSS_CHECK_TOL).unwrap();
        assert_relative_eq!(rep.scalar_r, r1_closed_form(at.norm()), max_relative = 1e-9);
    }
}
