//! Adaptive panel-wise Gauss–Legendre integration of jet-valued integrands.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet2, MULTI_INDICES, N_COEFFS};

/// Discretisation of `∫₀^π dk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre order on each panel.
    pub nodes_per_panel: usize,
    /// Uniform panels over `[0, π]` before any refinement.
    pub base_panels: usize,
    /// Relative change below which a bisected panel counts as converged.
    pub refine_rel_tol: f64,
    /// Maximum bisection depth per base panel.
    pub max_depth: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_panel: 64,
            base_panels: 8,
            refine_rel_tol: 1e-11,
            max_depth: 12,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 2 {
            return Err(Error::Config(format!(
                "nodes_per_panel must be >= 2, got {}",
                self.nodes_per_panel
            )));
        }
        if self.base_panels < 1 {
            return Err(Error::Config("base_panels must be >= 1".into()));
        }
        if !(self.refine_rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "refine_rel_tol must be positive, got {}",
                self.refine_rel_tol
            )));
        }
        Ok(())
    }

    /// Same spec with the node count doubled.
    pub fn doubled(&self) -> Self {
        Self {
            nodes_per_panel: 2 * self.nodes_per_panel,
            ..*self
        }
    }

    pub(crate) fn rule(&self) -> Result<GaussLegendre> {
        self.validate()?;
        let n = NonZeroUsize::new(self.nodes_per_panel).expect("validated above");
        Ok(GaussLegendre::new(n))
    }
}

#[derive(Clone, Copy)]
struct PanelEstimate {
    integral: Jet2,
    /// Coefficient-wise `∫ |f|`, the scale against which changes are judged.
    magnitude: [f64; N_COEFFS],
}

fn estimate<F>(rule: &GaussLegendre, a: f64, b: f64, f: &F) -> Result<PanelEstimate>
where
    F: Fn(f64) -> Result<Jet2>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut integral = Jet2::ZERO;
    let mut magnitude = [0.0; N_COEFFS];
    for &(node, weight) in rule.as_node_weight_pairs() {
        let v = f(mid + half * node)?;
        integral += v.scale(weight * half);
        for (m, c) in magnitude.iter_mut().zip(v.coeffs()) {
            *m += weight * half * c.abs();
        }
    }
    Ok(PanelEstimate {
        integral,
        magnitude,
    })
}

/// Worst coefficient change `(index, relative change)` between two estimates of the
/// integral over a panel of width `width`; `density` is the magnitude per unit width
/// of the whole integration range.
fn worst_change(
    coarse: &PanelEstimate,
    fine: &PanelEstimate,
    density: &[f64; N_COEFFS],
    width: f64,
) -> (usize, f64) {
    let mut worst = (0, 0.0);
    for (k, &d) in density.iter().enumerate() {
        let c = coarse.integral.coeffs()[k];
        let f = fine.integral.coeffs()[k];
        let scale = f
            .abs()
            .max(fine.magnitude[k])
            .max(coarse.magnitude[k])
            .max(d * width);
        let diff = (c - f).abs();
        let rel = if scale > 0.0 { diff / scale } else { diff };
        if rel > worst.1 {
            worst = (k, rel);
        }
    }
    worst
}

fn refine<F>(
    rule: &GaussLegendre,
    spec: &QuadratureSpec,
    a: f64,
    b: f64,
    whole: PanelEstimate,
    depth: usize,
    density: &[f64; N_COEFFS],
    f: &F,
) -> Result<Jet2>
where
    F: Fn(f64) -> Result<Jet2>,
{
    let mid = 0.5 * (a + b);
    let left = estimate(rule, a, mid, f)?;
    let right = estimate(rule, mid, b, f)?;
    let both = PanelEstimate {
        integral: left.integral + right.integral,
        magnitude: std::array::from_fn(|k| left.magnitude[k] + right.magnitude[k]),
    };
    let (k, rel) = worst_change(&whole, &both, density, b - a);
    if rel <= spec.refine_rel_tol {
        return Ok(both.integral);
    }
    if depth >= spec.max_depth {
        let (ca, cb) = MULTI_INDICES[k];
        return Err(Error::Convergence {
            a,
            b,
            depth,
            ca,
            cb,
            rel_change: rel,
        });
    }
    Ok(refine(rule, spec, a, mid, left, depth + 1, density, f)?
        + refine(rule, spec, mid, b, right, depth + 1, density, f)?)
}

/// Integrate a jet-valued function over `[a, b]`, bisecting until every coefficient
/// is stable to `spec.refine_rel_tol`.
///
/// Changes are measured relative to the larger of the coefficient, the integral of
/// its absolute value, and the panel's share of that integral over the whole range,
/// so coefficients that vanish by cancellation are still judged on the scale of their
/// integrand.
pub fn integrate_jet_panel<F>(integrand: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Jet2>
where
    F: Fn(f64) -> Result<Jet2>,
{
    let rule = spec.rule()?;
    integrate_mesh(&rule, spec, &integrand, &[a, b])
}

/// Integrate over consecutive panels `mesh[i]..mesh[i + 1]`.
pub(crate) fn integrate_mesh<F>(
    rule: &GaussLegendre,
    spec: &QuadratureSpec,
    f: &F,
    mesh: &[f64],
) -> Result<Jet2>
where
    F: Fn(f64) -> Result<Jet2>,
{
    if mesh.len() < 2 || mesh.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config(format!("invalid panel mesh {mesh:?}")));
    }
    let estimates = mesh
        .windows(2)
        .map(|w| estimate(rule, w[0], w[1], f))
        .collect::<Result<Vec<_>>>()?;
    let span = mesh[mesh.len() - 1] - mesh[0];
    let mut density = [0.0; N_COEFFS];
    for e in &estimates {
        for (d, m) in density.iter_mut().zip(e.magnitude) {
            *d += m / span;
        }
    }
    let mut total = Jet2::ZERO;
    for (w, e) in mesh.windows(2).zip(estimates) {
        total += refine(rule, spec, w[0], w[1], e, 0, &density, f)?;
    }
    Ok(total)
}

/// Panel breakpoints over `[0, π]`: `base_panels` uniform panels, with the last one
/// split geometrically toward `π` when `cluster_at_pi` is set.
pub fn panel_mesh(spec: &QuadratureSpec, cluster_at_pi: bool) -> Vec<f64> {
    let n = spec.base_panels.max(1);
    let mut mesh: Vec<f64> = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
    if cluster_at_pi {
        let width = PI / n as f64;
        mesh.pop();
        for j in 1..=GEOMETRIC_LEVELS {
            mesh.push(PI - width * 0.5f64.powi(j as i32));
        }
        mesh.push(PI);
    }
    mesh
}

const GEOMETRIC_LEVELS: usize = 8;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Axis;

    #[test]
    fn constant_integrand_is_exact() {
        let spec = QuadratureSpec::default();
        let j = integrate_jet_panel(|_| Ok(Jet2::constant(1.0)), 0.0, PI, &spec).unwrap();
        assert!((j.value() - PI).abs() < 1e-14);
    }

    #[test]
    fn cosine_cancels_by_symmetry() {
        let spec = QuadratureSpec::default();
        let j = integrate_jet_panel(|k| Ok(Jet2::constant(k.cos())), 0.0, PI, &spec).unwrap();
        assert!(j.value().abs() < 1e-13, "{}", j.value());
    }

    #[test]
    fn jet_integrand_differentiates_under_the_integral() {
        // ∫₀^π e^{θ cos k} dk = π I0(θ); d/dθ at 0 is 0, d²/dθ² at 0 is π/2.
        let spec = QuadratureSpec::default();
        let t = Jet2::var(0.0, Axis::Theta);
        let j = integrate_jet_panel(|k| Ok((t * k.cos()).exp()), 0.0, PI, &spec).unwrap();
        assert!((j.value() - PI).abs() < 1e-13);
        assert!(j.c(1, 0).abs() < 1e-13);
        assert!((j.c(2, 0) - PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = QuadratureSpec {
            nodes_per_panel: 1,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = QuadratureSpec {
            refine_rel_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn nonconvergence_is_reported() {
        let spec = QuadratureSpec {
            nodes_per_panel: 2,
            max_depth: 1,
            refine_rel_tol: 1e-15,
            ..Default::default()
        };
        let err = integrate_jet_panel(|k| Ok(Jet2::constant((40.0 * k).sin().abs())), 0.0, PI, &spec)
            .unwrap_err();
        assert!(matches!(err, Error::Convergence { depth: 1, .. }), "{err:?}");
    }

    #[test]
    fn mesh_clusters_toward_pi() {
        let spec = QuadratureSpec::default();
        let plain = panel_mesh(&spec, false);
        assert_eq!(plain.len(), 9);
        let clustered = panel_mesh(&spec, true);
        assert_eq!(clustered.len(), 9 + GEOMETRIC_LEVELS);
        assert!(clustered.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*clustered.last().unwrap(), PI);
    }
}
