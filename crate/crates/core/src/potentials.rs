//! The potential `ψ = ln Tr exp(θ Ô₁ + x Ô₂)` and its order-3 jet for every model.
//!
//! Closed forms are written as log-sum-exp over terms `m·e^{ℓ}·2cosh√q` with `ℓ`
//! linear and `q` quadratic in the natural parameters. At low temperature the metric
//! of these families becomes exponentially degenerate along the ray through the
//! origin, because the dominant term is homogeneous of degree one. [`psi_jet_adapted`]
//! evaluates the jet in a rotated frame aligned with that ray and rebuilds the
//! homogeneous parts exactly, so the exponentially small directions survive.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Axis, Jet2};
use crate::quadrature::{integrate_mesh, panel_mesh, QuadratureSpec};
use crate::spinchain::{self, FdJet, FdSpec, SpinChainSpec};

/// Point in natural-parameter space: `(θ, x) = (βJ, βΓ)`, or `(z, x) = (βh, βΓ)` for
/// the single qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalPoint {
    pub p1: f64,
    pub p2: f64,
}

impl NaturalPoint {
    pub fn new(p1: f64, p2: f64) -> Self {
        Self { p1, p2 }
    }

    pub fn is_finite(&self) -> bool {
        self.p1.is_finite() && self.p2.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.p1.hypot(self.p2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialModel {
    /// Single qubit, `ψ = ln(2cosh r)`.
    ClosedForm1,
    /// Open two-site chain.
    ClosedForm2,
    /// Periodic three-site ring.
    ClosedForm3,
    /// Potential density of the infinite chain.
    ThermoLimit(QuadratureSpec),
    /// Any small chain through dense diagonalisation and finite differences.
    ExactDiag { chain: SpinChainSpec, fd: FdSpec },
}

impl PotentialModel {
    pub fn thermo() -> Self {
        PotentialModel::ThermoLimit(QuadratureSpec::default())
    }

    pub fn exact(chain: SpinChainSpec) -> Self {
        PotentialModel::ExactDiag {
            chain,
            fd: FdSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialModel::ThermoLimit(q) => q.validate(),
            PotentialModel::ExactDiag { chain, fd } => {
                chain.validate()?;
                fd.validate()
            }
            _ => Ok(()),
        }
    }

    /// Short name used by the CLI and in reports.
    pub fn name(&self) -> String {
        match self {
            PotentialModel::ClosedForm1 => "closed1".into(),
            PotentialModel::ClosedForm2 => "closed2".into(),
            PotentialModel::ClosedForm3 => "closed3".into(),
            PotentialModel::ThermoLimit(_) => "thermo".into(),
            PotentialModel::ExactDiag { chain, .. } => format!(
                "exact(n={},{})",
                chain.n_sites,
                match chain.boundary {
                    spinchain::Boundary::Open => "open",
                    spinchain::Boundary::Periodic => "periodic",
                }
            ),
        }
    }

    /// Whether `ψ(−θ, x) = ψ(θ, x)` holds (bipartite lattice).
    pub fn is_bipartite(&self) -> bool {
        match self {
            PotentialModel::ClosedForm3 => false,
            PotentialModel::ExactDiag { chain, .. } => {
                chain.boundary == spinchain::Boundary::Open || chain.n_sites % 2 == 0
            }
            _ => true,
        }
    }
}

/// Coordinates in which a jet is expressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    /// `(θ, x)` themselves.
    Standard,
    /// `(ρ, σ)` with `(θ, x) = ρ·u + σ·v`, `u` the unit vector toward the point and
    /// `v` its counter-clockwise normal; the jet is taken at `(rho0, 0)`.
    Radial { u: [f64; 2], rho0: f64 },
}

impl Frame {
    /// The ray-aligned frame through `at`, or the standard frame at the origin.
    pub fn along(at: NaturalPoint) -> Self {
        let rho0 = at.norm();
        if rho0 < MIN_RADIAL_NORM {
            return Frame::Standard;
        }
        Frame::Radial {
            u: [at.p1 / rho0, at.p2 / rho0],
            rho0,
        }
    }

    /// Jets of `θ` and `x` at `at` in this frame.
    fn coordinates(&self, at: NaturalPoint) -> (Jet2, Jet2) {
        match *self {
            Frame::Standard => (Jet2::var(at.p1, Axis::Theta), Jet2::var(at.p2, Axis::X)),
            Frame::Radial { u, .. } => (
                Jet2::affine(at.p1, u[0], -u[1]),
                Jet2::affine(at.p2, u[1], u[0]),
            ),
        }
    }

    /// Rotation `Q` with `(δθ, δx) = Q (δρ, δσ)` (identity for the standard frame).
    pub fn rotation(&self) -> [[f64; 2]; 2] {
        match *self {
            Frame::Standard => [[1.0, 0.0], [0.0, 1.0]],
            Frame::Radial { u, .. } => [[u[0], -u[1]], [u[1], u[0]]],
        }
    }

    /// Re-express a jet in this frame as a `(θ, x)` jet.
    pub fn to_standard(&self, jet: &Jet2) -> Jet2 {
        let q = self.rotation();
        // (δρ, δσ) = Qᵀ (δθ, δx)
        jet.linear_substitute([[q[0][0], q[1][0]], [q[0][1], q[1][1]]])
    }

    /// Map a symmetric 2×2 tensor `(g11, g12, g22)` from this frame to `(θ, x)`.
    pub fn metric_to_standard(&self, g: (f64, f64, f64)) -> (f64, f64, f64) {
        let q = self.rotation();
        let m = [[g.0, g.1], [g.1, g.2]];
        // Q m Qᵀ
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..2)
                    .flat_map(|a| (0..2).map(move |b| (a, b)))
                    .map(|(a, b)| q[i][a] * m[a][b] * q[j][b])
                    .sum();
            }
        }
        (out[0][0], out[0][1], out[1][1])
    }

    fn rho0(&self) -> Option<f64> {
        match *self {
            Frame::Standard => None,
            Frame::Radial { rho0, .. } => Some(rho0),
        }
    }
}

const MIN_RADIAL_NORM: f64 = 1e-6;

/// `√q` is split off a term only when `q` is at least this large; below it the fused
/// `ln(2cosh√q)` expansion is used.
const SPLIT_MIN_QUAD: f64 = 1.0;

/// A jet together with the frame it is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramedJet {
    pub jet: Jet2,
    pub frame: Frame,
    /// For finite-difference jets: the extrapolation diagnostics.
    pub fd: Option<FdJet>,
}

/// `ln(m) + ℓ + ln(2cosh√q)`.
struct Term {
    log_mult: f64,
    linear: Jet2,
    quad: Jet2,
}

/// Which coefficient the first term of the printed three-site formula carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeSiteVariant {
    /// `2 e^{-θ} cosh x`, which gives `Tr 1 = 6` at the origin.
    AsPrinted,
    /// `4 e^{-θ} cosh x`, matching the eight-state diagonalisation.
    Corrected,
}

fn closed_terms(model: &PotentialModel, t: Jet2, x: Jet2) -> Vec<Term> {
    closed_terms_with(model, t, x, ThreeSiteVariant::Corrected)
}

fn closed_terms_with(model: &PotentialModel, t: Jet2, x: Jet2, v3: ThreeSiteVariant) -> Vec<Term> {
    match model {
        PotentialModel::ClosedForm1 => vec![Term {
            log_mult: 0.0,
            linear: Jet2::ZERO,
            quad: t * t + x * x,
        }],
        PotentialModel::ClosedForm2 => vec![
            Term {
                log_mult: 0.0,
                linear: Jet2::ZERO,
                quad: t * t,
            },
            Term {
                log_mult: 0.0,
                linear: Jet2::ZERO,
                quad: t * t + (x * x).scale(4.0),
            },
        ],
        PotentialModel::ClosedForm3 => {
            let tt = t * t;
            let xx = x * x;
            let tx = t * x;
            vec![
                Term {
                    log_mult: match v3 {
                        ThreeSiteVariant::AsPrinted => 0.0,
                        ThreeSiteVariant::Corrected => LN_2,
                    },
                    linear: -t,
                    quad: xx,
                },
                Term {
                    log_mult: 0.0,
                    linear: t - x,
                    quad: (tt + tx + xx).scale(4.0),
                },
                Term {
                    log_mult: 0.0,
                    linear: t + x,
                    quad: (tt - tx + xx).scale(4.0),
                },
            ]
        }
        _ => unreachable!("not a closed form"),
    }
}

fn closed_standard(terms: &[Term]) -> Result<Jet2> {
    let exps = terms
        .iter()
        .map(|term| Ok(term.quad.ln_two_cosh_sqrt()? + term.linear + term.log_mult))
        .collect::<Result<Vec<_>>>()?;
    Jet2::log_sum_exp(&exps)
}

fn closed_radial(terms: &[Term], rho0: f64) -> Result<Jet2> {
    // Each term = log_mult + H + rem with H homogeneous of degree one.
    let mut homs = Vec::with_capacity(terms.len());
    let mut rems = Vec::with_capacity(terms.len());
    for term in terms {
        if term.quad.value() >= SPLIT_MIN_QUAD {
            let s = term.quad.sqrt()?.project_homogeneous(rho0);
            homs.push((term.linear + s).project_homogeneous(rho0));
            rems.push(s.ln1p_exp_neg2()?);
        } else {
            homs.push(term.linear.project_homogeneous(rho0));
            rems.push(term.quad.ln_two_cosh_sqrt()?);
        }
    }
    let lead = (0..terms.len())
        .max_by(|&a, &b| {
            (terms[a].log_mult + homs[a].value()).total_cmp(&(terms[b].log_mult + homs[b].value()))
        })
        .expect("closed forms have terms");
    let exps: Vec<Jet2> = (0..terms.len())
        .map(|i| {
            let gap = if i == lead {
                Jet2::ZERO
            } else {
                homs[i] - homs[lead]
            };
            gap + rems[i] + terms[i].log_mult
        })
        .collect();
    Ok(homs[lead] + Jet2::log_sum_exp(&exps)?)
}

fn thermo_jet(spec: &QuadratureSpec, at: NaturalPoint, frame: Frame) -> Result<Jet2> {
    let rule = spec.rule()?;
    let (t, x) = frame.coordinates(at);
    let a = t * t + x * x;
    let b = (t * x).scale(2.0);
    let rho0 = frame.rho0();

    let integrand = |k: f64| -> Result<Jet2> {
        let u = a + b.scale(k.cos());
        match rho0 {
            Some(rho0) if u.value() >= SPLIT_MIN_QUAD => {
                let f = u.sqrt()?.project_homogeneous(rho0);
                Ok(f + f.ln1p_exp_neg2()?)
            }
            _ => u.ln_two_cosh_sqrt(),
        }
    };

    let (pt, px) = (at.p1.abs(), at.p2.abs());
    let near_critical = (pt - px).abs() < 0.05 * pt.max(px);
    let mesh = panel_mesh(spec, near_critical);
    Ok(integrate_mesh(&rule, spec, &integrand, &mesh)?.scale(1.0 / PI))
}

fn check_point(at: NaturalPoint) -> Result<()> {
    if at.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("non-finite natural point {at:?}")))
    }
}

/// Order-3 jet of `ψ` in `(θ, x)` coordinates.
pub fn psi_jet(model: &PotentialModel, at: NaturalPoint) -> Result<Jet2> {
    check_point(at)?;
    model.validate()?;
    match model {
        PotentialModel::ThermoLimit(q) => thermo_jet(q, at, Frame::Standard),
        PotentialModel::ExactDiag { chain, fd } => spinchain::psi_fd_jet(chain, at, fd),
        closed => {
            let (t, x) = Frame::Standard.coordinates(at);
            closed_standard(&closed_terms(closed, t, x))
        }
    }
}

/// Order-3 jet of `ψ` in the ray-aligned frame through `at` (standard frame for the
/// finite-difference backend, which also reports its previous Richardson level).
pub fn psi_jet_adapted(model: &PotentialModel, at: NaturalPoint) -> Result<FramedJet> {
    check_point(at)?;
    model.validate()?;
    let frame = Frame::along(at);
    let jet = match (model, frame) {
        (PotentialModel::ExactDiag { chain, fd }, _) => {
            let obs = spinchain::build_observables(chain)?;
            let fd_jet = spinchain::psi_fd_jet_for(&obs, at, fd)?;
            return Ok(FramedJet {
                jet: fd_jet.jet,
                frame: Frame::Standard,
                fd: Some(fd_jet),
            });
        }
        (PotentialModel::ThermoLimit(q), frame) => thermo_jet(q, at, frame)?,
        (closed, Frame::Standard) => {
            let (t, x) = frame.coordinates(at);
            closed_standard(&closed_terms(closed, t, x))?
        }
        (closed, Frame::Radial { rho0, .. }) => {
            let (t, x) = frame.coordinates(at);
            closed_radial(&closed_terms(closed, t, x), rho0)?
        }
    };
    Ok(FramedJet {
        jet,
        frame,
        fd: None,
    })
}

/// `ψ₃` with either coefficient on the `e^{-θ} cosh x` term.
pub fn psi3_value(at: NaturalPoint, variant: ThreeSiteVariant) -> Result<f64> {
    check_point(at)?;
    let (t, x) = Frame::Standard.coordinates(at);
    Ok(closed_standard(&closed_terms_with(&PotentialModel::ClosedForm3, t, x, variant))?.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{MULTI_INDICES, N_COEFFS};
    use crate::spinchain::{psi_exact, Boundary};
    use approx::assert_relative_eq;

    fn pt(a: f64, b: f64) -> NaturalPoint {
        NaturalPoint::new(a, b)
    }

    fn close(a: &Jet2, b: &Jet2, tol: f64) -> bool {
        (0..N_COEFFS).all(|k| {
            let (x, y) = (a.coeffs()[k], b.coeffs()[k]);
            (x - y).abs() <= tol * x.abs().max(y.abs()).max(1e-3)
        })
    }

    #[test]
    fn single_qubit_at_origin() {
        let j = psi_jet(&PotentialModel::ClosedForm1, pt(0.0, 0.0)).unwrap();
        assert_relative_eq!(j.value(), LN_2, max_relative = 1e-15);
        assert_relative_eq!(j.c(2, 0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(j.c(0, 2), 0.5, max_relative = 1e-15);
        for (a, b) in [(1, 0), (0, 1), (1, 1), (3, 0), (2, 1), (1, 2), (0, 3)] {
            assert_eq!(j.c(a, b), 0.0);
        }
    }

    #[test]
    fn two_site_values() {
        let j = psi_jet(&PotentialModel::ClosedForm2, pt(0.0, 0.0)).unwrap();
        assert_relative_eq!(j.value(), 4f64.ln(), max_relative = 1e-15);
        let j = psi_jet(&PotentialModel::ClosedForm2, pt(1.0, 0.0)).unwrap();
        assert_relative_eq!(j.value(), (4.0 * 1f64.cosh()).ln(), max_relative = 1e-15);
        assert_relative_eq!(j.value(), 1.820_075_191_602_918, max_relative = 1e-14);
    }

    #[test]
    fn thermo_on_the_zero_field_axis() {
        for th in [0.3f64, 1.0, 2.5] {
            let j = psi_jet(&PotentialModel::thermo(), pt(th, 0.0)).unwrap();
            assert!((j.value() - (2.0 * th.cosh()).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn thermo_without_coupling_is_a_free_spin() {
        let x0 = 0.7;
        let th = psi_jet(&PotentialModel::thermo(), pt(0.0, x0)).unwrap();
        let single = psi_jet(&PotentialModel::ClosedForm1, pt(0.0, x0)).unwrap();
        // only the pure-x coefficients coincide: the θ-dependence differs
        for b in 0..=3 {
            assert!((th.c(0, b) - single.c(0, b)).abs() < 1e-12, "c0{b}");
        }
    }

    #[test]
    fn three_site_variants_against_diagonalisation() {
        let ring = SpinChainSpec::new(3, Boundary::Periodic).unwrap();
        let at0 = pt(0.0, 0.0);
        assert_relative_eq!(
            psi3_value(at0, ThreeSiteVariant::AsPrinted).unwrap(),
            6f64.ln(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            psi3_value(at0, ThreeSiteVariant::Corrected).unwrap(),
            8f64.ln(),
            max_relative = 1e-15
        );
        for &(t, x) in &[(0.7, 0.3), (-1.2, 0.9), (0.4, -2.0)] {
            let exact = psi_exact(&ring, pt(t, x)).unwrap();
            let corrected = psi3_value(pt(t, x), ThreeSiteVariant::Corrected).unwrap();
            assert!((exact - corrected).abs() < 1e-10);
        }
    }

    #[test]
    fn adapted_frame_agrees_with_standard_frame() {
        let models = [
            PotentialModel::ClosedForm1,
            PotentialModel::ClosedForm2,
            PotentialModel::ClosedForm3,
            PotentialModel::thermo(),
        ];
        for model in &models {
            for &(t, x) in &[(0.8, 0.6), (2.0, 1.5), (-1.3, 0.4), (4.0, 4.2)] {
                let std = psi_jet(model, pt(t, x)).unwrap();
                let framed = psi_jet_adapted(model, pt(t, x)).unwrap();
                let back = framed.frame.to_standard(&framed.jet);
                assert!(close(&std, &back, 1e-10), "{model:?} at ({t},{x}):\n{std:?}\n{back:?}");
            }
        }
    }

    #[test]
    fn adapted_frame_resolves_exponentially_flat_direction() {
        // ln(2cosh r): along the ray the second derivative is sech²r, far below the
        // rounding level of the transverse curvature tanh(r)/r.
        let r = 40.0f64;
        let at = pt(r * 0.6, r * 0.8);
        let j = psi_jet_adapted(&PotentialModel::ClosedForm1, at).unwrap().jet;
        let sech2 = 1.0 / r.cosh().powi(2);
        assert_relative_eq!(2.0 * j.c(2, 0), sech2, max_relative = 1e-12);
        assert_relative_eq!(2.0 * j.c(0, 2), r.tanh() / r, max_relative = 1e-14);
    }

    #[test]
    fn mirror_symmetry_of_jets() {
        let models = [
            PotentialModel::ClosedForm1,
            PotentialModel::ClosedForm2,
            PotentialModel::ClosedForm3,
            PotentialModel::thermo(),
        ];
        for model in &models {
            let a = psi_jet(model, pt(0.9, 0.35)).unwrap();
            let b = psi_jet(model, pt(0.9, -0.35)).unwrap();
            for (k, &(_, bx)) in MULTI_INDICES.iter().enumerate() {
                let sign = if bx % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a.coeffs()[k] - sign * b.coeffs()[k]).abs() < 1e-12, "{model:?} k={k}");
            }
        }
    }

    #[test]
    fn invalid_points_rejected() {
        assert!(matches!(
            psi_jet(&PotentialModel::ClosedForm2, pt(f64::NAN, 0.0)),
            Err(Error::Config(_))
        ));
    }
}
