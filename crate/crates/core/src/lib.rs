#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]
//! Scalar curvature of the Bogoliubov–Kubo–Mori metric on the two-parameter quantum
//! exponential family of transverse-field Ising chains.
//!
//! The pipeline is: a [`PotentialModel`] produces an order-3 [`Jet2`] of the potential
//! `ψ = ln Tr exp(θ Ô₁ + x Ô₂)`; [`geometry`] turns it into the metric and the scalar
//! curvature; [`analysis`] sweeps temperature and classifies the resulting curves.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod jet;
pub mod output;
pub mod potentials;
pub mod quadrature;
pub mod spinchain;

pub use analysis::{
    classify, powerlaw_fit, scan_gamma, sweep, Classification, CurvePoint, MonotonicityVerdict,
    PowerLawFit, Quality, SweepConfig,
};
pub use error::{Error, Result};
pub use geometry::{metric_from_jet, r1_closed_form, scalar_curvature, CurvatureReport};
pub use jet::{Axis, Jet2};
pub use potentials::{psi_jet, psi_jet_adapted, NaturalPoint, PotentialModel};
pub use quadrature::{integrate_jet_panel, QuadratureSpec};
pub use spinchain::{build_observables, psi_exact, psi_fd_jet, Boundary, FdSpec, SpinChainSpec};
