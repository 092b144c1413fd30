//! Transverse-field Ising chains by dense exact diagonalisation.
//!
//! Basis convention: bit `i` of a basis index is the spin on site `i + 1`; a clear
//! bit is spin up (σz = +1).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet2, MULTI_INDICES, N_COEFFS};
use crate::potentials::NaturalPoint;

pub const MAX_SITES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinChainSpec {
    pub n_sites: usize,
    pub boundary: Boundary,
}

impl SpinChainSpec {
    pub fn new(n_sites: usize, boundary: Boundary) -> Result<Self> {
        let spec = Self { n_sites, boundary };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_SITES).contains(&self.n_sites) {
            return Err(Error::Size {
                n_sites: self.n_sites,
            });
        }
        if self.boundary == Boundary::Periodic && self.n_sites < 3 {
            return Err(Error::Boundary {
                n_sites: self.n_sites,
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Nearest-neighbour bonds `(i, j)` as zero-based site pairs.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut bonds: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic {
            bonds.push((n - 1, 0));
        }
        bonds
    }
}

/// The two observables of the family: the bond sum `Σ σz σz` and the field sum `Σ σx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservablePair {
    pub o_int: DMatrix<f64>,
    pub o_field: DMatrix<f64>,
}

pub fn build_observables(spec: &SpinChainSpec) -> Result<ObservablePair> {
    spec.validate()?;
    let dim = spec.dim();
    let bonds = spec.bonds();
    let spin = |s: usize, i: usize| if s >> i & 1 == 0 { 1.0 } else { -1.0 };

    let mut o_int = DMatrix::zeros(dim, dim);
    let mut o_field = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        o_int[(s, s)] = bonds.iter().map(|&(i, j)| spin(s, i) * spin(s, j)).sum();
        for i in 0..spec.n_sites {
            o_field[(s, s ^ (1 << i))] = 1.0;
        }
    }
    Ok(ObservablePair { o_int, o_field })
}

impl ObservablePair {
    /// Single qubit with a longitudinal field `σz` in place of the (absent) bond term.
    pub fn longitudinal_qubit() -> Self {
        Self {
            o_int: DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0]),
            o_field: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        }
    }

    pub fn dim(&self) -> usize {
        self.o_int.nrows()
    }

    /// Eigenvalues of `p1·o_int + p2·o_field`, ascending.
    pub fn spectrum(&self, at: NaturalPoint) -> Result<Vec<f64>> {
        if !at.is_finite() {
            return Err(Error::Config(format!("non-finite point {at:?}")));
        }
        let a = &self.o_int * at.p1 + &self.o_field * at.p2;
        let eig = SymmetricEigen::try_new(a, f64::EPSILON, 10_000).ok_or_else(|| Error::Eigen {
            detail: format!("no convergence after 10000 sweeps at {at:?}, dim {}", self.dim()),
        })?;
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }

    /// `ln Tr exp(p1·o_int + p2·o_field)`.
    pub fn psi(&self, at: NaturalPoint) -> Result<f64> {
        Ok(log_sum_exp(&self.spectrum(at)?))
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn psi_exact(spec: &SpinChainSpec, at: NaturalPoint) -> Result<f64> {
    build_observables(spec)?.psi(at)
}

/// Finite-difference settings for jets of `psi_exact`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSpec {
    /// Step on each axis is `base_step · max(1, |p_i|)`.
    pub base_step: f64,
    /// Number of Richardson extrapolation levels (step halvings).
    pub richardson_levels: usize,
    /// Allowed relative disagreement between the last two extrapolants.
    pub rel_tol: f64,
}

impl Default for FdSpec {
    fn default() -> Self {
        Self {
            base_step: 1e-2,
            richardson_levels: 2,
            rel_tol: 1e-5,
        }
    }
}

impl FdSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_step > 0.0) || self.richardson_levels < 1 || !(self.rel_tol > 0.0) {
            return Err(Error::Config(format!("invalid finite-difference spec {self:?}")));
        }
        Ok(())
    }
}

/// A finite-difference jet together with the extrapolant from one level fewer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdJet {
    pub jet: Jet2,
    pub previous: Jet2,
    /// Estimated rounding noise of each coefficient of `jet`.
    pub noise: [f64; N_COEFFS],
}

impl FdJet {
    /// Worst second/third-order disagreement between the two extrapolants, measured
    /// relative to the larger of the coefficient and the largest coefficient of the
    /// same total order.
    pub fn worst_disagreement(&self) -> ((usize, usize), f64) {
        let mut order_scale = [0.0f64; 4];
        for (k, &(a, b)) in MULTI_INDICES.iter().enumerate() {
            let o = a + b;
            order_scale[o] = order_scale[o].max(self.jet.coeffs()[k].abs());
        }
        let mut worst = ((0, 0), 0.0);
        for (k, &(a, b)) in MULTI_INDICES.iter().enumerate() {
            if a + b < 2 {
                continue;
            }
            let best = self.jet.coeffs()[k];
            let diff = (best - self.previous.coeffs()[k]).abs();
            let scale = best.abs().max(order_scale[a + b]);
            let rel = if scale > 0.0 { diff / scale } else { diff };
            if rel > worst.1 || rel.is_nan() {
                worst = ((a, b), rel);
            }
        }
        worst
    }

    pub fn check(&self, tol: f64) -> Result<Jet2> {
        let ((ca, cb), rel_diff) = self.worst_disagreement();
        if rel_diff > tol || rel_diff.is_nan() {
            return Err(Error::Precision {
                ca,
                cb,
                rel_diff,
                tol,
            });
        }
        Ok(self.jet)
    }
}

// Five-point central stencils on offsets -2..=2.
const STENCILS: [[f64; 5]; 4] = [
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
    [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
];
// Leading truncation order of each stencil (the value stencil is exact).
const STENCIL_ORDER: [u32; 4] = [u32::MAX, 4, 4, 2];
const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
// Rounding error of one evaluation of ψ in units of ε·|ψ|, including the growth of
// the finest level's error through the Richardson weights.
const NOISE_ULPS: f64 = 4.0;

/// Order-3 jet of an arbitrary scalar function by tensor-product central differences
/// with Richardson extrapolation over successively halved steps.
pub fn fd_jet<F>(f: F, at: NaturalPoint, fd: &FdSpec) -> Result<FdJet>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    fd.validate()?;
    let h1 = fd.base_step * at.p1.abs().max(1.0);
    let h2 = fd.base_step * at.p2.abs().max(1.0);
    let center = f(at.p1, at.p2)?;

    // raw[level][k]: undivided estimate for coefficient k at step h / 2^level.
    let levels = fd.richardson_levels;
    let mut raw = Vec::with_capacity(levels + 1);
    let mut noise = [0.0; N_COEFFS];
    for level in 0..=levels {
        let scale = 0.5f64.powi(level as i32);
        let (s1, s2) = (h1 * scale, h2 * scale);
        let mut grid = [[0.0; 5]; 5];
        for (i, row) in grid.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = if i == 2 && j == 2 {
                    center
                } else {
                    f(at.p1 + (i as f64 - 2.0) * s1, at.p2 + (j as f64 - 2.0) * s2)?
                };
            }
        }
        let f_max = grid.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut est = [0.0; N_COEFFS];
        for (k, &(a, b)) in MULTI_INDICES.iter().enumerate() {
            let mut acc = 0.0;
            let mut weight = 0.0;
            for i in 0..5 {
                let wa = STENCILS[a][i];
                if wa == 0.0 {
                    continue;
                }
                for j in 0..5 {
                    acc += wa * STENCILS[b][j] * grid[i][j];
                    weight += (wa * STENCILS[b][j]).abs();
                }
            }
            let denom = s1.powi(a as i32) * s2.powi(b as i32) * FACT[a] * FACT[b];
            est[k] = acc / denom;
            if level == levels && k > 0 {
                noise[k] = NOISE_ULPS * f64::EPSILON * f_max * weight / denom;
            }
        }
        raw.push(est);
    }

    let mut best = [0.0; N_COEFFS];
    let mut previous = [0.0; N_COEFFS];
    for (k, &(a, b)) in MULTI_INDICES.iter().enumerate() {
        let column: Vec<f64> = raw.iter().map(|r| r[k]).collect();
        let order = STENCIL_ORDER[a].min(STENCIL_ORDER[b]);
        let (b_est, p_est) = richardson(&column, order);
        best[k] = b_est;
        previous[k] = p_est;
    }
    best[0] = center;
    previous[0] = center;
    Ok(FdJet {
        jet: Jet2::from_coeffs(best),
        previous: Jet2::from_coeffs(previous),
        noise,
    })
}

/// Richardson tableau for step ratio 2 and error expansion in even powers starting at
/// `order`. Returns the final extrapolant and the final one of the previous level.
fn richardson(column: &[f64], order: u32) -> (f64, f64) {
    if order == u32::MAX || column.len() == 1 {
        let last = *column.last().unwrap();
        return (last, last);
    }
    let mut tab = column.to_vec();
    let mut prev_best = *tab.last().unwrap();
    let mut p = order;
    for m in 1..column.len() {
        prev_best = *tab.last().unwrap();
        let factor = 2f64.powi(p as i32) - 1.0;
        let next: Vec<f64> = (m..column.len())
            .map(|j| tab[j - m + 1] + (tab[j - m + 1] - tab[j - m]) / factor)
            .collect();
        tab = next;
        p += 2;
    }
    (tab[0], prev_best)
}

/// Order-3 jet of `psi_exact` by finite differences, rejected when the last two
/// Richardson levels disagree by more than `fd.rel_tol`.
pub fn psi_fd_jet(spec: &SpinChainSpec, at: NaturalPoint, fd: &FdSpec) -> Result<Jet2> {
    let obs = build_observables(spec)?;
    psi_fd_jet_for(&obs, at, fd)?.check(fd.rel_tol)
}

pub fn psi_fd_jet_for(obs: &ObservablePair, at: NaturalPoint, fd: &FdSpec) -> Result<FdJet> {
    fd_jet(|p1, p2| obs.psi(NaturalPoint::new(p1, p2)), at, fd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(a: f64, b: f64) -> NaturalPoint {
        NaturalPoint::new(a, b)
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            SpinChainSpec::new(0, Boundary::Open),
            Err(Error::Size { n_sites: 0 })
        ));
        assert!(matches!(
            SpinChainSpec::new(15, Boundary::Open),
            Err(Error::Size { .. })
        ));
        assert!(matches!(
            SpinChainSpec::new(2, Boundary::Periodic),
            Err(Error::Boundary { n_sites: 2 })
        ));
        assert!(SpinChainSpec::new(3, Boundary::Periodic).is_ok());
    }

    #[test]
    fn single_site_has_no_bonds() {
        let obs = build_observables(&SpinChainSpec::new(1, Boundary::Open).unwrap()).unwrap();
        assert_eq!(obs.o_int, DMatrix::zeros(2, 2));
        assert_eq!(obs.o_field, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn two_site_bond_is_zz() {
        let obs = build_observables(&SpinChainSpec::new(2, Boundary::Open).unwrap()).unwrap();
        assert_eq!(obs.o_int, DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn three_site_ring_diagonal() {
        // all-up and all-down satisfy all three bonds, every other state breaks two
        let obs = build_observables(&SpinChainSpec::new(3, Boundary::Periodic).unwrap()).unwrap();
        let diag: Vec<f64> = obs.o_int.diagonal().iter().copied().collect();
        assert_eq!(diag, vec![3.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 3.0]);
    }

    #[test]
    fn observable_invariants() {
        for (n, bc) in [(3, Boundary::Open), (4, Boundary::Periodic), (5, Boundary::Open)] {
            let spec = SpinChainSpec::new(n, bc).unwrap();
            let obs = build_observables(&spec).unwrap();
            assert_eq!(obs.o_int, obs.o_int.transpose());
            assert_eq!(obs.o_field, obs.o_field.transpose());
            for s in 0..spec.dim() {
                let row = obs.o_field.row(s);
                assert_eq!(row.iter().filter(|&&v| v != 0.0).count(), n);
                assert!(row.iter().all(|&v| v == 0.0 || v == 1.0));
                for t in 0..spec.dim() {
                    if s != t {
                        assert_eq!(obs.o_int[(s, t)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn trace_of_identity_at_origin() {
        for n in 1..=6 {
            let spec = SpinChainSpec::new(n, Boundary::Open).unwrap();
            assert_relative_eq!(
                psi_exact(&spec, pt(0.0, 0.0)).unwrap(),
                n as f64 * std::f64::consts::LN_2,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn three_ring_zero_field() {
        let spec = SpinChainSpec::new(3, Boundary::Periodic).unwrap();
        for th in [-1.3f64, 0.2, 0.9, 2.0] {
            let expect = (2.0 * (3.0 * th).exp() + 6.0 * (-th).exp()).ln();
            assert_relative_eq!(psi_exact(&spec, pt(th, 0.0)).unwrap(), expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn non_interacting_columns_are_extensive() {
        for n in 1..=5 {
            let spec = SpinChainSpec::new(n, Boundary::Open).unwrap();
            for x in [-1.5f64, 0.3, 2.2] {
                let expect = n as f64 * (2.0 * x.cosh()).ln();
                assert!((psi_exact(&spec, pt(0.0, x)).unwrap() - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn field_mirror_and_sublattice_symmetry() {
        for (n, bc, bipartite) in [
            (2, Boundary::Open, true),
            (3, Boundary::Open, true),
            (3, Boundary::Periodic, false),
            (4, Boundary::Periodic, true),
        ] {
            let obs = build_observables(&SpinChainSpec::new(n, bc).unwrap()).unwrap();
            for &(t, x) in &[(0.7, 0.4), (-1.1, 1.9), (2.0, -0.3)] {
                let base = obs.psi(pt(t, x)).unwrap();
                assert!((base - obs.psi(pt(t, -x)).unwrap()).abs() <= 1e-12);
                if bipartite {
                    assert!((base - obs.psi(pt(-t, x)).unwrap()).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn richardson_on_polynomial_data() {
        // exact polynomial in h² with leading order 2: D(h) = 5 + h² + h⁴
        let col: Vec<f64> = (0..3).map(|l| {
            let h = 0.1 * 0.5f64.powi(l);
            5.0 + h * h + h.powi(4)
        }).collect();
        let (best, _) = richardson(&col, 2);
        assert_relative_eq!(best, 5.0, max_relative = 1e-14);
    }

    #[test]
    fn fd_jet_of_a_polynomial() {
        // cubic polynomials are differentiated exactly up to rounding
        let f = |a: f64, b: f64| Ok(1.0 + 2.0 * a - b + a * a * b + 0.5 * b * b * b - a * a * a);
        let j = fd_jet(f, pt(0.3, -0.2), &FdSpec::default()).unwrap().jet;
        assert_relative_eq!(j.c(3, 0), -1.0, max_relative = 1e-7);
        assert_relative_eq!(j.c(2, 1), 1.0, max_relative = 1e-7);
        assert_relative_eq!(j.c(0, 3), 0.5, max_relative = 1e-7);
        assert_relative_eq!(j.c(1, 1), 2.0 * 0.3, max_relative = 1e-8);
    }

    #[test]
    fn longitudinal_qubit_matches_closed_form() {
        let obs = ObservablePair::longitudinal_qubit();
        let (z, x) = (0.8f64, -0.6f64);
        let r = (z * z + x * x).sqrt();
        assert_relative_eq!(obs.psi(pt(z, x)).unwrap(), (2.0 * r.cosh()).ln(), max_relative = 1e-14);
    }

    #[test]
    fn strict_tolerance_is_a_precision_error() {
        let spec = SpinChainSpec::new(2, Boundary::Open).unwrap();
        let fd = FdSpec {
            rel_tol: 1e-14,
            ..Default::default()
        };
        assert!(matches!(
            psi_fd_jet(&spec, pt(0.8, 0.6), &fd),
            Err(Error::Precision { .. })
        ));
    }
}
