//! Bivariate truncated Taylor arithmetic of total order 3.
//!
//! A [`Jet2`] holds the Taylor coefficients `c[a][b] = ∂^(a+b) f / ∂θ^a ∂x^b / (a! b!)`
//! of a scalar function at an expansion point, for every `a + b <= 3`. Arithmetic on
//! jets is the truncated polynomial arithmetic of those expansions, so evaluating a
//! formula on seeded variables yields all partial derivatives up to third order.
//!
//! The value coefficient is kept apart from the others in every operation: a jet
//! whose derivative coefficients are tiny (say `1e-40`) keeps them to full relative
//! precision even when its value is O(1).

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Number of stored coefficients.
pub const N_COEFFS: usize = 10;

/// Exponent pairs `(a, b)` in storage order.
pub const MULTI_INDICES: [(usize, usize); N_COEFFS] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

/// Threshold below which `sqrt` refuses to expand.
pub const SQRT_MIN_ARG: f64 = 1e-12;

#[inline]
const fn index(a: usize, b: usize) -> usize {
    let order = a + b;
    // orders 0, 1, 2, 3 start at 0, 1, 3, 6
    order * (order + 1) / 2 + b
}

/// Which natural parameter a seeded variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Theta,
    X,
}

/// Order-3 bivariate Taylor jet.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    c: [f64; N_COEFFS],
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 { c: [0.0; N_COEFFS] };

    pub fn constant(v: f64) -> Self {
        let mut j = Self::ZERO;
        j.c[0] = v;
        j
    }

    /// Seed the independent variable `which` at value `v`.
    pub fn var(v: f64, which: Axis) -> Self {
        let mut j = Self::constant(v);
        match which {
            Axis::Theta => j.c[index(1, 0)] = 1.0,
            Axis::X => j.c[index(0, 1)] = 1.0,
        }
        j
    }

    /// Affine function `v + dθ·δθ + dx·δx`.
    pub fn affine(v: f64, d_theta: f64, d_x: f64) -> Self {
        let mut j = Self::constant(v);
        j.c[index(1, 0)] = d_theta;
        j.c[index(0, 1)] = d_x;
        j
    }

    pub fn from_coeffs(c: [f64; N_COEFFS]) -> Self {
        Self { c }
    }

    pub fn coeffs(&self) -> &[f64; N_COEFFS] {
        &self.c
    }

    /// Taylor coefficient for `θ^a x^b`; `None` when `a + b > 3`.
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        (a + b <= 3).then(|| self.c[index(a, b)])
    }

    /// Taylor coefficient for `θ^a x^b`.
    ///
    /// Panics when `a + b > 3`.
    #[inline]
    pub fn c(&self, a: usize, b: usize) -> f64 {
        assert!(a + b <= 3, "jet index ({a},{b}) exceeds order 3");
        self.c[index(a, b)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        assert!(a + b <= 3, "jet index ({a},{b}) exceeds order 3");
        self.c[index(a, b)] = v;
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Raw partial derivative `∂^(a+b) f / ∂θ^a ∂x^b` (factorials multiplied back in).
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        self.c(a, b) * (FACTORIAL[a] * FACTORIAL[b])
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.c.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Jet with the value coefficient replaced by zero.
    fn increment(&self) -> Self {
        let mut d = *self;
        d.c[0] = 0.0;
        d
    }

    /// Compose a univariate function with this jet, given its value and first three
    /// derivatives at `self.value()`.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64, f3: f64) -> Self {
        let d = self.increment();
        let d2 = d * d;
        let d3 = d2 * d;
        let mut out = d.scale(f1) + d2.scale(0.5 * f2) + d3.scale(f3 / 6.0);
        out.c[0] = f0;
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.compose(e, e, e, e)
    }

    pub fn ln(&self) -> Result<Self> {
        let v = self.c[0];
        if !(v > 0.0) {
            return Err(Error::Domain { op: "ln", value: v });
        }
        let r = 1.0 / v;
        Ok(self.compose(v.ln(), r, -r * r, 2.0 * r * r * r))
    }

    pub fn cosh(&self) -> Self {
        let v = self.c[0];
        let (ch, sh) = (v.cosh(), v.sinh());
        self.compose(ch, sh, ch, sh)
    }

    pub fn sinh(&self) -> Self {
        let v = self.c[0];
        let (ch, sh) = (v.cosh(), v.sinh());
        self.compose(sh, ch, sh, ch)
    }

    pub fn sqrt(&self) -> Result<Self> {
        let v = self.c[0];
        if !(v > SQRT_MIN_ARG) {
            return Err(Error::Domain { op: "sqrt", value: v });
        }
        let s = v.sqrt();
        let inv = 1.0 / v;
        Ok(self.compose(s, 0.5 / s, -0.25 * inv / s, 0.375 * inv * inv / s))
    }

    /// `ln(2 cosh √u)` composed with this jet.
    ///
    /// The function is analytic in `u` for `u > -π²/4`, so unlike `sqrt` it expands
    /// cleanly through `u = 0`. Accepts `u > -0.1`.
    pub fn ln_two_cosh_sqrt(&self) -> Result<Self> {
        let u = self.c[0];
        let [f0, f1, f2, f3] = ln_two_cosh_sqrt_derivs(u)?;
        Ok(self.compose(f0, f1, f2, f3))
    }

    /// `ln(1 + e^{-2f})` composed with this jet; requires `f >= 0`.
    pub fn ln1p_exp_neg2(&self) -> Result<Self> {
        let f = self.c[0];
        if !(f >= 0.0) {
            return Err(Error::Domain {
                op: "ln1p_exp_neg2",
                value: f,
            });
        }
        let q = (-2.0 * f).exp();
        let p = 1.0 + q;
        Ok(self.compose(
            q.ln_1p(),
            -2.0 * q / p,
            4.0 * q / (p * p),
            -8.0 * q * (1.0 - q) / (p * p * p),
        ))
    }

    /// Log-sum-exp of jets, shifted by the largest value so nothing overflows.
    pub fn log_sum_exp(terms: &[Jet2]) -> Result<Self> {
        let m = terms
            .iter()
            .map(|t| t.c[0])
            .fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Err(Error::Domain {
                op: "log_sum_exp",
                value: m,
            });
        }
        let mut sum = Jet2::ZERO;
        for t in terms {
            let mut shifted = *t;
            shifted.c[0] -= m;
            sum += shifted.exp();
        }
        let mut out = sum.ln()?;
        out.c[0] += m;
        Ok(out)
    }

    /// Re-express the jet after the linear change of variables
    /// `(δθ, δx) = m · (δp, δq)`; `m` is row-major.
    pub fn linear_substitute(&self, m: [[f64; 2]; 2]) -> Self {
        let dt = Jet2::affine(0.0, m[0][0], m[0][1]);
        let dx = Jet2::affine(0.0, m[1][0], m[1][1]);
        let pt = [Jet2::constant(1.0), dt, dt * dt, dt * dt * dt];
        let px = [Jet2::constant(1.0), dx, dx * dx, dx * dx * dx];
        let mut out = Jet2::ZERO;
        for &(a, b) in MULTI_INDICES.iter() {
            let coeff = self.c[index(a, b)];
            if coeff != 0.0 {
                out += (pt[a] * px[b]).scale(coeff);
            }
        }
        out
    }

    /// Impose the Euler relations of a degree-1 homogeneous function on a jet taken
    /// at `(ρ0, 0)` in coordinates whose first axis points along the ray.
    ///
    /// Only the value and the pure second-axis coefficients carry information; the
    /// remaining coefficients are fixed by homogeneity and are rebuilt exactly rather
    /// than left holding rounding residue.
    pub fn project_homogeneous(&self, rho0: f64) -> Self {
        let mut out = Jet2::ZERO;
        let v = self.c[0];
        let s1 = self.c[index(0, 1)];
        let s2 = self.c[index(0, 2)];
        let s3 = self.c[index(0, 3)];
        out.c[0] = v;
        out.c[index(1, 0)] = v / rho0;
        out.c[index(0, 1)] = s1;
        out.c[index(0, 2)] = s2;
        out.c[index(1, 2)] = -s2 / rho0;
        out.c[index(0, 3)] = s3;
        out
    }
}

const FACTORIAL: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: Jet2) -> Jet2 {
        self += rhs;
        self
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, rhs: Jet2) {
        self.c.iter_mut().zip(rhs.c).for_each(|(a, b)| *a += b);
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: Jet2) -> Jet2 {
        self -= rhs;
        self
    }
}

impl SubAssign for Jet2 {
    fn sub_assign(&mut self, rhs: Jet2) {
        self.c.iter_mut().zip(rhs.c).for_each(|(a, b)| *a -= b);
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: f64) -> Jet2 {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: f64) -> Jet2 {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;

    /// Truncated Cauchy product.
    fn mul(self, rhs: Jet2) -> Jet2 {
        let mut out = Jet2::ZERO;
        for &(a, b) in MULTI_INDICES.iter() {
            let mut acc = 0.0;
            for p in 0..=a {
                for q in 0..=b {
                    acc += self.c[index(p, q)] * rhs.c[index(a - p, b - q)];
                }
            }
            out.c[index(a, b)] = acc;
        }
        out
    }
}

/// Below this argument `ln(2cosh√u)` is evaluated from its power series in `u`.
const SERIES_SWITCH: f64 = 0.1;
const SERIES_TERMS: usize = 22;

/// Power-series coefficients of `ln cosh √u = Σ b_n uⁿ` (b_0 = 0).
fn ln_cosh_sqrt_series() -> &'static [f64; SERIES_TERMS] {
    static COEFFS: OnceLock<[f64; SERIES_TERMS]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        // cosh √u = Σ uⁿ/(2n)!; take the logarithm of the power series term by term.
        let mut a = [0.0; SERIES_TERMS];
        let mut fact = 1.0;
        for (n, an) in a.iter_mut().enumerate() {
            if n > 0 {
                fact *= ((2 * n - 1) * (2 * n)) as f64;
            }
            *an = 1.0 / fact;
        }
        let mut b = [0.0; SERIES_TERMS];
        for n in 1..SERIES_TERMS {
            let mut acc = 0.0;
            for k in 1..n {
                acc += k as f64 * b[k] * a[n - k];
            }
            b[n] = a[n] - acc / n as f64;
        }
        b
    })
}

/// Value and first three derivatives of `u ↦ ln(2 cosh √u)`.
pub fn ln_two_cosh_sqrt_derivs(u: f64) -> Result<[f64; 4]> {
    if !(u > -SERIES_SWITCH) || !u.is_finite() {
        return Err(Error::Domain {
            op: "ln_two_cosh_sqrt",
            value: u,
        });
    }
    if u < SERIES_SWITCH {
        let b = ln_cosh_sqrt_series();
        let mut out = [0.0; 4];
        // Horner for the value and the three derivatives.
        for n in (1..SERIES_TERMS).rev() {
            let nf = n as f64;
            out[0] = out[0] * u + b[n];
            out[1] = out[1] * u + nf * b[n];
            if n >= 2 {
                out[2] = out[2] * u + nf * (nf - 1.0) * b[n];
            }
            if n >= 3 {
                out[3] = out[3] * u + nf * (nf - 1.0) * (nf - 2.0) * b[n];
            }
        }
        out[0] = out[0] * u + std::f64::consts::LN_2;
        return Ok(out);
    }
    let s = u.sqrt();
    let q = (-2.0 * s).exp();
    let t = (1.0 - q) / (1.0 + q);
    let sech2 = 4.0 * q / ((1.0 + q) * (1.0 + q));
    let s2 = u;
    let s3 = s2 * s;
    let s4 = s2 * s2;
    let s5 = s4 * s;
    Ok([
        s + q.ln_1p(),
        t / (2.0 * s),
        sech2 / (4.0 * s2) - t / (4.0 * s3),
        -t * sech2 / (4.0 * s3) - 3.0 * sech2 / (8.0 * s4) + 3.0 * t / (8.0 * s5),
    ])
}
