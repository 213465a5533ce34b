//! The continuous problem: coefficient fields, the degeneracy weight,
//! truncation, data, and the closed-form singular solution.

use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{self, expm1_over, ln1p_over, ln_1p, powf, sqrt};
use crate::mesh::{GridFunction, QuadPoint, RadialField};

/// Truncation `T_k(s) = max(-k, min(s, k))`.
pub fn truncate(s: f64, k: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(Error::InvalidTruncationLevel(k));
    }
    Ok(clamp(s, k))
}

/// Infallible `T_k` for callers that already validated `k >= 0`.
#[inline]
pub(crate) fn clamp(s: f64, k: f64) -> f64 {
    if s > k {
        k
    } else if s < -k {
        -k
    } else {
        s
    }
}

/// `1 / (1 + |u|)^gamma`.
#[inline]
pub fn degeneracy_weight(u: f64, gamma: f64) -> f64 {
    powf(1.0 + u.abs(), -gamma)
}

/// `∫_p^q (1 + min(t, cap))^(-beta) dt` for `0 <= p <= q`.
fn weight_integral_nonneg(p: f64, q: f64, beta: f64, cap: f64) -> f64 {
    if q <= p {
        return 0.0;
    }
    if p >= cap {
        return (q - p) * powf(1.0 + cap, -beta);
    }
    let top = if q < cap { q } else { cap };
    let base = 1.0 + p;
    // (1+p)^(1-beta) [ (1+d)^(1-beta) - 1 ] / (1-beta), d = (top-p)/(1+p)
    let band = powf(base, 1.0 - beta) * expm1_over(1.0 - beta, ln_1p((top - p) / base));
    band + (q - top) * powf(1.0 + cap, -beta)
}

/// `∫_a^b (1 + |T_cap(s)|)^(-beta) ds` with orientation (negative if `b < a`).
pub fn weight_integral(a: f64, b: f64, beta: f64, cap: f64) -> f64 {
    if b < a {
        return -weight_integral(b, a, beta, cap);
    }
    if a >= 0.0 {
        weight_integral_nonneg(a, b, beta, cap)
    } else if b <= 0.0 {
        weight_integral_nonneg(-b, -a, beta, cap)
    } else {
        weight_integral_nonneg(0.0, -a, beta, cap) + weight_integral_nonneg(0.0, b, beta, cap)
    }
}

/// Mean of `(1 + |T_cap(s)|)^(-beta)` over `s` between `a` and `b`.
///
/// This is the exact average of the degeneracy weight along a linear profile
/// from `a` to `b`; for `a == b` it is the weight itself. Pass
/// `f64::INFINITY` as `cap` for no truncation.
pub fn mean_degeneracy_weight(a: f64, b: f64, beta: f64, cap: f64) -> f64 {
    if a == b {
        let s = clamp(a, cap).abs();
        return powf(1.0 + s, -beta);
    }
    weight_integral(a, b, beta, cap) / (b - a)
}

/// Kirchhoff variable `G(s) = ∫_0^s (1 + |t|)^(-gamma) dt`.
///
/// The flux of the problem with the identity coefficient is `∇G(u)`.
pub fn kirchhoff(s: f64, gamma: f64) -> f64 {
    weight_integral(0.0, s, gamma, f64::INFINITY)
}

/// `∫_0^s (1 + |T_cap(t)|)^(-gamma) dt`, odd in `s`.
pub fn capped_kirchhoff(s: f64, gamma: f64, cap: f64) -> f64 {
    weight_integral(0.0, s, gamma, cap)
}

/// Inverse of [`capped_kirchhoff`]. For `cap = ∞` and `γ > 1` the argument
/// must satisfy `|z| < 1/(γ-1)`; the result is `∞` otherwise.
pub fn capped_kirchhoff_inverse(z: f64, gamma: f64, cap: f64) -> f64 {
    let a = z.abs();
    let top = if cap.is_finite() {
        capped_kirchhoff(cap, gamma, f64::INFINITY)
    } else {
        f64::INFINITY
    };
    let s = if a <= top {
        let c = 1.0 - gamma;
        if c * a <= -1.0 {
            f64::INFINITY
        } else {
            math::exp_m1(ln1p_over(c, a))
        }
    } else {
        cap + (a - top) * powf(1.0 + cap, gamma)
    };
    math::sgn(z) * s
}

/// Coefficient fields `a(x, ξ)` of the form `a = s(|x|, |ξ|) ξ`.
#[derive(Clone)]
pub enum CoefficientKind {
    /// `a(x, ξ) = ξ`.
    Identity,
    /// `a(x, ξ) = d(|x|) ξ`, the same scalar on every axis.
    Diagonal(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// `a(ξ) = ξ + ½ ξ |ξ| / (1 + |ξ|)`.
    NonlinearDemo,
}

impl fmt::Debug for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientKind::Identity => f.write_str("Identity"),
            CoefficientKind::Diagonal(_) => f.write_str("Diagonal(..)"),
            CoefficientKind::NonlinearDemo => f.write_str("NonlinearDemo"),
        }
    }
}

/// A Carathéodory field with ellipticity constant `alpha` and growth
/// constant `beta`.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    pub kind: CoefficientKind,
    pub alpha: f64,
    pub beta: f64,
}

impl CoefficientField {
    pub fn identity() -> Self {
        CoefficientField {
            kind: CoefficientKind::Identity,
            alpha: 1.0,
            beta: 1.0,
        }
    }

    pub fn nonlinear_demo() -> Self {
        CoefficientField {
            kind: CoefficientKind::NonlinearDemo,
            alpha: 1.0,
            beta: 1.5,
        }
    }

    /// Isotropic field `d(|x|) ξ`. `alpha <= d <= beta` is checked at every
    /// quadrature point during assembly.
    pub fn diagonal<F>(d: F, alpha: f64, beta: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(alpha > 0.0) || !(beta >= alpha) || !beta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "coefficient",
                constraint: "need 0 < alpha <= beta < inf",
            });
        }
        Ok(CoefficientField {
            kind: CoefficientKind::Diagonal(Arc::new(d)),
            alpha,
            beta,
        })
    }

    /// Linear in `ξ` (identity or diagonal).
    pub fn is_linear(&self) -> bool {
        !matches!(self.kind, CoefficientKind::NonlinearDemo)
    }

    /// The scalar `s` with `a(x, ξ) = s ξ`, given `|x|` and `|ξ|`.
    ///
    /// For the nonlinear field this is the secant factor `a(ξ)·ξ / |ξ|²`,
    /// falling back to `alpha` for `|ξ| < 1e-14`.
    pub fn secant_factor(&self, radius: f64, grad_norm: f64) -> f64 {
        match &self.kind {
            CoefficientKind::Identity => 1.0,
            CoefficientKind::Diagonal(d) => d(radius),
            CoefficientKind::NonlinearDemo => {
                if grad_norm < 1e-14 {
                    self.alpha
                } else {
                    1.0 + 0.5 * grad_norm / (1.0 + grad_norm)
                }
            }
        }
    }

    /// `a(x, ξ)`.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let out = self.raw_eval(x, xi);
        debug_assert!(
            self.check_growth(x, xi, &out).is_ok(),
            "coefficient violates (ell)/(bdd) at x = {x:?}, xi = {xi:?}"
        );
        out
    }

    /// `a(x, ξ)` with (ell) and (bdd) verified at the evaluated pair.
    pub fn checked_eval(&self, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        let out = self.raw_eval(x, xi);
        self.check_growth(x, xi, &out)?;
        Ok(out)
    }

    /// Checks (ell) and (bdd) at `(x, ξ)` and (monot) for the pair `(ξ, η)`.
    /// Monotonicity is required strictly whenever `|ξ - η| > 1e-12`.
    pub fn check_structure(&self, x: &[f64], xi: &[f64], eta: &[f64]) -> Result<()> {
        let a_xi = self.checked_eval(x, xi)?;
        let a_eta = self.checked_eval(x, eta)?;
        let mut dist2 = 0.0;
        let mut pairing = 0.0;
        for i in 0..xi.len() {
            let d = xi[i] - eta[i];
            dist2 += d * d;
            pairing += (a_xi[i] - a_eta[i]) * d;
        }
        if sqrt(dist2) > 1e-12 && !(pairing > 0.0) {
            return Err(Error::StructuralViolation {
                assumption: "monot",
                radius: norm(x),
                detail: format!("[a(xi)-a(eta)].(xi-eta) = {pairing:e}"),
            });
        }
        Ok(())
    }

    fn raw_eval(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let s = self.secant_factor(norm(x), norm(xi));
        xi.iter().map(|v| s * v).collect()
    }

    fn check_growth(&self, x: &[f64], xi: &[f64], a: &[f64]) -> Result<()> {
        let xi2: f64 = xi.iter().map(|v| v * v).sum();
        let a_dot: f64 = a.iter().zip(xi).map(|(p, q)| p * q).sum();
        let tol = 1e-12 * xi2;
        if a_dot < self.alpha * xi2 - tol {
            return Err(Error::StructuralViolation {
                assumption: "ell",
                radius: norm(x),
                detail: format!("a.xi = {a_dot:e} < alpha |xi|^2 = {:e}", self.alpha * xi2),
            });
        }
        let a_norm = norm(a);
        if a_norm > self.beta * sqrt(xi2) * (1.0 + 1e-12) {
            return Err(Error::StructuralViolation {
                assumption: "bdd",
                radius: norm(x),
                detail: format!("|a| = {a_norm:e} > beta |xi|"),
            });
        }
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

/// Domain of the problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Unit ball of `R^N` with radially symmetric data.
    RadialBall,
    /// Unit interval `(0, 1)`, with `u(1) = 0` and a symmetry condition at 0.
    Interval,
}

/// `-div(a(x,∇u)/(1+|u|)^γ) + u = f` with zero boundary data.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub gamma: f64,
    pub dimension: usize,
    pub domain: Domain,
    pub coefficient: CoefficientField,
    pub datum: Datum,
}

impl ProblemSpec {
    pub fn new(
        gamma: f64,
        dimension: usize,
        domain: Domain,
        coefficient: CoefficientField,
        datum: Datum,
    ) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma",
                constraint: "gamma > 0",
            });
        }
        if domain == Domain::RadialBall && dimension <= 2 {
            return Err(Error::InvalidParameter {
                name: "N",
                constraint: "N > 2 for ball domains",
            });
        }
        Ok(ProblemSpec {
            gamma,
            dimension,
            domain,
            coefficient,
            datum,
        })
    }

    /// Same problem, different datum.
    pub fn with_datum(&self, datum: Datum) -> Self {
        ProblemSpec { datum, ..self.clone() }
    }

    /// `(γ + 2) / 2`, the Lebesgue exponent of the existence theory.
    pub fn energy_exponent(&self) -> f64 {
        (self.gamma + 2.0) / 2.0
    }
}

/// Example solution `u(r) = r^(-σ) - 1` of the problem with `a(ξ) = ξ` on the
/// unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedSolution {
    pub sigma: f64,
    pub dimension: usize,
    pub gamma: f64,
}

/// Builds the singular solution for `2/γ < σ < N - 2`.
pub fn manufactured_solution(sigma: f64, dimension: usize, gamma: f64) -> Result<ManufacturedSolution> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            constraint: "gamma > 0",
        });
    }
    let lower = 2.0 / gamma;
    let upper = dimension as f64 - 2.0;
    if !(sigma > lower && sigma < upper) {
        return Err(Error::SigmaOutOfWindow { sigma, lower, upper });
    }
    Ok(ManufacturedSolution {
        sigma,
        dimension,
        gamma,
    })
}

impl ManufacturedSolution {
    pub fn u_exact(&self, r: f64) -> f64 {
        powf(r, -self.sigma) - 1.0
    }

    pub fn du_exact(&self, r: f64) -> f64 {
        -self.sigma * powf(r, -self.sigma - 1.0)
    }

    /// Flux coefficient `σ (N - 2 + σ(γ - 1))`.
    pub fn flux_constant(&self) -> f64 {
        let s = self.sigma;
        s * (self.dimension as f64 - 2.0 + s * (self.gamma - 1.0))
    }

    pub fn f_exact(&self, r: f64) -> f64 {
        let s = self.sigma;
        self.flux_constant() * powf(r, s * (self.gamma - 1.0) - 2.0) + powf(r, -s) - 1.0
    }

    pub fn datum(&self) -> Datum {
        Datum {
            kind: DatumKind::Manufactured(*self),
            // f ~ r^(-σ) near the origin: f ∈ L^m for every m < N/σ.
            summability: self.dimension as f64 / self.sigma,
        }
    }

    pub fn problem(&self) -> ProblemSpec {
        ProblemSpec {
            gamma: self.gamma,
            dimension: self.dimension,
            domain: Domain::RadialBall,
            coefficient: CoefficientField::identity(),
            datum: self.datum(),
        }
    }
}

/// Data `f`, evaluated as radial functions.
#[derive(Clone)]
pub enum DatumKind {
    Zero,
    Constant(f64),
    Manufactured(ManufacturedSolution),
    /// Linear interpolation of `values` at strictly increasing `knots`,
    /// constant outside the knot range.
    PiecewiseLinear {
        knots: Arc<[f64]>,
        values: Arc<[f64]>,
    },
    ClosedForm(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Nodal(GridFunction),
    /// `height` on `[0, radius]`, zero beyond.
    Indicator {
        radius: f64,
        height: f64,
    },
    Truncated {
        inner: Arc<Datum>,
        level: f64,
    },
    Scaled {
        inner: Arc<Datum>,
        factor: f64,
    },
}

/// A datum together with its declared Lebesgue class `L^summability`.
#[derive(Clone)]
pub struct Datum {
    pub kind: DatumKind,
    pub summability: f64,
}

impl fmt::Debug for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DatumKind::Zero => write!(f, "Zero"),
            DatumKind::Constant(c) => write!(f, "Constant({c})"),
            DatumKind::Manufactured(m) => write!(f, "Manufactured({m:?})"),
            DatumKind::PiecewiseLinear { knots, .. } => {
                write!(f, "PiecewiseLinear({} knots)", knots.len())
            }
            DatumKind::ClosedForm(_) => write!(f, "ClosedForm(..)"),
            DatumKind::Nodal(g) => write!(f, "Nodal({} nodes)", g.values().len()),
            DatumKind::Indicator { radius, height } => {
                write!(f, "Indicator(radius={radius}, height={height})")
            }
            DatumKind::Truncated { inner, level } => write!(f, "T_{level}({inner:?})"),
            DatumKind::Scaled { inner, factor } => write!(f, "{factor} * {inner:?}"),
        }
    }
}

impl Datum {
    pub fn zero() -> Self {
        Datum {
            kind: DatumKind::Zero,
            summability: f64::INFINITY,
        }
    }

    pub fn constant(c: f64) -> Self {
        Datum {
            kind: DatumKind::Constant(c),
            summability: f64::INFINITY,
        }
    }

    pub fn piecewise_linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                name: "knots",
                constraint: "at least two strictly increasing knots, one value per knot",
            });
        }
        Ok(Datum {
            kind: DatumKind::PiecewiseLinear {
                knots: knots.into(),
                values: values.into(),
            },
            summability: f64::INFINITY,
        })
    }

    pub fn closed_form<F>(f: F, summability: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Datum {
            kind: DatumKind::ClosedForm(Arc::new(f)),
            summability,
        }
    }

    pub fn nodal(g: GridFunction) -> Self {
        Datum {
            kind: DatumKind::Nodal(g),
            summability: f64::INFINITY,
        }
    }

    pub fn indicator(radius: f64, height: f64) -> Self {
        Datum {
            kind: DatumKind::Indicator { radius, height },
            summability: f64::INFINITY,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Datum {
            kind: DatumKind::Scaled {
                inner: Arc::new(self.clone()),
                factor,
            },
            summability: self.summability,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            DatumKind::Zero => true,
            DatumKind::Constant(c) => *c == 0.0,
            DatumKind::Truncated { inner, .. } => inner.is_zero(),
            DatumKind::Scaled { inner, factor } => *factor == 0.0 || inner.is_zero(),
            _ => false,
        }
    }

    /// `f(r)`.
    pub fn value(&self, r: f64) -> f64 {
        match &self.kind {
            DatumKind::Zero => 0.0,
            DatumKind::Constant(c) => *c,
            DatumKind::Manufactured(m) => m.f_exact(r),
            DatumKind::PiecewiseLinear { knots, values } => {
                let n = knots.len();
                if r <= knots[0] {
                    return values[0];
                }
                if r >= knots[n - 1] {
                    return values[n - 1];
                }
                let j = knots.partition_point(|&k| k <= r).min(n - 1);
                let (k0, k1) = (knots[j - 1], knots[j]);
                let t = (r - k0) / (k1 - k0);
                values[j - 1] * (1.0 - t) + values[j] * t
            }
            DatumKind::ClosedForm(f) => f(r),
            DatumKind::Nodal(g) => g.eval(r),
            DatumKind::Indicator { radius, height } => {
                if r <= *radius {
                    *height
                } else {
                    0.0
                }
            }
            DatumKind::Truncated { inner, level } => clamp(inner.value(r), *level),
            DatumKind::Scaled { inner, factor } => factor * inner.value(r),
        }
    }

    /// Points where the datum is not smooth; quadrature splits elements there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            DatumKind::PiecewiseLinear { knots, .. } => knots.to_vec(),
            DatumKind::Nodal(g) => g.mesh().nodes().to_vec(),
            DatumKind::Indicator { radius, .. } => vec![*radius],
            DatumKind::Truncated { inner, .. } | DatumKind::Scaled { inner, .. } => inner.breakpoints(),
            _ => Vec::new(),
        }
    }

    /// Whether the declared class reaches `L^((γ+2)/2)`.
    pub fn admits_existence(&self, gamma: f64) -> bool {
        self.summability >= (gamma + 2.0) / 2.0
    }
}

impl RadialField for Datum {
    fn at(&self, qp: &QuadPoint) -> f64 {
        self.value(qp.r)
    }

    fn breakpoints(&self) -> Vec<f64> {
        Datum::breakpoints(self)
    }
}

/// `f_n = T_n ∘ f`.
pub fn truncate_datum(f: &Datum, n: u64) -> Datum {
    Datum {
        kind: DatumKind::Truncated {
            inner: Arc::new(f.clone()),
            level: n as f64,
        },
        summability: f64::INFINITY,
    }
}

/// `sgn` with `sgn(0) = 0`.
pub fn sgn(s: f64) -> f64 {
    math::sgn(s)
}
