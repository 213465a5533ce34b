//! Numerical certificates for the a-priori estimates, the L¹ theory and the
//! changes of variables.
//!
//! Every check returns a [`CertificateReport`] comparing a computed left-hand
//! side against a right-hand side with a relative slack.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp_m1, expm1_over, ln_1p, powf, sgn, sqrt};
use crate::mesh::{
    lp_norm, restricted_gradient_energy, restricted_integral, restricted_weighted, w11_seminorm,
    weighted_gradient_energy, GridFunction, RadialField, RadialMesh,
};
use crate::problem::{CoefficientKind, Datum, ProblemSpec};
use crate::solver::{approximate_sequence_with, Approximation, Discretization, SequenceReport, SolverConfig};

/// Relative slack used for integral inequalities.
pub const DEFAULT_SLACK: f64 = 0.05;

/// Absolute allowance added to every right-hand side.
pub const ABSOLUTE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub name: String,
    /// Threshold parameter, `0` where none applies.
    pub k: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
    pub notes: String,
}

impl CertificateReport {
    pub fn new(name: impl Into<String>, k: f64, lhs: f64, rhs: f64, slack: f64) -> Self {
        CertificateReport {
            name: name.into(),
            k,
            lhs,
            rhs,
            slack,
            passed: holds(lhs, rhs, slack),
            notes: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(&note.into());
        self
    }

    /// Same comparison at a different slack.
    pub fn with_slack(&self, slack: f64) -> Self {
        CertificateReport {
            slack,
            passed: holds(self.lhs, self.rhs, slack),
            ..self.clone()
        }
    }
}

fn holds(lhs: f64, rhs: f64, slack: f64) -> bool {
    lhs <= rhs * (1.0 + slack) + ABSOLUTE_TOL
}

fn abs_integral(mesh: &RadialMesh, f: &dyn RadialField) -> f64 {
    mesh.integrate(&f.breakpoints(), |q| f.at(q).abs())
}

/// `∫_{|u|>=k} |u|^p <= ∫_{|u|>=k} |f|^p` with `p = (γ+2)/2`.
pub fn check_estimate_aa(u: &GridFunction, f: &Datum, gamma: f64, k: f64) -> CertificateReport {
    let p = (gamma + 2.0) / 2.0;
    let lhs = restricted_integral(u, u, k, p);
    let rhs = restricted_integral(u, f, k, p);
    CertificateReport::new("estimate_aa", k, lhs, rhs, DEFAULT_SLACK)
}

/// `α(γ/2) ∫_{|u|>=k} |∇u|²/(1+|u|)^((γ+2)/2) <= ∫_{|u|>=k} |f| (1+|u|)^(γ/2)`.
pub fn check_estimate_bb(u: &GridFunction, f: &Datum, gamma: f64, k: f64, alpha: f64) -> CertificateReport {
    let lhs = alpha * 0.5 * gamma * restricted_gradient_energy(u, 0.5 * (gamma + 2.0), k);
    let rhs = restricted_weighted(u, f, k, |fv, uv| fv.abs() * powf(1.0 + uv.abs(), 0.5 * gamma));
    CertificateReport::new("estimate_bb", k, lhs, rhs, DEFAULT_SLACK)
}

/// `α ∫|∇T_k(u)|² <= k (1+k)^γ ∫|f|`.
pub fn check_estimate_dd(u: &GridFunction, f: &Datum, gamma: f64, k: f64, alpha: f64) -> Result<CertificateReport> {
    if !(k > 0.0) {
        return Err(Error::InvalidTruncationLevel(k));
    }
    let lhs = alpha * weighted_gradient_energy(&u.truncated(k), 0.0);
    let rhs = k * powf(1.0 + k, gamma) * abs_integral(u.mesh(), f);
    Ok(CertificateReport::new("estimate_dd", k, lhs, rhs, DEFAULT_SLACK))
}

/// `∫|u - z| <= ∫|f - g|`.
pub fn check_l1_contraction(u: &GridFunction, z: &GridFunction, f: &Datum, g: &Datum) -> Result<CertificateReport> {
    let d = u.sub(z)?;
    let lhs = lp_norm(&d, 1.0);
    let mut breaks = f.breakpoints();
    breaks.extend(g.breakpoints());
    let rhs = u.mesh().integrate(&breaks, |q| (f.at(q) - g.at(q)).abs());
    Ok(CertificateReport::new("l1_contraction", 0.0, lhs, rhs, DEFAULT_SLACK))
}

/// `f <= g` at the nodes implies `u <= z`.
pub fn check_comparison(u: &GridFunction, z: &GridFunction, f: &Datum, g: &Datum) -> Result<CertificateReport> {
    if !u.mesh().same_as(z.mesh()) {
        return Err(Error::MeshMismatch);
    }
    for &r in u.mesh().nodes() {
        if f.value(r) > g.value(r) {
            return Err(Error::HypothesisViolation { radius: r });
        }
    }
    let lhs = u
        .values()
        .iter()
        .zip(z.values())
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CertificateReport::new("comparison", 0.0, lhs, 0.0, 0.0))
}

/// Reports for the solution map `S`: L¹ nonexpansivity and the norm bound of
/// each limit by its datum.
#[derive(Clone, Debug, PartialEq)]
pub struct NonexpansiveReport {
    pub l1: CertificateReport,
    pub norm_f: CertificateReport,
    pub norm_g: CertificateReport,
}

impl NonexpansiveReport {
    pub fn passed(&self) -> bool {
        self.l1.passed && self.norm_f.passed && self.norm_g.passed
    }

    pub fn reports(&self) -> [&CertificateReport; 3] {
        [&self.l1, &self.norm_f, &self.norm_g]
    }
}

pub fn check_nonexpansive_map(
    f: &Datum,
    g: &Datum,
    sf: &SequenceReport,
    sg: &SequenceReport,
) -> Result<NonexpansiveReport> {
    let mut l1 = check_l1_contraction(&sf.limit, &sg.limit, f, g)?;
    l1.name = "nonexpansive_l1".into();
    let norm = |s: &SequenceReport, d: &Datum, name: &str| {
        let p = (s.gamma + 2.0) / 2.0;
        let mesh = s.limit.mesh();
        let lhs = lp_norm(&s.limit, p);
        let rhs = powf(mesh.integrate(&d.breakpoints(), |q| powf(d.at(q).abs(), p)), 1.0 / p);
        let rep = CertificateReport::new(name, 0.0, lhs, rhs, DEFAULT_SLACK);
        if s.cauchy_certified {
            rep
        } else {
            rep.with_note("sequence not cauchy-certified")
        }
    };
    if !(sf.cauchy_certified && sg.cauchy_certified) {
        l1 = l1.with_note("sequence not cauchy-certified");
    }
    Ok(NonexpansiveReport {
        l1,
        norm_f: norm(sf, f, "nonexpansive_norm_f"),
        norm_g: norm(sg, g, "nonexpansive_norm_g"),
    })
}

/// Runs the sequences `T_n(f)` and `(1 - 1/(2n)) T_n(f)` and compares the
/// limits in L¹ against `max(1e-6, 1% of ‖limit‖₁)`.
pub fn check_approximation_independence(
    spec: &ProblemSpec,
    mesh: &RadialMesh,
    n_list: &[u64],
    config: &SolverConfig,
) -> Result<CertificateReport> {
    let a = approximate_sequence_with(spec, mesh, n_list, config, Approximation::Truncation)?;
    let b = approximate_sequence_with(spec, mesh, n_list, config, Approximation::ScaledTruncation)?;
    let lhs = lp_norm(&a.limit.sub(&b.limit)?, 1.0);
    let rhs = (0.01 * lp_norm(&a.limit, 1.0)).max(1e-6);
    let rep = CertificateReport::new("approximation_independence", 0.0, lhs, rhs, 0.0);
    Ok(if a.cauchy_certified && b.cauchy_certified {
        rep
    } else {
        rep.with_note("sequence not cauchy-certified")
    })
}

/// `v = (4/(2-γ)) [(1+|u|)^((2-γ)/4) - 1] sgn(u)`, and `log(1+|u|) sgn(u)` at
/// `γ = 2`.
pub fn substitution_v(u: &GridFunction, gamma: f64) -> GridFunction {
    let c = (2.0 - gamma) / 4.0;
    u.map(|s| sgn(s) * expm1_over(c, ln_1p(s.abs())))
}

/// Inverse of [`substitution_v`].
pub fn substitution_v_inverse(v: &GridFunction, gamma: f64) -> Result<GridFunction> {
    let c = (2.0 - gamma) / 4.0;
    if c < 0.0 && v.values().iter().any(|x| c * x.abs() <= -1.0) {
        return Err(Error::InvalidRange("|v| >= 4/(gamma-2)"));
    }
    Ok(v.map(|x| {
        let y = c * x.abs();
        let l = if y.abs() < 1e-9 {
            x.abs() * (1.0 - 0.5 * y)
        } else {
            ln_1p(y) / c
        };
        sgn(x) * exp_m1(l)
    }))
}

/// `z = (1 - (1+u)^(1-γ)) / (γ-1)`.
pub fn substitution_z(u: f64, gamma: f64) -> f64 {
    let g = gamma - 1.0;
    -exp_m1(-g * ln_1p(u)) / g
}

/// `(1 - (γ-1) z)^(-1/(γ-1)) - 1`, the zero-order term of the equation for `z`.
pub fn z_lower_order(z: f64, gamma: f64) -> Result<f64> {
    let g = gamma - 1.0;
    if g * z >= 1.0 {
        return Err(Error::InvalidRange("(gamma-1) z >= 1"));
    }
    Ok(exp_m1(-ln_1p(-g * z) / g))
}

#[derive(Clone, Debug)]
pub struct ZSubstitution {
    pub z: GridFunction,
    /// Nodal zero-order term recovered from `z`.
    pub lower_order: Vec<f64>,
    /// Residual of `-div(A ∇z) + L(z) = f` against the P1 basis.
    pub transformed_residual: f64,
    /// Residual of the original equation at `u`.
    pub original_residual: f64,
    /// `max |L(z_i) - u_i| / max(1, |u_i|)`.
    pub identity_error: f64,
}

/// Rewrites a nonnegative solution through `z` and evaluates the discrete
/// weak residual of the transformed equation.
pub fn substitution_z_residual(u: &GridFunction, spec: &ProblemSpec, mesh: &RadialMesh) -> Result<ZSubstitution> {
    let gamma = spec.gamma;
    if !(gamma > 1.0) {
        return Err(Error::GammaNotSupercritical(gamma));
    }
    if matches!(spec.coefficient.kind, CoefficientKind::NonlinearDemo) {
        return Err(Error::InvalidParameter {
            name: "coefficient",
            constraint: "the change of variables needs a coefficient linear in the gradient",
        });
    }
    if !u.mesh().same_as(mesh) {
        return Err(Error::MeshMismatch);
    }
    if let Some(i) = u.values().iter().position(|&s| s < 0.0) {
        return Err(Error::HypothesisViolation {
            radius: mesh.nodes()[i],
        });
    }
    let z = u.map(|s| substitution_z(s, gamma));
    let lower_order = z
        .values()
        .iter()
        .map(|&s| z_lower_order(s, gamma))
        .collect::<Result<Vec<f64>>>()?;
    let identity_error = lower_order
        .iter()
        .zip(u.values())
        .map(|(l, s)| (l - s).abs() / s.abs().max(1.0))
        .fold(0.0, f64::max);

    let disc = Discretization::new(mesh, spec, &spec.datum)?;
    let original_residual = disc.residual(u.values(), f64::INFINITY);
    let n = mesh.num_nodes();
    let (mass, load, geo) = (disc.mass(), disc.load(), disc.geometric());
    let zv = z.values();
    let mut r: Vec<f64> = (0..n - 1).map(|i| mass[i] * lower_order[i] - load[i]).collect();
    for e in 0..n - 1 {
        let flux = geo[e] * (zv[e] - zv[e + 1]);
        r[e] += flux;
        if e + 1 < n - 1 {
            r[e + 1] -= flux;
        }
    }
    let transformed_residual = r.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    Ok(ZSubstitution {
        z,
        lower_order,
        transformed_residual,
        original_residual,
        identity_error,
    })
}

/// `∫|∇v| <= ‖∇log(A+|v|)‖₂ (∫(A+|v|)²)^(1/2)`.
pub fn check_interpolation(v: &GridFunction, a: f64) -> Result<CertificateReport> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "A",
            constraint: "A > 0",
        });
    }
    if v.values()[v.values().len() - 1] != 0.0 {
        return Err(Error::NotPinned);
    }
    let lhs = w11_seminorm(v);
    let (mut grad, mut mass) = (0.0, 0.0);
    for q in v.mesh().quad_points() {
        let s = a + v.at(q).abs();
        let d = v.slope(q.elem) / s;
        grad += q.weight * d * d;
        mass += q.weight * s * s;
    }
    let rhs = sqrt(grad) * sqrt(mass);
    Ok(CertificateReport::new("interpolation", a, lhs, rhs, DEFAULT_SLACK))
}

/// Human-readable one-liner.
pub fn summary_line(r: &CertificateReport) -> String {
    format!(
        "{} {} k={} lhs={:.6e} rhs={:.6e} slack={}",
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.k,
        r.lhs,
        r.rhs,
        r.slack
    )
}
