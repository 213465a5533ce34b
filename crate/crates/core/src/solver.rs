//! Lumped-mass P1 discretization and the frozen-coefficient fixed point.
//!
//! On element `e = [r_e, r_{e+1}]` the flux between its two nodes is
//!
//! ```text
//! k_e(u) (u_e - u_{e+1}),   k_e(u) = s_e · G_e / h_e² · W_e(u)
//! ```
//!
//! where `G_e = ∫_e d(r) w(r) dr` (times the surface factor) is the
//! geometric stiffness, `s_e` the secant factor of a nonlinear coefficient,
//! and `W_e(u)` the mean of `(1 + |T_M(s)|)^(-γ)` over `s` between the two
//! nodal values. Because `W_e (u_e - u_{e+1}) = G_M(u_e) - G_M(u_{e+1})` for
//! the Kirchhoff primitive `G_M`, the flux is a monotone two-point flux; the
//! frozen linear systems are M-matrices and the nonlinear scheme inherits the
//! discrete comparison principle and L¹ contraction.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{solve_tridiagonal, TridiagonalSystem};
use crate::math::powf;
use crate::mesh::{lp_norm, w11_seminorm, GridFunction, QuadPoint, RadialField, RadialMesh};
use crate::problem::{
    capped_kirchhoff, capped_kirchhoff_inverse, clamp, mean_degeneracy_weight, truncate_datum, CoefficientKind, Datum,
    ProblemSpec,
};

/// Lowest damping factor the fixed point falls back to.
pub const DAMPING_FLOOR: f64 = 1.0 / 16.0;

/// Slack on the discrete maximum principle `‖u‖∞ <= ‖g‖∞`.
pub const MAX_PRINCIPLE_TOL: f64 = 1e-10;

/// Update rule of the nonlinear iteration. Both share the discrete
/// equations and the residual; they differ only in the step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Iteration {
    /// Step in the Kirchhoff variable `z = G_M(u)`: the flux is linear in
    /// `z` once the gradient-dependent secant factor is frozen, and the
    /// zero-order term `u = G_M^{-1}(z)` is linearized.
    #[default]
    Kirchhoff,
    /// Degeneracy weight frozen at the previous iterate, linear solve for
    /// the next one.
    FrozenCoefficient,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stopping threshold on the max-norm nodal residual.
    pub picard_tol: f64,
    pub max_iterations: usize,
    /// Initial damping `λ ∈ (0, 1]`, halved whenever the residual grows.
    pub damping: f64,
    pub iteration: Iteration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            picard_tol: 1e-10,
            max_iterations: 200,
            damping: 1.0,
            iteration: Iteration::Kirchhoff,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.picard_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                constraint: "tol > 0",
            });
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "damping",
                constraint: "0 < damping <= 1",
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                constraint: "max_iter >= 1",
            });
        }
        Ok(())
    }
}

/// Mesh-dependent pieces of the discrete operator for one problem.
pub(crate) struct Discretization {
    mesh: RadialMesh,
    gamma: f64,
    nonlinear: bool,
    /// `∫_e d w / h²` per element.
    geometric: Vec<f64>,
    /// Lumped mass `∫ φ_i w`.
    mass: Vec<f64>,
    /// `∫ f φ_i w`.
    load: Vec<f64>,
    /// `max |f|` over the load quadrature.
    datum_sup: f64,
}

impl Discretization {
    pub(crate) fn new(mesh: &RadialMesh, spec: &ProblemSpec, datum: &Datum) -> Result<Self> {
        let m = mesh.num_elements();
        let coefficient = &spec.coefficient;
        let mut geometric = vec![0.0; m];
        let mut measure = vec![0.0; m];
        let mut mass = vec![0.0; m + 1];
        for q in mesh.quad_points() {
            let d = match &coefficient.kind {
                CoefficientKind::Diagonal(d) => {
                    let v = d(q.r);
                    if !(v >= coefficient.alpha && v <= coefficient.beta) {
                        return Err(Error::StructuralViolation {
                            assumption: "ell/bdd",
                            radius: q.r,
                            detail: alloc::format!("d(r) = {v} outside [alpha, beta]"),
                        });
                    }
                    v
                }
                _ => 1.0,
            };
            geometric[q.elem] += d * q.weight;
            measure[q.elem] += q.weight;
            mass[q.elem] += (1.0 - q.t) * q.weight;
            mass[q.elem + 1] += q.t * q.weight;
        }
        for e in 0..m {
            if !(measure[e] > 0.0) {
                return Err(Error::DegenerateElement(e));
            }
            let h = mesh.element_length(e);
            geometric[e] /= h * h;
        }
        let (load, datum_sup) = load_vector(mesh, datum);
        Ok(Discretization {
            mesh: mesh.clone(),
            gamma: spec.gamma,
            nonlinear: !coefficient.is_linear(),
            geometric,
            mass,
            load,
            datum_sup,
        })
    }

    pub(crate) fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub(crate) fn load(&self) -> &[f64] {
        &self.load
    }

    pub(crate) fn geometric(&self) -> &[f64] {
        &self.geometric
    }

    /// Flux coefficient `k_e` of element `e` for the nodal state `u`.
    #[inline]
    pub(crate) fn flux_coefficient(&self, u: &[f64], e: usize, cap: f64) -> f64 {
        self.geometric[e] * self.secant(u, e) * mean_degeneracy_weight(u[e], u[e + 1], self.gamma, cap)
    }

    /// Gradient-dependent secant factor of element `e`.
    #[inline]
    fn secant(&self, u: &[f64], e: usize) -> f64 {
        if !self.nonlinear {
            return 1.0;
        }
        let slope = ((u[e + 1] - u[e]) / self.mesh.element_length(e)).abs();
        if slope < 1e-14 {
            1.0
        } else {
            1.0 + 0.5 * slope / (1.0 + slope)
        }
    }

    /// Linear system with the coefficient frozen at `frozen`.
    pub(crate) fn assemble(&self, frozen: &[f64], cap: f64) -> TridiagonalSystem {
        let n = self.mesh.num_nodes();
        let mut diag = self.mass.clone();
        let mut lower = vec![0.0; n - 1];
        let mut upper = vec![0.0; n - 1];
        for e in 0..n - 1 {
            let k = self.flux_coefficient(frozen, e, cap);
            diag[e] += k;
            diag[e + 1] += k;
            upper[e] = -k;
            lower[e] = -k;
        }
        let mut rhs = self.load.clone();
        // Dirichlet row at r = 1, eliminated from row n-2 as well.
        diag[n - 1] = 1.0;
        lower[n - 2] = 0.0;
        upper[n - 2] = 0.0;
        rhs[n - 1] = 0.0;
        TridiagonalSystem {
            lower,
            diag,
            upper,
            rhs,
        }
    }

    /// Linearized step in `z = G_M(u)` with the secant factor frozen at `u`.
    fn kirchhoff_step(&self, u: &[f64], cap: f64) -> Result<Step> {
        let n = self.mesh.num_nodes();
        let z: Vec<f64> = u.iter().map(|&s| capped_kirchhoff(s, self.gamma, cap)).collect();
        let mut diag: Vec<f64> = (0..n)
            .map(|i| self.mass[i] * powf(1.0 + clamp(u[i], cap).abs(), self.gamma))
            .collect();
        let mut lower = vec![0.0; n - 1];
        let mut upper = vec![0.0; n - 1];
        let mut rhs = self.residual_vector(u, cap);
        rhs.push(0.0);
        for e in 0..n - 1 {
            let k = self.geometric[e] * self.secant(u, e);
            diag[e] += k;
            diag[e + 1] += k;
            lower[e] = -k;
            upper[e] = -k;
        }
        for v in rhs.iter_mut() {
            *v = -*v;
        }
        diag[n - 1] = 1.0;
        lower[n - 2] = 0.0;
        upper[n - 2] = 0.0;
        let dz = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        let du = (0..n)
            .map(|i| dz[i] * powf(1.0 + clamp(u[i], cap).abs(), self.gamma))
            .collect();
        Ok(Step::Kirchhoff { z, dz, du })
    }

    /// Nodal residual of the nonlinear scheme at all free nodes.
    pub(crate) fn residual_vector(&self, u: &[f64], cap: f64) -> Vec<f64> {
        self.residual_with(u, cap, |i| self.mass[i] * u[i])
    }

    /// Residual `Σ flux + zero_order(i) - b_i` for a custom zero-order term.
    pub(crate) fn residual_with<Z: Fn(usize) -> f64>(&self, u: &[f64], cap: f64, zero_order: Z) -> Vec<f64> {
        let n = self.mesh.num_nodes();
        let mut r: Vec<f64> = (0..n - 1).map(|i| zero_order(i) - self.load[i]).collect();
        for e in 0..n - 1 {
            let flux = self.flux_coefficient(u, e, cap) * (u[e] - u[e + 1]);
            r[e] += flux;
            if e + 1 < n - 1 {
                r[e + 1] -= flux;
            }
        }
        r
    }

    pub(crate) fn residual(&self, u: &[f64], cap: f64) -> f64 {
        max_abs(&self.residual_vector(u, cap))
    }
}

enum Step {
    /// Next iterate of the frozen-coefficient map.
    Target(Vec<f64>),
    /// Current `z = G_M(u)`, its increment and the matching increment of `u`.
    Kirchhoff { z: Vec<f64>, dz: Vec<f64>, du: Vec<f64> },
}

impl Step {
    /// Damped candidates; the Kirchhoff step offers the update taken in `z`
    /// and the same increment applied linearly in `u`, which keeps full
    /// precision where `G_M` is flat.
    fn candidates(&self, u: &[f64], lambda: f64, gamma: f64, cap: f64) -> Vec<Vec<f64>> {
        let lin = |d: &[f64]| u.iter().zip(d).map(|(a, b)| a + lambda * b).collect::<Vec<f64>>();
        match self {
            Step::Target(t) => vec![u.iter().zip(t).map(|(a, b)| a + lambda * (b - a)).collect()],
            Step::Kirchhoff { z, dz, du } => vec![
                lin(du),
                z.iter()
                    .zip(dz)
                    .map(|(a, d)| capped_kirchhoff_inverse(a + lambda * d, gamma, cap))
                    .collect(),
            ],
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `∫ f φ_i w` on quadrature split at the datum's breakpoints, and the
/// largest `|f|` seen.
fn load_vector(mesh: &RadialMesh, datum: &Datum) -> (Vec<f64>, f64) {
    let mut load = vec![0.0; mesh.num_nodes()];
    let mut sup: f64 = 0.0;
    if datum.is_zero() {
        return (load, 0.0);
    }
    let quad: Vec<QuadPoint> = mesh.quad_points_for(datum);
    for q in &quad {
        let f = datum.at(q);
        sup = sup.max(f.abs());
        load[q.elem] += f * (1.0 - q.t) * q.weight;
        load[q.elem + 1] += f * q.t * q.weight;
    }
    (load, sup)
}

/// Tridiagonal system of one frozen-coefficient step for the truncated
/// problem with level `level`, frozen state `frozen` and load `rhs`.
///
/// Off-diagonals are `<= 0`, the matrix is strictly diagonally dominant,
/// and the Dirichlet row at `r = 1` is the identity.
pub fn assemble_system(
    mesh: &RadialMesh,
    frozen: &GridFunction,
    spec: &ProblemSpec,
    level: f64,
    rhs: &Datum,
) -> Result<TridiagonalSystem> {
    if !frozen.mesh().same_as(mesh) {
        return Err(Error::MeshMismatch);
    }
    if !(level > 0.0) {
        return Err(Error::InvalidParameter {
            name: "M",
            constraint: "M > 0",
        });
    }
    let disc = Discretization::new(mesh, spec, rhs)?;
    Ok(disc.assemble(frozen.values(), level))
}

/// Max-norm residual of the discrete weak form of `spec` at `u`, tested
/// against the hat functions of every node except `r = 1`.
pub fn residual(u: &GridFunction, spec: &ProblemSpec, mesh: &RadialMesh) -> Result<f64> {
    if !u.mesh().same_as(mesh) {
        return Err(Error::MeshMismatch);
    }
    let disc = Discretization::new(mesh, spec, &spec.datum)?;
    Ok(disc.residual(u.values(), f64::INFINITY))
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: GridFunction,
    pub iterations: usize,
    pub residual_trace: Vec<f64>,
    /// `‖u‖∞ - ‖g‖∞`.
    pub max_principle_margin: f64,
    /// `M = ‖g‖∞ + 1`.
    pub truncation_level: f64,
    /// `‖g‖∞` over the load quadrature.
    pub datum_sup: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_trace.last().copied().unwrap_or(0.0)
    }
}

/// Solves the problem for a bounded datum from the zero initial state.
pub fn solve_bounded(spec: &ProblemSpec, mesh: &RadialMesh, config: &SolverConfig) -> Result<SolveReport> {
    solve_bounded_from(spec, mesh, config, &GridFunction::zeros(mesh))
}

/// Damped fixed point for the problem truncated at `M = ‖g‖∞ + 1`, started
/// from `initial`.
pub fn solve_bounded_from(
    spec: &ProblemSpec,
    mesh: &RadialMesh,
    config: &SolverConfig,
    initial: &GridFunction,
) -> Result<SolveReport> {
    config.validate()?;
    if !initial.mesh().same_as(mesh) {
        return Err(Error::MeshMismatch);
    }
    let disc = Discretization::new(mesh, spec, &spec.datum)?;
    if !disc.datum_sup.is_finite() {
        return Err(Error::UnboundedDatum);
    }
    let level = disc.datum_sup + 1.0;
    let n = mesh.num_nodes();

    let mut u = initial.values().to_vec();
    u[n - 1] = 0.0;
    let mut res = disc.residual(&u, level);
    let mut trace = Vec::new();
    let mut lambda = config.damping;
    let mut converged = false;
    for _ in 0..config.max_iterations {
        let step = match config.iteration {
            Iteration::FrozenCoefficient => Step::Target(disc.assemble(&u, level).solve()?),
            Iteration::Kirchhoff => {
                // Backtracking restarts from the configured damping each step.
                lambda = config.damping;
                disc.kirchhoff_step(&u, level)?
            }
        };
        let (cand, r) = loop {
            let (cand, r) = step
                .candidates(&u, lambda, spec.gamma, level)
                .into_iter()
                .map(|c| {
                    let r = disc.residual(&c, level);
                    (c, r)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one candidate");
            if r <= res || lambda <= DAMPING_FLOOR {
                break (cand, r);
            }
            lambda = (0.5 * lambda).max(DAMPING_FLOOR);
        };
        u = cand;
        res = r;
        trace.push(r);
        if r <= config.picard_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: trace.len(),
            residual: res,
        });
    }
    let solution = GridFunction::new(mesh, u, true)?;
    let margin = solution.max_abs() - disc.datum_sup;
    if margin > MAX_PRINCIPLE_TOL {
        return Err(Error::MaxPrincipleViolation { margin });
    }
    Ok(SolveReport {
        solution,
        iterations: trace.len(),
        residual_trace: trace,
        max_principle_margin: margin,
        truncation_level: level,
        datum_sup: disc.datum_sup,
    })
}

/// How the bounded data `f_n` approximate `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Approximation {
    /// `f_n = T_n(f)`.
    Truncation,
    /// `f_n = (1 - 1/(2n)) T_n(f)`.
    ScaledTruncation,
}

impl Approximation {
    pub fn datum(&self, f: &Datum, n: u64) -> Datum {
        let t = truncate_datum(f, n);
        match self {
            Approximation::Truncation => t,
            Approximation::ScaledTruncation => t.scaled(1.0 - 0.5 / n as f64),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SequenceRecord {
    pub n: u64,
    pub datum: Datum,
    pub solve: SolveReport,
    /// `‖u_n‖` in `L^((γ+2)/2)`.
    pub norm: f64,
    /// `∫ |∇u_n|`.
    pub w11: f64,
    /// `‖u_n - u_{n_prev}‖` in `L^((γ+2)/2)`; `None` for the first entry.
    pub diff_norm: Option<f64>,
    pub diff_w11: Option<f64>,
}

impl SequenceRecord {
    pub fn solution(&self) -> &GridFunction {
        &self.solve.solution
    }
}

#[derive(Clone, Debug)]
pub struct SequenceReport {
    pub gamma: f64,
    pub records: Vec<SequenceRecord>,
    /// Last iterate.
    pub limit: GridFunction,
    /// Last consecutive differences below 1% of the last norms.
    pub cauchy_certified: bool,
}

/// Relative size of the last consecutive difference that declares the
/// discrete limit reached.
pub const CAUCHY_FRACTION: f64 = 0.01;

/// Solves the problems with data `f_n = T_n(f)` for every `n` in `n_list`.
pub fn approximate_sequence(
    spec: &ProblemSpec,
    mesh: &RadialMesh,
    n_list: &[u64],
    config: &SolverConfig,
) -> Result<SequenceReport> {
    approximate_sequence_with(spec, mesh, n_list, config, Approximation::Truncation)
}

pub fn approximate_sequence_with(
    spec: &ProblemSpec,
    mesh: &RadialMesh,
    n_list: &[u64],
    config: &SolverConfig,
    approximation: Approximation,
) -> Result<SequenceReport> {
    check_n_list(n_list)?;
    if !spec.datum.admits_existence(spec.gamma) {
        return Err(Error::InvalidParameter {
            name: "datum",
            constraint: "datum must lie in L^((gamma+2)/2)",
        });
    }
    let p = spec.energy_exponent();
    let mut records: Vec<SequenceRecord> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let datum = approximation.datum(&spec.datum, n);
        let solve = solve_bounded(&spec.with_datum(datum.clone()), mesh, config)?;
        let u = &solve.solution;
        let (diff_norm, diff_w11) = match records.last() {
            Some(prev) => {
                let d = u.sub(prev.solution())?;
                (Some(lp_norm(&d, p)), Some(w11_seminorm(&d)))
            }
            None => (None, None),
        };
        records.push(SequenceRecord {
            n,
            datum,
            norm: lp_norm(u, p),
            w11: w11_seminorm(u),
            diff_norm,
            diff_w11,
            solve,
        });
    }
    let last = records.last().expect("n_list is non-empty");
    let cauchy_certified = match (last.diff_norm, last.diff_w11) {
        (Some(dn), Some(dw)) => dn <= CAUCHY_FRACTION * last.norm && dw <= CAUCHY_FRACTION * last.w11,
        _ => false,
    };
    Ok(SequenceReport {
        gamma: spec.gamma,
        limit: last.solution().clone(),
        records,
        cauchy_certified,
    })
}

pub(crate) fn check_n_list(n_list: &[u64]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::EmptyNList);
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::UnorderedNList);
    }
    Ok(())
}
