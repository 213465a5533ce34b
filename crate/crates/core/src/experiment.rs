//! Concentrated data for `γ > 1`: solutions of problems whose data converge
//! to a unit point mass at the origin collapse to zero away from it, while
//! the zero-order term carries the mass.

use alloc::vec::Vec;

use crate::certificates::CertificateReport;
use crate::error::{Error, Result};
use crate::math::powi;
use crate::mesh::{sphere_area, weighted_gradient_energy, GridFunction, RadialMesh};
use crate::problem::{mean_degeneracy_weight, CoefficientField, Datum, Domain, ProblemSpec};
use crate::solver::{check_n_list, solve_bounded, SolverConfig};

/// Number of elements the Dirac meshes place inside `[0, 1/max n]`.
pub const INNER_ELEMENTS: usize = 8;

/// Relative final/initial tail size required by the collapse verdict.
pub const TAIL_RATIO: f64 = 0.05;

/// Relative final/initial flux pairing required by [`flux_collapse_check`].
pub const FLUX_RATIO: f64 = 0.1;

/// Unit-mass indicator of `[0, 1/n]`: height `N n^N / |S^(N-1)|`.
pub fn mollified_dirac(n: u64, dimension: usize) -> Datum {
    let height = dimension as f64 * powi(n as f64, dimension as i32) / sphere_area(dimension);
    Datum::indicator(1.0 / n as f64, height)
}

/// Probe `(1 - r²)^j`.
pub fn probe(j: u32, r: f64) -> f64 {
    powi(1.0 - r * r, j as i32)
}

/// Radial derivative of [`probe`].
pub fn probe_derivative(j: u32, r: f64) -> f64 {
    -2.0 * j as f64 * r * powi(1.0 - r * r, j as i32 - 1)
}

/// Exponents of the two probes.
pub const PROBES: [u32; 2] = [1, 2];

/// Ball mesh resolving `[0, 1/max_n]` with [`INNER_ELEMENTS`] elements.
pub fn dirac_mesh(dimension: usize, elements: usize, max_n: u64) -> Result<RadialMesh> {
    RadialMesh::resolving(dimension, elements, 1.0 / max_n as f64, INNER_ELEMENTS)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiracRecord {
    pub n: u64,
    /// `∫ f_n`.
    pub mass: f64,
    /// `sup u_n` over `[r_cut, 1]`.
    pub sup_tail: f64,
    /// `∫ u_n φ_j`.
    pub pairings: [f64; 2],
    /// `∫ |∇u_n|² / (1+|u_n|)^(2γ)`.
    pub energy: f64,
    /// `∫ |a(x,∇u_n)|² / (1+|u_n|)^(2γ)`.
    pub flux_norm: f64,
    /// `∫ a(x,∇u_n)·∇φ_j / (1+|u_n|)^γ`.
    pub flux_pairings: [f64; 2],
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct DiracExperimentReport {
    pub gamma: f64,
    pub dimension: usize,
    pub alpha: f64,
    pub r_cut: f64,
    pub records: Vec<DiracRecord>,
    /// Tail sup eventually decreasing and final below 5% of initial.
    pub tail_collapses: bool,
    /// `|∫ u_n φ_j - φ_j(0)|` eventually decreasing, per probe.
    pub pairing_converges: [bool; 2],
    /// `α(γ-1) energy <= ∫ f_n` (5% slack) for every `n`.
    pub energy_bounded: bool,
}

impl DiracExperimentReport {
    pub fn energy_lhs(&self, r: &DiracRecord) -> f64 {
        self.alpha * (self.gamma - 1.0) * r.energy
    }
}

/// Last three entries strictly decreasing (all entries if fewer).
pub fn eventually_decreasing(xs: &[f64]) -> bool {
    let tail = &xs[xs.len().saturating_sub(3)..];
    tail.windows(2).all(|w| w[1] < w[0])
}

/// Solves with `f_n = mollified_dirac(n)` for every `n` and records the
/// collapse diagnostics.
pub fn run_dirac_experiment(
    gamma: f64,
    dimension: usize,
    n_list: &[u64],
    mesh: &RadialMesh,
    config: &SolverConfig,
    r_cut: f64,
) -> Result<DiracExperimentReport> {
    run_with_data(gamma, dimension, n_list, mesh, config, r_cut, |n| {
        mollified_dirac(n, dimension)
    })
}

/// [`run_dirac_experiment`] with an arbitrary family of data.
pub fn run_with_data<F: Fn(u64) -> Datum>(
    gamma: f64,
    dimension: usize,
    n_list: &[u64],
    mesh: &RadialMesh,
    config: &SolverConfig,
    r_cut: f64,
    data: F,
) -> Result<DiracExperimentReport> {
    if !(gamma > 1.0) {
        return Err(Error::GammaNotSupercritical(gamma));
    }
    collect(gamma, dimension, n_list, mesh, config, r_cut, data)
}

/// The Dirac family for any `γ > 0`. For `γ <= 1` nothing is claimed about
/// the outcome; the run serves as a contrast to the supercritical case.
pub fn contrast_run(
    gamma: f64,
    dimension: usize,
    n_list: &[u64],
    mesh: &RadialMesh,
    config: &SolverConfig,
    r_cut: f64,
) -> Result<DiracExperimentReport> {
    collect(gamma, dimension, n_list, mesh, config, r_cut, |n| {
        mollified_dirac(n, dimension)
    })
}

fn collect<F: Fn(u64) -> Datum>(
    gamma: f64,
    dimension: usize,
    n_list: &[u64],
    mesh: &RadialMesh,
    config: &SolverConfig,
    r_cut: f64,
    data: F,
) -> Result<DiracExperimentReport> {
    if !(r_cut > 0.0 && r_cut < 1.0) {
        return Err(Error::InvalidParameter {
            name: "r_cut",
            constraint: "0 < r_cut < 1",
        });
    }
    check_n_list(n_list)?;
    let base = ProblemSpec::new(
        gamma,
        dimension,
        Domain::RadialBall,
        CoefficientField::identity(),
        Datum::zero(),
    )?;
    let alpha = base.coefficient.alpha;
    let mut records = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let f = data(n);
        let mass = mesh.integrate(&f.breakpoints(), |q| f.value(q.r));
        let spec = base.with_datum(f);
        let rep = solve_bounded(&spec, mesh, config)?;
        records.push(measure(&spec, &rep.solution, n, mass, r_cut, rep.iterations));
    }
    let tails: Vec<f64> = records.iter().map(|r| r.sup_tail).collect();
    let tail_collapses = eventually_decreasing(&tails) && tails[tails.len() - 1] < TAIL_RATIO * tails[0];
    let pairing_converges = [0, 1].map(|j| {
        let gaps: Vec<f64> = records
            .iter()
            .map(|r| (r.pairings[j] - probe(PROBES[j], 0.0)).abs())
            .collect();
        eventually_decreasing(&gaps)
    });
    let energy_bounded = records
        .iter()
        .all(|r| alpha * (gamma - 1.0) * r.energy <= r.mass * 1.05 + 1e-8);
    Ok(DiracExperimentReport {
        gamma,
        dimension,
        alpha,
        r_cut,
        records,
        tail_collapses,
        pairing_converges,
        energy_bounded,
    })
}

fn measure(spec: &ProblemSpec, u: &GridFunction, n: u64, mass: f64, r_cut: f64, iterations: usize) -> DiracRecord {
    let mesh = u.mesh();
    let nodes = mesh.nodes();
    let sup_tail = nodes
        .iter()
        .zip(u.values())
        .filter(|(r, _)| **r >= r_cut)
        .map(|(_, v)| *v)
        .fold(u.eval(r_cut), f64::max);
    let mut pairings = [0.0; 2];
    let mut flux_pairings = [0.0; 2];
    let mut flux_norm = 0.0;
    for q in mesh.quad_points() {
        let uq = u.at(q);
        let e = q.elem;
        let slope = u.slope(e);
        let w = mean_degeneracy_weight(u.values()[e], u.values()[e + 1], spec.gamma, f64::INFINITY);
        let flux = spec.coefficient.secant_factor(q.r, slope.abs()) * w * slope;
        flux_norm += q.weight * flux * flux;
        for (j, &p) in PROBES.iter().enumerate() {
            pairings[j] += q.weight * uq * probe(p, q.r);
            flux_pairings[j] += q.weight * flux * probe_derivative(p, q.r);
        }
    }
    DiracRecord {
        n,
        mass,
        sup_tail,
        pairings,
        energy: weighted_gradient_energy(u, 2.0 * spec.gamma),
        flux_norm,
        flux_pairings,
        iterations,
    }
}

/// The flux pairings `∫ a(x,∇u_n)·∇φ / (1+|u_n|)^γ` vanish: per probe the
/// sequence is eventually decreasing in magnitude and its final value is
/// below 10% of the initial one. `lhs` is the worst final/initial ratio.
pub fn flux_collapse_check(report: &DiracExperimentReport) -> CertificateReport {
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for j in 0..PROBES.len() {
        let mags: Vec<f64> = report.records.iter().map(|r| r.flux_pairings[j].abs()).collect();
        let (first, last) = (mags[0], mags[mags.len() - 1]);
        let ratio = if first == 0.0 && last == 0.0 { 0.0 } else { last / first };
        worst = worst.max(ratio);
        if last != 0.0 && !eventually_decreasing(&mags) {
            monotone = false;
        }
    }
    if monotone {
        CertificateReport::new("flux_collapse", 0.0, worst, FLUX_RATIO, 0.0)
    } else {
        CertificateReport::new("flux_collapse", 0.0, worst.max(1.0), FLUX_RATIO, 0.0)
            .with_note("flux pairing not eventually decreasing")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::lp_norm;

    #[test]
    fn mollifier_height_and_mass() {
        let f = mollified_dirac(2, 3);
        assert!((f.value(0.1) - 6.0 / core::f64::consts::PI).abs() < 1e-14);
        assert_eq!(f.value(0.6), 0.0);
        let mesh = dirac_mesh(3, 64, 16).unwrap();
        for n in [1, 2, 4, 8, 16] {
            let f = mollified_dirac(n, 3);
            let g = GridFunction::from_fn(&mesh, |_| 0.0, true);
            let mass = mesh.integrate(&f.breakpoints(), |q| f.value(q.r));
            assert!((mass - 1.0).abs() < 1e-10, "n={n}: {mass}");
            assert_eq!(lp_norm(&g, 1.0), 0.0);
        }
    }

    #[test]
    fn probes() {
        assert_eq!(probe(2, 0.0), 1.0);
        assert_eq!(probe(1, 1.0), 0.0);
        let h = 1e-6;
        let fd = (probe(2, 0.3 + h) - probe(2, 0.3 - h)) / (2.0 * h);
        assert!((fd - probe_derivative(2, 0.3)).abs() < 1e-8);
    }

    #[test]
    fn control_run_is_zero() {
        let mesh = dirac_mesh(3, 32, 8).unwrap();
        let rep = run_with_data(2.0, 3, &[2, 4, 8], &mesh, &SolverConfig::default(), 0.2, |_| {
            Datum::zero()
        })
        .unwrap();
        for r in &rep.records {
            assert_eq!(r.sup_tail, 0.0);
            assert_eq!(r.pairings, [0.0; 2]);
            assert_eq!(r.flux_pairings, [0.0; 2]);
            assert_eq!(r.energy, 0.0);
        }
        let c = flux_collapse_check(&rep);
        assert!(c.passed);
        assert_eq!(c.lhs, 0.0);
    }

    #[test]
    fn subcritical_gamma_is_rejected() {
        let mesh = dirac_mesh(3, 32, 8).unwrap();
        assert!(matches!(
            run_dirac_experiment(0.5, 3, &[2], &mesh, &SolverConfig::default(), 0.2),
            Err(Error::GammaNotSupercritical(_))
        ));
    }

    #[test]
    fn eventually_decreasing_uses_last_three() {
        assert!(eventually_decreasing(&[1.0, 5.0, 4.0, 3.0]));
        assert!(!eventually_decreasing(&[5.0, 4.0, 4.0]));
        assert!(eventually_decreasing(&[2.0]));
    }
}
