//! Seeded randomized certificate suites and the manufactured-solution study.

use degenelab_core::certificates::{check_comparison, check_interpolation, check_l1_contraction, CertificateReport};
use degenelab_core::mesh::{lp_error, w11_error};
use degenelab_core::problem::truncate_datum;
use degenelab_core::solver::{solve_bounded, SolverConfig};
use degenelab_core::{Datum, GridFunction, ManufacturedSolution, ProblemSpec, RadialMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::{Cell, Table};

pub const KNOTS: usize = 11;
pub const DATUM_RANGE: f64 = 5.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Piecewise-linear datum on 11 equispaced knots with values in `[-5, 5]`.
pub fn random_datum(rng: &mut ChaCha8Rng) -> Datum {
    let knots: Vec<f64> = (0..KNOTS).map(|i| i as f64 / (KNOTS - 1) as f64).collect();
    let values = (0..KNOTS)
        .map(|_| rng.random_range(-DATUM_RANGE..=DATUM_RANGE))
        .collect();
    Datum::piecewise_linear(knots, values).expect("valid knots")
}

fn knot_values(d: &Datum) -> Vec<f64> {
    (0..KNOTS).map(|i| d.value(i as f64 / (KNOTS - 1) as f64)).collect()
}

fn solve(
    base: &ProblemSpec,
    mesh: &RadialMesh,
    config: &SolverConfig,
    f: &Datum,
) -> degenelab_core::Result<GridFunction> {
    Ok(solve_bounded(&base.with_datum(f.clone()), mesh, config)?.solution)
}

/// `∫|u - z| <= ∫|f - g|` for `pairs` random pairs.
pub fn contraction_suite(
    base: &ProblemSpec,
    mesh: &RadialMesh,
    config: &SolverConfig,
    seed: u64,
    pairs: usize,
) -> degenelab_core::Result<Vec<CertificateReport>> {
    let mut rng = rng(seed);
    (0..pairs)
        .map(|i| {
            let f = random_datum(&mut rng);
            let g = random_datum(&mut rng);
            let u = solve(base, mesh, config, &f)?;
            let z = solve(base, mesh, config, &g)?;
            let mut r = check_l1_contraction(&u, &z, &f, &g)?;
            r.name = format!("l1_contraction_{i:02}");
            Ok(r)
        })
        .collect()
}

/// `g = f + |p|` with `f`, `p` random; the solutions must satisfy
/// `max(u - z) <= 1e-6 (1 + ‖z‖∞)`.
pub fn comparison_suite(
    base: &ProblemSpec,
    mesh: &RadialMesh,
    config: &SolverConfig,
    seed: u64,
    pairs: usize,
) -> degenelab_core::Result<Vec<CertificateReport>> {
    let mut rng = rng(seed);
    (0..pairs)
        .map(|i| {
            let f = random_datum(&mut rng);
            let p = random_datum(&mut rng);
            let knots: Vec<f64> = (0..KNOTS).map(|j| j as f64 / (KNOTS - 1) as f64).collect();
            let gv = knot_values(&f)
                .iter()
                .zip(knot_values(&p))
                .map(|(a, b)| a + b.abs())
                .collect();
            let g = Datum::piecewise_linear(knots, gv)?;
            let u = solve(base, mesh, config, &f)?;
            let z = solve(base, mesh, config, &g)?;
            let strict = check_comparison(&u, &z, &f, &g)?;
            let rhs = 1e-6 * (1.0 + z.max_abs());
            Ok(CertificateReport::new(
                format!("comparison_{i:02}"),
                0.0,
                strict.lhs,
                rhs,
                0.0,
            ))
        })
        .collect()
}

/// 50 (or `count`) random pinned nodal functions with `A = 1`, then the
/// closed-form case `v = 1 - r` on the unit interval.
pub fn interpolation_suite(
    mesh: &RadialMesh,
    interval: &RadialMesh,
    seed: u64,
    count: usize,
) -> degenelab_core::Result<Vec<CertificateReport>> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count + 1);
    for i in 0..count {
        let n = mesh.num_nodes();
        let mut values: Vec<f64> = (0..n).map(|_| rng.random_range(-DATUM_RANGE..=DATUM_RANGE)).collect();
        values[n - 1] = 0.0;
        let v = GridFunction::new(mesh, values, true)?;
        let mut r = check_interpolation(&v, 1.0)?;
        r.name = format!("interpolation_{i:02}");
        out.push(r);
    }
    let v = GridFunction::from_fn(interval, |r| 1.0 - r, true);
    let mut r = check_interpolation(&v, 1.0)?;
    r.name = "interpolation_analytic".into();
    out.push(r);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MmsLevel {
    pub elements: usize,
    pub h_max: f64,
    pub iterations: usize,
    pub residual: f64,
    pub l2_error: f64,
    pub w11_error: f64,
}

#[derive(Debug, Clone)]
pub struct MmsStudy {
    pub levels: Vec<MmsLevel>,
}

fn order(a: f64, b: f64, ha: f64, hb: f64) -> f64 {
    (a / b).ln() / (ha / hb).ln()
}

impl MmsStudy {
    /// Empirical orders between successive levels, measured against the
    /// largest element length.
    pub fn l2_orders(&self) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|w| order(w[0].l2_error, w[1].l2_error, w[0].h_max, w[1].h_max))
            .collect()
    }

    pub fn w11_orders(&self) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|w| order(w[0].w11_error, w[1].w11_error, w[0].h_max, w[1].h_max))
            .collect()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(
            "mms_convergence",
            &[
                "elements",
                "h_max",
                "iters",
                "residual",
                "l2_error",
                "w11_error",
                "l2_order",
                "w11_order",
            ],
        );
        let (lo, wo) = (self.l2_orders(), self.w11_orders());
        for (i, l) in self.levels.iter().enumerate() {
            let pick = |o: &[f64]| if i == 0 { f64::NAN } else { o[i - 1] };
            t.push(vec![
                Cell::Int(l.elements as u64),
                Cell::Num(l.h_max),
                Cell::Int(l.iterations as u64),
                Cell::Num(l.residual),
                Cell::Num(l.l2_error),
                Cell::Num(l.w11_error),
                Cell::Num(pick(&lo)),
                Cell::Num(pick(&wo)),
            ]);
        }
        t
    }

    /// Minimal L² order at least 0.8, and both error sequences decreasing.
    pub fn certificates(&self) -> Vec<CertificateReport> {
        let worst_ratio =
            |f: fn(&MmsLevel) -> f64| self.levels.windows(2).map(|w| f(&w[1]) / f(&w[0])).fold(0.0, f64::max);
        let min_order = self.l2_orders().into_iter().fold(f64::INFINITY, f64::min);
        let mut l2_dec = CertificateReport::new("mms_l2_decreasing", 0.0, worst_ratio(|l| l.l2_error), 1.0, 0.0);
        let mut w11_dec = CertificateReport::new("mms_w11_decreasing", 0.0, worst_ratio(|l| l.w11_error), 1.0, 0.0);
        // Strict decrease; the absolute tolerance of the report would admit ties.
        l2_dec.passed = l2_dec.lhs < 1.0;
        w11_dec.passed = w11_dec.lhs < 1.0;
        vec![
            CertificateReport::new("mms_l2_order", 0.0, 0.8, min_order, 0.0),
            l2_dec,
            w11_dec,
        ]
    }
}

/// Solves `T_n(f)` for the manufactured datum on every mesh and measures the
/// errors against the closed-form solution.
pub fn mms_study(
    m: &ManufacturedSolution,
    meshes: &[RadialMesh],
    n: u64,
    config: &SolverConfig,
) -> degenelab_core::Result<MmsStudy> {
    let spec = m.problem();
    let datum = truncate_datum(&spec.datum, n);
    let spec = spec.with_datum(datum);
    let levels = meshes
        .iter()
        .map(|mesh| {
            let rep = solve_bounded(&spec, mesh, config)?;
            let u = &rep.solution;
            Ok(MmsLevel {
                elements: mesh.num_elements(),
                h_max: mesh.max_element_length(),
                iterations: rep.iterations,
                residual: rep.final_residual(),
                l2_error: lp_error(u, |r| m.u_exact(r), 2.0),
                w11_error: w11_error(u, |r| m.du_exact(r)),
            })
        })
        .collect::<degenelab_core::Result<Vec<_>>>()?;
    Ok(MmsStudy { levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_data_are_seeded_and_bounded() {
        let a = knot_values(&random_datum(&mut rng(42)));
        let b = knot_values(&random_datum(&mut rng(42)));
        let c = knot_values(&random_datum(&mut rng(43)));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|v| v.abs() <= DATUM_RANGE));
    }

    #[test]
    fn analytic_interpolation_case() {
        let ball = RadialMesh::ball(3, 16, 1.0).unwrap();
        let interval = RadialMesh::interval(400, 1.0).unwrap();
        let reps = interpolation_suite(&ball, &interval, 1, 3).unwrap();
        assert_eq!(reps.len(), 4);
        let last = reps.last().unwrap();
        assert!((last.lhs - 1.0).abs() < 1e-12);
        // ∫(2-r)^-2 = 1/2 and ∫(2-r)^2 = 7/3 on [0, 1].
        let exact = (0.5f64 * 7.0 / 3.0).sqrt();
        assert!((last.rhs - exact).abs() < 1e-4, "{}", last.rhs);
        assert!(reps.iter().all(|r| r.passed));
    }

    #[test]
    fn orders_of_halving_errors() {
        let lvl = |h: f64, e: f64| MmsLevel {
            elements: 0,
            h_max: h,
            iterations: 1,
            residual: 0.0,
            l2_error: e,
            w11_error: e * e,
        };
        let s = MmsStudy {
            levels: vec![lvl(0.4, 1.0), lvl(0.2, 0.5), lvl(0.1, 0.25)],
        };
        assert!(s.l2_orders().iter().all(|o| (o - 1.0).abs() < 1e-12));
        assert!(s.w11_orders().iter().all(|o| (o - 2.0).abs() < 1e-12));
        assert!(s.certificates().iter().all(|c| c.passed));
        let flat = MmsStudy {
            levels: vec![lvl(0.4, 1.0), lvl(0.2, 1.0)],
        };
        assert!(flat.certificates().iter().all(|c| !c.passed));
    }
}
