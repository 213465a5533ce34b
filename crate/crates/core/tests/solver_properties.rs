use degenelab_core::certificates::{check_comparison, check_l1_contraction};
use degenelab_core::linalg::solve_tridiagonal;
use degenelab_core::mesh::{GridFunction, RadialMesh};
use degenelab_core::problem::{CoefficientField, Datum, Domain, ProblemSpec};
use degenelab_core::solver::{
    approximate_sequence, assemble_system, solve_bounded, solve_bounded_from, Iteration, SolverConfig,
};
use proptest::prelude::*;

const KNOTS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

fn pl(values: Vec<f64>) -> Datum {
    Datum::piecewise_linear(KNOTS.to_vec(), values).unwrap()
}

fn spec(gamma: f64, coefficient: CoefficientField, datum: Datum) -> ProblemSpec {
    ProblemSpec::new(gamma, 3, Domain::RadialBall, coefficient, datum).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, KNOTS.len())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn frozen_solves_are_monotone_in_the_load(
        frozen in prop::collection::vec(-10.0..10.0f64, 17),
        b1 in prop::collection::vec(-3.0..3.0f64, 17),
        bump in prop::collection::vec(0.0..3.0f64, 17),
        gamma in 0.2..3.0f64,
    ) {
        let mesh = RadialMesh::ball(3, 16, 0.85).unwrap();
        let mut fv = frozen;
        fv[16] = 0.0;
        let frozen = GridFunction::new(&mesh, fv, true).unwrap();
        let sp = spec(gamma, CoefficientField::identity(), Datum::zero());
        let sys = assemble_system(&mesh, &frozen, &sp, 11.0, &Datum::zero()).unwrap();
        prop_assert!(sys.is_m_matrix());
        let b2: Vec<f64> = b1.iter().zip(&bump).map(|(a, d)| a + d).collect();
        let u1 = solve_tridiagonal(&sys.lower, &sys.diag, &sys.upper, &b1).unwrap();
        let u2 = solve_tridiagonal(&sys.lower, &sys.diag, &sys.upper, &b2).unwrap();
        for (a, b) in u1.iter().zip(&u2) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn max_principle_and_sign(v in values(), gamma in 0.3..3.0f64, demo in any::<bool>()) {
        let mesh = RadialMesh::ball(3, 48, 0.9).unwrap();
        let coef = if demo { CoefficientField::nonlinear_demo() } else { CoefficientField::identity() };
        let g = pl(v.clone());
        let rep = solve_bounded(&spec(gamma, coef.clone(), g), &mesh, &SolverConfig::default()).unwrap();
        let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(rep.solution.max_abs() <= sup + 1e-10);
        prop_assert!(rep.final_residual() <= 1e-10);
        let pos = pl(v.iter().map(|x| x.abs()).collect());
        let rep = solve_bounded(&spec(gamma, coef, pos), &mesh, &SolverConfig::default()).unwrap();
        prop_assert!(rep.solution.values().iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn restart_from_solution_is_immediate(v in values(), gamma in 0.3..3.0f64) {
        let mesh = RadialMesh::ball(3, 48, 0.9).unwrap();
        let sp = spec(gamma, CoefficientField::identity(), pl(v));
        let cfg = SolverConfig::default();
        let first = solve_bounded(&sp, &mesh, &cfg).unwrap();
        let again = solve_bounded_from(&sp, &mesh, &cfg, &first.solution).unwrap();
        prop_assert!(again.iterations <= 2);
    }

    #[test]
    fn comparison_and_contraction(v in values(), bump in prop::collection::vec(0.0..2.0f64, KNOTS.len())) {
        let mesh = RadialMesh::ball(3, 64, 0.9).unwrap();
        let cfg = SolverConfig::default();
        let f = pl(v.clone());
        let g = pl(v.iter().zip(&bump).map(|(a, b)| a + b).collect());
        let u = solve_bounded(&spec(2.0, CoefficientField::identity(), f.clone()), &mesh, &cfg).unwrap().solution;
        let z = solve_bounded(&spec(2.0, CoefficientField::identity(), g.clone()), &mesh, &cfg).unwrap().solution;
        let c = check_comparison(&u, &z, &f, &g).unwrap();
        prop_assert!(c.lhs <= 1e-6 * (1.0 + z.max_abs()), "{:?}", c);
        let l = check_l1_contraction(&u, &z, &f, &g).unwrap();
        prop_assert!(l.passed, "{:?}", l);
        prop_assert!(l.lhs <= l.rhs * (1.0 + 1e-12));
    }
}

#[test]
fn both_iterations_reach_the_same_fixed_point() {
    let mesh = RadialMesh::ball(4, 64, 0.9).unwrap();
    let d = pl(vec![3.0, 2.0, -1.0, 0.5, 1.0, 0.0]);
    for coef in [CoefficientField::identity(), CoefficientField::nonlinear_demo()] {
        let sp = ProblemSpec::new(1.5, 4, Domain::RadialBall, coef, d.clone()).unwrap();
        let a = solve_bounded(&sp, &mesh, &SolverConfig::default()).unwrap();
        let cfg = SolverConfig {
            iteration: Iteration::FrozenCoefficient,
            ..SolverConfig::default()
        };
        let b = solve_bounded(&sp, &mesh, &cfg).unwrap();
        for (x, y) in a.solution.values().iter().zip(b.solution.values()) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }
}

#[test]
fn comparison_is_transitive() {
    let mesh = RadialMesh::ball(3, 64, 0.9).unwrap();
    let cfg = SolverConfig::default();
    let data = [
        pl(vec![-1.0, 0.0, -1.0, -0.5, -2.0, 0.0]),
        pl(vec![0.0; 6]),
        pl(vec![1.0, 1.0, 2.0, 0.5, 0.0, 0.0]),
    ];
    let sols: Vec<GridFunction> = data
        .iter()
        .map(|f| {
            solve_bounded(&spec(2.0, CoefficientField::identity(), f.clone()), &mesh, &cfg)
                .unwrap()
                .solution
        })
        .collect();
    assert!(check_comparison(&sols[0], &sols[1], &data[0], &data[1]).unwrap().passed);
    assert!(check_comparison(&sols[1], &sols[2], &data[1], &data[2]).unwrap().passed);
    assert!(check_comparison(&sols[0], &sols[2], &data[0], &data[2]).unwrap().passed);
}

#[test]
fn zero_below_constant() {
    let mesh = RadialMesh::ball(3, 32, 0.9).unwrap();
    let cfg = SolverConfig::default();
    let (f, g) = (Datum::zero(), Datum::constant(1.0));
    let u = solve_bounded(&spec(2.0, CoefficientField::identity(), f.clone()), &mesh, &cfg)
        .unwrap()
        .solution;
    let z = solve_bounded(&spec(2.0, CoefficientField::identity(), g.clone()), &mesh, &cfg)
        .unwrap()
        .solution;
    assert!(u.values().iter().all(|&v| v == 0.0));
    assert!(check_comparison(&u, &z, &f, &g).unwrap().passed);
}

#[test]
fn bounded_datum_sequence_is_constant() {
    let mesh = RadialMesh::ball(3, 32, 0.9).unwrap();
    let sp = spec(
        2.0,
        CoefficientField::identity(),
        pl(vec![2.0, 1.0, 0.0, -1.0, 0.5, 0.0]),
    );
    let rep = approximate_sequence(&sp, &mesh, &[3, 6, 12], &SolverConfig::default()).unwrap();
    for r in &rep.records[1..] {
        assert_eq!(r.diff_norm, Some(0.0));
        assert_eq!(r.diff_w11, Some(0.0));
    }
    assert!(rep.cauchy_certified);
}

#[test]
fn interval_problems_solve() {
    let mesh = RadialMesh::interval(64, 1.0).unwrap();
    let sp = ProblemSpec::new(
        2.0,
        1,
        Domain::Interval,
        CoefficientField::identity(),
        Datum::constant(5.0),
    )
    .unwrap();
    let rep = solve_bounded(&sp, &mesh, &SolverConfig::default()).unwrap();
    let v = rep.solution.values();
    assert!(v.windows(2).all(|w| w[1] <= w[0]));
    assert!(v[0] > 0.0 && v[0] < 5.0);
}
