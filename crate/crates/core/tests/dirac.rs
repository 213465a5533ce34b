use degenelab_core::experiment::*;
use degenelab_core::mesh::lp_norm;
use degenelab_core::mesh::GridFunction;
use degenelab_core::problem::Datum;
use degenelab_core::solver::SolverConfig;

#[test]
fn mollifiers_have_unit_mass() {
    let mesh = dirac_mesh(3, 256, 64).unwrap();
    for n in [1, 2, 4, 8, 16, 32, 64] {
        let f = mollified_dirac(n, 3);
        // Nodal interpolation would smear the jump; integrate the datum itself.
        let mass = mesh.integrate(&f.breakpoints(), |q| f.value(q.r).abs());
        assert!((mass - 1.0).abs() < 1e-10, "n={n}: {mass}");
    }
    for dim in [4, 5] {
        let mesh = dirac_mesh(dim, 128, 16).unwrap();
        let f = mollified_dirac(16, dim);
        assert!((mesh.integrate(&f.breakpoints(), |q| f.value(q.r)) - 1.0).abs() < 1e-10);
    }
    let mesh = dirac_mesh(3, 64, 8).unwrap();
    assert_eq!(lp_norm(&GridFunction::zeros(&mesh), 1.0), 0.0);
}

#[test]
fn supercritical_run_bounds_energy_and_absorbs_mass() {
    let mesh = dirac_mesh(3, 256, 64).unwrap();
    let rep = run_dirac_experiment(2.0, 3, &[8, 16, 32, 64], &mesh, &SolverConfig::default(), 0.2).unwrap();
    assert!(rep.energy_bounded);
    for r in &rep.records {
        assert!(rep.energy_lhs(r) <= 1.05);
        assert!((r.mass - 1.0).abs() < 1e-10);
    }
    assert!(rep.pairing_converges[1]);
    let tails: Vec<f64> = rep.records.iter().map(|r| r.sup_tail).collect();
    assert!(eventually_decreasing(&tails));
    let flux: Vec<f64> = rep.records.iter().map(|r| r.flux_pairings[1].abs()).collect();
    assert!(eventually_decreasing(&flux));
}

#[test]
fn contrast_run_is_diagnostic_only() {
    let mesh = dirac_mesh(3, 256, 64).unwrap();
    let cfg = SolverConfig::default();
    let sub = contrast_run(0.5, 3, &[8, 16, 32, 64], &mesh, &cfg, 0.2).unwrap();
    let sup = run_dirac_experiment(2.0, 3, &[8, 16, 32, 64], &mesh, &cfg, 0.2).unwrap();
    let last = |r: &DiracExperimentReport| r.records.last().unwrap().sup_tail;
    // With weaker degeneracy more of the mass diffuses into the tail.
    assert!(last(&sub) > last(&sup));
}

#[test]
fn control_family_stays_zero() {
    let mesh = dirac_mesh(3, 64, 16).unwrap();
    let rep = run_with_data(3.0, 3, &[4, 8, 16], &mesh, &SolverConfig::default(), 0.3, |_| {
        Datum::zero()
    })
    .unwrap();
    assert!(rep.records.iter().all(|r| r.flux_norm == 0.0 && r.mass == 0.0));
    assert!(rep.energy_bounded);
}
