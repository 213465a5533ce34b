//! Command orchestration: runs a pipeline, writes its reports and decides
//! the exit code.

use std::path::PathBuf;

use degenelab_core::certificates::{
    check_approximation_independence, check_estimate_aa, check_estimate_bb, check_estimate_dd, substitution_v,
    substitution_v_inverse, substitution_z_residual, summary_line, CertificateReport, DEFAULT_SLACK,
};
use degenelab_core::experiment::{
    contrast_run, dirac_mesh, eventually_decreasing, flux_collapse_check, probe, run_dirac_experiment,
    DiracExperimentReport, PROBES, TAIL_RATIO,
};
use degenelab_core::mesh::lp_norm;
use degenelab_core::problem::truncate_datum;
use degenelab_core::solver::{approximate_sequence, solve_bounded, MAX_PRINCIPLE_TOL};
use degenelab_core::{GridFunction, RadialMesh};
use log::info;

use crate::config::{Command, RunConfig};
use crate::error::Error;
use crate::io::{certificate_table, dirac_table, solution_table, summary_row, Cell, Table, SUMMARY_HEADER};
use crate::suites;

/// Subcritical exponent of the diagnostic companion run of `dirac`.
pub const CONTRAST_GAMMA: f64 = 0.5;

#[derive(Debug, Default)]
pub struct Outcome {
    pub certificates: Vec<CertificateReport>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn all_passed(&self) -> bool {
        self.certificates.iter().all(|c| c.passed)
    }

    /// 0 when every certificate passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            2
        }
    }
}

/// Runs the configured command, writes every table to the output directory
/// and prints one line per certificate.
pub fn run(config: &RunConfig) -> Result<Outcome, Error> {
    info!("running {} with gamma = {}", config.command.name(), config.gamma);
    let (tables, certificates) = match config.command {
        Command::Solve => solve(config)?,
        Command::Mms => mms(config)?,
        Command::Estimates => estimates(config)?,
        Command::Contraction => contraction(config)?,
        Command::Independence => independence(config)?,
        Command::Dirac => dirac(config)?,
        Command::Sweep => (vec![sweep(config)?], Vec::new()),
    };
    let mut files = Vec::with_capacity(tables.len() + 1);
    for t in &tables {
        files.push(t.write(&config.output_dir, config.format)?);
    }
    if !certificates.is_empty() {
        files.push(certificate_table(&certificates).write(&config.output_dir, config.format)?);
    }
    for c in &certificates {
        println!("{}", summary_line(c));
    }
    Ok(Outcome { certificates, files })
}

type Reports = (Vec<Table>, Vec<CertificateReport>);

fn max_principle(name: String, u: &GridFunction, datum_sup: f64) -> CertificateReport {
    CertificateReport::new(name, 0.0, u.max_abs(), datum_sup + MAX_PRINCIPLE_TOL, 0.0)
}

fn solve(c: &RunConfig) -> Result<Reports, Error> {
    let spec = c.problem(c.gamma)?;
    let mesh = c.mesh()?;
    let mut summary = Table::new("summary", &SUMMARY_HEADER);
    let mut certs = Vec::new();
    let solution = if c.datum.is_bounded() {
        let rep = solve_bounded(&spec, &mesh, &c.solver)?;
        summary.push(summary_row(0, &rep, c.gamma));
        certs.push(max_principle("max_principle".into(), &rep.solution, rep.datum_sup));
        rep.solution
    } else {
        let seq = approximate_sequence(&spec, &mesh, &c.n_list, &c.solver)?;
        for r in &seq.records {
            summary.push(summary_row(r.n, &r.solve, c.gamma));
            certs.push(max_principle(
                format!("max_principle_n{}", r.n),
                r.solution(),
                r.solve.datum_sup,
            ));
        }
        seq.limit
    };
    Ok((vec![solution_table("solution", &solution), summary], certs))
}

fn mms(c: &RunConfig) -> Result<Reports, Error> {
    let m = c.manufactured(c.gamma)?;
    let meshes = c
        .refinement_levels()
        .into_iter()
        .map(|e| c.mesh_with(e))
        .collect::<degenelab_core::Result<Vec<_>>>()?;
    let n = *c.n_list.last().expect("validated");
    let study = suites::mms_study(&m, &meshes, n, &c.solver)?;
    Ok((vec![study.table()], study.certificates()))
}

fn estimates(c: &RunConfig) -> Result<Reports, Error> {
    let m = c.manufactured(c.gamma)?;
    let mesh = c.mesh()?;
    let n = *c.n_list.last().expect("validated");
    let spec = m.problem();
    let f = spec.datum.clone();
    let fn_ = truncate_datum(&f, n);
    let rep = solve_bounded(&spec.with_datum(fn_), &mesh, &c.solver)?;
    let u = &rep.solution;
    let alpha = spec.coefficient.alpha;
    let mut certs = Vec::new();
    for k in [0.0, 1.0, 2.0] {
        certs.push(check_estimate_aa(u, &f, c.gamma, k));
    }
    for k in [0.0, 1.0] {
        certs.push(check_estimate_bb(u, &f, c.gamma, k, alpha));
    }
    for k in [0.5, 1.0, 2.0] {
        certs.push(check_estimate_dd(u, &f, c.gamma, k, alpha)?);
    }
    let p = spec.energy_exponent();
    let f_norm = mesh
        .integrate(&f.breakpoints(), |q| f.value(q.r).abs().powf(p))
        .powf(1.0 / p);
    certs.push(CertificateReport::new(
        "norm_bound",
        0.0,
        lp_norm(u, p),
        f_norm,
        (1.0 + DEFAULT_SLACK).powf(1.0 / p) - 1.0,
    ));
    for g in [0.5, 1.0, 2.0, 3.0] {
        let back = substitution_v_inverse(&substitution_v(u, g), g)?;
        let err = back
            .values()
            .iter()
            .zip(u.values())
            .map(|(b, a)| (b - a).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max);
        certs.push(identity_report(format!("substitution_v_gamma{g}"), err));
    }
    for g in [1.5, 2.0, 3.0] {
        let mg = c.manufactured(g)?;
        let sg = mg.problem();
        let sg = sg.with_datum(truncate_datum(&sg.datum, n));
        let ug = solve_bounded(&sg, &mesh, &c.solver)?.solution;
        let z = substitution_z_residual(&ug, &sg, &mesh)?;
        certs.push(identity_report(format!("substitution_z_gamma{g}"), z.identity_error));
    }
    let interval = RadialMesh::interval(c.elements, 1.0)?;
    certs.extend(suites::interpolation_suite(&mesh, &interval, c.seed, 50)?);
    let mut summary = Table::new("summary", &SUMMARY_HEADER);
    summary.push(summary_row(n, &rep, c.gamma));
    Ok((vec![solution_table("solution", u), summary], certs))
}

/// Identity error in units of `1e-12`, checked against 1.
fn identity_report(name: String, err: f64) -> CertificateReport {
    CertificateReport::new(name, 0.0, err / 1e-12, 1.0, 0.0)
}

fn contraction(c: &RunConfig) -> Result<Reports, Error> {
    let base = c.problem(c.gamma)?;
    let mesh = c.mesh()?;
    Ok((
        Vec::new(),
        suites::contraction_suite(&base, &mesh, &c.solver, c.seed, c.pairs)?,
    ))
}

fn independence(c: &RunConfig) -> Result<Reports, Error> {
    let spec = c.problem(c.gamma)?;
    let mesh = c.mesh()?;
    let rep = check_approximation_independence(&spec, &mesh, &c.n_list, &c.solver)?;
    Ok((Vec::new(), vec![rep]))
}

/// Certificates of the collapse experiment.
pub fn dirac_certificates(r: &DiracExperimentReport) -> Vec<CertificateReport> {
    let tails: Vec<f64> = r.records.iter().map(|x| x.sup_tail).collect();
    let (first, last) = (tails[0], tails[tails.len() - 1]);
    let mut tail = CertificateReport::new("tail_collapse", r.r_cut, last / first, TAIL_RATIO, 0.0);
    if !eventually_decreasing(&tails) {
        tail.passed = false;
        tail = tail.with_note("sup tail not eventually decreasing");
    }
    let mut out = vec![tail];
    for (j, &p) in PROBES.iter().enumerate() {
        let gaps: Vec<f64> = r
            .records
            .iter()
            .map(|x| (x.pairings[j] - probe(p, 0.0)).abs())
            .collect();
        let m = gaps.len();
        let mut rep = CertificateReport::new(
            format!("pairing_phi{}", j + 1),
            0.0,
            gaps[m - 1],
            gaps[m.saturating_sub(3)],
            0.0,
        );
        rep.passed = r.pairing_converges[j];
        out.push(rep);
    }
    for x in &r.records {
        out.push(CertificateReport::new(
            format!("energy_n{}", x.n),
            0.0,
            r.energy_lhs(x),
            x.mass,
            DEFAULT_SLACK,
        ));
    }
    out.push(flux_collapse_check(r));
    out
}

fn dirac(c: &RunConfig) -> Result<Reports, Error> {
    let max_n = *c.n_list.last().expect("validated");
    let mesh = dirac_mesh(c.dimension, c.elements, max_n)?;
    let report = run_dirac_experiment(c.gamma, c.dimension, &c.n_list, &mesh, &c.solver, c.r_cut)?;
    let contrast = contrast_run(CONTRAST_GAMMA, c.dimension, &c.n_list, &mesh, &c.solver, c.r_cut)?;
    let certs = dirac_certificates(&report);
    Ok((
        vec![dirac_table("dirac", &report), dirac_table("dirac_contrast", &contrast)],
        certs,
    ))
}

fn sweep(c: &RunConfig) -> Result<Table, Error> {
    let mut gammas = c.gammas.clone();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    let mut elements = c.elements_list.clone();
    elements.sort_unstable();
    elements.dedup();
    let mut t = Table::new(
        "sweep",
        &["gamma", "n", "elements", "iters", "residual", "linf", "l_gamma2", "w11"],
    );
    for &g in &gammas {
        let spec = c.problem(g)?;
        for &n in &c.n_list {
            let truncated = spec.with_datum(truncate_datum(&spec.datum, n));
            for &e in &elements {
                let mesh = c.mesh_with(e)?;
                let rep = solve_bounded(&truncated, &mesh, &c.solver)?;
                let mut row = vec![Cell::Num(g)];
                let s = summary_row(n, &rep, g);
                row.push(s[0].clone());
                row.push(Cell::Int(e as u64));
                row.extend(s.into_iter().skip(1));
                t.push(row);
            }
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, Overrides};

    fn config(json: &str, dir: &std::path::Path) -> RunConfig {
        let ov = Overrides {
            output_dir: Some(dir.to_path_buf()),
            ..Default::default()
        };
        parse_config(Some(json), &ov).unwrap()
    }

    #[test]
    fn zero_solve_writes_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(r#"{"command":"solve","datum":"zero","elements":8}"#, dir.path());
        let out = run(&c).unwrap();
        assert_eq!(out.exit_code(), 0);
        let text = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,value"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|l| l.ends_with(",0.0000000000000000e0")));
    }

    #[test]
    fn unbounded_solve_reports_each_n() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"command":"solve","datum":"power","datum_params":[1,1],"elements":32,"n_list":[5,10,20]}"#,
            dir.path(),
        );
        let out = run(&c).unwrap();
        assert_eq!(out.certificates.len(), 3);
        assert_eq!(out.exit_code(), 0);
        let text = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn sweep_rows_are_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"command":"sweep","gammas":[3,1.5],"n_list":[4,8],"elements_list":[32,16]}"#,
            dir.path(),
        );
        let out = run(&c).unwrap();
        assert!(out.certificates.is_empty());
        let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
        let keys: Vec<(f64, u64, u64)> = text
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
            })
            .collect();
        assert_eq!(keys.len(), 8);
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(keys, sorted);
    }

    #[test]
    fn failed_certificate_forces_exit_two() {
        let mut o = Outcome::default();
        o.certificates.push(CertificateReport::new("a", 0.0, 2.0, 1.0, 0.0));
        o.certificates.push(CertificateReport::new("b", 0.0, 0.0, 1.0, 0.0));
        assert_eq!(o.exit_code(), 2);
        o.certificates.remove(0);
        assert_eq!(o.exit_code(), 0);
    }
}
