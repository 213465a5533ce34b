//! Run configuration: a JSON document, overridden by command-line flags.

use std::path::PathBuf;

use degenelab_core::experiment::dirac_mesh;
use degenelab_core::mesh::refined_grading;
use degenelab_core::problem::manufactured_solution;
use degenelab_core::solver::{Iteration, SolverConfig};
use degenelab_core::{CoefficientField, Datum, Domain, ManufacturedSolution, ProblemSpec, RadialMesh};
use serde::Deserialize;

/// Element count at which the configured grading ratio applies; finer
/// meshes keep the same first-to-last element ratio.
pub const GRADING_REFERENCE_ELEMENTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Mms,
    Estimates,
    Contraction,
    Independence,
    Dirac,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Mms => "mms",
            Command::Estimates => "estimates",
            Command::Contraction => "contraction",
            Command::Independence => "independence",
            Command::Dirac => "dirac",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{key}`: {constraint}")]
    Validation { key: String, constraint: String },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
}

fn invalid(key: &str, constraint: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.to_string(),
        constraint: constraint.into(),
    }
}

/// The JSON document as written. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Option<Command>,
    pub gamma: Option<f64>,
    #[serde(rename = "N")]
    pub dimension: Option<usize>,
    pub sigma: Option<f64>,
    pub domain: Option<String>,
    pub coefficient: Option<String>,
    pub coefficient_params: Option<Vec<f64>>,
    pub datum: Option<String>,
    pub datum_params: Option<Vec<f64>>,
    pub elements: Option<usize>,
    pub grading: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub iteration: Option<String>,
    pub n_list: Option<Vec<u64>>,
    pub seed: Option<u64>,
    pub pairs: Option<usize>,
    pub r_cut: Option<f64>,
    pub gammas: Option<Vec<f64>>,
    pub elements_list: Option<Vec<usize>>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Command-line flags; each one set wins over the document.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub command: Option<Command>,
    pub gamma: Option<f64>,
    pub elements: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientChoice {
    Identity,
    NonlinearDemo,
    /// `d(r) = c0 + c1 r`.
    Diagonal {
        c0: f64,
        c1: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DatumChoice {
    Zero,
    Constant(f64),
    /// Datum of the closed-form singular solution.
    Manufactured,
    /// Linear in `r` from `center` at 0 to `boundary` at 1.
    Linear {
        center: f64,
        boundary: f64,
    },
    /// `scale · r^(-exponent)`.
    Power {
        scale: f64,
        exponent: f64,
    },
}

impl DatumChoice {
    pub fn is_bounded(&self) -> bool {
        !matches!(self, DatumChoice::Manufactured | DatumChoice::Power { .. })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub gamma: f64,
    pub dimension: usize,
    pub sigma: f64,
    pub domain: Domain,
    pub coefficient: CoefficientChoice,
    pub datum: DatumChoice,
    /// Finest mesh for `mms`, the mesh for every other command.
    pub elements: usize,
    /// Grading ratio at [`GRADING_REFERENCE_ELEMENTS`] elements.
    pub grading: f64,
    pub solver: SolverConfig,
    pub n_list: Vec<u64>,
    pub seed: u64,
    pub pairs: usize,
    pub r_cut: f64,
    pub gammas: Vec<f64>,
    pub elements_list: Vec<usize>,
    pub output_dir: PathBuf,
    pub format: Format,
}

/// Parses `json` (if any), applies `overrides` and validates.
pub fn parse_config(json: Option<&str>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = match json {
        Some(text) => serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?,
        None => RawConfig::default(),
    };
    resolve(raw, overrides)
}

/// Reads the document at `path` and calls [`parse_config`].
pub fn load_config(path: Option<&std::path::Path>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
            path: p.to_path_buf(),
            source,
        })?),
        None => None,
    };
    parse_config(text.as_deref(), overrides)
}

fn resolve(raw: RawConfig, ov: &Overrides) -> Result<RunConfig, ConfigError> {
    let command = ov
        .command
        .or(raw.command)
        .ok_or_else(|| invalid("command", "a command is required"))?;
    let gamma = ov.gamma.or(raw.gamma).unwrap_or(2.0);
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", "gamma > 0"));
    }
    if command == Command::Dirac && gamma <= 1.0 {
        return Err(invalid("gamma", "gamma-not-supercritical: dirac needs gamma > 1"));
    }

    let domain = match raw.domain.as_deref().unwrap_or("ball") {
        "ball" => Domain::RadialBall,
        "interval" => Domain::Interval,
        _ => return Err(invalid("domain", "one of ball, interval")),
    };
    let coefficient = coefficient_choice(raw.coefficient.as_deref(), raw.coefficient_params.as_deref())?;
    let default_datum = match command {
        Command::Mms | Command::Estimates | Command::Independence => "manufactured",
        Command::Sweep => "power",
        _ => "constant",
    };
    let datum = datum_choice(
        raw.datum.as_deref().unwrap_or(default_datum),
        raw.datum_params.as_deref(),
    )?;
    let manufactured = datum == DatumChoice::Manufactured || command == Command::Mms;

    let dimension = raw.dimension.unwrap_or(if manufactured { 5 } else { 3 });
    if domain == Domain::RadialBall && dimension <= 2 {
        return Err(invalid("N", "N > 2 on the ball"));
    }
    if command == Command::Dirac && domain != Domain::RadialBall {
        return Err(invalid("domain", "dirac runs on the ball"));
    }
    let sigma = raw.sigma.unwrap_or(1.5);
    if manufactured {
        if domain != Domain::RadialBall {
            return Err(invalid("domain", "the manufactured solution lives on the ball"));
        }
        if coefficient != CoefficientChoice::Identity {
            return Err(invalid(
                "coefficient",
                "the manufactured solution needs the identity coefficient",
            ));
        }
        let (lo, hi) = (2.0 / gamma, dimension as f64 - 2.0);
        if !(sigma > lo && sigma < hi) {
            return Err(invalid(
                "sigma",
                format!("need {lo} < sigma < {hi} (2/gamma < sigma < N-2)"),
            ));
        }
    }

    let elements = ov.elements.or(raw.elements).unwrap_or(match command {
        Command::Mms | Command::Estimates => 512,
        _ => 256,
    });
    if elements < 2 {
        return Err(invalid("elements", "elements >= 2"));
    }
    if command == Command::Mms && (!elements.is_multiple_of(8) || elements < 16) {
        return Err(invalid("elements", "mms needs a multiple of 8, at least 16"));
    }
    let grading = raw
        .grading
        .unwrap_or(if domain == Domain::RadialBall { 0.9 } else { 1.0 });
    if !(grading > 0.0 && grading <= 1.0) {
        return Err(invalid("grading", "0 < grading <= 1"));
    }

    let iteration = match raw.iteration.as_deref().unwrap_or("kirchhoff") {
        "kirchhoff" => Iteration::Kirchhoff,
        "frozen" => Iteration::FrozenCoefficient,
        _ => return Err(invalid("iteration", "one of kirchhoff, frozen")),
    };
    let solver = SolverConfig {
        picard_tol: raw.tol.unwrap_or(1e-10),
        max_iterations: raw.max_iter.unwrap_or(200),
        damping: raw.damping.unwrap_or(1.0),
        iteration,
    };
    if !(solver.picard_tol > 0.0) {
        return Err(invalid("tol", "tol > 0"));
    }
    if solver.max_iterations == 0 {
        return Err(invalid("max_iter", "max_iter >= 1"));
    }
    if !(solver.damping > 0.0 && solver.damping <= 1.0) {
        return Err(invalid("damping", "0 < damping <= 1"));
    }

    let n_list = raw.n_list.unwrap_or_else(|| match command {
        Command::Mms | Command::Estimates => vec![160],
        Command::Independence => vec![20, 40, 80, 160],
        Command::Dirac => vec![8, 16, 32, 64],
        Command::Sweep => vec![10, 40, 160],
        _ => vec![10, 20, 40, 80, 160],
    });
    if n_list.is_empty() {
        return Err(invalid("n_list", "at least one entry"));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("n_list", "positive and strictly increasing"));
    }
    let pairs = raw.pairs.unwrap_or(20);
    if pairs == 0 {
        return Err(invalid("pairs", "pairs >= 1"));
    }
    let r_cut = raw.r_cut.unwrap_or(0.2);
    if !(r_cut > 0.0 && r_cut < 1.0) {
        return Err(invalid("r_cut", "0 < r_cut < 1"));
    }
    if command == Command::Dirac {
        let max_n = *n_list.last().expect("non-empty");
        if dirac_mesh(dimension, elements, max_n).is_err() {
            return Err(invalid("elements", "too few elements to resolve [0, 1/max n]"));
        }
    }
    let gammas = raw.gammas.unwrap_or_else(|| vec![1.5, 2.0, 3.0]);
    if gammas.is_empty() || gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(invalid("gammas", "non-empty, every entry > 0"));
    }
    let elements_list = raw.elements_list.unwrap_or_else(|| vec![64, 128, 256]);
    if elements_list.is_empty() || elements_list.iter().any(|e| *e < 2) {
        return Err(invalid("elements_list", "non-empty, every entry >= 2"));
    }
    if command == Command::Sweep {
        if let DatumChoice::Power { exponent, .. } = datum {
            for &g in &gammas {
                if exponent * (g + 2.0) / 2.0 >= dimension as f64 {
                    return Err(invalid(
                        "gammas",
                        format!("r^-{exponent} is not in L^((gamma+2)/2) for gamma = {g}"),
                    ));
                }
            }
        }
        if manufactured {
            for &g in &gammas {
                if !(sigma > 2.0 / g) {
                    return Err(invalid("gammas", format!("sigma window empty for gamma = {g}")));
                }
            }
        }
    }

    Ok(RunConfig {
        command,
        gamma,
        dimension,
        sigma,
        domain,
        coefficient,
        datum,
        elements,
        grading,
        solver,
        n_list,
        seed: ov.seed.or(raw.seed).unwrap_or(42),
        pairs,
        r_cut,
        gammas,
        elements_list,
        output_dir: ov
            .output_dir
            .clone()
            .or(raw.output_dir)
            .unwrap_or_else(|| PathBuf::from("out")),
        format: ov.format.or(raw.format).unwrap_or_default(),
    })
}

fn coefficient_choice(name: Option<&str>, params: Option<&[f64]>) -> Result<CoefficientChoice, ConfigError> {
    match name.unwrap_or("identity") {
        "identity" => Ok(CoefficientChoice::Identity),
        "nonlinear-demo" => Ok(CoefficientChoice::NonlinearDemo),
        "diagonal" => {
            let p = params.unwrap_or(&[1.0, 0.0]);
            if p.len() != 2 {
                return Err(invalid("coefficient_params", "diagonal takes [c0, c1]"));
            }
            let (c0, c1) = (p[0], p[1]);
            if !(c0 > 0.0 && c0 + c1 > 0.0) {
                return Err(invalid("coefficient_params", "c0 + c1 r must stay positive on [0, 1]"));
            }
            Ok(CoefficientChoice::Diagonal { c0, c1 })
        }
        _ => Err(invalid("coefficient", "one of identity, nonlinear-demo, diagonal")),
    }
}

fn datum_choice(name: &str, params: Option<&[f64]>) -> Result<DatumChoice, ConfigError> {
    let want = |n: usize, default: &[f64]| -> Result<Vec<f64>, ConfigError> {
        let p = params.map(<[f64]>::to_vec).unwrap_or_else(|| default.to_vec());
        if p.len() != n || p.iter().any(|v| !v.is_finite()) {
            return Err(invalid(
                "datum_params",
                format!("datum `{name}` takes {n} finite values"),
            ));
        }
        Ok(p)
    };
    match name {
        "zero" => Ok(DatumChoice::Zero),
        "constant" => Ok(DatumChoice::Constant(want(1, &[1.0])?[0])),
        "manufactured" => Ok(DatumChoice::Manufactured),
        "linear" => {
            let p = want(2, &[1.0, 0.0])?;
            Ok(DatumChoice::Linear {
                center: p[0],
                boundary: p[1],
            })
        }
        "power" => {
            let p = want(2, &[1.0, 1.0])?;
            if !(p[1] > 0.0) {
                return Err(invalid("datum_params", "power exponent > 0"));
            }
            Ok(DatumChoice::Power {
                scale: p[0],
                exponent: p[1],
            })
        }
        _ => Err(invalid("datum", "one of zero, constant, manufactured, linear, power")),
    }
}

impl RunConfig {
    pub fn coefficient_field(&self) -> CoefficientField {
        match self.coefficient {
            CoefficientChoice::Identity => CoefficientField::identity(),
            CoefficientChoice::NonlinearDemo => CoefficientField::nonlinear_demo(),
            CoefficientChoice::Diagonal { c0, c1 } => {
                let (lo, hi) = (c0.min(c0 + c1), c0.max(c0 + c1));
                CoefficientField::diagonal(move |r| c0 + c1 * r, lo, hi).expect("validated bounds")
            }
        }
    }

    pub fn manufactured(&self, gamma: f64) -> degenelab_core::Result<ManufacturedSolution> {
        manufactured_solution(self.sigma, self.dimension, gamma)
    }

    pub fn datum_for(&self, gamma: f64) -> degenelab_core::Result<Datum> {
        Ok(match self.datum {
            DatumChoice::Zero => Datum::zero(),
            DatumChoice::Constant(c) => Datum::constant(c),
            DatumChoice::Manufactured => self.manufactured(gamma)?.datum(),
            DatumChoice::Linear { center, boundary } => {
                Datum::piecewise_linear(vec![0.0, 1.0], vec![center, boundary])?
            }
            DatumChoice::Power { scale, exponent } => {
                Datum::closed_form(move |r| scale * r.powf(-exponent), self.dimension as f64 / exponent)
            }
        })
    }

    pub fn problem(&self, gamma: f64) -> degenelab_core::Result<ProblemSpec> {
        let dimension = if self.domain == Domain::Interval {
            1
        } else {
            self.dimension
        };
        ProblemSpec::new(
            gamma,
            dimension,
            self.domain,
            self.coefficient_field(),
            self.datum_for(gamma)?,
        )
    }

    pub fn mesh_with(&self, elements: usize) -> degenelab_core::Result<RadialMesh> {
        let q = refined_grading(self.grading, GRADING_REFERENCE_ELEMENTS, elements);
        match self.domain {
            Domain::RadialBall => RadialMesh::ball(self.dimension, elements, q),
            Domain::Interval => RadialMesh::interval(elements, q),
        }
    }

    pub fn mesh(&self) -> degenelab_core::Result<RadialMesh> {
        self.mesh_with(self.elements)
    }

    /// `[e/8, e/4, e/2, e]` for the finest count `e`.
    pub fn refinement_levels(&self) -> Vec<usize> {
        [8, 4, 2, 1].iter().map(|d| self.elements / d).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, ConfigError> {
        parse_config(Some(s), &Overrides::default())
    }

    fn key_of(e: ConfigError) -> String {
        match e {
            ConfigError::Validation { key, .. } => key,
            other => panic!("expected a validation error, got {other}"),
        }
    }

    #[test]
    fn mms_example_is_valid() {
        let c = parse(r#"{"command":"mms","gamma":2,"N":5,"sigma":1.5,"elements":256}"#).unwrap();
        assert_eq!(c.command, Command::Mms);
        assert_eq!(c.refinement_levels(), vec![32, 64, 128, 256]);
        assert_eq!(c.n_list, vec![160]);
    }

    #[test]
    fn empty_sigma_window_is_rejected() {
        let e = parse(r#"{"command":"mms","gamma":2,"N":3,"sigma":1.5}"#).unwrap_err();
        assert_eq!(key_of(e), "sigma");
    }

    #[test]
    fn subcritical_dirac_is_rejected() {
        let e = parse(r#"{"command":"dirac","gamma":0.5}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("gamma-not-supercritical"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        match parse("{\n  \"command\": \"solve\",\n  \"gama\": 2\n}").unwrap_err() {
            ConfigError::Parse { line, column, message } => {
                assert_eq!(line, 3);
                assert!(column > 0);
                assert!(message.contains("gama"));
            }
            other => panic!("{other}"),
        }
        assert!(matches!(
            parse("{\"command\": }").unwrap_err(),
            ConfigError::Parse { .. }
        ));
    }

    #[test]
    fn flags_win() {
        let ov = Overrides {
            gamma: Some(3.0),
            elements: Some(64),
            seed: Some(7),
            ..Default::default()
        };
        let c = parse_config(Some(r#"{"command":"solve","gamma":1,"elements":32,"seed":1}"#), &ov).unwrap();
        assert_eq!((c.gamma, c.elements, c.seed), (3.0, 64, 7));
    }

    #[test]
    fn command_is_required() {
        assert_eq!(key_of(parse("{}").unwrap_err()), "command");
    }

    #[test]
    fn numeric_constraints_name_their_key() {
        for (doc, key) in [
            (r#"{"command":"solve","tol":0}"#, "tol"),
            (r#"{"command":"solve","damping":2}"#, "damping"),
            (r#"{"command":"solve","grading":0}"#, "grading"),
            (r#"{"command":"solve","n_list":[4,2]}"#, "n_list"),
            (r#"{"command":"dirac","r_cut":1.5}"#, "r_cut"),
            (r#"{"command":"mms","elements":100}"#, "elements"),
            (
                r#"{"command":"solve","coefficient":"diagonal","coefficient_params":[1,-2]}"#,
                "coefficient_params",
            ),
            (r#"{"command":"solve","datum":"wobbly"}"#, "datum"),
        ] {
            assert_eq!(key_of(parse(doc).unwrap_err()), key, "{doc}");
        }
    }

    #[test]
    fn builds_problems_and_meshes() {
        let c = parse(r#"{"command":"solve","coefficient":"diagonal","coefficient_params":[1,0.5],"datum":"linear","datum_params":[2,0]}"#)
            .unwrap();
        let p = c.problem(c.gamma).unwrap();
        assert_eq!(p.datum.value(0.5), 1.0);
        assert_eq!(p.coefficient.alpha, 1.0);
        assert_eq!(p.coefficient.beta, 1.5);
        let m = c.mesh().unwrap();
        assert_eq!(m.num_elements(), 256);
        let i = parse(r#"{"command":"solve","domain":"interval","elements":10}"#).unwrap();
        assert_eq!(i.mesh().unwrap().nodes()[1], 0.1);
    }
}
