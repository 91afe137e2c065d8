//! Scenario files: the on-disk JSON schema and its translation into core
//! types.
//!
//! A scenario bundles one orbit, one loop of Hamiltonian diffeomorphisms
//! (plus an optional second loop for product checks and an optional
//! deformation direction), numerics overrides, and the list of tasks to run.
//! Loops are written either through a named constructor (`su2_pi`,
//! `central_loop`, `fourier`) or as raw generator terms with complex matrix
//! entries encoded as `[re, im]` pairs. The machine-readable schema lives in
//! `schema/scenario.schema.json` at the repository root.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use kappaloop::isotopy::{Coefficient, GeneratorPath, PathTerm, Segment};
use kappaloop::lie::SkewHermitianMatrix;
use kappaloop::loops;
use kappaloop::orbit::OrbitSpec;
use kappaloop::Numerics;

/// Input-side failures: malformed JSON or a scenario that fails validation.
/// Both map to exit code 2.
#[derive(Debug)]
pub enum ScenarioError {
    /// JSON syntax or shape error, anchored to a line and column.
    Parse { file: String, line: usize, column: usize, message: String },
    /// Structurally valid JSON describing an inconsistent scenario.
    Invalid(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Parse { file, line, column, message } => {
                write!(f, "{file}:{line}:{column}: {message}")
            }
            ScenarioError::Invalid(message) => write!(f, "invalid scenario: {message}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

/// The tasks a scenario may request, in the report vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskName {
    Kappa,
    VerifyIndependence,
    VerifyProduct,
    VerifyDeformation,
    Vertices,
    Character,
    Convergence,
}

impl TaskName {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskName::Kappa => "kappa",
            TaskName::VerifyIndependence => "verify-independence",
            TaskName::VerifyProduct => "verify-product",
            TaskName::VerifyDeformation => "verify-deformation",
            TaskName::Vertices => "vertices",
            TaskName::Character => "character",
            TaskName::Convergence => "convergence",
        }
    }
}

/// Top-level scenario document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub orbit: OrbitInput,
    #[serde(rename = "loop")]
    pub main_loop: LoopInput,
    /// Second factor for the `verify-product` task.
    #[serde(default)]
    pub loop2: Option<LoopInput>,
    /// Conjugation direction and step for the `verify-deformation` task.
    #[serde(default)]
    pub deformation: Option<DeformationInput>,
    #[serde(default)]
    pub numerics: NumericsInput,
    pub tasks: Vec<TaskName>,
}

/// Isospectral orbit: block multiplicities and their integer levels.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitInput {
    pub multiplicities: Vec<usize>,
    pub char_ints: Vec<i64>,
}

/// A loop, as a named constructor or as raw generator terms on [0, 1].
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopInput {
    /// The half-turn loop exp(tπ·diag(i, -i)) on u(2).
    Su2Pi {},
    /// Constant central-plus-diagonal generator 2πi(θ·I + diag(shifts)).
    CentralLoop { theta: f64, shifts: Vec<i64> },
    /// Seeded random trigonometric loop with commuting integer directions.
    Fourier { seed: u64, harmonics: u32 },
    /// Raw terms: coefficient shapes attached to skew-Hermitian matrices.
    Terms(Vec<TermInput>),
}

/// One generator term: a matrix with a scalar coefficient shape.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermInput {
    /// n×n complex matrix, rows of `[re, im]` pairs; must be skew-Hermitian.
    pub basis: Vec<Vec<[f64; 2]>>,
    pub coefficient: CoefficientInput,
}

/// Tagged coefficient shapes mirroring the core vocabulary.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientInput {
    Constant(f64),
    Cosine { harmonic: u32, amplitude: f64 },
    Sine { harmonic: u32, amplitude: f64 },
    PiecewiseConstant(Vec<f64>),
}

/// Deformation data for `verify-deformation`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationInput {
    /// Skew-Hermitian conjugation direction, same encoding as term bases.
    pub direction: Vec<Vec<[f64; 2]>>,
    /// Finite-difference step; defaults to 1e-3.
    #[serde(default = "default_ds")]
    pub ds: f64,
}

fn default_ds() -> f64 {
    1e-3
}

/// Optional numerics overrides; anything absent keeps the library default.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsInput {
    pub lax_steps: Option<usize>,
    pub cap_grid: Option<[usize; 2]>,
    pub quad_tol: Option<f64>,
    pub seed: Option<u64>,
    pub max_refine: Option<usize>,
}

/// Command-line overrides, applied after the scenario's own numerics block.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub quad_tol: Option<f64>,
}

impl Scenario {
    /// Parses and semantically validates a scenario file, returning the raw
    /// text alongside (the report hashes the exact input bytes).
    pub fn load(path: &Path) -> Result<(Scenario, String), ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ScenarioError::Invalid(format!("cannot read {}: {e}", path.display()))
        })?;
        let scenario = Scenario::from_json(&text, &path.display().to_string())?;
        Ok((scenario, text))
    }

    /// Parses and semantically validates scenario text; `file` labels parse
    /// errors.
    pub fn from_json(text: &str, file: &str) -> Result<Scenario, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            file: file.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Checks the scenario is internally consistent: the orbit constructs,
    /// every loop constructs at the orbit's dimension, and each requested
    /// task has the inputs it needs.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let spec = self.orbit_spec()?;
        let dim = spec.dim();
        build_loop(&self.main_loop, dim).map_err(|e| prefix(e, "loop"))?;
        if let Some(second) = &self.loop2 {
            build_loop(second, dim).map_err(|e| prefix(e, "loop2"))?;
        }
        if let Some(d) = &self.deformation {
            parse_skew_matrix(&d.direction, dim)
                .map_err(|e| prefix(e, "deformation.direction"))?;
            if !(d.ds > 0.0) {
                return Err(ScenarioError::Invalid(format!(
                    "deformation.ds: step must be positive, got {}",
                    d.ds
                )));
            }
        }
        if self.tasks.is_empty() {
            return Err(ScenarioError::Invalid("tasks: at least one task is required".into()));
        }
        if self.tasks.contains(&TaskName::VerifyProduct) && self.loop2.is_none() {
            return Err(ScenarioError::Invalid(
                "tasks: \"verify-product\" needs a \"loop2\" entry".into(),
            ));
        }
        if self.tasks.contains(&TaskName::VerifyDeformation) && self.deformation.is_none() {
            return Err(ScenarioError::Invalid(
                "tasks: \"verify-deformation\" needs a \"deformation\" entry".into(),
            ));
        }
        Ok(())
    }

    /// The orbit the scenario runs on.
    pub fn orbit_spec(&self) -> Result<OrbitSpec, ScenarioError> {
        OrbitSpec::new(self.orbit.multiplicities.clone(), self.orbit.char_ints.clone())
            .map_err(|e| ScenarioError::Invalid(format!("orbit: {e}")))
    }

    /// The main loop at the orbit's dimension.
    pub fn loop_path(&self, dim: usize) -> Result<GeneratorPath, ScenarioError> {
        build_loop(&self.main_loop, dim).map_err(|e| prefix(e, "loop"))
    }

    /// The second loop, when present.
    pub fn loop2_path(&self, dim: usize) -> Result<Option<GeneratorPath>, ScenarioError> {
        match &self.loop2 {
            None => Ok(None),
            Some(l) => Ok(Some(build_loop(l, dim).map_err(|e| prefix(e, "loop2"))?)),
        }
    }

    /// The deformation direction and step, when present.
    pub fn deformation_data(
        &self,
        dim: usize,
    ) -> Result<Option<(SkewHermitianMatrix, f64)>, ScenarioError> {
        match &self.deformation {
            None => Ok(None),
            Some(d) => {
                let m = parse_skew_matrix(&d.direction, dim)
                    .map_err(|e| prefix(e, "deformation.direction"))?;
                Ok(Some((m, d.ds)))
            }
        }
    }

    /// Library defaults, overlaid with the scenario's numerics block and
    /// then with command-line flags.
    pub fn resolved_numerics(&self, overrides: &Overrides) -> Numerics {
        let mut num = Numerics::default();
        if let Some(s) = self.numerics.lax_steps {
            num.lax_steps = s;
        }
        if let Some([gs, gt]) = self.numerics.cap_grid {
            num.cap_grid = (gs, gt);
        }
        if let Some(q) = self.numerics.quad_tol {
            num.quad_tol = q;
        }
        if let Some(seed) = self.numerics.seed {
            num.seed = seed;
        }
        if let Some(r) = self.numerics.max_refine {
            num.max_refine = r;
        }
        if let Some(seed) = overrides.seed {
            num.seed = seed;
        }
        if let Some(steps) = overrides.steps {
            num.lax_steps = steps;
        }
        if let Some(q) = overrides.quad_tol {
            num.quad_tol = q;
        }
        num
    }
}

fn prefix(e: ScenarioError, field: &str) -> ScenarioError {
    match e {
        ScenarioError::Invalid(msg) => ScenarioError::Invalid(format!("{field}: {msg}")),
        other => other,
    }
}

/// Builds a core loop from its scenario encoding at dimension `dim`.
fn build_loop(input: &LoopInput, dim: usize) -> Result<GeneratorPath, ScenarioError> {
    match input {
        LoopInput::Su2Pi {} => {
            if dim != 2 {
                return Err(ScenarioError::Invalid(format!(
                    "su2_pi acts on u(2) but the orbit sits in u({dim})"
                )));
            }
            Ok(loops::su2_pi())
        }
        LoopInput::CentralLoop { theta, shifts } => loops::central_loop(dim, *theta, shifts)
            .map_err(|e| ScenarioError::Invalid(e.to_string())),
        LoopInput::Fourier { seed, harmonics } => loops::fourier_loop(dim, *seed, *harmonics)
            .map_err(|e| ScenarioError::Invalid(e.to_string())),
        LoopInput::Terms(terms) => {
            if terms.is_empty() {
                return Err(ScenarioError::Invalid("terms: need at least one term".into()));
            }
            let mut path_terms = Vec::with_capacity(terms.len());
            for (i, term) in terms.iter().enumerate() {
                let generator = parse_skew_matrix(&term.basis, dim)
                    .map_err(|e| prefix(e, &format!("terms[{i}].basis")))?;
                let coefficient = match &term.coefficient {
                    CoefficientInput::Constant(a) => Coefficient::Constant(*a),
                    CoefficientInput::Cosine { harmonic, amplitude } => {
                        Coefficient::Cosine { harmonic: *harmonic, amplitude: *amplitude }
                    }
                    CoefficientInput::Sine { harmonic, amplitude } => {
                        Coefficient::Sine { harmonic: *harmonic, amplitude: *amplitude }
                    }
                    CoefficientInput::PiecewiseConstant(v) => {
                        Coefficient::PiecewiseConstant(v.clone())
                    }
                };
                path_terms.push(PathTerm { coefficient, generator });
            }
            GeneratorPath::new(vec![Segment { t0: 0.0, t1: 1.0, terms: path_terms }])
                .map_err(|e| ScenarioError::Invalid(e.to_string()))
        }
    }
}

/// Decodes a `[re, im]`-encoded matrix and validates skew-Hermitianity.
fn parse_skew_matrix(
    rows: &[Vec<[f64; 2]>],
    dim: usize,
) -> Result<SkewHermitianMatrix, ScenarioError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(ScenarioError::Invalid(format!(
            "matrix must be {dim}×{dim} to act on the orbit"
        )));
    }
    let m = DMatrix::from_fn(dim, dim, |r, c| {
        let [re, im] = rows[r][c];
        Complex64::new(re, im)
    });
    SkewHermitianMatrix::new(m).map_err(|e| ScenarioError::Invalid(e.to_string()))
}
