//! Task execution: each requested task runs against the parsed scenario and
//! yields a status plus the value block that goes into the report.
//!
//! Tasks never abort the run: a numerical failure inside one task is
//! captured as an `error` outcome with the library's diagnostic (which
//! names the violated tolerance), and the remaining tasks still execute.
//! The process exit code is decided afterwards from the collected statuses.

use num_complex::Complex64;
use serde_json::{json, Value};

use kappaloop::characters::{highest_weight_of_orbit, schur_eval, weyl_dimension};
use kappaloop::isotopy::GeneratorPath;
use kappaloop::kappa::{
    verify_base_point_independence, verify_deformation, verify_product, DEFORMATION_BOUNDARY_TOL,
    DEFORMATION_FD_TOL, DEFORMATION_SPREAD_TOL, PRODUCT_DIRECT_TOL, PRODUCT_STABILIZER_TOL,
};
use kappaloop::lie::SkewHermitianMatrix;
use kappaloop::orbit::{ConvergenceRow, OrbitSpec};
use kappaloop::{kappa_direct, kappa_report, Error, Numerics};

use crate::scenario::TaskName;

/// Relative defect accepted by the character task's identity check.
const CHARACTER_IDENTITY_TOL: f64 = 1e-9;

/// How one task ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Ran and every check it makes held.
    Pass,
    /// Ran, but a verification predicate came out false.
    Fail,
    /// Could not produce a verdict (numerical or structural failure).
    Error,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// One executed task, ready for report assembly.
#[derive(Debug)]
pub struct TaskOutcome {
    pub name: &'static str,
    pub status: Status,
    /// Task-specific values, with `deviations` and `diagnostics` sub-objects.
    pub values: Value,
    /// Grid-refinement rows, for tasks that emit a convergence table.
    pub convergence: Option<Vec<ConvergenceRow>>,
    /// One-line human summary.
    pub summary: String,
}

/// Everything tasks may consume, resolved once from the scenario.
pub struct TaskInputs<'a> {
    pub spec: &'a OrbitSpec,
    pub path: &'a GeneratorPath,
    pub second: Option<&'a GeneratorPath>,
    pub deformation: Option<&'a (SkewHermitianMatrix, f64)>,
    pub num: &'a Numerics,
}

/// Runs one task, capturing numerical failures as `error` outcomes.
pub fn run_task(name: TaskName, inputs: &TaskInputs<'_>) -> TaskOutcome {
    let result = match name {
        TaskName::Kappa => task_kappa(inputs),
        TaskName::VerifyIndependence => task_independence(inputs),
        TaskName::VerifyProduct => task_product(inputs),
        TaskName::VerifyDeformation => task_deformation(inputs),
        TaskName::Vertices => task_vertices(inputs),
        TaskName::Character => task_character(inputs),
        TaskName::Convergence => task_convergence(inputs),
    };
    match result {
        Ok(outcome) => outcome,
        Err(e) => TaskOutcome {
            name: name.as_str(),
            status: Status::Error,
            values: json!({
                "deviations": {},
                "diagnostics": { "error": e.to_string() },
            }),
            convergence: None,
            summary: format!("{e}"),
        },
    }
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn optional_complex(z: Option<Complex64>) -> Value {
    match z {
        Some(z) => complex(z),
        None => Value::Null,
    }
}

/// All κ routes side by side; passes when the loop closes and the available
/// routes agree within the independence tolerance (the accuracy scale of
/// the direct route).
fn task_kappa(inputs: &TaskInputs<'_>) -> Result<TaskOutcome, Error> {
    let x0 = inputs.spec.random_point(inputs.num.seed);
    let report = kappa_report(inputs.spec, inputs.path, &x0, inputs.num)?;
    let pass = report.closure.closed && report.spread <= inputs.num.independence_tol;
    let routes = 2 + report.weyl.is_some() as usize + report.fixed_point.is_some() as usize;
    let summary = format!(
        "kappa_direct = {:+.6}{:+.6}i, {} routes, spread {:.2e}",
        report.direct.value.re, report.direct.value.im, routes, report.spread
    );
    Ok(TaskOutcome {
        name: "kappa",
        status: if pass { Status::Pass } else { Status::Fail },
        values: json!({
            "kappa_direct": complex(report.direct.value),
            "kappa_stabilizer": complex(report.stabilizer),
            "kappa_weyl": optional_complex(report.weyl),
            "kappa_fixed_point": optional_complex(report.fixed_point),
            "deviations": {
                "route_spread": report.spread,
                "closure_residual": report.closure.residual,
            },
            "diagnostics": {
                "area": report.direct.area,
                "hamiltonian_integral": report.direct.hamiltonian_integral,
                "cap_attempts": report.direct.cap_attempts,
                "endpoint_closed": report.closure.closed,
                "endpoint_scalar": optional_complex(report.closure.scalar),
                "route_agreement_tol": inputs.num.independence_tol,
            },
        }),
        convergence: None,
        summary,
    })
}

/// κ from several random base points must coincide.
fn task_independence(inputs: &TaskInputs<'_>) -> Result<TaskOutcome, Error> {
    let report = verify_base_point_independence(inputs.spec, inputs.path, inputs.num)?;
    let values: Vec<Value> = report.values.iter().map(|&z| complex(z)).collect();
    let summary = format!(
        "{} base points, spread {:.2e} (tol {:.0e})",
        report.values.len(),
        report.spread,
        report.tolerance
    );
    Ok(TaskOutcome {
        name: "verify-independence",
        status: if report.pass { Status::Pass } else { Status::Fail },
        values: json!({
            "kappa_values": values,
            "deviations": { "spread": report.spread },
            "diagnostics": {
                "points": report.values.len(),
                "tolerance": report.tolerance,
            },
        }),
        convergence: None,
        summary,
    })
}

/// κ of a concatenation must be the product of the factors' κ.
fn task_product(inputs: &TaskInputs<'_>) -> Result<TaskOutcome, Error> {
    let second = inputs
        .second
        .expect("scenario validation guarantees loop2 for verify-product");
    let x0 = inputs.spec.random_point(inputs.num.seed);
    let report = verify_product(inputs.spec, inputs.path, second, &x0, inputs.num)?;
    let summary = format!(
        "direct error {:.2e} (tol {:.0e}), stabilizer error {:.2e} (tol {:.0e})",
        report.direct_error, PRODUCT_DIRECT_TOL, report.stabilizer_error, PRODUCT_STABILIZER_TOL
    );
    Ok(TaskOutcome {
        name: "verify-product",
        status: if report.pass { Status::Pass } else { Status::Fail },
        values: json!({
            "first_direct": complex(report.first_direct),
            "second_direct": complex(report.second_direct),
            "combined_direct": complex(report.combined_direct),
            "first_stabilizer": complex(report.first_stabilizer),
            "second_stabilizer": complex(report.second_stabilizer),
            "combined_stabilizer": complex(report.combined_stabilizer),
            "deviations": {
                "direct_error": report.direct_error,
                "stabilizer_error": report.stabilizer_error,
            },
            "diagnostics": {
                "direct_tol": PRODUCT_DIRECT_TOL,
                "stabilizer_tol": PRODUCT_STABILIZER_TOL,
            },
        }),
        convergence: None,
        summary,
    })
}

/// Conjugation deformations must leave κ unchanged.
fn task_deformation(inputs: &TaskInputs<'_>) -> Result<TaskOutcome, Error> {
    let (direction, ds) = inputs
        .deformation
        .expect("scenario validation guarantees a deformation entry");
    let report = verify_deformation(inputs.spec, inputs.path, direction, *ds, inputs.num)?;
    let summary = format!(
        "FD derivative {:.2e} (tol {:.0e}), boundary terms <= {:.2e} (tol {:.0e})",
        report.stabilizer_derivative,
        DEFORMATION_FD_TOL,
        report.max_boundary,
        DEFORMATION_BOUNDARY_TOL
    );
    Ok(TaskOutcome {
        name: "verify-deformation",
        status: if report.pass { Status::Pass } else { Status::Fail },
        values: json!({
            "boundary_terms": report.boundary_terms,
            "deviations": {
                "stabilizer_derivative": report.stabilizer_derivative,
                "max_boundary": report.max_boundary,
                "probe_spread": report.spread,
            },
            "diagnostics": {
                "ds": ds,
                "fd_tol": DEFORMATION_FD_TOL,
                "boundary_tol": DEFORMATION_BOUNDARY_TOL,
                "spread_tol": DEFORMATION_SPREAD_TOL,
            },
        }),
        convergence: None,
        summary,
    })
}

/// Torus fixed-point moments must differ by integer lattice vectors.
fn task_vertices(inputs: &TaskInputs<'_>) -> Result<TaskOutcome, Error> {
    let report = inputs.spec.vertex_lattice_check();
    let summary = format!(
        "{} vertices, lattice deviation {:.2e}",
        report.vertices.len(),
        report.max_deviation
    );
    Ok(TaskOutcome {
        name: "vertices",
        status: if report.pass { Status::Pass } else { Status::Fail },
        values: json!({
            "vertices": report.vertices,
            "integer_diffs": report.integer_diffs,
            "deviations": { "max_lattice_deviation": report.max_deviation },
            "diagnostics": { "tolerance": kappaloop::Tolerances::default().vertex },
        }),
        convergence: None,
        summary,
    })
}

/// The orbit's dual weight, its Weyl dimension, and the Schur evaluation's
/// consistency at the identity (where the character must equal the
/// dimension).
fn task_character(inputs: &TaskInputs<'_>) -> Result<TaskOutcome, Error> {
    let weight = highest_weight_of_orbit(inputs.spec)?;
    let dim = weyl_dimension(&weight);
    let dim_i64 = i64::try_from(dim).map_err(|_| {
        Error::Validation("representation dimension exceeds the report range".into())
    })?;
    let identity_args = vec![Complex64::new(1.0, 0.0); weight.len()];
    let at_identity = schur_eval(&weight, &identity_args)?;
    let defect = (at_identity - Complex64::new(dim as f64, 0.0)).norm() / (dim as f64).max(1.0);
    let pass = defect <= CHARACTER_IDENTITY_TOL;
    let summary = format!(
        "weight {:?}, dim {}, identity defect {:.2e}",
        weight.components(),
        dim,
        defect
    );
    Ok(TaskOutcome {
        name: "character",
        status: if pass { Status::Pass } else { Status::Fail },
        values: json!({
            "highest_weight": weight.components(),
            "weyl_dimension": dim_i64,
            "schur_at_identity": complex(at_identity),
            "deviations": { "identity_defect": defect },
            "diagnostics": { "tolerance": CHARACTER_IDENTITY_TOL },
        }),
        convergence: None,
        summary,
    })
}

/// Runs the direct route and exports its grid-refinement history.
fn task_convergence(inputs: &TaskInputs<'_>) -> Result<TaskOutcome, Error> {
    let x0 = inputs.spec.random_point(inputs.num.seed);
    let report = kappa_direct(inputs.spec, inputs.path, &x0, inputs.num)?;
    let last_delta = report.convergence.iter().rev().find_map(|row| row.delta);
    let summary = format!(
        "area {:.12} after {} refinement rows (quad tol {:.0e})",
        report.area,
        report.convergence.len(),
        inputs.num.quad_tol
    );
    Ok(TaskOutcome {
        name: "convergence",
        status: Status::Pass,
        values: json!({
            "area": report.area,
            "kappa_direct": complex(report.value),
            "deviations": { "last_delta": last_delta },
            "diagnostics": {
                "rows": report.convergence.len(),
                "cap_attempts": report.cap_attempts,
                "quad_tol": inputs.num.quad_tol,
            },
        }),
        convergence: Some(report.convergence),
        summary,
    })
}
