//! The circle-valued action integral κ of a closed loop, by independent
//! routes, plus the verification bundles built on top of it.
//!
//! For a loop of Hamiltonian diffeomorphisms generated by A(t) with moment
//! Hamiltonians f_t(N) = σ·Re tr(N·A(t)) (σ = [`crate::SIGN_CONVENTION`]),
//! the invariant at a point x is
//!
//! ```text
//! κ_x = exp(2πi ∫_S ω  −  2πi ∫₀¹ f_t(γ(t)) dt),      ∂S = γ,  γ(t) = ψ_t(x),
//! ```
//!
//! where S is any cap with positively oriented boundary γ. Different caps
//! change the area by an integer, so κ is well defined; for closed loops it
//! is also independent of x. The routes:
//!
//! * **direct** ([`kappa_direct`]): solve the flow, build a cap over the
//!   trajectory, integrate ω and the Hamiltonian, exponentiate.
//! * **stabilizer** ([`kappa_stabilizer`]): κ equals the character Λ of the
//!   base point's stabilizer evaluated at the endpoint h(1). For central
//!   endpoints this is the invariant itself; for merely block-diagonal
//!   endpoints it is the holonomy of the loop based at the diagonal base
//!   point.
//! * **Weyl** ([`kappa_weyl`]): on regular orbits, κ at a central endpoint
//!   equals the normalized conjugate character χ̄_λ(h(1))/dim λ of the
//!   irreducible with highest weight λ read off the orbit levels.
//! * **fixed point** ([`kappa_fixed_point`]): when the base point commutes
//!   with every generator the trajectory is constant and the exponent
//!   reduces to the exact time integral of the generator path.
//!
//! The verification bundles check the structural theorems numerically:
//! base-point independence, multiplicativity under loop concatenation, and
//! invariance under conjugation deformations of the loop.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::characters::{dual_character, highest_weight_of_orbit, stabilizer_character, weyl_dimension};
use crate::config::Numerics;
use crate::error::{Error, Result};
use crate::isotopy::{
    closure_check, lax_solve, simpson_over_pieces, trajectory, ClosureReport, GeneratorPath,
    GroupTrajectory,
};
use crate::lie::SkewHermitianMatrix;
use crate::orbit::{
    hamiltonian_moment, probe_points, project_to_orbit, symplectic_area, trace_pairing,
    CapSurface, ConvergenceRow, OrbitPoint, OrbitSpec,
};
use crate::SIGN_CONVENTION;

/// Loop concatenation must be multiplicative to this accuracy on the
/// quadrature-based direct route.
pub const PRODUCT_DIRECT_TOL: f64 = 2e-4;
/// ... and to this accuracy on the character-based route.
pub const PRODUCT_STABILIZER_TOL: f64 = 1e-8;
/// Bound on the finite-difference derivative of κ along a deformation.
pub const DEFORMATION_FD_TOL: f64 = 1e-5;
/// Bound on 2π × the first-variation boundary integral of a closed loop.
pub const DEFORMATION_BOUNDARY_TOL: f64 = 1e-5;
/// The boundary integral must agree across base points to this accuracy.
pub const DEFORMATION_SPREAD_TOL: f64 = 1e-6;
/// Number of base points probed by the deformation check (the length of
/// [`DeformationReport::boundary_terms`]).
pub const DEFORMATION_PROBES: usize = 5;

/// Everything the direct route produced on the way to κ.
#[derive(Debug, Clone)]
pub struct DirectKappaReport {
    /// The invariant e^{2πi(area - hamiltonian_integral)}.
    pub value: Complex64,
    /// Converged symplectic area of the accepted cap.
    pub area: f64,
    /// ∫₀¹ f_t(γ(t)) dt by composite Simpson on the solver grid.
    pub hamiltonian_integral: f64,
    /// Relative gap ‖γ(1) - γ(0)‖/‖γ(0)‖ before the seam was snapped.
    pub closure_residual: f64,
    /// Grid-doubling history of the area quadrature.
    pub convergence: Vec<ConvergenceRow>,
    /// How many cap bases were tried before one avoided degeneracies.
    pub cap_attempts: usize,
}

/// κ by the direct geometric route at the base point `x0`.
///
/// The trajectory must return to `x0` (relative gap below `num.tol.closure`),
/// which holds for globally closed loops and, more generally, whenever the
/// endpoint stabilizes `x0`. The first cap is coned from the trajectory's
/// projected centroid; degenerate or non-converging caps are retried from
/// random apexes up to `num.cap_attempts` times.
pub fn kappa_direct(
    spec: &OrbitSpec,
    path: &GeneratorPath,
    x0: &OrbitPoint,
    num: &Numerics,
) -> Result<DirectKappaReport> {
    let flow = lax_solve(path, num.lax_steps, num.scheme)?;
    kappa_direct_from(spec, path, x0, &flow, num)
}

fn kappa_direct_from(
    spec: &OrbitSpec,
    path: &GeneratorPath,
    x0: &OrbitPoint,
    flow: &GroupTrajectory,
    num: &Numerics,
) -> Result<DirectKappaReport> {
    if path.dim() != spec.dim() {
        return Err(Error::validation(format!(
            "path acts on u({}) but the orbit sits in u({})",
            path.dim(),
            spec.dim()
        )));
    }
    let mut gamma = trajectory(spec, x0, flow)?;
    let scale = gamma[0].matrix().norm().max(1.0);
    let closure_residual = gamma[0].distance(gamma.last().expect("nonempty trajectory")) / scale;
    if closure_residual > num.tol.closure {
        return Err(Error::NotClosed { residual: closure_residual, tol: num.tol.closure });
    }
    // The boundary curve is closed by construction; snap the seam so the
    // cap sees an exactly periodic polyline.
    let last = gamma.len() - 1;
    gamma[last] = gamma[0].clone();

    let hamiltonian_integral = simpson_over_pieces(path, flow.steps(), |k, t_mid| {
        hamiltonian_moment(&gamma[k], &path.sample_in_piece(flow.times[k], t_mid))
    })?;

    // Cone the cap from the projected centroid of the loop when that is
    // well-conditioned: a symmetric apex keeps the blend away from spectral
    // collisions and the quadrature converges much faster than from a point
    // on the loop itself. A rejected centroid (the loop straddles a level
    // crossing) sends us straight to random apexes.
    let mut base = centroid_base(spec, &gamma)
        .unwrap_or_else(|| spec.random_point(num.seed.wrapping_add(1000)));
    let mut attempt = 0usize;
    let estimate = loop {
        attempt += 1;
        let cap = CapSurface::new(spec, base, &gamma)?;
        match symplectic_area(&cap, num.cap_grid, num.quad_tol, num.max_refine) {
            Ok(estimate) => break estimate,
            Err(Error::CapDegenerate { .. } | Error::QuadratureNotConverged { .. })
                if attempt <= num.cap_attempts =>
            {
                base = spec.random_point(num.seed.wrapping_add(1000 + attempt as u64));
            }
            Err(e) => return Err(e),
        }
    };

    let value = Complex64::from_polar(1.0, TAU * (estimate.area - hamiltonian_integral));
    Ok(DirectKappaReport {
        value,
        area: estimate.area,
        hamiltonian_integral,
        closure_residual,
        convergence: estimate.table,
        cap_attempts: attempt,
    })
}

/// The loop's mean point projected back onto the orbit, when the projection
/// is comfortably conditioned (eigen-gaps at least 5% of the orbit's own
/// level gaps); `None` sends the caller to fallback apexes.
fn centroid_base(spec: &OrbitSpec, gamma: &[OrbitPoint]) -> Option<OrbitPoint> {
    let n = spec.dim();
    let count = gamma.len() - 1; // last sample duplicates the first
    let mut mean = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for p in &gamma[..count] {
        mean += p.matrix();
    }
    let centroid = SkewHermitianMatrix::new_unchecked(mean.unscale(count as f64));
    project_to_orbit(spec, &centroid, 0.05 * spec.min_level_gap()).ok()
}

/// κ by the stabilizer-character route: solve the flow and evaluate the
/// character Λ(h) = ∏_j det(h_j)^{m_j} of the base point's stabilizer at
/// the endpoint. Fails with [`Error::NotInStabilizer`] when the endpoint is
/// not block-diagonal.
pub fn kappa_stabilizer(spec: &OrbitSpec, path: &GeneratorPath, num: &Numerics) -> Result<Complex64> {
    let flow = lax_solve(path, num.lax_steps, num.scheme)?;
    kappa_stabilizer_from(spec, &flow)
}

fn kappa_stabilizer_from(spec: &OrbitSpec, flow: &GroupTrajectory) -> Result<Complex64> {
    stabilizer_character(spec, flow.endpoint())
}

/// κ by the Weyl-character route, defined on regular orbits for globally
/// closed loops: the endpoint must be scalar, and κ = χ̄_λ(h(1))/dim λ.
pub fn kappa_weyl(spec: &OrbitSpec, path: &GeneratorPath, num: &Numerics) -> Result<Complex64> {
    let flow = lax_solve(path, num.lax_steps, num.scheme)?;
    kappa_weyl_from(spec, &flow, num)
}

fn kappa_weyl_from(spec: &OrbitSpec, flow: &GroupTrajectory, num: &Numerics) -> Result<Complex64> {
    let weight = highest_weight_of_orbit(spec)?;
    let closure = closure_check(spec, flow, num);
    if closure.scalar.is_none() {
        return Err(Error::NotClosed { residual: closure.residual, tol: num.tol.closure });
    }
    let character = dual_character(&weight, flow.endpoint())?;
    Ok(character / weyl_dimension(&weight) as f64)
}

/// κ by the fixed-point route: `x0` must commute with every generator, so
/// the trajectory is constant and the exponent is the exact pairing of `x0`
/// with the time integral of the path — no quadrature involved.
pub fn kappa_fixed_point(
    spec: &OrbitSpec,
    path: &GeneratorPath,
    x0: &OrbitPoint,
    num: &Numerics,
) -> Result<Complex64> {
    if path.dim() != spec.dim() {
        return Err(Error::validation(format!(
            "path acts on u({}) but the orbit sits in u({})",
            path.dim(),
            spec.dim()
        )));
    }
    let samples = 2 * num.lax_steps.max(8);
    let x_norm = x0.matrix().norm();
    let mut worst: f64 = 0.0;
    for j in 0..=samples {
        let a = path.sample(j as f64 / samples as f64);
        let defect =
            a.commutator(x0.skew()).norm() / (a.norm() * x_norm).max(1.0);
        worst = worst.max(defect);
    }
    if worst > num.tol.fixed_point {
        return Err(Error::NotFixedPoint { commutator_norm: worst, tol: num.tol.fixed_point });
    }
    let total = path.integral();
    Ok(Complex64::from_polar(1.0, -TAU * SIGN_CONVENTION * trace_pairing(x0, &total)))
}

/// All routes side by side for one loop and base point.
#[derive(Debug, Clone)]
pub struct KappaReport {
    /// Direct geometric route at `x0`.
    pub direct: DirectKappaReport,
    /// Stabilizer-character route at the solved endpoint.
    pub stabilizer: Complex64,
    /// Weyl-character route; absent on non-regular orbits and on loops
    /// whose endpoint is not scalar.
    pub weyl: Option<Complex64>,
    /// Fixed-point route at the diagonal base point; absent when the base
    /// point moves under the loop.
    pub fixed_point: Option<Complex64>,
    /// Classification of the solved endpoint.
    pub closure: ClosureReport,
    /// Largest pairwise distance between the routes that were available.
    pub spread: f64,
}

/// Computes every applicable route for the loop, sharing one flow solve.
pub fn kappa_report(
    spec: &OrbitSpec,
    path: &GeneratorPath,
    x0: &OrbitPoint,
    num: &Numerics,
) -> Result<KappaReport> {
    let flow = lax_solve(path, num.lax_steps, num.scheme)?;
    let closure = closure_check(spec, &flow, num);
    let direct = kappa_direct_from(spec, path, x0, &flow, num)?;
    let stabilizer = kappa_stabilizer_from(spec, &flow)?;
    let weyl = match kappa_weyl_from(spec, &flow, num) {
        Ok(v) => Some(v),
        Err(Error::NotRegular { .. }) | Err(Error::NotClosed { .. }) => None,
        Err(e) => return Err(e),
    };
    let fixed_point = match kappa_fixed_point(spec, path, &spec.base_point(), num) {
        Ok(v) => Some(v),
        Err(Error::NotFixedPoint { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut values = vec![direct.value, stabilizer];
    values.extend(weyl.iter().copied());
    values.extend(fixed_point.iter().copied());
    let spread = pairwise_spread(&values);
    Ok(KappaReport { direct, stabilizer, weyl, fixed_point, closure, spread })
}

fn pairwise_spread(values: &[Complex64]) -> f64 {
    let mut spread: f64 = 0.0;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            spread = spread.max((values[i] - values[j]).norm());
        }
    }
    spread
}

/// Direct-route values of one loop at several random base points.
#[derive(Debug, Clone)]
pub struct IndependenceReport {
    /// κ at each probed base point, in probe order.
    pub values: Vec<Complex64>,
    /// Largest pairwise distance between the values.
    pub spread: f64,
    /// The tolerance the spread was compared against.
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks that the direct route gives the same κ from
/// `num.independence_points` random base points, to `num.independence_tol`.
pub fn verify_base_point_independence(
    spec: &OrbitSpec,
    path: &GeneratorPath,
    num: &Numerics,
) -> Result<IndependenceReport> {
    let flow = lax_solve(path, num.lax_steps, num.scheme)?;
    let closure = closure_check(spec, &flow, num);
    if !closure.closed {
        return Err(Error::NotClosed { residual: closure.residual, tol: num.tol.closure });
    }
    let mut values = Vec::with_capacity(num.independence_points);
    for i in 0..num.independence_points {
        let x = spec.random_point(num.seed.wrapping_add(17 * i as u64));
        values.push(kappa_direct_from(spec, path, &x, &flow, num)?.value);
    }
    let spread = pairwise_spread(&values);
    Ok(IndependenceReport { values, spread, tolerance: num.independence_tol, pass: spread < num.independence_tol })
}

/// Multiplicativity of κ under loop concatenation, on two routes.
#[derive(Debug, Clone)]
pub struct ProductReport {
    pub first_direct: Complex64,
    pub second_direct: Complex64,
    pub combined_direct: Complex64,
    /// |κ(ψ·φ) - κ(ψ)κ(φ)| on the direct route.
    pub direct_error: f64,
    pub first_stabilizer: Complex64,
    pub second_stabilizer: Complex64,
    pub combined_stabilizer: Complex64,
    /// Same deviation on the stabilizer route.
    pub stabilizer_error: f64,
    pub pass: bool,
}

/// Checks κ(concat) = κ(first)·κ(second) at `x0`, on the direct route to
/// [`PRODUCT_DIRECT_TOL`] and on the stabilizer route to
/// [`PRODUCT_STABILIZER_TOL`]. The step count must resolve the concatenated
/// breakpoints, i.e. be divisible by twice the original denominators.
pub fn verify_product(
    spec: &OrbitSpec,
    first: &GeneratorPath,
    second: &GeneratorPath,
    x0: &OrbitPoint,
    num: &Numerics,
) -> Result<ProductReport> {
    let combined = GeneratorPath::concatenate(first, second)?;
    let first_direct = kappa_direct(spec, first, x0, num)?.value;
    let second_direct = kappa_direct(spec, second, x0, num)?.value;
    let combined_direct = kappa_direct(spec, &combined, x0, num)?.value;
    let direct_error = (combined_direct - first_direct * second_direct).norm();

    let first_stabilizer = kappa_stabilizer(spec, first, num)?;
    let second_stabilizer = kappa_stabilizer(spec, second, num)?;
    let combined_stabilizer = kappa_stabilizer(spec, &combined, num)?;
    let stabilizer_error = (combined_stabilizer - first_stabilizer * second_stabilizer).norm();

    Ok(ProductReport {
        first_direct,
        second_direct,
        combined_direct,
        direct_error,
        first_stabilizer,
        second_stabilizer,
        combined_stabilizer,
        stabilizer_error,
        pass: direct_error < PRODUCT_DIRECT_TOL && stabilizer_error < PRODUCT_STABILIZER_TOL,
    })
}

/// Invariance of κ under a conjugation deformation of the loop.
#[derive(Debug, Clone)]
pub struct DeformationReport {
    /// Symmetric finite-difference derivative |κ(+ds) - κ(-ds)|/(2 ds) on
    /// the stabilizer route.
    pub stabilizer_derivative: f64,
    /// 2π × the first-variation integral ∫ σ·Re tr(γ(t)·[C, A(t)]) dt at
    /// each probed base point; exactly zero in the limit for closed loops.
    pub boundary_terms: Vec<f64>,
    /// Largest |boundary term|.
    pub max_boundary: f64,
    /// Largest pairwise difference of the boundary terms across base
    /// points.
    pub spread: f64,
    pub pass: bool,
}

/// Deforms the loop by conjugating its generators with exp(s·C) and checks
/// that κ does not move: the finite-difference derivative at `±ds` stays
/// below [`DEFORMATION_FD_TOL`], the first-variation boundary integral
/// vanishes to [`DEFORMATION_BOUNDARY_TOL`] at [`DEFORMATION_PROBES`]
/// random base points, and those integrals agree with each other to
/// [`DEFORMATION_SPREAD_TOL`]. Requires a globally closed loop.
pub fn verify_deformation(
    spec: &OrbitSpec,
    path: &GeneratorPath,
    direction: &SkewHermitianMatrix,
    ds: f64,
    num: &Numerics,
) -> Result<DeformationReport> {
    if !(ds > 0.0) {
        return Err(Error::validation("deformation step must be positive"));
    }
    let flow = lax_solve(path, num.lax_steps, num.scheme)?;
    let closure = closure_check(spec, &flow, num);
    if !closure.closed {
        return Err(Error::NotClosed { residual: closure.residual, tol: num.tol.closure });
    }

    let plus = kappa_stabilizer(spec, &path.conjugated(direction, ds)?, num)?;
    let minus = kappa_stabilizer(spec, &path.conjugated(direction, -ds)?, num)?;
    let stabilizer_derivative = (plus - minus).norm() / (2.0 * ds);

    let mut boundary_terms = Vec::with_capacity(DEFORMATION_PROBES);
    for x in probe_points(spec, DEFORMATION_PROBES, num.seed ^ 0xdef0_12f0) {
        let gamma = trajectory(spec, &x, &flow)?;
        let r = simpson_over_pieces(path, flow.steps(), |k, t_mid| {
            let a = path.sample_in_piece(flow.times[k], t_mid);
            SIGN_CONVENTION * (gamma[k].matrix() * direction.commutator(&a).matrix()).trace().re
        })?;
        boundary_terms.push(TAU * r);
    }
    let max_boundary = boundary_terms.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let mut spread: f64 = 0.0;
    for i in 0..boundary_terms.len() {
        for j in (i + 1)..boundary_terms.len() {
            spread = spread.max((boundary_terms[i] - boundary_terms[j]).abs());
        }
    }
    let pass = stabilizer_derivative < DEFORMATION_FD_TOL
        && max_boundary < DEFORMATION_BOUNDARY_TOL
        && spread < DEFORMATION_SPREAD_TOL;
    Ok(DeformationReport { stabilizer_derivative, boundary_terms, max_boundary, spread, pass })
}
