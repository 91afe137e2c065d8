//! Spanning surfaces for closed loops on an orbit and the quadrature of the
//! symplectic area through them.
//!
//! A closed loop γ on the orbit, given as a dense list of samples, is capped
//! by the surface
//!
//! ```text
//! c(s, t) = Π( (1-σ(s))·x_base + σ(s)·γ_lin(t) ),    σ(s) = 3s² - 2s³,
//! ```
//!
//! where γ_lin is the piecewise-linear interpolation of the samples
//! (wrapping around the seam), the blend happens in the ambient space of
//! skew-Hermitian matrices, and Π projects back to the orbit by replacing
//! the eigenvalues of the blend — sorted descending — with the orbit's
//! spectrum, keeping the eigenvectors. The projection degenerates when two
//! eigenvalues of the blend that belong to different levels collide; this is
//! detected and reported rather than smoothed over, and the caller retries
//! with a different base point.
//!
//! The surface carries the orientation ds∧dt, so its boundary at s = 1 is
//! the loop traversed with t increasing. The symplectic area ∫ ω is computed
//! with a two-triangle rule per grid cell, evaluating ω at the two opposite
//! corners of the cell to cancel the first-order variation across it; grids
//! are doubled until the estimate moves by less than the requested
//! tolerance, and the full convergence table is returned.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{kks_in_eigenbasis, OrbitPoint, OrbitSpec};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::lie::{self, eig_skew_hermitian, SkewHermitianMatrix};

/// Seam mismatch allowed between the first and last loop sample, relative to
/// the point scale.
const SEAM_TOL: f64 = 1e-8;

fn smoothstep(s: f64) -> f64 {
    s * s * (3.0 - 2.0 * s)
}

/// A cap surface spanning a closed loop of orbit points from a base point.
#[derive(Debug, Clone)]
pub struct CapSurface {
    spec: OrbitSpec,
    base: OrbitPoint,
    /// Unique loop samples at times k/M; the wraparound closes the seam.
    points: Vec<DMatrix<Complex64>>,
}

/// One grid point of the quadrature: the projected point and the eigenbasis
/// in which its spectrum is the orbit's descending spectrum.
#[derive(Clone)]
struct PointData {
    p: DMatrix<Complex64>,
    v: DMatrix<Complex64>,
}

impl CapSurface {
    /// Builds the cap over `loop_samples` (which must include the closing
    /// duplicate of the first point) from `base`. The seam is snapped: the
    /// duplicate is dropped and indexing wraps around.
    pub fn new(spec: &OrbitSpec, base: OrbitPoint, loop_samples: &[OrbitPoint]) -> Result<Self> {
        if loop_samples.len() < 4 {
            return Err(Error::validation(
                "cap needs at least 4 loop samples (including the closing duplicate)",
            ));
        }
        if base.dim() != spec.dim() {
            return Err(Error::validation("cap base dimension does not match the orbit"));
        }
        let first = loop_samples.first().unwrap();
        let last = loop_samples.last().unwrap();
        if first.dim() != spec.dim() {
            return Err(Error::validation("loop sample dimension does not match the orbit"));
        }
        let scale = first.matrix().norm().max(1.0);
        let residual = first.distance(last) / scale;
        let tol = SEAM_TOL;
        if residual > tol {
            return Err(Error::NotClosed { residual, tol });
        }
        let points = loop_samples[..loop_samples.len() - 1]
            .iter()
            .map(|p| p.matrix().clone())
            .collect();
        Ok(CapSurface { spec: spec.clone(), base, points })
    }

    /// Number of unique loop samples.
    pub fn samples(&self) -> usize {
        self.points.len()
    }

    /// The base point the cap contracts to at s = 0.
    pub fn base(&self) -> &OrbitPoint {
        &self.base
    }

    /// Periodic Catmull-Rom interpolation of the loop samples. The cubic
    /// passes through the samples with C¹ continuity and its weights sum to
    /// one, so skew-Hermitian samples blend to exactly skew-Hermitian
    /// matrices and the interpolation bias is fourth order in the sample
    /// spacing (piecewise-linear chords would cost two orders).
    fn boundary(&self, t: f64) -> DMatrix<Complex64> {
        let m = self.points.len();
        let u = t.rem_euclid(1.0) * m as f64;
        let k = (u.floor() as usize).min(m - 1);
        let x = u - k as f64;
        let at = |offset: isize| -> &DMatrix<Complex64> {
            let idx = (k as isize + offset).rem_euclid(m as isize) as usize;
            &self.points[idx]
        };
        let w0 = 0.5 * (-x + 2.0 * x * x - x * x * x);
        let w1 = 0.5 * (2.0 - 5.0 * x * x + 3.0 * x * x * x);
        let w2 = 0.5 * (x + 4.0 * x * x - 3.0 * x * x * x);
        let w3 = 0.5 * (-x * x + x * x * x);
        at(-1) * Complex64::new(w0, 0.0)
            + at(0) * Complex64::new(w1, 0.0)
            + at(1) * Complex64::new(w2, 0.0)
            + at(2) * Complex64::new(w3, 0.0)
    }

    /// Evaluates the surface with its spectral data, checking the collision
    /// gap between distinct levels of the blend.
    fn eval_data(
        &self,
        s: f64,
        t: f64,
        lambda: &[f64],
        groups: &[usize],
        gap_tol: f64,
    ) -> Result<PointData> {
        self.eval_data_with_boundary(s, t, &self.boundary(t), lambda, groups, gap_tol)
    }

    /// [`CapSurface::eval_data`] with the boundary value supplied by the
    /// caller; the quadrature caches it per t-column since it does not
    /// depend on s.
    fn eval_data_with_boundary(
        &self,
        s: f64,
        t: f64,
        boundary: &DMatrix<Complex64>,
        lambda: &[f64],
        groups: &[usize],
        gap_tol: f64,
    ) -> Result<PointData> {
        let sigma = smoothstep(s.clamp(0.0, 1.0));
        let blend = self.base.matrix() * Complex64::new(1.0 - sigma, 0.0)
            + boundary * Complex64::new(sigma, 0.0);
        let eig = eig_skew_hermitian(&SkewHermitianMatrix::new_unchecked(blend))?;
        for j in 1..lambda.len() {
            if groups[j - 1] != groups[j] {
                let gap = eig.imag_parts[j - 1] - eig.imag_parts[j];
                if gap < gap_tol {
                    return Err(Error::CapDegenerate { s, t, gap, tol: gap_tol });
                }
            }
        }
        let target = DVector::from_iterator(lambda.len(), lambda.iter().map(|&d| lie::I * d));
        let p = &eig.vectors * DMatrix::from_diagonal(&target) * eig.vectors.adjoint();
        Ok(PointData { p, v: eig.vectors })
    }

    /// Evaluates the surface at (s, t) as an orbit point.
    pub fn eval(&self, s: f64, t: f64) -> Result<OrbitPoint> {
        let lambda = self.spec.spectrum_desc();
        let groups = self.spec.group_ids_desc();
        let data = self.eval_data(s, t, &lambda, &groups, Tolerances::default().cap_gap)?;
        Ok(OrbitPoint::new_unchecked(SkewHermitianMatrix::new_unchecked(data.p)))
    }
}

/// One refinement level of the area quadrature.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    /// (s-subdivisions, t-subdivisions) of this level.
    pub grid: (usize, usize),
    /// Area estimate on this grid.
    pub estimate: f64,
    /// Absolute change from the previous level (absent on the first).
    pub delta: Option<f64>,
}

/// Converged symplectic area together with its refinement history.
#[derive(Debug, Clone)]
pub struct AreaEstimate {
    /// Accepted area: the Richardson extrapolation of the last two raw grid
    /// estimates, which cancels the quadrature's leading h² error.
    pub area: f64,
    /// Raw per-grid estimates and their successive differences.
    pub table: Vec<ConvergenceRow>,
}

/// Integrates ω over the cap, doubling the grid until two consecutive
/// Richardson-extrapolated estimates agree to `tol`; the raw grid values
/// converge at second order, so the extrapolant (4·E_{2h→h} - E_{2h})/3
/// gains two orders and stops the ladder much earlier. `max_refine` bounds
/// the number of doublings beyond the initial grid; exhausting them raises
/// [`Error::QuadratureNotConverged`].
pub fn symplectic_area(
    cap: &CapSurface,
    initial_grid: (usize, usize),
    tol: f64,
    max_refine: usize,
) -> Result<AreaEstimate> {
    let (ns0, nt0) = initial_grid;
    if ns0 < 2 || nt0 < 4 {
        return Err(Error::validation("area grid must be at least 2 x 4"));
    }
    if !(tol > 0.0) {
        return Err(Error::validation("area tolerance must be positive"));
    }
    let lambda = cap.spec.spectrum_desc();
    let groups = cap.spec.group_ids_desc();
    let gap_tol = Tolerances::default().cap_gap;

    let mut table: Vec<ConvergenceRow> = Vec::with_capacity(max_refine + 1);
    let (mut ns, mut nt) = (ns0, nt0);
    let mut prev_raw: Option<f64> = None;
    let mut prev_delta: Option<f64> = None;
    let mut prev_extrapolated: Option<f64> = None;
    let mut last_delta = f64::INFINITY;
    let mut stalled = 0usize;
    for level in 0..=max_refine {
        let estimate = area_on_grid(cap, ns, nt, &lambda, &groups, gap_tol)?;
        let delta = prev_raw.map(|p| (estimate - p).abs());
        table.push(ConvergenceRow { grid: (ns, nt), estimate, delta });
        let extrapolated = match prev_raw {
            Some(p) => estimate + (estimate - p) / 3.0,
            None => estimate,
        };
        if let (Some(pe), Some(_)) = (prev_extrapolated, delta) {
            last_delta = (extrapolated - pe).abs();
            if last_delta < tol {
                return Ok(AreaEstimate { area: extrapolated, table });
            }
        }
        // A healthy second-order ladder quarters its deltas per doubling.
        // Two consecutive doublings that shrink them by less than about half
        // mean this cap is too ill-conditioned to be worth refining further;
        // fail early so the caller can recap from a different apex.
        if let (Some(d), Some(pd)) = (delta, prev_delta) {
            if d > 4.0 * tol && d > 0.45 * pd {
                stalled += 1;
                if stalled >= 2 {
                    return Err(Error::QuadratureNotConverged {
                        last_delta: d,
                        tol,
                        refinements: level,
                    });
                }
            } else {
                stalled = 0;
            }
        }
        prev_raw = Some(estimate);
        prev_delta = delta;
        prev_extrapolated = Some(extrapolated);
        if level < max_refine {
            ns *= 2;
            nt *= 2;
        }
    }
    Err(Error::QuadratureNotConverged { last_delta, tol, refinements: max_refine })
}

/// Single-grid estimate: per cell, a triangle at the lower-left corner and
/// one at the upper-right corner, each contributing ω(edge, edge)/2 with the
/// edges ordered so both triangles inherit the ds∧dt orientation.
fn area_on_grid(
    cap: &CapSurface,
    ns: usize,
    nt: usize,
    lambda: &[f64],
    groups: &[usize],
    gap_tol: f64,
) -> Result<f64> {
    let boundaries: Vec<DMatrix<Complex64>> =
        (0..nt).map(|j| cap.boundary(j as f64 / nt as f64)).collect();
    let row = |i: usize| -> Result<Vec<PointData>> {
        if i == 0 {
            // The s = 0 row is the base point for every t.
            let pd = cap.eval_data(0.0, 0.0, lambda, groups, gap_tol)?;
            return Ok(vec![pd; nt]);
        }
        let s = i as f64 / ns as f64;
        (0..nt)
            .map(|j| {
                cap.eval_data_with_boundary(
                    s,
                    j as f64 / nt as f64,
                    &boundaries[j],
                    lambda,
                    groups,
                    gap_tol,
                )
            })
            .collect()
    };

    let mut below = row(0)?;
    let mut total = 0.0;
    for i in 0..ns {
        let above = row(i + 1)?;
        for j in 0..nt {
            let jn = (j + 1) % nt;
            let p00 = &below[j];
            let p10 = &above[j];
            let p01 = &below[jn];
            let p11 = &above[jn];

            // Triangle (P00, P10, P11) evaluated at P00.
            let u = &p10.p - &p00.p;
            let v = &p11.p - &p00.p;
            let ub = p00.v.adjoint() * &u * &p00.v;
            let vb = p00.v.adjoint() * &v * &p00.v;
            total += 0.5 * kks_in_eigenbasis(lambda, groups, &ub, &vb);

            // Triangle (P11, P01, P00) evaluated at P11.
            let u = &p01.p - &p11.p;
            let v = &p00.p - &p11.p;
            let ub = p11.v.adjoint() * &u * &p11.v;
            let vb = p11.v.adjoint() * &v * &p11.v;
            total += 0.5 * kks_in_eigenbasis(lambda, groups, &ub, &vb);
        }
        below = above;
    }
    Ok(total)
}
