//! Error type shared by every module of the crate.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building orbits, integrating loops,
/// or evaluating action integrals.
///
/// The variants are grouped by nature: `Validation` means the *input* was
/// malformed (bad dimensions, non-skew matrix, misaligned step grid, ...);
/// the numerical variants mean a well-formed computation failed to meet its
/// tolerance and carry the offending residuals so callers can report them.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Malformed input: dimensions, orderings, matrix structure, parameter
    /// ranges. The message names the violated requirement.
    #[error("validation error: {0}")]
    Validation(String),

    /// An eigendecomposition or related matrix factorization did not
    /// converge. Should essentially never fire on Hermitian input.
    #[error("numerical failure in {context}")]
    NumericalFailure { context: String },

    /// Nearly rank-deficient input where an invertible factor is required
    /// (e.g. the polar projection of a nearly singular matrix).
    #[error("degenerate input: smallest singular value {sigma_min:.3e} below {min_allowed:.3e}")]
    DegenerateInput { sigma_min: f64, min_allowed: f64 },

    /// A matrix claimed to be a point of the orbit has the wrong spectrum.
    #[error("matrix is not on the orbit: spectrum deviation {deviation:.3e} exceeds {tol:.3e}")]
    NotOnOrbit { deviation: f64, tol: f64 },

    /// A matrix claimed to be tangent at a point is not (nonzero component
    /// along the stabilizer block structure).
    #[error("matrix is not tangent at the given point: block residual {residual:.3e} exceeds {tol:.3e}")]
    NotTangent { residual: f64, tol: f64 },

    /// Eigenvalue levels too close for a stable ad-inversion at this point.
    #[error("insufficient spectral gap {gap:.3e} for ad-inversion (needs > {tol:.3e})")]
    SpectralGap { gap: f64, tol: f64 },

    /// Interpolated cap point too close to an eigenvalue collision, so the
    /// spectral projection back to the orbit is ill-defined there.
    #[error("degenerate cap surface at (s, t) = ({s:.4}, {t:.4}): eigenvalue gap {gap:.3e} below {tol:.3e}")]
    CapDegenerate { s: f64, t: f64, gap: f64, tol: f64 },

    /// Grid refinement of the symplectic area stalled above tolerance.
    #[error(
        "area quadrature did not converge: last delta {last_delta:.3e} above tolerance {tol:.3e} \
         after {refinements} refinements"
    )]
    QuadratureNotConverged { last_delta: f64, tol: f64, refinements: usize },

    /// The integrated loop does not return to the identity on the orbit.
    #[error("loop is not closed: orbit residual {residual:.3e} exceeds {tol:.3e}")]
    NotClosed { residual: f64, tol: f64 },

    /// Endpoint of the loop is not block-diagonal with respect to the orbit's
    /// stabilizer, so the stabilizer character is undefined on it. Usually a
    /// symptom of an open loop or a too-coarse integrator.
    #[error(
        "matrix is not in the stabilizer subgroup: off-block mass {off_block:.3e} exceeds {tol:.3e} \
         (is the loop closed? is the step count sufficient?)"
    )]
    NotInStabilizer { off_block: f64, tol: f64 },

    /// Weyl-character route requested on an orbit with repeated eigenvalue
    /// multiplicities (only regular orbits have the full flag picture).
    #[error("orbit is not regular (multiplicities {multiplicities:?}); the Weyl-character route needs all multiplicities equal to 1")]
    NotRegular { multiplicities: Vec<usize> },

    /// Fixed-point route requested at a point the loop actually moves.
    #[error("point is not fixed by the loop: max commutator norm {commutator_norm:.3e} exceeds {tol:.3e}")]
    NotFixedPoint { commutator_norm: f64, tol: f64 },

    /// Internal consistency check failed; indicates a bug, not bad input.
    #[error("internal consistency violation: {0}")]
    Internal(String),
}

impl Error {
    /// Shorthand used by validating constructors.
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
