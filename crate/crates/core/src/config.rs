//! Numerical configuration: step counts, grids, tolerances.
//!
//! Every routine that needs a knob reads it from [`Numerics`], so a single
//! record pins the whole pipeline. The defaults are the tested desk-scale
//! settings; scenario files and the CLI may override the public fields.

/// Time-stepping scheme used by the Lax solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Fourth-order two-node Gauss Magnus step (default).
    #[default]
    GaussFourth,
    /// Second-order midpoint Magnus step, kept for convergence cross-checks.
    Midpoint,
}

impl Scheme {
    /// Classical convergence order of the scheme.
    pub fn order(self) -> u8 {
        match self {
            Scheme::GaussFourth => 4,
            Scheme::Midpoint => 2,
        }
    }
}

/// Structural tolerances for the matrix types and geometric predicates.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Frobenius-relative skew-Hermitian symmetry defect.
    pub skew: f64,
    /// Frobenius defect of U†U - I accepted by the unitary constructor.
    pub unitary: f64,
    /// Allowed deviation of a point's spectrum from the orbit's spectrum.
    pub spectrum: f64,
    /// Allowed stabilizer-block mass of a tangent vector.
    pub tangent: f64,
    /// Minimal eigenvalue gap between distinct orbit levels for ad-inversion.
    pub eigen_gap: f64,
    /// Minimal eigenvalue gap of cap interpolants before the spectral
    /// projection is declared degenerate.
    pub cap_gap: f64,
    /// Orbit residual below which a loop counts as closed.
    pub closure: f64,
    /// Off-block mass below which a unitary counts as a stabilizer element.
    pub stabilizer: f64,
    /// Commutator norm below which a point counts as fixed by a loop.
    pub fixed_point: f64,
    /// Distance to the integer lattice accepted by the vertex check.
    pub vertex: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            skew: 1e-12,
            unitary: 1e-10,
            spectrum: 1e-8,
            tangent: 1e-8,
            eigen_gap: 1e-8,
            cap_gap: 1e-6,
            closure: 1e-6,
            stabilizer: 1e-8,
            fixed_point: 1e-9,
            vertex: 1e-9,
        }
    }
}

/// The single knob record threaded through the pipeline.
#[derive(Debug, Clone)]
pub struct Numerics {
    /// Uniform step count of the Lax solver (trajectory grid has
    /// `lax_steps + 1` samples). Must be even so the Simpson pass works.
    pub lax_steps: usize,
    /// Initial cap grid (s-subdivisions, t-subdivisions) for the area
    /// quadrature before refinement.
    pub cap_grid: (usize, usize),
    /// Stop refining the area once successive totals differ by less
    /// than this.
    pub quad_tol: f64,
    /// Maximum number of grid doublings before giving up.
    pub max_refine: usize,
    /// Seed driving every random choice (base points, probes, retries), so
    /// runs are reproducible.
    pub seed: u64,
    /// Lax stepping scheme.
    pub scheme: Scheme,
    /// Number of random base points for the independence check.
    pub independence_points: usize,
    /// Maximum spread accepted by the independence check.
    pub independence_tol: f64,
    /// Number of random orbit points probed by the closure check.
    pub closure_probes: usize,
    /// How many random bases to try when a cap comes out degenerate.
    pub cap_attempts: usize,
    /// Structural tolerances.
    pub tol: Tolerances,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            lax_steps: 1024,
            cap_grid: (64, 256),
            quad_tol: 1e-6,
            max_refine: 6,
            seed: 7,
            scheme: Scheme::GaussFourth,
            independence_points: 10,
            independence_tol: 1e-4,
            closure_probes: 4,
            cap_attempts: 5,
            tol: Tolerances::default(),
        }
    }
}

impl Numerics {
    /// Defaults with a different seed; handy in tests and sweeps.
    pub fn with_seed(seed: u64) -> Self {
        Numerics { seed, ..Numerics::default() }
    }
}
