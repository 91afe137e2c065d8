//! Time-dependent generators, the group-level Lax solver, and loop closure.
//!
//! A loop of Hamiltonian diffeomorphisms of the orbit is described upstairs,
//! in the group: a path of skew-Hermitian generators t ↦ A(t) determines the
//! solution h(t) of
//!
//! ```text
//! dh/dt · h⁻¹ = A(t),    h(0) = 1,
//! ```
//!
//! and the induced trajectory of a point x₀ is γ(t) = h(t)·x₀·h(t)†. The
//! generator path is a sum of standard coefficient shapes (constants,
//! integer-harmonic cosines and sines, piecewise constants) attached to
//! fixed generators, glued over consecutive time segments. Segments are
//! parameterized on their own unit interval and contribute A = c(τ)·B/Δt,
//! so concatenating paths rescales rates automatically and the integral
//! ∫₀¹ A dt of each shape is available in closed form.
//!
//! The solver takes Magnus steps: per time step either the two-node Gauss
//! step of order four,
//!
//! ```text
//! Ω = Δ/2·(A₁+A₂) + √3·Δ²/12·[A₂, A₁],    h ← exp(Ω)·h,
//! ```
//!
//! or the midpoint step of order two. Both stay in the group exactly up to
//! rounding; the maximal unitarity defect along the way is reported as
//! `drift`. Coefficient jumps must land on even grid indices so that the
//! composite Simpson rule used for time integrals never straddles a
//! discontinuity.

use num_complex::Complex64;

use crate::config::{Numerics, Scheme};
use crate::error::{Error, Result};
use crate::lie::{expm_skew, SkewHermitianMatrix, UnitaryMatrix};
use crate::orbit::{probe_points, OrbitPoint, OrbitSpec};

/// Two breakpoints closer than this coincide.
const BREAKPOINT_MERGE: f64 = 1e-12;

/// A scalar coefficient shape on the unit interval of one segment.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    /// c(τ) = a.
    Constant(f64),
    /// c(τ) = a·cos(2πkτ), k ≥ 1.
    Cosine { harmonic: u32, amplitude: f64 },
    /// c(τ) = a·sin(2πkτ), k ≥ 1.
    Sine { harmonic: u32, amplitude: f64 },
    /// Constant values on equal sub-intervals of the segment.
    PiecewiseConstant(Vec<f64>),
}

impl Coefficient {
    fn validate(&self) -> Result<()> {
        match self {
            Coefficient::Cosine { harmonic: 0, .. } | Coefficient::Sine { harmonic: 0, .. } => {
                Err(Error::validation("oscillating coefficients need harmonic >= 1"))
            }
            Coefficient::PiecewiseConstant(v) if v.is_empty() => {
                Err(Error::validation("piecewise coefficient needs at least one value"))
            }
            _ => Ok(()),
        }
    }

    /// Value at local time τ; at a jump of a piecewise shape, `tau_resolve`
    /// (usually the midpoint of the enclosing smooth piece) picks the side.
    fn eval_resolved(&self, tau: f64, tau_resolve: f64) -> f64 {
        match self {
            Coefficient::Constant(a) => *a,
            Coefficient::Cosine { harmonic, amplitude } => {
                amplitude * (std::f64::consts::TAU * *harmonic as f64 * tau).cos()
            }
            Coefficient::Sine { harmonic, amplitude } => {
                amplitude * (std::f64::consts::TAU * *harmonic as f64 * tau).sin()
            }
            Coefficient::PiecewiseConstant(v) => {
                let idx = ((tau_resolve.clamp(0.0, 1.0) * v.len() as f64).floor() as usize)
                    .min(v.len() - 1);
                v[idx]
            }
        }
    }

    /// Value at local time τ (right-continuous at jumps).
    pub fn eval(&self, tau: f64) -> f64 {
        self.eval_resolved(tau, tau)
    }

    /// Local times in (0, 1) where the shape jumps.
    fn breakpoints_local(&self) -> Vec<f64> {
        match self {
            Coefficient::PiecewiseConstant(v) if v.len() > 1 => {
                (1..v.len()).map(|j| j as f64 / v.len() as f64).collect()
            }
            _ => Vec::new(),
        }
    }

    /// ∫₀¹ c(τ) dτ in closed form: whole cosine and sine harmonics vanish,
    /// piecewise constants average.
    pub fn integral_unit(&self) -> f64 {
        match self {
            Coefficient::Constant(a) => *a,
            Coefficient::Cosine { .. } | Coefficient::Sine { .. } => 0.0,
            Coefficient::PiecewiseConstant(v) => v.iter().sum::<f64>() / v.len() as f64,
        }
    }
}

/// One coefficient shape attached to one fixed generator.
#[derive(Debug, Clone)]
pub struct PathTerm {
    pub coefficient: Coefficient,
    pub generator: SkewHermitianMatrix,
}

/// A span [t0, t1] of the loop parameter with its own unit-interval terms.
#[derive(Debug, Clone)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub terms: Vec<PathTerm>,
}

impl Segment {
    fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    /// A at local time τ, including the 1/Δt reparameterization factor.
    fn sample_resolved(&self, dim: usize, tau: f64, tau_resolve: f64) -> SkewHermitianMatrix {
        let mut total = SkewHermitianMatrix::zeros(dim);
        for term in &self.terms {
            let c = term.coefficient.eval_resolved(tau, tau_resolve);
            if c != 0.0 {
                total = &total + &term.generator.scaled(c);
            }
        }
        total.scaled(1.0 / self.duration())
    }
}

/// A generator path t ↦ A(t) on [0, 1], glued from segments.
#[derive(Debug, Clone)]
pub struct GeneratorPath {
    segments: Vec<Segment>,
    dim: usize,
}

impl GeneratorPath {
    /// Validates the segment cover (\[0,1\], contiguous, positive durations),
    /// the coefficient shapes, and generator dimensions.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::validation("generator path needs at least one segment"));
        }
        if segments[0].t0.abs() > BREAKPOINT_MERGE {
            return Err(Error::validation("first segment must start at t = 0"));
        }
        if (segments.last().unwrap().t1 - 1.0).abs() > BREAKPOINT_MERGE {
            return Err(Error::validation("last segment must end at t = 1"));
        }
        for w in segments.windows(2) {
            if (w[0].t1 - w[1].t0).abs() > BREAKPOINT_MERGE {
                return Err(Error::validation(format!(
                    "segments must be contiguous: gap between t = {} and t = {}",
                    w[0].t1, w[1].t0
                )));
            }
        }
        let mut dim = None;
        for seg in &segments {
            if seg.duration() < 1e-9 {
                return Err(Error::validation("segment durations must be positive"));
            }
            for term in &seg.terms {
                term.coefficient.validate()?;
                let d = term.generator.dim();
                match dim {
                    None => dim = Some(d),
                    Some(existing) if existing != d => {
                        return Err(Error::validation(format!(
                            "generator dimensions differ: {existing} vs {d}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        let dim = dim.ok_or_else(|| {
            Error::validation("generator path needs at least one term to fix the dimension")
        })?;
        Ok(GeneratorPath { segments, dim })
    }

    /// The constant path A(t) = b.
    pub fn constant(b: SkewHermitianMatrix) -> GeneratorPath {
        let dim = b.dim();
        GeneratorPath {
            segments: vec![Segment {
                t0: 0.0,
                t1: 1.0,
                terms: vec![PathTerm { coefficient: Coefficient::Constant(1.0), generator: b }],
            }],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn segment_index_for(&self, t: f64) -> usize {
        let t = t.clamp(0.0, 1.0);
        self.segments
            .iter()
            .rposition(|seg| seg.t0 <= t + BREAKPOINT_MERGE)
            .unwrap_or(0)
    }

    /// A(t), right-continuous at jumps.
    pub fn sample(&self, t: f64) -> SkewHermitianMatrix {
        self.sample_in_piece(t, t)
    }

    /// A(t) with jump sides resolved by `t_resolve`, a time strictly inside
    /// the smooth piece the caller is working on (typically its midpoint);
    /// one-sided limits at piece boundaries come out right this way.
    pub fn sample_in_piece(&self, t: f64, t_resolve: f64) -> SkewHermitianMatrix {
        let seg = &self.segments[self.segment_index_for(t_resolve)];
        let tau = ((t - seg.t0) / seg.duration()).clamp(0.0, 1.0);
        let tau_resolve = ((t_resolve - seg.t0) / seg.duration()).clamp(0.0, 1.0);
        seg.sample_resolved(self.dim, tau, tau_resolve)
    }

    /// All times where A may jump or lose smoothness, including 0 and 1:
    /// segment boundaries and piecewise-constant jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0];
        for seg in &self.segments {
            for term in &seg.terms {
                for local in term.coefficient.breakpoints_local() {
                    pts.push(seg.t0 + local * seg.duration());
                }
            }
            pts.push(seg.t1);
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < BREAKPOINT_MERGE);
        pts
    }

    /// ∫₀¹ A(t) dt, exact: the unit-interval integrals of the coefficient
    /// shapes are closed-form and the reparameterization factors cancel.
    pub fn integral(&self) -> SkewHermitianMatrix {
        let mut total = SkewHermitianMatrix::zeros(self.dim);
        for seg in &self.segments {
            for term in &seg.terms {
                let c = term.coefficient.integral_unit();
                if c != 0.0 {
                    total = &total + &term.generator.scaled(c);
                }
            }
        }
        total
    }

    /// The path running `first` on [0, 1/2] and `second` on [1/2, 1]. The
    /// endpoint of the solved flow is h_second(1)·h_first(1).
    pub fn concatenate(first: &GeneratorPath, second: &GeneratorPath) -> Result<GeneratorPath> {
        if first.dim != second.dim {
            return Err(Error::validation("cannot concatenate paths of different dimension"));
        }
        let mut segments = Vec::with_capacity(first.segments.len() + second.segments.len());
        for seg in &first.segments {
            segments.push(Segment { t0: seg.t0 / 2.0, t1: seg.t1 / 2.0, terms: seg.terms.clone() });
        }
        for seg in &second.segments {
            segments.push(Segment {
                t0: 0.5 + seg.t0 / 2.0,
                t1: 0.5 + seg.t1 / 2.0,
                terms: seg.terms.clone(),
            });
        }
        GeneratorPath::new(segments)
    }

    /// The path with every generator conjugated by exp(s·C); the solved flow
    /// and all trajectories conjugate along.
    pub fn conjugated(&self, c: &SkewHermitianMatrix, s: f64) -> Result<GeneratorPath> {
        let u = expm_skew(&c.scaled(s))?;
        let segments = self
            .segments
            .iter()
            .map(|seg| Segment {
                t0: seg.t0,
                t1: seg.t1,
                terms: seg
                    .terms
                    .iter()
                    .map(|term| PathTerm {
                        coefficient: term.coefficient.clone(),
                        generator: term.generator.conjugated_by(&u),
                    })
                    .collect(),
            })
            .collect();
        Ok(GeneratorPath { segments, dim: self.dim })
    }
}

/// Grid indices of the path's breakpoints on a uniform grid of `steps`
/// intervals. Every breakpoint must land on an even index (so Simpson
/// subdivisions never straddle a jump); otherwise the step count is
/// rejected with a hint.
pub fn breakpoint_grid_indices(path: &GeneratorPath, steps: usize) -> Result<Vec<usize>> {
    if steps < 2 || steps % 2 != 0 {
        return Err(Error::validation("step count must be even and at least 2"));
    }
    let mut indices = Vec::new();
    for b in path.breakpoints() {
        let exact = b * steps as f64;
        let rounded = exact.round();
        if (exact - rounded).abs() > 1e-6 {
            return Err(Error::validation(format!(
                "breakpoint at t = {b} falls between grid points at {steps} steps; \
                 pick a step count divisible by the breakpoint denominators"
            )));
        }
        let idx = rounded as usize;
        if idx % 2 != 0 {
            return Err(Error::validation(format!(
                "breakpoint at t = {b} lands on odd grid index {idx} at {steps} steps; \
                 double the step count"
            )));
        }
        indices.push(idx);
    }
    Ok(indices)
}

/// Composite Simpson integral of f over [0, 1] on `steps` intervals,
/// split at the path's breakpoints so each pass sees a smooth integrand.
/// `f(k, t_mid)` must return the value at grid time k/steps, resolving any
/// jump there toward the smooth piece with midpoint `t_mid`.
pub fn simpson_over_pieces(
    path: &GeneratorPath,
    steps: usize,
    mut f: impl FnMut(usize, f64) -> f64,
) -> Result<f64> {
    let bounds = breakpoint_grid_indices(path, steps)?;
    let dt = 1.0 / steps as f64;
    let mut total = 0.0;
    for w in bounds.windows(2) {
        let (k0, k1) = (w[0], w[1]);
        if k1 <= k0 {
            continue;
        }
        let t_mid = 0.5 * (k0 + k1) as f64 * dt;
        let mut piece = f(k0, t_mid) + f(k1, t_mid);
        for k in (k0 + 1)..k1 {
            let weight = if (k - k0) % 2 == 1 { 4.0 } else { 2.0 };
            piece += weight * f(k, t_mid);
        }
        total += piece * dt / 3.0;
    }
    Ok(total)
}

/// The solved flow h(t) on the uniform grid, with its scheme order and the
/// worst unitarity defect seen along the way.
#[derive(Debug, Clone)]
pub struct GroupTrajectory {
    pub times: Vec<f64>,
    pub samples: Vec<UnitaryMatrix>,
    pub order: u8,
    pub drift: f64,
}

impl GroupTrajectory {
    pub fn steps(&self) -> usize {
        self.samples.len() - 1
    }

    /// h(1), the loop's endpoint in the group.
    pub fn endpoint(&self) -> &UnitaryMatrix {
        self.samples.last().unwrap()
    }
}

/// Solves dh/dt·h⁻¹ = A(t), h(0) = 1 with Magnus steps on a uniform grid.
pub fn lax_solve(path: &GeneratorPath, steps: usize, scheme: Scheme) -> Result<GroupTrajectory> {
    breakpoint_grid_indices(path, steps)?;
    let n = path.dim();
    let dt = 1.0 / steps as f64;
    let sqrt3 = 3.0_f64.sqrt();
    let (c1, c2) = (0.5 - sqrt3 / 6.0, 0.5 + sqrt3 / 6.0);

    let mut h = UnitaryMatrix::identity(n);
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(h.clone());
    let mut drift: f64 = 0.0;
    for k in 0..steps {
        let t = k as f64 * dt;
        let omega = match scheme {
            Scheme::GaussFourth => {
                let a1 = path.sample(t + c1 * dt);
                let a2 = path.sample(t + c2 * dt);
                let linear = (&a1 + &a2).scaled(0.5 * dt);
                let bracket = a2.commutator(&a1).scaled(sqrt3 * dt * dt / 12.0);
                &linear + &bracket
            }
            Scheme::Midpoint => path.sample(t + 0.5 * dt).scaled(dt),
        };
        h = expm_skew(&omega)?.compose(&h);
        drift = drift.max(h.unitarity_defect());
        samples.push(h.clone());
    }
    let times = (0..=steps).map(|k| k as f64 * dt).collect();
    Ok(GroupTrajectory { times, samples, order: scheme.order(), drift })
}

/// The orbit trajectory γ(t_k) = h(t_k)·x₀·h(t_k)†, validated to stay on
/// the orbit (a failure here indicates solver breakdown, not bad input).
pub fn trajectory(
    spec: &OrbitSpec,
    x0: &OrbitPoint,
    flow: &GroupTrajectory,
) -> Result<Vec<OrbitPoint>> {
    flow.samples
        .iter()
        .map(|h| {
            let p = x0.conjugated_by(h);
            OrbitPoint::new(spec, p.skew().clone()).map_err(|e| {
                Error::Internal(format!("solved trajectory left the orbit: {e}"))
            })
        })
        .collect()
}

/// What the endpoint h(1) does to the orbit.
#[derive(Debug, Clone)]
pub struct ClosureReport {
    /// Worst relative displacement ‖h₁·x·h₁† - x‖/‖x‖ over random probes.
    pub residual: f64,
    /// True when the residual is below the closure tolerance, i.e. the loop
    /// closes at every point of the orbit.
    pub closed: bool,
    /// The central value when h₁ is a scalar matrix (the generic closed
    /// case), normalized to the unit circle.
    pub scalar: Option<Complex64>,
    /// True when h₁ is block-diagonal for the base point's blocks, i.e.
    /// stabilizes the diagonal base point even if the loop is open
    /// elsewhere.
    pub block_diagonal: bool,
}

/// Probes the endpoint of a solved flow against random orbit points and
/// classifies it (central, merely block-diagonal, or open).
pub fn closure_check(spec: &OrbitSpec, flow: &GroupTrajectory, num: &Numerics) -> ClosureReport {
    let h1 = flow.endpoint();
    let n = spec.dim();

    let mut residual: f64 = 0.0;
    for p in probe_points(spec, num.closure_probes, num.seed ^ 0xc1_05_0e_5eed) {
        let moved = p.conjugated_by(h1);
        residual = residual.max(moved.distance(&p) / p.matrix().norm().max(1.0));
    }
    let closed = residual < num.tol.closure;

    let mean = h1.matrix().trace() / Complex64::new(n as f64, 0.0);
    let eye = nalgebra::DMatrix::<Complex64>::identity(n, n);
    let scalar_dev = (h1.matrix() - eye * mean).norm();
    let scalar = if scalar_dev < num.tol.stabilizer * (n as f64).sqrt() && mean.norm() > 0.5 {
        Some(mean / mean.norm())
    } else {
        None
    };

    let mut off_block = 0.0;
    let ranges = spec.block_ranges();
    for (bi, ri) in ranges.iter().enumerate() {
        for (bj, rj) in ranges.iter().enumerate() {
            if bi != bj {
                for r in ri.clone() {
                    for c in rj.clone() {
                        off_block += h1.matrix()[(r, c)].norm_sqr();
                    }
                }
            }
        }
    }
    let block_diagonal = off_block.sqrt() < num.tol.stabilizer;

    ClosureReport { residual, closed, scalar, block_diagonal }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{self, random_skew_hermitian};
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// E = π·diag(i, -i): the half-turn loop whose endpoint is -1.
    fn half_turn() -> GeneratorPath {
        let e = SkewHermitianMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(0.0, PI),
            c(0.0, -PI),
        ])))
        .unwrap();
        GeneratorPath::constant(e)
    }

    /// A(t) = cos(2πt)·B₁ + sin(2πt)·B₂ with non-commuting B's.
    fn fourier_pair(seed: u64) -> GeneratorPath {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b1 = random_skew_hermitian(2, &mut rng);
        let b2 = random_skew_hermitian(2, &mut rng);
        GeneratorPath::new(vec![Segment {
            t0: 0.0,
            t1: 1.0,
            terms: vec![
                PathTerm {
                    coefficient: Coefficient::Cosine { harmonic: 1, amplitude: 1.0 },
                    generator: b1,
                },
                PathTerm {
                    coefficient: Coefficient::Sine { harmonic: 1, amplitude: 1.0 },
                    generator: b2,
                },
            ],
        }])
        .unwrap()
    }

    #[test]
    fn coefficient_shapes_evaluate_and_integrate() {
        let cos2 = Coefficient::Cosine { harmonic: 1, amplitude: 2.0 };
        assert!((cos2.eval(0.0) - 2.0).abs() < 1e-15);
        assert!(cos2.eval(0.25).abs() < 1e-15);
        assert!((cos2.eval(0.5) + 2.0).abs() < 1e-15);
        assert_eq!(cos2.integral_unit(), 0.0);

        let sin3 = Coefficient::Sine { harmonic: 3, amplitude: 1.0 };
        assert!((sin3.eval(1.0 / 12.0) - 1.0).abs() < 1e-12);
        assert_eq!(sin3.integral_unit(), 0.0);

        let pw = Coefficient::PiecewiseConstant(vec![1.0, -2.0, 4.0]);
        assert_eq!(pw.eval(0.1), 1.0);
        assert_eq!(pw.eval(0.5), -2.0);
        assert_eq!(pw.eval(0.99), 4.0);
        assert!((pw.integral_unit() - 1.0).abs() < 1e-15);
        assert_eq!(pw.breakpoints_local().len(), 2);

        assert!(Coefficient::Cosine { harmonic: 0, amplitude: 1.0 }.validate().is_err());
        assert!(Coefficient::PiecewiseConstant(vec![]).validate().is_err());
    }

    #[test]
    fn path_construction_is_validated() {
        let b = || SkewHermitianMatrix::zeros(2);
        let term = |gen: SkewHermitianMatrix| PathTerm {
            coefficient: Coefficient::Constant(1.0),
            generator: gen,
        };
        // Gap between segments.
        assert!(GeneratorPath::new(vec![
            Segment { t0: 0.0, t1: 0.4, terms: vec![term(b())] },
            Segment { t0: 0.6, t1: 1.0, terms: vec![term(b())] },
        ])
        .is_err());
        // Not ending at 1.
        assert!(GeneratorPath::new(vec![Segment { t0: 0.0, t1: 0.9, terms: vec![term(b())] }])
            .is_err());
        // Mixed dimensions.
        assert!(GeneratorPath::new(vec![Segment {
            t0: 0.0,
            t1: 1.0,
            terms: vec![term(SkewHermitianMatrix::zeros(2)), term(SkewHermitianMatrix::zeros(3))],
        }])
        .is_err());
    }

    #[test]
    fn segment_rates_scale_with_duration() {
        // The same unit shape squeezed into half the time runs twice as fast.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = random_skew_hermitian(2, &mut rng);
        let term = PathTerm { coefficient: Coefficient::Constant(1.0), generator: b.clone() };
        let path = GeneratorPath::new(vec![
            Segment { t0: 0.0, t1: 0.5, terms: vec![term.clone()] },
            Segment { t0: 0.5, t1: 1.0, terms: vec![term] },
        ])
        .unwrap();
        let a = path.sample(0.25);
        assert!((a.matrix() - b.matrix().scale(2.0)).norm() < 1e-14);
        // The exact integral accumulates both segments at unit weight.
        assert!((path.integral().matrix() - (b.matrix() * c(2.0, 0.0))).norm() < 1e-14);
    }

    #[test]
    fn piecewise_jumps_resolve_by_piece() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_skew_hermitian(2, &mut rng);
        let path = GeneratorPath::new(vec![Segment {
            t0: 0.0,
            t1: 1.0,
            terms: vec![PathTerm {
                coefficient: Coefficient::PiecewiseConstant(vec![1.0, -1.0]),
                generator: b.clone(),
            }],
        }])
        .unwrap();
        // At the jump t = 1/2 the two one-sided samples disagree by 2B.
        let left = path.sample_in_piece(0.5, 0.25);
        let right = path.sample_in_piece(0.5, 0.75);
        assert!((left.matrix() - b.matrix()).norm() < 1e-14);
        assert!((right.matrix() + b.matrix()).norm() < 1e-14);
        let bps = path.breakpoints();
        assert_eq!(bps.len(), 3);
        assert!((bps[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_alignment_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = random_skew_hermitian(2, &mut rng);
        let thirds = GeneratorPath::new(vec![Segment {
            t0: 0.0,
            t1: 1.0,
            terms: vec![PathTerm {
                coefficient: Coefficient::PiecewiseConstant(vec![1.0, 0.5, -0.5]),
                generator: b.clone(),
            }],
        }])
        .unwrap();
        // 1024 is not divisible by 3: jumps fall between grid points.
        assert!(breakpoint_grid_indices(&thirds, 1024).is_err());
        // 96 puts the jumps on even indices 32 and 64.
        assert_eq!(breakpoint_grid_indices(&thirds, 96).unwrap(), vec![0, 32, 64, 96]);
        // A segment boundary on an odd index is rejected too.
        let halves = GeneratorPath::new(vec![
            Segment {
                t0: 0.0,
                t1: 0.5,
                terms: vec![PathTerm {
                    coefficient: Coefficient::Constant(1.0),
                    generator: b.clone(),
                }],
            },
            Segment {
                t0: 0.5,
                t1: 1.0,
                terms: vec![PathTerm { coefficient: Coefficient::Constant(1.0), generator: b }],
            },
        ])
        .unwrap();
        assert!(breakpoint_grid_indices(&halves, 6).is_err());
        assert!(breakpoint_grid_indices(&halves, 8).is_ok());
        assert!(lax_solve(&halves, 6, Scheme::GaussFourth).is_err());
    }

    #[test]
    fn simpson_respects_pieces() {
        // Single smooth piece: Simpson is exact on cubics.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let smooth = GeneratorPath::constant(random_skew_hermitian(2, &mut rng));
        let steps = 16;
        let val = simpson_over_pieces(&smooth, steps, |k, _| {
            let t = k as f64 / steps as f64;
            t * t * t
        })
        .unwrap();
        assert!((val - 0.25).abs() < 1e-15);

        // A piecewise-linear integrand with a kink at 1/2 integrates exactly
        // once the pieces are split there.
        let b = random_skew_hermitian(2, &mut rng);
        let split = GeneratorPath::new(vec![Segment {
            t0: 0.0,
            t1: 1.0,
            terms: vec![PathTerm {
                coefficient: Coefficient::PiecewiseConstant(vec![1.0, -1.0]),
                generator: b,
            }],
        }])
        .unwrap();
        let val = simpson_over_pieces(&split, steps, |k, _| {
            let t = k as f64 / steps as f64;
            (t - 0.5).abs()
        })
        .unwrap();
        assert!((val - 0.25).abs() < 1e-15);

        // The discontinuous integrand itself: each side sees its one-sided
        // value at the jump.
        let val = simpson_over_pieces(&split, steps, |k, t_mid| {
            let t = k as f64 / steps as f64;
            if t_mid < 0.5 {
                2.0 * t
            } else {
                -1.0
            }
        })
        .unwrap();
        assert!((val - (0.25 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn constant_generators_integrate_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in 2..=4 {
            let b = random_skew_hermitian(n, &mut rng);
            let exact = expm_skew(&b).unwrap();
            for steps in [4usize, 64] {
                let flow =
                    lax_solve(&GeneratorPath::constant(b.clone()), steps, Scheme::GaussFourth)
                        .unwrap();
                let err = (flow.endpoint().matrix() - exact.matrix()).norm();
                assert!(err < 1e-12, "n = {n}, steps = {steps}: {err:.3e}");
            }
        }
    }

    #[test]
    fn gauss_steps_converge_at_fourth_order() {
        let path = fourier_pair(12);
        let reference = lax_solve(&path, 8192, Scheme::GaussFourth).unwrap();
        let err = |steps: usize| {
            let flow = lax_solve(&path, steps, Scheme::GaussFourth).unwrap();
            (flow.endpoint().matrix() - reference.endpoint().matrix()).norm()
        };
        let (e1, e2) = (err(256), err(512));
        let ratio = e1 / e2;
        assert!(
            (12.0..=20.0).contains(&ratio),
            "error ratio {ratio:.2} outside the fourth-order window (e256 = {e1:.3e}, e512 = {e2:.3e})"
        );
    }

    #[test]
    fn midpoint_steps_converge_at_second_order() {
        let path = fourier_pair(13);
        let reference = lax_solve(&path, 8192, Scheme::GaussFourth).unwrap();
        let err = |steps: usize| {
            let flow = lax_solve(&path, steps, Scheme::Midpoint).unwrap();
            (flow.endpoint().matrix() - reference.endpoint().matrix()).norm()
        };
        let ratio = err(256) / err(512);
        assert!((3.0..=5.5).contains(&ratio), "error ratio {ratio:.2} not second order");
    }

    #[test]
    fn unitarity_drift_stays_at_rounding_level() {
        let path = fourier_pair(14);
        let flow = lax_solve(&path, 4096, Scheme::GaussFourth).unwrap();
        assert!(flow.drift < 1e-12, "drift {:.3e}", flow.drift);
    }

    #[test]
    fn concatenation_composes_endpoints() {
        let p1 = fourier_pair(15);
        let p2 = half_turn();
        let joined = GeneratorPath::concatenate(&p1, &p2).unwrap();
        assert!(joined.breakpoints().iter().any(|&b| (b - 0.5).abs() < 1e-12));
        let h1 = lax_solve(&p1, 512, Scheme::GaussFourth).unwrap();
        let h2 = lax_solve(&p2, 512, Scheme::GaussFourth).unwrap();
        let hj = lax_solve(&joined, 1024, Scheme::GaussFourth).unwrap();
        let expected = h2.endpoint().compose(h1.endpoint());
        let err = (hj.endpoint().matrix() - expected.matrix()).norm();
        assert!(err < 1e-9, "endpoint composition error {err:.3e}");
        // The exact integrals add.
        let sum = &p1.integral() + &p2.integral();
        assert!((joined.integral().matrix() - sum.matrix()).norm() < 1e-14);
    }

    #[test]
    fn conjugation_is_equivariant() {
        let path = fourier_pair(16);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cgen = random_skew_hermitian(2, &mut rng);
        let s = 0.37;
        let conj = path.conjugated(&cgen, s).unwrap();
        let u = expm_skew(&cgen.scaled(s)).unwrap();
        let base = lax_solve(&path, 512, Scheme::GaussFourth).unwrap();
        let moved = lax_solve(&conj, 512, Scheme::GaussFourth).unwrap();
        let expected = u.compose(base.endpoint()).compose(&u.inverse());
        let err = (moved.endpoint().matrix() - expected.matrix()).norm();
        assert!(err < 1e-10, "equivariance error {err:.3e}");
    }

    #[test]
    fn closure_classifies_endpoints() {
        let spec = OrbitSpec::new(vec![1, 1], vec![3, 0]).unwrap();
        let num = Numerics::default();

        // Half-turn: ends at -1, closed and central.
        let flow = lax_solve(&half_turn(), 256, Scheme::GaussFourth).unwrap();
        let report = closure_check(&spec, &flow, &num);
        assert!(report.closed, "residual {:.3e}", report.residual);
        let z = report.scalar.expect("endpoint should be scalar");
        assert!((z - c(-1.0, 0.0)).norm() < 1e-10);
        assert!(report.block_diagonal);

        // A generic constant generator: open loop.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let open = GeneratorPath::constant(random_skew_hermitian(2, &mut rng));
        let report = closure_check(&spec, &lax_solve(&open, 256, Scheme::GaussFourth).unwrap(), &num);
        assert!(!report.closed);
        assert!(report.scalar.is_none());

        // Diagonal but non-central: stabilizes the base point only.
        let diag = SkewHermitianMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(0.0, 0.7),
            c(0.0, -0.3),
        ])))
        .unwrap();
        let report = closure_check(
            &spec,
            &lax_solve(&GeneratorPath::constant(diag), 256, Scheme::GaussFourth).unwrap(),
            &num,
        );
        assert!(!report.closed);
        assert!(report.scalar.is_none());
        assert!(report.block_diagonal);
    }

    #[test]
    fn trajectories_stay_on_orbit_and_close() {
        let spec = OrbitSpec::new(vec![1, 1], vec![3, 0]).unwrap();
        let x0 = spec.random_point(21);
        let flow = lax_solve(&half_turn(), 512, Scheme::GaussFourth).unwrap();
        let gamma = trajectory(&spec, &x0, &flow).unwrap();
        assert_eq!(gamma.len(), 513);
        // -1 acts trivially: the loop closes even though x₀ is generic.
        assert!(gamma.first().unwrap().distance(gamma.last().unwrap()) < 1e-10);
        // Spot-check mid-loop points really moved.
        assert!(gamma[256].distance(&gamma[0]) > 1e-2);
        let _ = lie::eig_skew_hermitian(gamma[100].skew()).unwrap();
    }
}
