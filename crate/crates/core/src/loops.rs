//! Ready-made closed generator paths used across examples and tests.
//!
//! Each constructor returns a [`GeneratorPath`] whose solved flow ends at a
//! central element, so the induced loop closes at every point of the orbit
//! and the action integral is defined:
//!
//! * [`su2_pi`] — the constant generator π·diag(i, -i) on u(2); the endpoint
//!   is -1, which acts trivially, and every point sweeps a latitude circle.
//! * [`central_loop`] — a constant diagonal generator 2πi(θ·1 + diag(k))
//!   with integer shifts k; the endpoint is the scalar e^{2πiθ}.
//! * [`fourier_loop`] — a seeded loop with trigonometric time dependence
//!   along two commuting conjugated integer directions; the endpoint is
//!   exactly the identity because the oscillating harmonics integrate to
//!   zero and the constant parts wind integrally.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::isotopy::{Coefficient, GeneratorPath, PathTerm, Segment};
use crate::lie::{self, SkewHermitianMatrix};

/// The u(2) half-turn loop: A(t) = π·diag(i, -i), endpoint -1.
pub fn su2_pi() -> GeneratorPath {
    let e = SkewHermitianMatrix::new_unchecked(DMatrix::from_diagonal(&DVector::from_vec(vec![
        Complex64::new(0.0, PI),
        Complex64::new(0.0, -PI),
    ])));
    GeneratorPath::constant(e)
}

/// The central-plus-torus loop A(t) = 2πi(θ·1 + diag(shifts)) on u(n):
/// h(1) = e^{2πiθ}·1. Shifts are integers, one per diagonal entry.
pub fn central_loop(dim: usize, theta: f64, shifts: &[i64]) -> Result<GeneratorPath> {
    if shifts.len() != dim {
        return Err(Error::validation(format!(
            "central loop on u({dim}) needs {dim} shifts, got {}",
            shifts.len()
        )));
    }
    let diag: Vec<Complex64> = shifts
        .iter()
        .map(|&k| Complex64::new(0.0, TAU * (theta + k as f64)))
        .collect();
    let a = SkewHermitianMatrix::new_unchecked(DMatrix::from_diagonal(&DVector::from_vec(diag)));
    Ok(GeneratorPath::constant(a))
}

/// A seeded closed loop with genuine time dependence:
///
/// ```text
/// A(t) = φ₁(t)·H₁ + φ₂(t)·H₂,    H_i = u·2πi·diag(k_i)·u†,
/// ```
///
/// with a Haar-random u, small nonzero integer vectors k_i, and trig
/// polynomials φ_i = 1 + Σ_j (a_j cos 2πjt + b_j sin 2πjt) up to
/// `harmonics`. The H_i commute, ∫φ_i = 1, and exp(H₁+H₂) = 1, so the flow
/// returns exactly to the identity while the trajectory sweeps back and
/// forth along a torus curve.
pub fn fourier_loop(dim: usize, seed: u64, harmonics: u32) -> Result<GeneratorPath> {
    if dim < 2 {
        return Err(Error::validation("fourier loops need dimension at least 2"));
    }
    if harmonics == 0 {
        return Err(Error::validation("fourier loops need at least one harmonic"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = lie::haar_from_rng(dim, &mut rng);
    let mut directions = Vec::with_capacity(2);
    while directions.len() < 2 {
        let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(-2..=2)).collect();
        if k.iter().any(|&v| v != 0) {
            let diag: Vec<Complex64> =
                k.iter().map(|&v| Complex64::new(0.0, TAU * v as f64)).collect();
            let h = SkewHermitianMatrix::new_unchecked(DMatrix::from_diagonal(
                &DVector::from_vec(diag),
            ))
            .conjugated_by(&u);
            directions.push(h);
        }
    }
    let mut terms = Vec::new();
    for h in directions {
        terms.push(PathTerm { coefficient: Coefficient::Constant(1.0), generator: h.clone() });
        for j in 1..=harmonics {
            let scale = 0.8 / j as f64;
            terms.push(PathTerm {
                coefficient: Coefficient::Cosine {
                    harmonic: j,
                    amplitude: rng.gen_range(-scale..scale),
                },
                generator: h.clone(),
            });
            terms.push(PathTerm {
                coefficient: Coefficient::Sine {
                    harmonic: j,
                    amplitude: rng.gen_range(-scale..scale),
                },
                generator: h.clone(),
            });
        }
    }
    GeneratorPath::new(vec![Segment { t0: 0.0, t1: 1.0, terms }])
}
