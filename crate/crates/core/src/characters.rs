//! Characters of unitary groups: Schur evaluation, Weyl dimensions, and the
//! stabilizer characters attached to an orbit.
//!
//! Irreducible characters of U(n) are Schur functions of the eigenvalues,
//! indexed by weakly decreasing integer weight vectors (negative entries
//! allowed — they are honest Laurent exponents on the unitary group). Two
//! evaluation strategies are used:
//!
//! * the bialternant quotient det(x_i^{w_j+n-j}) / ∏_{i<j}(x_i - x_j) when
//!   the arguments are well separated, and
//! * the Jacobi–Trudi determinant in complete homogeneous sums (built from
//!   power sums by the Newton recurrence) when any two arguments nearly
//!   coincide and the quotient would be 0/0.
//!
//! The second path is what actually evaluates characters at the scalar
//! endpoints of closed loops, where all eigenvalues are equal.
//!
//! An orbit with levels m_j contributes in two ways: the stabilizer of its
//! diagonal base point carries the one-dimensional character
//! Λ(h) = ∏_j det(h_j)^{m_j} over the diagonal blocks, and a regular orbit
//! determines the U(n) weight obtained by sorting (-m_j) decreasingly,
//! whose conjugated character enters the character route to the action
//! integral.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::lie::{eig_unitary, UnitaryMatrix};
use crate::orbit::OrbitSpec;

/// Below this argument separation the bialternant is abandoned for the
/// Jacobi–Trudi evaluation.
const CONFLUENCE_TOL: f64 = 1e-5;

/// A dominant weight of U(n): a weakly decreasing integer vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector {
    components: Vec<i64>,
}

impl WeightVector {
    pub fn new(components: Vec<i64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::validation("weight vector cannot be empty"));
        }
        if components.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::validation(format!(
                "weight vector must be weakly decreasing, got {components:?}"
            )));
        }
        Ok(WeightVector { components })
    }

    pub fn components(&self) -> &[i64] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Σ w_j, the power of the determinant (central) character inside.
    pub fn total(&self) -> i64 {
        self.components.iter().sum()
    }
}

/// The U(n) weight attached to a regular orbit: (-m_j) sorted decreasingly.
/// Orbits with repeated levels have no single associated weight here.
pub fn highest_weight_of_orbit(spec: &OrbitSpec) -> Result<WeightVector> {
    if !spec.is_regular() {
        return Err(Error::NotRegular { multiplicities: spec.multiplicities().to_vec() });
    }
    WeightVector::new(spec.char_ints().iter().rev().map(|&m| -m).collect())
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Dimension of the irreducible with weight w by the Weyl formula
/// ∏_{i<j} (w_i - w_j + j - i)/(j - i), kept exact in integers.
pub fn weyl_dimension(w: &WeightVector) -> i128 {
    let v = w.components();
    let n = v.len();
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for i in 0..n {
        for j in (i + 1)..n {
            num *= (v[i] - v[j]) as i128 + (j - i) as i128;
            den *= (j - i) as i128;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
    }
    debug_assert_eq!(den, 1, "Weyl dimension must be integral");
    num / den
}

/// Schur function s_w(x₁,…,xₙ) for a (possibly Laurent) dominant weight.
///
/// Negative components are shifted away against a power of the determinant:
/// s_w(x) = s_{w + c·1}(x)·∏ x_i^{-c} with c = max(0, -w_n).
pub fn schur_eval(w: &WeightVector, args: &[Complex64]) -> Result<Complex64> {
    let n = w.len();
    if args.len() != n {
        return Err(Error::validation(format!(
            "schur evaluation needs {n} arguments, got {}",
            args.len()
        )));
    }
    if args.iter().any(|x| x.norm() < 1e-12) {
        return Err(Error::validation("schur arguments must be nonzero"));
    }
    let shift = (-w.components()[n - 1]).max(0);
    let mu: Vec<i64> = w.components().iter().map(|&c| c + shift).collect();

    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            min_gap = min_gap.min((args[i] - args[j]).norm());
        }
    }
    let core = if min_gap < CONFLUENCE_TOL {
        jacobi_trudi(&mu, args)?
    } else {
        bialternant(&mu, args)?
    };
    let mut prefactor = Complex64::new(1.0, 0.0);
    if shift > 0 {
        for x in args {
            prefactor *= x.powi(-(shift as i32));
        }
    }
    Ok(core * prefactor)
}

fn validate_partition(mu: &[i64], args: &[Complex64]) -> Result<()> {
    if mu.is_empty() || mu.len() != args.len() {
        return Err(Error::validation("partition and argument lengths must match"));
    }
    if mu.windows(2).any(|w| w[0] < w[1]) || mu[mu.len() - 1] < 0 {
        return Err(Error::validation("partition parts must be weakly decreasing and >= 0"));
    }
    Ok(())
}

/// One of the two independent Schur evaluation pipelines:
/// det(x_i^{μ_j + n - j}) / ∏_{i<j}(x_i - x_j) for a partition μ. Sharp for
/// well-separated arguments; near-confluent arguments lose accuracy to the
/// Vandermonde division (use [`jacobi_trudi`] there).
pub fn bialternant(mu: &[i64], args: &[Complex64]) -> Result<Complex64> {
    validate_partition(mu, args)?;
    let n = args.len();
    let numer = DMatrix::from_fn(n, n, |i, j| {
        let exponent = mu[j] + (n - 1 - j) as i64;
        args[i].powi(exponent as i32)
    });
    let mut vandermonde = Complex64::new(1.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            vandermonde *= args[i] - args[j];
        }
    }
    if vandermonde.norm() == 0.0 {
        return Err(Error::validation("bialternant needs pairwise distinct arguments"));
    }
    Ok(numer.determinant() / vandermonde)
}

/// Complete homogeneous sums h_0 … h_max of the arguments through the
/// Newton recurrence k·h_k = Σ_{i≤k} p_i·h_{k-i} on power sums p_i.
fn complete_homogeneous(args: &[Complex64], max: usize) -> Vec<Complex64> {
    let mut powers: Vec<Complex64> = vec![Complex64::new(args.len() as f64, 0.0)];
    let mut running: Vec<Complex64> = args.to_vec();
    for _ in 1..=max {
        powers.push(running.iter().sum());
        for (r, x) in running.iter_mut().zip(args.iter()) {
            *r *= x;
        }
    }
    let mut h = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=max {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..=k {
            acc += powers[i] * h[k - i];
        }
        h.push(acc / k as f64);
    }
    h
}

/// The other Schur evaluation pipeline: s_μ = det(h_{μ_i - i + j})_{i,j}
/// over complete homogeneous sums, for a partition μ. Stable under argument
/// confluence; [`schur_eval`] switches to it automatically when arguments
/// nearly coincide.
pub fn jacobi_trudi(mu: &[i64], args: &[Complex64]) -> Result<Complex64> {
    validate_partition(mu, args)?;
    let n = args.len();
    let max_index = (mu[0] + n as i64).max(0) as usize;
    let h = complete_homogeneous(args, max_index);
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        let idx = mu[i] - i as i64 + j as i64;
        if idx < 0 {
            Complex64::new(0.0, 0.0)
        } else {
            h[idx as usize]
        }
    });
    Ok(matrix.determinant())
}

/// The stabilizer character Λ(h) = ∏_j det(h_j)^{m_j} over the diagonal
/// blocks of the orbit's base point. `h` must commute with the base point,
/// i.e. be block diagonal up to the stabilizer tolerance.
pub fn stabilizer_character(spec: &OrbitSpec, h: &UnitaryMatrix) -> Result<Complex64> {
    if h.dim() != spec.dim() {
        return Err(Error::validation("stabilizer element dimension mismatch"));
    }
    let ranges = spec.block_ranges();
    let mut off_block = 0.0;
    for (bi, ri) in ranges.iter().enumerate() {
        for (bj, rj) in ranges.iter().enumerate() {
            if bi != bj {
                for r in ri.clone() {
                    for c in rj.clone() {
                        off_block += h.matrix()[(r, c)].norm_sqr();
                    }
                }
            }
        }
    }
    let off_block = off_block.sqrt();
    let tol = Tolerances::default().stabilizer;
    if off_block > tol {
        return Err(Error::NotInStabilizer { off_block, tol });
    }
    let mut value = Complex64::new(1.0, 0.0);
    for (range, &m) in ranges.iter().zip(spec.char_ints()) {
        if m == 0 {
            continue;
        }
        let block = h.matrix().view((range.start, range.start), (range.len(), range.len()));
        let det = block.clone_owned().determinant();
        value *= det.powi(m as i32);
    }
    Ok(value)
}

/// The conjugated character h ↦ conj(s_w(spec h)) of the dual irreducible,
/// evaluated through the eigenvalues of h.
pub fn dual_character(w: &WeightVector, h: &UnitaryMatrix) -> Result<Complex64> {
    if w.len() != h.dim() {
        return Err(Error::validation("weight length does not match matrix dimension"));
    }
    let eig = eig_unitary(h)?;
    Ok(schur_eval(w, &eig.values)?.conj())
}

/// Character of the irreducible su(2) representation with lowest weight
/// `weight` ≤ 0 (dimension 1 - weight), evaluated at diag(t, 1/t):
/// Σ_{k=0}^{-weight} t^{-weight-2k}. The u(2) orbit with levels (m, 0)
/// corresponds to weight = -m.
pub fn su2_character(weight: i64, t: Complex64) -> Result<Complex64> {
    if weight > 0 {
        return Err(Error::validation("su(2) weights are nonpositive in this convention"));
    }
    if t.norm() < 1e-12 {
        return Err(Error::validation("character argument must be nonzero"));
    }
    let top = -weight;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=top {
        sum += t.powi((top - 2 * k) as i32);
    }
    Ok(sum)
}
