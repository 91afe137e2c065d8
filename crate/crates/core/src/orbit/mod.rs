//! Isospectral orbits of u(n) under conjugation, their symplectic geometry,
//! and the moment pairings built on them.
//!
//! An orbit is the set of skew-Hermitian matrices with a fixed spectrum
//! {i·p_j, multiplicity n_j}. The levels are encoded by integers m_j through
//! p_j = -m_j / 2π; integrality of the m_j is exactly the condition under
//! which the orbit carries a prequantization, i.e. under which the action
//! integral of a closed loop is well defined as a unit complex number.
//!
//! The symplectic structure is the canonical one on such orbits: for tangent
//! vectors ξ = [A, N] and ζ = [B, N] at a point N,
//!
//! ```text
//! ω_N(ξ, ζ) = Re tr(N·[A, B]) = -Re tr(ad_solve(ζ)·ξ),
//! ```
//!
//! where `ad_solve` inverts ad_N on the tangent space (the minimal-norm
//! solution of [B, N] = ζ). Two Hamiltonian pairings are provided for a
//! generator A: the equivariant one, Re tr(N·A), and the orbit-average-free
//! one obtained by subtracting the barycenter (tr D/n)·I. They differ only
//! in the central direction (by (tr D/n)·tr A, constant on the orbit); the
//! action-integral routes pair equivariantly so that loops generated by
//! central group paths keep their winding. See the guide for the full
//! convention discussion.

mod cap;

pub use cap::{symplectic_area, AreaEstimate, CapSurface, ConvergenceRow};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::lie::{self, eig_skew_hermitian, SkewHermitianMatrix, UnitaryMatrix};

/// A coadjoint orbit of u(n), described by its distinct integer levels and
/// their multiplicities.
///
/// Invariants (enforced by [`OrbitSpec::new`], which sorts its input):
/// multiplicities ≥ 1, levels pairwise distinct, stored with `char_ints`
/// strictly decreasing, equal lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitSpec {
    multiplicities: Vec<usize>,
    char_ints: Vec<i64>,
}

impl OrbitSpec {
    /// Builds an orbit description from block multiplicities and the integer
    /// levels. Input order is free; blocks are sorted so the stored levels
    /// decrease strictly. Fails on length mismatch, zero multiplicities or
    /// repeated levels.
    pub fn new(multiplicities: Vec<usize>, char_ints: Vec<i64>) -> Result<Self> {
        if multiplicities.is_empty() {
            return Err(Error::validation("orbit needs at least one block"));
        }
        if multiplicities.len() != char_ints.len() {
            return Err(Error::validation(format!(
                "block count mismatch: {} multiplicities vs {} levels",
                multiplicities.len(),
                char_ints.len()
            )));
        }
        if let Some(&bad) = multiplicities.iter().find(|&&m| m == 0) {
            let _ = bad;
            return Err(Error::validation("multiplicities must be positive"));
        }
        let mut pairs: Vec<(i64, usize)> =
            char_ints.iter().copied().zip(multiplicities.iter().copied()).collect();
        pairs.sort_by(|a, b| b.0.cmp(&a.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::validation("levels must be pairwise distinct"));
        }
        Ok(OrbitSpec {
            multiplicities: pairs.iter().map(|&(_, m)| m).collect(),
            char_ints: pairs.iter().map(|&(i, _)| i).collect(),
        })
    }

    /// Ambient matrix dimension n = Σ multiplicities.
    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Number of distinct levels.
    pub fn block_count(&self) -> usize {
        self.char_ints.len()
    }

    /// Block multiplicities, highest level first.
    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Integer levels, strictly decreasing.
    pub fn char_ints(&self) -> &[i64] {
        &self.char_ints
    }

    /// The real level p_j = -m_j / 2π of block j.
    pub fn level(&self, j: usize) -> f64 {
        -(self.char_ints[j] as f64) / TAU
    }

    /// Index ranges of the blocks in the base point's diagonal order.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.block_count());
        let mut start = 0;
        for &m in &self.multiplicities {
            out.push(start..start + m);
            start += m;
        }
        out
    }

    /// True when every level is simple (full flag orbit).
    pub fn is_regular(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    /// Imaginary parts of the spectrum, repeated by multiplicity, sorted
    /// descending — the order every eigendecomposition in this crate uses.
    pub fn spectrum_desc(&self) -> Vec<f64> {
        // Stored blocks have decreasing m, hence increasing p; walk backwards.
        let mut out = Vec::with_capacity(self.dim());
        for j in (0..self.block_count()).rev() {
            out.extend(std::iter::repeat(self.level(j)).take(self.multiplicities[j]));
        }
        out
    }

    /// For each position of [`Self::spectrum_desc`], the index of its block.
    pub fn group_ids_desc(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim());
        for j in (0..self.block_count()).rev() {
            out.extend(std::iter::repeat(j).take(self.multiplicities[j]));
        }
        out
    }

    /// Mean level (tr D / n)/i — the orbit barycenter is i·this·I.
    pub fn barycenter_level(&self) -> f64 {
        let total: f64 = (0..self.block_count())
            .map(|j| self.level(j) * self.multiplicities[j] as f64)
            .sum();
        total / self.dim() as f64
    }

    /// The diagonal base point D = diag(i·p_j, multiplicity n_j).
    pub fn base_point(&self) -> OrbitPoint {
        let mut diag = Vec::with_capacity(self.dim());
        for j in 0..self.block_count() {
            diag.extend(std::iter::repeat(lie::I * self.level(j)).take(self.multiplicities[j]));
        }
        let m = DMatrix::from_diagonal(&DVector::from_vec(diag));
        OrbitPoint { m: SkewHermitianMatrix::new_unchecked(m) }
    }

    /// A reproducible Haar-random point U·D·U†.
    pub fn random_point(&self, seed: u64) -> OrbitPoint {
        let u = lie::random_haar_unitary(self.dim(), seed);
        self.base_point().conjugated_by(&u)
    }

    /// Minimal gap between distinct levels.
    pub fn min_level_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for j in 1..self.block_count() {
            gap = gap.min(self.level(j) - self.level(j - 1)).abs();
        }
        for w in self.spectrum_desc().windows(2) {
            if (w[0] - w[1]).abs() > 1e-15 {
                gap = gap.min((w[0] - w[1]).abs());
            }
        }
        gap
    }

    /// The fixed points of the diagonal torus action: all distinct diagonal
    /// matrices with the orbit's spectrum (n! / ∏ n_j! of them).
    pub fn torus_fixed_points(&self) -> Vec<OrbitPoint> {
        let perms = distinct_arrangements(&self.multiplicities);
        perms
            .into_iter()
            .map(|blocks| {
                let diag: Vec<Complex64> =
                    blocks.iter().map(|&j| lie::I * self.level(j)).collect();
                OrbitPoint {
                    m: SkewHermitianMatrix::new_unchecked(DMatrix::from_diagonal(
                        &DVector::from_vec(diag),
                    )),
                }
            })
            .collect()
    }

    /// Checks that the torus-moment values of the fixed points differ by
    /// integer lattice vectors once scaled by 2π.
    pub fn vertex_lattice_check(&self) -> VertexLatticeReport {
        let arrangements = distinct_arrangements(&self.multiplicities);
        let vertices: Vec<Vec<f64>> = arrangements
            .iter()
            .map(|blocks| blocks.iter().map(|&j| self.level(j)).collect())
            .collect();
        let mut integer_diffs = Vec::with_capacity(vertices.len());
        let mut max_deviation: f64 = 0.0;
        for v in &vertices {
            let mut row = Vec::with_capacity(v.len());
            for (a, b) in v.iter().zip(vertices[0].iter()) {
                let scaled = TAU * (a - b);
                let nearest = scaled.round();
                max_deviation = max_deviation.max((scaled - nearest).abs());
                row.push(nearest as i64);
            }
            integer_diffs.push(row);
        }
        let tol = Tolerances::default().vertex;
        VertexLatticeReport { vertices, integer_diffs, max_deviation, pass: max_deviation < tol }
    }
}

/// Result of [`OrbitSpec::vertex_lattice_check`]: the fixed-point moment
/// vectors, their differences to the first vertex scaled by 2π and rounded,
/// and the worst distance to the integer lattice.
#[derive(Debug, Clone)]
pub struct VertexLatticeReport {
    pub vertices: Vec<Vec<f64>>,
    pub integer_diffs: Vec<Vec<i64>>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// All distinct arrangements of block indices with the given multiplicities
/// (multiset permutations), in lexicographic order.
fn distinct_arrangements(multiplicities: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = multiplicities.iter().sum();
    let mut counts = multiplicities.to_vec();
    let mut current = Vec::with_capacity(n);
    let mut out = Vec::new();
    fn recurse(counts: &mut [usize], current: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for j in 0..counts.len() {
            if counts[j] > 0 {
                counts[j] -= 1;
                current.push(j);
                recurse(counts, current, n, out);
                current.pop();
                counts[j] += 1;
            }
        }
    }
    recurse(&mut counts, &mut current, n, &mut out);
    out
}

/// A point of an orbit: a skew-Hermitian matrix with the orbit's spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPoint {
    m: SkewHermitianMatrix,
}

impl OrbitPoint {
    /// Validates that `m` carries the orbit's spectrum (within the spectrum
    /// tolerance) and wraps it.
    pub fn new(spec: &OrbitSpec, m: SkewHermitianMatrix) -> Result<Self> {
        if m.dim() != spec.dim() {
            return Err(Error::validation(format!(
                "point dimension {} does not match orbit dimension {}",
                m.dim(),
                spec.dim()
            )));
        }
        let eig = eig_skew_hermitian(&m)?;
        let target = spec.spectrum_desc();
        let deviation = eig
            .imag_parts
            .iter()
            .zip(target.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
        let tol = Tolerances::default().spectrum;
        if deviation > tol {
            return Err(Error::NotOnOrbit { deviation, tol });
        }
        Ok(OrbitPoint { m })
    }

    /// Wraps a matrix that has the right spectrum by construction.
    pub fn new_unchecked(m: SkewHermitianMatrix) -> Self {
        OrbitPoint { m }
    }

    /// The underlying skew-Hermitian matrix.
    pub fn skew(&self) -> &SkewHermitianMatrix {
        &self.m
    }

    /// The underlying complex matrix.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        self.m.matrix()
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// The conjugated point u·N·u† (the group action).
    pub fn conjugated_by(&self, u: &UnitaryMatrix) -> OrbitPoint {
        OrbitPoint { m: self.m.conjugated_by(u) }
    }

    /// Frobenius distance to another point.
    pub fn distance(&self, other: &OrbitPoint) -> f64 {
        (self.matrix() - other.matrix()).norm()
    }
}

/// A tangent vector ξ at a point N of the orbit: skew-Hermitian, with no
/// component along N's stabilizer blocks (i.e. ξ = [A, N] for some A).
#[derive(Debug, Clone)]
pub struct TangentVector {
    base: OrbitPoint,
    xi: SkewHermitianMatrix,
}

impl TangentVector {
    /// Validates tangency: in the base point's eigenbasis, the blocks pairing
    /// equal eigenvalues must vanish (within the tangency tolerance).
    pub fn new(spec: &OrbitSpec, base: OrbitPoint, xi: SkewHermitianMatrix) -> Result<Self> {
        if xi.dim() != base.dim() {
            return Err(Error::validation("tangent vector dimension mismatch"));
        }
        let eig = eig_skew_hermitian(base.skew())?;
        let groups = spec.group_ids_desc();
        let xib = eig.vectors.adjoint() * xi.matrix() * &eig.vectors;
        let mut residual2 = 0.0;
        for j in 0..xi.dim() {
            for k in 0..xi.dim() {
                if groups[j] == groups[k] {
                    residual2 += xib[(j, k)].norm_sqr();
                }
            }
        }
        let residual = residual2.sqrt();
        let tol = Tolerances::default().tangent * xi.norm().max(1.0);
        if residual > tol {
            return Err(Error::NotTangent { residual, tol });
        }
        Ok(TangentVector { base, xi })
    }

    /// The commutator [A, N]: always tangent at N, no validation needed.
    pub fn from_generator(base: OrbitPoint, a: &SkewHermitianMatrix) -> TangentVector {
        let xi = a.commutator(base.skew());
        TangentVector { base, xi }
    }

    /// Orthogonal projection of an ambient skew-Hermitian matrix onto the
    /// tangent space at `base` (zeroes the stabilizer blocks in the base's
    /// eigenbasis).
    pub fn project(spec: &OrbitSpec, base: OrbitPoint, ambient: &SkewHermitianMatrix) -> Result<TangentVector> {
        let eig = eig_skew_hermitian(base.skew())?;
        let groups = spec.group_ids_desc();
        let mut xib = eig.vectors.adjoint() * ambient.matrix() * &eig.vectors;
        for j in 0..ambient.dim() {
            for k in 0..ambient.dim() {
                if groups[j] == groups[k] {
                    xib[(j, k)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        let xi = &eig.vectors * xib * eig.vectors.adjoint();
        Ok(TangentVector { base, xi: SkewHermitianMatrix::new_unchecked(xi) })
    }

    pub fn base(&self) -> &OrbitPoint {
        &self.base
    }

    pub fn skew(&self) -> &SkewHermitianMatrix {
        &self.xi
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        self.xi.matrix()
    }
}

/// Minimal-norm solution B of [B, N] = ζ for a tangent vector ζ at N.
///
/// In N's eigenbasis, B_jk = ζ_jk / (λ_k - λ_j) off the stabilizer blocks and
/// zero on them. Fails with [`Error::SpectralGap`] if distinct levels of the
/// point come closer than the gap tolerance (cannot happen for validated
/// orbit points of a well-separated spec, but guards corrupted input).
pub fn ad_solve(spec: &OrbitSpec, zeta: &TangentVector) -> Result<SkewHermitianMatrix> {
    let eig = eig_skew_hermitian(zeta.base().skew())?;
    let groups = spec.group_ids_desc();
    let n = zeta.base().dim();
    let gap_tol = Tolerances::default().eigen_gap;

    let zb = eig.vectors.adjoint() * zeta.matrix() * &eig.vectors;
    let mut bb = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            if groups[j] != groups[k] {
                let denom = eig.imag_parts[k] - eig.imag_parts[j];
                if denom.abs() < gap_tol {
                    return Err(Error::SpectralGap { gap: denom.abs(), tol: gap_tol });
                }
                // λ_k - λ_j = i·(d_k - d_j)
                bb[(j, k)] = zb[(j, k)] / (lie::I * denom);
            }
        }
    }
    let b = &eig.vectors * bb * eig.vectors.adjoint();
    Ok(SkewHermitianMatrix::new_unchecked(b))
}

/// The orbit's symplectic form on two tangent vectors at the same point:
/// ω(ξ, ζ) = -Re tr(ad_solve(ζ)·ξ).
pub fn kks_eval(spec: &OrbitSpec, xi: &TangentVector, zeta: &TangentVector) -> Result<f64> {
    let base_dist = xi.base().distance(zeta.base());
    if base_dist > 1e-10 * xi.base().matrix().norm().max(1.0) {
        return Err(Error::validation(format!(
            "tangent vectors live at different points (distance {base_dist:.3e})"
        )));
    }
    let b = ad_solve(spec, zeta)?;
    Ok(-(b.matrix() * xi.matrix()).trace().re)
}

/// ω in a fixed eigenbasis: `d` are the (descending) imaginary parts of the
/// base point, `groups` the block ids, `xi_b`/`zeta_b` the tangent vectors
/// already transformed into that basis. Entries inside a block are ignored,
/// which is exactly the tangential projection. Used by the area quadrature,
/// where the basis change is amortized per grid point.
pub(crate) fn kks_in_eigenbasis(
    d: &[f64],
    groups: &[usize],
    xi_b: &DMatrix<Complex64>,
    zeta_b: &DMatrix<Complex64>,
) -> f64 {
    let n = d.len();
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            if groups[j] != groups[k] {
                // -Re[ζ_jk/(i(d_k-d_j)) · ξ_kj] = -Im(ζ_jk·ξ_kj)/(d_k-d_j)
                let prod = zeta_b[(j, k)] * xi_b[(k, j)];
                total -= prod.im / (d[k] - d[j]);
            }
        }
    }
    total
}

/// The raw real pairing Re tr(N·A); real automatically for skew-Hermitian
/// arguments.
pub fn trace_pairing(x: &OrbitPoint, a: &SkewHermitianMatrix) -> f64 {
    (x.matrix() * a.matrix()).trace().re
}

/// Equivariant Hamiltonian of the generator A at the point N, including the
/// global sign convention: SIGN·Re tr(N·A). This is the pairing the action
/// integral uses; it keeps the winding of central group paths.
pub fn hamiltonian_moment(x: &OrbitPoint, a: &SkewHermitianMatrix) -> f64 {
    crate::SIGN_CONVENTION * trace_pairing(x, a)
}

/// Hamiltonian with zero orbit average: the barycenter (tr D/n)·I is removed
/// before pairing, so the Haar average over the orbit vanishes. Differs from
/// [`hamiltonian_moment`] only when A has nonzero trace.
pub fn hamiltonian_normalized(spec: &OrbitSpec, a: &SkewHermitianMatrix, x: &OrbitPoint) -> f64 {
    let raw = trace_pairing(x, a);
    // Re tr((i·p̄·I)·A) = -p̄·Im tr(A)
    let central = -spec.barycenter_level() * a.matrix().trace().im;
    crate::SIGN_CONVENTION * (raw - central)
}

/// Projects an ambient skew-Hermitian matrix onto the orbit: its descending
/// eigenvalues are replaced by the orbit's spectrum while the eigenvectors
/// are kept. Fails with [`Error::SpectralGap`] when eigenvalues destined
/// for distinct levels are closer than `gap_tol`, which would make the
/// level assignment ill-conditioned.
pub fn project_to_orbit(
    spec: &OrbitSpec,
    ambient: &SkewHermitianMatrix,
    gap_tol: f64,
) -> Result<OrbitPoint> {
    if ambient.dim() != spec.dim() {
        return Err(Error::validation("projection target and orbit dimensions differ"));
    }
    let eig = lie::eig_skew_hermitian(ambient)?;
    let lambda = spec.spectrum_desc();
    let groups = spec.group_ids_desc();
    for j in 1..lambda.len() {
        if groups[j - 1] != groups[j] {
            let gap = eig.imag_parts[j - 1] - eig.imag_parts[j];
            if gap < gap_tol {
                return Err(Error::SpectralGap { gap, tol: gap_tol });
            }
        }
    }
    let target = DVector::from_iterator(lambda.len(), lambda.iter().map(|&d| lie::I * d));
    let p = &eig.vectors * DMatrix::from_diagonal(&target) * eig.vectors.adjoint();
    Ok(OrbitPoint::new_unchecked(SkewHermitianMatrix::new_unchecked(p)))
}

/// Deterministic bundle of probe points, used by closure and independence
/// checks: seeds are derived from the master seed.
pub fn probe_points(spec: &OrbitSpec, count: usize, seed: u64) -> Vec<OrbitPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = lie::haar_from_rng(spec.dim(), &mut rng);
            spec.base_point().conjugated_by(&u)
        })
        .collect()
}
