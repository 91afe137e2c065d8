//! Matrix-level substrate: the Lie algebra u(n) of skew-Hermitian matrices,
//! the group U(n) of unitaries, and the handful of factorizations everything
//! else is built on.
//!
//! Design rule: exponentials and spectra of skew-Hermitian matrices are
//! *always* computed through the Hermitian eigendecomposition of -iA (never
//! through a power series), so results stay on the group/algebra to machine
//! precision and eigenvalue order is deterministic. Unitary spectra go
//! through the commuting Hermitian pair (h + h†)/2, (h - h†)/2i rather than a
//! nonsymmetric eigensolver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Imaginary unit, used everywhere.
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Frobenius-relative skew-symmetry defect accepted by [`SkewHermitianMatrix::new`].
pub const SKEW_TOL: f64 = 1e-12;
/// Unitarity defect accepted by [`UnitaryMatrix::new`].
pub const UNITARY_TOL: f64 = 1e-10;
/// Smallest singular value [`project_unitary`] accepts before declaring the
/// input degenerate.
pub const POLAR_MIN_SIGMA: f64 = 1e-8;

/// Element of u(n): a square complex matrix with A† = -A.
///
/// The constructor validates the symmetry to [`SKEW_TOL`] (Frobenius,
/// relative to max(1, ‖A‖)); internal computations that preserve skewness by
/// construction use [`SkewHermitianMatrix::new_unchecked`] and keep the
/// invariant as a debug assertion.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewHermitianMatrix {
    m: DMatrix<Complex64>,
}

impl SkewHermitianMatrix {
    /// Validates and wraps `m`. Fails unless `m` is square and skew-Hermitian
    /// within [`SKEW_TOL`].
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::validation(format!(
                "skew-Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = (&m + m.adjoint()).norm();
        let scale = m.norm().max(1.0);
        if defect > SKEW_TOL * scale {
            return Err(Error::validation(format!(
                "matrix is not skew-Hermitian: defect {:.3e} exceeds {:.3e}",
                defect,
                SKEW_TOL * scale
            )));
        }
        Ok(SkewHermitianMatrix { m })
    }

    /// Wraps a matrix that is skew-Hermitian by construction.
    pub fn new_unchecked(m: DMatrix<Complex64>) -> Self {
        debug_assert!(
            (&m + m.adjoint()).norm() <= 1e-10 * m.norm().max(1.0),
            "new_unchecked received a matrix that is not skew-Hermitian"
        );
        SkewHermitianMatrix { m }
    }

    /// The zero element of u(n).
    pub fn zeros(n: usize) -> Self {
        SkewHermitianMatrix { m: DMatrix::zeros(n, n) }
    }

    /// Matrix side length n.
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Borrow the underlying matrix.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// Unwrap into the underlying matrix.
    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    /// Real scalar multiple (stays in u(n)).
    pub fn scaled(&self, r: f64) -> Self {
        SkewHermitianMatrix { m: self.m.scale(r) }
    }

    /// Lie bracket [self, other] = self·other - other·self.
    pub fn commutator(&self, other: &Self) -> Self {
        let m = &self.m * &other.m - &other.m * &self.m;
        SkewHermitianMatrix::new_unchecked(m)
    }

    /// Conjugation u·A·u†, the adjoint action of the group on its algebra.
    pub fn conjugated_by(&self, u: &UnitaryMatrix) -> Self {
        let m = u.matrix() * &self.m * u.matrix().adjoint();
        SkewHermitianMatrix::new_unchecked(m)
    }
}

impl std::ops::Add for &SkewHermitianMatrix {
    type Output = SkewHermitianMatrix;
    fn add(self, rhs: &SkewHermitianMatrix) -> SkewHermitianMatrix {
        SkewHermitianMatrix::new_unchecked(&self.m + &rhs.m)
    }
}

impl std::ops::Sub for &SkewHermitianMatrix {
    type Output = SkewHermitianMatrix;
    fn sub(self, rhs: &SkewHermitianMatrix) -> SkewHermitianMatrix {
        SkewHermitianMatrix::new_unchecked(&self.m - &rhs.m)
    }
}

/// Element of U(n): a square complex matrix with U†U = I.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    m: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    /// Validates and wraps `m`. Fails unless ‖U†U - I‖_F ≤ [`UNITARY_TOL`].
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::validation(format!(
                "unitary matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = unitarity_defect(&m);
        if defect > UNITARY_TOL {
            return Err(Error::validation(format!(
                "matrix is not unitary: defect {defect:.3e} exceeds {UNITARY_TOL:.3e}"
            )));
        }
        Ok(UnitaryMatrix { m })
    }

    /// Wraps a matrix that is unitary by construction.
    pub fn new_unchecked(m: DMatrix<Complex64>) -> Self {
        debug_assert!(
            unitarity_defect(&m) <= 1e-8,
            "new_unchecked received a matrix that is not unitary"
        );
        UnitaryMatrix { m }
    }

    /// The identity of U(n).
    pub fn identity(n: usize) -> Self {
        UnitaryMatrix { m: DMatrix::identity(n, n) }
    }

    /// Matrix side length n.
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Borrow the underlying matrix.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// Unwrap into the underlying matrix.
    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    /// Group product self·other.
    pub fn compose(&self, other: &Self) -> Self {
        UnitaryMatrix::new_unchecked(&self.m * &other.m)
    }

    /// Inverse = adjoint.
    pub fn inverse(&self) -> Self {
        UnitaryMatrix::new_unchecked(self.m.adjoint())
    }

    /// ‖U†U - I‖_F of the stored matrix; diagnostic for drift studies.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.m)
    }
}

fn unitarity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    (m.adjoint() * m - DMatrix::<Complex64>::identity(n, n)).norm()
}

/// Eigendecomposition of a skew-Hermitian matrix A = V·diag(i·d_j)·V†.
///
/// `imag_parts` holds the d_j sorted descending; `vectors` holds the
/// corresponding orthonormal columns, each phase-normalized so that its first
/// component of non-negligible modulus is real positive. The ordering plus
/// phase normalization make the decomposition deterministic for a given
/// input, which downstream spectral surgery (cap projection) relies on.
#[derive(Debug, Clone)]
pub struct SkewEigen {
    /// d_j with eigenvalue i·d_j, sorted descending.
    pub imag_parts: Vec<f64>,
    /// Orthonormal eigenvector columns, same order.
    pub vectors: DMatrix<Complex64>,
}

impl SkewEigen {
    /// The j-th eigenvalue i·d_j as a complex number.
    pub fn value(&self, j: usize) -> Complex64 {
        I * self.imag_parts[j]
    }

    /// Reassemble V·diag(i·d_j)·V† (used after editing `imag_parts`).
    pub fn assemble(&self) -> DMatrix<Complex64> {
        let d = DVector::from_iterator(self.imag_parts.len(), self.imag_parts.iter().map(|&x| I * x));
        &self.vectors * DMatrix::from_diagonal(&d) * self.vectors.adjoint()
    }
}

/// Hermitian eigendecomposition of -iA with deterministic ordering.
///
/// Errors with [`Error::NumericalFailure`] only if the underlying symmetric
/// QR iteration fails to converge, which Hermitian input essentially never
/// triggers.
pub fn eig_skew_hermitian(a: &SkewHermitianMatrix) -> Result<SkewEigen> {
    let h = a.matrix() * (-I); // Hermitian when A is skew-Hermitian
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure { context: "Hermitian eigendecomposition".into() })?;

    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    // Descending by eigenvalue; stable so repeated eigenvalues keep the
    // factorization's own order, which is deterministic for fixed input.
    order.sort_by(|&p, &q| eig.eigenvalues[q].partial_cmp(&eig.eigenvalues[p]).unwrap());

    let imag_parts: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    phase_normalize_columns(&mut vectors);
    Ok(SkewEigen { imag_parts, vectors })
}

/// Make each column's first component of modulus > 1e-12 real positive.
fn phase_normalize_columns(v: &mut DMatrix<Complex64>) {
    let (n, cols) = (v.nrows(), v.ncols());
    for j in 0..cols {
        let mut phase = Complex64::new(1.0, 0.0);
        for i in 0..n {
            let z = v[(i, j)];
            if z.norm() > 1e-12 {
                phase = z / z.norm();
                break;
            }
        }
        let corr = phase.conj();
        for i in 0..n {
            v[(i, j)] *= corr;
        }
    }
}

/// exp(A) for skew-Hermitian A, via the Hermitian eigendecomposition:
/// exp(A) = V·diag(exp(i·d_j))·V†. A single Newton polish step clamps the
/// unitarity defect to machine level so long step products do not drift.
pub fn expm_skew(a: &SkewHermitianMatrix) -> Result<UnitaryMatrix> {
    let eig = eig_skew_hermitian(a)?;
    let phases = DVector::from_iterator(
        eig.imag_parts.len(),
        eig.imag_parts.iter().map(|&d| Complex64::from_polar(1.0, d)),
    );
    let u = &eig.vectors * DMatrix::from_diagonal(&phases) * eig.vectors.adjoint();
    Ok(UnitaryMatrix::new_unchecked(polish_unitary(u)))
}

/// One Newton step toward the polar factor: U ← U·(3I - U†U)/2.
/// Quadratically shrinks an already-small unitarity defect.
fn polish_unitary(u: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = u.nrows();
    let corr = (DMatrix::<Complex64>::identity(n, n).scale(3.0) - u.adjoint() * &u).scale(0.5);
    u * corr
}

/// Nearest unitary in Frobenius norm: the polar factor U = M·(M†M)^(-1/2),
/// computed through the Hermitian eigendecomposition of M†M.
///
/// Fails with [`Error::DegenerateInput`] if the smallest singular value of M
/// is below [`POLAR_MIN_SIGMA`].
pub fn project_unitary(m: &DMatrix<Complex64>) -> Result<UnitaryMatrix> {
    if !m.is_square() {
        return Err(Error::validation("polar projection needs a square matrix".to_string()));
    }
    let gram = m.adjoint() * m; // Hermitian positive semidefinite
    let eig = nalgebra::linalg::SymmetricEigen::try_new(gram, f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure { context: "polar Gram eigendecomposition".into() })?;
    let sigma_min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &l| a.min(l.max(0.0).sqrt()));
    if sigma_min < POLAR_MIN_SIGMA {
        return Err(Error::DegenerateInput { sigma_min, min_allowed: POLAR_MIN_SIGMA });
    }
    let inv_sqrt = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::new(1.0 / l.sqrt(), 0.0)),
    );
    let u = m * &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.adjoint();
    Ok(UnitaryMatrix::new_unchecked(polish_unitary(u)))
}

/// Haar-distributed random unitary, seeded for reproducibility.
///
/// QR of a complex Ginibre matrix with the diagonal phase correction
/// Q ← Q·diag(r_jj/|r_jj|), which makes the factorization the unique one
/// with positive-real R diagonal and hence Q exactly Haar.
pub fn random_haar_unitary(n: usize, seed: u64) -> UnitaryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_from_rng(n, &mut rng)
}

/// Haar sample drawing from a caller-managed RNG (for sampling loops).
pub fn haar_from_rng<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::new_unchecked(q)
}

/// Random element of u(n) with independent Gaussian entries, (G - G†)/2.
/// Used for probe directions and deformation defaults.
pub fn random_skew_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SkewHermitianMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let m = (&g - g.adjoint()).scale(0.5);
    SkewHermitianMatrix::new_unchecked(m)
}

/// Eigendecomposition of a unitary matrix.
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    /// Unit-modulus eigenvalues, sorted by argument descending.
    pub values: Vec<Complex64>,
    /// Orthonormal eigenvector columns, same order.
    pub vectors: DMatrix<Complex64>,
}

/// Spectrum of a unitary through its commuting Hermitian parts.
///
/// C = (h + h†)/2 and S = (h - h†)/2i commute with h and with each other.
/// Diagonalizing C and then splitting each near-degenerate C-cluster with the
/// restriction of S yields a joint eigenbasis; eigenvalues are read off as
/// Rayleigh quotients and renormalized to the unit circle. A residual check
/// guards the clustering tolerance.
pub fn eig_unitary(h: &UnitaryMatrix) -> Result<UnitaryEigen> {
    let n = h.dim();
    let hm = h.matrix();
    let c = (hm + hm.adjoint()).scale(0.5);
    let s = (hm - hm.adjoint()) * (-I * 0.5);

    let eig_c = nalgebra::linalg::SymmetricEigen::try_new(c, f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure { context: "unitary cosine eigendecomposition".into() })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig_c.eigenvalues[q].partial_cmp(&eig_c.eigenvalues[p]).unwrap());
    let mut basis = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        basis.set_column(dst, &eig_c.eigenvectors.column(src));
    }
    let cos_sorted: Vec<f64> = order.iter().map(|&j| eig_c.eigenvalues[j]).collect();

    // Split clusters of nearly equal cosine with the sine part. The cluster
    // width is deliberately generous: cosines separated by slightly more than
    // machine-scale gaps come out of the Hermitian solver with arbitrarily
    // mixed eigenvectors, and routing them through the sine restriction
    // resolves the mixing exactly (truly coincident eigenvalues are harmless
    // either way).
    const CLUSTER_TOL: f64 = 1e-6;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (cos_sorted[end - 1] - cos_sorted[end]).abs() < CLUSTER_TOL {
            end += 1;
        }
        if end - start > 1 {
            let w = basis.columns(start, end - start).into_owned();
            let s_sub = w.adjoint() * &s * &w; // Hermitian on the cluster
            let eig_s = nalgebra::linalg::SymmetricEigen::try_new(s_sub, f64::EPSILON, 0)
                .ok_or_else(|| Error::NumericalFailure {
                    context: "unitary sine eigendecomposition".into(),
                })?;
            let rotated = &w * &eig_s.eigenvectors;
            for (k, col) in (start..end).zip(0..(end - start)) {
                basis.set_column(k, &rotated.column(col));
            }
        }
        start = end;
    }
    phase_normalize_columns(&mut basis);

    // Rayleigh quotients; must reproduce h on each vector.
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let v = basis.column(j);
        let hv = hm * v;
        let lambda = (v.adjoint() * &hv)[(0, 0)];
        let lambda = if lambda.norm() > 0.0 { lambda / lambda.norm() } else { lambda };
        let residual = (&hv - v.into_owned().scale(1.0) * lambda).norm();
        if residual > 1e-7 {
            return Err(Error::NumericalFailure {
                context: format!("unitary eigenpair residual {residual:.3e}"),
            });
        }
        values.push(lambda);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| values[q].arg().partial_cmp(&values[p].arg()).unwrap());
    let sorted_values: Vec<Complex64> = order.iter().map(|&j| values[j]).collect();
    let mut sorted_vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &basis.column(src));
    }
    Ok(UnitaryEigen { values: sorted_values, vectors: sorted_vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn skew_constructor_accepts_and_rejects() {
        let good = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(2.0, 3.0), c(-2.0, 3.0), c(0.0, -4.0)]);
        assert!(SkewHermitianMatrix::new(good).is_ok());

        let bad = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(SkewHermitianMatrix::new(bad), Err(Error::Validation(_))));

        let rect = DMatrix::<Complex64>::zeros(2, 3);
        assert!(SkewHermitianMatrix::new(rect).is_err());
    }

    #[test]
    fn expm_of_diagonal_is_diagonal_phases() {
        let a = SkewHermitianMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(0.0, 0.7),
            c(0.0, -1.3),
        ])))
        .unwrap();
        let u = expm_skew(&a).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::from_polar(1.0, 0.7),
            Complex64::from_polar(1.0, -1.3),
        ]));
        assert!((u.matrix() - expected).norm() < 1e-14);
    }

    #[test]
    fn expm_matches_planar_rotation() {
        // exp(θ·J) with J = [[0,1],[-1,0]] is the rotation by θ.
        let theta = 0.83_f64;
        let j = SkewHermitianMatrix::new(DMatrix::from_row_slice(2, 2, &[
            c(0.0, 0.0),
            c(theta, 0.0),
            c(-theta, 0.0),
            c(0.0, 0.0),
        ]))
        .unwrap();
        let u = expm_skew(&j).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[
            c(theta.cos(), 0.0),
            c(theta.sin(), 0.0),
            c(-theta.sin(), 0.0),
            c(theta.cos(), 0.0),
        ]);
        assert!((u.matrix() - expected).norm() < 1e-13, "rotation mismatch");
    }

    #[test]
    fn expm_unitarity_determinant_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in 2..=5 {
            for _ in 0..5 {
                let a = random_skew_hermitian(n, &mut rng);
                let u = expm_skew(&a).unwrap();
                assert!(u.unitarity_defect() < 1e-12, "unitarity defect too large");

                // det(exp A) = exp(tr A)
                let det = u.matrix().determinant();
                let expected = a.matrix().trace().exp();
                assert!((det - expected).norm() < 1e-8, "determinant invariant violated");

                // exp(A)·exp(-A) = I
                let v = expm_skew(&a.scaled(-1.0)).unwrap();
                let prod = u.compose(&v);
                let eye = DMatrix::<Complex64>::identity(n, n);
                assert!((prod.matrix() - eye).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn polar_projection_recovers_nearby_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=4 {
            let u = haar_from_rng(n, &mut rng);
            let noise = DMatrix::from_fn(n, n, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                c(re, im)
            });
            let m = u.matrix() + noise.scale(1e-6);
            let p = project_unitary(&m).unwrap();
            assert!((p.matrix() - u.matrix()).norm() < 1e-5);
            assert!(p.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn polar_projection_agrees_with_svd_route() {
        // Independent oracle: polar factor from nalgebra's SVD, U·V†.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=5 {
            let m = DMatrix::from_fn(n, n, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                c(re, im)
            });
            let svd = m.clone().svd(true, true);
            let oracle = svd.u.as_ref().unwrap() * svd.v_t.as_ref().unwrap();
            let ours = project_unitary(&m).unwrap();
            assert!((ours.matrix() - oracle).norm() < 1e-11);
        }
    }

    #[test]
    fn polar_projection_rejects_near_singular() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(1e-12, 0.0)]));
        match project_unitary(&m) {
            Err(Error::DegenerateInput { sigma_min, .. }) => assert!(sigma_min < 1e-8),
            other => panic!("expected DegenerateInput, got {other:?}"),
        }
    }

    #[test]
    fn haar_sampling_is_deterministic_and_unitary() {
        let a = random_haar_unitary(4, 123);
        let b = random_haar_unitary(4, 123);
        let c_ = random_haar_unitary(4, 124);
        assert_eq!(a.matrix(), b.matrix());
        assert!((a.matrix() - c_.matrix()).norm() > 1e-3);
        assert!(a.unitarity_defect() < 1e-13);
    }

    #[test]
    fn haar_eigenvalue_angles_are_uniform() {
        // 2000 samples at n = 3; each eigenangle is marginally uniform on the
        // circle, and eigenvalue repulsion only reduces bin variance, so the
        // multinomial 3σ band is conservative.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        const BINS: usize = 12;
        const SAMPLES: usize = 2000;
        let mut counts = [0usize; BINS];
        for _ in 0..SAMPLES {
            let u = haar_from_rng(3, &mut rng);
            let eig = eig_unitary(&u).unwrap();
            for lambda in eig.values {
                let frac = (lambda.arg() / std::f64::consts::TAU).rem_euclid(1.0);
                counts[((frac * BINS as f64) as usize).min(BINS - 1)] += 1;
            }
        }
        let total = (SAMPLES * 3) as f64;
        let expected = total / BINS as f64;
        let sigma = (total * (1.0 / BINS as f64) * (1.0 - 1.0 / BINS as f64)).sqrt();
        for (b, &cnt) in counts.iter().enumerate() {
            assert!(
                (cnt as f64 - expected).abs() < 3.0 * sigma,
                "bin {b} count {cnt} outside 3σ of {expected}"
            );
        }
    }

    #[test]
    fn skew_eigendecomposition_reconstructs_and_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            let a = random_skew_hermitian(n, &mut rng);
            let eig = eig_skew_hermitian(&a).unwrap();
            for w in eig.imag_parts.windows(2) {
                assert!(w[0] >= w[1], "imaginary parts not sorted descending");
            }
            let eye = DMatrix::<Complex64>::identity(n, n);
            assert!((eig.vectors.adjoint() * &eig.vectors - &eye).norm() < 1e-12);
            assert!((eig.assemble() - a.matrix()).norm() < 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn unitary_eigendecomposition_handles_degeneracy() {
        // diag(i, i, -1) conjugated by a Haar unitary: a genuinely repeated
        // eigenvalue plus the cluster-splitting path for cos θ = 0 vs -1.
        let v = random_haar_unitary(3, 9);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 1.0), c(0.0, 1.0), c(-1.0, 0.0)]));
        let h = UnitaryMatrix::new(v.matrix() * d * v.matrix().adjoint()).unwrap();
        let eig = eig_unitary(&h).unwrap();
        for (j, lambda) in eig.values.iter().enumerate() {
            assert!((lambda.norm() - 1.0).abs() < 1e-10);
            let col = eig.vectors.column(j).into_owned();
            let resid = (h.matrix() * &col - col.scale(1.0) * *lambda).norm();
            assert!(resid < 1e-8, "eigenpair residual {resid:.3e}");
        }
        let mut angles: Vec<f64> = eig.values.iter().map(|l| l.arg()).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((angles[0] + std::f64::consts::PI).abs() < 1e-10);
        assert!((angles[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        assert!((angles[2] - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn unitary_eigendecomposition_random_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 2..=6 {
            let u = haar_from_rng(n, &mut rng);
            let eig = eig_unitary(&u).unwrap();
            for (j, lambda) in eig.values.iter().enumerate() {
                let col = eig.vectors.column(j).into_owned();
                let resid = (u.matrix() * &col - col.scale(1.0) * *lambda).norm();
                assert!(resid < 1e-8);
            }
        }
    }
}
