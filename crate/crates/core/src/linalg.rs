//! Small dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Everything here works on dynamically sized matrices because N, K and r are
//! runtime parameters of a scenario.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{FusionError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance used when checking Hermitian symmetry before a factorization.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Augmented vector `[v; conj(v)]`.
pub fn augment(v: &CVector) -> CVector {
    let n = v.len();
    CVector::from_fn(2 * n, |i, _| if i < n { v[i] } else { v[i - n].conj() })
}

/// Augmented matrix `[M; conj(M)]` (rows stacked).
pub fn augment_rows(m: &CMatrix) -> CMatrix {
    let (n, k) = m.shape();
    CMatrix::from_fn(2 * n, k, |i, j| {
        if i < n {
            m[(i, j)]
        } else {
            m[(i - n, j)].conj()
        }
    })
}

/// True when the second half of `v` is the conjugate of the first half.
pub fn is_augmented_consistent(v: &CVector, tol: f64) -> bool {
    if v.len() % 2 != 0 {
        return false;
    }
    let n = v.len() / 2;
    let scale = v.norm().max(1.0);
    (0..n).all(|i| (v[i].conj() - v[i + n]).norm() <= tol * scale)
}

/// Frobenius-relative Hermitian defect `‖M − M†‖ / ‖M‖`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let diff = m - m.adjoint();
    diff.norm() / m.norm().max(1e-300)
}

/// `(M + M†)/2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Cholesky factor of a Hermitian positive-definite matrix.
#[derive(Clone, Debug)]
pub struct HpdFactor {
    chol: Cholesky<Complex64, Dyn>,
}

impl HpdFactor {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(FusionError::InvalidArgument(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = hermitian_defect(m);
        if defect > HERMITIAN_TOL {
            return Err(FusionError::Numerical(format!(
                "matrix is not Hermitian (relative defect {defect:e})"
            )));
        }
        let chol = Cholesky::new(hermitize(m))
            .ok_or_else(|| FusionError::Numerical("matrix is not positive definite".into()))?;
        Ok(Self { chol })
    }

    pub fn solve(&self, v: &CVector) -> CVector {
        self.chol.solve(v)
    }

    pub fn inverse(&self) -> CMatrix {
        hermitize(&self.chol.inverse())
    }

    /// `v† M⁻¹ v`, real for Hermitian `M`.
    pub fn quad_form(&self, v: &CVector) -> f64 {
        v.dotc(&self.solve(v)).re
    }
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending order.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

/// Hermitian eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Full singular value decomposition of a tall matrix `A` (N×r, r ≤ N).
///
/// Returns the complete N×N left unitary factor (range columns first, sorted by
/// decreasing singular value), the r singular values and the r×r right factor,
/// so that `A = U[:, :r] · diag(s) · V†`.
pub fn full_svd(a: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let (n, r) = a.shape();
    if r > n {
        return Err(FusionError::InvalidArgument(format!(
            "full_svd expects a tall matrix, got {n}x{r}"
        )));
    }
    // Zero-padding to a square matrix makes the SVD return the orthogonal complement too.
    let mut padded = CMatrix::zeros(n, n);
    padded.view_mut((0, 0), (n, r)).copy_from(a);
    let svd = padded.svd(true, true);
    let u = svd
        .u
        .ok_or_else(|| FusionError::Numerical("SVD did not return U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| FusionError::Numerical("SVD did not return V".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let u_full = CMatrix::from_fn(n, n, |row, col| u[(row, order[col])]);
    let singular: Vec<f64> = order[..r].iter().map(|&i| svd.singular_values[i]).collect();
    // Right factor restricted to the first r coordinates of the padded problem.
    let v = CMatrix::from_fn(r, r, |row, col| v_t[(order[col], row)].conj());
    Ok((u_full, singular, v))
}

/// Orthogonal projector onto the span of the (orthonormal) columns of `basis`.
pub fn projector(basis: &CMatrix) -> CMatrix {
    hermitize(&(basis * basis.adjoint()))
}

/// Operator 2-norm.
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.singular_values().iter().fold(0.0_f64, |acc, &v| acc.max(v))
}
