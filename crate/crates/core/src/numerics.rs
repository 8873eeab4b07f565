//! Dense linear algebra over `Complex64`.
//!
//! Hermitian eigendecomposition and the SVD are delegated to `nalgebra`;
//! everything built on top of them (square roots, pseudo-inverse,
//! orthonormalization, subspace intersection) lives here.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::{Error, Result};

pub type Scalar = Complex64;
pub type Matrix = DMatrix<Complex64>;
pub type Vector = DVector<Complex64>;

const EIGEN_EPS: f64 = 1e-15;
const MAX_ITER: usize = 10_000;

/// `⟨x, y⟩`, linear in `x` and conjugate-linear in `y`.
pub fn inner(x: &Vector, y: &Vector) -> Scalar {
    y.dotc(x)
}

/// Builds a complex matrix from real rows.
pub fn real_matrix(rows: &[&[f64]]) -> Matrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    Matrix::from_fn(nrows, ncols, |i, j| Complex64::new(rows[i][j], 0.0))
}

pub fn real_vector(entries: &[f64]) -> Vector {
    Vector::from_iterator(
        entries.len(),
        entries.iter().map(|&x| Complex64::new(x, 0.0)),
    )
}

pub fn real_diagonal(entries: &[f64]) -> Matrix {
    Matrix::from_diagonal(&real_vector(entries))
}

/// Frobenius norm.
pub fn fro(m: &Matrix) -> f64 {
    m.norm()
}

/// `‖M − M*‖_F`.
pub fn hermitian_defect(m: &Matrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    fro(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &Matrix, tol: f64) -> bool {
    m.is_square() && hermitian_defect(m) <= tol * fro(m).max(1.0)
}

pub fn hermitian_part(m: &Matrix) -> Matrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigenvalues in ascending order with matching unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl HermitianSpectrum {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of a matrix that is Hermitian within `tol`.
///
/// The input is symmetrized as `(M + M*)/2` before decomposition.
pub fn hermitian_spectrum(m: &Matrix, tol: f64) -> Result<HermitianSpectrum> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(Error::NonFinite("eigendecomposition input"));
    }
    let defect = hermitian_defect(m);
    if defect > tol * fro(m).max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianSpectrum {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(hermitian_part(m), EIGEN_EPS, MAX_ITER)
        .ok_or(Error::DecompositionFailure("Hermitian eigendecomposition"))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianSpectrum { values, vectors })
}

/// Square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[−tol·max(1,‖M‖), 0)` are clamped to zero; anything more
/// negative is rejected.
pub fn psd_sqrt(m: &Matrix, tol: f64) -> Result<Matrix> {
    let spectrum = hermitian_spectrum(m, tol)?;
    let floor = -tol * fro(m).max(1.0);
    if spectrum.min() < floor {
        return Err(Error::NotPositive {
            min_eigenvalue: spectrum.min(),
        });
    }
    let roots = real_vector(
        &spectrum
            .values
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .collect::<Vec<_>>(),
    );
    let v = &spectrum.vectors;
    let r = v * Matrix::from_diagonal(&roots) * v.adjoint();
    Ok(hermitian_part(&r))
}

/// Thin SVD: `M = U diag(σ) V*` with `σ` descending and `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cutoff = rel_tol * self.max();
        if self.max() <= f64::MIN_POSITIVE {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }
}

pub fn svd(m: &Matrix) -> Result<Svd> {
    if !is_finite(m) {
        return Err(Error::NonFinite("SVD input"));
    }
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: Matrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v: Matrix::zeros(cols, 0),
        });
    }
    let dec = SVD::try_new(m.clone(), true, true, EIGEN_EPS, MAX_ITER)
        .ok_or(Error::DecompositionFailure("SVD"))?;
    let u = dec.u.ok_or(Error::DecompositionFailure("SVD"))?;
    let v_t = dec.v_t.ok_or(Error::DecompositionFailure("SVD"))?;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    Ok(Svd {
        u: Matrix::from_fn(rows, k, |i, j| u[(i, order[j])]),
        singular_values: order.iter().map(|&j| dec.singular_values[j]).collect(),
        v: Matrix::from_fn(cols, k, |i, j| v_t[(order[j], i)].conj()),
    })
}

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> Result<f64> {
    Ok(svd(m)?.max())
}

/// Sum of singular values, `tr|M|`.
pub fn trace_norm(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "trace norm needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(svd(m)?.singular_values.iter().sum())
}

/// `σ_max / σ_min`; infinite for singular or non-square input.
pub fn condition_number(m: &Matrix) -> Result<f64> {
    if !m.is_square() || m.nrows() == 0 {
        return Ok(f64::INFINITY);
    }
    let s = svd(m)?;
    let smin = *s.singular_values.last().unwrap();
    Ok(if smin > 0.0 {
        s.max() / smin
    } else {
        f64::INFINITY
    })
}

/// Moore–Penrose pseudo-inverse; singular values below `rel_cutoff · σ_max` count as zero.
pub fn pinv(m: &Matrix, rel_cutoff: f64) -> Result<Matrix> {
    let s = svd(m)?;
    let cutoff = rel_cutoff * s.max();
    let mut out = Matrix::zeros(m.ncols(), m.nrows());
    for (j, &sigma) in s.singular_values.iter().enumerate() {
        if sigma > cutoff && sigma > 0.0 {
            out += (s.v.column(j) * s.u.column(j).adjoint()).scale(1.0 / sigma);
        }
    }
    Ok(out)
}

/// Numerical rank with tolerance relative to the largest singular value.
pub fn rank(m: &Matrix, rel_tol: f64) -> Result<usize> {
    Ok(svd(m)?.rank(rel_tol))
}

/// Rotates each column so its largest-modulus entry is real and positive.
fn fix_phases(mut m: Matrix) -> Matrix {
    for mut col in m.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(Complex64::new(0.0, 0.0));
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            col.iter_mut().for_each(|z| *z *= phase);
        }
    }
    m
}

/// Orthonormal basis of the column span; rank is detected relative to the
/// largest singular value.
pub fn orthonormalize(columns: &Matrix, tol: f64) -> Result<Matrix> {
    let s = svd(columns)?;
    let r = s.rank(tol);
    if r == 0 {
        return Err(Error::ZeroSubspace);
    }
    Ok(fix_phases(s.u.columns(0, r).into_owned()))
}

/// `max ‖U*U − I‖` entry; small for a matrix with orthonormal columns.
pub fn orthonormality_defect(basis: &Matrix) -> f64 {
    let k = basis.ncols();
    (basis.adjoint() * basis - Matrix::identity(k, k)).camax()
}

/// Orthonormal basis (possibly with zero columns) of `⋂ span(U_k)`.
///
/// The intersection is the null space of the stacked complement projections
/// `I − U_k U_k*`; a right singular vector belongs to it when its singular
/// value is at most `tol`.
pub fn subspace_intersection(bases: &[Matrix], tol: f64) -> Result<Matrix> {
    let n = match bases.first() {
        Some(b) => b.nrows(),
        None => return Err(Error::DimensionMismatch("no subspaces to intersect".into())),
    };
    if let Some(b) = bases.iter().find(|b| b.nrows() != n) {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions {} and {} differ",
            n,
            b.nrows()
        )));
    }
    if bases.iter().any(|b| b.ncols() == 0) {
        return Ok(Matrix::zeros(n, 0));
    }
    let mut stacked = Matrix::zeros(n * bases.len(), n);
    for (k, b) in bases.iter().enumerate() {
        let complement = Matrix::identity(n, n) - b * b.adjoint();
        stacked.view_mut((k * n, 0), (n, n)).copy_from(&complement);
    }
    let s = svd(&stacked)?;
    let null: Vec<usize> = (0..n).filter(|&j| s.singular_values[j] <= tol).collect();
    let mut out = Matrix::zeros(n, null.len());
    for (c, &j) in null.iter().enumerate() {
        out.set_column(c, &s.v.column(j));
    }
    Ok(fix_phases(out))
}
