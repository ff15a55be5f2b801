//! Dense complex linear algebra used by every other module.
//!
//! Vectors and matrices are `nalgebra` dense types over `Complex<f64>`. The functions here add
//! the checks the rest of the crate relies on: finiteness, Hermitian symmetry, pivot size and
//! solve residuals.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex;
use num_traits::Float;

use crate::{Error, Result, Tolerances};

#[allow(non_camel_case_types)]
pub type c64 = Complex<f64>;
pub type CVec = DVector<c64>;
pub type CMat = DMatrix<c64>;

const SCHUR_MAX_ITER: usize = 10_000;

pub fn c(re: f64, im: f64) -> c64 {
    Complex::new(re, im)
}

pub fn real(re: f64) -> c64 {
    Complex::new(re, 0.0)
}

/// The standard basis vector `e_p` of `ℂ^dim`.
pub fn unit(dim: usize, p: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[p] = real(1.0);
    v
}

pub fn is_finite(z: &c64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn check_finite<'a>(entries: impl IntoIterator<Item = &'a c64>, what: &'static str) -> Result<()> {
    if entries.into_iter().all(is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// A vector from its entries, rejecting NaN and infinities.
pub fn vector(entries: &[c64]) -> Result<CVec> {
    check_finite(entries, "vector")?;
    Ok(CVec::from_column_slice(entries))
}

/// A matrix from row-major entries, rejecting NaN and infinities.
pub fn matrix(rows: usize, cols: usize, row_major: &[c64]) -> Result<CMat> {
    if row_major.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            found: row_major.len(),
        });
    }
    check_finite(row_major, "matrix")?;
    Ok(CMat::from_row_slice(rows, cols, row_major))
}

pub fn diagonal(values: &[c64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(values))
}

/// `⟨u, v⟩ = Σ u_k conj(v_k)`, linear in `u` and conjugate-linear in `v`.
pub fn inner(u: &CVec, v: &CVec) -> Result<c64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(v.dotc(u))
}

/// `‖M − M*‖_F / max(1, ‖M‖_F)`.
pub fn hermitian_asymmetry(m: &CMat) -> f64 {
    let diff = m - m.adjoint();
    diff.norm() / m.norm().max(1.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn top_vector(&self) -> CVec {
        self.vectors.column(self.vectors.ncols() - 1).into_owned()
    }
}

pub fn hermitian_eigen(m: &CMat, tol: &Tolerances) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    check_finite(m.iter(), "matrix")?;
    let asymmetry = hermitian_asymmetry(m);
    if asymmetry > tol.herm {
        return Err(Error::NotHermitian { asymmetry });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        });
    }
    let sym = (m + m.adjoint()) * real(0.5);
    let eig = SymmetricEigen::try_new(sym.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(Error::NonConvergence {
            iterations: SCHUR_MAX_ITER,
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let lambda = CMat::from_diagonal(&CVec::from_iterator(n, values.iter().map(|&v| real(v))));
    let recon = &vectors * lambda * vectors.adjoint();
    if (recon - &sym).norm() > tol.eig * sym.norm().max(1.0) {
        return Err(Error::NonConvergence {
            iterations: SCHUR_MAX_ITER,
        });
    }
    Ok(HermitianEigen { values, vectors })
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigs(m: &CMat, tol: &Tolerances) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m, tol)?.values)
}

fn lu_checked(m: &CMat, tol: &Tolerances) -> Result<nalgebra::LU<c64, nalgebra::Dyn, nalgebra::Dyn>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    check_finite(m.iter(), "matrix")?;
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Singular {
            pivot_index: 0,
            pivot: 0.0,
        });
    }
    let lu = m.clone().lu();
    let u = lu.u();
    for i in 0..u.nrows() {
        let pivot = u[(i, i)].norm();
        if pivot < tol.pivot * scale {
            return Err(Error::Singular {
                pivot_index: i,
                pivot,
            });
        }
    }
    Ok(lu)
}

/// Solve `M x = b` by partial-pivot LU.
///
/// Pivots below `tol.pivot` times the largest entry of `M` are reported as singular, and the
/// result must satisfy `‖Mx − b‖ ≤ tol.solve · (‖M‖·‖x‖ + ‖b‖)`.
pub fn solve(m: &CMat, b: &CVec, tol: &Tolerances) -> Result<CVec> {
    if m.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: b.len(),
        });
    }
    check_finite(b.iter(), "right-hand side")?;
    let lu = lu_checked(m, tol)?;
    let x = lu.solve(b).ok_or(Error::Singular {
        pivot_index: 0,
        pivot: 0.0,
    })?;
    let residual = (m * &x - b).norm();
    if residual > tol.solve * (m.norm() * x.norm() + b.norm()) {
        return Err(Error::IllConditioned { residual });
    }
    Ok(x)
}

/// Solve `M X = B` column by column with the same checks as [`solve`].
pub fn solve_matrix(m: &CMat, b: &CMat, tol: &Tolerances) -> Result<CMat> {
    if m.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: b.nrows(),
        });
    }
    let lu = lu_checked(m, tol)?;
    let x = lu.solve(b).ok_or(Error::Singular {
        pivot_index: 0,
        pivot: 0.0,
    })?;
    let residual = (m * &x - b).norm();
    if residual > tol.solve * (m.norm() * x.norm() + b.norm()) {
        return Err(Error::IllConditioned { residual });
    }
    Ok(x)
}

/// All eigenvalues of a general square matrix, via a complex Schur form.
pub fn eigenvalues(a: &CMat) -> Result<Vec<c64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    check_finite(a.iter(), "matrix")?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(
        Error::NonConvergence {
            iterations: SCHUR_MAX_ITER,
        },
    )?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// `ρ(A) = max |μ|` over the eigenvalues `μ` of `A`.
pub fn spectral_radius(a: &CMat) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Largest singular value.
pub fn operator_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

/// `Aⁿ` by repeated squaring.
pub fn matrix_power(a: &CMat, mut n: u64) -> CMat {
    let mut result = CMat::identity(a.nrows(), a.ncols());
    let mut base = a.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// An orthonormal basis of the column span, as columns.
///
/// Modified Gram-Schmidt with one re-orthogonalisation pass. A column whose remainder falls
/// below `rank_tol` times the largest input column norm is dropped, so rank-deficient input
/// comes back with fewer columns.
pub fn orthonormal_basis(columns: &CMat, rank_tol: f64) -> Result<CMat> {
    check_finite(columns.iter(), "matrix")?;
    let scale = columns
        .column_iter()
        .map(|col| col.norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::ZeroInput);
    }
    let mut basis: Vec<CVec> = Vec::new();
    for col in columns.column_iter() {
        let mut v = col.into_owned();
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm > rank_tol * scale {
            basis.push(v / real(norm));
        }
    }
    Ok(CMat::from_columns(&basis))
}

/// Orthogonal projector `B B*` onto the span of orthonormal columns `B`.
pub fn projector(basis: &CMat) -> CMat {
    basis * basis.adjoint()
}

pub(crate) fn sqrt(x: f64) -> f64 {
    Float::sqrt(x)
}
