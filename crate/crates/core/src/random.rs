//! Seeded random generators for vectors, matrices and families.
//!
//! Entries are drawn uniformly from the square `[-1, 1] × [-1, 1]i`. Used by the scenario
//! builders, by [`crate::frames::verify_dual_pair`] and by the test suites.

use alloc::vec::Vec;

use rand::Rng;

use crate::frames::{frame_bounds, VectorFamily};
use crate::numerics::{c, orthonormal_basis, real, CMat, CVec};
use crate::Tolerances;

fn entry<R: Rng + ?Sized>(rng: &mut R) -> crate::c64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVec {
    CVec::from_fn(dim, |_, _| entry(rng))
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVec {
    loop {
        let v = vector(rng, dim);
        let n = v.norm();
        if n > 1e-3 {
            return v / real(n);
        }
    }
}

pub fn matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| entry(rng))
}

/// A random unitary matrix (orthonormalised random square matrix).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    loop {
        let q = orthonormal_basis(&matrix(rng, dim, dim), 1e-8).expect("nonzero random matrix");
        if q.ncols() == dim {
            return q;
        }
    }
}

/// A random matrix rescaled to operator norm `norm`.
pub fn matrix_with_norm<R: Rng + ?Sized>(rng: &mut R, dim: usize, norm: f64) -> CMat {
    let m = matrix(rng, dim, dim);
    let current = crate::numerics::operator_norm(&m);
    m * real(norm / current)
}

/// A family of `count` random vectors in `ℂ^dim`.
pub fn family<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> VectorFamily {
    let vectors: Vec<CVec> = (0..count).map(|_| vector(rng, dim)).collect();
    VectorFamily::new(vectors).expect("nonempty uniform family")
}

/// A random frame of `count ≥ dim` vectors with lower bound at least `min_alpha`.
///
/// Panics if `count < dim`.
pub fn frame<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize, min_alpha: f64) -> VectorFamily {
    assert!(count >= dim, "a frame of ℂ^{dim} needs at least {dim} vectors");
    let tol = Tolerances::default();
    loop {
        let fam = family(rng, dim, count);
        if frame_bounds(&fam, &tol).map(|b| b.alpha >= min_alpha).unwrap_or(false) {
            return fam;
        }
    }
}

/// A Parseval frame: the columns of the first `dim` rows of a random `count × count` unitary.
pub fn parseval_frame<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> VectorFamily {
    assert!(count >= dim);
    let u = unitary(rng, count);
    let rows = u.rows(0, dim).into_owned();
    let vectors: Vec<CVec> = rows.column_iter().map(|col| col.into_owned()).collect();
    VectorFamily::new(vectors).expect("nonempty uniform family")
}
