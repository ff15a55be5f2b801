//! Frames and Bessel families of finitely many vectors.
//!
//! A family `{f_k}` has frame operator `Θ f = Σ ⟨f, f_k⟩ f_k = S S* f`, where `S` is the
//! synthesis matrix whose columns are the `f_k`. Its extreme eigenvalues are the optimal
//! bounds in `α‖f‖² ≤ Σ |⟨f, f_k⟩|² ≤ β‖f‖²`.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lambda::{IndexMap, LambdaIndex};
use crate::numerics::{check_finite, hermitian_eigs, solve_matrix, CMat, CVec};
use crate::{random, Error, Result, Tolerances};

/// An ordered family of vectors of common length, optionally labelled by points of `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFamily {
    vectors: Vec<CVec>,
    labels: Option<Vec<LambdaIndex>>,
}

impl VectorFamily {
    pub fn new(vectors: Vec<CVec>) -> Result<Self> {
        let first = vectors.first().ok_or(Error::EmptyFamily)?;
        let dim = first.len();
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            check_finite(v.iter(), "family vector")?;
        }
        Ok(Self {
            vectors,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<LambdaIndex>) -> Result<Self> {
        if labels.len() != self.vectors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vectors.len(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// The columns of `m` as a family.
    pub fn from_columns(m: &CMat) -> Result<Self> {
        Self::new(m.column_iter().map(|c| c.into_owned()).collect())
    }

    /// The standard basis of `ℂ^dim`, labelled by the window `[2K]` when `dim = 4K`.
    pub fn standard_basis(dim: usize) -> Self {
        let vectors = (0..dim).map(|p| crate::numerics::unit(dim, p)).collect();
        let labels = IndexMap::new(dim).ok().map(|map| map.labels());
        Self { vectors, labels }
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.vectors
    }

    pub fn labels(&self) -> Option<&[LambdaIndex]> {
        self.labels.as_deref()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, CVec> {
        self.vectors.iter()
    }

    /// The synthesis matrix `S` with the family as columns.
    pub fn synthesis_matrix(&self) -> CMat {
        CMat::from_columns(&self.vectors)
    }

    /// Every vector transformed by `m`; labels are kept.
    pub fn map(&self, m: &CMat) -> Result<Self> {
        if m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.ncols(),
                found: self.dim(),
            });
        }
        let vectors = self.vectors.iter().map(|v| m * v).collect();
        Ok(Self {
            vectors,
            labels: self.labels.clone(),
        })
    }

    /// The family with vector `j` removed. Returns `None` if that would leave it empty.
    pub fn without(&self, j: usize) -> Option<Self> {
        if self.len() <= 1 || j >= self.len() {
            return None;
        }
        let mut vectors = self.vectors.clone();
        vectors.remove(j);
        let labels = self.labels.clone().map(|mut l| {
            l.remove(j);
            l
        });
        Some(Self { vectors, labels })
    }

    /// Both families, one after the other. Labels are dropped.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut vectors = self.vectors.clone();
        vectors.extend(other.vectors.iter().cloned());
        Self::new(vectors)
    }
}

/// Optimal lower and upper frame bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    pub alpha: f64,
    pub beta: f64,
}

impl FrameBounds {
    pub fn is_frame(&self, tol: &Tolerances) -> bool {
        self.alpha > tol.frame
    }
}

/// A family paired with a source family, e.g. the canonical dual `{Θ⁻¹ f_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualFamily {
    family: VectorFamily,
}

impl DualFamily {
    /// Wrap an arbitrary candidate dual. Validity is checked by [`verify_dual_pair`].
    pub fn from_family(family: VectorFamily) -> Self {
        Self { family }
    }

    pub fn family(&self) -> &VectorFamily {
        &self.family
    }

    pub fn into_family(self) -> VectorFamily {
        self.family
    }

    pub fn vectors(&self) -> &[CVec] {
        self.family.vectors()
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }
}

pub fn frame_operator(family: &VectorFamily) -> CMat {
    let s = family.synthesis_matrix();
    &s * s.adjoint()
}

fn bounds_of(theta: &CMat, tol: &Tolerances) -> Result<FrameBounds> {
    let eig = hermitian_eigs(theta, tol)?;
    let alpha = eig.first().copied().unwrap_or(0.0).max(0.0);
    let beta = eig.last().copied().unwrap_or(0.0).max(0.0);
    Ok(FrameBounds { alpha, beta })
}

pub fn frame_bounds(family: &VectorFamily, tol: &Tolerances) -> Result<FrameBounds> {
    bounds_of(&frame_operator(family), tol)
}

pub fn canonical_dual(family: &VectorFamily, tol: &Tolerances) -> Result<DualFamily> {
    let theta = frame_operator(family);
    let bounds = bounds_of(&theta, tol)?;
    if !bounds.is_frame(tol) {
        return Err(Error::NotAFrame {
            alpha: bounds.alpha,
        });
    }
    let dual = solve_matrix(&theta, &family.synthesis_matrix(), tol)?;
    let mut fam = VectorFamily::from_columns(&dual)?;
    fam.labels = family.labels.clone();
    Ok(DualFamily::from_family(fam))
}

/// Frame coefficients `c_k = ⟨f, f_k⟩`.
pub fn analysis(f: &CVec, family: &VectorFamily) -> Result<CVec> {
    if f.len() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: f.len(),
        });
    }
    Ok(CVec::from_iterator(
        family.len(),
        family.iter().map(|fk| fk.dotc(f)),
    ))
}

/// `Σ c_k f_k`.
pub fn synthesis(coeffs: &CVec, family: &VectorFamily) -> Result<CVec> {
    if coeffs.len() != family.len() {
        return Err(Error::DimensionMismatch {
            expected: family.len(),
            found: coeffs.len(),
        });
    }
    let mut out = CVec::zeros(family.dim());
    for (ck, fk) in coeffs.iter().zip(family.iter()) {
        out.axpy(*ck, fk, crate::numerics::real(1.0));
    }
    Ok(out)
}

/// Largest `‖f − Σ ⟨f, g_k⟩ f_k‖` over `trials` random unit vectors `f` drawn from `seed`.
pub fn verify_dual_pair(
    family: &VectorFamily,
    dual: &DualFamily,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let dual = dual.family();
    if dual.len() != family.len() {
        return Err(Error::DimensionMismatch {
            expected: family.len(),
            found: dual.len(),
        });
    }
    if dual.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: dual.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let f = random::unit_vector(&mut rng, family.dim());
        let recon = synthesis(&analysis(&f, dual)?, family)?;
        worst = worst.max((f - recon).norm());
    }
    Ok(worst)
}

/// `Σ|c_k|² − Σ|⟨f, Θ⁻¹f_k⟩|²` for a representation `f = Σ c_k f_k`.
///
/// The canonical coefficients have the least energy among all representations, so the
/// result is nonnegative and equals `Σ|c_k − ⟨f, Θ⁻¹f_k⟩|²`.
pub fn min_norm_gap(f: &CVec, family: &VectorFamily, coeffs: &CVec, tol: &Tolerances) -> Result<f64> {
    let recon = synthesis(coeffs, family)?;
    let residual = (&recon - f).norm();
    if residual > 1e-8 * f.norm().max(1.0) {
        return Err(Error::NotRepresented { residual });
    }
    let dual = canonical_dual(family, tol)?;
    let canonical = analysis(f, dual.family())?;
    Ok(coeffs.norm_squared() - canonical.norm_squared())
}

/// `B* v` for every vector: the family expressed in the coordinates of an orthonormal basis `B`
/// of a subspace `W`. This is `P_W f_k` written in `W`-coordinates.
pub fn project_family(family: &VectorFamily, w_basis: &CMat) -> Result<VectorFamily> {
    check_orthonormal(w_basis)?;
    family.map(&w_basis.adjoint())
}

pub(crate) fn check_orthonormal(w_basis: &CMat) -> Result<()> {
    let p = w_basis.ncols();
    if p == 0 {
        return Err(Error::InvalidInput("W basis has no columns".into()));
    }
    let gram_err = (w_basis.adjoint() * w_basis - CMat::identity(p, p)).norm();
    if gram_err > 1e-8 {
        return Err(Error::InvalidInput(alloc::format!(
            "W basis columns are not orthonormal (Gram error {gram_err:e})"
        )));
    }
    Ok(())
}

/// Bounds of `{P_W f_k}` as a frame for `W`, computed in `W`-coordinates.
pub fn subspace_frame_bounds(
    family: &VectorFamily,
    w_basis: &CMat,
    tol: &Tolerances,
) -> Result<FrameBounds> {
    frame_bounds(&project_family(family, w_basis)?, tol)
}
