//! Reconstruction of the source term from the data matrix.
//!
//! Two regimes are covered. With finitely many iterations, two consecutive rows of the data
//! matrix determine `w` whenever `{g_j}` is a frame for the whole space. With infinitely many
//! iterations, the rows converge to the samples of the stationary state `S(w)`, and `w` is
//! recoverable from that limit exactly when `{S* g_j}` is a frame for `W`.

use alloc::vec::Vec;

use crate::dynamics::{bs_membership, simulate, data_matrix, DataMatrix, SystemSpec};
use crate::frames::{
    analysis, canonical_dual, check_orthonormal, frame_bounds, project_family, synthesis,
    verify_dual_pair, DualFamily, FrameBounds, VectorFamily,
};
use crate::lambda::{Branch, IndexMap, LambdaIndex};
use crate::numerics::{
    c64, hermitian_eigen, orthonormal_basis, solve, solve_matrix, spectral_radius, CMat, CVec,
};
use crate::{Error, Result, Tolerances};

const DUAL_CHECK_TRIALS: usize = 8;
const DUAL_CHECK_SEED: u64 = 0x6475_616c;

/// `c_ij = ⟨A* g_j, g̃_i⟩`, so that `A* g_j = Σ_i c_ij g_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    /// Row `i` is the dual index, column `j` the sampling index.
    pub entries: CMat,
}

impl CouplingMatrix {
    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.entries[(i, j)]
    }
}

fn check_dual(g: &VectorFamily, gdual: &DualFamily, tol: &Tolerances) -> Result<()> {
    let residual = verify_dual_pair(g, gdual, DUAL_CHECK_TRIALS, DUAL_CHECK_SEED)?;
    if residual > tol.dual {
        return Err(Error::InvalidDual { residual });
    }
    Ok(())
}

fn check_square(a: &CMat, dim: usize) -> Result<()> {
    for found in [a.nrows(), a.ncols()] {
        if found != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found,
            });
        }
    }
    Ok(())
}

pub fn coupling_matrix(
    a: &CMat,
    g: &VectorFamily,
    gdual: &DualFamily,
    tol: &Tolerances,
) -> Result<CouplingMatrix> {
    check_square(a, g.dim())?;
    check_dual(g, gdual, tol)?;
    let s = g.synthesis_matrix();
    let a_star_g = a.adjoint() * &s;
    let entries = gdual.family().synthesis_matrix().adjoint() * &a_star_g;
    let recon = &s * &entries;
    for (j, col) in a_star_g.column_iter().enumerate() {
        let residual = (col - recon.column(j)).norm();
        if residual > tol.dual * col.norm().max(1.0) {
            return Err(Error::InvalidDual { residual });
        }
    }
    Ok(CouplingMatrix { entries })
}

/// Which recurrence branch links the two rows used for finite recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecoveryCase {
    /// `λ ∈ 2ℤ`.
    Even,
    /// `λ ∈ 2ℤ⁺ + r/N` or `λ = r/N`.
    PositiveOffset,
    /// `λ ∈ 2ℤ⁻ + r/N`.
    NegativeOffset,
}

impl RecoveryCase {
    pub fn of(idx: LambdaIndex) -> Self {
        match idx.branch() {
            Branch::EvenAny => Self::Even,
            Branch::PosOffset => Self::PositiveOffset,
            Branch::NegOffset => Self::NegativeOffset,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Even => "i",
            Self::PositiveOffset => "ii",
            Self::NegativeOffset => "iii",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "i" => Some(Self::Even),
            "ii" => Some(Self::PositiveOffset),
            "iii" => Some(Self::NegativeOffset),
            _ => None,
        }
    }
}

/// Result of a finite-iteration reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRecovery {
    pub w_hat: CVec,
    pub case: RecoveryCase,
    /// Data consistency of `(û, ŵ)` against the two rows used.
    pub residual: f64,
}

/// Recover `w` from rows `at` and `successor(at)`:
/// `û = Σ_k D[at][k] g̃_k`, then `ŵ = Σ_j (D[succ][j] − ⟨A û, g_j⟩) g̃_j`.
pub fn reconstruct_finite(
    d: &DataMatrix,
    at: LambdaIndex,
    a: &CMat,
    g: &VectorFamily,
    gdual: &DualFamily,
    tol: &Tolerances,
) -> Result<FiniteRecovery> {
    check_square(a, g.dim())?;
    let bounds = frame_bounds(g, tol)?;
    if !bounds.is_frame(tol) {
        return Err(Error::NotAFrame {
            alpha: bounds.alpha,
        });
    }
    let now = d.row(at)?;
    let next = d.row(at.successor())?;
    let u_hat = synthesis(now, gdual.family())?;
    let pushed = a * &u_hat;
    let w_hat = synthesis(&(next - analysis(&pushed, g)?), gdual.family())?;
    let residual = (analysis(&u_hat, g)? - now).norm() + (analysis(&(pushed + &w_hat), g)? - next).norm();
    Ok(FiniteRecovery {
        w_hat,
        case: RecoveryCase::of(at),
        residual,
    })
}

/// The same reconstruction through the coupling matrix:
/// `ŵ = Σ_j (D[succ][j] − Σ_i conj(c_ij) D[at][i]) g̃_j`.
pub fn reconstruct_finite_coupled(
    d: &DataMatrix,
    at: LambdaIndex,
    coupling: &CouplingMatrix,
    gdual: &DualFamily,
) -> Result<CVec> {
    let now = d.row(at)?;
    let next = d.row(at.successor())?;
    let predicted = coupling.entries.adjoint() * now;
    synthesis(&(next - predicted), gdual.family())
}

/// Frame bounds of `{g_j}`; `w` is stably recoverable from finitely many iterations for every
/// `A` and `W = ℋ` exactly when the lower bound is positive.
pub fn recovery_certificate_full(g: &VectorFamily, tol: &Tolerances) -> Result<FrameBounds> {
    frame_bounds(g, tol)
}

fn resolvent_adjoint_family(a: &CMat, g: &VectorFamily, tol: &Tolerances) -> Result<CMat> {
    check_square(a, g.dim())?;
    let dim = g.dim();
    solve_matrix(&(CMat::identity(dim, dim) - a.adjoint()), &g.synthesis_matrix(), tol)
        .map_err(|e| match e {
            Error::Singular { .. } | Error::IllConditioned { .. } => Error::OneInSpectrum,
            other => other,
        })
}

/// Frame bounds of `{P_W (I − A*)⁻¹ g_j}` as a frame for `W`.
///
/// This is a necessary condition for finite-window recovery of sources in `W`, not a
/// sufficient one.
pub fn subspace_condition(
    a: &CMat,
    g: &VectorFamily,
    w_basis: &CMat,
    tol: &Tolerances,
) -> Result<FrameBounds> {
    let resolved = VectorFamily::from_columns(&resolvent_adjoint_family(a, g, tol)?)?;
    frame_bounds(&project_family(&resolved, w_basis)?, tol)
}

/// The map `S: W → ℋ` sending a source to its stationary state, together with `{S* g_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryMap {
    /// `dim × p` matrix acting on `W`-coordinates.
    pub apply: CMat,
    pub w_basis: CMat,
    /// `S* g_j` in `W`-coordinates.
    pub adjoint_family: VectorFamily,
}

impl StationaryMap {
    pub fn new(apply: CMat, w_basis: CMat, g: &VectorFamily) -> Result<Self> {
        check_orthonormal(&w_basis)?;
        if apply.nrows() != g.dim() || apply.nrows() != w_basis.nrows() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                found: apply.nrows(),
            });
        }
        if apply.ncols() != w_basis.ncols() {
            return Err(Error::DimensionMismatch {
                expected: w_basis.ncols(),
                found: apply.ncols(),
            });
        }
        let adjoint_family = g.map(&apply.adjoint())?;
        Ok(Self {
            apply,
            w_basis,
            adjoint_family,
        })
    }

    /// `S(w)` for `w ∈ W` given in ambient coordinates.
    pub fn stationary_state(&self, w: &CVec) -> CVec {
        &self.apply * (self.w_basis.adjoint() * w)
    }
}

/// `S = (I − A)⁻¹` restricted to `W`, valid when `ρ(A) < 1`.
pub fn stationary_map_from_a(
    a: &CMat,
    g: &VectorFamily,
    w_basis: &CMat,
    tol: &Tolerances,
) -> Result<StationaryMap> {
    check_square(a, g.dim())?;
    let rho = spectral_radius(a)?;
    if rho >= 1.0 - tol.rho_margin {
        return Err(Error::SpectralRadiusTooLarge { rho });
    }
    let dim = a.nrows();
    let apply = solve_matrix(&(CMat::identity(dim, dim) - a), w_basis, tol)?;
    StationaryMap::new(apply, w_basis.clone(), g)
}

/// Numerical audit of a trajectory supplier against a stationary map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryCheck {
    /// Largest `‖x_λ − S(w)‖` when both orbits start at `S(w)`.
    pub stationarity: f64,
    /// `‖x_λ − S(w)‖` at the two outermost window points for the spec's own initial states.
    pub convergence_gap: f64,
}

/// Check that `S(w)` is a fixed state of the dynamics and that both orbits approach it.
pub fn check_stationary_contract(spec: &SystemSpec, smap: &StationaryMap, tol: &Tolerances) -> Result<StationaryCheck> {
    let s = smap.stationary_state(&spec.w);
    let fixed = spec.with_states(s.clone(), s.clone(), spec.w.clone(), tol)?;
    let stationarity = simulate(&fixed)
        .iter()
        .map(|(_, x)| (x - &s).norm())
        .fold(0.0, f64::max);
    let traj = simulate(spec);
    let window = spec.window();
    let ends = [window[0], window[window.len() - 1]];
    let convergence_gap = ends
        .iter()
        .filter_map(|idx| traj.get(*idx))
        .map(|x| (x - &s).norm())
        .fold(0.0, f64::max);
    Ok(StationaryCheck {
        stationarity,
        convergence_gap,
    })
}

/// A limit of `Σ_j D[λ][j] G_j` as `|λ| → ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub vector: CVec,
    pub tail_gap: f64,
    /// `sqrt(β_G) ·` tail gap: how far the evaluated rows may be from the true limit.
    pub uncertainty: f64,
}

pub fn limit_operator(
    d: &DataMatrix,
    family: &VectorFamily,
    tail: usize,
    tol: &Tolerances,
) -> Result<LimitEstimate> {
    let m = bs_membership(d, tail, tol)?;
    if !m.member {
        return Err(Error::NotInBs {
            gap: m.tail_gap,
            tol: tol.bs,
        });
    }
    let vector = synthesis(&m.limit_row, family)?;
    let beta = frame_bounds(family, tol)?.beta;
    Ok(LimitEstimate {
        vector,
        tail_gap: m.tail_gap,
        uncertainty: crate::numerics::sqrt(beta) * m.tail_gap,
    })
}

/// Frame bounds, spectral radius, tail gap and case tag attached to a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub alpha: f64,
    pub beta: f64,
    pub rho: Option<f64>,
    pub tail_gap: Option<f64>,
    pub case: Option<RecoveryCase>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub w_hat: CVec,
    /// `‖ŵ − w‖`, present only when the true source was supplied.
    pub abs_error: Option<f64>,
    pub residual: f64,
    pub diagnostics: Diagnostics,
}

/// Finite recovery at `at`, packaged with the frame bounds of `{g_j}`.
pub fn finite_report(
    d: &DataMatrix,
    at: LambdaIndex,
    a: &CMat,
    g: &VectorFamily,
    truth: Option<&CVec>,
    tol: &Tolerances,
) -> Result<RecoveryReport> {
    let bounds = frame_bounds(g, tol)?;
    if !bounds.is_frame(tol) {
        return Err(Error::NotAFrame {
            alpha: bounds.alpha,
        });
    }
    let dual = canonical_dual(g, tol)?;
    let rec = reconstruct_finite(d, at, a, g, &dual, tol)?;
    Ok(RecoveryReport {
        abs_error: truth.map(|w| (&rec.w_hat - w).norm()),
        w_hat: rec.w_hat,
        residual: rec.residual,
        diagnostics: Diagnostics {
            alpha: bounds.alpha,
            beta: bounds.beta,
            rho: spectral_radius(a).ok(),
            tail_gap: None,
            case: Some(rec.case),
        },
    })
}

/// Recover `w` from the limit of the rows of `D`.
///
/// The dual `{g̃_j}` of `{S* g_j}` in `W` is lifted to `ℋ` through the basis of `W`, and
/// `ŵ = lim_λ Σ_j D[λ][j] g̃_j`. The residual compares the limit row with the samples of
/// `S(ŵ)`.
pub fn reconstruct_infinite(
    d: &DataMatrix,
    smap: &StationaryMap,
    g: &VectorFamily,
    tail: usize,
    truth: Option<&CVec>,
    tol: &Tolerances,
) -> Result<RecoveryReport> {
    let bounds = frame_bounds(&smap.adjoint_family, tol)?;
    if !bounds.is_frame(tol) {
        return Err(Error::NotStablyRecoverable {
            alpha: bounds.alpha,
        });
    }
    let lifted = lifted_dual(smap, tol)?;
    let limit = limit_operator(d, &lifted, tail, tol)?;
    let limit_row = bs_membership(d, tail, tol)?.limit_row;
    let residual = (analysis(&smap.stationary_state(&limit.vector), g)? - limit_row).norm();
    Ok(RecoveryReport {
        abs_error: truth.map(|w| (&limit.vector - w).norm()),
        w_hat: limit.vector,
        residual,
        diagnostics: Diagnostics {
            alpha: bounds.alpha,
            beta: bounds.beta,
            rho: None,
            tail_gap: Some(limit.tail_gap),
            case: None,
        },
    })
}

/// The canonical dual of `{S* g_j}` in `W`, mapped into `ℋ` by the basis of `W`.
pub fn lifted_dual(smap: &StationaryMap, tol: &Tolerances) -> Result<VectorFamily> {
    canonical_dual(&smap.adjoint_family, tol)?
        .family()
        .map(&smap.w_basis)
}

/// A unit vector `δ ∈ W` with `⟨S δ, g_j⟩ = 0` for every `j`, if `{S* g_j}` fails to be a
/// frame for `W`. Sources `w` and `w + δ` then have identical limit rows.
pub fn indistinguishable_direction(smap: &StationaryMap, tol: &Tolerances) -> Result<Option<CVec>> {
    let theta = crate::frames::frame_operator(&smap.adjoint_family);
    let eig = hermitian_eigen(&theta, tol)?;
    if eig.min() > tol.frame {
        return Ok(None);
    }
    let v = eig.vectors.column(0).into_owned();
    Ok(Some(&smap.w_basis * v))
}

/// The unit row `z` maximising `‖Σ_j z_j g_j‖`: the coefficients of the top eigenvector of
/// the frame operator, normalised. The constant-row matrix with row `z` attains
/// `‖lim‖ = sqrt(β) · sup_row_norm`.
pub fn extremal_row(g: &VectorFamily, tol: &Tolerances) -> Result<CVec> {
    let eig = hermitian_eigen(&crate::frames::frame_operator(g), tol)?;
    let z = analysis(&eig.top_vector(), g)?;
    let n = z.norm();
    if n == 0.0 {
        return Err(Error::ZeroInput);
    }
    Ok(z / crate::numerics::real(n))
}

/// Initial states that hide a source from a single sampling vector on the whole window.
#[derive(Debug, Clone, PartialEq)]
pub struct Nullifier {
    pub x0: CVec,
    pub xm2: CVec,
    /// `g = (I − A) w`.
    pub g: CVec,
    /// `⟨x_λ, g⟩` for every `λ` in the window, in window order.
    pub measurements: Vec<(LambdaIndex, c64)>,
}

fn diagonal_entries(a: &CMat) -> Result<Vec<f64>> {
    let dim = a.nrows();
    check_square(a, dim)?;
    let mut values = Vec::with_capacity(dim);
    for i in 0..dim {
        for j in 0..dim {
            if i != j && a[(i, j)] != c64::new(0.0, 0.0) {
                return Err(Error::InvalidInput("A must be diagonal".into()));
            }
        }
        let v = a[(i, i)];
        if v.im != 0.0 || !(v.re > 0.0 && v.re < 1.0) {
            return Err(Error::InvalidInput(
                "diagonal of A must be real and lie in (0, 1)".into(),
            ));
        }
        values.push(v.re);
    }
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::InvalidInput("diagonal of A must have distinct entries".into()));
    }
    Ok(values)
}

/// For diagonal `A` with distinct entries in `(0, 1)` on `ℂ^{4K}` and `g = (I − A) w`, find
/// `x₀` supported on the coordinates with `m ≥ 0` and `x₋₂` supported on those with `m < 0` so
/// that `⟨x_λ, g⟩ = 0` for all `4K` points of the window.
///
/// Each orbit gives a `2K × 2K` system `Σ_i λ_iⁿ conj(g_i) a_i = −Σ_i (Σ_{k<n} λ_iᵏ) w_i conj(g_i)`,
/// `n = 0 … 2K−1`, a Vandermonde matrix with columns scaled by `conj(g_i) ≠ 0`.
pub fn counterexample_nullifier(a: &CMat, w: &CVec, k: usize, tol: &Tolerances) -> Result<Nullifier> {
    let map = IndexMap::new(4 * k)?;
    let dim = map.dim();
    check_square(a, dim)?;
    if w.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: w.len(),
        });
    }
    let lambdas = diagonal_entries(a)?;
    let g: CVec = CVec::from_fn(dim, |i, _| (1.0 - lambdas[i]) * w[i]);
    if g.iter().any(|z| *z == c64::new(0.0, 0.0)) {
        return Err(Error::InvalidInput("every coordinate of w must be nonzero".into()));
    }

    let n_eq = 2 * k;
    let geometric = |lam: f64, n: usize| -> f64 { (0..n).map(|p| num_traits::Float::powi(lam, p as i32)).sum() };
    let rhs = CVec::from_fn(n_eq, |n, _| {
        -(0..dim)
            .map(|i| w[i] * g[i].conj() * geometric(lambdas[i], n))
            .sum::<c64>()
    });

    let solve_half = |nonneg: bool| -> Result<CVec> {
        let support: Vec<usize> = (0..dim)
            .filter(|p| (map.lambda_of(*p).m() >= 0) == nonneg)
            .collect();
        let m = CMat::from_fn(n_eq, support.len(), |n, col| {
            let i = support[col];
            g[i].conj() * num_traits::Float::powi(lambdas[i], n as i32)
        });
        let coeffs = solve(&m, &rhs, tol)?;
        let mut x = CVec::zeros(dim);
        for (col, i) in support.iter().enumerate() {
            x[*i] = coeffs[col];
        }
        Ok(x)
    };
    let x0 = solve_half(true)?;
    let xm2 = solve_half(false)?;

    let w_basis = orthonormal_basis(&CMat::from_columns(&[w.clone()]), 1e-12)?;
    let family = VectorFamily::new(alloc::vec![g.clone()])?;
    let spec = SystemSpec::new(
        crate::SpectralParams::default(),
        a.clone(),
        family.clone(),
        w_basis,
        w.clone(),
        x0.clone(),
        xm2.clone(),
        k,
        tol,
    )?;
    let d = data_matrix(&simulate(&spec), &family)?;
    let measurements = d.iter().map(|(idx, row)| (*idx, row[0])).collect();
    Ok(Nullifier {
        x0,
        xm2,
        g,
        measurements,
    })
}
