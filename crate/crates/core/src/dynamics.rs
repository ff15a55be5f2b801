//! Simulation of the system over a window of `Λ`, data matrices and row diagnostics.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::frames::{analysis, canonical_dual, check_orthonormal, synthesis, VectorFamily};
use crate::lambda::{window, LambdaIndex, Orbit, SpectralParams};
use crate::numerics::{check_finite, projector, solve, CMat, CVec};
use crate::{Error, Result, Tolerances};

/// Everything that determines a trajectory and its samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub params: SpectralParams,
    pub a: CMat,
    /// Sampling family `{g_j}`.
    pub g: VectorFamily,
    /// Orthonormal basis of the source subspace `W`, as columns.
    pub w_basis: CMat,
    pub w: CVec,
    pub x0: CVec,
    pub xm2: CVec,
    pub k: usize,
}

impl SystemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        params: SpectralParams,
        a: CMat,
        g: VectorFamily,
        w_basis: CMat,
        w: CVec,
        x0: CVec,
        xm2: CVec,
        k: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyWindow);
        }
        let dim = a.nrows();
        if dim == 0 {
            return Err(Error::InvalidInput("state dimension must be positive".into()));
        }
        for found in [a.ncols(), g.dim(), w_basis.nrows(), w.len(), x0.len(), xm2.len()] {
            if found != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found,
                });
            }
        }
        check_finite(a.iter(), "A")?;
        check_finite(w.iter(), "w")?;
        check_finite(x0.iter(), "x0")?;
        check_finite(xm2.iter(), "xm2")?;
        check_orthonormal(&w_basis)?;
        let distance = (&w - projector(&w_basis) * &w).norm();
        if distance > tol.subspace * w.norm().max(1.0) {
            return Err(Error::SourceNotInW { distance });
        }
        Ok(Self {
            params,
            a,
            g,
            w_basis,
            w,
            x0,
            xm2,
            k,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn window(&self) -> Vec<LambdaIndex> {
        window(self.k).expect("k >= 1 is checked on construction")
    }

    /// The initial state of the orbit containing `idx`.
    pub fn initial_state(&self, idx: LambdaIndex) -> &CVec {
        match idx.orbit() {
            Orbit::Forward => &self.x0,
            Orbit::Backward => &self.xm2,
        }
    }

    /// A copy with different initial states and source, revalidated.
    pub fn with_states(&self, x0: CVec, xm2: CVec, w: CVec, tol: &Tolerances) -> Result<Self> {
        Self::new(
            self.params,
            self.a.clone(),
            self.g.clone(),
            self.w_basis.clone(),
            w,
            x0,
            xm2,
            self.k,
            tol,
        )
    }
}

/// States `x_λ` over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    states: BTreeMap<LambdaIndex, CVec>,
}

impl StateTrajectory {
    pub fn get(&self, idx: LambdaIndex) -> Option<&CVec> {
        self.states.get(&idx)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// States in increasing order of `λ`.
    pub fn iter(&self) -> impl Iterator<Item = (&LambdaIndex, &CVec)> {
        self.states.iter()
    }

    /// Largest `‖x_{succ(λ)} − A x_λ − w‖` over the window.
    pub fn recurrence_residual(&self, a: &CMat, w: &CVec) -> f64 {
        self.states
            .iter()
            .filter_map(|(idx, x)| {
                self.states
                    .get(&idx.successor())
                    .map(|next| (next - a * x - w).norm())
            })
            .fold(0.0, f64::max)
    }
}

fn run_orbits(a: &CMat, x0: &CVec, xm2: &CVec, w: &CVec, k: usize) -> StateTrajectory {
    let k = k as i64;
    let mut states = BTreeMap::new();
    for (start, init) in [(LambdaIndex::ZERO, x0), (LambdaIndex::MINUS_TWO, xm2)] {
        let mut idx = start;
        let mut x = init.clone();
        while (-k..k).contains(&idx.m()) {
            let next = a * &x + w;
            states.insert(idx, x);
            x = next;
            idx = idx.successor();
        }
    }
    StateTrajectory { states }
}

/// Iterate both orbits from `x₀` and `x₋₂` across `window(K)`.
pub fn simulate(spec: &SystemSpec) -> StateTrajectory {
    run_orbits(&spec.a, &spec.x0, &spec.xm2, &spec.w, spec.k)
}

/// `Aⁿ x_init + (I + A + … + A^{n−1}) w` with `n` the power of `idx`.
pub fn closed_form_state(spec: &SystemSpec, idx: LambdaIndex) -> CVec {
    let dim = spec.dim();
    let mut power = CMat::identity(dim, dim);
    let mut sum = CMat::zeros(dim, dim);
    for _ in 0..idx.power() {
        sum += &power;
        power = &power * &spec.a;
    }
    power * spec.initial_state(idx) + sum * &spec.w
}

/// `Aⁿ x_init + (I − Aⁿ)(I − A)⁻¹ w`. Fails with [`Error::OneInSpectrum`] if `I − A` is singular.
pub fn closed_form_resolvent_state(
    spec: &SystemSpec,
    idx: LambdaIndex,
    tol: &Tolerances,
) -> Result<CVec> {
    let dim = spec.dim();
    let resolvent_w = solve(&(CMat::identity(dim, dim) - &spec.a), &spec.w, tol)
        .map_err(|_| Error::OneInSpectrum)?;
    let an = crate::numerics::matrix_power(&spec.a, idx.power());
    Ok(&an * spec.initial_state(idx) + &resolvent_w - an * resolvent_w)
}

/// Samples `D[λ][j] = ⟨x_λ, g_j⟩`, rows ordered by `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: BTreeMap<LambdaIndex, CVec>,
    width: usize,
}

impl DataMatrix {
    pub fn new(rows: BTreeMap<LambdaIndex, CVec>) -> Result<Self> {
        let width = rows.values().next().ok_or(Error::EmptyFamily)?.len();
        for row in rows.values() {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    found: row.len(),
                });
            }
            check_finite(row.iter(), "data row")?;
        }
        Ok(Self { rows, width })
    }

    /// Every row of `window` equal to `row`.
    pub fn constant(window: &[LambdaIndex], row: &CVec) -> Result<Self> {
        Self::new(window.iter().map(|idx| (*idx, row.clone())).collect())
    }

    pub fn row(&self, idx: LambdaIndex) -> Result<&CVec> {
        self.rows.get(&idx).ok_or(Error::MissingRow(idx))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LambdaIndex, &CVec)> {
        self.rows.iter()
    }

    /// `(D c)_λ = Σ_j D[λ][j] c_j` for every row.
    pub fn apply(&self, c: &CVec) -> Result<Vec<crate::c64>> {
        if c.len() != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                found: c.len(),
            });
        }
        Ok(self.rows.values().map(|row| row.transpose() * c).map(|m| m[0]).collect())
    }

    /// Frobenius distance to another matrix over the rows of `self`.
    pub fn distance(&self, other: &DataMatrix) -> Result<f64> {
        let mut sq = 0.0;
        for (idx, row) in &self.rows {
            sq += (row - other.row(*idx)?).norm_squared();
        }
        Ok(crate::numerics::sqrt(sq))
    }
}

pub fn data_matrix(traj: &StateTrajectory, g: &VectorFamily) -> Result<DataMatrix> {
    let mut rows = BTreeMap::new();
    for (idx, x) in traj.iter() {
        rows.insert(*idx, analysis(x, g)?);
    }
    DataMatrix::new(rows)
}

/// `sup_λ ‖D[λ]‖`, the norm of `D` as a map `ℓ² → ℓ^∞`.
pub fn sup_row_norm(d: &DataMatrix) -> f64 {
    d.rows.values().map(|r| r.norm()).fold(0.0, f64::max)
}

/// `Σ_λ ‖D[λ]‖` over the window.
pub fn finite_block_norm(d: &DataMatrix) -> f64 {
    d.rows.values().map(|r| r.norm()).sum()
}

/// Estimate of the limit row at both ends of the window.
#[derive(Debug, Clone, PartialEq)]
pub struct BsMembership {
    /// Average of the first and last row.
    pub limit_row: CVec,
    /// Largest pairwise distance among the `tail` outermost rows at both ends.
    pub tail_gap: f64,
    pub member: bool,
}

pub fn bs_membership(d: &DataMatrix, tail: usize, tol: &Tolerances) -> Result<BsMembership> {
    let rows: Vec<&CVec> = d.rows.values().collect();
    if tail == 0 || 2 * tail > rows.len() {
        return Err(Error::WindowTooSmall {
            rows: rows.len(),
            tail,
        });
    }
    let n = rows.len();
    let outer: Vec<&CVec> = rows[..tail].iter().chain(&rows[n - tail..]).copied().collect();
    let mut gap: f64 = 0.0;
    for (i, u) in outer.iter().enumerate() {
        for v in &outer[i + 1..] {
            gap = gap.max((*u - *v).norm());
        }
    }
    let limit_row = (rows[0] + rows[n - 1]) * crate::numerics::real(0.5);
    Ok(BsMembership {
        limit_row,
        tail_gap: gap,
        member: gap <= tol.bs,
    })
}

/// Initial states and source fitted to a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFit {
    pub x0: CVec,
    pub xm2: CVec,
    pub w: CVec,
    /// Frobenius distance between `D` and the data matrix the fitted triple generates.
    pub residual: f64,
}

/// Recover `(x₀, x₋₂, w)` from rows `0`, `−2` and `r/N` of `D`, using `A` and `{g_j}` from
/// `template`, then measure how well the triple reproduces all of `D`.
pub fn data_fit(d: &DataMatrix, template: &SystemSpec, tol: &Tolerances) -> Result<DataFit> {
    let dual = canonical_dual(&template.g, tol)?;
    let dual = dual.family();
    let x0 = synthesis(d.row(LambdaIndex::ZERO)?, dual)?;
    let xm2 = synthesis(d.row(LambdaIndex::MINUS_TWO)?, dual)?;
    let w = synthesis(d.row(LambdaIndex::ZERO.successor())?, dual)? - &template.a * &x0;
    let refit = data_matrix(&run_orbits(&template.a, &x0, &xm2, &w, template.k), &template.g)?;
    let residual = d.distance(&refit)?;
    Ok(DataFit {
        x0,
        xm2,
        w,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{real, unit};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn full_spec(a: CMat, w: CVec, x0: CVec, xm2: CVec, k: usize) -> SystemSpec {
        let dim = a.nrows();
        SystemSpec::new(
            SpectralParams::default(),
            a,
            VectorFamily::standard_basis(dim),
            CMat::identity(dim, dim),
            w,
            x0,
            xm2,
            k,
            &tol(),
        )
        .unwrap()
    }

    fn random_spec(seed: u64, dim: usize, norm: f64, k: usize) -> SystemSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random::matrix_with_norm(&mut rng, dim, norm);
        let w = random::vector(&mut rng, dim);
        let x0 = random::vector(&mut rng, dim);
        let xm2 = random::vector(&mut rng, dim);
        full_spec(a, w, x0, xm2, k)
    }

    #[test]
    fn spec_validation() {
        let w_basis = CMat::from_columns(&[unit(4, 0)]);
        let err = SystemSpec::new(
            SpectralParams::default(),
            CMat::zeros(4, 4),
            VectorFamily::standard_basis(4),
            w_basis,
            unit(4, 1),
            CVec::zeros(4),
            CVec::zeros(4),
            1,
            &tol(),
        );
        assert!(matches!(err, Err(Error::SourceNotInW { .. })));
        let spec = random_spec(1, 4, 1.0, 1);
        assert!(matches!(
            spec.with_states(CVec::zeros(3), CVec::zeros(4), CVec::zeros(4), &tol()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn simulate_zero_operator() {
        let w = unit(4, 2);
        let spec = full_spec(CMat::zeros(4, 4), w.clone(), unit(4, 0), unit(4, 1), 2);
        let traj = simulate(&spec);
        assert_eq!(traj.len(), 8);
        assert_eq!(traj.get(LambdaIndex::shifted(0)), Some(&w));
        assert_eq!(traj.get(LambdaIndex::even(1)), Some(&w));
        assert_eq!(traj.get(LambdaIndex::shifted(-1)), Some(&w));
        assert_eq!(traj.get(LambdaIndex::ZERO), Some(&unit(4, 0)));
        assert_eq!(traj.get(LambdaIndex::MINUS_TWO), Some(&unit(4, 1)));
    }

    #[test]
    fn simulate_identity_without_source() {
        let spec = full_spec(CMat::identity(4, 4), CVec::zeros(4), unit(4, 0), unit(4, 3), 3);
        for (idx, x) in simulate(&spec).iter() {
            assert_eq!(x, spec.initial_state(*idx));
        }
    }

    #[test]
    fn stationary_quarter() {
        let w = unit(4, 0) + unit(4, 1);
        let s = &w * real(4.0 / 3.0);
        let spec = full_spec(CMat::identity(4, 4) * real(0.25), w, s.clone(), s.clone(), 3);
        for (_, x) in simulate(&spec).iter() {
            assert!((x - &s).norm() < 1e-15);
        }
        let d = data_matrix(&simulate(&spec), &spec.g).unwrap();
        for (_, row) in d.iter() {
            assert!((row - &s).norm() < 1e-15);
        }
    }

    #[test]
    fn closed_form_examples() {
        let spec = random_spec(2, 4, 0.9, 3);
        let a = &spec.a;
        assert_eq!(closed_form_state(&spec, LambdaIndex::ZERO), spec.x0);
        assert_eq!(closed_form_state(&spec, LambdaIndex::MINUS_TWO), spec.xm2);
        let one = closed_form_state(&spec, LambdaIndex::shifted(0));
        assert!((one - (a * &spec.x0 + &spec.w)).norm() < 1e-14);
        let id = CMat::identity(4, 4);
        let minus_four = closed_form_state(&spec, LambdaIndex::even(-2));
        let expected = a * a * &spec.xm2 + (&id + a) * &spec.w;
        assert!((minus_four - expected).norm() < 1e-14);
    }

    #[test]
    fn resolvent_form() {
        let w = unit(2, 0);
        let half = CMat::identity(2, 2) * real(0.5);
        let spec = SystemSpec::new(
            SpectralParams::default(),
            half,
            VectorFamily::standard_basis(2),
            CMat::identity(2, 2),
            w.clone(),
            CVec::zeros(2),
            CVec::zeros(2),
            2,
            &tol(),
        )
        .unwrap();
        let x = closed_form_resolvent_state(&spec, LambdaIndex::even(1), &tol()).unwrap();
        assert!((x - &w * real(1.5)).norm() < 1e-15);
        let x = closed_form_resolvent_state(&spec, LambdaIndex::ZERO, &tol()).unwrap();
        assert_eq!(x, CVec::zeros(2));

        let zero = full_spec(CMat::zeros(4, 4), unit(4, 1), unit(4, 0), unit(4, 0), 2);
        for idx in zero.window() {
            if idx.power() > 0 {
                let x = closed_form_resolvent_state(&zero, idx, &tol()).unwrap();
                assert!((x - unit(4, 1)).norm() < 1e-15);
            }
        }

        let id = full_spec(CMat::identity(4, 4), unit(4, 1), unit(4, 0), unit(4, 0), 2);
        assert_eq!(
            closed_form_resolvent_state(&id, LambdaIndex::ZERO, &tol()),
            Err(Error::OneInSpectrum)
        );
    }

    #[test]
    fn three_state_formulas_agree() {
        for seed in 0..10 {
            let spec = random_spec(seed, 6, 1.0, 6);
            let traj = simulate(&spec);
            assert!(traj.recurrence_residual(&spec.a, &spec.w) < 1e-12);
            for (idx, x) in traj.iter() {
                let cf = closed_form_state(&spec, *idx);
                let rf = closed_form_resolvent_state(&spec, *idx, &tol()).unwrap();
                let scale = 1.0 + cf.norm();
                assert!((x - &cf).norm() <= 1e-9 * scale);
                assert!((rf - &cf).norm() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn data_matrix_with_onb_is_coordinates() {
        let spec = random_spec(3, 8, 1.0, 2);
        let traj = simulate(&spec);
        let d = data_matrix(&traj, &spec.g).unwrap();
        assert_eq!(d.nrows(), 8);
        for (idx, x) in traj.iter() {
            assert_eq!(d.row(*idx).unwrap(), x);
        }
        let zero = full_spec(CMat::zeros(4, 4), CVec::zeros(4), CVec::zeros(4), CVec::zeros(4), 2);
        let d = data_matrix(&simulate(&zero), &zero.g).unwrap();
        assert_eq!(sup_row_norm(&d), 0.0);
        assert_eq!(finite_block_norm(&d), 0.0);
    }

    #[test]
    fn row_norms() {
        let row = crate::numerics::vector(&[real(3.0), real(4.0)]).unwrap();
        let one = DataMatrix::constant(&[LambdaIndex::ZERO], &row).unwrap();
        assert_eq!(sup_row_norm(&one), 5.0);
        let two = DataMatrix::constant(&[LambdaIndex::ZERO, LambdaIndex::MINUS_TWO], &row).unwrap();
        assert_eq!(finite_block_norm(&two), 10.0);
        assert!(matches!(
            two.row(LambdaIndex::even(3)),
            Err(Error::MissingRow(_))
        ));
    }

    #[test]
    fn sup_row_norm_bounds_action() {
        let spec = random_spec(4, 5, 1.0, 3);
        let d = data_matrix(&simulate(&spec), &spec.g).unwrap();
        let sup = sup_row_norm(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let c = random::unit_vector(&mut rng, 5);
            let inf = d.apply(&c).unwrap().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(inf <= sup + 1e-10);
        }
        // the conjugated widest row is an extremizer
        let (_, widest) = d
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        let c = widest.map(|z| z.conj()) / real(widest.norm());
        let inf = d.apply(&c).unwrap().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((inf - sup).abs() < 1e-12);
    }

    #[test]
    fn block_norm_bessel_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random::family(&mut rng, 4, 6);
        let beta = crate::frames::frame_bounds(&g, &tol()).unwrap().beta;
        let mut spec = random_spec(5, 4, 1.0, 3);
        spec.g = g;
        let traj = simulate(&spec);
        let d = data_matrix(&traj, &spec.g).unwrap();
        let states: f64 = traj.iter().map(|(_, x)| x.norm()).sum();
        assert!(finite_block_norm(&d) <= crate::numerics::sqrt(beta) * states + 1e-10);
        let max_state = traj.iter().map(|(_, x)| x.norm()).fold(0.0, f64::max);
        assert!(sup_row_norm(&d) <= crate::numerics::sqrt(beta) * max_state + 1e-10);
    }

    #[test]
    fn membership() {
        let w = window(3).unwrap();
        let row = unit(3, 1);
        let d = DataMatrix::constant(&w, &row).unwrap();
        let m = bs_membership(&d, 2, &tol()).unwrap();
        assert_eq!(m.tail_gap, 0.0);
        assert_eq!(m.limit_row, row);
        assert!(m.member);

        let alternating = DataMatrix::new(
            w.iter()
                .enumerate()
                .map(|(i, idx)| (*idx, unit(3, i % 2)))
                .collect(),
        )
        .unwrap();
        let m = bs_membership(&alternating, 2, &tol()).unwrap();
        assert!((m.tail_gap - crate::numerics::sqrt(2.0)).abs() < 1e-15);
        assert!(!m.member);

        assert!(matches!(
            bs_membership(&d, 7, &tol()),
            Err(Error::WindowTooSmall { rows: 12, tail: 7 })
        ));
        assert!(bs_membership(&d, 0, &tol()).is_err());
    }

    #[test]
    fn tail_gap_shrinks_with_contraction() {
        let mut last = f64::INFINITY;
        for k in 2..8 {
            let mut spec = random_spec(6, 4, 0.5, k);
            spec.k = k;
            let d = data_matrix(&simulate(&spec), &spec.g).unwrap();
            let gap = bs_membership(&d, 1, &tol()).unwrap().tail_gap;
            assert!(gap < last);
            last = gap;
        }
    }

    #[test]
    fn fit_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut spec = random_spec(7, 5, 1.0, 3);
        spec.g = random::frame(&mut rng, 5, 8, 0.1);
        let d = data_matrix(&simulate(&spec), &spec.g).unwrap();
        let fit = data_fit(&d, &spec, &tol()).unwrap();
        assert!((fit.x0 - &spec.x0).norm() < 1e-8);
        assert!((fit.xm2 - &spec.xm2).norm() < 1e-8);
        assert!((fit.w - &spec.w).norm() < 1e-8);
        assert!(fit.residual < 1e-7);
    }

    #[test]
    fn fit_of_zero_data() {
        let spec = random_spec(8, 4, 1.0, 2);
        let d = DataMatrix::constant(&spec.window(), &CVec::zeros(4)).unwrap();
        let fit = data_fit(&d, &spec, &tol()).unwrap();
        assert_eq!(fit.w, CVec::zeros(4));
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn fit_reports_perturbation() {
        let spec = full_spec(CMat::zeros(4, 4), unit(4, 0), unit(4, 1), unit(4, 2), 2);
        let d = data_matrix(&simulate(&spec), &spec.g).unwrap();
        let eps = 1e-3;
        let at = LambdaIndex::shifted(0);
        let mut rows: BTreeMap<_, _> = d.iter().map(|(i, r)| (*i, r.clone())).collect();
        *rows.get_mut(&at).unwrap() += unit(4, 3) * real(eps);
        let noisy = DataMatrix::new(rows).unwrap();
        let fit = data_fit(&noisy, &spec, &tol()).unwrap();
        assert!(fit.residual >= eps / 2.0);
        assert_eq!(fit.w.len(), 4);
    }

    #[test]
    fn fit_needs_a_frame() {
        let mut spec = random_spec(9, 4, 1.0, 2);
        let d = data_matrix(&simulate(&spec), &spec.g).unwrap();
        spec.g = spec.g.without(0).unwrap();
        assert!(matches!(
            data_fit(&d, &spec, &tol()),
            Err(Error::NotAFrame { .. })
        ));
    }
}
