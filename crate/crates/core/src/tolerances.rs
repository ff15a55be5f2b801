/// Numerical thresholds shared by every module.
///
/// The defaults are the named constants below; callers that load a configuration may override
/// individual fields. A `Tolerances` value is never mutated once handed to the library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigen-decomposition reconstruction residual.
    pub eig: f64,
    /// Relative residual accepted from a linear solve.
    pub solve: f64,
    /// Relative asymmetry accepted as Hermitian.
    pub herm: f64,
    /// Lower frame bound above which a family counts as a frame.
    pub frame: f64,
    /// Cauchy gap below which rows count as converged.
    pub bs: f64,
    /// Safety margin on `ρ(A) < 1`.
    pub rho_margin: f64,
    /// Pivots smaller than this fraction of the matrix scale are singular.
    pub pivot: f64,
    /// Dual-pair residual accepted by [`crate::frames::verify_dual_pair`] consumers.
    pub dual: f64,
    /// Distance of the source from `W` accepted as membership.
    pub subspace: f64,
}

impl Tolerances {
    pub const EIG_TOL: f64 = 1e-8;
    pub const SOLVE_TOL: f64 = 1e-8;
    pub const HERM_TOL: f64 = 1e-10;
    pub const FRAME_TOL: f64 = 1e-10;
    pub const BS_TOL: f64 = 1e-6;
    pub const RHO_MARGIN: f64 = 1e-6;
    pub const PIVOT_TOL: f64 = 1e-12;
    pub const DUAL_TOL: f64 = 1e-8;
    pub const SUBSPACE_TOL: f64 = 1e-10;

    /// Override one field by name. Returns `false` for an unknown key.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "eig" => &mut self.eig,
            "solve" => &mut self.solve,
            "herm" => &mut self.herm,
            "frame" => &mut self.frame,
            "bs" => &mut self.bs,
            "rho_margin" => &mut self.rho_margin,
            "pivot" => &mut self.pivot,
            "dual" => &mut self.dual,
            "subspace" => &mut self.subspace,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub const KEYS: [&'static str; 9] = [
        "eig",
        "solve",
        "herm",
        "frame",
        "bs",
        "rho_margin",
        "pivot",
        "dual",
        "subspace",
    ];

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "eig" => self.eig,
            "solve" => self.solve,
            "herm" => self.herm,
            "frame" => self.frame,
            "bs" => self.bs,
            "rho_margin" => self.rho_margin,
            "pivot" => self.pivot,
            "dual" => self.dual,
            "subspace" => self.subspace,
            _ => return None,
        })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig: Self::EIG_TOL,
            solve: Self::SOLVE_TOL,
            herm: Self::HERM_TOL,
            frame: Self::FRAME_TOL,
            bs: Self::BS_TOL,
            rho_margin: Self::RHO_MARGIN,
            pivot: Self::PIVOT_TOL,
            dual: Self::DUAL_TOL,
            subspace: Self::SUBSPACE_TOL,
        }
    }
}
