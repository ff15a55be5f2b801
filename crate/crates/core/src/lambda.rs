//! Exact arithmetic on the non-uniform index set `Λ = {0, r/N} + 2ℤ`.
//!
//! A point of `Λ` is stored as a pair `(m, offset)` meaning `2m + offset·r/N`. Since
//! `0 < r/N < 2` the numeric order of `Λ` coincides with the lexicographic order of the
//! pairs, so `LambdaIndex` derives `Ord` and no floating point ever enters branch dispatch.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::{Error, Result};

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The pair `(N, r)` fixing `Λ`: `r` odd, coprime with `N`, `1 ≤ r ≤ 2N − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpectralParams {
    n: u32,
    r: u32,
}

impl SpectralParams {
    pub fn new(n: u32, r: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("N must be positive"));
        }
        if r % 2 == 0 {
            return Err(Error::InvalidParams("r must be odd"));
        }
        if r < 1 || u64::from(r) > 2 * u64::from(n) - 1 {
            return Err(Error::InvalidParams("r must satisfy 1 <= r <= 2N - 1"));
        }
        if gcd(i64::from(r), i64::from(n)) != 1 {
            return Err(Error::InvalidParams("r must be coprime with N"));
        }
        Ok(Self { n, r })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// The offset `r/N` as an exact rational.
    pub fn offset(&self) -> Rational {
        Rational::new(i64::from(self.r), i64::from(self.n))
    }
}

impl Default for SpectralParams {
    /// `r = 1, N = 2`, the setting of most worked examples.
    fn default() -> Self {
        Self { n: 2, r: 1 }
    }
}

/// A reduced fraction with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    /// Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Self {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn integer(n: i64) -> Self {
        Self { num: n, den: 1 }
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl core::ops::Add for Rational {
    type Output = Rational;

    fn add(self, rhs: Rational) -> Rational {
        Rational::new(self.num * rhs.den + rhs.num * self.den, self.den * rhs.den)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (i128::from(self.num) * i128::from(other.den))
            .cmp(&(i128::from(other.num) * i128::from(self.den)))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Which recurrence produces the successor of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `λ ∈ 2ℤ`, successor `λ + r/N`.
    EvenAny,
    /// `λ ∈ 2ℤ⁺ + r/N ∪ {r/N}`, successor `λ + 2 − r/N`.
    PosOffset,
    /// `λ ∈ 2ℤ⁻ + r/N`, successor `λ − 2 − r/N`.
    NegOffset,
}

/// Which initial state a point of `Λ` descends from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orbit {
    /// `0 → r/N → 2 → 2 + r/N → …`, seeded by `x₀`.
    Forward,
    /// `−2 → −2 + r/N → −4 → …`, seeded by `x₋₂`.
    Backward,
}

/// The point `2m + offset·r/N` of `Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LambdaIndex {
    m: i64,
    offset: bool,
}

impl LambdaIndex {
    pub const ZERO: LambdaIndex = LambdaIndex { m: 0, offset: false };
    pub const MINUS_TWO: LambdaIndex = LambdaIndex { m: -1, offset: false };

    pub const fn new(m: i64, offset: bool) -> Self {
        Self { m, offset }
    }

    /// The even point `2m`.
    pub const fn even(m: i64) -> Self {
        Self { m, offset: false }
    }

    /// The shifted point `2m + r/N`.
    pub const fn shifted(m: i64) -> Self {
        Self { m, offset: true }
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn is_offset(&self) -> bool {
        self.offset
    }

    /// `eps` as 0/1.
    pub fn eps(&self) -> u8 {
        u8::from(self.offset)
    }

    pub fn value(&self, params: &SpectralParams) -> Rational {
        let base = Rational::integer(2 * self.m);
        if self.offset {
            base + params.offset()
        } else {
            base
        }
    }

    pub fn branch(&self) -> Branch {
        match (self.offset, self.m >= 0) {
            (false, _) => Branch::EvenAny,
            (true, true) => Branch::PosOffset,
            (true, false) => Branch::NegOffset,
        }
    }

    pub fn orbit(&self) -> Orbit {
        if self.m >= 0 {
            Orbit::Forward
        } else {
            Orbit::Backward
        }
    }

    pub fn successor(&self) -> LambdaIndex {
        match self.branch() {
            Branch::EvenAny => LambdaIndex::shifted(self.m),
            Branch::PosOffset => LambdaIndex::even(self.m + 1),
            Branch::NegOffset => LambdaIndex::even(self.m - 1),
        }
    }

    /// Number of recurrence steps from the orbit's initial state, so that
    /// `x_λ = Aⁿ x_init + (I + A + … + Aⁿ⁻¹) w`.
    pub fn power(&self) -> u64 {
        let m = self.m;
        let n = match (self.offset, m >= 0) {
            (false, true) => 2 * m,
            (true, true) => 2 * m + 1,
            (false, false) => -2 * m - 2,
            (true, false) => -2 * m - 1,
        };
        n as u64
    }

    /// `"2m"` or `"2m+r/N"` with `m` substituted, e.g. `"-4"`, `"r/N"`, `"-2+r/N"`.
    pub fn label(&self) -> String {
        match (self.offset, self.m) {
            (false, m) => format!("{}", 2 * m),
            (true, 0) => String::from("r/N"),
            (true, m) => format!("{}+r/N", 2 * m),
        }
    }

    /// Inverse of [`label`](Self::label).
    pub fn parse_label(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "r/N" {
            return Some(Self::shifted(0));
        }
        let (even, offset) = match s.strip_suffix("+r/N") {
            Some(rest) => (rest, true),
            None => (s, false),
        };
        let two_m: i64 = even.parse().ok()?;
        if two_m % 2 != 0 || (offset && two_m == 0) {
            return None;
        }
        Some(Self::new(two_m / 2, offset))
    }
}

impl fmt::Display for LambdaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The window `[2K] = {−2K, −2K + r/N, …, 2K − 2, 2K − 2 + r/N}` in increasing order.
pub fn window(k: usize) -> Result<Vec<LambdaIndex>> {
    if k == 0 {
        return Err(Error::EmptyWindow);
    }
    let k = k as i64;
    Ok((-k..k)
        .flat_map(|m| [LambdaIndex::even(m), LambdaIndex::shifted(m)])
        .collect())
}

/// Coordinates `0..dim` of a truncated `ℓ²(Λ)`, labelled by the window `[2K]` with `dim = 4K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexMap {
    k: usize,
}

impl IndexMap {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim % 4 != 0 {
            return Err(Error::IncompatibleDim { dim });
        }
        Ok(Self { k: dim / 4 })
    }

    pub fn dim(&self) -> usize {
        4 * self.k
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Panics if `p >= dim`.
    pub fn lambda_of(&self, p: usize) -> LambdaIndex {
        assert!(p < self.dim(), "position {p} outside dimension {}", self.dim());
        let m = (p / 2) as i64 - self.k as i64;
        LambdaIndex::new(m, p % 2 == 1)
    }

    pub fn index_of(&self, idx: LambdaIndex) -> Option<usize> {
        let k = self.k as i64;
        if idx.m < -k || idx.m >= k {
            return None;
        }
        Some(((idx.m + k) * 2) as usize + usize::from(idx.offset))
    }

    pub fn labels(&self) -> Vec<LambdaIndex> {
        (0..self.dim()).map(|p| self.lambda_of(p)).collect()
    }
}

pub fn index_map(dim: usize) -> Result<IndexMap> {
    IndexMap::new(dim)
}
