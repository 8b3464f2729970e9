//! Digit arithmetic on finite quotients of the additive group of `Q_p` and its
//! character group.
//!
//! Points are encoded by their base-`p` digits inside a window of levels: a
//! point `x = Σ a_k p^k` known modulo `G_K` and supported in `G_{-J}` is the
//! integer `w = Σ_{k=-J}^{K-1} a_k p^{k+J}`. Because `p·g_k = g_{k+1}`, group
//! addition of points is integer addition of the `w` values modulo `p^{J+K}`.
//!
//! Characters are products of the Rademacher characters `r_n`, which pair with
//! the basis as `(r_n, g_m) = e^{2πi/p^{n-m+1}}`. Concretely `r_n` is the
//! character `x ↦ e^{2πi{ξx}}` with `ξ = p^{-n-1}`, so `r_n ∈ G_{n+1}^⊥ ∖ G_n^⊥`.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use thiserror::Error;

/// Largest number of cells any window may hold. Keeps every product of two
/// indices inside `u128` and every vector allocation reasonable.
pub const MAX_WINDOW_CELLS: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("window of {digits} base-{p} digits exceeds the index range")]
    WindowTooLarge { p: u32, digits: i64 },
    #[error("negative window length {0}")]
    NegativeWindow(i64),
    #[error("character/point pairing is not constant on the given cosets")]
    IllPosedPairing,
    #[error("coset reaches outside the working window (top level {top})")]
    WindowOverflow { top: i32 },
    #[error("cells at level {cell_base} are coarser than the coset base {base}")]
    CellsCoarserThanCoset { cell_base: i32, base: i32 },
    #[error(
        "shift of depth {depth} is not representable in a window of support depth {support_depth}"
    )]
    ShiftOutOfWindow { depth: u32, support_depth: i32 },
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `p^e` as an index, rejecting windows beyond [`MAX_WINDOW_CELLS`].
pub fn checked_cells(p: u32, e: i64) -> Result<usize, GroupError> {
    if e < 0 {
        return Err(GroupError::NegativeWindow(e));
    }
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc
            .checked_mul(p as u64)
            .filter(|v| *v <= MAX_WINDOW_CELLS)
            .ok_or(GroupError::WindowTooLarge { p, digits: e })?;
    }
    Ok(acc as usize)
}

/// `p^e` for a window length already known to be valid.
#[inline]
pub fn ipow(p: u32, e: u32) -> usize {
    (p as usize).pow(e)
}

/// `p^e` as a float, for any integer exponent.
#[inline]
pub fn fpow(p: u32, e: i32) -> f64 {
    (p as f64).powi(e)
}

/// Base-`p` digits of `u`, least significant first, padded to `len`.
pub fn digits_of(mut u: u64, len: usize, p: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((u % p as u64) as u32);
        u /= p as u64;
    }
    out
}

/// Reverses the `len` base-`p` digits of `u`.
pub fn digit_reverse(u: u64, len: u32, p: u32) -> u64 {
    let p = p as u64;
    let mut u = u;
    let mut out = 0u64;
    for _ in 0..len {
        out = out * p + u % p;
        u /= p;
    }
    out
}

/// `e^{2πi·num/den}` with the rotation reduced exactly before evaluation.
pub fn unit_root(num: u128, den: u128) -> Complex64 {
    let r = num % den;
    // Use the symmetric representative for a slightly better conditioned angle.
    let angle = if 2 * r > den {
        -2.0 * PI * ((den - r) as f64 / den as f64)
    } else {
        2.0 * PI * (r as f64 / den as f64)
    };
    Complex64::from_polar(1.0, angle)
}

/// Validated triple fixing every finite quotient used by a construction.
///
/// The refinable function lives in `𝔇_M(G_{-N})`: it is supported in `G_{-N}`
/// (`support_depth = N`) and constant on cosets of `G_M`
/// (`constancy_depth = M`). Its spectrum is then constant on cosets of
/// `G_{-N}^⊥` and supported in `G_M^⊥`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Params {
    p: u32,
    support_depth: u32,
    constancy_depth: u32,
}

impl Params {
    pub fn new(p: u32, support_depth: u32, constancy_depth: u32) -> Result<Self, GroupError> {
        if !is_prime(p) {
            return Err(GroupError::NotPrime(p));
        }
        // p^{M+N+1} is the largest dimension; p^{N+1} and p^{M+N} follow.
        checked_cells(p, support_depth as i64 + constancy_depth as i64 + 1)?;
        Ok(Params {
            p,
            support_depth,
            constancy_depth,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `N`: support of φ in `G_{-N}`, spectral cells are cosets of `G_{-N}^⊥`.
    pub fn support_depth(&self) -> u32 {
        self.support_depth
    }

    /// `M`: φ is constant on cosets of `G_M`, spectrum supported in `G_M^⊥`.
    pub fn constancy_depth(&self) -> u32 {
        self.constancy_depth
    }

    /// Number of refinement coefficients, `p^{N+1}`.
    pub fn coefficient_count(&self) -> usize {
        ipow(self.p, self.support_depth + 1)
    }

    /// Tree height `H = M + N`.
    pub fn tree_height(&self) -> u32 {
        self.support_depth + self.constancy_depth
    }

    /// Number of mask nodes `p^{M+N+1}`.
    pub fn node_count(&self) -> usize {
        ipow(self.p, self.tree_height() + 1)
    }

    /// Number of cells of `φ̂`'s window, `p^{M+N}`.
    pub fn spectrum_len(&self) -> usize {
        ipow(self.p, self.tree_height())
    }
}

/// A point of a finite quotient window: `w` encodes digits at levels `[-J, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PointIndex {
    pub w: u64,
    pub support_depth: i32,
    pub constancy_depth: i32,
}

impl PointIndex {
    pub fn new(w: u64, support_depth: i32, constancy_depth: i32) -> Self {
        PointIndex {
            w,
            support_depth,
            constancy_depth,
        }
    }

    pub fn window_len(&self) -> u32 {
        (self.support_depth + self.constancy_depth).max(0) as u32
    }

    /// Digits `(level, a_level)` for every level of the window.
    pub fn level_digits(&self, p: u32) -> impl Iterator<Item = (i32, u32)> {
        let lo = -self.support_depth;
        digits_of(self.w, self.window_len() as usize, p)
            .into_iter()
            .enumerate()
            .map(move |(i, d)| (lo + i as i32, d))
    }

    /// Group sum with carries, truncated to the window.
    pub fn add(&self, other: &PointIndex, p: u32) -> PointIndex {
        debug_assert_eq!(self.support_depth, other.support_depth);
        debug_assert_eq!(self.constancy_depth, other.constancy_depth);
        let modulus = (p as u64).pow(self.window_len());
        PointIndex {
            w: (self.w + other.w) % modulus,
            ..*self
        }
    }
}

/// The coset `G_b^⊥ · r_b^{d_0} r_{b+1}^{d_1} ⋯ r_{b+L-1}^{d_{L-1}}`.
///
/// The digit word also names one exact character of the coset (the product
/// itself); pairings use that representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharCoset {
    pub base: i32,
    pub digits: Vec<u32>,
}

impl CharCoset {
    pub fn new(base: i32, digits: Vec<u32>) -> Self {
        CharCoset { base, digits }
    }

    /// The subgroup `G_b^⊥` itself.
    pub fn subgroup(base: i32) -> Self {
        CharCoset {
            base,
            digits: Vec::new(),
        }
    }

    /// The coset whose digits at levels `[base, base+len)` are those of `word`.
    pub fn from_word(base: i32, word: u64, len: usize, p: u32) -> Self {
        CharCoset {
            base,
            digits: digits_of(word, len, p),
        }
    }

    pub fn level_digits(&self) -> impl Iterator<Item = (i32, u32)> + '_ {
        self.digits
            .iter()
            .enumerate()
            .map(move |(i, d)| (self.base + i as i32, *d))
    }

    /// Digit at a given level; zero outside the stored word.
    pub fn digit_at(&self, level: i32) -> u32 {
        let i = level - self.base;
        if i < 0 {
            0
        } else {
            self.digits.get(i as usize).copied().unwrap_or(0)
        }
    }

    /// Highest level carrying a nonzero digit.
    pub fn top_level(&self) -> Option<i32> {
        self.level_digits()
            .filter(|(_, d)| *d != 0)
            .map(|(l, _)| l)
            .last()
    }

    /// The ring `G_{n+1}^⊥ ∖ G_n^⊥` containing the whole coset, when the leading
    /// digit pins one down.
    pub fn ring(&self) -> Option<i32> {
        self.top_level()
    }

    /// `ν(G_b^⊥ ρ) = p^b`.
    pub fn measure(&self, p: u32) -> f64 {
        fpow(p, self.base)
    }

    /// Contiguous range of cell indices (cells are cosets of `G_{cell_base}^⊥`,
    /// indexed by digits at levels `[cell_base, top)`) whose union is the coset.
    pub fn cell_range(&self, cell_base: i32, top: i32, p: u32) -> Result<Range<usize>, GroupError> {
        if cell_base > self.base {
            return Err(GroupError::CellsCoarserThanCoset {
                cell_base,
                base: self.base,
            });
        }
        if self.base > top || self.top_level().is_some_and(|l| l >= top) {
            return Err(GroupError::WindowOverflow { top });
        }
        checked_cells(p, (top - cell_base) as i64)?;
        let mut start = 0usize;
        for (level, d) in self.level_digits() {
            if level < top {
                start += d as usize * ipow(p, (level - cell_base) as u32);
            }
        }
        Ok(start..start + ipow(p, (self.base - cell_base) as u32))
    }

    /// Index of the cell (granularity `cell_base`, window top `top`) containing
    /// this coset's representative; `None` if the representative lies outside
    /// `G_top^⊥`.
    pub fn containing_cell(&self, cell_base: i32, top: i32, p: u32) -> Option<usize> {
        if self.top_level().is_some_and(|l| l >= top) {
            return None;
        }
        let mut idx = 0usize;
        for (level, d) in self.level_digits() {
            if level >= cell_base && level < top {
                idx += d as usize * ipow(p, (level - cell_base) as u32);
            }
        }
        Some(idx)
    }
}

/// A shift `h = Σ_{ν=1}^{s} a_{-ν} g_{-ν} ∈ H_0^{(s)}` encoded as
/// `n = Σ a_{-ν} p^{s-ν}` (digit `a_{-1}` most significant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShiftIndex {
    pub depth: u32,
    pub index: u64,
}

impl ShiftIndex {
    pub fn new(depth: u32, index: u64) -> Self {
        ShiftIndex { depth, index }
    }

    /// The shift as a point of the window `(J, K)` with `J ≥ depth`.
    pub fn as_point(
        &self,
        support_depth: i32,
        constancy_depth: i32,
        p: u32,
    ) -> Result<PointIndex, GroupError> {
        if self.depth as i32 > support_depth {
            return Err(GroupError::ShiftOutOfWindow {
                depth: self.depth,
                support_depth,
            });
        }
        let len = (support_depth + constancy_depth).max(0) as u32;
        let w = self.index as u128 * (p as u128).pow((support_depth - self.depth as i32) as u32);
        let modulus = (p as u128).pow(len);
        Ok(PointIndex::new(
            (w % modulus) as u64,
            support_depth,
            constancy_depth,
        ))
    }

    /// Digits `a_{-ν}` as `(level, digit)` pairs.
    pub fn level_digits(&self, p: u32) -> impl Iterator<Item = (i32, u32)> {
        let s = self.depth as i32;
        digits_of(self.index, self.depth as usize, p)
            .into_iter()
            .enumerate()
            .map(move |(i, d)| (i as i32 - s, d))
    }
}

/// `(r_j, g_k)`: `e^{2πi/p^{j-k+1}}` when `j - k + 1 ≥ 1`, else exactly `1`.
pub fn rademacher_pair(j: i32, k: i32, p: u32) -> Complex64 {
    let e = j as i64 - k as i64 + 1;
    if e <= 0 {
        return Complex64::new(1.0, 0.0);
    }
    match (p as u128).checked_pow(e as u32) {
        Some(den) if e < 64 => unit_root(1, den),
        _ => Complex64::from_polar(1.0, 2.0 * PI * (p as f64).powi(-(e as i32))),
    }
}

/// `(χ, x)` for the representative character of `chi` and the point `x`.
///
/// The value must not depend on the unknown parts of either argument: `chi`
/// may not carry nonzero digits at levels `≥ K` (else the pairing varies over
/// `x`'s coset of `G_K`), and `x` may not carry nonzero digits below `chi.base`
/// (else it varies over `G_b^⊥`).
pub fn char_point_pair(chi: &CharCoset, x: &PointIndex, p: u32) -> Result<Complex64, GroupError> {
    let chi_digits: Vec<(i32, u32)> = chi.level_digits().filter(|(_, d)| *d != 0).collect();
    let x_digits: Vec<(i32, u32)> = x.level_digits(p).filter(|(_, a)| *a != 0).collect();
    if chi_digits.iter().any(|(l, _)| *l >= x.constancy_depth) {
        return Err(GroupError::IllPosedPairing);
    }
    if x_digits.iter().any(|(l, _)| *l < chi.base) {
        return Err(GroupError::IllPosedPairing);
    }
    let (Some(&(top, _)), Some(&(bottom, _))) = (chi_digits.last(), x_digits.first()) else {
        return Ok(Complex64::new(1.0, 0.0));
    };
    let span = top as i64 - bottom as i64 + 1;
    if span <= 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let den = (p as u128)
        .checked_pow(span as u32)
        .filter(|d| *d < (1u128 << 100))
        .ok_or(GroupError::WindowOverflow { top })?;
    let mut exponent: u128 = 0;
    for &(j, d) in &chi_digits {
        for &(k, a) in &x_digits {
            let e = j as i64 - k as i64 + 1;
            if e >= 1 {
                let scale = (p as u128).pow((span - e) as u32);
                exponent = (exponent + (d as u128 * a as u128 % den) * scale) % den;
            }
        }
    }
    Ok(unit_root(exponent, den))
}

/// `rev(u)·w mod p^L`: the exponent of `(χ_u, x_w)` over `p^L` on aligned windows.
pub fn pairing_exponent(u: u64, w: u64, len: u32, p: u32) -> u64 {
    let modulus = (p as u128).pow(len);
    ((digit_reverse(u, len, p) as u128 * w as u128) % modulus) as u64
}

/// Multiplies `χ` by `𝒜^t`: every Rademacher factor moves up `t` levels.
pub fn coset_dilate(c: &CharCoset, t: i32) -> CharCoset {
    CharCoset {
        base: c.base + t,
        digits: c.digits.clone(),
    }
}

/// Cells of granularity `G_{cell_base}^⊥` whose union is `c`, as indices of the
/// window whose digits span levels `[cell_base, top)`.
pub fn coset_cells(
    c: &CharCoset,
    cell_base: i32,
    top: i32,
    p: u32,
) -> Result<Vec<usize>, GroupError> {
    Ok(c.cell_range(cell_base, top, p)?.collect())
}

/// `|χ|_p = p^n` for `χ ∈ G_n^⊥ ∖ G_{n-1}^⊥`.
pub fn char_norm(level: i32, p: u32) -> f64 {
    fpow(p, level)
}

/// `log_p^+ |χ|_p`: `log_p|χ|_p` when `|χ|_p > 1`, otherwise `1`.
pub fn log_p_plus(level: i32) -> f64 {
    if level >= 1 {
        level as f64
    } else {
        1.0
    }
}

/// `μ(G_n) = p^{-n}`.
pub fn subgroup_measure(level: i32, p: u32) -> f64 {
    fpow(p, -level)
}
