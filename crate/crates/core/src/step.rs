//! Step functions on the group and on its character group, and the Fourier
//! transform between them.
//!
//! A [`StepSignal`] in `𝔇_K(G_{-J})` stores one value per coset of `G_K`
//! inside `G_{-J}` (cells of measure `p^{-K}`). A [`Spectrum`] in
//! `𝔇_{-N}(G_M^⊥)` stores one value per coset of `G_{-N}^⊥` inside `G_M^⊥`
//! (cells of measure `p^{-N}`), indexed by `u = Σ_{k=-N}^{M-1} α_k p^{k+N}`.

use num_complex::Complex64;
use thiserror::Error;

use crate::fft::RadixPlan;
use crate::group::{
    checked_cells, digits_of, fpow, ipow, pairing_exponent, unit_root, CharCoset, GroupError,
    PointIndex, ShiftIndex,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("expected {expected} values for the window, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("window ({support}, {constancy}) cannot be embedded into ({target_support}, {target_constancy})")]
    NotRefinement {
        support: i32,
        constancy: i32,
        target_support: i32,
        target_constancy: i32,
    },
    #[error("signals over different primes ({0} vs {1})")]
    PrimeMismatch(u32, u32),
    #[error(transparent)]
    Group(#[from] GroupError),
}

fn window_len(a: i32, b: i32) -> Result<u32, GroupError> {
    let len = a as i64 + b as i64;
    if len < 0 {
        return Err(GroupError::NegativeWindow(len));
    }
    Ok(len as u32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSignal {
    p: u32,
    support_depth: i32,
    constancy_depth: i32,
    values: Vec<Complex64>,
}

impl StepSignal {
    pub fn new(
        p: u32,
        support_depth: i32,
        constancy_depth: i32,
        values: Vec<Complex64>,
    ) -> Result<Self, StepError> {
        let len = window_len(support_depth, constancy_depth)?;
        let expected = checked_cells(p, len as i64)?;
        if values.len() != expected {
            return Err(StepError::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(StepSignal {
            p,
            support_depth,
            constancy_depth,
            values,
        })
    }

    pub fn zeros(p: u32, support_depth: i32, constancy_depth: i32) -> Result<Self, StepError> {
        let len = window_len(support_depth, constancy_depth)?;
        let n = checked_cells(p, len as i64)?;
        Self::new(
            p,
            support_depth,
            constancy_depth,
            vec![Complex64::new(0.0, 0.0); n],
        )
    }

    /// `1_{G_level}` in the window `(J, K)`; requires `-J ≤ level ≤ K`.
    pub fn subgroup_indicator(
        p: u32,
        level: i32,
        support_depth: i32,
        constancy_depth: i32,
    ) -> Result<Self, StepError> {
        let mut s = Self::zeros(p, support_depth, constancy_depth)?;
        let lo = level.clamp(-support_depth, constancy_depth);
        let stride = ipow(p, (lo + support_depth) as u32);
        for w in (0..s.values.len()).step_by(stride) {
            s.values[w] = Complex64::new(1.0, 0.0);
        }
        Ok(s)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn support_depth(&self) -> i32 {
        self.support_depth
    }
    pub fn constancy_depth(&self) -> i32 {
        self.constancy_depth
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
    pub fn window_len(&self) -> u32 {
        (self.support_depth + self.constancy_depth) as u32
    }

    /// `μ` of one cell, `p^{-K}`.
    pub fn cell_measure(&self) -> f64 {
        fpow(self.p, -self.constancy_depth)
    }

    /// Value at a point given in a window at least as fine as this one.
    pub fn value_at(&self, x: &PointIndex) -> Result<Complex64, StepError> {
        if x.constancy_depth < self.constancy_depth {
            return Err(StepError::NotRefinement {
                support: x.support_depth,
                constancy: x.constancy_depth,
                target_support: self.support_depth,
                target_constancy: self.constancy_depth,
            });
        }
        let mut idx = 0usize;
        for (level, a) in x.level_digits(self.p) {
            if a == 0 {
                continue;
            }
            if level < -self.support_depth {
                return Ok(Complex64::new(0.0, 0.0));
            }
            if level < self.constancy_depth {
                idx += a as usize * ipow(self.p, (level + self.support_depth) as u32);
            }
        }
        Ok(self.values[idx])
    }

    /// Embeds into a larger support and finer constancy window.
    pub fn refine(&self, support_depth: i32, constancy_depth: i32) -> Result<Self, StepError> {
        if support_depth < self.support_depth || constancy_depth < self.constancy_depth {
            return Err(StepError::NotRefinement {
                support: self.support_depth,
                constancy: self.constancy_depth,
                target_support: support_depth,
                target_constancy: constancy_depth,
            });
        }
        let mut out = Self::zeros(self.p, support_depth, constancy_depth)?;
        for w in 0..out.values.len() {
            out.values[w] =
                self.value_at(&PointIndex::new(w as u64, support_depth, constancy_depth))?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    p: u32,
    cell_depth: i32,
    support_level: i32,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(
        p: u32,
        cell_depth: i32,
        support_level: i32,
        values: Vec<Complex64>,
    ) -> Result<Self, StepError> {
        let len = window_len(cell_depth, support_level)?;
        let expected = checked_cells(p, len as i64)?;
        if values.len() != expected {
            return Err(StepError::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Spectrum {
            p,
            cell_depth,
            support_level,
            values,
        })
    }

    pub fn zeros(p: u32, cell_depth: i32, support_level: i32) -> Result<Self, StepError> {
        let len = window_len(cell_depth, support_level)?;
        let n = checked_cells(p, len as i64)?;
        Self::new(
            p,
            cell_depth,
            support_level,
            vec![Complex64::new(0.0, 0.0); n],
        )
    }

    /// `1_{G_level^⊥}` in the window `(N, M)`.
    pub fn subgroup_indicator(
        p: u32,
        level: i32,
        cell_depth: i32,
        support_level: i32,
    ) -> Result<Self, StepError> {
        let mut s = Self::zeros(p, cell_depth, support_level)?;
        let top = level.clamp(-cell_depth, support_level);
        for v in s.values.iter_mut().take(ipow(p, (top + cell_depth) as u32)) {
            *v = Complex64::new(1.0, 0.0);
        }
        Ok(s)
    }

    /// Indicator of a coset at least as coarse as the cells.
    pub fn coset_indicator(
        p: u32,
        c: &CharCoset,
        cell_depth: i32,
        support_level: i32,
    ) -> Result<Self, StepError> {
        let mut s = Self::zeros(p, cell_depth, support_level)?;
        for u in c.cell_range(-cell_depth, support_level, p)? {
            s.values[u] = Complex64::new(1.0, 0.0);
        }
        Ok(s)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    /// `N`: cells are cosets of `G_{-N}^⊥`.
    pub fn cell_depth(&self) -> i32 {
        self.cell_depth
    }
    /// `M`: support inside `G_M^⊥`.
    pub fn support_level(&self) -> i32 {
        self.support_level
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
    pub fn window_len(&self) -> u32 {
        (self.cell_depth + self.support_level) as u32
    }

    /// `ν` of one cell, `p^{-N}`.
    pub fn cell_measure(&self) -> f64 {
        fpow(self.p, -self.cell_depth)
    }

    /// The cell with index `u` as a coset.
    pub fn cell(&self, u: usize) -> CharCoset {
        CharCoset::from_word(
            -self.cell_depth,
            u as u64,
            self.window_len() as usize,
            self.p,
        )
    }

    /// The ring `G_{n+1}^⊥ ∖ G_n^⊥` of a non-identity cell.
    pub fn cell_ring(&self, u: usize) -> Option<i32> {
        if u == 0 {
            return None;
        }
        let mut top = 0i32;
        let mut v = u;
        while v >= self.p as usize {
            v /= self.p as usize;
            top += 1;
        }
        Some(top - self.cell_depth)
    }

    /// Value on a coset no coarser than the cells; zero outside the support.
    pub fn value_on(&self, c: &CharCoset) -> Complex64 {
        match c.containing_cell(-self.cell_depth, self.support_level, self.p) {
            Some(u) => self.values[u],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Embeds into a finer-cell, wider-support window.
    pub fn refine(&self, cell_depth: i32, support_level: i32) -> Result<Self, StepError> {
        if cell_depth < self.cell_depth || support_level < self.support_level {
            return Err(StepError::NotRefinement {
                support: self.support_level,
                constancy: self.cell_depth,
                target_support: support_level,
                target_constancy: cell_depth,
            });
        }
        let mut out = Self::zeros(self.p, cell_depth, support_level)?;
        let len = out.window_len() as usize;
        for u in 0..out.values.len() {
            let c = CharCoset::from_word(-cell_depth, u as u64, len, self.p);
            out.values[u] = self.value_on(&c);
        }
        Ok(out)
    }
}

/// `f̂[u] = p^{-K} Σ_w f[w]·conj(e^{2πi·rev(u)·w/p^{J+K}})` via the radix-`p` transform.
pub fn fourier(f: &StepSignal) -> Spectrum {
    let plan = RadixPlan::new(f.p, f.window_len());
    let mut values = f.values.clone();
    plan.forward_digit_reversed(&mut values);
    let scale = f.cell_measure();
    values.iter_mut().for_each(|v| *v *= scale);
    Spectrum {
        p: f.p,
        cell_depth: f.support_depth,
        support_level: f.constancy_depth,
        values,
    }
}

/// `f[w] = p^{-N} Σ_u F[u]·e^{2πi·rev(u)·w/p^{M+N}}`.
pub fn inverse_fourier(spec: &Spectrum) -> StepSignal {
    let plan = RadixPlan::new(spec.p, spec.window_len());
    let mut values = spec.values.clone();
    plan.adjoint(&mut values);
    let scale = spec.cell_measure();
    values.iter_mut().for_each(|v| *v *= scale);
    StepSignal {
        p: spec.p,
        support_depth: spec.cell_depth,
        constancy_depth: spec.support_level,
        values,
    }
}

/// Quadratic-time reference evaluation of [`fourier`].
pub fn fourier_direct(f: &StepSignal) -> Spectrum {
    let len = f.window_len();
    let size = f.values.len() as u128;
    let scale = f.cell_measure();
    let values = (0..f.values.len())
        .map(|u| {
            let acc: Complex64 = f
                .values
                .iter()
                .enumerate()
                .map(|(w, v)| {
                    let e = pairing_exponent(u as u64, w as u64, len, f.p) as u128;
                    v * unit_root(size - e, size)
                })
                .sum();
            acc * scale
        })
        .collect();
    Spectrum {
        p: f.p,
        cell_depth: f.support_depth,
        support_level: f.constancy_depth,
        values,
    }
}

/// Quadratic-time reference evaluation of [`inverse_fourier`].
pub fn inverse_fourier_direct(spec: &Spectrum) -> StepSignal {
    let len = spec.window_len();
    let size = spec.values.len() as u128;
    let scale = spec.cell_measure();
    let values = (0..spec.values.len())
        .map(|w| {
            let acc: Complex64 = spec
                .values
                .iter()
                .enumerate()
                .map(|(u, v)| {
                    v * unit_root(
                        pairing_exponent(u as u64, w as u64, len, spec.p) as u128,
                        size,
                    )
                })
                .sum();
            acc * scale
        })
        .collect();
    StepSignal {
        p: spec.p,
        support_depth: spec.cell_depth,
        constancy_depth: spec.support_level,
        values,
    }
}

/// `‖f‖² = p^{-K} Σ |f[w]|²`.
pub fn signal_norm_sq(f: &StepSignal) -> f64 {
    f.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * f.cell_measure()
}

/// `‖F‖² = p^{-N} Σ |F[u]|²`.
pub fn spectrum_norm_sq(spec: &Spectrum) -> f64 {
    spec.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * spec.cell_measure()
}

/// `g(x) = f(x ∸ x₀)` for a point of the same window.
pub fn translate_point(f: &StepSignal, x0: &PointIndex) -> StepSignal {
    let size = f.values.len();
    let shift = x0.w as usize % size.max(1);
    let values = (0..size)
        .map(|w| f.values[(w + size - shift) % size])
        .collect();
    StepSignal {
        values,
        ..f.clone()
    }
}

/// `g(x) = f(x ∸ h)` for `h ∈ H_0^{(s)}`, `s ≤ J`.
pub fn translate(f: &StepSignal, h: &ShiftIndex) -> Result<StepSignal, StepError> {
    let x0 = h.as_point(f.support_depth, f.constancy_depth, f.p)?;
    Ok(translate_point(f, &x0))
}

/// `g(x) = f(𝒜ⁿx)`. Since `𝒜x = x/p`, `g ∈ 𝔇_{K+n}(G_{-J+n})` with the same
/// value vector.
pub fn dilate_signal(f: &StepSignal, n: i32) -> StepSignal {
    StepSignal {
        support_depth: f.support_depth - n,
        constancy_depth: f.constancy_depth + n,
        ..f.clone()
    }
}

/// `G(χ) = F(χ𝒜^{-t})`, in `𝔇_{-(N-t)}(G_{M+t}^⊥)` with the same value vector.
pub fn dilate_spectrum(spec: &Spectrum, t: i32) -> Spectrum {
    Spectrum {
        cell_depth: spec.cell_depth - t,
        support_level: spec.support_level + t,
        ..spec.clone()
    }
}

/// `∫_c |F|² dν`, exact for step spectra.
pub fn coset_energy(spec: &Spectrum, c: &CharCoset) -> f64 {
    let p = spec.p;
    let n = spec.cell_depth;
    let m = spec.support_level;
    if c.top_level().is_some_and(|l| l >= m) {
        return 0.0;
    }
    if c.base < -n {
        // inside a single cell
        let u = c
            .containing_cell(-n, m, p)
            .expect("checked against support");
        return spec.values[u].norm_sqr() * c.measure(p);
    }
    if c.base >= m {
        return spectrum_norm_sq(spec);
    }
    let range = c.cell_range(-n, m, p).expect("coset inside the window");
    spec.values[range].iter().map(|v| v.norm_sqr()).sum::<f64>() * spec.cell_measure()
}

/// `∫_{G_{n+1}^⊥ ∖ G_n^⊥} |F|² dν`.
pub fn ring_energy(spec: &Spectrum, ring: i32) -> f64 {
    let p = spec.p;
    let n = spec.cell_depth;
    if ring >= spec.support_level {
        return 0.0;
    }
    if ring < -n {
        return spec.values[0].norm_sqr() * (fpow(p, ring + 1) - fpow(p, ring));
    }
    let lo = ipow(p, (ring + n) as u32);
    spec.values[lo..lo * p as usize]
        .iter()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        * spec.cell_measure()
}

/// Base-`p` digits of a spectrum index, lowest level first.
pub fn cell_digits(spec: &Spectrum, u: usize) -> Vec<u32> {
    digits_of(u as u64, spec.window_len() as usize, spec.p)
}
