//! Analysis with a constructed frame: coefficients `c_{n,h}^{(j)} = ⟨f, ψ_{n,h}^{(j)}⟩`,
//! the per-block energy identity, tightness checks and remainder energies.
//!
//! Every `ψ̂_j` is the indicator of a coset `E_j`, so `ψ̂_{n,h}^{(j)}` lives on
//! `E_j𝒜^n` and the blocks `(j, n)` split the dual group into disjoint pieces.
//! Energies are therefore exact sums of cell energies of `f̂`.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{FrameSystem, WaveletSupport};
use crate::group::{
    char_point_pair, coset_dilate, digits_of, fpow, ipow, CharCoset, GroupError, ShiftIndex,
};
use crate::step::{coset_energy, inverse_fourier, spectrum_norm_sq, Spectrum, StepError};
use crate::{TAU_EQ, TAU_ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameOpsError {
    #[error("shift window of depth {given} drops a coefficient of size {magnitude:e} (wavelet {wavelet}, scale {scale}, needs depth {required})")]
    WindowTooSmall {
        wavelet: usize,
        scale: i32,
        required: u32,
        given: u32,
        magnitude: f64,
    },
    #[error("no wavelet with index {0}")]
    NoSuchWavelet(usize),
    #[error("spectrum over p = {got} analysed with a frame over p = {expected}")]
    PrimeMismatch { expected: u32, got: u32 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Coefficients of one block `(j, n)` for every shift of `H_0^{(depth)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBlock {
    pub wavelet: usize,
    pub scale: i32,
    pub depth: u32,
    /// Indexed by [`ShiftIndex::index`] at `depth`.
    pub coeffs: Vec<Complex64>,
}

impl CoefficientBlock {
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn shifts(&self) -> impl Iterator<Item = (ShiftIndex, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (ShiftIndex::new(self.depth, i as u64), *c))
    }
}

/// `E_j𝒜^n`.
pub fn dilated_support(support: &WaveletSupport, scale: i32) -> CharCoset {
    coset_dilate(&support.coset(), scale)
}

/// The ring `G_{r+1}^⊥ ∖ G_r^⊥` holding `E_j𝒜^n`: `r = M − t_j + n`.
pub fn dilate_ring(fs: &FrameSystem, support: &WaveletSupport, scale: i32) -> i32 {
    fs.constancy_depth() as i32 - support.t as i32 + scale
}

/// Smallest shift depth carrying every nonzero coefficient of block `(j, n)`.
pub fn required_shift_depth(spec: &Spectrum, support: &WaveletSupport, scale: i32) -> u32 {
    (spec.cell_depth() + scale).max(support.s as i32).max(0) as u32
}

fn check_prime(spec: &Spectrum, fs: &FrameSystem) -> Result<(), FrameOpsError> {
    if spec.p() != fs.p() {
        return Err(FrameOpsError::PrimeMismatch {
            expected: fs.p(),
            got: spec.p(),
        });
    }
    Ok(())
}

fn support_of(fs: &FrameSystem, wavelet: usize) -> Result<&WaveletSupport, FrameOpsError> {
    fs.wavelets
        .get(wavelet)
        .map(|w| &w.support)
        .ok_or(FrameOpsError::NoSuchWavelet(wavelet))
}

/// `c_{n,h} = p^{n/2} ∫_{E} f̂(η𝒜^n)(η, h) dν(η)` for all `h ∈ H_0^{(depth)}`.
///
/// The integrand is split as `η = η₀ρ` with `η₀ ∈ G_0^⊥` and `ρ` the digits of
/// `E` at levels `≥ 0`, so the integral is one inverse transform over `G_0^⊥`
/// times the phase `(ρ, h)`. With `depth = None` the natural depth is used;
/// a smaller explicit depth is accepted only when the dropped coefficients
/// vanish.
pub fn analysis_coeffs(
    spec: &Spectrum,
    fs: &FrameSystem,
    wavelet: usize,
    scale: i32,
    depth: Option<u32>,
) -> Result<CoefficientBlock, FrameOpsError> {
    check_prime(spec, fs)?;
    let support = support_of(fs, wavelet)?;
    let p = spec.p();
    let m = fs.constancy_depth() as i32;
    let s = support.s as usize;
    let d = required_shift_depth(spec, support, scale);
    let size = ipow(p, d);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); size];

    if dilate_ring(fs, support, scale) < spec.support_level() {
        let rho = &support.digits[s..];
        let low_word = support.digits[..s]
            .iter()
            .rev()
            .fold(0usize, |acc, &x| acc * p as usize + x as usize);
        let block = ipow(p, d - s as u32);
        let mut values = vec![Complex64::new(0.0, 0.0); size];
        for (u0, v) in values.iter_mut().enumerate() {
            if u0 / block != low_word {
                continue;
            }
            let mut digits = digits_of(u0 as u64, d as usize, p);
            digits.extend_from_slice(rho);
            let cell = CharCoset::new(-(d as i32), digits);
            *v = spec.value_on(&coset_dilate(&cell, scale));
        }
        let f = inverse_fourier(&Spectrum::new(p, d as i32, 0, values)?);
        let mut rho_digits = vec![0; d as usize];
        rho_digits.extend_from_slice(rho);
        let rho_coset = CharCoset::new(-(d as i32), rho_digits);
        let norm = fpow(p, scale).sqrt();
        for (h, c) in coeffs.iter_mut().enumerate() {
            let point = ShiftIndex::new(d, h as u64).as_point(d as i32, m + 1, p)?;
            *c = f.values()[h] * char_point_pair(&rho_coset, &point, p)? * norm;
        }
    }

    let block = CoefficientBlock {
        wavelet,
        scale,
        depth: d,
        coeffs,
    };
    match depth {
        Some(given) if given < d => restrict_block(block, given, p),
        _ => Ok(block),
    }
}

/// Keeps the shifts of `H_0^{(given)}` in a block computed at a larger depth.
fn restrict_block(
    block: CoefficientBlock,
    given: u32,
    p: u32,
) -> Result<CoefficientBlock, FrameOpsError> {
    // h ∈ H_0^{(given)} iff its digits below level -given vanish
    let stride = ipow(p, block.depth - given);
    let dropped = block
        .coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride != 0)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    if dropped > TAU_ZERO {
        return Err(FrameOpsError::WindowTooSmall {
            wavelet: block.wavelet,
            scale: block.scale,
            required: block.depth,
            given,
            magnitude: dropped,
        });
    }
    Ok(CoefficientBlock {
        coeffs: block.coeffs.iter().step_by(stride).copied().collect(),
        depth: given,
        ..block
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyComparison {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// `Σ_h |c_{n,h}^{(j)}|²` against `∫_{E_j𝒜^n} |f̂|² dν`.
pub fn block_energy_check(
    spec: &Spectrum,
    fs: &FrameSystem,
    wavelet: usize,
    scale: i32,
) -> Result<EnergyComparison, FrameOpsError> {
    let lhs = analysis_coeffs(spec, fs, wavelet, scale, None)?.energy();
    let rhs = coset_energy(spec, &dilated_support(support_of(fs, wavelet)?, scale));
    Ok(EnergyComparison {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// Scales `n` whose block meets the support of `spec` outside its identity
/// cell, for one wavelet.
pub fn active_scales(
    spec: &Spectrum,
    fs: &FrameSystem,
    support: &WaveletSupport,
) -> RangeInclusive<i32> {
    let base = fs.constancy_depth() as i32 - support.t as i32;
    (-spec.cell_depth() - base)..=(spec.support_level() - 1 - base)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PartitionReport {
    pub pass: bool,
    pub window: (i32, i32),
    pub cell_level: i32,
    pub cells_checked: usize,
    /// Cells (window indices) covered by no block.
    pub uncovered: Vec<usize>,
    /// Cells covered by more than one block.
    pub overcovered: Vec<usize>,
}

/// Counts, for every cell of `G_W^⊥ ∖ G_{-V}^⊥`, the blocks `E_j𝒜^n` covering it.
pub fn partition_check(
    fs: &FrameSystem,
    below: i32,
    above: i32,
) -> Result<PartitionReport, FrameOpsError> {
    let p = fs.p();
    let m = fs.constancy_depth() as i32;
    let lowest = -below;
    let cell_level = fs
        .wavelets
        .iter()
        .map(|w| -(w.support.s as i32) + lowest - m + w.support.t as i32)
        .fold(lowest, i32::min);
    let cells = crate::group::checked_cells(p, (above - cell_level) as i64)?;
    let inner = ipow(p, (lowest - cell_level) as u32);
    let mut count = vec![0u8; cells];
    for w in &fs.wavelets {
        let base = m - w.support.t as i32;
        for ring in lowest..above {
            let dilate = dilated_support(&w.support, ring - base);
            for u in dilate.cell_range(cell_level, above, p)? {
                count[u] = count[u].saturating_add(1);
            }
        }
    }
    let uncovered: Vec<usize> = (inner..cells).filter(|&u| count[u] == 0).collect();
    let overcovered: Vec<usize> = (inner..cells).filter(|&u| count[u] > 1).collect();
    Ok(PartitionReport {
        pass: uncovered.is_empty() && overcovered.is_empty(),
        window: (lowest, above),
        cell_level,
        cells_checked: cells - inner,
        uncovered,
        overcovered,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParsevalReport {
    pub sum_energies: f64,
    pub norm_sq: f64,
    pub tail: f64,
    pub gap: f64,
    pub pass: bool,
}

/// `Σ_{j, n < cutoff} ∫_{E_j𝒜^n} |f̂|²`, exactly: blocks above the identity
/// cell explicitly, those inside it as a geometric series in `ν(E_j𝒜^n)`.
pub fn energy_below(spec: &Spectrum, fs: &FrameSystem, cutoff: i32) -> f64 {
    let p = spec.p();
    let identity = spec.values()[0].norm_sqr();
    let mut total = 0.0;
    for w in &fs.wavelets {
        let first_outside = *active_scales(spec, fs, &w.support).start();
        let inside_end = cutoff.min(first_outside);
        // Σ_{n < inside_end} p^{n-s} = p^{inside_end - s}/(p - 1)
        total += identity * fpow(p, inside_end - w.support.s as i32) / (p as f64 - 1.0);
        for n in first_outside..cutoff {
            total += coset_energy(spec, &dilated_support(&w.support, n));
        }
    }
    total
}

/// `Σ_{j, n ∈ scales} ∫_{E_j𝒜^n} |f̂|²`.
pub fn block_energies(spec: &Spectrum, fs: &FrameSystem, scales: RangeInclusive<i32>) -> f64 {
    fs.wavelets
        .iter()
        .flat_map(|w| {
            scales
                .clone()
                .map(move |n| coset_energy(spec, &dilated_support(&w.support, n)))
        })
        .sum()
}

/// Tight-frame identity: finite block energies plus the exact energy of all
/// blocks below `scales.start()` against `‖f‖²`.
pub fn parseval_check(
    spec: &Spectrum,
    fs: &FrameSystem,
    scales: RangeInclusive<i32>,
) -> ParsevalReport {
    let sum_energies = block_energies(spec, fs, scales.clone());
    let tail = energy_below(spec, fs, *scales.start());
    let norm_sq = spectrum_norm_sq(spec);
    let gap = (sum_energies + tail - norm_sq).abs();
    ParsevalReport {
        sum_energies,
        norm_sq,
        tail,
        gap,
        pass: gap <= TAU_EQ,
    }
}

/// `R_Ñ = (Σ_{j, n > Ñ} ∫_{E_j𝒜^n} |f̂|²)^{1/2}`.
pub fn remainder_energy(spec: &Spectrum, fs: &FrameSystem, cutoff: i32) -> f64 {
    fs.wavelets
        .iter()
        .map(|w| {
            let top = *active_scales(spec, fs, &w.support).end();
            ((cutoff + 1)..=top)
                .map(|n| coset_energy(spec, &dilated_support(&w.support, n)))
                .fold(0.0, |acc, e| acc + e)
        })
        .fold(0.0, |acc: f64, e| acc + e)
        .sqrt()
}

/// Cell depth of a window fine enough for every block in `scales`.
fn synthesis_depth(spec: &Spectrum, fs: &FrameSystem, scales: &RangeInclusive<i32>) -> i32 {
    fs.wavelets
        .iter()
        .flat_map(|w| {
            scales
                .clone()
                .map(move |n| required_shift_depth(spec, &w.support, n) as i32 - n)
        })
        .fold(spec.cell_depth(), i32::max)
}

/// `Σ_{j, n ∈ scales, h} c_{n,h}^{(j)} ψ̂_{n,h}^{(j)}`, summed cell by cell.
pub fn partial_reconstruct(
    spec: &Spectrum,
    fs: &FrameSystem,
    scales: RangeInclusive<i32>,
    depth: Option<u32>,
) -> Result<Spectrum, FrameOpsError> {
    check_prime(spec, fs)?;
    let p = spec.p();
    let top = spec.support_level();
    let cell_depth = synthesis_depth(spec, fs, &scales);
    let mut out = Spectrum::zeros(p, cell_depth, top)?;
    for (j, w) in fs.wavelets.iter().enumerate() {
        for n in scales.clone() {
            if dilate_ring(fs, &w.support, n) >= top {
                continue;
            }
            let block = analysis_coeffs(spec, fs, j, n, depth)?;
            let d = block.depth as i32;
            let norm = fpow(p, -n).sqrt();
            let len = out.window_len() as usize;
            for u in dilated_support(&w.support, n).cell_range(-cell_depth, top, p)? {
                let chi = coset_dilate(&CharCoset::from_word(-cell_depth, u as u64, len, p), -n);
                let point_top = (top - n).max(1);
                let mut acc = Complex64::new(0.0, 0.0);
                for (h, c) in block.shifts() {
                    if c == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let x = h.as_point(d, point_top, p)?;
                    acc += c * char_point_pair(&chi, &x, p)?.conj();
                }
                out.values_mut()[u] += acc * norm;
            }
        }
    }
    Ok(out)
}

/// `f̂ · 1_{⊔_{j, n ∈ scales} E_j𝒜^n}` on the window used by [`partial_reconstruct`].
pub fn masked_spectrum(
    spec: &Spectrum,
    fs: &FrameSystem,
    scales: RangeInclusive<i32>,
) -> Result<Spectrum, FrameOpsError> {
    let p = spec.p();
    let top = spec.support_level();
    let cell_depth = synthesis_depth(spec, fs, &scales);
    let refined = spec.refine(cell_depth, top)?;
    let mut out = Spectrum::zeros(p, cell_depth, top)?;
    for w in &fs.wavelets {
        for n in scales.clone() {
            if dilate_ring(fs, &w.support, n) >= top {
                continue;
            }
            for u in dilated_support(&w.support, n).cell_range(-cell_depth, top, p)? {
                out.values_mut()[u] = refined.values()[u];
            }
        }
    }
    Ok(out)
}
