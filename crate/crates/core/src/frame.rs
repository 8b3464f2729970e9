//! Wavelet frames from coset tilings of the outer dual ring.
//!
//! All cell indices here live in the window `𝔇_{-N}(G_{M+1}^⊥)`: cells are
//! cosets of `G_{-N}^⊥` and the ring `G_{M+1}^⊥ ∖ G_M^⊥` is the index range
//! `[p^{M+N}, p^{M+N+1})`. A support `E = G_{-s}^⊥ r_{-s}^{d_0} ⋯ r_M^{d_{M+s}}`
//! covers an aligned block of `p^{N-s}` cells and its dilate `E𝒜^t` covers an
//! aligned block of `p^{N-s+t}` cells with the same block number.

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{digits_of, ipow, CharCoset};
use crate::mask::MaskSolution;
use crate::step::Spectrum;
use crate::{TAU_EQ, TAU_ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("no admissible coset covers ring cell {stuck_cell}; {} forbidden cells", forbidden.len())]
    NoTiling {
        stuck_cell: usize,
        forbidden: Vec<usize>,
    },
    #[error("tiling search exceeded its budget of {budget} nodes")]
    BudgetExceeded { budget: u64 },
    #[error("wavelet {wavelet} covers cell {cell} where φ̂(·𝒜^-1) vanishes")]
    DivisionByZeroCell { wavelet: usize, cell: usize },
    #[error("support (s={s}, t={t}) is not admissible: {reason}")]
    InadmissibleSupport {
        s: u32,
        t: u32,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Exhaustive,
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

/// `E = G_{-s}^⊥ r_{-s}^{d_0} ⋯ r_M^{d_{M+s}}` together with its offset `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WaveletSupport {
    pub s: u32,
    pub t: u32,
    /// Digits at levels `-s..=M`, lowest level first.
    pub digits: Vec<u32>,
}

impl WaveletSupport {
    pub fn coset(&self) -> CharCoset {
        CharCoset::new(-(self.s as i32), self.digits.clone())
    }

    /// The digit word as an integer, lowest level least significant.
    pub fn word(&self, p: u32) -> u64 {
        self.digits
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * p as u64 + d as u64)
    }

    /// Cells of `E` in the window `𝔇_{-N}(G_{M+1}^⊥)`.
    pub fn cells(&self, p: u32, n: u32) -> Range<usize> {
        let len = ipow(p, n - self.s);
        let word = self.word(p) as usize;
        word * len..(word + 1) * len
    }

    /// Cells of `E𝒜^t` in the same window.
    pub fn dilate_cells(&self, p: u32, n: u32) -> Range<usize> {
        let len = ipow(p, n - self.s + self.t);
        let word = self.word(p) as usize;
        word * len..(word + 1) * len
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    pub support: WaveletSupport,
    /// `m_j` on the cells of `E_j`, in increasing cell order.
    pub mask_cells: Vec<Complex64>,
    /// `ψ̂_j = 1_{E_j}` on `𝔇_{-N}(G_{M+1}^⊥)`.
    pub psi_hat: Spectrum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSystem {
    pub mask: MaskSolution,
    pub phi_hat: Spectrum,
    pub wavelets: Vec<WaveletSpec>,
    pub l: u32,
}

impl FrameSystem {
    pub fn new(mask: MaskSolution, phi_hat: Spectrum, wavelets: Vec<WaveletSpec>) -> Self {
        let l = wavelets.iter().map(|w| w.support.t).max().unwrap_or(0);
        FrameSystem {
            mask,
            phi_hat,
            wavelets,
            l,
        }
    }

    pub fn p(&self) -> u32 {
        self.phi_hat.p()
    }

    /// `N`.
    pub fn support_depth(&self) -> u32 {
        self.phi_hat.cell_depth() as u32
    }

    /// `M`.
    pub fn constancy_depth(&self) -> u32 {
        self.phi_hat.support_level() as u32
    }

    pub fn supports(&self) -> Vec<WaveletSupport> {
        self.wavelets.iter().map(|w| w.support.clone()).collect()
    }
}

fn depths(phi_hat: &Spectrum) -> (u32, u32, u32) {
    (
        phi_hat.p(),
        phi_hat.cell_depth().max(0) as u32,
        phi_hat.support_level().max(0) as u32,
    )
}

/// Cells `u` of `𝔇_{-N}(G_{M+1}^⊥)` with `|φ̂(χ_u𝒜^{-1})| = |φ̂[u div p]| ≤ τ_zero`.
pub fn forbidden_cells(phi_hat: &Spectrum) -> Vec<usize> {
    let p = phi_hat.p() as usize;
    let values = phi_hat.values();
    (0..values.len() * p)
        .filter(|u| values[u / p].norm() <= TAU_ZERO)
        .collect()
}

fn forbidden_mask(phi_hat: &Spectrum) -> Vec<bool> {
    let p = phi_hat.p() as usize;
    let values = phi_hat.values();
    (0..values.len() * p)
        .map(|u| values[u / p].norm() <= TAU_ZERO)
        .collect()
}

/// Admissible supports whose dilate starts at ring cell `cell`, in the order
/// `(t ascending, s ascending)`.
fn candidates_at(cell: usize, p: u32, n: u32, m: u32, forbidden: &[bool]) -> Vec<WaveletSupport> {
    let mut out = Vec::new();
    for t in 0..=n {
        for s in 0..=n {
            if m + s < t {
                continue;
            }
            let len = ipow(p, n - s + t);
            if cell % len != 0 {
                continue;
            }
            let word = cell / len;
            let cells = ipow(p, n - s);
            if forbidden[word * cells..(word + 1) * cells]
                .iter()
                .any(|&f| f)
            {
                continue;
            }
            out.push(WaveletSupport {
                s,
                t,
                digits: digits_of(word as u64, (m + s + 1) as usize, p),
            });
        }
    }
    out
}

/// Supports `(E_j, t_j)` whose dilates tile `G_{M+1}^⊥ ∖ G_M^⊥`.
pub fn search_tiling(
    phi_hat: &Spectrum,
    strategy: Strategy,
    budget: u64,
) -> Result<Vec<WaveletSupport>, FrameError> {
    let (p, n, m) = depths(phi_hat);
    let forbidden = forbidden_mask(phi_hat);
    let ring = ipow(p, m + n)..ipow(p, m + n + 1);
    let mut covered = vec![false; ring.len()];
    let no_tiling = |stuck_cell| FrameError::NoTiling {
        stuck_cell,
        forbidden: forbidden_cells(phi_hat),
    };
    match strategy {
        Strategy::Greedy => {
            let mut family = Vec::new();
            for cell in ring.clone() {
                if covered[cell - ring.start] {
                    continue;
                }
                let pick = candidates_at(cell, p, n, m, &forbidden)
                    .into_iter()
                    .find(|c| c.dilate_cells(p, n).all(|u| !covered[u - ring.start]))
                    .ok_or_else(|| no_tiling(cell))?;
                for u in pick.dilate_cells(p, n) {
                    covered[u - ring.start] = true;
                }
                family.push(pick);
            }
            Ok(family)
        }
        Strategy::Exhaustive => {
            let mut search = ExactCover {
                p,
                n,
                m,
                ring_start: ring.start,
                forbidden: &forbidden,
                covered,
                family: Vec::new(),
                visited: 0,
                budget,
                deepest_stuck: ring.start,
            };
            match search.run()? {
                true => Ok(search.family),
                false => Err(no_tiling(search.deepest_stuck)),
            }
        }
    }
}

struct ExactCover<'a> {
    p: u32,
    n: u32,
    m: u32,
    ring_start: usize,
    forbidden: &'a [bool],
    covered: Vec<bool>,
    family: Vec<WaveletSupport>,
    visited: u64,
    budget: u64,
    deepest_stuck: usize,
}

impl ExactCover<'_> {
    fn run(&mut self) -> Result<bool, FrameError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(FrameError::BudgetExceeded {
                budget: self.budget,
            });
        }
        let Some(offset) = self.covered.iter().position(|&c| !c) else {
            return Ok(true);
        };
        let cell = offset + self.ring_start;
        let mut options = candidates_at(cell, self.p, self.n, self.m, self.forbidden);
        options.sort_by_key(|c| (c.t, std::cmp::Reverse(c.s)));
        let mut any = false;
        for option in options {
            let range = option.dilate_cells(self.p, self.n);
            let start = range.start - self.ring_start;
            let end = range.end - self.ring_start;
            if self.covered[start..end].iter().any(|&c| c) {
                continue;
            }
            any = true;
            self.covered[start..end].iter_mut().for_each(|c| *c = true);
            self.family.push(option);
            if self.run()? {
                return Ok(true);
            }
            self.family.pop();
            self.covered[start..end].iter_mut().for_each(|c| *c = false);
        }
        if !any {
            self.deepest_stuck = self.deepest_stuck.max(cell);
        }
        Ok(false)
    }
}

/// `m_j = 1_{E_j}/φ̂(·𝒜^{-1})` and `ψ̂_j = 1_{E_j}` for every support.
pub fn build_wavelet_masks(
    phi_hat: &Spectrum,
    family: &[WaveletSupport],
) -> Result<Vec<WaveletSpec>, FrameError> {
    let (p, n, m) = depths(phi_hat);
    let values = phi_hat.values();
    family
        .iter()
        .enumerate()
        .map(|(j, support)| {
            if support.s > n || support.t > n || m + support.s < support.t {
                return Err(FrameError::InadmissibleSupport {
                    s: support.s,
                    t: support.t,
                    reason: "offsets outside 0..=N",
                });
            }
            if support.digits.len() != (m + support.s + 1) as usize
                || support.digits.iter().any(|&d| d >= p)
            {
                return Err(FrameError::InadmissibleSupport {
                    s: support.s,
                    t: support.t,
                    reason: "digit word does not span levels -s..=M",
                });
            }
            let mask_cells = support
                .cells(p, n)
                .map(|u| {
                    let below = values[u / p as usize];
                    if below.norm() <= TAU_ZERO {
                        Err(FrameError::DivisionByZeroCell {
                            wavelet: j,
                            cell: u,
                        })
                    } else {
                        Ok(below.inv())
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut psi_hat =
                Spectrum::zeros(p, n as i32, m as i32 + 1).expect("window of φ̂ plus one level");
            for u in support.cells(p, n) {
                psi_hat.values_mut()[u] = Complex64::new(1.0, 0.0);
            }
            Ok(WaveletSpec {
                support: support.clone(),
                mask_cells,
                psi_hat,
            })
        })
        .collect()
}

/// Tiling search followed by [`build_wavelet_masks`].
pub fn build_frame(
    mask: MaskSolution,
    phi_hat: Spectrum,
    strategy: Strategy,
    budget: u64,
) -> Result<FrameSystem, FrameError> {
    let family = search_tiling(&phi_hat, strategy, budget)?;
    let wavelets = build_wavelet_masks(&phi_hat, &family)?;
    Ok(FrameSystem::new(mask, phi_hat, wavelets))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    /// Offending cells, or wavelet indices for per-wavelet checks.
    pub offending: Vec<usize>,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, offending: Vec<usize>, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.to_string(),
            pass: offending.is_empty(),
            offending,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
}

impl FrameReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

pub fn validate_frame_spec(fs: &FrameSystem) -> FrameReport {
    let (p, n, m) = depths(&fs.phi_hat);
    let forbidden = forbidden_mask(&fs.phi_hat);
    let window = ipow(p, m + n + 1);
    let ring = ipow(p, m + n)..window;
    let mut checks = Vec::new();

    let shape_bad: Vec<usize> = fs
        .wavelets
        .iter()
        .enumerate()
        .filter(|(_, w)| {
            let s = &w.support;
            s.s > n
                || s.t > n
                || m + s.s < s.t
                || s.digits.len() != (m + s.s + 1) as usize
                || s.digits.iter().any(|&d| d >= p)
        })
        .map(|(j, _)| j)
        .collect();
    checks.push(CheckOutcome::new(
        "offsets",
        shape_bad.clone(),
        "0 ≤ s, t ≤ N and digits span levels -s..=M",
    ));
    if !shape_bad.is_empty() {
        return FrameReport {
            pass: false,
            checks,
        };
    }

    let lead_bad: Vec<usize> = fs
        .wavelets
        .iter()
        .enumerate()
        .filter(|(_, w)| {
            let c = w.support.coset();
            c.top_level() != Some(m as i32 - w.support.t as i32)
        })
        .map(|(j, _)| j)
        .collect();
    checks.push(CheckOutcome::new(
        "leading_digit",
        lead_bad,
        "top digit of E_j at level M - t_j",
    ));

    let mut touched: Vec<usize> = fs
        .wavelets
        .iter()
        .flat_map(|w| w.support.cells(p, n))
        .filter(|&u| forbidden[u])
        .collect();
    touched.sort_unstable();
    touched.dedup();
    checks.push(CheckOutcome::new(
        "forbidden_avoided",
        touched,
        "E_j avoids cells where φ̂(·𝒜^-1) = 0",
    ));

    let mut count = vec![0u32; window];
    for w in &fs.wavelets {
        for u in w.support.cells(p, n) {
            count[u] += 1;
        }
    }
    let overlaps: Vec<usize> = (0..window).filter(|&u| count[u] > 1).collect();
    checks.push(CheckOutcome::new(
        "supports_disjoint",
        overlaps,
        "E_j pairwise disjoint",
    ));

    let mut count = vec![0u32; window];
    for w in &fs.wavelets {
        for u in w.support.dilate_cells(p, n) {
            count[u] += 1;
        }
    }
    let overlaps: Vec<usize> = ring.clone().filter(|&u| count[u] > 1).collect();
    checks.push(CheckOutcome::new(
        "dilates_disjoint",
        overlaps,
        "E_j𝒜^t_j pairwise disjoint",
    ));
    let missing: Vec<usize> = ring.clone().filter(|&u| count[u] == 0).collect();
    checks.push(CheckOutcome::new(
        "ring_partition",
        missing,
        "dilates cover G_(M+1)^⊥ ∖ G_M^⊥",
    ));

    let mut bad_psi = Vec::new();
    for (j, w) in fs.wavelets.iter().enumerate() {
        let cells = w.support.cells(p, n);
        let lifted_ok = w.mask_cells.len() == cells.len()
            && cells
                .clone()
                .zip(&w.mask_cells)
                .all(|(u, mc)| (fs.phi_hat.values()[u / p as usize] * mc - 1.0).norm() <= TAU_EQ);
        let psi_ok = w.psi_hat.p() == p
            && w.psi_hat.cell_depth() == n as i32
            && w.psi_hat.support_level() == m as i32 + 1
            && w.psi_hat.values().iter().enumerate().all(|(u, v)| {
                let target = if cells.contains(&u) { 1.0 } else { 0.0 };
                (v - target).norm() <= TAU_EQ
            });
        if !(lifted_ok && psi_ok) {
            bad_psi.push(j);
        }
    }
    checks.push(CheckOutcome::new(
        "psi_indicator",
        bad_psi,
        "φ̂(·𝒜^-1)·m_j = ψ̂_j = 1_(E_j)",
    ));

    let l = fs.wavelets.iter().map(|w| w.support.t).max().unwrap_or(0);
    checks.push(CheckOutcome::new(
        "l_is_max_t",
        if l == fs.l {
            vec![]
        } else {
            vec![fs.l as usize]
        },
        format!("l = {l}"),
    ));

    let pass = checks.iter().all(|c| c.pass);
    FrameReport { pass, checks }
}
