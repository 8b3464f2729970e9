//! Serializable mask and frame documents.
//!
//! Complex numbers are `[re, im]` pairs. Documents carry everything needed to
//! rebuild the in-memory structures without re-running the searches.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{FrameSystem, WaveletSpec, WaveletSupport};
use crate::group::{GroupError, Params};
use crate::mask::{Classification, MaskSolution, Pin, SolveKind};
use crate::step::{Spectrum, StepError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocError {
    #[error("invalid parameters: {0}")]
    Params(#[from] GroupError),
    #[error("field {field} has {got} entries, expected {expected}")]
    Length { field: &'static str, expected: usize, got: usize },
    #[error("wavelet {index}: {reason}")]
    Wavelet { index: usize, reason: String },
    #[error(transparent)]
    Step(#[from] StepError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MaskDoc {
    pub p: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: u32,
    pub zeros: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pins: Vec<Pin>,
    pub classification: Classification,
    pub solve: SolveKind,
    pub beta: Vec<Complex64>,
    pub lambda: Vec<Complex64>,
    pub phi_hat: Vec<Complex64>,
}

fn check_len(field: &'static str, expected: usize, got: usize) -> Result<(), DocError> {
    if expected != got {
        return Err(DocError::Length { field, expected, got });
    }
    Ok(())
}

impl MaskDoc {
    pub fn new(sol: &MaskSolution, phi_hat: &Spectrum) -> Self {
        MaskDoc {
            p: sol.params.p(),
            n: sol.params.support_depth(),
            m: sol.params.constancy_depth(),
            zeros: sol.zeros.clone(),
            pins: sol.pins.clone(),
            classification: sol.classification,
            solve: sol.kind,
            beta: sol.beta.clone(),
            lambda: sol.lambda.clone(),
            phi_hat: phi_hat.values().to_vec(),
        }
    }

    pub fn params(&self) -> Result<Params, DocError> {
        Ok(Params::new(self.p, self.n, self.m)?)
    }

    pub fn to_solution(&self) -> Result<(MaskSolution, Spectrum), DocError> {
        let params = self.params()?;
        check_len("beta", params.coefficient_count(), self.beta.len())?;
        check_len("lambda", params.node_count(), self.lambda.len())?;
        check_len("phiHat", params.spectrum_len(), self.phi_hat.len())?;
        let phi_hat = Spectrum::new(self.p, self.n as i32, self.m as i32, self.phi_hat.clone())?;
        let sol = MaskSolution {
            params,
            zeros: self.zeros.clone(),
            pins: self.pins.clone(),
            classification: self.classification,
            kind: self.solve,
            beta: self.beta.clone(),
            lambda: self.lambda.clone(),
        };
        Ok((sol, phi_hat))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WaveletDoc {
    pub s: u32,
    pub t: u32,
    pub digits: Vec<u32>,
    pub mask_cells: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDoc {
    pub mask: MaskDoc,
    pub wavelets: Vec<WaveletDoc>,
    pub l: u32,
    pub q: usize,
}

impl FrameDoc {
    pub fn new(fs: &FrameSystem) -> Self {
        FrameDoc {
            mask: MaskDoc::new(&fs.mask, &fs.phi_hat),
            wavelets: fs
                .wavelets
                .iter()
                .map(|w| WaveletDoc {
                    s: w.support.s,
                    t: w.support.t,
                    digits: w.support.digits.clone(),
                    mask_cells: w.mask_cells.clone(),
                })
                .collect(),
            l: fs.l,
            q: fs.wavelets.len(),
        }
    }

    /// Rebuilds the frame as written; `ψ̂_j` is regenerated from `E_j`, and
    /// `l` is kept as stored so that validation can compare it.
    pub fn to_frame(&self) -> Result<FrameSystem, DocError> {
        let (mask, phi_hat) = self.mask.to_solution()?;
        let p = self.mask.p;
        let n = self.mask.n;
        let m = self.mask.m;
        let mut wavelets = Vec::with_capacity(self.wavelets.len());
        for (index, w) in self.wavelets.iter().enumerate() {
            let fail = |reason: &str| DocError::Wavelet {
                index,
                reason: reason.to_string(),
            };
            if w.s > n || w.digits.len() != (m + w.s + 1) as usize || w.digits.iter().any(|&d| d >= p) {
                return Err(fail("digit word does not span levels -s..=M"));
            }
            let support = WaveletSupport {
                s: w.s,
                t: w.t,
                digits: w.digits.clone(),
            };
            let cells = support.cells(p, n);
            if w.mask_cells.len() != cells.len() {
                return Err(fail("maskCells length differs from the number of cells of E"));
            }
            let mut psi_hat = Spectrum::zeros(p, n as i32, m as i32 + 1)?;
            for u in cells {
                psi_hat.values_mut()[u] = Complex64::new(1.0, 0.0);
            }
            wavelets.push(WaveletSpec {
                support,
                mask_cells: w.mask_cells.clone(),
                psi_hat,
            });
        }
        Ok(FrameSystem {
            mask,
            phi_hat,
            wavelets,
            l: self.l,
        })
    }
}
