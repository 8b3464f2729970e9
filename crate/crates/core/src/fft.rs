//! Radix-`p` decimation-in-frequency transform.
//!
//! The forward pass maps `x` to `y[i] = Σ_w x[w] ω^{-w·rev(i)}` with
//! `ω = e^{2πi/p^L}`: a length-`p^L` DFT whose output is left in base-`p`
//! digit-reversed order. That order is exactly the character indexing of the
//! dual group, so no reordering pass is needed. The adjoint pass computes
//! `x[w] = Σ_i y[i] ω^{+w·rev(i)}` by running the stages backwards.

use num_complex::Complex64;

use crate::group::{ipow, unit_root};

#[derive(Debug, Clone)]
pub struct RadixPlan {
    p: usize,
    len: u32,
    size: usize,
    roots: Vec<Complex64>,
}

impl RadixPlan {
    pub fn new(p: u32, len: u32) -> Self {
        let size = ipow(p, len);
        let roots = (0..size as u128)
            .map(|e| unit_root(e, size as u128))
            .collect();
        RadixPlan {
            p: p as usize,
            len,
            size,
            roots,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn digits(&self) -> u32 {
        self.len
    }

    /// `ω^{-e}`.
    #[inline]
    fn inv_root(&self, e: usize) -> Complex64 {
        self.roots[(self.size - e % self.size) % self.size]
    }

    /// In place: `data[i] ← Σ_w data[w] ω^{-w·rev(i)}`.
    pub fn forward_digit_reversed(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.size);
        let p = self.p;
        let mut scratch = vec![Complex64::new(0.0, 0.0); p];
        let mut span = self.size / p.max(1);
        while span >= 1 && self.size > 1 {
            let block = span * p;
            let twiddle_step = self.size / block;
            let dft_step = self.size / p;
            for start in (0..self.size).step_by(block) {
                for k in 0..span {
                    for (r, out) in scratch.iter_mut().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for m in 0..p {
                            acc += data[start + k + m * span]
                                * self.inv_root(((r * m) % p) * dft_step);
                        }
                        *out = acc * self.inv_root(r * k * twiddle_step);
                    }
                    for (r, v) in scratch.iter().enumerate() {
                        data[start + k + r * span] = *v;
                    }
                }
            }
            span /= p;
        }
    }

    /// In place: `data[w] ← Σ_i data[i] ω^{+w·rev(i)}`; the adjoint of
    /// [`RadixPlan::forward_digit_reversed`].
    pub fn adjoint(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.size);
        let p = self.p;
        let mut scratch = vec![Complex64::new(0.0, 0.0); p];
        let mut twisted = vec![Complex64::new(0.0, 0.0); p];
        let mut span = 1usize;
        while span < self.size {
            let block = span * p;
            let twiddle_step = self.size / block;
            let dft_step = self.size / p;
            for start in (0..self.size).step_by(block) {
                for k in 0..span {
                    for (r, tw) in twisted.iter_mut().enumerate() {
                        *tw = data[start + k + r * span]
                            * self.roots[(r * k * twiddle_step) % self.size];
                    }
                    for (m, out) in scratch.iter_mut().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (r, tw) in twisted.iter().enumerate() {
                            acc += *tw * self.roots[((r * m) % p) * dft_step];
                        }
                        *out = acc;
                    }
                    for (m, v) in scratch.iter().enumerate() {
                        data[start + k + m * span] = *v;
                    }
                }
            }
            span = block;
        }
    }
}
