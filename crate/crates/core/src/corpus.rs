//! Seeded test signals for remainder and bound comparisons.
//!
//! Spectra live on `𝔇_{-(N+1)}(G_{2M+1}^⊥)`, so every block beyond scale
//! `M + l` misses their support.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::group::{ipow, Params};
use crate::step::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    /// Indicator of a few random cells.
    CellIndicator,
    /// Dense random spectrum with ring energies `∝ ρ^r`.
    GeometricProfile,
    /// Dense random spectrum with ring energies `∝ (r + 2)^{-a}`.
    PolynomialProfile,
    /// Geometric profile with the identity cell cleared.
    MeanZeroGeometric,
    /// Polynomial profile with the identity cell cleared.
    MeanZeroPolynomial,
}

impl SignalKind {
    pub const ALL: [SignalKind; 5] = [
        SignalKind::CellIndicator,
        SignalKind::GeometricProfile,
        SignalKind::PolynomialProfile,
        SignalKind::MeanZeroGeometric,
        SignalKind::MeanZeroPolynomial,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SignalKind::CellIndicator => "ind",
            SignalKind::GeometricProfile => "geo",
            SignalKind::PolynomialProfile => "poly",
            SignalKind::MeanZeroGeometric => "geo0",
            SignalKind::MeanZeroPolynomial => "poly0",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSignal {
    pub id: String,
    pub kind: SignalKind,
    pub spectrum: Spectrum,
}

/// `(N_F, M_F)` of corpus spectra.
pub fn corpus_window(params: &Params) -> (i32, i32) {
    (
        params.support_depth() as i32 + 1,
        2 * params.constancy_depth() as i32 + 1,
    )
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn profiled<R: Rng + ?Sized>(
    rng: &mut R,
    p: u32,
    cell_depth: i32,
    top: i32,
    ring_energy: impl Fn(i32) -> f64,
) -> Vec<Complex64> {
    let size = ipow(p, (cell_depth + top) as u32);
    let mut values: Vec<Complex64> = (0..size).map(|_| random_unit(rng)).collect();
    let cell = (p as f64).powi(-cell_depth);
    // ring r = top digit index − N holds cells [p^{r+N}, p^{r+N+1})
    for digit in 0..(cell_depth + top) as u32 {
        let lo = ipow(p, digit);
        let hi = lo * p as usize;
        let current: f64 = values[lo..hi].iter().map(|v| v.norm_sqr()).sum::<f64>() * cell;
        let target = ring_energy(digit as i32 - cell_depth);
        let scale = if current > 0.0 {
            (target / current).sqrt()
        } else {
            0.0
        };
        values[lo..hi].iter_mut().for_each(|v| *v *= scale);
    }
    values
}

/// `size` signals cycling through [`SignalKind::ALL`], reproducible from `seed`.
pub fn generate_corpus(params: &Params, seed: u64, size: usize) -> Vec<CorpusSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = params.p();
    let (cell_depth, top) = corpus_window(params);
    let cells = ipow(p, (cell_depth + top) as u32);
    (0..size)
        .map(|i| {
            let kind = SignalKind::ALL[i % SignalKind::ALL.len()];
            let values = match kind {
                SignalKind::CellIndicator => {
                    let mut v = vec![Complex64::new(0.0, 0.0); cells];
                    let count = rng.random_range(1..=4.min(cells));
                    for _ in 0..count {
                        v[rng.random_range(0..cells)] = Complex64::new(1.0, 0.0);
                    }
                    v
                }
                SignalKind::GeometricProfile | SignalKind::MeanZeroGeometric => {
                    let ratio: f64 = rng.random_range(0.05..0.9);
                    let mut v =
                        profiled(&mut rng, p, cell_depth, top, |r| ratio.powi(r + cell_depth));
                    if kind == SignalKind::MeanZeroGeometric {
                        v[0] = Complex64::new(0.0, 0.0);
                    } else {
                        v[0] = random_unit(&mut rng);
                    }
                    v
                }
                SignalKind::PolynomialProfile | SignalKind::MeanZeroPolynomial => {
                    let decay: f64 = rng.random_range(0.5..4.0);
                    let mut v = profiled(&mut rng, p, cell_depth, top, |r| {
                        ((r + cell_depth + 2) as f64).powf(-decay)
                    });
                    if kind == SignalKind::MeanZeroPolynomial {
                        v[0] = Complex64::new(0.0, 0.0);
                    } else {
                        v[0] = random_unit(&mut rng);
                    }
                    v
                }
            };
            CorpusSignal {
                id: format!("{}-{:03}", kind.tag(), i),
                kind,
                spectrum: Spectrum::new(p, cell_depth, top, values).expect("corpus window"),
            }
        })
        .collect()
}

/// Random dense spectra on an arbitrary window, for identity checks.
pub fn random_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    p: u32,
    cell_depth: i32,
    top: i32,
) -> Spectrum {
    let size = ipow(p, (cell_depth + top) as u32);
    Spectrum::new(
        p,
        cell_depth,
        top,
        (0..size).map(|_| random_unit(rng)).collect(),
    )
    .expect("caller-sized window")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::step::ring_energy;

    #[test]
    fn corpus_is_reproducible() {
        let params = Params::new(3, 1, 1).unwrap();
        let a = generate_corpus(&params, 7, 10);
        let b = generate_corpus(&params, 7, 10);
        assert_eq!(a, b);
        assert_ne!(a, generate_corpus(&params, 8, 10));
        assert_eq!(a[0].spectrum.cell_depth(), 2);
        assert_eq!(a[0].spectrum.support_level(), 3);
    }

    #[test]
    fn profiles_hit_their_ring_energies() {
        let params = Params::new(2, 1, 1).unwrap();
        let corpus = generate_corpus(&params, 3, 5);
        let geo = &corpus[1].spectrum;
        let e0 = ring_energy(geo, -2);
        let e1 = ring_energy(geo, -1);
        let e2 = ring_energy(geo, 0);
        assert!((e1 / e0 - e2 / e1).abs() < 1e-12);
        assert_eq!(corpus[3].spectrum.values()[0], Complex64::new(0.0, 0.0));
    }
}
