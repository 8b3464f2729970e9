//! Approximation-order bounds for frame partial sums and their comparison with
//! measured remainders.
//!
//! The norm `|χ|_p = p^e` of a non-identity cell is read off its top digit;
//! the identity cell `G_{-N}^⊥` is split into its rings and integrated as a
//! series.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::FrameSystem;
use crate::frame_ops::remainder_energy;
use crate::group::{fpow, log_p_plus};
use crate::step::{ring_energy, Spectrum};

/// Relative rounding slack for `R ≤ bound` comparisons.
pub const DOMINATION_SLACK: f64 = 1e-12;

/// Rings of the identity cell summed explicitly; the rest is below `p^{-200}`.
const IDENTITY_RINGS: i32 = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("power weight exponent must be at least 1, got {0}")]
    PowerExponent(u32),
    #[error("log weight needs ε > 0, got {0}")]
    LogEpsilon(f64),
    #[error("generic weight must be finite, ≥ 1 and nondecreasing (index {0})")]
    GenericWeight(usize),
    #[error("generic weight has {len} values but index {needed} is needed")]
    WeightHorizon { len: usize, needed: i64 },
}

/// `γ_k` for `k ≥ 0`; `γ_k = 1` for negative `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSpec {
    Generic {
        values: Vec<f64>,
    },
    /// `γ_k = p^{km}`.
    Power {
        m: u32,
    },
    /// `γ_k = (k+1)^{1+ε/2}`.
    Log {
        eps: f64,
    },
}

impl WeightSpec {
    pub fn validate(&self) -> Result<(), ApproxError> {
        match self {
            WeightSpec::Power { m } if *m < 1 => Err(ApproxError::PowerExponent(*m)),
            WeightSpec::Log { eps } if !(eps.is_finite() && *eps > 0.0) => {
                Err(ApproxError::LogEpsilon(*eps))
            }
            WeightSpec::Generic { values } => {
                let mut prev = 1.0;
                for (i, &v) in values.iter().enumerate() {
                    if !v.is_finite() || v < prev {
                        return Err(ApproxError::GenericWeight(i));
                    }
                    prev = v;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn gamma(&self, k: i64, p: u32) -> Result<f64, ApproxError> {
        if k < 0 {
            return Ok(1.0);
        }
        Ok(match self {
            WeightSpec::Power { m } => (p as f64).powf(k as f64 * *m as f64),
            WeightSpec::Log { eps } => ((k + 1) as f64).powf(1.0 + eps / 2.0),
            WeightSpec::Generic { values } => {
                *values.get(k as usize).ok_or(ApproxError::WeightHorizon {
                    len: values.len(),
                    needed: k,
                })?
            }
        })
    }

    /// `Σ_{k ≥ from} 1/γ_k`, and whether the value is a truncated sum.
    pub fn reciprocal_tail(&self, from: i64, p: u32) -> (f64, bool) {
        match self {
            WeightSpec::Power { m } => {
                let pm = fpow(p, *m as i32);
                if from <= 0 {
                    // the k < 0 terms are 1 each
                    let head = (-from) as f64;
                    (head + pm / (pm - 1.0), false)
                } else {
                    ((pm).powf(-(from as f64 - 1.0)) / (pm - 1.0), false)
                }
            }
            WeightSpec::Log { eps } => {
                let head = if from < 0 { (-from) as f64 } else { 0.0 };
                (
                    head + hurwitz_zeta(1.0 + eps / 2.0, (from.max(0) + 1) as f64),
                    false,
                )
            }
            WeightSpec::Generic { values } => {
                let head = if from < 0 { (-from) as f64 } else { 0.0 };
                let body: f64 = values
                    .iter()
                    .skip(from.max(0) as usize)
                    .map(|g| 1.0 / g)
                    .sum();
                (head + body, true)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            WeightSpec::Power { m } => format!("power_m{m}"),
            WeightSpec::Log { eps } => format!("log_eps{eps}"),
            WeightSpec::Generic { values } => format!("generic_{}", values.len()),
        }
    }
}

/// `ζ(s, a) = Σ_{n≥0} (n+a)^{-s}` for `s > 1`, `a > 0`, by Euler–Maclaurin.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    const DIRECT: usize = 24;
    // B_{2k}/(2k)! for k = 1..6
    const BERNOULLI: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let head: f64 = (0..DIRECT).map(|n| (a + n as f64).powf(-s)).sum();
    let x = a + DIRECT as f64;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s(s+1)…(s+2k-2) times x^{-s-2k+1}
    let mut rising = s;
    let mut power = x.powf(-s - 1.0);
    for (k, b) in BERNOULLI.iter().enumerate() {
        tail += b * rising * power;
        let k = k as f64;
        rising *= (s + 2.0 * k + 1.0) * (s + 2.0 * k + 2.0);
        power /= x * x;
    }
    head + tail
}

/// `e` with `|χ|_p = p^e` on a non-identity cell.
pub fn cell_norm_exponent(spec: &Spectrum, u: usize) -> Option<i32> {
    spec.cell_ring(u).map(|r| r + 1)
}

/// `∫ w(e(χ)) |F(χ)|² dν` for a weight depending on `|χ|_p = p^e` only.
pub fn weighted_energy(spec: &Spectrum, weight: impl Fn(i32) -> f64) -> f64 {
    let p = spec.p();
    let cell = spec.cell_measure();
    let identity = spec.values()[0].norm_sqr();
    let top = -spec.cell_depth();
    let mut total = 0.0;
    if identity > 0.0 {
        for k in (top - IDENTITY_RINGS..=top).rev() {
            total += identity * weight(k) * (fpow(p, k) - fpow(p, k - 1));
        }
    }
    for (u, v) in spec.values().iter().enumerate().skip(1) {
        let e = cell_norm_exponent(spec, u).expect("non-identity cell");
        total += weight(e) * v.norm_sqr() * cell;
    }
    total
}

/// `(∫ γ²(χ𝒜^l) |F(χ)|² dν)^{1/2}`; `χ𝒜^l` has norm exponent `e + l`.
pub fn weighted_norm(spec: &Spectrum, weight: &WeightSpec, l: u32) -> Result<f64, ApproxError> {
    weight.validate()?;
    let p = spec.p();
    let needed = spec.support_level() as i64 + l as i64;
    weight.gamma(needed, p)?;
    Ok(weighted_energy(spec, |e| {
        let g = weight
            .gamma(e as i64 + l as i64, p)
            .expect("checked horizon");
        g * g
    })
    .sqrt())
}

/// A bound together with whether the hypothesis `Ñ > N` held.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Bound {
    pub value: f64,
    pub hypothesis_holds: bool,
}

fn leading_constant(fs: &FrameSystem) -> f64 {
    let n = fs.support_depth() as f64;
    let m = fs.constancy_depth() as i32;
    (n + 1.0) * (fs.p() as f64).powf((m as f64 - 1.0) / 2.0)
}

fn hypothesis(fs: &FrameSystem, cutoff: i32) -> bool {
    cutoff > fs.support_depth() as i32
}

/// `(N+1) p^{(M-1)/2} Σ_{n>Ñ} (∫_{G_{n-l+1}^⊥∖G_{n-l}^⊥} |f̂|²)^{1/2}`.
pub fn bound_ring_energies(spec: &Spectrum, fs: &FrameSystem, cutoff: i32) -> Bound {
    let l = fs.l as i32;
    let sum: f64 = ((cutoff + 1)..=(spec.support_level() - 1 + l))
        .map(|n| ring_energy(spec, n - l).sqrt())
        .fold(0.0, |acc, e| acc + e);
    Bound {
        value: leading_constant(fs) * sum,
        hypothesis_holds: hypothesis(fs, cutoff),
    }
}

/// `(N+1) p^{(M-1)/2} ‖γ(·𝒜^l) f̂‖ Σ_{n>Ñ} 1/γ_{n+1}`.
pub fn bound_weighted(
    spec: &Spectrum,
    fs: &FrameSystem,
    cutoff: i32,
    weight: &WeightSpec,
) -> Result<Bound, ApproxError> {
    let norm = weighted_norm(spec, weight, fs.l)?;
    let (tail, _) = weight.reciprocal_tail(cutoff as i64 + 2, spec.p());
    Ok(Bound {
        value: leading_constant(fs) * norm * tail,
        hypothesis_holds: hypothesis(fs, cutoff),
    })
}

/// Sobolev power-weight form:
/// `(N+1) p^{(M-1)/2} / ((p^m − 1) p^{m(Ñ+1)}) · (∫ (1 + |χ|_p^{m+l})² |f̂|² dν)^{1/2}`.
pub fn bound_sobolev_power(
    spec: &Spectrum,
    fs: &FrameSystem,
    cutoff: i32,
    m: u32,
) -> Result<Bound, ApproxError> {
    if m < 1 {
        return Err(ApproxError::PowerExponent(m));
    }
    let p = spec.p();
    let exponent = (m + fs.l) as f64;
    let energy = weighted_energy(spec, |e| {
        let w = 1.0 + (p as f64).powf(e as f64 * exponent);
        w * w
    });
    let pm = fpow(p, m as i32);
    let scale = 1.0 / ((pm - 1.0) * pm.powi(cutoff + 1));
    Ok(Bound {
        value: leading_constant(fs) * scale * energy.sqrt(),
        hypothesis_holds: hypothesis(fs, cutoff),
    })
}

/// Log-weight form:
/// `2(N+1)/(ε(1+Ñ)^{ε/2}) · (∫ (1 + l + log_p^+|χ|_p)^{2+ε} |f̂|² dν)^{1/2}`.
pub fn bound_log_weight(
    spec: &Spectrum,
    fs: &FrameSystem,
    cutoff: i32,
    eps: f64,
) -> Result<Bound, ApproxError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(ApproxError::LogEpsilon(eps));
    }
    let l = fs.l as f64;
    let energy = weighted_energy(spec, |e| (1.0 + l + log_p_plus(e)).powf(2.0 + eps));
    let n = fs.support_depth() as f64;
    let scale = 2.0 * (n + 1.0) / (eps * (1.0 + cutoff as f64).powf(eps / 2.0));
    Ok(Bound {
        value: scale * energy.sqrt(),
        hypothesis_holds: hypothesis(fs, cutoff),
    })
}

/// `measured ≤ bound` up to [`DOMINATION_SLACK`].
pub fn dominated(measured: f64, bound: f64) -> bool {
    measured == 0.0 || measured <= bound * (1.0 + DOMINATION_SLACK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportRow {
    pub signal_id: String,
    pub n_tilde: i32,
    pub r_measured: f64,
    pub bound_ring: f64,
    pub hypothesis_holds: bool,
    /// `(m, bound)` per power weight.
    pub bound_power: Vec<(u32, f64)>,
    /// `(ε, bound)` per log weight.
    pub bound_log: Vec<(f64, f64)>,
    pub pass: bool,
}

/// One row per signal and cutoff: measured remainder against every bound.
pub fn run_report(
    signals: &[(String, Spectrum)],
    fs: &FrameSystem,
    cutoffs: std::ops::RangeInclusive<i32>,
    powers: &[u32],
    epsilons: &[f64],
) -> Result<Vec<ReportRow>, ApproxError> {
    let mut rows = Vec::new();
    for (id, spec) in signals {
        for cutoff in cutoffs.clone() {
            rows.push(report_row(id, spec, fs, cutoff, powers, epsilons)?);
        }
    }
    Ok(rows)
}

pub fn report_row(
    id: &str,
    spec: &Spectrum,
    fs: &FrameSystem,
    cutoff: i32,
    powers: &[u32],
    epsilons: &[f64],
) -> Result<ReportRow, ApproxError> {
    let r = remainder_energy(spec, fs, cutoff);
    let ring = bound_ring_energies(spec, fs, cutoff);
    let bound_power = powers
        .iter()
        .map(|&m| Ok((m, bound_sobolev_power(spec, fs, cutoff, m)?.value)))
        .collect::<Result<Vec<_>, ApproxError>>()?;
    let bound_log = epsilons
        .iter()
        .map(|&eps| Ok((eps, bound_log_weight(spec, fs, cutoff, eps)?.value)))
        .collect::<Result<Vec<_>, ApproxError>>()?;
    let pass = dominated(r, ring.value)
        && bound_power.iter().all(|(_, b)| dominated(r, *b))
        && bound_log.iter().all(|(_, b)| dominated(r, *b));
    Ok(ReportRow {
        signal_id: id.to_string(),
        n_tilde: cutoff,
        r_measured: r,
        bound_ring: ring.value,
        hypothesis_holds: ring.hypothesis_holds,
        bound_power,
        bound_log,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurwitz_matches_direct_sums() {
        // ζ(2, 1) = π²/6
        let z = hurwitz_zeta(2.0, 1.0);
        assert!((z - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
        // ζ(2, 3) = π²/6 − 1 − 1/4
        let z = hurwitz_zeta(2.0, 3.0);
        assert!((z - (std::f64::consts::PI.powi(2) / 6.0 - 1.25)).abs() < 1e-14);
        // ζ(3, 1) = Apéry's constant
        assert!((hurwitz_zeta(3.0, 1.0) - 1.202_056_903_159_594_3).abs() < 1e-14);
    }

    #[test]
    fn power_tail_closed_form() {
        let w = WeightSpec::Power { m: 2 };
        let (tail, truncated) = w.reciprocal_tail(3, 3);
        let direct: f64 = (3..60).map(|k| 1.0 / 9f64.powi(k)).sum();
        assert!(!truncated);
        assert!((tail - direct).abs() < 1e-18);
    }

    #[test]
    fn weight_validation() {
        assert!(WeightSpec::Power { m: 0 }.validate().is_err());
        assert!(WeightSpec::Log { eps: 0.0 }.validate().is_err());
        assert!(WeightSpec::Generic {
            values: vec![1.0, 0.5]
        }
        .validate()
        .is_err());
        assert!(WeightSpec::Generic {
            values: vec![1.0, 2.0, 4.0]
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn unit_weight_gives_the_norm() {
        let spec = Spectrum::new(
            2,
            1,
            1,
            vec![1.0.into(), 2.0.into(), 0.5.into(), 0.0.into()],
        )
        .unwrap();
        let e = weighted_energy(&spec, |_| 1.0);
        assert!((e - crate::step::spectrum_norm_sq(&spec)).abs() < 1e-15);
    }
}
