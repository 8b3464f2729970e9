#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use padic_frames::group::{digits_of, ipow};
use padic_frames::step::{Spectrum, StepSignal};

/// `Π (r_j, g_k)^{d_j a_k}` with every factor evaluated as its own complex
/// exponential, for digits given as `(level, digit)` pairs.
pub fn rademacher_product(p: u32, chi: &[(i32, u32)], x: &[(i32, u32)]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for &(j, d) in chi {
        for &(k, a) in x {
            let e = j - k + 1;
            if e >= 1 && d * a != 0 {
                let angle = 2.0 * PI / (p as f64).powi(e);
                acc *= Complex64::from_polar(1.0, angle * (d * a) as f64);
            }
        }
    }
    acc
}

pub fn levels(word: u64, len: usize, lowest: i32, p: u32) -> Vec<(i32, u32)> {
    digits_of(word, len, p)
        .into_iter()
        .enumerate()
        .map(|(i, d)| (lowest + i as i32, d))
        .collect()
}

/// `∫ f(x) conj((χ, x)) dμ(x)` summed cell by cell with [`rademacher_product`].
pub fn fourier_oracle(f: &StepSignal) -> Vec<Complex64> {
    let p = f.p();
    let (j, k) = (f.support_depth(), f.constancy_depth());
    let len = (j + k) as usize;
    let cell = (p as f64).powi(-k);
    (0..ipow(p, len as u32))
        .map(|u| {
            let chi = levels(u as u64, len, -j, p);
            f.values()
                .iter()
                .enumerate()
                .map(|(w, v)| v * rademacher_product(p, &chi, &levels(w as u64, len, -j, p)).conj())
                .sum::<Complex64>()
                * cell
        })
        .collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn spectrum_diff(a: &Spectrum, b: &Spectrum) -> f64 {
    assert_eq!((a.cell_depth(), a.support_level()), (b.cell_depth(), b.support_level()));
    max_diff(a.values(), b.values())
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

use padic_frames::frame::{build_frame, FrameSystem, Strategy, DEFAULT_SEARCH_BUDGET};
use padic_frames::group::Params;
use padic_frames::mask::{
    enumerate_zero_sets, random_zero_set, solve_mask, synthesize_phi_hat, MaskTree, ZeroSetFilter,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Up to `enumerated` enumerated zero sets followed by `random` seeded ones.
pub fn sample_trees(params: Params, enumerated: usize, random: usize, seed: u64) -> Vec<MaskTree> {
    let mut trees = enumerate_zero_sets(params, enumerated, ZeroSetFilter::Any);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    trees.extend((0..random).map(|_| random_zero_set(params, &mut rng)));
    trees
}

/// Frames from every accepted tree for which either search strategy finds a
/// tiling; both are kept when they differ.
pub fn frames_from(trees: &[MaskTree]) -> Vec<FrameSystem> {
    let mut out = Vec::new();
    for tree in trees {
        let Ok(sol) = solve_mask(tree) else { continue };
        let phi_hat = synthesize_phi_hat(&sol).expect("accepted masks annihilate every leaf");
        let greedy = build_frame(sol.clone(), phi_hat.clone(), Strategy::Greedy, DEFAULT_SEARCH_BUDGET);
        let exhaustive = build_frame(sol, phi_hat, Strategy::Exhaustive, DEFAULT_SEARCH_BUDGET);
        match (greedy, exhaustive) {
            (Ok(a), Ok(b)) if a == b => out.push(a),
            (a, b) => out.extend(a.into_iter().chain(b)),
        }
    }
    out
}

pub fn haar_frame(p: u32) -> FrameSystem {
    let params = Params::new(p, 0, 0).unwrap();
    frames_from(&[MaskTree::new(params, 1..p as usize).unwrap()]).remove(0)
}
