mod common;

use common::{c, fourier_oracle, max_diff, spectrum_diff};
use num_complex::Complex64;
use padic_frames::group::{char_point_pair, ipow, CharCoset, PointIndex, ShiftIndex};
use padic_frames::step::{
    coset_energy, dilate_signal, dilate_spectrum, fourier, fourier_direct, inverse_fourier,
    inverse_fourier_direct, ring_energy, signal_norm_sq, spectrum_norm_sq, translate,
    translate_point, Spectrum, StepSignal,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_signal(rng: &mut ChaCha8Rng, p: u32, j: i32, k: i32) -> StepSignal {
    let size = ipow(p, (j + k) as u32);
    let values = (0..size)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StepSignal::new(p, j, k, values).unwrap()
}

fn signal_strategy() -> impl Strategy<Value = StepSignal> {
    (prop::sample::select(vec![2u32, 3, 5]), -1i32..3, 0i32..4, any::<u64>())
        .prop_filter("window", |(p, j, k, _)| {
            let len = j + k;
            len >= 0 && ipow(*p, len as u32) <= 2187
        })
        .prop_map(|(p, j, k, seed)| random_signal(&mut ChaCha8Rng::seed_from_u64(seed), p, j, k))
}

#[test]
fn fourier_matches_rademacher_oracle_up_to_p4() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [2u32, 3, 5] {
        for len in 0..=4 {
            for j in 0..=len {
                let f = random_signal(&mut rng, p, j, len - j);
                let spec = fourier(&f);
                assert!(max_diff(spec.values(), &fourier_oracle(&f)) <= 1e-12, "p={p} J={j} K={}", len - j);
            }
        }
    }
}

#[test]
fn flat_spectrum_inverts_to_a_point_mass() {
    let spec = Spectrum::new(2, 0, 2, vec![c(0.25, 0.0); 4]).unwrap();
    let f = inverse_fourier_direct(&spec);
    let mut delta = vec![c(0.0, 0.0); 4];
    delta[0] = c(1.0, 0.0);
    assert!(max_diff(f.values(), &delta) < 1e-15);
    assert!(max_diff(inverse_fourier(&spec).values(), &delta) < 1e-15);
}

#[test]
fn plancherel_on_random_p5_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_signal(&mut rng, 5, 1, 2);
    let direct: f64 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / 25.0;
    let spec = fourier(&f);
    let dual: f64 = spec.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / 5.0;
    assert!((direct - dual).abs() <= 1e-10);
    assert!((signal_norm_sq(&f) - spectrum_norm_sq(&spec)).abs() <= 1e-10);
}

#[test]
fn dilation_constant_against_oracle() {
    // fourier(f(𝒜·)) = p^{-1} · dilate_spectrum(fourier(f), 1)
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for p in [2u32, 3] {
        let f = random_signal(&mut rng, p, 1, 2);
        let g = dilate_signal(&f, 1);
        let lhs = fourier_oracle(&g);
        let rhs: Vec<Complex64> = dilate_spectrum(&fourier(&f), 1)
            .values()
            .iter()
            .map(|v| v / p as f64)
            .collect();
        let lifted = dilate_spectrum(&fourier(&f), 1);
        assert_eq!((lifted.cell_depth(), lifted.support_level()), (0, 3));
        assert!(max_diff(&lhs, &rhs) < 1e-12);
    }
}

#[test]
fn ring_energies_partition_the_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (p, n, m) in [(2u32, 2, 2), (3, 1, 2), (5, 1, 1)] {
        let spec = padic_frames::corpus::random_spectrum(&mut rng, p, n, m);
        let rings: f64 = (-n..m).map(|r| ring_energy(&spec, r)).sum();
        let identity = coset_energy(&spec, &CharCoset::subgroup(-n));
        assert!((rings + identity - spectrum_norm_sq(&spec)).abs() <= 1e-12);
        for u in [0usize, 1, ipow(p, (n + m) as u32) - 1] {
            let single = coset_energy(&spec, &spec.cell(u));
            assert!((single - spec.values()[u].norm_sqr() * (p as f64).powi(-n)).abs() < 1e-14);
        }
        // G_{n+1}^⊥ minus G_n^⊥
        for r in -n..m {
            let outer = coset_energy(&spec, &CharCoset::subgroup(r + 1));
            let inner = coset_energy(&spec, &CharCoset::subgroup(r));
            assert!((ring_energy(&spec, r) - (outer - inner)).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roundtrip_and_plancherel(f in signal_strategy()) {
        let spec = fourier(&f);
        let back = inverse_fourier(&spec);
        prop_assert!(max_diff(back.values(), f.values()) <= 1e-10);
        prop_assert!((signal_norm_sq(&f) - spectrum_norm_sq(&spec)).abs() <= 1e-10);
    }

    #[test]
    fn fast_and_direct_transforms_agree(f in signal_strategy()) {
        prop_assume!(f.values().len() <= 243);
        prop_assert!(spectrum_diff(&fourier(&f), &fourier_direct(&f)) <= 1e-10);
        let spec = fourier(&f);
        prop_assert!(max_diff(inverse_fourier(&spec).values(), inverse_fourier_direct(&spec).values()) <= 1e-10);
    }

    #[test]
    fn translation_modulates_the_spectrum(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3]), depth in 0u32..3, index in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (j, k) = (2, 1);
        let f = random_signal(&mut rng, p, j, k);
        let h = ShiftIndex::new(depth, index % ipow(p, depth) as u64);
        let g = translate(&f, &h).unwrap();
        let x = h.as_point(j, k, p).unwrap();
        let spec_f = fourier(&f);
        let spec_g = fourier(&g);
        for u in 0..spec_f.values().len() {
            let phase = char_point_pair(&spec_f.cell(u), &x, p).unwrap().conj();
            prop_assert!((spec_g.values()[u] - spec_f.values()[u] * phase).norm() <= 1e-10);
        }
        // and the group inverse undoes it
        let size = f.values().len() as u64;
        let back = translate_point(&g, &PointIndex::new((size - x.w) % size, j, k));
        prop_assert_eq!(back, f);
    }

    #[test]
    fn dilations_invert(f in signal_strategy(), n in -3i32..4) {
        prop_assert_eq!(dilate_signal(&dilate_signal(&f, n), -n), f.clone());
        let spec = fourier(&f);
        let d = dilate_spectrum(&spec, n);
        let ratio = spectrum_norm_sq(&d) / spectrum_norm_sq(&spec);
        prop_assume!(spectrum_norm_sq(&spec) > 1e-6);
        prop_assert!((ratio - (f.p() as f64).powi(n)).abs() < 1e-10 * ratio.max(1.0));
    }

    #[test]
    fn refinement_preserves_norm(f in signal_strategy()) {
        prop_assume!(f.values().len() <= 243);
        let r = f.refine(f.support_depth() + 1, f.constancy_depth() + 1).unwrap();
        prop_assert!((signal_norm_sq(&r) - signal_norm_sq(&f)).abs() < 1e-12);
        let spec = fourier(&f);
        let s = spec.refine(spec.cell_depth() + 1, spec.support_level() + 1).unwrap();
        prop_assert!((spectrum_norm_sq(&s) - spectrum_norm_sq(&spec)).abs() < 1e-12);
    }
}
