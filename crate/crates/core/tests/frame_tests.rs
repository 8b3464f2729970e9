mod common;

use std::collections::BTreeSet;

use common::{frames_from, haar_frame, sample_trees};
use num_complex::Complex64;
use padic_frames::frame::{
    build_frame, build_wavelet_masks, forbidden_cells, search_tiling, validate_frame_spec,
    FrameError, FrameSystem, Strategy, WaveletSupport, DEFAULT_SEARCH_BUDGET,
};
use padic_frames::frame_ops::partition_check;
use padic_frames::group::{ipow, Params};
use padic_frames::mask::{solve_mask, synthesize_phi_hat, MaskTree};

/// Enumerated trees per grid point before falling back to random sampling.
const ENUMERATION_CAP: usize = 3000;
const RANDOM_TREES: usize = 200;

/// Cell-set oracle for the ring tiling, independent of the validator.
fn ring_tiled_once(fs: &FrameSystem) -> bool {
    let (p, n, m) = (fs.p(), fs.support_depth(), fs.constancy_depth());
    let mut seen = BTreeSet::new();
    for w in &fs.wavelets {
        for u in w.support.dilate_cells(p, n) {
            if !seen.insert(u) {
                return false;
            }
        }
    }
    seen.into_iter().eq(ipow(p, m + n)..ipow(p, m + n + 1))
}

#[test]
fn every_found_tiling_validates_and_partitions() {
    let mut frames_checked = 0;
    for p in [2u32, 3] {
        for n in 0..=2 {
            for m in 0..=2 {
                let params = Params::new(p, n, m).unwrap();
                let trees = sample_trees(params, ENUMERATION_CAP, RANDOM_TREES, (p * 100 + n * 10 + m) as u64);
                for fs in frames_from(&trees) {
                    let report = validate_frame_spec(&fs);
                    assert!(report.pass, "{params:?} {:?}: {:?}", fs.mask.zeros, report.failures().collect::<Vec<_>>());
                    assert!(ring_tiled_once(&fs));
                    assert!(fs.wavelets.iter().all(|w| w.support.t <= n && w.support.s <= n));
                    let forbidden: BTreeSet<usize> = forbidden_cells(&fs.phi_hat).into_iter().collect();
                    for w in &fs.wavelets {
                        assert!(w.support.cells(p, n).all(|u| !forbidden.contains(&u)));
                    }
                    let part = partition_check(&fs, 3, m as i32 + 3).unwrap();
                    assert!(part.pass, "{params:?} {:?}: {part:?}", fs.mask.zeros);
                    frames_checked += 1;
                }
            }
        }
    }
    assert!(frames_checked > 100);
}

#[test]
fn haar_frames_have_unit_mask_cells() {
    for p in [2u32, 3, 5] {
        let fs = haar_frame(p);
        assert!(validate_frame_spec(&fs).pass);
        assert_eq!(fs.l, 0);
        assert_eq!(fs.wavelets.len(), p as usize - 1);
        for w in &fs.wavelets {
            assert_eq!(w.mask_cells, vec![Complex64::new(1.0, 0.0)]);
        }
    }
}

#[test]
fn forbidden_cells_come_in_sibling_blocks() {
    let params = Params::new(3, 1, 0).unwrap();
    for tree in sample_trees(params, 100, 0, 0) {
        let sol = solve_mask(&tree).unwrap();
        let phi_hat = synthesize_phi_hat(&sol).unwrap();
        let forbidden: BTreeSet<usize> = forbidden_cells(&phi_hat).into_iter().collect();
        for &u in &forbidden {
            let block = u / 3 * 3;
            assert!((block..block + 3).all(|v| forbidden.contains(&v)));
            assert!(phi_hat.values()[u / 3].norm() <= 1e-12);
        }
    }
}

#[test]
fn strategies_agree_on_existence() {
    for (p, n, m) in [(2u32, 1, 0), (2, 1, 1), (2, 2, 0), (3, 1, 0)] {
        let params = Params::new(p, n, m).unwrap();
        for tree in sample_trees(params, 500, 0, 0) {
            let sol = solve_mask(&tree).unwrap();
            let phi_hat = synthesize_phi_hat(&sol).unwrap();
            let greedy = search_tiling(&phi_hat, Strategy::Greedy, DEFAULT_SEARCH_BUDGET);
            let exhaustive = search_tiling(&phi_hat, Strategy::Exhaustive, DEFAULT_SEARCH_BUDGET);
            // the exhaustive search never misses a tiling the greedy scan finds
            if greedy.is_ok() {
                assert!(exhaustive.is_ok(), "{params:?} {:?}", tree.zeros());
            }
            if let Err(FrameError::NoTiling { forbidden, .. }) = exhaustive {
                assert_eq!(forbidden, forbidden_cells(&phi_hat));
            }
        }
    }
}

#[test]
fn tiny_budget_is_reported() {
    let params = Params::new(3, 2, 0).unwrap();
    let tree = &sample_trees(params, 1, 0, 0)[0];
    let sol = solve_mask(tree).unwrap();
    let phi_hat = synthesize_phi_hat(&sol).unwrap();
    assert!(matches!(
        search_tiling(&phi_hat, Strategy::Exhaustive, 1),
        Err(FrameError::BudgetExceeded { budget: 1 })
    ));
}

#[test]
fn validator_flags_tampered_frames() {
    let fs = haar_frame(3);
    assert_eq!(fs.wavelets.len(), 2);

    let mut missing = fs.clone();
    missing.wavelets.pop();
    let report = validate_frame_spec(&missing);
    assert!(!report.pass);
    assert!(report.failures().any(|c| c.name == "ring_partition"));
    assert!(!partition_check(&missing, 3, 3).unwrap().pass);

    let mut doubled = fs.clone();
    doubled.wavelets.push(fs.wavelets[0].clone());
    assert!(validate_frame_spec(&doubled).failures().any(|c| c.name == "supports_disjoint"));
    assert!(!partition_check(&doubled, 3, 3).unwrap().overcovered.is_empty());

    let mut wrong_l = fs.clone();
    wrong_l.l += 1;
    assert!(validate_frame_spec(&wrong_l).failures().any(|c| c.name == "l_is_max_t"));
}

#[test]
fn inadmissible_supports_are_refused() {
    let fs = haar_frame(2);
    let bad = WaveletSupport { s: 0, t: 3, digits: vec![1] };
    assert!(matches!(
        build_wavelet_masks(&fs.phi_hat, &[bad]),
        Err(FrameError::InadmissibleSupport { .. })
    ));
    let short = WaveletSupport { s: 0, t: 0, digits: vec![] };
    assert!(build_wavelet_masks(&fs.phi_hat, &[short]).is_err());
}

#[test]
fn no_tiling_carries_the_forbidden_map() {
    let params = Params::new(2, 0, 1).unwrap();
    let sol = solve_mask(&MaskTree::new(params, [1]).unwrap()).unwrap();
    let phi_hat = synthesize_phi_hat(&sol).unwrap();
    match build_frame(sol, phi_hat, Strategy::Greedy, DEFAULT_SEARCH_BUDGET) {
        Err(FrameError::NoTiling { forbidden, .. }) => assert_eq!(forbidden, vec![2, 3]),
        other => panic!("expected NoTiling, got {other:?}"),
    }
}
