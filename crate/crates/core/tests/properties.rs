mod common;

use std::f64::consts::PI;

use common::*;
use danco::angle_model::{fit_vm, kl_vonmises, vm_pdf, wrap_angle, VonMisesParams, DEFAULT_TAU_CAP};
use danco::calibration::{build_calibration, load_calibration, save_calibration, reference_entry};
use danco::estimators::{estimate_danco, EstimateResult};
use danco::neighbors::{build_index_with, pairwise_angles, rho_statistics, SearchStrategy, DEFAULT_DEGENERATE_EPS};
use danco::{build_calibration as build, DataMatrix};
use proptest::prelude::*;
use rand::Rng;

fn assert_matches_brute(data: &DataMatrix, k: usize) {
    let oracle = brute_knn(data, k + 1);
    for strategy in [SearchStrategy::Auto, SearchStrategy::KdTree, SearchStrategy::BruteForce] {
        let index = build_index_with(data, k, strategy).unwrap();
        for (i, expected) in oracle.iter().enumerate() {
            let ids: Vec<usize> = expected.iter().map(|e| e.0).collect();
            let dists: Vec<f64> = expected.iter().map(|e| e.1.sqrt()).collect();
            assert_eq!(index.neighbor_ids(i), &ids[..], "{strategy:?} point {i}");
            assert_eq!(index.distances(i), &dists[..], "{strategy:?} point {i}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn knn_equals_brute_force(n in 3usize..=500, dim in 1usize..=20, k_frac in 0.0f64..1.0, seed: u64) {
        let k = 1 + ((n - 3) as f64 * k_frac * k_frac) as usize;
        let data = gaussian_matrix(n, dim, &mut rng(seed));
        assert_matches_brute(&data, k);
    }

    #[test]
    fn knn_equals_brute_force_with_ties(n in 4usize..=300, dim in 1usize..=4, seed: u64) {
        // integer lattice points: many equal distances and duplicates
        let mut r = rng(seed);
        let values: Vec<f64> = (0..n * dim).map(|_| r.random_range(0..4) as f64).collect();
        let data = DataMatrix::new(values, n, dim).unwrap();
        let k = (n - 2).min(12);
        if build_index_with(&data, k, SearchStrategy::BruteForce).is_ok() {
            assert_matches_brute(&data, k);
        }
    }

    #[test]
    fn rho_and_angles_are_similarity_invariant(
        dim in 2usize..=8,
        scale in 0.01f64..100.0,
        seed: u64,
    ) {
        let mut r = rng(seed);
        let data = gaussian_matrix(120, dim, &mut r);
        let rot = random_rotation(dim, &mut r);
        let shift: Vec<f64> = (0..dim).map(|_| r.random_range(-50.0..50.0)).collect();
        let moved = rigid_motion(&data, &rot, scale, &shift);

        let k = 8;
        let a = build_index_with(&data, k, SearchStrategy::BruteForce).unwrap();
        let b = build_index_with(&moved, k, SearchStrategy::BruteForce).unwrap();
        let ra = rho_statistics(&a).unwrap();
        let rb = rho_statistics(&b).unwrap();
        for i in 0..data.n_points() {
            // skip neighborhoods whose order could flip under rounding
            let d = a.distances(i);
            if d.windows(2).any(|w| (w[1] - w[0]) < 1e-9 * w[1]) {
                continue;
            }
            prop_assert!((ra[i] - rb[i]).abs() < 1e-9);
            let ta = pairwise_angles(&data, &a, i, DEFAULT_DEGENERATE_EPS).unwrap().angles;
            let tb = pairwise_angles(&moved, &b, i, DEFAULT_DEGENERATE_EPS).unwrap().angles;
            for (x, y) in ta.iter().zip(&tb) {
                prop_assert!((x - y).abs() < 1e-6, "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn vm_fit_is_rotation_equivariant(shift in -PI..PI, seed: u64) {
        let mut r = rng(seed);
        let sample = sample_vonmises(0.7, 4.0, 500, &mut r);
        let rotated: Vec<f64> = sample.iter().map(|t| wrap_angle(t + shift)).collect();
        let a = fit_vm(&sample, DEFAULT_TAU_CAP).unwrap();
        let b = fit_vm(&rotated, DEFAULT_TAU_CAP).unwrap();
        prop_assert!(wrap_angle(b.params.nu - a.params.nu - shift).abs() < 1e-9);
        prop_assert!((a.params.tau - b.params.tau).abs() < 1e-9 * a.params.tau.max(1.0));
        prop_assert!((a.eta - b.eta).abs() < 1e-12);
    }

    #[test]
    fn vm_divergence_is_rotation_invariant(
        nu1 in -PI..PI, nu2 in -PI..PI, tau1 in 0.0f64..50.0, tau2 in 0.0f64..50.0, shift in -PI..PI,
    ) {
        let p = |nu: f64, tau: f64| VonMisesParams::new(nu, tau).unwrap();
        let a = kl_vonmises(p(nu1, tau1), p(nu2, tau2)).unwrap();
        let b = kl_vonmises(p(nu1 + shift, tau1), p(nu2 + shift, tau2)).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }
}

#[test]
fn knn_exhaustive_small_sizes() {
    for n in 3..=40 {
        for dim in [1, 2, 3, 16] {
            let data = gaussian_matrix(n, dim, &mut rng((n * 31 + dim) as u64));
            for k in 1..=n - 2 {
                assert_matches_brute(&data, k);
            }
        }
    }
}

#[test]
fn vm_pdf_normalizes() {
    for tau in [0.0, 0.5, 1.0, 5.0, 20.0, 100.0] {
        for nu in [0.0, 1.0, -2.5] {
            let params = VonMisesParams::new(nu, tau).unwrap();
            let total = periodic_trapezoid(|t| vm_pdf(t, params).unwrap(), 1e-14);
            assert!((total - 1.0).abs() < 1e-10, "tau {tau}: {total}");
        }
    }
}

#[test]
fn calibration_is_bitwise_deterministic() {
    let a = build_calibration(6, 400, 10, 2, 99).unwrap();
    let b = build_calibration(6, 400, 10, 2, 99).unwrap();
    assert_eq!(a, b);
    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| build_calibration(6, 400, 10, 2, 99).unwrap());
        assert_eq!(a, c);
    }
    assert_ne!(a, build_calibration(6, 400, 10, 2, 100).unwrap());
}

#[test]
fn calibration_entries_are_independent_streams() {
    // an entry depends only on (d, seed, repetition), not on the table size
    let small = build(4, 300, 10, 1, 5).unwrap();
    let large = build(9, 300, 10, 1, 5).unwrap();
    assert_eq!(small.entries[..], large.entries[..4]);
    let e = reference_entry(3, 300, 10, 5, 0).unwrap();
    assert_eq!(e, small.entries[2]);
    assert_ne!(reference_entry(3, 300, 10, 5, 1).unwrap(), e);
}

#[test]
fn calibration_cache_round_trips_bitwise() {
    let table = build_calibration(7, 300, 10, 1, 2024).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cal.txt");
    save_calibration(&table, &path).unwrap();
    let back = load_calibration(&path).unwrap();
    assert_eq!(back, table);
    for (x, y) in back.entries.iter().zip(&table.entries) {
        assert_eq!(x.d_check_ml.to_bits(), y.d_check_ml.to_bits());
        assert_eq!(x.mu_nu.to_bits(), y.mu_nu.to_bits());
        assert_eq!(x.mu_tau.to_bits(), y.mu_tau.to_bits());
    }
}

fn danco_on(data: &DataMatrix, calib: &danco::CalibrationTable) -> EstimateResult {
    estimate_danco(data, 10, 8, calib).unwrap()
}

#[test]
fn danco_is_similarity_invariant() {
    let mut r = rng(77);
    let data = ball_matrix(600, 6, &mut r);
    let calib = build_calibration(8, 600, 10, 1, 3).unwrap();
    let base = danco_on(&data, &calib);
    let rot = random_rotation(6, &mut r);
    let moved = rigid_motion(&data, &rot, 3.7, &[1.0, -2.0, 0.5, 10.0, 0.0, -4.0]);
    assert_eq!(danco_on(&moved, &calib).d_hat, base.d_hat);
    let profile = base.kl_profile.as_ref().unwrap();
    assert!(profile.iter().all(|t| t.kl_norm >= 0.0 && t.kl_vm >= 0.0));
    assert!(profile.iter().all(|t| (t.total - (t.kl_norm + t.kl_vm)).abs() < 1e-12));
    let best = profile.iter().map(|t| t.total).fold(f64::INFINITY, f64::min);
    assert_eq!(profile[base.d_hat as usize - 1].total, best);
}

#[test]
fn norm_only_mode_drops_the_angle_term() {
    use danco::estimators::danco::estimate_danco_with;
    use danco::estimators::DancoOptions;
    let data = ball_matrix(800, 4, &mut rng(12));
    let calib = build_calibration(8, 800, 10, 1, 1).unwrap();
    let opts = DancoOptions {
        angle_term: false,
        ..DancoOptions::default()
    };
    let r = estimate_danco_with(&data, 10, 8, &calib, &opts).unwrap();
    let profile = r.kl_profile.unwrap();
    assert!(profile.iter().all(|t| t.kl_vm == 0.0 && t.total == t.kl_norm));
    // the norm-only divergence is unimodal around the estimate on d-ball data
    let best = r.d_hat as usize;
    for w in profile[..best].windows(2) {
        assert!(w[0].total >= w[1].total);
    }
    for w in profile[best - 1..].windows(2) {
        assert!(w[0].total <= w[1].total);
    }
    assert!((3..=5).contains(&best), "{best}");
}
