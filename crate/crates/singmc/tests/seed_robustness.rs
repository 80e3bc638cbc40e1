//! Seed-robustness harness, ignored by default.
//!
//! The regular statistical tests run on fixed seeds. This harness re-runs
//! the load-bearing ones across many alternative seeds to confirm the
//! margins are not seed luck. Run explicitly:
//!
//! ```sh
//! cargo test -p singmc --test seed_robustness -- --ignored --nocapture
//! ```

mod common;

use common::*;
use singmc::estimate::{estimate_volterra, EstimatorConfig, Integrand};
use singmc::oracle::monomial_integral;
use singmc::rng::RngStream;
use singmc::sampling::{sample_polygonal_beta, PolygonalMethod};
use singmc::specfun::AlphaVector;

#[test]
#[ignore = "slow; re-validates statistical margins across seeds"]
fn chain_increments_equivalence_across_seeds() {
    let n_samples = 50_000usize;
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    let mut total = 0usize;
    for seed in 0..20u64 {
        let mut gen = RngStream::new(seed, 777);
        let n = 2 + (seed % 3) as usize;
        let alpha: Vec<f64> = (0..n).map(|_| gen.next_open01() * 0.95).collect();
        let alpha = AlphaVector::new(alpha).unwrap();
        let mut chain = vec![Vec::new(); n];
        let mut incr = vec![Vec::new(); n];
        let mut r1 = RngStream::new(seed, 1);
        let mut r2 = RngStream::new(seed, 2);
        for _ in 0..n_samples {
            let s = sample_polygonal_beta(&alpha, &mut r1, PolygonalMethod::Chain).unwrap();
            for (k, &c) in s.coords().iter().enumerate() {
                chain[k].push(c);
            }
            let s = sample_polygonal_beta(&alpha, &mut r2, PolygonalMethod::Increments).unwrap();
            for (k, &c) in s.coords().iter().enumerate() {
                incr[k].push(c);
            }
        }
        let threshold = KS_COEFF_01 * (2.0 / n_samples as f64).sqrt();
        for k in 0..n {
            total += 1;
            let d = ks_two_sample_statistic(&mut chain[k], &mut incr[k]);
            worst = worst.max(d / threshold);
            if d > threshold {
                failures += 1;
            }
        }
    }
    println!(
        "equivalence: {total} KS tests over 20 seeds, {failures} failures, \
         worst D/threshold = {worst:.3}"
    );
    // level 0.01 per test: a handful of excursions over 50 tests is the
    // expected false positive count, not a defect
    assert!(failures <= 3, "{failures}/{total} KS failures across seeds");
}

#[test]
#[ignore = "slow; re-validates statistical margins across seeds"]
fn importance_consistency_across_seeds() {
    let mut excursions = 0usize;
    let mut total = 0usize;
    let mut worst = 0.0f64;
    for seed in 100..140u64 {
        let mut gen = RngStream::new(seed, 0);
        let n = 1 + (gen.next_u64() % 3) as usize;
        let alpha: Vec<f64> = (0..n).map(|_| gen.next_open01() * 0.9).collect();
        let alpha = AlphaVector::new(alpha).unwrap();
        let powers: Vec<u32> = (0..n).map(|_| (gen.next_u64() % 3) as u32).collect();
        let want = monomial_integral(&alpha, &powers).unwrap();
        let p = powers.clone();
        let z = Integrand::new(n, move |s: &[f64]| {
            s.iter()
                .zip(&p)
                .map(|(&si, &pi)| si.powi(pi as i32))
                .product()
        });
        let mut rng = RngStream::new(seed, 1);
        let rep = estimate_volterra(
            &z,
            &alpha,
            &EstimatorConfig::new(100_000, 0.95).unwrap(),
            &mut rng,
        )
        .unwrap();
        total += 1;
        if rep.std_error > 0.0 {
            let sigmas = (rep.estimate - want).abs() / rep.std_error;
            worst = worst.max(sigmas);
            if sigmas > 4.0 {
                excursions += 1;
            }
        } else {
            assert!((rep.estimate - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }
    println!("consistency: {total} cases, {excursions} beyond 4 sigma, worst {worst:.2} sigma");
    assert!(excursions <= 2);
}

#[test]
#[ignore = "slow; re-validates statistical margins across seeds"]
fn scaling_ratio_windows_across_seeds() {
    use singmc::estimate::estimate_direct;

    let alpha = AlphaVector::new(vec![0.5, 0.5]).unwrap();
    let cfg = |n: u64| EstimatorConfig::new(n, 0.95).unwrap();
    let mut direct_in_window = 0usize;
    let mut importance_out = 0usize;
    let seeds = 30u64;
    for seed in 0..seeds {
        let median = |f: &dyn Fn(u64, u64) -> f64| {
            let mut v: Vec<f64> = (0..5).map(|k| f(10_000, k) / f(1_000_000, k)).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v[2]
        };
        let direct = median(&|n, k| {
            let mut rng = RngStream::new(seed, 10 + k);
            estimate_direct(&Integrand::one(2), &alpha, &cfg(n), &mut rng)
                .unwrap()
                .report
                .std_error
        });
        let importance = median(&|n, k| {
            let z = Integrand::new(2, |s: &[f64]| s[0] + s[1]);
            let mut rng = RngStream::new(seed, 50 + k);
            estimate_volterra(&z, &alpha, &cfg(n), &mut rng)
                .unwrap()
                .std_error
        });
        if (8.5..=11.5).contains(&direct) {
            direct_in_window += 1;
        }
        if !(8.5..=11.5).contains(&importance) {
            importance_out += 1;
        }
    }
    println!(
        "scaling: over {seeds} seeds, direct passed the window {direct_in_window} times, \
         importance failed it {importance_out} times"
    );
    // the demonstration must separate robustly, not only at the pinned seed
    assert!(direct_in_window <= seeds as usize / 5);
    assert_eq!(importance_out, 0);
}
