//! Shared statistical test helpers: Kolmogorov–Smirnov machinery and a
//! quadrature-based beta CDF oracle (independent of the samplers under
//! test).
#![allow(dead_code)] // each integration test binary uses a different subset

use singmc::oracle::gauss_jacobi_rule;
use singmc::specfun::log_gamma;

/// Critical coefficient of the Kolmogorov distribution at level 0.01:
/// reject when D > KS_COEFF_01 / sqrt(N) (one-sample) or
/// D > KS_COEFF_01 * sqrt((n+m)/(nm)) (two-sample).
pub const KS_COEFF_01: f64 = 1.63;

/// One-sample KS statistic sup |F_N(x) - F(x)| against a reference CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("samples must not be NaN"));
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// One-sample KS test at level 0.01.
pub fn ks_passes(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> bool {
    let n = samples.len() as f64;
    ks_statistic(samples, cdf) <= KS_COEFF_01 / n.sqrt()
}

/// Two-sample KS statistic sup |F_a(x) - F_b(x)|.
pub fn ks_two_sample_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).expect("samples must not be NaN"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("samples must not be NaN"));
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na && j < nb {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = i as f64 / na as f64;
        let fb = j as f64 / nb as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Two-sample KS test at level 0.01.
pub fn ks_two_sample_passes(a: &mut [f64], b: &mut [f64]) -> bool {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let threshold = KS_COEFF_01 * ((na + nb) / (na * nb)).sqrt();
    ks_two_sample_statistic(a, b) <= threshold
}

/// Regularized incomplete beta I_x(a, b) by singularity-absorbing
/// quadrature; independent of the sampling code paths.
pub fn beta_cdf_oracle(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x > 0.5 {
        return 1.0 - beta_cdf_oracle(b, a, 1.0 - x);
    }
    // int_0^x t^{a-1}(1-t)^{b-1} dt = x^a * int_0^1 tau^{a-1} (1-x*tau)^{b-1} dtau
    let (nodes, weights) = gauss_jacobi_rule::<f64>(64, 0.0, a - 1.0).unwrap();
    let mut acc = 0.0;
    for (&xi, &wi) in nodes.iter().zip(&weights) {
        let tau = 0.5 * (xi + 1.0);
        acc += wi * (1.0 - x * tau).powf(b - 1.0);
    }
    acc *= 2.0f64.powf(-a) * x.powf(a);
    let ln_beta = log_gamma(a).unwrap() + log_gamma(b).unwrap() - log_gamma(a + b).unwrap();
    acc / ln_beta.exp()
}

/// Pearson correlation of two equal-length samples.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}
