//! Parametric estimation consistency with the scalar estimate module and
//! band construction sanity.

mod common;

use singmc::estimate::{estimate_volterra, EstimatorConfig, Integrand};
use singmc::oracle::{quad_volterra, QuadScheme, QuadSpec};
use singmc::parametric::{estimate_parametric, ParamConfig, ParametricIntegrand, ThetaGrid};
use singmc::rng::RngStream;
use singmc::specfun::AlphaVector;

#[test]
fn covariance_diagonal_matches_scalar_estimates_on_the_same_samples() {
    // Same seed and stream => the scalar estimator consumes the identical
    // kappa sequence, so the parametric covariance diagonal must equal its
    // centered second moment to float precision.
    let alpha = AlphaVector::new(vec![0.5, 0.5]).unwrap();
    let grid = ThetaGrid::linspace(0.0, 1.0, 5).unwrap();
    let zfam = ParametricIntegrand::new(2, 1, |s: &[f64], t: &[f64]| {
        (-t[0] * (s[0] + s[1])).exp()
    });
    let n = 50_000u64;
    let pcfg = ParamConfig::new(n, 0.95, 1000).unwrap();
    let band = {
        let mut rng = RngStream::new(616, 4);
        estimate_parametric(&zfam, &alpha, &grid, &pcfg, &mut rng).unwrap()
    };
    for (j, theta) in grid.points().iter().enumerate() {
        let t = theta[0];
        let z = Integrand::new(2, move |s: &[f64]| (-t * (s[0] + s[1])).exp());
        let mut rng = RngStream::new(616, 4);
        let rep =
            estimate_volterra(&z, &alpha, &EstimatorConfig::new(n, 0.95).unwrap(), &mut rng)
                .unwrap();
        let centered = rep.second_moment - rep.estimate * rep.estimate;
        let diag = band.covariance[j][j];
        assert!(
            (diag - centered).abs() <= 1e-10 * centered.abs().max(1e-300),
            "theta = {t}: diagonal {diag} vs centered moment {centered}"
        );
        assert!(
            (band.q_hat[j] - rep.estimate).abs() <= 1e-12 * rep.estimate.abs(),
            "q_hat mismatch at theta = {t}"
        );
    }
}

#[test]
fn band_contains_the_oracle_curve_for_a_fixed_seed() {
    let alpha = AlphaVector::new(vec![0.5, 0.5]).unwrap();
    let grid = ThetaGrid::linspace(0.0, 1.0, 11).unwrap();
    let zfam = ParametricIntegrand::new(2, 1, |s: &[f64], t: &[f64]| {
        (-t[0] * (s[0] + s[1])).exp()
    });
    let cfg = ParamConfig::new(10_000, 0.95, 10_000).unwrap();
    let mut rng = RngStream::new(2024, 0);
    let band = estimate_parametric(&zfam, &alpha, &grid, &cfg, &mut rng).unwrap();
    assert!(band.band_halfwidth > 0.0);
    // band_halfwidth = sup_quantile / sqrt(N) by construction
    let want = band.sup_quantile / (band.n_samples as f64).sqrt();
    assert_eq!(band.band_halfwidth, want);

    let spec = QuadSpec::new(32, QuadScheme::GaussJacobi).unwrap();
    for (j, theta) in grid.points().iter().enumerate() {
        let t = theta[0];
        let z = Integrand::new(2, move |s: &[f64]| (-t * (s[0] + s[1])).exp());
        let truth = quad_volterra(&z, &alpha, &spec).unwrap();
        assert!(
            (band.q_hat[j] - truth).abs() <= band.band_halfwidth,
            "oracle curve escapes the band at theta = {t} (seed-pinned check)"
        );
    }
}

#[test]
fn curve_matches_the_oracle_pointwise() {
    // exp(-theta*(s1+s2)) at alpha=(1/2,1/2): every grid estimate within
    // 4 sigma of the quadrature value
    let alpha = AlphaVector::new(vec![0.5, 0.5]).unwrap();
    let grid = ThetaGrid::linspace(0.0, 1.0, 11).unwrap();
    let zfam = ParametricIntegrand::new(2, 1, |s: &[f64], t: &[f64]| {
        (-t[0] * (s[0] + s[1])).exp()
    });
    let cfg = ParamConfig::new(100_000, 0.95, 1000).unwrap();
    let mut rng = RngStream::new(414, 0);
    let band = estimate_parametric(&zfam, &alpha, &grid, &cfg, &mut rng).unwrap();
    let spec = QuadSpec::new(32, QuadScheme::GaussJacobi).unwrap();
    for (j, theta) in grid.points().iter().enumerate() {
        let t = theta[0];
        let z = Integrand::new(2, move |s: &[f64]| (-t * (s[0] + s[1])).exp());
        let truth = quad_volterra(&z, &alpha, &spec).unwrap();
        let se = (band.covariance[j][j] / band.n_samples as f64).sqrt();
        // absolute floor: at theta = 0 the integrand is constant, se = 0,
        // and the two routes to pi differ only in float rounding
        let tol = 4.0 * se + 1e-12 * truth.abs();
        assert!(
            (band.q_hat[j] - truth).abs() <= tol,
            "theta = {t}: {} vs oracle {truth} (se {se})",
            band.q_hat[j]
        );
    }
}

#[test]
fn workers_split_the_common_sample_set_deterministically() {
    let alpha = AlphaVector::new(vec![0.25, 0.75]).unwrap();
    let grid = ThetaGrid::linspace(0.5, 1.5, 3).unwrap();
    let zfam =
        ParametricIntegrand::new(2, 1, |s: &[f64], t: &[f64]| (s[0] + s[1]).powf(t[0]));
    let cfg = ParamConfig::new(20_000, 0.9, 2000).unwrap();
    let mut single = RngStream::new(5150, 0);
    let one = estimate_parametric(&zfam, &alpha, &grid, &cfg, &mut single).unwrap();
    let cfg4 = cfg.clone().with_workers(4).unwrap();
    let a = estimate_parametric(&zfam, &alpha, &grid, &cfg4, &mut RngStream::new(5150, 0)).unwrap();
    let b = estimate_parametric(&zfam, &alpha, &grid, &cfg4, &mut RngStream::new(5150, 0)).unwrap();
    assert_eq!(a, b, "fixed worker count must be bit-reproducible");
    for j in 0..grid.len() {
        let se = (one.covariance[j][j] / one.n_samples as f64).sqrt();
        assert!(
            (a.q_hat[j] - one.q_hat[j]).abs() <= 4.0 * se,
            "worker-split estimate drifted at grid point {j}"
        );
    }
}
