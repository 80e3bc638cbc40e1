//! Dependent-trial estimation of parametric integrals with a uniform
//! confidence band.
//!
//! For a family `z(s, θ)` over a finite parameter grid, one common set of
//! polygonal beta samples serves every `θ` (the *dependent trial* method),
//! so the estimated curve
//!
//! ```text
//! Q_N(θ) = K_{n,S}(α) · (1/N) Σᵢ z(κᵢ, θ)
//! ```
//!
//! is smooth in `θ` by construction. The fluctuation `√N(Q_N - Q)` converges
//! to a mean-zero Gaussian field `ξ(θ)` whose covariance is estimated from
//! the same samples; the uniform band half-width is the confidence-level
//! quantile of `sup|ξ|`, obtained by simulating the fitted Gaussian vector,
//! divided by `√N`.
//!
//! The band is conditional on the CLT hypothesis for the family; the entropy
//! condition under which it is proved is not checked programmatically. The
//! [`estimate_rho`] diagnostic estimates the pseudo-metric the hypothesis is
//! phrased in, as a grid-fineness aid.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::estimate::{split_counts, KahanSum};
use crate::rng::RngStream;
use crate::sampling::{sample_polygonal_beta, standard_normal, PolygonalMethod, SimplexPoint};
use crate::specfun::{simplex_constant, AlphaVector};
use crate::{cst, FloatScalar};

/// A parametric integrand `z(s, θ)` with fixed point arity and parameter
/// dimension.
pub struct ParametricIntegrand<T> {
    arity: usize,
    theta_dim: usize,
    f: FamilyFn<T>,
}

type FamilyFn<T> = Box<dyn Fn(&[T], &[T]) -> T + Send + Sync>;

impl<T: FloatScalar> ParametricIntegrand<T> {
    pub fn new(
        arity: usize,
        theta_dim: usize,
        f: impl Fn(&[T], &[T]) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            arity,
            theta_dim,
            f: Box::new(f),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn theta_dim(&self) -> usize {
        self.theta_dim
    }

    #[inline]
    pub fn eval(&self, coords: &[T], theta: &[T]) -> T {
        debug_assert_eq!(coords.len(), self.arity);
        debug_assert_eq!(theta.len(), self.theta_dim);
        (self.f)(coords, theta)
    }
}

impl<T> core::fmt::Debug for ParametricIntegrand<T> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ParametricIntegrand")
            .field("arity", &self.arity)
            .field("theta_dim", &self.theta_dim)
            .finish()
    }
}

/// A finite ordered set of parameter points, all distinct, of one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid<T> {
    points: Vec<Vec<T>>,
    dim: usize,
}

impl<T: FloatScalar> ThetaGrid<T> {
    pub fn new(points: Vec<Vec<T>>) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::domain("theta grid must contain at least one point"));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::domain("theta points must have dimension >= 1"));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::domain("theta points must share one dimension"));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::domain("theta points must be finite"));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::domain(format!(
                        "theta grid points {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Self { points, dim })
    }

    /// `count` equally spaced scalar parameters from `start` to `stop`
    /// inclusive.
    pub fn linspace(start: T, stop: T, count: usize) -> Result<Self, Error> {
        Self::cartesian(&[(start, stop, count)])
    }

    /// Cartesian product of per-dimension `(start, stop, count)` axes, in
    /// row-major order (last axis fastest).
    pub fn cartesian(axes: &[(T, T, usize)]) -> Result<Self, Error> {
        if axes.is_empty() {
            return Err(Error::domain("grid needs at least one axis"));
        }
        let mut axis_values: Vec<Vec<T>> = Vec::with_capacity(axes.len());
        for &(start, stop, count) in axes {
            if count == 0 {
                return Err(Error::domain("grid axis count must be >= 1"));
            }
            if count > 1 && start == stop {
                return Err(Error::domain(
                    "grid axis with more than one point needs start != stop",
                ));
            }
            let step = if count > 1 {
                (stop - start) / cst::<T>((count - 1) as f64)
            } else {
                T::zero()
            };
            let mut vals = Vec::with_capacity(count);
            for i in 0..count {
                let v = if i + 1 == count && count > 1 {
                    stop
                } else {
                    start + step * cst::<T>(i as f64)
                };
                vals.push(v);
            }
            axis_values.push(vals);
        }
        let mut points = vec![Vec::new()];
        for axis in &axis_values {
            let mut next = Vec::with_capacity(points.len() * axis.len());
            for p in &points {
                for &v in axis {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
            points = next;
        }
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn point(&self, j: usize) -> &[T] {
        &self.points[j]
    }
}

/// Budget and knobs for [`estimate_parametric`].
#[derive(Debug, Clone)]
pub struct ParamConfig<T> {
    n_samples: u64,
    confidence: T,
    n_gaussian_draws: u64,
    workers: usize,
    method: PolygonalMethod,
}

impl<T: FloatScalar> ParamConfig<T> {
    /// Default number of Gaussian draws for the sup quantile.
    pub const DEFAULT_GAUSSIAN_DRAWS: u64 = 10_000;

    /// Requires `n_samples ≥ 2`, `confidence ∈ (0,1)` and at least 1000
    /// Gaussian draws (the sup quantile is an order statistic; fewer draws
    /// make the band itself too noisy to report).
    pub fn new(n_samples: u64, confidence: T, n_gaussian_draws: u64) -> Result<Self, Error> {
        if n_samples < 2 {
            return Err(Error::domain(format!(
                "n_samples must be at least 2, got {n_samples}"
            )));
        }
        if !confidence.is_finite() || confidence <= T::zero() || confidence >= T::one() {
            return Err(Error::domain(format!(
                "confidence must lie in (0, 1), got {confidence}"
            )));
        }
        if n_gaussian_draws < 1000 {
            return Err(Error::domain(format!(
                "n_gaussian_draws must be at least 1000, got {n_gaussian_draws}"
            )));
        }
        Ok(Self {
            n_samples,
            confidence,
            n_gaussian_draws,
            workers: 1,
            method: PolygonalMethod::Chain,
        })
    }

    pub fn with_workers(mut self, workers: usize) -> Result<Self, Error> {
        if workers == 0 {
            return Err(Error::domain("workers must be at least 1"));
        }
        self.workers = workers;
        Ok(self)
    }

    pub fn with_method(mut self, method: PolygonalMethod) -> Self {
        self.method = method;
        self
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn confidence(&self) -> T {
        self.confidence
    }

    pub fn n_gaussian_draws(&self) -> u64 {
        self.n_gaussian_draws
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

/// Estimated parametric curve, fitted limit covariance, and uniform band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBandReport<T> {
    /// `Q_N(θⱼ)` per grid point.
    pub q_hat: Vec<T>,
    /// Uniform half-width: the band is `q_hat ± band_halfwidth` at every
    /// grid point simultaneously; equals `sup_quantile/√N`.
    pub band_halfwidth: T,
    /// Estimated covariance of the limit field on the grid (m×m, symmetric,
    /// non-negative diagonal).
    pub covariance: Vec<Vec<T>>,
    /// Confidence-level quantile of `sup|ξ|` over the simulated Gaussian
    /// draws.
    pub sup_quantile: T,
    /// Samples in the common (dependent-trial) set.
    pub n_samples: u64,
    /// Gaussian vectors simulated for the sup quantile.
    pub n_gaussian_draws: u64,
    /// Seed of the random stream used.
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// Sampling-phase accumulation (per-theta first and second cross moments)
// ---------------------------------------------------------------------------

struct CrossAccum<T> {
    sum_z: Vec<KahanSum<T>>,
    // upper triangle of sum z_j z_k, packed row-major
    sum_zz: Vec<KahanSum<T>>,
    count: u64,
}

#[inline]
fn tri_index(m: usize, j: usize, k: usize) -> usize {
    debug_assert!(j <= k);
    j * m - j * (j + 1) / 2 + k
}

impl<T: FloatScalar> CrossAccum<T> {
    fn new(m: usize) -> Self {
        Self {
            sum_z: vec![KahanSum::new(); m],
            sum_zz: vec![KahanSum::new(); m * (m + 1) / 2],
            count: 0,
        }
    }

    #[inline]
    fn push(&mut self, values: &[T]) {
        let m = self.sum_z.len();
        for (j, &v) in values.iter().enumerate() {
            self.sum_z[j].add(v);
            for (k, &w) in values.iter().enumerate().skip(j) {
                self.sum_zz[tri_index(m, j, k)].add(v * w);
            }
        }
        self.count += 1;
    }

    fn merge(&mut self, other: &CrossAccum<T>) {
        for (a, b) in self.sum_z.iter_mut().zip(&other.sum_z) {
            a.add(b.value());
        }
        for (a, b) in self.sum_zz.iter_mut().zip(&other.sum_zz) {
            a.add(b.value());
        }
        self.count += other.count;
    }
}

fn accumulate_cross<T: FloatScalar>(
    count: u64,
    zfam: &ParametricIntegrand<T>,
    alpha: &AlphaVector<T>,
    grid: &ThetaGrid<T>,
    method: PolygonalMethod,
    rng: &mut RngStream,
) -> Result<CrossAccum<T>, Error> {
    let m = grid.len();
    let mut acc = CrossAccum::new(m);
    let mut values = vec![T::zero(); m];
    for _ in 0..count {
        let point = sample_polygonal_beta(alpha, rng, method)?;
        for (j, v) in values.iter_mut().enumerate() {
            *v = zfam.eval(point.coords(), grid.point(j));
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    point: point
                        .coords()
                        .iter()
                        .map(|&x| x.to_f64().unwrap_or(f64::NAN))
                        .collect(),
                });
            }
        }
        acc.push(&values);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

/// Dependent-trial estimate of `Q(θ) = ∫ z(s,θ)·R_{α,S}(s) ds` on a grid,
/// with a simultaneous (uniform) confidence band.
///
/// One common κ set serves every grid point; the empirical covariance of
/// `K·z(κ, ·)` on the grid is factorized (with escalating diagonal jitter)
/// and `sup_j|ξ_j|` of the fitted Gaussian vector is simulated
/// `n_gaussian_draws` times; the band half-width is its confidence-level
/// quantile over `√N`.
pub fn estimate_parametric<T: FloatScalar>(
    zfam: &ParametricIntegrand<T>,
    alpha: &AlphaVector<T>,
    grid: &ThetaGrid<T>,
    cfg: &ParamConfig<T>,
    rng: &mut RngStream,
) -> Result<ParamBandReport<T>, Error> {
    if zfam.arity() != alpha.dim() {
        return Err(Error::domain(format!(
            "integrand arity {} does not match exponent dimension {}",
            zfam.arity(),
            alpha.dim()
        )));
    }
    if zfam.theta_dim() != grid.dim() {
        return Err(Error::domain(format!(
            "integrand parameter dimension {} does not match grid dimension {}",
            zfam.theta_dim(),
            grid.dim()
        )));
    }
    let m = grid.len();
    let constant = simplex_constant(alpha);

    // phase 1: common sample set, cross moments
    let acc = if cfg.workers <= 1 {
        accumulate_cross(cfg.n_samples, zfam, alpha, grid, cfg.method, rng)?
    } else {
        let counts = split_counts(cfg.n_samples, cfg.workers);
        let mut streams = rng.split(cfg.workers);
        let method = cfg.method;
        let partials: Vec<Result<CrossAccum<T>, Error>> = std::thread::scope(|scope| {
            let handles: Vec<_> = counts
                .iter()
                .zip(streams.iter_mut())
                .map(|(&count, wrng)| {
                    scope.spawn(move || accumulate_cross(count, zfam, alpha, grid, method, wrng))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("parametric worker panicked"))
                .collect()
        });
        let mut acc = CrossAccum::new(m);
        for partial in partials {
            acc.merge(&partial?);
        }
        acc
    };

    let n = cst::<T>(acc.count as f64);
    let q_hat: Vec<T> = acc.sum_z.iter().map(|s| constant * s.value() / n).collect();
    let k2 = constant * constant;
    let mut covariance = vec![vec![T::zero(); m]; m];
    for j in 0..m {
        for k in j..m {
            let cross = k2 * acc.sum_zz[tri_index(m, j, k)].value() / n;
            let mut c = cross - q_hat[j] * q_hat[k];
            if j == k {
                c = c.max(T::zero());
            }
            covariance[j][k] = c;
            covariance[k][j] = c;
        }
    }

    // phase 2: sup quantile of the fitted Gaussian field
    let sup_quantile = simulate_sup_quantile(
        &covariance,
        cfg.confidence,
        cfg.n_gaussian_draws,
        cfg.n_samples,
        rng,
    )?;
    let band_halfwidth = sup_quantile / n.sqrt();

    Ok(ParamBandReport {
        q_hat,
        band_halfwidth,
        covariance,
        sup_quantile,
        n_samples: acc.count,
        n_gaussian_draws: cfg.n_gaussian_draws,
        seed: rng.seed(),
    })
}

fn simulate_sup_quantile<T: FloatScalar>(
    covariance: &[Vec<T>],
    confidence: T,
    draws: u64,
    n_samples: u64,
    rng: &mut RngStream,
) -> Result<T, Error> {
    let m = covariance.len();
    let trace = (0..m).fold(T::zero(), |acc, j| acc + covariance[j][j]);
    if trace == T::zero() {
        // degenerate field (z constant in theta): sup|xi| == 0
        return Ok(T::zero());
    }
    let base = trace / cst::<T>(m as f64);
    let mut factor = None;
    let mut jitter = cst::<T>(1e-12) * base;
    let cap = cst::<T>(1e-6) * base;
    loop {
        if let Some(l) = cholesky(covariance, jitter) {
            factor = Some(l);
            break;
        }
        jitter = jitter * cst::<T>(10.0);
        if jitter > cap {
            break;
        }
    }
    let factor = factor.ok_or_else(|| {
        Error::numerical(format!(
            "covariance factorization failed even with diagonal jitter; \
             the estimated covariance at n_samples = {n_samples} is too \
             ill-conditioned — increase n_samples"
        ))
    })?;

    let mut sups = Vec::with_capacity(draws as usize);
    let mut g = vec![T::zero(); m];
    for _ in 0..draws {
        for gi in g.iter_mut() {
            *gi = standard_normal(rng);
        }
        let mut sup = T::zero();
        for j in 0..m {
            // xi_j = Σ_{k<=j} L[j][k] g[k]
            let mut xi = T::zero();
            for k in 0..=j {
                xi = xi + factor[j][k] * g[k];
            }
            sup = sup.max(xi.abs());
        }
        sups.push(sup);
    }
    sups.sort_by(|a, b| a.partial_cmp(b).expect("sups are finite"));
    Ok(order_statistic_quantile(&sups, confidence))
}

/// Quantile by order statistic with linear interpolation (R-7 convention).
fn order_statistic_quantile<T: FloatScalar>(sorted: &[T], level: T) -> T {
    let last = sorted.len() - 1;
    let h = level * cst::<T>(last as f64);
    let lo = h.floor();
    let idx = lo.to_f64().unwrap() as usize;
    if idx >= last {
        return sorted[last];
    }
    let frac = h - lo;
    sorted[idx] + frac * (sorted[idx + 1] - sorted[idx])
}

/// Lower-triangular Cholesky factor of `cov + jitter·I`, or None if a pivot
/// fails.
fn cholesky<T: FloatScalar>(cov: &[Vec<T>], jitter: T) -> Option<Vec<Vec<T>>> {
    let m = cov.len();
    let mut l = vec![vec![T::zero(); m]; m];
    for j in 0..m {
        for k in 0..=j {
            let mut s = cov[j][k];
            if j == k {
                s = s + jitter;
            }
            for i in 0..k {
                s = s - l[j][i] * l[k][i];
            }
            if j == k {
                if !(s > T::zero()) {
                    return None;
                }
                l[j][j] = s.sqrt();
            } else {
                l[j][k] = s / l[k][k];
            }
        }
    }
    Some(l)
}

// ---------------------------------------------------------------------------
// Pseudo-metric diagnostic
// ---------------------------------------------------------------------------

/// Empirical pseudo-metric `ρ(θⱼ, θₖ) = sup_s |z(s,θⱼ) - z(s,θₖ)| / Y(s)`
/// with `Y(s) = max over the grid of |z(s,θ)|`, maximized over the probe
/// points.
///
/// A lower bound on the true ρ restricted to the grid; useful as a
/// grid-fineness diagnostic (ρ is bounded by 2). Probe points where
/// `Y(s) = 0` are skipped; if every probe is skipped the estimate is
/// undefined and an error is returned.
pub fn estimate_rho<T: FloatScalar>(
    zfam: &ParametricIntegrand<T>,
    grid: &ThetaGrid<T>,
    probe: &[SimplexPoint<T>],
) -> Result<Vec<Vec<T>>, Error> {
    if probe.is_empty() {
        return Err(Error::domain("estimate_rho needs at least one probe point"));
    }
    if zfam.theta_dim() != grid.dim() {
        return Err(Error::domain(
            "integrand parameter dimension does not match grid dimension",
        ));
    }
    let m = grid.len();
    let mut rho = vec![vec![T::zero(); m]; m];
    let mut used = 0usize;
    let mut values = vec![T::zero(); m];
    for s in probe {
        let mut y = T::zero();
        for (j, v) in values.iter_mut().enumerate() {
            *v = zfam.eval(s.coords(), grid.point(j));
            y = y.max(v.abs());
        }
        if !(y > T::zero()) {
            continue;
        }
        used += 1;
        for j in 0..m {
            for k in j + 1..m {
                let d = (values[j] - values[k]).abs() / y;
                if d > rho[j][k] {
                    rho[j][k] = d;
                    rho[k][j] = d;
                }
            }
        }
    }
    if used == 0 {
        return Err(Error::numerical(
            "estimate_rho: every probe point had Y(s) = 0",
        ));
    }
    Ok(rho)
}
