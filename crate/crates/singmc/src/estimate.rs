//! Importance-sampled Monte Carlo estimators and CLT confidence reporting.
//!
//! The importance estimators draw from the law whose density *is* the
//! normalized singular kernel, so the averaged quantity is `K·z(sample)`
//! with `K` the exact normalization constant:
//!
//! ```text
//! I ≈ K_{n,S}(α) · (1/N) Σᵢ z(κᵢ),     κᵢ ~ polygonal beta
//! J ≈ K_{n,B}(A) · (1/N) Σᵢ z(ζᵢ),     ζᵢ ~ ball beta
//! ```
//!
//! For bounded `z` the summands are bounded, the variance is finite, and the
//! normal-quantile confidence interval is justified by the CLT. The *direct*
//! estimator ([`estimate_direct`]) instead samples the simplex uniformly and
//! keeps the kernel inside the integrand; it is provided for comparison and
//! flags its error bars as unreliable when any `αₖ ≥ 1/2`, where the
//! second moment may be infinite.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::RngStream;
use crate::sampling::{
    sample_ball_beta, sample_polygonal_beta, sample_uniform_simplex, PolygonalMethod, SimplexPoint,
};
use crate::specfun::{ball_constant, simplex_constant, AlphaVector, BallExponents};
use crate::{cst, FloatScalar};

/// A real integrand `z` of fixed arity, evaluated on point coordinates.
///
/// Estimators check the declared arity against the exponent vector's
/// dimension up front, so the closure may index its slice freely.
pub struct Integrand<T> {
    arity: usize,
    f: ScalarFn<T>,
}

type ScalarFn<T> = Box<dyn Fn(&[T]) -> T + Send + Sync>;

impl<T: FloatScalar> Integrand<T> {
    pub fn new(arity: usize, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self {
            arity,
            f: Box::new(f),
        }
    }

    /// The constant integrand `z ≡ value`.
    pub fn constant(arity: usize, value: T) -> Self {
        Self::new(arity, move |_| value)
    }

    /// The constant integrand `z ≡ 1`, whose importance estimate is exactly
    /// the normalization constant with zero variance.
    pub fn one(arity: usize) -> Self {
        Self::constant(arity, T::one())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn eval(&self, coords: &[T]) -> T {
        debug_assert_eq!(coords.len(), self.arity);
        (self.f)(coords)
    }
}

impl<T> core::fmt::Debug for Integrand<T> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Integrand").field("arity", &self.arity).finish()
    }
}

/// What to do when the integrand returns NaN or ±∞ at a sampled point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonFinitePolicy {
    /// Abort the whole estimation, reporting the offending point (default:
    /// silently dropping points biases the estimate).
    #[default]
    Abort,
    /// Skip the point and count it; the count is surfaced as
    /// [`EstimateReport::n_skipped`].
    Skip,
}

/// Sample budget, confidence level and execution knobs shared by the
/// estimators.
#[derive(Debug, Clone)]
pub struct EstimatorConfig<T> {
    n_samples: u64,
    confidence: T,
    workers: usize,
    method: PolygonalMethod,
    non_finite: NonFinitePolicy,
}

impl<T: FloatScalar> EstimatorConfig<T> {
    /// Requires `n_samples ≥ 2` and `confidence ∈ (0, 1)`.
    ///
    /// The CI uses the normal quantile (not Student-t): these estimators are
    /// meant to run at large `N`; below roughly `N = 1000` the stated
    /// coverage becomes approximate.
    pub fn new(n_samples: u64, confidence: T) -> Result<Self, Error> {
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
        Ok(Self {
            n_samples,
            confidence,
            workers: 1,
            method: PolygonalMethod::Chain,
            non_finite: NonFinitePolicy::Abort,
        })
    }

    /// Split the sample budget over `workers` threads (each on its own
    /// derived substream). `workers = 1` is the sequential reference path.
    pub fn with_workers(mut self, workers: usize) -> Result<Self, Error> {
        if workers == 0 {
            return Err(Error::domain("workers must be at least 1"));
        }
        self.workers = workers;
        Ok(self)
    }

    /// Polygonal beta construction used for simplex sampling.
    pub fn with_method(mut self, method: PolygonalMethod) -> Self {
        self.method = method;
        self
    }

    /// Non-finite integrand handling.
    pub fn with_non_finite(mut self, policy: NonFinitePolicy) -> Self {
        self.non_finite = policy;
        self
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn confidence(&self) -> T {
        self.confidence
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn method(&self) -> PolygonalMethod {
        self.method
    }
}

/// Point estimate with CLT error bars and the raw moments behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport<T> {
    /// The Monte Carlo estimate of the integral.
    pub estimate: T,
    /// Standard error: √(centered second moment / N).
    pub std_error: T,
    /// Lower end of the confidence interval.
    pub ci_low: T,
    /// Upper end of the confidence interval.
    pub ci_high: T,
    /// Number of samples that entered the average.
    pub n_samples: u64,
    /// Normalization constant (`K_{n,S}`, `K_{n,B}`, or the domain volume
    /// for the direct estimator).
    pub constant: T,
    /// Empirical `E[(K·z)²]` (uncentered).
    pub second_moment: T,
    /// Seed of the random stream the estimate was computed from.
    pub seed: u64,
    /// Worker threads the sample budget was split over.
    pub n_workers: usize,
    /// Points skipped under [`NonFinitePolicy::Skip`]; absent under the
    /// default abort policy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_skipped: Option<u64>,
}

/// [`EstimateReport`] plus the direct estimator's reliability flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectReport<T> {
    #[serde(flatten)]
    pub report: EstimateReport<T>,
    /// True when some `αₖ ≥ 1/2`: the second moment may be infinite and the
    /// reported `std_error` then has no CLT meaning.
    pub unreliable: bool,
}

// ---------------------------------------------------------------------------
// Accumulation
// ---------------------------------------------------------------------------

/// Kahan-compensated running sum.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KahanSum<T> {
    sum: T,
    comp: T,
}

impl<T: FloatScalar> KahanSum<T> {
    pub(crate) fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, x: T) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> T {
        self.sum
    }
}

/// One-pass (sum, sum of squares, count) triple; partials merge associatively.
#[derive(Debug, Clone)]
struct MomentAccum<T> {
    sum: KahanSum<T>,
    sum_sq: KahanSum<T>,
    count: u64,
    skipped: u64,
}

impl<T: FloatScalar> MomentAccum<T> {
    fn new() -> Self {
        Self {
            sum: KahanSum::new(),
            sum_sq: KahanSum::new(),
            count: 0,
            skipped: 0,
        }
    }

    #[inline]
    fn push(&mut self, value: T) {
        self.sum.add(value);
        self.sum_sq.add(value * value);
        self.count += 1;
    }

    fn merge(&mut self, other: &MomentAccum<T>) {
        self.sum.add(other.sum.value());
        self.sum_sq.add(other.sum_sq.value());
        self.count += other.count;
        self.skipped += other.skipped;
    }
}

/// One summand draw: the sampled point (for diagnostics) and the value that
/// enters the average.
type DrawFn<'a, T> = dyn Fn(&mut RngStream) -> Result<(Vec<T>, T), Error> + Sync + 'a;

fn accumulate<T: FloatScalar>(
    count: u64,
    draw: &DrawFn<'_, T>,
    policy: NonFinitePolicy,
    rng: &mut RngStream,
) -> Result<MomentAccum<T>, Error> {
    let mut acc = MomentAccum::new();
    for _ in 0..count {
        let (point, value) = draw(rng)?;
        if !value.is_finite() {
            match policy {
                NonFinitePolicy::Abort => {
                    return Err(Error::NonFinite {
                        point: point
                            .iter()
                            .map(|&x| x.to_f64().unwrap_or(f64::NAN))
                            .collect(),
                    })
                }
                NonFinitePolicy::Skip => {
                    acc.skipped += 1;
                    continue;
                }
            }
        }
        acc.push(value);
    }
    Ok(acc)
}

pub(crate) fn split_counts(total: u64, workers: usize) -> Vec<u64> {
    let w = workers as u64;
    let base = total / w;
    let rem = total % w;
    (0..w).map(|i| base + u64::from(i < rem)).collect()
}

/// Run the sampling loop, split over workers when configured.
///
/// Worker partials are merged in worker order, so results are bit-identical
/// across runs for a fixed worker count; the single-worker path consumes the
/// caller's stream directly and is the reproducibility anchor.
fn run_sampling<T: FloatScalar>(
    cfg: &EstimatorConfig<T>,
    draw: &DrawFn<'_, T>,
    rng: &mut RngStream,
) -> Result<MomentAccum<T>, Error> {
    if cfg.workers <= 1 {
        return accumulate(cfg.n_samples, draw, cfg.non_finite, rng);
    }
    let counts = split_counts(cfg.n_samples, cfg.workers);
    let mut streams = rng.split(cfg.workers);
    let policy = cfg.non_finite;
    let partials: Vec<Result<MomentAccum<T>, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = counts
            .iter()
            .zip(streams.iter_mut())
            .map(|(&count, wrng)| {
                scope.spawn(move || accumulate(count, draw, policy, wrng))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("estimation worker panicked"))
            .collect()
    });
    let mut acc = MomentAccum::new();
    for partial in partials {
        acc.merge(&partial?);
    }
    Ok(acc)
}

fn build_report<T: FloatScalar>(
    acc: &MomentAccum<T>,
    constant: T,
    cfg: &EstimatorConfig<T>,
    rng_seed: u64,
) -> Result<EstimateReport<T>, Error> {
    if acc.count < 2 {
        return Err(Error::numerical(format!(
            "only {} of {} samples were usable",
            acc.count, cfg.n_samples
        )));
    }
    let n = cst::<T>(acc.count as f64);
    let mean = acc.sum.value() / n;
    let mean_sq = acc.sum_sq.value() / n;
    let estimate = constant * mean;
    let second_moment = constant * constant * mean_sq;
    let centered = (second_moment - estimate * estimate).max(T::zero());
    let std_error = (centered / n).sqrt();
    let one = T::one();
    let q = cst::<T>(normal_quantile(
        ((one + cfg.confidence) * cst::<T>(0.5)).to_f64().unwrap(),
    ));
    Ok(EstimateReport {
        estimate,
        std_error,
        ci_low: estimate - q * std_error,
        ci_high: estimate + q * std_error,
        n_samples: acc.count,
        constant,
        second_moment,
        seed: rng_seed,
        n_workers: cfg.workers,
        n_skipped: match cfg.non_finite {
            NonFinitePolicy::Abort => None,
            NonFinitePolicy::Skip => Some(acc.skipped),
        },
    })
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// The Volterra kernel `R_{α,S}(s) = s₁^{-α₁}·∏ₖ(sₖ-s_{k-1})^{-αₖ}`.
pub fn volterra_kernel<T: FloatScalar>(alpha: &AlphaVector<T>, point: &SimplexPoint<T>) -> T {
    let s = point.coords();
    let a = alpha.exponents();
    let mut r = s[0].powf(-a[0]);
    for k in 1..s.len() {
        r = r * (s[k] - s[k - 1]).powf(-a[k]);
    }
    r
}

fn check_arity<T: FloatScalar>(z: &Integrand<T>, n: usize) -> Result<(), Error> {
    if z.arity() != n {
        return Err(Error::domain(format!(
            "integrand arity {} does not match exponent dimension {n}",
            z.arity()
        )));
    }
    Ok(())
}

/// Importance estimate of the Volterra integral `∫_{S(n)} z(s)·R_{α,S}(s) ds`.
///
/// Draws i.i.d. polygonal beta vectors and averages `K_{n,S}(α)·z(κᵢ)`.
pub fn estimate_volterra<T: FloatScalar>(
    z: &Integrand<T>,
    alpha: &AlphaVector<T>,
    cfg: &EstimatorConfig<T>,
    rng: &mut RngStream,
) -> Result<EstimateReport<T>, Error> {
    check_arity(z, alpha.dim())?;
    let constant = simplex_constant(alpha);
    let method = cfg.method;
    let draw = move |rng: &mut RngStream| -> Result<(Vec<T>, T), Error> {
        let point = sample_polygonal_beta(alpha, rng, method)?;
        let value = z.eval(point.coords());
        Ok((point.into_inner(), value))
    };
    let acc = run_sampling(cfg, &draw, rng)?;
    build_report(&acc, constant, cfg, rng.seed())
}

/// Importance estimate of the ball integral `∫_B z(x)·∏|xₖ|^{Aₖ} dx`.
///
/// Draws i.i.d. ball beta vectors and averages `K_{n,B}(A)·z(ζᵢ)`.
pub fn estimate_ball<T: FloatScalar>(
    z: &Integrand<T>,
    a: &BallExponents<T>,
    cfg: &EstimatorConfig<T>,
    rng: &mut RngStream,
) -> Result<EstimateReport<T>, Error> {
    check_arity(z, a.dim())?;
    let constant = ball_constant(a);
    let draw = move |rng: &mut RngStream| -> Result<(Vec<T>, T), Error> {
        let point = sample_ball_beta(a, rng)?;
        let value = z.eval(point.coords());
        Ok((point.into_inner(), value))
    };
    let acc = run_sampling(cfg, &draw, rng)?;
    build_report(&acc, constant, cfg, rng.seed())
}

/// Direct (uniform-sampling) estimate of the Volterra integral:
/// `Vol(S(n)) · (1/N) Σᵢ z(ηᵢ)·R_{α,S}(ηᵢ)` with `ηᵢ` uniform on the simplex
/// and `Vol(S(n)) = 1/n!`.
///
/// Points where the kernel itself overflows are re-drawn, consistent with
/// the samplers' boundary policy. The result's `unreliable` flag is set when
/// any `αₖ ≥ 1/2`.
pub fn estimate_direct<T: FloatScalar>(
    z: &Integrand<T>,
    alpha: &AlphaVector<T>,
    cfg: &EstimatorConfig<T>,
    rng: &mut RngStream,
) -> Result<DirectReport<T>, Error> {
    let n = alpha.dim();
    check_arity(z, n)?;
    let volume = T::one() / (1..=n).fold(T::one(), |acc, k| acc * cst::<T>(k as f64));
    const KERNEL_REDRAWS: u32 = 1000;
    let draw = move |rng: &mut RngStream| -> Result<(Vec<T>, T), Error> {
        for _ in 0..KERNEL_REDRAWS {
            let point = sample_uniform_simplex(n, rng)?;
            let r = volterra_kernel(alpha, &point);
            if !r.is_finite() {
                continue;
            }
            let value = z.eval(point.coords()) * r;
            return Ok((point.into_inner(), value));
        }
        Err(Error::numerical(
            "direct estimator: kernel overflowed at every re-drawn point",
        ))
    };
    let acc = run_sampling(cfg, &draw, rng)?;
    let report = build_report(&acc, volume, cfg, rng.seed())?;
    let half = cst::<T>(0.5);
    Ok(DirectReport {
        report,
        unreliable: alpha.exponents().iter().any(|&a| a >= half),
    })
}

// ---------------------------------------------------------------------------
// Normal quantile
// ---------------------------------------------------------------------------

/// Inverse standard normal CDF (Wichura's AS 241, double precision).
///
/// Relative accuracy around 1e-15 over (0, 1); used for the CLT confidence
/// intervals.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile requires p in (0, 1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = horner(
            r,
            &[
                3.387_132_872_796_366_608e0,
                1.331_416_678_917_843_774_5e2,
                1.971_590_950_306_551_442_7e3,
                1.373_169_376_550_946_112_5e4,
                4.592_195_393_154_987_145_7e4,
                6.726_577_092_700_870_085_3e4,
                3.343_057_558_358_812_810_5e4,
                2.509_080_928_730_122_672_7e3,
            ],
        );
        let den = horner(
            r,
            &[
                1.0,
                4.231_333_070_160_091_125_2e1,
                6.871_870_074_920_579_083e2,
                5.394_196_021_424_751_107_7e3,
                2.121_379_430_158_659_586_7e4,
                3.930_789_580_009_271_061e4,
                2.872_908_573_572_194_267_4e4,
                5.226_495_278_852_854_561e3,
            ],
        );
        return q * num / den;
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let value = if r <= 5.0 {
        let r = r - 1.6;
        horner(
            r,
            &[
                1.423_437_110_749_683_577_34e0,
                4.630_337_846_156_545_295_9e0,
                5.769_497_221_460_691_405_5e0,
                3.647_848_324_763_204_605_04e0,
                1.270_458_252_452_368_382_58e0,
                2.417_807_251_774_506_117_7e-1,
                2.272_384_498_926_918_458_33e-2,
                7.745_450_142_783_414_076_4e-4,
            ],
        ) / horner(
            r,
            &[
                1.0,
                2.053_191_626_637_758_821_87e0,
                1.676_384_830_183_803_849_4e0,
                6.897_673_349_851_000_045_5e-1,
                1.481_039_764_274_800_745_9e-1,
                1.519_866_656_361_645_719_66e-2,
                5.475_938_084_995_344_946e-4,
                1.050_750_071_644_416_843_24e-9,
            ],
        )
    } else {
        let r = r - 5.0;
        horner(
            r,
            &[
                6.657_904_643_501_103_777_2e0,
                5.463_784_911_164_114_369_9e0,
                1.784_826_539_917_291_335_8e0,
                2.965_605_718_285_048_912_3e-1,
                2.653_218_952_657_612_309_3e-2,
                1.242_660_947_388_078_438_6e-3,
                2.711_555_568_743_487_578_15e-5,
                2.010_334_399_292_288_132_65e-7,
            ],
        ) / horner(
            r,
            &[
                1.0,
                5.998_322_065_558_879_376_9e-1,
                1.369_298_809_227_358_053_1e-1,
                1.487_536_129_085_061_485_25e-2,
                7.868_691_311_456_132_591e-4,
                1.846_318_317_510_054_681_8e-5,
                1.421_511_758_316_445_888_7e-7,
                2.044_263_103_389_939_785_64e-15,
            ],
        )
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

#[inline]
fn horner(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
