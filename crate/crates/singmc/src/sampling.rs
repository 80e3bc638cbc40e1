//! Exact random-variate generation for the singular sampling densities.
//!
//! The target laws:
//!
//! * the one-dimensional power law with density `(1-α₁)x^{-α₁}` on (0,1),
//! * the one-dimensional beta law,
//! * the **polygonal beta** law on the ordered simplex, with density
//!   proportional to the Volterra kernel `s₁^{-α₁}∏(sₖ-s_{k-1})^{-αₖ}`,
//! * the **ball beta** law on the unit ball, with density proportional to
//!   `∏|xₖ|^{Aₖ}`,
//! * the uniform law on the ordered simplex (the comparison law the direct
//!   estimator uses).
//!
//! The polygonal beta sampler has two independent exact constructions —
//! the marginal/conditional *chain* recursion and the gamma-increment
//! (Dirichlet) route — selected by [`PolygonalMethod`]. Having both turns
//! distributional correctness into a testable two-sample equivalence.

use crate::error::Error;
use crate::rng::RngStream;
use crate::specfun::{AlphaVector, BallExponents, INTEGRABILITY_MARGIN};
use crate::{cst, FloatScalar};

/// Construction used by [`sample_polygonal_beta`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolygonalMethod {
    /// Backward recursion: draw the last coordinate from its power marginal,
    /// then scale down through conditional beta factors.
    Chain,
    /// Gamma increments: normalize gamma variates with shapes `1-αₖ` (plus a
    /// closing unit shape) and take partial sums.
    Increments,
}

/// Attempts before a degenerate draw (boundary-rounded coordinate) is
/// reported as a numerical failure instead of re-drawn.
const MAX_REDRAWS: u32 = 1000;

fn redraws_exhausted(what: &str) -> Error {
    Error::numerical(format!(
        "{what}: produced boundary-degenerate points {MAX_REDRAWS} times in a row; \
         exponents are too close to the integrability boundary"
    ))
}

// ---------------------------------------------------------------------------
// Sample points
// ---------------------------------------------------------------------------

/// A point of the open ordered simplex `0 < s₁ < s₂ < … < sₙ < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint<T>(Vec<T>);

impl<T: FloatScalar> SimplexPoint<T> {
    /// Validates strict ordering and open-interval membership.
    pub fn new(coords: Vec<T>) -> Result<Self, Error> {
        if !is_strictly_ordered_in_unit(&coords) {
            return Err(Error::domain(format!(
                "coordinates {coords:?} are not strictly ordered inside (0, 1)"
            )));
        }
        Ok(Self(coords))
    }

    pub(crate) fn new_unchecked(coords: Vec<T>) -> Self {
        debug_assert!(is_strictly_ordered_in_unit(&coords));
        Self(coords)
    }

    /// Coordinates `s₁..sₙ` in increasing order.
    pub fn coords(&self) -> &[T] {
        &self.0
    }

    /// Dimension `n`.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

fn is_strictly_ordered_in_unit<T: FloatScalar>(s: &[T]) -> bool {
    if s.is_empty() || !(s[0] > T::zero()) || !(s[s.len() - 1] < T::one()) {
        return false;
    }
    s.windows(2).all(|w| w[0] < w[1])
}

/// A point of the closed unit ball `Σxₖ² ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint<T>(Vec<T>);

impl<T: FloatScalar> BallPoint<T> {
    /// Validates ball membership.
    pub fn new(coords: Vec<T>) -> Result<Self, Error> {
        let norm2 = coords.iter().fold(T::zero(), |acc, &x| acc + x * x);
        if coords.is_empty() || !(norm2 <= T::one()) {
            return Err(Error::domain(format!(
                "coordinates {coords:?} lie outside the unit ball"
            )));
        }
        Ok(Self(coords))
    }

    pub(crate) fn new_unchecked(coords: Vec<T>) -> Self {
        Self(coords)
    }

    /// Coordinates `x₁..xₙ`.
    pub fn coords(&self) -> &[T] {
        &self.0
    }

    /// Dimension `n`.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

// ---------------------------------------------------------------------------
// Inverse CDFs (pure, separately testable)
// ---------------------------------------------------------------------------

/// Inverse CDF of the power law: `F⁻¹(u) = u^{1/(1-α₁)}`.
#[inline]
pub fn power_inv_cdf<T: FloatScalar>(alpha1: T, u: T) -> T {
    u.powf((T::one() - alpha1).recip())
}

/// Inverse CDF of Beta(1/2, 1/2): `F⁻¹(u) = 1/2 + 1/2·sin(π(u - 1/2))`.
///
/// The exact inversion of the arcsine CDF `π⁻¹[arcsin(2x-1) + π/2]`; used as
/// the fast path of [`sample_beta`] for the equal-1/2-shape case.
#[inline]
pub fn arcsine_inv_cdf<T: FloatScalar>(u: T) -> T {
    let half = cst::<T>(0.5);
    half + half * (T::PI() * (u - half)).sin()
}

// ---------------------------------------------------------------------------
// Scalar transforms
// ---------------------------------------------------------------------------

/// Standard normal via Box–Muller (two uniforms per draw, cosine branch).
#[inline]
pub(crate) fn standard_normal<T: FloatScalar>(rng: &mut RngStream) -> T {
    let u1: T = rng.uniform();
    let u2: T = rng.uniform();
    let two = cst::<T>(2.0);
    (-two * u1.ln()).sqrt() * (two * T::PI() * u2).cos()
}

/// Gamma variate with the given shape (unit scale).
///
/// Marsaglia–Tsang squeeze/rejection for shape ≥ 1; shapes below 1 use the
/// boosting identity `G_a = G_{a+1}·U^{1/a}`, which is where the polygonal
/// beta shapes `1-αₖ ∈ (0,1)` live. Shape 1 short-circuits to `-ln U`.
pub(crate) fn sample_gamma<T: FloatScalar>(shape: T, rng: &mut RngStream) -> T {
    debug_assert!(shape > T::zero());
    let one = T::one();
    if shape == one {
        return -rng.uniform::<T>().ln();
    }
    if shape < one {
        let g = sample_gamma(shape + one, rng);
        let u: T = rng.uniform();
        return g * u.powf(shape.recip());
    }
    let third = cst::<T>(1.0 / 3.0);
    let d = shape - third;
    let c = third / d.sqrt();
    loop {
        let x: T = standard_normal(rng);
        let t = one + c * x;
        if t <= T::zero() {
            continue;
        }
        let v = t * t * t;
        let u: T = rng.uniform();
        let x2 = x * x;
        if u < one - cst::<T>(0.0331) * x2 * x2 {
            return d * v;
        }
        if u.ln() < cst::<T>(0.5) * x2 + d * (one - v + v.ln()) {
            return d * v;
        }
    }
}

/// Beta variate as a gamma ratio, with the arcsine fast path at a = b = 1/2.
#[inline]
pub(crate) fn beta_unchecked<T: FloatScalar>(a: T, b: T, rng: &mut RngStream) -> T {
    let half = cst::<T>(0.5);
    if a == half && b == half {
        return arcsine_inv_cdf(rng.uniform());
    }
    let g1 = sample_gamma(a, rng);
    let g2 = sample_gamma(b, rng);
    g1 / (g1 + g2)
}

// ---------------------------------------------------------------------------
// Public samplers
// ---------------------------------------------------------------------------

/// One draw of the power law with density `(1-α₁)x^{-α₁}` on (0, 1).
pub fn sample_power<T: FloatScalar>(alpha1: T, rng: &mut RngStream) -> Result<T, Error> {
    let bound = T::one() - cst::<T>(INTEGRABILITY_MARGIN);
    if !alpha1.is_finite() || alpha1 >= bound {
        return Err(Error::domain(format!(
            "sample_power requires alpha_1 < 1, got {alpha1}"
        )));
    }
    for _ in 0..MAX_REDRAWS {
        let x = power_inv_cdf(alpha1, rng.uniform::<T>());
        if x > T::zero() && x < T::one() {
            return Ok(x);
        }
    }
    Err(redraws_exhausted("sample_power"))
}

/// One draw of Beta(a, b), density ∝ `x^{a-1}(1-x)^{b-1}` on (0, 1).
pub fn sample_beta<T: FloatScalar>(a: T, b: T, rng: &mut RngStream) -> Result<T, Error> {
    if !(a.is_finite() && b.is_finite()) || a <= T::zero() || b <= T::zero() {
        return Err(Error::domain(format!(
            "sample_beta requires positive shapes, got a = {a}, b = {b}"
        )));
    }
    for _ in 0..MAX_REDRAWS {
        let x = beta_unchecked(a, b, rng);
        if x > T::zero() && x < T::one() {
            return Ok(x);
        }
    }
    Err(redraws_exhausted("sample_beta"))
}

fn polygonal_chain<T: FloatScalar>(alpha: &AlphaVector<T>, rng: &mut RngStream) -> Vec<T> {
    let n = alpha.dim();
    let b = alpha.cum_shapes();
    let mut s = vec![T::zero(); n];
    // marginal of the last coordinate is the power law with parameter
    // 1 - b_n, i.e. CDF x^{b_n}
    s[n - 1] = power_inv_cdf(T::one() - b[n - 1], rng.uniform::<T>());
    for k in (0..n - 1).rev() {
        let ratio = beta_unchecked(b[k], alpha.shape(k + 1), rng);
        s[k] = s[k + 1] * ratio;
    }
    s
}

fn polygonal_increments<T: FloatScalar>(alpha: &AlphaVector<T>, rng: &mut RngStream) -> Vec<T> {
    let n = alpha.dim();
    let mut total = sample_gamma(T::one(), rng); // closing unit-shape increment
    let mut prefix = Vec::with_capacity(n);
    let mut acc = T::zero();
    for k in 0..n {
        let g = sample_gamma(alpha.shape(k), rng);
        acc = acc + g;
        prefix.push(acc);
        total = total + g;
    }
    prefix.iter().map(|&p| p / total).collect()
}

/// One draw of the polygonal beta law on the ordered simplex `S(n)`, with
/// density `R_{α,S}(s)/K_{n,S}(α)`.
///
/// Both constructions are exact and realize the same law; coordinates that
/// round onto the boundary (or onto each other) are re-drawn, so the output
/// always satisfies `0 < s₁ < … < sₙ < 1` strictly.
///
/// ```
/// use singmc::{sample_polygonal_beta, AlphaVector, PolygonalMethod, RngStream};
///
/// let alpha = AlphaVector::new(vec![0.5, 0.25, 0.75]).unwrap();
/// let mut rng = RngStream::new(1, 0);
/// let s = sample_polygonal_beta(&alpha, &mut rng, PolygonalMethod::Chain).unwrap();
/// assert!(s.coords().windows(2).all(|w| w[0] < w[1]));
/// ```
pub fn sample_polygonal_beta<T: FloatScalar>(
    alpha: &AlphaVector<T>,
    rng: &mut RngStream,
    method: PolygonalMethod,
) -> Result<SimplexPoint<T>, Error> {
    for _ in 0..MAX_REDRAWS {
        let s = match method {
            PolygonalMethod::Chain => polygonal_chain(alpha, rng),
            PolygonalMethod::Increments => polygonal_increments(alpha, rng),
        };
        if is_strictly_ordered_in_unit(&s) {
            return Ok(SimplexPoint::new_unchecked(s));
        }
    }
    Err(redraws_exhausted("sample_polygonal_beta"))
}

/// One draw of the ball beta law on the unit ball, with density
/// `x^A/K_{n,B}(A)` where `x^A = ∏|xₖ|^{Aₖ}`.
///
/// Construction: `(y₁..yₙ)` Dirichlet-distributed over the open sub-simplex
/// `Σyₖ < 1` with shapes `(Aₖ+1)/2` and closing shape 1, independent uniform
/// signs `εₖ`, and `xₖ = εₖ·√yₖ`.
pub fn sample_ball_beta<T: FloatScalar>(
    a: &BallExponents<T>,
    rng: &mut RngStream,
) -> Result<BallPoint<T>, Error> {
    let n = a.dim();
    let half = cst::<T>(0.5);
    'redraw: for _ in 0..MAX_REDRAWS {
        let mut total = sample_gamma(T::one(), rng);
        let mut gammas = Vec::with_capacity(n);
        for &ak in a.exponents() {
            let g = sample_gamma((ak + T::one()) * half, rng);
            gammas.push(g);
            total = total + g;
        }
        let mut x = Vec::with_capacity(n);
        let mut norm2 = T::zero();
        for g in gammas {
            let y = g / total;
            if !(y > T::zero()) {
                continue 'redraw; // boundary-degenerate: |x_k| = 0
            }
            let xk = rng.sign::<T>() * y.sqrt();
            norm2 = norm2 + y;
            x.push(xk);
        }
        if norm2 < T::one() {
            return Ok(BallPoint::new_unchecked(x));
        }
    }
    Err(redraws_exhausted("sample_ball_beta"))
}

/// One draw of the uniform law on the ordered simplex: `n` independent
/// uniforms sorted ascending, re-drawn on (measure-zero) ties.
pub fn sample_uniform_simplex<T: FloatScalar>(
    n: usize,
    rng: &mut RngStream,
) -> Result<SimplexPoint<T>, Error> {
    if n == 0 {
        return Err(Error::domain("sample_uniform_simplex requires n >= 1"));
    }
    for _ in 0..MAX_REDRAWS {
        let mut s: Vec<T> = (0..n).map(|_| rng.uniform()).collect();
        s.sort_by(|a, b| a.partial_cmp(b).expect("uniform draws are never NaN"));
        if is_strictly_ordered_in_unit(&s) {
            return Ok(SimplexPoint::new_unchecked(s));
        }
    }
    Err(redraws_exhausted("sample_uniform_simplex"))
}
