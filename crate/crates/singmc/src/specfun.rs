//! Gamma-function normalization constants for the simplex and ball kernels.
//!
//! The kernel `s₁^{-α₁}∏(sₖ-s_{k-1})^{-αₖ}` integrates over the ordered
//! simplex to
//!
//! ```text
//! K_{n,S}(α) = ∏ₖ Γ(1-αₖ) / Γ(1 + Σₖ(1-αₖ)),
//! ```
//!
//! and the monomial `∏|xₖ|^{Aₖ}` integrates over the unit ball to
//!
//! ```text
//! K_{n,B}(A) = ∏ₖ Γ((Aₖ+1)/2) / Γ(D/2 + 1),   D = ΣAₖ + n.
//! ```
//!
//! Both are evaluated in log space so large `n` cannot overflow.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::{cst, FloatScalar};

/// Margin keeping exponents strictly inside the integrable range.
///
/// Γ diverges at 0, so inputs within `1e-9` of the boundary (αₖ = 1 or
/// Aₖ = -1) are rejected instead of producing huge finite constants.
pub const INTEGRABILITY_MARGIN: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Lanczos approximation (g = 7, n = 9), coefficients from Godfrey/Boost.
// ---------------------------------------------------------------------------

const LANCZOS_G: f64 = 7.0;

const LANCZOS_COEFFS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

#[inline]
fn lanczos_sum<T: FloatScalar>(z: T) -> T {
    let mut sum = cst::<T>(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS[1..].iter().enumerate() {
        sum = sum + cst::<T>(c) / (z + cst::<T>((i + 1) as f64));
    }
    sum
}

/// `ln Γ(x)` for positive `x`, without the domain check.
///
/// Lanczos evaluation in log space; the reflection formula covers `x < 0.5`.
/// `x = 1` and `x = 2` return exactly zero.
pub(crate) fn ln_gamma_unchecked<T: FloatScalar>(x: T) -> T {
    let one = T::one();
    let half = cst::<T>(0.5);

    if x == one || x == one + one {
        return T::zero();
    }
    if x < half {
        // ln Γ(x) = ln π − ln sin(πx) − ln Γ(1−x); x ∈ (0, 1/2) keeps sin positive.
        let pi = T::PI();
        return pi.ln() - (pi * x).sin().ln() - ln_gamma_unchecked(one - x);
    }

    let z = x - one;
    let t = z + cst::<T>(LANCZOS_G) + half;
    let ln_sqrt_two_pi = cst::<T>(0.918_938_533_204_672_74); // ln√(2π)
    ln_sqrt_two_pi + (z + half) * t.ln() - t + lanczos_sum(z).ln()
}

/// Natural logarithm of the gamma function for `x > 0`.
///
/// Accuracy on `x ∈ [1e-6, 1e3]`: `|err| ≤ 1e-13 · max(1, |ln Γ(x)|)`. Pure
/// relative accuracy holds away from the zeros of `ln Γ` at `x = 1, 2`, where
/// any fixed-precision evaluation loses relative digits to cancellation.
pub fn log_gamma<T: FloatScalar>(x: T) -> Result<T, Error> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::domain(format!(
            "log_gamma requires finite x > 0, got {x}"
        )));
    }
    Ok(ln_gamma_unchecked(x))
}

// ---------------------------------------------------------------------------
// Exponent vectors
// ---------------------------------------------------------------------------

/// Singularity exponents `α₁..αₙ` of the Volterra kernel.
///
/// Each `αₖ` must satisfy `αₖ < 1 − 1e-9`; the values of interest are
/// `0 ≤ αₖ < 1`, but negative exponents are accepted as a non-singular
/// generalization — the formulas stay valid.
///
/// Stores the derived shapes `βₖ = 1 − αₖ` and cumulative shapes
/// `bₖ = Σ_{j≤k} βⱼ`, which drive both the sampler recursion and the
/// normalization constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector<T> {
    alpha: Vec<T>,
    #[serde(skip)]
    cum_shapes: Vec<T>,
}

impl<T: FloatScalar> AlphaVector<T> {
    /// Validates and builds the exponent vector.
    pub fn new(alpha: Vec<T>) -> Result<Self, Error> {
        if alpha.is_empty() {
            return Err(Error::domain("alpha vector must have dimension n >= 1"));
        }
        let bound = T::one() - cst::<T>(INTEGRABILITY_MARGIN);
        for (k, &a) in alpha.iter().enumerate() {
            if !a.is_finite() || a >= bound {
                return Err(Error::domain(format!(
                    "alpha[{k}] = {a} violates the bound alpha_k < 1 - {INTEGRABILITY_MARGIN:e}"
                )));
            }
        }
        let mut cum_shapes = Vec::with_capacity(alpha.len());
        let mut acc = T::zero();
        for &a in &alpha {
            acc = acc + (T::one() - a);
            cum_shapes.push(acc);
        }
        Ok(Self { alpha, cum_shapes })
    }

    /// Dimension `n`.
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// The raw exponents `α₁..αₙ`.
    pub fn exponents(&self) -> &[T] {
        &self.alpha
    }

    /// Per-coordinate shape `βₖ = 1 − αₖ` (`k` is zero-based).
    pub fn shape(&self, k: usize) -> T {
        T::one() - self.alpha[k]
    }

    /// Cumulative shapes `bₖ = Σ_{j≤k} (1 − αⱼ)` (`k` is zero-based).
    pub fn cum_shapes(&self) -> &[T] {
        &self.cum_shapes
    }
}

/// Monomial exponents `A₁..Aₙ` of the ball kernel, with `D = ΣAₖ + n`.
///
/// Each `Aₖ` must satisfy `Aₖ > −1 + 1e-9` and `D` must be positive; the
/// singular range of interest is `−1 < Aₖ ≤ 0`, positive exponents are
/// accepted as a non-singular generalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallExponents<T> {
    a: Vec<T>,
    d: T,
}

impl<T: FloatScalar> BallExponents<T> {
    /// Validates and builds the exponent vector.
    pub fn new(a: Vec<T>) -> Result<Self, Error> {
        if a.is_empty() {
            return Err(Error::domain("exponent vector must have dimension n >= 1"));
        }
        let bound = -T::one() + cst::<T>(INTEGRABILITY_MARGIN);
        for (k, &ai) in a.iter().enumerate() {
            if !ai.is_finite() || ai <= bound {
                return Err(Error::domain(format!(
                    "A[{k}] = {ai} violates the bound A_k > -1 + {INTEGRABILITY_MARGIN:e}"
                )));
            }
        }
        let d = a.iter().fold(cst::<T>(a.len() as f64), |acc, &ai| acc + ai);
        if d <= T::zero() {
            return Err(Error::domain(format!(
                "D = sum(A_k) + n = {d} must be positive"
            )));
        }
        Ok(Self { a, d })
    }

    /// Dimension `n`.
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// The raw exponents `A₁..Aₙ`.
    pub fn exponents(&self) -> &[T] {
        &self.a
    }

    /// Derived total `D = ΣAₖ + n`.
    pub fn total(&self) -> T {
        self.d
    }
}

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// `K_{n,S}(α) = ∏ₖ Γ(1-αₖ) / Γ(1 + Σₖ(1-αₖ))`, the integral of the Volterra
/// kernel over the ordered simplex.
///
/// ```
/// use singmc::{simplex_constant, AlphaVector};
///
/// let alpha = AlphaVector::new(vec![0.5, 0.5]).unwrap();
/// assert!((simplex_constant(&alpha) - std::f64::consts::PI).abs() < 1e-12);
/// ```
pub fn simplex_constant<T: FloatScalar>(alpha: &AlphaVector<T>) -> T {
    let mut log_num = T::zero();
    for k in 0..alpha.dim() {
        log_num = log_num + ln_gamma_unchecked(alpha.shape(k));
    }
    let b_n = *alpha.cum_shapes().last().expect("n >= 1");
    (log_num - ln_gamma_unchecked(T::one() + b_n)).exp()
}

/// `W_n(β) = Γⁿ(β) / Γ(1 + nβ)`, the equal-exponent specialization
/// `K_{n,S}(1-β, …, 1-β)`.
///
/// Strictly decreasing in `β` on `(0, 1]`, with `W_n(1) = 1/n!`.
pub fn w_n<T: FloatScalar>(beta: T, n: usize) -> Result<T, Error> {
    if n == 0 {
        return Err(Error::domain("w_n requires n >= 1"));
    }
    if !beta.is_finite() || beta <= T::zero() || beta > T::one() {
        return Err(Error::domain(format!(
            "w_n requires beta in (0, 1], got {beta}"
        )));
    }
    let nf = cst::<T>(n as f64);
    Ok((nf * ln_gamma_unchecked(beta) - ln_gamma_unchecked(T::one() + nf * beta)).exp())
}

/// `K_{n,B}(A) = ∏ₖ Γ((Aₖ+1)/2) / Γ(D/2 + 1)`, the integral of the monomial
/// `∏|xₖ|^{Aₖ}` over the unit ball.
pub fn ball_constant<T: FloatScalar>(a: &BallExponents<T>) -> T {
    let half = cst::<T>(0.5);
    let mut log_num = T::zero();
    for &ai in a.exponents() {
        log_num = log_num + ln_gamma_unchecked((ai + T::one()) * half);
    }
    (log_num - ln_gamma_unchecked(a.total() * half + T::one())).exp()
}
