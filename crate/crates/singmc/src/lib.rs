//! Monte Carlo computation of multiple weakly singular integrals.
//!
//! Two families of integrals are covered:
//!
//! * **Volterra type** — integrals over the ordered simplex
//!   `S(n) = {0 < s₁ < s₂ < … < sₙ < 1}` whose kernel
//!   `s₁^{-α₁}(s₂-s₁)^{-α₂}⋯(sₙ-s_{n-1})^{-αₙ}` blows up on the boundary but
//!   stays integrable while every `αₖ < 1`.
//! * **Spherical type** — integrals over the unit ball with the monomial
//!   weight `|x₁|^{A₁}⋯|xₙ|^{Aₙ}`, integrable while every `Aₖ > -1`.
//!
//! Sampling the domain uniformly and leaving the kernel inside the integrand
//! (the *direct* estimator, [`estimate::estimate_direct`]) can have infinite
//! variance. Instead, the kernel is normalized into an exact sampling density
//! — the *polygonal beta* law on the simplex and the *ball beta* law on the
//! ball ([`sampling`]) — so the remaining integrand is bounded whenever `z`
//! is, and the classical CLT error analysis applies ([`estimate`]).
//!
//! The crate also provides:
//!
//! * exact gamma-function normalization constants ([`specfun`]),
//! * a deterministic quadrature oracle for low dimensions plus closed-form
//!   moments for polynomial integrands ([`oracle`]),
//! * dependent-trial estimation of parametric integrals `Q(θ)` with a
//!   simulated-Gaussian uniform confidence band ([`parametric`]),
//! * a small expression language for integrands `z(s₁..sₙ; t₁..t_d)`
//!   ([`expr`]).
//!
//! All numeric code is generic over the scalar type through [`FloatScalar`];
//! `f64` is the intended precision for production use and is what the
//! stated accuracy tolerances are verified at.
//!
//! # Quick start
//!
//! ```
//! use singmc::{estimate_volterra, AlphaVector, EstimatorConfig, Integrand, RngStream};
//!
//! // ∫ over {0 < s1 < s2 < 1} of (s1 (s2 - s1))^{-1/2} ds = π, and the
//! // constant integrand is estimated with zero variance:
//! let alpha = AlphaVector::new(vec![0.5, 0.5])?;
//! let cfg = EstimatorConfig::new(100, 0.95)?;
//! let mut rng = RngStream::new(7, 0);
//! let report = estimate_volterra(&Integrand::one(2), &alpha, &cfg, &mut rng)?;
//! assert_eq!(report.estimate, report.constant);
//! assert!((report.estimate - std::f64::consts::PI).abs() < 1e-12);
//! assert_eq!(report.std_error, 0.0);
//! # Ok::<(), singmc::Error>(())
//! ```

// Special-function coefficients are kept at their published precision, and
// validation deliberately writes `!(x > 0)` so that NaN fails the check.
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Triangular-matrix kernels read better with explicit indices.
#![allow(clippy::needless_range_loop)]

use core::fmt;

pub mod error;
pub mod estimate;
pub mod expr;
pub mod oracle;
pub mod parametric;
pub mod rng;
pub mod sampling;
pub mod specfun;

pub use error::Error;
pub use estimate::{
    estimate_ball, estimate_direct, estimate_volterra, DirectReport, EstimateReport,
    EstimatorConfig, Integrand, NonFinitePolicy,
};
pub use expr::ExprAst;
pub use oracle::{dirichlet_moment, quad_ball, quad_volterra, QuadScheme, QuadSpec};
pub use parametric::{
    estimate_parametric, estimate_rho, ParamBandReport, ParamConfig, ParametricIntegrand,
    ThetaGrid,
};
pub use rng::RngStream;
pub use sampling::{
    sample_ball_beta, sample_beta, sample_polygonal_beta, sample_power, sample_uniform_simplex,
    BallPoint, PolygonalMethod, SimplexPoint,
};
pub use specfun::{ball_constant, log_gamma, simplex_constant, w_n, AlphaVector, BallExponents};

/// Floating-point scalar the library is generic over: `f32` or `f64`.
pub trait FloatScalar:
    num_traits::Float + num_traits::FloatConst + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl FloatScalar for f32 {}
impl FloatScalar for f64 {}

/// Scalar type used by the command-line front end and the examples.
pub type Real = f64;

/// [`AlphaVector`] at the default scalar type.
pub type RealAlphaVector = AlphaVector<Real>;
/// [`BallExponents`] at the default scalar type.
pub type RealBallExponents = BallExponents<Real>;
/// [`EstimateReport`] at the default scalar type.
pub type RealEstimateReport = EstimateReport<Real>;
/// [`ParamBandReport`] at the default scalar type.
pub type RealParamBandReport = ParamBandReport<Real>;

/// Cast an `f64` constant into the working scalar type.
///
/// Infallible for f32/f64 targets; constants used throughout the crate are
/// exactly representable or rounded once here.
#[inline]
pub(crate) fn cst<T: FloatScalar>(x: f64) -> T {
    T::from(x).expect("f64 constant must cast into the scalar type")
}
