//! Deterministic ground truth at desk scale.
//!
//! Two independent singularity-absorbing quadrature schemes for the target
//! integrals in low dimension, plus closed-form moments of the polygonal
//! beta law for polynomial integrands. The estimators in [`crate::estimate`]
//! are validated against these; the two schemes also cross-check each other.
//!
//! Dimension caps (`n ≤ 3` simplex, `n ≤ 2` ball) are intentional: tensor
//! quadrature cost grows as `mⁿ`, and higher dimensions are exactly what the
//! Monte Carlo path is for.

use crate::error::Error;
use crate::estimate::Integrand;
use crate::specfun::{ln_gamma_unchecked, simplex_constant, AlphaVector, BallExponents};
use crate::{cst, FloatScalar};

/// Singularity-absorption scheme for the quadrature oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadScheme {
    /// Gauss–Jacobi nodes and weights absorb the power-law weight exactly.
    /// Default; best accuracy per node.
    GaussJacobi,
    /// The substitution `u = v^{1/(1-α)}` removes the weight, leaving plain
    /// Gauss–Legendre. The fallback with the simplest machinery.
    PowerSubstitution,
}

/// Nodes-per-axis and scheme selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadSpec {
    nodes_per_axis: usize,
    scheme: QuadScheme,
}

impl QuadSpec {
    /// Requires at least 2 nodes per axis.
    pub fn new(nodes_per_axis: usize, scheme: QuadScheme) -> Result<Self, Error> {
        if nodes_per_axis < 2 {
            return Err(Error::domain(format!(
                "nodes_per_axis must be at least 2, got {nodes_per_axis}"
            )));
        }
        Ok(Self {
            nodes_per_axis,
            scheme,
        })
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn scheme(&self) -> QuadScheme {
        self.scheme
    }

    fn doubled(&self) -> Self {
        Self {
            nodes_per_axis: self.nodes_per_axis * 2,
            scheme: self.scheme,
        }
    }
}

/// An oracle value together with its node-doubled refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadValue<T> {
    /// Value at the requested node count.
    pub value: T,
    /// Value at twice the node count.
    pub refined: T,
}

impl<T: FloatScalar> QuadValue<T> {
    /// |refined − value|, the usual convergence estimate.
    pub fn error_estimate(&self) -> T {
        (self.refined - self.value).abs()
    }
}

// ---------------------------------------------------------------------------
// Gauss rules via Golub–Welsch
// ---------------------------------------------------------------------------

/// Gauss–Jacobi rule of degree `m` for `∫₋₁¹ (1-x)^a (1+x)^b f(x) dx`.
///
/// Golub–Welsch: nodes are the eigenvalues of the symmetric tridiagonal
/// Jacobi matrix of the three-term recurrence, weights are `μ₀` times the
/// squared first components of the normalized eigenvectors. Requires
/// `a, b > -1`; `a = b = 0` is Gauss–Legendre.
pub fn gauss_jacobi_rule<T: FloatScalar>(
    m: usize,
    a: T,
    b: T,
) -> Result<(Vec<T>, Vec<T>), Error> {
    if m < 2 {
        return Err(Error::domain("gauss_jacobi_rule requires m >= 2"));
    }
    let neg_one = -T::one();
    if !(a.is_finite() && b.is_finite()) || a <= neg_one || b <= neg_one {
        return Err(Error::domain(format!(
            "gauss_jacobi_rule requires exponents > -1, got a = {a}, b = {b}"
        )));
    }
    let one = T::one();
    let two = cst::<T>(2.0);
    let four = cst::<T>(4.0);
    let ab = a + b;

    let mut diag = vec![T::zero(); m];
    let mut off = vec![T::zero(); m.saturating_sub(1)];
    diag[0] = (b - a) / (ab + two);
    for k in 1..m {
        let kf = cst::<T>(k as f64);
        let denom = two * kf + ab;
        diag[k] = (b * b - a * a) / (denom * (denom + two));
        // squared off-diagonal; k = 1 uses the cancelled form, finite for
        // all a, b > -1 (the generic one is 0/0 at a + b = -1)
        let sq = if k == 1 {
            four * (one + a) * (one + b) / ((two + ab) * (two + ab) * (ab + cst::<T>(3.0)))
        } else {
            four * kf * (kf + a) * (kf + b) * (kf + ab)
                / (denom * denom * (denom + one) * (denom - one))
        };
        off[k - 1] = sq.sqrt();
    }

    let mut first_row = vec![T::zero(); m];
    first_row[0] = one;
    symtri_eigen_first_row(&mut diag, &mut off, &mut first_row)?;

    // total weight mu0 = 2^{a+b+1} B(a+1, b+1)
    let mu0 = ((ab + one) * two.ln() + ln_gamma_unchecked(a + one) + ln_gamma_unchecked(b + one)
        - ln_gamma_unchecked(ab + two))
    .exp();

    let mut pairs: Vec<(T, T)> = diag
        .into_iter()
        .zip(first_row.into_iter().map(|z| mu0 * z * z))
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("eigenvalues are finite"));
    Ok(pairs.into_iter().unzip())
}

/// Implicit-QL eigensolver for a symmetric tridiagonal matrix, accumulating
/// only the first row of the eigenvector matrix (all Golub–Welsch needs).
///
/// `d` holds the diagonal (eigenvalues on return, unsorted), `e` the
/// off-diagonal, `first_row` must come in as the first unit vector.
fn symtri_eigen_first_row<T: FloatScalar>(
    d: &mut [T],
    e: &mut [T],
    first_row: &mut [T],
) -> Result<(), Error> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    let zero = T::zero();
    let one = T::one();
    let two = cst::<T>(2.0);
    // e is used with one slot of slack, mirroring the classical routine
    let mut ee = vec![zero; n];
    ee[..n - 1].copy_from_slice(e);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if ee[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::numerical(
                    "tridiagonal QL iteration failed to converge",
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (two * ee[l]);
            let mut r = g.hypot(one);
            g = d[m] - d[l] + ee[l] / (g + r.copysign(g));
            let mut s = one;
            let mut c = one;
            let mut p = zero;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * ee[i];
                let b = c * ee[i];
                r = f.hypot(g);
                ee[i + 1] = r;
                if r == zero {
                    d[i + 1] = d[i + 1] - p;
                    ee[m] = zero;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = first_row[i + 1];
                first_row[i + 1] = s * first_row[i] + c * f;
                first_row[i] = c * first_row[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            ee[l] = g;
            ee[m] = zero;
        }
    }
    Ok(())
}

/// One quadrature axis after mapping to the unit interval:
/// `∫₀^L u^{-α} f(u) du ≈ L^β · Σᵢ ωᵢ f(L·ξᵢ)` with `β = 1 - α`.
struct Axis<T> {
    xi: Vec<T>,
    omega: Vec<T>,
    beta: T,
}

impl<T: FloatScalar> Axis<T> {
    /// Axis absorbing the weight `u^{-alpha}` per the selected scheme.
    ///
    /// `tail_exp` declares that `f(u)` carries a known algebraic factor
    /// `(L-u)^{tail_exp}` (inner simplex levels shrink like the remaining
    /// length). The Gauss–Jacobi scheme absorbs it into the rule — the
    /// `(1-t)^{tail}` weight goes into the nodes, the node-constant
    /// `(1-tᵢ)^{-tail}` compensation into the weights — restoring spectral
    /// convergence; the power-substitution fallback integrates through it
    /// and converges algebraically instead.
    fn for_weight(m: usize, alpha: T, tail_exp: T, scheme: QuadScheme) -> Result<Self, Error> {
        let one = T::one();
        let half = cst::<T>(0.5);
        let beta = one - alpha;
        match scheme {
            QuadScheme::GaussJacobi => {
                let (x, w) = gauss_jacobi_rule(m, tail_exp, -alpha)?;
                let scale = cst::<T>(2.0).powf(-(tail_exp - alpha + one));
                let mut xi = Vec::with_capacity(m);
                let mut omega = Vec::with_capacity(m);
                for (&xj, &wj) in x.iter().zip(&w) {
                    let t = (one + xj) * half;
                    let one_minus_t = (one - xj) * half;
                    xi.push(t);
                    omega.push(wj * scale * one_minus_t.powf(-tail_exp));
                }
                Ok(Self { xi, omega, beta })
            }
            QuadScheme::PowerSubstitution => {
                // u = v^{1/beta}: the weight cancels, Gauss-Legendre remains
                let (v, w) = jacobi01(m, T::zero(), T::zero())?;
                let inv_beta = beta.recip();
                let xi = v.iter().map(|&vi| vi.powf(inv_beta)).collect();
                let omega = w.iter().map(|&wi| wi * inv_beta).collect();
                Ok(Self { xi, omega, beta })
            }
        }
    }
}

/// Gauss–Jacobi rule mapped to the unit interval:
/// `∫₀¹ (1-t)^a t^b g(t) dt ≈ Σ wᵢ g(tᵢ)`.
fn jacobi01<T: FloatScalar>(m: usize, a: T, b: T) -> Result<(Vec<T>, Vec<T>), Error> {
    let (x, w) = gauss_jacobi_rule(m, a, b)?;
    let half = cst::<T>(0.5);
    let scale = cst::<T>(2.0).powf(-(a + b + T::one()));
    Ok((
        x.iter().map(|&xi| (xi + T::one()) * half).collect(),
        w.iter().map(|&wi| wi * scale).collect(),
    ))
}

// ---------------------------------------------------------------------------
// Volterra oracle
// ---------------------------------------------------------------------------

/// Deterministic evaluation of the Volterra integral
/// `∫_{S(n)} z(s)·R_{α,S}(s) ds` for `n ≤ 3`.
///
/// Rewritten in increment variables `uₖ = sₖ - s_{k-1}` over
/// `{uₖ > 0, Σuₖ < 1}`; each `uₖ^{-αₖ}` weight is absorbed per
/// [`QuadScheme`], and the axes are tensored (`mⁿ` evaluations).
///
/// ```
/// use singmc::{quad_volterra, AlphaVector, Integrand, QuadScheme, QuadSpec};
///
/// // ∫₀¹ s^{-1/2} · s ds = 2/3
/// let alpha = AlphaVector::new(vec![0.5]).unwrap();
/// let z = Integrand::new(1, |s: &[f64]| s[0]);
/// let spec = QuadSpec::new(8, QuadScheme::GaussJacobi).unwrap();
/// let v = quad_volterra(&z, &alpha, &spec).unwrap();
/// assert!((v - 2.0 / 3.0).abs() < 1e-13);
/// ```
pub fn quad_volterra<T: FloatScalar>(
    z: &Integrand<T>,
    alpha: &AlphaVector<T>,
    spec: &QuadSpec,
) -> Result<T, Error> {
    let n = alpha.dim();
    if n > 3 {
        return Err(Error::unsupported(format!(
            "quad_volterra supports n <= 3, got n = {n}"
        )));
    }
    if z.arity() != n {
        return Err(Error::domain(format!(
            "integrand arity {} does not match exponent dimension {n}",
            z.arity()
        )));
    }
    // level k sees the inner levels shrink like (remaining length)^{c_k},
    // c_k = Σ_{j>k} (1-α_j) = b_n - b_k
    let b_n = *alpha.cum_shapes().last().expect("n >= 1");
    let axes: Vec<Axis<T>> = alpha
        .exponents()
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let tail = b_n - alpha.cum_shapes()[k];
            Axis::for_weight(spec.nodes_per_axis(), a, tail, spec.scheme())
        })
        .collect::<Result<_, _>>()?;
    let mut coords = vec![T::zero(); n];
    Ok(volterra_level(z, &axes, 0, T::zero(), &mut coords))
}

fn volterra_level<T: FloatScalar>(
    z: &Integrand<T>,
    axes: &[Axis<T>],
    level: usize,
    s_prev: T,
    coords: &mut Vec<T>,
) -> T {
    let axis = &axes[level];
    let length = T::one() - s_prev;
    let mut acc = T::zero();
    for (&xi, &omega) in axis.xi.iter().zip(&axis.omega) {
        let s_k = s_prev + length * xi;
        coords[level] = s_k;
        let inner = if level + 1 == axes.len() {
            z.eval(coords)
        } else {
            volterra_level(z, axes, level + 1, s_k, coords)
        };
        acc = acc + omega * inner;
    }
    length.powf(axis.beta) * acc
}

/// [`quad_volterra`] together with its node-doubled refinement.
pub fn quad_volterra_refined<T: FloatScalar>(
    z: &Integrand<T>,
    alpha: &AlphaVector<T>,
    spec: &QuadSpec,
) -> Result<QuadValue<T>, Error> {
    Ok(QuadValue {
        value: quad_volterra(z, alpha, spec)?,
        refined: quad_volterra(z, alpha, &spec.doubled())?,
    })
}

// ---------------------------------------------------------------------------
// Ball oracle
// ---------------------------------------------------------------------------

/// Deterministic evaluation of the ball integral `∫_B z(x)·∏|xₖ|^{Aₖ} dx`
/// for `n ≤ 2`.
///
/// `n = 1` integrates `x^{A}(z(x) + z(-x))` over (0, 1) with the weight
/// absorbed per scheme. `n = 2` goes polar: the angular factor
/// `|cos θ|^{A₁}|sin θ|^{A₂}` becomes a Jacobi weight under `t = sin²θ`,
/// evaluated on symmetric quarter-period nodes with the four sign patterns;
/// the radial weight `r^{A₁+A₂+1}` is absorbed per scheme.
pub fn quad_ball<T: FloatScalar>(
    z: &Integrand<T>,
    a: &BallExponents<T>,
    spec: &QuadSpec,
) -> Result<T, Error> {
    let n = a.dim();
    if n > 2 {
        return Err(Error::unsupported(format!(
            "quad_ball supports n <= 2, got n = {n}"
        )));
    }
    if z.arity() != n {
        return Err(Error::domain(format!(
            "integrand arity {} does not match exponent dimension {n}",
            z.arity()
        )));
    }
    let one = T::one();
    let half = cst::<T>(0.5);
    let exps = a.exponents();
    match n {
        1 => {
            let axis = Axis::for_weight(spec.nodes_per_axis(), -exps[0], T::zero(), spec.scheme())?;
            let mut acc = T::zero();
            for (&xi, &omega) in axis.xi.iter().zip(&axis.omega) {
                acc = acc + omega * (z.eval(&[xi]) + z.eval(&[-xi]));
            }
            Ok(acc)
        }
        _ => {
            // radial: weight r^{D-1} on (0,1), where D = A1 + A2 + 2
            let radial = Axis::for_weight(spec.nodes_per_axis(), one - a.total(), T::zero(), spec.scheme())?;
            // angular (per quadrant, t = sin^2 theta):
            // (1/2) ∫₀¹ (1-t)^{(A1-1)/2} t^{(A2-1)/2} g(t) dt
            let (t_nodes, t_weights) = jacobi01(
                spec.nodes_per_axis(),
                (exps[0] - one) * half,
                (exps[1] - one) * half,
            )?;
            let cos_t: Vec<T> = t_nodes.iter().map(|&t| (one - t).sqrt()).collect();
            let sin_t: Vec<T> = t_nodes.iter().map(|&t| t.sqrt()).collect();
            let signs: [(T, T); 4] = [
                (one, one),
                (-one, one),
                (-one, -one),
                (one, -one),
            ];
            let mut acc = T::zero();
            for (&r, &wr) in radial.xi.iter().zip(&radial.omega) {
                let mut ang = T::zero();
                for i in 0..t_nodes.len() {
                    let mut quad_sum = T::zero();
                    for &(sc, ss) in &signs {
                        quad_sum = quad_sum + z.eval(&[r * sc * cos_t[i], r * ss * sin_t[i]]);
                    }
                    ang = ang + t_weights[i] * quad_sum;
                }
                acc = acc + wr * half * ang;
            }
            Ok(acc)
        }
    }
}

/// [`quad_ball`] together with its node-doubled refinement.
pub fn quad_ball_refined<T: FloatScalar>(
    z: &Integrand<T>,
    a: &BallExponents<T>,
    spec: &QuadSpec,
) -> Result<QuadValue<T>, Error> {
    Ok(QuadValue {
        value: quad_ball(z, a, spec)?,
        refined: quad_ball(z, a, &spec.doubled())?,
    })
}

// ---------------------------------------------------------------------------
// Closed-form moments
// ---------------------------------------------------------------------------

/// `E[∏ₖ sₖ^{pₖ}]` under the polygonal beta law, exactly.
///
/// Expands `sₖ = u₁ + … + uₖ` over the gamma increments, whose joint law is
/// Dirichlet with shapes `(1-α₁, …, 1-αₙ, 1)`, and applies the gamma-ratio
/// moment identity monomial by monomial. Cost grows combinatorially in the
/// total power; intended for the small polynomial ground truths.
pub fn dirichlet_moment<T: FloatScalar>(
    alpha: &AlphaVector<T>,
    powers: &[u32],
) -> Result<T, Error> {
    let n = alpha.dim();
    if powers.len() != n {
        return Err(Error::domain(format!(
            "powers length {} does not match dimension {n}",
            powers.len()
        )));
    }
    let total: u32 = powers.iter().sum();
    if total > 60 {
        return Err(Error::unsupported(
            "dirichlet_moment caps the total power at 60",
        ));
    }
    let betas: Vec<T> = (0..n).map(|k| alpha.shape(k)).collect();
    let b_n = *alpha.cum_shapes().last().expect("n >= 1");

    let mut exponents = vec![0u32; n];
    let mut numerator = T::zero();
    expand_coordinate(0, T::one(), powers, &betas, &mut exponents, &mut numerator);
    Ok(numerator / rising(b_n + T::one(), total))
}

/// `I_{α,n}` of the monomial `∏ sₖ^{pₖ}`: `K_{n,S}(α) · dirichlet_moment`.
pub fn monomial_integral<T: FloatScalar>(
    alpha: &AlphaVector<T>,
    powers: &[u32],
) -> Result<T, Error> {
    Ok(simplex_constant(alpha) * dirichlet_moment(alpha, powers)?)
}

/// Recurse over coordinates: expand `(u₁+…+u_{k+1})^{p_k}` multinomially.
fn expand_coordinate<T: FloatScalar>(
    k: usize,
    coeff: T,
    powers: &[u32],
    betas: &[T],
    exponents: &mut Vec<u32>,
    acc: &mut T,
) {
    if k == powers.len() {
        let mut term = coeff;
        for (j, &e) in exponents.iter().enumerate() {
            term = term * rising(betas[j], e);
        }
        *acc = *acc + term;
        return;
    }
    distribute(powers[k], 0, k, coeff, powers, betas, exponents, acc);
}

/// Distribute `remaining` units of power over the increments `u_var..u_k`.
#[allow(clippy::too_many_arguments)]
fn distribute<T: FloatScalar>(
    remaining: u32,
    var: usize,
    k: usize,
    coeff: T,
    powers: &[u32],
    betas: &[T],
    exponents: &mut Vec<u32>,
    acc: &mut T,
) {
    if var == k {
        exponents[var] += remaining;
        expand_coordinate(k + 1, coeff, powers, betas, exponents, acc);
        exponents[var] -= remaining;
        return;
    }
    for take in 0..=remaining {
        let c = coeff * cst::<T>(binomial(remaining as u64, take as u64) as f64);
        exponents[var] += take;
        distribute(remaining - take, var + 1, k, c, powers, betas, exponents, acc);
        exponents[var] -= take;
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn rising<T: FloatScalar>(x: T, m: u32) -> T {
    (0..m).fold(T::one(), |acc, i| acc * (x + cst::<T>(i as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn alpha(v: &[f64]) -> AlphaVector<f64> {
        AlphaVector::new(v.to_vec()).unwrap()
    }

    fn gj_spec(m: usize) -> QuadSpec {
        QuadSpec::new(m, QuadScheme::GaussJacobi).unwrap()
    }

    fn ps_spec(m: usize) -> QuadSpec {
        QuadSpec::new(m, QuadScheme::PowerSubstitution).unwrap()
    }

    #[test]
    fn legendre_five_point_rule() {
        let (x, w) = gauss_jacobi_rule::<f64>(5, 0.0, 0.0).unwrap();
        let x_want = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        let w_want = [
            0.236_926_885_056_189_08,
            0.478_628_670_499_366_47,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
        ];
        for i in 0..5 {
            assert_relative_eq!(x[i], x_want[i], epsilon = 1e-13);
            assert_relative_eq!(w[i], w_want[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn jacobi_five_point_rule_alpha1_beta0() {
        // reference: scipy.special.roots_jacobi(5, 1.0, 0.0)
        let (x, w) = gauss_jacobi_rule::<f64>(5, 1.0, 0.0).unwrap();
        let x_want = [
            -0.920_380_285_897_062_6,
            -0.603_973_164_252_783_6,
            -0.124_050_379_505_227_7,
            0.390_928_546_707_272_23,
            0.802_929_828_402_347_2,
        ];
        let w_want = [
            0.387_126_360_906_605_9,
            0.668_698_552_377_478_8,
            0.585_547_948_338_679_4,
            0.295_635_480_290_466_7,
            0.062_991_658_086_769_2,
        ];
        for i in 0..5 {
            assert_relative_eq!(x[i], x_want[i], epsilon = 1e-12);
            assert_relative_eq!(w[i], w_want[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn jacobi_rule_node_symmetry() {
        // equal exponents give nodes symmetric about 0
        for &(m, e) in &[(8usize, -0.5), (16, 0.25), (33, -0.9)] {
            let (x, w) = gauss_jacobi_rule::<f64>(m, e, e).unwrap();
            let w_scale = w.iter().cloned().fold(0.0f64, f64::max);
            for i in 0..m {
                assert!(
                    (x[i] + x[m - 1 - i]).abs() <= 1e-13,
                    "node symmetry violated at m={m}, e={e}"
                );
                assert!(
                    (w[i] - w[m - 1 - i]).abs() <= 1e-12 * w_scale,
                    "weight symmetry violated at m={m}, e={e}"
                );
            }
        }
    }

    #[test]
    fn jacobi_rule_polynomial_exactness() {
        // degree-2m-1 exactness: int_{-1}^1 (1+x)^{-1/2} x^j dx
        let (x, w) = gauss_jacobi_rule::<f64>(6, 0.0, -0.5).unwrap();
        // exact values via substitution 1+x = t^2: j=0 -> 2*sqrt(2),
        // j=1 -> -2*sqrt(2)/3, j=2 -> 2*sqrt(2)*7/15
        let exact = [
            2.0 * 2.0_f64.sqrt(),
            -2.0 * 2.0_f64.sqrt() / 3.0,
            2.0 * 2.0_f64.sqrt() * 7.0 / 15.0,
        ];
        for (j, &want) in exact.iter().enumerate() {
            let got: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| wi * xi.powi(j as i32))
                .sum();
            assert_relative_eq!(got, want, max_relative = 1e-13);
        }
    }

    #[test]
    fn jacobi_rule_domain_errors() {
        assert!(gauss_jacobi_rule::<f64>(1, 0.0, 0.0).is_err());
        assert!(gauss_jacobi_rule::<f64>(4, -1.0, 0.0).is_err());
        assert!(gauss_jacobi_rule::<f64>(4, 0.0, -1.5).is_err());
        // a + b = -1 must work (cancelled k = 1 coefficient)
        assert!(gauss_jacobi_rule::<f64>(4, -0.5, -0.5).is_ok());
    }

    #[test]
    fn volterra_constant_integrand() {
        // n=1, alpha=0: integral is exactly 1
        let v = quad_volterra(&Integrand::one(1), &alpha(&[0.0]), &gj_spec(2)).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-13);
        // n=2, alpha=(1/2,1/2): K = pi. The Jacobi scheme absorbs both the
        // head and tail weights, so z = 1 is exact at any node count; the
        // substitution fallback converges only algebraically.
        let v = quad_volterra(&Integrand::one(2), &alpha(&[0.5, 0.5]), &gj_spec(4)).unwrap();
        assert_relative_eq!(v, PI, max_relative = 1e-13);
        let v = quad_volterra(&Integrand::one(2), &alpha(&[0.5, 0.5]), &ps_spec(32)).unwrap();
        assert_relative_eq!(v, PI, max_relative = 1e-4);
    }

    #[test]
    fn volterra_linear_and_spot_values() {
        let z = Integrand::new(2, |s: &[f64]| s[1]);
        let v = quad_volterra(&z, &alpha(&[0.5, 0.5]), &gj_spec(32)).unwrap();
        assert_relative_eq!(v, PI / 2.0, max_relative = 1e-12);

        // mpmath: int_0^1 s^-0.3 exp(s) ds
        let z = Integrand::new(1, |s: &[f64]| s[0].exp());
        let v = quad_volterra(&z, &alpha(&[0.3]), &gj_spec(32)).unwrap();
        assert_relative_eq!(v, 2.2576004171082316885, max_relative = 1e-12);

        // mpmath: n=2, alpha=(1/2,1/2), z = exp(-(s1+s2))
        let z = Integrand::new(2, |s: &[f64]| (-(s[0] + s[1])).exp());
        let v = quad_volterra(&z, &alpha(&[0.5, 0.5]), &gj_spec(32)).unwrap();
        assert_relative_eq!(v, 1.6494950201449426125, max_relative = 1e-12);
        let v = quad_volterra(&z, &alpha(&[0.5, 0.5]), &ps_spec(48)).unwrap();
        assert_relative_eq!(v, 1.6494950201449426125, max_relative = 1e-5);
    }

    #[test]
    fn volterra_refinement_and_caps() {
        let z = Integrand::new(3, |s: &[f64]| (-(s[0] + s[1] + s[2])).exp());
        let qv = quad_volterra_refined(&z, &alpha(&[0.5, 0.25, 0.75]), &gj_spec(16)).unwrap();
        assert!(qv.error_estimate() <= 1e-7 * qv.refined.abs());
        assert!(matches!(
            quad_volterra(&Integrand::one(4), &alpha(&[0.1; 4]), &gj_spec(4)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn ball_disc_and_moment() {
        let a = BallExponents::new(vec![0.0, 0.0]).unwrap();
        let v = quad_ball(&Integrand::one(2), &a, &gj_spec(16)).unwrap();
        assert_relative_eq!(v, PI, max_relative = 1e-10);

        let z = Integrand::new(2, |x: &[f64]| x[0] * x[0]);
        let v = quad_ball(&z, &a, &gj_spec(32)).unwrap();
        assert_relative_eq!(v, PI / 4.0, max_relative = 1e-8);
    }

    #[test]
    fn ball_singular_cases() {
        let a = BallExponents::new(vec![-0.5, -0.5]).unwrap();
        let v = quad_ball(&Integrand::one(2), &a, &gj_spec(64)).unwrap();
        assert_relative_eq!(v, 14.832597418410975347, max_relative = 1e-6);

        // mpmath polar reference: A=(-0.5,-0.3), z = x1^2
        let a = BallExponents::new(vec![-0.5, -0.3]).unwrap();
        let z = Integrand::new(2, |x: &[f64]| x[0] * x[0]);
        for spec in [gj_spec(32), ps_spec(32)] {
            let v = quad_ball(&z, &a, &spec).unwrap();
            assert_relative_eq!(v, 1.6142937058470348478, max_relative = 1e-8);
        }

        // n=1: int_{-1}^1 |x|^{-1/2} x^2 dx = 2 * (2/5)
        let a1 = BallExponents::new(vec![-0.5]).unwrap();
        let z1 = Integrand::new(1, |x: &[f64]| x[0] * x[0]);
        let v = quad_ball(&z1, &a1, &gj_spec(8)).unwrap();
        assert_relative_eq!(v, 0.8, max_relative = 1e-12);

        assert!(matches!(
            quad_ball(&Integrand::one(3), &BallExponents::new(vec![0.0; 3]).unwrap(), &gj_spec(4)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn dirichlet_moment_examples() {
        // total probability
        let v = dirichlet_moment(&alpha(&[0.5, 0.25]), &[0, 0]).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        // E[s2] = (2 - a1 - a2)/(3 - a1 - a2) = 1/2 at (1/2,1/2)
        let v = dirichlet_moment(&alpha(&[0.5, 0.5]), &[0, 1]).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-14);
        // uniform mean
        let v = dirichlet_moment(&alpha(&[0.0]), &[1]).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-14);
        // hand-derived: E[s1*s3] = 1/7 at alpha=(0.5,0.25,0.75)
        let v = dirichlet_moment(&alpha(&[0.5, 0.25, 0.75]), &[1, 0, 1]).unwrap();
        assert_relative_eq!(v, 1.0 / 7.0, max_relative = 1e-13);
        // dimension mismatch
        assert!(dirichlet_moment(&alpha(&[0.5]), &[1, 2]).is_err());
    }

    #[test]
    fn moment_matches_quadrature() {
        // K * E[s1^2 s2] vs quad_volterra on the same monomial
        let a = alpha(&[0.5, 0.25]);
        let z = Integrand::new(2, |s: &[f64]| s[0] * s[0] * s[1]);
        let via_quad = quad_volterra(&z, &a, &gj_spec(24)).unwrap();
        let via_moment = monomial_integral(&a, &[2, 1]).unwrap();
        assert_relative_eq!(via_quad, via_moment, max_relative = 1e-10);
    }

    #[test]
    fn schemes_agree_on_smooth_integrand() {
        // The substitution fallback converges algebraically, so the
        // cross-check runs at a coarse tolerance and additionally verifies
        // it is converging *towards* the spectral value.
        let a = alpha(&[0.5, 0.25, 0.75]);
        let z = Integrand::new(3, |s: &[f64]| (-(s[0] + s[1] + s[2])).exp());
        let gj = quad_volterra(&z, &a, &gj_spec(24)).unwrap();
        let ps_coarse = quad_volterra(&z, &a, &ps_spec(24)).unwrap();
        let ps_fine = quad_volterra(&z, &a, &ps_spec(48)).unwrap();
        assert_relative_eq!(gj, ps_fine, max_relative = 1e-4);
        assert!(
            (ps_fine - gj).abs() < (ps_coarse - gj).abs(),
            "substitution scheme must converge towards the Jacobi value"
        );
    }
}
