//! One-dimensional Gaussian and Gaussian-mixture primitives.
//!
//! Everything downstream reduces to a handful of closed-form identities on
//! scalar Gaussians:
//!
//! * The product of two Gaussian densities is a scaled Gaussian. In precision
//!   form, `1/v = 1/v1 + 1/v2` and `m/v = m1/v1 + m2/v2`, and the scale
//!   factor is `N(m1; m2, v1 + v2)`, the value of one density at the other's
//!   mean under the summed variance.
//! * Convolving a Gaussian with another Gaussian adds means and variances.
//! * A Dirac delta is the `variance -> 0` limit. Deltas are stored as
//!   components with `variance == 0` and every operation special-cases them
//!   symbolically; no infinite precision ever enters floating-point
//!   arithmetic.
//!
//! A [`GaussianMixture`] is a weighted list of such components. Products of
//! mixtures keep every pairwise term: nothing is pruned or merged, which is
//! what makes the downstream posteriors exact rather than approximate.
//!
//! The module also carries the Gaussian upper-tail function [`q_function`],
//! its inverse, and [`bisect_min_radius`], a monotone-bisection helper used
//! to turn "risk as a function of radius" into the smallest radius meeting a
//! risk target.

use std::f64::consts::{PI, SQRT_2, TAU};
use thiserror::Error;

/// Errors from mixture manipulation and root bracketing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    /// An operation required a normalized mixture but the weights do not sum
    /// to one.
    #[error("mixture weights sum to {total:.17} where 1 was required")]
    NotNormalized { total: f64 },
    /// The mixture has zero or non-finite total mass, so it cannot be
    /// normalized.
    #[error("mixture carries unusable total mass {total}")]
    NoMass { total: f64 },
    /// A probability argument fell outside the open interval (0, 1).
    #[error("probability {value} lies outside (0, 1)")]
    ProbabilityOutOfRange { value: f64 },
    /// The risk never dropped to the target even after expanding the bracket
    /// by the maximum allowed factor. The caller's radius is unavailable.
    #[error(
        "risk stayed above target after {doublings} bracket doublings (upper end {hi:e}); \
         no finite radius satisfies the target"
    )]
    BracketExhausted { doublings: u32, hi: f64 },
    /// Bisection ran out of iterations before the interval shrank to the
    /// requested tolerance.
    #[error("bisection did not reach tolerance {tolerance:e} within {max_iterations} iterations")]
    IterationBudget { tolerance: f64, max_iterations: u32 },
}

/// Gaussian density `N(t; mean, variance)` for strictly positive variance.
pub fn gaussian_pdf(t: f64, mean: f64, variance: f64) -> f64 {
    debug_assert!(variance > 0.0);
    let d = t - mean;
    (-d * d / (2.0 * variance)).exp() / (TAU * variance).sqrt()
}

/// Complementary error function, accurate to a few ulps over the whole line.
///
/// For `0 <= x <= 1.5` this computes `1 - erf(x)` from the cancellation-free
/// series `erf(x) = (2x/sqrt(pi)) e^{-x^2} sum_n (2x^2)^n / (2n+1)!!`, whose
/// terms are all positive. For `x > 1.5` it switches to the classical continued
/// fraction `erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`,
/// evaluated with the modified Lentz recurrence. Negative arguments use the
/// reflection `erfc(-x) = 2 - erfc(x)`.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= 1.5 {
        // erf as an everywhere-positive series, then one subtraction.
        let xx = x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut n = 0u32;
        loop {
            n += 1;
            term *= 2.0 * xx / (2.0 * n as f64 + 1.0);
            sum += term;
            if term <= sum * 1e-18 || n > 200 {
                break;
            }
        }
        let erf = 2.0 * x / PI.sqrt() * (-xx).exp() * sum;
        1.0 - erf
    } else {
        // Modified Lentz evaluation of the Laplace continued fraction.
        let tiny = 1e-300;
        let mut f = x;
        let mut c = f;
        let mut d = 0.0;
        let mut k = 0u32;
        loop {
            k += 1;
            let a = 0.5 * k as f64;
            // b terms alternate between x and nothing here because the
            // fraction is written with every partial denominator equal to x
            // after folding the 2x form; use the standard a_k/(x + ...) shape.
            d = x + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = x + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-15 || k > 300 {
                break;
            }
        }
        (-x * x).exp() / PI.sqrt() / f
    }
}

/// Gaussian upper-tail probability `Q(u) = Pr(Z > u)` for standard normal Z.
pub fn q_function(u: f64) -> f64 {
    0.5 * erfc(u / SQRT_2)
}

/// Inverse of [`q_function`]: the `u` with `Q(u) = p`, for `p` in (0, 1).
///
/// Bisection over a generous interval followed by Newton polish; no
/// approximation constants involved. The achievable accuracy is limited by
/// how well `p` itself resolves `u`: for small `p` (the regime every caller
/// here lives in) the round trip through [`q_function`] holds to better than
/// 1e-9, while for `p` very close to 1 the spacing of representable doubles
/// near 1 caps resolution at roughly `ulp(1)/pdf(u)`.
pub fn q_inverse(p: f64) -> Result<f64, NumericsError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(NumericsError::ProbabilityOutOfRange { value: p });
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..2 {
        let slope = gaussian_pdf(u, 0.0, 1.0);
        if slope < f64::MIN_POSITIVE {
            break;
        }
        let step = (q_function(u) - p) / slope;
        if !step.is_finite() {
            break;
        }
        u += step;
    }
    Ok(u)
}

/// One weighted Gaussian component. `variance == 0` encodes a Dirac delta at
/// `mean` carrying probability mass `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedGaussian {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

impl WeightedGaussian {
    /// A component with non-negative weight, finite mean and non-negative
    /// finite variance. Panics on anything else; invalid components are a
    /// programming error, not a runtime condition.
    pub fn new(weight: f64, mean: f64, variance: f64) -> Self {
        assert!(weight >= 0.0 && !weight.is_nan(), "invalid weight {weight}");
        assert!(mean.is_finite(), "invalid mean {mean}");
        assert!(
            variance >= 0.0 && variance.is_finite(),
            "invalid variance {variance}"
        );
        Self {
            weight,
            mean,
            variance,
        }
    }

    /// Whether this component is a Dirac delta.
    pub fn is_delta(&self) -> bool {
        self.variance == 0.0
    }
}

/// Product of two weighted Gaussian densities, as a weighted Gaussian.
///
/// With both variances positive this is the textbook identity described in
/// the module docs. A delta sifts the other factor: the result is a delta at
/// the same point whose weight picks up the other density's value there. Two
/// deltas at different points have no overlap, so the product is a zero-mass
/// delta (a valid, harmless value). Two deltas at the same point would have
/// divergent mass; that case cannot arise from the mixtures this crate
/// builds, and the returned weight is infinite so it cannot be mistaken for
/// anything meaningful.
pub fn gaussian_product(a: &WeightedGaussian, b: &WeightedGaussian) -> WeightedGaussian {
    let w = a.weight * b.weight;
    match (a.is_delta(), b.is_delta()) {
        (true, true) => {
            if a.mean == b.mean {
                WeightedGaussian {
                    weight: f64::INFINITY,
                    mean: a.mean,
                    variance: 0.0,
                }
            } else {
                WeightedGaussian::new(0.0, a.mean, 0.0)
            }
        }
        (true, false) => {
            WeightedGaussian::new(w * gaussian_pdf(a.mean, b.mean, b.variance), a.mean, 0.0)
        }
        (false, true) => {
            WeightedGaussian::new(w * gaussian_pdf(b.mean, a.mean, a.variance), b.mean, 0.0)
        }
        (false, false) => {
            let vsum = a.variance + b.variance;
            let scale = gaussian_pdf(a.mean, b.mean, vsum);
            WeightedGaussian::new(
                w * scale,
                (a.mean * b.variance + b.mean * a.variance) / vsum,
                a.variance * b.variance / vsum,
            )
        }
    }
}

/// A finite Gaussian mixture. Never empty; weights need not sum to one until
/// [`GaussianMixture::normalize`] is called.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<WeightedGaussian>,
}

impl GaussianMixture {
    pub fn new(components: Vec<WeightedGaussian>) -> Self {
        assert!(!components.is_empty(), "mixture must have components");
        Self { components }
    }

    pub fn components(&self) -> &[WeightedGaussian] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Rescales weights to sum to one, preserving their ratios.
    pub fn normalize(&mut self) -> Result<(), NumericsError> {
        let total = self.total_weight();
        if !(total > 0.0) || !total.is_finite() {
            return Err(NumericsError::NoMass { total });
        }
        for c in &mut self.components {
            c.weight /= total;
        }
        Ok(())
    }

    /// Consuming convenience around [`GaussianMixture::normalize`].
    pub fn normalized(mut self) -> Result<Self, NumericsError> {
        self.normalize()?;
        Ok(self)
    }

    /// Sorts components by decreasing weight. The sort is stable, so equal
    /// weights keep their construction order.
    pub fn sort_by_weight(&mut self) {
        self.components
            .sort_by(|a, b| b.weight.total_cmp(&a.weight));
    }

    /// Mixture density at `t`. Delta components contribute nothing away from
    /// their mean and an infinite spike exactly on it.
    pub fn eval(&self, t: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                if c.is_delta() {
                    if t == c.mean && c.weight > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    c.weight * gaussian_pdf(t, c.mean, c.variance)
                }
            })
            .sum()
    }

    /// Mean of the mixture. Only meaningful for a normalized mixture, so the
    /// weights must sum to one within 1e-9.
    pub fn mean(&self) -> Result<f64, NumericsError> {
        let total = self.total_weight();
        if (total - 1.0).abs() > 1e-9 {
            return Err(NumericsError::NotNormalized { total });
        }
        Ok(self.components.iter().map(|c| c.weight * c.mean).sum())
    }

    /// All pairwise component products of `self` and `other`, in `self`-major
    /// order. Weights are not renormalized; the caller decides what the total
    /// mass means.
    pub fn product(&self, other: &Self) -> Self {
        let mut components = Vec::with_capacity(self.len() * other.len());
        for a in &self.components {
            for b in &other.components {
                components.push(gaussian_product(a, b));
            }
        }
        Self { components }
    }

    /// Maps every component `(w, m, v)` to `(w, offset ± m, v + extra_variance)`,
    /// with `negate` selecting `offset - m`.
    ///
    /// This is the shape of two recurring factor-graph updates: marginalizing
    /// a Gaussian observation against a mixture over one of its two summands
    /// reflects the mixture around the observed value and widens it by the
    /// observation noise.
    pub fn shift_convolve(&self, offset: f64, extra_variance: f64, negate: bool) -> Self {
        assert!(offset.is_finite());
        assert!(extra_variance >= 0.0 && extra_variance.is_finite());
        let components = self
            .components
            .iter()
            .map(|c| {
                let mean = if negate {
                    offset - c.mean
                } else {
                    offset + c.mean
                };
                WeightedGaussian::new(c.weight, mean, c.variance + extra_variance)
            })
            .collect();
        Self { components }
    }

    /// Probability that a draw from the mixture lands strictly outside the
    /// closed interval `[center - radius, center + radius]`.
    ///
    /// Both tails are evaluated through [`q_function`], which stays accurate
    /// far out in the tails where `1 - cdf` would cancel. Delta components
    /// contribute their whole weight iff they sit strictly outside the
    /// interval.
    pub fn interval_risk(&self, center: f64, radius: f64) -> f64 {
        assert!(radius >= 0.0 && radius.is_finite());
        assert!(center.is_finite());
        self.components
            .iter()
            .map(|c| {
                if c.is_delta() {
                    if (c.mean - center).abs() > radius {
                        c.weight
                    } else {
                        0.0
                    }
                } else {
                    let sd = c.variance.sqrt();
                    let below = q_function((c.mean - (center - radius)) / sd);
                    let above = q_function(((center + radius) - c.mean) / sd);
                    c.weight * (below + above)
                }
            })
            .sum()
    }
}

/// Search interval and budget for [`bisect_min_radius`].
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub tolerance: f64,
    pub max_iterations: u32,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, tolerance: f64, max_iterations: u32) -> Self {
        assert!(
            lo.is_finite() && hi.is_finite() && lo < hi,
            "bad bracket [{lo}, {hi}]"
        );
        assert!(tolerance > 0.0 && tolerance.is_finite());
        assert!(max_iterations > 0);
        Self {
            lo,
            hi,
            tolerance,
            max_iterations,
        }
    }
}

/// Maximum factor by which the upper bracket end may grow while hunting for
/// a radius whose risk meets the target.
const MAX_BRACKET_DOUBLINGS: u32 = 40;

/// Smallest radius `r` with `risk(r) <= target`, for a non-increasing `risk`.
///
/// If the lower end already satisfies the target it is returned as-is (a
/// degenerate but legitimate answer: the caller's risk requirement is slack).
/// Otherwise the upper end is doubled until it satisfies the target, up to
/// 2^40 times the initial value, and the boundary is then located by interval
/// halving. The returned radius always satisfies the target; the point
/// `r - 2·tolerance` never does.
pub fn bisect_min_radius<F: Fn(f64) -> f64>(
    risk: F,
    target: f64,
    bracket: Bracket,
) -> Result<f64, NumericsError> {
    assert!(target.is_finite());
    let mut lo = bracket.lo;
    if risk(lo) <= target {
        return Ok(lo);
    }
    let mut hi = bracket.hi;
    let mut doublings = 0;
    while risk(hi) > target {
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(NumericsError::BracketExhausted { doublings, hi });
        }
        hi *= 2.0;
    }
    // Invariant from here on: risk(lo) > target >= risk(hi).
    for _ in 0..bracket.max_iterations {
        if hi - lo <= bracket.tolerance {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if risk(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi - lo <= bracket.tolerance {
        Ok(hi)
    } else {
        Err(NumericsError::IterationBudget {
            tolerance: bracket.tolerance,
            max_iterations: bracket.max_iterations,
        })
    }
}
