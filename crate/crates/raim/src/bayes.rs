//! Exact Bayesian positioning by message passing on the measurement graph.
//!
//! The joint model factors over a star graph: one position node `x` in the
//! middle, one bias node `b_i` per station on the outside, and the
//! observation `y_i = x + b_i + n_i` tying each pair together. Because every
//! factor is Gaussian or a two-component Gaussian mixture, all messages stay
//! finite mixtures and the sum-product updates are closed form. One sweep
//! computes, per station:
//!
//! 1. the bias prior (delta at zero plus a wide Gaussian),
//! 2. the evidence the station sends to the position node,
//! 3. the consensus the position node sends back (prior times everyone
//!    else's evidence),
//! 4. the belief over the station's bias, and
//! 5. the posterior fault probability.
//!
//! The position posterior is the prior times all evidence, a mixture with one
//! component per fault pattern. [`MessagePassing::resolve`] then optionally
//! excludes stations whose fault posterior crosses a threshold, rebuilds the
//! posterior from the surviving evidence, and reads off the minimum-mean-
//! square estimate and the protection level.
//!
//! Weights are renormalized after every pairwise product. The fault
//! posterior is a ratio of two integrals against the same belief and the
//! position posterior is normalized at the end, so the intermediate scaling
//! cancels; what it buys is weights that stay near one instead of underflowing
//! after many products.

use crate::model::{bias_prior_mixture, ModelError, PositionPrior, Scenario};
use crate::numerics::{
    bisect_min_radius, gaussian_pdf, Bracket, GaussianMixture, NumericsError, WeightedGaussian,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BayesError {
    #[error("scenario has {stations} stations but {measurements} measurements were supplied")]
    ArityMismatch {
        stations: usize,
        measurements: usize,
    },
    #[error("every station was excluded; no measurement remains to position with")]
    AllExcluded,
    #[error(
        "station {index}: both fault hypotheses carry zero posterior mass; \
         the measurements are irreconcilable with the model at this precision"
    )]
    BothLambdaMassesZero { index: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A density over one scalar variable as carried between nodes: either a
/// proper (finite) Gaussian mixture or the improper flat function that a
/// node with nothing to say sends.
///
/// The flat message is what the position node sends down a branch when there
/// is exactly one station and no proper prior, and it is the absorbing
/// identity for products. Its "density" is the constant one, which is only
/// ever used inside ratios where the arbitrary constant cancels.
#[derive(Debug, Clone, PartialEq)]
pub enum Belief {
    Flat,
    Mixture(GaussianMixture),
}

impl Belief {
    /// Pointwise product with a mixture, renormalized. Ordering is
    /// `self`-major, so folding factors left to right indexes the result
    /// lexicographically by which component each factor contributed.
    pub fn times_mixture(&self, factor: &GaussianMixture) -> Result<Belief, NumericsError> {
        match self {
            Belief::Flat => Ok(Belief::Mixture(factor.clone())),
            Belief::Mixture(m) => Ok(Belief::Mixture(m.product(factor).normalized()?)),
        }
    }

    /// Density at `t`, up to the scale the carrier of this message fixes.
    pub fn density(&self, t: f64) -> f64 {
        match self {
            Belief::Flat => 1.0,
            Belief::Mixture(m) => m.eval(t),
        }
    }

    /// Integral of this message against `N(mean, variance)`, up to the same
    /// scale as [`Belief::density`].
    pub fn gaussian_mass(&self, mean: f64, variance: f64) -> f64 {
        match self {
            Belief::Flat => 1.0,
            Belief::Mixture(m) => m
                .components()
                .iter()
                .map(|c| c.weight * gaussian_pdf(mean, c.mean, variance + c.variance))
                .sum(),
        }
    }

    /// Applies [`GaussianMixture::shift_convolve`] componentwise; the flat
    /// message is invariant.
    pub fn shift_convolve(&self, offset: f64, extra_variance: f64, negate: bool) -> Belief {
        match self {
            Belief::Flat => Belief::Flat,
            Belief::Mixture(m) => Belief::Mixture(m.shift_convolve(offset, extra_variance, negate)),
        }
    }

    pub fn as_mixture(&self) -> Option<&GaussianMixture> {
        match self {
            Belief::Flat => None,
            Belief::Mixture(m) => Some(m),
        }
    }
}

/// How each branch's consensus message is assembled from the other branches'
/// evidence. Both orderings produce componentwise-identical messages up to
/// floating-point association, because the product indexes components in
/// `self`-major order and that order composes associatively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConsensusStrategy {
    /// Every branch folds the other branches' evidence from scratch:
    /// quadratically many products, trivially correct.
    #[default]
    Independent,
    /// Shared prefix and suffix products over the station order: linearly
    /// many products.
    PrefixSuffix,
}

/// The messages touching one station's branch of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchMessages {
    /// Prior mixture over the station's bias.
    pub bias_prior: GaussianMixture,
    /// What the measurement says about the position once the bias is
    /// integrated out: one component per bias-prior component.
    pub position_evidence: GaussianMixture,
    /// What everything else (prior and the other stations) says about the
    /// position.
    pub position_consensus: Belief,
    /// Posterior-proportional belief over this station's bias.
    pub bias_belief: Belief,
    /// Posterior probability that this station is faulted.
    pub fault_posterior: f64,
}

/// One full sweep of messages plus the all-stations position posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct MessagePassing {
    prior: Belief,
    pub branches: Vec<BranchMessages>,
    /// Normalized position posterior using every station.
    pub posterior: GaussianMixture,
}

/// The operational output: a point estimate with its protection level, the
/// per-station fault posteriors, and which stations were excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesResult {
    /// Normalized position posterior over the surviving stations.
    pub posterior: GaussianMixture,
    /// Posterior mean position.
    pub estimate: f64,
    /// Smallest radius around the estimate whose posterior miss probability
    /// is at most the target integrity risk.
    pub pl: f64,
    /// Fault posteriors from the full sweep, one per station, in station
    /// order. Exclusion does not rewrite them.
    pub fault_posteriors: Vec<f64>,
    /// Indices of excluded stations, ascending.
    pub excluded: Vec<usize>,
}

fn prior_belief(prior: PositionPrior) -> Belief {
    match prior {
        PositionPrior::ImproperFlat => Belief::Flat,
        PositionPrior::Gaussian { mean, variance } => {
            Belief::Mixture(GaussianMixture::new(vec![WeightedGaussian::new(
                1.0, mean, variance,
            )]))
        }
    }
}

fn fold_product<'a>(
    start: &Belief,
    factors: impl IntoIterator<Item = &'a GaussianMixture>,
) -> Result<Belief, NumericsError> {
    let mut acc = start.clone();
    for f in factors {
        acc = acc.times_mixture(f)?;
    }
    Ok(acc)
}

/// Runs one sweep with the default consensus strategy.
pub fn run_message_passing(
    scenario: &Scenario,
    measurements: &[f64],
) -> Result<MessagePassing, BayesError> {
    run_message_passing_with(scenario, measurements, ConsensusStrategy::default())
}

/// Runs one sweep of sum-product message passing.
///
/// The scenario is validated first (warnings are discarded here; surface them
/// at configuration time). Fault posteriors for stations with a degenerate
/// fault prior stay at that prior: an impossible event stays impossible and
/// a certain one stays certain, with no mass ratio to evaluate.
pub fn run_message_passing_with(
    scenario: &Scenario,
    measurements: &[f64],
    strategy: ConsensusStrategy,
) -> Result<MessagePassing, BayesError> {
    scenario.validate()?;
    let m = scenario.stations.len();
    if measurements.len() != m {
        return Err(BayesError::ArityMismatch {
            stations: m,
            measurements: measurements.len(),
        });
    }

    let prior = prior_belief(scenario.prior);
    let bias_priors: Vec<GaussianMixture> =
        scenario.stations.iter().map(bias_prior_mixture).collect();
    // Evidence for the position: p(y_i | x) as a mixture in x. Integrating
    // the bias out of N(y_i; x + b, noise_var) against each prior component
    // (w, m, v) gives (w, y_i - m, v + noise_var).
    let evidences: Vec<GaussianMixture> = bias_priors
        .iter()
        .zip(scenario.stations.iter().zip(measurements))
        .map(|(bp, (s, &y))| bp.shift_convolve(y, s.noise_std * s.noise_std, true))
        .collect();

    let consensus: Vec<Belief> = match strategy {
        ConsensusStrategy::Independent => (0..m)
            .map(|i| {
                fold_product(
                    &prior,
                    evidences
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, e)| e),
                )
            })
            .collect::<Result<_, NumericsError>>()?,
        ConsensusStrategy::PrefixSuffix => {
            let mut prefix = Vec::with_capacity(m + 1);
            prefix.push(prior.clone());
            for e in &evidences {
                prefix.push(prefix.last().unwrap().times_mixture(e)?);
            }
            let mut suffix = vec![Belief::Flat; m + 1];
            for j in (0..m).rev() {
                suffix[j] = match &suffix[j + 1] {
                    Belief::Flat => Belief::Mixture(evidences[j].clone()),
                    Belief::Mixture(rest) => {
                        Belief::Mixture(evidences[j].product(rest).normalized()?)
                    }
                };
            }
            (0..m)
                .map(|i| match prefix[i].as_mixture() {
                    None => Ok(suffix[i + 1].clone()),
                    Some(p) => match suffix[i + 1].as_mixture() {
                        None => Ok(prefix[i].clone()),
                        Some(s) => Ok(Belief::Mixture(p.product(s).normalized()?)),
                    },
                })
                .collect::<Result<_, NumericsError>>()?
        }
    };

    let mut branches = Vec::with_capacity(m);
    for (i, ((bias_prior, evidence), consensus)) in bias_priors
        .into_iter()
        .zip(evidences.iter())
        .zip(consensus)
        .enumerate()
    {
        let s = &scenario.stations[i];
        // Belief over the bias: the observation factor N(y_i; x + b, nv)
        // integrated against the consensus over x, as a function of b.
        let bias_belief =
            consensus.shift_convolve(measurements[i], s.noise_std * s.noise_std, true);
        let fault_posterior = if s.theta == 0.0 {
            0.0
        } else if s.theta == 1.0 {
            1.0
        } else {
            let mass_clean = bias_belief.density(0.0);
            let mass_faulty = bias_belief.gaussian_mass(s.bias_mean, s.bias_std * s.bias_std);
            let weighted_faulty = s.theta * mass_faulty;
            let total = weighted_faulty + (1.0 - s.theta) * mass_clean;
            if !(total > 0.0) || !total.is_finite() {
                return Err(BayesError::BothLambdaMassesZero { index: i });
            }
            weighted_faulty / total
        };
        branches.push(BranchMessages {
            bias_prior,
            position_evidence: evidence.clone(),
            position_consensus: consensus,
            bias_belief,
            fault_posterior,
        });
    }

    let posterior = match fold_product(&prior, &evidences)? {
        Belief::Mixture(mixture) => mixture.normalized()?,
        Belief::Flat => unreachable!("at least one station always contributes evidence"),
    };

    Ok(MessagePassing {
        prior,
        branches,
        posterior,
    })
}

impl MessagePassing {
    /// Turns the sweep into an operational answer.
    ///
    /// Stations whose fault posterior strictly exceeds `theta_threshold` are
    /// excluded and the position posterior is rebuilt from the remaining
    /// evidence; a threshold of one therefore never excludes anything. The
    /// estimate is the posterior mean and the protection level is the
    /// smallest radius around it holding the posterior miss probability at
    /// or below `tir`.
    pub fn resolve(&self, tir: f64, theta_threshold: f64) -> Result<BayesResult, BayesError> {
        assert!(tir > 0.0 && tir < 1.0, "tir {tir} outside (0, 1)");
        assert!(
            theta_threshold > 0.0 && theta_threshold <= 1.0,
            "theta_threshold {theta_threshold} outside (0, 1]"
        );
        let fault_posteriors: Vec<f64> = self.branches.iter().map(|b| b.fault_posterior).collect();
        let excluded: Vec<usize> = fault_posteriors
            .iter()
            .enumerate()
            .filter(|&(_, &t)| t > theta_threshold)
            .map(|(i, _)| i)
            .collect();
        if excluded.len() == self.branches.len() {
            return Err(BayesError::AllExcluded);
        }
        let posterior = if excluded.is_empty() {
            self.posterior.clone()
        } else {
            let survivors = self
                .branches
                .iter()
                .enumerate()
                .filter(|(i, _)| !excluded.contains(i))
                .map(|(_, b)| &b.position_evidence);
            match fold_product(&self.prior, survivors)? {
                Belief::Mixture(mixture) => mixture.normalized()?,
                Belief::Flat => return Err(BayesError::AllExcluded),
            }
        };
        let (estimate, pl) = estimate_and_pl(&posterior, tir)?;
        Ok(BayesResult {
            posterior,
            estimate,
            pl,
            fault_posteriors,
            excluded,
        })
    }
}

/// Posterior mean and protection level of a normalized position posterior.
///
/// The protection level is found by interval halving on the posterior risk
/// of the symmetric interval around the mean, to a radius tolerance of 1e-6.
/// The initial upper end covers every component's mean offset plus ten
/// standard deviations, and expands if even that is not enough.
pub fn estimate_and_pl(posterior: &GaussianMixture, tir: f64) -> Result<(f64, f64), NumericsError> {
    let estimate = posterior.mean()?;
    let mut spread = 0.0f64;
    for c in posterior.components() {
        spread = spread.max(c.variance.sqrt() + (c.mean - estimate).abs());
    }
    let bracket = Bracket::new(0.0, (10.0 * spread).max(1e-9), 1e-6, 200);
    let pl = bisect_min_radius(|r| posterior.interval_risk(estimate, r), tir, bracket)?;
    Ok((estimate, pl))
}
