//! Scalar positioning with measurement faults, and two ways to bound the error.
//!
//! A set of ranging stations each report a noisy measurement of the same
//! unknown scalar position. Any station may additionally carry a bias with
//! known prior probability, which makes the error distribution a Gaussian
//! mixture rather than a Gaussian. This crate provides:
//!
//! * exact Gaussian-mixture algebra ([`numerics`]),
//! * the measurement model and epoch sampler ([`model`]),
//! * a Bayesian algorithm that computes the exact position posterior by
//!   sum-product message passing and reads a protection level straight off
//!   the posterior ([`bayes`]),
//! * a classical solution-separation baseline that tests fault hypotheses
//!   against thresholds and bounds the error from hypothesis probabilities
//!   ([`baseline`]),
//! * a deterministic Monte-Carlo harness that compares the two
//!   ([`montecarlo`]).
//!
//! The protection level (PL) reported by either algorithm is a radius around
//! the position estimate that is supposed to contain the true position with
//! probability `1 - TIR`, where TIR is the target integrity risk. The point
//! of the simulation harness is to check how tight and how honest those radii
//! are.

pub mod baseline;
pub mod bayes;
pub mod model;
pub mod montecarlo;
pub mod numerics;

mod book;
