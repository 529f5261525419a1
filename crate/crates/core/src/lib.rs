//! Attributable risk from case-control 2x2 tables.
//!
//! The crate provides the plug-in estimator `a/(a+c) - bc/((a+c)d)` and its
//! small-sample corrected counterpart with `d + 1` in the denominator, whose
//! bias under binomial sampling is `((1-q)/(1-p)) p^(n+1)`. The [`moments`]
//! module computes exact bias and variance of both by enumerating the
//! binomial outcome space, and [`simulation`] cross-checks them by seeded
//! Monte Carlo.
//!
//! Numerical code is generic over [`Scalar`]; the aliases below fix the
//! scalar to `f64` or to exact rationals.

pub mod binomial;
pub mod error;
pub mod measures;
pub mod moments;
pub mod scalar;
pub mod simulation;
pub mod table1;

pub use binomial::{binomial_pmf, BinomialPmf};
pub use error::{Error, Result};
pub use measures::{
    ar_star, ar_star_from_population, decomposition_term, estimate_corrected, estimate_standard,
    jewell_corrected_inverse, jewell_corrected_odds, jewell_corrected_or, levin_ar, odds_ratio,
    CaseControlParams, EstimateResult, EstimatorKind, PopulationParams, TwoByTwoTable,
};
pub use moments::{
    bias_corrected_closed_form, conditional_variances, covariance_decomposition_check,
    exact_moments_conditional, exact_moments_corrected, exact_moments_standard,
    expected_b_over_d_plus_1, min_controls, ConditionalVariances, CovarianceDecomposition,
    ExactMoments, ENUMERATION_CAP,
};
pub use scalar::{Real, Scalar};
pub use simulation::{convergence_sweep, run_simulation, SimConfig, SimReport, StandardErrors};
pub use table1::{round_half_away, table1, Table1Row};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type Params = CaseControlParams<f64>;
pub type ExactParams = CaseControlParams<Rational>;
pub type Population = PopulationParams<f64>;
pub type Estimate = EstimateResult<f64>;
pub type Moments = ExactMoments<f64>;
pub type ExactRationalMoments = ExactMoments<Rational>;
pub type Pmf = BinomialPmf<f64>;
pub type Simulation = SimConfig<f64>;
pub type Report = SimReport<f64>;
