//! Exact moments of the two attributable-risk estimators.
//!
//! Both estimators share the shape `x(A) - y(A) g(B)` with `x = A/m`,
//! `y = C/m` and `g` a function of the exposed controls only. Since `A` and
//! `B` are independent the expectation factorises into one-dimensional sums;
//! second moments are taken over the full `(m+1) x (n+1)` outcome grid.

use crate::binomial::BinomialPmf;
use crate::error::{Error, Result};
use crate::measures::{ar_star, decomposition_term, CaseControlParams, EstimatorKind, TwoByTwoTable};
use crate::scalar::{Real, Scalar};

/// Largest joint outcome grid the enumeration will walk.
pub const ENUMERATION_CAP: u128 = 100_000_000;

/// Up to this many controls `E[B/(D+1)]` is evaluated as the finite geometric
/// sum `p + p^2 + ... + p^n`, which is exact at `n = 1`.
const GEOMETRIC_FORM_MAX_TRIALS: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments<T> {
    pub expectation: T,
    /// `expectation - AR*`.
    pub bias: T,
    pub variance: T,
    /// Whether the moments are conditional on `D != 0` (at least one
    /// unexposed control).
    pub conditioned_on_d_nonzero: bool,
}

/// Variances of both estimators given `D != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalVariances<T> {
    pub corrected: T,
    pub standard: T,
}

/// Terms of `var(std) = var(corrected) + var(term) + 2 cov(corrected, term)`,
/// all conditional on `D != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceDecomposition<T> {
    pub covariance: T,
    pub var_corrected: T,
    pub var_standard: T,
    pub var_correction: T,
    /// `var_standard - (var_corrected + var_correction + 2 covariance)`.
    pub residual: T,
}

fn check_probability<T: Scalar>(name: &str, value: &T) -> Result<()> {
    if *value > T::zero() && *value < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie strictly between 0 and 1, got {}",
            value.as_f64()
        )))
    }
}

fn check_cap(m: u64, n: u64) -> Result<()> {
    let outcomes = (u128::from(m) + 1) * (u128::from(n) + 1);
    if outcomes > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            outcomes,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// `E[B/(D+1)] = p/(1-p) - p^(n+1)/(1-p)` for `B ~ Bin(n, p)`, `D = n - B`.
pub fn expected_b_over_d_plus_1<T: Scalar>(n: u64, p: &T) -> Result<T> {
    check_probability("p", p)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if n <= GEOMETRIC_FORM_MAX_TRIALS {
        let mut acc = T::one();
        for _ in 1..n {
            acc = T::one() + p.clone() * acc;
        }
        return Ok(p.clone() * acc);
    }
    let q = T::one() - p.clone();
    let tail = num_traits::pow(p.clone(), (n + 1) as usize);
    Ok(p.clone() / q.clone() - tail / q)
}

/// Bias of the corrected estimator, `((1-q)/(1-p)) p^(n+1)`. Does not depend
/// on the number of cases.
pub fn bias_corrected_closed_form<T: Scalar>(params: &CaseControlParams<T>) -> T {
    let q = params.q().clone();
    let p = params.p().clone();
    (T::one() - q) / (T::one() - p.clone()) * num_traits::pow(p, (params.n() + 1) as usize)
}

struct CaseSide<T> {
    weights: Vec<T>,
    /// `a/m`
    exposed_share: Vec<T>,
    /// `c/m`
    unexposed_share: Vec<T>,
}

impl<T: Scalar> CaseSide<T> {
    fn new(params: &CaseControlParams<T>) -> Result<Self> {
        let m = params.m();
        let pmf = BinomialPmf::new(m, params.q().clone())?;
        let total = T::from_count(m);
        let exposed_share = (0..=m).map(|a| T::from_count(a) / total.clone()).collect();
        let unexposed_share = (0..=m)
            .map(|a| T::from_count(m - a) / total.clone())
            .collect();
        Ok(Self {
            weights: pmf.weights().to_vec(),
            exposed_share,
            unexposed_share,
        })
    }
}

/// Control-side weights, renormalised by `1/(1 - p^n)` and truncated to
/// `b < n` when conditioning on `D != 0`.
fn control_weights<T: Scalar>(params: &CaseControlParams<T>, conditioned: bool) -> Result<Vec<T>> {
    let n = params.n();
    let pmf = BinomialPmf::new(n, params.p().clone())?;
    let mut weights = pmf.weights().to_vec();
    if conditioned {
        let keep = T::one() - num_traits::pow(params.p().clone(), n as usize);
        weights.truncate(n as usize);
        for w in &mut weights {
            *w = w.clone() / keep.clone();
        }
    }
    Ok(weights)
}

/// `g(b)` for the chosen estimator; the standard one uses the corrected
/// denominator at `b = n`.
fn control_ratio<T: Scalar>(kind: EstimatorKind, n: u64, b: u64) -> T {
    let d = n - b;
    let denominator = match kind {
        EstimatorKind::Corrected => d + 1,
        EstimatorKind::Standard if d == 0 => 1,
        EstimatorKind::Standard => d,
    };
    T::from_count(b) / T::from_count(denominator)
}

fn weighted_sum<T: Scalar>(weights: &[T], values: &[T]) -> T {
    weights
        .iter()
        .zip(values)
        .fold(T::zero(), |acc, (w, v)| acc + w.clone() * v.clone())
}

fn moments<T: Scalar>(
    params: &CaseControlParams<T>,
    kind: EstimatorKind,
    conditioned: bool,
) -> Result<ExactMoments<T>> {
    check_cap(params.m(), params.n())?;
    let cases = CaseSide::new(params)?;
    let control_w = control_weights(params, conditioned)?;
    let ratios: Vec<T> = (0..control_w.len() as u64)
        .map(|b| control_ratio(kind, params.n(), b))
        .collect();

    let expectation = weighted_sum(&cases.weights, &cases.exposed_share)
        - weighted_sum(&cases.weights, &cases.unexposed_share) * weighted_sum(&control_w, &ratios);

    let mut variance = T::zero();
    for ((wa, x), y) in cases
        .weights
        .iter()
        .zip(&cases.exposed_share)
        .zip(&cases.unexposed_share)
    {
        let inner = control_w.iter().zip(&ratios).fold(T::zero(), |acc, (wb, g)| {
            let dev = x.clone() - y.clone() * g.clone() - expectation.clone();
            acc + wb.clone() * dev.clone() * dev
        });
        variance = variance + wa.clone() * inner;
    }

    Ok(ExactMoments {
        bias: expectation.clone() - ar_star(params),
        expectation,
        variance,
        conditioned_on_d_nonzero: conditioned,
    })
}

/// Exact moments of the corrected estimator over all outcomes.
pub fn exact_moments_corrected<T: Scalar>(params: &CaseControlParams<T>) -> Result<ExactMoments<T>> {
    moments(params, EstimatorKind::Corrected, false)
}

/// Exact moments of the standard estimator over all outcomes, taking the
/// corrected value on the `D = 0` outcome.
pub fn exact_moments_standard<T: Scalar>(params: &CaseControlParams<T>) -> Result<ExactMoments<T>> {
    moments(params, EstimatorKind::Standard, false)
}

/// Exact moments of either estimator given `D != 0`.
pub fn exact_moments_conditional<T: Scalar>(
    params: &CaseControlParams<T>,
    kind: EstimatorKind,
) -> Result<ExactMoments<T>> {
    moments(params, kind, true)
}

pub fn conditional_variances<T: Scalar>(
    params: &CaseControlParams<T>,
) -> Result<ConditionalVariances<T>> {
    Ok(ConditionalVariances {
        corrected: moments(params, EstimatorKind::Corrected, true)?.variance,
        standard: moments(params, EstimatorKind::Standard, true)?.variance,
    })
}

/// Conditional on `D != 0`, splits the standard estimator into the corrected
/// one plus [`decomposition_term`] and returns every piece of the variance
/// decomposition. Each piece is enumerated directly, so the residual measures
/// how well the pieces add up.
pub fn covariance_decomposition_check<T: Scalar>(
    params: &CaseControlParams<T>,
) -> Result<CovarianceDecomposition<T>> {
    check_cap(params.m(), params.n())?;
    let (m, n) = (params.m(), params.n());
    let case_w = BinomialPmf::new(m, params.q().clone())?.weights().to_vec();
    let control_w = control_weights(params, true)?;

    struct Cell<T> {
        weight: T,
        corrected: T,
        standard: T,
        term: T,
    }
    let mut cells = Vec::with_capacity(case_w.len() * control_w.len());
    for (a, wa) in case_w.iter().enumerate() {
        for (b, wb) in control_w.iter().enumerate() {
            let table = TwoByTwoTable::new(a as u64, b as u64, m - a as u64, n - b as u64)?;
            let standard = crate::measures::estimate_standard::<T>(&table);
            debug_assert!(standard.defined);
            cells.push(Cell {
                weight: wa.clone() * wb.clone(),
                corrected: crate::measures::estimate_corrected::<T>(&table).value,
                standard: standard.value,
                term: decomposition_term(&table).expect("d >= 1 under conditioning"),
            });
        }
    }

    let mean = |f: &dyn Fn(&Cell<T>) -> T| {
        cells
            .iter()
            .fold(T::zero(), |acc, c| acc + c.weight.clone() * f(c))
    };
    let mean_corrected = mean(&|c| c.corrected.clone());
    let mean_standard = mean(&|c| c.standard.clone());
    let mean_term = mean(&|c| c.term.clone());

    let var_corrected = mean(&|c| {
        let dev = c.corrected.clone() - mean_corrected.clone();
        dev.clone() * dev
    });
    let var_standard = mean(&|c| {
        let dev = c.standard.clone() - mean_standard.clone();
        dev.clone() * dev
    });
    let var_correction = mean(&|c| {
        let dev = c.term.clone() - mean_term.clone();
        dev.clone() * dev
    });
    let covariance = mean(&|c| {
        (c.corrected.clone() - mean_corrected.clone()) * (c.term.clone() - mean_term.clone())
    });
    let two = T::one() + T::one();
    let residual = var_standard.clone()
        - (var_corrected.clone() + var_correction.clone() + two * covariance.clone());

    Ok(CovarianceDecomposition {
        covariance,
        var_corrected,
        var_standard,
        var_correction,
        residual,
    })
}

/// Smallest number of controls `n >= 1` whose corrected-estimator bias
/// `((1-q)/(1-p)) p^(n+1)` is strictly below `tol`.
pub fn min_controls<T: Real>(q: T, p: T, tol: T) -> Result<u64> {
    check_probability("q", &q)?;
    check_probability("p", &p)?;
    if !(tol > T::zero()) || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive and finite, got {}",
            tol.as_f64()
        )));
    }
    let scale = (T::one() - q) / (T::one() - p);
    let bound = |n: u64| -> T {
        let exponent = n + 1;
        if exponent <= i32::MAX as u64 {
            scale * p.powi(exponent as i32)
        } else {
            scale * p.powf(T::from_count(exponent))
        }
    };

    // Start from the real-valued crossing point and walk to the integer one.
    let crossing = ((tol / scale).ln() / p.ln() - T::one()).floor();
    let mut n = if crossing.is_finite() && crossing > T::one() {
        crossing.to_u64().ok_or_else(|| {
            Error::InvalidParameter("required number of controls does not fit in u64".into())
        })?
    } else {
        1
    };
    while n > 1 && bound(n - 1) < tol {
        n -= 1;
    }
    while bound(n) >= tol {
        n += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{estimate_corrected, estimate_standard};
    use approx::assert_abs_diff_eq;
    use num_rational::BigRational;

    fn params(q: f64, p: f64, m: u64, n: u64) -> CaseControlParams<f64> {
        CaseControlParams::new(q, p, m, n).unwrap()
    }

    fn rparams(q: (u64, u64), p: (u64, u64), m: u64, n: u64) -> CaseControlParams<BigRational> {
        CaseControlParams::new(
            BigRational::from_ratio(q.0, q.1),
            BigRational::from_ratio(p.0, p.1),
            m,
            n,
        )
        .unwrap()
    }

    /// Brute force over the joint grid through the public estimators.
    fn brute_force<T: Scalar>(
        params: &CaseControlParams<T>,
        f: impl Fn(&TwoByTwoTable) -> T,
    ) -> T {
        let wa = BinomialPmf::new(params.m(), params.q().clone()).unwrap();
        let wb = BinomialPmf::new(params.n(), params.p().clone()).unwrap();
        let mut acc = T::zero();
        for (a, pa) in wa.weights().iter().enumerate() {
            for (b, pb) in wb.weights().iter().enumerate() {
                let a = a as u64;
                let b = b as u64;
                let t = TwoByTwoTable::new(a, b, params.m() - a, params.n() - b).unwrap();
                acc = acc + pa.clone() * pb.clone() * f(&t);
            }
        }
        acc
    }

    #[test]
    fn b_over_d_plus_1_examples() {
        for &p in &[0.01, 0.3, 0.77, 0.99] {
            assert_eq!(expected_b_over_d_plus_1(1, &p).unwrap(), p);
        }
        let v = expected_b_over_d_plus_1(10, &0.8).unwrap();
        assert_abs_diff_eq!(v, 4.0 - 0.8f64.powi(11) / 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 3.5705032704, epsilon = 1e-10);
        let v = expected_b_over_d_plus_1(10, &0.2).unwrap();
        assert_abs_diff_eq!(v, 0.25 - 0.2f64.powi(11) / 0.8, epsilon = 1e-15);
    }

    #[test]
    fn b_over_d_plus_1_is_exact_over_rationals() {
        for n in [1u64, 7, 64, 65, 90] {
            let p = BigRational::from_ratio(3, 7);
            let pmf = BinomialPmf::new(n, p.clone()).unwrap();
            let direct = pmf.expect(|k| BigRational::from_ratio(k, n - k + 1));
            assert_eq!(expected_b_over_d_plus_1(n, &p).unwrap(), direct, "n = {n}");
        }
    }

    #[test]
    fn closed_form_bias_examples() {
        assert_abs_diff_eq!(
            bias_corrected_closed_form(&params(0.2, 0.8, 3, 10)),
            0.34359738368,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            bias_corrected_closed_form(&params(0.8, 0.8, 10, 10)),
            0.08589934592,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            bias_corrected_closed_form(&params(0.6, 0.6, 10, 10)),
            0.6f64.powi(11),
            epsilon = 1e-15
        );
    }

    #[test]
    fn corrected_bias_examples() {
        let b = |q, p| exact_moments_corrected(&params(q, p, 10, 10)).unwrap().bias;
        assert_abs_diff_eq!(b(0.2, 0.4), 0.0001, epsilon = 5e-5);
        assert_abs_diff_eq!(b(0.4, 0.6), 0.0054, epsilon = 5e-5);
        assert_abs_diff_eq!(b(0.8, 0.2), 0.0000, epsilon = 5e-5);
    }

    #[test]
    fn standard_bias_examples() {
        let b = |q, p| exact_moments_standard(&params(q, p, 10, 10)).unwrap().bias;
        assert_abs_diff_eq!(b(0.2, 0.4), -0.1216, epsilon = 5e-5);
        assert_abs_diff_eq!(b(0.6, 0.8), -0.5320, epsilon = 5e-5);
        assert_abs_diff_eq!(b(0.8, 0.2), -0.0074, epsilon = 5e-5);
    }

    #[test]
    fn enumeration_matches_brute_force_over_rationals() {
        let pr = rparams((1, 3), (2, 5), 4, 5);
        let corrected = exact_moments_corrected(&pr).unwrap();
        let standard = exact_moments_standard(&pr).unwrap();
        let mean_c = brute_force(&pr, |t| estimate_corrected::<BigRational>(t).value);
        let mean_s = brute_force(&pr, |t| estimate_standard::<BigRational>(t).value);
        assert_eq!(corrected.expectation, mean_c);
        assert_eq!(standard.expectation, mean_s);
        let second_c = brute_force(&pr, |t| {
            let v = estimate_corrected::<BigRational>(t).value;
            v.clone() * v
        });
        assert_eq!(corrected.variance, second_c - mean_c.clone() * mean_c);
    }

    #[test]
    fn corrected_bias_is_exactly_the_closed_form() {
        for (q, p, m, n) in [((1, 5), (4, 5), 10, 10), ((1, 2), (1, 3), 1, 1), ((9, 10), (1, 20), 7, 3)] {
            let pr = rparams(q, p, m, n);
            assert_eq!(
                exact_moments_corrected(&pr).unwrap().bias,
                bias_corrected_closed_form(&pr)
            );
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = exact_moments_corrected(&params(0.5, 0.5, 20_000, 20_000)).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
        assert!(covariance_decomposition_check(&params(0.5, 0.5, 10_000, 10_000)).is_err());
    }

    #[test]
    fn conditional_variance_examples() {
        for (q, p, m, n) in [(0.5, 0.5, 10, 10), (0.2, 0.8, 10, 10)] {
            let v = conditional_variances(&params(q, p, m, n)).unwrap();
            assert!(v.corrected < v.standard, "{v:?}");
        }
    }

    #[test]
    fn conditional_variance_goldens() {
        // Frozen from an exact-fraction enumeration written outside this crate.
        let exact = conditional_variances(&rparams((1, 2), (1, 2), 10, 10)).unwrap();
        let float = conditional_variances(&params(0.5, 0.5, 10, 10)).unwrap();
        assert_abs_diff_eq!(float.corrected, exact.corrected.as_f64(), epsilon = 1e-14);
        assert_abs_diff_eq!(float.standard, exact.standard.as_f64(), epsilon = 1e-14);
        assert_abs_diff_eq!(float.corrected, 0.2205493069800491, epsilon = 1e-13);
        assert_abs_diff_eq!(float.standard, 0.486302887051509, epsilon = 1e-13);

        let float = conditional_variances(&params(0.2, 0.8, 10, 10)).unwrap();
        assert_abs_diff_eq!(float.corrected, 1.2325734770595411, epsilon = 1e-12);
        assert_abs_diff_eq!(float.standard, 6.1206034151376745, epsilon = 1e-12);
    }

    #[test]
    fn single_control_gives_equal_conditional_variances() {
        // D != 0 with n = 1 forces B = 0, where both estimators coincide.
        let v = conditional_variances(&rparams((1, 2), (1, 2), 1, 1)).unwrap();
        assert_eq!(v.corrected, v.standard);
    }

    #[test]
    fn covariance_examples() {
        for (q, p, m, n) in [(0.5, 0.5, 10, 10), (0.2, 0.8, 5, 5)] {
            let dec = covariance_decomposition_check(&params(q, p, m, n)).unwrap();
            assert!(dec.covariance >= 0.0, "{dec:?}");
            assert!(dec.residual.abs() <= 1e-10, "{dec:?}");
        }
        let exact = covariance_decomposition_check(&rparams((1, 2), (1, 2), 6, 4)).unwrap();
        assert_eq!(exact.residual, BigRational::from_count(0));
    }

    #[test]
    fn min_controls_examples() {
        assert_eq!(min_controls(0.5, 0.5, 0.005).unwrap(), 7);
        assert_eq!(min_controls(0.2, 0.8, 0.005).unwrap(), 29);
        assert_eq!(min_controls(0.3, 0.3, 0.1).unwrap(), 1);
        // strict inequality: a bound equal to tol does not qualify
        assert_eq!(min_controls(0.5, 0.5, 0.25).unwrap(), 2);
        assert_eq!(min_controls(0.5, 0.5, 2.0).unwrap(), 1);
        assert!(min_controls(0.5, 0.5, 0.0).is_err());
        assert!(min_controls(0.5, 1.0, 0.1).is_err());
    }

    #[test]
    fn min_controls_handles_extreme_tolerances() {
        let n = min_controls(0.5, 0.999, 1e-12).unwrap();
        let bound = |n: u64| 0.5 / 0.001 * 0.999f64.powi(n as i32 + 1);
        assert!(bound(n) < 1e-12 && bound(n - 1) >= 1e-12);
    }
}
