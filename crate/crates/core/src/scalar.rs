//! Scalar abstraction shared by the estimators and the exact-moment engine.
//!
//! Everything that only needs field arithmetic is written against [`Scalar`],
//! which is implemented for `f32`, `f64` and [`BigRational`]. Running the same
//! code over exact rationals gives an independent check of the floating point
//! results. Operations that need transcendental functions or a notion of
//! machine precision (sampling, threshold searches) require [`Real`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, Num, Signed, ToPrimitive};

/// Field-like scalar used throughout the crate.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// Converts an exact count.
    fn from_count(n: u64) -> Self;

    /// `num / den`, exact for rational scalars.
    fn from_ratio(num: u64, den: u64) -> Self;

    /// Nearest `f64`, for display and tolerance checks.
    fn as_f64(&self) -> f64;

    /// Point masses of Bin(`n`, `p`) for `k = 0..=n`. Callers validate `p`.
    fn binomial_weights(n: u64, p: &Self) -> Vec<Self> {
        exact_binomial_weights(n, p)
    }
}

/// Floating point scalars.
pub trait Real: Scalar + Float {}

impl<T: Scalar + Float> Real for T {}

/// `C(n,k) p^k (1-p)^(n-k)` with the coefficient built by the multiplicative
/// recurrence `C(n,k+1) = C(n,k) (n-k)/(k+1)`. Exact over rationals.
pub(crate) fn exact_binomial_weights<T: Scalar>(n: u64, p: &T) -> Vec<T> {
    let len = n as usize + 1;
    let q = T::one() - p.clone();
    let mut p_pow = Vec::with_capacity(len);
    let mut q_pow = Vec::with_capacity(len);
    p_pow.push(T::one());
    q_pow.push(T::one());
    for k in 1..len {
        p_pow.push(p_pow[k - 1].clone() * p.clone());
        q_pow.push(q_pow[k - 1].clone() * q.clone());
    }
    let mut coef = T::one();
    let mut weights = Vec::with_capacity(len);
    for k in 0..len {
        weights.push(coef.clone() * p_pow[k].clone() * q_pow[len - 1 - k].clone());
        coef = coef * T::from_count(n - k as u64) / T::from_count(k as u64 + 1);
    }
    weights
}

/// Largest `n` for which `C(n, k)` is formed exactly in integers before the
/// conversion to floating point.
pub const EXACT_COEFFICIENT_MAX_TRIALS: u64 = 60;

fn float_binomial_weights(n: u64, p: f64) -> Vec<f64> {
    if n <= EXACT_COEFFICIENT_MAX_TRIALS {
        let q = 1.0 - p;
        let mut coef: u128 = 1;
        let mut weights = Vec::with_capacity(n as usize + 1);
        for k in 0..=n {
            weights.push(coef as f64 * p.powi(k as i32) * q.powi((n - k) as i32));
            coef = coef * u128::from(n - k) / u128::from(k + 1);
        }
        weights
    } else {
        mode_anchored_weights(n, p)
    }
}

/// Ratio recurrence outward from the mode followed by normalisation. Relative
/// error grows with the distance from the mode only, so the bulk of the mass
/// stays accurate for large `n`; far tails underflow to zero.
fn mode_anchored_weights(n: u64, p: f64) -> Vec<f64> {
    let len = n as usize + 1;
    let odds = p / (1.0 - p);
    let mode = (((n + 1) as f64) * p).floor().min(n as f64) as usize;
    let mut weights = vec![0.0; len];
    weights[mode] = 1.0;
    for k in mode..len - 1 {
        let ratio = (n as f64 - k as f64) / (k as f64 + 1.0) * odds;
        weights[k + 1] = weights[k] * ratio;
    }
    for k in (1..=mode).rev() {
        let ratio = k as f64 / (n as f64 - k as f64 + 1.0) / odds;
        weights[k - 1] = weights[k] * ratio;
    }
    let total = neumaier_sum(weights.iter().copied());
    for w in &mut weights {
        *w /= total;
    }
    weights
}

/// Compensated summation.
pub fn neumaier_sum<T: Float, I: IntoIterator<Item = T>>(values: I) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry = carry + ((sum - t) + v);
        } else {
            carry = carry + ((v - t) + sum);
        }
        sum = t;
    }
    sum + carry
}

impl Scalar for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn binomial_weights(n: u64, p: &Self) -> Vec<Self> {
        float_binomial_weights(n, *p)
    }
}

impl Scalar for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn as_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn binomial_weights(n: u64, p: &Self) -> Vec<Self> {
        float_binomial_weights(n, f64::from(*p))
            .into_iter()
            .map(|w| w as f32)
            .collect()
    }
}

impl Scalar for BigRational {
    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}
