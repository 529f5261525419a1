//! Binomial point masses for the enumeration engine and the sampler.

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct BinomialPmf<T> {
    n: u64,
    p: T,
    weights: Vec<T>,
}

impl<T: Scalar> BinomialPmf<T> {
    /// Fails unless `n >= 1` and `0 < p < 1`.
    pub fn new(n: u64, p: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("binomial needs n >= 1".into()));
        }
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "binomial success probability must lie in (0, 1), got {}",
                p.as_f64()
            )));
        }
        let weights = T::binomial_weights(n, &p);
        Ok(Self { n, p, weights })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> &T {
        &self.p
    }

    /// `weights()[k]` is pr(X = k).
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Expectation of `f(X)`.
    pub fn expect<F: Fn(u64) -> T>(&self, f: F) -> T {
        self.weights
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, w)| acc + w.clone() * f(k as u64))
    }
}

impl<T: Real> BinomialPmf<T> {
    /// Cumulative distribution with the last entry pinned to one, so that
    /// inversion of any `u` in `[0, 1)` lands on a valid count.
    pub fn cdf(&self) -> Vec<T> {
        let mut acc = T::zero();
        let mut cdf: Vec<T> = self
            .weights
            .iter()
            .map(|w| {
                acc = acc + *w;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = T::one();
        }
        cdf
    }
}

/// Shorthand for [`BinomialPmf::new`].
pub fn binomial_pmf<T: Scalar>(n: u64, p: T) -> Result<BinomialPmf<T>> {
    BinomialPmf::new(n, p)
}

/// Smallest `k` with `u < cdf[k]`.
pub(crate) fn invert_cdf<T: Real>(cdf: &[T], u: T) -> u64 {
    let k = cdf.partition_point(|c| *c <= u);
    k.min(cdf.len() - 1) as u64
}
