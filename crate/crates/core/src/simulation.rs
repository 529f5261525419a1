//! Seeded Monte Carlo harness for the two estimators.
//!
//! Replication `i` draws its exposed-case and exposed-control counts by
//! inversion from the ChaCha8 keystream at word offset `4 i`, so every
//! replication is a pure function of `(seed, i)`. Draws are generated in
//! parallel blocks and reduced sequentially in replication order, which makes
//! reports bitwise reproducible whatever the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::binomial::{invert_cdf, BinomialPmf};
use crate::error::{Error, Result};
use crate::measures::{ar_star, estimate_corrected, estimate_standard, CaseControlParams, TwoByTwoTable};
use crate::scalar::{neumaier_sum, Real};

/// Two 64-bit uniforms per replication, each taking two 32-bit words.
const WORDS_PER_REPLICATION: u128 = 4;
const BLOCK: u64 = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub params: CaseControlParams<T>,
    pub replications: u64,
    pub seed: u64,
    /// Discard draws with `D = 0` instead of applying the fallback.
    pub condition_on_d_nonzero: bool,
}

impl<T: Real> SimConfig<T> {
    pub fn new(
        params: CaseControlParams<T>,
        replications: u64,
        seed: u64,
        condition_on_d_nonzero: bool,
    ) -> Result<Self> {
        let config = Self {
            params,
            replications,
            seed,
            condition_on_d_nonzero,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Monte Carlo standard errors; `None` when fewer than two draws were kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardErrors<T> {
    pub bias_standard: Option<T>,
    pub bias_corrected: Option<T>,
    pub var_standard: Option<T>,
    pub var_corrected: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport<T> {
    pub replications: u64,
    pub conditioned_on_d_nonzero: bool,
    /// Draws that entered the statistics.
    pub effective_replications: u64,
    /// Draws dropped for `D = 0`; zero unless conditioning.
    pub discarded_d_zero: u64,
    /// Draws with `D = 0`, whether or not they were discarded.
    pub d_zero_draws: u64,
    pub empirical_bias_standard: T,
    pub empirical_bias_corrected: T,
    /// Sample variance with the `N - 1` denominator; `None` for a single draw.
    pub empirical_var_standard: Option<T>,
    pub empirical_var_corrected: Option<T>,
    pub standard_errors: StandardErrors<T>,
}

#[derive(Debug, Clone, Copy)]
struct SampleSummary<T> {
    mean: T,
    variance: Option<T>,
    se_mean: Option<T>,
    se_variance: Option<T>,
}

fn summarize<T: Real>(values: &[T]) -> SampleSummary<T> {
    let count = T::from_count(values.len() as u64);
    let mean = neumaier_sum(values.iter().copied()) / count;
    if values.len() < 2 {
        return SampleSummary {
            mean,
            variance: None,
            se_mean: None,
            se_variance: None,
        };
    }
    let sq = neumaier_sum(values.iter().map(|&v| (v - mean) * (v - mean)));
    let quad = neumaier_sum(values.iter().map(|&v| (v - mean).powi(4)));
    let one = T::one();
    let three = T::from_count(3);
    let variance = sq / (count - one);
    let fourth = quad / count;
    // var(s^2) ~ (mu4 - sigma^4 (N-3)/(N-1)) / N
    let var_of_variance = (fourth - variance * variance * (count - three) / (count - one)) / count;
    SampleSummary {
        mean,
        variance: Some(variance),
        se_mean: Some((variance / count).sqrt()),
        se_variance: Some(var_of_variance.max(T::zero()).sqrt()),
    }
}

/// Exposed-case and exposed-control counts for replications `0..count`.
fn draw_outcomes<T: Real>(params: &CaseControlParams<T>, count: u64, seed: u64) -> Result<Vec<(u64, u64)>> {
    let case_cdf = BinomialPmf::new(params.m(), *params.q())?.cdf();
    let control_cdf = BinomialPmf::new(params.n(), *params.p())?.cdf();
    let uniform = |rng: &mut ChaCha8Rng| -> T {
        let u: f64 = rng.random();
        // f32 can round u up to 1.0; keep it inside [0, 1)
        let u = <T as num_traits::NumCast>::from(u).unwrap_or_else(T::zero);
        if u >= T::one() {
            T::one() - T::epsilon()
        } else {
            u
        }
    };
    let blocks: Vec<Vec<(u64, u64)>> = (0..count.div_ceil(BLOCK))
        .into_par_iter()
        .map(|block| {
            let start = block * BLOCK;
            let end = (start + BLOCK).min(count);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_word_pos(u128::from(start) * WORDS_PER_REPLICATION);
            (start..end)
                .map(|_| {
                    let a = invert_cdf(&case_cdf, uniform(&mut rng));
                    let b = invert_cdf(&control_cdf, uniform(&mut rng));
                    (a, b)
                })
                .collect()
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

fn report<T: Real>(
    params: &CaseControlParams<T>,
    outcomes: &[(u64, u64)],
    conditioned: bool,
) -> Result<SimReport<T>> {
    let (m, n) = (params.m(), params.n());
    let mut standard = Vec::with_capacity(outcomes.len());
    let mut corrected = Vec::with_capacity(outcomes.len());
    let mut d_zero_draws = 0;
    for &(a, b) in outcomes {
        if b == n {
            d_zero_draws += 1;
            if conditioned {
                continue;
            }
        }
        let table = TwoByTwoTable::new(a, b, m - a, n - b)?;
        standard.push(estimate_standard::<T>(&table).value);
        corrected.push(estimate_corrected::<T>(&table).value);
    }
    if corrected.is_empty() {
        return Err(Error::DegenerateConditioning {
            replications: outcomes.len() as u64,
        });
    }

    let target = ar_star(params);
    let s = summarize(&standard);
    let c = summarize(&corrected);
    Ok(SimReport {
        replications: outcomes.len() as u64,
        conditioned_on_d_nonzero: conditioned,
        effective_replications: corrected.len() as u64,
        discarded_d_zero: if conditioned { d_zero_draws } else { 0 },
        d_zero_draws,
        empirical_bias_standard: s.mean - target,
        empirical_bias_corrected: c.mean - target,
        empirical_var_standard: s.variance,
        empirical_var_corrected: c.variance,
        standard_errors: StandardErrors {
            bias_standard: s.se_mean,
            bias_corrected: c.se_mean,
            var_standard: s.se_variance,
            var_corrected: c.se_variance,
        },
    })
}

pub fn run_simulation<T: Real>(config: &SimConfig<T>) -> Result<SimReport<T>> {
    config.validate()?;
    let outcomes = draw_outcomes(&config.params, config.replications, config.seed)?;
    report(&config.params, &outcomes, config.condition_on_d_nonzero)
}

/// One report per checkpoint, each computed from the first `checkpoint`
/// replications of the stream `run_simulation` would use.
pub fn convergence_sweep<T: Real>(config: &SimConfig<T>, checkpoints: &[u64]) -> Result<Vec<SimReport<T>>> {
    config.validate()?;
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("checkpoints must be ascending".into()));
    }
    let Some(&last) = checkpoints.last() else {
        return Ok(Vec::new());
    };
    if checkpoints[0] == 0 || last > config.replications {
        return Err(Error::InvalidParameter(format!(
            "checkpoints must lie in 1..={}",
            config.replications
        )));
    }
    let outcomes = draw_outcomes(&config.params, last, config.seed)?;
    checkpoints
        .iter()
        .map(|&k| report(&config.params, &outcomes[..k as usize], config.condition_on_d_nonzero))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(q: f64, p: f64, m: u64, n: u64, reps: u64, cond: bool) -> SimConfig<f64> {
        SimConfig::new(CaseControlParams::new(q, p, m, n).unwrap(), reps, 7, cond).unwrap()
    }

    #[test]
    fn blocks_reproduce_one_sequential_stream() {
        let params = CaseControlParams::new(0.3, 0.6, 12, 9).unwrap();
        let reps = 2 * BLOCK + 17;
        let blocked = draw_outcomes(&params, reps, 99).unwrap();
        let case_cdf = BinomialPmf::new(12, 0.3).unwrap().cdf();
        let control_cdf = BinomialPmf::new(9, 0.6).unwrap().cdf();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (i, &(a, b)) in blocked.iter().enumerate() {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            assert_eq!((a, b), (invert_cdf(&case_cdf, u), invert_cdf(&control_cdf, v)), "rep {i}");
        }
    }

    #[test]
    fn zero_replications_rejected() {
        let params = CaseControlParams::new(0.3, 0.6, 2, 2).unwrap();
        assert!(SimConfig::new(params, 0, 1, false).is_err());
    }

    #[test]
    fn single_draw_has_no_variance() {
        let r = run_simulation(&config(0.4, 0.4, 5, 5, 1, false)).unwrap();
        assert_eq!(r.effective_replications, 1);
        assert!(r.empirical_var_corrected.is_none());
        assert!(r.standard_errors.bias_corrected.is_none());
    }

    #[test]
    fn conditioning_can_discard_everything() {
        // p^n = 0.999 so a handful of draws almost surely all have D = 0
        let r = run_simulation(&config(0.5, 0.999, 3, 1, 5, true));
        assert!(matches!(r, Err(Error::DegenerateConditioning { replications: 5 })));
    }

    #[test]
    fn counts_add_up() {
        let r = run_simulation(&config(0.5, 0.7, 4, 2, 5000, true)).unwrap();
        assert_eq!(r.effective_replications + r.discarded_d_zero, 5000);
        let r = run_simulation(&config(0.5, 0.7, 4, 2, 5000, false)).unwrap();
        assert_eq!(r.effective_replications, 5000);
        assert_eq!(r.discarded_d_zero, 0);
        assert!(r.d_zero_draws > 0);
    }

    #[test]
    fn sweep_edges() {
        let c = config(0.2, 0.4, 10, 10, 1000, false);
        assert!(convergence_sweep(&c, &[]).unwrap().is_empty());
        assert_eq!(convergence_sweep(&c, &[1000]).unwrap(), vec![run_simulation(&c).unwrap()]);
        assert!(convergence_sweep(&c, &[10, 5]).is_err());
        assert!(convergence_sweep(&c, &[0]).is_err());
        assert!(convergence_sweep(&c, &[1001]).is_err());
    }

    #[test]
    fn f32_runs() {
        let params = CaseControlParams::new(0.3f32, 0.6, 12, 9).unwrap();
        let r = run_simulation(&SimConfig::new(params, 20_000, 3, false).unwrap()).unwrap();
        assert!(r.empirical_bias_corrected.abs() < 0.05);
    }
}
