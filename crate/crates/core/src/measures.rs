//! Association measures for a single case-control 2x2 table.
//!
//! Cell layout follows the usual case-control convention:
//!
//! |            | exposed | unexposed |
//! |------------|---------|-----------|
//! | cases      | `a`     | `c`       |
//! | controls   | `b`     | `d`       |
//!
//! so `m = a + c` cases and `n = b + d` controls.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Observed counts of one case-control table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoByTwoTable {
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

impl TwoByTwoTable {
    /// Requires at least one case and one control.
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        let cases = a
            .checked_add(c)
            .ok_or_else(|| Error::InvalidTable("case count overflows".into()))?;
        let controls = b
            .checked_add(d)
            .ok_or_else(|| Error::InvalidTable("control count overflows".into()))?;
        if cases == 0 {
            return Err(Error::InvalidTable("table has no cases (a + c = 0)".into()));
        }
        if controls == 0 {
            return Err(Error::InvalidTable(
                "table has no controls (b + d = 0)".into(),
            ));
        }
        Ok(Self { a, b, c, d })
    }

    /// Exposed cases.
    pub fn a(&self) -> u64 {
        self.a
    }

    /// Exposed controls.
    pub fn b(&self) -> u64 {
        self.b
    }

    /// Unexposed cases.
    pub fn c(&self) -> u64 {
        self.c
    }

    /// Unexposed controls.
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn cases(&self) -> u64 {
        self.a + self.c
    }

    pub fn controls(&self) -> u64 {
        self.b + self.d
    }
}

fn check_open_unit<T: Scalar>(name: &str, value: &T) -> Result<()> {
    if *value > T::zero() && *value < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie strictly between 0 and 1, got {}",
            value.as_f64()
        )))
    }
}

/// True parameters of the case-control sampling model: `A ~ Bin(m, q)`
/// exposed cases and, independently, `B ~ Bin(n, p)` exposed controls.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseControlParams<T> {
    q: T,
    p: T,
    m: u64,
    n: u64,
}

impl<T: Scalar> CaseControlParams<T> {
    pub fn new(q: T, p: T, m: u64, n: u64) -> Result<Self> {
        check_open_unit("q", &q)?;
        check_open_unit("p", &p)?;
        if m == 0 {
            return Err(Error::InvalidParameter("m (cases) must be at least 1".into()));
        }
        if n == 0 {
            return Err(Error::InvalidParameter(
                "n (controls) must be at least 1".into(),
            ));
        }
        Ok(Self { q, p, m, n })
    }

    /// Exposure probability among cases.
    pub fn q(&self) -> &T {
        &self.q
    }

    /// Exposure probability among controls.
    pub fn p(&self) -> &T {
        &self.p
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }
}

/// Cohort-level description of a population, used to relate Levin's
/// attributable risk to its case-control counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationParams<T> {
    risk_exposed: T,
    risk_unexposed: T,
    prev_exposed: T,
}

impl<T: Scalar> PopulationParams<T> {
    pub fn new(risk_exposed: T, risk_unexposed: T, prev_exposed: T) -> Result<Self> {
        check_open_unit("risk_exposed", &risk_exposed)?;
        check_open_unit("risk_unexposed", &risk_unexposed)?;
        check_open_unit("prev_exposed", &prev_exposed)?;
        let pop = Self {
            risk_exposed,
            risk_unexposed,
            prev_exposed,
        };
        check_open_unit("pr(disease)", &pop.disease_prob())?;
        Ok(pop)
    }

    pub fn risk_exposed(&self) -> &T {
        &self.risk_exposed
    }

    pub fn risk_unexposed(&self) -> &T {
        &self.risk_unexposed
    }

    pub fn prev_exposed(&self) -> &T {
        &self.prev_exposed
    }

    /// pr(disease), marginalised over exposure.
    pub fn disease_prob(&self) -> T {
        self.risk_exposed.clone() * self.prev_exposed.clone()
            + self.risk_unexposed.clone() * (T::one() - self.prev_exposed.clone())
    }

    pub fn relative_risk(&self) -> T {
        self.risk_exposed.clone() / self.risk_unexposed.clone()
    }

    /// pr(exposed | disease), the case exposure probability `q`.
    pub fn exposed_given_disease(&self) -> T {
        self.risk_exposed.clone() * self.prev_exposed.clone() / self.disease_prob()
    }

    /// pr(exposed | disease free), the control exposure probability `p`.
    pub fn exposed_given_disease_free(&self) -> T {
        (T::one() - self.risk_exposed.clone()) * self.prev_exposed.clone()
            / (T::one() - self.disease_prob())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// Plug-in maximum likelihood estimator, `D` in the denominator.
    Standard,
    /// Small-sample corrected estimator, `D + 1` in the denominator.
    Corrected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult<T> {
    pub value: T,
    pub kind: EstimatorKind,
    /// False only for the standard estimator on a table with `d = 0`, where
    /// `value` holds the corrected estimate instead.
    pub defined: bool,
}

/// `q - (1 - q) p / (1 - p)`, the rare-disease approximation of attributable
/// risk. Unbounded below as `p -> 1`.
pub fn ar_star<T: Scalar>(params: &CaseControlParams<T>) -> T {
    let q = params.q.clone();
    let p = params.p.clone();
    q.clone() - (T::one() - q) * p.clone() / (T::one() - p)
}

fn exposed_case_share<T: Scalar>(table: &TwoByTwoTable) -> T {
    T::from_count(table.a) / T::from_count(table.cases())
}

fn subtracted_term<T: Scalar>(table: &TwoByTwoTable, denominator: u64) -> T {
    T::from_count(table.b) * T::from_count(table.c)
        / (T::from_count(table.cases()) * T::from_count(denominator))
}

/// `a/(a+c) - bc/((a+c)(d+1))`. Defined for every valid table.
pub fn estimate_corrected<T: Scalar>(table: &TwoByTwoTable) -> EstimateResult<T> {
    EstimateResult {
        value: exposed_case_share::<T>(table) - subtracted_term::<T>(table, table.d + 1),
        kind: EstimatorKind::Corrected,
        defined: true,
    }
}

/// `a/(a+c) - bc/((a+c)d)`. When `d = 0` the result carries the corrected
/// value with `defined = false`.
pub fn estimate_standard<T: Scalar>(table: &TwoByTwoTable) -> EstimateResult<T> {
    if table.d == 0 {
        return EstimateResult {
            kind: EstimatorKind::Standard,
            defined: false,
            ..estimate_corrected(table)
        };
    }
    EstimateResult {
        value: exposed_case_share::<T>(table) - subtracted_term::<T>(table, table.d),
        kind: EstimatorKind::Standard,
        defined: true,
    }
}

/// The gap between the two estimators written as
/// `((a - m)/m) ((n - d)/d - (n - d)/(d + 1))`. `None` when `d = 0`.
pub fn decomposition_term<T: Scalar>(table: &TwoByTwoTable) -> Option<T> {
    if table.d == 0 {
        return None;
    }
    let m = T::from_count(table.cases());
    let n = T::from_count(table.controls());
    let d = T::from_count(table.d);
    let exposed_shortfall = (T::from_count(table.a) - m.clone()) / m;
    let n_minus_d = n - d.clone();
    let gap = n_minus_d.clone() / d.clone() - n_minus_d / (d + T::one());
    Some(exposed_shortfall * gap)
}

/// Plug-in odds ratio `ad/(bc)`.
pub fn odds_ratio<T: Scalar>(table: &TwoByTwoTable) -> Result<T> {
    if table.b == 0 || table.c == 0 {
        return Err(Error::Undefined(format!(
            "plug-in odds ratio needs b >= 1 and c >= 1 (b = {}, c = {})",
            table.b, table.c
        )));
    }
    Ok(T::from_count(table.a) * T::from_count(table.d)
        / (T::from_count(table.b) * T::from_count(table.c)))
}

fn check_count(x: u64, n: u64) -> Result<()> {
    if n == 0 || x > n {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= x <= n and n >= 1, got x = {x}, n = {n}"
        )));
    }
    Ok(())
}

/// `x/(n - x + 1)`, the small-sample estimator of the odds `p/(1-p)` from
/// `X ~ Bin(n, p)`.
pub fn jewell_corrected_odds<T: Scalar>(x: u64, n: u64) -> Result<T> {
    check_count(x, n)?;
    Ok(T::from_count(x) / T::from_count(n - x + 1))
}

/// `(n + 1)/(x + 1)`, the small-sample estimator of `1/p`.
pub fn jewell_corrected_inverse<T: Scalar>(x: u64, n: u64) -> Result<T> {
    check_count(x, n)?;
    Ok(T::from_count(n + 1) / T::from_count(x + 1))
}

/// `ad/((b+1)(c+1))`. Finite for every valid table.
pub fn jewell_corrected_or<T: Scalar>(table: &TwoByTwoTable) -> T {
    T::from_count(table.a) * T::from_count(table.d)
        / (T::from_count(table.b + 1) * T::from_count(table.c + 1))
}

/// Levin's attributable risk `(pr(D) - pr(D | unexposed)) / pr(D)`.
pub fn levin_ar<T: Scalar>(pop: &PopulationParams<T>) -> T {
    let pd = pop.disease_prob();
    (pd.clone() - pop.risk_unexposed.clone()) / pd
}

/// Case-control approximation `pr(E | D) (1 - 1/OR)` with both exposure
/// probabilities obtained from the cohort description by Bayes' rule.
pub fn ar_star_from_population<T: Scalar>(pop: &PopulationParams<T>) -> T {
    let q = pop.exposed_given_disease();
    let p = pop.exposed_given_disease_free();
    let odds_ratio = q.clone() / (T::one() - q.clone()) * (T::one() - p.clone()) / p;
    q * (T::one() - T::one() / odds_ratio)
}
