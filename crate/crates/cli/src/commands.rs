//! Command implementations. Each returns a value that renders to either
//! output format, so the binary only handles argument parsing and exit codes.

use attrisk::{
    ar_star, bias_corrected_closed_form, estimate_corrected, estimate_standard,
    exact_moments_conditional, exact_moments_corrected, exact_moments_standard,
    jewell_corrected_or, min_controls, odds_ratio, run_simulation, table1, EstimatorKind,
    Moments, Params, Report, Simulation, Table1Row,
};

use crate::dataset::StratifiedDataset;
use crate::error::{CliError, Result};
use crate::report::{fmt_num, fmt_opt, render_aligned, render_csv, OutputFormat, ReportRow};

/// Width of the Monte Carlo agreement band, in standard errors.
pub const BAND_STANDARD_ERRORS: f64 = 4.0;

pub fn cmd_estimate(dataset: &StratifiedDataset) -> Vec<ReportRow> {
    dataset
        .strata()
        .iter()
        .map(|s| {
            let t = &s.table;
            let standard = estimate_standard::<f64>(t);
            let or_plugin = odds_ratio::<f64>(t).ok();
            let mut warnings = Vec::new();
            if !standard.defined {
                warnings.push(
                    "d = 0 (no unexposed controls): standard estimator undefined so the corrected value is reported"
                        .to_string(),
                );
            }
            if or_plugin.is_none() {
                warnings.push(format!(
                    "plug-in odds ratio undefined (b = {} and c = {}): see OR(corrected)",
                    t.b(),
                    t.c()
                ));
            }
            ReportRow {
                label: s.label.clone(),
                ar_standard: standard.defined.then_some(standard.value),
                ar_corrected: estimate_corrected::<f64>(t).value,
                or_plugin,
                or_jewell: jewell_corrected_or::<f64>(t),
                warnings,
            }
        })
        .collect()
}

/// Cells whose exact value is known to be printed differently in published
/// versions of this table: `(q, p, published)`.
const PUBLISHED_DISCREPANCIES: [(f64, f64, &str); 1] = [(0.8, 0.8, "0.0860")];

pub struct Table1Report {
    pub rows: Vec<Table1Row<f64>>,
}

pub fn cmd_table1() -> Result<Table1Report> {
    Ok(Table1Report { rows: table1::<f64>()? })
}

impl Table1Report {
    fn discrepancy(row: &Table1Row<f64>) -> Option<&'static str> {
        PUBLISHED_DISCREPANCIES
            .iter()
            .find(|(q, p, _)| (row.q - q).abs() < 1e-12 && (row.p - p).abs() < 1e-12)
            .map(|(_, _, published)| *published)
    }

    pub fn render(&self, format: OutputFormat, precision: usize) -> String {
        let mut footnotes = Vec::new();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut corrected = fmt_num(r.bias_corrected, precision);
                if format == OutputFormat::Table {
                    if let Some(published) = Self::discrepancy(r) {
                        corrected.push('*');
                        footnotes.push(format!(
                            "* (q, p) = ({:.2}, {:.2}): exact value ((1-q)/(1-p)) p^11 = {:.11}; \
                             published versions of this table print {published}.",
                            r.q, r.p, r.bias_corrected
                        ));
                    }
                }
                vec![
                    format!("{:.2}", r.q),
                    format!("{:.2}", r.p),
                    fmt_num(r.ar_star, precision),
                    fmt_num(r.bias_standard, precision),
                    corrected,
                ]
            })
            .collect();
        match format {
            OutputFormat::Table => {
                let mut out = format!(
                    "Exact bias with m = {} cases and n = {} controls \
                     (standard estimator set to the corrected one when D = 0)\n\n",
                    attrisk::table1::TABLE1_CASES,
                    attrisk::table1::TABLE1_CONTROLS
                );
                out.push_str(&render_aligned(
                    &["q", "p", "AR*", "Bias(standard)", "Bias(corrected)"],
                    &body,
                ));
                for note in footnotes {
                    out.push('\n');
                    out.push_str(&note);
                    out.push('\n');
                }
                out
            }
            OutputFormat::Csv => render_csv(
                &["q", "p", "ar_star", "bias_standard", "bias_corrected"],
                &body,
            ),
        }
    }
}

pub struct ExactBiasReport {
    pub params: Params,
    pub ar_star: f64,
    pub standard: Moments,
    pub corrected: Moments,
    pub closed_form: f64,
    /// `|enumerated corrected bias - closed form|`.
    pub residual: f64,
}

pub fn cmd_exact_bias(params: Params) -> Result<ExactBiasReport> {
    let standard = exact_moments_standard(&params)?;
    let corrected = exact_moments_corrected(&params)?;
    let closed_form = bias_corrected_closed_form(&params);
    Ok(ExactBiasReport {
        ar_star: ar_star(&params),
        residual: (corrected.bias - closed_form).abs(),
        params,
        standard,
        corrected,
        closed_form,
    })
}

fn render_key_values(pairs: &[(String, String)], format: OutputFormat) -> String {
    let rows: Vec<Vec<String>> = pairs.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
    match format {
        OutputFormat::Table => render_aligned(&["quantity", "value"], &rows),
        OutputFormat::Csv => render_csv(&["quantity", "value"], &rows),
    }
}

impl ExactBiasReport {
    pub fn render(&self, format: OutputFormat, precision: usize) -> String {
        let p = &self.params;
        let pairs = vec![
            ("q".into(), p.q().to_string()),
            ("p".into(), p.p().to_string()),
            ("m".into(), p.m().to_string()),
            ("n".into(), p.n().to_string()),
            ("ar_star".into(), fmt_num(self.ar_star, precision)),
            ("bias_standard".into(), fmt_num(self.standard.bias, precision)),
            ("bias_corrected".into(), fmt_num(self.corrected.bias, precision)),
            ("bias_corrected_closed_form".into(), fmt_num(self.closed_form, precision)),
            ("residual".into(), format!("{:.3e}", self.residual)),
            ("variance_standard".into(), fmt_num(self.standard.variance, precision)),
            ("variance_corrected".into(), fmt_num(self.corrected.variance, precision)),
        ];
        render_key_values(&pairs, format)
    }
}

/// One simulated statistic next to its exact counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct BandCheck {
    pub statistic: &'static str,
    pub empirical: Option<f64>,
    pub exact: Option<f64>,
    pub standard_error: Option<f64>,
}

impl BandCheck {
    /// `(empirical - exact) / se`, when all three are known.
    pub fn z_score(&self) -> Option<f64> {
        match (self.empirical, self.exact, self.standard_error) {
            (Some(e), Some(x), Some(se)) if se > 0.0 => Some((e - x) / se),
            (Some(e), Some(x), Some(_)) if e == x => Some(0.0),
            (Some(_), Some(_), Some(_)) => Some(f64::INFINITY),
            _ => None,
        }
    }

    pub fn within_band(&self) -> Option<bool> {
        self.z_score().map(|z| z.abs() <= BAND_STANDARD_ERRORS)
    }
}

pub struct SimulateReport {
    pub report: Report,
    pub checks: Vec<BandCheck>,
}

impl SimulateReport {
    pub fn outside_band(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.within_band() == Some(false))
            .count()
    }

    pub fn render(&self, format: OutputFormat, precision: usize) -> String {
        let r = &self.report;
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.statistic.to_string(),
                    fmt_opt(c.empirical, precision),
                    fmt_opt(c.exact, precision),
                    c.standard_error.map_or("NA".into(), |se| format!("{se:.3e}")),
                    c.z_score().map_or("NA".into(), |z| format!("{z:.2}")),
                    match c.within_band() {
                        Some(true) => "ok".into(),
                        Some(false) => "OUTSIDE".into(),
                        None => "NA".into(),
                    },
                ]
            })
            .collect();
        let header = ["statistic", "empirical", "exact", "std_error", "z", "band"];
        match format {
            OutputFormat::Table => {
                let mut out = format!(
                    "replications {}  kept {}  discarded (D = 0) {}  D = 0 draws {}{}\n\n",
                    r.replications,
                    r.effective_replications,
                    r.discarded_d_zero,
                    r.d_zero_draws,
                    if r.conditioned_on_d_nonzero {
                        "  [conditioned on D != 0]"
                    } else {
                        ""
                    }
                );
                out.push_str(&render_aligned(&header, &rows));
                let outside = self.outside_band();
                if outside > 0 {
                    out.push_str(&format!(
                        "\n{outside} statistic(s) outside the {BAND_STANDARD_ERRORS}-standard-error band\n"
                    ));
                }
                out
            }
            OutputFormat::Csv => render_csv(&header, &rows),
        }
    }
}

pub fn cmd_simulate(config: &Simulation) -> Result<SimulateReport> {
    let report = run_simulation(config)?;
    let params = &config.params;
    let exact = |kind: EstimatorKind| -> Result<Option<Moments>> {
        let moments = if config.condition_on_d_nonzero {
            exact_moments_conditional(params, kind)
        } else if kind == EstimatorKind::Standard {
            exact_moments_standard(params)
        } else {
            exact_moments_corrected(params)
        };
        match moments {
            Ok(m) => Ok(Some(m)),
            Err(attrisk::Error::CapExceeded { .. }) => Ok(None),
            Err(e) => Err(CliError::from(e)),
        }
    };
    let standard = exact(EstimatorKind::Standard)?;
    let corrected = exact(EstimatorKind::Corrected)?;
    let se = &report.standard_errors;
    let checks = vec![
        BandCheck {
            statistic: "bias_standard",
            empirical: Some(report.empirical_bias_standard),
            exact: standard.as_ref().map(|m| m.bias),
            standard_error: se.bias_standard,
        },
        BandCheck {
            statistic: "bias_corrected",
            empirical: Some(report.empirical_bias_corrected),
            exact: corrected.as_ref().map(|m| m.bias),
            standard_error: se.bias_corrected,
        },
        BandCheck {
            statistic: "var_standard",
            empirical: report.empirical_var_standard,
            exact: standard.as_ref().map(|m| m.variance),
            standard_error: se.var_standard,
        },
        BandCheck {
            statistic: "var_corrected",
            empirical: report.empirical_var_corrected,
            exact: corrected.as_ref().map(|m| m.variance),
            standard_error: se.var_corrected,
        },
    ];
    Ok(SimulateReport { report, checks })
}

pub struct MinControlsReport {
    pub q: f64,
    pub p: f64,
    pub tol: f64,
    pub controls: u64,
    /// Bias bound at the returned `n`.
    pub bound_at_n: f64,
    /// Bias bound at `n - 1`, absent when `n = 1`.
    pub bound_at_previous: Option<f64>,
}

pub fn cmd_min_controls(q: f64, p: f64, tol: f64) -> Result<MinControlsReport> {
    let controls = min_controls(q, p, tol)?;
    let bound = |n: u64| -> Result<f64> {
        Ok(bias_corrected_closed_form(&Params::new(q, p, 1, n)?))
    };
    Ok(MinControlsReport {
        q,
        p,
        tol,
        controls,
        bound_at_n: bound(controls)?,
        bound_at_previous: if controls > 1 {
            Some(bound(controls - 1)?)
        } else {
            None
        },
    })
}

impl MinControlsReport {
    pub fn render(&self, format: OutputFormat, precision: usize) -> String {
        let mut pairs = vec![
            ("q".to_string(), self.q.to_string()),
            ("p".to_string(), self.p.to_string()),
            ("tol".to_string(), self.tol.to_string()),
            ("min_controls".to_string(), self.controls.to_string()),
            (
                format!("bias_bound_at_n={}", self.controls),
                fmt_num(self.bound_at_n, precision),
            ),
        ];
        if let Some(prev) = self.bound_at_previous {
            pairs.push((
                format!("bias_bound_at_n={}", self.controls - 1),
                fmt_num(prev, precision),
            ));
        }
        render_key_values(&pairs, format)
    }
}
