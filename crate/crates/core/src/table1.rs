//! Exact bias of both estimators on the 4x4 grid `q, p in {0.2, 0.4, 0.6, 0.8}`
//! with ten cases and ten controls.

use rayon::prelude::*;

use crate::error::Result;
use crate::measures::{ar_star, CaseControlParams};
use crate::moments::{exact_moments_corrected, exact_moments_standard};
use crate::scalar::Scalar;

pub const TABLE1_CASES: u64 = 10;
pub const TABLE1_CONTROLS: u64 = 10;

/// Grid values as fifths, so rational scalars get them exactly.
pub const TABLE1_GRID_FIFTHS: [u64; 4] = [1, 2, 3, 4];

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row<T> {
    pub q: T,
    pub p: T,
    pub ar_star: T,
    pub bias_standard: T,
    pub bias_corrected: T,
}

/// Rows ordered by `q`, then `p`.
pub fn table1<T: Scalar>() -> Result<Vec<Table1Row<T>>> {
    let cells: Vec<(u64, u64)> = TABLE1_GRID_FIFTHS
        .iter()
        .flat_map(|&q| TABLE1_GRID_FIFTHS.iter().map(move |&p| (q, p)))
        .collect();
    cells
        .into_par_iter()
        .map(|(q, p)| {
            let params = CaseControlParams::new(
                T::from_ratio(q, 5),
                T::from_ratio(p, 5),
                TABLE1_CASES,
                TABLE1_CONTROLS,
            )?;
            Ok(Table1Row {
                ar_star: ar_star(&params),
                bias_standard: exact_moments_standard(&params)?.bias,
                bias_corrected: exact_moments_corrected(&params)?.bias,
                q: params.q().clone(),
                p: params.p().clone(),
            })
        })
        .collect()
}

/// Rounds half away from zero to `digits` decimals. Results that round to
/// zero come back as `+0.0`.
pub fn round_half_away(x: f64, digits: u32) -> f64 {
    let scale = 10f64.powi(digits as i32);
    let r = (x * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}
