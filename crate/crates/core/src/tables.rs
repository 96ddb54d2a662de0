//! Parameter sets and published reference values for the four benchmark
//! tables, plus row evaluation.
//!
//! Tables 1 and 2 quote the jump mean as γ = ln(1 + E[J]); the lattice needs
//! the log-normal mean γ' = γ − δ²/2. Table 3 quotes γ' directly for the
//! lattice, while its Merton column treats the same number as γ. Table 4
//! quotes γ' and δ (a standard deviation).

use std::time::Instant;

use crate::engine::{
    price_american_full, price_american_truncated, price_european_full,
    price_european_truncated, search_bounds, PriceResult,
};
use crate::error::{invalid, Result};
use crate::lattice::build_lattice;
use crate::model::{merton_series_price, Exercise, MarketParams, OptionKind, DEFAULT_SERIES_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct TableCase {
    pub table: u8,
    pub panel: char,
    /// Row label as printed (strike, maturity or stock price).
    pub row: String,
    /// Parameters driving the lattice columns.
    pub params: MarketParams,
    /// Parameters behind the printed Merton column, if the table has one.
    pub merton_params: Option<MarketParams>,
    pub kind: OptionKind,
    pub exercise: Exercise,
    pub n: usize,
    pub nu: usize,
    /// Printed cells by column name.
    pub published: Vec<(&'static str, f64)>,
    /// Cells whose printed value is an evident typo, with the corrected value.
    pub corrections: Vec<(&'static str, f64)>,
}

impl TableCase {
    pub fn printed(&self, column: &str) -> Option<f64> {
        self.published.iter().find(|(c, _)| *c == column).map(|&(_, v)| v)
    }

    /// Printed value unless it is listed as a typo.
    pub fn reference(&self, column: &str) -> Option<f64> {
        self.corrections
            .iter()
            .find(|(c, _)| *c == column)
            .map(|&(_, v)| v)
            .or_else(|| self.printed(column))
    }
}

/// Column layout per table: external reference methods first, then the
/// computed ones.
pub fn external_columns(table: u8) -> &'static [&'static str] {
    match table {
        1 | 2 => &["amin", "dai"],
        3 => &["simonato", "amin", "dai"],
        _ => &["simonato", "dai", "benchmark"],
    }
}

/// Whether the table prints a full (untruncated) lattice column.
pub fn has_hs_column(table: u8) -> bool {
    matches!(table, 1 | 4)
}

fn gamma_to_gamma_prime(gamma: f64, delta2: f64) -> f64 {
    gamma - 0.5 * delta2
}

fn put_params(strike: f64, sigma2: f64, delta2: f64, tau: f64) -> MarketParams {
    let gp = gamma_to_gamma_prime(0.0, delta2);
    MarketParams::from_variances(40.0, strike, 0.08, 0.0, sigma2, 5.0, gp, delta2, tau)
}

type Cells = &'static [f64];
type Table1Row = (char, f64, f64, f64, usize, Cells, Option<f64>);

fn table1() -> Vec<TableCase> {
    // (panel, δ², σ², strike, steps, [amin, dai, hs, hscut], merton)
    const ROWS: &[Table1Row] = &[
        ('A', 0.05, 0.05, 30.0, 200, &[2.6253, 2.6207, 2.6215, 2.6215], None),
        ('A', 0.05, 0.05, 30.0, 400, &[2.6233, 2.6209, 2.6217, 2.6217], None),
        ('A', 0.05, 0.05, 30.0, 800, &[2.6223, 2.6210, 2.6213, 2.6213], Some(2.6211)),
        ('A', 0.05, 0.05, 40.0, 200, &[6.7102, 6.6972, 6.6982, 6.6982], None),
        ('A', 0.05, 0.05, 40.0, 400, &[6.7029, 6.6976, 6.6070, 6.6970], None),
        ('A', 0.05, 0.05, 40.0, 800, &[6.6995, 6.6964, 6.6968, 6.6968], Some(6.6970)),
        ('A', 0.05, 0.05, 50.0, 200, &[12.5486, 12.5247, 12.5260, 12.5260], None),
        ('A', 0.05, 0.05, 50.0, 400, &[12.5360, 12.5243, 12.5249, 12.5249], None),
        ('A', 0.05, 0.05, 50.0, 800, &[12.5301, 12.5241, 12.5247, 12.5247], Some(12.5238)),
        ('B', 0.09, 0.01, 30.0, 200, &[3.7542, 3.9151, 3.9154, 3.9154], None),
        ('B', 0.09, 0.01, 30.0, 400, &[3.9086, 3.9138, 3.9141, 3.9141], None),
        ('B', 0.09, 0.01, 30.0, 800, &[3.9220, 3.9131, 3.9132, 3.9132], Some(3.9184)),
        ('B', 0.09, 0.01, 40.0, 200, &[8.3061, 8.4652, 8.4654, 8.4654], None),
        ('B', 0.09, 0.01, 40.0, 400, &[8.4547, 8.4620, 8.4621, 8.4621], None),
        ('B', 0.09, 0.01, 40.0, 800, &[8.4648, 8.4603, 8.4604, 8.4604], Some(8.4578)),
        ('B', 0.09, 0.01, 50.0, 200, &[14.3182, 14.4825, 14.4831, 14.4831], None),
        ('B', 0.09, 0.01, 50.0, 400, &[14.4621, 14.4793, 14.4795, 14.4795], None),
        ('B', 0.09, 0.01, 50.0, 800, &[14.4697, 14.4778, 14.4778, 14.4778], Some(14.4604)),
        ('C', 0.05, 0.0025, 30.0, 200, &[1.4498, 2.1887, 2.1888, 2.1888], None),
        ('C', 0.05, 0.0025, 30.0, 400, &[1.9766, 2.1883, 2.1884, 2.1884], None),
        ('C', 0.05, 0.0025, 30.0, 800, &[2.1502, 2.1881, 2.1881, 2.1881], Some(2.1720)),
        ('C', 0.05, 0.0025, 40.0, 200, &[5.2298, 6.0039, 6.0040, 6.0040], None),
        ('C', 0.05, 0.0025, 40.0, 400, &[5.7905, 6.0014, 6.0015, 6.0015], None),
        ('C', 0.05, 0.0025, 40.0, 800, &[5.9625, 6.0014, 6.0002, 6.0002], Some(5.9800)),
        ('C', 0.05, 0.0025, 50.0, 200, &[11.0203, 11.7862, 11.7866, 11.7866], None),
        ('C', 0.05, 0.0025, 50.0, 400, &[11.5728, 11.7839, 11.7841, 11.7841], None),
        ('C', 0.05, 0.0025, 50.0, 800, &[11.7414, 11.7828, 11.7829, 11.7829], Some(11.7556)),
    ];
    ROWS.iter()
        .map(|&(panel, delta2, sigma2, strike, n, cells, merton)| {
            let params = put_params(strike, sigma2, delta2, 1.0);
            let mut published: Vec<(&'static str, f64)> =
                ["amin", "dai", "hs", "hscut"].into_iter().zip(cells.iter().copied()).collect();
            published.extend(merton.map(|m| ("merton", m)));
            let corrections = if panel == 'A' && strike == 40.0 && n == 400 {
                vec![("hs", 6.6970)]
            } else {
                Vec::new()
            };
            TableCase {
                table: 1,
                panel,
                row: format!("{strike}"),
                params,
                merton_params: Some(params),
                kind: OptionKind::Put,
                exercise: Exercise::European,
                n,
                nu: 3,
                published,
                corrections,
            }
        })
        .collect()
}

fn table2() -> Vec<TableCase> {
    // (panel, τ, σ², strike, [amin, dai, hscut, merton])
    const ROWS: &[(char, f64, f64, f64, Cells)] = &[
        ('A', 1.0, 0.05, 30.0, &[2.6233, 2.6209, 2.6217, 2.6211]),
        ('A', 1.0, 0.05, 40.0, &[6.7029, 6.6976, 6.6970, 6.6970]),
        ('A', 1.0, 0.05, 50.0, &[12.5360, 12.5243, 12.5249, 12.5238]),
        ('B', 1.0, 0.01, 30.0, &[2.2486, 2.2448, 2.2451, 2.2436]),
        ('B', 1.0, 0.01, 40.0, &[6.1124, 6.1029, 6.1032, 6.0995]),
        ('B', 1.0, 0.01, 50.0, &[11.9013, 11.8860, 11.8864, 11.8819]),
        ('C', 5.0, 0.05, 30.0, &[5.6850, 5.6178, 5.6200, 5.6013]),
        ('C', 5.0, 0.05, 40.0, &[9.5178, 9.4120, 9.4143, 9.3861]),
        ('C', 5.0, 0.05, 50.0, &[13.8861, 13.7415, 13.7446, 13.7055]),
        ('D', 5.0, 0.01, 30.0, &[5.0466, 4.9361, 4.9374, 4.9198]),
        ('D', 5.0, 0.01, 40.0, &[8.6917, 8.5266, 8.5281, 8.5003]),
        ('D', 5.0, 0.01, 50.0, &[12.9203, 12.7024, 12.7042, 12.6657]),
        ('E', 10.0, 0.05, 30.0, &[5.4517, 5.2829, 5.2857, 5.2834]),
        ('E', 10.0, 0.05, 40.0, &[8.3314, 8.0925, 8.0972, 8.0927]),
        ('E', 10.0, 0.05, 50.0, &[11.4521, 11.1450, 11.1495, 11.1450]),
        ('F', 10.0, 0.01, 30.0, &[4.9085, 4.6494, 4.6516, 4.6491]),
        ('F', 10.0, 0.01, 40.0, &[7.6451, 7.2843, 7.2874, 7.2832]),
        ('F', 10.0, 0.01, 50.0, &[10.6468, 10.1889, 10.1926, 10.1872]),
    ];
    ROWS.iter()
        .map(|&(panel, tau, sigma2, strike, cells)| {
            let params = put_params(strike, sigma2, 0.05, tau);
            TableCase {
                table: 2,
                panel,
                row: format!("{strike}"),
                params,
                merton_params: Some(params),
                kind: OptionKind::Put,
                exercise: Exercise::European,
                n: 400,
                nu: 3,
                published: ["amin", "dai", "hscut", "merton"]
                    .into_iter()
                    .zip(cells.iter().copied())
                    .collect(),
                corrections: Vec::new(),
            }
        })
        .collect()
}

fn table3() -> Vec<TableCase> {
    // (panel, strike, maturity days, [simonato, amin, dai, hscut, merton])
    const ROWS: &[(char, f64, u32, Cells)] = &[
        ('A', 45.0, 30, &[5.4304, 5.4429, 5.4430, 5.4435, 5.4582]),
        ('A', 45.0, 90, &[6.4372, 6.4263, 6.4367, 6.4389, 6.4607]),
        ('A', 45.0, 270, &[8.8432, 8.7390, 8.8323, 8.8362, 8.8668]),
        ('B', 50.0, 30, &[1.7306, 1.6952, 1.6960, 1.6961, 1.7038]),
        ('B', 50.0, 90, &[3.2149, 3.1879, 3.1952, 3.1964, 3.2119]),
        ('B', 50.0, 270, &[5.9859, 5.8932, 5.9731, 5.9773, 6.0041]),
        ('C', 55.0, 30, &[0.3030, 0.3026, 0.3023, 0.3031, 0.2936]),
        ('C', 55.0, 90, &[1.3251, 1.3111, 1.3152, 1.3176, 1.3147]),
        ('C', 55.0, 270, &[3.8720, 3.7975, 3.8632, 3.8682, 3.8850]),
    ];
    let (gp, delta2) = (-0.02, 0.01);
    ROWS.iter()
        .map(|&(panel, strike, days, cells)| {
            let tau = days as f64 / 365.0;
            let params =
                MarketParams::from_variances(50.0, strike, 0.05, 0.0, 0.04, 5.0, gp, delta2, tau);
            let merton = MarketParams::from_variances(
                50.0,
                strike,
                0.05,
                0.0,
                0.04,
                5.0,
                gamma_to_gamma_prime(gp, delta2),
                delta2,
                tau,
            );
            TableCase {
                table: 3,
                panel,
                row: format!("{days}/365"),
                params,
                merton_params: Some(merton),
                kind: OptionKind::Call,
                exercise: Exercise::European,
                n: 150,
                nu: 3,
                published: ["simonato", "amin", "dai", "hscut", "merton"]
                    .into_iter()
                    .zip(cells.iter().copied())
                    .collect(),
                corrections: Vec::new(),
            }
        })
        .collect()
}

fn table4() -> Vec<TableCase> {
    // (panel, γ', δ, stock, [simonato, dai, hs, hscut, benchmark])
    const ROWS: &[(char, f64, f64, f64, Cells)] = &[
        ('A', 0.0, 0.1980, 80.0, &[4.0966, 4.0839, 4.0956, 5.0956, 4.0500]),
        ('A', 0.0, 0.1980, 100.0, &[12.7026, 12.6936, 12.6912, 12.6912, 12.6800]),
        ('A', 0.0, 0.1980, 120.0, &[26.2072, 26.2035, 26.2015, 26.2015, 26.2200]),
        ('B', 0.0488, 0.1888, 80.0, &[4.2107, 4.1867, 4.1983, 4.1983, 4.1200]),
        ('B', 0.0488, 0.1888, 100.0, &[12.7409, 12.7344, 12.7312, 12.7312, 12.6800]),
        ('B', 0.0488, 0.1888, 120.0, &[26.1668, 26.1624, 26.1591, 26.1591, 26.1400]),
        ('C', -0.0513, 0.2082, 80.0, &[4.0685, 4.0722, 4.0836, 4.0836, 4.0700]),
        ('C', -0.0513, 0.2082, 100.0, &[12.8002, 12.7887, 12.7868, 12.7868, 12.8300]),
        ('C', -0.0513, 0.2082, 120.0, &[26.3915, 26.3809, 26.3794, 26.3794, 26.4600]),
    ];
    ROWS.iter()
        .map(|&(panel, gp, delta, stock, cells)| {
            let params = MarketParams {
                spot: stock,
                strike: 100.0,
                rate: 0.05,
                dividend: 0.03,
                sigma: 0.4,
                lambda: 1.0,
                gamma_prime: gp,
                delta,
                tau: 0.5,
            };
            let corrections = if panel == 'A' && stock == 80.0 {
                vec![("hscut", 4.0956)]
            } else {
                Vec::new()
            };
            TableCase {
                table: 4,
                panel,
                row: format!("{stock}"),
                params,
                merton_params: None,
                kind: OptionKind::Call,
                exercise: Exercise::American,
                n: 150,
                nu: 3,
                published: ["simonato", "dai", "hs", "hscut", "benchmark"]
                    .into_iter()
                    .zip(cells.iter().copied())
                    .collect(),
                corrections,
            }
        })
        .collect()
}

/// All rows of a table, optionally restricted to one panel.
pub fn table_cases(table: u8, panel: Option<char>) -> Result<Vec<TableCase>> {
    let cases = match table {
        1 => table1(),
        2 => table2(),
        3 => table3(),
        4 => table4(),
        _ => return Err(invalid(format!("unknown table {table} (expected 1-4)"))),
    };
    let Some(p) = panel else { return Ok(cases) };
    let p = p.to_ascii_uppercase();
    let cases: Vec<_> = cases.into_iter().filter(|c| c.panel == p).collect();
    if cases.is_empty() {
        return Err(invalid(format!("table {table} has no panel {p}")));
    }
    Ok(cases)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub c: f64,
    /// Truncation tolerance; `None` means 1/n.
    pub epsilon: Option<f64>,
    /// Also compute the untruncated lattice column where the table has one.
    pub with_hs: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { c: 1.0, epsilon: None, with_hs: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub case: TableCase,
    pub hs: Option<PriceResult>,
    pub hscut: PriceResult,
    pub merton: Option<f64>,
    /// Merton series evaluated at the lattice parameters, when those differ
    /// from the ones behind the printed Merton column.
    pub merton_lattice: Option<f64>,
}

/// Truncated price with numerically searched barriers at ε (default 1/n).
/// Elapsed time covers lattice set-up and the barrier search.
pub fn price_hscut(case: &TableCase, c: f64, epsilon: Option<f64>) -> Result<PriceResult> {
    let start = Instant::now();
    let spec = build_lattice(&case.params, case.n, case.nu, c)?;
    let eps = epsilon.unwrap_or(1.0 / case.n as f64);
    let bounds = search_bounds(&case.params, &spec, eps, case.kind)?;
    let mut res = match case.exercise {
        Exercise::European => price_european_truncated(&case.params, &spec, &bounds, case.kind)?,
        Exercise::American => price_american_truncated(&case.params, &spec, &bounds, case.kind)?,
    };
    res.elapsed = start.elapsed();
    Ok(res)
}

pub fn price_hs(case: &TableCase, c: f64) -> Result<PriceResult> {
    let start = Instant::now();
    let spec = build_lattice(&case.params, case.n, case.nu, c)?;
    let mut res = match case.exercise {
        Exercise::European => price_european_full(&case.params, &spec, case.kind)?,
        Exercise::American => price_american_full(&case.params, &spec, case.kind)?,
    };
    res.elapsed = start.elapsed();
    Ok(res)
}

pub fn evaluate_case(case: &TableCase, opts: &EvalOptions) -> Result<RowResult> {
    let hscut = price_hscut(case, opts.c, opts.epsilon)?;
    let hs = if opts.with_hs && has_hs_column(case.table) {
        Some(price_hs(case, opts.c)?)
    } else {
        None
    };
    let merton = case
        .merton_params
        .map(|p| merton_series_price(&p, case.kind, DEFAULT_SERIES_TOL))
        .transpose()?;
    let merton_lattice = match case.merton_params {
        Some(p) if p != case.params => {
            Some(merton_series_price(&case.params, case.kind, DEFAULT_SERIES_TOL)?)
        }
        _ => None,
    };
    Ok(RowResult { case: case.clone(), hs, hscut, merton, merton_lattice })
}
