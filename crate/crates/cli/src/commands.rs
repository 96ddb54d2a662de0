use std::fmt::Write as _;
use std::time::{Duration, Instant};

use anyhow::Result;
use jdlattice::engine::{
    price_american_full, price_american_put_truncated, price_american_truncated,
    price_european_full, price_european_truncated, price_european_type_a, search_bounds,
    theoretical_bounds,
};
use jdlattice::model::{merton_series_price, DEFAULT_SERIES_TOL};
use jdlattice::tables::{evaluate_case, external_columns, has_hs_column, table_cases, EvalOptions, RowResult};
use jdlattice::validation::{run_suite, Suite, ValidationReport};
use jdlattice::{build_lattice, Exercise, OptionKind, PriceResult, PricingMethod};

use crate::config::{Epsilon, Format, Method, RunConfig};

pub fn price(cfg: &RunConfig) -> Result<PriceResult> {
    let p = &cfg.params;
    if cfg.method == Method::Merton {
        let start = Instant::now();
        let value = merton_series_price(p, cfg.kind, DEFAULT_SERIES_TOL)?;
        return Ok(PriceResult {
            value,
            method: PricingMethod::MertonSeries,
            bounds: None,
            boundary_b: None,
            nodes_visited: 0,
            elapsed: start.elapsed(),
        });
    }
    let start = Instant::now();
    let spec = build_lattice(p, cfg.n, cfg.nu, cfg.c)?;
    let eps = cfg.epsilon.resolve(cfg.n);
    let mut res = match (cfg.exercise, cfg.method) {
        (Exercise::European, Method::Full) => price_european_full(p, &spec, cfg.kind)?,
        (Exercise::European, Method::TruncatedTheoretical) => {
            let b = theoretical_bounds(p, &spec, eps, cfg.kind)?;
            price_european_truncated(p, &spec, &b, cfg.kind)?
        }
        (Exercise::European, Method::TruncatedNumerical) => {
            let b = search_bounds(p, &spec, eps, cfg.kind)?;
            price_european_truncated(p, &spec, &b, cfg.kind)?
        }
        (Exercise::European, Method::TypeA) => {
            let b = search_bounds(p, &spec, eps, cfg.kind)?;
            price_european_type_a(p, &spec, &b, cfg.kind)?
        }
        (Exercise::American, Method::Full) => price_american_full(p, &spec, cfg.kind)?,
        (Exercise::American, Method::TruncatedTheoretical) => match cfg.kind {
            OptionKind::Put => price_american_put_truncated(p, &spec, eps)?,
            OptionKind::Call => {
                let b = theoretical_bounds(p, &spec, eps, cfg.kind)?;
                price_american_truncated(p, &spec, &b, cfg.kind)?
            }
        },
        (Exercise::American, Method::TruncatedNumerical) => {
            let b = search_bounds(p, &spec, eps, cfg.kind)?;
            price_american_truncated(p, &spec, &b, cfg.kind)?
        }
        (_, Method::Merton) | (Exercise::American, Method::TypeA) => {
            unreachable!("handled above or rejected while resolving the configuration")
        }
    };
    // Barrier search and lattice set-up are part of the pricing call.
    res.elapsed = start.elapsed();
    Ok(res)
}

fn secs(d: Duration) -> String {
    format!("{:.2}", d.as_secs_f64())
}

pub fn render_price(cfg: &RunConfig, res: &PriceResult) -> String {
    let mut out = String::new();
    match cfg.format {
        Format::Text => {
            let _ = writeln!(out, "value: {:.4}", res.value);
            let _ = writeln!(out, "method: {} ({})", cfg.method, res.method);
            let _ = writeln!(out, "option: {} {}", cfg.exercise, cfg.kind);
            if let Some(b) = res.bounds {
                let _ = writeln!(
                    out,
                    "bounds: kbar={} lbar={} ({}, epsilon={})",
                    b.kbar, b.lbar, b.method, b.epsilon
                );
            }
            if let Some(b) = res.boundary_b {
                let _ = writeln!(out, "boundary value: {b}");
            }
            let _ = writeln!(out, "nodes visited: {}", res.nodes_visited);
            let _ = writeln!(out, "time: {} s", secs(res.elapsed));
        }
        Format::Csv => {
            out.push_str("method,exercise,kind,value,kbar,lbar,epsilon,nodes_visited,seconds\n");
            let (kb, lb, eps) = match res.bounds {
                Some(b) => (b.kbar.to_string(), b.lbar.to_string(), b.epsilon.to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{},{},{},{:.4},{kb},{lb},{eps},{},{}",
                cfg.method,
                cfg.exercise,
                cfg.kind,
                res.value,
                res.nodes_visited,
                secs(res.elapsed)
            );
        }
    }
    out
}

fn row_key_header(table: u8) -> &'static str {
    match table {
        1 => "strike,steps",
        2 => "tau,sigma2,strike",
        3 => "strike,maturity",
        _ => "stock",
    }
}

fn row_key(r: &RowResult) -> String {
    let c = &r.case;
    match c.table {
        1 => format!("{},{}", c.row, c.n),
        2 => format!("{},{},{}", c.params.tau, round_var(c.params.sigma), c.row),
        3 => format!("{},{}", c.params.strike, c.row),
        _ => c.row.clone(),
    }
}

/// σ² as quoted in the tables (the stored σ is its square root).
fn round_var(sigma: f64) -> String {
    let v = sigma * sigma;
    format!("{}", (v * 1e6).round() / 1e6)
}

pub struct TableOptions {
    pub c: f64,
    pub epsilon: Epsilon,
    pub with_hs: bool,
    pub timings: bool,
}

/// CSV for one table (or panel). External method columns are left blank.
pub fn table_csv(table: u8, panel: Option<char>, opts: &TableOptions) -> Result<String> {
    let cases = table_cases(table, panel)?;
    let externals = external_columns(table);
    let hs = has_hs_column(table) && opts.with_hs;
    let mut header = vec!["table".to_string(), "panel".into(), row_key_header(table).into()];
    header.extend(externals.iter().map(|s| s.to_string()));
    if hs {
        header.push("hs".into());
        if opts.timings {
            header.push("hs_seconds".into());
        }
    }
    header.push("hscut".into());
    if opts.timings {
        header.push("hscut_seconds".into());
    }
    header.extend(["kbar".into(), "lbar".into()]);
    if table != 4 {
        header.push("merton".into());
    }
    if table == 3 {
        header.push("merton_lattice_params".into());
    }
    let mut out = header.join(",");
    out.push('\n');

    for case in &cases {
        let eval = EvalOptions {
            c: opts.c,
            epsilon: match opts.epsilon {
                Epsilon::Auto => None,
                Epsilon::Value(v) => Some(v),
            },
            with_hs: hs,
        };
        let r = evaluate_case(case, &eval)?;
        let mut cells = vec![table.to_string(), case.panel.to_string(), row_key(&r)];
        cells.extend(externals.iter().map(|_| String::new()));
        if let Some(h) = &r.hs {
            cells.push(format!("{:.4}", h.value));
            if opts.timings {
                cells.push(secs(h.elapsed));
            }
        }
        cells.push(format!("{:.4}", r.hscut.value));
        if opts.timings {
            cells.push(secs(r.hscut.elapsed));
        }
        let b = r.hscut.bounds.expect("truncated prices carry bounds");
        cells.push(b.kbar.to_string());
        cells.push(b.lbar.to_string());
        if let Some(m) = r.merton {
            cells.push(format!("{m:.4}"));
        }
        if table == 3 {
            cells.push(r.merton_lattice.map(|m| format!("{m:.4}")).unwrap_or_default());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn validate(suite: Suite, corrupt: bool) -> (ValidationReport, String) {
    let report = run_suite(suite, corrupt);
    let mut out = String::new();
    for c in &report.checks {
        let _ = writeln!(out, "{c}");
    }
    let _ = writeln!(
        out,
        "{} of {} checks passed",
        report.checks.len() - report.failures(),
        report.checks.len()
    );
    (report, out)
}
