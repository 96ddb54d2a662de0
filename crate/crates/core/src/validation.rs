//! Named invariant checks over all modules, grouped into a fast and a full
//! suite. Every check reports its worst-case slack: the margin by which the
//! tightest case satisfied (positive) or violated (negative) its condition.

use std::fmt;
use std::time::Instant;

use statrs::function::gamma::ln_gamma;

use crate::engine::{
    price_american_full, price_american_put_truncated, price_american_truncated,
    price_backward_boundary, price_european_backward, price_european_full,
    price_european_truncated, price_european_type_a, search_bounds, theoretical_bounds,
};
use crate::error::Result;
use crate::lattice::{
    build_lattice, enlarged_jump_distribution, forward_jump_distribution,
    within_barrier_distribution, LatticeSpec,
};
use crate::model::{
    black_scholes_price, merton_series_price, normal_raw_moments, Exercise, MarketParams,
    OptionKind, DEFAULT_SERIES_TOL,
};
use crate::oracle::{enumerate_jump_paths, enumerate_price, DEFAULT_PATH_CAP};
use crate::truncation::{
    theoretical_bounds_american_put, truncation_constants, TruncationBounds,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fast,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            other => Err(format!("unknown suite '{other}' (expected fast or full)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst margin over all cases; negative when violated.
    pub slack: f64,
    pub cases: usize,
    /// Description of the tightest case.
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<34} slack={:+.3e} cases={:<4} ({:.2}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.slack,
            self.cases,
            self.seconds,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

/// Tracks the tightest margin seen across the cases of one check.
#[derive(Debug)]
pub struct Tracker {
    worst: f64,
    detail: String,
    cases: usize,
    error: Option<String>,
}

impl Default for Tracker {
    fn default() -> Self {
        Tracker { worst: f64::INFINITY, detail: String::new(), cases: 0, error: None }
    }
}

impl Tracker {
    /// Records one case; `margin` ≥ 0 means the case holds.
    pub fn record(&mut self, margin: f64, context: impl FnOnce() -> String) {
        self.cases += 1;
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if margin < self.worst {
            self.worst = margin;
            self.detail = context();
        }
    }

    /// `|a − b| ≤ tol`.
    pub fn close(&mut self, a: f64, b: f64, tol: f64, context: impl FnOnce() -> String) {
        self.record(tol - (a - b).abs(), || format!("{}: {a:.12e} vs {b:.12e}", context()));
    }

    /// `a ≤ b`, with `slack` absorbing rounding.
    pub fn le(&mut self, a: f64, b: f64, slack: f64, context: impl FnOnce() -> String) {
        self.record(b - a + slack, || format!("{}: {a:.6e} <= {b:.6e}", context()));
    }

    pub fn fail(&mut self, err: impl fmt::Display) {
        self.error.get_or_insert_with(|| err.to_string());
    }

    fn finish(self, name: &'static str, seconds: f64) -> CheckOutcome {
        if let Some(e) = self.error {
            return CheckOutcome { name, passed: false, slack: f64::NAN, cases: self.cases, detail: e, seconds };
        }
        let slack = if self.cases == 0 { 0.0 } else { self.worst };
        CheckOutcome { name, passed: self.cases > 0 && slack >= 0.0, slack, cases: self.cases, detail: self.detail, seconds }
    }
}

/// Runs `body` as a named check.
pub fn run_check(name: &'static str, body: impl FnOnce(&mut Tracker) -> Result<()>) -> CheckOutcome {
    let start = Instant::now();
    let mut t = Tracker::default();
    if let Err(e) = body(&mut t) {
        t.fail(e);
    }
    t.finish(name, start.elapsed().as_secs_f64())
}

/// Panel A of the first put table: S0 = 40, r = 0.08, σ² = δ² = 0.05, λ = 5,
/// τ = 1, E[J] = 0.
pub fn panel_a(strike: f64) -> MarketParams {
    MarketParams::from_variances(40.0, strike, 0.08, 0.0, 0.05, 5.0, -0.025, 0.05, 1.0)
}

/// Lattice factory; with `corrupt` set, q_0 is perturbed by 1e−3 without
/// renormalising (negative control).
#[derive(Debug, Clone, Copy, Default)]
pub struct Ctx {
    pub corrupt: bool,
}

impl Ctx {
    pub fn lattice(&self, p: &MarketParams, n: usize, nu: usize) -> Result<LatticeSpec> {
        let mut spec = build_lattice(p, n, nu, 1.0)?;
        if self.corrupt {
            spec.q[nu] += 1e-3;
        }
        Ok(spec)
    }
}

const KINDS: [OptionKind; 2] = [OptionKind::Call, OptionKind::Put];

fn simpson_moment(g: f64, delta: f64, i: i32) -> f64 {
    let (a, b, m) = (g - 12.0 * delta, g + 12.0 * delta, 20_000);
    let hstep = (b - a) / m as f64;
    let f = |x: f64| {
        x.powi(i) * (-(x - g).powi(2) / (2.0 * delta * delta)).exp()
            / (delta * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut s = f(a) + f(b);
    for k in 1..m {
        s += f(a + k as f64 * hstep) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * hstep / 3.0
}

pub fn check_moments_quadrature() -> CheckOutcome {
    run_check("moments_vs_quadrature", |t| {
        for &(g, d) in &[(-0.02, 0.1), (0.3, 0.5), (-1.0, 1.0), (0.05, 0.2236)] {
            let mu = normal_raw_moments(g, d, 10)?;
            for (i, &m) in mu.iter().enumerate() {
                let q = simpson_moment(g, d, i as i32 + 1);
                let tol = 1e-10 * q.abs().max(d.powi(i as i32 + 1));
                t.close(m, q, tol, || format!("g={g} d={d} order {}", i + 1));
            }
        }
        Ok(())
    })
}

pub fn check_merton_identities() -> CheckOutcome {
    run_check("merton_series_identities", |t| {
        for k in [30.0, 40.0, 50.0] {
            let p = panel_a(k);
            let p0 = MarketParams { lambda: 0.0, ..p };
            for kind in KINDS {
                let m = merton_series_price(&p0, kind, DEFAULT_SERIES_TOL)?;
                t.close(m, black_scholes_price(&p0, kind), 1e-12, || format!("lambda=0 K={k} {kind}"));
            }
            let c = merton_series_price(&p, OptionKind::Call, DEFAULT_SERIES_TOL)?;
            let pu = merton_series_price(&p, OptionKind::Put, DEFAULT_SERIES_TOL)?;
            let parity = p.spot * (-p.dividend * p.tau).exp() - k * (-p.rate * p.tau).exp();
            t.close(c - pu, parity, 1e-9, || format!("parity K={k}"));
            let mut last = f64::NEG_INFINITY;
            for s2 in [0.01, 0.03, 0.05, 0.08, 0.12] {
                let q = MarketParams { sigma: f64::sqrt(s2), ..p };
                let v = merton_series_price(&q, OptionKind::Put, DEFAULT_SERIES_TOL)?;
                t.le(last, v, 1e-12, || format!("monotone in sigma K={k} s2={s2}"));
                last = v;
            }
        }
        Ok(())
    })
}

pub fn check_jump_law(ctx: Ctx) -> CheckOutcome {
    run_check("jump_law_normalised_and_matched", |t| {
        for nu in 1..=4 {
            let p = panel_a(40.0);
            let spec = ctx.lattice(&p, 400, nu)?;
            let sum: f64 = spec.q.iter().sum();
            t.close(sum, 1.0, 1e-12, || format!("sum q nu={nu}"));
            for &ql in &spec.q {
                t.le(0.0, ql, 0.0, || format!("q >= 0 nu={nu}"));
            }
            for i in 1..=2 * nu {
                let m: f64 = (-(nu as i64)..=nu as i64)
                    .map(|l| (l as f64 * spec.h).powi(i as i32) * spec.q(l))
                    .sum();
                let scale: f64 = (-(nu as i64)..=nu as i64)
                    .map(|l| (l as f64 * spec.h).abs().powi(i as i32) * spec.q(l))
                    .sum();
                let k = spec.moments.cumulants[i - 1];
                t.close(m, k, 1e-10 * scale, || format!("moment {i} nu={nu}"));
            }
        }
        Ok(())
    })
}

pub fn check_distribution_mass(ctx: Ctx, n_max: usize) -> CheckOutcome {
    run_check("terminal_jump_mass", |t| {
        for nu in 1..=4 {
            for n in [50, 400, n_max] {
                let spec = ctx.lattice(&panel_a(40.0), n, nu)?;
                let d = forward_jump_distribution(&spec);
                t.close(d.total_mass(), 1.0, 1e-10, || format!("sum q_n n={n} nu={nu}"));
            }
        }
        Ok(())
    })
}

pub fn check_enlarged_and_within(ctx: Ctx) -> CheckOutcome {
    run_check("enlarged_and_within_barrier", |t| {
        for nu in [1, 2, 3] {
            let spec = ctx.lattice(&panel_a(40.0), 120, nu)?;
            let f = forward_jump_distribution(&spec);
            let e = enlarged_jump_distribution(&spec);
            t.le(1.0, e.total_mass(), 1e-12, || format!("sum q~ >= 1 nu={nu}"));
            for l in f.levels() {
                let rel = 1e-12 * e.prob(l);
                t.close(e.prob(l), e.prob(-l), rel, || format!("q~ symmetric l={l} nu={nu}"));
                t.le(f.prob(l), e.prob(l), rel, || format!("q_n(l) <= q~(l) l={l} nu={nu}"));
                t.le(f.prob(-l), e.prob(l), rel, || format!("q_n(-l) <= q~(l) l={l} nu={nu}"));
            }
            for (kb, lb) in [(3, 5), (10, 10), (20, 7)] {
                let w = within_barrier_distribution(&spec, kb, lb)?;
                t.le(w.total_mass(), 1.0, 1e-12, || format!("sum q_bar <= 1 nu={nu}"));
                for l in w.levels() {
                    t.le(w.prob(l), f.prob(l), 1e-15, || format!("q_bar <= q_n l={l} nu={nu}"));
                }
            }
        }
        Ok(())
    })
}

/// Brute-force enumeration against the convolution and expected-value code.
pub fn check_oracle_equivalence(ctx: Ctx) -> CheckOutcome {
    run_check("oracle_equivalence", |t| {
        for nu in [1, 3] {
            for n in 1..=4 {
                let p = MarketParams { tau: 0.1, ..panel_a(40.0) };
                let spec = ctx.lattice(&p, n, nu)?;
                let m = spec.max_level();
                for (kb, lb) in [(m, m), (1, 1), (2, 1), (1, 3)] {
                    let bounds = TruncationBounds::manual(&spec, kb, lb);
                    let e = enumerate_jump_paths(&spec.q, n, bounds.kbar, bounds.lbar, DEFAULT_PATH_CAP)?;
                    let f = forward_jump_distribution(&spec);
                    let w = within_barrier_distribution(&spec, bounds.kbar, bounds.lbar)?;
                    for l in -m..=m {
                        t.close(f.prob(l), e.full(l), 1e-13, || format!("q_n n={n} nu={nu} l={l}"));
                        t.close(w.prob(l), e.within(l), 1e-13, || format!("q_bar n={n} nu={nu} l={l}"));
                    }
                    for kind in KINDS {
                        let band = Some((&bounds, crate::oracle::BandRule::Kill));
                        let o = enumerate_price(&p, &spec, band, kind, DEFAULT_PATH_CAP)?;
                        let v = price_european_truncated(&p, &spec, &bounds, kind)?.value;
                        t.close(v, o, 1e-13, || format!("V^TT n={n} nu={nu} {kind} k={kb} l={lb}"));
                    }
                }
                for kind in KINDS {
                    let o = enumerate_price(&p, &spec, None, kind, DEFAULT_PATH_CAP)?;
                    let v = price_european_full(&p, &spec, kind)?.value;
                    t.close(v, o, 1e-13, || format!("V n={n} nu={nu} {kind}"));
                }
            }
        }
        Ok(())
    })
}

/// Probability of ending at k after crossing a barrier is bounded by
/// reflected enlarged probabilities.
pub fn check_reflection_bounds(ctx: Ctx) -> CheckOutcome {
    run_check("reflection_bounds", |t| {
        for (nu, n_max) in [(1usize, 8usize), (2, 6), (3, 5)] {
            for n in 2..=n_max {
                let p = MarketParams { tau: 0.4, ..panel_a(40.0) };
                let spec = ctx.lattice(&p, n, nu)?;
                let qt = enlarged_jump_distribution(&spec);
                for (kb, lb) in [(1, 1), (2, 1), (1, 2), (3, 2)] {
                    let e = enumerate_jump_paths(&spec.q, n, kb, lb, DEFAULT_PATH_CAP)?;
                    for k in -lb..=kb {
                        let above: f64 = (1..=nu as i64).map(|i| qt.prob(2 * kb - k + 2 * i)).sum();
                        let below: f64 = (1..=nu as i64).map(|i| qt.prob(2 * lb + k + 2 * i)).sum();
                        let rel = 1e-12 * above.max(below);
                        t.le(e.crossed_above(k), above, rel, || {
                            format!("above n={n} nu={nu} kbar={kb} k={k}")
                        });
                        t.le(e.crossed_below(k), below, rel, || {
                            format!("below n={n} nu={nu} lbar={lb} k={k}")
                        });
                    }
                }
            }
        }
        Ok(())
    })
}

/// Tail bounds on q̃_n: 2e^w w^k/k! for ν = 1 and G W_ν^m/m! (m = ⌊k/ν⌋)
/// for general ν, each above its starting level. Compared in log space.
pub fn check_tail_bounds(ctx: Ctx) -> CheckOutcome {
    run_check("enlarged_tail_bounds", |t| {
        for n in [50, 200] {
            let spec = ctx.lattice(&panel_a(40.0), n, 1)?;
            let qt = enlarged_jump_distribution(&spec);
            let w = spec.w_consts[0];
            let start = (2.0 * w - 1.0).ceil().max(0.0) as i64;
            for k in start.max(1)..=n as i64 {
                let ln_bound = 2f64.ln() + w + k as f64 * w.ln() - ln_gamma(k as f64 + 1.0);
                let q = qt.prob(k);
                if q > 0.0 {
                    t.le(q.ln(), ln_bound, 1e-9, || format!("nu=1 n={n} k={k} (log)"));
                }
            }
        }
        for n in [50, 200] {
            let spec = ctx.lattice(&panel_a(40.0), n, 3)?;
            let consts = truncation_constants(&spec);
            let qt = enlarged_jump_distribution(&spec);
            let wn = consts.w_nu();
            let start = 3 * (2.0 * wn - 1.0).ceil().max(0.0) as i64;
            for k in start.max(1)..=spec.max_level() {
                let m = (k / 3) as f64;
                let ln_bound = consts.ln_g + m * wn.ln() - ln_gamma(m + 1.0);
                let q = qt.prob(k);
                if q > 0.0 {
                    t.le(q.ln(), ln_bound, 1e-9, || format!("nu=3 n={n} k={k} (log)"));
                }
            }
        }
        Ok(())
    })
}

pub fn check_expected_vs_backward(ctx: Ctx, n_max: usize) -> CheckOutcome {
    run_check("expected_value_equals_backward", |t| {
        for nu in [1, 3] {
            for n in [25, 100, n_max] {
                for k in [30.0, 50.0] {
                    let p = panel_a(k);
                    let spec = ctx.lattice(&p, n, nu)?;
                    for kind in KINDS {
                        let a = price_european_full(&p, &spec, kind)?.value;
                        let b = price_european_backward(&p, &spec, kind)?.value;
                        t.close(a, b, 1e-10, || format!("n={n} nu={nu} K={k} {kind}"));
                    }
                }
            }
        }
        Ok(())
    })
}

/// |V − V^TT| < ε = 1/n for theoretical and numerical barriers, together
/// with V^TT ≤ V^T ≤ V.
pub fn check_error_bounds(ctx: Ctx, ns: &[usize]) -> (CheckOutcome, CheckOutcome) {
    let mut chain = Tracker::default();
    let start = Instant::now();
    let err = run_check("european_truncation_error", |t| {
        for &n in ns {
            for nu in [1, 3] {
                for k in [30.0, 40.0, 50.0] {
                    let p = panel_a(k);
                    let spec = ctx.lattice(&p, n, nu)?;
                    let eps = 1.0 / n as f64;
                    for kind in KINDS {
                        let v = price_european_full(&p, &spec, kind)?.value;
                        let theo = theoretical_bounds(&p, &spec, eps, kind)?;
                        let num = search_bounds(&p, &spec, eps, kind)?;
                        for (label, b) in [("theoretical", theo), ("numerical", num)] {
                            let tt = price_european_truncated(&p, &spec, &b, kind)?.value;
                            let ta = price_european_type_a(&p, &spec, &b, kind)?.value;
                            t.record(eps - (v - tt).abs(), || {
                                format!("{label} n={n} nu={nu} K={k} {kind} |V-V^TT|={:.3e}", (v - tt).abs())
                            });
                            chain.le(tt, ta, 1e-12, || format!("V^TT<=V^T {label} n={n} nu={nu} K={k} {kind}"));
                            chain.le(ta, v, 1e-12, || format!("V^T<=V {label} n={n} nu={nu} K={k} {kind}"));
                        }
                    }
                }
            }
        }
        Ok(())
    });
    let chain = chain.finish("ordering_chain", start.elapsed().as_secs_f64());
    (err, chain)
}

pub fn check_boundary_sandwich(ctx: Ctx) -> CheckOutcome {
    run_check("boundary_value_sandwich", |t| {
        for k in [30.0, 40.0, 50.0] {
            let p = panel_a(k);
            let spec = ctx.lattice(&p, 50, 3)?;
            for (kb, lb) in [(3, 3), (8, 5), (12, 12)] {
                let b = TruncationBounds::manual(&spec, kb, lb);
                let ve = price_european_full(&p, &spec, OptionKind::Put)?.value;
                let hi = price_backward_boundary(&p, &spec, &b, k, Exercise::European, OptionKind::Put)?.value;
                let lo = price_backward_boundary(&p, &spec, &b, 0.0, Exercise::European, OptionKind::Put)?.value;
                let tt = price_european_truncated(&p, &spec, &b, OptionKind::Put)?.value;
                t.le(ve, hi, 1e-12, || format!("V_E <= V_E^K K={k} k={kb} l={lb}"));
                t.le(lo, ve, 1e-12, || format!("V_E^0 <= V_E K={k} k={kb} l={lb}"));
                t.close(lo, tt, 1e-12, || format!("V_E^0 = V^TT K={k} k={kb} l={lb}"));
            }
        }
        Ok(())
    })
}

/// |V_A^K − V_A| ≤ |V_E^K − V_E| on a (K, σ) grid.
pub fn check_american_vs_european_error(ctx: Ctx, n: usize) -> CheckOutcome {
    run_check("american_error_le_european", |t| {
        for k in [30.0, 40.0, 50.0] {
            for s2 in [0.01, 0.05, 0.1] {
                let p = MarketParams { sigma: f64::sqrt(s2), ..panel_a(k) };
                let spec = ctx.lattice(&p, n, 3)?;
                let b = TruncationBounds::manual(&spec, 6, 6);
                let ve = price_european_full(&p, &spec, OptionKind::Put)?.value;
                let va = price_american_full(&p, &spec, OptionKind::Put)?.value;
                let vek = price_backward_boundary(&p, &spec, &b, k, Exercise::European, OptionKind::Put)?.value;
                let vak = price_american_truncated(&p, &spec, &b, OptionKind::Put)?.value;
                t.le((vak - va).abs(), (vek - ve).abs(), 1e-12, || format!("K={k} s2={s2}"));
                t.le(ve, va, 1e-12, || format!("V_E <= V_A K={k} s2={s2}"));
            }
        }
        Ok(())
    })
}

pub fn check_american_put_truncation(ctx: Ctx, ns: &[usize]) -> CheckOutcome {
    run_check("american_put_truncation_error", |t| {
        for &n in ns {
            for k in [30.0, 40.0, 50.0] {
                let p = panel_a(k);
                let spec = ctx.lattice(&p, n, 3)?;
                let eps = 1.0 / n as f64;
                let va = price_american_full(&p, &spec, OptionKind::Put)?.value;
                let vak = price_american_put_truncated(&p, &spec, eps)?.value;
                t.record(eps - (va - vak).abs(), || format!("theoretical n={n} K={k}"));
                let b = search_bounds(&p, &spec, eps, OptionKind::Put)?;
                let vn = price_american_truncated(&p, &spec, &b, OptionKind::Put)?.value;
                t.record(eps - (va - vn).abs(), || format!("numerical n={n} K={k}"));
            }
        }
        Ok(())
    })
}

pub fn check_truncated_monotone(ctx: Ctx) -> CheckOutcome {
    run_check("truncated_monotone_in_barriers", |t| {
        let p = panel_a(40.0);
        let spec = ctx.lattice(&p, 80, 3)?;
        for kind in KINDS {
            let mut last = 0.0;
            for kb in 1..=30 {
                let v = price_european_truncated(&p, &spec, &TruncationBounds::manual(&spec, kb, 8), kind)?.value;
                t.le(last, v, 1e-14, || format!("kbar={kb} {kind}"));
                last = v;
            }
            let mut last = 0.0;
            for lb in 1..=30 {
                let v = price_european_truncated(&p, &spec, &TruncationBounds::manual(&spec, 8, lb), kind)?.value;
                t.le(last, v, 1e-14, || format!("lbar={lb} {kind}"));
                last = v;
            }
        }
        Ok(())
    })
}

pub fn check_early_exercise_facts(ctx: Ctx) -> CheckOutcome {
    run_check("early_exercise_sanity", |t| {
        let p = panel_a(40.0);
        let spec = ctx.lattice(&p, 60, 3)?;
        let ec = price_european_full(&p, &spec, OptionKind::Call)?.value;
        let ac = price_american_full(&p, &spec, OptionKind::Call)?.value;
        t.close(ac, ec, 1e-10, || "call without dividends".into());
        let ep = price_european_full(&p, &spec, OptionKind::Put)?.value;
        let ap = price_american_full(&p, &spec, OptionKind::Put)?.value;
        t.le(ep, ap, 0.0, || "american put >= european put".into());
        Ok(())
    })
}

pub fn check_no_jump_limit(ctx: Ctx) -> CheckOutcome {
    run_check("no_jump_limit", |t| {
        let p = MarketParams { lambda: 0.0, ..panel_a(40.0) };
        let spec = ctx.lattice(&p, 2000, 1)?;
        for kind in KINDS {
            let v = price_european_full(&p, &spec, kind)?.value;
            t.close(v, black_scholes_price(&p, kind), 2e-3, || format!("n=2000 {kind}"));
        }
        Ok(())
    })
}

pub fn check_convergence(ctx: Ctx, n: usize) -> CheckOutcome {
    run_check("convergence_to_series", |t| {
        for k in [30.0, 40.0, 50.0] {
            let p = panel_a(k);
            let spec = ctx.lattice(&p, n, 3)?;
            for kind in KINDS {
                let v = price_european_full(&p, &spec, kind)?.value;
                let m = merton_series_price(&p, kind, DEFAULT_SERIES_TOL)?;
                t.close(v, m, 2e-3, || format!("n={n} K={k} {kind}"));
            }
        }
        Ok(())
    })
}

/// Closed-form barriers grow like ln n when ε = 1/n.
pub fn check_bound_growth(ctx: Ctx) -> CheckOutcome {
    run_check("barrier_growth_logarithmic", |t| {
        let p = panel_a(40.0);
        let ns = [100usize, 200, 400, 800];
        for kind in KINDS {
            let mut prev: Option<(usize, i64)> = None;
            for &n in &ns {
                let spec = ctx.lattice(&p, n, 3)?;
                let b = theoretical_bounds(&p, &spec, 1.0 / n as f64, kind)?;
                let a = theoretical_bounds_american_put(&spec, &truncation_constants(&spec), &p, 1.0 / n as f64)?;
                t.le(a.kbar as f64, spec.max_level() as f64, 0.0, || format!("american n={n}"));
                if let Some((pn, pk)) = prev {
                    let ratio = b.kbar as f64 / pk as f64;
                    let allowed = (n as f64).ln() / (pn as f64).ln() + 0.5;
                    t.le(ratio, allowed, 0.0, || format!("{kind} n={pn}->{n} kbar {pk}->{}", b.kbar));
                }
                prev = Some((n, b.kbar));
            }
        }
        Ok(())
    })
}

/// Runs a suite. `corrupt` perturbs the jump law (negative control).
pub fn run_suite(suite: Suite, corrupt: bool) -> ValidationReport {
    let ctx = Ctx { corrupt };
    let full = suite == Suite::Full;
    let mut checks = vec![
        check_moments_quadrature(),
        check_merton_identities(),
        check_jump_law(ctx),
        check_distribution_mass(ctx, if full { 2000 } else { 800 }),
        check_enlarged_and_within(ctx),
        check_oracle_equivalence(ctx),
        check_reflection_bounds(ctx),
        check_tail_bounds(ctx),
        check_expected_vs_backward(ctx, if full { 200 } else { 120 }),
    ];
    let (err, chain) = check_error_bounds(ctx, if full { &[50, 100, 200] } else { &[50, 100] });
    checks.push(err);
    checks.push(chain);
    checks.push(check_boundary_sandwich(ctx));
    checks.push(check_american_vs_european_error(ctx, 60));
    checks.push(check_american_put_truncation(ctx, if full { &[50, 100] } else { &[50] }));
    checks.push(check_truncated_monotone(ctx));
    checks.push(check_early_exercise_facts(ctx));
    checks.push(check_bound_growth(ctx));
    if full {
        checks.push(check_no_jump_limit(ctx));
        checks.push(check_convergence(ctx, 800));
    }
    ValidationReport { checks }
}
