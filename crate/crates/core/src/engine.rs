//! Option pricers on the bivariate lattice.
//!
//! European prices are computed either as a discounted expectation over the
//! terminal (j, l) grid, or by backward induction. Truncated variants keep
//! jump levels in [−l̄, k̄]; in backward mode any node outside the band is
//! replaced by a fixed value `b` (or, for the American call heuristic, by
//! its intrinsic value).

use std::fmt;
use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use crate::error::{invalid, Result};
use crate::lattice::{
    enlarged_jump_distribution, forward_jump_distribution, terminal_brownian_pmf,
    within_barrier_distribution, JumpDistribution, LatticeSpec,
};
use crate::model::{Exercise, MarketParams, OptionKind};
use crate::truncation::{
    numerical_bounds, theoretical_bounds_american_put, theoretical_bounds_call,
    theoretical_bounds_put, truncation_constants, TruncationBounds,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PricingMethod {
    ExpectedValueFull,
    ExpectedValueTypeA,
    ExpectedValueTruncated,
    BackwardFull,
    BackwardBoundary,
    MertonSeries,
}

impl fmt::Display for PricingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PricingMethod::ExpectedValueFull => "expected_value_full",
            PricingMethod::ExpectedValueTypeA => "expected_value_type_a",
            PricingMethod::ExpectedValueTruncated => "expected_value_truncated",
            PricingMethod::BackwardFull => "backward_full",
            PricingMethod::BackwardBoundary => "backward_boundary",
            PricingMethod::MertonSeries => "merton_series",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceResult {
    pub value: f64,
    pub method: PricingMethod,
    pub bounds: Option<TruncationBounds>,
    pub boundary_b: Option<f64>,
    /// Lattice cells touched: convolution cells plus payoff/backward nodes.
    pub nodes_visited: u64,
    pub elapsed: Duration,
}

impl PriceResult {
    pub fn elapsed_secs(&self) -> f64 {
        self.elapsed.as_secs_f64()
    }
}

/// Value assigned to nodes outside the retained jump band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outside {
    Constant(f64),
    /// Immediate-exercise value at the node.
    Intrinsic,
}

fn exp_table(step: f64, range: RangeInclusive<i64>) -> Vec<f64> {
    range.map(|k| (k as f64 * step).exp()).collect()
}

/// e^{−rτ} Σ_{l ∈ levels} Σ_j payoff(S(n, j, l)) P_n(j) dist(l).
fn expected_value(
    params: &MarketParams,
    spec: &LatticeSpec,
    dist: &JumpDistribution,
    levels: RangeInclusive<i64>,
    kind: OptionKind,
) -> (f64, u64) {
    let n = spec.n;
    let pmf = terminal_brownian_pmf(spec);
    let diff: Vec<f64> = (0..=n)
        .map(|j| ((2.0 * j as f64 - n as f64) * spec.diffusion_step).exp())
        .collect();
    let mut total = 0.0;
    let mut nodes = 0u64;
    for l in levels {
        let ql = dist.prob(l);
        nodes += (n + 1) as u64;
        if ql == 0.0 {
            continue;
        }
        let base = params.spot * (l as f64 * spec.h).exp();
        let inner: f64 = diff
            .iter()
            .zip(&pmf)
            .map(|(d, pj)| kind.payoff(base * d, params.strike) * pj)
            .sum();
        total += inner * ql;
    }
    let value = (-params.rate * params.tau).exp() * total;
    (value, nodes + dist.cells + (n + 1) as u64)
}

/// Untruncated price as a discounted expectation (O(n²ν²) for q_n).
pub fn price_european_full(
    params: &MarketParams,
    spec: &LatticeSpec,
    kind: OptionKind,
) -> Result<PriceResult> {
    params.validate()?;
    let start = Instant::now();
    let dist = forward_jump_distribution(spec);
    let (value, nodes) = expected_value(params, spec, &dist, dist.levels(), kind);
    Ok(PriceResult {
        value,
        method: PricingMethod::ExpectedValueFull,
        bounds: None,
        boundary_b: None,
        nodes_visited: nodes,
        elapsed: start.elapsed(),
    })
}

/// Untruncated European price by backward recursion over the whole tree.
pub fn price_european_backward(
    params: &MarketParams,
    spec: &LatticeSpec,
    kind: OptionKind,
) -> Result<PriceResult> {
    params.validate()?;
    let start = Instant::now();
    let m = spec.max_level();
    let (value, nodes) =
        backward_induction(params, spec, m, m, Outside::Constant(0.0), Exercise::European, kind);
    Ok(PriceResult {
        value,
        method: PricingMethod::BackwardFull,
        bounds: None,
        boundary_b: None,
        nodes_visited: nodes,
        elapsed: start.elapsed(),
    })
}

/// V^T: terminal levels outside [−l̄, k̄] are dropped, weights are the full
/// q_n(l).
pub fn price_european_type_a(
    params: &MarketParams,
    spec: &LatticeSpec,
    bounds: &TruncationBounds,
    kind: OptionKind,
) -> Result<PriceResult> {
    params.validate()?;
    check_bounds(bounds)?;
    let start = Instant::now();
    let dist = forward_jump_distribution(spec);
    let m = spec.max_level();
    let levels = -bounds.lbar.min(m)..=bounds.kbar.min(m);
    let (value, nodes) = expected_value(params, spec, &dist, levels, kind);
    Ok(PriceResult {
        value,
        method: PricingMethod::ExpectedValueTypeA,
        bounds: Some(*bounds),
        boundary_b: None,
        nodes_visited: nodes,
        elapsed: start.elapsed(),
    })
}

/// V^TT: terminal levels in [−l̄, k̄] weighted by the within-barrier
/// probabilities q̄_n(l). Costs O(n (k̄ + l̄) ν).
pub fn price_european_truncated(
    params: &MarketParams,
    spec: &LatticeSpec,
    bounds: &TruncationBounds,
    kind: OptionKind,
) -> Result<PriceResult> {
    params.validate()?;
    check_bounds(bounds)?;
    let start = Instant::now();
    let dist = within_barrier_distribution(spec, bounds.kbar, bounds.lbar)?;
    let (value, nodes) = expected_value(params, spec, &dist, dist.levels(), kind);
    Ok(PriceResult {
        value,
        method: PricingMethod::ExpectedValueTruncated,
        bounds: Some(*bounds),
        boundary_b: None,
        nodes_visited: nodes,
        elapsed: start.elapsed(),
    })
}

/// V^b: backward induction where every node with jump level outside
/// [−l̄, k̄] carries the value `b`.
pub fn price_backward_boundary(
    params: &MarketParams,
    spec: &LatticeSpec,
    bounds: &TruncationBounds,
    b: f64,
    exercise: Exercise,
    kind: OptionKind,
) -> Result<PriceResult> {
    params.validate()?;
    check_bounds(bounds)?;
    if !(b >= 0.0) || !b.is_finite() {
        return Err(invalid("boundary value b must be finite and >= 0"));
    }
    let start = Instant::now();
    let (value, nodes) = backward_induction(
        params,
        spec,
        bounds.kbar,
        bounds.lbar,
        Outside::Constant(b),
        exercise,
        kind,
    );
    Ok(PriceResult {
        value,
        method: PricingMethod::BackwardBoundary,
        bounds: Some(*bounds),
        boundary_b: Some(b),
        nodes_visited: nodes,
        elapsed: start.elapsed(),
    })
}

/// Untruncated American price with early exercise at every node; O(n³ν).
pub fn price_american_full(
    params: &MarketParams,
    spec: &LatticeSpec,
    kind: OptionKind,
) -> Result<PriceResult> {
    params.validate()?;
    let start = Instant::now();
    let m = spec.max_level();
    let (value, nodes) =
        backward_induction(params, spec, m, m, Outside::Constant(0.0), Exercise::American, kind);
    Ok(PriceResult {
        value,
        method: PricingMethod::BackwardFull,
        bounds: None,
        boundary_b: None,
        nodes_visited: nodes,
        elapsed: start.elapsed(),
    })
}

/// Truncated American price on the band given by `bounds`.
///
/// Puts use b = K outside the band. Calls have no matching error bound;
/// outside nodes take their intrinsic value, which is a heuristic.
pub fn price_american_truncated(
    params: &MarketParams,
    spec: &LatticeSpec,
    bounds: &TruncationBounds,
    kind: OptionKind,
) -> Result<PriceResult> {
    match kind {
        OptionKind::Put => {
            price_backward_boundary(params, spec, bounds, params.strike, Exercise::American, kind)
        }
        OptionKind::Call => {
            params.validate()?;
            check_bounds(bounds)?;
            let start = Instant::now();
            let (value, nodes) = backward_induction(
                params,
                spec,
                bounds.kbar,
                bounds.lbar,
                Outside::Intrinsic,
                Exercise::American,
                kind,
            );
            Ok(PriceResult {
                value,
                method: PricingMethod::BackwardBoundary,
                bounds: Some(*bounds),
                boundary_b: None,
                nodes_visited: nodes,
                elapsed: start.elapsed(),
            })
        }
    }
}

/// American put with closed-form barriers for ε and b = K; the result is
/// within ε of [`price_american_full`].
pub fn price_american_put_truncated(
    params: &MarketParams,
    spec: &LatticeSpec,
    epsilon: f64,
) -> Result<PriceResult> {
    let start = Instant::now();
    let consts = truncation_constants(spec);
    let bounds = theoretical_bounds_american_put(spec, &consts, params, epsilon)?;
    let mut res = price_american_truncated(params, spec, &bounds, OptionKind::Put)?;
    res.elapsed = start.elapsed();
    Ok(res)
}

/// Closed-form European barriers for `kind` at tolerance ε.
pub fn theoretical_bounds(
    params: &MarketParams,
    spec: &LatticeSpec,
    epsilon: f64,
    kind: OptionKind,
) -> Result<TruncationBounds> {
    let consts = truncation_constants(spec);
    match kind {
        OptionKind::Call => theoretical_bounds_call(spec, &consts, params, epsilon),
        OptionKind::Put => theoretical_bounds_put(spec, &consts, params, epsilon),
    }
}

/// Numerical barriers for `kind` at tolerance ε (builds q̃_n, O(n²)).
pub fn search_bounds(
    params: &MarketParams,
    spec: &LatticeSpec,
    epsilon: f64,
    kind: OptionKind,
) -> Result<TruncationBounds> {
    let qtilde = enlarged_jump_distribution(spec);
    numerical_bounds(spec, &qtilde, params, epsilon, kind)
}

fn check_bounds(bounds: &TruncationBounds) -> Result<()> {
    if bounds.kbar < 1 || bounds.lbar < 1 {
        return Err(invalid("barriers kbar and lbar must be >= 1"));
    }
    Ok(())
}

/// Backward induction on the band [−lbar, kbar]. Returns V(0, 0, 0) and the
/// number of interior node updates (terminal nodes included).
///
/// Each time slab holds rows j = 0..=i over the active levels
/// [max(−νi, −l̄), min(νi, k̄)] padded by ν ghost columns per side. A child
/// that falls in a ghost column is necessarily outside the band, so ghosts
/// carry the `outside` value.
fn backward_induction(
    params: &MarketParams,
    spec: &LatticeSpec,
    kbar: i64,
    lbar: i64,
    outside: Outside,
    exercise: Exercise,
    kind: OptionKind,
) -> (f64, u64) {
    let n = spec.n;
    let nu = spec.nu as i64;
    let m = spec.max_level();
    let (kbar, lbar) = (kbar.clamp(1, m), lbar.clamp(1, m));
    let strike = params.strike;
    let p = spec.p;
    let disc = (-params.rate * spec.dt).exp();
    let q = &spec.q;

    // e^{lh} over every level a ghost column can take.
    let level_lo = -lbar - nu;
    let jump_factor = exp_table(spec.h, level_lo..=kbar + nu);
    let jf = |l: i64| jump_factor[(l - level_lo) as usize];
    let range = |i: usize| {
        let i = i as i64;
        ((-nu * i).max(-lbar), (nu * i).min(kbar))
    };

    let fill_row = |row: &mut [f64], i: usize, j: usize, lo: i64, hi: i64, interior: bool| {
        let row_factor = params.spot * ((2.0 * j as f64 - i as f64) * spec.diffusion_step).exp();
        for (c, slot) in row.iter_mut().enumerate() {
            let l = lo - nu + c as i64;
            let inside = l >= lo && l <= hi;
            if inside && !interior {
                continue;
            }
            *slot = if inside {
                kind.payoff(row_factor * jf(l), strike)
            } else {
                match outside {
                    Outside::Constant(b) => b,
                    Outside::Intrinsic => kind.payoff(row_factor * jf(l), strike),
                }
            };
        }
    };

    let (lo, hi) = range(n);
    let mut pw = (hi - lo + 1 + 2 * nu) as usize;
    let mut next = vec![0.0; (n + 1) * pw];
    for j in 0..=n {
        fill_row(&mut next[j * pw..(j + 1) * pw], n, j, lo, hi, true);
    }
    let mut nodes = ((n + 1) as i64 * (hi - lo + 1)) as u64;
    let mut next_lo = lo;
    let mut cur: Vec<f64> = Vec::with_capacity(next.len());
    let mut mixed = vec![0.0; pw];

    for i in (0..n).rev() {
        let (lo, hi) = range(i);
        let cw = (hi - lo + 1 + 2 * nu) as usize;
        cur.clear();
        cur.resize((i + 1) * cw, 0.0);
        for j in 0..=i {
            let up = &next[(j + 1) * pw..(j + 2) * pw];
            let down = &next[j * pw..(j + 1) * pw];
            for c in 0..pw {
                mixed[c] = p * up[c] + (1.0 - p) * down[c];
            }
            let row = &mut cur[j * cw..(j + 1) * cw];
            let row_factor = params.spot * ((2.0 * j as f64 - i as f64) * spec.diffusion_step).exp();
            for l in lo..=hi {
                // Child column of level l + k is (l − next_lo) + (k + ν).
                let base = (l - next_lo) as usize;
                let mut acc = 0.0;
                for (k, qk) in q.iter().enumerate() {
                    acc += qk * mixed[base + k];
                }
                let mut v = disc * acc;
                if exercise == Exercise::American {
                    v = v.max(kind.payoff(row_factor * jf(l), strike));
                }
                row[(l - lo + nu) as usize] = v;
            }
            fill_row(row, i, j, lo, hi, false);
        }
        nodes += ((i + 1) as i64 * (hi - lo + 1)) as u64;
        std::mem::swap(&mut cur, &mut next);
        pw = cw;
        next_lo = lo;
    }
    (next[nu as usize], nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::model::black_scholes_price;

    fn params(strike: f64) -> MarketParams {
        MarketParams::from_variances(40.0, strike, 0.08, 0.0, 0.05, 5.0, -0.025, 0.05, 1.0)
    }

    fn crr(params: &MarketParams, n: usize, kind: OptionKind) -> f64 {
        // Plain CRR binomial with the same drift-adjusted probability.
        let dt = params.tau / n as f64;
        let u = params.sigma * dt.sqrt();
        let alpha = params.rate - params.dividend - 0.5 * params.sigma * params.sigma;
        let p = 0.5 * (1.0 + alpha * dt.sqrt() / params.sigma);
        let mut v: Vec<f64> = (0..=n)
            .map(|j| kind.payoff(params.spot * ((2.0 * j as f64 - n as f64) * u).exp(), params.strike))
            .collect();
        for i in (0..n).rev() {
            for j in 0..=i {
                v[j] = (-params.rate * dt).exp() * (p * v[j + 1] + (1.0 - p) * v[j]);
            }
        }
        v[0]
    }

    #[test]
    fn no_jumps_is_crr() {
        let p = MarketParams { lambda: 0.0, ..params(40.0) };
        let spec = build_lattice(&p, 200, 3, 1.0).unwrap();
        for kind in [OptionKind::Call, OptionKind::Put] {
            let v = price_european_full(&p, &spec, kind).unwrap().value;
            assert!((v - crr(&p, 200, kind)).abs() < 1e-12);
            assert!((v - black_scholes_price(&p, kind)).abs() < 2e-2);
        }
        let spec = build_lattice(&p, 2000, 1, 1.0).unwrap();
        let v = price_european_full(&p, &spec, OptionKind::Put).unwrap().value;
        assert!((v - black_scholes_price(&p, OptionKind::Put)).abs() < 2e-3);
    }

    #[test]
    fn expected_value_equals_backward() {
        for nu in [1, 3] {
            for kind in [OptionKind::Call, OptionKind::Put] {
                let p = params(45.0);
                let spec = build_lattice(&p, 60, nu, 1.0).unwrap();
                let a = price_european_full(&p, &spec, kind).unwrap().value;
                let b = price_european_backward(&p, &spec, kind).unwrap().value;
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn full_bounds_reduce_to_full_price() {
        let p = params(40.0);
        let spec = build_lattice(&p, 40, 3, 1.0).unwrap();
        let full = TruncationBounds::full(&spec);
        for kind in [OptionKind::Call, OptionKind::Put] {
            let v = price_european_full(&p, &spec, kind).unwrap().value;
            let ta = price_european_type_a(&p, &spec, &full, kind).unwrap().value;
            let tt = price_european_truncated(&p, &spec, &full, kind).unwrap().value;
            let vb = price_backward_boundary(&p, &spec, &full, 0.0, Exercise::European, kind)
                .unwrap()
                .value;
            assert!((v - ta).abs() < 1e-13);
            assert!((v - tt).abs() < 1e-13);
            assert!((v - vb).abs() < 1e-10);
            let am = price_american_full(&p, &spec, kind).unwrap().value;
            let amt = price_american_truncated(&p, &spec, &full, kind).unwrap().value;
            assert!((am - amt).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_equals_zero_boundary_backward() {
        let p = params(40.0);
        let spec = build_lattice(&p, 50, 3, 1.0).unwrap();
        for (kb, lb) in [(3, 3), (6, 11), (14, 5)] {
            let bounds = TruncationBounds::manual(&spec, kb, lb);
            for kind in [OptionKind::Call, OptionKind::Put] {
                let tt = price_european_truncated(&p, &spec, &bounds, kind).unwrap().value;
                let vb = price_backward_boundary(&p, &spec, &bounds, 0.0, Exercise::European, kind)
                    .unwrap()
                    .value;
                assert!((tt - vb).abs() < 1e-12, "{tt} vs {vb}");
            }
        }
    }

    #[test]
    fn ordering_chain() {
        let p = params(40.0);
        let spec = build_lattice(&p, 80, 3, 1.0).unwrap();
        for (kb, lb) in [(2, 2), (5, 9), (9, 5), (20, 20)] {
            let bounds = TruncationBounds::manual(&spec, kb, lb);
            for kind in [OptionKind::Call, OptionKind::Put] {
                let v = price_european_full(&p, &spec, kind).unwrap().value;
                let ta = price_european_type_a(&p, &spec, &bounds, kind).unwrap().value;
                let tt = price_european_truncated(&p, &spec, &bounds, kind).unwrap().value;
                assert!(tt <= ta + 1e-12 && ta <= v + 1e-12);
            }
        }
    }

    #[test]
    fn boundary_k_sandwiches_european_put() {
        let p = params(40.0);
        let spec = build_lattice(&p, 60, 3, 1.0).unwrap();
        let bounds = TruncationBounds::manual(&spec, 4, 4);
        let ve = price_european_full(&p, &spec, OptionKind::Put).unwrap().value;
        let vk = price_backward_boundary(&p, &spec, &bounds, 40.0, Exercise::European, OptionKind::Put)
            .unwrap()
            .value;
        let v0 = price_backward_boundary(&p, &spec, &bounds, 0.0, Exercise::European, OptionKind::Put)
            .unwrap()
            .value;
        assert!(vk >= ve && ve >= v0);
    }

    #[test]
    fn american_dominance() {
        let p = params(40.0);
        let spec = build_lattice(&p, 60, 3, 1.0).unwrap();
        let eu = price_european_full(&p, &spec, OptionKind::Put).unwrap().value;
        let am = price_american_full(&p, &spec, OptionKind::Put).unwrap().value;
        assert!(am > eu);
        // No early exercise of a call without dividends.
        let eu = price_european_full(&p, &spec, OptionKind::Call).unwrap().value;
        let am = price_american_full(&p, &spec, OptionKind::Call).unwrap().value;
        assert!((am - eu).abs() < 1e-10);
        let bounds = TruncationBounds::manual(&spec, 6, 6);
        let ap = price_american_truncated(&p, &spec, &bounds, OptionKind::Put).unwrap().value;
        let ep = price_backward_boundary(&p, &spec, &bounds, 40.0, Exercise::European, OptionKind::Put)
            .unwrap()
            .value;
        assert!(ap >= ep);
    }

    #[test]
    fn rejects_bad_boundary_inputs() {
        let p = params(40.0);
        let spec = build_lattice(&p, 20, 1, 1.0).unwrap();
        let bounds = TruncationBounds::manual(&spec, 3, 3);
        assert!(price_backward_boundary(&p, &spec, &bounds, -1.0, Exercise::European, OptionKind::Put).is_err());
        let bad = TruncationBounds { kbar: 0, ..bounds };
        assert!(price_european_truncated(&p, &spec, &bad, OptionKind::Put).is_err());
    }

    #[test]
    fn truncated_monotone_in_barriers() {
        let p = params(40.0);
        let spec = build_lattice(&p, 60, 3, 1.0).unwrap();
        for kind in [OptionKind::Call, OptionKind::Put] {
            let mut last = 0.0;
            for kb in 1..25 {
                let b = TruncationBounds::manual(&spec, kb, 6);
                let v = price_european_truncated(&p, &spec, &b, kind).unwrap().value;
                assert!(v >= last - 1e-14);
                last = v;
            }
            let mut last = 0.0;
            for lb in 1..25 {
                let b = TruncationBounds::manual(&spec, 6, lb);
                let v = price_european_truncated(&p, &spec, &b, kind).unwrap().value;
                assert!(v >= last - 1e-14);
                last = v;
            }
        }
    }
}
