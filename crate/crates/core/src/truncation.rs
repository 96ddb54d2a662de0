//! Jump-level barriers (k̄, l̄) that keep the truncation error below ε.
//!
//! Two families are provided: closed-form bounds built from the constants
//! W_i, M_i, G (cost O(ν)), and the numerical tail-sum search over the
//! enlarged distribution q̃_n (cost O(n²) for q̃_n, O(νn) for the scan).

use std::f64::consts::E;
use std::fmt;

use crate::error::{invalid, PricingError, Result};
use crate::lattice::{DistributionKind, JumpDistribution, LatticeSpec};
use crate::model::{MarketParams, OptionKind};

/// Constants derived from w_i = max(c_{+i}, c_{−i}).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationConstants {
    /// W_1 = w_1, W_{i+1} = w_{i+1} + W_i^{(i+1)/i}; stored at i − 1.
    pub big_w: Vec<f64>,
    /// M_i = max{W_i, W_i^{(1−i)/i}}; stored at i − 1.
    pub m: Vec<f64>,
    /// G = 2ν max{W_ν, 1} e^{W_ν} ∏_{i<ν} M_i²; may overflow to +inf.
    pub g: f64,
    /// ln G, finite whenever the W_i are.
    pub ln_g: f64,
    pub k_plus: f64,
    pub k_minus: f64,
    /// w = max(c_{+1}, c_{−1}), used by the ν = 1 formulas.
    pub w_nu1: f64,
}

impl TruncationConstants {
    pub fn w_nu(&self) -> f64 {
        *self.big_w.last().expect("nu >= 1")
    }

    /// True when the jump law carries no mass off level 0.
    pub fn is_degenerate(&self) -> bool {
        self.big_w.iter().all(|w| *w == 0.0)
    }
}

pub fn truncation_constants(spec: &LatticeSpec) -> TruncationConstants {
    let nu = spec.nu;
    let mut big_w = Vec::with_capacity(nu);
    for (idx, &w) in spec.w_consts.iter().enumerate() {
        let next = match big_w.last() {
            None => w,
            Some(&prev) => {
                let i = idx as f64;
                w + f64::powf(prev, (i + 1.0) / i)
            }
        };
        big_w.push(next);
    }
    let m: Vec<f64> = big_w
        .iter()
        .enumerate()
        .map(|(idx, &wi)| {
            let i = (idx + 1) as f64;
            wi.max(wi.powf((1.0 - i) / i))
        })
        .collect();
    let w_nu = big_w[nu - 1];
    let ln_prod: f64 = m[..nu - 1].iter().map(|mi| 2.0 * mi.ln()).sum();
    let ln_g = (2.0 * nu as f64).ln() + w_nu.max(1.0).ln() + w_nu + ln_prod;
    let g = ln_g.exp();

    let h = spec.h;
    let up: f64 = (0..nu).map(|r| (h * r as f64).exp()).sum();
    let down: f64 = (0..nu).map(|r| (-h * r as f64).exp()).sum();
    let wsq = (w_nu * w_nu).max(1.0);
    let k_plus = up + nu as f64 * wsq * (2.0 * h * nu as f64).exp() * down;
    let k_minus = down + nu as f64 * wsq * up;

    TruncationConstants {
        big_w,
        m,
        g,
        ln_g,
        k_plus,
        k_minus,
        w_nu1: spec.w_consts[0],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMethod {
    TheoreticalCall,
    TheoreticalPut,
    TheoreticalAmericanPut,
    NumericalCall,
    NumericalPut,
    /// Supplied directly (e.g. the whole tree).
    Manual,
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMethod::TheoreticalCall => "theoretical_call",
            BoundMethod::TheoreticalPut => "theoretical_put",
            BoundMethod::TheoreticalAmericanPut => "theoretical_american_put",
            BoundMethod::NumericalCall => "numerical_call",
            BoundMethod::NumericalPut => "numerical_put",
            BoundMethod::Manual => "manual",
        })
    }
}

/// Barrier levels: the tree keeps jump levels in [−lbar, kbar].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationBounds {
    pub kbar: i64,
    pub lbar: i64,
    pub epsilon: f64,
    pub method: BoundMethod,
    /// Threshold η of the numerical search.
    pub eta: Option<f64>,
}

impl TruncationBounds {
    /// Barriers at ±νn: nothing is cut.
    pub fn full(spec: &LatticeSpec) -> Self {
        Self::manual(spec, spec.max_level(), spec.max_level())
    }

    pub fn manual(spec: &LatticeSpec, kbar: i64, lbar: i64) -> Self {
        let m = spec.max_level();
        Self {
            kbar: kbar.clamp(1, m),
            lbar: lbar.clamp(1, m),
            epsilon: 0.0,
            method: BoundMethod::Manual,
            eta: None,
        }
    }

    pub fn width(&self) -> i64 {
        self.kbar + self.lbar + 1
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid("epsilon must be a positive finite number"));
    }
    Ok(())
}

fn checked_ln(x: f64, what: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x.ln())
    } else {
        Err(PricingError::Domain(format!("ln of non-positive or non-finite {what} = {x}")))
    }
}

/// ν⌈x⌉ − 1, computed in floating point.
fn nu_ceil(nu: usize, x: f64) -> f64 {
    nu as f64 * x.ceil() - 1.0
}

fn clamp_level(x: f64, max_level: i64) -> i64 {
    if x.is_nan() {
        return max_level;
    }
    x.max(1.0).min(max_level as f64) as i64
}

fn degenerate_bounds(spec: &LatticeSpec, epsilon: f64, method: BoundMethod) -> TruncationBounds {
    TruncationBounds {
        kbar: 1.min(spec.max_level()),
        lbar: 1.min(spec.max_level()),
        epsilon,
        method,
        eta: None,
    }
}

/// Closed-form call barriers for general ν. For ν = 1 the specialised
/// formulas of [`theoretical_bounds_call_nu1`] are also evaluated and the
/// narrower pair is returned.
pub fn theoretical_bounds_call(
    spec: &LatticeSpec,
    consts: &TruncationConstants,
    params: &MarketParams,
    epsilon: f64,
) -> Result<TruncationBounds> {
    check_epsilon(epsilon)?;
    if consts.is_degenerate() {
        return Ok(degenerate_bounds(spec, epsilon, BoundMethod::TheoreticalCall));
    }
    let nu = spec.nu;
    let (h, w_nu) = (spec.h, consts.w_nu());
    let hnu = h * nu as f64;
    let common = -epsilon.ln()
        + checked_ln(4.0 * params.spot, "4 S0")?
        + consts.ln_g
        + (spec.alpha - params.rate) * params.tau;
    let floor = nu_ceil(nu, 2.0 * hnu.exp() * w_nu - 1.0);
    let k = nu_ceil(
        nu,
        (hnu + 1.0).exp() * w_nu + common + checked_ln(consts.k_plus, "k+")?,
    )
    .max(floor);
    let l = nu_ceil(
        nu,
        (1.0 - hnu).exp() * w_nu + common + checked_ln(consts.k_minus, "k-")?,
    )
    .max(floor);
    let m = spec.max_level();
    let general = TruncationBounds {
        kbar: clamp_level(k, m),
        lbar: clamp_level(l, m),
        epsilon,
        method: BoundMethod::TheoreticalCall,
        eta: None,
    };
    if nu == 1 {
        let special = theoretical_bounds_call_nu1(spec, consts, params, epsilon)?;
        if special.width() < general.width() {
            return Ok(special);
        }
    }
    Ok(general)
}

/// Call barriers specialised to ν = 1.
pub fn theoretical_bounds_call_nu1(
    spec: &LatticeSpec,
    consts: &TruncationConstants,
    params: &MarketParams,
    epsilon: f64,
) -> Result<TruncationBounds> {
    check_epsilon(epsilon)?;
    if spec.nu != 1 {
        return Err(invalid("the specialised call bound requires nu = 1"));
    }
    if consts.is_degenerate() {
        return Ok(degenerate_bounds(spec, epsilon, BoundMethod::TheoreticalCall));
    }
    let (h, w) = (spec.h, consts.w_nu1);
    let c0 = w + (spec.alpha - params.rate) * params.tau - 1.0
        + checked_ln(4.0 * params.spot, "4 S0")?;
    let lbar = (-epsilon.ln() + w * (1.0 - h).exp() + (2.0 + h.exp() * w).ln() + c0)
        .max(2.0 * w - 2.0)
        .max(2.0 * h.exp() * w - 3.0)
        .ceil();
    let kbar = (-epsilon.ln() + w * (1.0 + h).exp() + (2.0 + (-h).exp() * w).ln() + c0)
        .max(2.0 * h.exp() * w - 2.0)
        .ceil();
    let m = spec.max_level();
    Ok(TruncationBounds {
        kbar: clamp_level(kbar, m),
        lbar: clamp_level(lbar, m),
        epsilon,
        method: BoundMethod::TheoreticalCall,
        eta: None,
    })
}

fn put_like_bound(
    spec: &LatticeSpec,
    consts: &TruncationConstants,
    params: &MarketParams,
    epsilon: f64,
    rate_term: f64,
    method: BoundMethod,
) -> Result<TruncationBounds> {
    check_epsilon(epsilon)?;
    if consts.is_degenerate() {
        return Ok(degenerate_bounds(spec, epsilon, method));
    }
    let nu = spec.nu;
    let nuf = nu as f64;
    let w_nu = consts.w_nu();
    let floor = nu_ceil(nu, 2.0 * w_nu - 1.0);
    let main = nu_ceil(
        nu,
        w_nu * E - epsilon.ln() - rate_term
            + checked_ln(4.0 * nuf * (nuf + 1.0) * params.strike, "4ν(ν+1)K")?
            + consts.ln_g,
    );
    let level = clamp_level(main.max(floor), spec.max_level());
    Ok(TruncationBounds {
        kbar: level,
        lbar: level,
        epsilon,
        method,
        eta: None,
    })
}

/// Closed-form European put barriers (k̄ = l̄). For ν = 1 the narrower of the
/// general and the specialised formula is returned.
pub fn theoretical_bounds_put(
    spec: &LatticeSpec,
    consts: &TruncationConstants,
    params: &MarketParams,
    epsilon: f64,
) -> Result<TruncationBounds> {
    let general = put_like_bound(
        spec,
        consts,
        params,
        epsilon,
        params.rate * params.tau,
        BoundMethod::TheoreticalPut,
    )?;
    if spec.nu == 1 && !consts.is_degenerate() {
        let special = theoretical_bounds_put_nu1(spec, consts, params, epsilon)?;
        if special.width() < general.width() {
            return Ok(special);
        }
    }
    Ok(general)
}

/// Put barriers specialised to ν = 1.
pub fn theoretical_bounds_put_nu1(
    spec: &LatticeSpec,
    consts: &TruncationConstants,
    params: &MarketParams,
    epsilon: f64,
) -> Result<TruncationBounds> {
    check_epsilon(epsilon)?;
    if spec.nu != 1 {
        return Err(invalid("the specialised put bound requires nu = 1"));
    }
    if consts.is_degenerate() {
        return Ok(degenerate_bounds(spec, epsilon, BoundMethod::TheoreticalPut));
    }
    let w = consts.w_nu1;
    let c0 = w * (E + 1.0) - params.rate * params.tau - 1.0
        + checked_ln(4.0 * params.strike, "4 K")?
        + (2.0 + w).ln();
    let level = (-epsilon.ln() + c0).max(2.0 * w - 2.0).ceil();
    let level = clamp_level(level, spec.max_level());
    Ok(TruncationBounds {
        kbar: level,
        lbar: level,
        epsilon,
        method: BoundMethod::TheoreticalPut,
        eta: None,
    })
}

/// Closed-form American put barriers (k̄ = l̄); same as the European put
/// bound without the −rτ term.
pub fn theoretical_bounds_american_put(
    spec: &LatticeSpec,
    consts: &TruncationConstants,
    params: &MarketParams,
    epsilon: f64,
) -> Result<TruncationBounds> {
    put_like_bound(
        spec,
        consts,
        params,
        epsilon,
        0.0,
        BoundMethod::TheoreticalAmericanPut,
    )
}

/// Tail-sum search over the enlarged distribution.
///
/// Call: with η = ε / (2 e^{(α−r)τ} S0), k̄ is the first i (scanning down
/// from νn) where (ν+1) Σ_{k≥i} e^{hk} q̃(k) ≥ η, and l̄ the first i where
/// Σ_{k≥i} q̃(k) ≥ η / (ν e^{h k̄} + 1).
///
/// Put: with η = ε / (2 e^{−rτ} K (ν+1)), k̄ = l̄ is the first i where
/// Σ_{k≥i} q̃(k) ≥ η.
///
/// A scan that never reaches η ends at level 1.
pub fn numerical_bounds(
    spec: &LatticeSpec,
    qtilde: &JumpDistribution,
    params: &MarketParams,
    epsilon: f64,
    kind: OptionKind,
) -> Result<TruncationBounds> {
    check_epsilon(epsilon)?;
    if qtilde.kind != DistributionKind::Enlarged {
        return Err(invalid("numerical bounds need the enlarged distribution"));
    }
    let m = spec.max_level();
    let nu = spec.nu as f64;
    let first_crossing = |weight: &dyn Fn(i64) -> f64, threshold: f64| -> i64 {
        let mut acc = 0.0;
        for i in (1..=m).rev() {
            acc += weight(i);
            if acc >= threshold {
                return i;
            }
        }
        1
    };
    match kind {
        OptionKind::Call => {
            let eta = epsilon / (2.0 * ((spec.alpha - params.rate) * params.tau).exp() * params.spot);
            let h = spec.h;
            let exp_weight = |k: i64| {
                let q = qtilde.prob(k);
                if q > 0.0 {
                    (nu + 1.0) * (h * k as f64 + q.ln()).exp()
                } else {
                    0.0
                }
            };
            let kbar = first_crossing(&exp_weight, eta);
            let lower_eta = eta / (nu * (h * kbar as f64).exp() + 1.0);
            let lbar = first_crossing(&|k| qtilde.prob(k), lower_eta);
            Ok(TruncationBounds {
                kbar,
                lbar,
                epsilon,
                method: BoundMethod::NumericalCall,
                eta: Some(eta),
            })
        }
        OptionKind::Put => {
            let eta = epsilon / (2.0 * (-params.rate * params.tau).exp() * params.strike * (nu + 1.0));
            let level = first_crossing(&|k| qtilde.prob(k), eta);
            Ok(TruncationBounds {
                kbar: level,
                lbar: level,
                epsilon,
                method: BoundMethod::NumericalPut,
                eta: Some(eta),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, enlarged_jump_distribution};

    fn params() -> MarketParams {
        MarketParams::from_variances(40.0, 40.0, 0.08, 0.0, 0.05, 5.0, -0.025, 0.05, 1.0)
    }

    #[test]
    fn nu1_constants() {
        let spec = build_lattice(&params(), 100, 1, 1.0).unwrap();
        let c = truncation_constants(&spec);
        let w1 = spec.w_consts[0];
        assert_eq!(c.big_w, vec![w1]);
        assert_eq!(c.w_nu1, w1);
        assert!((c.g - 2.0 * w1.max(1.0) * w1.exp()).abs() < 1e-12);
    }

    #[test]
    fn nu2_recursion() {
        let mut spec = build_lattice(&params(), 100, 2, 1.0).unwrap();
        spec.w_consts = vec![1.0, 1.0];
        let c = truncation_constants(&spec);
        assert_eq!(c.big_w, vec![1.0, 2.0]);
        assert_eq!(c.m[0], 1.0);
        // M_2 = max{2, 2^{-1/2}}.
        assert_eq!(c.m[1], 2.0);
    }

    #[test]
    fn nu3_constants_recomputed() {
        let spec = build_lattice(&params(), 400, 3, 1.0).unwrap();
        let c = truncation_constants(&spec);
        let w = &spec.w_consts;
        let w1 = w[0];
        let w2 = w[1] + w1.powi(2);
        let w3 = w[2] + w2.powf(1.5);
        let m1 = w1.max(1.0);
        let m2 = w2.max(w2.powf(-0.5));
        let g = 6.0 * w3.max(1.0) * w3.exp() * (m1 * m1) * (m2 * m2);
        let h = spec.h;
        let kp = 1.0 + h.exp() + (2.0 * h).exp()
            + 3.0 * w3.powi(2).max(1.0) * (6.0 * h).exp() * (1.0 + (-h).exp() + (-2.0 * h).exp());
        let km = 1.0 + (-h).exp() + (-2.0 * h).exp()
            + 3.0 * w3.powi(2).max(1.0) * (1.0 + h.exp() + (2.0 * h).exp());
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
        assert!(rel(c.big_w[0], w1) && rel(c.big_w[1], w2) && rel(c.big_w[2], w3));
        assert!(rel(c.m[0], m1) && rel(c.m[1], m2));
        assert!(rel(c.g, g), "{} vs {g}", c.g);
        assert!(rel(c.k_plus, kp), "{} vs {kp}", c.k_plus);
        assert!(rel(c.k_minus, km), "{} vs {km}", c.k_minus);
        assert!(c.g.is_finite() && c.g > 0.0);
        assert!((c.ln_g - g.ln()).abs() < 1e-12 * g.ln().abs());
    }

    #[test]
    fn long_maturity_constants_stay_usable() {
        // λτ = 50: e^{W_ν} overflows but ln G does not.
        let p = MarketParams::from_variances(40.0, 40.0, 0.08, 0.0, 0.05, 5.0, -0.025, 0.05, 10.0);
        let spec = build_lattice(&p, 400, 3, 1.0).unwrap();
        let c = truncation_constants(&spec);
        assert!(c.ln_g.is_finite());
        let b = theoretical_bounds_put(&spec, &c, &p, 1.0 / 400.0).unwrap();
        assert!(b.kbar >= 1 && b.kbar <= spec.max_level());
        let b = theoretical_bounds_call(&spec, &c, &p, 1.0 / 400.0).unwrap();
        assert!(b.kbar >= 1 && b.kbar <= spec.max_level());
    }

    #[test]
    fn huge_epsilon_hits_floor() {
        let p = params();
        for nu in [1, 3] {
            let spec = build_lattice(&p, 200, nu, 1.0).unwrap();
            let c = truncation_constants(&spec);
            let eps = 100f64.exp();
            let put = put_like_bound(&spec, &c, &p, eps, p.rate * p.tau, BoundMethod::TheoreticalPut)
                .unwrap();
            let floor = (nu_ceil(nu, 2.0 * c.w_nu() - 1.0)).max(1.0) as i64;
            assert_eq!(put.kbar, floor);
            let call = theoretical_bounds_call(&spec, &c, &p, eps).unwrap();
            let cfloor = nu_ceil(nu, 2.0 * (spec.h * nu as f64).exp() * c.w_nu() - 1.0).max(1.0) as i64;
            if nu == 3 {
                assert_eq!((call.kbar, call.lbar), (cfloor, cfloor));
            }
        }
    }

    #[test]
    fn epsilon_must_be_positive() {
        let p = params();
        let spec = build_lattice(&p, 50, 3, 1.0).unwrap();
        let c = truncation_constants(&spec);
        assert!(theoretical_bounds_call(&spec, &c, &p, 0.0).is_err());
        assert!(theoretical_bounds_put(&spec, &c, &p, -1.0).is_err());
        assert!(theoretical_bounds_american_put(&spec, &c, &p, f64::NAN).is_err());
        let qt = enlarged_jump_distribution(&spec);
        assert!(numerical_bounds(&spec, &qt, &p, 0.0, OptionKind::Put).is_err());
    }

    #[test]
    fn american_put_equals_put_at_zero_rate() {
        let p = MarketParams { rate: 0.0, ..params() };
        let spec = build_lattice(&p, 200, 3, 1.0).unwrap();
        let c = truncation_constants(&spec);
        let eu = theoretical_bounds_put(&spec, &c, &p, 1.0 / 200.0).unwrap();
        let am = theoretical_bounds_american_put(&spec, &c, &p, 1.0 / 200.0).unwrap();
        assert_eq!((eu.kbar, eu.lbar), (am.kbar, am.lbar));
    }

    #[test]
    fn halving_epsilon_moves_at_most_nu() {
        let p = params();
        for nu in [1, 3] {
            let spec = build_lattice(&p, 400, nu, 1.0).unwrap();
            let c = truncation_constants(&spec);
            for eps in [1e-2, 1e-3, 1.0 / 400.0, 1e-6] {
                let a = theoretical_bounds_american_put(&spec, &c, &p, eps).unwrap();
                let b = theoretical_bounds_american_put(&spec, &c, &p, eps / 2.0).unwrap();
                assert!(b.kbar >= a.kbar && b.kbar - a.kbar <= nu as i64);
            }
        }
    }

    #[test]
    fn doubling_strike_moves_put_bound_by_at_most_nu() {
        let p = params();
        let spec = build_lattice(&p, 400, 3, 1.0).unwrap();
        let c = truncation_constants(&spec);
        let a = put_like_bound(&spec, &c, &p, 1e-3, p.rate * p.tau, BoundMethod::TheoreticalPut).unwrap();
        let p2 = p.with_strike(80.0);
        let b = put_like_bound(&spec, &c, &p2, 1e-3, p.rate * p.tau, BoundMethod::TheoreticalPut).unwrap();
        assert!(b.kbar >= a.kbar && b.kbar - a.kbar <= 3);
    }

    #[test]
    fn numerical_search_limits() {
        let p = params();
        let spec = build_lattice(&p, 10, 3, 1.0).unwrap();
        let qt = enlarged_jump_distribution(&spec);
        // A vanishing tolerance keeps the whole tree.
        for kind in [OptionKind::Call, OptionKind::Put] {
            let b = numerical_bounds(&spec, &qt, &p, 1e-300, kind).unwrap();
            assert_eq!((b.kbar, b.lbar), (30, 30));
        }
        // A tolerance above every tail sum cuts to the innermost level.
        let b = numerical_bounds(&spec, &qt, &p, 1e6, OptionKind::Put).unwrap();
        assert_eq!((b.kbar, b.lbar), (1, 1));
    }

    #[test]
    fn numerical_search_leaves_tail_below_eta() {
        let p = params();
        let spec = build_lattice(&p, 200, 3, 1.0).unwrap();
        let qt = enlarged_jump_distribution(&spec);
        let b = numerical_bounds(&spec, &qt, &p, 1.0 / 200.0, OptionKind::Put).unwrap();
        let eta = b.eta.unwrap();
        let tail: f64 = (b.kbar + 1..=spec.max_level()).map(|k| qt.prob(k)).sum();
        assert!(tail < eta);
        let with: f64 = (b.kbar..=spec.max_level()).map(|k| qt.prob(k)).sum();
        assert!(with >= eta);
    }

    #[test]
    fn rejects_non_enlarged_input() {
        let p = params();
        let spec = build_lattice(&p, 20, 3, 1.0).unwrap();
        let full = crate::lattice::forward_jump_distribution(&spec);
        assert!(numerical_bounds(&spec, &full, &p, 0.05, OptionKind::Call).is_err());
    }

    #[test]
    fn no_jump_bounds_are_trivial() {
        let p = MarketParams { lambda: 0.0, ..params() };
        let spec = build_lattice(&p, 20, 3, 1.0).unwrap();
        let c = truncation_constants(&spec);
        assert!(c.is_degenerate());
        let b = theoretical_bounds_call(&spec, &c, &p, 0.05).unwrap();
        assert_eq!((b.kbar, b.lbar), (1, 1));
    }
}
