//! Brute-force path enumeration over the lattice.
//!
//! Every (diffusion, jump) path is visited separately, so results are
//! independent of the convolution and backward-induction code. Only usable
//! for a handful of steps.

use crate::error::{invalid, PricingError, Result};
use crate::lattice::LatticeSpec;
use crate::model::{MarketParams, OptionKind};
use crate::truncation::TruncationBounds;

/// Default refusal threshold on the number of enumerated paths.
pub const DEFAULT_PATH_CAP: u128 = 20_000_000;

fn path_count(branches: usize, n: usize) -> u128 {
    (branches as u128).saturating_pow(n as u32)
}

fn check_cap(branches: usize, n: usize, cap: u128) -> Result<()> {
    let paths = path_count(branches, n);
    if paths > cap {
        return Err(PricingError::SizeCap { paths, cap });
    }
    Ok(())
}

/// Exact jump-level probabilities from enumerating all (2ν+1)^n jump paths.
/// Vectors are indexed by `level + max_level`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpEnumeration {
    pub max_level: i64,
    pub kbar: i64,
    pub lbar: i64,
    /// q_n(l).
    pub full: Vec<f64>,
    /// q̄_n(l): paths that never leave [−l̄, k̄].
    pub within: Vec<f64>,
    /// Paths ending at l that went above k̄ at some step.
    pub crossed_above: Vec<f64>,
    /// Paths ending at l that went below −l̄ at some step.
    pub crossed_below: Vec<f64>,
    pub paths: u128,
}

impl JumpEnumeration {
    fn idx(&self, l: i64) -> Option<usize> {
        (l.abs() <= self.max_level).then(|| (l + self.max_level) as usize)
    }

    pub fn full(&self, l: i64) -> f64 {
        self.idx(l).map_or(0.0, |i| self.full[i])
    }

    pub fn within(&self, l: i64) -> f64 {
        self.idx(l).map_or(0.0, |i| self.within[i])
    }

    pub fn crossed_above(&self, l: i64) -> f64 {
        self.idx(l).map_or(0.0, |i| self.crossed_above[i])
    }

    pub fn crossed_below(&self, l: i64) -> f64 {
        self.idx(l).map_or(0.0, |i| self.crossed_below[i])
    }
}

/// Enumerates every length-n sequence of jumps drawn from `step`
/// (probabilities for −ν..ν) and records terminal levels with barrier flags.
pub fn enumerate_jump_paths(
    step: &[f64],
    n: usize,
    kbar: i64,
    lbar: i64,
    cap: u128,
) -> Result<JumpEnumeration> {
    if step.len().is_multiple_of(2) {
        return Err(invalid("step law must have odd length 2nu+1"));
    }
    if kbar < 1 || lbar < 1 {
        return Err(invalid("barriers must be >= 1"));
    }
    check_cap(step.len(), n, cap)?;
    let nu = (step.len() / 2) as i64;
    let m = nu * n as i64;
    let width = (2 * m + 1) as usize;
    let mut out = JumpEnumeration {
        max_level: m,
        kbar,
        lbar,
        full: vec![0.0; width],
        within: vec![0.0; width],
        crossed_above: vec![0.0; width],
        crossed_below: vec![0.0; width],
        paths: path_count(step.len(), n),
    };
    let mut digits = vec![0usize; n];
    loop {
        let mut prob = 1.0;
        let mut level = 0i64;
        let (mut above, mut below) = (false, false);
        for &d in &digits {
            prob *= step[d];
            level += d as i64 - nu;
            above |= level > kbar;
            below |= level < -lbar;
        }
        let i = (level + m) as usize;
        out.full[i] += prob;
        if above {
            out.crossed_above[i] += prob;
        }
        if below {
            out.crossed_below[i] += prob;
        }
        if !above && !below {
            out.within[i] += prob;
        }
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(out);
            }
            digits[pos] += 1;
            if digits[pos] < step.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// How paths leaving the jump band are treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandRule {
    /// Path is discarded.
    Kill,
    /// Path pays `b` at the step it first leaves the band.
    Rebate(f64),
}

struct Walker<'a> {
    params: &'a MarketParams,
    spec: &'a LatticeSpec,
    kind: OptionKind,
    band: Option<(i64, i64, BandRule)>,
    disc: f64,
    total: f64,
}

impl Walker<'_> {
    fn walk(&mut self, i: usize, j: usize, l: i64, prob: f64) {
        let spec = self.spec;
        if let Some((kbar, lbar, rule)) = self.band {
            if l > kbar || l < -lbar {
                if let BandRule::Rebate(b) = rule {
                    self.total += prob * b * self.disc.powi(i as i32);
                }
                return;
            }
        }
        if i == spec.n {
            let s = spec.underlying(self.params.spot, i, j, l);
            self.total += prob * self.kind.payoff(s, self.params.strike) * self.disc.powi(i as i32);
            return;
        }
        let nu = spec.nu as i64;
        for (move_up, pd) in [(true, spec.p), (false, 1.0 - spec.p)] {
            for k in -nu..=nu {
                let jj = if move_up { j + 1 } else { j };
                self.walk(i + 1, jj, l + k, prob * pd * spec.q(k));
            }
        }
    }
}

/// European price by summing payoff × probability over all 2^n (2ν+1)^n
/// joint paths. With `band`, paths leaving [−l̄, k̄] are killed or pay a
/// rebate according to the rule.
pub fn enumerate_price(
    params: &MarketParams,
    spec: &LatticeSpec,
    band: Option<(&TruncationBounds, BandRule)>,
    kind: OptionKind,
    cap: u128,
) -> Result<f64> {
    check_cap(2 * (2 * spec.nu + 1), spec.n, cap)?;
    let mut w = Walker {
        params,
        spec,
        kind,
        band: band.map(|(b, rule)| (b.kbar, b.lbar, rule)),
        disc: (-params.rate * spec.dt).exp(),
        total: 0.0,
    };
    w.walk(0, 0, 0, 1.0);
    Ok(w.total)
}

/// Price plus jump-level enumeration for the given (or full) barriers.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub price: f64,
    pub jumps: JumpEnumeration,
}

/// Test oracle: exact European price (paths killed outside `bounds` if
/// given) and exact q_n, q̄_n and barrier-crossing probabilities.
pub fn enumerate_paths_oracle(
    params: &MarketParams,
    spec: &LatticeSpec,
    bounds: Option<&TruncationBounds>,
    kind: OptionKind,
) -> Result<OracleResult> {
    let price = enumerate_price(
        params,
        spec,
        bounds.map(|b| (b, BandRule::Kill)),
        kind,
        DEFAULT_PATH_CAP,
    )?;
    let m = spec.max_level();
    let (kbar, lbar) = bounds.map_or((m, m), |b| (b.kbar, b.lbar));
    let jumps = enumerate_jump_paths(&spec.q, spec.n, kbar, lbar, DEFAULT_PATH_CAP)?;
    Ok(OracleResult { price, jumps })
}
