//! Market inputs, lognormal jump moments and the closed-form benchmarks.
//!
//! The underlying follows
//!
//! ```text
//! dS/S = (r - d - λ j̄) dt + σ dz + J dq,    ln(1 + J) ~ N(γ', δ²),    j̄ = E[J]
//! ```
//!
//! [`black_scholes_price`] and [`merton_series_price`] are used as
//! reference values for the lattice pricers.

use std::fmt;
use std::str::FromStr;

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

/// Highest raw-moment order supported (ν ≤ 8).
pub const MAX_MOMENT_ORDER: usize = 16;

/// Default truncation tolerance for the Merton series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-10;

/// Contract and model inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    pub spot: f64,
    pub strike: f64,
    /// Continuously compounded risk-free rate.
    pub rate: f64,
    /// Continuous dividend yield.
    pub dividend: f64,
    /// Diffusion volatility, per √year.
    pub sigma: f64,
    /// Poisson jump intensity, per year.
    pub lambda: f64,
    /// Mean of ln(1 + J).
    pub gamma_prime: f64,
    /// Standard deviation of ln(1 + J).
    pub delta: f64,
    /// Time to maturity in years.
    pub tau: f64,
}

impl MarketParams {
    /// Builds parameters from variance-style inputs (σ², δ²), the form the
    /// published tables quote.
    #[allow(clippy::too_many_arguments)]
    pub fn from_variances(
        spot: f64,
        strike: f64,
        rate: f64,
        dividend: f64,
        sigma2: f64,
        lambda: f64,
        gamma_prime: f64,
        delta2: f64,
        tau: f64,
    ) -> Self {
        Self {
            spot,
            strike,
            rate,
            dividend,
            sigma: sigma2.max(0.0).sqrt(),
            lambda,
            gamma_prime,
            delta: delta2.max(0.0).sqrt(),
            tau,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.spot,
            self.strike,
            self.rate,
            self.dividend,
            self.sigma,
            self.lambda,
            self.gamma_prime,
            self.delta,
            self.tau,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(invalid("all market parameters must be finite"));
        }
        if self.spot <= 0.0 {
            return Err(invalid("S0 must be > 0"));
        }
        if self.strike <= 0.0 {
            return Err(invalid("K must be > 0"));
        }
        if self.sigma <= 0.0 {
            return Err(invalid("sigma must be > 0"));
        }
        if self.tau <= 0.0 {
            return Err(invalid("tau must be > 0"));
        }
        if self.lambda < 0.0 {
            return Err(invalid("lambda must be >= 0"));
        }
        if self.delta < 0.0 {
            return Err(invalid("delta must be >= 0"));
        }
        if self.dividend < 0.0 {
            return Err(invalid("d must be >= 0"));
        }
        Ok(())
    }

    /// j̄ = E[J].
    pub fn mean_jump(&self) -> f64 {
        mean_jump(self.gamma_prime, self.delta)
    }

    /// Drift of the log-diffusion component, α = r − d − λ j̄ − σ²/2.
    pub fn drift(&self) -> f64 {
        self.rate - self.dividend - self.lambda * self.mean_jump() - 0.5 * self.sigma * self.sigma
    }

    pub fn with_strike(mut self, strike: f64) -> Self {
        self.strike = strike;
        self
    }

    pub fn with_spot(mut self, spot: f64) -> Self {
        self.spot = spot;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    #[inline]
    pub fn payoff(self, spot: f64, strike: f64) -> f64 {
        match self {
            OptionKind::Call => (spot - strike).max(0.0),
            OptionKind::Put => (strike - spot).max(0.0),
        }
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        })
    }
}

impl FromStr for OptionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "call" => Ok(OptionKind::Call),
            "put" => Ok(OptionKind::Put),
            other => Err(format!("unknown option kind '{other}' (expected call or put)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exercise {
    European,
    American,
}

impl fmt::Display for Exercise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exercise::European => "european",
            Exercise::American => "american",
        })
    }
}

impl FromStr for Exercise {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "european" => Ok(Exercise::European),
            "american" => Ok(Exercise::American),
            other => Err(format!(
                "unknown exercise style '{other}' (expected european or american)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OptionSpec {
    pub kind: OptionKind,
    pub exercise: Exercise,
}

/// Raw moments of N(γ', δ²) and the matching compound-Poisson cumulants
/// over one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpMoments {
    /// μ'_1 ..= μ'_order.
    pub raw_moments: Vec<f64>,
    /// κ_i = λ Δt μ'_i.
    pub cumulants: Vec<f64>,
    pub j_bar: f64,
}

impl JumpMoments {
    pub fn new(params: &MarketParams, dt: f64, order: usize) -> Result<Self> {
        if dt <= 0.0 {
            return Err(invalid("dt must be > 0"));
        }
        let raw_moments = normal_raw_moments(params.gamma_prime, params.delta, order)?;
        let cumulants = compound_poisson_cumulants(params.lambda, dt, &raw_moments);
        Ok(Self {
            raw_moments,
            cumulants,
            j_bar: params.mean_jump(),
        })
    }
}

/// Raw moments μ'_1..μ'_order of N(γ', δ²), via
/// μ'_i = γ' μ'_{i−1} + (i − 1) δ² μ'_{i−2}.
pub fn normal_raw_moments(gamma_prime: f64, delta: f64, order: usize) -> Result<Vec<f64>> {
    if order < 1 {
        return Err(invalid("moment order must be >= 1"));
    }
    if order > MAX_MOMENT_ORDER {
        return Err(invalid(format!(
            "moment order {order} exceeds the supported maximum {MAX_MOMENT_ORDER}"
        )));
    }
    if delta < 0.0 {
        return Err(invalid("delta must be >= 0"));
    }
    let var = delta * delta;
    let mut out = Vec::with_capacity(order);
    let (mut prev2, mut prev1) = (1.0, gamma_prime);
    out.push(prev1);
    for i in 2..=order {
        let next = gamma_prime * prev1 + (i - 1) as f64 * var * prev2;
        out.push(next);
        prev2 = prev1;
        prev1 = next;
    }
    Ok(out)
}

/// κ_i = λ Δt μ'_i.
pub fn compound_poisson_cumulants(lambda: f64, dt: f64, moments: &[f64]) -> Vec<f64> {
    moments.iter().map(|m| lambda * dt * m).collect()
}

/// E[J] = e^{γ' + δ²/2} − 1.
pub fn mean_jump(gamma_prime: f64, delta: f64) -> f64 {
    (gamma_prime + 0.5 * delta * delta).exp_m1()
}

#[inline]
pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Black–Scholes–Merton price with continuous dividend yield. Handles the
/// zero-volatility limit as the discounted forward intrinsic value.
pub fn bs_formula(
    spot: f64,
    strike: f64,
    rate: f64,
    dividend: f64,
    vol: f64,
    tau: f64,
    kind: OptionKind,
) -> f64 {
    let df_s = spot * (-dividend * tau).exp();
    let df_k = strike * (-rate * tau).exp();
    let sd = vol * tau.sqrt();
    if sd <= 0.0 {
        return kind.payoff(df_s, df_k);
    }
    let d1 = ((df_s / df_k).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    match kind {
        OptionKind::Call => df_s * norm_cdf(d1) - df_k * norm_cdf(d2),
        OptionKind::Put => df_k * norm_cdf(-d2) - df_s * norm_cdf(-d1),
    }
}

/// Black–Scholes price of the diffusion part only (λ is ignored).
pub fn black_scholes_price(params: &MarketParams, kind: OptionKind) -> f64 {
    bs_formula(
        params.spot,
        params.strike,
        params.rate,
        params.dividend,
        params.sigma,
        params.tau,
        kind,
    )
}

/// Merton's series for lognormal jumps:
///
/// ```text
/// V = Σ_k e^{−λ'τ} (λ'τ)^k / k! · BS(S0, K, r_k, σ_k, τ)
/// λ' = λ(1 + j̄),  σ_k² = σ² + k δ²/τ,  r_k = r − λ j̄ + k ln(1 + j̄)/τ
/// ```
///
/// Summation stops once a rigorous bound on the remaining terms is below
/// `tol`. A call term is at most `w_k S0 e^{−dτ}` with Poisson(λ'τ) weights;
/// a put term is at most `K e^{−rτ}` times a Poisson(λτ) weight.
pub fn merton_series_price(params: &MarketParams, kind: OptionKind, tol: f64) -> Result<f64> {
    params.validate()?;
    if !(tol > 0.0) {
        return Err(invalid("series tolerance must be > 0"));
    }
    let tau = params.tau;
    if params.lambda == 0.0 {
        return Ok(black_scholes_price(params, kind));
    }
    let j_bar = params.mean_jump();
    let log_jump = params.gamma_prime + 0.5 * params.delta * params.delta;
    let weight_mean = params.lambda * (1.0 + j_bar) * tau;
    let (bound, dom_mean) = match kind {
        OptionKind::Call => (params.spot * (-params.dividend * tau).exp(), weight_mean),
        OptionKind::Put => (params.strike * (-params.rate * tau).exp(), params.lambda * tau),
    };
    let sigma2 = params.sigma * params.sigma;
    let delta2 = params.delta * params.delta;
    let ln_w = weight_mean.ln();
    let ln_dom = dom_mean.ln();

    let mut total = 0.0;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let weight = (-weight_mean + kf * ln_w - ln_gamma(kf + 1.0)).exp();
        let vol = (sigma2 + kf * delta2 / tau).sqrt();
        let rate = params.rate - params.lambda * j_bar + kf * log_jump / tau;
        total += weight
            * bs_formula(
                params.spot,
                params.strike,
                rate,
                params.dividend,
                vol,
                tau,
                kind,
            );

        // Ratio bound on the dominating Poisson tail beyond k.
        let next = kf + 1.0;
        if next + 1.0 > dom_mean {
            let head = (-dom_mean + next * ln_dom - ln_gamma(next + 1.0)).exp();
            let tail = head / (1.0 - dom_mean / (next + 1.0));
            if bound * tail < tol {
                break;
            }
        }
        k += 1;
    }
    Ok(total)
}
