//! Bivariate diffusion × jump discretisation.
//!
//! Each time step moves the log-price by ±σ√Δt (probability p / 1 − p) and
//! independently by l·h for l in −ν..=ν with moment-matched probabilities
//! q_l. Node (i, j, l) carries the underlying value
//! `S0 · exp((2j − i) σ√Δt + l h)`.

use crate::error::{invalid, PricingError, Result};
use crate::model::{JumpMoments, MarketParams};

pub const MAX_NU: usize = 8;

/// Tiny negative solutions of the moment system above this are clamped.
const NEGATIVE_PROB_TOL: f64 = 1e-12;

/// Derived discretisation of one contract.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub n: usize,
    pub nu: usize,
    pub c: f64,
    /// Jump step h = c·√(γ'² + δ²).
    pub h: f64,
    pub dt: f64,
    /// α = r − d − λ j̄ − σ²/2.
    pub alpha: f64,
    /// Diffusion up-probability.
    pub p: f64,
    /// Diffusion step σ√Δt.
    pub diffusion_step: f64,
    /// q_{−ν} ..= q_{+ν}, stored at offset ν.
    pub q: Vec<f64>,
    /// w_i = max(c_{+i}, c_{−i}) for i = 1..=ν, stored at i − 1.
    pub w_consts: Vec<f64>,
    pub moments: JumpMoments,
}

impl LatticeSpec {
    /// Largest reachable jump level, ν n.
    #[inline]
    pub fn max_level(&self) -> i64 {
        (self.nu * self.n) as i64
    }

    /// Per-step probability of a jump of l·h; zero outside −ν..=ν.
    #[inline]
    pub fn q(&self, l: i64) -> f64 {
        let nu = self.nu as i64;
        if l < -nu || l > nu {
            0.0
        } else {
            self.q[(l + nu) as usize]
        }
    }

    /// c_i = n·q_i for i ≠ 0.
    pub fn c_const(&self, i: i64) -> f64 {
        debug_assert!(i != 0);
        self.n as f64 * self.q(i)
    }

    pub fn underlying(&self, spot: f64, i: usize, j: usize, l: i64) -> f64 {
        spot * ((2.0 * j as f64 - i as f64) * self.diffusion_step + l as f64 * self.h).exp()
    }

    /// Per-step law with each pair q_{±i} replaced by max(q_{+i}, q_{−i}).
    pub fn enlarged_step(&self) -> Vec<f64> {
        let nu = self.nu as i64;
        let mut out = self.q.clone();
        for i in 1..=nu {
            let m = self.q(i).max(self.q(-i));
            out[(nu + i) as usize] = m;
            out[(nu - i) as usize] = m;
        }
        out
    }
}

/// Builds the lattice for `params` with `n` steps, half-width `nu` and jump
/// scale `c`.
pub fn build_lattice(params: &MarketParams, n: usize, nu: usize, c: f64) -> Result<LatticeSpec> {
    params.validate()?;
    if n < 1 {
        return Err(invalid("n must be >= 1"));
    }
    if !(1..=MAX_NU).contains(&nu) {
        return Err(invalid(format!("nu must lie in 1..={MAX_NU}")));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(invalid("c must lie in (0, 1]"));
    }
    let dt = params.tau / n as f64;
    let alpha = params.drift();
    let ratio = alpha * dt.sqrt() / params.sigma;
    if ratio.abs() > 1.0 {
        return Err(PricingError::InvalidProbability { ratio: ratio.abs() });
    }
    let p = 0.5 * (1.0 + ratio);

    let scale = params.gamma_prime.hypot(params.delta);
    if params.lambda > 0.0 && scale == 0.0 {
        return Err(PricingError::DegenerateJump);
    }
    let h = c * scale;
    let moments = JumpMoments::new(params, dt, 2 * nu)?;
    let q = if params.lambda == 0.0 {
        let mut q = vec![0.0; 2 * nu + 1];
        q[nu] = 1.0;
        q
    } else {
        solve_jump_probs(&moments, h, nu)?
    };
    let w_consts = (1..=nu)
        .map(|i| n as f64 * q[nu + i].max(q[nu - i]))
        .collect();

    Ok(LatticeSpec {
        n,
        nu,
        c,
        h,
        dt,
        alpha,
        p,
        diffusion_step: params.sigma * dt.sqrt(),
        q,
        w_consts,
        moments,
    })
}

/// Solves Σ_l l^i q_l = κ_i / h^i (i = 0..=2ν, κ_0 = 1) for the per-step
/// jump probabilities. The solution is used directly as the step law.
pub fn solve_jump_probs(moments: &JumpMoments, h: f64, nu: usize) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(invalid("jump step h must be > 0"));
    }
    if nu == 0 || moments.cumulants.len() < 2 * nu {
        return Err(invalid("need 2*nu cumulants and nu >= 1"));
    }
    let dim = 2 * nu + 1;
    // Rows are scaled by ν^{-i} so every entry lies in [−1, 1].
    let nuf = nu as f64;
    let mut a = vec![0.0; dim * dim];
    let mut b = vec![0.0; dim];
    for i in 0..dim {
        for (col, l) in (-(nu as i64)..=nu as i64).enumerate() {
            a[i * dim + col] = (l as f64 / nuf).powi(i as i32);
        }
        b[i] = if i == 0 {
            1.0
        } else {
            moments.cumulants[i - 1] / (h * nuf).powi(i as i32)
        };
    }
    let mut q = gauss_solve(&mut a, &mut b, dim).ok_or(PricingError::SingularSystem)?;

    let mut clamped = false;
    for (idx, v) in q.iter_mut().enumerate() {
        if *v < -NEGATIVE_PROB_TOL {
            return Err(PricingError::NegativeProbability {
                level: idx as i64 - nu as i64,
                value: *v,
            });
        }
        if *v < 0.0 {
            *v = 0.0;
            clamped = true;
        }
    }
    if clamped {
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= s);
    }
    Ok(q)
}

/// Gaussian elimination with partial pivoting on a row-major `dim × dim`
/// system. Returns `None` if a pivot vanishes.
fn gauss_solve(a: &mut [f64], b: &mut [f64], dim: usize) -> Option<Vec<f64>> {
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&r, &s| a[r * dim + col].abs().total_cmp(&a[s * dim + col].abs()))?;
        if a[pivot * dim + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..dim {
                a.swap(pivot * dim + k, col * dim + k);
            }
            b.swap(pivot, col);
        }
        for row in col + 1..dim {
            let f = a[row * dim + col] / a[col * dim + col];
            if f == 0.0 {
                continue;
            }
            for k in col..dim {
                a[row * dim + k] -= f * a[col * dim + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; dim];
    for row in (0..dim).rev() {
        let mut acc = b[row];
        for k in row + 1..dim {
            acc -= a[row * dim + k] * x[k];
        }
        x[row] = acc / a[row * dim + row];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    /// q_n: net jump level after n steps.
    Full,
    /// q̃_n: same convolution under the symmetrised max law.
    Enlarged,
    /// q̄_n: paths that never leave [−l̄, k̄].
    WithinBarrier,
}

/// Probabilities of the terminal jump level over a contiguous level range.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpDistribution {
    pub kind: DistributionKind,
    /// Level of `probs[0]`.
    pub min_level: i64,
    pub probs: Vec<f64>,
    /// (k̄, l̄) for the within-barrier law.
    pub bounds: Option<(i64, i64)>,
    /// Number of (step, level) cells evaluated while building.
    pub cells: u64,
}

impl JumpDistribution {
    #[inline]
    pub fn prob(&self, level: i64) -> f64 {
        let idx = level - self.min_level;
        if idx < 0 || idx as usize >= self.probs.len() {
            0.0
        } else {
            self.probs[idx as usize]
        }
    }

    pub fn max_level(&self) -> i64 {
        self.min_level + self.probs.len() as i64 - 1
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i64> {
        self.min_level..=self.max_level()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// n-fold convolution of `step` (offset ν) restricted to levels in
/// [lower, upper]. Mass stepping outside is dropped. Returns the terminal
/// probabilities starting at the lowest active level and the cell count.
fn convolve(step: &[f64], nu: usize, n: usize, lower: i64, upper: i64) -> (Vec<f64>, i64, u64) {
    let nu_i = nu as i64;
    let width = (upper - lower + 1) as usize;
    let mut cur = vec![0.0; width];
    let mut next = vec![0.0; width];
    // Buffers are indexed by level − lower.
    cur[(-lower) as usize] = 1.0;
    let (mut lo, mut hi) = (0i64, 0i64);
    let mut cells = 0u64;
    for t in 1..=n as i64 {
        let new_lo = (-nu_i * t).max(lower);
        let new_hi = (nu_i * t).min(upper);
        for m in new_lo..=new_hi {
            let mut acc = 0.0;
            for k in -nu_i..=nu_i {
                let src = m - k;
                if src >= lo && src <= hi {
                    acc += cur[(src - lower) as usize] * step[(k + nu_i) as usize];
                }
            }
            next[(m - lower) as usize] = acc;
        }
        cells += (new_hi - new_lo + 1) as u64;
        std::mem::swap(&mut cur, &mut next);
        lo = new_lo;
        hi = new_hi;
    }
    let probs = cur[(lo - lower) as usize..=(hi - lower) as usize].to_vec();
    (probs, lo, cells)
}

/// q_n(l) for −νn ≤ l ≤ νn.
pub fn forward_jump_distribution(spec: &LatticeSpec) -> JumpDistribution {
    let m = spec.max_level();
    let (probs, min_level, cells) = convolve(&spec.q, spec.nu, spec.n, -m, m);
    JumpDistribution {
        kind: DistributionKind::Full,
        min_level,
        probs,
        bounds: None,
        cells,
    }
}

/// q̃_n(l): the full convolution with q_{±i} both replaced by w_i / n.
pub fn enlarged_jump_distribution(spec: &LatticeSpec) -> JumpDistribution {
    let m = spec.max_level();
    let step = spec.enlarged_step();
    let (probs, min_level, cells) = convolve(&step, spec.nu, spec.n, -m, m);
    JumpDistribution {
        kind: DistributionKind::Enlarged,
        min_level,
        probs,
        bounds: None,
        cells,
    }
}

/// q̄_n(l) for −l̄ ≤ l ≤ k̄: probability of ending at l without leaving the
/// band at any step. Barriers beyond νn are clamped to νn.
pub fn within_barrier_distribution(
    spec: &LatticeSpec,
    kbar: i64,
    lbar: i64,
) -> Result<JumpDistribution> {
    if kbar <= 0 || lbar <= 0 {
        return Err(invalid("barriers kbar and lbar must be > 0"));
    }
    let m = spec.max_level();
    let (kbar, lbar) = (kbar.min(m), lbar.min(m));
    let (probs, min_level, cells) = convolve(&spec.q, spec.nu, spec.n, -lbar, kbar);
    Ok(JumpDistribution {
        kind: DistributionKind::WithinBarrier,
        min_level,
        probs,
        bounds: Some((kbar, lbar)),
        cells,
    })
}

/// Binomial pmf P_n(j), j = 0..=n, evaluated in log space.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    // ln C(n, j) accumulated as Σ ln((n − j + 1)/j).
    let mut ln_binom = 0.0;
    (0..=n)
        .map(|j| {
            if j > 0 {
                ln_binom += ((n - j + 1) as f64).ln() - (j as f64).ln();
            }
            (ln_binom + j as f64 * lp + (n - j) as f64 * lq).exp()
        })
        .collect()
}

/// P_n(j) = C(n, j) p^j (1 − p)^{n−j}.
pub fn terminal_brownian_pmf(spec: &LatticeSpec) -> Vec<f64> {
    binomial_pmf(spec.n, spec.p)
}
