//! Path-history-dependent M-term coefficients: stationary initialization
//! from Brownian pre-history, Stratonovich-Heun evolution of the auxiliary
//! SDE `dM = (1 - g M) dt - sigma_eff M o dW`, closed-form stationary
//! statistics, the lognormal PDF approximation, and the Markov-inequality
//! tail bound.
//!
//! Convention: `sigma_eff` enters the stationary integral
//! `M(t) = int_{-inf}^0 exp(g s + sigma_eff W_{t,s}) ds` with a plus sign
//! and the auxiliary SDE with a minus sign; it may be negative (noise on
//! the stable modes only flips its sign).

use crate::error::{CoreError, Result};
use crate::paths::BrownianPath;
use crate::stats::normal_cdf;

/// Decay rate and effective noise of one M-term process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MTermParams {
    g: f64,
    sigma_eff: f64,
}

impl MTermParams {
    pub fn new(g: f64, sigma_eff: f64) -> Result<Self> {
        if !(g > 0.0) {
            return Err(CoreError::ResonanceViolated(g));
        }
        Ok(MTermParams { g, sigma_eff })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn sigma_eff(&self) -> f64 {
        self.sigma_eff
    }

    /// Mean-existence threshold `sigma_* = sqrt(2 g)`.
    pub fn sigma_star(&self) -> f64 {
        (2.0 * self.g).sqrt()
    }

    /// Variance-existence threshold `sigma_# = sqrt(g)`.
    pub fn sigma_sharp(&self) -> f64 {
        self.g.sqrt()
    }

    pub fn has_mean(&self) -> bool {
        self.sigma_eff.abs() < self.sigma_star()
    }

    pub fn has_variance(&self) -> bool {
        self.sigma_eff.abs() < self.sigma_sharp()
    }
}

/// Closed-form stationary statistics; `None` marks a non-existent moment.
#[derive(Debug, Clone, Copy)]
pub struct MTermStats {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub acf_rate: Option<f64>,
}

/// Stationary mean, variance, and autocorrelation rate of the M-term.
pub fn mterm_moments(params: MTermParams) -> MTermStats {
    let g = params.g;
    let s2 = params.sigma_eff * params.sigma_eff;
    let mean = params.has_mean().then(|| 2.0 / (2.0 * g - s2));
    let variance = params
        .has_variance()
        .then(|| 2.0 * s2 / ((2.0 * g - s2) * (2.0 * g - s2) * (g - s2)));
    let acf_rate = params.has_variance().then(|| g - s2 / 2.0);
    MTermStats {
        mean,
        variance,
        acf_rate,
    }
}

/// Stationary autocorrelation `R(lag) = exp(-(g - sigma^2/2) |lag|)`.
pub fn mterm_autocorrelation(params: MTermParams, lag: f64) -> Result<f64> {
    if !params.has_variance() {
        return Err(CoreError::MomentUndefined {
            what: "autocorrelation",
            sigma_eff: params.sigma_eff,
            threshold: params.sigma_sharp(),
        });
    }
    Ok((-(params.g - params.sigma_eff * params.sigma_eff / 2.0) * lag.abs()).exp())
}

/// Required pre-history length `ln(1/tol) / g` for a truncation error of
/// order `tol / g` on the stationary integral.
pub fn prehistory_length(params: MTermParams, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "tol must lie in (0, 1), got {tol}"
        )));
    }
    Ok((1.0 / tol).ln() / params.g)
}

/// Stationary M at t = 0 from the path's pre-history:
/// trapezoidal quadrature of `int exp(g s + sigma_eff W_s) ds` over the
/// truncated tail `[-T_pre, 0]`.
pub fn mterm_init(params: MTermParams, prehistory: &BrownianPath, tol: f64) -> Result<f64> {
    mterm_init_at(params, prehistory, 0.0, tol)
}

/// Stationary M at grid time `t`, integrating over `[max(t_start, t - span), t]`
/// with the increments `W_s - W_t` taken on the same path.
pub fn mterm_init_at(params: MTermParams, path: &BrownianPath, t: f64, tol: f64) -> Result<f64> {
    let needed = prehistory_length(params, tol)?;
    let end = path.node_index(t)?;
    let have = path.time_at(end) - path.t_start();
    if have + path.dt() / 2.0 < needed {
        return Err(CoreError::InsufficientPrehistory { needed, have });
    }
    let span_nodes = (needed / path.dt()).ceil() as usize;
    let start = end.saturating_sub(span_nodes);
    let dt = path.dt();
    let w = path.values();
    let wt = w[end];
    let integrand = |i: usize| {
        let s = (i as f64 - end as f64) * dt;
        (params.g * s + params.sigma_eff * (w[i] - wt)).exp()
    };
    let mut acc = 0.5 * (integrand(start) + integrand(end));
    for i in start + 1..end {
        acc += integrand(i);
    }
    Ok(acc * dt)
}

/// One Stratonovich-Heun step of `dM = (1 - g M) dt - sigma_eff M o dW`.
///
/// The exact process is strictly positive; a step that would land at or
/// below zero is rejected and retried as two half steps with the increment
/// split evenly (never clamped).
pub fn mterm_step(params: MTermParams, m: f64, dw: f64, dt: f64) -> f64 {
    mterm_step_diag(params, m, dw, dt).0
}

/// As [`mterm_step`], also returning the number of halving events.
pub fn mterm_step_diag(params: MTermParams, m: f64, dw: f64, dt: f64) -> (f64, u32) {
    step_recursive(params, m, dw, dt, 0)
}

fn step_recursive(params: MTermParams, m: f64, dw: f64, dt: f64, depth: u32) -> (f64, u32) {
    let g = params.g;
    let s = params.sigma_eff;
    let drift = |m: f64| 1.0 - g * m;
    let diff = |m: f64| -s * m;
    let pred = m + drift(m) * dt + diff(m) * dw;
    let out = m + 0.5 * (drift(m) + drift(pred)) * dt + 0.5 * (diff(m) + diff(pred)) * dw;
    if out > 0.0 {
        return (out, if depth > 0 { 1 } else { 0 });
    }
    if depth >= 48 {
        // Unreachable in practice; fall back to the exact linear-part flow,
        // which is positive by construction.
        let decay = (-g * dt - s * dw).exp();
        return (decay * m + 0.5 * dt * (1.0 + decay), 1);
    }
    let (half, h1) = step_recursive(params, m, dw / 2.0, dt / 2.0, depth + 1);
    let (full, h2) = step_recursive(params, half, dw / 2.0, dt / 2.0, depth + 1);
    (full, h1 + h2 + 1)
}

/// Evolve M along a path segment `[t_from, t_to]`, returning the value at
/// every grid node (first entry is `m0` at `t_from`).
pub fn mterm_evolve(
    params: MTermParams,
    path: &BrownianPath,
    m0: f64,
    t_from: f64,
    t_to: f64,
) -> Result<Vec<f64>> {
    let i0 = path.node_index(t_from)?;
    let i1 = path.node_index(t_to)?;
    let dt = path.dt();
    let mut out = Vec::with_capacity(i1 - i0 + 1);
    let mut m = m0;
    out.push(m);
    for i in i0..i1 {
        m = mterm_step(params, m, path.step_increment(i), dt);
        out.push(m);
    }
    Ok(out)
}

/// Moment-matched lognormal parameters for the rescaled term `g M`.
#[derive(Debug, Clone, Copy)]
pub struct LogNormalParams {
    pub mu: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub eta: f64,
    ln_g: f64,
}

/// Lognormal approximation of the stationary density; requires a finite
/// variance (`|sigma_eff| < sqrt(g)`).
pub fn lognormal_approx(params: MTermParams) -> Result<LogNormalParams> {
    if !params.has_variance() {
        return Err(CoreError::MomentUndefined {
            what: "lognormal approximation",
            sigma_eff: params.sigma_eff,
            threshold: params.sigma_sharp(),
        });
    }
    let r = params.sigma_eff * params.sigma_eff / params.g;
    let kappa = 2.0 / (2.0 - r);
    let eta = (2.0 * r / ((2.0 - r) * (2.0 - r) * (1.0 - r))).sqrt();
    let sigma = (1.0 + (eta / kappa) * (eta / kappa)).ln().sqrt();
    let mu = kappa.ln() - 0.5 * sigma * sigma;
    Ok(LogNormalParams {
        mu,
        sigma,
        kappa,
        eta,
        ln_g: params.g.ln(),
    })
}

impl LogNormalParams {
    /// Density of the rescaled variable `g M` at `x > 0`.
    pub fn pdf_rescaled(&self, x: f64) -> f64 {
        if x <= 0.0 || self.sigma == 0.0 {
            return 0.0;
        }
        let z = (x.ln() - self.mu) / self.sigma;
        (-0.5 * z * z).exp() / (x * self.sigma * std::f64::consts::TAU.sqrt())
    }

    /// Density of M itself (lognormal with log-mean shifted by `-ln g`).
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || self.sigma == 0.0 {
            return 0.0;
        }
        let z = (x.ln() - (self.mu - self.ln_g)) / self.sigma;
        (-0.5 * z * z).exp() / (x * self.sigma * std::f64::consts::TAU.sqrt())
    }

    /// CDF of M itself.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        normal_cdf((x.ln() - (self.mu - self.ln_g)) / self.sigma)
    }
}

/// Markov-inequality simultaneous bound: the smallest closed-form tail level
/// `kappa = max_n E[M_n] / chi` with
/// `P(M_n < kappa for every n) >= 1 - chi`.
pub fn chebyshev_bound(params_list: &[MTermParams], chi: f64) -> Result<f64> {
    if !(chi > 0.0 && chi < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "chi must lie in (0, 1), got {chi}"
        )));
    }
    if params_list.is_empty() {
        return Err(CoreError::InvalidParameter(
            "chebyshev_bound needs at least one parameter set".into(),
        ));
    }
    let mut mean_max: f64 = 0.0;
    for p in params_list {
        let stats = mterm_moments(*p);
        match stats.mean {
            Some(m) => mean_max = mean_max.max(m),
            None => {
                return Err(CoreError::MomentUndefined {
                    what: "mean",
                    sigma_eff: p.sigma_eff,
                    threshold: p.sigma_star(),
                })
            }
        }
    }
    Ok(mean_max / chi)
}

/// Empirical check of the simultaneous tail bound: fraction of independent
/// stationary draws (shared path across the list) with every `M_n < kappa`.
pub fn chebyshev_empirical(
    params_list: &[MTermParams],
    chi: f64,
    n_samples: usize,
    dt: f64,
    tol: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    let kappa = chebyshev_bound(params_list, chi)?;
    let mut t_pre: f64 = 0.0;
    for p in params_list {
        t_pre = t_pre.max(prehistory_length(*p, tol)?);
    }
    let mut hits = 0usize;
    for s in 0..n_samples {
        let path = crate::paths::sample_brownian(-t_pre - dt, 0.0, dt, seed, s as u64)?;
        let all_below = params_list
            .iter()
            .map(|p| mterm_init(*p, &path, tol))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|&m| m < kappa);
        if all_below {
            hits += 1;
        }
    }
    Ok((kappa, hits as f64 / n_samples as f64))
}
