//! Seed-reproducible Brownian paths on uniform grids, with pre-history
//! segments, stationary Ornstein-Uhlenbeck processes, and the
//! sup-probability bound for scaled Brownian motion.
//!
//! Every random number is a pure function of `(seed, stream_id, counter)`,
//! so paths are bit-identical across runs and independent of evaluation
//! order or worker count.

use crate::error::{CoreError, Result};

/// Hard cap on grid nodes per path (desk scale, full arrays in memory).
pub const MAX_GRID_NODES: usize = 1 << 26;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based generator: `normal(i)` depends only on `(seed, stream, i)`.
///
/// SplitMix64 output function over a per-stream offset; the Gaussian variate
/// is produced by Box-Muller from two consecutive counters, so consumption
/// is fixed per index and node values can be generated in any order.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    base: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let base = mix64(seed ^ mix64(stream_id ^ 0x517c_c1b7_2722_0a95));
        CounterRng { base }
    }

    #[inline]
    fn raw(&self, counter: u64) -> u64 {
        mix64(self.base.wrapping_add(counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform draw in the open interval (0, 1).
    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        ((self.raw(counter) >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw for node `index`.
    #[inline]
    pub fn normal(&self, index: u64) -> f64 {
        let u1 = self.uniform(2 * index);
        let u2 = self.uniform(2 * index + 1);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// A sampled Wiener path on a uniform grid bracketing t = 0.
///
/// `values[i]` is W at `t_start + i * dt`; the node nearest t = 0 is pinned
/// to exactly zero, so pre-history (t < 0) and forward segments share one
/// increment stream anchored at the origin.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    t_start: f64,
    dt: f64,
    values: Vec<f64>,
    zero_index: usize,
    seed: u64,
    stream_id: u64,
}

/// Deterministically sample a Brownian path on `[t_start, t_end]` with step `dt`.
///
/// Increments are i.i.d. Normal(0, dt) drawn per node index; values are
/// stored as left-to-right partial sums so increment chaining telescopes
/// exactly in floating point.
pub fn sample_brownian(
    t_start: f64,
    t_end: f64,
    dt: f64,
    seed: u64,
    stream_id: u64,
) -> Result<BrownianPath> {
    if !(dt > 0.0) {
        return Err(CoreError::NonPositiveDt(dt));
    }
    if t_start > 0.0 || t_end < 0.0 || t_end <= t_start {
        return Err(CoreError::MissingOrigin { t_start, t_end });
    }
    let n = ((t_end - t_start) / dt).round() as usize;
    if n + 1 > MAX_GRID_NODES {
        return Err(CoreError::GridTooLarge {
            nodes: n + 1,
            cap: MAX_GRID_NODES,
        });
    }
    let rng = CounterRng::new(seed, stream_id);
    let mut values = Vec::with_capacity(n + 1);
    let sqrt_dt = dt.sqrt();
    let mut acc = 0.0;
    values.push(acc);
    for i in 0..n {
        acc += sqrt_dt * rng.normal(i as u64);
        values.push(acc);
    }
    let zero_index = ((-t_start) / dt).round() as usize;
    let zero_index = zero_index.min(n);
    let anchor = values[zero_index];
    for v in &mut values {
        *v -= anchor;
    }
    Ok(BrownianPath {
        t_start,
        dt,
        values,
        zero_index,
        seed,
        stream_id,
    })
}

impl BrownianPath {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.dt * (self.values.len() - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid index of the node pinned to t = 0.
    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.t_start + self.dt * index as f64
    }

    /// Snap `t` to the nearest grid node; error beyond dt/2 (no silent rounding).
    pub fn node_index(&self, t: f64) -> Result<usize> {
        let pos = (t - self.t_start) / self.dt;
        let idx = pos.round();
        if idx < -0.5 || idx > (self.values.len() - 1) as f64 + 0.5 {
            return Err(CoreError::OutOfRange {
                t,
                t_start: self.t_start,
                t_end: self.t_end(),
            });
        }
        // Allow a whisker of float slack on top of the dt/2 snap window.
        if (pos - idx).abs() > 0.5 + 1e-9 {
            return Err(CoreError::OffGrid { t });
        }
        Ok((idx.max(0.0) as usize).min(self.values.len() - 1))
    }

    /// W at the grid node nearest `t`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.node_index(t)?])
    }

    /// W(t) - W(s), both snapped to the grid.
    pub fn increment(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.values[self.node_index(t)?] - self.values[self.node_index(s)?])
    }

    /// Increment between consecutive nodes `i` and `i + 1`.
    #[inline]
    pub fn step_increment(&self, i: usize) -> f64 {
        self.values[i + 1] - self.values[i]
    }
}

/// Stationary OU path `dr = -r dt + sigma dW` driven by a Brownian path.
#[derive(Debug, Clone)]
pub struct OuPath {
    pub sigma: f64,
    values: Vec<f64>,
}

/// Evolve the stationary OU process along `path`.
///
/// Exponential-Euler recursion `Z_{i+1} = e^{-dt} Z_i + sigma * c * dW_i`
/// with `c = sqrt((1 - e^{-2 dt}) / (2 dt))` so the one-step conditional
/// variance is exact; the start node is drawn from the stationary law
/// Normal(0, sigma^2 / 2) using a counter outside the increment range.
pub fn ou_stationary(path: &BrownianPath, sigma: f64) -> Result<OuPath> {
    if sigma < 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "sigma must be non-negative, got {sigma}"
        )));
    }
    let dt = path.dt();
    let decay = (-dt).exp();
    let weight = ((1.0 - (-2.0 * dt).exp()) / (2.0 * dt)).sqrt();
    let rng = CounterRng::new(path.seed(), path.stream_id());
    let init_counter = path.len() as u64 + 1;
    let mut values = Vec::with_capacity(path.len());
    let mut z = sigma / std::f64::consts::SQRT_2 * rng.normal(init_counter);
    values.push(z);
    for i in 0..path.len() - 1 {
        z = decay * z + sigma * weight * path.step_increment(i);
        values.push(z);
    }
    Ok(OuPath { sigma, values })
}

impl OuPath {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Threshold `gamma = sqrt(-2 T ln(1 - chi))` such that
/// `P(sqrt(eps) sup_{[0, T/eps]} |W| <= gamma) >= 1 - chi`.
pub fn sup_bound_gamma(t_horizon: f64, chi: f64) -> Result<f64> {
    if !(t_horizon > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "T must be positive, got {t_horizon}"
        )));
    }
    if !(chi > 0.0 && chi <= 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "chi must lie in (0, 1], got {chi}"
        )));
    }
    Ok((-2.0 * t_horizon * (1.0 - chi).ln()).sqrt())
}

/// Monte Carlo estimate of `P(sqrt(eps) sup_{[0, T/eps]} |W| <= gamma)`.
pub fn sup_bound_empirical(
    eps: f64,
    t_horizon: f64,
    chi: f64,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<f64> {
    let gamma = sup_bound_gamma(t_horizon, chi)?;
    let horizon = t_horizon / eps;
    let mut hits = 0usize;
    for sample in 0..n_paths {
        let path = sample_brownian(0.0, horizon, dt, seed, sample as u64)?;
        let sup = path.values().iter().fold(0.0f64, |a, &w| a.max(w.abs()));
        if eps.sqrt() * sup <= gamma {
            hits += 1;
        }
    }
    Ok(hits as f64 / n_paths as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_node_path_pins_origin() {
        let p = sample_brownian(0.0, 1.0, 0.5, 7, 0).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.value_at(0.0).unwrap(), 0.0);
    }

    #[test]
    fn resampling_is_bit_identical() {
        let a = sample_brownian(-2.0, 2.0, 0.01, 7, 0).unwrap();
        let b = sample_brownian(-2.0, 2.0, 0.01, 7, 0).unwrap();
        assert_eq!(a.values(), b.values());
        let c = sample_brownian(-2.0, 2.0, 0.01, 7, 1).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn variance_of_w1_matches_brownian_law() {
        let n = 10_000;
        let mut sum_sq = 0.0;
        for s in 0..n {
            let p = sample_brownian(0.0, 1.0, 0.01, 42, s as u64).unwrap();
            let w1 = p.value_at(1.0).unwrap();
            sum_sq += w1 * w1;
        }
        let var = sum_sq / n as f64;
        assert!((var - 1.0).abs() < 0.03, "var(W_1) = {var}");
    }

    #[test]
    fn increment_identities() {
        let p = sample_brownian(-1.0, 3.0, 0.01, 3, 5).unwrap();
        assert_eq!(p.increment(1.37, 1.37).unwrap(), 0.0);
        assert_eq!(
            p.increment(0.0, 1.0).unwrap(),
            p.value_at(1.0).unwrap(),
            "W(0) = 0 so increment from 0 is W(t)"
        );
        let chain = p.increment(-0.5, 0.8).unwrap() + p.increment(0.8, 2.2).unwrap();
        assert_eq!(chain, p.increment(-0.5, 2.2).unwrap());
    }

    #[test]
    fn snapping_rejects_off_grid_and_out_of_range() {
        let p = sample_brownian(0.0, 1.0, 0.1, 1, 0).unwrap();
        assert!(matches!(p.node_index(0.26), Err(CoreError::OffGrid { .. })));
        assert!(p.node_index(0.2501).is_ok());
        assert!(matches!(
            p.node_index(1.2),
            Err(CoreError::OutOfRange { .. })
        ));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            sample_brownian(0.0, 1.0, -0.1, 0, 0),
            Err(CoreError::NonPositiveDt(_))
        ));
        assert!(matches!(
            sample_brownian(0.5, 1.0, 0.1, 0, 0),
            Err(CoreError::MissingOrigin { .. })
        ));
    }

    #[test]
    fn ou_zero_noise_decays_to_zero() {
        let p = sample_brownian(0.0, 5.0, 0.01, 9, 0).unwrap();
        let z = ou_stationary(&p, 0.0).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ou_stationary_variance_is_half_sigma_sq() {
        let p = sample_brownian(0.0, 20_000.0, 0.01, 11, 0).unwrap();
        let z = ou_stationary(&p, 1.0).unwrap();
        let vals = z.values();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
        assert!((var - 0.5).abs() < 0.025, "OU variance {var}");
    }

    #[test]
    fn ou_autocorrelation_decays_exponentially() {
        let p = sample_brownian(0.0, 50_000.0, 0.01, 13, 0).unwrap();
        let z = ou_stationary(&p, 1.0).unwrap();
        let vals = z.values();
        let lag_nodes = 100; // tau = 1
        let n = vals.len() - lag_nodes;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            num += vals[i] * vals[i + lag_nodes];
            den += vals[i] * vals[i];
        }
        let acf = num / den;
        let expected = (-1.0f64).exp();
        assert!((acf - expected).abs() < 0.03, "acf(1) = {acf}");
    }

    #[test]
    fn gamma_formula_anchor_values() {
        let g = sup_bound_gamma(1.0, 1.0 - (-2.0f64).exp()).unwrap();
        assert!((g - 2.0).abs() < 1e-14);
        let g2 = sup_bound_gamma(2.0, 0.1).unwrap();
        assert!((g2 - (-4.0 * 0.9f64.ln()).sqrt()).abs() < 1e-14);
        assert!((g2 - 0.6492).abs() < 5e-5);
        assert!(sup_bound_gamma(1.0, 0.0).is_err());
        assert!(sup_bound_gamma(1.0, 1.1).is_err());
    }

    #[test]
    fn sup_bound_holds_empirically() {
        let p = sup_bound_empirical(0.05, 1.0, 0.1, 10_000, 0.01, 99).unwrap();
        assert!(p >= 0.9, "empirical sup-bound probability {p}");
    }

    #[test]
    fn brownian_scaling_preserves_unit_variance() {
        // W~(t~) = sqrt(eps) W(t~/eps): sample variance of W~(1) stays near 1.
        let eps = 0.04;
        let n = 4_000;
        let mut sum_sq = 0.0;
        for s in 0..n {
            let p = sample_brownian(0.0, 1.0 / eps, 0.05, 7, s as u64).unwrap();
            let w = eps.sqrt() * p.value_at(1.0 / eps).unwrap();
            sum_sq += w * w;
        }
        let var = sum_sq / n as f64;
        assert!((var - 1.0).abs() < 0.06, "scaled variance {var}");
    }
}
