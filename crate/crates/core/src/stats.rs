//! Statistical post-processing: log-log regression, quantiles, kernel
//! density estimation, Kolmogorov-Smirnov distance, autocorrelation-rate
//! fits, and Wilson binomial intervals.

use crate::error::{CoreError, Result};

/// Least-squares power-law fit on `(ln x, ln y)`.
#[derive(Debug, Clone, Copy)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(CoreError::InvalidParameter(format!(
            "log-log fit needs matched inputs of length >= 3, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys.iter()).any(|&v| v <= 0.0) {
        return Err(CoreError::InvalidParameter(
            "log-log fit requires strictly positive data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&lx, &ly);
    Ok(LogLogFit {
        slope,
        intercept,
        r2,
    })
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, r2)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Quantile with linear interpolation; `q` in [0, 1]. Sorts a copy.
pub fn quantile(samples: &[f64], q: f64) -> f64 {
    assert!(!samples.is_empty());
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    }
}

pub fn median(samples: &[f64]) -> f64 {
    quantile(samples, 0.5)
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

pub fn variance(samples: &[f64]) -> f64 {
    let m = mean(samples);
    samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / samples.len() as f64
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of
/// `samples` and a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Wilson score interval lower bound for a binomial proportion.
///
/// `z` defaults to 1.959964 (95% two-sided) via [`wilson_lower`].
pub fn wilson_lower_z(successes: usize, n: usize, z: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = p + z2 / (2.0 * nf);
    let margin = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - margin) / denom).max(0.0)
}

pub fn wilson_lower(successes: usize, n: usize) -> f64 {
    wilson_lower_z(successes, n, 1.959964)
}

/// Gaussian kernel density estimate over a fixed sample set.
#[derive(Debug, Clone)]
pub struct GaussianKde {
    samples: Vec<f64>,
    pub bandwidth: f64,
}

impl GaussianKde {
    /// Silverman's rule bandwidth unless one is supplied.
    pub fn new(samples: &[f64], bandwidth: Option<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(CoreError::InvalidParameter("KDE needs samples".into()));
        }
        let bw = match bandwidth {
            Some(b) if b > 0.0 => b,
            Some(b) => {
                return Err(CoreError::InvalidParameter(format!(
                    "bandwidth must be positive, got {b}"
                )))
            }
            None => {
                let sd = variance(samples).sqrt();
                let n = samples.len() as f64;
                let iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
                let scale = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
                let scale = if scale > 0.0 { scale } else { 1e-12 };
                0.9 * scale * n.powf(-0.2)
            }
        };
        Ok(GaussianKde {
            samples: samples.to_vec(),
            bandwidth: bw,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let norm = 1.0 / (self.samples.len() as f64 * h * (std::f64::consts::TAU).sqrt());
        self.samples
            .iter()
            .map(|&s| (-0.5 * ((x - s) / h).powi(2)).exp())
            .sum::<f64>()
            * norm
    }

    /// Argmax of the density over a uniform grid spanning the data.
    pub fn mode_on_grid(&self, lo: f64, hi: f64, points: usize) -> f64 {
        let mut best_x = lo;
        let mut best_p = f64::MIN;
        for i in 0..points {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let p = self.eval(x);
            if p > best_p {
                best_p = p;
                best_x = x;
            }
        }
        best_x
    }
}

/// Sample autocorrelation of a stationary series at integer lags.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series.len();
    let m = mean(series);
    let denom: f64 = series.iter().map(|v| (v - m) * (v - m)).sum();
    (0..=max_lag)
        .map(|lag| {
            let mut num = 0.0;
            for i in 0..n - lag {
                num += (series[i] - m) * (series[i + lag] - m);
            }
            num / denom
        })
        .collect()
}

/// Log-linear fit of the ACF decay rate: returns `rate` such that
/// `R(tau) ~ exp(-rate * tau)`, using lags with R above `floor`.
pub fn acf_decay_rate(series: &[f64], dt: f64, max_lag: usize, floor: f64) -> Result<f64> {
    let acf = autocorrelation(series, max_lag);
    let mut taus = Vec::new();
    let mut lnr = Vec::new();
    for (lag, &r) in acf.iter().enumerate() {
        if lag == 0 {
            continue;
        }
        if r <= floor {
            break;
        }
        taus.push(lag as f64 * dt);
        lnr.push(r.ln());
    }
    if taus.len() < 3 {
        return Err(CoreError::InvalidParameter(
            "ACF decays too fast for a log-linear fit at this lag grid".into(),
        ));
    }
    let (slope, _, _) = linear_fit(&taus, &lnr);
    Ok(-slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglog_exact_power_laws() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let fit = fit_loglog(&xs, &xs).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);

        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.5)).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn loglog_rejects_bad_input() {
        assert!(fit_loglog(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_loglog(&[1.0, -2.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn loglog_with_multiplicative_noise() {
        let rng = crate::paths::CounterRng::new(5, 0);
        let xs: Vec<f64> = (1..=12).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| 2.0 * x.powf(1.3) * (1.0 + 0.01 * rng.normal(i as u64)))
            .collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope - 1.3).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }

    #[test]
    fn ks_of_exact_uniform_sample_is_small() {
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0));
        assert!(d <= 0.5 / n as f64 + 1e-12, "d = {d}");
    }

    #[test]
    fn wilson_bound_sane() {
        let lb = wilson_lower(90, 100);
        assert!(lb > 0.82 && lb < 0.9, "wilson lower {lb}");
        assert!(wilson_lower(0, 0) == 0.0);
    }

    #[test]
    fn kde_mode_recovers_peak() {
        let rng = crate::paths::CounterRng::new(17, 3);
        let samples: Vec<f64> = (0..4000).map(|i| 2.0 + 0.3 * rng.normal(i as u64)).collect();
        let kde = GaussianKde::new(&samples, None).unwrap();
        let mode = kde.mode_on_grid(0.0, 4.0, 801);
        assert!((mode - 2.0).abs() < 0.1, "mode {mode}");
    }

    #[test]
    fn normal_cdf_anchors() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
    }
}
