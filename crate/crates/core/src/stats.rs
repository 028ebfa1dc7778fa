//! Statistical primitives shared by the estimators and the verification
//! suite: exact binomial confidence intervals, DKW bands and a two-sample
//! Kolmogorov-Smirnov test.

use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};

/// Half-width of the Dvoretzky-Kiefer-Wolfowitz band: with probability at
/// least `1 - delta` the empirical CDF of `n` samples stays within this
/// distance of the true CDF everywhere.
pub fn dkw_radius(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Exact (Clopper-Pearson) two-sided binomial confidence interval.
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Estimation("no trials".into()));
    }
    if successes > trials {
        return Err(Error::Estimation(format!(
            "successes {successes} exceed trials {trials}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Estimation(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let alpha = 1.0 - level;
    let s = successes as f64;
    let n = trials as f64;
    let low = if successes == 0 {
        0.0
    } else {
        beta_quantile(s, n - s + 1.0, alpha / 2.0)?
    };
    let high = if successes == trials {
        1.0
    } else {
        beta_quantile(s + 1.0, n - s, 1.0 - alpha / 2.0)?
    };
    Ok((low, high))
}

/// Beta quantile by bisection on the regularized incomplete beta; the
/// library's own quantile search stops near 1e-5, too coarse here.
fn beta_quantile(a: f64, b: f64, p: f64) -> Result<f64> {
    let dist = Beta::new(a, b).map_err(|e| Error::Estimation(e.to_string()))?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..110 {
        let mid = 0.5 * (lo + hi);
        if dist.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Empirical CDF over a sample; extinct runs may contribute `-inf` values,
/// which sort below every finite threshold.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
        EmpiricalCdf { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&v| v <= x);
        k as f64 / self.sorted.len() as f64
    }

    /// Largest deviation from a reference CDF over the given evaluation
    /// points (sufficient for discrete references whose jumps are covered by
    /// the points).
    pub fn sup_distance_at(&self, points: &[f64], reference: impl Fn(f64) -> f64) -> f64 {
        points
            .iter()
            .map(|&x| (self.eval(x) - reference(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// Survival function of the Kolmogorov distribution,
/// `Q(t) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 t^2)`.
pub fn kolmogorov_sf(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * t * t).exp();
        if term < 1e-18 {
            break;
        }
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct KsTwoSample {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTwoSample> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Estimation("empty sample".into()));
    }
    let fa = EmpiricalCdf::new(a.to_vec());
    let fb = EmpiricalCdf::new(b.to_vec());
    let mut d: f64 = 0.0;
    for &x in fa.sorted.iter().chain(fb.sorted.iter()) {
        d = d.max((fa.eval(x) - fb.eval(x)).abs());
    }
    let m = a.len() as f64;
    let n = b.len() as f64;
    let effective = (m * n / (m + n)).sqrt();
    Ok(KsTwoSample {
        statistic: d,
        p_value: kolmogorov_sf(effective * d),
    })
}
