//! Centered two-sided stretched-exponential displacement laws, plus the
//! discrete lattice surrogate used by the exact oracles.

use rand::Rng;

use crate::error::{Error, Result};

/// Displacement law with tails `P(X >= x) = a_plus exp(-lambda_plus x^r)` and
/// `P(X <= -x) = a_minus exp(-lambda_minus x^r)` for `x >= 0`, `r` in (0, 1).
///
/// The weights `a_plus`, `a_minus` are fixed by continuity at zero and the
/// zero-mean constraint, so the tails hold exactly for all `x >= 0` and the
/// quantile function inverts in closed form.
#[derive(Debug, Clone, Copy)]
pub struct StepLaw {
    r: f64,
    lambda_plus: f64,
    lambda_minus: f64,
    a_plus: f64,
    a_minus: f64,
}

impl StepLaw {
    /// Builds the centered law. The positive-side weight comes out as
    /// `a_plus = lambda_plus^(1/r) / (lambda_plus^(1/r) + lambda_minus^(1/r))`.
    pub fn centered(r: f64, lambda_plus: f64, lambda_minus: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 || r >= 1.0 {
            return Err(Error::InvalidStep(format!(
                "r = {r} must lie strictly inside (0, 1); light-tailed steps are outside this model family"
            )));
        }
        if !(lambda_plus.is_finite() && lambda_plus > 0.0)
            || !(lambda_minus.is_finite() && lambda_minus > 0.0)
        {
            return Err(Error::InvalidStep(format!(
                "tail weights must be positive, got lambda_plus = {lambda_plus}, lambda_minus = {lambda_minus}"
            )));
        }
        let wp = lambda_plus.powf(1.0 / r);
        let wm = lambda_minus.powf(1.0 / r);
        let a_plus = wp / (wp + wm);
        Ok(StepLaw {
            r,
            lambda_plus,
            lambda_minus,
            a_plus,
            a_minus: 1.0 - a_plus,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }

    pub fn lambda_minus(&self) -> f64 {
        self.lambda_minus
    }

    pub fn a_plus(&self) -> f64 {
        self.a_plus
    }

    pub fn a_minus(&self) -> f64 {
        self.a_minus
    }

    /// `P(X >= x)` for `x >= 0`, exactly.
    pub fn tail_upper(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::Domain(format!("tail_upper needs x >= 0, got {x}")));
        }
        Ok(self.a_plus * (-self.lambda_plus * x.powf(self.r)).exp())
    }

    /// `P(X <= -x)` for `x >= 0`, exactly.
    pub fn tail_lower(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::Domain(format!("tail_lower needs x >= 0, got {x}")));
        }
        Ok(self.a_minus * (-self.lambda_minus * x.powf(self.r)).exp())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.a_minus * (-self.lambda_minus * (-x).powf(self.r)).exp()
        } else {
            1.0 - self.a_plus * (-self.lambda_plus * x.powf(self.r)).exp()
        }
    }

    /// Exact inverse of the CDF on (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!(
                "quantile argument {u} outside (0, 1)"
            )));
        }
        if u <= self.a_minus {
            Ok(-((self.a_minus / u).ln() / self.lambda_minus).powf(1.0 / self.r))
        } else {
            Ok(((self.a_plus / (1.0 - u)).ln() / self.lambda_plus).powf(1.0 / self.r))
        }
    }

    /// Inverse-CDF sampling from the caller's random source.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                // u is uniform on (0, 1): gen() never returns 1.0.
                return self.quantile(u).expect("u inside (0, 1)");
            }
        }
    }
}

/// Mean-zero displacement law on the lattice `h * Z`, for exact oracles.
#[derive(Debug, Clone)]
pub struct LatticeStepLaw {
    h: f64,
    /// Sorted `(index, probability)` pairs with positive probability.
    pmf: Vec<(i64, f64)>,
}

impl LatticeStepLaw {
    pub fn new(h: f64, pmf: &[(i64, f64)]) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidStep(format!("spacing h = {h} must be positive")));
        }
        let mut entries: Vec<(i64, f64)> = Vec::new();
        let mut sum = 0.0;
        for &(i, p) in pmf {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidStep(format!(
                    "probability at index {i} is {p}"
                )));
            }
            sum += p;
            if p > 0.0 {
                entries.push((i, p));
            }
        }
        entries.sort_by_key(|&(i, _)| i);
        entries.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 += a.1;
                true
            } else {
                false
            }
        });
        if entries.is_empty() {
            return Err(Error::InvalidStep("empty lattice pmf".into()));
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidStep(format!(
                "lattice probabilities sum to {sum}, not 1"
            )));
        }
        let mean: f64 = entries.iter().map(|&(i, p)| h * i as f64 * p).sum();
        if mean.abs() > 1e-12 {
            return Err(Error::InvalidStep(format!(
                "lattice law has mean {mean}, not 0"
            )));
        }
        Ok(LatticeStepLaw { h, pmf: entries })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn pmf(&self) -> &[(i64, f64)] {
        &self.pmf
    }

    pub fn min_index(&self) -> i64 {
        self.pmf.first().map(|&(i, _)| i).unwrap_or(0)
    }

    pub fn max_index(&self) -> i64 {
        self.pmf.last().map(|&(i, _)| i).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().map(|&(i, p)| self.h * i as f64 * p).sum()
    }

    /// Cumulant generating function `log E[exp(theta X)]`.
    pub fn cgf(&self, theta: f64) -> f64 {
        self.pmf
            .iter()
            .map(|&(i, p)| p * (theta * self.h * i as f64).exp())
            .sum::<f64>()
            .ln()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(i, p) in &self.pmf {
            acc += p;
            if u < acc {
                return self.h * i as f64;
            }
        }
        self.h * self.pmf.last().expect("non-empty pmf").0 as f64
    }

    /// Exact pmf of the `n`-step walk: returns the minimum index and the
    /// probabilities over `min_index * n ..= max_index * n`.
    pub fn walk_pmf(&self, n: u32) -> (i64, Vec<f64>) {
        let smin = self.min_index();
        let smax = self.max_index();
        let span = (smax - smin) as usize;
        let mut cur = vec![1.0];
        for gen in 0..n as usize {
            let mut next = vec![0.0; (gen + 1) * span + 1];
            for (j, &c) in cur.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for &(s, p) in &self.pmf {
                    next[j + (s - smin) as usize] += c * p;
                }
            }
            cur = next;
        }
        (smin * i64::from(n), cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_weights() {
        let law = StepLaw::centered(0.5, 1.0, 1.0).unwrap();
        assert!((law.a_plus() - 0.5).abs() < 1e-15);
        assert!((law.a_minus() - 0.5).abs() < 1e-15);
        let law9 = StepLaw::centered(0.9, 2.7, 2.7).unwrap();
        assert!((law9.a_plus() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_weights_from_zero_mean_balance() {
        let law = StepLaw::centered(0.5, 4.0, 1.0).unwrap();
        assert!((law.a_plus() - 16.0 / 17.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(StepLaw::centered(1.0, 1.0, 1.0).is_err());
        assert!(StepLaw::centered(1.3, 1.0, 1.0).is_err());
        assert!(StepLaw::centered(0.0, 1.0, 1.0).is_err());
        assert!(StepLaw::centered(0.5, 0.0, 1.0).is_err());
        assert!(StepLaw::centered(0.5, 1.0, -2.0).is_err());
    }

    /// Trapezoid integration of the quantile function over a grid refined
    /// toward both endpoints; independent check that the law is centered.
    fn quadrature_mean(law: &StepLaw, nodes: usize) -> f64 {
        let lo = 1e-12f64;
        let third = nodes / 3;
        let mut us: Vec<f64> = Vec::with_capacity(nodes);
        for i in 0..third {
            let t = i as f64 / third as f64;
            us.push(lo * (0.1f64 / lo).powf(t));
        }
        for i in 0..third {
            us.push(0.1 + 0.8 * i as f64 / third as f64);
        }
        for i in 0..=third {
            let t = i as f64 / third as f64;
            us.push(1.0 - lo * (0.1f64 / lo).powf(1.0 - t));
        }
        us.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut acc = 0.0;
        for w in us.windows(2) {
            let (u0, u1) = (w[0], w[1]);
            acc += 0.5 * (law.quantile(u0).unwrap() + law.quantile(u1).unwrap()) * (u1 - u0);
        }
        acc
    }

    #[test]
    fn numerical_mean_is_zero() {
        for (r, lp, lm) in [(0.5, 1.0, 1.0), (0.5, 4.0, 1.0), (0.7, 0.5, 2.0), (0.3, 1.0, 3.0)] {
            let law = StepLaw::centered(r, lp, lm).unwrap();
            let mean = quadrature_mean(&law, 100_000);
            assert!(
                mean.abs() < 1e-6,
                "mean {mean} not ~0 for r={r}, lp={lp}, lm={lm}"
            );
        }
    }

    #[test]
    fn tail_values() {
        let law = StepLaw::centered(0.5, 1.0, 1.0).unwrap();
        assert!((law.tail_upper(0.0).unwrap() - law.a_plus()).abs() < 1e-15);
        assert!((law.tail_upper(4.0).unwrap() - 0.5 * (-2.0f64).exp()).abs() < 1e-15);
        let at_zero = law.tail_upper(0.0).unwrap() + law.tail_lower(0.0).unwrap();
        assert!((at_zero - 1.0).abs() < 1e-15);
        assert!(law.tail_upper(-1.0).is_err());
        assert!(law.tail_lower(-0.5).is_err());
    }

    #[test]
    fn tail_is_exactly_log_linear_in_x_pow_r() {
        let law = StepLaw::centered(0.4, 1.7, 0.6).unwrap();
        let log_a = law.a_plus().ln();
        for i in 1..60 {
            let x = 0.25 * i as f64;
            let v = law.tail_upper(x).unwrap().ln() + law.lambda_plus() * x.powf(law.r());
            assert!((v - log_a).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_roundtrip_and_boundary() {
        let law = StepLaw::centered(0.5, 4.0, 1.0).unwrap();
        assert!(law.quantile(law.a_minus()).unwrap().abs() < 1e-12);
        for i in 1..10 {
            let u = i as f64 / 10.0;
            let x = law.quantile(u).unwrap();
            assert!((law.cdf(x) - u).abs() < 1e-12);
        }
        assert!(law.quantile(0.0).is_err());
        assert!(law.quantile(1.0).is_err());

        let sym = StepLaw::centered(0.5, 1.0, 1.0).unwrap();
        assert!((sym.cdf(-9.0) - 0.5 * (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn sampled_cdf_inside_dkw_band() {
        let law = StepLaw::centered(0.5, 1.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x1ab5eed);
        let n = 1_000_000usize;
        let mut xs: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // 99% band.
        let eps = ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt();
        let mut sup: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = law.cdf(x);
            sup = sup.max((f - i as f64 / n as f64).abs());
            sup = sup.max((f - (i + 1) as f64 / n as f64).abs());
        }
        assert!(sup < eps, "sup distance {sup} outside 99% DKW band {eps}");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quantile_inverts_cdf(
                r in 0.05f64..0.95,
                lp in 0.1f64..5.0,
                lm in 0.1f64..5.0,
                u in 1e-6f64..1.0,
            ) {
                prop_assume!(u < 1.0 - 1e-6);
                let law = StepLaw::centered(r, lp, lm).unwrap();
                let x = law.quantile(u).unwrap();
                prop_assert!((law.cdf(x) - u).abs() < 1e-9);
            }

            #[test]
            fn tails_are_exactly_the_stated_form(
                r in 0.05f64..0.95,
                lp in 0.1f64..5.0,
                lm in 0.1f64..5.0,
                x in 0.0f64..50.0,
            ) {
                let law = StepLaw::centered(r, lp, lm).unwrap();
                let up = law.tail_upper(x).unwrap();
                prop_assert!((up - law.a_plus() * (-lp * x.powf(r)).exp()).abs() <= 1e-15);
                let lo = law.tail_lower(x).unwrap();
                prop_assert!((lo - law.a_minus() * (-lm * x.powf(r)).exp()).abs() <= 1e-15);
                prop_assert!((law.cdf(x) + up - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn lattice_surrogate_validation() {
        assert!(LatticeStepLaw::new(1.0, &[(-1, 0.5), (1, 0.5)]).is_ok());
        assert!(LatticeStepLaw::new(1.0, &[(-2, 0.25), (0, 0.5), (2, 0.25)]).is_ok());
        let err = LatticeStepLaw::new(1.0, &[(0, 0.5), (1, 0.5)]);
        assert!(matches!(err, Err(Error::InvalidStep(_))));
        assert!(LatticeStepLaw::new(0.0, &[(-1, 0.5), (1, 0.5)]).is_err());
        assert!(LatticeStepLaw::new(1.0, &[(-1, 0.6), (1, 0.5)]).is_err());
    }

    #[test]
    fn walk_pmf_is_binomial_for_pm_one() {
        let law = LatticeStepLaw::new(1.0, &[(-1, 0.5), (1, 0.5)]).unwrap();
        let (min_idx, pmf) = law.walk_pmf(2);
        assert_eq!(min_idx, -2);
        assert!((pmf[0] - 0.25).abs() < 1e-15);
        assert!((pmf[1] - 0.0).abs() < 1e-15);
        assert!((pmf[2] - 0.5).abs() < 1e-15);
        assert!((pmf[4] - 0.25).abs() < 1e-15);
        let (m0, p0) = law.walk_pmf(0);
        assert_eq!(m0, 0);
        assert_eq!(p0, vec![1.0]);
    }
}
