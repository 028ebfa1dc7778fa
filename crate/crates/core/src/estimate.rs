//! Statistical layer: tail-probability estimates with exact binomial
//! intervals, implied empirical rates, semi-analytic evaluation of the
//! independent-walks tail, the single-big-jump ratio diagnostic and
//! trend tables against the analytic rates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gw::{OffspringLaw, ZDistribution};
use crate::rates::lattice_rate_dual;
use crate::rng::{replica_rng, StreamPurpose};
use crate::simulate::{run_conditioned, Engine, SimConfig};
use crate::stats::clopper_pearson;
use crate::step::{LatticeStepLaw, StepLaw};

/// Monte Carlo probability estimate with an exact confidence interval and
/// the implied empirical rate `-log(p_hat) / n`.
#[derive(Debug, Clone)]
pub struct TailEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    /// Undefined when no success was observed or the horizon is zero.
    pub empirical_rate: Option<f64>,
    pub horizon_n: u32,
}

pub fn tail_estimate(successes: u64, trials: u64, level: f64, horizon_n: u32) -> Result<TailEstimate> {
    let (ci_low, ci_high) = clopper_pearson(successes, trials, level)?;
    let p_hat = successes as f64 / trials as f64;
    let empirical_rate = if successes > 0 && horizon_n > 0 {
        Some(-p_hat.ln() / f64::from(horizon_n))
    } else {
        None
    };
    Ok(TailEstimate {
        successes,
        trials,
        p_hat,
        ci_low,
        ci_high,
        level,
        empirical_rate,
        horizon_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventSide {
    Upper,
    Lower,
}

/// Threshold event on the scaled maximum: `M_n / scale(n)` against
/// `threshold_x`, where the scale is `n^(1/r)` for continuous steps and `n`
/// for lattice steps.
#[derive(Debug, Clone, Copy)]
pub struct TailEvent {
    pub side: EventSide,
    pub threshold_x: f64,
}

pub const MIN_EVENT_REPLICAS: usize = 100;

/// Estimates the conditioned probability of a threshold event by rejection
/// sampling; truncated runs are an error, never silently dropped.
pub fn estimate_event(
    cfg: &SimConfig,
    engine: Engine,
    event: TailEvent,
    replicas: usize,
    level: f64,
) -> Result<TailEstimate> {
    if replicas < MIN_EVENT_REPLICAS {
        return Err(Error::Domain(format!(
            "need at least {MIN_EVENT_REPLICAS} replicas, got {replicas}"
        )));
    }
    if cfg.horizon_n == 0 {
        return Err(Error::Domain(
            "threshold events are scaled by the horizon; n = 0 is degenerate".into(),
        ));
    }
    let cond = run_conditioned(cfg, engine, replicas)?;
    if cond.truncated_runs > 0 {
        return Err(Error::ResourceBound(format!(
            "{} truncated runs: raise population_cap",
            cond.truncated_runs
        )));
    }
    let scale = cfg.model.step.horizon_scale(cfg.horizon_n);
    let successes = cond
        .runs
        .iter()
        .filter(|r| {
            let scaled = r.max_position / scale;
            match event.side {
                EventSide::Upper => scaled >= event.threshold_x,
                EventSide::Lower => scaled <= event.threshold_x,
            }
        })
        .count() as u64;
    tail_estimate(successes, replicas as u64, level, cfg.horizon_n)
}

/// Exact mixture over the population: `1 - sum_k P(Z_n = k) c^k` where `c`
/// is the single-walk CDF at the threshold. Requires the population law to
/// be complete (`tail_mass = 0`).
pub fn semianalytic_ind_tail(zdist: &ZDistribution, sn_cdf_at_y: f64) -> Result<f64> {
    if zdist.tail_mass != 0.0 {
        return Err(Error::Estimation(
            "population law is truncated; the mixture would be incomplete".into(),
        ));
    }
    if !(0.0..=1.0).contains(&sn_cdf_at_y) {
        return Err(Error::Domain(format!(
            "walk CDF value {sn_cdf_at_y} outside [0, 1]"
        )));
    }
    let mut acc = 0.0;
    let mut c_pow = 1.0;
    for &p in &zdist.probs {
        acc += p * c_pow;
        c_pow *= sn_cdf_at_y;
    }
    Ok((1.0 - acc).max(0.0))
}

/// Conditional version given survival to the horizon.
pub fn semianalytic_ind_tail_conditional(
    zdist: &ZDistribution,
    sn_cdf_at_y: f64,
) -> Result<f64> {
    let extinct = zdist.probs[0];
    if extinct >= 1.0 {
        return Err(Error::Domain("extinction is certain".into()));
    }
    Ok(semianalytic_ind_tail(zdist, sn_cdf_at_y)? / (1.0 - extinct))
}

/// `P(max of independent walks >= y) = 1 - f^(n)(1 - t)` from the upper-tail
/// probability `t` of a single walk, evaluated in survival space so that
/// large horizons keep full relative precision. Equals the mixture over the
/// exact population law whenever that law is computable.
pub fn ind_tail_by_pgf(offspring: &OffspringLaw, n: u32, sn_upper_tail: f64) -> Result<f64> {
    offspring.survival_iterate(sn_upper_tail, n)
}

/// Single-big-jump diagnostic report.
#[derive(Debug, Clone)]
pub struct SumAsMaxReport {
    pub estimate: TailEstimate,
    /// `n * P(X > x_n)`, exact.
    pub exact_n_tail: f64,
    /// Undefined when no success was observed.
    pub ratio: Option<f64>,
    /// Confidence bounds on the ratio scale (lower is 0 at zero successes).
    pub ratio_ci: (f64, f64),
    /// The threshold sits below `10 n^(1/(2-2r))`: the asymptotic regime has
    /// not been entered and the ratio may sit far from 1.
    pub regime_warning: bool,
}

/// Monte Carlo estimate of `P(S_n > x_n) / (n P(X > x_n))`.
pub fn sumasmax_ratio(
    step: &StepLaw,
    n: u32,
    x_n: f64,
    replicas: u64,
    seed: u64,
    level: f64,
) -> Result<SumAsMaxReport> {
    if x_n <= 0.0 {
        return Err(Error::Domain(format!("x_n = {x_n} must be positive")));
    }
    if n == 0 || replicas == 0 {
        return Err(Error::Domain("need n >= 1 and replicas >= 1".into()));
    }
    let sigma = 1.0 / (2.0 - 2.0 * step.r());
    let regime_warning = x_n < 10.0 * f64::from(n).powf(sigma);

    let chunk: u64 = 65_536;
    let chunks: u64 = replicas.div_ceil(chunk);
    let successes: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(replicas);
            let mut hits = 0u64;
            for i in lo..hi {
                let mut rng = replica_rng(seed, StreamPurpose::WalkSum, i);
                let mut s = 0.0;
                for _ in 0..n {
                    s += step.sample(&mut rng);
                }
                if s > x_n {
                    hits += 1;
                }
            }
            hits
        })
        .sum();

    let estimate = tail_estimate(successes, replicas, level, n)?;
    let exact_n_tail = f64::from(n) * step.tail_upper(x_n)?;
    let ratio = if successes > 0 {
        Some(estimate.p_hat / exact_n_tail)
    } else {
        None
    };
    let ratio_ci = (estimate.ci_low / exact_n_tail, estimate.ci_high / exact_n_tail);
    Ok(SumAsMaxReport {
        estimate,
        exact_n_tail,
        ratio,
        ratio_ci,
        regime_warning,
    })
}

/// One row of a rate-trend table.
#[derive(Debug, Clone)]
pub struct TrendRow {
    pub n: u32,
    /// Undefined rates (zero successes, zero horizon, vanishing exact
    /// probability) are flagged as `None`.
    pub empirical_rate: Option<f64>,
    pub analytic_rate: f64,
}

impl TrendRow {
    pub fn gap(&self) -> Option<f64> {
        self.empirical_rate.map(|e| (e - self.analytic_rate).abs())
    }
}

/// Upper-deviation trend of the independent-walks maximum on a lattice
/// model: exact tail via generating-function composition against the
/// convex-dual rate analogue `I_lattice(x) - log m` (linear speed).
pub fn rate_trend_ind_upper_lattice(
    offspring: &OffspringLaw,
    lattice: &LatticeStepLaw,
    threshold_speed: f64,
    n_list: &[u32],
    conditional: bool,
) -> Result<Vec<TrendRow>> {
    ensure_ascending(n_list)?;
    let analytic = lattice_rate_dual(lattice, threshold_speed) - offspring.mean().ln();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let (min_index, pmf) = lattice.walk_pmf(n);
        // P(S_n >= x n): sum the upper lattice tail, full relative precision.
        let x_n = threshold_speed * f64::from(n);
        let start = ((x_n / lattice.h() - 1e-9).ceil() as i64 - min_index).max(0) as usize;
        let t: f64 = pmf.iter().skip(start).sum();
        let mut tail = ind_tail_by_pgf(offspring, n, t)?;
        if conditional {
            let survival = offspring.survival_iterate(1.0, n)?;
            tail /= survival;
        }
        let empirical_rate = if n > 0 && tail > 0.0 {
            Some(-tail.ln() / f64::from(n))
        } else {
            None
        };
        rows.push(TrendRow {
            n,
            empirical_rate,
            analytic_rate: analytic,
        });
    }
    Ok(rows)
}

/// Lower-deviation trend of the population: exact `P(Z_n = k*)` from the
/// truncated series composition; the per-generation log-ratio converges to
/// `rho`.
pub fn rate_trend_gw_lower(offspring: &OffspringLaw, n_list: &[u32]) -> Result<Vec<TrendRow>> {
    ensure_ascending(n_list)?;
    if offspring.rho().is_infinite() {
        return Err(Error::Regime(
            "population lower deviations are not exponential when p(0)+p(1)=0".into(),
        ));
    }
    let k_star = offspring.k_star() as usize;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let here = offspring.zn_low_order_probs(n, k_star)[k_star];
        let next = offspring.zn_low_order_probs(n + 1, k_star)[k_star];
        let empirical_rate = if here > 0.0 && next > 0.0 {
            Some(-(next / here).ln())
        } else {
            None
        };
        rows.push(TrendRow {
            n,
            empirical_rate,
            analytic_rate: offspring.rho(),
        });
    }
    Ok(rows)
}

/// Upper-deviation trend of a single walk (the reference model with one
/// line): Monte Carlo tails against the closed-form rate.
pub fn rate_trend_single_walk(
    step: &StepLaw,
    threshold_speed: f64,
    n_list: &[u32],
    replicas: u64,
    seed: u64,
    level: f64,
) -> Result<Vec<TrendRow>> {
    ensure_ascending(n_list)?;
    let analytic = step.lambda_plus() * threshold_speed.powf(step.r());
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let threshold = threshold_speed * f64::from(n).powf(1.0 / step.r());
        let chunk: u64 = 65_536;
        let chunks = replicas.div_ceil(chunk);
        let successes: u64 = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * chunk;
                let hi = (lo + chunk).min(replicas);
                let mut hits = 0u64;
                for i in lo..hi {
                    // Streams are salted by n so each row is independent.
                    let mut rng =
                        replica_rng(seed ^ (u64::from(n) << 32), StreamPurpose::WalkSum, i);
                    let mut s = 0.0;
                    for _ in 0..n {
                        s += step.sample(&mut rng);
                    }
                    if s >= threshold {
                        hits += 1;
                    }
                }
                hits
            })
            .sum();
        let est = tail_estimate(successes, replicas, level, n)?;
        rows.push(TrendRow {
            n,
            empirical_rate: est.empirical_rate,
            analytic_rate: analytic,
        });
    }
    Ok(rows)
}

fn ensure_ascending(n_list: &[u32]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::Domain("empty horizon list".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("horizon list must be strictly ascending".into()));
    }
    Ok(())
}

/// CSV rows `n,x,kind,p_hat,ci_low,ci_high,empirical_rate,analytic_rate`;
/// undefined rates print as `nan`.
pub fn estimate_csv_row(
    n: u32,
    x: f64,
    kind: &str,
    est: Option<&TailEstimate>,
    analytic_rate: Option<f64>,
) -> String {
    let (p, lo, hi, emp) = match est {
        Some(e) => (
            format!("{}", e.p_hat),
            format!("{}", e.ci_low),
            format!("{}", e.ci_high),
            e.empirical_rate
                .map(|r| format!("{r}"))
                .unwrap_or_else(|| "nan".into()),
        ),
        None => ("nan".into(), "nan".into(), "nan".into(), "nan".into()),
    };
    let ana = analytic_rate
        .map(|r| format!("{r}"))
        .unwrap_or_else(|| "nan".into());
    format!("{n},{x},{kind},{p},{lo},{hi},{emp},{ana}\n")
}

pub const ESTIMATE_CSV_HEADER: &str =
    "n,x,kind,p_hat,ci_low,ci_high,empirical_rate,analytic_rate\n";

/// CSV row for a trend-table entry (no probability estimate columns).
pub fn trend_csv_row(row: &TrendRow, x: f64, kind: &str) -> String {
    let emp = row
        .empirical_rate
        .map(|r| format!("{r}"))
        .unwrap_or_else(|| "nan".into());
    format!(
        "{},{x},{kind},nan,nan,nan,{emp},{}\n",
        row.n, row.analytic_rate
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gw::offspring_from_pairs;
    use crate::oracle;
    use crate::simulate::{Displacement, SimModel};
    use crate::stats::dkw_radius;

    fn pm_one() -> LatticeStepLaw {
        LatticeStepLaw::new(1.0, &[(-1, 0.5), (1, 0.5)]).unwrap()
    }

    fn lattice_cfg(n: u32, seed: u64) -> SimConfig {
        SimConfig {
            model: SimModel {
                offspring: offspring_from_pairs(&[(0, 0.25), (2, 0.75)]).unwrap(),
                step: Displacement::Lattice(pm_one()),
            },
            horizon_n: n,
            population_cap: 1 << 20,
            seed,
            condition_on_survival: true,
        }
    }

    #[test]
    fn always_true_event_has_rate_zero() {
        let cfg = lattice_cfg(3, 42);
        let est = estimate_event(
            &cfg,
            Engine::Brw,
            TailEvent {
                side: EventSide::Lower,
                threshold_x: 1e9,
            },
            500,
            0.99,
        )
        .unwrap();
        assert_eq!(est.successes, 500);
        assert_eq!(est.p_hat, 1.0);
        assert_eq!(est.empirical_rate, Some(0.0));
    }

    #[test]
    fn too_few_replicas_is_a_domain_error() {
        let cfg = lattice_cfg(3, 42);
        let err = estimate_event(
            &cfg,
            Engine::Brw,
            TailEvent {
                side: EventSide::Upper,
                threshold_x: 0.0,
            },
            10,
            0.99,
        );
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn zero_horizon_event_is_rejected() {
        let cfg = lattice_cfg(0, 42);
        let err = estimate_event(
            &cfg,
            Engine::Brw,
            TailEvent {
                side: EventSide::Upper,
                threshold_x: 0.0,
            },
            200,
            0.99,
        );
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn truncated_runs_are_an_error() {
        let mut cfg = lattice_cfg(10, 42);
        cfg.model.offspring = offspring_from_pairs(&[(2, 1.0)]).unwrap();
        cfg.population_cap = 16;
        let err = estimate_event(
            &cfg,
            Engine::Brw,
            TailEvent {
                side: EventSide::Upper,
                threshold_x: 0.0,
            },
            200,
            0.99,
        );
        assert!(matches!(err, Err(Error::ResourceBound(_))));
    }

    #[test]
    fn estimated_cdf_point_inside_dkw_band_of_oracle() {
        let cfg = lattice_cfg(4, 7);
        let oracle_cdf = oracle::conditional_cdf(
            &oracle::brw_max_cdf_exact(&pm_one(), &cfg.model.offspring, 4).unwrap(),
        )
        .unwrap();
        let replicas = 20_000;
        // Scaled threshold 0 corresponds to raw position 0 at the lattice
        // scale n.
        let est = estimate_event(
            &cfg,
            Engine::Brw,
            TailEvent {
                side: EventSide::Lower,
                threshold_x: 0.0,
            },
            replicas,
            0.99,
        )
        .unwrap();
        let exact = oracle_cdf.cdf_at(0.0);
        let eps = dkw_radius(replicas, 0.01);
        assert!(
            (est.p_hat - exact).abs() <= eps,
            "p_hat {} vs exact {exact} outside {eps}",
            est.p_hat
        );
    }

    #[test]
    fn semianalytic_edge_values() {
        let law = offspring_from_pairs(&[(0, 0.25), (2, 0.75)]).unwrap();
        let z = law.exact_zn_distribution(3, 8).unwrap();
        assert_eq!(semianalytic_ind_tail(&z, 1.0).unwrap(), 0.0);
        let all_alive = semianalytic_ind_tail(&z, 0.0).unwrap();
        assert!((all_alive - (1.0 - z.probs[0])).abs() < 1e-15);

        let doubling = offspring_from_pairs(&[(2, 1.0)]).unwrap();
        let z1 = doubling.exact_zn_distribution(1, 2).unwrap();
        let v = semianalytic_ind_tail(&z1, 0.75).unwrap();
        assert!((v - 7.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn semianalytic_rejects_truncated_population() {
        let law = offspring_from_pairs(&[(0, 0.25), (2, 0.75)]).unwrap();
        let z = law.exact_zn_distribution(6, 8).unwrap();
        assert!(z.tail_mass > 0.0);
        assert!(semianalytic_ind_tail(&z, 0.5).is_err());
    }

    #[test]
    fn semianalytic_matches_oracle_complement_and_pgf_route() {
        let law = offspring_from_pairs(&[(0, 0.25), (2, 0.75)]).unwrap();
        let lattice = pm_one();
        for n in [1u32, 3, 6] {
            let z = law.exact_zn_distribution(n, 1 << n).unwrap();
            let dist = oracle::ind_max_cdf_exact(&lattice, &law, n).unwrap();
            let (min_index, pmf) = lattice.walk_pmf(n);
            let mut walk_cdf = 0.0;
            for (i, &p) in pmf.iter().enumerate() {
                walk_cdf += p;
                let y = (min_index + i as i64) as f64;
                let mixture = semianalytic_ind_tail(&z, walk_cdf).unwrap();
                let from_oracle = 1.0 - dist.cdf_at(y);
                assert!(
                    (mixture - from_oracle).abs() <= 1e-12,
                    "mixture {mixture} vs oracle {from_oracle} at n={n}, y={y}"
                );
                let from_pgf = ind_tail_by_pgf(&law, n, 1.0 - walk_cdf).unwrap();
                assert!((mixture - from_pgf).abs() <= 1e-12);

                let cond = semianalytic_ind_tail_conditional(&z, walk_cdf).unwrap();
                let expect = mixture / (1.0 - z.probs[0]);
                assert!((cond - expect).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn sumasmax_at_n1_is_exactly_calibrated() {
        // At n = 1 the ratio estimates P(X > x)/P(X > x), so its CI must
        // cover 1 comfortably.
        let step = StepLaw::centered(0.5, 1.0, 1.0).unwrap();
        let rep = sumasmax_ratio(&step, 1, 1.0, 400_000, 99, 0.99).unwrap();
        let (lo, hi) = rep.ratio_ci;
        assert!(lo <= 1.0 && 1.0 <= hi, "CI ({lo}, {hi}) misses 1");
        assert!(rep.regime_warning); // 1.0 < 10 * 1^1
    }

    #[test]
    fn sumasmax_regime_warning_and_degenerate_threshold() {
        let step = StepLaw::centered(0.5, 1.0, 1.0).unwrap();
        let rep = sumasmax_ratio(&step, 2, 0.05, 20_000, 5, 0.99).unwrap();
        assert!(rep.regime_warning);
        let r = rep.ratio.unwrap();
        assert!(
            !(0.9..=1.1).contains(&r),
            "tiny thresholds sit far from the asymptotic ratio, got {r}"
        );
        assert!(sumasmax_ratio(&step, 2, -1.0, 100, 5, 0.99).is_err());
        assert!(sumasmax_ratio(&step, 0, 1.0, 100, 5, 0.99).is_err());
    }

    #[test]
    fn sumasmax_zero_successes_reports_one_sided_interval() {
        let step = StepLaw::centered(0.5, 1.0, 1.0).unwrap();
        // Threshold far beyond reach of 200 replicas.
        let rep = sumasmax_ratio(&step, 2, 5e4, 200, 31, 0.99).unwrap();
        assert_eq!(rep.estimate.successes, 0);
        assert!(rep.ratio.is_none());
        assert_eq!(rep.ratio_ci.0, 0.0);
        assert!(rep.ratio_ci.1 > 0.0);
    }

    #[test]
    fn gw_lower_trend_converges_to_rho() {
        let law = offspring_from_pairs(&[(0, 0.25), (2, 0.75)]).unwrap();
        let n_list: Vec<u32> = (5..=13).collect();
        let rows = rate_trend_gw_lower(&law, &n_list).unwrap();
        // Frozen from the exact rational recursion: the ratio at the last
        // three horizons is within 2e-4 of 1/2.
        for row in rows.iter().rev().take(3) {
            let ratio = (-row.empirical_rate.unwrap()).exp();
            assert!(
                (ratio - 0.5).abs() < 2e-4,
                "ratio {ratio} at n={} off 1/2",
                row.n
            );
        }
        for row in &rows {
            assert!((row.analytic_rate - 2f64.ln()).abs() < 1e-12);
        }

        let b = offspring_from_pairs(&[(2, 0.5), (3, 0.5)]).unwrap();
        assert!(rate_trend_gw_lower(&b, &[2, 3]).is_err());

        // Degenerate horizon zero with k* = 2: P(Z_0 = 2) = 0, flagged.
        let rows0 = rate_trend_gw_lower(&law, &[0]).unwrap();
        assert!(rows0[0].empirical_rate.is_none());
    }

    #[test]
    fn ind_upper_lattice_trend_shrinks_toward_dual_rate() {
        let law = offspring_from_pairs(&[(1, 0.5), (2, 0.5)]).unwrap();
        let lattice = LatticeStepLaw::new(1.0, &[(-1, 0.25), (0, 0.5), (1, 0.25)]).unwrap();
        let rows =
            rate_trend_ind_upper_lattice(&law, &lattice, 0.9, &[10, 20, 30, 40], false).unwrap();
        // Frozen from the exact pre-computation: gaps 15.9%, 10.5%, 8.1%,
        // 6.7% of the analytic value, strictly decreasing.
        let analytic = rows[0].analytic_rate;
        assert!((analytic - 0.583799).abs() < 1e-4, "analytic {analytic}");
        let gaps: Vec<f64> = rows.iter().map(|r| r.gap().unwrap()).collect();
        for w in gaps.windows(2) {
            assert!(w[1] < w[0], "gap sequence not decreasing: {gaps:?}");
        }
        assert!(gaps[3] < 0.10 * analytic);
        let expected = [0.092654, 0.061504, 0.047274, 0.038867];
        for (g, e) in gaps.iter().zip(expected) {
            assert!((g - e).abs() < 1e-4, "gap {g} vs frozen {e}");
        }
    }

    #[test]
    fn single_walk_trend_gap_decreases() {
        // Grid chosen from an exact pre-computation: below n=8 the Gaussian
        // bulk still dominates the event and the gap is not yet shrinking;
        // from n=8 on it decreases (true gaps 0.197, 0.168, 0.128).
        let step = StepLaw::centered(0.5, 1.0, 1.0).unwrap();
        let rows =
            rate_trend_single_walk(&step, 0.3, &[8, 16, 24], 1_200_000, 2025, 0.99).unwrap();
        let gaps: Vec<f64> = rows.iter().map(|r| r.gap().unwrap()).collect();
        for w in gaps.windows(2) {
            assert!(w[1] < w[0], "gaps not decreasing: {gaps:?}");
        }
    }

    #[test]
    fn csv_rows_have_nan_for_undefined() {
        let est = tail_estimate(0, 100, 0.99, 5).unwrap();
        let row = estimate_csv_row(5, 1.0, "BRW_UPPER", Some(&est), Some(0.5));
        assert!(row.contains(",nan,"));
        assert!(row.starts_with("5,1,BRW_UPPER,0,"));
        let empty = estimate_csv_row(3, 0.5, "X", None, None);
        assert_eq!(empty.trim().split(',').filter(|s| *s == "nan").count(), 5);
    }
}
