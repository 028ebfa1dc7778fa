//! The verification suite: one runnable check per acceptance criterion,
//! shared by the `verify` subcommand and the integration tests. Every
//! tolerance is pinned here as a named constant.

use std::time::{Duration, Instant};

use rayon::ThreadPoolBuilder;

use crate::error::Result;
use crate::estimate::{
    rate_trend_gw_lower, rate_trend_ind_upper_lattice, sumasmax_ratio, trend_csv_row,
    ESTIMATE_CSV_HEADER,
};
use crate::gw::{offspring_from_pairs, OffspringLaw};
use crate::oracle;
use crate::rates::{rate_curve, RateKind, RateModel, RATE_CSV_HEADER};
use crate::simulate::{
    replica_csv, run_conditioned, wn_samples, Displacement, Engine, SimConfig, SimModel,
};
use crate::stats::{clopper_pearson, dkw_radius, EmpiricalCdf};
use crate::step::{LatticeStepLaw, StepLaw};

pub const DEFAULT_VERIFY_SEED: u64 = 412_031_709;

// Criterion 1.
const EQUIV_POINTS: usize = 200;
const EQUIV_REL_TOL: f64 = 1e-6;
const EQUIV_MINIMIZER_TOL: f64 = 1e-9;
// Criterion 2.
const BOUNDARY_EPS: f64 = 1e-6;
const BOUNDARY_TOL: f64 = 1e-5;
const UPPER_POINTS: usize = 50;
const LOWER_POINTS: usize = 200;
// Criterion 3.
const DOMINATION_HORIZONS: std::ops::RangeInclusive<u32> = 0..=6;
const DOMINATION_SLACK: f64 = 1e-12;
// Criterion 4.
const MC_REPLICAS: usize = 100_000;
const MC_HORIZON: u32 = 4;
const DKW_DELTA: f64 = 0.01;
// Criterion 5.
const KS_HORIZON: u32 = 10;
const KS_REPLICAS: usize = 100_000;
const KS_MEAN_SE_FACTOR: f64 = 4.0;
const EXTINCTION_HORIZON: u32 = 30;
const EXTINCTION_CI_LEVEL: f64 = 0.99;
// Criterion 6.
const GW_RATIO_HORIZONS: std::ops::RangeInclusive<u32> = 5..=13;
const GW_RATIO_REL_TOL: f64 = 0.10;
// Criterion 7.
const TREND_HORIZONS: [u32; 4] = [10, 20, 30, 40];
const TREND_SPEED: f64 = 0.9;
const TREND_FINAL_REL_GAP: f64 = 0.10;
// Criterion 8.
const JUMP_HORIZON: u32 = 10;
const JUMP_THRESHOLD: f64 = 60.0;
const JUMP_REPLICAS: u64 = 10_000_000;
const JUMP_NOMINAL_BAND: (f64, f64) = (0.7, 1.3);
const JUMP_WARNING_BAND: (f64, f64) = (0.5, 2.0);
const JUMP_CI_LEVEL: f64 = 0.99;
// Criterion 9.
const DETERMINISM_WORKERS: [usize; 3] = [1, 2, 4];

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub details: String,
    pub elapsed: Duration,
    pub time_limit: Duration,
}

impl CriterionResult {
    /// Time limits are graded in optimized builds only; debug builds report
    /// the elapsed time without failing on it.
    pub fn within_time(&self) -> bool {
        if cfg!(debug_assertions) {
            true
        } else {
            self.elapsed <= self.time_limit
        }
    }

    pub fn ok(&self) -> bool {
        self.passed && self.within_time()
    }

    pub fn status_line(&self) -> String {
        let mark = if self.ok() { "PASS" } else { "FAIL" };
        let warn = if self.warnings.is_empty() {
            String::new()
        } else {
            format!(" [warn: {}]", self.warnings.join("; "))
        };
        format!(
            "{mark} [{}] {} ({:.2}s / limit {:.0}s){warn} {}",
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.time_limit.as_secs_f64(),
            self.details
        )
    }
}

fn finish(
    id: u32,
    name: &'static str,
    limit_s: u64,
    started: Instant,
    passed: bool,
    warnings: Vec<String>,
    details: String,
) -> CriterionResult {
    CriterionResult {
        id,
        name,
        passed,
        warnings,
        details,
        elapsed: started.elapsed(),
        time_limit: Duration::from_secs(limit_s),
    }
}

/// The three Schröder parameter sets of the verification matrix. All sit on
/// the line `rho = lambda_minus alpha^r`, where the closed lower-deviation
/// form provably coincides with the variational infimum on both branches.
pub fn balanced_schroeder_matrix() -> Vec<RateModel> {
    let rho_a = 2f64.ln();
    let m_a = 1.5f64;
    let rho_b = -(0.6f64.ln());
    let m_b = 3.0f64;
    let rho_c = -((3.0f64 / 8.0).ln());
    let m_c = 2.25f64;
    vec![
        RateModel::new(0.5, 1.0, rho_a / m_a.ln(), m_a, rho_a, 2).expect("valid set A"),
        RateModel::new(0.7, 2.0, rho_b * 2.0 / m_b.ln(), m_b, rho_b, 1).expect("valid set B"),
        RateModel::new(0.3, 0.5, rho_c * 0.5 / m_c.ln(), m_c, rho_c, 1).expect("valid set C"),
    ]
}

fn quarter_law() -> OffspringLaw {
    offspring_from_pairs(&[(0, 0.25), (2, 0.75)]).expect("valid law")
}

fn boettcher_law() -> OffspringLaw {
    offspring_from_pairs(&[(2, 0.5), (3, 0.5)]).expect("valid law")
}

fn pm_one() -> LatticeStepLaw {
    LatticeStepLaw::new(1.0, &[(-1, 0.5), (1, 0.5)]).expect("valid lattice")
}

fn lattice_sim_config(offspring: OffspringLaw, n: u32, seed: u64) -> SimConfig {
    SimConfig {
        model: SimModel {
            offspring,
            step: Displacement::Lattice(pm_one()),
        },
        horizon_n: n,
        population_cap: 1 << 24,
        seed,
        condition_on_survival: true,
    }
}

/// Criterion 1: the variational and closed lower-deviation forms agree on
/// the verification matrix.
pub fn criterion_variational_equivalence() -> CriterionResult {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut passed = true;
    for model in balanced_schroeder_matrix() {
        let alpha = model.alpha();
        for i in 0..EQUIV_POINTS {
            let x = -3.0 * alpha
                + (alpha - 1e-3 + 3.0 * alpha) * i as f64 / (EQUIV_POINTS - 1) as f64;
            let closed = match model.h_closed(x) {
                Ok(v) => v,
                Err(_) => {
                    passed = false;
                    continue;
                }
            };
            let var = match model.h_variational(x, EQUIV_MINIMIZER_TOL) {
                Ok(v) => v.value,
                Err(_) => {
                    passed = false;
                    continue;
                }
            };
            let rel = (var - closed).abs() / (1.0 + closed.abs());
            worst = worst.max(rel);
            if rel > EQUIV_REL_TOL {
                passed = false;
            }
        }
    }
    finish(
        1,
        "variational form equals closed lower-deviation rate",
        2,
        start,
        passed,
        vec![],
        format!("max rel diff {worst:.2e} over 3 sets x {EQUIV_POINTS} points"),
    )
}

/// Criterion 2: boundary behavior at the speed, exact agreement of the two
/// rate functions above it, ordering below it.
pub fn criterion_rate_structure() -> CriterionResult {
    let start = Instant::now();
    let model = balanced_schroeder_matrix()[0];
    let alpha = model.alpha();
    let mut passed = true;
    let mut details = Vec::new();

    let below = model.rate_ibrw(alpha - BOUNDARY_EPS).abs();
    let above = model.rate_ibrw(alpha + BOUNDARY_EPS).abs();
    if below > BOUNDARY_TOL || above > BOUNDARY_TOL {
        passed = false;
        details.push(format!("boundary values {below:.2e}/{above:.2e}"));
    }

    for i in 0..UPPER_POINTS {
        let x = alpha + i as f64 * 0.1;
        if model.rate_iind(x) != model.rate_ibrw(x) {
            passed = false;
            details.push(format!("upper branch mismatch at x={x}"));
            break;
        }
    }
    for i in 0..LOWER_POINTS {
        let x = -3.0 * alpha + (3.0 * alpha - 1e-9) * i as f64 / (LOWER_POINTS - 1) as f64;
        if model.rate_iind(x) < model.rate_ibrw(x) - 1e-12 {
            passed = false;
            details.push(format!("ordering violated at x={x}"));
            break;
        }
    }
    finish(
        2,
        "rate-function boundary, equality above and ordering below the speed",
        1,
        start,
        passed,
        vec![],
        if details.is_empty() {
            format!("boundary |rate| {below:.1e}/{above:.1e}, {UPPER_POINTS}+{LOWER_POINTS} points")
        } else {
            details.join("; ")
        },
    )
}

/// Criterion 3: exact stochastic domination of the tree maximum on small
/// horizons for both offspring regimes.
pub fn criterion_exact_domination() -> CriterionResult {
    let start = Instant::now();
    let mut passed = true;
    let mut worst: f64 = f64::NEG_INFINITY;
    for law in [quarter_law(), boettcher_law()] {
        for n in DOMINATION_HORIZONS {
            match oracle::domination_check_exact(&pm_one(), &law, n) {
                Ok(rep) => {
                    worst = worst.max(rep.max_violation);
                    if !rep.holds || rep.max_violation > DOMINATION_SLACK {
                        passed = false;
                    }
                }
                Err(_) => passed = false,
            }
        }
    }
    finish(
        3,
        "exact domination of tree maximum by independent-walks maximum",
        5,
        start,
        passed,
        vec![],
        format!("max violation {worst:.2e} over both laws, n in 0..=6"),
    )
}

/// Criterion 4: conditioned Monte Carlo maxima against the exact conditional
/// oracle CDFs, within the 99% DKW band.
pub fn criterion_mc_vs_oracle(seed: u64) -> CriterionResult {
    let start = Instant::now();
    let law = quarter_law();
    let cfg = lattice_sim_config(law.clone(), MC_HORIZON, seed);
    let mut passed = true;
    let mut details = Vec::new();

    for (engine, tag) in [(Engine::Brw, "tree"), (Engine::IndMax, "independent")] {
        let exact = match engine {
            Engine::Brw => oracle::brw_max_cdf_exact(&pm_one(), &law, MC_HORIZON),
            Engine::IndMax => oracle::ind_max_cdf_exact(&pm_one(), &law, MC_HORIZON),
        }
        .and_then(|d| oracle::conditional_cdf(&d));
        let exact = match exact {
            Ok(d) => d,
            Err(e) => {
                passed = false;
                details.push(format!("{tag}: oracle failed: {e}"));
                continue;
            }
        };
        match run_conditioned(&cfg, engine, MC_REPLICAS) {
            Ok(cond) => {
                if cond.truncated_runs > 0 {
                    passed = false;
                    details.push(format!("{tag}: {} truncated runs", cond.truncated_runs));
                    continue;
                }
                let ecdf = EmpiricalCdf::new(
                    cond.runs.iter().map(|r| r.max_position).collect(),
                );
                let points: Vec<f64> =
                    (0..exact.len()).map(|i| exact.value_at(i)).collect();
                let sup = ecdf.sup_distance_at(&points, |x| exact.cdf_at(x));
                let band = dkw_radius(MC_REPLICAS, DKW_DELTA);
                if sup > band {
                    passed = false;
                }
                details.push(format!("{tag} sup {sup:.4} vs band {band:.4}"));
            }
            Err(e) => {
                passed = false;
                details.push(format!("{tag}: simulation failed: {e}"));
            }
        }
    }
    finish(
        4,
        "conditioned Monte Carlo CDFs inside DKW band of exact oracle",
        30,
        start,
        passed,
        vec![],
        details.join("; "),
    )
}

/// Criterion 5: the normalized-population martingale has mean one, and the
/// long-horizon extinction frequency brackets the fixed-point probability.
pub fn criterion_population_martingale(seed: u64) -> CriterionResult {
    let start = Instant::now();
    let law = quarter_law();
    let mut passed = true;
    let mut details = Vec::new();

    let cfg = lattice_sim_config(law.clone(), KS_HORIZON, seed);
    match wn_samples(&cfg, KS_REPLICAS) {
        Ok(w) => {
            if w.truncated_runs > 0 {
                passed = false;
                details.push(format!("{} truncated runs", w.truncated_runs));
            } else {
                let n = w.samples.len() as f64;
                let mean = w.samples.iter().sum::<f64>() / n;
                let var = w
                    .samples
                    .iter()
                    .map(|x| (x - mean) * (x - mean))
                    .sum::<f64>()
                    / (n - 1.0);
                let se = (var / n).sqrt();
                if (mean - 1.0).abs() > KS_MEAN_SE_FACTOR * se {
                    passed = false;
                }
                details.push(format!(
                    "martingale mean {mean:.5} (se {se:.5})"
                ));
            }
        }
        Err(e) => {
            passed = false;
            details.push(format!("martingale sampling failed: {e}"));
        }
    }

    let cfg30 = lattice_sim_config(law.clone(), EXTINCTION_HORIZON, seed ^ 0x5a5a);
    match wn_samples(&cfg30, KS_REPLICAS) {
        Ok(w) => {
            let extinct = w.samples.iter().filter(|&&x| x == 0.0).count() as u64;
            match clopper_pearson(extinct, w.samples.len() as u64, EXTINCTION_CI_LEVEL) {
                Ok((lo, hi)) => {
                    let q = law.extinction_prob();
                    if !(lo <= q && q <= hi) {
                        passed = false;
                    }
                    details.push(format!(
                        "extinction CI ({lo:.4}, {hi:.4}) vs q {q:.4}"
                    ));
                }
                Err(e) => {
                    passed = false;
                    details.push(format!("interval failed: {e}"));
                }
            }
        }
        Err(e) => {
            passed = false;
            details.push(format!("extinction sampling failed: {e}"));
        }
    }
    finish(
        5,
        "population martingale mean and extinction frequency",
        60,
        start,
        passed,
        vec![],
        details.join("; "),
    )
}

/// Criterion 6: the exact per-generation decay ratio of the minimal
/// population event approaches the lower-deviation factor.
pub fn criterion_gw_lower_deviation() -> CriterionResult {
    let start = Instant::now();
    let law = quarter_law();
    let n_list: Vec<u32> = GW_RATIO_HORIZONS.collect();
    let target = (-law.rho()).exp();
    let mut passed = true;
    let mut last_ratios = Vec::new();
    match rate_trend_gw_lower(&law, &n_list) {
        Ok(rows) => {
            for row in rows.iter().rev().take(3) {
                match row.empirical_rate {
                    Some(rate) => {
                        let ratio = (-rate).exp();
                        if (ratio - target).abs() > GW_RATIO_REL_TOL * target {
                            passed = false;
                        }
                        last_ratios.push(format!("n={}: {ratio:.6}", row.n));
                    }
                    None => passed = false,
                }
            }
        }
        Err(_) => passed = false,
    }
    finish(
        6,
        "exact minimal-population decay ratio approaches e^-rho",
        1,
        start,
        passed,
        vec![],
        format!("target {target}: {}", last_ratios.join(", ")),
    )
}

/// Criterion 7: the semi-analytic upper tail of the independent-walks
/// maximum approaches the convex-dual rate, with a shrinking gap.
pub fn criterion_ind_upper_trend() -> CriterionResult {
    let start = Instant::now();
    let law = offspring_from_pairs(&[(1, 0.5), (2, 0.5)]).expect("valid law");
    let lattice =
        LatticeStepLaw::new(1.0, &[(-1, 0.25), (0, 0.5), (1, 0.25)]).expect("valid lattice");
    let mut passed = true;
    let mut detail = String::new();
    match rate_trend_ind_upper_lattice(&law, &lattice, TREND_SPEED, &TREND_HORIZONS, false) {
        Ok(rows) => {
            let analytic = rows[0].analytic_rate;
            let gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap()).collect();
            if gaps.len() != rows.len() {
                passed = false;
            }
            for w in gaps.windows(2) {
                if w[1] >= w[0] {
                    passed = false;
                }
            }
            if let Some(last) = gaps.last() {
                if *last > TREND_FINAL_REL_GAP * analytic {
                    passed = false;
                }
                detail = format!(
                    "analytic {analytic:.4}, gaps {:?}, final rel {:.3}",
                    gaps.iter().map(|g| (g * 1e4).round() / 1e4).collect::<Vec<_>>(),
                    last / analytic
                );
            } else {
                passed = false;
            }
        }
        Err(e) => {
            passed = false;
            detail = format!("trend failed: {e}");
        }
    }
    finish(
        7,
        "independent-walks upper tail trend toward the dual rate",
        10,
        start,
        passed,
        vec![],
        detail,
    )
}

/// Criterion 8: single-big-jump diagnostic. The graded instance uses the
/// lower-tail weight 2; the symmetric instance is reported alongside and can
/// only warn, never fail.
pub fn criterion_single_big_jump(seed: u64) -> CriterionResult {
    let start = Instant::now();
    let mut passed = true;
    let mut warnings = Vec::new();
    let mut details = Vec::new();

    let graded = StepLaw::centered(0.5, 1.0, 2.0).expect("valid step law");
    match sumasmax_ratio(&graded, JUMP_HORIZON, JUMP_THRESHOLD, JUMP_REPLICAS, seed, JUMP_CI_LEVEL)
    {
        Ok(rep) => {
            let (lo, hi) = rep.ratio_ci;
            let overlaps = lo <= JUMP_NOMINAL_BAND.1 && hi >= JUMP_NOMINAL_BAND.0;
            if !overlaps {
                passed = false;
            }
            if rep.regime_warning {
                warnings.push(format!(
                    "threshold {JUMP_THRESHOLD} below the asymptotic-regime bound, diagnostic only"
                ));
            }
            details.push(format!(
                "graded ratio {:.4} CI ({lo:.4}, {hi:.4})",
                rep.ratio.unwrap_or(f64::NAN)
            ));
        }
        Err(e) => {
            passed = false;
            details.push(format!("graded instance failed: {e}"));
        }
    }

    let symmetric = StepLaw::centered(0.5, 1.0, 1.0).expect("valid step law");
    match sumasmax_ratio(
        &symmetric,
        JUMP_HORIZON,
        JUMP_THRESHOLD,
        JUMP_REPLICAS,
        seed ^ 0xa5a5,
        JUMP_CI_LEVEL,
    ) {
        Ok(rep) => {
            let r = rep.ratio.unwrap_or(f64::NAN);
            let (lo, hi) = rep.ratio_ci;
            let in_nominal = lo <= JUMP_NOMINAL_BAND.1 && hi >= JUMP_NOMINAL_BAND.0;
            if !in_nominal {
                if r >= JUMP_WARNING_BAND.0 && r <= JUMP_WARNING_BAND.1 {
                    warnings.push(format!(
                        "symmetric instance ratio {r:.3} outside nominal band (report-only)"
                    ));
                } else {
                    warnings.push(format!(
                        "symmetric instance ratio {r:.3} outside ({}, {}) (report-only)",
                        JUMP_WARNING_BAND.0, JUMP_WARNING_BAND.1
                    ));
                }
            }
            details.push(format!("symmetric ratio {r:.4}"));
        }
        Err(e) => {
            warnings.push(format!("symmetric instance failed: {e}"));
        }
    }
    finish(
        8,
        "single-big-jump ratio diagnostic",
        120,
        start,
        passed,
        warnings,
        details.join("; "),
    )
}

/// Bundle of CSV artifacts whose bytes must not depend on the worker count.
pub fn determinism_artifacts(seed: u64) -> Result<Vec<(String, String)>> {
    let model = balanced_schroeder_matrix()[0];
    let alpha = model.alpha();
    let grid: Vec<f64> = (0..120)
        .map(|i| -2.0 * alpha + (3.0 * alpha) * f64::from(i) / 119.0)
        .collect();
    let mut rates_csv = String::from(RATE_CSV_HEADER);
    for kind in [RateKind::I, RateKind::H, RateKind::Ibrw, RateKind::Iind] {
        let g: Vec<f64> = match kind {
            RateKind::H => grid.iter().copied().filter(|&x| x < alpha).collect(),
            _ => grid.clone(),
        };
        rates_csv.push_str(&rate_curve(&model, None, kind, &g, None)?.csv_rows());
    }

    let law = quarter_law();
    let cfg = lattice_sim_config(law.clone(), MC_HORIZON, seed);
    let cond = run_conditioned(&cfg, Engine::Brw, 2000)?;
    let replicas_csv = replica_csv(&cond.runs);

    let oracle_csv = oracle::brw_max_cdf_exact(&pm_one(), &law, MC_HORIZON)?.to_csv();

    let trend = rate_trend_gw_lower(&law, &[5, 6, 7, 8])?;
    let mut estimate_csv = String::from(ESTIMATE_CSV_HEADER);
    for row in trend {
        estimate_csv.push_str(&trend_csv_row(&row, f64::from(law.k_star()), "GW_LOWER"));
    }

    Ok(vec![
        ("rates.csv".into(), rates_csv),
        ("replicas.csv".into(), replicas_csv),
        ("oracle.csv".into(), oracle_csv),
        ("estimate.csv".into(), estimate_csv),
    ])
}

/// Criterion 9: the artifact bundle is byte-identical across worker counts.
pub fn criterion_determinism(seed: u64) -> CriterionResult {
    let start = Instant::now();
    let mut passed = true;
    let mut details = Vec::new();
    let mut reference: Option<Vec<(String, String)>> = None;
    for workers in DETERMINISM_WORKERS {
        let pool = match ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(p) => p,
            Err(e) => {
                passed = false;
                details.push(format!("pool({workers}) failed: {e}"));
                continue;
            }
        };
        match pool.install(|| determinism_artifacts(seed)) {
            Ok(bundle) => match &reference {
                None => reference = Some(bundle),
                Some(r) => {
                    for ((name_a, body_a), (name_b, body_b)) in r.iter().zip(&bundle) {
                        if name_a != name_b || body_a != body_b {
                            passed = false;
                            details.push(format!(
                                "{name_a} differs between 1 and {workers} workers"
                            ));
                        }
                    }
                }
            },
            Err(e) => {
                passed = false;
                details.push(format!("artifacts({workers}) failed: {e}"));
            }
        }
    }
    if details.is_empty() {
        details.push(format!(
            "4 artifacts byte-identical across workers {DETERMINISM_WORKERS:?}"
        ));
    }
    finish(
        9,
        "byte-identical artifacts across worker counts",
        120,
        start,
        passed,
        vec![],
        details.join("; "),
    )
}

#[derive(Debug, Clone)]
pub struct AcceptanceReport {
    pub criteria: Vec<CriterionResult>,
}

impl AcceptanceReport {
    pub fn all_ok(&self) -> bool {
        self.criteria.iter().all(|c| c.ok())
    }
}

/// Runs the whole suite in criterion order.
pub fn run_all(seed: u64) -> AcceptanceReport {
    AcceptanceReport {
        criteria: vec![
            criterion_variational_equivalence(),
            criterion_rate_structure(),
            criterion_exact_domination(),
            criterion_mc_vs_oracle(seed),
            criterion_population_martingale(seed),
            criterion_gw_lower_deviation(),
            criterion_ind_upper_trend(),
            criterion_single_big_jump(seed),
            criterion_determinism(seed),
        ],
    }
}

