//! Seeded Monte Carlo engines: the branching random walk, the
//! independent-walks reference model, survival conditioning and the
//! normalized-population martingale.
//!
//! Replicas are embarrassingly parallel. Each replica owns a counter-based
//! random stream keyed by `(seed, purpose, replica index)`, aggregation runs
//! over the ordered replica list, and every estimate is therefore invariant
//! to the degree of parallelism.

use rand::Rng;
use rand_distr::Distribution as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gw::OffspringLaw;
use crate::rng::{replica_rng, StreamPurpose};
use crate::stats::dkw_radius;
use crate::step::{LatticeStepLaw, StepLaw};

/// Displacement distribution driving the walk: the continuous
/// stretched-exponential law or its lattice surrogate.
#[derive(Debug, Clone)]
pub enum Displacement {
    Continuous(StepLaw),
    Lattice(LatticeStepLaw),
}

impl Displacement {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Displacement::Continuous(law) => law.sample(rng),
            Displacement::Lattice(law) => law.sample(rng),
        }
    }

    /// Scale exponent for threshold events: continuous laws live on the
    /// `n^(1/r)` scale, bounded lattice laws on the linear scale.
    pub fn horizon_scale(&self, n: u32) -> f64 {
        match self {
            Displacement::Continuous(law) => f64::from(n).powf(1.0 / law.r()),
            Displacement::Lattice(_) => f64::from(n),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimModel {
    pub offspring: OffspringLaw,
    pub step: Displacement,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: SimModel,
    pub horizon_n: u32,
    pub population_cap: u64,
    pub seed: u64,
    pub condition_on_survival: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_cap < 1 {
            return Err(Error::Domain("population_cap must be >= 1".into()));
        }
        Ok(())
    }
}

/// Which engine produced a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Branching random walk: maximum over the genealogical tree.
    Brw,
    /// Population counts first, then independent walks, one per survivor.
    IndMax,
}

/// Outcome of a single replica.
#[derive(Debug, Clone)]
pub struct BrwRunResult {
    pub survived_to_n: bool,
    /// Maximum position at the horizon; `-inf` when the population died out.
    pub max_position: f64,
    /// `Z_0..Z_n` (shorter if the run was truncated by the population cap).
    pub population_path: Vec<u64>,
    /// The population exceeded the cap; the run must be excluded from
    /// estimates, never silently capped.
    pub truncated: bool,
}

impl BrwRunResult {
    fn extinct(path: Vec<u64>) -> Self {
        BrwRunResult {
            survived_to_n: false,
            max_position: f64::NEG_INFINITY,
            population_path: path,
            truncated: false,
        }
    }

    fn truncated(path: Vec<u64>) -> Self {
        BrwRunResult {
            survived_to_n: false,
            max_position: f64::NEG_INFINITY,
            population_path: path,
            truncated: true,
        }
    }
}

/// Inverse-CDF sampler over the offspring pmf.
struct OffspringSampler {
    cumulative: Vec<(u32, f64)>,
}

impl OffspringSampler {
    fn new(law: &OffspringLaw) -> Self {
        let mut acc = 0.0;
        let cumulative = law
            .pmf()
            .iter()
            .map(|&(k, p)| {
                acc += p;
                (k, acc)
            })
            .collect();
        OffspringSampler { cumulative }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        for &(k, c) in &self.cumulative {
            if u < c {
                return k;
            }
        }
        self.cumulative.last().expect("non-empty pmf").0
    }
}

/// Total offspring of `z` particles. Small populations draw per particle;
/// large ones use the conditional-binomial multinomial decomposition, which
/// has the same distribution at O(support) cost.
fn sample_generation_total<R: Rng + ?Sized>(
    rng: &mut R,
    law: &OffspringLaw,
    sampler: &OffspringSampler,
    z: u64,
) -> u64 {
    if z <= 32 {
        return (0..z).map(|_| u64::from(sampler.sample(rng))).sum();
    }
    let mut total = 0u64;
    let mut remaining = z;
    let mut rest_mass = 1.0f64;
    let entries = law.pmf();
    for (i, &(k, p)) in entries.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == entries.len() {
            total += u64::from(k) * remaining;
            break;
        }
        let cond = (p / rest_mass).clamp(0.0, 1.0);
        let count = rand_distr::Binomial::new(remaining, cond)
            .expect("probability in [0, 1]")
            .sample(rng);
        total += u64::from(k) * count;
        remaining -= count;
        rest_mass -= p;
    }
    total
}

/// One branching-random-walk replica, generation by generation; only the
/// current front of positions is kept.
pub fn simulate_brw(cfg: &SimConfig, replica_index: u64) -> BrwRunResult {
    let mut rng = replica_rng(cfg.seed, StreamPurpose::BrwRun, replica_index);
    let sampler = OffspringSampler::new(&cfg.model.offspring);
    let n = cfg.horizon_n as usize;

    let mut positions: Vec<f64> = vec![0.0];
    let mut path: Vec<u64> = Vec::with_capacity(n + 1);
    path.push(1);

    for gen in 0..n {
        let mut next: Vec<f64> = Vec::with_capacity(positions.len() * 2);
        for &pos in &positions {
            let children = sampler.sample(&mut rng);
            for _ in 0..children {
                next.push(pos + cfg.model.step.sample(&mut rng));
            }
        }
        if next.len() as u64 > cfg.population_cap {
            path.push(next.len() as u64);
            return BrwRunResult::truncated(path);
        }
        path.push(next.len() as u64);
        positions = next;
        if positions.is_empty() {
            path.extend(std::iter::repeat_n(0, n - gen - 1));
            return BrwRunResult::extinct(path);
        }
    }

    let max_position = positions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    BrwRunResult {
        survived_to_n: true,
        max_position,
        population_path: path,
        truncated: false,
    }
}

/// One reference-model replica: the population path is drawn first (counts
/// only), then each survivor gets an independent fresh walk.
pub fn simulate_ind_max(cfg: &SimConfig, replica_index: u64) -> BrwRunResult {
    let mut rng = replica_rng(cfg.seed, StreamPurpose::IndRun, replica_index);
    let sampler = OffspringSampler::new(&cfg.model.offspring);
    let n = cfg.horizon_n as usize;

    let mut z: u64 = 1;
    let mut path: Vec<u64> = Vec::with_capacity(n + 1);
    path.push(1);
    for gen in 0..n {
        z = sample_generation_total(&mut rng, &cfg.model.offspring, &sampler, z);
        path.push(z);
        if z > cfg.population_cap {
            return BrwRunResult::truncated(path);
        }
        if z == 0 {
            path.extend(std::iter::repeat_n(0, n - gen - 1));
            return BrwRunResult::extinct(path);
        }
    }

    let mut max_position = f64::NEG_INFINITY;
    for _ in 0..z {
        let mut s = 0.0;
        for _ in 0..n {
            s += cfg.model.step.sample(&mut rng);
        }
        max_position = max_position.max(s);
    }
    BrwRunResult {
        survived_to_n: true,
        max_position,
        population_path: path,
        truncated: false,
    }
}

pub fn simulate(cfg: &SimConfig, engine: Engine, replica_index: u64) -> BrwRunResult {
    match engine {
        Engine::Brw => simulate_brw(cfg, replica_index),
        Engine::IndMax => simulate_ind_max(cfg, replica_index),
    }
}

/// Survivors collected by rejection over consecutive replica indices.
#[derive(Debug, Clone)]
pub struct ConditionedRuns {
    pub runs: Vec<BrwRunResult>,
    /// Replica indices consumed up to and including the final accepted run.
    pub attempted: u64,
    pub truncated_runs: u64,
    /// Fraction of attempts that survived to the horizon; estimates
    /// `P(Z_n > 0)`.
    pub acceptance_rate: f64,
}

const ABORT_PROBE_ATTEMPTS: u64 = 1_000_000;

/// Rejection loop conditioning on survival to the horizon: extinct runs are
/// discarded and fresh replica indices drawn until `replicas` survivors are
/// collected. Aborts when no run survives within the probe batch.
pub fn run_conditioned(cfg: &SimConfig, engine: Engine, replicas: usize) -> Result<ConditionedRuns> {
    run_conditioned_with_probe(cfg, engine, replicas, ABORT_PROBE_ATTEMPTS)
}

pub(crate) fn run_conditioned_with_probe(
    cfg: &SimConfig,
    engine: Engine,
    replicas: usize,
    probe_attempts: u64,
) -> Result<ConditionedRuns> {
    cfg.validate()?;
    if !cfg.condition_on_survival {
        return Err(Error::Domain(
            "run_conditioned requires condition_on_survival".into(),
        ));
    }
    if replicas == 0 {
        return Err(Error::Domain("need at least one replica".into()));
    }
    let mut runs: Vec<BrwRunResult> = Vec::with_capacity(replicas);
    let mut attempted: u64 = 0;
    let mut truncated: u64 = 0;
    // The batch never outruns the probe, so an abort can fire before work
    // beyond the probe budget is spent.
    let batch = (replicas as u64).clamp(1024, 65_536).min(probe_attempts).max(1);
    let mut next_index: u64 = 0;

    while runs.len() < replicas {
        let results: Vec<BrwRunResult> = (next_index..next_index + batch)
            .into_par_iter()
            .map(|i| simulate(cfg, engine, i))
            .collect();
        next_index += batch;
        for r in results {
            attempted += 1;
            if r.truncated {
                truncated += 1;
                continue;
            }
            if r.survived_to_n {
                runs.push(r);
                if runs.len() == replicas {
                    break;
                }
            }
        }
        if runs.is_empty() && truncated == attempted {
            return Err(Error::ResourceBound(format!(
                "all {attempted} runs exceeded the population cap"
            )));
        }
        if runs.is_empty() && attempted >= probe_attempts {
            return Err(Error::SimulationAbort(format!(
                "no surviving run in {attempted} attempts; acceptance rate below 1e-6"
            )));
        }
    }
    let acceptance_rate = replicas as f64 / attempted as f64;
    Ok(ConditionedRuns {
        runs,
        attempted,
        truncated_runs: truncated,
        acceptance_rate,
    })
}

#[derive(Debug, Clone)]
pub struct WnSamples {
    /// `W_n = Z_n / m^n` per non-truncated replica, in replica order.
    pub samples: Vec<f64>,
    pub truncated_runs: u64,
}

/// Normalized-population martingale samples, unconditioned.
pub fn wn_samples(cfg: &SimConfig, replicas: usize) -> Result<WnSamples> {
    cfg.validate()?;
    let mn = cfg.model.offspring.mean().powi(cfg.horizon_n as i32);
    let paths: Vec<Option<u64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(cfg.seed, StreamPurpose::PopulationOnly, i);
            let sampler = OffspringSampler::new(&cfg.model.offspring);
            let mut z = 1u64;
            for _ in 0..cfg.horizon_n {
                z = sample_generation_total(&mut rng, &cfg.model.offspring, &sampler, z);
                if z > cfg.population_cap {
                    return None;
                }
                if z == 0 {
                    return Some(0);
                }
            }
            Some(z)
        })
        .collect();
    let mut samples = Vec::with_capacity(replicas);
    let mut truncated = 0u64;
    for p in paths {
        match p {
            Some(z) => samples.push(z as f64 / mn),
            None => truncated += 1,
        }
    }
    Ok(WnSamples {
        samples,
        truncated_runs: truncated,
    })
}

/// Paired empirical CDFs of the two maxima over a common grid, with 99% DKW
/// radii and the indices where the tree-maximum CDF drops below the
/// independent-walks CDF by more than the joint band.
#[derive(Debug, Clone)]
pub struct DominationExperiment {
    pub x_grid: Vec<f64>,
    pub brw_cdf: Vec<f64>,
    pub ind_cdf: Vec<f64>,
    pub brw_radius: f64,
    pub ind_radius: f64,
    pub violations: Vec<usize>,
    pub brw_truncated: u64,
    pub ind_truncated: u64,
}

const DOMINATION_BAND_DELTA: f64 = 0.01;

pub fn domination_experiment(
    cfg: &SimConfig,
    replicas: usize,
    x_grid: &[f64],
) -> Result<DominationExperiment> {
    cfg.validate()?;
    if replicas == 0 {
        return Err(Error::Domain("need at least one replica".into()));
    }
    let (brw_max, brw_truncated) = collect_maxima(cfg, Engine::Brw, replicas)?;
    let (ind_max, ind_truncated) = collect_maxima(cfg, Engine::IndMax, replicas)?;

    let brw_cdf = empirical_on_grid(&brw_max, x_grid);
    let ind_cdf = empirical_on_grid(&ind_max, x_grid);
    let brw_radius = dkw_radius(brw_max.len(), DOMINATION_BAND_DELTA);
    let ind_radius = dkw_radius(ind_max.len(), DOMINATION_BAND_DELTA);
    let joint = brw_radius + ind_radius;
    let violations = brw_cdf
        .iter()
        .zip(&ind_cdf)
        .enumerate()
        .filter_map(|(i, (&b, &t))| if b < t - joint { Some(i) } else { None })
        .collect();
    Ok(DominationExperiment {
        x_grid: x_grid.to_vec(),
        brw_cdf,
        ind_cdf,
        brw_radius,
        ind_radius,
        violations,
        brw_truncated,
        ind_truncated,
    })
}

/// Maxima per replica (conditioned when the config asks for it), plus the
/// truncated-run count.
fn collect_maxima(cfg: &SimConfig, engine: Engine, replicas: usize) -> Result<(Vec<f64>, u64)> {
    if cfg.condition_on_survival {
        let cond = run_conditioned(cfg, engine, replicas)?;
        let maxima = cond.runs.iter().map(|r| r.max_position).collect();
        Ok((maxima, cond.truncated_runs))
    } else {
        let results: Vec<BrwRunResult> = (0..replicas as u64)
            .into_par_iter()
            .map(|i| simulate(cfg, engine, i))
            .collect();
        let mut truncated = 0;
        let mut maxima = Vec::with_capacity(replicas);
        for r in results {
            if r.truncated {
                truncated += 1;
            } else {
                maxima.push(r.max_position);
            }
        }
        Ok((maxima, truncated))
    }
}

fn empirical_on_grid(samples: &[f64], grid: &[f64]) -> Vec<f64> {
    let n = samples.len() as f64;
    grid.iter()
        .map(|&x| samples.iter().filter(|&&v| v <= x).count() as f64 / n)
        .collect()
}

/// Per-replica CSV lines `replica,survived,Mn,Zn` (the raw-output interface).
pub fn replica_csv(results: &[BrwRunResult]) -> String {
    let mut out = String::from("replica,survived,Mn,Zn\n");
    for (i, r) in results.iter().enumerate() {
        let mn = if r.max_position.is_finite() {
            format!("{}", r.max_position)
        } else {
            "-inf".to_string()
        };
        let zn = r.population_path.last().copied().unwrap_or(0);
        out.push_str(&format!("{i},{},{mn},{zn}\n", r.survived_to_n));
    }
    out
}
