use std::path::Path;

use brwlab::simulate::{self, replica_csv, BrwRunResult};
use rayon::prelude::*;

use super::{config_echo, write_text, Manifest};
use crate::config::{parse_engine, sim_config_from, CliFailure, ConfigError};
use crate::Cli;

pub fn run(cli: &Cli, out_dir: &Path) -> Result<(), CliFailure> {
    let file = cli.load_config()?;
    let section = file
        .simulate
        .as_ref()
        .ok_or_else(|| ConfigError("missing `simulate` section".into()))?;
    let engine = parse_engine(&section.engine)?;
    let seed = cli.effective_seed(&file);
    let cfg = sim_config_from(
        &file.model,
        section.horizon_n,
        section.population_cap,
        seed,
        section.condition_on_survival,
    )?;

    let mut manifest = Manifest::new("simulate", seed, config_echo(cli.config.as_ref()));
    let runs: Vec<BrwRunResult>;
    if section.condition_on_survival {
        let cond = simulate::run_conditioned(&cfg, engine, section.replicas)?;
        manifest.acceptance_rate = Some(cond.acceptance_rate);
        manifest.truncated_runs = Some(cond.truncated_runs);
        println!(
            "collected {} surviving runs in {} attempts (acceptance {:.4}, truncated {})",
            cond.runs.len(),
            cond.attempted,
            cond.acceptance_rate,
            cond.truncated_runs
        );
        runs = cond.runs;
    } else {
        let all: Vec<BrwRunResult> = (0..section.replicas as u64)
            .into_par_iter()
            .map(|i| simulate::simulate(&cfg, engine, i))
            .collect();
        let truncated = all.iter().filter(|r| r.truncated).count() as u64;
        manifest.truncated_runs = Some(truncated);
        println!(
            "ran {} replicas (truncated {truncated})",
            section.replicas
        );
        runs = all;
    }

    if section.emit_replicas {
        write_text(out_dir, "replicas.csv", &replica_csv(&runs))?;
        manifest.outputs.push("replicas.csv".into());
    }

    if let Some(grid_cfg) = &section.domination_grid {
        let grid = grid_cfg.build()?;
        let exp = simulate::domination_experiment(&cfg, section.replicas, &grid)?;
        let mut csv = String::from("x,brw_cdf,ind_cdf,violation\n");
        for (i, &x) in exp.x_grid.iter().enumerate() {
            csv.push_str(&format!(
                "{x},{},{},{}\n",
                exp.brw_cdf[i],
                exp.ind_cdf[i],
                exp.violations.contains(&i)
            ));
        }
        write_text(out_dir, "domination.csv", &csv)?;
        manifest.outputs.push("domination.csv".into());
        println!(
            "domination experiment: {} grid points, {} flagged beyond the joint band",
            exp.x_grid.len(),
            exp.violations.len()
        );
    }
    manifest.write(out_dir)?;
    Ok(())
}
