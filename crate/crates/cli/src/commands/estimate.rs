use std::path::Path;

use brwlab::estimate::{
    estimate_csv_row, estimate_event, rate_trend_gw_lower, rate_trend_ind_upper_lattice,
    rate_trend_single_walk, trend_csv_row, EventSide, TailEvent, ESTIMATE_CSV_HEADER,
};
use brwlab::simulate::{Displacement, Engine};

use super::{config_echo, write_text, Manifest};
use crate::config::{parse_engine, sim_config_from, CliFailure, ConfigError};
use crate::Cli;

pub fn run(cli: &Cli, out_dir: &Path) -> Result<(), CliFailure> {
    let file = cli.load_config()?;
    let section = file
        .estimate
        .as_ref()
        .ok_or_else(|| ConfigError("missing `estimate` section".into()))?;
    if section.events.is_empty() && section.trend.is_none() {
        return Err(ConfigError(
            "estimate needs `events` and/or a `trend` section".into(),
        )
        .into());
    }
    let engine = parse_engine(&section.engine)?;
    let seed = cli.effective_seed(&file);
    let cfg = sim_config_from(
        &file.model,
        section.horizon_n,
        section.population_cap,
        seed,
        true,
    )?;

    // Analytic comparison column for continuous models.
    let rate_model = match &cfg.model.step {
        Displacement::Continuous(step) => Some(
            brwlab::rates::ModelParams::new(cfg.model.offspring.clone(), *step).rate_model(),
        ),
        Displacement::Lattice(_) => None,
    };

    let mut csv = String::from(ESTIMATE_CSV_HEADER);
    for event in &section.events {
        let side = match event.side.as_str() {
            "upper" => EventSide::Upper,
            "lower" => EventSide::Lower,
            other => {
                return Err(ConfigError(format!(
                    "unknown event side {other:?}: expected \"upper\" or \"lower\""
                ))
                .into())
            }
        };
        let est = estimate_event(
            &cfg,
            engine,
            TailEvent {
                side,
                threshold_x: event.x,
            },
            section.replicas,
            section.level,
        )?;
        let analytic = rate_model.as_ref().map(|m| match engine {
            Engine::Brw => m.rate_ibrw(event.x),
            Engine::IndMax => m.rate_iind(event.x),
        });
        let kind = format!(
            "{}_{}",
            section.engine.to_uppercase(),
            event.side.to_uppercase()
        );
        csv.push_str(&estimate_csv_row(
            section.horizon_n,
            event.x,
            &kind,
            Some(&est),
            analytic,
        ));
    }

    if let Some(trend) = &section.trend {
        let x = trend.x;
        let need_x = || {
            x.ok_or_else(|| ConfigError("this trend kind needs `x`".into()))
        };
        let rows = match trend.kind.as_str() {
            "gw_lower" => rate_trend_gw_lower(&cfg.model.offspring, &trend.n_list)?,
            "ind_upper_lattice" => {
                let lattice = file.model.lattice_law()?;
                rate_trend_ind_upper_lattice(
                    &cfg.model.offspring,
                    &lattice,
                    need_x()?,
                    &trend.n_list,
                    trend.conditional,
                )?
            }
            "single_walk" => {
                let step = file.model.step_law()?;
                rate_trend_single_walk(
                    &step,
                    need_x()?,
                    &trend.n_list,
                    trend.replicas.unwrap_or(1_000_000),
                    seed,
                    section.level,
                )?
            }
            other => {
                return Err(ConfigError(format!(
                    "unknown trend kind {other:?}: expected gw_lower, ind_upper_lattice or single_walk"
                ))
                .into())
            }
        };
        let label = trend.kind.to_uppercase();
        let x_col = x.unwrap_or(f64::from(cfg.model.offspring.k_star()));
        for row in rows {
            csv.push_str(&trend_csv_row(&row, x_col, &label));
        }
    }
    write_text(out_dir, "estimate.csv", &csv)?;

    let mut manifest = Manifest::new("estimate", seed, config_echo(cli.config.as_ref()));
    manifest.outputs = vec!["estimate.csv".into()];
    manifest.truncated_runs = Some(0);
    manifest.write(out_dir)?;
    println!(
        "wrote estimate.csv ({} events) to {}",
        section.events.len(),
        out_dir.display()
    );
    Ok(())
}
