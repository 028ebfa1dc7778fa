use std::path::Path;

use brwlab::rates::{rate_curve, ModelParams, RateCurve, RateKind};

use super::{config_echo, write_text, Manifest};
use crate::config::{CliFailure, ConfigError};
use crate::svg::rate_curves_svg;
use crate::Cli;

fn parse_kind(name: &str) -> Result<RateKind, ConfigError> {
    match name {
        "I" => Ok(RateKind::I),
        "IGW" => Ok(RateKind::Igw),
        "H" => Ok(RateKind::H),
        "IBRW" => Ok(RateKind::Ibrw),
        "IIND" => Ok(RateKind::Iind),
        "BOETTCHER_SCALING" => Ok(RateKind::BoettcherScaling),
        other => Err(ConfigError(format!(
            "unknown rate kind {other:?}: expected I, IGW, H, IBRW, IIND or BOETTCHER_SCALING"
        ))),
    }
}

pub fn run(cli: &Cli, out_dir: &Path) -> Result<(), CliFailure> {
    let file = cli.load_config()?;
    let section = file
        .rates
        .as_ref()
        .ok_or_else(|| ConfigError("missing `rates` section".into()))?;
    if section.points < 1 {
        return Err(ConfigError("rates.points must be >= 1".into()).into());
    }
    if section.x_min > section.x_max || section.x_min.is_nan() || section.x_max.is_nan() {
        return Err(ConfigError("rates.x_min must not exceed rates.x_max".into()).into());
    }
    let offspring = file.model.offspring_law()?;
    let step = file.model.step_law()?;
    let params = ModelParams::new(offspring, step);
    let model = params.rate_model();
    let seed = cli.effective_seed(&file);

    let grid: Vec<f64> = (0..section.points)
        .map(|i| {
            if section.points == 1 {
                section.x_min
            } else {
                section.x_min
                    + (section.x_max - section.x_min) * i as f64 / (section.points - 1) as f64
            }
        })
        .collect();

    let mut curves: Vec<RateCurve> = Vec::new();
    for name in &section.kinds {
        let kind = parse_kind(name)?;
        // Kinds with restricted domains get the shared grid clipped rather
        // than erroring the whole run: the lower-deviation rate lives below
        // the speed, the population rate on [0, log m].
        let kind_grid: Vec<f64> = match kind {
            RateKind::H => {
                let alpha = params.alpha();
                grid.iter().copied().filter(|&x| x < alpha).collect()
            }
            RateKind::Igw => {
                let log_m = params.offspring.mean().ln();
                grid.iter()
                    .copied()
                    .filter(|&x| (0.0..=log_m).contains(&x))
                    .collect()
            }
            _ => grid.clone(),
        };
        let curve = rate_curve(&model, Some(&params.offspring), kind, &kind_grid, section.scaling_n)?;
        curves.push(curve);
    }

    let mut csv = String::from(brwlab::rates::RATE_CSV_HEADER);
    for c in &curves {
        csv.push_str(&c.csv_rows());
    }
    write_text(out_dir, "rates.csv", &csv)?;
    write_text(out_dir, "rates.svg", &rate_curves_svg(&curves))?;

    let mut manifest = Manifest::new("rates", seed, config_echo(cli.config.as_ref()));
    manifest.outputs = vec!["rates.csv".into(), "rates.svg".into()];
    manifest.write(out_dir)?;
    println!(
        "wrote rates.csv and rates.svg ({} kinds x {} points) to {}",
        curves.len(),
        section.points,
        out_dir.display()
    );
    Ok(())
}
