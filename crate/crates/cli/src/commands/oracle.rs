use std::path::Path;

use brwlab::oracle::{
    brw_max_cdf_exact_bounded, conditional_cdf, ind_max_cdf_exact_bounded, LatticeDist,
    DEFAULT_MAX_LATTICE_POINTS,
};
use serde::Serialize;

use super::{config_echo, write_text, Manifest};
use crate::config::{CliFailure, ConfigError};
use crate::Cli;

#[derive(Serialize)]
struct Sidecar {
    h: f64,
    extinct_mass: f64,
    n: u32,
    conditional: bool,
}

fn emit(
    dist: &LatticeDist,
    stem: &str,
    n: u32,
    conditional: bool,
    out_dir: &Path,
    manifest: &mut Manifest,
) -> Result<(), CliFailure> {
    write_text(out_dir, &format!("{stem}.csv"), &dist.to_csv())?;
    let sidecar = Sidecar {
        h: dist.h,
        extinct_mass: dist.extinct_mass,
        n,
        conditional,
    };
    let body = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| CliFailure::Config(ConfigError(e.to_string())))?;
    write_text(out_dir, &format!("{stem}.json"), &body)?;
    manifest.outputs.push(format!("{stem}.csv"));
    manifest.outputs.push(format!("{stem}.json"));
    Ok(())
}

pub fn run(cli: &Cli, out_dir: &Path) -> Result<(), CliFailure> {
    let file = cli.load_config()?;
    let section = file
        .oracle
        .as_ref()
        .ok_or_else(|| ConfigError("missing `oracle` section".into()))?;
    let offspring = file.model.offspring_law()?;
    let lattice = file.model.lattice_law()?;
    let max_points = section.max_points.unwrap_or(DEFAULT_MAX_LATTICE_POINTS);
    let n = section.horizon_n;
    let seed = cli.effective_seed(&file);

    let want_brw = matches!(section.kind.as_str(), "brw" | "both");
    let want_ind = matches!(section.kind.as_str(), "ind" | "both");
    if !want_brw && !want_ind {
        return Err(ConfigError(format!(
            "unknown oracle kind {:?}: expected \"brw\", \"ind\" or \"both\"",
            section.kind
        ))
        .into());
    }

    let mut manifest = Manifest::new("oracle", seed, config_echo(cli.config.as_ref()));
    if want_brw {
        let mut dist = brw_max_cdf_exact_bounded(&lattice, &offspring, n, max_points)?;
        if section.conditional {
            dist = conditional_cdf(&dist)?;
        }
        emit(&dist, "oracle_brw", n, section.conditional, out_dir, &mut manifest)?;
    }
    if want_ind {
        let mut dist = ind_max_cdf_exact_bounded(&lattice, &offspring, n, max_points)?;
        if section.conditional {
            dist = conditional_cdf(&dist)?;
        }
        emit(&dist, "oracle_ind", n, section.conditional, out_dir, &mut manifest)?;
    }
    manifest.write(out_dir)?;
    println!(
        "wrote exact CDFs for n={n} ({}) to {}",
        section.kind,
        out_dir.display()
    );
    Ok(())
}
