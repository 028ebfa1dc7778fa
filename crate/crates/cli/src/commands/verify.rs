use std::path::Path;
use std::process::ExitCode;

use brwlab::acceptance::{determinism_artifacts, run_all, DEFAULT_VERIFY_SEED};

/// Runs the verification suite, prints one status line per criterion, writes
/// the artifact bundle and a JSON report, and exits 0 iff everything passed.
pub fn run(seed: Option<u64>, out_dir: &Path) -> ExitCode {
    let seed = seed.unwrap_or(DEFAULT_VERIFY_SEED);
    println!("verification suite (seed {seed})");
    let report = run_all(seed);
    for c in &report.criteria {
        println!("{}", c.status_line());
    }

    match determinism_artifacts(seed) {
        Ok(bundle) => {
            for (name, body) in &bundle {
                if let Err(e) = std::fs::write(out_dir.join(name), body) {
                    eprintln!("io error: cannot write {name}: {e}");
                    return ExitCode::from(4);
                }
            }
            // The suite validates its own outputs: every artifact must read
            // back as CSV with a header row of at least two columns.
            for (name, _) in &bundle {
                let body = match std::fs::read_to_string(out_dir.join(name)) {
                    Ok(b) => b,
                    Err(e) => {
                        eprintln!("io error: cannot re-read {name}: {e}");
                        return ExitCode::from(4);
                    }
                };
                let header_cols = body.lines().next().map_or(0, |h| h.split(',').count());
                if header_cols < 2 {
                    eprintln!("artifact {name} is not valid CSV with a header");
                    return ExitCode::from(1);
                }
            }
        }
        Err(e) => {
            eprintln!("artifact generation failed: {e}");
            return ExitCode::from(4);
        }
    }

    let json = serde_json::json!({
        "command": "verify",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "criteria": report.criteria.iter().map(|c| serde_json::json!({
            "id": c.id,
            "name": c.name,
            "passed": c.ok(),
            "warnings": c.warnings,
            "details": c.details,
            "elapsed_s": c.elapsed.as_secs_f64(),
            "limit_s": c.time_limit.as_secs_f64(),
        })).collect::<Vec<_>>(),
        "all_passed": report.all_ok(),
    });
    if let Err(e) = std::fs::write(
        out_dir.join("verify_report.json"),
        serde_json::to_string_pretty(&json).expect("serializable report"),
    ) {
        eprintln!("io error: cannot write verify_report.json: {e}");
        return ExitCode::from(4);
    }
    let report_ok = std::fs::read_to_string(out_dir.join("verify_report.json"))
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .is_some();
    if !report_ok {
        eprintln!("verify_report.json does not parse back as JSON");
        return ExitCode::from(1);
    }

    if report.all_ok() {
        println!("all {} criteria passed", report.criteria.len());
        ExitCode::SUCCESS
    } else {
        let failed: Vec<String> = report
            .criteria
            .iter()
            .filter(|c| !c.ok())
            .map(|c| c.id.to_string())
            .collect();
        println!("FAILED criteria: {}", failed.join(", "));
        ExitCode::from(1)
    }
}
