//! `wickcalc`: runs named check suites on a registered model and writes `report.json`,
//! `timing.json`, `summary.csv` and one `<check>.csv` per check.
//!
//! Exit codes: 0 when every check passes, 1 when any fails, 2 for an invalid configuration.

mod checks;
mod config;
mod report;

use clap::Parser;
use rayon::prelude::*;
use report::CheckResult;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "wickcalc", version, about = "Check suites for quantized symplectic leaves")]
struct Args {
    /// Scenario file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Suite to run; overrides the scenario's `suite`.
    #[arg(long)]
    suite: Option<String>,
    /// Output directory; overrides the scenario's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "WICKCALC_JOBS")]
    jobs: Option<usize>,
    #[arg(long)]
    list_models: bool,
    /// Lists the checks and suites of a model.
    #[arg(long, value_name = "MODEL")]
    list_checks: Option<String>,
}

fn config_error(e: config::ConfigError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_models {
        for k in wickcalc::algebra::models::ModelKind::ALL {
            println!("{}", k.name());
        }
        return ExitCode::SUCCESS;
    }
    if let Some(name) = &args.list_checks {
        let kind = match config::parse_kind(name) {
            Ok(k) => k,
            Err(e) => return config_error(e),
        };
        for c in checks::registry(kind) {
            println!("{}\t{}", c.id, c.suites.join(","));
        }
        return ExitCode::SUCCESS;
    }
    let Some(path) = &args.config else {
        return config_error(config::ConfigError("--config is required unless listing".into()));
    };
    let cfg = match config::load(path) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let scenario = match cfg.resolve() {
        Ok(s) => s,
        Err(e) => return config_error(e),
    };

    let registry = checks::registry(scenario.kind);
    let suite = args.suite.clone().or(cfg.suite.clone());
    let suite = if suite.is_none() && cfg.checks.is_empty() { Some("all".to_string()) } else { suite };
    if let Some(s) = &suite {
        let known = checks::suites(scenario.kind);
        if !known.contains(&s.as_str()) {
            return config_error(config::ConfigError(format!(
                "unknown suite '{s}' for {}; available: {}",
                scenario.kind,
                known.join(", ")
            )));
        }
    }
    for id in &cfg.checks {
        if !registry.iter().any(|c| &c.id == id) {
            return config_error(config::ConfigError(format!("unknown check '{id}' for {}", scenario.kind)));
        }
    }
    let selected: Vec<&checks::Check> = registry
        .iter()
        .filter(|c| {
            // the quaternion table only exists at n = 1; `all` skips it elsewhere
            let in_all = scenario.n == 1 || !c.id.starts_with("quaternion-x");
            cfg.checks.contains(&c.id)
                || suite.as_deref().is_some_and(|s| (s == "all" && in_all) || c.suites.contains(&s))
        })
        .collect();
    if scenario.n != 1 && selected.iter().any(|c| c.id.starts_with("quaternion-x")) {
        return config_error(config::ConfigError("the quaternion table needs n = 1".into()));
    }
    let out = args.out.clone().or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("wickcalc-out"));

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs.filter(|j| *j > 0) {
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return config_error(config::ConfigError(format!("worker pool: {e}"))),
    };
    let results: Vec<CheckResult> = pool.install(|| {
        selected
            .par_iter()
            .map(|c| {
                let t = Instant::now();
                let outcome = (c.run)(&scenario);
                CheckResult::new(&c.id, &scenario.inputs, outcome, t.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });

    if let Err(e) = write_outputs(&out, scenario.kind.name(), &results) {
        eprintln!("cannot write reports to {}: {e}", out.display());
        return ExitCode::from(1);
    }
    let failed: Vec<&CheckResult> = results.iter().filter(|r| !r.pass).collect();
    println!("{} checks, {} passed, {} failed; reports in {}", results.len(), results.len() - failed.len(), failed.len(), out.display());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for r in failed {
            match &r.error {
                Some(e) => eprintln!("CHECK_FAILED {} ({e})", r.id),
                None => eprintln!("CHECK_FAILED {} value {:e} target {:e} tolerance {:e}", r.id, r.value, r.target, r.tolerance),
            }
        }
        ExitCode::from(1)
    }
}

fn write_outputs(out: &std::path::Path, model: &str, results: &[CheckResult]) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    for r in results {
        report::write_atomic(&out.join(format!("{}.csv", r.id)), &report::check_csv(r)?)?;
    }
    report::write_atomic(&out.join("summary.csv"), &report::summary_csv(results)?)?;
    report::write_atomic(&out.join("timing.json"), &report::timing_json(results))?;
    report::write_atomic(&out.join("report.json"), &report::report_json(model, results))
}
