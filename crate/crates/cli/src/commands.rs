//! The `run`, `sweep`, and `verify` subcommands.

use std::path::Path;

use bp_core::checks::{self, CheckResult};
use bp_core::{scenarios, MetricsLog, Scenario};

use crate::output;
use crate::scenario_file::{split_override, CliError, FlowSection, ScenarioFile};

/// Resolve a `--scenario` argument: a built-in name (`linear40`, `grid16`,
/// `diamond8`) or a path to a scenario file. Built-ins default to 200000
/// slots, seed 1.
pub fn load_scenario(arg: &str) -> Result<ScenarioFile, CliError> {
    const BUILTIN_SLOTS: u64 = 200_000;
    let builtin = match arg {
        "linear40" => Some(scenarios::scenario_linear_inelastic(40, 5.0, 2.5, 0.99, BUILTIN_SLOTS, 1)),
        "grid16" => Some(scenarios::scenario_grid16(1000.0, 0.99, BUILTIN_SLOTS, 1)),
        "diamond8" => Some(scenarios::scenario_diamond8(5.0, 10.0, BUILTIN_SLOTS, 1)),
        _ => None,
    };
    if let Some(s) = builtin {
        let mut file = ScenarioFile::from_scenario(&s);
        // Built-ins keep the warmup at half the (possibly overridden) run.
        file.run.warmup = None;
        return Ok(file);
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| CliError::Parse(format!("cannot read {arg}: {e}")))?;
    ScenarioFile::parse(&text)
}

pub fn apply_common_overrides(
    file: &mut ScenarioFile,
    sets: &[String],
    slots: Option<u64>,
) -> Result<(), CliError> {
    // --slots first so an explicit --set warmup=... still wins.
    if let Some(t) = slots {
        file.apply_override("slots", &t.to_string())?;
    }
    for spec in sets {
        let (key, value) = split_override(spec)?;
        file.apply_override(key, value)?;
    }
    Ok(())
}

pub fn cmd_run(
    scenario_arg: &str,
    out_dir: &Path,
    sets: &[String],
    slots: Option<u64>,
) -> Result<(), CliError> {
    let mut file = load_scenario(scenario_arg)?;
    apply_common_overrides(&mut file, sets, slots)?;
    let scenario = file.to_scenario()?;
    let log = bp_core::run(&scenario)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Parse(format!("cannot create {}: {e}", out_dir.display())))?;
    let resolved = ScenarioFile::from_scenario(&scenario);
    output::write_file(&out_dir.join("manifest.toml"), &resolved.to_toml())?;
    output::write_file(&out_dir.join("series.csv"), &output::series_csv(&log))?;
    output::write_file(&out_dir.join("summary.csv"), &output::summary_csv(&scenario, &log))?;
    output::write_file(&out_dir.join("allocation.csv"), &output::allocation_csv(&scenario, &log))?;
    if let Some(profile) = output::hop_profile_csv(&scenario, &log) {
        output::write_file(&out_dir.join("hop_profile.csv"), &profile)?;
    }
    println!(
        "run complete: {} slots, mean real backlog {}, outputs in {}",
        scenario.slots,
        output::sig6(log.mean_real_backlog),
        out_dir.display()
    );
    Ok(())
}

/// Rebuild a chain scenario with a different length, preserving the long
/// flow's and per-link flows' traffic models. Only valid when the base
/// network is a chain with the standard flow pattern.
fn with_chain_length(base: &ScenarioFile, n: usize) -> Result<ScenarioFile, CliError> {
    let l = base.network.links.len();
    let is_chain = base.network.nodes == l + 1
        && base.network.links.iter().enumerate().all(|(i, &(t, h, _))| t == i && h == i + 1)
        && !base.flows.is_empty()
        && base.flows[0].source == 0
        && base.flows[0].dest == l;
    if !is_chain || n == 0 {
        return Err(CliError::Parse(
            "parameter n requires a chain scenario (long flow plus per-link flows)".into(),
        ));
    }
    let cap = base.network.links[0].2;
    let short_traffic =
        base.flows.get(1).map(|f| f.traffic.clone()).unwrap_or_else(|| base.flows[0].traffic.clone());
    let mut file = base.clone();
    file.network.nodes = n + 1;
    file.network.links = (0..n).map(|i| (i, i + 1, cap)).collect();
    file.flows = vec![FlowSection {
        id: 0,
        source: 0,
        dest: n,
        route: Some((0..=n).collect()),
        traffic: base.flows[0].traffic.clone(),
    }];
    for i in 1..=n {
        file.flows.push(FlowSection {
            id: i as u32,
            source: i - 1,
            dest: i,
            route: Some(vec![i - 1, i]),
            traffic: short_traffic.clone(),
        });
    }
    Ok(file)
}

fn sweep_variant(base: &ScenarioFile, param: &str, value: f64) -> Result<ScenarioFile, CliError> {
    match param {
        "lambda" | "beta" | "m" => {
            let mut file = base.clone();
            file.apply_override(param, &value.to_string())?;
            Ok(file)
        }
        "n" => {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(CliError::Parse(format!("n must be a positive integer, got {value}")));
            }
            with_chain_length(base, value as usize)
        }
        other => Err(CliError::Parse(format!(
            "unknown sweep parameter \"{other}\" (expected lambda, beta, m, or n)"
        ))),
    }
}

struct SweepRow {
    value: f64,
    seed: u64,
    log: MetricsLog,
}

fn sweep_csv(param: &str, rows: &[SweepRow], values: &[f64], seeds: u64) -> String {
    let mut out = String::from(
        "param,value,seed,mean_shadow_backlog,mean_real_backlog,mean_real_throughput,mean_latency\n",
    );
    let fmt = |out: &mut String, value: f64, seed: &str, metrics: [f64; 4]| {
        let [sb, rb, tp, lat] = metrics.map(output::sig6);
        out.push_str(&format!("{param},{},{seed},{sb},{rb},{tp},{lat}\n", output::sig6(value)));
    };
    for &value in values {
        let group: Vec<&SweepRow> =
            rows.iter().filter(|r| r.value == value).collect();
        for r in &group {
            fmt(
                &mut out,
                value,
                &r.seed.to_string(),
                [
                    r.log.mean_shadow_backlog,
                    r.log.mean_real_backlog,
                    r.log.mean_real_throughput,
                    r.log.mean_latency,
                ],
            );
        }
        if seeds > 1 {
            let k = group.len() as f64;
            let mean = |f: fn(&MetricsLog) -> f64| group.iter().map(|r| f(&r.log)).sum::<f64>() / k;
            fmt(
                &mut out,
                value,
                "mean",
                [
                    mean(|l| l.mean_shadow_backlog),
                    mean(|l| l.mean_real_backlog),
                    mean(|l| l.mean_real_throughput),
                    mean(|l| l.mean_latency),
                ],
            );
        }
    }
    out
}

pub fn cmd_sweep(
    scenario_arg: &str,
    out_dir: &Path,
    param: &str,
    values: &[f64],
    seeds: u64,
    sets: &[String],
    slots: Option<u64>,
) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Parse("empty sweep value list".into()));
    }
    if seeds == 0 {
        return Err(CliError::Parse("--seeds must be at least 1".into()));
    }
    let mut base = load_scenario(scenario_arg)?;
    apply_common_overrides(&mut base, sets, slots)?;

    // Validate every variant up front so a bad parameter fails before any
    // simulation time is spent.
    let mut jobs: Vec<(f64, u64, Scenario)> = Vec::new();
    for &value in values {
        let file = sweep_variant(&base, param, value)?;
        for seed in 1..=seeds {
            let mut file = file.clone();
            file.run.seed = seed;
            jobs.push((value, seed, file.to_scenario()?));
        }
    }

    // Replications are independent; run them concurrently and collect in
    // job order so the CSV is deterministic.
    let results: Vec<Result<SweepRow, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(value, seed, scenario)| {
                scope.spawn(move || {
                    let log = bp_core::run(scenario)?;
                    Ok(SweepRow { value: *value, seed: *seed, log })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let rows: Vec<SweepRow> = results.into_iter().collect::<Result<_, _>>()?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Parse(format!("cannot create {}: {e}", out_dir.display())))?;
    output::write_file(&out_dir.join("manifest.toml"), &base.to_toml())?;
    output::write_file(&out_dir.join("sweep.csv"), &sweep_csv(param, &rows, values, seeds))?;
    println!(
        "sweep complete: {} values x {seeds} seeds, outputs in {}",
        values.len(),
        out_dir.display()
    );
    Ok(())
}

pub fn cmd_verify(suite: &str) -> Result<bool, CliError> {
    let results: Vec<CheckResult> = match suite {
        "oracle" => vec![checks::check_oracle_match(500_000, 1)?],
        "scaling" => vec![checks::check_backlog_scaling(3_000_000, 6)?],
        "equivalence" => vec![checks::check_trace_equivalence(2_000, 70)?],
        "stability" => vec![checks::check_stability(400_000, 74)?],
        other => {
            return Err(CliError::Parse(format!(
                "unknown suite \"{other}\" (expected oracle, scaling, equivalence, or stability)"
            )))
        }
    };
    let mut all_pass = true;
    for r in &results {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
        all_pass &= r.pass;
    }
    Ok(all_pass)
}
