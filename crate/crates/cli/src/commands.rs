use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use fairalloc::output::{csv_bytes, write_atomic, write_json};
use fairalloc::simulate::fixture::{audit_fixture, AuditFixtureSpec};
use fairalloc::simulate::presets;
use fairalloc::simulate::verify::CheckSuite;
use fairalloc::{
    allocate, audit, CapacityVector, Error, Estimate, ExperimentConfig, ExperimentResult, FairnessReportF64,
    PolicySpec,
};
use serde::Serialize;

use crate::policy::{parse_policy, with_scale};
use crate::population::read_population;
use crate::{AuditArgs, CheckArgs, FixtureArgs, SimulateArgs, SolveArgs};

/// 3 for infeasible capacities, 2 for every other input problem.
pub fn exit_code_for(err: &anyhow::Error) -> ExitCode {
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible { .. }) => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn load_experiment(params: &str) -> Result<ExperimentConfig> {
    Ok(match params {
        "experiment1" => presets::experiment1(),
        "experiment2" => presets::experiment2(),
        path => ExperimentConfig::load(Path::new(path))?,
    })
}

fn estimate_row(name: &str, e: &Estimate) -> Vec<String> {
    vec![
        name.to_string(),
        e.mean.to_string(),
        e.ci_half_width.to_string(),
        e.lower().to_string(),
        e.upper().to_string(),
        e.replications.to_string(),
    ]
}

fn metric_rows(result: &ExperimentResult) -> Vec<Vec<String>> {
    let mut rows = vec![
        estimate_row("delta_i", &result.delta_i),
        estimate_row("delta_r", &result.delta_r),
        estimate_row("neg_delta_r", &result.neg_delta_r()),
    ];
    if let Some(g) = &result.delta_g {
        rows.push(estimate_row("delta_g", g));
    }
    if let Some(s) = &result.delta_s {
        rows.push(estimate_row("delta_s", s));
    }
    rows.push(estimate_row("delta_u_gap", &result.delta_u_gap));
    rows.push(estimate_row("best_service_fraction_group0", &result.best_service_fraction[0]));
    rows.push(estimate_row("best_service_fraction_group1", &result.best_service_fraction[1]));
    rows
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let mut config = load_experiment(&args.params)?;
    if let Some(policy) = &args.policy {
        config.policy = parse_policy(policy)?;
    }
    if let Some(reps) = args.reps {
        config.replications = reps;
    }
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    let result = if args.f32 { config.run::<f32>()? } else { config.run::<f64>()? };

    create_dir(&args.output_dir)?;
    write_json(&args.output_dir.join("experiment.json"), &result)?;
    let header = ["metric", "mean", "ci_half_width", "ci_lower", "ci_upper", "replications"];
    write_atomic(&args.output_dir.join("metrics.csv"), &csv_bytes(&header, metric_rows(&result))?)?;
    let header = [
        "replication",
        "population_seed",
        "policy_seed",
        "delta_i",
        "delta_r",
        "delta_g",
        "delta_s",
        "delta_u_gap",
        "best_service_fraction_group0",
        "best_service_fraction_group1",
    ];
    let rows = result.records.iter().map(|r| {
        vec![
            r.replication.to_string(),
            r.population_seed.to_string(),
            r.policy_seed.to_string(),
            r.delta_i.to_string(),
            r.delta_r.to_string(),
            opt(r.delta_g),
            opt(r.delta_s),
            r.delta_u_gap.to_string(),
            r.best_service_fraction[0].to_string(),
            r.best_service_fraction[1].to_string(),
        ]
    });
    write_atomic(&args.output_dir.join("replications.csv"), &csv_bytes(&header, rows)?)?;

    println!("policy {} over {} replications (base seed {})", result.policy, result.replications, result.base_seed);
    for row in metric_rows(&result) {
        println!("  {:<30} {:>12.6} ± {:.6}", row[0], row[1].parse::<f64>().unwrap_or(f64::NAN), row[2].parse::<f64>().unwrap_or(f64::NAN));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SolveReport {
    policy: PolicySpec,
    policy_description: String,
    seed: u64,
    services: Vec<String>,
    capacities: Vec<usize>,
    counts: Vec<usize>,
    total_utility: f64,
    /// Keyed by group column.
    fairness: BTreeMap<String, FairnessReportF64>,
    trade_offs: BTreeMap<String, Vec<String>>,
}

pub fn solve(args: &SolveArgs) -> Result<ExitCode> {
    let file = read_population(&args.population)?;
    let pop = &file.population;
    if args.capacities.len() != pop.k() {
        bail!(Error::InvalidParameters(format!(
            "{} capacities given for {} services",
            args.capacities.len(),
            pop.k()
        )));
    }
    let caps = CapacityVector::new(args.capacities.clone());
    let mut spec = parse_policy(&args.policy)?;
    if let Some(scale) = args.tie_break_scale {
        spec = with_scale(spec, scale);
        spec.validate()?;
    }
    let alloc = allocate(pop, &caps, &spec, args.seed)?;

    let attributes: Vec<&String> = match &args.attribute {
        Some(a) => {
            pop.attribute(a)?;
            vec![a]
        }
        None => file.group_columns.iter().collect(),
    };
    let mut fairness = BTreeMap::new();
    let mut trade_offs = BTreeMap::new();
    for attr in attributes {
        match fairalloc::delta_metrics(pop, &alloc, attr) {
            Ok(report) => {
                trade_offs.insert(attr.clone(), report.trade_offs(None).iter().map(|t| t.label().to_string()).collect());
                fairness.insert(attr.clone(), report);
            }
            Err(Error::EmptyGroup { .. }) if args.attribute.is_none() => {}
            Err(e) => return Err(e.into()),
        }
    }

    create_dir(&args.output_dir)?;
    let rows = (0..pop.n()).map(|i| {
        let s = alloc.service(i);
        vec![file.ids[i].clone(), (s + 1).to_string(), file.services[s].clone(), pop.utility(i, s).to_string()]
    });
    write_atomic(
        &args.output_dir.join("allocation.csv"),
        &csv_bytes(&["id", "service", "service_name", "utility"], rows)?,
    )?;
    let report = SolveReport {
        policy_description: spec.describe(),
        policy: spec,
        seed: args.seed,
        services: file.services.clone(),
        capacities: args.capacities.clone(),
        counts: alloc.counts(pop.k()),
        total_utility: alloc.total_utility(pop),
        fairness,
        trade_offs,
    };
    write_json(&args.output_dir.join("report.json"), &report)?;
    println!("{}: total utility {}", report.policy_description, report.total_utility);
    println!("allocation (1-based): {:?}", alloc.to_one_based());
    Ok(ExitCode::SUCCESS)
}

pub fn audit(args: &AuditArgs) -> Result<ExitCode> {
    let config = match &args.config {
        Some(path) => audit::AuditConfig::load(path)?,
        None => audit::AuditConfig::preset(),
    };
    let dataset = audit::ingest_csv(&args.data, &config)?;
    let report = audit::run_audit(&dataset, &config, args.bandwidth)?;
    let files = report.write(&args.output_dir)?;
    println!("audited {} households, bandwidth {}", report.households, report.bandwidth);
    let shares: Vec<String> = report
        .services
        .iter()
        .zip(&report.overall_shares.shares)
        .map(|(s, v)| format!("{s} {v:.4}"))
        .collect();
    println!("best-service shares: {}", shares.join(", "));
    for c in &report.comparisons {
        let r = &c.observed.report;
        let flags = if c.observed.trade_off_labels.is_empty() {
            "no trade-off".to_string()
        } else {
            c.observed.trade_off_labels.join("; ")
        };
        println!(
            "  {:<24} ΔU {:.4} vs {:.4} (t = {:.2})  ΔI {:+.4}  -ΔR {:+.4}  {}",
            c.name, c.delta_u.means[1], c.delta_u.means[0], c.delta_u.welch.t_statistic, r.delta_i, -r.delta_r, flags
        );
    }
    println!("wrote {} files to {}", files.len(), args.output_dir.display());
    Ok(ExitCode::SUCCESS)
}

pub fn check(args: &CheckArgs) -> Result<ExitCode> {
    let mut suite = CheckSuite { seed: args.seed, ..CheckSuite::default() };
    if args.quick {
        suite.identity_instances = 200;
        suite.interpolation_seeds = 300;
        suite.replications = 40;
    }
    let outcomes = suite.run();
    for o in &outcomes {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    if let Some(path) = &args.json {
        write_json(path, &outcomes)?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        println!("{failed} of {} checks failed", outcomes.len());
        return Ok(ExitCode::from(1));
    }
    println!("all {} checks passed", outcomes.len());
    Ok(ExitCode::SUCCESS)
}

pub fn fixture(args: &FixtureArgs) -> Result<ExitCode> {
    let dataset = audit_fixture(&AuditFixtureSpec::default(), args.seed)?;
    if let Some(dir) = args.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_atomic(&args.output, dataset.to_csv()?.as_bytes())?;
    println!("wrote {} households to {}", dataset.len(), args.output.display());
    Ok(ExitCode::SUCCESS)
}
