//! `dmmf` — simulate the dynamic max-min fair mechanism, predict its
//! long-run behavior, solve the induced threshold game, and run the
//! verification experiments.
//!
//! Exit codes: 0 = all checks in the config passed, 1 = a check failed,
//! 2 = configuration or execution error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dmmf_core::harness::output::{write_diagnostic_csv, write_json, write_trajectory_csv};
use dmmf_core::harness::{ExperimentConfig, ExperimentKind};
use dmmf_core::{
    best_response, collapse_diagnostic, ideal_utility, predicted_utility, pure_ne_scan,
    run_experiment, splitting_partition, symmetric_optimum, Error, RecordingSpec, Result, RunSpec,
    Strategy, ThresholdGame, ThresholdProfile,
};

#[derive(Parser)]
#[command(
    name = "dmmf",
    version,
    about = "Dynamic max-min fair allocation: simulator, predictors, and equilibrium solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (a single JSON document).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV series and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replications and grid scans
    /// (DMMF_THREADS overrides this flag).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mechanism round by round and record trajectories.
    Simulate(CommonArgs),
    /// Print the splitting partition, predicted slopes, and utilities.
    Analyze(CommonArgs),
    /// Compute the welfare-optimal symmetric request probability.
    Pstar(CommonArgs),
    /// Best response of one agent against a fixed profile.
    BestResponse(CommonArgs),
    /// Scan a full profile grid for epsilon-equilibria.
    NeScan(CommonArgs),
    /// Compare a deviator against the all-WRM baseline.
    Deviation(CommonArgs),
    /// Track the win-rate-matching request probability M[t].
    WrmConverge(CommonArgs),
    /// Run a verification experiment (verify-partition, dominance,
    /// utility-bounds) and gate the exit code on its checks.
    Verify(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, runner): (&CommonArgs, fn(&CommonArgs) -> Result<bool>) = match &cli.command {
        Command::Simulate(a) => (a, |a| run_kind(a, &[ExperimentKind::Simulate])),
        Command::Analyze(a) => (a, cmd_analyze),
        Command::Pstar(a) => (a, cmd_pstar),
        Command::BestResponse(a) => (a, cmd_best_response),
        Command::NeScan(a) => (a, cmd_ne_scan),
        Command::Deviation(a) => (a, |a| run_kind(a, &[ExperimentKind::Deviation])),
        Command::WrmConverge(a) => (a, |a| run_kind(a, &[ExperimentKind::WrmConvergence])),
        Command::Verify(a) => (a, |a| {
            run_kind(
                a,
                &[
                    ExperimentKind::VerifyPartition,
                    ExperimentKind::Dominance,
                    ExperimentKind::UtilityBounds,
                ],
            )
        }),
    };
    if let Err(e) = configure_threads(common.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match runner(common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let from_env = match std::env::var("DMMF_THREADS") {
        Ok(s) => Some(s.parse::<usize>().map_err(|_| {
            Error::InvalidConfig(format!("DMMF_THREADS: expected an integer, got '{s}'"))
        })?),
        Err(_) => None,
    };
    if let Some(k) = from_env.or(flag) {
        if k == 0 {
            return Err(Error::InvalidConfig("threads: must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("threads: {e}")))?;
    }
    Ok(())
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn require_out(args: &CommonArgs) -> Result<&PathBuf> {
    args.out
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--out: required for this subcommand".into()))
}

fn run_kind(args: &CommonArgs, allowed: &[ExperimentKind]) -> Result<bool> {
    let cfg = load_config(args)?;
    let kind = cfg.required_kind()?;
    if !allowed.contains(&kind) {
        return Err(Error::InvalidConfig(format!(
            "experiment: kind {} is not runnable under this subcommand",
            serde_json::to_string(&kind).expect("kind serializes")
        )));
    }
    let out = require_out(args)?;
    let outcome = run_experiment(&cfg, out)?;
    for check in &outcome.checks {
        println!(
            "check {}: {} — {}",
            check.name,
            if check.passed { "PASS" } else { "FAIL" },
            check.detail
        );
    }
    println!("wrote {}", out.join("summary.json").display());
    Ok(outcome.all_passed())
}

fn print_and_maybe_write(
    value: &serde_json::Value,
    out: &Option<PathBuf>,
    filename: &str,
) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value).expect("json"));
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join(filename), value)?;
    }
    Ok(())
}

/// Static profile taken from mechanism + agents (strategies must be static).
fn static_profile(
    cfg: &ExperimentConfig,
) -> Result<(ThresholdProfile, Vec<dmmf_core::ValueDistribution>)> {
    let mechanism = cfg.mechanism_config()?;
    let n = mechanism.n();
    if cfg.agents.len() != n {
        return Err(Error::InvalidConfig(format!(
            "agents: got {} entries for mechanism.n = {n}",
            cfg.agents.len()
        )));
    }
    let mut probs = Vec::with_capacity(n);
    let mut dists = Vec::with_capacity(n);
    for (i, agent) in cfg.agents.iter().enumerate() {
        let dist = agent.dist.build(&format!("agents[{i}].dist"))?;
        let mut pstar = |_: &dmmf_core::ValueDistribution| {
            Err(Error::InvalidConfig(format!(
                "agents[{i}].strategy: analyze requires static strategies"
            )))
        };
        let strategy =
            agent
                .strategy
                .build(n, &dist, &format!("agents[{i}].strategy"), &mut pstar)?;
        let Strategy::StaticThreshold(p) = strategy else {
            return Err(Error::InvalidConfig(format!(
                "agents[{i}].strategy: analyze requires static strategies"
            )));
        };
        probs.push(p);
        dists.push(dist);
    }
    Ok((
        ThresholdProfile::new(mechanism.fair_shares().to_vec(), probs)?,
        dists,
    ))
}

fn cmd_analyze(args: &CommonArgs) -> Result<bool> {
    let cfg = load_config(args)?;
    let (profile, dists) = static_profile(&cfg)?;
    let partition = splitting_partition(&profile)?;
    let utilities = predicted_utility(&profile, &dists)?;
    let ideals: Vec<f64> = profile
        .fair_shares()
        .iter()
        .zip(&dists)
        .map(|(&a, d)| ideal_utility(d, a))
        .collect::<Result<_>>()?;
    let report = serde_json::json!({
        "partition": partition.groups,
        "group_rates": partition.group_rates,
        "slopes": partition.slopes,
        "predicted_utilities": utilities,
        "ideal_utilities": ideals,
    });
    print_and_maybe_write(&report, &args.out, "analysis.json")?;

    // With an output directory and a horizon, also record one trajectory and
    // its collapse diagnostics.
    if let (Some(dir), Some(horizon)) = (&args.out, cfg.horizon) {
        let mechanism = cfg.mechanism_config()?;
        let strategies: Vec<Strategy> = profile
            .request_probs()
            .iter()
            .map(|&p| Strategy::StaticThreshold(p))
            .collect();
        let traj = dmmf_core::run(&RunSpec {
            config: &mechanism,
            dists: &dists,
            strategies: &strategies,
            horizon,
            seed: cfg.seed,
            recording: RecordingSpec::checkpoints(),
        })?;
        let diag = collapse_diagnostic(&traj, &profile, &partition)?;
        write_trajectory_csv(&dir.join("trajectory.csv"), &traj)?;
        write_diagnostic_csv(&dir.join("diagnostics.csv"), &diag, profile.n())?;
    }
    Ok(true)
}

fn cmd_pstar(args: &CommonArgs) -> Result<bool> {
    let cfg = load_config(args)?;
    let game = cfg.game_spec()?;
    let dists = game.build_dists()?;
    let dist = dists[0].clone();
    if dists.iter().any(|d| *d != dist) {
        return Err(Error::InvalidConfig(
            "game: pstar requires a symmetric game (one distribution)".into(),
        ));
    }
    let ps = symmetric_optimum(&dist, dists.len(), game.resolution)?;
    let report = serde_json::json!({"p_star": ps.p, "value": ps.value});
    print_and_maybe_write(&report, &args.out, "pstar.json")?;
    Ok(true)
}

fn cmd_best_response(args: &CommonArgs) -> Result<bool> {
    let cfg = load_config(args)?;
    let game_spec = cfg.game_spec()?;
    let dists = game_spec.build_dists()?;
    let n = dists.len();
    let shares = game_spec.build_shares(n)?;
    let responder = game_spec
        .responder
        .ok_or_else(|| Error::InvalidConfig("game.responder: required".into()))?;
    let profile = game_spec
        .profile
        .clone()
        .ok_or_else(|| Error::InvalidConfig("game.profile: required".into()))?;
    let game = ThresholdGame::new(shares, dists)?;
    let br = best_response(&game, responder, &profile, game_spec.resolution)?;
    let report = serde_json::to_value(&br).expect("serializable");
    print_and_maybe_write(&report, &args.out, "best_response.json")?;
    Ok(true)
}

fn cmd_ne_scan(args: &CommonArgs) -> Result<bool> {
    let cfg = load_config(args)?;
    let game_spec = cfg.game_spec()?;
    let dists = game_spec.build_dists()?;
    let n = dists.len();
    let shares = game_spec.build_shares(n)?;
    let game = ThresholdGame::new(shares, dists)?;
    let report = pure_ne_scan(
        &game,
        game_spec.resolution,
        game_spec.epsilon,
        game_spec.bounds.as_deref(),
    )?;
    let value = serde_json::to_value(&report).expect("serializable");
    print_and_maybe_write(&value, &args.out, "ne_scan.json")?;
    Ok(true)
}
