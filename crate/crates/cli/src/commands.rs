use std::fmt;
use std::fs;
use std::path::Path;

use coadapt_core::learning::LoopContext;
use coadapt_core::synthetic::{arc_demos, ArcSpec};
use coadapt_core::{
    adapt as adapt_trajectory, fit_promp, run_loop, BasisSystem, DemonstrationSet, Error,
    LearningState, LoopConfig, LoopLogEntry, OracleUser, PrompModel, RewardWeights, Scenario,
    WeightBounds,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{AdaptArgs, ImitateArgs, LearnArgs, PlotArgs, ServeArgs, TrainArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unreadable, malformed input files.
    Usage(String),
    InfeasibleScenario(String),
    SolverInfeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::InfeasibleScenario(_) => 3,
            CliError::SolverInfeasible(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::InfeasibleScenario(m) | CliError::SolverInfeasible(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InfeasibleScenario(_) => CliError::InfeasibleScenario(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Usage(format!("invalid {what} {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn loop_config(path: Option<&Path>) -> Result<LoopConfig> {
    let cfg: LoopConfig = match path {
        Some(p) => read_json(p, "config")?,
        None => LoopConfig::default(),
    };
    cfg.adaptation.validate()?;
    Ok(cfg)
}

fn weights_or_initial(path: Option<&Path>, d: usize) -> Result<RewardWeights> {
    match path {
        Some(p) => read_json(p, "weights"),
        None => Ok(RewardWeights::initial(d)),
    }
}

/// Random planar transfers between scattered start and goal points.
fn synthesize(count: usize, steps: usize, seed: u64) -> DemonstrationSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<ArcSpec> = (0..count)
        .map(|_| ArcSpec {
            start: vec![rng.random_range(-0.65..-0.35), rng.random_range(-0.3..0.3)],
            goal: vec![rng.random_range(0.35..0.65), rng.random_range(-0.3..0.3)],
            bulge: rng.random_range(0.0..0.08),
        })
        .collect();
    arc_demos(&specs, steps)
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let set = match (&a.demos, a.synthesize) {
        (Some(p), _) => read_json::<DemonstrationSet>(p, "demonstrations")?,
        (None, Some(n)) => synthesize(n, a.demo_steps, a.seed),
        (None, None) => return Err(CliError::Usage("give --demos or --synthesize".into())),
    };
    set.validate()?;
    if let Some(p) = &a.save_demos {
        write_json(p, &set)?;
    }
    let model = fit_promp(&set.trajectories, &BasisSystem::uniform(a.basis), coadapt_core::promp::DEFAULT_RIDGE)?;
    if model.degenerate_covariance {
        log::warn!("fewer than two demonstrations; the weight covariance is only the ridge term");
    }
    write_json(&a.out, &model)?;
    println!(
        "fitted {} demonstrations, {} basis functions, sigma_y2 = {:.3e}",
        set.trajectories.len(),
        a.basis,
        model.sigma_y2
    );
    Ok(())
}

pub fn imitate(a: &ImitateArgs) -> Result<()> {
    let model: PrompModel = read_json(&a.model, "model")?;
    let scenario: Scenario = read_json(&a.scenario, "scenario")?;
    let ctx = &scenario.context;
    let imit = model.imitate(&ctx.start, &ctx.goal, a.noise, a.steps)?;
    write_json(&a.out, &imit)
}

pub fn adapt(a: &AdaptArgs) -> Result<()> {
    let model: PrompModel = read_json(&a.model, "model")?;
    let scenario: Scenario = read_json(&a.scenario, "scenario")?;
    let cfg = loop_config(a.config.as_deref())?;
    let ctx = &scenario.context;
    let w = weights_or_initial(a.weights.as_deref(), ctx.state_dim())?;
    let imit = model.imitate(&ctx.start, &ctx.goal, cfg.conditioning_noise, cfg.adaptation.steps)?;
    let out = adapt_trajectory(&imit, ctx, &scenario.kinematics, &w, &cfg.adaptation)?;
    write_json(&a.out, &out)?;
    if out.feasible {
        println!("feasible; terminal error {:.3e}", out.terminal_error);
        Ok(())
    } else {
        Err(CliError::SolverInfeasible(format!(
            "adapted trajectory violates {} constraint(s), first: {:?}",
            out.violations.len(),
            out.violations[0]
        )))
    }
}

pub fn learn(a: &LearnArgs) -> Result<()> {
    if a.iterations == 0 {
        return Err(CliError::Usage("--iterations must be at least 1".into()));
    }
    let model: PrompModel = read_json(&a.model, "model")?;
    let mut oracle: OracleUser = read_json(&a.oracle, "oracle")?;
    let cfg = loop_config(a.config.as_deref())?;
    let contexts = a
        .scenario
        .iter()
        .map(|p| {
            let scenario: Scenario = read_json(p, "scenario")?;
            let id = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok(LoopContext { id, scenario })
        })
        .collect::<Result<Vec<_>>>()?;
    let d = contexts[0].scenario.context.state_dim();
    let bounds = WeightBounds::default();
    if !oracle.is_valid(&bounds) {
        return Err(CliError::Usage("oracle hidden weights lie outside the weight bounds".into()));
    }
    let mut state = LearningState::new(weights_or_initial(a.weights.as_deref(), d)?, bounds);
    let log = run_loop(&mut state, &contexts, &mut oracle, &model, &cfg, a.iterations, true)?;
    write_json(&a.out, &log)?;
    if let Some(p) = &a.weights_out {
        write_json(p, &state.weights)?;
    }
    let updates = log.iter().filter(|e| e.updated).count();
    println!(
        "{} iterations, {updates} updates, final e = {:.6}",
        log.len(),
        log.last().map_or(0.0, |e| e.e_i)
    );
    Ok(())
}

pub fn serve(a: &ServeArgs) -> Result<()> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Usage(e.to_string()))?;
    rt.block_on(coadapt_service::serve(&a.bind, a.snapshot_dir.clone(), a.static_dir.clone()))
        .map_err(|e| CliError::Usage(format!("serve: {e}")))
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Usage(format!("csv: {e}"))
}

pub fn plotdata(a: &PlotArgs) -> Result<()> {
    let log: Vec<LoopLogEntry> = read_json(&a.log, "loop log")?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", a.out.display())))?;

    let mut curve = csv::Writer::from_path(a.out.join("learning_curve.csv")).map_err(csv_error)?;
    curve
        .write_record(["i", "alpha", "e_i", "context_id", "updated", "feasible"])
        .map_err(csv_error)?;
    for e in &log {
        curve
            .write_record([
                e.i.to_string(),
                e.alpha.to_string(),
                e.e_i.to_string(),
                e.context_id.clone(),
                e.updated.to_string(),
                e.feasible.to_string(),
            ])
            .map_err(csv_error)?;
    }
    curve.flush().map_err(|e| CliError::Usage(e.to_string()))?;

    let mut paths = csv::Writer::from_path(a.out.join("paths.csv")).map_err(csv_error)?;
    let dim = log
        .iter()
        .find_map(|e| e.adapted.as_ref().map(|t| t.dim()))
        .unwrap_or(0);
    let mut header = vec!["i".to_string(), "kind".into(), "t".into()];
    header.extend((0..dim).map(|k| format!("y{k}")));
    paths.write_record(&header).map_err(csv_error)?;
    for e in &log {
        for (kind, tr) in [("adapted", &e.adapted), ("feedback", &e.feedback)] {
            let Some(tr) = tr else { continue };
            for t in 0..tr.len() {
                let mut row = vec![e.i.to_string(), kind.to_string(), t.to_string()];
                row.extend(tr.state(t).iter().map(|v| v.to_string()));
                paths.write_record(&row).map_err(csv_error)?;
            }
        }
    }
    paths.flush().map_err(|e| CliError::Usage(e.to_string()))?;
    println!("wrote {} log rows", log.len());
    Ok(())
}
