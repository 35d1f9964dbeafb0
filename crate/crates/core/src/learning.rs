//! Co-active weight learning from feedback trajectories.
//!
//! Every piece of feedback `ȳ` moves the weights along the feature
//! difference `Δ = φ(ȳ) − φ(y)` with step `α = 1/√(i+1)`, after which the
//! weights are clamped back into their bound box.

use serde::{Deserialize, Serialize};

use crate::adaptation::{adapt, AdaptationConfig, AdaptedTrajectory};
use crate::error::{check_dim, Error, Result};
use crate::kinematics::KinematicModel;
use crate::promp::{ImitationTrajectory, PrompModel};
use crate::rewards::{FeatureVector, RewardModel, RewardWeights};
use crate::scenario::{self, Scenario, TaskContext};
use crate::trajectory::Trajectory;

/// Closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

/// Feasible weight box. Every component of a block shares its interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightBounds {
    pub w_d: Interval,
    pub w_c: Interval,
    /// First entry of each obstacle-class weight.
    pub avoid: Interval,
    /// Remaining entries of each obstacle-class weight.
    pub direction: Interval,
    pub w_b: Interval,
    pub w_s: Interval,
}

impl Default for WeightBounds {
    fn default() -> Self {
        WeightBounds {
            w_d: Interval::new(1.0, 100.0),
            w_c: Interval::new(1.0, 100.0),
            avoid: Interval::new(0.0, 100.0),
            direction: Interval::new(-100.0, 100.0),
            w_b: Interval::new(0.0, 100.0),
            w_s: Interval::new(0.0, 100.0),
        }
    }
}

impl WeightBounds {
    pub fn validate(&self) -> Result<()> {
        let all = [self.w_d, self.w_c, self.avoid, self.direction, self.w_b, self.w_s];
        if all.iter().all(|i| i.lo <= i.hi) {
            Ok(())
        } else {
            Err(Error::Invalid("weight bounds need lo <= hi".into()))
        }
    }

    pub fn contains(&self, w: &RewardWeights) -> bool {
        project_weights(w, self) == *w
    }
}

/// Euclidean projection onto the box, i.e. componentwise clamping.
pub fn project_weights(w: &RewardWeights, bounds: &WeightBounds) -> RewardWeights {
    RewardWeights {
        w_d: w.w_d.iter().map(|&v| bounds.w_d.clamp(v)).collect(),
        w_c: bounds.w_c.clamp(w.w_c),
        w_o: w
            .w_o
            .iter()
            .map(|(class, v)| {
                let clamped = v
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| if j == 0 { bounds.avoid.clamp(x) } else { bounds.direction.clamp(x) })
                    .collect();
                (class.clone(), clamped)
            })
            .collect(),
        w_b: bounds.w_b.clamp(w.w_b),
        w_s: bounds.w_s.clamp(w.w_s),
    }
}

/// Learning rate at iteration `i`.
pub fn learning_rate(i: usize) -> f64 {
    1.0 / ((i + 1) as f64).sqrt()
}

/// `e = (1/T) Σ_t Σ_i (ȳ_i(t) − y_i(t))²`.
pub fn learning_error(fb: &Trajectory, y: &Trajectory) -> Result<f64> {
    check_dim("feedback length", y.len(), fb.len())?;
    check_dim("feedback dimension", y.dim(), fb.dim())?;
    if y.steps() == 0 {
        return Err(Error::Invalid("learning error needs at least two states".into()));
    }
    let sum: f64 = (fb.as_matrix() - y.as_matrix()).iter().map(|v| v * v).sum();
    Ok(sum / y.steps() as f64)
}

/// Brings raw feedback onto `steps + 1` states and inside the limits.
pub fn ingest_feedback(raw: &Trajectory, steps: usize, ctx: &TaskContext) -> Result<Trajectory> {
    check_dim("feedback dimension", ctx.state_dim(), raw.dim())?;
    if raw.len() < 2 {
        return Err(Error::Invalid(format!(
            "feedback needs at least 2 states, got {}",
            raw.len()
        )));
    }
    let mut fb = raw.resample(steps);
    fb.clamp(&ctx.workspace.lo, &ctx.workspace.hi);
    Ok(fb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub context_id: String,
    pub feedback_id: Option<String>,
    pub e_i: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningState {
    pub weights: RewardWeights,
    pub iteration: usize,
    #[serde(default)]
    pub bounds: WeightBounds,
    #[serde(default)]
    pub history: Vec<HistoryEntry>,
}

impl LearningState {
    pub fn new(weights: RewardWeights, bounds: WeightBounds) -> Self {
        LearningState {
            weights,
            iteration: 0,
            bounds,
            history: Vec::new(),
        }
    }

    /// Starts from the initial weights for a `d`-dimensional state.
    pub fn initial(d: usize) -> Self {
        Self::new(RewardWeights::initial(d), WeightBounds::default())
    }
}

/// Everything one update did, kept for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub iteration: usize,
    pub alpha: f64,
    /// `φ(ȳ) − φ(y)`.
    pub delta: FeatureVector,
    pub before: RewardWeights,
    /// `w + α·Δ` before projection.
    pub raw: RewardWeights,
    pub after: RewardWeights,
    pub e_i: f64,
}

/// One co-active step: `w ← Π_C(w + α(φ(ȳ) − φ(y)))`, then `i ← i + 1`.
///
/// `y` is the adapted trajectory the user saw, `fb` the feedback already
/// ingested to the same shape.
pub fn update_weights(
    state: &mut LearningState,
    y: &Trajectory,
    fb: &Trajectory,
    model: &RewardModel<'_>,
) -> Result<UpdateReport> {
    let e_i = learning_error(fb, y)?;
    let delta = model.features(fb)?.difference(&model.features(y)?);
    let alpha = learning_rate(state.iteration);
    let before = state.weights.clone();
    let (raw, after) = if delta.is_zero() {
        (before.clone(), before.clone())
    } else {
        let raw = before.add_scaled(&delta, alpha);
        let after = project_weights(&raw, &state.bounds);
        (raw, after)
    };
    let report = UpdateReport {
        iteration: state.iteration,
        alpha,
        delta,
        before,
        raw,
        after: after.clone(),
        e_i,
    };
    state.weights = after;
    state.iteration += 1;
    Ok(report)
}

/// Source of feedback trajectories for the learning loop.
pub trait FeedbackProvider {
    /// Returns the preferred trajectory, or `None` when the user is content.
    fn feedback(&mut self, request: &FeedbackRequest<'_>) -> Result<Option<Trajectory>>;
}

/// What a provider gets to see at one iteration.
pub struct FeedbackRequest<'a> {
    pub iteration: usize,
    pub context_id: &'a str,
    pub context: &'a TaskContext,
    pub kinematics: &'a KinematicModel,
    pub imitation: &'a ImitationTrajectory,
    pub adapted: &'a AdaptedTrajectory,
    pub weights: &'a RewardWeights,
    pub config: &'a AdaptationConfig,
}

/// Scenario tagged with an id for the loop log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopContext {
    pub id: String,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoopConfig {
    pub adaptation: AdaptationConfig,
    /// Isotropic observation noise used when conditioning on start/goal.
    pub conditioning_noise: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            adaptation: AdaptationConfig::default(),
            conditioning_noise: 1e-10,
        }
    }
}

/// One row of the loop log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopLogEntry {
    pub i: usize,
    pub alpha: f64,
    pub e_i: f64,
    pub weights: RewardWeights,
    pub context_id: String,
    /// Whether feedback arrived and the weights were updated.
    pub updated: bool,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Adapted and feedback paths, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adapted: Option<Trajectory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<Trajectory>,
}

/// Feedback ids used in the history, shared with the service.
pub fn feedback_id(iteration: usize) -> String {
    format!("feedback-{iteration}")
}

/// Runs `iterations` rounds of imitate, adapt, ask, update. Contexts are
/// visited cyclically. With `keep_paths` the log carries the adapted and
/// feedback trajectories.
#[allow(clippy::too_many_arguments)]
pub fn run_loop(
    state: &mut LearningState,
    contexts: &[LoopContext],
    provider: &mut dyn FeedbackProvider,
    model: &PrompModel,
    cfg: &LoopConfig,
    iterations: usize,
    keep_paths: bool,
) -> Result<Vec<LoopLogEntry>> {
    if iterations == 0 {
        return Err(Error::Invalid("the loop needs at least one iteration".into()));
    }
    if contexts.is_empty() {
        return Err(Error::Invalid("the loop needs at least one context".into()));
    }
    state.bounds.validate()?;
    for c in contexts {
        let v = scenario::validate(&c.scenario.context, &c.scenario.kinematics);
        if !v.is_empty() {
            return Err(Error::InfeasibleScenario(v));
        }
    }

    let acfg = &cfg.adaptation;
    let mut log = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let i = state.iteration;
        let lc = &contexts[i % contexts.len()];
        let ctx = &lc.scenario.context;
        let kin = &lc.scenario.kinematics;
        let imit = model.imitate(&ctx.start, &ctx.goal, cfg.conditioning_noise, acfg.steps)?;
        let adapted = adapt(&imit, ctx, kin, &state.weights, acfg)?;
        let request = FeedbackRequest {
            iteration: i,
            context_id: &lc.id,
            context: ctx,
            kinematics: kin,
            imitation: &imit,
            adapted: &adapted,
            weights: &state.weights,
            config: acfg,
        };
        let mut entry = LoopLogEntry {
            i,
            alpha: learning_rate(i),
            e_i: 0.0,
            weights: state.weights.clone(),
            context_id: lc.id.clone(),
            updated: false,
            feasible: adapted.feasible,
            error: None,
            adapted: keep_paths.then(|| adapted.states.clone()),
            feedback: None,
        };
        let fb = match provider.feedback(&request) {
            Ok(Some(raw)) => match ingest_feedback(&raw, acfg.steps, ctx) {
                Ok(fb) => Some(fb),
                Err(e) => {
                    entry.error = Some(e.to_string());
                    None
                }
            },
            Ok(None) => None,
            Err(e) => {
                log::warn!("feedback provider failed at iteration {i}: {e}");
                entry.error = Some(e.to_string());
                None
            }
        };
        match fb {
            Some(fb) => {
                let rm = RewardModel::new(ctx, &imit, kin, acfg.deviation_sign)?;
                let report = update_weights(state, &adapted.states, &fb, &rm)?;
                state.history.push(HistoryEntry {
                    context_id: lc.id.clone(),
                    feedback_id: Some(feedback_id(i)),
                    e_i: report.e_i,
                });
                entry.e_i = report.e_i;
                entry.updated = true;
                entry.weights = report.after;
                if keep_paths {
                    entry.feedback = Some(fb);
                }
            }
            None => {
                state.history.push(HistoryEntry {
                    context_id: lc.id.clone(),
                    feedback_id: None,
                    e_i: 0.0,
                });
                state.iteration += 1;
            }
        }
        log.push(entry);
    }
    Ok(log)
}

/// Replays the same feedback trajectory at every iteration.
pub struct FixedFeedback(pub Trajectory);

impl FeedbackProvider for FixedFeedback {
    fn feedback(&mut self, _: &FeedbackRequest<'_>) -> Result<Option<Trajectory>> {
        Ok(Some(self.0.clone()))
    }
}

/// Returns the adapted trajectory unchanged.
pub struct EchoFeedback;

impl FeedbackProvider for EchoFeedback {
    fn feedback(&mut self, request: &FeedbackRequest<'_>) -> Result<Option<Trajectory>> {
        Ok(Some(request.adapted.states.clone()))
    }
}
