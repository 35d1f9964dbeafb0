//! Synthetic user with hidden weights `w*`.
//!
//! The oracle looks at the adapted trajectory, builds a candidate it likes
//! better under its own reward `f*`, and hands it back only when the gain
//! is worth the trouble and the candidate is feasible.

use serde::{Deserialize, Serialize};

use crate::adaptation::{adapt, check_feasibility_with, AdaptationConfig, AdaptedTrajectory};
use crate::error::Result;
use crate::kinematics::KinematicModel;
use crate::learning::{FeedbackProvider, FeedbackRequest, WeightBounds};
use crate::promp::ImitationTrajectory;
use crate::rewards::{RewardModel, RewardWeights};
use crate::scenario::TaskContext;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleMode {
    /// Re-adapts under `w*` and proposes the result.
    FullOptimal,
    /// Nudges the shown trajectory uphill on `f*`, `step` state units at a
    /// time, at most `steps` times. The endpoints stay put.
    Perturbative { step: f64, steps: usize },
}

impl OracleMode {
    pub fn perturbative() -> Self {
        OracleMode::Perturbative { step: 0.01, steps: 25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleUser {
    pub hidden_weights: RewardWeights,
    /// Smallest gain in `f*` worth reporting.
    #[serde(default = "default_margin")]
    pub improvement_margin: f64,
    #[serde(default = "default_mode")]
    pub mode: OracleMode,
}

fn default_margin() -> f64 {
    1e-6
}

fn default_mode() -> OracleMode {
    OracleMode::FullOptimal
}

/// Feedback together with the oracle's own scores.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleFeedback {
    pub trajectory: Trajectory,
    pub reward_shown: f64,
    pub reward_feedback: f64,
}

impl OracleUser {
    pub fn new(hidden_weights: RewardWeights, improvement_margin: f64, mode: OracleMode) -> Self {
        OracleUser {
            hidden_weights,
            improvement_margin,
            mode,
        }
    }

    /// Whether `w*` lies in the box.
    pub fn is_valid(&self, bounds: &WeightBounds) -> bool {
        bounds.contains(&self.hidden_weights)
    }

    /// Proposes an improvement over `y`, or `None`.
    pub fn feedback(
        &self,
        y: &AdaptedTrajectory,
        ctx: &TaskContext,
        imit: &ImitationTrajectory,
        kin: &KinematicModel,
        cfg: &AdaptationConfig,
    ) -> Option<OracleFeedback> {
        match self.try_feedback(y, ctx, imit, kin, cfg) {
            Ok(fb) => fb,
            Err(e) => {
                log::debug!("oracle gives no feedback: {e}");
                None
            }
        }
    }

    fn try_feedback(
        &self,
        y: &AdaptedTrajectory,
        ctx: &TaskContext,
        imit: &ImitationTrajectory,
        kin: &KinematicModel,
        cfg: &AdaptationConfig,
    ) -> Result<Option<OracleFeedback>> {
        let model = RewardModel::new(ctx, imit, kin, cfg.deviation_sign)?;
        let w = &self.hidden_weights;
        let shown = model.total_reward(&y.states, w)?;
        let candidate = match &self.mode {
            OracleMode::FullOptimal => adapt(imit, ctx, kin, w, cfg)?.states,
            OracleMode::Perturbative { step, steps } => {
                self.perturb(&model, &y.states, ctx, kin, cfg, *step, *steps)?
            }
        };
        let better = model.total_reward(&candidate, w)?;
        if !(better > shown + self.improvement_margin) {
            return Ok(None);
        }
        let target = imit.mean.state(imit.steps());
        if !check_feasibility_with(&candidate, ctx, kin, &target, cfg.feas_tol, cfg.term_tol).is_empty() {
            return Ok(None);
        }
        Ok(Some(OracleFeedback {
            trajectory: candidate,
            reward_shown: shown,
            reward_feedback: better,
        }))
    }

    #[allow(clippy::too_many_arguments)]
    fn perturb(
        &self,
        model: &RewardModel<'_>,
        y: &Trajectory,
        ctx: &TaskContext,
        kin: &KinematicModel,
        cfg: &AdaptationConfig,
        step: f64,
        steps: usize,
    ) -> Result<Trajectory> {
        let w = &self.hidden_weights;
        let last = y.len() - 1;
        let terminal = y.state(last);
        let mut cur = y.clone();
        let mut f = model.total_reward(&cur, w)?;
        for _ in 0..steps {
            let mut g = model.gradient(&cur, w)?;
            g.row_mut(0).fill(0.0);
            g.row_mut(last).fill(0.0);
            let scale = (0..g.nrows()).map(|t| g.row(t).norm()).fold(0.0, f64::max);
            if !(scale > 0.0) {
                break;
            }
            let mut next = Trajectory::from_matrix(cur.as_matrix() + g * (step / scale));
            next.clamp(&ctx.workspace.lo, &ctx.workspace.hi);
            let fn_ = model.total_reward(&next, w)?;
            let ok = check_feasibility_with(&next, ctx, kin, &terminal, cfg.feas_tol, cfg.term_tol).is_empty();
            if !(fn_ > f) || !ok {
                break;
            }
            cur = next;
            f = fn_;
        }
        Ok(cur)
    }
}

impl FeedbackProvider for OracleUser {
    fn feedback(&mut self, r: &FeedbackRequest<'_>) -> Result<Option<Trajectory>> {
        Ok(OracleUser::feedback(self, r.adapted, r.context, r.imitation, r.kinematics, r.config)
            .map(|fb| fb.trajectory))
    }
}
