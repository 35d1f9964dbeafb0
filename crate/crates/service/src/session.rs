//! Sessions and the operations the API performs on them.

use std::collections::BTreeMap;

use coadapt_core::adaptation::check_feasibility_with;
use coadapt_core::learning::{feedback_id, ingest_feedback, HistoryEntry, UpdateReport};
use coadapt_core::promp::DEFAULT_RIDGE;
use coadapt_core::{
    adapt, fit_promp, scenario, update_weights, AdaptedTrajectory, BasisSystem, DemonstrationSet,
    Error, ImitationTrajectory, LearningState, LoopConfig, PrompModel, Result, RewardModel,
    RewardWeights, Scenario, Trajectory, WeightBounds,
};
use serde::{Deserialize, Serialize};

/// A trajectory kept by a session. Never modified after it is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StoredTrajectory {
    Imitation {
        iteration: usize,
        imitation: ImitationTrajectory,
    },
    Adapted {
        iteration: usize,
        adapted: AdaptedTrajectory,
    },
    Feedback {
        iteration: usize,
        /// As submitted, before resampling and clamping.
        raw: Trajectory,
        states: Trajectory,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub scenario: Scenario,
    pub model: Option<PrompModel>,
    pub config: LoopConfig,
    pub learning: LearningState,
    pub trajectories: BTreeMap<String, StoredTrajectory>,
    /// Ids of the latest imitation and adapted trajectories.
    pub imitation: Option<String>,
    pub adapted: Option<String>,
    seq: usize,
}

/// Body of `POST /sessions`.
#[derive(Debug, Clone, Deserialize)]
pub struct CreateSession {
    pub scenario: Scenario,
    #[serde(default)]
    pub model: Option<PrompModel>,
    #[serde(default)]
    pub weights: Option<RewardWeights>,
    #[serde(default)]
    pub bounds: Option<WeightBounds>,
    #[serde(default)]
    pub config: Option<LoopConfig>,
}

/// Body of `POST /sessions/{id}/demonstrations`.
#[derive(Debug, Clone, Deserialize)]
pub struct FitRequest {
    #[serde(flatten)]
    pub demonstrations: DemonstrationSet,
    #[serde(default = "default_basis")]
    pub n_basis: usize,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
}

fn default_basis() -> usize {
    10
}

fn default_ridge() -> f64 {
    DEFAULT_RIDGE
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub n_basis: usize,
    pub dim: usize,
    pub demonstrations: usize,
    pub sigma_y2: f64,
    pub degenerate_covariance: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImitateResponse {
    pub id: String,
    pub imitation: ImitationTrajectory,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptResponse {
    pub id: String,
    pub iteration: usize,
    pub adapted: AdaptedTrajectory,
    pub step_rewards: Vec<f64>,
    /// `clearances[t][k] = ‖E(y(t)) − O_k‖ − d_k`.
    pub clearances: Vec<Vec<f64>>,
}

/// Body of `POST /sessions/{id}/feedback`.
#[derive(Debug, Clone, Deserialize)]
pub struct FeedbackRequest {
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeedbackResponse {
    pub id: String,
    pub iteration: usize,
    pub alpha: f64,
    pub e_i: f64,
    pub weights: RewardWeights,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightsResponse {
    pub weights: RewardWeights,
    pub iteration: usize,
    pub bounds: WeightBounds,
    pub history: Vec<HistoryEntry>,
}

impl Session {
    pub fn create(id: String, req: CreateSession) -> Result<Session> {
        let ctx = &req.scenario.context;
        let violations = scenario::validate(ctx, &req.scenario.kinematics);
        if !violations.is_empty() {
            return Err(Error::InfeasibleScenario(violations));
        }
        let d = ctx.state_dim();
        let config = req.config.unwrap_or_default();
        config.adaptation.validate()?;
        let weights = req.weights.unwrap_or_else(|| RewardWeights::initial(d));
        weights.check_shape(d, ctx.spatial_dim)?;
        let bounds = req.bounds.unwrap_or_default();
        bounds.validate()?;
        if let Some(m) = &req.model {
            if m.d != d {
                return Err(Error::DimensionMismatch {
                    what: "model dimension",
                    expected: d,
                    found: m.d,
                });
            }
        }
        Ok(Session {
            id,
            scenario: req.scenario,
            model: req.model,
            config,
            learning: LearningState::new(weights, bounds),
            trajectories: BTreeMap::new(),
            imitation: None,
            adapted: None,
            seq: 0,
        })
    }

    fn next_id(&mut self, kind: &str) -> String {
        self.seq += 1;
        format!("{kind}-{}", self.seq)
    }

    pub fn fit(&mut self, req: FitRequest) -> Result<ModelSummary> {
        let set = &req.demonstrations;
        set.validate()?;
        if set.d != self.scenario.context.state_dim() {
            return Err(Error::DimensionMismatch {
                what: "demonstration dimension",
                expected: self.scenario.context.state_dim(),
                found: set.d,
            });
        }
        let model = fit_promp(&set.trajectories, &BasisSystem::uniform(req.n_basis), req.ridge)?;
        let summary = ModelSummary {
            n_basis: model.basis.n,
            dim: model.d,
            demonstrations: set.trajectories.len(),
            sigma_y2: model.sigma_y2,
            degenerate_covariance: model.degenerate_covariance,
        };
        self.model = Some(model);
        self.imitation = None;
        self.adapted = None;
        Ok(summary)
    }

    fn model(&self) -> Result<&PrompModel> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Invalid("session has no model; post demonstrations first".into()))
    }

    pub fn imitate(&mut self) -> Result<ImitateResponse> {
        let ctx = &self.scenario.context;
        let imitation = self.model()?.imitate(
            &ctx.start,
            &ctx.goal,
            self.config.conditioning_noise,
            self.config.adaptation.steps,
        )?;
        let id = self.next_id("imitation");
        self.trajectories.insert(
            id.clone(),
            StoredTrajectory::Imitation {
                iteration: self.learning.iteration,
                imitation: imitation.clone(),
            },
        );
        self.imitation = Some(id.clone());
        Ok(ImitateResponse { id, imitation })
    }

    fn current_imitation(&self) -> Option<&ImitationTrajectory> {
        match self.trajectories.get(self.imitation.as_ref()?)? {
            StoredTrajectory::Imitation { imitation, .. } => Some(imitation),
            _ => None,
        }
    }

    fn current_adapted(&self) -> Option<&AdaptedTrajectory> {
        match self.trajectories.get(self.adapted.as_ref()?)? {
            StoredTrajectory::Adapted { adapted, .. } => Some(adapted),
            _ => None,
        }
    }

    /// Adapts under the current weights, imitating first if needed.
    pub fn adapt(&mut self) -> Result<AdaptResponse> {
        if self.current_imitation().is_none() {
            self.imitate()?;
        }
        let imit = self.current_imitation().expect("imitation present").clone();
        let ctx = &self.scenario.context;
        let kin = &self.scenario.kinematics;
        let cfg = &self.config.adaptation;
        let adapted = adapt(&imit, ctx, kin, &self.learning.weights, cfg)?;
        let model = RewardModel::new(ctx, &imit, kin, cfg.deviation_sign)?;
        let step_rewards = model.step_rewards(&adapted.states, &self.learning.weights)?;
        let clearances = (0..adapted.states.len())
            .map(|t| {
                let p = kin.end_effector(&adapted.states.state(t))?;
                Ok(ctx
                    .obstacles
                    .iter()
                    .map(|o| {
                        let d2: f64 = p.iter().zip(&o.center).map(|(a, b)| (a - b).powi(2)).sum();
                        d2.sqrt() - o.radius
                    })
                    .collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let id = self.next_id("adapted");
        let iteration = self.learning.iteration;
        self.trajectories.insert(
            id.clone(),
            StoredTrajectory::Adapted {
                iteration,
                adapted: adapted.clone(),
            },
        );
        self.adapted = Some(id.clone());
        Ok(AdaptResponse {
            id,
            iteration,
            adapted,
            step_rewards,
            clearances,
        })
    }

    /// One learning step against the latest adapted trajectory.
    pub fn feedback(&mut self, req: FeedbackRequest) -> Result<FeedbackResponse> {
        let adapted = self
            .current_adapted()
            .ok_or_else(|| Error::Invalid("no adapted trajectory to give feedback on".into()))?
            .clone();
        let imit = self.current_imitation().expect("adapted implies imitation").clone();
        let ctx = &self.scenario.context;
        let kin = &self.scenario.kinematics;
        let cfg = &self.config.adaptation;
        let fb = ingest_feedback(&req.trajectory, cfg.steps, ctx)?;
        let model = RewardModel::new(ctx, &imit, kin, cfg.deviation_sign)?;
        let report: UpdateReport = update_weights(&mut self.learning, &adapted.states, &fb, &model)?;
        let target = imit.mean.state(imit.steps());
        let violations = check_feasibility_with(&fb, ctx, kin, &target, cfg.feas_tol, cfg.term_tol);
        if !violations.is_empty() {
            log::info!(
                "session {}: feedback {} violates {} constraint(s); accepted anyway",
                self.id,
                report.iteration,
                violations.len()
            );
        }
        let id = feedback_id(report.iteration);
        self.learning.history.push(HistoryEntry {
            context_id: self.id.clone(),
            feedback_id: Some(id.clone()),
            e_i: report.e_i,
        });
        self.trajectories.insert(
            id.clone(),
            StoredTrajectory::Feedback {
                iteration: report.iteration,
                raw: req.trajectory,
                states: fb,
            },
        );
        Ok(FeedbackResponse {
            id,
            iteration: self.learning.iteration,
            alpha: report.alpha,
            e_i: report.e_i,
            weights: report.after,
        })
    }

    pub fn weights(&self) -> WeightsResponse {
        WeightsResponse {
            weights: self.learning.weights.clone(),
            iteration: self.learning.iteration,
            bounds: self.learning.bounds,
            history: self.learning.history.clone(),
        }
    }
}
