//! Learning movement primitives from demonstrations, adapting them to new
//! scenes by receding-horizon reward maximization, and learning the reward
//! weights online from preference feedback.

pub mod adaptation;
pub mod error;
pub mod kinematics;
pub mod learning;
pub mod oracle;
pub mod promp;
pub mod rewards;
pub mod scenario;
pub mod synthetic;
pub mod trajectory;

pub use adaptation::{adapt, solve_horizon, AdaptationConfig, AdaptedTrajectory};
pub use error::{Error, Result};
pub use kinematics::KinematicModel;
pub use learning::{
    learning_error, project_weights, run_loop, update_weights, FeedbackProvider, LearningState,
    LoopConfig, LoopContext, LoopLogEntry, WeightBounds,
};
pub use oracle::{OracleMode, OracleUser};
pub use promp::{
    basis_matrix, fit_promp, BasisSystem, ConditioningObservation, Demonstration,
    DemonstrationSet, ImitationTrajectory, PrompModel,
};
pub use rewards::{FeatureVector, RewardModel, RewardWeights};
pub use scenario::{Obstacle, Scenario, TaskContext, Violation, Workspace};
pub use trajectory::Trajectory;
