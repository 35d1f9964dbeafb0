//! Task context: obstacles, workspace geometry and boundary states.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kinematics::KinematicModel;

/// Obstacle class used when an obstacle carries no label.
pub const DEFAULT_CLASS: &str = "default";

/// A spherical obstacle with safety radius `radius` around `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(default)]
    pub label: String,
}

impl Obstacle {
    /// Key under which preference weights for this obstacle are stored.
    pub fn class(&self) -> &str {
        if self.label.is_empty() {
            DEFAULT_CLASS
        } else {
            &self.label
        }
    }
}

/// Table surface point, left/right borders, border safety distance and the
/// box limits on the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub surface: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub d_min: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskContext {
    pub spatial_dim: usize,
    pub obstacles: Vec<Obstacle>,
    pub workspace: Workspace,
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
    #[serde(default)]
    pub object_label: String,
}

impl TaskContext {
    /// State dimension implied by the start state.
    pub fn state_dim(&self) -> usize {
        self.start.len()
    }
}

/// Scenario file contents: a task context plus the kinematics that map its
/// states into space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub context: TaskContext,
    pub kinematics: KinematicModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    DimensionMismatch {
        field: String,
        expected: usize,
        found: usize,
    },
    InvalidKinematics {
        message: String,
    },
    LimitsInverted {
        dim: usize,
    },
    NonPositiveDMin {
        value: f64,
    },
    NonPositiveRadius {
        obstacle: usize,
        value: f64,
    },
    StartOutsideLimits {
        dim: usize,
        value: f64,
    },
    GoalOutsideLimits {
        dim: usize,
        value: f64,
    },
    StartInCollision {
        obstacle: usize,
        penetration: f64,
    },
    GoalInCollision {
        obstacle: usize,
        penetration: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch {
                field,
                expected,
                found,
            } => write!(f, "{field} has dimension {found}, expected {expected}"),
            Violation::InvalidKinematics { message } => write!(f, "kinematics: {message}"),
            Violation::LimitsInverted { dim } => write!(f, "limits inverted in dimension {dim}"),
            Violation::NonPositiveDMin { value } => write!(f, "d_min = {value} is not positive"),
            Violation::NonPositiveRadius { obstacle, value } => {
                write!(f, "obstacle {obstacle} radius {value} is not positive")
            }
            Violation::StartOutsideLimits { dim, value } => {
                write!(f, "start[{dim}] = {value} outside limits")
            }
            Violation::GoalOutsideLimits { dim, value } => {
                write!(f, "goal[{dim}] = {value} outside limits")
            }
            Violation::StartInCollision {
                obstacle,
                penetration,
            } => write!(f, "start-in-collision with obstacle {obstacle} (depth {penetration})"),
            Violation::GoalInCollision {
                obstacle,
                penetration,
            } => write!(f, "goal-in-collision with obstacle {obstacle} (depth {penetration})"),
        }
    }
}

fn dim_check(out: &mut Vec<Violation>, field: &str, expected: usize, found: usize) -> bool {
    if expected != found {
        out.push(Violation::DimensionMismatch {
            field: field.to_string(),
            expected,
            found,
        });
        false
    } else {
        true
    }
}

/// Distance from a point to an obstacle center.
pub(crate) fn distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Lists everything that makes `ctx` unusable with `kin`. An empty list
/// means the scenario is well formed.
pub fn validate(ctx: &TaskContext, kin: &KinematicModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let d = ctx.state_dim();
    let s = ctx.spatial_dim;
    let ws = &ctx.workspace;

    let mut shapes_ok = dim_check(&mut out, "goal", d, ctx.goal.len());
    shapes_ok &= dim_check(&mut out, "workspace.lo", d, ws.lo.len());
    shapes_ok &= dim_check(&mut out, "workspace.hi", d, ws.hi.len());
    dim_check(&mut out, "workspace.surface", s, ws.surface.len());
    dim_check(&mut out, "workspace.b1", s, ws.b1.len());
    dim_check(&mut out, "workspace.b2", s, ws.b2.len());
    for (k, o) in ctx.obstacles.iter().enumerate() {
        dim_check(&mut out, &format!("obstacles[{k}].center"), s, o.center.len());
    }
    let kin_ok = match kin.validate(d) {
        Ok(()) => dim_check(&mut out, "kinematics output", s, kin.spatial_dim(d)),
        Err(e) => {
            out.push(Violation::InvalidKinematics {
                message: e.to_string(),
            });
            false
        }
    };

    if !(ws.d_min > 0.0) {
        out.push(Violation::NonPositiveDMin { value: ws.d_min });
    }
    for (k, o) in ctx.obstacles.iter().enumerate() {
        if !(o.radius > 0.0) {
            out.push(Violation::NonPositiveRadius {
                obstacle: k,
                value: o.radius,
            });
        }
    }
    if !shapes_ok {
        return out;
    }
    for i in 0..d {
        if !(ws.lo[i] < ws.hi[i]) {
            out.push(Violation::LimitsInverted { dim: i });
        }
    }
    for i in 0..d {
        if !(ws.lo[i]..=ws.hi[i]).contains(&ctx.start[i]) {
            out.push(Violation::StartOutsideLimits {
                dim: i,
                value: ctx.start[i],
            });
        }
    }
    for i in 0..d {
        if !(ws.lo[i]..=ws.hi[i]).contains(&ctx.goal[i]) {
            out.push(Violation::GoalOutsideLimits {
                dim: i,
                value: ctx.goal[i],
            });
        }
    }
    if !kin_ok {
        return out;
    }
    let e_start = kin.end_effector_unchecked(&ctx.start);
    let e_goal = kin.end_effector_unchecked(&ctx.goal);
    for (k, o) in ctx.obstacles.iter().enumerate() {
        if o.center.len() != s {
            continue;
        }
        let ds = distance(&e_start, &o.center);
        if ds < o.radius {
            out.push(Violation::StartInCollision {
                obstacle: k,
                penetration: o.radius - ds,
            });
        }
        let dg = distance(&e_goal, &o.center);
        if dg < o.radius {
            out.push(Violation::GoalInCollision {
                obstacle: k,
                penetration: o.radius - dg,
            });
        }
    }
    out
}
