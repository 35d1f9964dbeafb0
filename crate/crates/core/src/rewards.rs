//! Imitation, control and response rewards.
//!
//! The reward of a trajectory is linear in its weights, `f = wᵀφ`, where
//! `φ` stacks the whole-trajectory features. The same quantity is also
//! available as a sum of per-step rewards `f_t`, which is what the
//! receding-horizon solver optimizes over a window of steps.
//!
//! Obstacle preference weights are keyed by obstacle class (its label), so
//! preferences learned for one "bowl" apply to every bowl in later scenes.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kinematics::KinematicModel;
use crate::promp::ImitationTrajectory;
use crate::scenario::{distance, TaskContext};
use crate::trajectory::Trajectory;

/// Weights `w = [w_D, w_C, w_E]` with `w_E` split into per-class obstacle
/// weights (avoid-distance followed by the preferred deviation direction),
/// the border weight and the surface weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub w_d: Vec<f64>,
    pub w_c: f64,
    #[serde(default)]
    pub w_o: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub w_b: f64,
    #[serde(default)]
    pub w_s: f64,
}

impl RewardWeights {
    /// `w_D = 30·1`, `w_C = 10`, `w_E = 0`.
    pub fn initial(d: usize) -> Self {
        RewardWeights {
            w_d: vec![30.0; d],
            w_c: 10.0,
            w_o: BTreeMap::new(),
            w_b: 0.0,
            w_s: 0.0,
        }
    }

    pub fn zeros(d: usize) -> Self {
        RewardWeights {
            w_d: vec![0.0; d],
            w_c: 0.0,
            w_o: BTreeMap::new(),
            w_b: 0.0,
            w_s: 0.0,
        }
    }

    pub fn check_shape(&self, d: usize, spatial_dim: usize) -> Result<()> {
        check_dim("w_D", d, self.w_d.len())?;
        for (class, w) in &self.w_o {
            if w.len() != spatial_dim + 1 {
                return Err(Error::Invalid(format!(
                    "w_O[{class}] has {} entries, expected {}",
                    w.len(),
                    spatial_dim + 1
                )));
            }
        }
        Ok(())
    }

    /// `wᵀφ`. Classes missing on either side contribute nothing.
    pub fn dot(&self, phi: &FeatureVector) -> f64 {
        let mut s: f64 = self.w_d.iter().zip(&phi.phi_d).map(|(a, b)| a * b).sum();
        s += self.w_c * phi.phi_c;
        for (class, f) in &phi.phi_o {
            if let Some(w) = self.w_o.get(class) {
                s += w.iter().zip(f).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        s + self.w_b * phi.phi_b + self.w_s * phi.phi_s
    }

    /// `w + α·Δ`. Classes present only in `delta` are added, starting at 0.
    pub fn add_scaled(&self, delta: &FeatureVector, alpha: f64) -> RewardWeights {
        let mut out = self.clone();
        for (w, f) in out.w_d.iter_mut().zip(&delta.phi_d) {
            *w += alpha * f;
        }
        out.w_c += alpha * delta.phi_c;
        for (class, f) in &delta.phi_o {
            let w = out
                .w_o
                .entry(class.clone())
                .or_insert_with(|| vec![0.0; f.len()]);
            for (wi, fi) in w.iter_mut().zip(f) {
                *wi += alpha * fi;
            }
        }
        out.w_b += alpha * delta.phi_b;
        out.w_s += alpha * delta.phi_s;
        out
    }

    /// `2·self`, handy for linearity checks.
    pub fn scaled(&self, k: f64) -> RewardWeights {
        RewardWeights {
            w_d: self.w_d.iter().map(|w| w * k).collect(),
            w_c: self.w_c * k,
            w_o: self
                .w_o
                .iter()
                .map(|(c, w)| (c.clone(), w.iter().map(|x| x * k).collect()))
                .collect(),
            w_b: self.w_b * k,
            w_s: self.w_s * k,
        }
    }
}

/// Whole-trajectory features `φ_D`, `φ_C`, `φ_E` in the layout of
/// [`RewardWeights`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub phi_d: Vec<f64>,
    pub phi_c: f64,
    pub phi_o: BTreeMap<String, Vec<f64>>,
    pub phi_b: f64,
    pub phi_s: f64,
}

impl FeatureVector {
    /// `self − other`, over the union of obstacle classes.
    pub fn difference(&self, other: &FeatureVector) -> FeatureVector {
        let mut phi_o = self.phi_o.clone();
        for (class, f) in &other.phi_o {
            let e = phi_o
                .entry(class.clone())
                .or_insert_with(|| vec![0.0; f.len()]);
            for (a, b) in e.iter_mut().zip(f) {
                *a -= b;
            }
        }
        FeatureVector {
            phi_d: self.phi_d.iter().zip(&other.phi_d).map(|(a, b)| a - b).collect(),
            phi_c: self.phi_c - other.phi_c,
            phi_o,
            phi_b: self.phi_b - other.phi_b,
            phi_s: self.phi_s - other.phi_s,
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.phi_d.iter().map(|x| x * x).sum::<f64>()
            + self.phi_c * self.phi_c
            + self
                .phi_o
                .values()
                .flat_map(|v| v.iter())
                .map(|x| x * x)
                .sum::<f64>()
            + self.phi_b * self.phi_b
            + self.phi_s * self.phi_s
    }

    pub fn is_zero(&self) -> bool {
        self.norm_squared() == 0.0
    }
}

/// Weights resolved against one context: obstacle weights are looked up
/// per obstacle rather than per class.
pub(crate) struct ResolvedWeights {
    pub w_d: Vec<f64>,
    pub w_c: f64,
    pub w_o: Vec<Option<Vec<f64>>>,
    pub w_b: f64,
    pub w_s: f64,
}

impl ResolvedWeights {
    fn has_response(&self) -> bool {
        self.w_b != 0.0
            || self.w_s != 0.0
            || self
                .w_o
                .iter()
                .flatten()
                .any(|w| w.iter().any(|x| *x != 0.0))
    }
}

/// Reward evaluation for one (context, imitation, kinematics) triple.
pub struct RewardModel<'a> {
    pub ctx: &'a TaskContext,
    pub imit: &'a ImitationTrajectory,
    pub kin: &'a KinematicModel,
    /// Multiplies the deviation part of the obstacle features. `+1` uses
    /// `E(y_D) − E(y)`; `−1` flips it.
    pub deviation_sign: f64,
    ee_imit: Vec<Vec<f64>>,
    var_factor: DMatrix<f64>,
}

impl<'a> RewardModel<'a> {
    pub fn new(
        ctx: &'a TaskContext,
        imit: &'a ImitationTrajectory,
        kin: &'a KinematicModel,
        deviation_sign: f64,
    ) -> Result<Self> {
        let d = imit.dim();
        kin.validate(d)?;
        check_dim("kinematics output", ctx.spatial_dim, kin.spatial_dim(d))?;
        check_dim("imitation variance rows", imit.mean.len(), imit.variance.len())?;
        let ee_imit = (0..imit.mean.len())
            .map(|t| kin.end_effector_unchecked(&imit.mean.state(t)))
            .collect();
        let var_factor = imit.variance.as_matrix().map(|v| (-v).exp());
        Ok(RewardModel {
            ctx,
            imit,
            kin,
            deviation_sign,
            ee_imit,
            var_factor,
        })
    }

    pub fn len(&self) -> usize {
        self.imit.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_traj(&self, y: &Trajectory) -> Result<()> {
        check_dim("trajectory length", self.len(), y.len())?;
        check_dim("trajectory state", self.imit.dim(), y.dim())
    }

    pub(crate) fn resolve(&self, w: &RewardWeights) -> Result<ResolvedWeights> {
        w.check_shape(self.imit.dim(), self.ctx.spatial_dim)?;
        Ok(ResolvedWeights {
            w_d: w.w_d.clone(),
            w_c: w.w_c,
            w_o: self
                .ctx
                .obstacles
                .iter()
                .map(|o| w.w_o.get(o.class()).cloned())
                .collect(),
            w_b: w.w_b,
            w_s: w.w_s,
        })
    }

    /// `φ_{D,i} = −Σ_t (y_i(t) − y_{D,i}(t))² e^{−σ_i²(t)}`.
    pub fn imitation_features(&self, y: &Trajectory) -> Result<Vec<f64>> {
        self.check_traj(y)?;
        let mean = &self.imit.mean;
        Ok((0..y.dim())
            .map(|i| {
                -(0..y.len())
                    .map(|t| (y.get(t, i) - mean.get(t, i)).powi(2) * self.var_factor[(t, i)])
                    .sum::<f64>()
            })
            .collect())
    }

    /// Obstacle, border and surface features, negated and summed over steps.
    pub fn response_features(&self, y: &Trajectory) -> Result<(BTreeMap<String, Vec<f64>>, f64, f64)> {
        self.check_traj(y)?;
        let s = self.ctx.spatial_dim;
        let ws = &self.ctx.workspace;
        let mut phi_o: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for o in &self.ctx.obstacles {
            phi_o.entry(o.class().to_string()).or_insert_with(|| vec![0.0; s + 1]);
        }
        let (mut phi_b, mut phi_s) = (0.0, 0.0);
        for t in 0..y.len() {
            let p = self.kin.end_effector_unchecked(&y.state(t));
            let q = &self.ee_imit[t];
            for o in &self.ctx.obstacles {
                let rho = distance(&p, &o.center);
                let e = (-rho * rho / o.radius).exp();
                let acc = phi_o.get_mut(o.class()).expect("class registered above");
                acc[0] -= -rho * e;
                for j in 0..s {
                    acc[j + 1] -= self.deviation_sign * (q[j] - p[j]) * e;
                }
            }
            phi_b -= [&ws.b1, &ws.b2]
                .iter()
                .map(|b| (-distance(&p, b).powi(2) / ws.d_min).exp())
                .sum::<f64>();
            phi_s -= distance(&p, &ws.surface).powi(2);
        }
        Ok((phi_o, phi_b, phi_s))
    }

    pub fn features(&self, y: &Trajectory) -> Result<FeatureVector> {
        let phi_d = self.imitation_features(y)?;
        let phi_c = control_feature(y)?;
        let (phi_o, phi_b, phi_s) = self.response_features(y)?;
        Ok(FeatureVector {
            phi_d,
            phi_c,
            phi_o,
            phi_b,
            phi_s,
        })
    }

    /// `f(y; w) = wᵀφ(y)`.
    pub fn total_reward(&self, y: &Trajectory, w: &RewardWeights) -> Result<f64> {
        w.check_shape(self.imit.dim(), self.ctx.spatial_dim)?;
        Ok(w.dot(&self.features(y)?))
    }

    /// Per-step rewards `f_t`, `t = 0..=T`. They sum to [`total_reward`](Self::total_reward).
    pub fn step_rewards(&self, y: &Trajectory, w: &RewardWeights) -> Result<Vec<f64>> {
        self.check_traj(y)?;
        let rw = self.resolve(w)?;
        Ok((0..y.len())
            .map(|t| self.window(y.as_matrix(), t, t, &rw, None))
            .collect())
    }

    /// `∂f/∂y(t)` for every step, shape `(T+1) × d`.
    pub fn gradient(&self, y: &Trajectory, w: &RewardWeights) -> Result<DMatrix<f64>> {
        self.check_traj(y)?;
        let rw = self.resolve(w)?;
        let mut g = DMatrix::zeros(y.len(), y.dim());
        self.window(y.as_matrix(), 0, y.len() - 1, &rw, Some(&mut g));
        Ok(g)
    }

    /// `Σ_{t=from}^{to} f_t(y)`; accumulates its gradient into `grad` when
    /// given. Rows of `y` are states; the control term of step `from`
    /// reaches back to row `from − 1`.
    pub(crate) fn window(
        &self,
        y: &DMatrix<f64>,
        from: usize,
        to: usize,
        w: &ResolvedWeights,
        mut grad: Option<&mut DMatrix<f64>>,
    ) -> f64 {
        let d = y.ncols();
        let mean = self.imit.mean.as_matrix();
        let response = w.has_response();
        let mut total = 0.0;
        let mut state = vec![0.0; d];
        for t in from..=to {
            for i in 0..d {
                let diff = y[(t, i)] - mean[(t, i)];
                let k = w.w_d[i] * self.var_factor[(t, i)];
                total -= k * diff * diff;
                if let Some(g) = grad.as_deref_mut() {
                    g[(t, i)] -= 2.0 * k * diff;
                }
            }
            if t >= 1 && w.w_c != 0.0 {
                for i in 0..d {
                    let diff = y[(t, i)] - y[(t - 1, i)];
                    total -= w.w_c * diff * diff;
                    if let Some(g) = grad.as_deref_mut() {
                        g[(t, i)] -= 2.0 * w.w_c * diff;
                        g[(t - 1, i)] += 2.0 * w.w_c * diff;
                    }
                }
            }
            if response {
                for i in 0..d {
                    state[i] = y[(t, i)];
                }
                let p = self.kin.end_effector_unchecked(&state);
                let (value, gp) = self.response_step(&p, &self.ee_imit[t], w, grad.is_some());
                total += value;
                if let Some(g) = grad.as_deref_mut() {
                    let jac = self.kin.jacobian_unchecked(&state);
                    for i in 0..d {
                        g[(t, i)] += (0..p.len()).map(|j| jac[(j, i)] * gp[j]).sum::<f64>();
                    }
                }
            }
        }
        total
    }

    /// `f_{E,t}` at end-effector point `p` and its gradient with respect to `p`.
    fn response_step(
        &self,
        p: &[f64],
        q: &[f64],
        w: &ResolvedWeights,
        want_grad: bool,
    ) -> (f64, Vec<f64>) {
        let s = p.len();
        let ws = &self.ctx.workspace;
        let sign = self.deviation_sign;
        // inner = Σ_k w_Oᵀφ_O + w_B φ_B + w_S φ_S ; f_E = −inner
        let mut inner = 0.0;
        let mut gi = vec![0.0; if want_grad { s } else { 0 }];
        for (o, wo) in self.ctx.obstacles.iter().zip(&w.w_o) {
            let Some(wo) = wo else { continue };
            let r: Vec<f64> = p.iter().zip(&o.center).map(|(a, b)| a - b).collect();
            let rho = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            let e = (-rho * rho / o.radius).exp();
            let a = wo[0];
            let h = -a * rho
                + sign * (0..s).map(|j| wo[j + 1] * (q[j] - p[j])).sum::<f64>();
            inner += e * h;
            if want_grad {
                for j in 0..s {
                    let drho = if rho > 0.0 { r[j] / rho } else { 0.0 };
                    let dh = -a * drho - sign * wo[j + 1];
                    let de = e * (-2.0 * r[j] / o.radius);
                    gi[j] += de * h + e * dh;
                }
            }
        }
        if w.w_b != 0.0 {
            for b in [&ws.b1, &ws.b2] {
                let dist2 = distance(p, b).powi(2);
                let e = (-dist2 / ws.d_min).exp();
                inner += w.w_b * e;
                if want_grad {
                    for j in 0..s {
                        gi[j] += w.w_b * e * (-2.0 * (p[j] - b[j]) / ws.d_min);
                    }
                }
            }
        }
        if w.w_s != 0.0 {
            inner += w.w_s * distance(p, &ws.surface).powi(2);
            if want_grad {
                for j in 0..s {
                    gi[j] += 2.0 * w.w_s * (p[j] - ws.surface[j]);
                }
            }
        }
        for g in gi.iter_mut() {
            *g = -*g;
        }
        (-inner, gi)
    }
}

/// See [`RewardModel::imitation_features`].
pub fn imitation_features(y: &Trajectory, imit: &ImitationTrajectory) -> Result<Vec<f64>> {
    check_dim("trajectory length", imit.mean.len(), y.len())?;
    check_dim("trajectory state", imit.dim(), y.dim())?;
    Ok((0..y.dim())
        .map(|i| {
            -(0..y.len())
                .map(|t| {
                    (y.get(t, i) - imit.mean.get(t, i)).powi(2) * (-imit.variance.get(t, i)).exp()
                })
                .sum::<f64>()
        })
        .collect())
}

/// `φ_C = −Σ_{t≥1} ‖y(t) − y(t−1)‖²`.
pub fn control_feature(y: &Trajectory) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::Invalid("control feature needs at least two states".into()));
    }
    let m = y.as_matrix();
    Ok(-(1..y.len())
        .map(|t| (m.row(t) - m.row(t - 1)).norm_squared())
        .sum::<f64>())
}

/// See [`RewardModel::response_features`]; uses the `+1` deviation sign.
pub fn response_features(
    y: &Trajectory,
    ctx: &TaskContext,
    imit: &ImitationTrajectory,
    kin: &KinematicModel,
) -> Result<(BTreeMap<String, Vec<f64>>, f64, f64)> {
    RewardModel::new(ctx, imit, kin, 1.0)?.response_features(y)
}

pub fn total_reward(
    y: &Trajectory,
    ctx: &TaskContext,
    imit: &ImitationTrajectory,
    kin: &KinematicModel,
    w: &RewardWeights,
) -> Result<f64> {
    RewardModel::new(ctx, imit, kin, 1.0)?.total_reward(y, w)
}

pub fn reward_gradient(
    y: &Trajectory,
    ctx: &TaskContext,
    imit: &ImitationTrajectory,
    kin: &KinematicModel,
    w: &RewardWeights,
) -> Result<DMatrix<f64>> {
    RewardModel::new(ctx, imit, kin, 1.0)?.gradient(y, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Obstacle, Workspace};
    use approx::assert_relative_eq;

    fn ctx_2d(obstacles: Vec<Obstacle>) -> TaskContext {
        TaskContext {
            spatial_dim: 2,
            obstacles,
            workspace: Workspace {
                surface: vec![0.0, 0.0],
                b1: vec![0.0, 0.8],
                b2: vec![0.0, -0.8],
                d_min: 0.1,
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
            },
            start: vec![0.0, 0.0],
            goal: vec![0.0, 0.0],
            object_label: String::new(),
        }
    }

    #[test]
    fn imitation_on_mean_is_zero() {
        let imit = ImitationTrajectory::deterministic(Trajectory::linear(&[0.0, 0.0], &[1.0, 1.0], 5));
        assert_eq!(imitation_features(&imit.mean, &imit).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn imitation_single_gap() {
        let imit = ImitationTrajectory::deterministic(Trajectory::linear(&[0.0], &[0.0], 3));
        let mut y = imit.mean.clone();
        y.set(2, 0, 0.3);
        let phi = imitation_features(&y, &imit).unwrap();
        assert_relative_eq!(phi[0], -0.09, epsilon = 1e-15);
        let short = Trajectory::linear(&[0.0], &[0.0], 2);
        assert!(imitation_features(&short, &imit).is_err());
    }

    #[test]
    fn control_feature_examples() {
        assert_eq!(control_feature(&Trajectory::linear(&[0.3], &[0.3], 4)).unwrap(), 0.0);
        let y = Trajectory::from_rows(&[vec![0.0, 0.0], vec![0.3, 0.4]]).unwrap();
        assert_relative_eq!(control_feature(&y).unwrap(), -0.25, epsilon = 1e-15);
        assert!(control_feature(&Trajectory::zeros(1, 2)).is_err());
    }

    #[test]
    fn far_obstacles_vanish() {
        let ctx = ctx_2d(vec![Obstacle {
            center: vec![0.0, 0.0],
            radius: 1.0,
            label: "bowl".into(),
        }]);
        // every state sits 10·d_k from the obstacle
        let y = Trajectory::from_rows(&[vec![10.0, 0.0], vec![0.0, 10.0], vec![-10.0, 0.0]]).unwrap();
        let imit = ImitationTrajectory::deterministic(y.clone());
        let (phi_o, _, _) = response_features(&y, &ctx, &imit, &KinematicModel::Identity).unwrap();
        for v in &phi_o["bowl"] {
            assert!(v.abs() < 1e-20);
        }
    }

    #[test]
    fn surface_feature_vanishes_on_surface() {
        let ctx = ctx_2d(vec![]);
        let y = Trajectory::linear(&[0.0, 0.0], &[0.0, 0.0], 4);
        let imit = ImitationTrajectory::deterministic(y.clone());
        let (_, _, phi_s) = response_features(&y, &ctx, &imit, &KinematicModel::Identity).unwrap();
        assert_eq!(phi_s, 0.0);
    }

    #[test]
    fn single_step_hand_placed_geometry() {
        // Frozen from a scratch evaluation of the three formulas at
        // p = (0.3, 0.2), E(y_D) = (0.25, 0.1), O = (0.4, 0.25), d_k = 0.1.
        let ctx = ctx_2d(vec![Obstacle {
            center: vec![0.4, 0.25],
            radius: 0.1,
            label: "bowl".into(),
        }]);
        let y = Trajectory::from_rows(&[vec![0.3, 0.2]]).unwrap();
        let imit = ImitationTrajectory::deterministic(Trajectory::from_rows(&[vec![0.25, 0.1]]).unwrap());
        let (phi_o, phi_b, phi_s) =
            response_features(&y, &ctx, &imit, &KinematicModel::Identity).unwrap();
        let o = &phi_o["bowl"];
        assert_relative_eq!(o[0], 0.09866615320560827, max_relative = 1e-13);
        assert_relative_eq!(o[1], 0.044124845129229755, max_relative = 1e-13);
        assert_relative_eq!(o[2], 0.08824969025845954, max_relative = 1e-13);
        assert_relative_eq!(phi_b, -0.011127454772238067, max_relative = 1e-13);
        assert_relative_eq!(phi_s, -0.13, max_relative = 1e-13);
    }

    #[test]
    fn zero_and_doubled_weights() {
        let ctx = ctx_2d(vec![Obstacle {
            center: vec![0.5, 0.1],
            radius: 0.1,
            label: "bowl".into(),
        }]);
        let imit = ImitationTrajectory::deterministic(Trajectory::linear(&[0.0, 0.0], &[1.0, 0.0], 10));
        let mut y = imit.mean.clone();
        y.set(5, 1, 0.05);
        let kin = KinematicModel::Identity;
        let zero = RewardWeights::zeros(2);
        assert_eq!(total_reward(&y, &ctx, &imit, &kin, &zero).unwrap(), 0.0);
        let mut w = RewardWeights::initial(2);
        w.w_o.insert("bowl".into(), vec![1.0, 0.0, 2.0]);
        w.w_s = 0.5;
        let f1 = total_reward(&y, &ctx, &imit, &kin, &w).unwrap();
        let f2 = total_reward(&y, &ctx, &imit, &kin, &w.scaled(2.0)).unwrap();
        assert_relative_eq!(f2, 2.0 * f1, max_relative = 1e-14);
    }

    #[test]
    fn gradient_zero_at_imitation() {
        let ctx = ctx_2d(vec![]);
        let imit = ImitationTrajectory::deterministic(Trajectory::linear(&[0.0, 0.0], &[1.0, 0.5], 6));
        let mut w = RewardWeights::initial(2);
        w.w_c = 0.0;
        let g = reward_gradient(&imit.mean, &ctx, &imit, &KinematicModel::Identity, &w).unwrap();
        assert_eq!(g.amax(), 0.0);
    }

    #[test]
    fn control_gradient_matches_hand_derivative() {
        // f = −w_C[(y1−y0)² + (y2−y1)²]
        // ∂f/∂y0 = 2w_C(y1−y0), ∂f/∂y1 = −2w_C(y1−y0) + 2w_C(y2−y1), ∂f/∂y2 = −2w_C(y2−y1)
        let ctx = TaskContext {
            spatial_dim: 1,
            obstacles: vec![],
            workspace: Workspace {
                surface: vec![0.0],
                b1: vec![1.0],
                b2: vec![-1.0],
                d_min: 0.1,
                lo: vec![-1.0],
                hi: vec![1.0],
            },
            start: vec![0.0],
            goal: vec![0.0],
            object_label: String::new(),
        };
        let y = Trajectory::from_rows(&[vec![0.1], vec![0.5], vec![0.2]]).unwrap();
        let imit = ImitationTrajectory::deterministic(y.clone());
        let w = RewardWeights {
            w_d: vec![0.0],
            w_c: 3.0,
            w_o: BTreeMap::new(),
            w_b: 0.0,
            w_s: 0.0,
        };
        let g = reward_gradient(&y, &ctx, &imit, &KinematicModel::Identity, &w).unwrap();
        assert_relative_eq!(g[(0, 0)], 2.4, epsilon = 1e-12);
        assert_relative_eq!(g[(1, 0)], -2.4 - 1.8, epsilon = 1e-12);
        assert_relative_eq!(g[(2, 0)], 1.8, epsilon = 1e-12);
    }
}
