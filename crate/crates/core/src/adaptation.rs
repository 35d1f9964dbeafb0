//! Receding-horizon adaptation of the imitation trajectory.
//!
//! Dynamics are `z(t+1) = a·z(t) + a(t)` with `y = z` (B = C = I). Because
//! B is invertible, every state sequence is reachable, so each horizon is
//! solved over the future states and the actions are recovered afterwards
//! as `a(t) = y(t+1) − a·y(t)`. Only the first action of every horizon is
//! applied and the trajectory is advanced by replaying it through the
//! dynamics.
//!
//! Each horizon maximizes the reward minus penalties: obstacle clearance
//! violations are squared and weighted by a penalty `μ` that grows between
//! rounds (with multiplier estimates carried across rounds), the terminal
//! equality is a quadratic penalty, and the box limits are enforced by
//! projection. The inner iteration is a projected ascent step scaled by the
//! curvature of the quadratic terms, accepted by Armijo backtracking.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kinematics::KinematicModel;
use crate::promp::ImitationTrajectory;
use crate::rewards::{ResolvedWeights, RewardModel, RewardWeights};
use crate::scenario::{self, distance, TaskContext};
use crate::trajectory::Trajectory;

/// Tolerance on obstacle penetration and limit violations.
pub const FEAS_TOL: f64 = 1e-4;
/// Tolerance on the terminal error `‖y(T) − y_D(T)‖`.
pub const TERM_TOL: f64 = 1e-3;

const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptationConfig {
    /// Total steps `T`.
    pub steps: usize,
    /// Prediction horizon `Tp`.
    pub horizon: usize,
    /// `A = a_diag · I`.
    pub a_diag: f64,
    pub b_identity: bool,
    pub c_identity: bool,
    /// Inner iteration cap per penalty round.
    pub max_iter: usize,
    pub penalty_mu0: f64,
    pub penalty_growth: f64,
    /// Rounds always run before stopping on feasibility.
    pub penalty_rounds: usize,
    /// Hard cap on rounds when the horizon is still infeasible.
    pub max_penalty_rounds: usize,
    /// Weight of the terminal-equality penalty.
    pub terminal_weight: f64,
    /// Convergence tolerance on the largest state (action) change.
    pub tol: f64,
    pub feas_tol: f64,
    pub term_tol: f64,
    pub deviation_sign: f64,
    /// Keep whole segments between consecutive end-effector points clear of
    /// obstacles, not only the points themselves.
    pub swept_clearance: bool,
    /// Extra clearance the solver aims for beyond each safety radius.
    pub clearance_margin: f64,
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        AdaptationConfig {
            steps: 50,
            horizon: 11,
            a_diag: 0.9,
            b_identity: true,
            c_identity: true,
            max_iter: 200,
            penalty_mu0: 10.0,
            penalty_growth: 5.0,
            penalty_rounds: 3,
            max_penalty_rounds: 10,
            terminal_weight: 1e4,
            tol: 1e-10,
            feas_tol: FEAS_TOL,
            term_tol: TERM_TOL,
            deviation_sign: 1.0,
            swept_clearance: true,
            clearance_margin: 2.0 * FEAS_TOL,
        }
    }
}

impl AdaptationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 || self.horizon > self.steps {
            return Err(Error::Invalid(format!(
                "horizon {} must lie in [2, steps = {}]",
                self.horizon, self.steps
            )));
        }
        if !(self.a_diag > 0.0 && self.a_diag <= 1.0) {
            return Err(Error::OutOfDomain {
                what: "a_diag",
                value: self.a_diag,
                domain: "(0, 1]",
            });
        }
        if !self.b_identity || !self.c_identity {
            return Err(Error::Invalid("only B = C = I is supported".into()));
        }
        if !(self.tol > 0.0) || !(self.feas_tol > 0.0) || !(self.term_tol > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if !(self.penalty_mu0 > 0.0) || !(self.penalty_growth >= 1.0) {
            return Err(Error::Invalid("penalty schedule must be positive and non-decreasing".into()));
        }
        if self.terminal_weight < 1e4 {
            return Err(Error::OutOfDomain {
                what: "terminal_weight",
                value: self.terminal_weight,
                domain: "[1e4, inf)",
            });
        }
        Ok(())
    }
}

/// Result of one horizon solve.
#[derive(Debug, Clone)]
pub struct HorizonSolution {
    /// Planned states `y(i+1..=i+H)`, one per row.
    pub states: DMatrix<f64>,
    /// Planned actions `a(i..i+H)`, one per row.
    pub actions: DMatrix<f64>,
    pub feasible: bool,
    /// Largest obstacle penetration among the planned states, measured
    /// against the radius inflated by the clearance margin.
    pub max_penetration: f64,
    /// Terminal error if the horizon reaches `T`.
    pub terminal_error: Option<f64>,
    /// Penalty objective (final penalty parameters) of the warm start and of
    /// the returned iterate.
    pub warm_objective: f64,
    pub objective: f64,
    pub iterations: usize,
}

/// Output of [`adapt`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedTrajectory {
    pub states: Trajectory,
    pub actions: Trajectory,
    /// Per obstacle, `min_t ‖E(y(t)) − O_k‖ − d_k`.
    pub min_obstacle_clearance: Vec<f64>,
    pub terminal_error: f64,
    pub feasible: bool,
    pub violations: Vec<FeasibilityViolation>,
    /// Horizon solves that ended above tolerance.
    pub infeasible_horizons: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FeasibilityViolation {
    Limit { step: usize, dim: usize, magnitude: f64 },
    Obstacle { step: usize, obstacle: usize, magnitude: f64 },
    Terminal { step: usize, magnitude: f64 },
}

/// Per-step limit, obstacle and terminal violations, the terminal target
/// being the context goal.
pub fn check_feasibility(
    y: &Trajectory,
    ctx: &TaskContext,
    kin: &KinematicModel,
    feas_tol: f64,
) -> Vec<FeasibilityViolation> {
    check_feasibility_with(y, ctx, kin, &ctx.goal, feas_tol, TERM_TOL)
}

/// As [`check_feasibility`] with an explicit terminal target and tolerance.
pub fn check_feasibility_with(
    y: &Trajectory,
    ctx: &TaskContext,
    kin: &KinematicModel,
    terminal: &[f64],
    feas_tol: f64,
    term_tol: f64,
) -> Vec<FeasibilityViolation> {
    let mut out = Vec::new();
    let ws = &ctx.workspace;
    for t in 0..y.len() {
        let s = y.state(t);
        for (i, v) in s.iter().enumerate() {
            let over = (ws.lo[i] - v).max(v - ws.hi[i]);
            if over > feas_tol {
                out.push(FeasibilityViolation::Limit {
                    step: t,
                    dim: i,
                    magnitude: over,
                });
            }
        }
        let p = kin.end_effector_unchecked(&s);
        for (k, o) in ctx.obstacles.iter().enumerate() {
            let depth = o.radius - distance(&p, &o.center);
            if depth > feas_tol {
                out.push(FeasibilityViolation::Obstacle {
                    step: t,
                    obstacle: k,
                    magnitude: depth,
                });
            }
        }
    }
    if !y.is_empty() {
        let last = y.len() - 1;
        let err = distance(&y.state(last), terminal);
        if err > term_tol {
            out.push(FeasibilityViolation::Terminal {
                step: last,
                magnitude: err,
            });
        }
    }
    out
}

/// Per obstacle, the smallest clearance `‖E(y(t)) − O_k‖ − d_k` over all steps.
pub fn min_clearances(y: &Trajectory, ctx: &TaskContext, kin: &KinematicModel) -> Vec<f64> {
    let points: Vec<Vec<f64>> = (0..y.len())
        .map(|t| kin.end_effector_unchecked(&y.state(t)))
        .collect();
    ctx.obstacles
        .iter()
        .map(|o| {
            points
                .iter()
                .map(|p| distance(p, &o.center) - o.radius)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Penalty state of one horizon solve.
struct Penalty {
    mu: f64,
    /// Multipliers indexed `[row * n_obs + k]`.
    lambda: Vec<f64>,
    terminal: bool,
    terminal_weight: f64,
}

struct HorizonProblem<'m, 'a> {
    model: &'m RewardModel<'a>,
    weights: ResolvedWeights,
    /// First decision step `i + 1`.
    first: usize,
    rows: usize,
    d: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    target: Vec<f64>,
    z_i: Vec<f64>,
    swept: bool,
    margin: f64,
}

impl HorizonProblem<'_, '_> {
    fn n_obs(&self) -> usize {
        self.model.ctx.obstacles.len()
    }

    fn project(&self, x: &mut DVector<f64>) {
        for r in 0..self.rows {
            for i in 0..self.d {
                let j = r * self.d + i;
                x[j] = x[j].clamp(self.lo[i], self.hi[i]);
            }
        }
    }

    fn load(&self, buf: &mut DMatrix<f64>, x: &DVector<f64>) {
        for r in 0..self.rows {
            for i in 0..self.d {
                buf[(self.first + r, i)] = x[r * self.d + i];
            }
        }
    }

    fn row_state(&self, x: &DVector<f64>, r: usize) -> Vec<f64> {
        x.rows(r * self.d, self.d).iter().copied().collect()
    }

    /// End-effector point, and its Jacobian when asked for.
    fn point(&self, state: &[f64], want_jac: bool) -> (Vec<f64>, Option<DMatrix<f64>>) {
        let kin = self.model.kin;
        let p = kin.end_effector_unchecked(state);
        (p, want_jac.then(|| kin.jacobian_unchecked(state)))
    }

    /// Clearance violation `d_k + margin − dist` of constraint row `r`
    /// against obstacle `k`, with gradients with respect to the previous
    /// state (only when that state is a decision variable) and row `r`.
    ///
    /// With swept clearance `dist` is the distance from the obstacle center
    /// to the segment `E(y(t−1)) → E(y(t))`; otherwise to `E(y(t))`.
    fn obstacle_violation(
        &self,
        x: &DVector<f64>,
        r: usize,
        k: usize,
        want_grad: bool,
    ) -> (f64, Option<Vec<f64>>, Vec<f64>) {
        let o = &self.model.ctx.obstacles[k];
        let cur = self.row_state(x, r);
        let (b, jb) = self.point(&cur, want_grad);
        let prev = if r == 0 { self.z_i.clone() } else { self.row_state(x, r - 1) };
        let (a, ja) = if self.swept {
            self.point(&prev, want_grad && r > 0)
        } else {
            (b.clone(), None)
        };
        // closest point a + s (b − a) to the center
        let ab: Vec<f64> = b.iter().zip(&a).map(|(p, q)| p - q).collect();
        let len2: f64 = ab.iter().map(|v| v * v).sum();
        let sc = if self.swept && len2 > 0.0 {
            let proj: f64 = (0..ab.len()).map(|j| (o.center[j] - a[j]) * ab[j]).sum();
            (proj / len2).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let c: Vec<f64> = (0..ab.len()).map(|j| a[j] + sc * ab[j]).collect();
        let rv: Vec<f64> = c.iter().zip(&o.center).map(|(p, q)| p - q).collect();
        let rho = rv.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = o.radius + self.margin - rho;
        if !want_grad {
            return (v, None, Vec::new());
        }
        let unit: Vec<f64> = if rho > 1e-12 {
            rv.iter().map(|q| q / rho).collect()
        } else {
            // Dead center: push along the first spatial axis.
            let mut u = vec![0.0; rv.len()];
            u[0] = 1.0;
            u
        };
        let pull = |jac: &DMatrix<f64>, weight: f64| -> Vec<f64> {
            (0..self.d)
                .map(|i| -weight * (0..unit.len()).map(|j| jac[(j, i)] * unit[j]).sum::<f64>())
                .collect()
        };
        let g_cur = pull(jb.as_ref().expect("jacobian requested"), sc);
        let g_prev = ja.map(|j| pull(&j, 1.0 - sc));
        (v, g_prev, g_cur)
    }

    fn value(&self, buf: &mut DMatrix<f64>, x: &DVector<f64>, pen: &Penalty) -> f64 {
        self.load(buf, x);
        let last = self.first + self.rows - 1;
        let mut f = self.model.window(buf, self.first, last, &self.weights, None);
        let n_obs = self.n_obs();
        for r in 0..self.rows {
            for k in 0..n_obs {
                let (v, _, _) = self.obstacle_violation(x, r, k, false);
                let l = pen.lambda[r * n_obs + k];
                let m = (l + pen.mu * v).max(0.0);
                f -= (m * m - l * l) / (2.0 * pen.mu);
            }
        }
        if pen.terminal {
            let s = self.row_state(x, self.rows - 1);
            let e2: f64 = s.iter().zip(&self.target).map(|(a, b)| (a - b) * (a - b)).sum();
            f -= pen.terminal_weight * e2;
        }
        f
    }

    /// Value, gradient and a positive definite curvature model of the
    /// negated objective.
    fn eval(
        &self,
        buf: &mut DMatrix<f64>,
        x: &DVector<f64>,
        pen: &Penalty,
    ) -> (f64, DVector<f64>, DMatrix<f64>) {
        self.load(buf, x);
        let d = self.d;
        let n = self.rows * d;
        let last = self.first + self.rows - 1;
        let mut gfull = DMatrix::zeros(buf.nrows(), d);
        let mut f = self.model.window(buf, self.first, last, &self.weights, Some(&mut gfull));
        let mut g = DVector::zeros(n);
        for r in 0..self.rows {
            for i in 0..d {
                g[r * d + i] = gfull[(self.first + r, i)];
            }
        }
        let mut h = DMatrix::<f64>::zeros(n, n);
        let w = &self.weights;
        for r in 0..self.rows {
            let t = self.first + r;
            for i in 0..d {
                let j = r * d + i;
                h[(j, j)] += 2.0 * w.w_d[i] * (-self.model.imit.variance.get(t, i)).exp();
                h[(j, j)] += 2.0 * w.w_c;
                if r > 0 {
                    h[(j - d, j - d)] += 2.0 * w.w_c;
                    h[(j, j - d)] -= 2.0 * w.w_c;
                    h[(j - d, j)] -= 2.0 * w.w_c;
                }
            }
        }
        let n_obs = self.n_obs();
        for r in 0..self.rows {
            for k in 0..n_obs {
                let (v, dprev, dcur) = self.obstacle_violation(x, r, k, true);
                let l = pen.lambda[r * n_obs + k];
                let m = (l + pen.mu * v).max(0.0);
                f -= (m * m - l * l) / (2.0 * pen.mu);
                if m > 0.0 {
                    // Gauss-Newton block over (row r−1, row r).
                    let mut idx = Vec::with_capacity(2 * d);
                    let mut dv = Vec::with_capacity(2 * d);
                    if let Some(dp) = &dprev {
                        idx.extend((0..d).map(|a| (r - 1) * d + a));
                        dv.extend(dp.iter().copied());
                    }
                    idx.extend((0..d).map(|a| r * d + a));
                    dv.extend(dcur.iter().copied());
                    for (p, &ip) in idx.iter().enumerate() {
                        g[ip] -= m * dv[p];
                        for (q, &iq) in idx.iter().enumerate() {
                            h[(ip, iq)] += pen.mu * dv[p] * dv[q];
                        }
                    }
                }
            }
        }
        if pen.terminal {
            let r = self.rows - 1;
            for i in 0..d {
                let e = x[r * d + i] - self.target[i];
                f -= pen.terminal_weight * e * e;
                g[r * d + i] -= 2.0 * pen.terminal_weight * e;
                h[(r * d + i, r * d + i)] += 2.0 * pen.terminal_weight;
            }
        }
        let scale = h.diagonal().amax().max(1.0);
        for j in 0..n {
            h[(j, j)] += 1e-9 * scale;
        }
        (f, g, h)
    }

    /// Projected, curvature-scaled ascent with Armijo backtracking.
    /// Returns the final iterate and the number of iterations taken.
    fn ascend(
        &self,
        buf: &mut DMatrix<f64>,
        mut x: DVector<f64>,
        pen: &Penalty,
        max_iter: usize,
        tol: f64,
    ) -> (DVector<f64>, usize) {
        let n = x.len();
        let mut iters = 0;
        while iters < max_iter {
            iters += 1;
            let (f, g, h) = self.eval(buf, &x, pen);
            // Variables pinned at a bound with the gradient pushing outward
            // stay fixed for this step.
            let free: Vec<usize> = (0..n)
                .filter(|&j| {
                    let i = j % self.d;
                    let at_lo = x[j] <= self.lo[i] && g[j] < 0.0;
                    let at_hi = x[j] >= self.hi[i] && g[j] > 0.0;
                    !(at_lo || at_hi)
                })
                .collect();
            if free.is_empty() {
                break;
            }
            let hf = DMatrix::from_fn(free.len(), free.len(), |a, b| h[(free[a], free[b])]);
            let gf = DVector::from_iterator(free.len(), free.iter().map(|&j| g[j]));
            let step_f = match hf.clone().cholesky() {
                Some(c) => c.solve(&gf),
                None => DVector::from_fn(free.len(), |a, _| gf[a] / hf[(a, a)]),
            };
            let mut dir = DVector::zeros(n);
            for (a, &j) in free.iter().enumerate() {
                dir[j] = step_f[a];
            }

            let mut s = 1.0;
            let mut accepted = None;
            while s > 1e-14 {
                let mut xn = &x + &dir * s;
                self.project(&mut xn);
                let fn_ = self.value(buf, &xn, pen);
                let gain = g.dot(&(&xn - &x));
                if fn_ >= f + ARMIJO * gain && fn_ >= f {
                    accepted = Some(xn);
                    break;
                }
                s *= 0.5;
            }
            let Some(xn) = accepted else { break };
            let change = (&xn - &x).amax();
            x = xn;
            if change < tol {
                break;
            }
        }
        (x, iters)
    }
}

/// Solves the horizon that starts at step `i` in state `z_i`.
///
/// `warm` optionally provides an initial guess for the planned states
/// (`H × d`); without it the imitation trajectory is used.
pub fn solve_horizon(
    z_i: &[f64],
    i: usize,
    model: &RewardModel<'_>,
    w: &RewardWeights,
    cfg: &AdaptationConfig,
    warm: Option<&DMatrix<f64>>,
) -> Result<HorizonSolution> {
    let imit = model.imit;
    let steps = imit.steps();
    let d = imit.dim();
    check_dim("current state", d, z_i.len())?;
    if i + 1 > steps {
        return Err(Error::Invalid(format!("step {i} has no future within T = {steps}")));
    }
    let rows = cfg.horizon.min(steps - i);
    let ctx = model.ctx;
    let problem = HorizonProblem {
        model,
        weights: model.resolve(w)?,
        first: i + 1,
        rows,
        d,
        lo: ctx.workspace.lo.clone(),
        hi: ctx.workspace.hi.clone(),
        target: imit.mean.state(steps),
        z_i: z_i.to_vec(),
        swept: cfg.swept_clearance,
        margin: cfg.clearance_margin,
    };

    let mut buf = imit.mean.as_matrix().clone();
    for (c, v) in z_i.iter().enumerate() {
        buf[(i, c)] = *v;
    }
    let mut x0 = DVector::zeros(rows * d);
    for r in 0..rows {
        for c in 0..d {
            x0[r * d + c] = match warm {
                Some(wm) if r < wm.nrows() => wm[(r, c)],
                _ => imit.mean.get(i + 1 + r, c),
            };
        }
    }
    problem.project(&mut x0);

    let n_obs = ctx.obstacles.len();
    let mut pen = Penalty {
        mu: cfg.penalty_mu0,
        lambda: vec![0.0; rows * n_obs],
        terminal: i + rows == steps,
        terminal_weight: cfg.terminal_weight,
    };
    let mut x = x0.clone();
    let mut iterations = 0;
    let mut round = 0;
    loop {
        let (xn, it) = problem.ascend(&mut buf, x, &pen, cfg.max_iter, cfg.tol);
        x = xn;
        iterations += it;
        round += 1;
        let max_pen = max_penetration(&problem, &x);
        let term_ok = !pen.terminal || terminal_error(&problem, &x) <= cfg.term_tol;
        let feasible = max_pen <= cfg.feas_tol && term_ok;
        if (round >= cfg.penalty_rounds && feasible) || round >= cfg.max_penalty_rounds {
            break;
        }
        for r in 0..rows {
            for k in 0..n_obs {
                let (v, _, _) = problem.obstacle_violation(&x, r, k, false);
                let l = &mut pen.lambda[r * n_obs + k];
                *l = (*l + pen.mu * v).max(0.0);
            }
        }
        pen.mu *= cfg.penalty_growth;
        pen.terminal_weight = cfg.terminal_weight.max(pen.terminal_weight * cfg.penalty_growth);
    }

    let warm_objective = problem.value(&mut buf, &x0, &pen);
    let mut objective = problem.value(&mut buf, &x, &pen);
    if objective < warm_objective {
        x = x0;
        objective = warm_objective;
    }

    let max_pen = max_penetration(&problem, &x);
    let term_err = pen.terminal.then(|| terminal_error(&problem, &x));
    let feasible = max_pen <= cfg.feas_tol && term_err.is_none_or(|e| e <= cfg.term_tol);

    let states = DMatrix::from_fn(rows, d, |r, c| x[r * d + c]);
    let mut actions = DMatrix::zeros(rows, d);
    for r in 0..rows {
        for c in 0..d {
            let prev = if r == 0 { z_i[c] } else { states[(r - 1, c)] };
            actions[(r, c)] = states[(r, c)] - cfg.a_diag * prev;
        }
    }
    Ok(HorizonSolution {
        states,
        actions,
        feasible,
        max_penetration: max_pen,
        terminal_error: term_err,
        warm_objective,
        objective,
        iterations,
    })
}

fn max_penetration(p: &HorizonProblem<'_, '_>, x: &DVector<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..p.rows {
        for k in 0..p.n_obs() {
            worst = worst.max(p.obstacle_violation(x, r, k, false).0);
        }
    }
    worst
}

fn terminal_error(p: &HorizonProblem<'_, '_>, x: &DVector<f64>) -> f64 {
    distance(&p.row_state(x, p.rows - 1), &p.target)
}

/// Runs the receding-horizon loop from the context start state.
pub fn adapt(
    imit: &ImitationTrajectory,
    ctx: &TaskContext,
    kin: &KinematicModel,
    w: &RewardWeights,
    cfg: &AdaptationConfig,
) -> Result<AdaptedTrajectory> {
    cfg.validate()?;
    check_dim("imitation steps", cfg.steps, imit.steps())?;
    check_dim("imitation state", ctx.state_dim(), imit.dim())?;
    let violations = scenario::validate(ctx, kin);
    if !violations.is_empty() {
        return Err(Error::InfeasibleScenario(violations));
    }
    let model = RewardModel::new(ctx, imit, kin, cfg.deviation_sign)?;
    let steps = cfg.steps;
    let d = imit.dim();

    let mut states = Trajectory::zeros(steps + 1, d);
    let mut actions = Trajectory::zeros(steps, d);
    states.set_state(0, &ctx.start);
    let mut warm: Option<DMatrix<f64>> = None;
    let mut infeasible_horizons = 0;
    for i in 0..steps {
        let z = states.state(i);
        let sol = solve_horizon(&z, i, &model, w, cfg, warm.as_ref())?;
        if !sol.feasible {
            infeasible_horizons += 1;
        }
        for c in 0..d {
            let a = sol.actions[(0, c)];
            actions.set(i, c, a);
            states.set(i + 1, c, cfg.a_diag * z[c] + a);
        }
        // Shift the plan by one step; the new tail starts from the imitation.
        let rows_next = cfg.horizon.min(steps.saturating_sub(i + 1));
        warm = Some(DMatrix::from_fn(rows_next, d, |r, c| {
            if r + 1 < sol.states.nrows() {
                sol.states[(r + 1, c)]
            } else {
                imit.mean.get(i + 2 + r, c)
            }
        }));
    }

    let target = imit.mean.state(steps);
    let violations = check_feasibility_with(&states, ctx, kin, &target, cfg.feas_tol, cfg.term_tol);
    Ok(AdaptedTrajectory {
        min_obstacle_clearance: min_clearances(&states, ctx, kin),
        terminal_error: distance(&states.state(steps), &target),
        feasible: violations.is_empty(),
        violations,
        infeasible_horizons,
        states,
        actions,
    })
}

/// Rebuilds states from `y(0)` and actions through `z(t+1) = a·z(t) + a(t)`.
pub fn replay(start: &[f64], actions: &Trajectory, a_diag: f64) -> Trajectory {
    let mut y = Trajectory::zeros(actions.len() + 1, start.len());
    y.set_state(0, start);
    for t in 0..actions.len() {
        for c in 0..start.len() {
            y.set(t + 1, c, a_diag * y.get(t, c) + actions.get(t, c));
        }
    }
    y
}
