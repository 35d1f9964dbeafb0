//! Probabilistic movement primitives.
//!
//! Each state dimension is a linear combination of `n` Gaussian basis
//! functions of normalized time. The weights of all dimensions are stacked
//! into one `n·d` vector with a Gaussian prior learned from demonstrations,
//! which can then be conditioned on new start and goal states.

use log::warn;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::trajectory::Trajectory;

/// Lower bound applied to the fitted observation noise.
pub const SIGMA_Y2_FLOOR: f64 = 1e-8;

/// Default ridge regularizer for per-demonstration weight regression.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Gaussian basis functions over normalized time `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSystem {
    pub n: usize,
    pub centers: Vec<f64>,
    pub width: f64,
    pub normalize: bool,
}

impl BasisSystem {
    /// `n` normalized bases with centers spread evenly over `[0, 1]`
    /// (endpoints included) and bandwidth `1 / (n - 1)`.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "basis needs at least one function");
        let (centers, width) = if n == 1 {
            (vec![0.5], 1.0)
        } else {
            let h = 1.0 / (n - 1) as f64;
            ((0..n).map(|j| j as f64 * h).collect(), h)
        };
        BasisSystem {
            n,
            centers,
            width,
            normalize: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.centers.len() != self.n {
            return Err(Error::Invalid(format!(
                "basis declares n = {} but has {} centers",
                self.n,
                self.centers.len()
            )));
        }
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(Error::OutOfDomain {
                what: "basis width",
                value: self.width,
                domain: "(0, inf)",
            });
        }
        if self.centers.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Invalid("basis centers must be strictly increasing".into()));
        }
        Ok(())
    }

    /// The feature vector `ψ(t)`.
    pub fn features(&self, t: f64) -> Result<DVector<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain {
                what: "normalized time",
                value: t,
                domain: "[0, 1]",
            });
        }
        Ok(self.features_unchecked(t))
    }

    fn features_unchecked(&self, t: f64) -> DVector<f64> {
        let two_h2 = 2.0 * self.width * self.width;
        let mut v = DVector::from_iterator(
            self.n,
            self.centers.iter().map(|c| (-(t - c).powi(2) / two_h2).exp()),
        );
        if self.normalize {
            let s = v.sum();
            v /= s;
        }
        v
    }

    /// Design matrix with one row `ψ(k / steps)ᵀ` per step `k = 0..=steps`.
    pub fn design(&self, steps: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(steps + 1, self.n);
        for k in 0..=steps {
            let psi = self.features_unchecked(normalized_time(k, steps));
            m.row_mut(k).copy_from(&psi.transpose());
        }
        m
    }
}

fn normalized_time(k: usize, steps: usize) -> f64 {
    if steps == 0 {
        0.0
    } else {
        k as f64 / steps as f64
    }
}

/// Block-diagonal `Ψ(t)` of shape `(n·d) × d`, so that `y(t) = Ψ(t)ᵀ w`.
pub fn basis_matrix(basis: &BasisSystem, t: f64, d: usize) -> Result<DMatrix<f64>> {
    let psi = basis.features(t)?;
    Ok(block_diag(&psi, d))
}

fn block_diag(psi: &DVector<f64>, d: usize) -> DMatrix<f64> {
    let n = psi.len();
    let mut m = DMatrix::zeros(n * d, d);
    for i in 0..d {
        m.view_mut((i * n, i), (n, 1)).copy_from(psi);
    }
    m
}

/// One demonstrated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Demonstration {
    pub states: Trajectory,
}

/// Demonstration file contents: `{"d": .., "trajectories": [[[..]..]..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemonstrationSet {
    pub d: usize,
    pub trajectories: Vec<Demonstration>,
}

impl DemonstrationSet {
    pub fn validate(&self) -> Result<()> {
        if self.trajectories.is_empty() {
            return Err(Error::Invalid("demonstration set is empty".into()));
        }
        for demo in &self.trajectories {
            check_dim("demonstration state", self.d, demo.states.dim())?;
        }
        Ok(())
    }

    /// Resamples every demonstration onto `steps + 1` points.
    pub fn resampled(&self, steps: usize) -> DemonstrationSet {
        DemonstrationSet {
            d: self.d,
            trajectories: self
                .trajectories
                .iter()
                .map(|demo| Demonstration {
                    states: demo.states.resample(steps),
                })
                .collect(),
        }
    }
}

/// Gaussian distribution over basis weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct PrompModel {
    pub basis: BasisSystem,
    pub d: usize,
    pub mu_w: DVector<f64>,
    pub sigma_w: DMatrix<f64>,
    pub sigma_y2: f64,
    /// Set when fewer than two demonstrations were available, in which case
    /// `sigma_w` is only the ridge prior.
    pub degenerate_covariance: bool,
}

/// On-disk layout of [`PrompModel`]; `sigma_w` is stored row-major.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    basis: BasisSystem,
    d: usize,
    mu_w: Vec<f64>,
    sigma_w: Vec<f64>,
    sigma_y2: f64,
    #[serde(default)]
    degenerate_covariance: bool,
}

impl TryFrom<ModelFile> for PrompModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        f.basis.validate()?;
        let nd = f.basis.n * f.d;
        check_dim("mu_w", nd, f.mu_w.len())?;
        check_dim("sigma_w", nd * nd, f.sigma_w.len())?;
        if !(f.sigma_y2 > 0.0) {
            return Err(Error::OutOfDomain {
                what: "sigma_y2",
                value: f.sigma_y2,
                domain: "(0, inf)",
            });
        }
        Ok(PrompModel {
            basis: f.basis,
            d: f.d,
            mu_w: DVector::from_vec(f.mu_w),
            sigma_w: DMatrix::from_row_slice(nd, nd, &f.sigma_w),
            sigma_y2: f.sigma_y2,
            degenerate_covariance: f.degenerate_covariance,
        })
    }
}

impl From<PrompModel> for ModelFile {
    fn from(m: PrompModel) -> Self {
        let nd = m.sigma_w.nrows();
        let mut flat = Vec::with_capacity(nd * nd);
        for r in 0..nd {
            flat.extend(m.sigma_w.row(r).iter());
        }
        ModelFile {
            basis: m.basis,
            d: m.d,
            mu_w: m.mu_w.as_slice().to_vec(),
            sigma_w: flat,
            sigma_y2: m.sigma_y2,
            degenerate_covariance: m.degenerate_covariance,
        }
    }
}

/// Cholesky factorization, adding increasing diagonal jitter until it
/// succeeds. Returns the factor and the jitter that was needed.
pub(crate) fn robust_cholesky(m: &DMatrix<f64>) -> (Cholesky<f64, Dyn>, f64) {
    if let Some(c) = m.clone().cholesky() {
        return (c, 0.0);
    }
    let scale = m.diagonal().amax().max(1.0);
    let mut jitter = 1e-12 * scale;
    loop {
        let shifted = m + DMatrix::identity(m.nrows(), m.ncols()) * jitter;
        if let Some(c) = shifted.cholesky() {
            return (c, jitter);
        }
        jitter *= 10.0;
    }
}

/// Fits a weight distribution to demonstrations.
///
/// Every demonstration is regressed on its own normalized time grid with a
/// ridge-regularized least squares solve per dimension. The weight mean and
/// covariance are the sample statistics across demonstrations; `ridge` is
/// added to the covariance diagonal.
pub fn fit_promp(demos: &[Demonstration], basis: &BasisSystem, ridge: f64) -> Result<PrompModel> {
    basis.validate()?;
    let first = demos
        .first()
        .ok_or_else(|| Error::Invalid("at least one demonstration is required".into()))?;
    let d = first.states.dim();
    let n = basis.n;
    for demo in demos {
        check_dim("demonstration state", d, demo.states.dim())?;
        if demo.states.steps() < n {
            return Err(Error::Invalid(format!(
                "demonstration has {} steps but the basis has {n} functions",
                demo.states.steps()
            )));
        }
    }

    let mut weights = Vec::with_capacity(demos.len());
    let mut sq_resid = 0.0;
    let mut count = 0usize;
    for demo in demos {
        let phi = basis.design(demo.states.steps());
        let mut gram = phi.transpose() * &phi;
        for j in 0..n {
            gram[(j, j)] += ridge;
        }
        let (chol, _) = robust_cholesky(&gram);
        let mut w = DVector::zeros(n * d);
        for i in 0..d {
            let y = demo.states.column(i).into_owned();
            let wi = chol.solve(&(phi.transpose() * &y));
            let resid = &y - &phi * &wi;
            sq_resid += resid.norm_squared();
            count += resid.len();
            w.rows_mut(i * n, n).copy_from(&wi);
        }
        weights.push(w);
    }

    let count_demos = weights.len() as f64;
    let mu_w = weights.iter().fold(DVector::zeros(n * d), |acc, w| acc + w) / count_demos;
    let degenerate = weights.len() < 2;
    let mut sigma_w = if degenerate {
        warn!("fewer than two demonstrations: degenerate covariance, using ridge prior only");
        DMatrix::zeros(n * d, n * d)
    } else {
        let mut s = DMatrix::zeros(n * d, n * d);
        for w in &weights {
            let c = w - &mu_w;
            s += &c * c.transpose();
        }
        s / (count_demos - 1.0)
    };
    for j in 0..n * d {
        sigma_w[(j, j)] += ridge;
    }
    let sigma_y2 = (sq_resid / count as f64).max(SIGMA_Y2_FLOOR);

    Ok(PrompModel {
        basis: basis.clone(),
        d,
        mu_w,
        sigma_w,
        sigma_y2,
        degenerate_covariance: degenerate,
    })
}

/// Desired start and goal states with their observation covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningObservation {
    pub y0: DVector<f64>,
    pub y_t: DVector<f64>,
    pub sigma_obs: DMatrix<f64>,
}

impl ConditioningObservation {
    /// Observation with isotropic accuracy `eps · I`.
    pub fn isotropic(y0: &[f64], y_t: &[f64], eps: f64) -> Self {
        let d = y0.len();
        ConditioningObservation {
            y0: DVector::from_column_slice(y0),
            y_t: DVector::from_column_slice(y_t),
            sigma_obs: DMatrix::identity(d, d) * eps,
        }
    }
}

impl PrompModel {
    /// Returns the model conditioned on observing `obs.y0` at normalized
    /// time 0 and `obs.y_t` at normalized time 1.
    pub fn condition(&self, obs: &ConditioningObservation) -> Result<PrompModel> {
        let d = self.d;
        check_dim("start state", d, obs.y0.len())?;
        check_dim("goal state", d, obs.y_t.len())?;
        check_dim("observation covariance rows", d, obs.sigma_obs.nrows())?;
        check_dim("observation covariance cols", d, obs.sigma_obs.ncols())?;

        let nd = self.basis.n * d;
        let mut psi_star = DMatrix::zeros(nd, 2 * d);
        psi_star
            .columns_mut(0, d)
            .copy_from(&block_diag(&self.basis.features_unchecked(0.0), d));
        psi_star
            .columns_mut(d, d)
            .copy_from(&block_diag(&self.basis.features_unchecked(1.0), d));

        let mut y_star = DVector::zeros(2 * d);
        y_star.rows_mut(0, d).copy_from(&obs.y0);
        y_star.rows_mut(d, d).copy_from(&obs.y_t);

        let mut innovation = psi_star.transpose() * &self.sigma_w * &psi_star;
        for (r0, c0) in [(0, 0), (d, d)] {
            let mut block = innovation.view_mut((r0, c0), (d, d));
            block += &obs.sigma_obs;
        }

        let (chol, jitter) = robust_cholesky(&innovation);
        if jitter > 0.0 {
            warn!("singular innovation matrix in conditioning, added jitter {jitter:e}");
        }
        // gain = Σ_w Ψ* S⁻¹, computed as (S⁻¹ Ψ*ᵀ Σ_w)ᵀ with S symmetric.
        let cross = psi_star.transpose() * &self.sigma_w;
        let gain_t = chol.solve(&cross);
        let resid = &y_star - psi_star.transpose() * &self.mu_w;
        let mu_w = &self.mu_w + gain_t.transpose() * resid;
        let mut sigma_w = &self.sigma_w - gain_t.transpose() * cross;
        symmetrize(&mut sigma_w);

        Ok(PrompModel {
            basis: self.basis.clone(),
            d,
            mu_w,
            sigma_w,
            sigma_y2: self.sigma_y2,
            degenerate_covariance: self.degenerate_covariance,
        })
    }

    /// Per-step mean and marginal variance on `steps + 1` points.
    pub fn trajectory_distribution(&self, steps: usize) -> Result<ImitationTrajectory> {
        if steps < 2 {
            return Err(Error::OutOfDomain {
                what: "trajectory steps",
                value: steps as f64,
                domain: "[2, inf)",
            });
        }
        let n = self.basis.n;
        let d = self.d;
        let mut mean = Trajectory::zeros(steps + 1, d);
        let mut variance = Trajectory::zeros(steps + 1, d);
        for k in 0..=steps {
            let psi = self.basis.features_unchecked(normalized_time(k, steps));
            for i in 0..d {
                let mu = self.mu_w.rows(i * n, n);
                let block = self.sigma_w.view((i * n, i * n), (n, n));
                mean.set(k, i, psi.dot(&mu));
                let var = (psi.transpose() * block * &psi)[(0, 0)];
                variance.set(k, i, var.max(0.0) + self.sigma_y2);
            }
        }
        Ok(ImitationTrajectory { mean, variance })
    }

    /// Conditions on `start`/`goal` with accuracy `eps · I` and evaluates
    /// the resulting distribution.
    pub fn imitate(
        &self,
        start: &[f64],
        goal: &[f64],
        eps: f64,
        steps: usize,
    ) -> Result<ImitationTrajectory> {
        self.condition(&ConditioningObservation::isotropic(start, goal, eps))?
            .trajectory_distribution(steps)
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Mean `y_D(t)` and per-dimension variance `σ_i²(t)` of a trajectory
/// distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImitationTrajectory {
    pub mean: Trajectory,
    pub variance: Trajectory,
}

impl ImitationTrajectory {
    pub fn steps(&self) -> usize {
        self.mean.steps()
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    /// A deterministic path with zero variance, useful when the imitation
    /// comes from somewhere other than a fitted model.
    pub fn deterministic(mean: Trajectory) -> Self {
        let variance = Trajectory::zeros(mean.len(), mean.dim());
        ImitationTrajectory { mean, variance }
    }
}
