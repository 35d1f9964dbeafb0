//! Discrete-time state sequences `y(0..=T)`.

use nalgebra::{DMatrix, DVectorView, RowDVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A sequence of `T + 1` states of dimension `d`, stored one state per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory(DMatrix<f64>);

impl Trajectory {
    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        Trajectory(m)
    }

    pub fn zeros(len: usize, dim: usize) -> Self {
        Trajectory(DMatrix::zeros(len, dim))
    }

    /// Builds a trajectory from row vectors. All rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Invalid("trajectory has no states".into()));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::Invalid("trajectory states have dimension 0".into()));
        }
        for (t, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::Invalid(format!(
                    "state {t} has dimension {} but state 0 has {d}",
                    r.len()
                )));
            }
            if let Some(i) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!("state {t} component {i} is not finite")));
            }
        }
        Ok(Trajectory(DMatrix::from_fn(rows.len(), d, |t, i| rows[t][i])))
    }

    /// Straight line from `a` to `b` with `steps + 1` states.
    pub fn linear(a: &[f64], b: &[f64], steps: usize) -> Self {
        assert_eq!(a.len(), b.len());
        Trajectory(DMatrix::from_fn(steps + 1, a.len(), |t, i| {
            let s = t as f64 / steps.max(1) as f64;
            a[i] + s * (b[i] - a[i])
        }))
    }

    /// Number of stored states (`T + 1`).
    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    /// Number of steps `T`.
    pub fn steps(&self) -> usize {
        self.0.nrows().saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn state(&self, t: usize) -> Vec<f64> {
        self.0.row(t).iter().copied().collect()
    }

    pub fn state_row(&self, t: usize) -> RowDVector<f64> {
        self.0.row(t).into_owned()
    }

    pub fn column(&self, i: usize) -> DVectorView<'_, f64> {
        self.0.column(i)
    }

    pub fn get(&self, t: usize, i: usize) -> f64 {
        self.0[(t, i)]
    }

    pub fn set(&mut self, t: usize, i: usize, v: f64) {
        self.0[(t, i)] = v;
    }

    pub fn set_state(&mut self, t: usize, s: &[f64]) {
        for (i, v) in s.iter().enumerate() {
            self.0[(t, i)] = *v;
        }
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|t| self.state(t)).collect()
    }

    /// Resamples onto `steps + 1` equally spaced points of normalized time
    /// by piecewise-linear interpolation. Endpoints are preserved exactly.
    pub fn resample(&self, steps: usize) -> Trajectory {
        let src = self.len();
        if src == steps + 1 {
            return self.clone();
        }
        let d = self.dim();
        if src == 1 {
            return Trajectory(DMatrix::from_fn(steps + 1, d, |_, i| self.0[(0, i)]));
        }
        let last = (src - 1) as f64;
        Trajectory(DMatrix::from_fn(steps + 1, d, |t, i| {
            if t == steps {
                return self.0[(src - 1, i)];
            }
            let pos = t as f64 / steps as f64 * last;
            let k = (pos.floor() as usize).min(src - 2);
            let frac = pos - k as f64;
            self.0[(k, i)] * (1.0 - frac) + self.0[(k + 1, i)] * frac
        }))
    }

    /// Clamps every state componentwise into `[lo, hi]`.
    pub fn clamp(&mut self, lo: &[f64], hi: &[f64]) {
        for t in 0..self.len() {
            for i in 0..self.dim() {
                self.0[(t, i)] = self.0[(t, i)].clamp(lo[i], hi[i]);
            }
        }
    }

    /// Largest per-step Euclidean distance to `other`.
    pub fn max_distance(&self, other: &Trajectory) -> f64 {
        (0..self.len())
            .map(|t| (self.0.row(t) - other.0.row(t)).norm())
            .fold(0.0, f64::max)
    }
}

impl Serialize for Trajectory {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Trajectory {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(de)?;
        Trajectory::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
