//! Maps a state vector to the end-effector point used by collision and
//! response terms.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Forward kinematics model.
///
/// `Identity` treats the state as the end-effector point. `PlanarChain` is a
/// serial chain of revolute joints in the xy-plane rooted at `base`; a 3D
/// base keeps its z coordinate for the end-effector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KinematicModel {
    Identity,
    PlanarChain { links: Vec<f64>, base: Vec<f64> },
}

impl KinematicModel {
    pub fn planar_chain(links: Vec<f64>) -> Self {
        KinematicModel::PlanarChain {
            links,
            base: vec![0.0, 0.0],
        }
    }

    /// Dimension of the end-effector point for a state of dimension `d`.
    pub fn spatial_dim(&self, d: usize) -> usize {
        match self {
            KinematicModel::Identity => d,
            KinematicModel::PlanarChain { base, .. } => base.len(),
        }
    }

    /// Checks the model itself and that it accepts states of dimension `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            KinematicModel::Identity => Ok(()),
            KinematicModel::PlanarChain { links, base } => {
                if links.is_empty() {
                    return Err(Error::Invalid("planar chain needs at least one link".into()));
                }
                if let Some(l) = links.iter().find(|l| !(**l > 0.0)) {
                    return Err(Error::OutOfDomain {
                        what: "link length",
                        value: *l,
                        domain: "(0, inf)",
                    });
                }
                if base.len() != 2 && base.len() != 3 {
                    return Err(Error::Invalid(format!(
                        "planar chain base must be 2D or 3D, got {} components",
                        base.len()
                    )));
                }
                check_dim("planar chain joint count", links.len(), d)
            }
        }
    }

    pub fn end_effector(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.validate(y.len())?;
        Ok(self.end_effector_unchecked(y))
    }

    pub(crate) fn end_effector_unchecked(&self, y: &[f64]) -> Vec<f64> {
        match self {
            KinematicModel::Identity => y.to_vec(),
            KinematicModel::PlanarChain { links, base } => {
                let mut p = base.clone();
                let mut angle = 0.0;
                for (l, theta) in links.iter().zip(y) {
                    angle += theta;
                    p[0] += l * angle.cos();
                    p[1] += l * angle.sin();
                }
                p
            }
        }
    }

    /// Analytic Jacobian of [`end_effector`](Self::end_effector), shape
    /// `spatial_dim × d`.
    pub fn jacobian(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        self.validate(y.len())?;
        Ok(self.jacobian_unchecked(y))
    }

    pub(crate) fn jacobian_unchecked(&self, y: &[f64]) -> DMatrix<f64> {
        match self {
            KinematicModel::Identity => DMatrix::identity(y.len(), y.len()),
            KinematicModel::PlanarChain { links, base } => {
                let d = links.len();
                let mut cum = Vec::with_capacity(d);
                let mut angle = 0.0;
                for theta in y {
                    angle += theta;
                    cum.push(angle);
                }
                let mut j = DMatrix::zeros(base.len(), d);
                // Joint c moves every link at or after it.
                let (mut sx, mut sy) = (0.0, 0.0);
                for c in (0..d).rev() {
                    sx += links[c] * cum[c].sin();
                    sy += links[c] * cum[c].cos();
                    j[(0, c)] = -sx;
                    j[(1, c)] = sy;
                }
                j
            }
        }
    }
}
