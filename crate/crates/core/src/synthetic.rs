//! Synthetic transfer demonstrations: arcs between two points.

use crate::promp::{Demonstration, DemonstrationSet};
use crate::trajectory::Trajectory;

/// An arc from `start` to `goal` that bulges by `bulge` (state units) along
/// the in-plane normal of the first two coordinates and eases in and out
/// in time.
pub fn arc(start: &[f64], goal: &[f64], bulge: f64, steps: usize) -> Trajectory {
    let d = start.len();
    let dx = goal[0] - start[0];
    let dy = if d > 1 { goal[1] - start[1] } else { 0.0 };
    let len = (dx * dx + dy * dy).sqrt().max(1e-12);
    let normal = [-dy / len, dx / len];
    let mut rows = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let u = k as f64 / steps as f64;
        // smoothstep timing
        let s = u * u * (3.0 - 2.0 * u);
        let b = bulge * (std::f64::consts::PI * s).sin();
        let mut row: Vec<f64> = (0..d).map(|i| start[i] + s * (goal[i] - start[i])).collect();
        if d > 1 {
            row[0] += b * normal[0];
            row[1] += b * normal[1];
        } else {
            row[0] += b;
        }
        rows.push(row);
    }
    Trajectory::from_rows(&rows).expect("finite arc")
}

/// One demonstration per bulge value.
pub fn arc_set(start: &[f64], goal: &[f64], bulges: &[f64], steps: usize) -> DemonstrationSet {
    DemonstrationSet {
        d: start.len(),
        trajectories: bulges
            .iter()
            .map(|b| Demonstration {
                states: arc(start, goal, *b, steps),
            })
            .collect(),
    }
}

/// Endpoints and bulge of one synthetic demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSpec {
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
    pub bulge: f64,
}

pub fn arc_demos(specs: &[ArcSpec], steps: usize) -> DemonstrationSet {
    DemonstrationSet {
        d: specs.first().map_or(0, |s| s.start.len()),
        trajectories: specs
            .iter()
            .map(|s| Demonstration {
                states: arc(&s.start, &s.goal, s.bulge, steps),
            })
            .collect(),
    }
}

/// Planar left-to-right transfers with scattered endpoints, so that a model
/// fitted to them generalizes to new start and goal positions. The scatter
/// follows additive recurrences and needs no random source.
pub fn transfer_specs(count: usize) -> Vec<ArcSpec> {
    let frac = |k: usize, a: f64| (0.5 + k as f64 * a).fract();
    (0..count)
        .map(|k| ArcSpec {
            start: vec![-0.6 + 0.2 * frac(k, 0.7548776662), -0.3 + 0.6 * frac(k, 0.5698402910)],
            goal: vec![0.4 + 0.2 * frac(k, 0.4142135624), -0.3 + 0.6 * frac(k, 0.6180339887)],
            bulge: 0.02 + 0.04 * frac(k, 0.3247179572),
        })
        .collect()
}
