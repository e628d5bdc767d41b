//! Standard piecewise test signals on `[0,1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Breakpoints and jump heights of the Blocks signal (11 terms).
const BLOCKS_T: [f64; 11] = [
    0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76, 0.78, 0.81,
];
const BLOCKS_H: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];

/// Named signal kinds; `Custom` supplies samples directly (see
/// [`crate::simulation::ScenarioConfig`] for the grid convention).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalSpec {
    HeaviSine,
    Blocks,
    Custom(Vec<f64>),
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `4 sin(4 pi t) - sgn(t - 0.3) - sgn(0.72 - t)`.
pub fn heavisine(t: f64) -> f64 {
    4.0 * (4.0 * std::f64::consts::PI * t).sin() - sgn(t - 0.3) - sgn(0.72 - t)
}

/// Sum of unit steps `h_j (1 + sgn(t - t_j)) / 2` over the standard
/// 11-term table.
pub fn blocks(t: f64) -> f64 {
    BLOCKS_T
        .iter()
        .zip(BLOCKS_H.iter())
        .map(|(&tj, &hj)| hj * (1.0 + sgn(t - tj)) / 2.0)
        .sum()
}

/// Evaluates a named signal at `t in [0,1]`.
pub fn test_signal(kind: &SignalSpec, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("signal argument {t} outside [0,1]")));
    }
    match kind {
        SignalSpec::HeaviSine => Ok(heavisine(t)),
        SignalSpec::Blocks => Ok(blocks(t)),
        SignalSpec::Custom(_) => Err(Error::invalid(
            "custom signals are sampled by index, not by point evaluation",
        )),
    }
}
