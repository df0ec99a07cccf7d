//! Error metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truth values with magnitude at or below this are left out of MAPE.
pub const MAPE_EPSILON: f64 = 1e-12;

fn check(truth: &[f64], predicted: &[f64]) -> Result<()> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: predicted.len() });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput("metric needs at least one value"));
    }
    Ok(())
}

pub fn mse(truth: &[f64], predicted: &[f64]) -> Result<f64> {
    check(truth, predicted)?;
    Ok(truth.iter().zip(predicted).map(|(t, p)| (t - p) * (t - p)).sum::<f64>() / truth.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mape {
    /// Percentage.
    pub value: f64,
    /// Rows dropped because |truth| <= [`MAPE_EPSILON`].
    pub excluded: usize,
}

pub fn mape_detailed(truth: &[f64], predicted: &[f64]) -> Result<Mape> {
    check(truth, predicted)?;
    let (mut sum, mut n) = (0.0, 0usize);
    for (t, p) in truth.iter().zip(predicted) {
        if t.abs() > MAPE_EPSILON {
            sum += (t - p).abs() / t.abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::UndefinedMape);
    }
    Ok(Mape { value: 100.0 * sum / n as f64, excluded: truth.len() - n })
}

pub fn mape(truth: &[f64], predicted: &[f64]) -> Result<f64> {
    mape_detailed(truth, predicted).map(|m| m.value)
}
