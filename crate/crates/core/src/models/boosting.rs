//! Squared-loss gradient tree boosting.
//!
//! The ensemble starts from the training-target mean; each stage fits a
//! [`RegressionTree`] to the current residuals and adds it scaled by the
//! learning rate. No row subsampling is done.

use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_sorted, RegressionTree, SortedColumns, TreeParams};
use super::{Matrix, Regressor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for GbParams {
    fn default() -> Self {
        GbParams { n_trees: 100, learning_rate: 0.1, max_depth: 3, min_samples_split: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostedEnsemble {
    pub initial_prediction: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
    pub width: usize,
    /// Training MSE after each stage; `train_mse[0]` is the constant model.
    pub train_mse: Vec<f64>,
}

impl Regressor for GradientBoostedEnsemble {
    fn width(&self) -> usize {
        self.width
    }

    fn predict_one(&self, x: &[f64]) -> f64 {
        self.initial_prediction + self.learning_rate * self.trees.iter().map(|t| t.predict_one(x)).sum::<f64>()
    }
}

pub fn fit_gb(x: &Matrix, y: &[f64], params: GbParams) -> Result<GradientBoostedEnsemble> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::EmptyInput("gradient boosting needs at least two rows"));
    }
    if y.len() != n {
        return Err(Error::LengthMismatch { left: y.len(), right: n });
    }
    if !(params.learning_rate > 0.0) {
        return Err(Error::InvalidConfig(format!("learning rate must be > 0, got {}", params.learning_rate)));
    }
    let tree_params = TreeParams { max_depth: params.max_depth, min_samples_split: params.min_samples_split };
    let sorted = SortedColumns::new(x);
    let init = y.iter().sum::<f64>() / n as f64;
    let mut current = vec![init; n];
    let mut residual: Vec<f64> = y.iter().map(|t| t - init).collect();
    let mse = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>() / n as f64;

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut train_mse = Vec::with_capacity(params.n_trees + 1);
    train_mse.push(mse(&residual));
    for _ in 0..params.n_trees {
        let tree = fit_tree_sorted(x, &residual, tree_params, &sorted);
        for i in 0..n {
            current[i] += params.learning_rate * tree.predict_one(x.row(i));
            residual[i] = y[i] - current[i];
        }
        train_mse.push(mse(&residual));
        trees.push(tree);
    }
    Ok(GradientBoostedEnsemble {
        initial_prediction: init,
        learning_rate: params.learning_rate,
        trees,
        width: x.cols(),
        train_mse,
    })
}
