//! Regression models and the serialisable [`TrainedModel`] wrapper.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureRow, Preprocessor};
use crate::well::PropertyKind;

pub mod boosting;
pub mod linear;
pub mod mlp;
pub mod tree;

pub use boosting::{fit_gb, GbParams, GradientBoostedEnsemble};
pub use linear::{fit_linear, LinearModel};
pub use mlp::{fit_mlp, MlpModel, TrainConfig};
pub use tree::{fit_tree, RegressionTree, TreeParams};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows<R: AsRef<[f64]>>(cols: usize, rows: impl IntoIterator<Item = R>) -> Matrix {
        let mut data = Vec::new();
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "row width");
            data.extend_from_slice(r);
        }
        Matrix { cols, data }
    }

    pub fn rows(&self) -> usize {
        if self.cols == 0 {
            0
        } else {
            self.data.len() / self.cols
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

pub trait Regressor {
    fn width(&self) -> usize;

    /// Prediction for one row; the caller guarantees the width.
    fn predict_one(&self, x: &[f64]) -> f64;

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.width() {
            return Err(Error::WidthMismatch { expected: self.width(), actual: x.cols() });
        }
        Ok((0..x.rows()).map(|i| self.predict_one(x.row(i))).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lr,
    Gb,
    Nn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Lr, ModelKind::Gb, ModelKind::Nn];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lr => "lr",
            ModelKind::Gb => "gb",
            ModelKind::Nn => "nn",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "linear" => Ok(ModelKind::Lr),
            "gb" | "boosting" => Ok(ModelKind::Gb),
            "nn" | "mlp" => Ok(ModelKind::Nn),
            _ => Err(Error::InvalidConfig(format!("unknown model kind {s:?} (expected lr, gb or nn)"))),
        }
    }
}

/// Hyperparameters for every model kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ModelConfig {
    pub gb: GbParams,
    pub nn: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedModel {
    Lr(LinearModel),
    Gb(GradientBoostedEnsemble),
    Nn(MlpModel),
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Lr(_) => ModelKind::Lr,
            FittedModel::Gb(_) => ModelKind::Gb,
            FittedModel::Nn(_) => ModelKind::Nn,
        }
    }

    fn regressor(&self) -> &dyn Regressor {
        match self {
            FittedModel::Lr(m) => m,
            FittedModel::Gb(m) => m,
            FittedModel::Nn(m) => m,
        }
    }
}

pub const FORMAT_VERSION: u32 = 1;

/// A fitted model together with the scaling it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub target: PropertyKind,
    pub preprocessor: Preprocessor,
    pub config: ModelConfig,
    pub seed: u64,
    pub train_rows: usize,
    pub model: FittedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn predict_rows(&self, rows: &[FeatureRow]) -> Result<Vec<f64>> {
        let m = Matrix::from_rows(crate::features::FEATURE_WIDTH, rows.iter().map(|r| self.preprocessor.apply(r)));
        self.model.regressor().predict(&m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        let m: TrainedModel = serde_json::from_str(text)?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model format version {} (expected {FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<TrainedModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrainedModel::from_json(&text)
    }
}

/// Fits the preprocessor on `train` and then the requested model.
pub fn train_model(kind: ModelKind, train: &Dataset, config: &ModelConfig, seed: u64) -> Result<TrainedModel> {
    if train.is_empty() {
        return Err(Error::EmptyDataset(train.target));
    }
    let preprocessor = Preprocessor::fit(train, kind == ModelKind::Nn)?;
    let x = preprocessor.matrix(train);
    let y = train.targets();
    let model = match kind {
        ModelKind::Lr => FittedModel::Lr(fit_linear(&x, &y)?),
        ModelKind::Gb => FittedModel::Gb(fit_gb(&x, &y, config.gb)?),
        ModelKind::Nn => {
            let cfg = TrainConfig { seed, ..config.nn };
            FittedModel::Nn(fit_mlp(&x, &y, &cfg)?.model)
        }
    };
    Ok(TrainedModel {
        format_version: FORMAT_VERSION,
        target: train.target,
        preprocessor,
        config: *config,
        seed,
        train_rows: train.len(),
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::build_dataset;
    use crate::well::tests::full_well;
    use std::collections::HashSet;

    #[test]
    fn matrix_layout() {
        let m = Matrix::from_rows(2, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.get(2, 0), 5.0);
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!("GB".parse::<ModelKind>().unwrap(), ModelKind::Gb);
        assert_eq!("mlp".parse::<ModelKind>().unwrap(), ModelKind::Nn);
        assert!("svm".parse::<ModelKind>().is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let a = full_well("A", 1000.0, 0.15, 60);
        let b = full_well("B", 1200.0, 0.15, 40);
        let ds = build_dataset(&[&a, &b], PropertyKind::Vp, &HashSet::new()).unwrap();
        let cfg = ModelConfig { nn: TrainConfig { epochs: 3, ..TrainConfig::default() }, ..ModelConfig::default() };
        for kind in ModelKind::ALL {
            let m = train_model(kind, &ds, &cfg, 11).unwrap();
            let back = TrainedModel::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back, m);
            let p1 = m.predict_rows(&ds.rows).unwrap();
            let p2 = back.predict_rows(&ds.rows).unwrap();
            assert!(p1.iter().zip(&p2).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn rejects_other_format_versions() {
        let a = full_well("A", 1000.0, 0.15, 20);
        let ds = build_dataset(&[&a], PropertyKind::Gr, &HashSet::new()).unwrap();
        let m = train_model(ModelKind::Lr, &ds, &ModelConfig::default(), 0).unwrap();
        let text = m.to_json().unwrap().replace("\"format_version\": 1", "\"format_version\": 99");
        assert!(matches!(TrainedModel::from_json(&text), Err(Error::ModelFormat(_))));
    }
}
