//! Training strategies and their evaluation on artificial gaps.
//!
//! For every test well the same aligned artificial gaps are injected once.
//! A model is trained per (well, target, model kind, strategy) on rows that
//! never touch those gaps, then scored on the gap rows of the target using
//! the true sibling values at those rows.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{build_dataset, defined, feature_row, well_means, Dataset, FeatureRow, RowRef};
use crate::inject::{inject_gaps, GapSpec, InjectionResult};
use crate::metrics::{mape_detailed, mse};
use crate::models::{train_model, ModelConfig, ModelKind, TrainedModel};
use crate::rng::derive_seed;
use crate::well::{Gap, PropertyKind, WellLog};

mod correlation;
mod neighbors;
mod report;

pub use correlation::{correlations, CorrelationMatrix, CorrelationMode};
pub use neighbors::{distance, nearest_wells, neighbor_sweep, Sweep, SweepPoint};
pub use report::{Aggregate, EvalReport, GapScore, PredictionPoint, WellScore};

pub const MAX_NEIGHBORS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    Local,
    Global,
    Neighbors(usize),
}

impl Strategy {
    pub fn validate(self) -> Result<Strategy> {
        match self {
            Strategy::Neighbors(k) if k > MAX_NEIGHBORS => Err(Error::InvalidConfig(format!(
                "neighbors:{k} exceeds the maximum of {MAX_NEIGHBORS} nearest wells"
            ))),
            s => Ok(s),
        }
    }

    /// `Neighbors(0)` and `Local` share a label, and therefore a seed.
    fn seed_label(self) -> String {
        match self {
            Strategy::Neighbors(0) => Strategy::Local.to_string(),
            s => s.to_string(),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Local => f.write_str("local"),
            Strategy::Global => f.write_str("global"),
            Strategy::Neighbors(k) => write!(f, "neighbors:{k}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let strategy = match lower.as_str() {
            "local" => Strategy::Local,
            "global" => Strategy::Global,
            other => {
                let k = other
                    .strip_prefix("neighbors:")
                    .or_else(|| other.strip_prefix("neighbours:"))
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| {
                        Error::InvalidConfig(format!("unknown strategy {s:?} (expected local, global or neighbors:K)"))
                    })?;
                Strategy::Neighbors(k)
            }
        };
        strategy.validate()
    }
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A fitted model as seen by the evaluation harness. Provenance is passed
/// along so test doubles can look rows up.
pub trait Predictor: Send + Sync {
    fn predict(&self, rows: &[FeatureRow], provenance: &[RowRef]) -> Result<Vec<f64>>;
}

impl Predictor for TrainedModel {
    fn predict(&self, rows: &[FeatureRow], _provenance: &[RowRef]) -> Result<Vec<f64>> {
        self.predict_rows(rows)
    }
}

pub trait Trainer: Sync {
    fn train(&self, kind: ModelKind, train: &Dataset, seed: u64) -> Result<Box<dyn Predictor>>;
}

/// The real models of [`crate::models`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ModelTrainer {
    pub config: ModelConfig,
}

impl Trainer for ModelTrainer {
    fn train(&self, kind: ModelKind, train: &Dataset, seed: u64) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(train_model(kind, train, &self.config, seed)?))
    }
}

/// A test well after injection, with everything needed to score it.
pub struct PreparedWell<'a> {
    pub original: &'a WellLog,
    pub injection: InjectionResult,
    exclude: HashSet<RowRef>,
    means: Option<[f64; 4]>,
}

impl<'a> PreparedWell<'a> {
    pub fn new(original: &'a WellLog, gaps: &GapSpec, seed: u64) -> Result<PreparedWell<'a>> {
        let spec = GapSpec { seed: derive_seed(seed, &["gaps"]), aligned: true, ..*gaps };
        let injection = inject_gaps(original, &spec)?;
        let exclude: HashSet<RowRef> = injection
            .intervals()
            .into_iter()
            .flatten()
            .map(|row| RowRef::new(original.name(), row))
            .collect();
        let modified = &injection.modified_well;
        let means = defined(&well_means(modified, |row| exclude.contains(&RowRef::new(modified.name(), row))));
        Ok(PreparedWell { original, injection, exclude, means })
    }

    pub fn name(&self) -> &str {
        self.original.name()
    }

    pub fn modified(&self) -> &WellLog {
        &self.injection.modified_well
    }

    pub fn target_gaps(&self, target: PropertyKind) -> Vec<&Gap> {
        self.injection.injected.iter().filter(|g| g.property == target).collect()
    }

    /// Rows of the target's injected gaps where all three true siblings are
    /// known, as (gap index, feature row, provenance).
    fn test_rows(&self, target: PropertyKind) -> Vec<(usize, FeatureRow, RowRef)> {
        let Some(means) = self.means else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (gi, gap) in self.target_gaps(target).into_iter().enumerate() {
            for row in gap.rows() {
                if let Some(mut fr) = feature_row(self.original, row, target, &means) {
                    fr.target = self.injection.ground_truth[&(row, target)];
                    out.push((gi, fr, RowRef::new(self.name(), row)));
                }
            }
        }
        out
    }
}

pub(crate) fn train_seed(seed: u64, well: &str, target: PropertyKind, kind: ModelKind, strategy: Strategy) -> u64 {
    derive_seed(seed, &["train", well, target.mnemonic(), kind.as_str(), &strategy.seed_label()])
}

/// Trains on `training` (which should contain the modified test well) and
/// scores the prepared well's gaps for one target.
pub(crate) fn score_well(
    prepared: &PreparedWell<'_>,
    training: &[&WellLog],
    target: PropertyKind,
    kind: ModelKind,
    strategy: Strategy,
    seed: u64,
    trainer: &dyn Trainer,
) -> WellScore {
    let mut score = WellScore::new(prepared.name(), target, kind, strategy);
    if let Err(e) = score_into(&mut score, prepared, training, seed, trainer) {
        score.error = Some(e.to_string());
    }
    score
}

fn score_into(
    score: &mut WellScore,
    prepared: &PreparedWell<'_>,
    training: &[&WellLog],
    seed: u64,
    trainer: &dyn Trainer,
) -> Result<()> {
    let target = score.target;
    let tests = prepared.test_rows(target);
    if tests.is_empty() {
        return Err(Error::EmptyInput("no predictable rows in the injected gaps"));
    }
    let train = build_dataset(training, target, &prepared.exclude)?;
    let test_refs: HashSet<&RowRef> = tests.iter().map(|(_, _, r)| r).collect();
    if let Some(leak) = train.provenance.iter().find(|p| test_refs.contains(p)) {
        return Err(Error::Leak { well: leak.well.clone(), row: leak.row });
    }
    score.n_train = train.len();

    let model = trainer.train(score.model, &train, train_seed(seed, prepared.name(), target, score.model, score.strategy))?;
    let rows: Vec<FeatureRow> = tests.iter().map(|(_, f, _)| *f).collect();
    let refs: Vec<RowRef> = tests.iter().map(|(_, _, r)| r.clone()).collect();
    let predicted = model.predict(&rows, &refs)?;
    if predicted.len() != rows.len() {
        return Err(Error::LengthMismatch { left: rows.len(), right: predicted.len() });
    }
    if let Some(i) = predicted.iter().position(|p| !p.is_finite()) {
        return Err(Error::InvalidConfig(format!("model produced a non-finite prediction at row {}", refs[i].row)));
    }
    let truth: Vec<f64> = rows.iter().map(|r| r.target).collect();
    score.n_test = truth.len();
    score.mse = Some(mse(&truth, &predicted)?);
    match mape_detailed(&truth, &predicted) {
        Ok(m) => {
            score.mape = Some(m.value);
            score.mape_excluded = m.excluded;
        }
        Err(Error::UndefinedMape) => score.mape_excluded = truth.len(),
        Err(e) => return Err(e),
    }

    let gaps = prepared.target_gaps(target);
    let mut by_gap: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for ((gi, fr, r), p) in tests.iter().zip(&predicted) {
        let entry = by_gap.entry(*gi).or_default();
        entry.0.push(fr.target);
        entry.1.push(*p);
        score.predictions.push(PredictionPoint { row: r.row, depth: fr.depth, truth: fr.target, predicted: *p });
    }
    for (gi, (t, p)) in by_gap {
        let gap = gaps[gi];
        score.gaps.push(GapScore {
            start_depth: gap.start_depth,
            span: gap.span,
            n_rows: t.len(),
            mse: mse(&t, &p)?,
            mape: mape_detailed(&t, &p).ok().map(|m| m.value),
        });
    }
    Ok(())
}

fn find<'a>(corpus: &'a [WellLog], name: &str) -> Result<&'a WellLog> {
    corpus.iter().find(|w| w.name() == name).ok_or_else(|| Error::UnknownWell(name.to_string()))
}

/// Training wells for `strategy`: the modified test well first, then the
/// other wells it pools.
pub(crate) fn training_wells<'a>(
    corpus: &'a [WellLog],
    prepared: &'a PreparedWell<'a>,
    strategy: Strategy,
) -> Result<Vec<&'a WellLog>> {
    let mut wells = vec![prepared.modified()];
    match strategy {
        Strategy::Local | Strategy::Neighbors(0) => {}
        Strategy::Global => wells.extend(corpus.iter().filter(|w| w.name() != prepared.name())),
        Strategy::Neighbors(k) => {
            let found = nearest_wells(prepared.original, corpus, k)?;
            if found.len() < k {
                return Err(Error::InvalidConfig(format!(
                    "only {} neighbour wells available for {}, {k} requested",
                    found.len(),
                    prepared.name()
                )));
            }
            wells.extend(found.into_iter().map(|(w, _)| w));
        }
    }
    Ok(wells)
}

/// What to evaluate: every combination of targets, models and strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub targets: Vec<PropertyKind>,
    pub models: Vec<ModelKind>,
    pub strategies: Vec<Strategy>,
    pub gaps: GapSpec,
    pub seed: u64,
}

/// Runs one (target, model, strategy) over the named test wells.
#[allow(clippy::too_many_arguments)]
pub fn run_strategy(
    corpus: &[WellLog],
    test_wells: &[String],
    target: PropertyKind,
    kind: ModelKind,
    strategy: Strategy,
    gaps: &GapSpec,
    seed: u64,
    trainer: &dyn Trainer,
) -> Result<EvalReport> {
    let plan = Plan { targets: vec![target], models: vec![kind], strategies: vec![strategy], gaps: *gaps, seed };
    evaluate(corpus, test_wells, &plan, trainer)
}

/// Runs every job of `plan`. Failures of single wells (infeasible injection,
/// nothing to train on, ...) are recorded in the report; configuration
/// errors are returned.
pub fn evaluate(corpus: &[WellLog], test_wells: &[String], plan: &Plan, trainer: &dyn Trainer) -> Result<EvalReport> {
    for s in &plan.strategies {
        s.validate()?;
    }
    plan.gaps.validate()?;
    let tests: Vec<&WellLog> = test_wells.iter().map(|n| find(corpus, n)).collect::<Result<_>>()?;
    let prepared: Vec<std::result::Result<PreparedWell<'_>, String>> = tests
        .par_iter()
        .map(|w| PreparedWell::new(w, &plan.gaps, plan.seed).map_err(|e| e.to_string()))
        .collect();

    let mut jobs = Vec::new();
    for (wi, _) in tests.iter().enumerate() {
        for &target in &plan.targets {
            for &kind in &plan.models {
                for &strategy in &plan.strategies {
                    jobs.push((wi, target, kind, strategy));
                }
            }
        }
    }
    let mut wells: Vec<WellScore> = jobs
        .par_iter()
        .map(|&(wi, target, kind, strategy)| match &prepared[wi] {
            Err(e) => {
                let mut s = WellScore::new(tests[wi].name(), target, kind, strategy);
                s.error = Some(e.clone());
                s
            }
            Ok(p) => match training_wells(corpus, p, strategy) {
                Ok(training) => score_well(p, &training, target, kind, strategy, plan.seed, trainer),
                Err(e) => {
                    let mut s = WellScore::new(p.name(), target, kind, strategy);
                    s.error = Some(e.to_string());
                    s
                }
            },
        })
        .collect();
    wells.sort_by(|a, b| a.key().cmp(&b.key()));
    Ok(EvalReport { wells })
}

/// Fills the target's gaps in `well` with `model` predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub well: WellLog,
    pub filled: Vec<FilledCell>,
    /// Gap rows left absent because a sibling is missing.
    pub unpredictable: Vec<(usize, PropertyKind)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilledCell {
    pub row: usize,
    pub depth: f64,
    pub property: PropertyKind,
    pub value: f64,
}

/// Predicts every row of every detected gap of each target. Siblings are
/// read from the input well, so a row missing in several targets cannot be
/// filled.
pub fn complete_gaps(
    well: &WellLog,
    targets: &[PropertyKind],
    predictor_for: &dyn Fn(PropertyKind) -> Result<Box<dyn Predictor>>,
) -> Result<Completion> {
    let mut columns = well.curve_values();
    let mut filled = Vec::new();
    let mut unpredictable = Vec::new();
    let means = defined(&well_means(well, |_| false));
    for &target in targets {
        let gaps = crate::gaps::detect_gaps(well, target, crate::gaps::DEFAULT_MIN_SPAN);
        if gaps.is_empty() {
            continue;
        }
        let mut rows = Vec::new();
        let mut refs = Vec::new();
        for row in gaps.iter().flat_map(|g| g.rows()) {
            match means.and_then(|m| feature_row(well, row, target, &m)) {
                Some(fr) => {
                    rows.push(fr);
                    refs.push(RowRef::new(well.name(), row));
                }
                None => unpredictable.push((row, target)),
            }
        }
        if rows.is_empty() {
            continue;
        }
        let model = predictor_for(target)?;
        let predicted = model.predict(&rows, &refs)?;
        for ((r, fr), p) in refs.iter().zip(&rows).zip(predicted) {
            if !p.is_finite() {
                unpredictable.push((r.row, target));
                continue;
            }
            columns[target.index()][r.row] = Some(p);
            filled.push(FilledCell { row: r.row, depth: fr.depth, property: target, value: p });
        }
    }
    unpredictable.sort();
    Ok(Completion { well: well.with_curves(columns)?, filled, unpredictable })
}
