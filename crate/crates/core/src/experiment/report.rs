use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::Strategy;
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::well::PropertyKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapScore {
    pub start_depth: f64,
    pub span: f64,
    pub n_rows: usize,
    pub mse: f64,
    pub mape: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictionPoint {
    pub row: usize,
    pub depth: f64,
    pub truth: f64,
    pub predicted: f64,
}

/// Result of one (well, target, model, strategy) job.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellScore {
    pub well: String,
    pub target: PropertyKind,
    pub model: ModelKind,
    pub strategy: Strategy,
    pub n_train: usize,
    pub n_test: usize,
    pub mse: Option<f64>,
    pub mape: Option<f64>,
    /// Test rows left out of MAPE for near-zero truth.
    pub mape_excluded: usize,
    pub error: Option<String>,
    pub gaps: Vec<GapScore>,
    pub predictions: Vec<PredictionPoint>,
}

impl WellScore {
    pub fn new(well: &str, target: PropertyKind, model: ModelKind, strategy: Strategy) -> WellScore {
        WellScore {
            well: well.to_string(),
            target,
            model,
            strategy,
            n_train: 0,
            n_test: 0,
            mse: None,
            mape: None,
            mape_excluded: 0,
            error: None,
            gaps: Vec::new(),
            predictions: Vec::new(),
        }
    }

    pub fn key(&self) -> (PropertyKind, ModelKind, Strategy, &str) {
        (self.target, self.model, self.strategy, &self.well)
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none() && self.mse.is_some()
    }
}

/// Unweighted mean over the wells of one (target, model, strategy).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub target: PropertyKind,
    pub model: ModelKind,
    pub strategy: Strategy,
    /// Wells with a score.
    pub wells: usize,
    pub failed: usize,
    pub mse: Option<f64>,
    pub mape: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EvalReport {
    pub wells: Vec<WellScore>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn flush<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner().map_err(|e| Error::io("<csv>", e.into_error()))?;
    Ok(())
}

impl EvalReport {
    pub fn merge(reports: impl IntoIterator<Item = EvalReport>) -> EvalReport {
        let mut wells: Vec<WellScore> = reports.into_iter().flat_map(|r| r.wells).collect();
        wells.sort_by(|a, b| a.key().cmp(&b.key()));
        EvalReport { wells }
    }

    pub fn succeeded(&self) -> usize {
        self.wells.iter().filter(|w| w.succeeded()).count()
    }

    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut groups: BTreeMap<(PropertyKind, ModelKind, Strategy), Vec<&WellScore>> = BTreeMap::new();
        for w in &self.wells {
            groups.entry((w.target, w.model, w.strategy)).or_default().push(w);
        }
        groups
            .into_iter()
            .map(|((target, model, strategy), ws)| {
                let mean = |f: fn(&WellScore) -> Option<f64>| {
                    let v: Vec<f64> = ws.iter().filter_map(|w| f(w)).collect();
                    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
                };
                let scored = ws.iter().filter(|w| w.succeeded()).count();
                Aggregate {
                    target,
                    model,
                    strategy,
                    wells: scored,
                    failed: ws.len() - scored,
                    mse: mean(|w| w.mse),
                    mape: mean(|w| w.mape),
                }
            })
            .collect()
    }

    pub fn aggregate(&self, target: PropertyKind, model: ModelKind, strategy: Strategy) -> Option<Aggregate> {
        self.aggregates().into_iter().find(|a| (a.target, a.model, a.strategy) == (target, model, strategy))
    }

    /// One row per job.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["well", "target", "model", "strategy", "n_train", "n_test", "mse", "mape", "mape_excluded", "error"])?;
        for s in &self.wells {
            w.write_record([
                s.well.clone(),
                s.target.to_string(),
                s.model.to_string(),
                s.strategy.to_string(),
                s.n_train.to_string(),
                s.n_test.to_string(),
                opt(s.mse),
                opt(s.mape),
                s.mape_excluded.to_string(),
                s.error.clone().unwrap_or_default(),
            ])?;
        }
        flush(w)
    }

    pub fn write_aggregate_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["target", "model", "strategy", "wells", "failed", "mse", "mape"])?;
        for a in self.aggregates() {
            w.write_record([
                a.target.to_string(),
                a.model.to_string(),
                a.strategy.to_string(),
                a.wells.to_string(),
                a.failed.to_string(),
                opt(a.mse),
                opt(a.mape),
            ])?;
        }
        flush(w)
    }

    pub fn write_gaps_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["well", "target", "model", "strategy", "gap", "start_depth", "span", "n_rows", "mse", "mape"])?;
        for s in &self.wells {
            for (i, g) in s.gaps.iter().enumerate() {
                w.write_record([
                    s.well.clone(),
                    s.target.to_string(),
                    s.model.to_string(),
                    s.strategy.to_string(),
                    i.to_string(),
                    g.start_depth.to_string(),
                    g.span.to_string(),
                    g.n_rows.to_string(),
                    g.mse.to_string(),
                    opt(g.mape),
                ])?;
            }
        }
        flush(w)
    }

    pub fn write_predictions_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["well", "target", "model", "strategy", "row", "depth", "truth", "predicted"])?;
        for s in &self.wells {
            for p in &s.predictions {
                w.write_record([
                    s.well.clone(),
                    s.target.to_string(),
                    s.model.to_string(),
                    s.strategy.to_string(),
                    p.row.to_string(),
                    p.depth.to_string(),
                    p.truth.to_string(),
                    p.predicted.to_string(),
                ])?;
            }
        }
        flush(w)
    }

    /// Aggregates as an aligned text table.
    pub fn pretty_table(&self) -> String {
        let header = ["target", "model", "strategy", "wells", "failed", "MSE", "MAPE %"];
        let rows: Vec<[String; 7]> = self
            .aggregates()
            .into_iter()
            .map(|a| {
                [
                    a.target.to_string(),
                    a.model.to_string(),
                    a.strategy.to_string(),
                    a.wells.to_string(),
                    a.failed.to_string(),
                    a.mse.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into()),
                    a.mape.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[&str]| {
            for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
                let sep = if i == 0 { "" } else { "  " };
                if i < 3 {
                    let _ = write!(out, "{sep}{c:<w$}");
                } else {
                    let _ = write!(out, "{sep}{c:>w$}");
                }
            }
            out.push('\n');
        };
        line(&mut out, &header);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        line(&mut out, &rule.iter().map(String::as_str).collect::<Vec<_>>());
        for r in &rows {
            line(&mut out, &r.iter().map(String::as_str).collect::<Vec<_>>());
        }
        out
    }
}
