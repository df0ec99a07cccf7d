//! Model inputs and scaling.
//!
//! Each sample predicts one target property from eight features: the three
//! sibling measurements at that depth, the per-well means of all four
//! properties, and the absolute depth in meters. Only the siblings are
//! robust-scaled (median / IQR); the MLP additionally min-max scales the
//! means and depth. Scalers are always fitted on training rows only.

use std::collections::HashSet;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Matrix;
use crate::stats::{quantile_sorted, sorted};
use crate::well::{PropertyKind, WellLog};

pub const FEATURE_WIDTH: usize = 8;
pub const SIBLING_COUNT: usize = 3;

/// Median / interquartile-range scaler. Columns with zero IQR keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustScaler {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl RobustScaler {
    /// Fits one centre/scale per column of `rows`.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<RobustScaler> {
        let width = rows.first().ok_or(Error::EmptyInput("robust scaler needs at least one row"))?.as_ref().len();
        let mut center = Vec::with_capacity(width);
        let mut scale = Vec::with_capacity(width);
        for col in 0..width {
            let mut column = Vec::with_capacity(rows.len());
            for r in rows {
                let r = r.as_ref();
                if r.len() != width {
                    return Err(Error::WidthMismatch { expected: width, actual: r.len() });
                }
                column.push(r[col]);
            }
            let s = sorted(&column);
            let q = |p: f64| quantile_sorted(&s, p).expect("non-empty");
            let iqr = q(0.75) - q(0.25);
            center.push(q(0.5));
            scale.push(if iqr > 0.0 { iqr } else { 1.0 });
        }
        Ok(RobustScaler { center, scale })
    }

    pub fn identity(width: usize) -> RobustScaler {
        RobustScaler { center: vec![0.0; width], scale: vec![1.0; width] }
    }

    pub fn width(&self) -> usize {
        self.center.len()
    }

    pub fn transform(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check(row)?;
        Ok(row
            .iter()
            .zip(self.center.iter().zip(&self.scale))
            .map(|(x, (c, s))| (x - c) / s)
            .collect())
    }

    pub fn inverse_transform(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check(row)?;
        Ok(row
            .iter()
            .zip(self.center.iter().zip(&self.scale))
            .map(|(x, (c, s))| x * s + c)
            .collect())
    }

    fn check(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.width() {
            return Err(Error::WidthMismatch { expected: self.width(), actual: row.len() });
        }
        Ok(())
    }
}

/// Maps each column's training range onto [0, 1]. Constant columns are
/// shifted to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub range: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<MinMaxScaler> {
        let width = rows.first().ok_or(Error::EmptyInput("min-max scaler needs at least one row"))?.as_ref().len();
        let mut min = vec![f64::INFINITY; width];
        let mut max = vec![f64::NEG_INFINITY; width];
        for r in rows {
            let r = r.as_ref();
            if r.len() != width {
                return Err(Error::WidthMismatch { expected: width, actual: r.len() });
            }
            for (j, v) in r.iter().enumerate() {
                min[j] = min[j].min(*v);
                max[j] = max[j].max(*v);
            }
        }
        let range = min.iter().zip(&max).map(|(lo, hi)| if hi > lo { hi - lo } else { 1.0 }).collect();
        Ok(MinMaxScaler { min, range })
    }

    pub fn transform_in_place(&self, row: &mut [f64]) {
        for ((x, lo), r) in row.iter_mut().zip(&self.min).zip(&self.range) {
            *x = (*x - lo) / r;
        }
    }
}

/// Identifies one depth sample of one well.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowRef {
    pub well: String,
    pub row: usize,
}

impl RowRef {
    pub fn new(well: &str, row: usize) -> RowRef {
        RowRef { well: well.to_string(), row }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    /// Unscaled sibling measurements in canonical property order.
    pub siblings: [f64; SIBLING_COUNT],
    pub well_means: [f64; 4],
    pub depth: f64,
    pub target: f64,
}

impl FeatureRow {
    pub fn raw(&self) -> [f64; FEATURE_WIDTH] {
        let [a, b, c] = self.siblings;
        let [m0, m1, m2, m3] = self.well_means;
        [a, b, c, m0, m1, m2, m3, self.depth]
    }
}

/// Per-property means over present rows not rejected by `skip`. `None` when
/// a property has no usable value.
pub fn well_means(well: &WellLog, skip: impl Fn(usize) -> bool) -> [Option<f64>; 4] {
    let mut out = [None; 4];
    for kind in PropertyKind::ALL {
        let (mut sum, mut n) = (0.0, 0usize);
        for (row, v) in well.curve(kind).values.iter().enumerate() {
            if let Some(v) = v {
                if !skip(row) {
                    sum += v;
                    n += 1;
                }
            }
        }
        if n > 0 {
            out[kind.index()] = Some(sum / n as f64);
        }
    }
    out
}

/// Feature row at `row` if all siblings are present. `means` must be fully
/// defined; the target is read from `well` when present, else NaN.
pub fn feature_row(well: &WellLog, row: usize, target: PropertyKind, means: &[f64; 4]) -> Option<FeatureRow> {
    let mut siblings = [0.0; SIBLING_COUNT];
    for (slot, kind) in siblings.iter_mut().zip(target.siblings()) {
        *slot = well.value(kind, row)?;
    }
    Some(FeatureRow {
        siblings,
        well_means: *means,
        depth: well.depth(row),
        target: well.value(target, row).unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub target: PropertyKind,
    pub rows: Vec<FeatureRow>,
    pub provenance: Vec<RowRef>,
}

impl Dataset {
    pub fn empty(target: PropertyKind) -> Dataset {
        Dataset { target, rows: Vec::new(), provenance: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: FeatureRow, from: RowRef) {
        self.rows.push(row);
        self.provenance.push(from);
    }

    pub fn extend(&mut self, other: Dataset) {
        debug_assert_eq!(self.target, other.target);
        self.rows.extend(other.rows);
        self.provenance.extend(other.provenance);
    }

    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.target).collect()
    }

    pub fn raw_matrix(&self) -> Matrix {
        Matrix::from_rows(FEATURE_WIDTH, self.rows.iter().map(|r| r.raw()))
    }

    fn column_names(&self) -> Vec<String> {
        let mut cols = vec!["well".to_string(), "row".to_string()];
        cols.extend(self.target.siblings().iter().map(|k| k.to_string()));
        cols.extend(PropertyKind::ALL.iter().map(|k| format!("mean_{k}")));
        cols.push("depth".into());
        cols.push(format!("target_{}", self.target));
        cols
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.column_names())?;
        for (r, p) in self.rows.iter().zip(&self.provenance) {
            let mut rec = vec![p.well.clone(), p.row.to_string()];
            rec.extend(r.raw().iter().map(|v| v.to_string()));
            rec.push(r.target.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Dataset> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        let target_col = headers.get(10).unwrap_or("");
        let target: PropertyKind = target_col
            .strip_prefix("target_")
            .ok_or_else(|| Error::parse(1, format!("expected target_<PROPERTY> column, got {target_col:?}")))?
            .parse()?;
        let mut ds = Dataset::empty(target);
        if ds.column_names().iter().map(String::as_str).ne(headers.iter()) {
            return Err(Error::parse(1, "dataset CSV header does not match the feature layout"));
        }
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let num = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::parse(line, format!("column {k} is not numeric")))
            };
            let row: usize = rec
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(line, "bad row index"))?;
            ds.push(
                FeatureRow {
                    siblings: [num(2)?, num(3)?, num(4)?],
                    well_means: [num(5)?, num(6)?, num(7)?, num(8)?],
                    depth: num(9)?,
                    target: num(10)?,
                },
                RowRef::new(rec.get(0).unwrap_or(""), row),
            );
        }
        Ok(ds)
    }
}

/// Training rows for `target`: one per row where the target and all three
/// siblings are present and `(well, row)` is not excluded. Well means skip
/// excluded rows.
pub fn build_dataset(wells: &[&WellLog], target: PropertyKind, exclude: &HashSet<RowRef>) -> Result<Dataset> {
    let parts: Vec<Dataset> = wells
        .par_iter()
        .map(|well| {
            let excluded = |row: usize| exclude.contains(&RowRef::new(well.name(), row));
            let mut ds = Dataset::empty(target);
            let means = well_means(well, excluded);
            let Some(means) = defined(&means) else {
                return ds;
            };
            for row in 0..well.rows() {
                if excluded(row) || well.value(target, row).is_none() {
                    continue;
                }
                if let Some(fr) = feature_row(well, row, target, &means) {
                    ds.push(fr, RowRef::new(well.name(), row));
                }
            }
            ds
        })
        .collect();
    let mut out = Dataset::empty(target);
    for p in parts {
        out.extend(p);
    }
    if out.is_empty() {
        return Err(Error::EmptyDataset(target));
    }
    Ok(out)
}

pub(crate) fn defined(means: &[Option<f64>; 4]) -> Option<[f64; 4]> {
    Some([means[0]?, means[1]?, means[2]?, means[3]?])
}

/// Scaling fitted on a training set and applied to every later row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub siblings: RobustScaler,
    /// Min-max scaling of the whole scaled vector, used by the MLP.
    pub bounded: Option<MinMaxScaler>,
}

impl Preprocessor {
    pub fn fit(train: &Dataset, bounded: bool) -> Result<Preprocessor> {
        let sib: Vec<[f64; SIBLING_COUNT]> = train.rows.iter().map(|r| r.siblings).collect();
        let siblings = RobustScaler::fit(&sib)?;
        let mut pre = Preprocessor { siblings, bounded: None };
        if bounded {
            let scaled: Vec<[f64; FEATURE_WIDTH]> = train.rows.iter().map(|r| pre.scale_siblings(r)).collect();
            // siblings stay robust-scaled; only means and depth are bounded
            let tail: Vec<[f64; 5]> = scaled
                .iter()
                .map(|r| [r[3], r[4], r[5], r[6], r[7]])
                .collect();
            pre.bounded = Some(MinMaxScaler::fit(&tail)?);
        }
        Ok(pre)
    }

    fn scale_siblings(&self, row: &FeatureRow) -> [f64; FEATURE_WIDTH] {
        let mut out = row.raw();
        for j in 0..SIBLING_COUNT {
            out[j] = (out[j] - self.siblings.center[j]) / self.siblings.scale[j];
        }
        out
    }

    pub fn apply(&self, row: &FeatureRow) -> [f64; FEATURE_WIDTH] {
        let mut out = self.scale_siblings(row);
        if let Some(mm) = &self.bounded {
            mm.transform_in_place(&mut out[SIBLING_COUNT..]);
        }
        out
    }

    pub fn matrix(&self, ds: &Dataset) -> Matrix {
        Matrix::from_rows(FEATURE_WIDTH, ds.rows.iter().map(|r| self.apply(r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::well::tests::{full_well, header};
    use proptest::prelude::*;

    #[test]
    fn robust_scaler_examples() {
        let col = |v: &[f64]| v.iter().map(|x| vec![*x]).collect::<Vec<_>>();
        let s = RobustScaler::fit(&col(&[1.0, 2.0, 3.0, 4.0, 100.0])).unwrap();
        assert_eq!((s.center[0], s.scale[0]), (3.0, 2.0));
        assert_eq!(s.transform(&[100.0]).unwrap(), vec![48.5]);
        assert_eq!(s.transform(&[3.0]).unwrap(), vec![0.0]);

        let s = RobustScaler::fit(&col(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!((s.center[0], s.scale[0]), (5.0, 1.0));

        let s = RobustScaler::fit(&col(&[-1.0, 1.0])).unwrap();
        assert_eq!((s.center[0], s.scale[0]), (0.0, 1.0));

        assert!(RobustScaler::fit::<Vec<f64>>(&[]).is_err());
        assert!(matches!(s.transform(&[1.0, 2.0]), Err(Error::WidthMismatch { .. })));
        assert_eq!(RobustScaler::identity(2).transform(&[4.0, -2.0]).unwrap(), vec![4.0, -2.0]);
    }

    proptest! {
        #[test]
        fn robust_scaling_inverts(rows in proptest::collection::vec(proptest::collection::vec(-1e4..1e4f64, 3), 1..40)) {
            let s = RobustScaler::fit(&rows).unwrap();
            for r in &rows {
                let back = s.inverse_transform(&s.transform(r).unwrap()).unwrap();
                for (a, b) in back.iter().zip(r) {
                    prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
                }
            }
        }
    }

    fn sample_well(name: &str) -> WellLog {
        let rows = 5;
        let col = |k: f64| (0..rows).map(|i| Some(k + i as f64)).collect::<Vec<_>>();
        WellLog::new(header(name, 100.0, 0.5, rows), [col(0.1), col(40.0), col(2.0), col(70.0)], vec![]).unwrap()
    }

    #[test]
    fn builds_one_row_per_complete_row() {
        let w = sample_well("A");
        let ds = build_dataset(&[&w], PropertyKind::Nphi, &HashSet::new()).unwrap();
        assert_eq!(ds.len(), 5);
        assert_eq!(ds.rows[0].raw().len(), FEATURE_WIDTH);
        assert_eq!(ds.rows[2].siblings, [42.0, 4.0, 72.0]);
        assert_eq!(ds.rows[2].well_means, [2.1, 42.0, 4.0, 72.0]);
        assert_eq!(ds.rows[2].depth, 101.0);
        assert_eq!(ds.rows[2].target, 2.1);
        assert!(ds.rows.iter().all(|r| r.well_means == ds.rows[0].well_means));
    }

    #[test]
    fn rows_missing_a_sibling_are_skipped() {
        let w = sample_well("A");
        let mut cols = w.curve_values();
        cols[PropertyKind::Gr.index()][1] = None;
        let w = w.with_curves(cols).unwrap();
        let ds = build_dataset(&[&w], PropertyKind::Nphi, &HashSet::new()).unwrap();
        assert_eq!(ds.provenance.iter().map(|p| p.row).collect::<Vec<_>>(), vec![0, 2, 3, 4]);
        // GR mean uses its four present values
        assert_eq!(ds.rows[0].well_means[1], (40.0 + 42.0 + 43.0 + 44.0) / 4.0);
    }

    #[test]
    fn excluded_rows_are_dropped_and_leave_means() {
        let w = sample_well("A");
        let exclude: HashSet<RowRef> = [RowRef::new("A", 3), RowRef::new("A", 4)].into();
        let ds = build_dataset(&[&w], PropertyKind::Vp, &exclude).unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.provenance.iter().all(|p| !exclude.contains(p)));
        assert_eq!(ds.rows[0].well_means[3], 71.0);

        let everything: HashSet<RowRef> = (0..5).map(|r| RowRef::new("A", r)).collect();
        assert!(matches!(
            build_dataset(&[&w], PropertyKind::Vp, &everything),
            Err(Error::EmptyDataset(PropertyKind::Vp))
        ));
    }

    #[test]
    fn dataset_csv_round_trip() {
        let a = full_well("A", 10.0, 0.5, 6);
        let b = full_well("B", 20.0, 0.5, 4);
        let ds = build_dataset(&[&a, &b], PropertyKind::Rhob, &HashSet::new()).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert_eq!(Dataset::read_csv(buf.as_slice()).unwrap(), ds);
    }

    #[test]
    fn preprocessor_scales_siblings_and_bounds_the_rest() {
        let a = full_well("A", 10.0, 0.5, 6);
        let b = full_well("B", 200.0, 0.5, 9);
        let ds = build_dataset(&[&a, &b], PropertyKind::Gr, &HashSet::new()).unwrap();
        let pre = Preprocessor::fit(&ds, true).unwrap();
        let m = pre.matrix(&ds);
        for i in 0..m.rows() {
            for j in SIBLING_COUNT..FEATURE_WIDTH {
                assert!((0.0..=1.0).contains(&m.row(i)[j]));
            }
        }
        let plain = Preprocessor::fit(&ds, false).unwrap();
        assert_eq!(plain.apply(&ds.rows[0])[7], ds.rows[0].depth);
    }
}
