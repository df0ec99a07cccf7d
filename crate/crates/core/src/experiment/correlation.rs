use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::pearson;
use crate::well::{PropertyKind, WellLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    /// Mean of the per-well matrices.
    PerWell,
    /// One matrix over the pooled complete rows.
    Global,
}

impl FromStr for CorrelationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "per_well" | "well" => Ok(CorrelationMode::PerWell),
            "global" => Ok(CorrelationMode::Global),
            _ => Err(Error::InvalidConfig(format!("unknown correlation mode {s:?} (expected per-well or global)"))),
        }
    }
}

/// Pearson coefficients in canonical property order. `None` marks pairs
/// with a zero-variance curve (in every contributing well, for per-well
/// mode).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub mode: CorrelationMode,
    pub values: [[Option<f64>; 4]; 4],
    /// Wells that contributed.
    pub wells: usize,
}

impl CorrelationMatrix {
    pub fn get(&self, a: PropertyKind, b: PropertyKind) -> Option<f64> {
        self.values[a.index()][b.index()]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(PropertyKind::ALL.iter().map(|k| k.to_string()));
        w.write_record(&header)?;
        for a in PropertyKind::ALL {
            let mut rec = vec![a.to_string()];
            rec.extend(self.values[a.index()].iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Complete-row columns of `well`.
fn complete_columns(well: &WellLog) -> [Vec<f64>; 4] {
    let rows = well.complete_rows();
    std::array::from_fn(|k| rows.iter().map(|&r| well.value(PropertyKind::ALL[k], r).expect("complete")).collect())
}

fn matrix(columns: &[Vec<f64>; 4]) -> [[Option<f64>; 4]; 4] {
    let mut out = [[None; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let r = pearson(&columns[i], &columns[j]).map(|r| if i == j { 1.0 } else { r.clamp(-1.0, 1.0) });
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    out
}

/// Correlations over complete rows. Per-well mode skips wells with fewer
/// than two complete rows and averages each entry over the wells where it
/// is defined.
pub fn correlations(wells: &[WellLog], mode: CorrelationMode) -> Result<CorrelationMatrix> {
    let columns: Vec<[Vec<f64>; 4]> = wells.iter().map(complete_columns).filter(|c| c[0].len() >= 2).collect();
    if columns.is_empty() {
        return Err(Error::EmptyInput("correlations need a well with at least two complete rows"));
    }
    let values = match mode {
        CorrelationMode::Global => {
            let mut pooled: [Vec<f64>; 4] = Default::default();
            for c in &columns {
                for k in 0..4 {
                    pooled[k].extend_from_slice(&c[k]);
                }
            }
            matrix(&pooled)
        }
        CorrelationMode::PerWell => {
            let mut sum = [[0.0; 4]; 4];
            let mut count = [[0usize; 4]; 4];
            for c in &columns {
                let m = matrix(c);
                for i in 0..4 {
                    for j in 0..4 {
                        if let Some(v) = m[i][j] {
                            sum[i][j] += v;
                            count[i][j] += 1;
                        }
                    }
                }
            }
            std::array::from_fn(|i| {
                std::array::from_fn(|j| (count[i][j] > 0).then(|| (sum[i][j] / count[i][j] as f64).clamp(-1.0, 1.0)))
            })
        }
    };
    Ok(CorrelationMatrix { mode, values, wells: columns.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::well::tests::header;

    fn well(name: &str, cols: [Vec<f64>; 4]) -> WellLog {
        let rows = cols[0].len();
        let cols = cols.map(|c| c.into_iter().map(Some).collect());
        WellLog::new(header(name, 0.0, 1.0, rows), cols, vec![]).unwrap()
    }

    #[test]
    fn perfect_and_inverse_correlation() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let w = well("A", [x.clone(), x.clone(), neg, vec![5.0; 10]]);
        let m = correlations(&[w], CorrelationMode::Global).unwrap();
        assert!((m.get(PropertyKind::Nphi, PropertyKind::Gr).unwrap() - 1.0).abs() < 1e-12);
        assert!((m.get(PropertyKind::Nphi, PropertyKind::Rhob).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(m.get(PropertyKind::Vp, PropertyKind::Gr), None);
        assert_eq!(m.get(PropertyKind::Gr, PropertyKind::Gr), Some(1.0));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.values[i][j], m.values[j][i]);
            }
        }
    }

    #[test]
    fn per_well_mode_averages() {
        // correlation 0.2 and 0.6 built from a shared x and a mixed y
        let x = [1.0, -1.0, 1.0, -1.0];
        let z = [1.0, 1.0, -1.0, -1.0];
        let mix = |r: f64| -> Vec<f64> { x.iter().zip(&z).map(|(a, b)| r * a + (1.0 - r * r).sqrt() * b).collect() };
        let a = well("A", [x.to_vec(), mix(0.2), x.to_vec(), x.to_vec()]);
        let b = well("B", [x.to_vec(), mix(0.6), x.to_vec(), x.to_vec()]);
        let m = correlations(&[a, b], CorrelationMode::PerWell).unwrap();
        assert!((m.get(PropertyKind::Nphi, PropertyKind::Gr).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(m.wells, 2);
    }

    #[test]
    fn wells_without_complete_rows_are_skipped() {
        let w = well("A", [vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0], vec![4.0, 5.0]]);
        let mut cols = w.curve_values();
        cols[PropertyKind::Vp.index()][1] = None;
        let w = w.with_curves(cols).unwrap();
        assert!(correlations(&[w], CorrelationMode::PerWell).is_err());
        assert!("per-well".parse::<CorrelationMode>().is_ok());
    }
}
