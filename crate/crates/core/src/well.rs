//! Wells, curves and the regular depth grid shared by every other module.
//!
//! A [`WellLog`] is immutable once built. Missing samples are stored as
//! `None`; the LAS null sentinel never survives parsing. The depth grid is
//! kept as `(start, step, rows)` and depths are computed on demand.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact length of one international foot in meters.
pub const FOOT_IN_METERS: f64 = 0.3048;

/// Relative tolerance on `(stop - start) / step` being an integer.
const GRID_TOLERANCE: f64 = 1e-6;

/// The four rock properties every analysis works with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PropertyKind {
    Nphi,
    Gr,
    Rhob,
    Vp,
}

impl PropertyKind {
    pub const ALL: [PropertyKind; 4] = [
        PropertyKind::Nphi,
        PropertyKind::Gr,
        PropertyKind::Rhob,
        PropertyKind::Vp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            PropertyKind::Nphi => "NPHI",
            PropertyKind::Gr => "GR",
            PropertyKind::Rhob => "RHOB",
            PropertyKind::Vp => "VP",
        }
    }

    /// Conventional unit label written to LAS curve sections.
    pub fn unit(self) -> &'static str {
        match self {
            PropertyKind::Nphi => "V/V",
            PropertyKind::Gr => "API",
            PropertyKind::Rhob => "G/C3",
            PropertyKind::Vp => "US/F",
        }
    }

    /// The three other properties, in canonical order.
    pub fn siblings(self) -> [PropertyKind; 3] {
        let mut out = [self; 3];
        let mut i = 0;
        for kind in Self::ALL {
            if kind != self {
                out[i] = kind;
                i += 1;
            }
        }
        out
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

impl FromStr for PropertyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NPHI" => Ok(PropertyKind::Nphi),
            "GR" => Ok(PropertyKind::Gr),
            "RHOB" => Ok(PropertyKind::Rhob),
            "VP" => Ok(PropertyKind::Vp),
            other => Err(Error::InvalidConfig(format!("unknown property {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordSystem {
    ProjectedMeters,
    GeographicDegrees,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthUnit {
    Meters,
    Feet,
}

impl DepthUnit {
    pub fn to_meters(self) -> f64 {
        match self {
            DepthUnit::Meters => 1.0,
            DepthUnit::Feet => FOOT_IN_METERS,
        }
    }
}

impl FromStr for DepthUnit {
    type Err = Error;

    /// Accepts the unit spellings found in LAS headers (`M`, `F`, `FT`, ...).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "M" | "METER" | "METERS" | "METRE" | "METRES" => Ok(DepthUnit::Meters),
            "F" | "FT" | "FEET" | "FOOT" => Ok(DepthUnit::Feet),
            _ => Err(Error::UnsupportedUnit(s.trim().to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellHeader {
    pub well_name: String,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub coord_system: CoordSystem,
    pub start_depth: f64,
    pub stop_depth: f64,
    pub step: f64,
    pub null_value: f64,
    pub depth_unit: DepthUnit,
}

impl WellHeader {
    /// Number of grid rows implied by start, stop and step.
    pub fn row_count(&self) -> Result<usize> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidWell(format!("step must be > 0, got {}", self.step)));
        }
        if !(self.stop_depth > self.start_depth) {
            return Err(Error::InvalidWell(format!(
                "stop depth {} must exceed start depth {}",
                self.stop_depth, self.start_depth
            )));
        }
        let intervals = (self.stop_depth - self.start_depth) / self.step;
        let rounded = intervals.round();
        if (intervals - rounded).abs() > GRID_TOLERANCE {
            return Err(Error::InvalidWell(format!(
                "extent {} is not a multiple of step {}",
                self.stop_depth - self.start_depth,
                self.step
            )));
        }
        Ok(rounded as usize + 1)
    }

    /// Logged extent `stop - start`.
    pub fn extent(&self) -> f64 {
        self.stop_depth - self.start_depth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: PropertyKind,
    pub values: Vec<Option<f64>>,
}

impl Curve {
    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// A curve whose mnemonic does not map to a [`PropertyKind`]. Kept for
/// round-tripping, never analysed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraCurve {
    pub mnemonic: String,
    pub unit: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellLog {
    header: WellHeader,
    rows: usize,
    curves: [Curve; 4],
    extras: Vec<ExtraCurve>,
}

impl WellLog {
    /// Builds a well, checking the grid and every curve against it.
    ///
    /// `curves` is indexed by [`PropertyKind::index`]. A property absent from
    /// the source is passed as an all-`None` column.
    pub fn new(
        header: WellHeader,
        curves: [Vec<Option<f64>>; 4],
        extras: Vec<ExtraCurve>,
    ) -> Result<Self> {
        let rows = header.row_count()?;
        if !header.start_depth.is_finite() || !header.null_value.is_finite() {
            return Err(Error::InvalidWell("non-finite header value".into()));
        }
        let check = |name: &str, values: &[Option<f64>]| -> Result<()> {
            if values.len() != rows {
                return Err(Error::InvalidWell(format!(
                    "curve {name} has {} values, grid has {rows} rows",
                    values.len()
                )));
            }
            for v in values.iter().flatten() {
                if !v.is_finite() {
                    return Err(Error::InvalidWell(format!("curve {name} holds {v}")));
                }
                if *v == header.null_value {
                    return Err(Error::InvalidWell(format!(
                        "curve {name} stores the null sentinel {v}"
                    )));
                }
            }
            Ok(())
        };
        for (kind, values) in PropertyKind::ALL.iter().zip(curves.iter()) {
            check(kind.mnemonic(), values)?;
        }
        for extra in &extras {
            check(&extra.mnemonic, &extra.values)?;
        }
        let [nphi, gr, rhob, vp] = curves;
        Ok(WellLog {
            header,
            rows,
            curves: [
                Curve { kind: PropertyKind::Nphi, values: nphi },
                Curve { kind: PropertyKind::Gr, values: gr },
                Curve { kind: PropertyKind::Rhob, values: rhob },
                Curve { kind: PropertyKind::Vp, values: vp },
            ],
            extras,
        })
    }

    pub fn header(&self) -> &WellHeader {
        &self.header
    }

    pub fn name(&self) -> &str {
        &self.header.well_name
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn step(&self) -> f64 {
        self.header.step
    }

    pub fn extent(&self) -> f64 {
        self.header.extent()
    }

    pub fn depth(&self, row: usize) -> f64 {
        self.header.start_depth + row as f64 * self.header.step
    }

    pub fn depths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(|i| self.depth(i))
    }

    pub fn curve(&self, kind: PropertyKind) -> &Curve {
        &self.curves[kind.index()]
    }

    pub fn curves(&self) -> &[Curve; 4] {
        &self.curves
    }

    pub fn extras(&self) -> &[ExtraCurve] {
        &self.extras
    }

    pub fn value(&self, kind: PropertyKind, row: usize) -> Option<f64> {
        self.curves[kind.index()].values[row]
    }

    pub fn is_complete(&self, row: usize) -> bool {
        self.curves.iter().all(|c| c.values[row].is_some())
    }

    /// Rows where all four properties carry a value.
    pub fn complete_rows(&self) -> Vec<usize> {
        (0..self.rows).filter(|&r| self.is_complete(r)).collect()
    }

    /// Nearest grid row to `depth`.
    pub fn row_at_depth(&self, depth: f64) -> Result<usize> {
        let start = self.header.start_depth;
        let stop = self.depth(self.rows - 1);
        let slack = 1e-9 * self.header.step;
        if !(depth >= start - slack && depth <= stop + slack) {
            return Err(Error::DepthOutOfRange { depth, start, stop });
        }
        let row = ((depth - start) / self.header.step).round() as usize;
        Ok(row.min(self.rows - 1))
    }

    /// Copy with depths and step expressed in meters. Identity on metric wells.
    pub fn convert_units(&self) -> WellLog {
        if self.header.depth_unit == DepthUnit::Meters {
            return self.clone();
        }
        let factor = self.header.depth_unit.to_meters();
        let mut header = self.header.clone();
        header.start_depth *= factor;
        header.step *= factor;
        // keep the row count exact instead of trusting the scaled stop value
        header.stop_depth = header.start_depth + (self.rows - 1) as f64 * header.step;
        header.depth_unit = DepthUnit::Meters;
        WellLog {
            header,
            rows: self.rows,
            curves: self.curves.clone(),
            extras: self.extras.clone(),
        }
    }

    /// Copy with new values for the four analysis curves. Header and extras
    /// are kept.
    pub fn with_curves(&self, curves: [Vec<Option<f64>>; 4]) -> Result<WellLog> {
        WellLog::new(self.header.clone(), curves, self.extras.clone())
    }

    pub fn with_header(&self, header: WellHeader) -> Result<WellLog> {
        WellLog::new(header, self.curve_values(), self.extras.clone())
    }

    /// Owned copy of the four analysis columns.
    pub fn curve_values(&self) -> [Vec<Option<f64>>; 4] {
        [
            self.curves[0].values.clone(),
            self.curves[1].values.clone(),
            self.curves[2].values.clone(),
            self.curves[3].values.clone(),
        ]
    }
}

/// A maximal run of missing samples in one property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub property: PropertyKind,
    pub start_row: usize,
    pub row_count: usize,
    pub start_depth: f64,
    /// `row_count * step`.
    pub span: f64,
}

impl Gap {
    pub fn new(well: &WellLog, property: PropertyKind, start_row: usize, row_count: usize) -> Gap {
        Gap {
            property,
            start_row,
            row_count,
            start_depth: well.depth(start_row),
            span: row_count as f64 * well.step(),
        }
    }

    /// One past the last row.
    pub fn end_row(&self) -> usize {
        self.start_row + self.row_count
    }

    pub fn rows(&self) -> std::ops::Range<usize> {
        self.start_row..self.end_row()
    }
}
