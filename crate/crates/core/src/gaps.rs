//! Gap detection, missingness statistics, the gap-coincidence graph and
//! well quality filtering.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, quantile_sorted, sorted, std_dev};
use crate::well::{Gap, PropertyKind, WellLog};

/// Runs of missing samples at or below this span are not gaps.
pub const DEFAULT_MIN_SPAN: f64 = 0.3;

/// Gaps whose start depths differ by at most this much may coincide.
pub const COINCIDENCE_START_TOLERANCE: f64 = 10.0;
/// ... and whose spans differ by at most this fraction of the larger span.
pub const COINCIDENCE_SIZE_TOLERANCE: f64 = 0.10;

/// Absolute slack on span comparisons; absorbs `k * step` rounding.
const SPAN_EPSILON: f64 = 1e-9;

/// Maximal runs of missing values in `property` spanning more than
/// `min_span` meters, sorted by start row. A run that begins at row 0 is
/// the deliberately unlogged top of the borehole and is never reported.
pub fn detect_gaps(well: &WellLog, property: PropertyKind, min_span: f64) -> Vec<Gap> {
    let values = &well.curve(property).values;
    let mut gaps = Vec::new();
    let mut row = 0;
    while row < values.len() {
        if values[row].is_some() {
            row += 1;
            continue;
        }
        let start = row;
        while row < values.len() && values[row].is_none() {
            row += 1;
        }
        if start == 0 {
            continue;
        }
        let gap = Gap::new(well, property, start, row - start);
        if gap.span > min_span + SPAN_EPSILON {
            gaps.push(gap);
        }
    }
    gaps
}

/// Gaps of all four properties, property by property.
pub fn detect_all_gaps(well: &WellLog, min_span: f64) -> Vec<Gap> {
    PropertyKind::ALL
        .iter()
        .flat_map(|&p| detect_gaps(well, p, min_span))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanSummary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl SpanSummary {
    pub fn from_spans(spans: &[f64]) -> Option<SpanSummary> {
        let s = sorted(spans);
        Some(SpanSummary {
            count: s.len(),
            mean: mean(&s)?,
            std_dev: std_dev(&s)?,
            min: s[0],
            q1: quantile_sorted(&s, 0.25)?,
            median: quantile_sorted(&s, 0.5)?,
            q3: quantile_sorted(&s, 0.75)?,
            max: s[s.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyStats {
    pub property: PropertyKind,
    pub missing_fraction: f64,
    pub gap_count: usize,
    pub gaps_per_km: f64,
    pub spans: Option<SpanSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    pub wells: usize,
    pub total_rows: usize,
    pub extent_km: f64,
    pub complete_fraction: f64,
    /// Gaps of every property per km of logged extent.
    pub gaps_per_km: f64,
    pub properties: Vec<PropertyStats>,
}

impl GapStats {
    pub fn property(&self, kind: PropertyKind) -> &PropertyStats {
        &self.properties[kind.index()]
    }

    /// One CSV row per property.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "property",
            "missing_fraction",
            "complete_fraction",
            "gap_count",
            "gaps_per_km",
            "mean_span",
            "std_span",
            "min_span",
            "q1_span",
            "median_span",
            "q3_span",
            "max_span",
        ])?;
        for p in &self.properties {
            let mut rec = vec![
                p.property.to_string(),
                p.missing_fraction.to_string(),
                self.complete_fraction.to_string(),
                p.gap_count.to_string(),
                p.gaps_per_km.to_string(),
            ];
            match &p.spans {
                Some(s) => rec.extend(
                    [s.mean, s.std_dev, s.min, s.q1, s.median, s.q3, s.max].map(|v| v.to_string()),
                ),
                None => rec.extend(std::iter::repeat_n(String::new(), 7)),
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Corpus-wide missing fractions, complete-row fraction and gap statistics.
pub fn missingness(wells: &[WellLog]) -> Result<GapStats> {
    if wells.is_empty() {
        return Err(Error::EmptyInput("missingness needs at least one well"));
    }
    let total_rows: usize = wells.iter().map(|w| w.rows()).sum();
    let extent_km: f64 = wells.iter().map(|w| w.extent()).sum::<f64>() / 1000.0;
    let complete: usize = wells.iter().map(|w| w.complete_rows().len()).sum();

    let mut properties = Vec::with_capacity(4);
    let mut all_gaps = 0;
    for kind in PropertyKind::ALL {
        let missing: usize = wells.iter().map(|w| w.curve(kind).missing_count()).sum();
        let spans: Vec<f64> = wells
            .iter()
            .flat_map(|w| detect_gaps(w, kind, DEFAULT_MIN_SPAN))
            .map(|g| g.span)
            .collect();
        all_gaps += spans.len();
        properties.push(PropertyStats {
            property: kind,
            missing_fraction: missing as f64 / total_rows as f64,
            gap_count: spans.len(),
            gaps_per_km: spans.len() as f64 / extent_km,
            spans: SpanSummary::from_spans(&spans),
        });
    }
    Ok(GapStats {
        wells: wells.len(),
        total_rows,
        extent_km,
        complete_fraction: complete as f64 / total_rows as f64,
        gaps_per_km: all_gaps as f64 / extent_km,
        properties,
    })
}

/// Undirected graph over the gaps of one well; an edge joins two gaps of
/// different properties with similar start depth and span.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceGraph {
    pub nodes: Vec<Gap>,
    pub edges: Vec<(usize, usize)>,
    /// Connected components as sorted node indices, ordered by first node.
    pub components: Vec<Vec<usize>>,
}

/// Whether two gaps count as the same missing interval.
pub fn coincide(a: &Gap, b: &Gap) -> bool {
    if a.property == b.property {
        return false;
    }
    let larger = a.span.max(b.span);
    (a.start_depth - b.start_depth).abs() <= COINCIDENCE_START_TOLERANCE + SPAN_EPSILON
        && (a.span - b.span).abs() <= COINCIDENCE_SIZE_TOLERANCE * larger + SPAN_EPSILON
}

impl CoincidenceGraph {
    pub fn from_gaps(nodes: Vec<Gap>) -> CoincidenceGraph {
        let n = nodes.len();
        let mut edges = Vec::new();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if coincide(&nodes[i], &nodes[j]) {
                    edges.push((i, j));
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        let mut components: Vec<Vec<usize>> = groups.into_values().collect();
        components.sort_by_key(|c| c[0]);
        CoincidenceGraph { nodes, edges, components }
    }

    /// Component order (node count) -> number of components.
    pub fn order_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for c in &self.components {
            *hist.entry(c.len()).or_insert(0) += 1;
        }
        hist
    }
}

pub fn coincidence_graph(well: &WellLog) -> CoincidenceGraph {
    CoincidenceGraph::from_gaps(detect_all_gaps(well, DEFAULT_MIN_SPAN))
}

/// Component-order histogram summed over wells.
pub fn component_histogram(wells: &[WellLog]) -> BTreeMap<usize, usize> {
    let mut total = BTreeMap::new();
    for w in wells {
        for (order, count) in coincidence_graph(w).order_histogram() {
            *total.entry(order).or_insert(0) += count;
        }
    }
    total
}

/// `order,count,fraction` rows.
pub fn write_histogram_csv<W: Write>(hist: &BTreeMap<usize, usize>, out: W) -> Result<()> {
    let total: usize = hist.values().sum();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["order", "count", "fraction"])?;
    for (order, count) in hist {
        let frac = if total == 0 { 0.0 } else { *count as f64 / total as f64 };
        w.write_record([order.to_string(), count.to_string(), frac.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// How the complete-sample ratio is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RatioMode {
    /// complete rows / all rows
    #[default]
    CompleteOverTotal,
    /// complete rows / incomplete rows
    CompleteOverIncomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterCriteria {
    pub min_depth: f64,
    pub max_gap: f64,
    pub min_complete_ratio: f64,
    #[serde(default)]
    pub ratio_mode: RatioMode,
}

impl Default for FilterCriteria {
    fn default() -> Self {
        FilterCriteria {
            min_depth: 1500.0,
            max_gap: 50.0,
            min_complete_ratio: 0.5,
            ratio_mode: RatioMode::CompleteOverTotal,
        }
    }
}

impl FilterCriteria {
    pub fn validate(&self) -> Result<()> {
        if self.min_depth > 0.0 && self.max_gap > 0.0 && self.min_complete_ratio > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("filter criteria must be positive: {self:?}")))
        }
    }

    /// First violated criterion, checked in the order depth, gap, ratio.
    pub fn check(&self, well: &WellLog) -> Option<Rejection> {
        if well.extent() < self.min_depth {
            return Some(Rejection::TooShallow { extent: well.extent() });
        }
        if let Some(g) = detect_all_gaps(well, DEFAULT_MIN_SPAN)
            .into_iter()
            .find(|g| g.span > self.max_gap + SPAN_EPSILON)
        {
            return Some(Rejection::GapTooLarge { property: g.property, span: g.span });
        }
        let ratio = complete_ratio(well, self.ratio_mode);
        if ratio < self.min_complete_ratio {
            return Some(Rejection::TooIncomplete { ratio });
        }
        None
    }
}

pub fn complete_ratio(well: &WellLog, mode: RatioMode) -> f64 {
    let complete = well.complete_rows().len() as f64;
    match mode {
        RatioMode::CompleteOverTotal => complete / well.rows() as f64,
        RatioMode::CompleteOverIncomplete => {
            let incomplete = well.rows() as f64 - complete;
            if incomplete == 0.0 {
                f64::INFINITY
            } else {
                complete / incomplete
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "criterion", rename_all = "snake_case")]
pub enum Rejection {
    TooShallow { extent: f64 },
    GapTooLarge { property: PropertyKind, span: f64 },
    TooIncomplete { ratio: f64 },
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::TooShallow { extent } => write!(f, "min_depth: logged extent {extent:.1} m"),
            Rejection::GapTooLarge { property, span } => {
                write!(f, "max_gap: {property} gap of {span:.2} m")
            }
            Rejection::TooIncomplete { ratio } => write!(f, "min_complete_ratio: {ratio:.3}"),
        }
    }
}

#[derive(Debug)]
pub struct FilterOutcome<'a> {
    pub accepted: Vec<&'a WellLog>,
    pub rejected: Vec<(&'a WellLog, Rejection)>,
}

pub fn filter_wells<'a>(wells: &'a [WellLog], criteria: &FilterCriteria) -> FilterOutcome<'a> {
    let mut outcome = FilterOutcome { accepted: Vec::new(), rejected: Vec::new() };
    for w in wells {
        match criteria.check(w) {
            None => outcome.accepted.push(w),
            Some(r) => outcome.rejected.push((w, r)),
        }
    }
    outcome
}
