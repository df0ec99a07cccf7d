//! Artificial gap injection with retained ground truth.
//!
//! Gap centres follow the density `p(u) = 2u` over relative depth `u`, so
//! deeper intervals are hit more often. Sizes are drawn from
//! `Normal(mean, stddev)`, clipped to `[step, extent / 2]`, then scaled by a
//! factor that falls linearly with `u` (ratio 1.25 : 0.75 between top and
//! bottom) and is normalised to average 1 under `p(u)`, so shallow gaps are
//! larger while the mean size stays at the nominal value.
//!
//! Placement first packs one joint draw of all gaps, pushing overlapping
//! intervals apart in depth order so no draw is discarded. That keeps the
//! position and size laws intact. When a packed layout hits real missing
//! data it is redrawn, up to [`MAX_ATTEMPTS`] times, after which gaps are
//! placed one at a time with per-gap rejection.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::Range;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::DEFAULT_MIN_SPAN;
use crate::rng::{derive_seed, rng, Rng};
use crate::well::{Gap, PropertyKind, WellLog};

pub const MAX_ATTEMPTS: usize = 100;

/// Depth factor at relative depth 0 and 1 before normalisation.
const TOP_FACTOR: f64 = 1.25;
const BOTTOM_FACTOR: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSpec {
    pub mean_size: f64,
    pub size_stddev: f64,
    pub gaps_per_km: f64,
    pub seed: u64,
    /// Blank the same interval in all four properties.
    pub aligned: bool,
}

impl Default for GapSpec {
    fn default() -> Self {
        GapSpec { mean_size: 150.0, size_stddev: 50.0, gaps_per_km: 2.0, seed: 0, aligned: true }
    }
}

impl GapSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mean_size > 0.0
            && self.size_stddev >= 0.0
            && self.gaps_per_km >= 0.0
            && self.mean_size.is_finite()
            && self.size_stddev.is_finite()
            && self.gaps_per_km.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid gap spec {self:?}")))
        }
    }

    /// Number of gaps for a well of the given logged extent.
    pub fn gap_count(&self, extent_m: f64) -> usize {
        (self.gaps_per_km * extent_m / 1000.0).round() as usize
    }

    /// Depth multiplier at relative depth `u`, averaging 1 under `p(u) = 2u`.
    pub fn depth_factor(u: f64) -> f64 {
        let slope = TOP_FACTOR - BOTTOM_FACTOR;
        // E[1.25 - 0.5 u] with E[u] = 2/3
        let mean = TOP_FACTOR - slope * 2.0 / 3.0;
        (TOP_FACTOR - slope * u) / mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectionResult {
    pub modified_well: WellLog,
    /// One entry per blanked (interval, property).
    pub injected: Vec<Gap>,
    pub ground_truth: BTreeMap<(usize, PropertyKind), f64>,
}

impl InjectionResult {
    /// Distinct blanked row intervals, sorted.
    pub fn intervals(&self) -> Vec<Range<usize>> {
        let mut v: Vec<Range<usize>> = self.injected.iter().map(|g| g.rows()).collect();
        v.sort_by_key(|r| (r.start, r.end));
        v.dedup();
        v
    }

    /// Blanked rows of one property.
    pub fn gap_rows(&self, property: PropertyKind) -> Vec<usize> {
        let mut rows: Vec<usize> = self
            .injected
            .iter()
            .filter(|g| g.property == property)
            .flat_map(|g| g.rows())
            .collect();
        rows.sort_unstable();
        rows
    }

    /// `well,property,row,depth,value` rows.
    pub fn write_ground_truth_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["well", "property", "row", "depth", "value"])?;
        let well = &self.modified_well;
        for ((row, property), value) in &self.ground_truth {
            w.write_record([
                well.name().to_string(),
                property.to_string(),
                row.to_string(),
                well.depth(*row).to_string(),
                value.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Reads a ground-truth CSV written by
/// [`InjectionResult::write_ground_truth_csv`].
pub fn read_ground_truth_csv<R: std::io::Read>(input: R) -> Result<BTreeMap<(usize, PropertyKind), f64>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut map = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let bad = |what: &str| Error::parse(i + 2, format!("bad {what} in ground-truth CSV"));
        let property: PropertyKind = field(1).parse().map_err(|_| bad("property"))?;
        let row: usize = field(2).parse().map_err(|_| bad("row"))?;
        let value: f64 = field(4).parse().map_err(|_| bad("value"))?;
        map.insert((row, property), value);
    }
    Ok(map)
}

/// Blanks artificial gaps in `well`. Deterministic in `(well, spec)`; the
/// random stream is derived from `spec.seed` and the well name.
pub fn inject_gaps(well: &WellLog, spec: &GapSpec) -> Result<InjectionResult> {
    spec.validate()?;
    let n = spec.gap_count(well.extent());
    let groups: Vec<Vec<PropertyKind>> = if spec.aligned {
        vec![PropertyKind::ALL.to_vec()]
    } else {
        PropertyKind::ALL.iter().map(|p| vec![*p]).collect()
    };

    let mut columns = well.curve_values();
    let mut injected = Vec::new();
    let mut ground_truth = BTreeMap::new();
    for props in groups {
        let labels: Vec<&str> = std::iter::once(well.name())
            .chain(props.iter().map(|p| p.mnemonic()))
            .collect();
        let mut rng = rng(derive_seed(spec.seed, &labels));
        let intervals = place_gaps(well, &props, n, spec, &mut rng)?;
        for range in intervals {
            for &p in &props {
                for row in range.clone() {
                    let value = columns[p.index()][row]
                        .take()
                        .expect("placement only selects present cells");
                    ground_truth.insert((row, p), value);
                }
                injected.push(Gap::new(well, p, range.start, range.len()));
            }
        }
    }
    injected.sort_by_key(|g| (g.start_row, g.property));
    Ok(InjectionResult {
        modified_well: well.with_curves(columns)?,
        injected,
        ground_truth,
    })
}

/// Undoes an injection. Every blanked cell must have a ground-truth entry.
pub fn restore(result: &InjectionResult) -> Result<WellLog> {
    let mut columns = result.modified_well.curve_values();
    let mut missing = Vec::new();
    for gap in &result.injected {
        for row in gap.rows() {
            match result.ground_truth.get(&(row, gap.property)) {
                Some(v) => columns[gap.property.index()][row] = Some(*v),
                None => missing.push((row, gap.property)),
            }
        }
    }
    if let Some(&(row, property)) = missing.first() {
        return Err(Error::IncompleteRestoration { missing: missing.len(), row, property });
    }
    result.modified_well.with_curves(columns)
}

struct Candidate {
    center: f64,
    rows: usize,
}

fn place_gaps(
    well: &WellLog,
    props: &[PropertyKind],
    n: usize,
    spec: &GapSpec,
    rng: &mut Rng,
) -> Result<Vec<Range<usize>>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let rows = well.rows();
    let infeasible = |reason: String| Error::InfeasibleInjection { well: well.name().to_string(), reason };
    if rows < 3 {
        return Err(infeasible("well too short".into()));
    }
    // one-row margin at both ends
    let (lo, hi) = (1usize, rows - 1);
    let known: Vec<bool> = (0..rows)
        .map(|r| props.iter().all(|p| well.value(*p, r).is_some()))
        .collect();
    let available = known[lo..hi].iter().filter(|k| **k).count();
    let demanded = n * ((spec.mean_size / well.step()).round() as usize).max(1);
    if demanded > available {
        return Err(infeasible(format!(
            "{n} gaps of {} m need about {demanded} rows, only {available} are available",
            spec.mean_size
        )));
    }

    let min_rows = min_detectable_rows(well.step());
    let max_rows = ((well.extent() / 2.0) / well.step()).floor().max(1.0) as usize;
    let size_law = Normal::new(spec.mean_size, spec.size_stddev)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let draw = |rng: &mut Rng| -> Candidate {
        let u = rng.random::<f64>().sqrt();
        let size = size_law
            .sample(rng)
            .clamp(well.step(), well.extent() / 2.0)
            * GapSpec::depth_factor(u);
        let count = ((size / well.step()).round() as usize)
            .clamp(min_rows, max_rows.max(min_rows))
            .min(hi - lo);
        Candidate { center: u * (rows - 1) as f64, rows: count }
    };
    let fits = |r: &Range<usize>| r.start >= lo && r.end <= hi && known[r.clone()].iter().all(|k| *k);

    for _ in 0..MAX_ATTEMPTS {
        let candidates: Vec<Candidate> = (0..n).map(|_| draw(rng)).collect();
        if let Some(layout) = pack(&candidates, lo, hi) {
            if layout.iter().all(&fits) {
                return Ok(layout);
            }
        }
    }

    // sequential per-gap rejection
    let mut placed: Vec<Range<usize>> = Vec::new();
    for _ in 0..n {
        let mut ok = None;
        for _ in 0..MAX_ATTEMPTS {
            let c = draw(rng);
            let start = (c.center - c.rows as f64 / 2.0).round().max(lo as f64) as usize;
            let r = start..start + c.rows;
            let clear = placed.iter().all(|p| r.end < p.start || r.start > p.end);
            if clear && fits(&r) {
                ok = Some(r);
                break;
            }
        }
        match ok {
            Some(r) => placed.push(r),
            None => {
                return Err(infeasible(format!(
                    "could not place gap {} of {n} clear of missing data after {MAX_ATTEMPTS} attempts",
                    placed.len() + 1
                )))
            }
        }
    }
    placed.sort_by_key(|r| r.start);
    Ok(placed)
}

/// Smallest row count whose span exceeds the gap threshold.
fn min_detectable_rows(step: f64) -> usize {
    (DEFAULT_MIN_SPAN / step + 1e-9).floor() as usize + 1
}

/// Lays candidates out in centre order inside `[lo, hi)`, keeping at least one
/// present row between neighbours. Returns `None` if they do not fit.
fn pack(candidates: &[Candidate], lo: usize, hi: usize) -> Option<Vec<Range<usize>>> {
    let mut order: Vec<&Candidate> = candidates.iter().collect();
    order.sort_by(|a, b| a.center.total_cmp(&b.center));
    let mut starts: Vec<i64> = order
        .iter()
        .map(|c| (c.center - c.rows as f64 / 2.0).round() as i64)
        .collect();
    let (lo, hi) = (lo as i64, hi as i64);
    let mut floor = lo;
    for (s, c) in starts.iter_mut().zip(&order) {
        *s = (*s).max(floor);
        floor = *s + c.rows as i64 + 1;
    }
    let mut ceiling = hi;
    for (s, c) in starts.iter_mut().zip(&order).rev() {
        *s = (*s).min(ceiling - c.rows as i64);
        ceiling = *s - 1;
    }
    if starts.first().is_some_and(|s| *s < lo) {
        return None;
    }
    Some(
        starts
            .iter()
            .zip(&order)
            .map(|(s, c)| *s as usize..*s as usize + c.rows)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaps::detect_gaps;
    use crate::well::tests::{full_well, header};

    fn long_well(name: &str, extent: f64) -> WellLog {
        let step = 0.15;
        let rows = (extent / step).round() as usize + 1;
        let col = |k: f64| (0..rows).map(|i| Some(k + (i % 97) as f64)).collect::<Vec<_>>();
        WellLog::new(header(name, 1000.0, step, rows), [col(1.0), col(50.0), col(2.0), col(80.0)], vec![]).unwrap()
    }

    #[test]
    fn zero_rate_leaves_well_unchanged() {
        let w = long_well("Z", 3000.0);
        let spec = GapSpec { gaps_per_km: 0.0, ..GapSpec::default() };
        let r = inject_gaps(&w, &spec).unwrap();
        assert!(r.injected.is_empty() && r.ground_truth.is_empty());
        assert_eq!(r.modified_well, w);
    }

    #[test]
    fn injection_is_deterministic() {
        let w = long_well("D", 3000.0);
        let spec = GapSpec { seed: 11, ..GapSpec::default() };
        assert_eq!(inject_gaps(&w, &spec).unwrap(), inject_gaps(&w, &spec).unwrap());
        let other = inject_gaps(&w, &GapSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(other.intervals(), inject_gaps(&w, &spec).unwrap().intervals());
    }

    #[test]
    fn default_spec_on_3km_gives_six_aligned_detectable_gaps() {
        let w = long_well("S", 3000.0);
        let r = inject_gaps(&w, &GapSpec { seed: 3, ..GapSpec::default() }).unwrap();
        assert_eq!(r.intervals().len(), 6);
        assert_eq!(r.injected.len(), 24);
        for kind in PropertyKind::ALL {
            let found: Vec<Range<usize>> = detect_gaps(&r.modified_well, kind, DEFAULT_MIN_SPAN)
                .iter()
                .map(|g| g.rows())
                .collect();
            assert_eq!(found, r.intervals());
        }
        assert_eq!(restore(&r).unwrap(), w);
    }

    #[test]
    fn unaligned_mode_blanks_properties_independently() {
        let w = long_well("U", 3000.0);
        let r = inject_gaps(&w, &GapSpec { aligned: false, seed: 5, ..GapSpec::default() }).unwrap();
        for kind in PropertyKind::ALL {
            assert_eq!(r.injected.iter().filter(|g| g.property == kind).count(), 6);
        }
        assert_ne!(r.gap_rows(PropertyKind::Nphi), r.gap_rows(PropertyKind::Gr));
        assert_eq!(restore(&r).unwrap(), w);
    }

    #[test]
    fn existing_missing_data_is_never_blanked() {
        let base = long_well("M", 3000.0);
        let mut cols = base.curve_values();
        // a 30 m real gap in GR every 600 m
        for k in 0..5 {
            let s = 1000 + k * 4000;
            for r in s..s + 200 {
                cols[PropertyKind::Gr.index()][r] = None;
            }
        }
        let w = base.with_curves(cols).unwrap();
        for seed in 0..20 {
            let r = inject_gaps(&w, &GapSpec { seed, ..GapSpec::default() }).unwrap();
            for ((row, prop), _) in &r.ground_truth {
                assert!(w.value(*prop, *row).is_some());
            }
            assert_eq!(restore(&r).unwrap(), w);
        }
    }

    #[test]
    fn infeasible_demand_is_reported() {
        let w = full_well("T", 1000.0, 0.15, 2000); // 300 m
        let spec = GapSpec { gaps_per_km: 40.0, ..GapSpec::default() };
        assert!(matches!(inject_gaps(&w, &spec), Err(Error::InfeasibleInjection { .. })));
    }

    #[test]
    fn restore_detects_tampering() {
        let w = long_well("R", 3000.0);
        let mut r = inject_gaps(&w, &GapSpec::default()).unwrap();
        let key = *r.ground_truth.keys().nth(5).unwrap();
        r.ground_truth.remove(&key);
        match restore(&r) {
            Err(Error::IncompleteRestoration { missing, row, property }) => {
                assert_eq!(missing, 1);
                assert_eq!((row, property), key);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_injection_restores_identity() {
        let w = long_well("E", 500.0);
        let r = inject_gaps(&w, &GapSpec { gaps_per_km: 0.0, ..GapSpec::default() }).unwrap();
        assert_eq!(restore(&r).unwrap(), w);
    }

    #[test]
    fn depth_factor_is_mean_one_and_decreasing() {
        // midpoint rule for the integral of 2u f(u)
        let n = 100_000;
        let integral: f64 = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                2.0 * u * GapSpec::depth_factor(u) / n as f64
            })
            .sum();
        assert!((integral - 1.0).abs() < 1e-9);
        assert!(GapSpec::depth_factor(0.0) > GapSpec::depth_factor(1.0));
        let ratio = GapSpec::depth_factor(0.0) / GapSpec::depth_factor(1.0);
        assert!((ratio - 1.25 / 0.75).abs() < 1e-12);
    }

    #[test]
    fn ground_truth_csv_round_trips() {
        let w = long_well("C", 1000.0);
        let r = inject_gaps(&w, &GapSpec { mean_size: 5.0, size_stddev: 1.0, ..GapSpec::default() }).unwrap();
        let mut buf = Vec::new();
        r.write_ground_truth_csv(&mut buf).unwrap();
        assert_eq!(read_ground_truth_csv(buf.as_slice()).unwrap(), r.ground_truth);
    }

    #[test]
    fn pack_separates_overlaps() {
        let c = [
            Candidate { center: 50.0, rows: 20 },
            Candidate { center: 52.0, rows: 20 },
            Candidate { center: 99.0, rows: 10 },
        ];
        let layout = pack(&c, 1, 100).unwrap();
        for w in layout.windows(2) {
            assert!(w[0].end < w[1].start);
        }
        assert!(layout.iter().all(|r| r.start >= 1 && r.end <= 100));
        assert!(pack(&[Candidate { center: 5.0, rows: 60 }, Candidate { center: 6.0, rows: 60 }], 1, 100).is_none());
    }
}
