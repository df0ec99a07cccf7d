use rayon::prelude::*;
use serde::Serialize;

use super::{score_well, PreparedWell, Strategy, Trainer, WellScore, MAX_NEIGHBORS};
use crate::error::{Error, Result};
use crate::inject::GapSpec;
use crate::models::ModelKind;
use crate::well::{CoordSystem, PropertyKind, WellLog};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

fn coordinates(w: &WellLog) -> Option<(f64, f64)> {
    Some((w.header().x?, w.header().y?))
}

/// Distance between two wells: meters on projected grids, great-circle
/// meters on geographic ones (`x` is longitude, `y` latitude).
pub fn distance(a: &WellLog, b: &WellLog) -> Result<f64> {
    let missing: Vec<String> = [a, b]
        .iter()
        .filter(|w| coordinates(w).is_none())
        .map(|w| w.name().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingCoordinates(missing));
    }
    let (ax, ay) = coordinates(a).expect("checked");
    let (bx, by) = coordinates(b).expect("checked");
    match (a.header().coord_system, b.header().coord_system) {
        (CoordSystem::ProjectedMeters, CoordSystem::ProjectedMeters) => Ok((ax - bx).hypot(ay - by)),
        (CoordSystem::GeographicDegrees, CoordSystem::GeographicDegrees) => {
            let (lat1, lat2) = (ay.to_radians(), by.to_radians());
            let dlat = lat2 - lat1;
            let dlon = (bx - ax).to_radians();
            let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
            Ok(2.0 * EARTH_RADIUS_KM * 1000.0 * h.sqrt().min(1.0).asin())
        }
        _ => Err(Error::InvalidConfig(format!(
            "wells {} and {} use different coordinate systems",
            a.name(),
            b.name()
        ))),
    }
}

/// The `k` wells of `others` closest to `origin`, nearest first, ties by
/// name. Wells named like the origin are skipped. Fewer than `k` are
/// returned when `others` is short.
pub fn nearest_wells<'a>(origin: &WellLog, others: &'a [WellLog], k: usize) -> Result<Vec<(&'a WellLog, f64)>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let candidates: Vec<&WellLog> = others.iter().filter(|w| w.name() != origin.name()).collect();
    let missing: Vec<String> = std::iter::once(origin)
        .chain(candidates.iter().copied())
        .filter(|w| coordinates(w).is_none())
        .map(|w| w.name().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingCoordinates(missing));
    }
    let mut scored: Vec<(&WellLog, f64)> =
        candidates.into_iter().map(|w| distance(origin, w).map(|d| (w, d))).collect::<Result<_>>()?;
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.name().cmp(b.0.name())));
    scored.truncate(k);
    Ok(scored)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub k: usize,
    /// The well added at this step, if any.
    pub added: Option<String>,
    pub score: WellScore,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub well: String,
    pub target: PropertyKind,
    pub model: ModelKind,
    pub points: Vec<SweepPoint>,
    /// Set when fewer than the requested neighbours exist.
    pub truncated_at: Option<usize>,
}

impl Sweep {
    pub fn notice(&self) -> Option<String> {
        self.truncated_at.map(|k| format!("{}: only {k} neighbour wells available, sweep truncated", self.well))
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["well", "target", "model", "k", "added", "n_train", "n_test", "mse", "mape", "error"])?;
        for p in &self.points {
            let s = &p.score;
            w.write_record([
                self.well.clone(),
                self.target.to_string(),
                self.model.to_string(),
                p.k.to_string(),
                p.added.clone().unwrap_or_default(),
                s.n_train.to_string(),
                s.n_test.to_string(),
                s.mse.map(|v| v.to_string()).unwrap_or_default(),
                s.mape.map(|v| v.to_string()).unwrap_or_default(),
                s.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Trains on the test well plus its `k` nearest wells for `k = 0..=k_max`,
/// always scoring the same injected gaps.
#[allow(clippy::too_many_arguments)]
pub fn neighbor_sweep(
    corpus: &[WellLog],
    test_well: &str,
    target: PropertyKind,
    kind: ModelKind,
    gaps: &GapSpec,
    seed: u64,
    k_max: usize,
    trainer: &dyn Trainer,
) -> Result<Sweep> {
    if k_max > MAX_NEIGHBORS {
        return Err(Error::InvalidConfig(format!("k_max {k_max} exceeds {MAX_NEIGHBORS}")));
    }
    let origin = corpus
        .iter()
        .find(|w| w.name() == test_well)
        .ok_or_else(|| Error::UnknownWell(test_well.to_string()))?;
    let neighbours = nearest_wells(origin, corpus, k_max)?;
    let reach = neighbours.len();
    let prepared = PreparedWell::new(origin, gaps, seed)?;

    let points = (0..=reach)
        .into_par_iter()
        .map(|k| {
            let mut training = vec![prepared.modified()];
            training.extend(neighbours[..k].iter().map(|(w, _)| *w));
            SweepPoint {
                k,
                added: k.checked_sub(1).map(|i| neighbours[i].0.name().to_string()),
                score: score_well(&prepared, &training, target, kind, Strategy::Neighbors(k), seed, trainer),
            }
        })
        .collect();
    Ok(Sweep {
        well: test_well.to_string(),
        target,
        model: kind,
        points,
        truncated_at: (reach < k_max).then_some(reach),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_strategy, ModelTrainer};
    use crate::well::tests::full_well;

    fn at(name: &str, x: Option<f64>, y: f64, system: CoordSystem) -> WellLog {
        let w = full_well(name, 0.0, 1.0, 5);
        let mut h = w.header().clone();
        h.x = x;
        h.y = Some(y);
        h.coord_system = system;
        w.with_header(h).unwrap()
    }

    fn projected(name: &str, x: f64, y: f64) -> WellLog {
        at(name, Some(x), y, CoordSystem::ProjectedMeters)
    }

    #[test]
    fn pythagorean_neighbours() {
        let origin = projected("O", 0.0, 0.0);
        let others = [projected("far", 6.0, 8.0), projected("near", 3.0, 4.0)];
        let got = nearest_wells(&origin, &others, 2).unwrap();
        let got: Vec<(&str, f64)> = got.iter().map(|(w, d)| (w.name(), *d)).collect();
        assert_eq!(got, vec![("near", 5.0), ("far", 10.0)]);
        assert!(nearest_wells(&origin, &others, 0).unwrap().is_empty());
    }

    #[test]
    fn ties_break_by_name() {
        let origin = projected("O", 0.0, 0.0);
        let others = [projected("b", 1.0, 1.0), projected("a", 1.0, 1.0), projected("O", 0.0, 0.0)];
        let got: Vec<&str> = nearest_wells(&origin, &others, 5).unwrap().iter().map(|(w, _)| w.name()).collect();
        assert_eq!(got, ["a", "b"]);
    }

    #[test]
    fn missing_coordinates_name_the_wells() {
        let origin = projected("O", 0.0, 0.0);
        let others = [at("lost", None, 1.0, CoordSystem::ProjectedMeters), projected("ok", 1.0, 1.0)];
        match nearest_wells(&origin, &others, 1) {
            Err(Error::MissingCoordinates(names)) => assert_eq!(names, ["lost"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn great_circle_distance() {
        let a = at("A", Some(0.0), 0.0, CoordSystem::GeographicDegrees);
        let b = at("B", Some(1.0), 0.0, CoordSystem::GeographicDegrees);
        let d = distance(&a, &b).unwrap();
        assert!((d - 6371000.0 * 1f64.to_radians()).abs() < 1e-6);
        assert!(distance(&a, &projected("P", 0.0, 0.0)).is_err());
    }

    #[test]
    fn sweep_starts_at_local_and_truncates() {
        let wells = crate::experiment::tests::corpus(3, 11);
        let trainer = ModelTrainer::default();
        let gaps = GapSpec::default();
        let sweep = neighbor_sweep(&wells, wells[0].name(), PropertyKind::Nphi, ModelKind::Lr, &gaps, 5, 4, &trainer).unwrap();
        assert_eq!(sweep.points.len(), 3);
        assert_eq!(sweep.truncated_at, Some(2));
        assert!(sweep.notice().is_some());
        let local = run_strategy(&wells, &[wells[0].name().to_string()], PropertyKind::Nphi, ModelKind::Lr, Strategy::Local, &gaps, 5, &trainer)
            .unwrap();
        assert_eq!(sweep.points[0].score.mse, local.wells[0].mse);
        assert_eq!(sweep.points[0].score.predictions, local.wells[0].predictions);
        let tested: Vec<usize> = sweep.points.iter().map(|p| p.score.n_test).collect();
        assert!(tested.iter().all(|n| *n == tested[0]));
        assert!(neighbor_sweep(&wells, wells[0].name(), PropertyKind::Nphi, ModelKind::Lr, &gaps, 5, 11, &trainer).is_err());
    }
}
