use std::collections::HashSet;

use gapfill::experiment::{evaluate, ModelTrainer, Plan, Strategy};
use gapfill::features::build_dataset;
use gapfill::gaps::{detect_gaps, filter_wells, FilterCriteria, DEFAULT_MIN_SPAN};
use gapfill::inject::{inject_gaps, read_ground_truth_csv, restore, GapSpec};
use gapfill::models::{train_model, ModelConfig, ModelKind, TrainedModel};
use gapfill::synth::{generate, generate_well, SynthSpec};
use gapfill::PropertyKind;
use proptest::prelude::*;

fn small(seed: u64) -> SynthSpec {
    SynthSpec { n_wells: 3, extent: 1600.0, step: 0.5, real_gaps: None, ..SynthSpec::standard(seed) }
}

#[test]
fn injected_gaps_are_detected_where_placed() {
    let well = generate_well(&small(4), 0).unwrap();
    let result = inject_gaps(&well, &GapSpec { seed: 9, ..GapSpec::default() }).unwrap();
    for kind in PropertyKind::ALL {
        let mut placed: Vec<(usize, usize)> =
            result.injected.iter().filter(|g| g.property == kind).map(|g| (g.start_row, g.row_count)).collect();
        placed.sort();
        let found: Vec<(usize, usize)> =
            detect_gaps(&result.modified_well, kind, DEFAULT_MIN_SPAN).iter().map(|g| (g.start_row, g.row_count)).collect();
        assert_eq!(found, placed, "{kind}");
    }
}

#[test]
fn ground_truth_survives_csv() {
    let well = generate_well(&small(5), 1).unwrap();
    let result = inject_gaps(&well, &GapSpec { seed: 2, ..GapSpec::default() }).unwrap();
    let mut buf = Vec::new();
    result.write_ground_truth_csv(&mut buf).unwrap();
    assert_eq!(read_ground_truth_csv(buf.as_slice()).unwrap(), result.ground_truth);
}

#[test]
fn saved_model_predicts_identically() {
    let wells = generate(&small(6)).unwrap();
    let refs: Vec<_> = wells.iter().collect();
    let ds = build_dataset(&refs, PropertyKind::Rhob, &HashSet::new()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for kind in [ModelKind::Lr, ModelKind::Gb] {
        let model = train_model(kind, &ds, &ModelConfig::default(), 1).unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        model.save(&path).unwrap();
        let loaded = TrainedModel::load(&path).unwrap();
        let rows = &ds.rows[..200];
        assert_eq!(loaded.predict_rows(rows).unwrap(), model.predict_rows(rows).unwrap());
    }
}

#[test]
fn evaluation_scores_every_job() {
    let wells = generate(&small(7)).unwrap();
    let accepted = filter_wells(&wells, &FilterCriteria::default()).accepted.len();
    assert_eq!(accepted, 3);
    let names: Vec<String> = wells.iter().map(|w| w.name().to_string()).collect();
    let plan = Plan {
        targets: vec![PropertyKind::Nphi, PropertyKind::Vp],
        models: vec![ModelKind::Lr],
        strategies: vec![Strategy::Local, Strategy::Global],
        gaps: GapSpec::default(),
        seed: 3,
    };
    let report = evaluate(&wells, &names, &plan, &ModelTrainer::default()).unwrap();
    assert_eq!(report.wells.len(), 3 * 2 * 2);
    assert_eq!(report.succeeded(), report.wells.len());
    let again = evaluate(&wells, &names, &plan, &ModelTrainer::default()).unwrap();
    assert_eq!(again, report);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn injection_restores_exactly(seed in any::<u64>(), mean in 5.0f64..60.0, per_km in 0.0f64..6.0, aligned: bool) {
        let well = generate_well(&SynthSpec { n_wells: 1, extent: 800.0, step: 0.5, ..SynthSpec::standard(seed) }, 0).unwrap();
        let spec = GapSpec { mean_size: mean, size_stddev: mean / 3.0, gaps_per_km: per_km, seed, aligned };
        if let Ok(result) = inject_gaps(&well, &spec) {
            prop_assert_eq!(restore(&result).unwrap(), well.clone());
            for (&(row, kind), &v) in &result.ground_truth {
                prop_assert_eq!(result.modified_well.value(kind, row), None);
                prop_assert_eq!(well.value(kind, row), Some(v));
            }
        }
    }
}
