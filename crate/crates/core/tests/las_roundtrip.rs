use std::path::{Path, PathBuf};

use gapfill::las::{load_corpus, parse_las, read_las_file, write_corpus, write_las, ParseOptions};
use gapfill::well::{CoordSystem, DepthUnit};
use gapfill::{Error, PropertyKind, WellLog};
use proptest::prelude::*;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

const VALID: [&str; 3] = ["golden_3row.las", "aliases_feet.las", "projected_nulls.las"];

fn load(name: &str) -> WellLog {
    read_las_file(&fixtures().join(name), &ParseOptions::default()).unwrap()
}

#[test]
fn fixtures_round_trip() {
    for name in VALID {
        let well = load(name);
        let again = parse_las(write_las(&well).as_bytes()).unwrap();
        assert_eq!(again, well, "{name}");
        // writing is a fixed point after one pass
        assert_eq!(write_las(&again), write_las(&well), "{name}");
    }
}

#[test]
fn golden_three_rows() {
    let well = load("golden_3row.las");
    assert_eq!(well.name(), "GOLD-1");
    assert_eq!(well.rows(), 3);
    assert_eq!(well.value(PropertyKind::Nphi, 2), Some(0.23));
    assert_eq!(well.value(PropertyKind::Gr, 1), None);
    assert_eq!(well.value(PropertyKind::Vp, 2), None);
    assert_eq!(well.depth(1), 1500.15);
    assert_eq!(well.header().x, Some(431250.5));
    assert_eq!(well.header().coord_system, CoordSystem::ProjectedMeters);
    let expected = std::fs::read_to_string(fixtures().join("golden_3row.expected")).unwrap();
    assert_eq!(write_las(&well), expected);
}

#[test]
fn aliases_feet_and_extras() {
    let well = load("aliases_feet.las");
    assert_eq!(well.name(), "Old Field #7");
    assert_eq!(well.header().depth_unit, DepthUnit::Meters);
    assert!((well.depth(0) - 1500.0).abs() < 1e-3);
    assert!((well.step() - 0.1524).abs() < 1e-12);
    assert_eq!(well.value(PropertyKind::Rhob, 0), Some(2.31));
    assert_eq!(well.value(PropertyKind::Nphi, 3), None);
    assert_eq!(well.value(PropertyKind::Vp, 2), None);
    assert_eq!(well.header().coord_system, CoordSystem::GeographicDegrees);
    assert_eq!((well.header().x, well.header().y), (Some(4.75), Some(60.125)));
    assert_eq!(well.extras().len(), 1);
    assert_eq!(well.extras()[0].mnemonic, "CALI");
}

#[test]
fn leading_nulls_are_kept_as_missing() {
    let well = load("projected_nulls.las");
    assert_eq!(well.curve(PropertyKind::Gr).missing_count(), 2);
    assert_eq!(well.curve(PropertyKind::Rhob).missing_count(), 3);
    assert_eq!(well.complete_rows(), vec![6]);
}

#[test]
fn corpus_with_one_corrupt_file() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["golden_3row.las", "projected_nulls.las", "corrupt.las"] {
        std::fs::copy(fixtures().join(name), dir.path().join(name)).unwrap();
    }
    std::fs::write(dir.path().join("notes.txt"), "not a log").unwrap();
    let corpus = load_corpus(dir.path(), &ParseOptions::default()).unwrap();
    let names: Vec<&str> = corpus.wells.iter().map(|w| w.name()).collect();
    assert_eq!(names, ["GOLD-1", "NULLS-2"]);
    assert_eq!(corpus.errors.len(), 1);
    assert!(corpus.errors[0].path.ends_with("corrupt.las"));
}

#[test]
fn empty_and_missing_directories() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = load_corpus(dir.path(), &ParseOptions::default()).unwrap();
    assert!(corpus.wells.is_empty() && corpus.errors.is_empty());
    let missing = dir.path().join("nope");
    assert!(matches!(load_corpus(&missing, &ParseOptions::default()), Err(Error::Io { .. })));
}

#[test]
fn written_corpus_reloads() {
    let wells: Vec<WellLog> = VALID.iter().map(|n| load(n)).collect();
    let dir = tempfile::tempdir().unwrap();
    let paths = write_corpus(dir.path(), &wells).unwrap();
    assert_eq!(paths.len(), 3);
    let corpus = load_corpus(dir.path(), &ParseOptions::default()).unwrap();
    assert!(corpus.errors.is_empty());
    for w in &wells {
        assert_eq!(corpus.wells.iter().find(|c| c.name() == w.name()), Some(w));
    }
}

fn mutate(text: &str, cuts: &[(usize, u8)]) -> Vec<u8> {
    let mut bytes = text.as_bytes().to_vec();
    for &(pos, b) in cuts {
        if bytes.is_empty() {
            break;
        }
        let i = pos % bytes.len();
        match b % 3 {
            0 => bytes[i] = b,
            1 => {
                bytes.remove(i);
            }
            _ => bytes.insert(i, b),
        }
    }
    bytes
}

/// Parsing never panics; success means a well that survives a round trip.
fn parse_is_total(bytes: &[u8]) {
    if let Ok(well) = parse_las(bytes) {
        assert!(well.rows() >= 2);
        let again = parse_las(write_las(&well).as_bytes()).expect("written LAS parses");
        assert_eq!(again, well);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..600)) {
        parse_is_total(&bytes);
    }

    #[test]
    fn mutated_fixtures_never_panic(
        which in 0usize..3,
        cuts in proptest::collection::vec((any::<usize>(), any::<u8>()), 1..8),
    ) {
        let text = std::fs::read_to_string(fixtures().join(VALID[which])).unwrap();
        parse_is_total(&mutate(&text, &cuts));
    }
}
