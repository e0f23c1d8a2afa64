use std::fs;

use chronograph_core::bundle::{read_bundle, write_bundle, year_file_name, BundleError};
use chronograph_core::person::Horizon;
use chronograph_core::pipeline::{run, RunConfig};
use chronograph_testkit::{synthetic_corpus, turn_of_era_corpus};
use tempfile::TempDir;

fn built() -> (TempDir, chronograph_core::pipeline::RunOutputs) {
    let corpus = synthetic_corpus(5, Horizon::new(-300, 300).unwrap(), 150, 1200, 70, 0.9);
    let outputs = run(&corpus, &RunConfig::default()).unwrap();
    let tmp = TempDir::new().unwrap();
    write_bundle(&outputs, tmp.path().join("b")).unwrap();
    (tmp, outputs)
}

#[test]
fn load_all_returns_what_was_written() {
    let (tmp, outputs) = built();
    let bundle = read_bundle(tmp.path().join("b")).unwrap();
    assert_eq!(bundle.load_all().unwrap(), outputs);
}

#[test]
fn writing_twice_gives_identical_bytes() {
    let (tmp, outputs) = built();
    write_bundle(&outputs, tmp.path().join("c")).unwrap();
    let names = |d: &str| {
        let mut v: Vec<_> = fs::read_dir(tmp.path().join(d).join("years"))
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        v.sort();
        v
    };
    assert_eq!(names("b"), names("c"));
    for f in [
        "manifest.json",
        "alltime.csv",
        "people.jsonl",
        "series.jsonl",
        "reports/categories-top10.json",
    ] {
        assert_eq!(
            fs::read(tmp.path().join("b").join(f)).unwrap(),
            fs::read(tmp.path().join("c").join(f)).unwrap(),
            "{f}"
        );
    }
    for y in ["-0300", "+0000", "+0300"] {
        let f = format!("years/{y}.json");
        assert_eq!(
            fs::read(tmp.path().join("b").join(&f)).unwrap(),
            fs::read(tmp.path().join("c").join(&f)).unwrap()
        );
    }
}

#[test]
fn refuses_non_empty_directory() {
    let (tmp, outputs) = built();
    assert!(matches!(
        write_bundle(&outputs, tmp.path().join("b")),
        Err(BundleError::NotEmpty(_))
    ));
}

#[test]
fn tampered_manifest_is_detected() {
    let (tmp, _) = built();
    let path = tmp.path().join("b/manifest.json");
    let text = fs::read_to_string(&path).unwrap();
    let tampered = text.replace("\"k\": 50", "\"k\": 49");
    assert_ne!(text, tampered);
    fs::write(&path, tampered).unwrap();
    assert!(matches!(
        read_bundle(tmp.path().join("b")),
        Err(BundleError::Corrupt(_))
    ));
}

#[test]
fn unknown_format_is_rejected() {
    let (tmp, _) = built();
    let path = tmp.path().join("b/manifest.json");
    let text = fs::read_to_string(&path).unwrap();
    fs::write(
        &path,
        text.replace("chronograph-bundle-v1", "chronograph-bundle-v9"),
    )
    .unwrap();
    assert!(matches!(
        read_bundle(tmp.path().join("b")),
        Err(BundleError::UnsupportedFormat(f)) if f == "chronograph-bundle-v9"
    ));
}

#[test]
fn missing_and_out_of_range_years() {
    let (tmp, _) = built();
    fs::remove_file(tmp.path().join("b/years").join(year_file_name(17))).unwrap();
    let bundle = read_bundle(tmp.path().join("b")).unwrap();
    match bundle.year(17) {
        Err(BundleError::Corrupt(m)) => assert!(m.contains("17"), "{m}"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        bundle.year(301),
        Err(BundleError::OutOfRange { year: 301, .. })
    ));
    assert!(matches!(
        bundle.year(99999),
        Err(BundleError::OutOfRange { .. })
    ));
    assert!(bundle.year(16).is_ok());
    assert!(matches!(bundle.load_all(), Err(BundleError::Corrupt(_))));
}

#[test]
fn swapped_year_file_is_detected() {
    let (tmp, _) = built();
    let years = tmp.path().join("b/years");
    fs::copy(years.join(year_file_name(5)), years.join(year_file_name(6))).unwrap();
    let bundle = read_bundle(tmp.path().join("b")).unwrap();
    assert!(matches!(bundle.year(6), Err(BundleError::Corrupt(_))));
}

#[test]
fn year_zero_and_one_differ_on_disk() {
    let outputs = run(&turn_of_era_corpus(), &RunConfig::default()).unwrap();
    let tmp = TempDir::new().unwrap();
    write_bundle(&outputs, tmp.path()).unwrap();
    let bundle = read_bundle(tmp.path()).unwrap();
    let ids = |y| {
        bundle
            .year(y)
            .unwrap()
            .entries
            .iter()
            .map(|e| e.id)
            .collect::<Vec<_>>()
    };
    assert!(!ids(0).contains(&2));
    assert!(ids(1).contains(&2));
    assert_eq!(bundle.person(2).unwrap().unwrap().title, "Jesus");
    let series = &bundle.series().unwrap()[&2];
    assert_eq!(series.first().unwrap().year, 1);
    assert_eq!(series.last().unwrap().year, 33);
}
