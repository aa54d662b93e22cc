//! File-level behaviour of generate, process and validate.

mod common;

use std::fs;
use std::path::Path;

use common::*;
use gnss_twin::exec::Execution;
use gnss_twin::io::{schema, IfMetadata, IfReader};
use gnss_twin::navigation::ObservableRecord;
use gnss_twin::pipeline::{
    cmd_process, cmd_validate, generate_to, Artifacts, ProcessOptions, Status, Thresholds, ValidateInputs,
};
use gnss_twin::scenario::{parse_rinex_nav, ScenarioConfig};
use gnss_twin::Error;
use regex::Regex;

fn short(prns: &[u8], duration: f64) -> ScenarioConfig {
    let mut cfg = load_config("static.toml");
    cfg.scenario.duration = duration;
    cfg.scenario.prn_allowlist = Some(prns.to_vec());
    cfg
}

#[test]
fn if_file_size_is_rate_times_duration_times_sample_width() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.bin");
    let sc = scenario(&short(&[12], 2.0));
    let summary = generate_to(&sc, &path, Execution::default()).unwrap();
    // 2.5 Msps for 2 s, one byte each for I and Q.
    assert_eq!(summary.metadata.sample_count, 5_000_000);
    assert_eq!(fs::metadata(&path).unwrap().len(), 10_000_000);
    let meta = IfMetadata::read(&IfMetadata::sidecar_path(&path)).unwrap();
    assert_eq!(meta, summary.metadata);
    assert_eq!(meta.prns, vec![12]);
    for file in
        [summary.artifacts.truth_observables(), summary.artifacts.truth_records(), summary.artifacts.truth_pvt()]
    {
        assert!(file.exists(), "{} missing", file.display());
    }
}

#[test]
fn non_positive_duration_is_rejected_by_key() {
    let text = fs::read_to_string(scenarios_dir().join("static.toml")).unwrap();
    for bad in ["0.0", "-5.0"] {
        let edited = text.replace("duration = 120.0", &format!("duration = {bad}"));
        let cfg = ScenarioConfig::from_toml_str(&edited).unwrap();
        let err = cfg.validate_all().unwrap_err();
        assert!(err.to_string().contains("scenario.duration"), "{err}");
    }
}

#[test]
fn unknown_and_mistyped_keys_name_their_path() {
    let text = fs::read_to_string(scenarios_dir().join("static.toml")).unwrap();
    let typo = text.replace("sample_rate = 2.5e6", "sample_rat = 2.5e6");
    assert!(ScenarioConfig::from_toml_str(&typo).unwrap_err().to_string().contains("sample_rat"));
    let wrong = text.replace("seed = 42", "seed = \"many\"");
    assert!(ScenarioConfig::from_toml_str(&wrong).unwrap_err().to_string().contains("scenario.seed"));
}

#[test]
fn every_shipped_scenario_parses_and_builds() {
    for entry in fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let cfg = ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let sc = scenario(&cfg);
        assert!(sc.visible.len() >= 6, "{}: {} satellites", path.display(), sc.visible.len());
    }
}

#[test]
fn truncated_file_is_processed_and_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.bin");
    generate_to(&scenario(&short(&[12], 1.5)), &path, Execution::default()).unwrap();
    let keep = 2 * 2_500_000 + 1;
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..keep]).unwrap();

    let meta = IfMetadata::read(&IfMetadata::sidecar_path(&path)).unwrap();
    let reader = IfReader::open(&path, meta).unwrap();
    assert!(reader.truncated);

    let mut opts = ProcessOptions::default();
    opts.receiver.prns = vec![12];
    let summary = cmd_process(&path, &dir.path().join("cut"), &opts).unwrap();
    assert!(summary.truncated);
    assert_eq!(summary.samples, 2_500_000);
    assert_eq!(summary.acquired, vec![12]);
}

#[test]
fn searching_absent_satellites_gives_an_acquisition_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.bin");
    generate_to(&scenario(&short(&[12], 0.5)), &path, Execution::default()).unwrap();
    let mut opts = ProcessOptions::default();
    opts.receiver.prns = vec![1, 2];
    let err = cmd_process(&path, &dir.path().join("one"), &opts).unwrap_err();
    assert!(matches!(err, Error::Acquisition(_)), "{err}");
    let text = err.to_string();
    assert!(text.contains("PRN 1 metric") && text.contains("PRN 2 metric"), "{text}");
}

#[test]
fn truth_validated_against_itself_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("self.bin");
    let summary = generate_to(&scenario(&short(&[3, 4, 8, 9, 12, 13, 17], 3.0)), &path, Execution::default()).unwrap();
    let a = &summary.artifacts;
    let inputs = ValidateInputs {
        truth_observables: a.truth_records(),
        truth_pvt: a.truth_pvt(),
        observables: a.truth_records(),
        pvt: a.truth_pvt(),
        telemetry: None,
    };
    let verdict_path = dir.path().join("self_verdict.txt");
    let v = cmd_validate(&inputs, &Thresholds::default(), &verdict_path).unwrap();
    assert!(v.pass(), "{}", v.render());
    assert_eq!(v.metric("pseudorange_rms_m").unwrap().value, 0.0);
    assert_eq!(v.metric("dll_jitter_chips").unwrap().status, Status::Skip);
    let text = fs::read_to_string(&verdict_path).unwrap();
    assert_eq!(text, v.render());
    assert!(text.trim_end().ends_with("overall PASS"));
}

#[test]
fn reading_a_csv_with_the_wrong_schema_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.bin");
    let summary = generate_to(&scenario(&short(&[12], 0.5)), &path, Execution::default()).unwrap();
    let err =
        gnss_twin::io::read_csv::<ObservableRecord>(&summary.artifacts.truth_pvt(), schema::OBSERVABLES).unwrap_err();
    assert!(matches!(err, Error::Schema { .. }), "{err}");
    let inputs = ValidateInputs {
        truth_observables: summary.artifacts.truth_pvt(),
        ..ValidateInputs::from_artifacts(&summary.artifacts, &summary.artifacts)
    };
    assert!(cmd_validate(&inputs, &Thresholds::default(), &dir.path().join("v.txt")).is_err());
}

#[test]
fn artifact_names_share_the_prefix() {
    let a = Artifacts::from_path(Path::new("/data/run.bin"));
    assert_eq!(a.observables(), Path::new("/data/run_observables.csv"));
    assert_eq!(a.truth_pvt(), Path::new("/data/run_truth_pvt.csv"));
    assert_eq!(a.file("_verdict.txt"), Path::new("/data/run_verdict.txt"));
}

/// Numbers of a navigation record line, read by pattern rather than by column.
fn numbers(line: &str) -> Vec<f64> {
    let re = Regex::new(r"-?\d\.\d+[DE][+-]\d{2}").unwrap();
    re.find_iter(line).map(|m| m.as_str().replace('D', "E").parse().unwrap()).collect()
}

#[test]
fn rinex_v2_records_match_a_pattern_oracle() {
    let text = fs::read_to_string(scenarios_dir().join("brdc0690.22n")).unwrap();
    let nav = parse_rinex_nav(&text).unwrap();
    let body: Vec<&str> = text.lines().skip_while(|l| !l.contains("END OF HEADER")).skip(1).collect();
    let records: Vec<&[&str]> = body.chunks(8).filter(|c| c.len() == 8).collect();
    assert_eq!(records.len(), nav.records.len());
    for (lines, eph) in records.iter().zip(&nav.records) {
        let prn: u8 = lines[0][..2].trim().parse().unwrap();
        let head = numbers(lines[0]);
        let o: Vec<Vec<f64>> = lines[1..].iter().map(|l| numbers(l)).collect();
        assert_eq!(eph.prn, prn);
        assert_eq!(eph.af0, head[0]);
        assert_eq!(eph.af1, head[1]);
        assert_eq!(eph.crs, o[0][1]);
        assert_eq!(eph.m0, o[0][3]);
        assert_eq!(eph.e, o[1][1]);
        assert_eq!(eph.sqrt_a, o[1][3]);
        assert_eq!(eph.toe, o[2][0]);
        assert_eq!(eph.omega0, o[2][2]);
        assert_eq!(eph.i0, o[3][0]);
        assert_eq!(eph.omega, o[3][2]);
        assert_eq!(eph.idot, o[4][0]);
        assert_eq!(eph.week as f64, o[4][2]);
        assert_eq!(eph.tgd, o[5][2]);
    }
    let k = nav.klobuchar.unwrap();
    assert_eq!(k.alpha[0], 1.1176e-8);
    assert_eq!(k.beta[3], -6.5536e4);
}

#[test]
fn rinex_v3_record_matches_its_v2_twin() {
    let v2 = fs::read_to_string(scenarios_dir().join("brdc0690.22n")).unwrap();
    let first = &parse_rinex_nav(&v2).unwrap().records[0];
    let v3 = "\
     3.04           N: GNSS NAV DATA    G: GPS              RINEX VERSION / TYPE
GPSA   1.1176E-08  7.4506E-09 -5.9605E-08 -5.9605E-08       IONOSPHERIC CORR
GPSB   9.0112E+04  1.6384E+04 -1.9661E+05 -6.5536E+04       IONOSPHERIC CORR
                                                            END OF HEADER
G01 2022 03 10 06 00 00-8.717225864530E-05 7.958078640513E-13 0.000000000000E+00
     6.100000000000E+01-1.158750000000E+02 4.984850496175E-09 1.045502585539E+00
    -3.775581717491E-06 6.372698815539E-03-1.624226570129E-06 5.153856315613E+03
     3.672000000000E+05-7.450580596924E-08 2.967059727090E-01 1.490116119385E-07
     9.542978034540E-01 2.881250000000E+02-9.582361222893E-01-8.029620180196E-09
     1.075044779930E-10 1.000000000000E+00 2.200000000000E+03 0.000000000000E+00
     2.400000000000E+00 0.000000000000E+00-1.024454832077E-08 6.100000000000E+01
     3.671820000000E+05 4.000000000000E+00
";
    let nav = parse_rinex_nav(v3).unwrap();
    assert!(nav.version >= 3.0);
    assert_eq!(nav.records.len(), 1);
    let r = &nav.records[0];
    assert_eq!(
        (r.prn, r.week, r.toe, r.sqrt_a, r.e, r.m0),
        (first.prn, first.week, first.toe, first.sqrt_a, first.e, first.m0)
    );
    assert_eq!(nav.klobuchar.unwrap().alpha[0], 1.1176e-8);
}
