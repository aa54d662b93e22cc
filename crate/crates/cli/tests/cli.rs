use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gnss-twin"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

/// Writes a shortened copy of the static scenario, with its navigation file, into `dir`.
fn short_config(dir: &Path, duration: f64, prns: &str) -> PathBuf {
    fs::copy(scenarios().join("brdc0690.22n"), dir.join("brdc0690.22n")).unwrap();
    let base = fs::read_to_string(scenarios().join("static.toml")).unwrap();
    let edited = base.replace("duration = 120.0", &format!("duration = {duration}\nprn_allowlist = [{prns}]"));
    let path = dir.join("short.toml");
    fs::write(&path, edited).unwrap();
    path
}

#[test]
fn help_lists_the_subcommands() {
    let o = run(bin().arg("--help"));
    assert!(o.status.success());
    let t = text(&o);
    for sub in ["generate", "process", "validate"] {
        assert!(t.contains(sub), "{t}");
    }
}

#[test]
fn invalid_config_exits_with_two_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), -1.0, "12");
    let o = run(bin().args(["generate", "-c"]).arg(&cfg).arg("-o").arg(dir.path().join("x.bin")));
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains("scenario.duration"), "{}", text(&o));
    assert!(!dir.path().join("x.bin").exists());
}

#[test]
fn missing_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["process", "-i"]).arg(dir.path().join("absent.bin")));
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).starts_with("error:") || text(&o).contains("\nerror:"), "{}", text(&o));
}

#[test]
fn generate_process_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), 2.0, "3, 12");
    let if_path = dir.path().join("run.bin");

    let o = run(bin().args(["generate", "-c"]).arg(&cfg).arg("-o").arg(&if_path));
    assert!(o.status.success(), "{}", text(&o));
    assert_eq!(fs::metadata(&if_path).unwrap().len(), 2 * 2_500_000 * 2);
    assert!(dir.path().join("run.bin.json").exists());
    assert!(dir.path().join("run_truth_pvt.csv").exists());

    let o = run(bin().args(["process", "-i"]).arg(&if_path).args(["--prns", "3,12", "--telemetry-every", "10"]));
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("acquired PRNs [3, 12]"), "{}", text(&o));
    for suffix in ["_observables.csv", "_pvt.csv", "_telemetry.csv", "_acquisition.csv", "_decode.csv"] {
        assert!(dir.path().join(format!("run{suffix}")).exists(), "run{suffix} missing");
    }

    // Two seconds give neither decoded ephemerides nor a position fix.
    let o = run(bin().args(["validate", "-t"]).arg(&if_path));
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
    let verdict = fs::read_to_string(dir.path().join("run_verdict.txt")).unwrap();
    assert!(verdict.starts_with("# gnss-twin verdict v1"));
    assert!(verdict.trim_end().ends_with("overall FAIL"));
    assert!(text(&o).contains("overall FAIL"));

    // Truth offered as receiver output passes.
    fs::copy(dir.path().join("run_truth_records.csv"), dir.path().join("copy_observables.csv")).unwrap();
    fs::copy(dir.path().join("run_truth_pvt.csv"), dir.path().join("copy_pvt.csv")).unwrap();
    let o = run(bin()
        .args(["validate", "-t"])
        .arg(&if_path)
        .arg("-r")
        .arg(dir.path().join("copy"))
        .arg("--verdict")
        .arg(dir.path().join("copy.txt")));
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(fs::read_to_string(dir.path().join("copy.txt")).unwrap().contains("overall PASS"));
}

#[test]
fn unknown_threshold_key_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let th = dir.path().join("th.toml");
    fs::write(&th, "pseudorange_rmss = 3.0\n").unwrap();
    let o = run(bin().args(["validate", "-t"]).arg(dir.path().join("run.bin")).arg("--thresholds").arg(&th));
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("pseudorange_rmss"), "{}", text(&o));
}
