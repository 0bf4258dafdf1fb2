use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gpforage::expcli::{parse_config, run_sweep};

fn gpforage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpforage")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("exp.conf");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "\
# tiny sweep
birth_cost=0,1
compute_capacity=1,2
replicates=3
width=10
height=10
initial_population=40
metabolism=2
max_steps=30
";

#[test]
fn sweep_writes_one_directory_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let res = gpforage(&["sweep", "--config", &config, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 13);
    assert!(lines[0].starts_with("run_id,seed,compute_capacity"));
    for (i, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{i},")), "{line}");
        let ts = out.join(format!("run_{i:04}")).join("timeseries.csv");
        let first = fs::read_to_string(&ts).unwrap();
        assert!(first.starts_with("step,population,births,deaths,"));
        assert!(out.join(format!("run_{i:04}")).join("genotypes.csv").is_file());
    }
    assert!(!summary.contains('\r'));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = parse_config(SMALL).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_sweep(&spec, &a, Some(1)).unwrap();
    run_sweep(&spec, &b, Some(3)).unwrap();
    let read = |p: &Path| fs::read(p).unwrap();
    assert_eq!(read(&a.join("summary.csv")), read(&b.join("summary.csv")));
    for i in 0..12 {
        for f in ["timeseries.csv", "genotypes.csv"] {
            let rel = format!("run_{i:04}/{f}");
            assert_eq!(read(&a.join(&rel)), read(&b.join(&rel)), "{rel}");
        }
    }
}

#[test]
fn extinct_run_reports_zero_steady_population() {
    let dir = tempfile::tempdir().unwrap();
    // nobody can pay this metabolism, and births need a surplus nobody has
    let spec = parse_config("metabolism=50\nbirth_cost=1\nmax_steps=100\nwidth=8\nheight=8\ninitial_population=20").unwrap();
    let rows = run_sweep(&spec, dir.path(), None).unwrap();
    assert_eq!(rows[0].summary.steady_mean_population, 0.0);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let fields: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[8], "0");
    assert_eq!(fields[9], "0");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "compute_capacity=0\n");
    assert_eq!(gpforage(&["run", "--config", &bad]).status.code(), Some(1));
    let unknown = write_config(dir.path(), "warp_speed=9\n");
    assert_eq!(gpforage(&["run", "--config", &unknown]).status.code(), Some(1));
    let missing = dir.path().join("missing.conf");
    assert_eq!(gpforage(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(gpforage(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn presets_are_listed_and_loadable_by_name() {
    let res = gpforage(&["presets", "list"]);
    assert!(res.status.success());
    let listing = String::from_utf8(res.stdout).unwrap();
    for name in [
        "fig1_viability",
        "fig2_capacity_sweep",
        "fig3_memory_limit",
        "fig4a_bloat_per_program",
        "fig4b_bloat_per_instruction",
    ] {
        assert!(listing.contains(name), "{name}");
    }
    // a swept preset cannot be a single run
    assert_eq!(gpforage(&["run", "--config", "fig2_capacity_sweep"]).status.code(), Some(1));
}

#[test]
fn run_prints_summary_and_honours_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "width=8\nheight=8\ninitial_population=20\nmax_steps=20\nmetabolism=2\n");
    let out = dir.path().join("single");
    let res = gpforage(&["run", "--config", &config, "--seed", "77", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.lines().nth(1).unwrap().starts_with("0,77,"), "{stdout}");
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap(), stdout);
}
