use std::collections::BTreeSet;
use std::fs;
use std::process::Command;

use clap::CommandFactory;
use gpy_cli::args::Cli;
use gpy_cli::report::ExperimentReport;
use gpy_cli::{run, ROUTES};

/// Every library operation the driver is meant to expose.
const OPERATIONS: &[&str] = &[
    "sieve_range", "theta_sum", "theta_progression", "ap_error", "ap_error_star",
    "nu_p", "is_admissible", "discriminant", "nu_bar_p", "nu_star_p", "regular_classes",
    "singular_series", "singular_series_extended", "average_B", "s_star", "quasiprime_density",
    "check_monotone",
    "polynomial_value", "lambda_R", "pair_sum_direct", "pair_sum_divisor", "pair_sum_theta",
    "detector_sum",
    "Z_sum", "Z_closed", "coeff_A", "coeff_ratio_check", "divisor_m", "divisor_mean_check",
    "g00", "main_term_t4", "main_term_t5", "w_function", "verify_w_bounds", "j_product", "compare",
    "bv_sum", "bv_sum_restricted", "estar_aggregate",
    "generate_sequence",
];

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gpylab"));
    c.env_remove("GPY_JOBS");
    c
}

fn leaf_paths(cmd: &clap::Command, prefix: &str, out: &mut BTreeSet<String>) {
    let subs: Vec<_> = cmd.get_subcommands().filter(|s| s.get_name() != "help").collect();
    if subs.is_empty() {
        out.insert(prefix.trim().to_string());
    }
    for s in subs {
        leaf_paths(s, &format!("{prefix} {}", s.get_name()), out);
    }
}

#[test]
fn every_operation_has_exactly_one_route() {
    for op in OPERATIONS {
        let homes: Vec<&str> = ROUTES.iter().filter(|r| r.ops.contains(op)).map(|r| r.path).collect();
        assert_eq!(homes.len(), 1, "{op} is routed from {homes:?}");
    }
    for r in ROUTES {
        for op in r.ops {
            assert!(OPERATIONS.contains(op), "{} lists unknown operation {op}", r.path);
        }
    }
}

#[test]
fn routes_match_the_command_tree() {
    let mut leaves = BTreeSet::new();
    leaf_paths(&Cli::command(), "", &mut leaves);
    let routed: BTreeSet<String> = ROUTES.iter().map(|r| r.path.to_string()).collect();
    assert_eq!(leaves, routed);
}

#[test]
fn every_route_example_runs() {
    let dir = tempfile::tempdir().unwrap();
    for r in ROUTES {
        let out = dir.path().join(format!("{}.json", r.path.replace(' ', "_")));
        let mut argv = vec!["gpylab".to_string()];
        argv.extend(r.example.iter().map(|s| s.to_string()));
        argv.extend(["--stable".into(), "--out".into(), out.display().to_string()]);
        assert_eq!(run(&argv), 0, "{}", argv.join(" "));
        let rep = ExperimentReport::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(rep.experiment, r.path);
        assert_eq!(rep.schema_version, 1);
        assert!(rep.runtime_seconds.is_none());
    }
}

#[test]
fn tuple_check_reports_admissibility() {
    let o = bin().args(["tuple", "check", "--shifts", "0,2,6"]).output().unwrap();
    assert!(o.status.success());
    let rep = ExperimentReport::from_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(rep.result["admissible"], true);
    assert_eq!(rep.params["shifts"], "0,2,6");
    let o = bin().args(["tuple", "check", "--shifts", "0,2,4"]).output().unwrap();
    let rep = ExperimentReport::from_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(rep.result["admissible"], false);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["oracle", "g00", "--shifts", "0,2,4", "--v", "5"]), 2);
    assert_eq!(code(&["tuple", "check", "--shifts", "0,2,2"]), 2);
    assert_eq!(code(&["tuple", "regular", "--shifts", "0,2", "--v", "47"]), 3);
    assert_eq!(code(&["oracle", "jprod", "--x", "2e8"]), 3);
    assert_eq!(code(&["primes", "--hi", "10", "--bogus"]), 64);
    assert_eq!(code(&["primes"]), 64);
    assert_eq!(code(&["primes", "--hi", "1.5"]), 64);
    assert_eq!(code(&["tuple", "check", "--shifts", "0,x"]), 64);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn stable_output_is_byte_identical() {
    let args = ["singular", "value", "--shifts", "0,2,6", "--cutoff", "1e5", "--stable"];
    let a = bin().args(args).output().unwrap().stdout;
    let b = bin().args(args).output().unwrap().stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let rep = ExperimentReport::from_json(std::str::from_utf8(&a).unwrap()).unwrap();
    assert_eq!(rep.to_json().as_bytes(), a.as_slice());
}

#[test]
fn moment1_reports_a_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m1.json");
    let status = bin()
        .args(["gpy", "moment1", "--h1", "0,2", "--h2", "0,6", "--ell", "1", "--n", "1e5"])
        .args(["--theta", "0.20", "--v", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rep = ExperimentReport::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let (e, m) = (rep.empirical.unwrap(), rep.predicted_mid.unwrap());
    assert_eq!(rep.ratio, Some(e / m));
    assert!(rep.runtime_seconds.is_some());
    let series = fs::read_to_string(dir.path().join("m1.csv")).unwrap();
    assert!(series.starts_with("segment_lo,segment_hi,partial"));
}

#[test]
fn jobs_environment_overrides_flag() {
    let base = ["bv", "classic", "--n", "1e4", "--q", "5", "--stable"];
    let o = bin().env("GPY_JOBS", "0").args(base).args(["--jobs", "2"]).output().unwrap();
    assert_eq!(o.status.code(), Some(64));
    let seq = bin().env("GPY_JOBS", "1").args(base).args(["--jobs", "0"]).output().unwrap();
    assert!(seq.status.success());
    let par = bin().args(base).args(["--jobs", "3"]).output().unwrap();
    assert_eq!(seq.stdout, par.stdout);
}

#[test]
fn bv_csv_series() {
    let o = bin().args(["bv", "classic", "--n", "1e4", "--q", "4", "--format", "csv"]).output().unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "q,phi_q,max_a_deviation");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("4,2,"));
}

#[test]
fn flat_csv_without_series() {
    let o = bin().args(["tuple", "discriminant", "--shifts", "0,2,6", "--format", "csv"]).output().unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("result.discriminant,48\n"), "{text}");
}

#[test]
fn sequence_generation() {
    let dir = tempfile::tempdir().unwrap();
    let tf = dir.path().join("a.txt");
    let o = bin()
        .args(["seq", "generate", "--kind", "powers-k", "--k", "2", "--n", "1024", "--tuple-file"])
        .arg(&tf)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&tf).unwrap(), "2,4,8,16,32,64,128,256,512,1024\n");
    let rep = ExperimentReport::from_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(rep.result["count"], 10);
    // the tuple file feeds straight back in
    let spec = format!("@{}", tf.display());
    let o = bin().args(["tuple", "check", "--shifts", &spec]).output().unwrap();
    assert!(o.status.success());
    let empty = bin().args(["seq", "generate", "--kind", "powers-k", "--k", "7", "--n", "5"]).output().unwrap();
    assert!(empty.status.success());
    assert!(String::from_utf8(empty.stderr).unwrap().contains("warning"));
}

#[test]
fn verify_presets() {
    assert_eq!(run(["gpylab", "verify", "lemma2", "--max", "25", "--out", "/dev/null"]), 0);
    let o = bin().args(["verify", "all", "--seed", "3", "--stable"]).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let rep = ExperimentReport::from_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(rep.seed, 3);
    assert_eq!(rep.result["passed"], true);
}

#[test]
fn scientific_notation_flags() {
    let a = bin().args(["primes", "--hi", "1e4", "--stable"]).output().unwrap().stdout;
    let b = bin().args(["primes", "--hi", "10000", "--stable"]).output().unwrap().stdout;
    let ra = ExperimentReport::from_json(std::str::from_utf8(&a).unwrap()).unwrap();
    let rb = ExperimentReport::from_json(std::str::from_utf8(&b).unwrap()).unwrap();
    assert_eq!(ra.result, rb.result);
    assert_eq!(ra.result["count"], 1229);
}
