use std::path::Path;
use std::process::{Command, Output};

use zenolink_cli::report::{read_csv, read_json, OptimizeReport, OptimizeRow, SimulateRow};
use zenolink_core::{
    AnalyticPoint, BitPlan, BitSchedule, EnsembleStats, Reach, SweepNRow, SweepQRow,
};

fn zenolink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zenolink"))
        .args(args)
        .env_remove("ZENOLINK_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = zenolink(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn code(args: &[&str]) -> (i32, String) {
    let out = zenolink(args);
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn analyze_reports_the_headline_cell() {
    let rows: Vec<AnalyticPoint> = read_csv(
        &ok(&[
            "analyze", "--m", "2", "--n", "2", "--q", "0.5", "--p", "0.975",
        ])[..],
    )
    .unwrap();
    assert_eq!(rows.len(), 1);
    let pt = &rows[0];
    assert_eq!(pt.lambda, 0.195_312_5);
    assert_eq!(
        (pt.x, pt.zeta),
        (Some(Reach::Finite(17)), Some(Reach::Finite(68)))
    );
}

#[test]
fn analyze_without_target_omits_trial_columns() {
    let out = String::from_utf8(ok(&["analyze", "--m", "2", "--n", "2", "--q", "0.5"])).unwrap();
    let header = out.lines().next().unwrap();
    assert_eq!(header, "M,N,q,lambda0,lambda1,lambda,eta,T_over_Tc,delta");
}

#[test]
fn unreachable_cell_exits_two_with_diagnostic() {
    let out = zenolink(&["analyze", "--m", "1", "--n", "5", "--q", "1", "--p", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unreachable"));
    let rows: Vec<AnalyticPoint> = read_csv(&out.stdout[..]).unwrap();
    assert!(rows[0].is_unreachable());
}

#[test]
fn flag_errors_exit_one_and_name_the_flag() {
    let cases: &[(&[&str], &str)] = &[
        (&["analyze", "--m", "0", "--n", "2", "--q", "0.5"], "--m"),
        (&["analyze", "--m", "2", "--n", "2", "--q", "1.5"], "--q"),
        (
            &["analyze", "--m", "2", "--n", "2", "--q", "0.5", "--p", "1"],
            "--p",
        ),
        (
            &["optimize", "--q", "0.5", "--p", "0.975", "--m-max", "0"],
            "--m-max",
        ),
        (&["simulate", "--n", "2", "--bit", "1"], "--m"),
        (
            &[
                "simulate", "--kind", "semi", "--m", "2", "--n", "2", "--bit", "1",
            ],
            "--m",
        ),
        (&["simulate", "--m", "2", "--n", "2", "--bit", "2"], "--bit"),
        (
            &[
                "simulate", "--m", "2", "--n", "2", "--bit", "1", "--seed", "abc",
            ],
            "--seed",
        ),
        (
            &[
                "simulate", "--m", "2", "--n", "2", "--bit", "1", "--trials", "0",
            ],
            "--trials",
        ),
        (
            &[
                "plan", "--bits", "012", "--p", "0.9", "--m", "2", "--n", "2",
            ],
            "--bits",
        ),
        (
            &[
                "sweep", "--axis", "q", "--from", "0.1", "--to", "1.5", "--step", "0.1", "--p",
                "0.9",
            ],
            "--to",
        ),
        (
            &[
                "sweep", "--axis", "n", "--from", "2", "--to", "8", "--m", "2",
            ],
            "--q",
        ),
        (
            &[
                "sweep", "--axis", "n", "--from", "2.5", "--to", "8", "--m", "2", "--q", "0.5",
            ],
            "--from",
        ),
        (
            &[
                "sweep", "--axis", "q", "--from", "0.5", "--to", "0.1", "--step", "0.1", "--p",
                "0.9",
            ],
            "--to",
        ),
        (&["analyze", "--m", "2", "--q", "0.5"], "--n"),
        (&["frobnicate"], "frobnicate"),
    ];
    for (args, flag) in cases {
        let (c, err) = code(args);
        assert_eq!(c, 1, "{args:?}");
        assert!(err.contains(flag), "{args:?}: {err}");
    }
}

#[test]
fn help_and_version_succeed() {
    assert!(String::from_utf8(ok(&["--help"]))
        .unwrap()
        .contains("simulate"));
    assert!(String::from_utf8(ok(&["--version"]))
        .unwrap()
        .starts_with("zenolink"));
}

#[test]
fn infeasible_commands_exit_two() {
    assert_eq!(
        code(&["plan", "--bits", "01", "--p", "0.975", "--m", "1", "--n", "2"]).0,
        2
    );
    // Only M = 1 fits, and it never delivers bit 0.
    assert_eq!(
        code(&["optimize", "--q", "0.5", "--p", "0.9", "--m-max", "1", "--n-max", "3"]).0,
        2
    );
    let sweep = [
        "sweep", "--axis", "q", "--from", "0.4", "--to", "0.6", "--step", "0.1", "--p", "0.9",
        "--m-max", "1",
    ];
    assert_eq!(code(&sweep).0, 2);
}

#[test]
fn optimize_matches_headline_in_both_formats() {
    let env =
        read_json::<OptimizeReport>(&ok(&["optimize", "--q", "0.5", "--p", "0.975"])[..]).unwrap();
    assert_eq!(env.schema_version, 1);
    assert_eq!(env.command, "optimize");
    let r = &env.result.result;
    assert_eq!(
        (r.zeta_min, r.m_star, r.n_star, r.x_star, r.eta_min),
        (68, 2, 2, 17, 136)
    );
    assert_eq!(r.delta_max, 0.975 / 136.0);
    let rows: Vec<OptimizeRow> = read_csv(
        &ok(&[
            "optimize", "--q", "0.5", "--p", "0.975", "--tc", "0.002", "--format", "csv",
        ])[..],
    )
    .unwrap();
    assert_eq!(rows[0].zeta_min, 68);
    assert_eq!(rows[0].t_min, Some(68.0 * 0.002));
}

#[test]
fn sweep_q_has_nineteen_rows_and_headline_point() {
    let out = ok(&[
        "sweep", "--axis", "q", "--from", "0.05", "--to", "0.95", "--step", "0.05", "--p", "0.975",
    ]);
    assert!(out.starts_with(b"q,M_star,N_star,x,zeta_min\n"));
    let rows: Vec<SweepQRow> = read_csv(&out[..]).unwrap();
    assert_eq!(rows.len(), 19);
    let half = rows.iter().find(|r| r.q == 0.5).unwrap();
    assert_eq!((half.x, half.zeta_min), (17, 68));
}

#[test]
fn sweep_n_header_and_stride() {
    let out = ok(&[
        "sweep", "--axis", "n", "--q", "0.5", "--m", "2", "--from", "2", "--to", "10", "--step",
        "4",
    ]);
    assert!(out.starts_with(b"N,lambda,delta,T_over_Tc\n"));
    let rows: Vec<SweepNRow> = read_csv(&out[..]).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), [2, 6, 10]);
}

#[test]
fn plan_reports_per_bit_worst_cases() {
    let env = read_json::<BitSchedule>(
        &ok(&[
            "plan", "--bits", "01", "--p", "0.975", "--m", "2", "--n", "2",
        ])[..],
    )
    .unwrap();
    let worst: Vec<u64> = env
        .result
        .bits
        .iter()
        .map(|b| b.worst_case_trials)
        .collect();
    assert_eq!(worst, [13, 25]);
    assert!(env.result.requires_modified_variant);
    let rows: Vec<BitPlan> = read_csv(
        &ok(&[
            "plan", "--bits", "01", "--p", "0.975", "--m", "2", "--n", "2", "--format", "csv",
        ])[..],
    )
    .unwrap();
    assert_eq!(rows, env.result.bits);
}

#[test]
fn simulate_nested_two_by_two() {
    let args = [
        "simulate", "--kind", "nested", "--m", "2", "--n", "2", "--bit", "1", "--trials", "100000",
        "--seed", "7",
    ];
    let env = read_json::<EnsembleStats>(&ok(&args)[..]).unwrap();
    let d1 = env
        .result
        .events
        .iter()
        .find(|e| e.event.label.as_str() == "D1")
        .unwrap();
    assert!((d1.exact - 0.140_625).abs() < 1e-12);
    assert!(d1.z_score.unwrap().abs() < 4.0, "{d1:?}");
    assert_eq!(env.result.master_seed, 7);
}

#[test]
fn simulate_semi_bit_zero_always_reads_d1() {
    let out = ok(&[
        "simulate", "--kind", "semi", "--n", "1", "--bit", "0", "--trials", "10", "--seed", "1",
        "--format", "csv",
    ]);
    let rows: Vec<SimulateRow> = read_csv(&out[..]).unwrap();
    let d1 = rows
        .iter()
        .find(|r| r.record == "event" && r.key == "D1")
        .unwrap();
    assert_eq!(d1.frequency, Some(1.0));
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let args = [
        "simulate", "--m", "3", "--n", "4", "--bit", "1", "--trials", "20000", "--seed", "11",
    ];
    assert_eq!(ok(&args), ok(&args));
    let bare = [
        "simulate", "--m", "3", "--n", "4", "--bit", "0", "--trials", "5000",
    ];
    assert_eq!(ok(&bare), ok(&bare));
    let capped = Command::new(env!("CARGO_BIN_EXE_zenolink"))
        .args(args)
        .env("ZENOLINK_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(capped.stdout, ok(&args));
}

#[test]
fn random_seed_is_recorded() {
    let env = read_json::<EnsembleStats>(
        &ok(&[
            "simulate", "--m", "2", "--n", "2", "--bit", "1", "--trials", "100", "--seed", "random",
        ])[..],
    )
    .unwrap();
    let seed = env.result.master_seed.to_string();
    let again = read_json::<EnsembleStats>(
        &ok(&[
            "simulate", "--m", "2", "--n", "2", "--bit", "1", "--trials", "100", "--seed", &seed,
        ])[..],
    )
    .unwrap();
    assert_eq!(env.result, again.result);
}

#[test]
fn bad_thread_cap_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_zenolink"))
        .args(["analyze", "--m", "2", "--n", "2", "--q", "0.5"])
        .env("ZENOLINK_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ZENOLINK_THREADS"));
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("opt.json");
    let p = path.to_str().unwrap();
    let printed = ok(&[
        "optimize", "--q", "0.3", "--p", "0.95", "--m-max", "8", "--n-max", "8",
    ]);
    let quiet = ok(&[
        "optimize", "--q", "0.3", "--p", "0.95", "--m-max", "8", "--n-max", "8", "--out", p,
    ]);
    assert!(quiet.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), printed);
    // Overwrites in place and leaves no temporary files behind.
    ok(&["analyze", "--m", "2", "--n", "2", "--q", "0.5", "--out", p]);
    assert!(std::fs::read(&path).unwrap().starts_with(b"M,N,"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn failed_runs_leave_the_output_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("keep.csv");
    std::fs::write(&path, b"sentinel").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(
        code(&["optimize", "--q", "0.5", "--p", "0.9", "--m-max", "1", "--out", p]).0,
        2
    );
    assert_eq!(std::fs::read(&path).unwrap(), b"sentinel");
}

fn reencode_json<T: serde::de::DeserializeOwned + serde::Serialize>(bytes: &[u8]) -> Vec<u8> {
    let env = read_json::<T>(bytes).unwrap();
    zenolink_cli::report::to_json(&env.command, &env.result).unwrap()
}

fn reencode_csv<T: serde::de::DeserializeOwned + serde::Serialize>(bytes: &[u8]) -> Vec<u8> {
    zenolink_cli::report::to_csv(&read_csv::<T>(bytes).unwrap()).unwrap()
}

fn with_format<'a>(args: &[&'a str], format: &'a str) -> Vec<&'a str> {
    [args, &["--format", format][..]].concat()
}

fn json<'a>(args: &[&'a str]) -> Vec<&'a str> {
    with_format(args, "json")
}

fn csv<'a>(args: &[&'a str]) -> Vec<&'a str> {
    with_format(args, "csv")
}

fn assert_round_trip(args: &[&str], reencode: fn(&[u8]) -> Vec<u8>) {
    let out = ok(args);
    assert_eq!(
        String::from_utf8(reencode(&out)).unwrap(),
        String::from_utf8(out).unwrap(),
        "{args:?}"
    );
}

#[test]
fn every_output_round_trips_through_the_readers() {
    let analyze = [
        "analyze", "--m", "3", "--n", "7", "--q", "0.4", "--p", "0.99", "--tc", "0.001",
    ];
    let simulate = [
        "simulate",
        "--m",
        "3",
        "--n",
        "5",
        "--bit",
        "1",
        "--trials",
        "3000",
        "--variant",
        "modified",
    ];
    let semi = [
        "simulate", "--kind", "semi", "--n", "4", "--bit", "1", "--trials", "3000",
    ];
    let optimize = [
        "optimize", "--q", "0.7", "--p", "0.95", "--m-max", "9", "--n-max", "6", "--tc", "1e-6",
    ];
    let sweep_n = [
        "sweep", "--axis", "n", "--q", "0.5", "--m", "3", "--from", "1", "--to", "40",
    ];
    let sweep_q = [
        "sweep", "--axis", "q", "--from", "0", "--to", "1", "--step", "0.125", "--p", "0.9",
        "--m-max", "6", "--n-max", "6",
    ];
    let plan = [
        "plan", "--bits", "0110100", "--p", "0.99", "--m", "3", "--n", "9", "--tc", "0.5",
    ];

    assert_round_trip(&json(&analyze), reencode_json::<AnalyticPoint>);
    assert_round_trip(&csv(&analyze), reencode_csv::<AnalyticPoint>);
    assert_round_trip(
        &csv(&["analyze", "--m", "1", "--n", "1", "--q", "0.5"]),
        reencode_csv::<AnalyticPoint>,
    );
    for args in [&simulate[..], &semi[..]] {
        assert_round_trip(&json(args), reencode_json::<EnsembleStats>);
        assert_round_trip(&csv(args), reencode_csv::<SimulateRow>);
    }
    assert_round_trip(&json(&optimize), reencode_json::<OptimizeReport>);
    assert_round_trip(&csv(&optimize), reencode_csv::<OptimizeRow>);
    assert_round_trip(&json(&sweep_n), reencode_json::<Vec<SweepNRow>>);
    assert_round_trip(&csv(&sweep_n), reencode_csv::<SweepNRow>);
    assert_round_trip(&json(&sweep_q), reencode_json::<Vec<SweepQRow>>);
    assert_round_trip(&csv(&sweep_q), reencode_csv::<SweepQRow>);
    assert_round_trip(&json(&plan), reencode_json::<BitSchedule>);
    assert_round_trip(&csv(&plan), reencode_csv::<BitPlan>);
}

#[test]
fn readers_reject_unknown_schema_versions() {
    let doc = br#"{"schema_version": 2, "command": "plan", "result": []}"#;
    assert!(read_json::<Vec<BitPlan>>(&doc[..]).is_err());
    assert!(Path::new(env!("CARGO_BIN_EXE_zenolink")).exists());
}
