//! Black-box tests of the `synclora` binary: exit codes, output formats,
//! config layering, and reproducibility of written artifacts.

use std::fs;
use std::process::{Command, Output};

fn synclora(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synclora"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn replay_example_prints_both_guess_sequences() {
    let out = synclora(&["replay-example"]);
    assert_eq!(code_of(&out), 0, "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(
        text.contains("total 7, average 2.33"),
        "sequence A summary missing:\n{text}"
    );
    assert!(
        text.contains("total 5, average 1.66"),
        "sequence B summary missing:\n{text}"
    );
    assert!(
        text.contains("ED1 bitmap 101"),
        "round-1 bitmap missing:\n{text}"
    );
}

#[test]
fn run_needs_a_fully_pinned_cell() {
    let out = synclora(&["run", "--protocol", "proposed"]);
    assert_eq!(code_of(&out), 2, "{}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("--sf"),
        "should name the missing flag"
    );
}

#[test]
fn device_count_outside_the_supported_range_is_a_usage_error() {
    let out = synclora(&["run", "--sf", "7", "--devices", "1", "--replications", "1"]);
    assert_eq!(code_of(&out), 2, "{}", stderr_of(&out));
}

#[test]
fn empty_device_range_is_a_usage_error() {
    let out = synclora(&["sweep", "--devices", "5..2", "--replications", "1"]);
    assert_eq!(code_of(&out), 2, "{}", stderr_of(&out));
}

#[test]
fn retransmission_budget_past_the_horizon_exits_3() {
    let out = synclora(&[
        "run",
        "--protocol",
        "lorawan",
        "--sf",
        "7",
        "--devices",
        "2",
        "--max-retx",
        "12",
        "--replications",
        "2",
    ]);
    assert_eq!(code_of(&out), 3, "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("horizon"), "{}", stderr_of(&out));
}

#[test]
fn proposed_csv_row_reports_zero_loss() {
    let out = synclora(&[
        "run",
        "--protocol",
        "proposed",
        "--sf",
        "12",
        "--devices",
        "3",
        "--replications",
        "20",
    ]);
    assert_eq!(code_of(&out), 0, "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(
        text.contains(
            "protocol,sf,devices,replications,seed,mean_delay_s,std_delay_s,\
             mean_energy_j,mean_energy_per_bit_j,mean_throughput_bps,\
             mean_frame_tx,mean_bitmap_tx,loss_rate"
        ),
        "header changed:\n{text}"
    );
    let row = text
        .lines()
        .find(|l| l.starts_with("proposed,"))
        .expect("one data row");
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 13);
    assert_eq!(fields[1], "12");
    assert_eq!(fields[2], "3");
    assert_eq!(fields[10], "1", "every frame is sent exactly once");
    assert_eq!(
        fields[12], "0",
        "collaborative decoding never loses a frame"
    );
}

#[test]
fn sweeps_with_the_same_seed_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for path in [&first, &second] {
        let out = synclora(&[
            "sweep",
            "--sf",
            "7",
            "--devices",
            "2..4",
            "--replications",
            "5",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code_of(&out), 0, "{}", stderr_of(&out));
    }
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn json_sweep_nests_config_and_rows() {
    let out = synclora(&[
        "sweep",
        "--sf",
        "7",
        "--devices",
        "2..3",
        "--replications",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(code_of(&out), 0, "{}", stderr_of(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(v["config"].is_object());
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4, "2 protocols x 1 sf x 2 device counts");
    assert!(rows
        .iter()
        .all(|r| r["aggregate"]["n_outcomes"].is_number()));
}

#[test]
fn flags_override_config_keys_which_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    fs::write(&cfg, "sf=12\ndevices=4\nseed=9\nreplications=2\n").unwrap();
    let out = synclora(&["run", "--config", cfg.to_str().unwrap(), "--sf", "7"]);
    assert_eq!(code_of(&out), 0, "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let row = text.lines().find(|l| l.starts_with("proposed,")).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[1], "7", "flag beats config");
    assert_eq!(fields[2], "4", "config fills the unset flag");
    assert_eq!(fields[4], "9", "config seed applies");
    assert!(text.contains("# seed=9\n"));
}

#[test]
fn unknown_config_key_is_rejected_with_its_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    fs::write(&cfg, "sf=7\nspread=12\n").unwrap();
    let out = synclora(&["run", "--config", cfg.to_str().unwrap(), "--devices", "2"]);
    assert_eq!(code_of(&out), 2, "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("line 2"), "{}", stderr_of(&out));
}

#[test]
fn event_log_needs_an_output_path() {
    let out = synclora(&["run", "--sf", "7", "--devices", "2", "--emit-events"]);
    assert_eq!(code_of(&out), 2, "{}", stderr_of(&out));
}

#[test]
fn event_log_tags_every_transmission_with_its_replication() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cell.csv");
    let out = synclora(&[
        "run",
        "--sf",
        "12",
        "--devices",
        "2",
        "--replications",
        "3",
        "--out",
        csv.to_str().unwrap(),
        "--emit-events",
    ]);
    assert_eq!(code_of(&out), 0, "{}", stderr_of(&out));
    let log = fs::read_to_string(dir.path().join("cell.csv.events.jsonl")).unwrap();
    let mut replications_seen = std::collections::BTreeSet::new();
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in [
            "device",
            "kind",
            "start",
            "duration",
            "slot",
            "outcome",
            "replication",
        ] {
            assert!(!v[key].is_null(), "record missing {key}: {line}");
        }
        replications_seen.insert(v["replication"].as_u64().unwrap());
    }
    assert_eq!(replications_seen, (0..3).collect());
}
