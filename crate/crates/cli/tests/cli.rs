//! End-to-end tests driving the compiled `fasthit` binary.

use std::path::Path;
use std::process::{Command, Output};

use fasthit_core::graphs::GluedTreeGraph;
use fasthit_core::photonics::{frame_probabilities, Frame, Spot, WaveguideLayout};
use fasthit_core::walks::ChainQw;

fn fasthit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fasthit"))
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary should run")
}

fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout should be UTF-8")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|_| panic!("missing {}", path.display()))
}

/// Parses the `value` column of a two-column curve CSV.
fn csv_values(text: &str) -> Vec<f64> {
    text.lines()
        .skip(1)
        .map(|line| line.split(',').nth(1).expect("two columns").parse().expect("a number"))
        .collect()
}

#[test]
fn graph_writes_the_fourteen_node_tree() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = fasthit(dir.path(), &["graph", "--B", "2", "--n", "2", "--seed", "1"]);
    assert_success(&output);
    assert!(stdout(&output).contains("14 nodes"));

    let text = read(&dir.path().join("graph-B2-n2-seed1.json"));
    let graph = GluedTreeGraph::from_json_str(&text).expect("valid graph JSON");
    assert_eq!(graph.node_count(), 14);
    assert_eq!(graph.seed(), 1);
}

#[test]
fn graph_rejects_branching_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = fasthit(dir.path(), &["graph", "--B", "1", "--n", "2"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("branching factor"));
}

#[test]
fn identical_invocations_write_identical_bytes() {
    let first = tempfile::tempdir().expect("tempdir");
    let second = tempfile::tempdir().expect("tempdir");
    for dir in [first.path(), second.path()] {
        assert_success(&fasthit(dir, &["graph", "--B", "3", "--n", "2", "--seed", "9"]));
        assert_success(&fasthit(
            dir,
            &["sweep", "--kind", "qw-full", "--B", "2", "--n", "2", "--tau-max", "3", "--step", "0.5", "--seed", "4"],
        ));
    }
    for name in ["graph-B3-n2-seed9.json", "sweep-qw-full-B2-n2-seed4.csv"] {
        assert_eq!(
            read(&first.path().join(name)),
            read(&second.path().join(name)),
            "{name} differs between reruns"
        );
    }
}

#[test]
fn sweep_reaches_the_known_peak() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = fasthit(
        dir.path(),
        &["sweep", "--kind", "qw-chain", "--B", "2", "--n", "2", "--tau-max", "6"],
    );
    assert_success(&output);
    let values = csv_values(&read(&dir.path().join("sweep-qw-chain-B2-n2-seed0.csv")));
    assert_eq!(values.len(), 601);
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    assert!((max - 0.82).abs() < 0.01, "peak {max}");
}

#[test]
fn lumped_walk_settles_at_one_over_the_node_count() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = fasthit(
        dir.path(),
        &["sweep", "--kind", "crw-lumped", "--B", "2", "--n", "3", "--tau-max", "1000", "--step", "50"],
    );
    assert_success(&output);
    let values = csv_values(&read(&dir.path().join("sweep-crw-lumped-B2-n3-seed0.csv")));
    assert!((values.last().expect("nonempty") - 1.0 / 30.0).abs() < 1e-6);
}

#[test]
fn degenerate_grids_are_usage_errors() {
    let dir = tempfile::tempdir().expect("tempdir");
    let zero = fasthit(
        dir.path(),
        &["sweep", "--kind", "qw-chain", "--B", "2", "--n", "2", "--tau-max", "0"],
    );
    assert_eq!(zero.status.code(), Some(2));
    let negative_step = fasthit(
        dir.path(),
        &["sweep", "--kind", "qw-chain", "--B", "2", "--n", "2", "--tau-max", "6", "--step", "-0.1"],
    );
    assert_eq!(negative_step.status.code(), Some(2));
    let missing = fasthit(dir.path(), &["sweep", "--kind", "qw-chain", "--B", "2", "--n", "2"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn unknown_walk_kinds_are_usage_errors() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = fasthit(
        dir.path(),
        &["sweep", "--kind", "qw-fast", "--B", "2", "--n", "2", "--tau-max", "6"],
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn scaling_writes_records_and_fits() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = fasthit(dir.path(), &["scaling", "--B", "2..3", "--n", "2..4"]);
    assert_success(&output);
    assert!(stdout(&output).contains("6 records"));

    let csv = read(&dir.path().join("scaling.csv"));
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("B,n,tau_star,p_qw,"));

    let fits: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("fits.json"))).expect("valid JSON");
    let entries = fits.as_array().expect("array");
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["B"], 2);
    assert_eq!(entries[0]["peak_vs_depth"]["model"], "power_law");
    let slope = entries[0]["tau_star_vs_depth"]["slope"].as_f64().expect("slope");
    assert!(slope > 0.0);
}

#[test]
fn scaling_with_too_few_points_skips_fits_with_a_warning() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = fasthit(dir.path(), &["scaling", "--B", "2..2", "--n", "1..1"]);
    assert_success(&output);
    assert!(String::from_utf8_lossy(&output.stderr).contains("skipping fits"));
    assert_eq!(read(&dir.path().join("fits.json")), "[]\n");
    assert_eq!(read(&dir.path().join("scaling.csv")).lines().count(), 2);
}

#[test]
fn scaling_compare_table_has_log_columns() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output =
        fasthit(dir.path(), &["scaling", "--B", "2..4", "--n", "4", "--compare-crw"]);
    assert_success(&output);
    let table = read(&dir.path().join("compare-crw.csv"));
    assert!(table.starts_with("B,n,p_star_qw,p_crw_stationary,log10_p_qw,log10_p_crw\n"));
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn partial_peak_settings_are_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = fasthit(dir.path(), &["scaling", "--B", "2", "--n", "2..4", "--tau-max", "40"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("together"));
}

#[test]
fn config_values_lose_to_flags() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config_path = dir.path().join("run.cfg");
    std::fs::write(&config_path, "seed = 1\ntau_max = 6\n").expect("write config");
    let config = config_path.to_str().expect("UTF-8 path");

    let output = fasthit(
        dir.path(),
        &["graph", "--config", config, "--B", "2", "--n", "2", "--seed", "2"],
    );
    assert_success(&output);
    assert!(dir.path().join("graph-B2-n2-seed2.json").exists());

    let from_config = fasthit(dir.path(), &["graph", "--config", config, "--B", "2", "--n", "2"]);
    assert_success(&from_config);
    assert!(dir.path().join("graph-B2-n2-seed1.json").exists());
}

#[test]
fn physical_units_rescale_the_time_column() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config_path = dir.path().join("run.cfg");
    std::fs::write(&config_path, "units = physical\ngamma_phys = 0.1\n").expect("write config");

    let output = fasthit(
        dir.path(),
        &[
            "sweep", "--config", config_path.to_str().expect("UTF-8 path"),
            "--kind", "qw-chain", "--B", "2", "--n", "2", "--tau-max", "2", "--step", "0.5",
        ],
    );
    assert_success(&output);
    let csv = read(&dir.path().join("sweep-qw-chain-B2-n2-seed0.csv"));
    assert!(csv.starts_with("z_mm,value\n"));
    let tau_half = csv.lines().nth(2).expect("row");
    assert!(tau_half.starts_with("5.00000000000e0,"), "row {tau_half}");
    let tau_two = csv.lines().last().expect("row");
    assert!(tau_two.starts_with("2.00000000000e1,"), "row {tau_two}");
}

#[test]
fn unknown_config_keys_are_usage_errors() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config_path = dir.path().join("bad.cfg");
    std::fs::write(&config_path, "volume = 11\n").expect("write config");
    let output = fasthit(
        dir.path(),
        &["graph", "--config", config_path.to_str().expect("UTF-8 path"), "--B", "2", "--n", "2"],
    );
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown config key"));
}

#[test]
fn environment_variable_sets_the_output_directory() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = Command::new(env!("CARGO_BIN_EXE_fasthit"))
        .env("FASTHIT_OUTPUT_DIR", dir.path())
        .args(["graph", "--B", "2", "--n", "1"])
        .output()
        .expect("binary should run");
    assert_success(&output);
    assert!(dir.path().join("graph-B2-n1-seed0.json").exists());
}

#[test]
fn design_narrows_the_central_gap() {
    let dir = tempfile::tempdir().expect("tempdir");
    let calib_path = dir.path().join("calib.csv");
    let model_c0 = 2.0f64;
    let model_d0 = 8.0f64;
    let mut calib = String::from("spacing_mm,coupling_per_mm\n");
    for spacing in [4.0f64, 8.0, 12.0, 16.0] {
        calib.push_str(&format!("{},{}\n", spacing, model_c0 * (-spacing / model_d0).exp()));
    }
    std::fs::write(&calib_path, calib).expect("write calibration");

    let output = fasthit(
        dir.path(),
        &[
            "design", "--B", "2", "--n", "2",
            "--calib", calib_path.to_str().expect("UTF-8 path"),
            "--gamma-phys", "0.1", "--z", "30",
        ],
    );
    assert_success(&output);
    let layout =
        WaveguideLayout::from_json_str(&read(&dir.path().join("layout-B2-n2.json")))
            .expect("valid layout JSON");
    assert_eq!(layout.positions_mm.len(), 6);
    let side = layout.spacings_mm[0];
    let center = layout.spacings_mm[2];
    assert!((side - center - model_d0 * 2f64.sqrt().ln()).abs() < 1e-9);
}

#[test]
fn frame_command_matches_the_library() {
    let dir = tempfile::tempdir().expect("tempdir");
    let frame_path = dir.path().join("f.txt");
    let spots_path = dir.path().join("s.json");

    let expected = ChainQw::new(2, 2).expect("valid shape").distribution(2.6).expect("valid tau");
    let centers: Vec<f64> = (0..6).map(|j| 6.0 + 12.0 * j as f64).collect();
    let mut text = String::new();
    for py in 0..16 {
        for px in 0..78 {
            let mut value = 0.0;
            for (p, x0) in expected.iter().zip(&centers) {
                let dist_sq = (px as f64 - x0).powi(2) + (py as f64 - 8.0).powi(2);
                value += p * (-dist_sq / 4.5).exp();
            }
            text.push_str(&format!("{:.6} ", value * 1e4));
        }
        text.push('\n');
    }
    std::fs::write(&frame_path, &text).expect("write frame");
    let spots: Vec<Spot> = centers.iter().map(|&x| Spot { x, y: 8.0, radius: 5.0 }).collect();
    std::fs::write(&spots_path, serde_json::to_string(&spots).expect("serializable"))
        .expect("write spots");

    let output = fasthit(
        dir.path(),
        &[
            "frame",
            "--frame", frame_path.to_str().expect("UTF-8 path"),
            "--spots", spots_path.to_str().expect("UTF-8 path"),
            "--exit-index", "5",
        ],
    );
    assert_success(&output);

    let frame = Frame::load(&frame_path).expect("readable frame");
    let reference = frame_probabilities(&frame, &spots).expect("valid spots");
    let last_line = stdout(&output);
    let last_line = last_line.lines().last().expect("output");
    assert_eq!(last_line, format!("exit share: {:.11e}", reference.values[5]));

    let out_of_range = fasthit(
        dir.path(),
        &[
            "frame",
            "--frame", frame_path.to_str().expect("UTF-8 path"),
            "--spots", spots_path.to_str().expect("UTF-8 path"),
            "--exit-index", "6",
        ],
    );
    assert_eq!(out_of_range.status.code(), Some(2));
}

#[test]
fn missing_input_files_exit_with_io_code() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = fasthit(dir.path(), &["alpha", "--counts", "no-such-file.csv"]);
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn alpha_reports_zero_for_zero_triples() {
    let dir = tempfile::tempdir().expect("tempdir");
    let counts_path = dir.path().join("counts.csv");
    std::fs::write(&counts_path, "N3,N13,N23,N123\n1000,100,100,0\n").expect("write counts");
    let output =
        fasthit(dir.path(), &["alpha", "--counts", counts_path.to_str().expect("UTF-8 path")]);
    assert_success(&output);
    assert_eq!(stdout(&output).trim(), "alpha = 0.000 +- 0.000");
}

#[test]
fn svg_charts_accompany_sweeps_on_request() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = fasthit(
        dir.path(),
        &[
            "sweep", "--kind", "qw-chain", "--B", "2", "--n", "2",
            "--tau-max", "6", "--step", "0.1", "--svg", "curve.svg",
        ],
    );
    assert_success(&output);
    let svg = read(&dir.path().join("curve.svg"));
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("<polyline"));
    assert!(svg.contains(">exit probability<"));
}
