use std::path::Path;
use std::process::{Command, Output};

fn mzi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mzi")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn significant_digits(field: &str) -> usize {
    let mantissa = field.split(['e', 'E']).next().unwrap();
    mantissa.chars().filter(|c| c.is_ascii_digit()).count()
}

const MIRRORS: [&str; 5] = ["C", "E", "A", "B", "F"];

#[test]
fn simulate_writes_both_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mzi(&["simulate", "--preset", "constructive", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));

    let (header, rows) = read_csv(&dir.path().join("time_series.csv"));
    assert_eq!(header, ["sample_index", "t", "D", "upper_power", "lower_power"]);
    assert_eq!(rows.len(), 4096);
    assert_eq!(rows[10][0], "10");
    for field in &rows[123][1..] {
        assert!(significant_digits(field) >= 15, "{field}");
    }

    let (header, rows) = read_csv(&dir.path().join("spectrum.csv"));
    assert_eq!(header, ["bin_index", "frequency", "power", "is_mirror_peak", "mirror_label"]);
    assert_eq!(rows.len(), 2049);
    let peaks: Vec<(usize, &str)> =
        rows.iter().filter(|r| r[3] == "true").map(|r| (r[0].parse().unwrap(), r[4].as_str())).collect();
    assert_eq!(peaks, [(23, "C"), (29, "E"), (31, "A"), (37, "B"), (41, "F")]);
    let power = col(&rows, 2);
    assert!((power[29] / power[31] - 4.0).abs() < 0.04);
    assert!((power[41] / power[31] - 4.0).abs() < 0.04);
}

#[test]
fn destructive_preset_nulls_e_and_f() {
    let dir = tempfile::tempdir().unwrap();
    let o = mzi(&["simulate", "--preset", "destructive", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("spectrum.csv"));
    let power = col(&rows, 2);
    assert!(power[29] < 1e-6 * power[31] && power[41] < 1e-6 * power[31]);
    assert!((power[23] / power[31] - 1.0).abs() < 0.01);
}

#[test]
fn identical_configs_give_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(mzi(&["simulate", "--preset", "block-c-arm", "--out", a.path().to_str().unwrap()]).status.success());
    assert!(mzi(&["simulate", "--preset", "block-c-arm", "--sequential", "--out", b.path().to_str().unwrap()])
        .status
        .success());
    for f in ["time_series.csv", "spectrum.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_with_custom_output_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/presets/block-after-f.toml"))
        .unwrap()
        .replace("\"time_series.csv\"", "\"ts.csv\"")
        .replace("n_samples = 4096", "n_samples = 256");
    std::fs::write(&cfg, text).unwrap();
    let o = mzi(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("ts.csv"));
    assert_eq!(rows.len(), 256);
    assert!(dir.path().join("spectrum.csv").exists());
}

fn config_error(text: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, text).unwrap();
    let o = mzi(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    stderr(&o)
}

#[test]
fn invalid_configs_exit_2_with_line_and_key() {
    let preset = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/presets/constructive.toml")).unwrap();

    let err = config_error("");
    assert!(err.contains("line 1") && err.contains("profile"), "{err}");

    let err = config_error("this is = = not toml");
    assert!(err.contains("line 1"), "{err}");

    let bad = preset.replace("width_y = 1.0", "width_y = 1.0\nwobble = 2");
    let line = bad.lines().position(|l| l.starts_with("wobble")).unwrap() + 1;
    let err = config_error(&bad);
    assert!(err.contains(&format!("line {line}")) && err.contains("wobble"), "{err}");

    let bad = preset.replace("source_intensity = 1.0", "source_intensity = -1.0");
    let line = bad.lines().position(|l| l.starts_with("source_intensity")).unwrap() + 1;
    let err = config_error(&bad);
    assert!(err.contains(&format!("line {line}")) && err.contains("source_intensity"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mzi(&[]).status.code(), Some(2));
    assert_eq!(mzi(&["simulate"]).status.code(), Some(2));
    assert_eq!(mzi(&["simulate", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(mzi(&["simulate", "--preset", "destructive", "--config", "x.toml"]).status.code(), Some(2));
    assert_eq!(mzi(&["sweep", "--preset", "constructive", "--param", "colour", "--values", "1"]).status.code(), Some(2));
    assert_eq!(mzi(&["simulate", "--config", "/nonexistent/run.toml"]).status.code(), Some(2));
}

fn sweep(preset: &str, param: &str, values: &str) -> Vec<Vec<f64>> {
    let dir = tempfile::tempdir().unwrap();
    let o = mzi(&["sweep", "--preset", preset, "--param", param, "--values", values, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join(format!("sweep_{param}.csv")));
    let mut expect = vec![param.to_string()];
    expect.extend(MIRRORS.iter().map(|m| format!("peak_power_{m}")));
    expect.push("dc_power".into());
    assert_eq!(header, expect);
    rows.iter().map(|r| r.iter().map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn amplitude_sweep_quadruples_power_per_doubling() {
    let rows = sweep("constructive", "amplitude-scale", "0.5,1,2");
    for w in rows.windows(2) {
        for m in 1..=5 {
            assert!((w[1][m] / w[0][m] - 4.0).abs() < 0.01, "{w:?}");
        }
    }
}

#[test]
fn phase_b_sweep_follows_inner_fringe() {
    // with the C arm blocked the E peak scales as (1 + cos φAB)²
    let rows = sweep("block-c-arm", "phase-b", "0,1.0471975511965976,1.5707963267948966,2.0943951023931953");
    let e0 = rows[0][2];
    for r in &rows[1..] {
        let expect = ((1.0 + r[0].cos()) / 2.0).powi(2);
        assert!((r[2] / e0 - expect).abs() < 1e-3 * expect.max(0.1), "{r:?}");
    }
}

#[test]
fn skew_sweep_produces_dc() {
    let rows = sweep("constructive", "skew", "0,0.2");
    assert!(rows[0][6] < 1e-20 * rows[0][3], "{rows:?}");
    assert!(rows[1][6] > rows[1][3], "{rows:?}");
}

#[test]
fn negative_sweep_values_are_accepted() {
    let rows = sweep("constructive", "skew", "-0.2,0.2");
    assert!((rows[0][6] / rows[1][6] - 1.0).abs() < 1e-6);
}

#[test]
fn verify_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = mzi(&["verify", "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}{}", stderr(&o));
    assert_eq!(stdout.lines().filter(|l| l.contains(": PASS - ")).count(), 9, "{stdout}");
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(json.contains("E/A ratio") && json.contains("\"passed\": true"));
    let text = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(text.contains("ALL CRITERIA PASS"));
}
