//! End-to-end tests of the `sillsim` binary via subprocesses.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::process::{Child, Command, Stdio};

fn sillsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sillsim"))
}

struct KillOnDrop(Child);

impl Drop for KillOnDrop {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn read_file(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn run_writes_three_files_with_expected_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = sillsim().args(["run", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());

    let trace = read_file(&out.join("trace.csv"));
    let frames = read_file(&out.join("frames.csv"));
    let summary = read_file(&out.join("summary.txt"));

    // 8 h at a 25 s tick: 1153 sensor rows; at 30 s: 961 camera rows.
    assert_eq!(trace.lines().count(), 1 + 1_153 + 961);
    assert!(trace.starts_with("t_s,rh_true,rh_read,opening_pct,light_frac,cmd\n"));
    assert_eq!(frames.lines().count(), 1 + 961);
    assert!(summary.contains("commands"));
    assert!(summary.contains("comfort occupancy"));
}

#[test]
fn run_is_byte_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    for out in [&a, &b] {
        assert!(sillsim().args(["run", "--out"]).arg(out).status().unwrap().success());
    }
    assert!(sillsim()
        .args(["run", "--seed", "7", "--out"])
        .arg(&c)
        .status()
        .unwrap()
        .success());

    assert_eq!(read_file(&a.join("trace.csv")), read_file(&b.join("trace.csv")));
    assert_eq!(read_file(&a.join("frames.csv")), read_file(&b.join("frames.csv")));
    assert_ne!(read_file(&a.join("trace.csv")), read_file(&c.join("trace.csv")));
}

#[test]
fn run_accepts_a_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("short.ini");
    std::fs::write(
        &scenario,
        "[scenario]\nduration_s = 900\n\n[plants]\nspecies = Monstera Deliciosa\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = sillsim()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let trace = read_file(&out.join("trace.csv"));
    // 900 s: 37 sensor rows + 31 camera rows + header.
    assert_eq!(trace.lines().count(), 1 + 37 + 31);
    let frames = read_file(&out.join("frames.csv"));
    assert!(frames.starts_with("t_s,rh_true,opening_pct,light_frac,curtain-sway,stem-nod\n"));
}

#[test]
fn bad_scenario_fails_with_location_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.ini");
    std::fs::write(&scenario, "[controller]\ndeadband_hi = 0.05\n").unwrap();
    let output = sillsim()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("deadband"), "stderr: {stderr}");
    assert!(output.stdout.is_empty());
}

#[test]
fn unwritable_output_dir_is_a_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "a plain file").unwrap();
    // Using a file as a directory component cannot work.
    let out = blocker.join("out");
    let output = sillsim().args(["run", "--out"]).arg(&out).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("blocker"), "stderr: {stderr}");
}

#[test]
fn analyze_assigns_the_calibrated_speeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert!(sillsim().args(["run", "--out"]).arg(&out).status().unwrap().success());
    let output = sillsim()
        .arg("analyze")
        .arg(out.join("frames.csv"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    let sway = stdout.lines().find(|l| l.starts_with("curtain-sway")).unwrap();
    assert!(sway.contains("1x"), "{sway}");
    let leaf = stdout.lines().find(|l| l.starts_with("leaf-flap")).unwrap();
    assert!(leaf.contains("3x"), "{leaf}");
    let stem = stdout.lines().find(|l| l.starts_with("stem-nod")).unwrap();
    assert!(stem.contains("5x"), "{stem}");
    assert!(stdout.contains("human [30-50]  1.0000"));
}

#[test]
fn analyze_reports_unknown_motion_columns() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames.csv");
    // A constant humidity trace with one slow unknown motion (too slow for
    // every offered speed) and one fast known-shaped motion.
    let mut csv = String::from("t_s,rh_true,opening_pct,light_frac,mystery-drift,quick-bob\n");
    for k in 0..=960 {
        let t = f64::from(k) * 30.0;
        let drift = (std::f64::consts::TAU * t / 600_000.0).sin();
        let bob = (std::f64::consts::TAU * t / 900.0).sin();
        csv.push_str(&format!("{t:.4},40.0000,70,0.5000,{drift:.4},{bob:.4}\n"));
    }
    std::fs::write(&frames, csv).unwrap();
    let output = sillsim().arg("analyze").arg(&frames).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    let drift = stdout.lines().find(|l| l.starts_with("mystery-drift")).unwrap();
    assert!(drift.contains("imperceptible"), "{drift}");
    let bob = stdout.lines().find(|l| l.starts_with("quick-bob")).unwrap();
    assert!(bob.contains("1x"), "{bob}");
    // Constant humidity: a one-hot comfort vector.
    assert!(stdout.contains("human [30-50]  1.0000"));
}

#[test]
fn presets_lists_the_stock_configuration() {
    let output = sillsim().arg("presets").output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("Monstera Deliciosa"));
    assert!(stdout.contains("0.5, 1, 2, 5, 10, 30, 60, 120, 300, 1800, 3600"));
    assert!(stdout.contains("50, 54, 58, 62, 66, 70, 74, 78, 82, 86, 90"));
    assert!(stdout.contains("11 positions, 10 transitions"));
}

/// Spawn `serve-device` on an ephemeral port and report the bound endpoint.
fn spawn_server() -> (KillOnDrop, String) {
    let mut child = sillsim()
        .args(["serve-device", "--endpoint", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let stdout = child.stdout.take().unwrap();
    let mut line = String::new();
    BufReader::new(stdout).read_line(&mut line).unwrap();
    let endpoint = line.trim().strip_prefix("listening on ").unwrap().to_owned();
    (KillOnDrop(child), endpoint)
}

#[test]
fn drive_against_served_device_matches_the_controller() {
    let (server, endpoint) = spawn_server();
    let dir = tempfile::tempdir().unwrap();
    let readings = dir.path().join("readings.txt");
    std::fs::write(&readings, "# warmup\n40.00\n40.20\n40.50\n40.60\n").unwrap();

    let output = sillsim()
        .args(["drive", "--endpoint", &endpoint])
        .arg(&readings)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    // Rises of 0.20, 0.30 (inclusive edge), and 0.10 (inclusive edge): three
    // closes walking 70 -> 66 -> 62 -> 58.
    assert_eq!(stdout.matches("SET 66 -> OK 66").count(), 1);
    assert_eq!(stdout.matches("SET 62 -> OK 62").count(), 1);
    assert_eq!(stdout.matches("SET 58 -> OK 58").count(), 1);
    assert!(stdout.contains("3 commands delivered, 0 failed"));
    drop(server);
}

#[test]
fn drive_with_flat_readings_sends_nothing() {
    let (server, endpoint) = spawn_server();
    let dir = tempfile::tempdir().unwrap();
    let readings = dir.path().join("flat.txt");
    std::fs::write(&readings, "40.0\n40.0\n40.0\n40.0\n").unwrap();
    let output = sillsim()
        .args(["drive", "--endpoint", &endpoint])
        .arg(&readings)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("0 commands delivered"));
    assert!(!stdout.contains("SET"));
    drop(server);
}

#[test]
fn drive_against_nothing_fails() {
    let dir = tempfile::tempdir().unwrap();
    let readings = dir.path().join("r.txt");
    std::fs::write(&readings, "40.0\n").unwrap();
    // A port that nothing listens on.
    let output = sillsim()
        .args(["drive", "--endpoint", "127.0.0.1:1"])
        .arg(&readings)
        .output()
        .unwrap();
    assert!(!output.status.success());
}

#[test]
fn serve_device_on_a_busy_endpoint_fails() {
    let holder = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = holder.local_addr().unwrap().to_string();
    let output = sillsim()
        .args(["serve-device", "--endpoint", &endpoint])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains(&endpoint), "stderr: {stderr}");
}

#[test]
fn real_time_drive_paces_by_the_controller_tick() {
    let (server, endpoint) = spawn_server();
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("fast.ini");
    std::fs::write(&scenario, "[controller]\ntick_s = 0.05\n").unwrap();
    let readings = dir.path().join("r.txt");
    std::fs::write(&readings, "40.0\n40.0\n40.0\n40.0\n").unwrap();

    let started = std::time::Instant::now();
    let output = sillsim()
        .args(["drive", "--real-time", "--endpoint", &endpoint, "--scenario"])
        .arg(&scenario)
        .arg(&readings)
        .output()
        .unwrap();
    let elapsed = started.elapsed();
    assert!(output.status.success());
    // Three inter-tick sleeps at 50 ms, jitter aside.
    assert!(elapsed >= std::time::Duration::from_millis(150), "{elapsed:?}");
    drop(server);
}

#[test]
fn empty_readings_file_is_an_error() {
    let (server, endpoint) = spawn_server();
    let dir = tempfile::tempdir().unwrap();
    let readings = dir.path().join("empty.txt");
    std::fs::write(&readings, "# nothing here\n").unwrap();
    let output = sillsim()
        .args(["drive", "--endpoint", &endpoint])
        .arg(&readings)
        .output()
        .unwrap();
    assert!(!output.status.success());
    drop(server);
}

#[test]
fn analyze_rejects_a_missing_file() {
    let output = sillsim().args(["analyze", "/nonexistent/frames.csv"]).output().unwrap();
    assert!(!output.status.success());
    let mut stderr = String::new();
    output.stderr.as_slice().read_to_string(&mut stderr).unwrap();
    assert!(stderr.contains("frames.csv"));
}
