use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gravphase(sub: &str, config: &str, dir: &Path) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_gravphase"))
        .args([sub, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env("GRAVPHASE_THREADS", "2")
        .output()
        .unwrap()
}

fn csv(dir: &Path, name: &str) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join("out").join(name))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn drop_csv_hits_five_sixths_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravphase("drop", "preset=dimensionless\nt_end=1.0\n", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = csv(dir.path(), "drop.csv");
    assert_eq!(rows[0], ["t", "phase_rad", "method", "overlap_mag"]);
    let last = rows.last().unwrap();
    assert_eq!(last[0].parse::<f64>().unwrap(), 1.0);
    assert!((last[1].parse::<f64>().unwrap() - 5.0 / 6.0).abs() <= 1e-10);
    assert_eq!(last[2], "analytic");

    let first = fs::read(dir.path().join("out/drop.csv")).unwrap();
    let again = gravphase("drop", "preset=dimensionless\nt_end=1.0\n", dir.path());
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("out/drop.csv")).unwrap(), first);
}

#[test]
fn gauge_check_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravphase("gauge-check", "preset=dimensionless\n", dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    for row in &csv(dir.path(), "gauge_check.csv")[1..] {
        assert!(row[1].parse::<f64>().unwrap() >= 1.0 - 1e-6);
    }
    assert!(stdout.contains("min fidelity"));
}

#[test]
fn inertial_rindler_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravphase("rindler", "accel=0\nt_count=7\n", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = csv(dir.path(), "rindler.csv");
    assert_eq!(rows.len(), 8);
    for row in &rows[1..] {
        assert_eq!(row[0], row[1]);
    }
}

#[test]
fn sweep_rows_follow_mass_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravphase("sweep", "sweep_m=1,2,4\n", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = csv(dir.path(), "sweep.csv");
    assert_eq!(rows[0][0], "m");
    let c1: Vec<f64> = rows[1..].iter().map(|r| r[3].parse().unwrap()).collect();
    let m: Vec<f64> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(m, [1.0, 2.0, 4.0]);
    assert!((c1[1] / c1[0] - 2.0).abs() < 1e-9 && (c1[2] / c1[0] - 4.0).abs() < 1e-9);
}

#[test]
fn cow_gr_and_fit_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gravphase("cow", "delta_h=0.5\n", dir.path()).status.code(), Some(0));
    assert_eq!(csv(dir.path(), "cow.csv")[0], ["t", "phase_rad"]);
    assert_eq!(gravphase("gr", "preset=neutron\nd=0.01\ndelta_h=1\n", dir.path()).status.code(), Some(0));
    let gr = csv(dir.path(), "gr.csv");
    assert!(gr[1][3].parse::<f64>().unwrap() > 0.0);
    let out = gravphase("fit", "method=quadrature\n", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let fit = csv(dir.path(), "fit.csv");
    assert!((fit[1][4].parse::<f64>().unwrap() + 1.0 / 6.0).abs() < 1e-9);
}

#[test]
fn invalid_config_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravphase("drop", "g=-1\nbogus=3\nd=x\n", dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1") && err.contains("g >= 0"), "{err}");
    assert!(err.contains("line 2") && err.contains("line 3"), "{err}");
}

#[test]
fn io_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = Command::new(env!("CARGO_BIN_EXE_gravphase"))
        .args(["cow", "--config"])
        .arg(dir.path().join("absent.cfg"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    // the output "directory" is an existing file
    fs::write(dir.path().join("out"), "").unwrap();
    let out = gravphase("cow", "", dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn physics_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // a neutron dropped over a centimetre is far beyond any 4096-point grid
    let out = gravphase("drop", "preset=neutron\nd=0.01\nsigma=1e-3\nmethod=wavepacket\n", dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("drop: FAILED"));
}

#[test]
fn report_fails_on_injected_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravphase("report", "tol.action_coeff=1e-6\n", dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL 8 action-difference")), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 8);
}
