use std::fs;
use std::path::Path;
use std::process::Command;

use membrane::config::parse_config_str;
use membrane::output::{read_snapshot, write_trajectory};
use membrane::solver::{run, StopReason, SystemState};
use membrane::study::run_study;

const SHORT_CAP: &str = "scenario = \"spherical_cap\"\ngamma_l = 0.5\nn = 8\nt_end = 0.05\nsnapshot_every = 2\n";

fn run_into(text: &str, dir: &Path) -> Vec<std::path::PathBuf> {
    let cfg = parse_config_str(text).unwrap();
    let traj = run(SystemState::initial(cfg.initial_curve().unwrap()), &cfg.params, &cfg.disc, cfg.snapshot_every, |_, _, _| {}).unwrap();
    assert_eq!(traj.stop, StopReason::EndTime);
    write_trajectory(&traj, &cfg, dir).unwrap()
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = run_into(SHORT_CAP, a.path());
    let fb = run_into(SHORT_CAP, b.path());
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn snapshots_read_back_with_headers() {
    let d = tempfile::tempdir().unwrap();
    let files = run_into(SHORT_CAP, d.path());
    let cfg = parse_config_str(SHORT_CAP).unwrap();
    for f in files.iter().filter(|f| f.to_string_lossy().contains("snapshot_")) {
        let s = read_snapshot(f).unwrap();
        assert_eq!(s.rows.len(), 17);
        assert!(s.meta.iter().any(|m| *m == format!("config_sha256 {}", cfg.hash())));
        assert!(s.meta.iter().any(|m| m.starts_with("quadrature ")));
        let xr = s.column("xr").unwrap();
        assert_eq!(xr[0], 0.0);
    }
    let series = fs::read_to_string(d.path().join("series.dat")).unwrap();
    assert!(series.starts_with("# membrane "));
    assert!(series.contains("# stop end-time"));
    let saved = fs::read_to_string(d.path().join("config.toml")).unwrap();
    assert_eq!(parse_config_str(&saved).unwrap(), cfg);
}

#[test]
fn convergence_study_table() {
    let d = tempfile::tempdir().unwrap();
    let cfg = parse_config_str("scenario = \"annulus\"\nstudy = \"convergence\"\nsweep = [8.0, 16.0]\n").unwrap();
    let files = run_study(&cfg, d.path()).unwrap();
    let text = fs::read_to_string(&files[0]).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().filter(|l| !l.starts_with('#')).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "8");
    assert_eq!(rows[0][3], "nan");
    let order: f64 = rows[1][3].parse().unwrap();
    assert!(order > 2.5, "graded order {order}");
    let (g, u): (f64, f64) = (rows[1][1].parse().unwrap(), rows[1][2].parse().unwrap());
    assert!(u > g);
    assert!(rows.iter().all(|r| r[5] == "ok"));
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_membrane"))
}

#[test]
fn cli_run_and_info() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cap.toml");
    fs::write(&cfg, SHORT_CAP).unwrap();
    let out_dir = d.path().join("out");
    let st = bin()
        .args(["run", "--quiet", "--snapshot-every", "1", "--output-dir"])
        .arg(&out_dir)
        .arg("--config")
        .arg(&cfg)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(out_dir.join("snapshot_00005.dat").exists());
    let o = bin().arg("info").arg(out_dir.join("snapshot_00005.dat")).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("dofs 17"), "{text}");
}

#[test]
fn cli_reports_bad_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    fs::write(&cfg, "scenario = \"annulus\"\nn = 16\ndt = -0.5\n").unwrap();
    let o = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("dt"), "{err}");
    let o = bin().args(["info", "/nonexistent/snapshot.dat"]).output().unwrap();
    assert!(!o.status.success());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            membrane::config::parse_config(&p).unwrap_or_else(|err| panic!("{}: {err}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 6);
}
