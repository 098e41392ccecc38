use std::fs;
use std::path::Path;
use std::process::Command;

use qutrit_sta::cli::main_with_args;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["qutrit-sta"];
    argv.extend_from_slice(args);
    let code = main_with_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn out_flag(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn simulate_reports_summary_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(&["simulate", "--tau1-T", "0.115", "--phi-pi", "0.25", "--out", &out_flag(dir.path())]);
    assert_eq!(code, 0, "{err}");
    let line = out.lines().find(|l| l.starts_with("P_e(t_f)=")).expect("summary line");
    let pe: f64 = line["P_e(t_f)=".len()..].parse().unwrap();
    assert!((pe - 0.9997).abs() <= 5e-4);

    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_over_T,P_g,P_a,P_e,P_d,epsilon"));
    assert_eq!(csv.lines().count(), 4002);
    assert!(!csv.contains('\r'));
    // the summary is the last row's P_e, verbatim
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(line, format!("P_e(t_f)={}", last[3]));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# resonant\nschedule.gamma0_pi = 0.3\nintegrator.grid_size = 801\n").unwrap();
    let (code, _, err) = run(&["design", "--config", cfg.to_str().unwrap(), "--grid-size", "601", "--out", &out_flag(dir.path())]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(dir.path().join("waveforms.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t_over_T,omega_p,omega_s,delta1,delta2"));
    assert_eq!(csv.lines().count(), 602);
    for row in csv.lines().skip(1) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert_eq!((cols[3], cols[4]), ("0.00000000000e0", "0.00000000000e0"));
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "seed = 3\nschedule.tau1_T = 0.5\n").unwrap();
    let (code, _, err) = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", &out_flag(dir.path())]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2") && err.contains("tau1_T"), "{err}");
    assert!(!dir.path().join("trajectory.csv").exists());

    fs::write(&cfg, "schedule.bogus = 1\n").unwrap();
    let (code, _, err) = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown key"), "{err}");

    let (code, _, _) = run(&["simulate", "--phi-pi", "0.9"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["simulate", "--config", "/nonexistent/run.conf"]);
    assert_eq!(code, 1);
}

#[test]
fn sweeps_are_byte_identical_across_worker_counts() {
    let small = ["--lambda-count", "7", "--eta-count", "4", "--draws", "5", "--steps", "2000"];
    let mut outputs = Vec::new();
    for threads in ["1", "3", "0"] {
        let dir = tempfile::tempdir().unwrap();
        for cmd in ["sweep-systematic", "sweep-amplitude", "verify"] {
            let mut args = vec![cmd, "--threads", threads, "--out"];
            let out = out_flag(dir.path());
            args.push(&out);
            args.extend_from_slice(&small);
            let (code, _, err) = run(&args);
            assert_eq!(code, 0, "{cmd}: {err}");
        }
        let files: Vec<Vec<u8>> =
            ["fig6.csv", "fig7.csv", "fig2.csv"].iter().map(|f| fs::read(dir.path().join(f)).unwrap()).collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let fig6 = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert_eq!(fig6.lines().next(), Some("lambda,P_e_final"));
    let fig7 = String::from_utf8(outputs[0][1].clone()).unwrap();
    assert_eq!(fig7.lines().next(), Some("eta_sqrtT,P_e_final"));
}

#[test]
fn verify_seed_changes_draws() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        let (code, out, err) = run(&["verify", "--draws", "4", "--seed", seed, "--out", &out_flag(dir.path())]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("draws=4"));
    }
    let fa = fs::read_to_string(a.path().join("fig2.csv")).unwrap();
    let fb = fs::read_to_string(b.path().join("fig2.csv")).unwrap();
    assert_ne!(fa, fb);
    for row in fa.lines().skip(1) {
        let eps: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(eps <= -2.5, "{row}");
    }
}

#[test]
fn metrics_and_reference_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let (code, _, err) = run(&["metrics", "--out", &out, "--set", "metrics.gamma0_count=5"]);
    assert_eq!(code, 0, "{err}");
    let fig5 = fs::read_to_string(dir.path().join("fig5.csv")).unwrap();
    assert_eq!(fig5.lines().next(), Some("gamma0_pi,T_omega0_max,area_over_pi"));
    assert_eq!(fig5.lines().count(), 6);

    let (code, stdout, err) = run(&["adiabatic-ref", "--gamma0-pi", "0.01", "--out", &out]);
    assert_eq!(code, 0, "{err}");
    let t_over_pi: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("T_omega0_max_over_pi="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((63.0..=67.0).contains(&t_over_pi));
}

#[test]
fn binary_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_qutrit-sta"))
        .args(["design", "--grid-size", "512", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(String::from_utf8_lossy(&status.stdout).contains("T_physical_ns="));
    let bad = Command::new(env!("CARGO_BIN_EXE_qutrit-sta")).args(["design", "--gamma0-pi", "0.7"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
