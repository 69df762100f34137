use std::process::{Command, Output};

fn hemtsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hemtsq")).args(args).env_remove("HEMTSQ_CONFIG").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_flag_prints_usage_and_exits_1() {
    let o = hemtsq(&["sweep", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn help_exits_0() {
    assert_eq!(hemtsq(&["--help"]).status.code(), Some(0));
}

#[test]
fn coeffs_lists_every_field_with_units() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("default.cfg");
    std::fs::write(&cfg, "# nothing overridden\n").unwrap();
    let o = hemtsq(&["coeffs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("g_m = 4.5e-2"));
    for (name, unit) in [("C_N", "F"), ("g_m2N", "A/V^2"), ("omega2", "rad/s"), ("g18", "rad/s"), ("Vi2", "V")] {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("{name} = ")) && l.ends_with(&format!(" {unit}"))),
            "{name}"
        );
    }
    let fields = text.lines().skip_while(|l| *l != "# derived coefficients").skip(1).count();
    assert_eq!(fields, 37);
}

#[test]
fn coeffs_echo_reloads_to_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("a.cfg");
    std::fs::write(&cfg, "g_m = 0.06\nC_f = 1e-14\n").unwrap();
    let first = stdout(&hemtsq(&["coeffs", "--config", cfg.to_str().unwrap()]));
    let echoed: String =
        first.lines().take_while(|l| *l != "# derived coefficients").map(|l| format!("{l}\n")).collect();
    let cfg2 = dir.path().join("b.cfg");
    std::fs::write(&cfg2, echoed).unwrap();
    let second = stdout(&hemtsq(&["coeffs", "--config", cfg2.to_str().unwrap()]));
    assert_eq!(first, second);
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "C_gs = -1e-15\n").unwrap();
    let o = hemtsq(&["coeffs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("C_gs"));

    std::fs::write(&cfg, "g_m = 0.05\nbogus = 1\n").unwrap();
    let o = hemtsq(&["coeffs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = hemtsq(&["sweep", "--param", "g_m", "--start", "0.1", "--stop", "0.01", "--points", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = hemtsq(&["sweep", "--param", "L9", "--start", "0.01", "--stop", "0.1", "--points", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = hemtsq(&["coeffs", "--config", "/no/such/file.cfg"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, "cutoff2 = 20\n").unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hemtsq(&[
            "sweep",
            "--param",
            "g_m",
            "--start",
            "0.03",
            "--stop",
            "0.06",
            "--points",
            "3",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--path",
            "both",
            "--panels",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "param,var_x2,var_y2,g2_paper,g2_standard,n_mean,zeta1_mag,zeta2_mag,epr,converged");
    assert!(lines[1].starts_with("3.000000000000e-2,"));
    assert!(dir.path().join("a_var_y2.csv").exists());
}

#[test]
fn sweep_to_stdout() {
    let o = hemtsq(&[
        "sweep", "--param", "kappa", "--start", "0.001", "--stop", "0.002", "--points", "2", "--path", "squeeze",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn step_response_reports_unsettled_roots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let o = hemtsq(&["step-response", "--out", out.to_str().unwrap()]);
    // The default denominator carries an undamped pair, reported as a numeric failure.
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("offending roots"));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("t,v_out\n"));
    assert_eq!(csv.lines().count(), 20_002);
}

#[test]
fn step_response_without_gain_settles_immediately() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("off.cfg");
    std::fs::write(&cfg, "g_m = 0\n").unwrap();
    let out = dir.path().join("b.csv");
    let o = hemtsq(&[
        "step-response",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--duration",
        "1e-9",
        "--dt",
        "1e-11",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("settling time (2% band) = 0.000000e0 s"));
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 102);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0.000000000000e0")));
}

#[test]
fn check_passes() {
    let o = hemtsq(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("env.cfg");
    std::fs::write(&cfg, "g_m = 0.07\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hemtsq")).arg("coeffs").env("HEMTSQ_CONFIG", &cfg).output().unwrap();
    assert!(stdout(&o).contains("g_m = 7e-2"));
}
