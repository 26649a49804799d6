use std::process::{Command, Output};

fn crossing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossing")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, prefix: &str) -> String {
    text.lines()
        .map(str::trim)
        .find(|l| l.starts_with(prefix))
        .unwrap_or_else(|| panic!("no line starting with {prefix:?} in\n{text}"))
        .to_string()
}

// "+1.0e0 -2.0e-1i" -> (1.0, -0.2)
fn complex_after_eq(line: &str) -> (f64, f64) {
    let rhs = line.split('=').nth(1).unwrap().trim();
    let mut parts = rhs.split_whitespace();
    let re: f64 = parts.next().unwrap().parse().unwrap();
    let im: f64 = parts.next().unwrap().trim_end_matches('i').parse().unwrap();
    (re, im)
}

#[test]
fn verify_all_presets_passes() {
    let o = crossing(&["verify", "--preset", "all"]);
    let out = stdout(&o);
    assert!(o.status.success(), "{out}\n{}", stderr(&o));
    assert!(out.contains(" 0 failed"), "{out}");
}

#[test]
fn solve_tangent_m2_matches_prediction() {
    let o = crossing(&["solve", "--preset", "tangent-m2", "--h", "1e-3", "--eps", "5e-4"]);
    let out = stdout(&o);
    assert!(o.status.success(), "{}", stderr(&o));
    let (re, im) = complex_after_eq(&field(&out, "t12 ="));
    assert!(re.abs() < 1e-10 && (im + 0.112).abs() < 2e-3, "t12 = {re} {im}i");
    for line in out.lines().filter(|l| l.contains("t12 relative deviation")) {
        let dev: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
        assert!(dev <= 0.01, "{line}");
    }
    assert!(out.contains("S [Hermite1]"));
}

#[test]
fn predict_tangent_m3_prints_leading_constant() {
    let o = crossing(&["predict", "--preset", "tangent-m3", "--h", "1e-4"]);
    let out = stdout(&o);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = field(&out, "omega_3 leading term");
    let (re, im) = complex_after_eq(&line);
    let (r, a) = (2.56369335_f64, std::f64::consts::PI / 8.0);
    assert!((re - r * a.cos()).abs() < 1e-6 && (im - r * a.sin()).abs() < 1e-6, "{line}");
}

#[test]
fn help_lists_every_flag() {
    let o = crossing(&["solve", "--help"]);
    let out = stdout(&o);
    for flag in [
        "--preset", "--config", "--h", "--eps", "--eps1", "--eps2", "--out", "--path", "--fidelity", "--tol",
        "--threads", "--show-config",
    ] {
        assert!(out.contains(flag), "missing {flag}:\n{out}");
    }
    let o = crossing(&["dsp", "--help"]);
    let out = stdout(&o);
    for flag in ["--phase", "--amplitude", "--terms", "--h", "--tol"] {
        assert!(out.contains(flag), "missing {flag}:\n{out}");
    }
}

#[test]
fn version_carries_build_metadata() {
    let o = crossing(&["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("crossing "));
}

#[test]
fn invalid_h_is_a_json_error() {
    let o = crossing(&["solve", "--h", "-1"]);
    assert!(!o.status.success());
    let err: serde_json::Value = serde_json::from_str(stderr(&o).trim()).expect("json on stderr");
    assert_eq!(err["error"], "validation");
    assert!(err["message"].as_str().unwrap().contains("`h`"));
}

#[test]
fn unknown_preset_lists_choices() {
    let o = crossing(&["solve", "--preset", "nope"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("tangent-m2"));
}

#[test]
fn config_file_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{ "preset": "lz-linear", "h": 0.01, "tol": 1e-9 }"#).unwrap();
    let p = path.to_str().unwrap();
    let o = crossing(&["solve", "--config", p, "--h", "0.02", "--show-config"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["preset"], "lz-linear");
    assert_eq!(v["h"], 0.02);
    assert_eq!(v["tol"], 1e-9);
    assert!(v["eps1"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_typo_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"preset\": \"tangent-m2\",\n  \"epsilonn\": 0.1\n}").unwrap();
    let o = crossing(&["solve", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("did you mean `eps`"), "{}", stderr(&o));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let o = crossing(&["sweep", "--preset", "lz-linear", "--h", "0.02", "--path", "ode", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("h,eps1,eps2,m,n1,n2,mu_m,regime,path,"));
    assert_eq!(lines.count(), 1);
}

#[test]
fn dsp_cubic_phase_agrees_with_quadrature() {
    let o = crossing(&["dsp", "--phase", "0,0,0,1", "--terms", "3", "--h", "1e-3"]);
    let out = stdout(&o);
    assert!(o.status.success(), "{}", stderr(&o));
    let diff: f64 = field(&out, "difference =").split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(diff < 1e-7, "{out}");
}

#[test]
fn threads_flag_is_accepted() {
    let o = crossing(&["solve", "--preset", "lz-linear", "--h", "0.02", "--path", "ode", "--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = crossing(&["solve", "--threads", "0"]);
    assert!(!o.status.success());
}
