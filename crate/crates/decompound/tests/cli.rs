use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn decompound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decompound"))
        .args(args)
        .env_remove("DECOMPOUND_SEED")
        .output()
        .expect("run decompound")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn sidecar(p: &Path) -> PathBuf {
    let mut s = p.to_path_buf().into_os_string();
    s.push(".json");
    PathBuf::from(s)
}

#[test]
fn estimate_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("est.csv");
    let res = decompound(&[
        "estimate", "--lambda", "1", "--n", "5000", "--jump", "normal", "--h", "0.5", "--seed", "7",
        "--out", path_str(&out),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# decompound estimate\n# config: lambda=1\n"));
    assert!(text.contains("# config: h=0.5\n"));
    let rows = data_lines(&text);
    assert_eq!(rows[0], "x,f_hat,f_raw,truncation_hit");
    assert_eq!(rows.len(), 402);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(sidecar(&out)).unwrap()).unwrap();
    assert_eq!(json["distlog_status"], "ok");
    assert_eq!(json["n"], 5000);
    assert_eq!(json["config"]["seed"], "7");
    assert!(json["min_modulus"].as_f64().unwrap() > 0.0);
}

#[test]
fn validation_errors_exit_with_two() {
    let res = decompound(&["estimate", "--beta", "0.6"]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("β<1/2"), "{stderr}");
    assert_eq!(stderr.trim_end().lines().count(), 1);

    for args in [
        &["estimate", "--fft-size", "1000"][..],
        &["estimate", "--no-such-flag"],
        &["estimate", "--input", "/nonexistent/obs.csv"],
        &["estimate", "--jump", "cauchy"],
        &["estimate", "--lambda", "-1"],
        &["simulate", "--n", "0"],
        &["mc-normality", "--reps", "10"],
        &["bias-study", "--hs", "0.5,0.4"],
        &["estimate", "--config", "/nonexistent/run.conf"],
    ] {
        assert_eq!(decompound(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn vanished_psi_is_fatal_only_under_strict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("est.csv");
    let base = ["estimate", "--n", "200", "--modulus-floor", "10", "--out", path_str(&out)];

    let strict = decompound(&[&base[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(3));
    assert!(!out.exists());

    let lenient = decompound(&base);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("warning"));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# summary: distlog_status=vanished(0)"));
    for row in &data_lines(&text)[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[1].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn reproduce_figure_has_401_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig.csv");
    let res = decompound(&["reproduce-figure", "--seed", "1", "--out", path_str(&out)]);
    assert_eq!(res.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows[0], "x,f_hat,f_true");
    assert_eq!(rows.len(), 402);
    assert!(rows[1].starts_with("-4.0000000000000000e0,"));
    assert!(rows[401].starts_with("4.0000000000000000e0,"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let res = decompound(&["simulate", "--n", "300", "--jump", "laplace", "--seed", "11", "--out", path_str(&out)]);
        assert_eq!(res.status.code(), Some(0));
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn seed_defaults_to_environment() {
    let from_flag = decompound(&["simulate", "--n", "20", "--seed", "5"]).stdout;
    let from_env = Command::new(env!("CARGO_BIN_EXE_decompound"))
        .args(["simulate", "--n", "20"])
        .env("DECOMPOUND_SEED", "5")
        .output()
        .unwrap()
        .stdout;
    assert_eq!(from_flag, from_env);
    assert_ne!(from_flag, decompound(&["simulate", "--n", "20"]).stdout);
}

#[test]
fn output_header_round_trips_through_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let res = decompound(&[
        "estimate", "--n", "800", "--jump", "laplace", "--seed", "3", "--x-min", "-2", "--x-max", "2",
        "--out", path_str(&first),
    ]);
    assert_eq!(res.status.code(), Some(0));
    let res = decompound(&["estimate", "--config", path_str(&first), "--out", path_str(&second)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    let conf = dir.path().join("run.conf");
    fs::write(&conf, "n=800\nseed=3\nstrict=false\n").unwrap();
    let res = decompound(&["estimate", "--config", path_str(&conf), "--n", "600", "--x-step", "1"]);
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("# config: n=600\n"));
    assert!(text.contains("# config: seed=3\n"));
}

#[test]
fn estimate_reads_simulated_input() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs.csv");
    let log = dir.path().join("log.csv");
    let ecf = dir.path().join("ecf.csv");
    assert_eq!(decompound(&["simulate", "--n", "500", "--seed", "9", "--out", path_str(&obs)]).status.code(), Some(0));
    let from_file = decompound(&[
        "estimate", "--input", path_str(&obs), "--x-step", "0.5", "--dump-log", path_str(&log), "--dump-ecf",
        path_str(&ecf),
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    let simulated = decompound(&["estimate", "--n", "500", "--seed", "9", "--x-step", "0.5"]);
    assert_eq!(data_lines(&String::from_utf8_lossy(&from_file.stdout)), data_lines(&String::from_utf8_lossy(&simulated.stdout)));

    let log = fs::read_to_string(log).unwrap();
    assert!(log.contains("# kind=unwrapped_log\n"));
    assert_eq!(data_lines(&log)[0], "t,log_re,arg_unwrapped");
    let ecf = fs::read_to_string(ecf).unwrap();
    assert!(ecf.contains("# kind=ecf\n"));
    let first: Vec<&str> = data_lines(&ecf)[1].split(',').collect();
    assert_eq!(first, ["0.0000000000000000e0", "1.0000000000000000e0", "0.0000000000000000e0"]);
}

#[test]
fn fft_grid_output_has_fft_length() {
    let res = decompound(&["estimate", "--n", "500", "--fft-grid", "--fft-size", "1024", "--x-min", "-5"]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    assert_eq!(data_lines(&text).len(), 1025);
}

#[test]
fn experiment_output_does_not_depend_on_jobs() {
    let mc = |jobs: &str| {
        decompound(&["mc-normality", "--n", "300", "--h", "0.6", "--reps", "60", "--seed", "4", "--jobs", jobs]).stdout
    };
    let one = mc("1");
    assert!(String::from_utf8_lossy(&one).contains("replicate,seed,status,f_hat,stat"));
    assert_eq!(one, mc("4"));

    let van = |jobs: &str| {
        decompound(&["vanishing", "--ns", "20,80", "--reps", "100", "--h", "0.4", "--jobs", jobs]).stdout
    };
    let one = van("1");
    let text = String::from_utf8_lossy(&one);
    assert_eq!(data_lines(&text).len(), 3);
    assert_eq!(one, van("3"));
}

#[test]
fn bias_study_reports_each_bandwidth() {
    let res = decompound(&["bias-study", "--jump", "laplace"]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows[0], "h,f_raw,f_true,bias,rate,rate_ratio");
    assert_eq!(rows.len(), 6);
}

#[test]
fn help_exits_zero() {
    assert_eq!(decompound(&["--help"]).status.code(), Some(0));
    assert_eq!(decompound(&["estimate", "--help"]).status.code(), Some(0));
    assert_eq!(decompound(&[]).status.code(), Some(2));
}
