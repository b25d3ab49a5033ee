use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_strip-spectrum"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn spectrum_rows_lie_in_brackets() {
    let o = run(&["spectrum", "--d", "3.14159265358979", "--l", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d,l,m,parity,lambda,k,bracket_lo,bracket_hi,residual,n_modes"
    );
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert!(!rows.is_empty());
    for r in rows {
        let lam: f64 = r[4].parse().unwrap();
        let lo: f64 = r[6].parse().unwrap();
        let hi: f64 = r[7].parse().unwrap();
        assert!(lo < lam && lam < hi);
    }
}

#[test]
fn floats_round_trip() {
    let o = run(&["spectrum", "--d", "pi", "--l", "2"]);
    let text = stdout(&o);
    let field = text.lines().nth(1).unwrap().split(',').nth(4).unwrap().to_string();
    let v: f64 = field.parse().unwrap();
    assert_eq!(format!("{v:.16e}"), field);
    let o = run(&["spectrum", "--d", "pi", "--l", "2", "--format", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json[0]["lambda"].as_f64().unwrap(), v);
}

#[test]
fn config_errors_exit_one() {
    let o = run(&["spectrum", "--d", "pi", "--l", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("discrete spectrum is empty"));
    assert_eq!(run(&["spectrum", "--d", "4", "--l", "2"]).status.code(), Some(1));
    let o = run(&["spectrum", "--unknown-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&["spectrum", "--l", "2"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--d", "pi", "--l-grid", "2,1"]).status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let o = bin()
        .args(["spectrum", "--d", "pi", "--l", "2"])
        .env("STRIP_SPECTRUM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn critical_lengths() {
    let o = run(&["critical", "--d", "3.141592653589793", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let l: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(l.len(), 3);
    assert_eq!(l[0], 0.0);
    assert!(l[1] > 0.0 && l[2] > l[1]);
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join(format!("strip-spectrum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    let out = dir.join("out.csv");
    std::fs::write(
        &cfg,
        format!("d = \"pi/2\"\nl = 3.0\nn_modes = 30\noutput_path = {:?}\n", out.to_str().unwrap()),
    )
    .unwrap();
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--n-modes", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read(&out).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().ends_with(",40"));
    run(&["spectrum", "--config", cfg.to_str().unwrap(), "--n-modes", "40"]);
    assert_eq!(std::fs::read(&out).unwrap(), first);

    std::fs::write(&cfg, "d = 1.0\nunknown_key = 3\n").unwrap();
    assert_eq!(run(&["spectrum", "--config", cfg.to_str().unwrap(), "--l", "2"]).status.code(), Some(1));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_is_ordered_by_l_then_m() {
    let o = run(&["sweep", "--d", "pi/2", "--l-grid", "1:6:1", "--n-modes", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let keys: Vec<(f64, usize)> = stdout(&o)
        .lines()
        .skip(1)
        .map(|r| {
            let f: Vec<&str> = r.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert!(keys.windows(2).all(|w| w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1)));
}

#[test]
fn emerge_rows() {
    let o = run(&["emerge", "--d", "pi/2", "--n", "2", "--eps", "0.05,0.025", "--n-modes", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("d,n,l_n,eps,l,lambda_solver,lambda_predicted,mu_n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn oracle_extends_the_spectrum_schema() {
    let o = run(&["oracle", "--d", "pi", "--l", "2", "--oracle-h", "0.39269908169872414", "--n-modes", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("d,l,m,parity,lambda,k,bracket_lo,bracket_hi,residual,n_modes,"));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let lam: f64 = row[4].parse().unwrap();
    assert!((lam - 0.5593).abs() < 5e-3);
}

#[test]
fn verify_writes_reports() {
    let o = run(&["verify", "--d", "1.5707963267948966", "--suite", "default", "--n-modes", "40"]);
    assert!(matches!(o.status.code(), Some(0) | Some(2)));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let reports = json.as_array().unwrap();
    assert!(reports.len() >= 5);
    for r in reports {
        for key in ["check_name", "passed", "measured", "expected", "tolerance", "details"] {
            assert!(r.get(key).is_some());
        }
    }
}
