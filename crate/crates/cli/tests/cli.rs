use serde_json::Value;
use std::process::{Command, Output};

fn memdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memdiff")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<(f64, f64, String)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 3, "bad row {l:?}");
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].to_string())
        })
        .collect()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(memdiff(&["--help"]).status.code(), Some(0));
    assert_eq!(memdiff(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(memdiff(&["scalar-curve", "-a", "1"]).status.code(), Some(64));
    assert_eq!(memdiff(&["scalar-curve", "-a", "1", "-b", "1", "-m", "2", "-r", "-1"]).status.code(), Some(64));
    assert_eq!(
        memdiff(&["scalar-curve", "-a", "1", "-b", "1", "-m", "0.5", "-r", "-1", "--points", "1"]).status.code(),
        Some(64)
    );
}

#[test]
fn eval_ml_values() {
    let o = memdiff(&["eval-ml", "--mu", "1", "--k", "0", "--z", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let v: f64 = out.split_whitespace().next().unwrap().parse().unwrap();
    assert!((v - 1f64.cosh()).abs() < 1e-12);

    let o = memdiff(&["eval-ml", "--mu", "0.5", "--k", "0", "--z", "0"]);
    assert!(stdout(&o).starts_with("1 "));

    let o = memdiff(&["eval-ml", "--mu", "0.5", "--k", "2", "--z", "1.5"]);
    let v: f64 = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert!((v - 1.019_441_336_305_306_8).abs() < 1e-12);

    let o = memdiff(&["eval-ml", "--mu", "1", "--k", "0", "--z", "-4"]);
    let v: f64 = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert!((v - 2f64.cos()).abs() < 1e-12);

    assert_eq!(memdiff(&["eval-ml", "--mu", "0.5", "--k", "0", "--z", "500"]).status.code(), Some(2));
}

#[test]
fn scalar_curve_csv_layout() {
    let o = memdiff(&["scalar-curve", "-a", "1", "-b", "1", "-m", "0.5", "-r", "-1", "--points", "11"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(!csv.contains('\r'));
    assert!(csv.starts_with("t,value,method\n0,1,series\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 11);
    assert_eq!(r[10].0, 5.0);
    assert!(r.iter().all(|x| x.2 == "series"));
}

#[test]
fn double_root_matches_closed_form() {
    let o = memdiff(&["scalar-curve", "-a", "1", "-b", "3", "-m", "1", "-r", "-1", "--tmax", "1", "--points", "2"]);
    let r = rows(&stdout(&o));
    assert!((r[1].1 - 2.0 * (-2f64).exp()).abs() < 1e-12);
}

#[test]
fn routes_agree_through_the_cli() {
    let base = ["scalar-curve", "-a", "1", "-b", "1", "-m", "0.5", "-r", "-2"];
    let get = |m: &str| {
        let mut args = base.to_vec();
        args.extend(["--method", m]);
        rows(&stdout(&memdiff(&args)))
    };
    let (s, v, l) = (get("series"), get("volterra"), get("laplace"));
    let scale = s.iter().map(|x| x.1.abs()).fold(0.0, f64::max);
    for ((a, b), c) in s.iter().zip(&v).zip(&l) {
        assert_eq!(a.0, b.0);
        assert!((a.1 - b.1).abs() <= 1e-4 * scale);
        assert!((a.1 - c.1).abs() <= 1e-4 * scale);
    }
    assert_eq!(v[0].2, "volterra");
    assert_eq!(l[0].2, "laplace");
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["scalar-curve", "-a", "1", "-b", "0.5", "-m", "0.3", "-r", "-1", "--method", "laplace"];
    let one = Command::new(env!("CARGO_BIN_EXE_memdiff")).args(args).env("MEMDIFF_THREADS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_memdiff")).args(args).env("MEMDIFF_THREADS", "0").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_memdiff")).args(args).env("MEMDIFF_THREADS", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(64));
}

#[test]
fn json_curve_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.json");
    let o = memdiff(&[
        "scalar-curve", "-a", "1", "-b", "1", "-m", "0.5", "-r", "-1", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["method"], "series");
    assert_eq!(v["t"].as_array().unwrap().len(), 32);
    assert_eq!(v["value"][0], 1.0);
}

#[test]
fn regime_and_numerical_exit_codes() {
    let unsupported = ["scalar-curve", "-a", "-1", "-b", "1", "-m", "0.5", "-r", "-1", "--tmax", "1"];
    assert_eq!(memdiff(&unsupported).status.code(), Some(3));
    let mut forced = unsupported.to_vec();
    forced.push("--force");
    assert_eq!(memdiff(&forced).status.code(), Some(0));
    // far outside the series accuracy domain
    let far = ["scalar-curve", "-a", "1", "-b", "0", "-m", "0.5", "-r", "-2", "--tmax", "40"];
    let o = memdiff(&far);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn classify_examples() {
    let o = memdiff(&["classify", "-a", "1", "-b", "0.5", "-m", "0.5", "-w", "-1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("regime: PositiveAlpha"));
    assert!(text.contains("rate: -0.5\n"));

    let o = memdiff(&["classify", "-a", "-0.2", "-b", "1", "-m", "0.5", "-w", "-1", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["regime"]["class"], "NegativeAlphaAdmissible");
    assert!((v["bound"]["rate"].as_f64().unwrap() + 0.658_004_810_664_660_5).abs() < 1e-12);
    assert_eq!(v["bound"]["uniformly_stable"], true);

    let o = memdiff(&["classify", "-a", "-1", "-b", "1", "-m", "0.5", "-w", "-1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("regime: Unsupported"));
}

#[test]
fn verify_report() {
    let o = memdiff(&["verify", "-a", "1", "-b", "0", "-m", "0.5", "-r", "-1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    for key in ["series_volterra", "series_laplace", "volterra_laplace"] {
        assert!(v["deviations"][key].as_f64().unwrap() <= 1e-4);
    }
    for key in ["g_bound", "arg_h", "re_power", "arg_h_tilde"] {
        assert_eq!(v["lemma_violations"][key], 0);
    }
    for key in ["fitted_rate", "theoretical_rate", "c_min", "passes"] {
        assert!(!v[key].is_null(), "{key}");
    }
    assert_eq!(v["passes"]["all"], true);

    let again = memdiff(&["verify", "-a", "1", "-b", "0", "-m", "0.5", "-r", "-1"]);
    assert_eq!(o.stdout, again.stdout);

    assert_eq!(memdiff(&["verify", "-a", "-1", "-b", "1", "-m", "0.5", "-r", "-1"]).status.code(), Some(3));
}

#[test]
fn verify_reports_the_shifted_argument_failure() {
    // the arg h~ inequality fails near the imaginary axis when beta > 0
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = memdiff(&["verify", "-a", "-0.2", "-b", "1", "-m", "0.5", "-r", "-1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["lemma_violations"]["arg_h_tilde"].as_u64().unwrap() > 0);
    assert_eq!(v["passes"]["three_way"], true);
    assert_eq!(v["passes"]["bound"], true);
    assert_eq!(v["passes"]["lemmas"], false);
}

#[test]
fn norm_curve_starts_at_one() {
    let o = memdiff(&["norm-curve", "-a", "1", "-b", "0.5", "-m", "0.5", "--modes", "8", "--tmax", "10", "--points", "21"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    assert_eq!((r[0].0, r[0].1), (0.0, 1.0));
    // decay bound with beta = 0.5 <= lambda_1 = 1
    assert!(r.iter().all(|(t, v, _)| *v <= (-0.5 * t).exp() + 1e-9));
}

#[test]
fn complex_pair_matches_golden_file() {
    let golden = rows(include_str!("golden/complex_pair_mu1.csv"));
    let o = memdiff(&["scalar-curve", "-a", "1", "-b", "1", "-m", "1", "-r", "-2", "--points", "11"]);
    let got = rows(&stdout(&o));
    assert_eq!(got.len(), golden.len());
    for (g, w) in got.iter().zip(&golden) {
        assert_eq!((g.0, &g.2), (w.0, &w.2));
        assert!((g.1 - w.1).abs() < 1e-12, "t = {}: {} vs {}", g.0, g.1, w.1);
    }
}
