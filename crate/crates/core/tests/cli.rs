use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robust-priors"))
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

/// Data rows of a CSV (comments and header dropped), split on commas.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn synthetic(dir: &Path, n: usize) -> (PathBuf, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut text = String::from("x,y\n");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..n {
        let x: f64 = StandardNormal.sample(&mut rng);
        let e: f64 = StandardNormal.sample(&mut rng);
        text.push_str(&format!("{x},{e}\n"));
        xs.push(x);
        ys.push(e);
    }
    let path = dir.join("data.csv");
    fs::write(&path, text).unwrap();
    // least-squares slope on the standardized scale
    let m = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (m(&xs), m(&ys));
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (path, sxy / sxx * (sxx / syy).sqrt())
}

fn summary_row(path: &Path, name: &str) -> (f64, f64) {
    let r = rows(path).into_iter().find(|r| r[0] == name).unwrap();
    (num(&r[1]), num(&r[4]))
}

#[test]
fn fit_flat_prior_centers_at_least_squares() {
    let dir = tempfile::tempdir().unwrap();
    let (data, ols) = synthetic(dir.path(), 100);
    let out = dir.path().join("fit.csv");
    let (code, err) = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--samples",
        "5000",
        "--warmup",
        "500",
    ]);
    assert_eq!(code, 0, "{err}");
    let (mean, mcse) = summary_row(&out, "beta_2");
    assert!((mean - ols).abs() < 3.0 * mcse, "mean {mean} ols {ols} mcse {mcse}");
    assert!(dir.path().join("fit_chains.csv").is_file());
    let head = fs::read_to_string(&out).unwrap();
    assert!(head.starts_with("# robust-priors"));
    assert!(head.contains("priors=[flat;flat]"));
}

#[test]
fn fit_normal_prior_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let (data, ols) = synthetic(dir.path(), 100);
    let out = dir.path().join("fit.csv");
    let (code, err) = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--prior",
        "normal:mu=2,lambda=1",
        "--out",
        out.to_str().unwrap(),
        "--samples",
        "5000",
        "--warmup",
        "500",
    ]);
    assert_eq!(code, 0, "{err}");
    // with a centered unit-variance covariate the conditional mean does not depend on σ
    let expect = (ols + 2.0) / 2.0;
    let (mean, mcse) = summary_row(&out, "beta_2");
    assert!((mean - expect).abs() < 3.0 * mcse, "mean {mean} expected {expect} mcse {mcse}");
}

#[test]
fn fit_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (data, _) = synthetic(dir.path(), 60);
    let out = dir.path().join("fit.csv");
    let chains = dir.path().join("chains.csv");
    let go = || {
        let (code, err) = run(&[
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--prior",
            "lptn",
            "--out",
            out.to_str().unwrap(),
            "--chains-out",
            chains.to_str().unwrap(),
            "--samples",
            "300",
            "--warmup",
            "100",
            "--seed",
            "9",
        ]);
        assert_eq!(code, 0, "{err}");
        (fs::read(&out).unwrap(), fs::read(&chains).unwrap())
    };
    let first = go();
    assert_eq!(first, go());
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let cases = [
        ("constant.csv", "x,y\n1,0.5\n1,0.1\n1,0.3\n1,-0.2\n"),
        ("malformed.csv", "x,y\n1,0.5\n2,abc\n"),
        ("noy.csv", "x,z\n1,0.5\n2,0.1\n"),
        ("short.csv", "a,b,c,y\n1,2,3,4\n5,1,2,3\n"),
        ("collinear.csv", "a,b,y\n1,2,0.3\n2,4,0.1\n3,6,0.7\n4,8,0.2\n5,10,0.9\n"),
    ];
    for (name, text) in cases {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        let (code, err) = run(&["fit", "--data", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 3, "{name}: {err}");
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["fit", "--data", "/no/such/file.csv", "--out", o]).0, 2);
    assert_eq!(run(&["sweep", "--axis", "mu2", "--families", "cauchy", "--out", o]).0, 2);
    assert_eq!(run(&["sweep", "--axis", "mu2", "--grid", "1:0.1:0", "--out", o]).0, 2);
    assert_eq!(run(&["sweep", "--axis", "mu2", "--hyper", "lptn=1.5", "--out", o]).0, 2);
    assert_eq!(run(&["sweep", "--out", o]).0, 2);
    assert_eq!(run(&["check", "--grids", "nonsense", "--out", o]).0, 2);
    let (data, _) = synthetic(dir.path(), 30);
    let d = data.to_str().unwrap();
    assert_eq!(run(&["fit", "--data", d, "--prior", "normal", "--prior", "normal", "--prior", "normal", "--out", o]).0, 2);
    assert_eq!(run(&["fit", "--data", d, "--sigma-prior", "gamma", "--out", o]).0, 2);
}

#[test]
fn sweep_mu2_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mu.csv");
    let (code, err) = run(&["sweep", "--axis", "mu2", "--families", "jeffreys,normal", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("grid=[0,0.05,0.1,"));
    assert!(text.contains("sqrt(n)"));
    let r = rows(&out);
    assert_eq!(r.len(), 82);
    for row in &r {
        let (mu2, mean, sd) = (num(&row[0]), num(&row[4]), num(&row[5]));
        match row[2].as_str() {
            "normal" => assert!((mean - mu2 / 2.0).abs() < 1e-8, "{row:?}"),
            "jeffreys" => {
                assert!(mean.abs() < 1e-12);
                assert!((sd - (1.0f64 / 97.0).sqrt()).abs() < 1e-9);
            }
            other => panic!("{other}"),
        }
    }
}

#[test]
fn sweep_lambda2_ctn_correction_is_invisible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lam.csv");
    let (code, err) = run(&["sweep", "--axis", "lambda2", "--families", "ctn,ctn_corrected", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out);
    assert_eq!(r.len(), 102);
    for pair in r.chunks(2) {
        assert_eq!(pair[0][2], "ctn");
        assert_eq!(pair[1][2], "ctn_corrected");
        assert!((num(&pair[0][4]) - num(&pair[1][4])).abs() < 0.01, "{pair:?}");
    }
    assert_eq!(num(&r[0][1]), 0.02);
    assert_eq!(num(&r[101][1]), 2.0);
}

#[test]
fn sweep_hyper_grid_and_byte_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.csv");
    let go = || {
        let (code, err) = run(&[
            "sweep",
            "--axis",
            "mu2",
            "--families",
            "student,lptn",
            "--hyper",
            "student=1,4,10",
            "--hyper",
            "lptn=0.8,0.9,0.95,0.99",
            "--grid",
            "0:0.5:2",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        fs::read_to_string(&out).unwrap()
    };
    let a = go();
    assert_eq!(a, go());
    let data: Vec<&str> = a.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(data.len(), 5 * 7);
    assert!(data[0].starts_with("0,1,student,1,"));
}

#[test]
fn sweep_hmc_agrees_with_quadrature() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.csv");
    let h = dir.path().join("h.csv");
    let common = ["sweep", "--axis", "mu2", "--families", "lptn", "--grid", "1:1:1"];
    assert_eq!(run(&[&common[..], &["--out", q.to_str().unwrap()]].concat()).0, 0);
    let (code, err) = run(&[&common[..], &["--method", "hmc", "--samples", "5000", "--warmup", "500", "--out", h.to_str().unwrap()]].concat());
    assert_eq!(code, 0, "{err}");
    let (rq, rh) = (rows(&q), rows(&h));
    let (mq, sq) = (num(&rq[0][4]), num(&rq[0][5]));
    let mh = num(&rh[0][4]);
    // 20 000 draws; ESS is well above 2000 on this target
    assert!((mq - mh).abs() < 4.0 * sq / 2000f64.sqrt(), "{mq} vs {mh}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    let out = dir.path().join("s.csv");
    fs::write(
        &cfg,
        format!("axis = \"lambda2\"\nfamilies = \"normal\"\ngrid = \"1:1:2\"\nmu2 = 1.0\nout = \"{}\"\n", out.display()),
    )
    .unwrap();
    let (code, err) = run(&["sweep", "--config", cfg.to_str().unwrap(), "--mu2", "2"]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    assert_eq!(num(&r[0][0]), 2.0);
    // λ₂ = 2: mean 2·4/5
    assert!((num(&r[1][4]) - 1.6).abs() < 1e-8);
}

#[test]
fn check_default_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let (code, err) = run(&["check", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out);
    let get = |claim: &str| r.iter().find(|row| row[0] == claim).unwrap().clone();
    let student = get("student_location_trace");
    assert_eq!(student[2], "0.01");
    assert_eq!(student[3], "PASS");
    assert_eq!(get("lptn_scaling_trace")[3], "PASS");
    for claim in ["ctn_location_exact", "ctn_scaling_exact"] {
        let row = get(claim);
        assert_eq!((row[1].as_str(), row[3].as_str()), ("0", "PASS"));
    }
    let series = dir.path().join("report_series");
    assert!(series.join("lptn_trace_companion.csv").is_file());
    assert!(fs::read_to_string(series.join("student_ratio.csv")).unwrap().contains("omega,ratio,target,abs_err"));
}

#[test]
fn check_with_custom_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let (code, err) = run(&["check", "--grids", "pointwise=1e1:1e4;quadrature=1:1e2", "--out", out.to_str().unwrap()]);
    // at μ = 10⁴ the Student ratio is still within 1%, the LPTN one too
    assert_eq!(code, 0, "{err}");
    assert!(fs::read_to_string(&out).unwrap().contains("pointwise=[10,100,1000,10000]"));
}
