use std::path::PathBuf;
use std::process::{Command, Output};

fn cpsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpsel")).args(args).env_remove("CPSEL_WORKERS").output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cpsel-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(cpsel(&["--help"]).status.code(), Some(0));
    assert_eq!(cpsel(&["--version"]).status.code(), Some(0));
    assert_eq!(cpsel(&["--frobnicate"]).status.code(), Some(3));
    assert_eq!(cpsel(&["run", "--methods", "nope"]).status.code(), Some(3));
    assert_eq!(cpsel(&["run", "--sizes", "0"]).status.code(), Some(3));
    assert_eq!(cpsel(&["run", "--dists", "cauchy"]).status.code(), Some(3));
    assert_eq!(cpsel(&["run", "--reps", "0"]).status.code(), Some(3));
    assert_eq!(cpsel(&["run", "--precision", "f16"]).status.code(), Some(3));
    assert_eq!(cpsel(&["run", "--workers", "0", "--sizes", "16"]).status.code(), Some(3));
    assert_eq!(cpsel(&["select", "/nonexistent/file.bin"]).status.code(), Some(1));
}

#[test]
fn verify_only_run_writes_csv_without_timings() {
    let dir = scratch("verify");
    let csv = dir.join("out.csv");
    let o = cpsel(&[
        "run", "--verify-only", "--sizes", "16,300", "--dists", "mix5,beta", "--instances", "3", "--precision", "f32",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,distribution,n,precision,mean_ms,min_ms,max_ms,median_ms,iterations_mean,reductions_mean,z_fraction_mean"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 2 * 8);
    assert!(rows.iter().all(|r| r.contains(",f32,,,,,")));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bare_flags_mean_run() {
    let args = ["--verify-only", "--sizes", "100", "--dists", "uniform", "--methods", "cp,sort", "--instances", "1"];
    let bare = cpsel(&args);
    assert_eq!(bare.status.code(), Some(0), "{}", String::from_utf8_lossy(&bare.stderr));
    let explicit = cpsel(&[&["run"], &args[..]].concat());
    assert_eq!(bare.stdout, explicit.stdout);
    assert_eq!(stdout(&bare).lines().count(), 3);
}

#[test]
fn plot_directory_gets_one_series_per_method() {
    let dir = scratch("plot");
    let o = cpsel(&[
        "run", "--methods", "cp,hybrid,sort", "--sizes", "64,2^10", "--dists", "uniform", "--reps", "1",
        "--instances", "1", "--plot-dir", dir.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    for m in ["cp", "hybrid", "sort"] {
        let text = std::fs::read_to_string(dir.join(format!("{m}_f64.dat"))).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 2);
        assert!(data[1].starts_with("1024 "));
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn generated_files_select_like_the_oracle() {
    let dir = scratch("gen");
    let file = dir.join("d.bin");
    let file = file.to_str().unwrap();
    for precision in ["f32", "f64"] {
        let o = cpsel(&["gen", "--dist", "mix1", "--n", "5001", "--seed", "9", "--precision", precision, "--outliers", "2:1e20", "--out", file]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let bytes = std::fs::read(file).unwrap();
        assert_eq!(&bytes[..4], b"CPSL");
        let width = if precision == "f32" { 4 } else { 8 };
        assert_eq!(bytes.len(), 16 + 5001 * width);
        for rank_args in [vec![], vec!["--rank", "1"], vec!["--largest", "1"], vec!["--rank", "2600"]] {
            let oracle = stdout(&cpsel(&[&["select", file, "--method", "sort"], &rank_args[..]].concat()));
            for method in ["cp", "hybrid", "quickselect", "brent-root"] {
                let got = cpsel(&[&["select", file, "--method", method, "--maxit", "200"], &rank_args[..]].concat());
                assert!(got.status.success());
                assert_eq!(stdout(&got), oracle, "{method} {rank_args:?} {precision}");
            }
        }
        assert_eq!(stdout(&cpsel(&["select", file, "--largest", "1"])).trim(), "100000000000000000000");
    }
    assert_eq!(cpsel(&["select", file, "--rank", "0"]).status.code(), Some(3));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn robust_fit_from_csv() {
    let dir = scratch("fit");
    let path = dir.join("line.csv");
    let mut text = String::from("x,y\n");
    for i in 0..40 {
        let x = i as f64 * 0.25;
        let y = if i % 4 == 0 { 400.0 } else { 3.0 * x - 2.0 };
        text += &format!("{x},{y}\n");
    }
    std::fs::write(&path, text).unwrap();
    let p = path.to_str().unwrap();
    for est in ["lms", "lts"] {
        let o = cpsel(&["fit", p, "--estimator", est, "--subsets", "200"]);
        assert!(o.status.success());
        let out = stdout(&o);
        let theta: Vec<f64> =
            out.lines().next().unwrap().split_whitespace().skip(1).map(|t| t.parse().unwrap()).collect();
        assert!((theta[0] - 3.0).abs() < 1e-9 && (theta[1] + 2.0).abs() < 1e-9, "{est}: {out}");
    }
    let ols = stdout(&cpsel(&["fit", p, "--estimator", "ols"]));
    assert!(ols.starts_with("theta "));
    assert_eq!(cpsel(&["fit", p, "--estimator", "l1"]).status.code(), Some(3));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sweep_reports_each_method_and_magnitude() {
    let o = cpsel(&["sweep", "--n", "2^12", "--magnitudes", "1e3,1e9", "--methods", "cp,bisection", "--reps", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "method,magnitude,iterations,reductions,ms,correct");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn worker_count_from_the_environment() {
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_cpsel"))
            .args(["run", "--verify-only", "--sizes", "500", "--dists", "normal", "--instances", "2"])
            .env("CPSEL_WORKERS", workers)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("3"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run("0").status.code(), Some(3));
}
