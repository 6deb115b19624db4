use std::process::{Command, Output};

fn levelsearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levelsearch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn exact_query_as_json() {
    let out = levelsearch(&["exact", "--n", "3", "--level", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["totalD"], "12");
    assert_eq!(v["totalB"], "13");
    assert_eq!(v["totalDTrunc"], "12");
    assert_eq!(v["levelCount"], "5");
    assert_eq!(v["expectedBfs"], "13/5");

    let v: serde_json::Value =
        serde_json::from_slice(&levelsearch(&["exact", "--n", "0", "--level", "0"]).stdout).unwrap();
    assert_eq!(
        (v["totalD"].as_str(), v["totalB"].as_str(), v["levelCount"].as_str()),
        (Some("0"), Some("0"), Some("1"))
    );
}

#[test]
fn large_values_stay_exact() {
    let out = levelsearch(&["exact", "--n", "400", "--level", "20"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let digits = v["totalB"].as_str().unwrap();
    assert!(digits.len() > 200 && digits.bytes().all(|b| b.is_ascii_digit()));
}

#[test]
fn lambda_to_tolerance() {
    let out = levelsearch(&["threshold", "--lambda", "--tol", "1e-9"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("0.789004"));
}

#[test]
fn threshold_reports() {
    let out = levelsearch(&["threshold", "--n", "4", "--n", "100"]);
    assert!(out.status.success());
    let lines: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["lstar"], 1);
    assert_eq!(lines[1]["lstar"], 7);
    assert_eq!(lines[1]["unique"], true);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(levelsearch(&["threshold"]).status.code(), Some(2));
    assert_eq!(levelsearch(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        levelsearch(&["gw-sim", "--law", "strict-2-ary", "--n", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        levelsearch(&["gw-sim", "--law", "uniform", "--n", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(levelsearch(&["oracle-check", "--max-n", "40"]).status.code(), Some(2));
    assert_eq!(
        levelsearch(&["plot-data", "--n", "10", "--s-grid", "1:0:0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        levelsearch(&["--threads", "0", "exact", "--n", "1", "--level", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn failed_checks_exit_one() {
    // the printed table row for l = 3 does not match the computed differences
    let out = levelsearch(&["conjecture", "--l", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["settled"], false);

    let out = levelsearch(&["conjecture", "--l", "2", "--n-to", "30"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reading"], "rising");
}

#[test]
fn oracle_matrix() {
    let out = levelsearch(&["oracle-check", "--max-n", "6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n,level,total_d,total_b,total_b_alt,total_d_trunc,level_count,moment_1,moment_2\n"));
    assert!(text.ends_with("# 28 cells, 0 failed\n"));
    let dump = stdout(&levelsearch(&["oracle-check", "--max-n", "3", "--dump"]));
    assert!(dump.contains("\n3,2,12,13,12,5\n"));
}

#[test]
fn series_matrix() {
    let out = levelsearch(&["series-check", "--max-level", "4", "--order", "16", "--max-index", "16"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("# second derivative sign: -"));
    let dump = stdout(&levelsearch(&[
        "series-check",
        "--max-level",
        "2",
        "--order",
        "4",
        "--dump",
    ]));
    assert!(dump.starts_with("series,level,k,numerator,denominator\n"));
    assert!(dump.contains("\nB,2,3,13,1\n"));
}

#[test]
fn simulation_csv() {
    let args = [
        "gw-sim",
        "--law",
        "geometric-half",
        "--n",
        "30",
        "--level",
        "4",
        "--samples",
        "3000",
        "--seed",
        "5",
    ];
    let out = levelsearch(&args);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("statistic,law,n,level,samples,seed,mean,stderr,target")
    );
    assert!(lines.next().unwrap().starts_with("S,geometric-half,30,4,3000,5,"));
    assert_eq!(levelsearch(&args).stdout, out.stdout);

    let sweep = stdout(&levelsearch(&[
        "gw-sim",
        "--sweep",
        "--law",
        "poisson-one",
        "--n-list",
        "20",
        "--s-grid",
        "0:0.5:0.5",
        "--samples",
        "200",
    ]));
    assert!(sweep.starts_with(
        "law,n,level,s,samples,mean_s,stderr,scaled_mean,exact_if_available,theory_sigmaKs,theory_sigmaKs_half,theory_Ks\n"
    ));
    assert_eq!(sweep.lines().count(), 3);

    let shapes = levelsearch(&["gw-sim", "--n", "4", "--stat", "shapes", "--samples", "20000"]);
    assert!(shapes.status.success());
    assert!(stdout(&shapes).lines().nth(1).unwrap().starts_with("4,20000,14,14,"));
}

#[test]
fn plot_rows() {
    let out = levelsearch(&["plot-data", "--n", "100", "--s-grid", "0:1:0.5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(
        text.lines().next(),
        Some("s,total_b_scaled_exact,totalb_asymptotic,k_const")
    );
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("0.0,0.0,"));
}

#[test]
fn thread_count_from_environment() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_levelsearch"))
            .env("LEVELSEARCH_THREADS", threads)
            .args([
                "gw-sim",
                "--law",
                "binomial-2",
                "--n",
                "40",
                "--level",
                "3",
                "--samples",
                "5000",
            ])
            .output()
            .unwrap()
    };
    let one = run("1");
    assert!(one.status.success());
    assert_eq!(one.stdout, run("3").stdout);
}

#[test]
fn asymptotics_summary() {
    let out = levelsearch(&["asymptotics", "--n", "2500"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["max_error"].as_f64().unwrap() <= v["error_bound"].as_f64().unwrap());
    assert_eq!(v["tail"]["holds"], true);
}
