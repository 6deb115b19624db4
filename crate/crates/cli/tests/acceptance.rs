//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use levelsearch_core::asymptotics::{
    crossover_difference, crossover_function, exp_tail_check, grid, lambda_n, max_asymptotic_error, solve_lambda,
};
use levelsearch_core::closed_forms::{conjecture_check, exact_row, Parity};
use levelsearch_core::gw::{mc_estimate_s, scaling_sweep, shape_uniformity, SweepRow};
use levelsearch_core::verify::{identity_check, oracle_check, series_check};
use levelsearch_core::{OffspringLaw, SimConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn formula_vs_oracle() -> Outcome {
    let rows = oracle_check(12).expect("n = 12 is within the exhaustive limit");
    let failed: Vec<_> = rows.iter().filter(|r| !r.passed()).map(|r| (r.n, r.level)).collect();
    outcome(failed.is_empty(), format!("{} cells, failing {:?}", rows.len(), failed))
}

fn generating_functions() -> Outcome {
    let rows = series_check(8, 30).expect("levels 1..=8 fit order 30");
    let failed: Vec<_> = rows.iter().filter(|r| !r.passed()).map(|r| r.level).collect();
    outcome(
        failed.is_empty(),
        format!("levels 1..=8 through z^30, failing levels {failed:?}"),
    )
}

fn identities() -> Outcome {
    let r = identity_check(50, 500, 40).expect("valid ranges");
    let lemma = r.lemmas.first_failure().map(|c| c.name);
    outcome(
        r.passed(),
        format!(
            "paths {:?}, average level {:?}, lemma failure {:?}, second derivative sign {:?}",
            r.paths_failure, r.average_failure, lemma, r.lemmas.second_derivative_sign
        ),
    )
}

fn crossover_constant() -> Outcome {
    let lambda = solve_lambda(1e-14).expect("bracket holds");
    let residual = crossover_function(lambda).abs();
    let shown = format!("{lambda:.6}");
    outcome(
        shown == "0.789004" && residual <= 1e-12,
        format!("lambda = {lambda}, residual {residual:e}"),
    )
}

fn threshold_convergence() -> Outcome {
    let big = lambda_n(1_000_000).expect("n >= 1");
    let ratio = big.lstar as f64 / 1000.0;
    let not_unique: Vec<u64> = (1..=500)
        .filter(|&n| lambda_n(n).unwrap().unique != Some(true))
        .collect();
    outcome(
        (0.769..=0.809).contains(&ratio) && not_unique.is_empty(),
        format!(
            "lstar(10^6) = {}, ratio {ratio}, non-unique n <= 500: {not_unique:?}",
            big.lstar
        ),
    )
}

fn asymptotic_formula() -> Outcome {
    let n = 10_000;
    let points = grid(0.2, 1.6, 0.2).unwrap();
    let err = max_asymptotic_error(n, &points);
    let bound = 10.0 / (n as f64).sqrt();
    let tail = exp_tail_check(n, 0.2);
    outcome(
        err <= bound && tail.holds,
        format!(
            "max error {err:.3e} <= {bound}, tail {:.3e} <= {:.3e} at level {}",
            tail.scaled_total_b, tail.bound, tail.level
        ),
    )
}

fn spot_values() -> Outcome {
    let totals = |n, l| {
        let r = exact_row(n, l);
        (r.total_d, r.total_b, r.total_d_trunc, r.level_count)
    };
    let s = |a: &str, b: &str, c: &str, d: &str| (a.to_string(), b.to_string(), c.to_string(), d.to_string());
    let a = totals(3, 2) == s("12", "13", "12", "5");
    let b = totals(3, 1) == s("15", "14", "14", "9");
    let f1 = crossover_difference(4, 1);
    let f2 = crossover_difference(4, 2);
    let c = f1 == (-8).into() && f2 == 6.into();
    outcome(a && b && c, format!("(3,2) {a}, (3,1) {b}, f_4 = ({f1}, {f2})"))
}

fn scaled_pair(rows: &[SweepRow], s: f64) -> (&SweepRow, &SweepRow) {
    let cell = |n| rows.iter().find(|r| r.n == n && r.s == s).expect("cell present");
    (cell(100), cell(400))
}

fn simulator() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    for n in 1..=8 {
        let cfg = SimConfig::new(OffspringLaw::GeometricHalf, n, 0, 1_000_000, 1000 + n);
        let r = shape_uniformity(&cfg).unwrap();
        if !r.passes(1e-3) {
            pass = false;
            notes.push(format!("shapes n={n} p={:.2e}", r.p_value));
        }
    }

    let cells = [
        (10, 2),
        (20, 3),
        (50, 5),
        (100, 8),
        (150, 10),
        (200, 11),
        (250, 12),
        (300, 14),
        (400, 16),
        (500, 18),
    ];
    let mut worst: f64 = 0.0;
    for (i, &(n, level)) in cells.iter().enumerate() {
        let cfg = SimConfig::new(OffspringLaw::GeometricHalf, n, level, 100_000, 2000 + i as u64);
        let r = mc_estimate_s(&cfg).unwrap();
        let z = (r.mean - r.target.unwrap()).abs() / r.stderr;
        worst = worst.max(z);
        if !r.within(3.0) {
            pass = false;
            notes.push(format!("S({n},{level}) off by {z:.2} stderr"));
        }
    }
    notes.push(format!("worst grid deviation {worst:.2} stderr"));

    let laws = [
        OffspringLaw::GeometricHalf,
        OffspringLaw::Binomial(2),
        OffspringLaw::StrictMary(2),
        OffspringLaw::PoissonOne,
    ];
    let s_grid = [0.4, 0.8, 1.2];
    let mut worst_drift: f64 = 0.0;
    for (i, law) in laws.into_iter().enumerate() {
        let rows = scaling_sweep(law, &s_grid, &[100, 400], 100_000, 3000 + i as u64).unwrap();
        for s in s_grid {
            let (a, b) = scaled_pair(&rows, s);
            worst_drift = worst_drift.max((a.scaled_mean - b.scaled_mean).abs());
            if !levelsearch_core::gw::scaling_agrees(a, b, 0.05) {
                pass = false;
                notes.push(format!("{law} s={s}: {:.4} vs {:.4}", a.scaled_mean, b.scaled_mean));
            }
        }
    }
    notes.push(format!("largest n vs 4n drift {worst_drift:.4}"));
    outcome(pass, notes.join("; "))
}

fn conjecture_tables() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for l in 1..=5 {
        let r = conjecture_check(l, 1, 40).unwrap();
        if r.settled() {
            let reading = r
                .reading()
                .map_or("either".to_string(), |x| format!("{x:?}").to_lowercase());
            notes.push(format!("l={l} {reading}"));
            continue;
        }
        pass = false;
        for row in [&r.odd, &r.even] {
            if row.reading().is_some() {
                continue;
            }
            let name = match row.parity {
                Parity::Odd => "a",
                Parity::Even => "b",
            };
            let fixes: Vec<String> = row
                .interpolations
                .iter()
                .filter(|i| i.consistent && i.mismatches.len() == 1)
                .map(|i| {
                    let (power, printed, recovered) = &i.mismatches[0];
                    format!(
                        "{:?} reading needs n^{power} coefficient {recovered}, printed {printed}",
                        i.reading
                    )
                })
                .collect();
            notes.push(format!(
                "l={l} {name}_{l} matches under no reading ({})",
                fixes.join(", ")
            ));
        }
    }
    outcome(pass, notes.join("; "))
}

fn run_cli(threads: &str, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_levelsearch"))
        .arg("--threads")
        .arg(threads)
        .args(args)
        .output()
        .expect("binary runs");
    let mut bytes = out.stdout;
    bytes.extend(out.status.code().unwrap_or(-1).to_le_bytes());
    bytes
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 8] = [
        &["exact", "--n", "40", "--level", "7"],
        &["oracle-check", "--max-n", "8"],
        &["series-check", "--max-level", "3", "--order", "12", "--max-index", "12"],
        &["threshold", "--n", "1000", "--n", "100000"],
        &["asymptotics", "--n", "2000"],
        &[
            "gw-sim",
            "--law",
            "poisson-one",
            "--n",
            "200",
            "--level",
            "11",
            "--samples",
            "20000",
            "--seed",
            "7",
        ],
        &[
            "gw-sim",
            "--sweep",
            "--law",
            "binomial-3",
            "--n-list",
            "30,120",
            "--samples",
            "3000",
            "--seed",
            "9",
        ],
        &["plot-data", "--n", "900", "--s-grid", "0:1.5:0.1"],
    ];
    let mut differing = Vec::new();
    for args in commands {
        let base = run_cli("1", args);
        if base.len() <= 4 || ["4", "16"].iter().any(|t| run_cli(t, args) != base) {
            differing.push(args[0]);
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} commands, differing or empty {differing:?}", commands.len()),
    )
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "formula vs oracle", Duration::from_secs(300), formula_vs_oracle),
        (2, "generating functions", Duration::from_secs(60), generating_functions),
        (3, "identity suite", Duration::from_secs(60), identities),
        (4, "crossover constant", Duration::from_secs(1), crossover_constant),
        (
            5,
            "threshold convergence",
            Duration::from_secs(600),
            threshold_convergence,
        ),
        (6, "asymptotic formula", Duration::from_secs(120), asymptotic_formula),
        (7, "small-case spot values", Duration::from_secs(60), spot_values),
        (8, "Galton-Watson simulator", Duration::from_secs(900), simulator),
        (9, "conjecture tables", Duration::from_secs(600), conjecture_tables),
        (
            10,
            "determinism across thread counts",
            Duration::from_secs(600),
            determinism,
        ),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= budget;
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} {name}: {} ({:.1}s of {}s) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            result.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
