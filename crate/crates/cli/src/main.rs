use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levelsearch_core::asymptotics::{
    average_level, exp_tail_check, grid, k_const, lambda_n, local_limit_constant, max_asymptotic_error, plot_rows,
    solve_lambda,
};
use levelsearch_core::closed_forms::{conjecture_check, exact_row};
use levelsearch_core::enumeration::oracle_rows;
use levelsearch_core::gw::{mc_estimate_occupation, mc_estimate_s, scaling_sweep, shape_uniformity, SamplerKind};
use levelsearch_core::series::{b_series, d_series};
use levelsearch_core::verify::{identity_check, oracle_check, series_check, OracleCheck};
use levelsearch_core::{EstimateReport, OffspringLaw, SimConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "levelsearch",
    version,
    about = "Step counts of BFS, DFS and truncated DFS on random ordered trees"
)]
struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "LEVELSEARCH_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact totals and mean scores at one (n, level) as JSON.
    Exact {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        level: u64,
    },
    /// Exhaustive enumeration against the closed forms.
    OracleCheck {
        #[arg(long, default_value_t = 12)]
        max_n: u64,
        /// Print the brute-force totals as CSV instead of the matrix.
        #[arg(long)]
        dump: bool,
    },
    /// Generating functions and polynomial identities.
    SeriesCheck {
        #[arg(long, default_value_t = 8)]
        max_level: u64,
        #[arg(long, default_value_t = 30)]
        order: usize,
        #[arg(long, default_value_t = 40)]
        max_index: u64,
        /// Print the series coefficients as CSV instead of the matrix.
        #[arg(long)]
        dump: bool,
    },
    /// Integer thresholds as JSON lines, or the limiting constant.
    Threshold {
        #[arg(long, required_unless_present = "lambda", conflicts_with = "lambda")]
        n: Vec<u64>,
        #[arg(long)]
        lambda: bool,
        #[arg(long, default_value_t = 1e-9, requires = "lambda")]
        tol: f64,
    },
    /// Large-n checks of the exact totals against their limits.
    Asymptotics {
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[arg(long, default_value = "0.2:1.6:0.2")]
        s_grid: String,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
    },
    /// Monte Carlo estimates on conditioned Galton–Watson trees, as CSV.
    GwSim(GwArgs),
    /// Truncation differences against the printed polynomial tables.
    Conjecture {
        #[arg(long)]
        l: u64,
        #[arg(long, default_value_t = 1)]
        n_from: u64,
        #[arg(long, default_value_t = 40)]
        n_to: u64,
    },
    /// Exact and limiting scaled totals over an s grid, as CSV.
    PlotData {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "0.0:2.0:0.05")]
        s_grid: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Stat {
    /// sum of BFS ranks at the level
    S,
    /// nodes at or below the level, and nodes on it
    Occupation,
    /// chi-square of shape frequencies against the uniform law
    Shapes,
}

#[derive(Args)]
struct GwArgs {
    #[arg(long, default_value = "geometric-half")]
    law: String,
    #[arg(long, required_unless_present = "sweep")]
    n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    level: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "s")]
    stat: Stat,
    #[arg(long, default_value = "direct")]
    sampler: String,
    /// Scaling table over --s-grid and --n-list instead of a single estimate.
    #[arg(long)]
    sweep: bool,
    #[arg(long, default_value = "0.2:1.6:0.2")]
    s_grid: String,
    #[arg(long, value_delimiter = ',', default_value = "100,400")]
    n_list: Vec<u64>,
}

enum Failure {
    Usage(String),
    Check(String),
}

type Outcome = Result<(), Failure>;

impl From<levelsearch_core::Error> for Failure {
    fn from(e: levelsearch_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Check(format!("output error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Check(format!("output error: {e}"))
    }
}

fn json<T: Serialize>(value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Check(e.to_string()))?;
    writeln!(io::stdout().lock(), "{text}")?;
    Ok(())
}

fn csv_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Outcome {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn check(ok: bool, what: &str) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Check(format!("{what} failed")))
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn run_oracle_check(max_n: u64, dump: bool) -> Outcome {
    if dump {
        return csv_rows(oracle_rows(max_n)?);
    }
    let rows = oracle_check(max_n)?;
    let mut out = io::stdout().lock();
    writeln!(out, "n,level,{}", OracleCheck::COLUMNS.join(","))?;
    for r in &rows {
        let flags: Vec<&str> = r.flags().iter().map(|&f| mark(f)).collect();
        writeln!(out, "{},{},{}", r.n, r.level, flags.join(","))?;
    }
    let failed = rows.iter().filter(|r| !r.passed()).count();
    writeln!(out, "# {} cells, {} failed", rows.len(), failed)?;
    check(failed == 0, "oracle check")
}

#[derive(Serialize)]
struct CoefficientRow {
    series: &'static str,
    level: u64,
    k: u64,
    numerator: String,
    denominator: String,
}

fn run_series_check(max_level: u64, order: usize, max_index: u64, dump: bool) -> Outcome {
    if dump {
        let mut rows = Vec::new();
        for level in 1..=max_level {
            for (name, s) in [("B", b_series(level, order)?), ("D", d_series(level, order)?)] {
                rows.extend(s.rows().into_iter().map(|r| CoefficientRow {
                    series: name,
                    level,
                    k: r.k,
                    numerator: r.numerator,
                    denominator: r.denominator,
                }));
            }
        }
        return csv_rows(rows);
    }
    let series = series_check(max_level, order)?;
    let ids = identity_check(50, 500, max_index)?;
    let mut out = io::stdout().lock();
    writeln!(out, "level,order,b_coefficients,d_coefficients,d_forms_agree")?;
    for s in &series {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.level,
            s.order,
            mark(s.b_coefficients),
            mark(s.d_coefficients),
            mark(s.d_forms_agree)
        )?;
    }
    for c in &ids.lemmas.checks {
        let status = match c.first_failure {
            None => "ok".to_string(),
            Some(i) => format!("fails at {i}"),
        };
        writeln!(out, "# lemma {} through {}: {}", c.name, ids.lemmas.max_index, status)?;
    }
    let sign = ids
        .lemmas
        .second_derivative_sign
        .map_or("none".to_string(), |c| c.to_string());
    writeln!(out, "# second derivative sign: {sign}")?;
    writeln!(
        out,
        "# path identity n <= {}: {}",
        ids.paths_max_n,
        mark(ids.paths_failure.is_none())
    )?;
    writeln!(
        out,
        "# average level n <= {}: {}",
        ids.average_max_n,
        mark(ids.average_failure.is_none())
    )?;
    writeln!(out, "# truncation difference: {}", mark(ids.trunc_failure.is_none()))?;
    check(series.iter().all(|s| s.passed()) && ids.passed(), "series check")
}

fn decimals(tol: f64) -> usize {
    (-tol.log10()).ceil().clamp(1.0, 15.0) as usize
}

fn run_threshold(ns: &[u64], lambda: bool, tol: f64) -> Outcome {
    if lambda {
        let value = solve_lambda(tol)?;
        writeln!(io::stdout().lock(), "{value:.prec$}", prec = decimals(tol))?;
        return Ok(());
    }
    let mut out = io::stdout().lock();
    let mut ok = true;
    for &n in ns {
        let r = lambda_n(n)?;
        ok &= r.unique != Some(false);
        writeln!(
            out,
            "{}",
            serde_json::to_string(&r).map_err(|e| Failure::Check(e.to_string()))?
        )?;
    }
    check(ok, "threshold uniqueness")
}

#[derive(Serialize)]
struct AsymptoticsReport {
    n: u64,
    grid: Vec<f64>,
    max_error: f64,
    error_bound: f64,
    tail: levelsearch_core::asymptotics::TailCheck,
    local_limit_constant: f64,
    average_level: levelsearch_core::asymptotics::AverageLevel,
    lambda: f64,
    k_at_lambda: f64,
}

fn run_asymptotics(n: u64, s_grid: &str, eps: f64) -> Outcome {
    let points = parse_grid(s_grid)?;
    let lambda = solve_lambda(1e-14)?;
    let report = AsymptoticsReport {
        n,
        max_error: max_asymptotic_error(n, &points),
        error_bound: 10.0 / (n as f64).sqrt(),
        grid: points,
        tail: exp_tail_check(n, eps),
        local_limit_constant: local_limit_constant(n),
        average_level: average_level(n),
        lambda,
        k_at_lambda: k_const(lambda),
    };
    json(&report)?;
    check(
        report.max_error <= report.error_bound && report.tail.holds,
        "asymptotic check",
    )
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Failure::Usage(format!("grid must be a:b:step, got {spec:?}"));
    let [a, b, step] = parts.as_slice() else {
        return Err(bad());
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    Ok(grid(num(a)?, num(b)?, num(step)?)?)
}

#[derive(Serialize)]
struct GwRow {
    statistic: &'static str,
    law: OffspringLaw,
    n: u64,
    level: u64,
    samples: u64,
    seed: u64,
    mean: f64,
    stderr: f64,
    target: Option<f64>,
}

fn gw_row(statistic: &'static str, cfg: &SimConfig, r: EstimateReport) -> GwRow {
    GwRow {
        statistic,
        law: cfg.law,
        n: cfg.n,
        level: cfg.level,
        samples: r.samples,
        seed: cfg.seed,
        mean: r.mean,
        stderr: r.stderr,
        target: r.target,
    }
}

fn run_gw(a: &GwArgs) -> Outcome {
    let law: OffspringLaw = a.law.parse()?;
    let sampler: SamplerKind = a.sampler.parse()?;
    if a.sweep {
        let rows = scaling_sweep(law, &parse_grid(&a.s_grid)?, &a.n_list, a.samples, a.seed)?;
        // which candidate limit sits closest, for inspection only
        let mut votes = [0usize; 3];
        for r in rows.iter().filter(|r| r.s > 0.0) {
            let d = [r.theory_sigma_ks, r.theory_sigma_ks_half, r.theory_ks].map(|t| (t - r.scaled_mean).abs());
            let best = (0..3).min_by(|&i, &j| d[i].total_cmp(&d[j])).unwrap();
            votes[best] += 1;
        }
        eprintln!(
            "closest candidate counts: sigmaKs={} sigmaKs_half={} Ks={}",
            votes[0], votes[1], votes[2]
        );
        return csv_rows(rows);
    }
    let n = a.n.expect("required unless sweeping");
    let cfg = SimConfig::new(law, n, a.level, a.samples, a.seed).with_sampler(sampler);
    match a.stat {
        Stat::S => csv_rows([gw_row("S", &cfg, mc_estimate_s(&cfg)?)]),
        Stat::Occupation => {
            let (v, h) = mc_estimate_occupation(&cfg)?;
            csv_rows([gw_row("v", &cfg, v), gw_row("h", &cfg, h)])
        }
        Stat::Shapes => {
            let r = shape_uniformity(&cfg)?;
            let passes = r.passes(1e-3);
            csv_rows([r])?;
            check(passes, "shape uniformity")
        }
    }
}

#[derive(Serialize)]
struct ConjectureOutput {
    reading: Option<levelsearch_core::closed_forms::FactorialReading>,
    readings_coincide: bool,
    settled: bool,
    report: levelsearch_core::closed_forms::ConjectureReport,
}

fn run_conjecture(l: u64, n_from: u64, n_to: u64) -> Outcome {
    let report = conjecture_check(l, n_from, n_to)?;
    let out = ConjectureOutput {
        reading: report.reading(),
        readings_coincide: report.readings_coincide(),
        settled: report.settled(),
        report,
    };
    json(&out)?;
    check(out.settled, "conjecture table")
}

fn run(cli: Cli) -> Outcome {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Exact { n, level } => json(&exact_row(n, level)),
        Command::OracleCheck { max_n, dump } => run_oracle_check(max_n, dump),
        Command::SeriesCheck {
            max_level,
            order,
            max_index,
            dump,
        } => run_series_check(max_level, order, max_index, dump),
        Command::Threshold { n, lambda, tol } => run_threshold(&n, lambda, tol),
        Command::Asymptotics { n, s_grid, eps } => run_asymptotics(n, &s_grid, eps),
        Command::GwSim(args) => run_gw(&args),
        Command::Conjecture { l, n_from, n_to } => run_conjecture(l, n_from, n_to),
        Command::PlotData { n, s_grid } => csv_rows(plot_rows(n, &parse_grid(&s_grid)?)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("levelsearch: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("levelsearch: {msg}");
            ExitCode::from(2)
        }
    }
}
