use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bidsynth::dynamic::{run_scenario, Scenario};
use bidsynth::pareto::{quantize, synthesize, QuantizationSpec};
use bidsynth::randomized::{det_pareto_cons, lower_bound_curve, mc_ratio, optimize_rstar, LowerBoundParams, RandParams};
use bidsynth::search::{optimize_search, synthesize_search, SignedPrediction, MIN_SEARCH_R};
use bidsynth::{DiscretePrediction, RobustnessReq};
use bidsynth_cli::error::{read_json, write_file};
use bidsynth_cli::experiment::{run_experiment, write_outputs, ExperimentConfig};
use bidsynth_cli::heuristics::{heuristic_strategy, HeuristicKind};
use bidsynth_cli::{CliError, CliResult};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "bidsynth", version, about = "Consistency/robustness strategy synthesis and experiments")]
struct Cli {
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Worker threads for batch runs; all cores by default.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Slack allowed when checking that the synthesized strategy dominates.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,
    /// Where to write results; stdout when absent (experiment defaults to `.`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Best r-robust strategy for a discrete prediction.
    Synth {
        input: PathBuf,
        #[arg(long)]
        r: f64,
    },
    /// Best geometric strategy of a fixed base.
    Heuristic {
        input: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum)]
        base: HeuristicKind,
    },
    /// Round a prediction up onto the levels m e^{i/c}, optionally synthesizing on the result.
    Quantize {
        input: PathBuf,
        #[arg(long)]
        m: f64,
        #[arg(long = "M")]
        big_m: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        r: Option<f64>,
    },
    /// Optimal randomized parameters for a robustness budget.
    Rand {
        #[arg(long)]
        r: f64,
        /// Also estimate the ratio at the prediction by Monte Carlo.
        #[arg(long, default_value_t = 0)]
        mc_trials: usize,
    },
    /// Lower bound, randomized and deterministic consistency against r.
    Curves {
        #[arg(long, default_value_t = 2.8183)]
        r_min: f64,
        #[arg(long, default_value_t = 12.0)]
        r_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Slack of the lower bound, positive.
        #[arg(long, default_value_t = 0.01)]
        xi: f64,
    },
    /// Contract schedule for a stream of predictions.
    Dynamic { scenario: PathBuf },
    /// Best r-robust search strategy for a signed prediction.
    Search {
        input: PathBuf,
        #[arg(long, default_value_t = MIN_SEARCH_R)]
        r: f64,
    },
    /// Batch comparison against the geometric heuristics.
    Experiment { config: Option<PathBuf> },
}

fn req(r: f64) -> CliResult<RobustnessReq> {
    Ok(RobustnessReq::new(r)?)
}

fn emit(out_dir: Option<&Path>, name: &str, contents: &[u8]) -> CliResult<()> {
    match out_dir {
        Some(dir) => write_file(&dir.join(name), contents),
        None => std::io::stdout().write_all(contents).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn json(value: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("serializable");
    s.push(b'\n');
    s
}

fn csv_line(fields: &[String]) -> String {
    fields.join(",") + "\n"
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run(cli: Cli) -> CliResult<()> {
    let out = cli.out_dir.as_deref();
    match cli.command {
        Command::Synth { input, r } => {
            let mu: DiscretePrediction = read_json(&input)?;
            let s = synthesize(&mu, req(r)?)?;
            emit(out, "synth.json", &json(&s.report()))
        }
        Command::Heuristic { input, r, base } => {
            let mu: DiscretePrediction = read_json(&input)?;
            let h = heuristic_strategy(base, &mu, req(r)?)?;
            emit(out, "heuristic.json", &json(&h))
        }
        Command::Quantize { input, m, big_m, c, r } => {
            let mu: DiscretePrediction = read_json(&input)?;
            let q = quantize(|t| mu.cdf(t), QuantizationSpec::new(m, big_m, c)?)?;
            let strategy = r.map(|r| Ok::<_, CliError>(synthesize(&q, req(r)?)?.report())).transpose()?;
            emit(out, "quantize.json", &json(&serde_json::json!({ "prediction": q, "strategy": strategy })))
        }
        Command::Rand { r, mc_trials } => {
            let res = optimize_rstar(r)?;
            let mut header = vec!["r", "delta_star", "a_star", "cons_star", "rob"];
            let mut row = vec![r.to_string(), res.delta_star.to_string(), res.a_star.to_string(), res.cons_star.to_string(), res.rob.to_string()];
            if mc_trials > 0 {
                let p = RandParams::new(res.delta_star, res.a_star)?;
                let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                let (mean, hw) = mc_ratio(1e4, p, 1e4, mc_trials, &mut rng)?;
                header.extend(["mc_mean", "mc_halfwidth"]);
                row.extend([mean.to_string(), hw.to_string()]);
            }
            let text = csv_line(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>()) + &csv_line(&row);
            emit(out, "rand.csv", text.as_bytes())
        }
        Command::Curves { r_min, r_max, points, xi } => {
            if !(points >= 2 && r_max > r_min) {
                return Err(CliError::Usage("need points >= 2 and r-max > r-min".into()));
            }
            let lb = LowerBoundParams::new(xi)?;
            let mut text = csv_line(&["r".into(), "lower_bound".into(), "rstar".into(), "det".into()]);
            for i in 0..points {
                let r = r_min + (r_max - r_min) * i as f64 / (points - 1) as f64;
                let det = if r >= RobustnessReq::MIN { Some(det_pareto_cons(r)?) } else { None };
                text += &csv_line(&[
                    r.to_string(),
                    lower_bound_curve(r, lb)?.to_string(),
                    optimize_rstar(r)?.cons_star.to_string(),
                    fmt_opt(det),
                ]);
            }
            emit(out, "curves.csv", text.as_bytes())
        }
        Command::Dynamic { scenario } => {
            let sc: Scenario = read_json(&scenario)?;
            let mut text = csv_line(&["epoch", "t", "u_hat", "contracts", "consistency", "acceleration"].map(String::from));
            for row in run_scenario(&sc)? {
                let contracts: Vec<String> = row.contracts.iter().map(|c| c.to_string()).collect();
                text += &csv_line(&[
                    row.epoch.to_string(),
                    row.t.to_string(),
                    row.u_hat.to_string(),
                    contracts.join(";"),
                    row.consistency.to_string(),
                    row.acceleration.to_string(),
                ]);
            }
            emit(out, "dynamic.csv", text.as_bytes())
        }
        Command::Search { input, r } => {
            let mu: SignedPrediction = read_json(&input)?;
            let s = synthesize_search(&mu, r)?;
            let randomized = optimize_search(r)?;
            emit(out, "search.json", &json(&serde_json::json!({ "deterministic": s, "randomized": randomized })))
        }
        Command::Experiment { config } => {
            let cfg: ExperimentConfig = match config {
                Some(p) => read_json(&p)?,
                None => ExperimentConfig::default(),
            };
            let report = run_experiment(&cfg, cli.seed, cli.threads, cli.tol)?;
            let dir = out.unwrap_or(Path::new("."));
            for path in write_outputs(&report, &cfg, dir)? {
                println!("{}", path.display());
            }
            if !report.violations.is_empty() {
                eprintln!("{} dominance violations above tolerance {}", report.violations.len(), cli.tol);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
