use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use coxshot::config::{ExperimentConfig, ModelArg};
use coxshot::figure1::run_figure1_experiment;
use coxshot::io;
use coxshot::stat_verify::{run_campaign, Suite};
use coxshot_core::arrival_law::{self, JointQuery};
use coxshot_core::predictor::{MseDomain, ObservedHistory, Predictor};
use coxshot_core::random_measure::MeasureModel;
use coxshot_core::rng::stream;
use coxshot_core::shot_noise::simulate_m_with;
use serde::Serialize;
use serde_json::json;

const RECIPE: &str = "\
Reproducing the claims-reserving example (Poisson(10) directing measure,
Poisson payment streams with mean 5(1 - e^-t)):

  coxshot simulate --config configs/fig1.json --seed 7
      observed path: fig1_measure.csv, fig1_arrivals.csv, fig1_M.csv,
      fig1_streams.csv (one row per claim: T_j then payment times), fig1_run.json
  coxshot figure1-right --seed 7 --out out/figure1
      observed M on [0,5], predictors M(s) + E[M(s,u] | G_s] for s = 1..4,
      and the squared-error backtest over 500 paths
  coxshot predict --config configs/fig1.json --history hist.csv --s 2 --t 3
      prediction from a CSV of claim times (column T_j)
  coxshot verify --suite all --reps 100000 --seed 1 --out report.json

Every stochastic output is a function of the seed alone.
Exit codes: 0 success, 1 invalid input, 2 verification suite failure.";

#[derive(Parser)]
#[command(name = "coxshot", version, about = "Cox processes directed by additive random measures, and their shot noise", after_long_help = RECIPE)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Tower,
    Extended,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate η, the Cox arrivals and M from a config; write CSVs and run.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact arrival-time law: conditional CDF, joint probability and count pmf.
    Law {
        /// gamma:a,b | poisson:c | deterministic:c | compound-exp:r,θ | mixed:v1,v2
        #[arg(long)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        /// Thresholds t_1 ≤ … ≤ t_n (repeat or comma-separate).
        #[arg(long, alias = "t1", value_delimiter = ',', num_args = 0..)]
        thresholds: Vec<f64>,
        /// Horizon t.
        #[arg(long)]
        t: f64,
    },
    /// Predict M(s, s+t] from observed claim times.
    Predict {
        #[arg(long)]
        config: PathBuf,
        /// CSV with a `T_j` column.
        #[arg(long)]
        history: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        /// Also report the unconditional MSE under the given integration domain.
        #[arg(long, value_enum)]
        mse_domain: Option<DomainArg>,
    },
    /// The claims example: observed path, four predictors and the backtest.
    #[command(name = "figure1-right")]
    Figure1Right {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "out/figure1")]
        out: PathBuf,
    },
    /// Run a Monte Carlo verification campaign.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
}

enum Outcome {
    Ok,
    SuiteFailed,
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn simulate(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> anyhow::Result<Outcome> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.output.dir = out;
    }
    let mut rng = stream(cfg.seed, 0);
    let path = simulate_m_with(
        &cfg.measure,
        &cfg.payment,
        cfg.horizon,
        cfg.grid_times(),
        cfg.path_options(),
        &mut rng,
    )?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = &cfg.output.prefix;
    io::write_measure_path(path.cox().path(), create(dir, &format!("{p}_measure.csv"))?)?;
    io::write_arrivals(path.cox(), create(dir, &format!("{p}_arrivals.csv"))?)?;
    io::write_shot_noise(&path, create(dir, &format!("{p}_M.csv"))?)?;
    io::write_arrival_streams(&path, create(dir, &format!("{p}_streams.csv"))?)?;
    let summary = json!({
        "config": cfg,
        "arrivals": path.arrivals().len(),
        "eta_total": path.cox().path().total_mass(),
        "m_terminal": path.value_at(cfg.horizon),
    });
    write_json(&dir.join(format!("{p}_run.json")), &summary)?;
    Ok(Outcome::Ok)
}

fn law(model: &MeasureModel, n: usize, thresholds: Vec<f64>, t: f64) -> anyhow::Result<Outcome> {
    if thresholds.len() != n {
        bail!("--n {n} needs {n} threshold(s), got {}", thresholds.len());
    }
    let q = JointQuery::new(thresholds, t)?;
    let query = json!({ "model": model, "n": n, "thresholds": q.thresholds(), "t": t });
    let mut records = Vec::new();
    if let MeasureModel::Gamma { shape, rate } = model {
        records.push(json!({
            "query": query, "quantity": "conditional_cdf",
            "value": arrival_law::gamma_conditional_cdf(*shape, &q)?, "method": "closed_form",
        }));
        records.push(json!({
            "query": query, "quantity": "joint_prob",
            "value": arrival_law::gamma_joint_prob(*shape, *rate, &q)?, "method": "closed_form",
        }));
    }
    records.push(json!({
        "query": query, "quantity": "conditional_cdf",
        "value": arrival_law::conditional_cdf(model, &q)?, "method": "laplace_expansion",
    }));
    records.push(json!({
        "query": query, "quantity": "joint_prob",
        "value": arrival_law::joint_prob(model, &q)?, "method": "laplace_expansion",
    }));
    records.push(json!({
        "query": query, "quantity": "count_pmf",
        "value": arrival_law::count_pmf(model, 0.0, t, n)?, "method": "laplace_recursion",
    }));
    println!("{}", serde_json::to_string_pretty(&records)?);
    Ok(Outcome::Ok)
}

fn predict(
    config: &Path,
    history: &Path,
    s: f64,
    t: f64,
    domain: Option<DomainArg>,
) -> anyhow::Result<Outcome> {
    let cfg = ExperimentConfig::load(config)?;
    let file = File::open(history).with_context(|| format!("opening {}", history.display()))?;
    let arrivals = io::read_history(file)?;
    let h = ObservedHistory::new(s, arrivals, Vec::new())?;
    let predictor = Predictor::new(cfg.measure, cfg.payment)?;
    let mut out = json!({
        "s": s,
        "t": t,
        "prediction": predictor.predict(&h, t)?,
        "predictive_sd": predictor.predictive_variance(&h, t)?.sqrt(),
    });
    if let Some(d) = domain {
        let (name, domain) = match d {
            DomainArg::Tower => ("tower", MseDomain::Tower),
            DomainArg::Extended => ("extended", MseDomain::Extended),
        };
        out["mse_domain"] = json!(name);
        out["unconditional_mse"] = json!(predictor.unconditional_mse_with(s, t, domain)?);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(Outcome::Ok)
}

fn figure1(seed: u64, out: &Path) -> anyhow::Result<Outcome> {
    let fig = run_figure1_experiment(seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fig.write_observed(create(out, "observed_M.csv")?)?;
    io::write_arrival_streams(&fig.observed, create(out, "arrival_streams.csv")?)?;
    fig.write_predictors(create(out, "predictors.csv")?)?;
    fig.write_backtest(create(out, "backtest.csv")?)?;
    write_json(
        &out.join("figure1.json"),
        &json!({ "seed": seed, "backtest": fig.backtest, "mse_monotone": fig.mse_monotone() }),
    )?;
    Ok(Outcome::Ok)
}

fn verify(suite: Suite, reps: usize, seed: u64, out: &Path) -> anyhow::Result<Outcome> {
    let report = run_campaign(suite, reps, seed)?;
    write_json(out, &report)?;
    for r in &report.reports {
        eprintln!(
            "{:<44} expected {:?}, got {:?}{}",
            r.name,
            r.expected,
            r.verdict,
            if r.rerun { " (re-run)" } else { "" }
        );
    }
    Ok(if report.passed { Outcome::Ok } else { Outcome::SuiteFailed })
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Simulate { config, seed, out } => simulate(&config, seed, out),
        Command::Law {
            model,
            n,
            thresholds,
            t,
        } => law(&model.0, n, thresholds, t),
        Command::Predict {
            config,
            history,
            s,
            t,
            mse_domain,
        } => predict(&config, &history, s, t, mse_domain),
        Command::Figure1Right { seed, out } => figure1(seed, &out),
        Command::Verify {
            suite,
            reps,
            seed,
            out,
        } => verify(suite, reps, seed, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::SuiteFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
