//! Acceptance gate: criteria 1-9, one PASS/FAIL line each. Exits non-zero if
//! any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{derivative, step_within_domain, mean_se, rel_err};
use coxshot::figure1::{run_figure1_experiment, ORIGINS};
use coxshot::stat_verify::{
    mse_report, prediction_samples, run_campaign, test_conditional_probe, unbiasedness_report,
    CampaignReport, Suite,
};
use coxshot_core::arrival_law::{conditional_cdf, gamma_conditional_cdf, gamma_joint_prob, joint_prob, JointQuery};
use coxshot_core::predictor::{ObservedHistory, Predictor};
use coxshot_core::random_measure::{JumpDist, MeasureModel, PathOptions};
use coxshot_core::rng::stream;
use coxshot_core::shot_noise::{claims_example, mean_m, simulate_m};
use rand::Rng;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    notes: Vec<String>,
    /// Everything the criterion computed, for the reproducibility check.
    digest: Vec<u64>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            notes: Vec::new(),
            digest: Vec::new(),
        }
    }

    fn check(&mut self, label: &str, ok: bool, detail: String) {
        self.pass &= ok;
        self.notes.push(format!("{label:<40} {} {detail}", verdict(ok)));
    }

    fn record(&mut self, values: impl IntoIterator<Item = f64>) {
        self.digest.extend(values.into_iter().map(f64::to_bits));
    }

    fn campaign(&mut self, report: &CampaignReport) {
        for r in &report.reports {
            let p = r.p_value.map_or(String::new(), |p| format!(" p={p:.4}"));
            self.check(
                &r.name,
                r.as_expected(),
                format!(
                    "(expected {:?}, got {:?}, stat={:.4}{p}{})",
                    r.expected,
                    r.verdict,
                    r.statistic,
                    if r.rerun { ", re-run at 10x" } else { "" }
                ),
            );
            self.record([r.statistic, r.p_value.unwrap_or(-1.0)]);
            self.record(r.details.values().copied());
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn laplace_calculus(_seed: u64) -> Outcome {
    let mut out = Outcome::new();
    let models = [
        MeasureModel::Gamma { shape: 1.0, rate: 1.0 },
        MeasureModel::Gamma { shape: 2.5, rate: 0.7 },
        MeasureModel::PoissonCounting { rate: 10.0 },
        MeasureModel::CompoundPoisson {
            rate: 2.0,
            jumps: JumpDist::Exponential { rate: 1.5 },
        },
    ];
    let mut worst: f64 = 0.0;
    for model in &models {
        for &u in &[0.5, 1.0, 2.0] {
            let phi = |x: f64| model.laplace(0.0, 1.0, x).unwrap();
            for order in 0..=4 {
                let exact = model.laplace_derivative(0.0, 1.0, order, u).unwrap();
                let fd = derivative(phi, u, order, step_within_domain(u, order));
                worst = worst.max(rel_err(exact, fd));
                out.record([exact, fd]);
            }
        }
    }
    out.check("derivatives vs finite differences", worst < 1e-5, format!("(max rel err {worst:.2e})"));
    out
}

fn gamma_closed_form(seed: u64) -> Outcome {
    let mut out = Outcome::new();
    let mut rng = stream(seed, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let shape = rng.random_range(0.2..3.0);
        let rate = rng.random_range(0.2..3.0);
        let n = rng.random_range(1..=6);
        let t = rng.random_range(0.2..4.0);
        let mut th: Vec<f64> = (0..n).map(|_| rng.random_range(1e-3..t)).collect();
        th.sort_by(f64::total_cmp);
        let q = JointQuery::new(th, t).unwrap();
        let a = gamma_joint_prob(shape, rate, &q).unwrap();
        let b = joint_prob(&MeasureModel::Gamma { shape, rate }, &q).unwrap();
        worst = worst.max(rel_err(a, b));
        out.record([a, b]);
    }
    out.check("closed form vs expansion, 100 queries", worst < 1e-8, format!("(max rel err {worst:.2e})"));
    out
}

fn conditional_law(seed: u64) -> Outcome {
    let mut out = Outcome::new();
    let q = JointQuery::new(vec![1.0, 2.0], 2.0).unwrap();
    let closed = gamma_conditional_cdf(1.0, &q).unwrap();
    let gamma = MeasureModel::Gamma { shape: 1.0, rate: 1.0 };
    let expansion = conditional_cdf(&gamma, &q).unwrap();
    out.check("closed form equals 1/2", closed == 0.5, format!("({closed})"));
    out.check(
        "expansion equals 1/2",
        (expansion - 0.5).abs() < 1e-12,
        format!("({expansion})"),
    );
    let r = test_conditional_probe(
        "acceptance/conditional_law",
        &gamma,
        &q,
        PathOptions { knots_per_unit: 10 },
        100_000,
        seed,
    )
    .unwrap();
    out.check(
        "Monte Carlo within 4 SE, 1e5 paths",
        r.as_expected(),
        format!(
            "(estimate {:.4} from {} conditioned, z={:.2})",
            r.details["estimate"], r.details["conditioned_samples"], r.statistic
        ),
    );
    out.record([closed, expansion, r.statistic]);
    out
}

fn independence_stationarity(seed: u64) -> Outcome {
    let mut out = Outcome::new();
    out.campaign(&run_campaign(Suite::Counts, 100_000, seed).unwrap());
    out
}

fn subordination(seed: u64) -> Outcome {
    let mut out = Outcome::new();
    out.campaign(&run_campaign(Suite::Subordination, 100_000, seed).unwrap());
    out
}

fn prediction(seed: u64) -> Outcome {
    let mut out = Outcome::new();
    let (measure, payment) = claims_example();
    let predictor = Predictor::new(measure.clone(), payment.clone()).unwrap();

    let mut worst_literal: f64 = 0.0;
    let mut worst_derived: f64 = 0.0;
    for &s in &[1.0, 2.0, 3.0] {
        let h = ObservedHistory::new(s, vec![], vec![]).unwrap();
        for &t in &[0.5f64, 1.0, 2.0, 4.0] {
            let v = predictor.predict(&h, t).unwrap();
            let shape = t - 1.0 + (-t).exp();
            worst_literal = worst_literal.max((v - 10.0 * shape).abs());
            worst_derived = worst_derived.max((v - 50.0 * shape).abs());
            out.record([v]);
        }
    }
    out.check(
        "6(a) N(s)=0 equals 10(t-1+e^-t)",
        worst_literal <= 1e-12,
        format!("(max abs err {worst_literal:.3e})"),
    );
    out.notes.push(format!(
        "{:<40} {} (max abs err {worst_derived:.1e}; informational, E eta(du) = 10 du times mu(0,v] = 5(1-e^-v))",
        "     N(s)=0 vs 50(t-1+e^-t)",
        if worst_derived <= 1e-12 { "agrees" } else { "differs" }
    ));

    let (s, t) = (1.0, 1.0);
    let samples = prediction_samples(
        "acceptance/unbiased",
        &measure,
        &payment,
        s,
        t,
        PathOptions::default(),
        100_000,
        seed,
    )
    .unwrap();
    let r = unbiasedness_report("acceptance/unbiased", &samples, seed);
    out.check(
        "6(b) mean error within 4 SE, 1e5",
        r.as_expected(),
        format!("(mean {:.4}, se {:.4})", r.details["mean_error"], r.details["se"]),
    );
    out.record([r.statistic]);

    let samples = prediction_samples(
        "acceptance/mse",
        &measure,
        &payment,
        s,
        t,
        PathOptions::default(),
        1_000_000,
        seed,
    )
    .unwrap();
    let r = mse_report("acceptance/mse", &predictor, s, t, &samples, 0.05, seed).unwrap();
    out.check(
        "6(c) MSE within 5%, 1e6 paths",
        r.as_expected(),
        format!(
            "(empirical {:.4}, exact {:.4}, rel {:+.4}; other domain {:.4})",
            r.details["empirical_mse"],
            r.details["unconditional_mse"],
            r.statistic,
            r.details["unconditional_mse_extended_domain"]
        ),
    );
    out.record([r.statistic]);
    out
}

fn moments(seed: u64) -> Outcome {
    let mut out = Outcome::new();
    let (measure, payment) = claims_example();
    let exact = 50.0 * (-1.0f64).exp();
    let quad = mean_m(&measure, &payment, 1.0).unwrap();
    out.check("quadrature equals 50/e", rel_err(quad, exact) < 1e-10, format!("({quad:.6})"));
    let mut rng = stream(seed, 7);
    let m: Vec<f64> = (0..100_000)
        .map(|_| simulate_m(&measure, &payment, 1.0, vec![1.0], &mut rng).unwrap().value_at(1.0))
        .collect();
    let (mean, se) = mean_se(&m);
    out.check(
        "Monte Carlo within 3 SE, 1e5 paths",
        (mean - exact).abs() < 3.0 * se,
        format!("({mean:.4} +- {se:.4})"),
    );
    out.record([quad, mean, se]);
    out
}

fn figure1(seed: u64) -> Outcome {
    let mut out = Outcome::new();
    let fig = run_figure1_experiment(seed).unwrap();
    let mut observed = Vec::new();
    let mut predictors = Vec::new();
    let mut backtest = Vec::new();
    fig.write_observed(&mut observed).unwrap();
    fig.write_predictors(&mut predictors).unwrap();
    fig.write_backtest(&mut backtest).unwrap();
    let rows = |b: &[u8]| String::from_utf8_lossy(b).lines().count();
    out.check(
        "observed path and four predictor tables",
        rows(&observed) == 51 && fig.predictors.len() == ORIGINS.len() && rows(&predictors) == 101,
        format!("({} + {} rows)", rows(&observed) - 1, rows(&predictors) - 1),
    );
    let mse: Vec<String> = fig
        .backtest
        .iter()
        .map(|r| format!("s={}: {:.1}/{:.1}", r.s, r.mse_path, r.mse_terminal))
        .collect();
    out.check("MSE decreasing in s, 500 paths", fig.mse_monotone(), format!("({})", mse.join(", ")));
    out.digest.extend(observed.iter().chain(&predictors).chain(&backtest).map(|&b| b as u64));
    out
}

/// Id, name, body and runtime budget.
type Criterion = (u32, &'static str, fn(u64) -> Outcome, Option<Duration>);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "Laplace calculus", laplace_calculus, Some(Duration::from_secs(1))),
        (2, "Gamma closed form", gamma_closed_form, Some(Duration::from_secs(10))),
        (3, "conditional law", conditional_law, Some(Duration::from_secs(60))),
        (4, "independence and stationarity", independence_stationarity, Some(Duration::from_secs(300))),
        (5, "subordination", subordination, None),
        (6, "prediction", prediction, Some(Duration::from_secs(600))),
        (7, "moments", moments, None),
        (8, "figure-1 reproduction", figure1, None),
    ];
    let mut all = true;
    let mut digests = Vec::new();
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let mut outcome = run(SEED);
        let elapsed = start.elapsed();
        if let Some(budget) = budget {
            outcome.check("runtime", elapsed < budget, format!("({:.2?} of {budget:.0?})", elapsed));
        }
        println!("criterion {id} {name:<32} {} ({elapsed:.2?})", verdict(outcome.pass));
        for note in &outcome.notes {
            println!("    {note}");
        }
        all &= outcome.pass;
        digests.push((id, run, outcome.digest));
    }

    let start = Instant::now();
    let mut same = true;
    let mut notes = Vec::new();
    for (id, run, digest) in digests {
        let again = run(SEED).digest;
        let ok = !digest.is_empty() && again == digest;
        same &= ok;
        notes.push(format!("criterion {id} re-run with seed {SEED}: {}", if ok { "identical" } else { "DIFFERS" }));
    }
    println!("criterion 9 {:<32} {} ({:.2?})", "determinism", verdict(same), start.elapsed());
    for note in notes {
        println!("    {note}");
    }
    all &= same;

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
