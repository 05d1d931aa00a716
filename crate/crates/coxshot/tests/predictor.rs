mod common;

use common::{mean_se, rel_err};
use coxshot_core::predictor::{exp_decay_prediction, ObservedHistory, Predictor};
use coxshot_core::random_measure::MeasureModel;
use coxshot_core::rng::stream;
use coxshot_core::shot_noise::{claims_example, simulate_m, PaymentModel};

fn claims() -> Predictor {
    let (m, p) = claims_example();
    Predictor::new(m, p).unwrap()
}

#[test]
fn empty_history_future_term() {
    let pred = claims();
    for &(s, t) in &[(1.0, 0.5f64), (2.0, 1.0), (3.0, 2.0)] {
        let h = ObservedHistory::new(s, vec![], vec![]).unwrap();
        let v = pred.predict(&h, t).unwrap();
        let exact = 50.0 * (t - 1.0 + (-t).exp());
        assert!((v - exact).abs() < 1e-10 * exact.max(1.0), "{v} vs {exact}");
    }
    let h = ObservedHistory::new(1.0, vec![], vec![]).unwrap();
    assert!(pred.predict(&h, 1e-9).unwrap().abs() < 1e-12);
}

#[test]
fn one_past_arrival() {
    let pred = claims();
    let (s, t) = (2.0, 1.5f64);
    let h = ObservedHistory::new(s, vec![s - 1.0], vec![]).unwrap();
    let exact = 5.0 * (-1.0f64).exp() * (1.0 - (-t).exp()) + 50.0 * (t - 1.0 + (-t).exp());
    let v = pred.predict(&h, t).unwrap();
    assert!(rel_err(v, exact) < 1e-10, "{v} vs {exact}");
    assert!(rel_err(v, exp_decay_prediction(10.0, 5.0, 1.0, s, &[s - 1.0], t)) < 1e-10);

    // Conditional mean by simulation: the known claim's remaining payments
    // plus a fresh future on (s, s + t].
    let (measure, payment) = claims_example();
    let mut rng = stream(41, 0);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| {
            let own = payment.sample(s + t - (s - 1.0), &mut rng).unwrap();
            let remaining = own.value(s + t - (s - 1.0)) - own.value(1.0);
            let fresh = simulate_m(&measure, &payment, t, vec![t], &mut rng).unwrap();
            remaining + fresh.value_at(t)
        })
        .collect();
    let (mean, se) = mean_se(&draws);
    assert!((mean - v).abs() < 4.0 * se, "{mean} ± {se} vs {v}");
}

#[test]
fn empty_history_variance_by_conditioning() {
    let (measure, payment) = claims_example();
    let pred = claims();
    let (s, t) = (0.1, 1.0);
    let h = ObservedHistory::new(s, vec![], vec![]).unwrap();
    let exact = pred.predictive_variance(&h, t).unwrap();
    let mut rng = stream(42, 0);
    let kept: Vec<f64> = (0..1_000_000)
        .filter_map(|_| {
            let p = simulate_m(&measure, &payment, s + t, vec![s, s + t], &mut rng).unwrap();
            (p.cox().count_to(s) == 0).then(|| p.increment(s, s + t))
        })
        .collect();
    let (mean, _) = mean_se(&kept);
    let var = kept.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (kept.len() - 1) as f64;
    assert!(rel_err(var, exact) < 0.05, "{var} vs {exact} over {} paths", kept.len());
}

#[test]
fn deterministic_unit_indicator_variance() {
    let pred = Predictor::new(MeasureModel::Deterministic { slope: 4.0 }, PaymentModel::UnitIndicator).unwrap();
    let h = ObservedHistory::new(1.0, vec![], vec![]).unwrap();
    for &t in &[0.5, 1.0, 3.0] {
        assert!(rel_err(pred.predictive_variance(&h, t).unwrap(), 4.0 * t) < 1e-10);
        assert!(rel_err(pred.predict(&h, t).unwrap(), 4.0 * t) < 1e-10);
    }
}

#[test]
fn degenerate_cases() {
    let pred = Predictor::new(MeasureModel::PoissonCounting { rate: 3.0 }, PaymentModel::Zero).unwrap();
    let h = ObservedHistory::new(1.0, vec![0.2, 0.7], vec![]).unwrap();
    assert_eq!(pred.predict(&h, 2.0).unwrap(), 0.0);
    assert_eq!(pred.predictive_variance(&h, 2.0).unwrap(), 0.0);
    assert_eq!(pred.unconditional_mse(1.0, 2.0).unwrap(), 0.0);
    assert!(claims().unconditional_mse(1.0, 1e-9).unwrap().abs() < 1e-6);
}
