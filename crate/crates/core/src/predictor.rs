//! Prediction of `M(s, s + t]` from the history `G_s` observed up to `s`.
//!
//! Past arrivals contribute through the remaining increments of their own
//! payment streams; future arrivals only through the moments of `η` on
//! `(s, s + t]`:
//!
//! ```text
//! E[M(s, s+t] | G_s]   = Σ_j μ(s − T_j, s + t − T_j] + ∫_s^{s+t} μ(s + t − u) m1(u) du
//! Var(M(s, s+t] | G_s) = Σ_j σ²(s − T_j, s + t − T_j]
//!                        + ∫_s^{s+t} [μ²(s + t − u) m2(u) + (μ² + σ²)(s + t − u) m1(u)] du
//! ```

use alloc::vec::Vec;

use crate::error::non_negative;
use crate::random_measure::MeasureModel;
use crate::shot_noise::{cov_m, integrate_moments, PaymentModel, PaymentPath, ShotNoisePath};
use crate::{Error, Result};

/// The information available at time `s`: arrivals up to `s` and each
/// arrival's payment stream up to `s − T_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedHistory {
    s: f64,
    arrivals: Vec<f64>,
    payments: Vec<PaymentPath>,
}

impl ObservedHistory {
    /// `payments` may be empty (not observed) or hold one path per arrival.
    pub fn new(s: f64, arrivals: Vec<f64>, payments: Vec<PaymentPath>) -> Result<Self> {
        non_negative("observation time", s)?;
        if arrivals.iter().any(|&t| !(t > 0.0 && t <= s)) {
            return Err(Error::InvalidQuery(alloc::format!(
                "history arrivals must lie in (0, {s}]"
            )));
        }
        if arrivals.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidQuery("history arrivals must be sorted".into()));
        }
        if !payments.is_empty() && payments.len() != arrivals.len() {
            return Err(Error::InvalidQuery(
                "need one payment history per arrival".into(),
            ));
        }
        let payments = payments
            .iter()
            .zip(&arrivals)
            .map(|(p, &t)| p.truncated(s - t))
            .collect();
        Ok(Self {
            s,
            arrivals,
            payments,
        })
    }

    /// `G_s` read off a simulated path.
    pub fn from_shot_noise(path: &ShotNoisePath, s: f64) -> Result<Self> {
        let n = path.cox().count_to(s);
        Self::new(
            s,
            path.arrivals()[..n].to_vec(),
            path.payments()[..n].to_vec(),
        )
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn payments(&self) -> &[PaymentPath] {
        &self.payments
    }

    /// `N(s)`.
    pub fn count(&self) -> usize {
        self.arrivals.len()
    }
}

/// Domain of the `σ²` term in the unconditional prediction error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MseDomain {
    /// `∫_{(0,s]} σ²(s − u, s + t − u] m1(u) du`: the expectation of the
    /// history term of the conditional variance.
    #[default]
    Tower,
    /// The same integrand over `(0, s + t]`, which counts the `σ²` of future
    /// arrivals a second time.
    Extended,
}

/// Conditional predictor for a shot-noise process with known models.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    measure: MeasureModel,
    payment: PaymentModel,
}

impl Predictor {
    pub fn new(measure: MeasureModel, payment: PaymentModel) -> Result<Self> {
        measure.validate()?;
        measure.require_additive()?;
        payment.validate()?;
        Ok(Self { measure, payment })
    }

    pub fn measure(&self) -> &MeasureModel {
        &self.measure
    }

    pub fn payment(&self) -> &PaymentModel {
        &self.payment
    }

    /// `∫_s^{s+t} μ(s + t − u) m1(u) du`.
    pub fn future_mean(&self, s: f64, t: f64) -> Result<f64> {
        let end = s + t;
        integrate_moments(&self.measure, s, end, |u, m1, _| self.payment.mean(end - u) * m1)
    }

    /// `∫_s^{s+t} [μ² m2 + (μ² + σ²) m1](s + t − u) du`.
    pub fn future_variance(&self, s: f64, t: f64) -> Result<f64> {
        let end = s + t;
        integrate_moments(&self.measure, s, end, |u, m1, m2| {
            let mu = self.payment.mean(end - u);
            let var = self.payment.variance(end - u);
            mu * mu * m2 + (mu * mu + var) * m1
        })
    }

    /// `E[M(s, s + t] | G_s]`.
    pub fn predict(&self, history: &ObservedHistory, t: f64) -> Result<f64> {
        non_negative("lead time", t)?;
        let s = history.s();
        let past: f64 = history
            .arrivals()
            .iter()
            .map(|&tj| self.payment.mean_interval(s - tj, s + t - tj))
            .sum();
        Ok(past + self.future_mean(s, t)?)
    }

    /// `Var(M(s, s + t] | G_s)`.
    pub fn predictive_variance(&self, history: &ObservedHistory, t: f64) -> Result<f64> {
        non_negative("lead time", t)?;
        let s = history.s();
        let past: f64 = history
            .arrivals()
            .iter()
            .map(|&tj| self.payment.variance_interval(s - tj, s + t - tj))
            .sum();
        Ok((past + self.future_variance(s, t)?).max(0.0))
    }

    /// `E(M(s, s + t] − E[M(s, s + t] | G_s])²`.
    pub fn unconditional_mse(&self, s: f64, t: f64) -> Result<f64> {
        self.unconditional_mse_with(s, t, MseDomain::Tower)
    }

    pub fn unconditional_mse_with(&self, s: f64, t: f64, domain: MseDomain) -> Result<f64> {
        non_negative("observation time", s)?;
        non_negative("lead time", t)?;
        let upper = match domain {
            MseDomain::Tower => s,
            MseDomain::Extended => s + t,
        };
        let history = integrate_moments(&self.measure, 0.0, upper, |u, m1, _| {
            self.payment.variance_interval(s - u, s + t - u) * m1
        })?;
        Ok((history + self.future_variance(s, t)?).max(0.0))
    }

    /// `E(M(s, s + t] − E M(s, s + t])² = Var M(s, s + t]`, the error of the
    /// predictor that ignores the history.
    pub fn unconditional_mean_mse(&self, s: f64, t: f64) -> Result<f64> {
        non_negative("observation time", s)?;
        non_negative("lead time", t)?;
        let (m, p) = (&self.measure, &self.payment);
        let v = cov_m(m, p, s + t, 0.0)? + cov_m(m, p, s, 0.0)? - 2.0 * cov_m(m, p, s, t)?;
        Ok(v.max(0.0))
    }
}

/// Closed-form predictor for a Poisson counting directing measure with rate
/// `rate` and payments `μ(0, v] = total (1 − e^{−decay·v})`:
/// `total Σ_j e^{−decay(s − T_j)}(1 − e^{−decay·t}) + rate · total (t − (1 − e^{−decay·t})/decay)`.
pub fn exp_decay_prediction(
    rate: f64,
    total: f64,
    decay: f64,
    s: f64,
    arrivals: &[f64],
    t: f64,
) -> f64 {
    let spread = -libm::expm1(-decay * t);
    let past: f64 = arrivals
        .iter()
        .map(|&tj| total * libm::exp(-decay * (s - tj)) * spread)
        .sum();
    past + rate * total * (t - spread / decay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shot_noise::claims_example;
    use alloc::vec;

    fn claims() -> Predictor {
        let (m, p) = claims_example();
        Predictor::new(m, p).unwrap()
    }

    #[test]
    fn empty_lead_time() {
        let p = claims();
        let h = ObservedHistory::new(2.0, vec![0.5, 1.5], vec![]).unwrap();
        assert_eq!(p.predict(&h, 0.0).unwrap(), 0.0);
        assert_eq!(p.predictive_variance(&h, 0.0).unwrap(), 0.0);
        assert_eq!(p.unconditional_mse(2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn matches_closed_form() {
        let p = claims();
        for (s, arrivals) in [(1.0, vec![]), (3.0, vec![0.2, 0.2, 2.0, 2.9]), (2.0, vec![1.0])] {
            let h = ObservedHistory::new(s, arrivals.clone(), vec![]).unwrap();
            for t in [0.1, 1.0, 2.5] {
                let q = p.predict(&h, t).unwrap();
                let c = exp_decay_prediction(10.0, 5.0, 1.0, s, &arrivals, t);
                assert!((q - c).abs() < 1e-10 * c.max(1.0), "{q} {c}");
            }
        }
    }

    #[test]
    fn poisson_reduction_of_variance() {
        let p = Predictor::new(
            MeasureModel::Deterministic { slope: 2.5 },
            PaymentModel::UnitIndicator,
        )
        .unwrap();
        let h = ObservedHistory::new(1.0, vec![], vec![]).unwrap();
        assert!((p.predictive_variance(&h, 2.0).unwrap() - 5.0).abs() < 1e-12);
        let zero = Predictor::new(MeasureModel::Deterministic { slope: 2.5 }, PaymentModel::Zero)
            .unwrap();
        assert_eq!(zero.predictive_variance(&h, 2.0).unwrap(), 0.0);
        assert_eq!(zero.unconditional_mse(1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn history_helps() {
        let p = claims();
        for s in [1.0, 2.0, 4.0] {
            let with = p.unconditional_mse(s, 1.0).unwrap();
            let without = p.unconditional_mean_mse(s, 1.0).unwrap();
            assert!(with < without, "{s}: {with} vs {without}");
            let extended = p.unconditional_mse_with(s, 1.0, MseDomain::Extended).unwrap();
            assert!(extended > with);
        }
    }

    #[test]
    fn rejects_mixed_poisson() {
        let m = MeasureModel::MixedPoisson {
            intensity: crate::random_measure::MixingDist::two_point(5.0, 15.0),
        };
        assert_eq!(
            Predictor::new(m, PaymentModel::UnitIndicator),
            Err(Error::NonAdditive)
        );
    }
}
