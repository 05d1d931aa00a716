//! The shot-noise process `M(u) = Σ_{j ≤ N(u)} L_j(u − T_j)` driven by a Cox
//! process, with iid payment processes `L_j` independent of `(N, η)`.
//!
//! With `m1`, `m2` the moment densities of `η` and `μ`, `σ²` the mean and
//! variance functions of `L`,
//!
//! ```text
//! E M(t)              = ∫_0^t μ(t − u) m1(u) du
//! Cov(M(s), M(s + t)) = ∫_0^s [σ²(s − u) m1(u) + μ(s − u) μ(s + t − u) (m1(u) + m2(u))] du
//! ```

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::cox_process::{sample_cox, CoxRealization};
use crate::error::{check_horizon, non_negative, positive};
use crate::quadrature::adaptive_simpson;
use crate::random_measure::{MeasureModel, PathOptions, RateFn};
use crate::rng::open01;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

pub(crate) const MOMENT_QUAD_TOL: f64 = 1e-12;

/// Law of the generic payment process `L`, with `L(u) = 0` for `u < 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum PaymentModel {
    /// `L ≡ 0`.
    Zero,
    /// `L(u) = 1` for `u ≥ 0`: every arrival contributes one unit at birth.
    UnitIndicator,
    /// Poisson process with mean function `μ(0, t] = total · (1 − e^{−decay·t})`.
    ExpDecayPoisson { total: f64, decay: f64 },
    /// Poisson process with intensity `intensity(u)`, sampled by thinning
    /// against `dominating_rate`.
    IntensityPoisson {
        intensity: RateFn,
        dominating_rate: f64,
    },
}

impl PaymentModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            PaymentModel::Zero | PaymentModel::UnitIndicator => Ok(()),
            PaymentModel::ExpDecayPoisson { total, decay } => {
                positive("payment total", *total)?;
                positive("payment decay", *decay).map(drop)
            }
            PaymentModel::IntensityPoisson {
                intensity,
                dominating_rate,
            } => {
                intensity.validate()?;
                non_negative("dominating rate", *dominating_rate).map(drop)
            }
        }
    }

    fn is_poisson(&self) -> bool {
        matches!(
            self,
            PaymentModel::ExpDecayPoisson { .. } | PaymentModel::IntensityPoisson { .. }
        )
    }

    /// `μ(v) = E L(v)`.
    pub fn mean(&self, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        match self {
            PaymentModel::Zero => 0.0,
            PaymentModel::UnitIndicator => 1.0,
            PaymentModel::ExpDecayPoisson { total, decay } => -total * libm::expm1(-decay * v),
            PaymentModel::IntensityPoisson { intensity, .. } => {
                if v == 0.0 {
                    0.0
                } else {
                    intensity.integral(0.0, v)
                }
            }
        }
    }

    /// `μ(a, b] = μ(b) − μ(a)`.
    pub fn mean_interval(&self, a: f64, b: f64) -> f64 {
        match self {
            PaymentModel::ExpDecayPoisson { total, decay } => {
                let (a, b) = (a.max(0.0), b.max(0.0));
                total * (libm::exp(-decay * a) - libm::exp(-decay * b))
            }
            _ => self.mean(b) - self.mean(a),
        }
    }

    /// `σ²(v) = Var L(v)`.
    pub fn variance(&self, v: f64) -> f64 {
        if self.is_poisson() {
            self.mean(v)
        } else {
            0.0
        }
    }

    /// `σ²(a, b] = Var(L(b) − L(a))`.
    pub fn variance_interval(&self, a: f64, b: f64) -> f64 {
        if self.is_poisson() {
            self.mean_interval(a, b)
        } else {
            0.0
        }
    }

    /// A path of `L` on `[0, horizon]`.
    pub fn sample<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Result<PaymentPath> {
        let jump_times = match self {
            PaymentModel::Zero => Vec::new(),
            PaymentModel::UnitIndicator => alloc::vec![0.0],
            PaymentModel::ExpDecayPoisson { total, decay } => {
                // Unit-rate arrivals Γ_k mapped through μ^{-1}(x) = −ln(1 − x/total)/decay.
                let cap = self.mean(horizon);
                let mut out = Vec::new();
                let mut level = 0.0;
                loop {
                    let e: f64 = Exp1.sample(rng);
                    level += e;
                    if level >= cap {
                        break;
                    }
                    out.push((-libm::log1p(-level / total) / decay).min(horizon));
                }
                out
            }
            PaymentModel::IntensityPoisson {
                intensity,
                dominating_rate,
            } => {
                let peak = intensity.max_on(0.0, horizon);
                if peak > *dominating_rate {
                    return Err(Error::InvalidParameter {
                        name: "dominating rate",
                        value: *dominating_rate,
                        reason: "below the payment intensity on the horizon",
                    });
                }
                let mut out = Vec::new();
                let mut time = 0.0;
                if *dominating_rate > 0.0 {
                    loop {
                        let e: f64 = Exp1.sample(rng);
                        time += e / dominating_rate;
                        if time > horizon {
                            break;
                        }
                        if open01(rng) * dominating_rate < intensity.eval(time) {
                            out.push(time);
                        }
                    }
                }
                out
            }
        };
        Ok(PaymentPath { jump_times })
    }
}

/// A counting path of `L`: unit jumps at `jump_times` (sorted, `≥ 0`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PaymentPath {
    pub jump_times: Vec<f64>,
}

impl PaymentPath {
    /// `L(v)`, zero for `v < 0`.
    pub fn value(&self, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        self.jump_times.partition_point(|&x| x <= v) as f64
    }

    /// The path stopped at `v`.
    pub fn truncated(&self, v: f64) -> PaymentPath {
        PaymentPath {
            jump_times: self.jump_times.iter().copied().filter(|&x| x <= v).collect(),
        }
    }
}

/// A simulated shot-noise path; `M` is evaluated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotNoisePath {
    cox: CoxRealization,
    payments: Vec<PaymentPath>,
    grid: Vec<f64>,
}

impl ShotNoisePath {
    pub fn cox(&self) -> &CoxRealization {
        &self.cox
    }

    pub fn arrivals(&self) -> &[f64] {
        self.cox.arrivals()
    }

    /// `L_j`, in arrival order.
    pub fn payments(&self) -> &[PaymentPath] {
        &self.payments
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.cox.horizon()
    }

    /// `M(u)`.
    pub fn value_at(&self, u: f64) -> f64 {
        self.arrivals()
            .iter()
            .zip(&self.payments)
            .take_while(|(&t, _)| t <= u)
            .map(|(&t, l)| l.value(u - t))
            .sum()
    }

    /// `M(s, t] = M(t) − M(s)`.
    pub fn increment(&self, s: f64, t: f64) -> f64 {
        self.value_at(t) - self.value_at(s)
    }

    /// `M` on the grid.
    pub fn values(&self) -> Vec<f64> {
        self.grid.iter().map(|&u| self.value_at(u)).collect()
    }
}

/// Simulates `M` on `[0, horizon]`; `grid` must lie in `(0, horizon]`.
pub fn simulate_m<R: Rng + ?Sized>(
    measure: &MeasureModel,
    payment: &PaymentModel,
    horizon: f64,
    grid: Vec<f64>,
    rng: &mut R,
) -> Result<ShotNoisePath> {
    simulate_m_with(measure, payment, horizon, grid, PathOptions::default(), rng)
}

pub fn simulate_m_with<R: Rng + ?Sized>(
    measure: &MeasureModel,
    payment: &PaymentModel,
    horizon: f64,
    grid: Vec<f64>,
    options: PathOptions,
    rng: &mut R,
) -> Result<ShotNoisePath> {
    check_horizon(horizon)?;
    payment.validate()?;
    if let Some(&bad) = grid.iter().find(|&&u| !(u > 0.0 && u <= horizon)) {
        return Err(Error::InvalidQuery(alloc::format!(
            "grid time {bad} outside (0, {horizon}]"
        )));
    }
    let path = measure.sample_path_with(horizon, options, rng)?;
    let cox = sample_cox(path, rng)?;
    let payments = cox
        .arrivals()
        .iter()
        .map(|&t| payment.sample(horizon - t, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShotNoisePath {
        cox,
        payments,
        grid,
    })
}

/// `∫_a^b f(u, m1(u), m2(u)) du`, split at breakpoints of the moment densities.
pub(crate) fn integrate_moments<F>(measure: &MeasureModel, a: f64, b: f64, f: F) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    if !(b > a) {
        return Ok(0.0);
    }
    if measure.homogeneous_moments() {
        let m1 = measure.first_moment_density(a)?;
        let m2 = measure.second_moment_density(a)?;
        return Ok(adaptive_simpson(|u| f(u, m1, m2), a, b, MOMENT_QUAD_TOL));
    }
    // Surface divergence errors before integrating.
    measure.first_moment_density(a)?;
    measure.second_moment_density(a)?;
    let mut edges = Vec::new();
    edges.push(a);
    edges.extend(measure.moment_kinks(a, b));
    edges.push(b);
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += adaptive_simpson(
            |u| {
                let m1 = measure.first_moment_density(u).unwrap_or(f64::NAN);
                let m2 = measure.second_moment_density(u).unwrap_or(f64::NAN);
                f(u, m1, m2)
            },
            w[0],
            w[1],
            MOMENT_QUAD_TOL,
        );
    }
    Ok(total)
}

/// `E M(t)`.
pub fn mean_m(measure: &MeasureModel, payment: &PaymentModel, t: f64) -> Result<f64> {
    measure.require_additive()?;
    non_negative("time", t)?;
    integrate_moments(measure, 0.0, t, |u, m1, _| payment.mean(t - u) * m1)
}

/// `Cov(M(s), M(s + lag))`.
pub fn cov_m(measure: &MeasureModel, payment: &PaymentModel, s: f64, lag: f64) -> Result<f64> {
    measure.require_additive()?;
    non_negative("time", s)?;
    non_negative("lag", lag)?;
    integrate_moments(measure, 0.0, s, |u, m1, m2| {
        payment.variance(s - u) * m1 + payment.mean(s - u) * payment.mean(s + lag - u) * (m1 + m2)
    })
}

/// The claims-reserving example: Poisson(10) counting directing measure and
/// Poisson payment streams with `μ(0, t] = 5(1 − e^{−t})`.
pub fn claims_example() -> (MeasureModel, PaymentModel) {
    (
        MeasureModel::PoissonCounting { rate: 10.0 },
        PaymentModel::ExpDecayPoisson {
            total: 5.0,
            decay: 1.0,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use alloc::vec;

    #[test]
    fn zero_payments_give_zero_process() {
        let (measure, _) = claims_example();
        let p = simulate_m(&measure, &PaymentModel::Zero, 2.0, vec![0.5, 1.0, 2.0], &mut stream(1, 0))
            .unwrap();
        assert_eq!(p.values(), vec![0.0; 3]);
        assert_eq!(mean_m(&measure, &PaymentModel::Zero, 2.0).unwrap(), 0.0);
        assert_eq!(cov_m(&measure, &PaymentModel::Zero, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_indicator_reproduces_counts() {
        let measure = MeasureModel::PoissonCounting { rate: 4.0 };
        let grid: Vec<f64> = (1..=30).map(|i| i as f64 * 0.1).collect();
        let p = simulate_m(&measure, &PaymentModel::UnitIndicator, 3.0, grid.clone(), &mut stream(2, 0))
            .unwrap();
        for (u, m) in grid.iter().zip(p.values()) {
            assert_eq!(m, p.cox().count_to(*u) as f64);
        }
    }

    #[test]
    fn claims_mean_closed_form() {
        let (measure, payment) = claims_example();
        let m = mean_m(&measure, &payment, 1.0).unwrap();
        assert!((m - 50.0 * (-1.0f64).exp()).abs() < 1e-10, "{m}");
    }

    #[test]
    fn unit_indicator_covariance() {
        let measure = MeasureModel::PoissonCounting { rate: 3.0 };
        let c = cov_m(&measure, &PaymentModel::UnitIndicator, 2.0, 0.5).unwrap();
        assert!((c - 12.0).abs() < 1e-10);
    }

    #[test]
    fn exp_decay_sampler_matches_mean() {
        let payment = PaymentModel::ExpDecayPoisson {
            total: 5.0,
            decay: 1.0,
        };
        let mut rng = stream(3, 0);
        let n = 20_000;
        let total: f64 = (0..n)
            .map(|_| payment.sample(2.0, &mut rng).unwrap().value(2.0))
            .sum();
        let mean = total / n as f64;
        let expect = payment.mean(2.0);
        assert!((mean - expect).abs() < 4.0 * (expect / n as f64).sqrt(), "{mean} {expect}");
    }

    #[test]
    fn thinning_requires_a_dominating_rate() {
        let payment = PaymentModel::IntensityPoisson {
            intensity: RateFn::Linear {
                intercept: 1.0,
                slope: 1.0,
            },
            dominating_rate: 2.0,
        };
        assert!(payment.sample(0.5, &mut stream(4, 0)).is_ok());
        assert!(payment.sample(3.0, &mut stream(4, 0)).is_err());
    }
}
