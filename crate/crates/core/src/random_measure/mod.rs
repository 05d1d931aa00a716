//! Directing random measures `η`: parametric models, realized paths and the
//! Laplace calculus of their increments.
//!
//! Every additive model here has a product-form jump measure
//! `ρ(d(u, y)) = rate(u) du × jumps(dy)` (Gamma being the one
//! infinite-activity case) plus an optional linear drift. Two moment
//! densities summarise what the shot-noise formulas need:
//! `E η(du) = m1(u) du` and `Var` contributions `m2(u) du = ∫ y² ρ(du, dy)`.

mod laplace;
mod path;
mod sample;

pub use path::{Atom, ContinuousGrid, MeasurePath, PathPiece};
pub use sample::PathOptions;
pub(crate) use sample::poisson_count;

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{non_negative, positive};
use crate::quadrature::{adaptive_simpson, GaussLaguerre};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

const RATE_QUAD_TOL: f64 = 1e-9;
const LAGUERRE_NODES: usize = 32;

/// Law of a single jump size `J > 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum JumpDist {
    Constant { size: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    /// Density `shape · scale^shape / y^{shape+1}` on `y ≥ scale`; moments of
    /// order `≥ shape` diverge.
    Pareto { scale: f64, shape: f64 },
}

impl JumpDist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            JumpDist::Constant { size } => positive("jump size", size).map(drop),
            JumpDist::Exponential { rate } => positive("jump rate", rate).map(drop),
            JumpDist::Gamma { shape, rate } => {
                positive("jump shape", shape)?;
                positive("jump rate", rate).map(drop)
            }
            JumpDist::Pareto { scale, shape } => {
                positive("jump scale", scale)?;
                positive("jump shape", shape).map(drop)
            }
        }
    }

    /// `E[J^order e^{-u J}]`.
    pub fn tilted_moment(&self, order: usize, u: f64) -> Result<f64> {
        self.ln_tilted_moment(order, u).map(libm::exp)
    }

    /// `ln E[J^order e^{-u J}]`, finite for orders whose moment overflows.
    pub fn ln_tilted_moment(&self, order: usize, u: f64) -> Result<f64> {
        let i = order as f64;
        Ok(match *self {
            JumpDist::Constant { size } => i * libm::log(size) - u * size,
            JumpDist::Exponential { rate } => {
                libm::log(rate) + libm::lgamma(i + 1.0) - (i + 1.0) * libm::log(rate + u)
            }
            JumpDist::Gamma { shape, rate } => {
                shape * libm::log(rate) + libm::lgamma(shape + i)
                    - libm::lgamma(shape)
                    - (shape + i) * libm::log(rate + u)
            }
            JumpDist::Pareto { scale, shape } => {
                if u == 0.0 {
                    if i >= shape {
                        return Err(Error::MomentDivergence { order });
                    }
                    libm::log(shape) + i * libm::log(scale) - libm::log(shape - i)
                } else {
                    // y = scale + z/u maps the tail onto the Laguerre weight e^{-z}.
                    let gl = GaussLaguerre::new(LAGUERRE_NODES);
                    let body = gl.ln_integrate(|z| (i - shape - 1.0) * libm::log(scale + z / u));
                    libm::log(shape) + shape * libm::log(scale) - u * scale - libm::log(u) + body
                }
            }
        })
    }

    /// `E e^{-u J}`.
    pub fn laplace(&self, u: f64) -> Result<f64> {
        self.tilted_moment(0, u)
    }

    pub fn mean(&self) -> Result<f64> {
        self.tilted_moment(1, 0.0)
    }

    pub fn second_moment(&self) -> Result<f64> {
        self.tilted_moment(2, 0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpDist::Constant { size } => size,
            JumpDist::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            JumpDist::Gamma { shape, rate } => rand_distr::Gamma::new(shape, 1.0 / rate)
                .expect("validated gamma")
                .sample(rng),
            JumpDist::Pareto { scale, shape } => {
                scale * libm::pow(crate::rng::open01(rng), -1.0 / shape)
            }
        }
    }
}

/// Non-negative jump-intensity function `rate(u)` on the time axis.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum RateFn {
    Constant { rate: f64 },
    /// `max(0, intercept + slope · u)`.
    Linear { intercept: f64, slope: f64 },
    /// `values[i]` on `[breaks[i], breaks[i+1])`; the last value extends to infinity.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
}

impl RateFn {
    pub fn validate(&self) -> Result<()> {
        match self {
            RateFn::Constant { rate } => non_negative("rate", *rate).map(drop),
            RateFn::Linear { intercept, slope } => {
                non_negative("rate intercept", *intercept)?;
                if slope.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "rate slope",
                        value: *slope,
                        reason: "must be finite",
                    })
                }
            }
            RateFn::Piecewise { breaks, values } => {
                if breaks.is_empty() || breaks.len() != values.len() || breaks[0] != 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "rate breaks",
                        value: breaks.len() as f64,
                        reason: "need one value per break and a first break at 0",
                    });
                }
                if breaks.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidParameter {
                        name: "rate breaks",
                        value: f64::NAN,
                        reason: "breaks must be strictly increasing",
                    });
                }
                values
                    .iter()
                    .try_for_each(|&v| non_negative("rate value", v).map(drop))
            }
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            RateFn::Constant { rate } => *rate,
            RateFn::Linear { intercept, slope } => (intercept + slope * u).max(0.0),
            RateFn::Piecewise { breaks, values } => {
                let idx = breaks.partition_point(|&b| b <= u);
                values[idx.saturating_sub(1)]
            }
        }
    }

    /// Points in `(a, b)` where the function may fail to be smooth.
    fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            RateFn::Constant { .. } => {}
            RateFn::Linear { intercept, slope } => {
                if *slope < 0.0 {
                    let zero = -intercept / slope;
                    if a < zero && zero < b {
                        out.push(zero);
                    }
                }
            }
            RateFn::Piecewise { breaks, .. } => {
                out.extend(breaks.iter().copied().filter(|&x| a < x && x < b));
            }
        }
        out
    }

    /// `∫_a^b rate(u) du`, adaptive Simpson over each smooth piece.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            RateFn::Constant { rate } => rate * (b - a),
            _ => {
                let mut edges = Vec::with_capacity(4);
                edges.push(a);
                edges.extend(self.kinks(a, b));
                edges.push(b);
                edges
                    .windows(2)
                    .map(|w| adaptive_simpson(|u| self.eval(u), w[0], w[1], RATE_QUAD_TOL))
                    .sum()
            }
        }
    }

    /// Supremum of the rate on `[a, b]`.
    pub fn max_on(&self, a: f64, b: f64) -> f64 {
        match self {
            RateFn::Constant { rate } => *rate,
            RateFn::Linear { .. } => self.eval(a).max(self.eval(b)),
            RateFn::Piecewise { breaks, values } => breaks
                .iter()
                .zip(values)
                .enumerate()
                .filter(|(i, (&start, _))| {
                    let end = breaks.get(i + 1).copied().unwrap_or(f64::INFINITY);
                    start <= b && end > a
                })
                .map(|(_, (_, &v))| v)
                .fold(0.0, f64::max),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            RateFn::Constant { .. } => true,
            RateFn::Linear { slope, .. } => *slope == 0.0,
            RateFn::Piecewise { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }
}

/// Product-form jump measure of a general additive directing measure:
/// `ρ(d(u, y)) = rate(u) du × jumps(dy)` on `(0, ∞) × (0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(deny_unknown_fields)
)]
pub struct AdditiveSpec {
    pub rate: RateFn,
    pub jumps: JumpDist,
}

/// Law of the random level `Λ` of a mixed Poisson measure `η(t) = Λ t`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum MixingDist {
    Discrete { values: Vec<f64>, weights: Vec<f64> },
    Gamma { shape: f64, rate: f64 },
}

impl MixingDist {
    /// `{low, high}` with equal probability.
    pub fn two_point(low: f64, high: f64) -> Self {
        MixingDist::Discrete {
            values: alloc::vec![low, high],
            weights: alloc::vec![0.5, 0.5],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MixingDist::Discrete { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return Err(Error::InvalidParameter {
                        name: "mixing values",
                        value: values.len() as f64,
                        reason: "need as many weights as values, at least one",
                    });
                }
                values
                    .iter()
                    .try_for_each(|&v| non_negative("mixing value", v).map(drop))?;
                weights
                    .iter()
                    .try_for_each(|&w| non_negative("mixing weight", w).map(drop))?;
                positive("total mixing weight", weights.iter().sum()).map(drop)
            }
            MixingDist::Gamma { shape, rate } => {
                positive("mixing shape", *shape)?;
                positive("mixing rate", *rate).map(drop)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            MixingDist::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total
            }
            MixingDist::Gamma { shape, rate } => shape / rate,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            MixingDist::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                let m = self.mean();
                values
                    .iter()
                    .zip(weights)
                    .map(|(v, w)| w * (v - m) * (v - m))
                    .sum::<f64>()
                    / total
            }
            MixingDist::Gamma { shape, rate } => shape / (rate * rate),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MixingDist::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                let mut target = rng.random::<f64>() * total;
                for (v, w) in values.iter().zip(weights) {
                    if target < *w {
                        return *v;
                    }
                    target -= w;
                }
                *values.last().expect("validated non-empty")
            }
            MixingDist::Gamma { shape, rate } => rand_distr::Gamma::new(*shape, 1.0 / rate)
                .expect("validated gamma")
                .sample(rng),
        }
    }
}

/// Parametric law of the directing measure `η`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum MeasureModel {
    /// Gamma subordinator: `η(s, t] ~ Γ(shape · (t − s), rate)`.
    Gamma { shape: f64, rate: f64 },
    /// Homogeneous Poisson counting process with intensity `rate` (unit atoms).
    PoissonCounting { rate: f64 },
    /// Compound Poisson subordinator with jump intensity `rate`.
    CompoundPoisson { rate: f64, jumps: JumpDist },
    /// `η(t) = slope · t`; the Cox process is then a homogeneous Poisson process.
    Deterministic { slope: f64 },
    /// `η(t) = Λ t` with random `Λ`. Not additive; kept as a negative control.
    MixedPoisson { intensity: MixingDist },
    /// Finite-activity additive process with time-varying jump intensity.
    GeneralAdditive(AdditiveSpec),
}

impl MeasureModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureModel::Gamma { shape, rate } => {
                positive("gamma shape", *shape)?;
                positive("gamma rate", *rate).map(drop)
            }
            MeasureModel::PoissonCounting { rate } => positive("poisson rate", *rate).map(drop),
            MeasureModel::CompoundPoisson { rate, jumps } => {
                positive("compound rate", *rate)?;
                jumps.validate()
            }
            MeasureModel::Deterministic { slope } => positive("slope", *slope).map(drop),
            MeasureModel::MixedPoisson { intensity } => intensity.validate(),
            MeasureModel::GeneralAdditive(spec) => {
                spec.rate.validate()?;
                spec.jumps.validate()
            }
        }
    }

    /// Independent increments.
    pub fn is_additive(&self) -> bool {
        !matches!(self, MeasureModel::MixedPoisson { .. })
    }

    /// Stationary independent increments.
    pub fn is_subordinator(&self) -> bool {
        match self {
            MeasureModel::MixedPoisson { .. } => false,
            MeasureModel::GeneralAdditive(spec) => spec.rate.is_constant(),
            _ => true,
        }
    }

    pub(crate) fn require_additive(&self) -> Result<()> {
        if self.is_additive() {
            Ok(())
        } else {
            Err(Error::NonAdditive)
        }
    }

    /// `m1(u)`: density of `E η(du)`.
    pub fn first_moment_density(&self, u: f64) -> Result<f64> {
        self.require_additive()?;
        Ok(match self {
            MeasureModel::Gamma { shape, rate } => shape / rate,
            MeasureModel::PoissonCounting { rate } => *rate,
            MeasureModel::CompoundPoisson { rate, jumps } => rate * jumps.mean()?,
            MeasureModel::Deterministic { slope } => *slope,
            MeasureModel::GeneralAdditive(spec) => spec.rate.eval(u) * spec.jumps.mean()?,
            MeasureModel::MixedPoisson { .. } => unreachable!(),
        })
    }

    /// `m2(u)`: density of `∫ y² ρ(du, dy)`, i.e. of `Var η(du)`.
    pub fn second_moment_density(&self, u: f64) -> Result<f64> {
        self.require_additive()?;
        Ok(match self {
            MeasureModel::Gamma { shape, rate } => shape / (rate * rate),
            MeasureModel::PoissonCounting { rate } => *rate,
            MeasureModel::CompoundPoisson { rate, jumps } => rate * jumps.second_moment()?,
            MeasureModel::Deterministic { .. } => 0.0,
            MeasureModel::GeneralAdditive(spec) => {
                spec.rate.eval(u) * spec.jumps.second_moment()?
            }
            MeasureModel::MixedPoisson { .. } => unreachable!(),
        })
    }

    /// Whether `m1`, `m2` are constant in time.
    pub(crate) fn homogeneous_moments(&self) -> bool {
        match self {
            MeasureModel::GeneralAdditive(spec) => spec.rate.is_constant(),
            _ => true,
        }
    }

    /// Breakpoints of the moment densities inside `(a, b)`.
    pub(crate) fn moment_kinks(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            MeasureModel::GeneralAdditive(spec) => spec.rate.kinks(a, b),
            _ => Vec::new(),
        }
    }

    /// `E η(s, t]`; defined for the mixed Poisson control as well.
    pub fn mean_increment(&self, s: f64, t: f64) -> Result<f64> {
        crate::error::check_interval(s, t)?;
        let d = t - s;
        Ok(match self {
            MeasureModel::MixedPoisson { intensity } => intensity.mean() * d,
            MeasureModel::GeneralAdditive(spec) => spec.rate.integral(s, t) * spec.jumps.mean()?,
            _ => self.first_moment_density(s)? * d,
        })
    }

    /// `Var η(s, t]`; defined for the mixed Poisson control as well.
    pub fn variance_increment(&self, s: f64, t: f64) -> Result<f64> {
        crate::error::check_interval(s, t)?;
        let d = t - s;
        Ok(match self {
            MeasureModel::MixedPoisson { intensity } => intensity.variance() * d * d,
            MeasureModel::GeneralAdditive(spec) => {
                spec.rate.integral(s, t) * spec.jumps.second_moment()?
            }
            _ => self.second_moment_density(s)? * d,
        })
    }
}

/// Lévy measure of an outer subordinator used for time changes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum LevyMeasure {
    /// `ν = rate × jumps`.
    FiniteActivity { rate: f64, jumps: JumpDist },
    /// `ν(dv) = shape v^{-1} e^{-rate v} dv`.
    Gamma { shape: f64, rate: f64 },
}

/// A subordinator given by its drift and Lévy measure, with Laplace exponent
/// `Φ(x) = drift · x + ∫ (1 − e^{-x v}) ν(dv)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(deny_unknown_fields)
)]
pub struct LevySubordinatorSpec {
    pub drift: f64,
    pub levy: Option<LevyMeasure>,
}

impl LevySubordinatorSpec {
    /// `L(t) = t`.
    pub fn unit_drift() -> Self {
        Self {
            drift: 1.0,
            levy: None,
        }
    }

    /// Poisson counting process with intensity `rate`.
    pub fn poisson(rate: f64) -> Self {
        Self {
            drift: 0.0,
            levy: Some(LevyMeasure::FiniteActivity {
                rate,
                jumps: JumpDist::Constant { size: 1.0 },
            }),
        }
    }

    pub fn gamma(shape: f64, rate: f64) -> Self {
        Self {
            drift: 0.0,
            levy: Some(LevyMeasure::Gamma { shape, rate }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("subordinator drift", self.drift)?;
        match &self.levy {
            None => {
                if self.drift == 0.0 {
                    Err(Error::InvalidParameter {
                        name: "subordinator drift",
                        value: 0.0,
                        reason: "a subordinator without jumps needs a positive drift",
                    })
                } else {
                    Ok(())
                }
            }
            Some(LevyMeasure::FiniteActivity { rate, jumps }) => {
                positive("levy rate", *rate)?;
                jumps.validate()
            }
            Some(LevyMeasure::Gamma { shape, rate }) => {
                positive("levy shape", *shape)?;
                positive("levy rate", *rate).map(drop)
            }
        }
    }

    /// Laplace exponent `Φ(x)` with `E e^{-x L(t)} = e^{-t Φ(x)}`.
    pub fn laplace_exponent(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::NegativeArgument(x));
        }
        let jump_part = match &self.levy {
            None => 0.0,
            Some(LevyMeasure::FiniteActivity { rate, jumps }) => rate * (1.0 - jumps.laplace(x)?),
            Some(LevyMeasure::Gamma { shape, rate }) => shape * libm::log1p(x / rate),
        };
        Ok(self.drift * x + jump_part)
    }
}
