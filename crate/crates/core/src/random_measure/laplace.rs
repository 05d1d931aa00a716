//! Laplace transforms `φ(u) = E e^{-u η(s,t]}` and their derivatives.
//!
//! With `κ_i(u) = ∫_{(s,t]×ℝ+} y^i e^{-u y} ρ(d(x, y))` (the drift adding to
//! `κ_1`), differentiating `φ' = −κ_1 φ` by the Leibniz rule gives
//!
//! ```text
//! φ^{(ℓ)}(u) = Σ_{i=1}^{ℓ} (−1)^i C(ℓ−1, i−1) κ_i(u) φ^{(ℓ−i)}(u).
//! ```
//!
//! In terms of the non-negative tilted moments `a_ℓ = (−1)^ℓ φ^{(ℓ)}` every
//! term is positive, and dividing by `ℓ!` turns the recursion into
//! `q_ℓ = (1/ℓ) Σ_i κ_i/(i−1)! · q_{ℓ−i}` with `q_ℓ = a_ℓ/ℓ!`, which is what
//! the count probabilities need and stays finite for large `ℓ`.

use alloc::vec::Vec;

use super::MeasureModel;
use crate::error::check_interval;
use crate::math::{factorial, ln_factorial};
use crate::{Error, Result};

impl MeasureModel {
    fn check_laplace_args(&self, s: f64, t: f64, u: f64) -> Result<()> {
        self.require_additive()?;
        check_interval(s, t)?;
        if u < 0.0 || u.is_nan() {
            return Err(Error::NegativeArgument(u));
        }
        Ok(())
    }

    /// `ln E e^{-u η(s,t]}`.
    pub fn log_laplace(&self, s: f64, t: f64, u: f64) -> Result<f64> {
        self.check_laplace_args(s, t, u)?;
        let d = t - s;
        Ok(match self {
            MeasureModel::Gamma { shape, rate } => -shape * d * libm::log1p(u / rate),
            MeasureModel::PoissonCounting { rate } => rate * d * libm::expm1(-u),
            MeasureModel::CompoundPoisson { rate, jumps } => {
                rate * d * (jumps.laplace(u)? - 1.0)
            }
            MeasureModel::Deterministic { slope } => -u * slope * d,
            MeasureModel::GeneralAdditive(spec) => {
                spec.rate.integral(s, t) * (spec.jumps.laplace(u)? - 1.0)
            }
            MeasureModel::MixedPoisson { .. } => unreachable!(),
        })
    }

    /// `φ(u) = E e^{-u η(s,t]}`, in `(0, 1]`.
    pub fn laplace(&self, s: f64, t: f64, u: f64) -> Result<f64> {
        self.log_laplace(s, t, u).map(libm::exp)
    }

    /// `κ_i(u)` for `i = 1..=max_order` (index 0 unused and set to 0).
    pub fn tilted_cumulants(&self, s: f64, t: f64, u: f64, max_order: usize) -> Result<Vec<f64>> {
        Ok(self
            .ln_recursion_weights(s, t, u, max_order)?
            .iter()
            .enumerate()
            .map(|(i, w)| if i == 0 { 0.0 } else { libm::exp(w + ln_factorial(i - 1)) })
            .collect())
    }

    /// `ln(κ_i(u) / (i−1)!)` for `i = 1..=max_order`, `−∞` where `κ_i = 0`.
    /// Working with the ratio keeps high orders finite.
    fn ln_recursion_weights(&self, s: f64, t: f64, u: f64, max_order: usize) -> Result<Vec<f64>> {
        self.check_laplace_args(s, t, u)?;
        let d = t - s;
        let mut out = Vec::with_capacity(max_order + 1);
        out.push(f64::NEG_INFINITY);
        match self {
            MeasureModel::Gamma { shape, rate } => {
                // ∫ y^i e^{-uy} shape y^{-1} e^{-rate y} dy = shape (i-1)! / (rate+u)^i
                let (ln_mass, ln_base) = (libm::log(shape * d), libm::log(rate + u));
                out.extend((1..=max_order).map(|i| ln_mass - i as f64 * ln_base));
            }
            MeasureModel::PoissonCounting { rate } => {
                let ln_k = libm::log(rate * d) - u;
                out.extend((1..=max_order).map(|i| ln_k - ln_factorial(i - 1)));
            }
            MeasureModel::CompoundPoisson { rate, jumps } => {
                let ln_mass = libm::log(rate * d);
                for i in 1..=max_order {
                    out.push(ln_mass + jumps.ln_tilted_moment(i, u)? - ln_factorial(i - 1));
                }
            }
            MeasureModel::Deterministic { slope } => {
                out.extend((1..=max_order).map(|i| {
                    if i == 1 {
                        libm::log(slope * d)
                    } else {
                        f64::NEG_INFINITY
                    }
                }));
            }
            MeasureModel::GeneralAdditive(spec) => {
                let ln_mass = libm::log(spec.rate.integral(s, t));
                for i in 1..=max_order {
                    out.push(ln_mass + spec.jumps.ln_tilted_moment(i, u)? - ln_factorial(i - 1));
                }
            }
            MeasureModel::MixedPoisson { .. } => unreachable!(),
        }
        Ok(out)
    }

    /// `q_ℓ = E[η(s,t]^ℓ e^{-u η(s,t]}] / ℓ!` for `ℓ = 0..=max_order`.
    pub fn scaled_tilted_moments(
        &self,
        s: f64,
        t: f64,
        u: f64,
        max_order: usize,
    ) -> Result<Vec<f64>> {
        let weights: Vec<f64> = self
            .ln_recursion_weights(s, t, u, max_order)?
            .into_iter()
            .map(libm::exp)
            .collect();
        let mut q = Vec::with_capacity(max_order + 1);
        q.push(self.laplace(s, t, u)?);
        for m in 1..=max_order {
            let acc: f64 = (1..=m).map(|i| weights[i] * q[m - i]).sum();
            q.push(acc / m as f64);
        }
        Ok(q)
    }

    /// `a_ℓ = E[η(s,t]^ℓ e^{-u η(s,t]}] = (−1)^ℓ φ^{(ℓ)}(u)` for `ℓ = 0..=max_order`.
    pub fn tilted_moments(&self, s: f64, t: f64, u: f64, max_order: usize) -> Result<Vec<f64>> {
        let q = self.scaled_tilted_moments(s, t, u, max_order)?;
        Ok(q.iter()
            .enumerate()
            .map(|(m, qm)| qm * factorial(m))
            .collect())
    }

    /// `φ^{(order)}(u)`, the derivative of the Laplace transform of `η(s,t]`.
    pub fn laplace_derivative(&self, s: f64, t: f64, order: usize, u: f64) -> Result<f64> {
        let a = self.tilted_moments(s, t, u, order)?;
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * a[order])
    }
}
