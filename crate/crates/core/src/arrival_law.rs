//! Joint laws of unordered arrival points and counts.
//!
//! For the unordered points `T'_1, …, T'_n` of `N` on `(0, t]`,
//!
//! ```text
//! P(T'_1 ≤ t_1, …, T'_n ≤ t_n, N(t) = n) = (1/n!) E[∏_j η(t_j) e^{−η(t)}].
//! ```
//!
//! Writing `η(t_j) = Σ_{i ≤ j} η(Δ_i)` with `Δ_i = (t_{i−1}, t_i]` and
//! expanding the product, each term factorises over the independent
//! increments into tilted moments `E[η(Δ_i)^{k_i} e^{−η(Δ_i)}]` and the tail
//! factor `E e^{−η(t_n, t]}`.

use alloc::vec::Vec;

use crate::error::check_interval;
use crate::math::{factorial, ln_factorial, ln_gamma};
use crate::random_measure::MeasureModel;
use crate::{Error, Result};

/// Largest `n` the expansion is evaluated for.
pub const MAX_JOINT_N: usize = 12;

/// Thresholds `0 < t_1 ≤ … ≤ t_n ≤ t` and the horizon `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointQuery {
    thresholds: Vec<f64>,
    horizon: f64,
}

impl JointQuery {
    pub fn new(thresholds: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::NonPositiveHorizon(horizon));
        }
        if thresholds.first().is_some_and(|&t| !(t > 0.0)) {
            return Err(Error::InvalidQuery("thresholds must be positive".into()));
        }
        if thresholds.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidQuery("thresholds must be non-decreasing".into()));
        }
        if thresholds.last().is_some_and(|&t| t > horizon) {
            return Err(Error::InvalidQuery("thresholds must not exceed the horizon".into()));
        }
        Ok(Self {
            thresholds,
            horizon,
        })
    }

    /// The event `{N(t) = n}` alone: every threshold equals `t`.
    pub fn full(n: usize, horizon: f64) -> Result<Self> {
        Self::new(alloc::vec![horizon; n], horizon)
    }

    pub fn n(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

/// One term `coefficient · ∏_i η(Δ_i)^{k_i}` of the expanded product.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    /// `(k_1, …, k_n)`, summing to `n`.
    pub exponents: Vec<usize>,
    /// Number of ways to pick, for each factor `η(t_j)`, one `Δ_i` with `i ≤ j`
    /// such that `Δ_i` is picked `k_i` times.
    pub coefficient: u64,
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Walks `k_n, k_{n−1}, …, k_1`; factor `η(t_j)` can only pick `Δ_i` with
/// `i ≤ j`, so `Δ_i` has `n + 1 − i − Σ_{l > i} k_l` factors left to choose from.
fn for_each_term<F: FnMut(&[usize], u64)>(empty: &[bool], mut visit: F) {
    let n = empty.len();
    if n == 0 {
        visit(&[], 1);
        return;
    }
    let mut k = alloc::vec![0usize; n];
    fn recurse<F: FnMut(&[usize], u64)>(
        i: usize,
        used: usize,
        coef: u64,
        empty: &[bool],
        k: &mut [usize],
        visit: &mut F,
    ) {
        let n = k.len();
        let avail = n - i - used;
        if i == 0 {
            if empty[0] && avail > 0 {
                return;
            }
            k[0] = avail;
            visit(k, coef);
            return;
        }
        let top = if empty[i] { 0 } else { avail };
        for ki in 0..=top {
            k[i] = ki;
            recurse(i - 1, used + ki, coef * binomial(avail, ki), empty, k, visit);
        }
        k[i] = 0;
    }
    recurse(n - 1, 0, 1, empty, &mut k, &mut visit);
}

/// All terms of the expansion of `∏_j η(t_j)` for the query.
pub fn expansion_terms(q: &JointQuery) -> Result<Vec<ExpansionTerm>> {
    guard(q.n())?;
    let empty = empty_cells(q);
    let mut out = Vec::new();
    for_each_term(&empty, |k, c| {
        out.push(ExpansionTerm {
            exponents: k.to_vec(),
            coefficient: c,
        })
    });
    Ok(out)
}

fn guard(n: usize) -> Result<()> {
    if n > MAX_JOINT_N {
        Err(Error::ExpansionTooLarge {
            n,
            max: MAX_JOINT_N,
        })
    } else {
        Ok(())
    }
}

fn empty_cells(q: &JointQuery) -> Vec<bool> {
    let t = q.thresholds();
    (0..t.len())
        .map(|i| if i == 0 { t[0] <= 0.0 } else { t[i] == t[i - 1] })
        .collect()
}

/// `P(T'_1 ≤ t_1, …, T'_n ≤ t_n, N(t) = n)`.
pub fn joint_prob(model: &MeasureModel, q: &JointQuery) -> Result<f64> {
    model.require_additive()?;
    guard(q.n())?;
    let n = q.n();
    let t = q.thresholds();
    let horizon = q.horizon();
    if n == 0 {
        return model.laplace(0.0, horizon, 1.0);
    }
    let empty = empty_cells(q);
    // moments[i][k] = E[η(Δ_i)^k e^{−η(Δ_i)}], for the largest k the cell can take.
    let mut moments: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        if empty[i] {
            moments.push(alloc::vec![1.0]);
        } else {
            let start = if i == 0 { 0.0 } else { t[i - 1] };
            moments.push(model.tilted_moments(start, t[i], 1.0, n - i)?);
        }
    }
    let tail = if t[n - 1] < horizon {
        model.laplace(t[n - 1], horizon, 1.0)?
    } else {
        1.0
    };
    let mut sum = 0.0;
    for_each_term(&empty, |k, c| {
        let term: f64 = k
            .iter()
            .enumerate()
            .map(|(i, &ki)| moments[i][ki])
            .product();
        sum += c as f64 * term;
    });
    Ok((sum * tail / factorial(n)).clamp(0.0, 1.0))
}

/// `P(N(s, t] = ℓ) = (−1)^ℓ φ^{(ℓ)}(1)/ℓ!` for the increment `η(s, t]`.
pub fn count_pmf(model: &MeasureModel, s: f64, t: f64, count: usize) -> Result<f64> {
    let q = model.scaled_tilted_moments(s, t, 1.0, count)?;
    Ok(q[count].clamp(0.0, 1.0))
}

/// `P(N(s, t] = ℓ)` for `ℓ = 0, 1, …` until the partial sum reaches
/// `1 − tail_tol` (or 4096 terms).
pub fn count_pmf_table(model: &MeasureModel, s: f64, t: f64, tail_tol: f64) -> Result<Vec<f64>> {
    check_interval(s, t)?;
    let mut order = 32;
    loop {
        let q = model.scaled_tilted_moments(s, t, 1.0, order)?;
        let mut acc = 0.0;
        for (l, p) in q.iter().enumerate() {
            acc += p;
            if acc >= 1.0 - tail_tol {
                return Ok(q[..=l].iter().map(|p| p.clamp(0.0, 1.0)).collect());
            }
        }
        if order >= 4096 {
            return Ok(q);
        }
        order *= 2;
    }
}

/// `P(T'_1 ≤ t_1, …, T'_n ≤ t_n | N(t) = n)`.
pub fn conditional_cdf(model: &MeasureModel, q: &JointQuery) -> Result<f64> {
    let pmf = count_pmf(model, 0.0, q.horizon(), q.n())?;
    if pmf <= 0.0 {
        return Err(Error::InvalidQuery("conditioning event has probability 0".into()));
    }
    Ok((joint_prob(model, q)? / pmf).clamp(0.0, 1.0))
}

/// Conditional CDF of the unordered points of a Gamma-directed process:
/// `∏_{k=1}^n (γ t_k + k − 1)/(γ t + k − 1)`, free of the rate.
pub fn gamma_conditional_cdf(shape: f64, q: &JointQuery) -> Result<f64> {
    crate::error::positive("gamma shape", shape)?;
    let t = q.horizon();
    Ok(q.thresholds()
        .iter()
        .enumerate()
        .map(|(k, &tk)| (shape * tk + k as f64) / (shape * t + k as f64))
        .product())
}

/// Joint law for a Gamma(`shape`, `rate`) directing measure: the conditional
/// CDF times `P(N(t) = n) = Γ(γt + n)/(n! Γ(γt)) · λ^{γt}/(1 + λ)^{γt + n}`.
pub fn gamma_joint_prob(shape: f64, rate: f64, q: &JointQuery) -> Result<f64> {
    crate::error::positive("gamma rate", rate)?;
    let cdf = gamma_conditional_cdf(shape, q)?;
    let alpha = shape * q.horizon();
    let n = q.n() as f64;
    let ln_pmf = ln_gamma(alpha + n) - ln_gamma(alpha) - ln_factorial(q.n()) + alpha * libm::log(rate)
        - (alpha + n) * libm::log1p(rate);
    Ok(cdf * libm::exp(ln_pmf))
}
