//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

/// `ℓ`-th derivative of `f` at `x` by central differences with step halving
/// and Richardson extrapolation. Returns the tableau entry with the smallest
/// error indicator.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64, order: usize, h0: f64) -> f64 {
    if order == 0 {
        return f(x);
    }
    let stencil = |h: f64| -> f64 {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for k in 0..=order {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * f(x + (order as f64 / 2.0 - k as f64) * h);
            binom = binom * (order - k) as f64 / (k + 1) as f64;
        }
        acc / h.powi(order as i32)
    };
    const ROWS: usize = 8;
    let mut table = [[0.0f64; ROWS]; ROWS];
    let mut best = f64::NAN;
    let mut best_err = f64::INFINITY;
    let mut h = h0;
    for i in 0..ROWS {
        table[i][0] = stencil(h);
        let mut fac = 4.0;
        for j in 1..=i {
            table[i][j] = (fac * table[i][j - 1] - table[i - 1][j - 1]) / (fac - 1.0);
            fac *= 4.0;
            let err = (table[i][j] - table[i][j - 1])
                .abs()
                .max((table[i][j] - table[i - 1][j - 1]).abs());
            if err < best_err {
                best_err = err;
                best = table[i][j];
            }
        }
        h /= 2.0;
    }
    best
}

/// Initial step for [`derivative`] keeping the stencil inside `[0, ∞)`.
pub fn step_within_domain(x: f64, order: usize) -> f64 {
    (1.8 * x / order.max(1) as f64).min(0.4)
}

/// Composite Gauss–Legendre (5-point) on `n` equal panels of `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let mid = a + (i as f64 + 0.5) * h;
            X.iter()
                .zip(W)
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `ln ∫_0^∞ x^{a−1} e^{−b x} dx`-type integrals by quadrature after
/// `x = e^z`, which removes the singularity at 0 for any `a > 0`.
fn gamma_integral(a: f64, b: f64, log_scale: f64) -> f64 {
    let peak = (a / b).ln();
    let lo = peak - 60.0 / a.min(1.0) - 10.0;
    let hi = peak + 5.0 + (60.0 / a.max(1.0)).ln_1p();
    integrate(|z| (log_scale + a * z - b * z.exp()).exp(), lo, hi, 4000)
}

/// `P(N = n)` for a Poisson count mixed over `η ~ Gamma(shape, rate)`, by
/// direct quadrature of `∫ e^{−x} x^n / n! · g(x) dx`.
pub fn gamma_mixture_pmf(shape: f64, rate: f64, n: usize) -> f64 {
    let log_norm = shape * rate.ln() - ln_gamma(shape) - ln_gamma(n as f64 + 1.0);
    gamma_integral(n as f64 + shape, 1.0 + rate, log_norm)
}

/// `E[η^k e^{−u η}]` for `η ~ Gamma(shape, rate)` by quadrature.
pub fn gamma_tilted_moment(shape: f64, rate: f64, k: usize, u: f64) -> f64 {
    let log_norm = shape * rate.ln() - ln_gamma(shape);
    gamma_integral(k as f64 + shape, u + rate, log_norm)
}

pub fn poisson_pmf(mean: f64, n: usize) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-mean + n as f64 * mean.ln() - ln_gamma(n as f64 + 1.0)).exp()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
