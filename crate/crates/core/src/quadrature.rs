//! Numerical integration used by the general-additive and moment formulas.

use alloc::vec::Vec;

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson integration of `f` over `[a, b]` to relative tolerance
/// `rel_tol` (with an absolute floor of `rel_tol * 1e-3`).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Seed with a coarse 8-panel pass so narrow features are not skipped.
    let panels = 8;
    let h = (b - a) / panels as f64;
    let mut coarse = 0.0;
    let mut pieces = Vec::with_capacity(panels);
    for i in 0..panels {
        let lo = a + h * i as f64;
        let hi = if i + 1 == panels { b } else { lo + h };
        let (flo, fhi) = (f(lo), f(hi));
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        coarse += whole.abs();
        pieces.push((lo, hi, flo, fmid, fhi, whole));
    }
    let abs_tol = (rel_tol * coarse).max(rel_tol * 1e-3);
    let per_piece = abs_tol / panels as f64;
    pieces
        .into_iter()
        .map(|(lo, hi, flo, fmid, fhi, whole)| {
            simpson_step(&f, lo, hi, flo, fmid, fhi, whole, per_piece, MAX_DEPTH)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Gauss–Laguerre rule for `∫_0^∞ e^{-z} g(z) dz`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLaguerre {
    /// Nodes and weights for an `n`-point rule, found by Newton iteration on
    /// the Laguerre polynomial `L_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Laguerre needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..n {
            // Initial guesses from the classic asymptotic spacing.
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
                }
            };
            for _ in 0..100 {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 0..n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
                }
                let dp = nf * (p1 - p2) / z;
                let step = p1 / dp;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            // w_i = 1 / (z_i [L_n'(z_i)]^2) for the monic-free normalisation L_n(0) = 1.
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            let dp = nf * (p1 - p2) / z;
            nodes.push(z);
            weights.push(1.0 / (z * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * g(z))
            .sum()
    }

    /// `ln ∫_0^∞ e^{-z} e^{h(z)} dz`, for integrands too large to form directly.
    pub fn ln_integrate<F: Fn(f64) -> f64>(&self, h: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| libm::log(w) + h(z))
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + libm::log(terms.iter().map(|t| libm::exp(t - max)).sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_exponential() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(|x| (-x).exp(), 0.0, 3.0, 1e-12);
        assert!((v - (1.0 - (-3.0f64).exp())).abs() < 1e-12);
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-9), 0.0);
    }

    #[test]
    fn simpson_handles_a_step() {
        let v = adaptive_simpson(|x| if x < 0.3 { 1.0 } else { 2.0 }, 0.0, 1.0, 1e-10);
        assert!((v - 1.7).abs() < 1e-8, "{v}");
    }

    #[test]
    fn laguerre_integrates_gamma_moments() {
        let gl = GaussLaguerre::new(32);
        // ∫ e^{-z} z^k dz = k!
        for k in 0..10 {
            let v = gl.integrate(|z| z.powi(k));
            let exact = crate::math::factorial(k as usize);
            assert!(crate::math::rel_diff(v, exact) < 1e-12, "k={k}: {v} vs {exact}");
        }
        let weights: f64 = gl.weights.iter().sum();
        assert!((weights - 1.0).abs() < 1e-13);
    }
}
