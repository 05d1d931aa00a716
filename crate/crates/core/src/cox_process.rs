//! The Cox process `N` given a realized directing path.
//!
//! Given `η`, `N(s, t] ~ Poisson(η(s, t])` independently over disjoint
//! intervals, and given `N(a, b] = n` the points are `n` iid draws from
//! `η(dx)/η(a, b]`. Atoms of `η` produce tied arrivals; ties are ordered by
//!
//! ```text
//! H(U, y) = η(a, y−)/η(a, b] + U · η({y})/η(a, b]
//! ```
//!
//! with an auxiliary uniform `U` per point, where `η(a, y−) = η(y−) − η(a)`.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::Distribution;

use crate::error::check_interval;
use crate::random_measure::{
    Atom, ContinuousGrid, LevyMeasure, LevySubordinatorSpec, MeasurePath, PathOptions, PathPiece,
};
use crate::rng::open01;
use crate::{Error, Result};

/// Arrival times `T_1 ≤ T_2 ≤ …` in `(0, horizon]` with the path that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct CoxRealization {
    path: MeasurePath,
    arrivals: Vec<f64>,
}

impl CoxRealization {
    /// `arrivals` must be sorted and lie in `(0, horizon]`.
    pub fn new(path: MeasurePath, arrivals: Vec<f64>) -> Result<Self> {
        let h = path.horizon();
        if arrivals.iter().any(|&t| !(t > 0.0 && t <= h)) {
            return Err(Error::InvalidPath(alloc::format!(
                "arrivals must lie in (0, {h}]"
            )));
        }
        if arrivals.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidPath("arrivals must be sorted".into()));
        }
        Ok(Self { path, arrivals })
    }

    pub fn path(&self) -> &MeasurePath {
        &self.path
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn horizon(&self) -> f64 {
        self.path.horizon()
    }

    /// `N(t)`.
    pub fn count_to(&self, t: f64) -> usize {
        self.arrivals.partition_point(|&x| x <= t)
    }

    /// `N(s, t] = #{j : s < T_j ≤ t}`.
    pub fn count(&self, s: f64, t: f64) -> usize {
        self.count_to(t).saturating_sub(self.count_to(s))
    }

    /// Distinct arrival times with their multiplicities.
    pub fn multiplicities(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &t in &self.arrivals {
            match out.last_mut() {
                Some((last, k)) if *last == t => *k += 1,
                _ => out.push((t, 1)),
            }
        }
        out
    }

    pub fn into_parts(self) -> (MeasurePath, Vec<f64>) {
        (self.path, self.arrivals)
    }
}

/// Auxiliary uniforms `U_j` and ranks `H(U_j, T_j)` of the sorted points.
#[derive(Debug, Clone, PartialEq)]
pub struct TieBreakRecord {
    pub uniforms: Vec<f64>,
    pub ranks: Vec<f64>,
}

/// `n` points from `η(dx)/η(a, b]` in the order given by `H`.
pub fn conditional_points<R: Rng + ?Sized>(
    path: &MeasurePath,
    a: f64,
    b: f64,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, TieBreakRecord)> {
    check_interval(a, b)?;
    if b > path.horizon() {
        return Err(Error::InvalidInterval { start: a, end: b });
    }
    let base = path.value(a);
    let total = path.mass(a, b);
    if n > 0 && total <= 0.0 {
        return Err(Error::ZeroMass { n, start: a, end: b });
    }
    let mut draws: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            // Rounding can put the inverse on `a` itself, which carries no mass.
            let y = loop {
                let y = path.inverse(base + open01(rng) * total).min(b);
                if y > a {
                    break y;
                }
            };
            let u = open01(rng);
            let h = ((path.left_limit(y) - base).max(0.0) + u * path.atom_mass(y)) / total;
            (y, u, h)
        })
        .collect();
    draws.sort_by(|p, q| p.2.total_cmp(&q.2).then(p.0.total_cmp(&q.0)));
    let times = draws.iter().map(|d| d.0).collect();
    let record = TieBreakRecord {
        uniforms: draws.iter().map(|d| d.1).collect(),
        ranks: draws.iter().map(|d| d.2).collect(),
    };
    Ok((times, record))
}

/// Conditional Poisson sampling of `N` on `(0, horizon]` given `path`.
pub fn sample_cox<R: Rng + ?Sized>(path: MeasurePath, rng: &mut R) -> Result<CoxRealization> {
    let total = path.total_mass();
    let n = crate::random_measure::poisson_count(rng, total);
    let arrivals = if n == 0 {
        Vec::new()
    } else {
        conditional_points(&path, 0.0, path.horizon(), n, rng)?.0
    };
    CoxRealization::new(path, arrivals)
}

/// Increment of the outer subordinator over a time-change length `len`,
/// split into its continuous part and its jumps.
fn outer_increment<R: Rng + ?Sized>(
    outer: &LevySubordinatorSpec,
    len: f64,
    rng: &mut R,
) -> (f64, Vec<f64>) {
    let drift = outer.drift * len;
    match &outer.levy {
        None => (drift, Vec::new()),
        Some(LevyMeasure::FiniteActivity { rate, jumps }) => {
            let k = crate::random_measure::poisson_count(rng, rate * len);
            (drift, (0..k).map(|_| jumps.sample(rng)).collect())
        }
        Some(LevyMeasure::Gamma { shape, rate }) => {
            let g = if len > 0.0 {
                rand_distr::Gamma::new(shape * len, 1.0 / rate)
                    .expect("validated gamma")
                    .sample(rng)
            } else {
                0.0
            };
            (drift + g, Vec::new())
        }
    }
}

/// `t ↦ L(η(t))` at the default resolution.
pub fn subordinate<R: Rng + ?Sized>(
    outer: &LevySubordinatorSpec,
    path: &MeasurePath,
    rng: &mut R,
) -> Result<MeasurePath> {
    subordinate_with(outer, path, PathOptions::default(), rng)
}

/// `t ↦ L(η(t))` for an independent subordinator `L`.
///
/// Over a linear piece of `η` carrying mass `m`, `L` advances by an
/// increment over a length-`m` stretch of its own clock: drift and Gamma
/// parts stay continuous, finite-activity jumps become atoms at uniform
/// times in the piece. An atom of `η` of mass `m` turns into a single atom
/// carrying the whole increment of `L` over length `m`. Gamma-type `L` is
/// resolved on sub-cells of width at most `1/knots_per_unit`.
pub fn subordinate_with<R: Rng + ?Sized>(
    outer: &LevySubordinatorSpec,
    path: &MeasurePath,
    options: PathOptions,
    rng: &mut R,
) -> Result<MeasurePath> {
    outer.validate()?;
    let horizon = path.horizon();
    let subdivide = matches!(outer.levy, Some(LevyMeasure::Gamma { .. }));
    let mut knots = alloc::vec![0.0];
    let mut cumulative = alloc::vec![0.0];
    let mut atoms = Vec::new();
    let mut acc = 0.0;
    for piece in path.pieces() {
        match piece {
            PathPiece::Continuous { start, end, mass } => {
                let cells = if subdivide {
                    (libm::ceil((end - start) * options.knots_per_unit as f64) as usize).max(1)
                } else {
                    1
                };
                let width = (end - start) / cells as f64;
                for c in 0..cells {
                    let lo = start + c as f64 * width;
                    let hi = if c + 1 == cells { end } else { lo + width };
                    let (cont, jumps) = outer_increment(outer, mass / cells as f64, rng);
                    for size in jumps {
                        let time = lo + (hi - lo) * open01(rng);
                        atoms.push(Atom { time, mass: size });
                    }
                    acc += cont;
                    knots.push(hi);
                    cumulative.push(acc);
                }
            }
            PathPiece::Atom(a) => {
                let (cont, jumps) = outer_increment(outer, a.mass, rng);
                let mass = cont + jumps.iter().sum::<f64>();
                if mass > 0.0 {
                    atoms.push(Atom { time: a.time, mass });
                }
            }
        }
    }
    let grid = ContinuousGrid::new(knots, cumulative)?;
    MeasurePath::new(horizon, 0.0, Some(grid), atoms)
}
