use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{Atom, ContinuousGrid, MeasureModel, MeasurePath};
use crate::error::check_horizon;
use crate::rng::open01;
use crate::Result;

/// Resolution used for infinite-activity (Gamma) paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    /// Grid cells per unit time; increments are exact Gamma draws at knots.
    pub knots_per_unit: usize,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            knots_per_unit: 1024,
        }
    }
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
    draw as usize
}

/// `n` uniform times on `(0, horizon)`.
fn uniform_times<R: Rng + ?Sized>(rng: &mut R, horizon: f64, n: usize) -> impl Iterator<Item = f64> + '_ {
    (0..n).map(move |_| horizon * open01(rng))
}

impl MeasureModel {
    /// A path on `[0, horizon]` at the default resolution.
    pub fn sample_path<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Result<MeasurePath> {
        self.sample_path_with(horizon, PathOptions::default(), rng)
    }

    pub fn sample_path_with<R: Rng + ?Sized>(
        &self,
        horizon: f64,
        options: PathOptions,
        rng: &mut R,
    ) -> Result<MeasurePath> {
        check_horizon(horizon)?;
        self.validate()?;
        match self {
            MeasureModel::Deterministic { slope } => MeasurePath::deterministic(horizon, *slope),
            MeasureModel::MixedPoisson { intensity } => {
                let level = intensity.sample(rng);
                MeasurePath::deterministic(horizon, level)
            }
            MeasureModel::PoissonCounting { rate } => {
                let n = poisson_count(rng, rate * horizon);
                let atoms = uniform_times(rng, horizon, n)
                    .map(|time| Atom { time, mass: 1.0 })
                    .collect();
                MeasurePath::from_atoms(horizon, atoms)
            }
            MeasureModel::CompoundPoisson { rate, jumps } => {
                let n = poisson_count(rng, rate * horizon);
                let times: Vec<f64> = uniform_times(rng, horizon, n).collect();
                let atoms = times
                    .into_iter()
                    .map(|time| Atom {
                        time,
                        mass: jumps.sample(rng),
                    })
                    .collect();
                MeasurePath::from_atoms(horizon, atoms)
            }
            MeasureModel::GeneralAdditive(spec) => {
                // Thinning against the supremum of the rate on the horizon.
                let dominating = spec.rate.max_on(0.0, horizon);
                let n = poisson_count(rng, dominating * horizon);
                let mut atoms = Vec::new();
                for _ in 0..n {
                    let time = horizon * open01(rng);
                    if rng.random::<f64>() * dominating < spec.rate.eval(time) {
                        atoms.push(Atom {
                            time,
                            mass: spec.jumps.sample(rng),
                        });
                    }
                }
                MeasurePath::from_atoms(horizon, atoms)
            }
            MeasureModel::Gamma { shape, rate } => {
                let cells = (libm::ceil(horizon * options.knots_per_unit as f64) as usize).max(1);
                let width = horizon / cells as f64;
                let increment = rand_distr::Gamma::new(shape * width, 1.0 / rate)
                    .expect("validated gamma");
                let increments: Vec<f64> = (0..cells).map(|_| increment.sample(rng)).collect();
                let grid = ContinuousGrid::from_increments(horizon, &increments)?;
                MeasurePath::new(horizon, 0.0, Some(grid), Vec::new())
            }
        }
    }
}
