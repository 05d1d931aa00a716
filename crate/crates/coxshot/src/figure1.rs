//! The claims-reserving experiment: one observed shot-noise path on `[0, 5]`,
//! the predictors `M(s) + E[M(s, u] | G_s]` for `s = 1, 2, 3, 4`, and a
//! backtest of their squared error over independent paths.

use std::io::Write;

use coxshot_core::predictor::{ObservedHistory, Predictor};
use coxshot_core::rng::stream;
use coxshot_core::shot_noise::{claims_example, simulate_m, ShotNoisePath};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const HORIZON: f64 = 5.0;
pub const GRID_STEP: f64 = 0.1;
pub const ORIGINS: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
pub const BACKTEST_PATHS: usize = 500;

const OBSERVED_STREAM: u64 = 0;
const BACKTEST_STREAM: u64 = 1 << 32;

/// Predictor from origin `s`, evaluated on the grid points `u > s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorCurve {
    pub s: f64,
    pub observed_count: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Squared prediction error from origin `s`, averaged over the backtest paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestRow {
    pub s: f64,
    /// Mean over paths and over grid points `u ∈ (s, 5]` of `(M(u) − prediction)²`.
    pub mse_path: f64,
    /// Mean over paths of `(M(5) − prediction)²`.
    pub mse_terminal: f64,
    /// `unconditional_mse(s, 5 − s)`.
    pub mse_terminal_exact: f64,
}

#[derive(Debug, Clone)]
pub struct Figure1 {
    pub seed: u64,
    pub observed: ShotNoisePath,
    pub predictors: Vec<PredictorCurve>,
    pub backtest: Vec<BacktestRow>,
}

impl Figure1 {
    /// Both error measures strictly decrease as the origin moves forward.
    pub fn mse_monotone(&self) -> bool {
        self.backtest.windows(2).all(|w| {
            w[1].mse_path < w[0].mse_path && w[1].mse_terminal < w[0].mse_terminal
        })
    }

    /// `time,M`.
    pub fn write_observed<W: Write>(&self, out: W) -> csv::Result<()> {
        crate::io::write_shot_noise(&self.observed, out)
    }

    /// `s,time,prediction`, one row per origin and grid point after it.
    pub fn write_predictors<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "time", "prediction"])?;
        for c in &self.predictors {
            for (u, v) in c.times.iter().zip(&c.values) {
                w.write_record([c.s.to_string(), u.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `s,mse_path,mse_terminal,mse_terminal_exact`.
    pub fn write_backtest<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.backtest {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn grid() -> Vec<f64> {
    let steps = (HORIZON / GRID_STEP).round() as usize;
    (1..=steps).map(|k| k as f64 * GRID_STEP).collect()
}

fn curve(predictor: &Predictor, path: &ShotNoisePath, s: f64) -> coxshot_core::Result<PredictorCurve> {
    let history = ObservedHistory::from_shot_noise(path, s)?;
    let base = path.value_at(s);
    let times: Vec<f64> = path.grid().iter().copied().filter(|&u| u > s + 1e-9).collect();
    let values = times
        .iter()
        .map(|&u| Ok(base + predictor.predict(&history, u - s)?))
        .collect::<coxshot_core::Result<Vec<_>>>()?;
    Ok(PredictorCurve {
        s,
        observed_count: history.count(),
        times,
        values,
    })
}

/// Squared errors `(path-averaged, terminal)` per origin for one path.
fn path_errors(predictor: &Predictor, path: &ShotNoisePath) -> coxshot_core::Result<Vec<(f64, f64)>> {
    ORIGINS
        .iter()
        .map(|&s| {
            let c = curve(predictor, path, s)?;
            let sq: Vec<f64> = c
                .times
                .iter()
                .zip(&c.values)
                .map(|(&u, v)| (path.value_at(u) - v).powi(2))
                .collect();
            let terminal = *sq.last().expect("grid reaches the horizon");
            Ok((sq.iter().sum::<f64>() / sq.len() as f64, terminal))
        })
        .collect()
}

pub fn run_figure1_experiment(seed: u64) -> coxshot_core::Result<Figure1> {
    let (measure, payment) = claims_example();
    let predictor = Predictor::new(measure.clone(), payment.clone())?;
    let observed = simulate_m(&measure, &payment, HORIZON, grid(), &mut stream(seed, OBSERVED_STREAM))?;
    let predictors = ORIGINS
        .iter()
        .map(|&s| curve(&predictor, &observed, s))
        .collect::<coxshot_core::Result<Vec<_>>>()?;

    let errors = (0..BACKTEST_PATHS as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, BACKTEST_STREAM | k);
            let path = simulate_m(&measure, &payment, HORIZON, grid(), &mut rng)?;
            path_errors(&predictor, &path)
        })
        .collect::<coxshot_core::Result<Vec<_>>>()?;
    let n = BACKTEST_PATHS as f64;
    let backtest = ORIGINS
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            Ok(BacktestRow {
                s,
                mse_path: errors.iter().map(|e| e[i].0).sum::<f64>() / n,
                mse_terminal: errors.iter().map(|e| e[i].1).sum::<f64>() / n,
                mse_terminal_exact: predictor.unconditional_mse(s, HORIZON - s)?,
            })
        })
        .collect::<coxshot_core::Result<Vec<_>>>()?;

    Ok(Figure1 {
        seed,
        observed,
        predictors,
        backtest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ends_at_horizon() {
        let g = grid();
        assert_eq!(g.len(), 50);
        assert!((g[49] - HORIZON).abs() < 1e-12);
    }

    #[test]
    fn curves_start_after_origin() {
        let (measure, payment) = claims_example();
        let predictor = Predictor::new(measure.clone(), payment.clone()).unwrap();
        let path = simulate_m(&measure, &payment, HORIZON, grid(), &mut stream(4, 0)).unwrap();
        let c = curve(&predictor, &path, 2.0).unwrap();
        assert_eq!(c.times.len(), 30);
        assert!(c.times[0] > 2.0);
        // The prediction is non-decreasing in the target time.
        assert!(c.values.windows(2).all(|w| w[1] >= w[0]));
    }
}
