mod common;

use common::mean_se;
use coxshot::stats::{ks_p_value, ks_statistic};
use coxshot_core::cox_process::{conditional_points, sample_cox, subordinate};
use coxshot_core::random_measure::{Atom, LevySubordinatorSpec, MeasureModel, MeasurePath, PathOptions};
use coxshot_core::rng::stream;

#[test]
fn deterministic_path() {
    let mut rng = stream(1, 0);
    let path = MeasureModel::Deterministic { slope: 2.0 }
        .sample_path(3.0, &mut rng)
        .unwrap();
    assert!((path.mass(0.0, 3.0) - 6.0).abs() < 1e-12);
    assert!(path.atoms().is_empty());
}

#[test]
fn poisson_total_mass() {
    let model = MeasureModel::PoissonCounting { rate: 10.0 };
    let mut rng = stream(2, 0);
    let totals: Vec<f64> = (0..100_000)
        .map(|_| model.sample_path(5.0, &mut rng).unwrap().total_mass())
        .collect();
    let (mean, se) = mean_se(&totals);
    assert!((mean - 50.0).abs() < 3.0 * se, "{mean} ± {se}");
}

#[test]
fn gamma_moments() {
    let model = MeasureModel::Gamma { shape: 1.0, rate: 1.0 };
    let mut rng = stream(3, 0);
    let opts = PathOptions { knots_per_unit: 16 };
    let x: Vec<f64> = (0..100_000)
        .map(|_| model.sample_path_with(1.0, opts, &mut rng).unwrap().total_mass())
        .collect();
    let (mean, se) = mean_se(&x);
    assert!((mean - 1.0).abs() < 4.0 * se);
    let sq: Vec<f64> = x.iter().map(|v| (v - 1.0).powi(2)).collect();
    let (var, se_var) = mean_se(&sq);
    assert!((var - 1.0).abs() < 4.0 * se_var, "{var} ± {se_var}");
}

#[test]
fn deterministic_unit_slope_gives_poisson_one() {
    let model = MeasureModel::Deterministic { slope: 1.0 };
    let mut rng = stream(4, 0);
    let n = 100_000;
    let zeros = (0..n)
        .filter(|_| {
            let path = model.sample_path(1.0, &mut rng).unwrap();
            sample_cox(path, &mut rng).unwrap().count_to(1.0) == 0
        })
        .count() as f64;
    let p = (-1.0f64).exp();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((zeros / n as f64 - p).abs() < 4.0 * se);
}

#[test]
fn uniform_order_statistics() {
    let path = MeasurePath::deterministic(1.0, 1.0).unwrap();
    let mut rng = stream(5, 0);
    let mins: Vec<f64> = (0..20_000)
        .map(|_| conditional_points(&path, 0.0, 1.0, 2, &mut rng).unwrap().0[0])
        .collect();
    let d = ks_statistic(&mins, |x| 1.0 - (1.0 - x.clamp(0.0, 1.0)).powi(2));
    assert!(ks_p_value(d, mins.len()) > 0.01, "D = {d}");
}

#[test]
fn atoms_and_continuous_mass_mix_correctly() {
    // Half of the mass sits in an atom at 0.25; the rest is uniform on (0, 1].
    let atom = Atom { time: 0.25, mass: 1.0 };
    let grid = coxshot_core::random_measure::ContinuousGrid::from_increments(1.0, &[0.25, 0.25, 0.25, 0.25]).unwrap();
    let path = MeasurePath::new(1.0, 0.0, Some(grid), vec![atom]).unwrap();
    let mut rng = stream(6, 0);
    let n = 40_000;
    let at_atom = (0..n)
        .filter(|_| conditional_points(&path, 0.0, 1.0, 1, &mut rng).unwrap().0[0] == 0.25)
        .count() as f64;
    let se = (0.25 / n as f64).sqrt();
    assert!((at_atom / n as f64 - 0.5).abs() < 4.0 * se);
}

#[test]
fn unit_drift_time_change_is_identity() {
    let mut rng = stream(7, 0);
    let path = MeasureModel::Gamma { shape: 2.0, rate: 1.0 }
        .sample_path_with(2.0, PathOptions { knots_per_unit: 8 }, &mut rng)
        .unwrap();
    let out = subordinate(&LevySubordinatorSpec::unit_drift(), &path, &mut rng).unwrap();
    for k in 1..=16 {
        let t = k as f64 / 8.0;
        assert!((out.value(t) - path.value(t)).abs() < 1e-12);
    }
}
