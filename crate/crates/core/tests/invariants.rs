use coxshot_core::arrival_law::{count_pmf_table, expansion_terms, JointQuery};
use coxshot_core::cox_process::{conditional_points, sample_cox};
use coxshot_core::math::factorial;
use coxshot_core::random_measure::{Atom, ContinuousGrid, JumpDist, MeasureModel, MeasurePath};
use coxshot_core::rng::stream;
use proptest::prelude::*;

fn path_strategy() -> impl Strategy<Value = MeasurePath> {
    (
        prop::collection::vec(0.0f64..2.0, 1..12),
        prop::collection::vec((0.01f64..0.99, 0.1f64..3.0), 0..4),
        0.0f64..1.0,
    )
        .prop_map(|(incs, atoms, drift)| {
            let grid = ContinuousGrid::from_increments(1.0, &incs).unwrap();
            let atoms = atoms
                .into_iter()
                .map(|(time, mass)| Atom { time, mass })
                .collect();
            MeasurePath::new(1.0, drift, Some(grid), atoms).unwrap()
        })
}

proptest! {
    #[test]
    fn path_is_monotone_and_additive(path in path_strategy(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (s, t) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(path.value(s) <= path.value(t) + 1e-12);
        prop_assert!((path.mass(s, t) - (path.value(t) - path.value(s))).abs() < 1e-9);
        prop_assert!(path.left_limit(t) <= path.value(t) + 1e-12);
        prop_assert!((path.value(t) - path.left_limit(t) - path.atom_mass(t)).abs() < 1e-9);
    }

    #[test]
    fn inverse_is_a_generalised_inverse(path in path_strategy(), level in 0.0f64..1.0) {
        let total = path.total_mass();
        prop_assume!(total > 0.0);
        let y = level * total;
        let x = path.inverse(y);
        prop_assert!(path.value(x) >= y - 1e-9);
        prop_assert!(path.left_limit(x) <= y + 1e-9);
    }

    #[test]
    fn pieces_account_for_all_mass(path in path_strategy()) {
        use coxshot_core::random_measure::PathPiece;
        let sum: f64 = path
            .pieces()
            .map(|p| match p {
                PathPiece::Continuous { mass, .. } => mass,
                PathPiece::Atom(a) => a.mass,
            })
            .sum();
        prop_assert!((sum - path.total_mass()).abs() < 1e-9);
    }

    #[test]
    fn conditional_points_stay_in_support(path in path_strategy(), n in 0usize..8, seed: u64) {
        let mut rng = stream(seed, 0);
        prop_assume!(path.mass(0.2, 0.8) > 0.0);
        let (pts, ties) = conditional_points(&path, 0.2, 0.8, n, &mut rng).unwrap();
        prop_assert_eq!(pts.len(), n);
        prop_assert_eq!(ties.uniforms.len(), n);
        prop_assert!(pts.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(pts.iter().all(|&x| x > 0.2 && x <= 0.8));
        for &x in &pts {
            prop_assert!(path.mass(x - 1e-6, x) > 0.0 || path.atom_mass(x) > 0.0);
        }
    }

    #[test]
    fn expansion_coefficients_sum_to_factorial(mut th in prop::collection::vec(0.0f64..1.0, 1..8)) {
        th.sort_by(f64::total_cmp);
        let q = JointQuery::new(th, 1.0).unwrap();
        let total: u64 = expansion_terms(&q).unwrap().iter().map(|t| t.coefficient).sum();
        prop_assert_eq!(total as f64, factorial(q.n()));
    }

    #[test]
    fn cox_counts_match_arrivals(seed: u64) {
        let mut rng = stream(seed, 1);
        let path = MeasureModel::CompoundPoisson { rate: 3.0, jumps: JumpDist::Exponential { rate: 0.5 } }
            .sample_path(2.0, &mut rng)
            .unwrap();
        let cox = sample_cox(path, &mut rng).unwrap();
        prop_assert_eq!(cox.count_to(2.0), cox.arrivals().len());
        let mult: usize = cox.multiplicities().iter().map(|m| m.1).sum();
        prop_assert_eq!(mult, cox.arrivals().len());
    }
}

#[test]
fn long_pmf_tables_stay_finite() {
    // Mean count 50: the table runs past the orders where the raw cumulants overflow.
    for model in [
        MeasureModel::Gamma { shape: 1.0, rate: 0.02 },
        MeasureModel::CompoundPoisson {
            rate: 5.0,
            jumps: JumpDist::Exponential { rate: 0.05 },
        },
        MeasureModel::PoissonCounting { rate: 400.0 },
    ] {
        let table = count_pmf_table(&model, 0.0, 1.0, 1e-10).unwrap();
        assert!(table.iter().all(|p| p.is_finite()), "{model:?}");
        let total: f64 = table.iter().sum();
        assert!((total - 1.0).abs() < 1e-8, "{model:?}: {total} over {} terms", table.len());
    }
}
