use alloc::format;
use alloc::vec::Vec;

use crate::error::check_horizon;
use crate::{Error, Result};

/// A point mass of the directing measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub time: f64,
    pub mass: f64,
}

/// Continuous part of a path given by its accumulated mass at knots, linear
/// in between.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousGrid {
    knots: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ContinuousGrid {
    /// `knots` must start at 0 and increase strictly; `cumulative` must start
    /// at 0 and be non-decreasing.
    pub fn new(knots: Vec<f64>, cumulative: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != cumulative.len() {
            return Err(Error::InvalidPath(format!(
                "grid needs >= 2 knots with matching masses, got {} and {}",
                knots.len(),
                cumulative.len()
            )));
        }
        if knots[0] != 0.0 || cumulative[0] != 0.0 {
            return Err(Error::InvalidPath("grid must start at (0, 0)".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1]) || !w[1].is_finite()) {
            return Err(Error::InvalidPath("grid knots must increase strictly".into()));
        }
        if cumulative.windows(2).any(|w| !(w[0] <= w[1]) || !w[1].is_finite()) {
            return Err(Error::InvalidPath("grid mass must be non-decreasing".into()));
        }
        Ok(Self { knots, cumulative })
    }

    /// From per-cell increments on an equally spaced grid over `[0, horizon]`.
    pub fn from_increments(horizon: f64, increments: &[f64]) -> Result<Self> {
        let cells = increments.len();
        let mut knots = Vec::with_capacity(cells + 1);
        let mut cumulative = Vec::with_capacity(cells + 1);
        knots.push(0.0);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for (i, inc) in increments.iter().enumerate() {
            acc += inc;
            knots.push(if i + 1 == cells {
                horizon
            } else {
                horizon * (i + 1) as f64 / cells as f64
            });
            cumulative.push(acc);
        }
        Self::new(knots, cumulative)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    fn at(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|&k| k <= t);
        if idx == 0 {
            return 0.0;
        }
        let i = idx - 1;
        if i + 1 >= self.knots.len() {
            return *self.cumulative.last().expect("non-empty");
        }
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let (m0, m1) = (self.cumulative[i], self.cumulative[i + 1]);
        m0 + (m1 - m0) * (t - t0) / (t1 - t0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Breakpoint {
    time: f64,
    /// `η(time−)`
    left: f64,
    /// `η(time)`
    right: f64,
}

/// One piece of a path between consecutive breakpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathPiece {
    /// Mass spread linearly over `(start, end)`.
    Continuous { start: f64, end: f64, mass: f64 },
    Atom(Atom),
}

/// A realized non-decreasing càdlàg path of `η` on `[0, horizon]`.
///
/// `η(t) = drift_slope · t + grid(t) + Σ_{atoms ≤ t} mass`. Between
/// consecutive breakpoints (knots and atom times) the path is linear, which is
/// what the inverse-transform sampler relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePath {
    horizon: f64,
    drift_slope: f64,
    grid: Option<ContinuousGrid>,
    atoms: Vec<Atom>,
    breakpoints: Vec<Breakpoint>,
}

impl MeasurePath {
    /// Atoms may come unsorted; atoms sharing a time are merged.
    pub fn new(
        horizon: f64,
        drift_slope: f64,
        grid: Option<ContinuousGrid>,
        mut atoms: Vec<Atom>,
    ) -> Result<Self> {
        check_horizon(horizon)?;
        if !(drift_slope.is_finite() && drift_slope >= 0.0) {
            return Err(Error::InvalidPath(format!("negative drift slope {drift_slope}")));
        }
        if let Some(g) = &grid {
            let end = *g.knots.last().expect("validated grid");
            if end != horizon {
                return Err(Error::InvalidPath(format!(
                    "grid ends at {end}, horizon is {horizon}"
                )));
            }
        }
        for a in &atoms {
            if !(a.time > 0.0 && a.time <= horizon) {
                return Err(Error::InvalidPath(format!("atom at {} outside (0, {horizon}]", a.time)));
            }
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return Err(Error::InvalidPath(format!("atom mass {} must be positive", a.mass)));
            }
        }
        atoms.sort_by(|a, b| a.time.total_cmp(&b.time));
        atoms.dedup_by(|later, earlier| {
            if later.time == earlier.time {
                earlier.mass += later.mass;
                true
            } else {
                false
            }
        });

        let mut times: Vec<f64> = Vec::with_capacity(atoms.len() + 2);
        times.push(0.0);
        match &grid {
            Some(g) => times.extend_from_slice(&g.knots[1..]),
            None => times.push(horizon),
        }
        let mut merged = Vec::with_capacity(times.len() + atoms.len());
        {
            let (mut i, mut j) = (0, 0);
            while i < times.len() || j < atoms.len() {
                let next = match (times.get(i), atoms.get(j)) {
                    (Some(&t), Some(a)) if t <= a.time => {
                        i += 1;
                        t
                    }
                    (_, Some(a)) => {
                        j += 1;
                        a.time
                    }
                    (Some(&t), None) => {
                        i += 1;
                        t
                    }
                    (None, None) => unreachable!(),
                };
                if merged.last() != Some(&next) {
                    merged.push(next);
                }
            }
        }

        let mut breakpoints = Vec::with_capacity(merged.len());
        let mut atom_acc = 0.0;
        let mut j = 0;
        for &time in &merged {
            let continuous = drift_slope * time + grid.as_ref().map_or(0.0, |g| g.at(time));
            let left = continuous + atom_acc;
            if j < atoms.len() && atoms[j].time == time {
                atom_acc += atoms[j].mass;
                j += 1;
            }
            breakpoints.push(Breakpoint {
                time,
                left,
                right: continuous + atom_acc,
            });
        }

        Ok(Self {
            horizon,
            drift_slope,
            grid,
            atoms,
            breakpoints,
        })
    }

    /// `η(t) = slope · t`.
    pub fn deterministic(horizon: f64, slope: f64) -> Result<Self> {
        Self::new(horizon, slope, None, Vec::new())
    }

    /// A pure-atom path.
    pub fn from_atoms(horizon: f64, atoms: Vec<Atom>) -> Result<Self> {
        Self::new(horizon, 0.0, None, atoms)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn drift_slope(&self) -> f64 {
        self.drift_slope
    }

    pub fn grid(&self) -> Option<&ContinuousGrid> {
        self.grid.as_ref()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `η(t)`, clamped to `[0, η(horizon)]` outside `[0, horizon]`.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let idx = self.breakpoints.partition_point(|b| b.time <= t);
        let i = idx - 1;
        let here = &self.breakpoints[i];
        match self.breakpoints.get(i + 1) {
            None => here.right,
            Some(next) => {
                here.right + (next.left - here.right) * (t - here.time) / (next.time - here.time)
            }
        }
    }

    /// `η(t−)`.
    pub fn left_limit(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t > self.horizon {
            return self.total_mass();
        }
        let idx = self.breakpoints.partition_point(|b| b.time < t);
        match self.breakpoints.get(idx) {
            Some(b) if b.time == t => b.left,
            _ => self.value(t),
        }
    }

    /// `η({t})`.
    pub fn atom_mass(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|b| b.time < t);
        match self.breakpoints.get(idx) {
            Some(b) if b.time == t => b.right - b.left,
            _ => 0.0,
        }
    }

    /// `η(s, t] = η(t) − η(s)`.
    pub fn mass(&self, s: f64, t: f64) -> f64 {
        (self.value(t) - self.value(s)).max(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |b| b.right)
    }

    /// Generalised inverse: the smallest `x ∈ [0, horizon]` with `η(x) ≥ level`.
    pub fn inverse(&self, level: f64) -> f64 {
        if level <= 0.0 {
            return 0.0;
        }
        let idx = self.breakpoints.partition_point(|b| b.right < level);
        let Some(b) = self.breakpoints.get(idx) else {
            return self.horizon;
        };
        if b.left >= level && idx > 0 {
            let prev = &self.breakpoints[idx - 1];
            let span = b.left - prev.right;
            let x = prev.time + (level - prev.right) / span * (b.time - prev.time);
            x.clamp(prev.time, b.time)
        } else {
            b.time
        }
    }

    /// Decomposition into linear pieces and atoms, in time order (an atom at
    /// `t` follows the continuous piece ending at `t`).
    pub fn pieces(&self) -> impl Iterator<Item = PathPiece> + '_ {
        self.breakpoints.iter().enumerate().flat_map(move |(i, b)| {
            let cont = (i > 0).then(|| {
                let prev = &self.breakpoints[i - 1];
                PathPiece::Continuous {
                    start: prev.time,
                    end: b.time,
                    mass: (b.left - prev.right).max(0.0),
                }
            });
            let atom = (b.right > b.left).then_some(PathPiece::Atom(Atom {
                time: b.time,
                mass: b.right - b.left,
            }));
            cont.into_iter().chain(atom)
        })
    }

    /// `(time, η(previous breakpoint, time])` for every breakpoint after 0.
    pub fn increments(&self) -> Vec<(f64, f64)> {
        self.breakpoints
            .windows(2)
            .map(|w| (w[1].time, w[1].right - w[0].right))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn mixed_path() -> MeasurePath {
        let grid = ContinuousGrid::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 1.5]).unwrap();
        MeasurePath::new(
            2.0,
            0.5,
            Some(grid),
            vec![Atom { time: 0.5, mass: 2.0 }, Atom { time: 1.0, mass: 1.0 }],
        )
        .unwrap()
    }

    #[test]
    fn values_left_limits_and_atoms() {
        let p = mixed_path();
        assert_eq!(p.value(0.0), 0.0);
        // continuous part at 0.5: drift 0.25 + grid 0.5
        assert!((p.left_limit(0.5) - 0.75).abs() < 1e-15);
        assert!((p.value(0.5) - 2.75).abs() < 1e-15);
        assert!((p.atom_mass(0.5) - 2.0).abs() < 1e-15);
        assert!((p.value(1.0) - (0.5 + 1.0 + 3.0)).abs() < 1e-15);
        assert!((p.left_limit(1.0) - 3.5).abs() < 1e-15);
        assert_eq!(p.atom_mass(0.7), 0.0);
        assert!((p.total_mass() - (1.0 + 1.5 + 3.0)).abs() < 1e-15);
        assert!((p.mass(0.5, 1.0) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn inverse_hits_atoms_and_linear_parts() {
        let p = mixed_path();
        assert_eq!(p.inverse(0.0), 0.0);
        assert!((p.inverse(0.375) - 0.25).abs() < 1e-15);
        assert_eq!(p.inverse(1.0), 0.5);
        assert_eq!(p.inverse(2.75), 0.5);
        assert_eq!(p.inverse(4.0), 1.0);
        assert_eq!(p.inverse(99.0), 2.0);
        let x = p.inverse(5.0);
        assert!((p.value(x) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_atoms_merge_and_invalid_inputs_fail() {
        let p = MeasurePath::from_atoms(
            1.0,
            vec![Atom { time: 0.3, mass: 1.0 }, Atom { time: 0.3, mass: 2.0 }],
        )
        .unwrap();
        assert_eq!(p.atoms().len(), 1);
        assert_eq!(p.atom_mass(0.3), 3.0);

        assert!(MeasurePath::deterministic(0.0, 1.0).is_err());
        assert!(MeasurePath::from_atoms(1.0, vec![Atom { time: 1.5, mass: 1.0 }]).is_err());
        assert!(MeasurePath::from_atoms(1.0, vec![Atom { time: 0.0, mass: 1.0 }]).is_err());
        assert!(MeasurePath::from_atoms(1.0, vec![Atom { time: 0.5, mass: 0.0 }]).is_err());
        assert!(ContinuousGrid::new(vec![0.0, 1.0], vec![0.0, -1.0]).is_err());
    }

    #[test]
    fn pieces_reassemble_total() {
        let p = mixed_path();
        let total: f64 = p
            .pieces()
            .map(|piece| match piece {
                PathPiece::Continuous { mass, .. } => mass,
                PathPiece::Atom(a) => a.mass,
            })
            .sum();
        assert!((total - p.total_mass()).abs() < 1e-14);
        let inc: f64 = p.increments().iter().map(|x| x.1).sum();
        assert!((inc - p.total_mass()).abs() < 1e-14);
    }
}
