//! Partitions `0 = t_0 < ... < t_n = T` of the simulation horizon.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    times: Vec<f64>,
    delta: f64,
}

fn grid_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Grid(msg.into()))
}

impl TimeGrid {
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return grid_err("a grid needs at least two nodes");
        }
        if times[0] != 0.0 {
            return grid_err("a grid must start at 0");
        }
        if times
            .windows(2)
            .any(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return grid_err("grid nodes must be finite and strictly increasing");
        }
        let delta = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Ok(Self { times, delta })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Maximum step size.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }

    /// Index `i` with `t_i <= s < t_{i+1}`.
    pub fn locate(&self, s: f64) -> Result<usize> {
        if !(s >= 0.0 && s < self.horizon()) {
            return grid_err(format!("time {s} outside [0, {})", self.horizon()));
        }
        Ok(self.times.partition_point(|&t| t <= s) - 1)
    }

    /// Splits every interval into `m` equal parts.
    pub fn refine(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return grid_err("refinement factor must be at least 1");
        }
        let mut times = Vec::with_capacity(self.n_steps() * m + 1);
        for w in self.times.windows(2) {
            let h = w[1] - w[0];
            for k in 0..m {
                times.push(if k == 0 {
                    w[0]
                } else {
                    w[0] + h * k as f64 / m as f64
                });
            }
        }
        times.push(self.horizon());
        Self::from_times(times)
    }

    /// For a coarse grid nested in `self`, the fine-node index of every coarse
    /// node.
    pub fn nesting_map(&self, coarse: &TimeGrid) -> Result<Vec<usize>> {
        let tol = 1e-12 * self.horizon();
        if (coarse.horizon() - self.horizon()).abs() > tol {
            return grid_err("grids have different horizons");
        }
        let mut map = Vec::with_capacity(coarse.times.len());
        let mut j = 0usize;
        for &t in &coarse.times {
            while j < self.times.len() && self.times[j] < t - tol {
                j += 1;
            }
            if j == self.times.len() || (self.times[j] - t).abs() > tol {
                return grid_err(format!("coarse node {t} is not a node of the fine grid"));
            }
            map.push(j);
        }
        Ok(map)
    }

    pub fn is_refinement_of(&self, coarse: &TimeGrid) -> bool {
        self.nesting_map(coarse).is_ok()
    }
}

/// `t_i = i T / n`.
pub fn uniform_grid(horizon: f64, n: usize) -> Result<TimeGrid> {
    if n == 0 {
        return grid_err("a uniform grid needs n >= 1 steps");
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return grid_err(format!("horizon must be positive, got {horizon}"));
    }
    let mut times: Vec<f64> = (0..n).map(|i| i as f64 * horizon / n as f64).collect();
    times.push(horizon);
    TimeGrid::from_times(times)
}

/// Random partition with steps drawn uniformly from `[delta_max/2, delta_max]`,
/// the last step truncated at the horizon.
pub fn random_grid(horizon: f64, delta_max: f64, rng: &mut RngStream) -> Result<TimeGrid> {
    if !(delta_max > 0.0) {
        return grid_err("maximum step must be positive");
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return grid_err(format!("horizon must be positive, got {horizon}"));
    }
    let mut times = vec![0.0];
    let mut t = 0.0;
    loop {
        let step = delta_max * (0.5 + 0.5 * rng.random::<f64>());
        if t + step >= horizon {
            times.push(horizon);
            break;
        }
        t += step;
        times.push(t);
    }
    TimeGrid::from_times(times)
}

/// Grid description as it appears in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Uniform {
        horizon: f64,
        n: usize,
    },
    Random {
        horizon: f64,
        delta_max: f64,
        seed: u64,
    },
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        match *self {
            GridSpec::Uniform { horizon, n } => uniform_grid(horizon, n),
            GridSpec::Random {
                horizon,
                delta_max,
                seed,
            } => random_grid(horizon, delta_max, &mut RngStream::new(seed, 0)),
        }
    }
}
