//! Weak Euler scheme for the process class of [`crate::models`], with coefficients frozen at the
//! left end of each partition interval:
//!
//! ```text
//! Y' = Y + 1{alpha in (1,2]} a(Y) dt + c(Y) dZ + diag(k(Y)) dU
//! ```
//!
//! At `alpha = 2` the increment `dZ` is Gaussian with per-coordinate variance
//! `2 dt`, so the Brownian part is carried by `c`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grids::TimeGrid;
use crate::models::{drift_active, Coefficients};
use crate::rng::RngStream;
use crate::stable_rng::{increment_into, unit_symmetric, StableLaw};

/// States with a coordinate above this magnitude count as overflowed.
pub const OVERFLOW_THRESHOLD: f64 = 1e300;

pub struct EulerConfig<'a, C: Coefficients> {
    pub model: &'a C,
    pub grid: &'a TimeGrid,
    pub record_path: bool,
}

/// Per-path scratch buffers.
pub(crate) struct Workspace {
    a: Vec<f64>,
    c: Vec<f64>,
    k: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            a: vec![0.0; dim],
            c: vec![0.0; dim * dim],
            k: vec![0.0; dim],
        }
    }
}

/// Draws the driving increments of one interval.
pub(crate) struct NoiseSampler {
    law: StableLaw,
    sub: Vec<f64>,
}

impl NoiseSampler {
    pub(crate) fn new<C: Coefficients>(model: &C) -> Result<Self> {
        Ok(Self {
            law: StableLaw::standard(model.alpha(), model.dim())?,
            sub: model.sub_indices().to_vec(),
        })
    }

    #[inline]
    pub(crate) fn draw(&self, dt: f64, rng: &mut RngStream, dz: &mut [f64], du: &mut [f64]) {
        increment_into(&self.law, dt, rng, dz);
        for (u, &ai) in du.iter_mut().zip(&self.sub) {
            *u = dt.powf(1.0 / ai) * unit_symmetric(ai, rng);
        }
    }
}

#[inline]
pub(crate) fn step_in_place<C: Coefficients>(
    model: &C,
    y: &mut [f64],
    dt: f64,
    dz: &[f64],
    du: &[f64],
    ws: &mut Workspace,
) {
    let d = y.len();
    let drift = drift_active(model.alpha()) && model.has_drift();
    if drift {
        model.drift(y, &mut ws.a);
    }
    model.mixing(y, &mut ws.c);
    let loads = !du.is_empty();
    if loads {
        model.loads(y, &mut ws.k);
    }
    for i in 0..d {
        let row = &ws.c[i * d..(i + 1) * d];
        let mut inc: f64 = row.iter().zip(dz).map(|(a, b)| a * b).sum();
        if drift {
            inc += ws.a[i] * dt;
        }
        if loads {
            inc += ws.k[i] * du[i];
        }
        y[i] += inc;
    }
}

#[inline]
fn overflowed(y: &[f64]) -> bool {
    y.iter().any(|v| !(v.abs() <= OVERFLOW_THRESHOLD))
}

/// One step of the scheme from `y` over `dt` with driving increments `dz`
/// (isotropic) and `du` (coordinatewise, empty when the model has no loads).
pub fn euler_step<C: Coefficients>(
    model: &C,
    y: &[f64],
    dt: f64,
    dz: &[f64],
    du: &[f64],
) -> Vec<f64> {
    let mut out = y.to_vec();
    let mut ws = Workspace::new(y.len());
    step_in_place(model, &mut out, dt, dz, du, &mut ws);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub terminal: Vec<f64>,
    /// `(t_i, Y_{t_i})` for every grid node when recording was requested.
    pub path: Option<Vec<(f64, Vec<f64>)>>,
}

/// Runs the scheme across every interval of the grid.
pub fn simulate_terminal<C: Coefficients>(
    config: &EulerConfig<'_, C>,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    let model = config.model;
    let d = model.dim();
    let noise = NoiseSampler::new(model)?;
    let mut ws = Workspace::new(d);
    let mut y = vec![0.0; d];
    model.initial_state(rng, &mut y);
    let mut dz = vec![0.0; d];
    let mut du = vec![0.0; model.sub_indices().len()];
    let times = config.grid.times();
    let mut path = config.record_path.then(|| {
        let mut p = Vec::with_capacity(times.len());
        p.push((0.0, y.clone()));
        p
    });
    for (i, w) in times.windows(2).enumerate() {
        let dt = w[1] - w[0];
        noise.draw(dt, rng, &mut dz, &mut du);
        step_in_place(model, &mut y, dt, &dz, &du, &mut ws);
        if overflowed(&y) {
            return Err(Error::Overflow {
                step: i,
                time: w[1],
                stream_id: rng.stream_id(),
            });
        }
        if let Some(p) = path.as_mut() {
            p.push((w[1], y.clone()));
        }
    }
    Ok(Trajectory { terminal: y, path })
}

/// Several nested grids driven by the same noise: increments are drawn on
/// the finest grid and summed over each coarse interval.
#[derive(Clone, Debug)]
pub struct CoupledPlan {
    fine: TimeGrid,
    // ends[level][fine_step] is true when fine step `fine_step` closes an
    // interval of that level
    ends: Vec<Vec<bool>>,
    coarse_steps: Vec<Vec<f64>>,
}

impl CoupledPlan {
    pub fn new(fine: &TimeGrid, coarse: &[&TimeGrid]) -> Result<Self> {
        let mut ends = Vec::with_capacity(coarse.len());
        for g in coarse {
            let map = fine.nesting_map(g)?;
            let mut e = vec![false; fine.n_steps()];
            for &j in &map[1..] {
                e[j - 1] = true;
            }
            ends.push(e);
        }
        Ok(Self {
            fine: fine.clone(),
            ends,
            coarse_steps: coarse.iter().map(|g| g.steps().collect()).collect(),
        })
    }

    pub fn fine(&self) -> &TimeGrid {
        &self.fine
    }

    pub fn levels(&self) -> usize {
        self.ends.len()
    }

    /// Terminal states: `out[0]` on the fine grid, `out[1 + l]` on coarse
    /// level `l`.
    pub fn simulate<C: Coefficients>(
        &self,
        model: &C,
        rng: &mut RngStream,
    ) -> Result<Vec<Vec<f64>>> {
        let d = model.dim();
        let noise = NoiseSampler::new(model)?;
        let n_sub = model.sub_indices().len();
        let mut ws = Workspace::new(d);
        let mut x0 = vec![0.0; d];
        model.initial_state(rng, &mut x0);
        let levels = self.levels();
        let mut states = vec![x0; levels + 1];
        let mut coarse_idx = vec![0usize; levels];
        let mut acc_dz = vec![vec![0.0; d]; levels];
        let mut acc_du = vec![vec![0.0; n_sub]; levels];
        let mut dz = vec![0.0; d];
        let mut du = vec![0.0; n_sub];
        let times = self.fine.times();
        for (i, w) in times.windows(2).enumerate() {
            let dt = w[1] - w[0];
            noise.draw(dt, rng, &mut dz, &mut du);
            step_in_place(model, &mut states[0], dt, &dz, &du, &mut ws);
            if overflowed(&states[0]) {
                return Err(Error::Overflow {
                    step: i,
                    time: w[1],
                    stream_id: rng.stream_id(),
                });
            }
            for l in 0..levels {
                acc_dz[l].iter_mut().zip(&dz).for_each(|(a, b)| *a += b);
                acc_du[l].iter_mut().zip(&du).for_each(|(a, b)| *a += b);
                if self.ends[l][i] {
                    // step length from the coarse grid's own nodes
                    let h = self.coarse_steps[l][coarse_idx[l]];
                    coarse_idx[l] += 1;
                    step_in_place(
                        model,
                        &mut states[l + 1],
                        h,
                        &acc_dz[l],
                        &acc_du[l],
                        &mut ws,
                    );
                    if overflowed(&states[l + 1]) {
                        return Err(Error::Overflow {
                            step: i,
                            time: w[1],
                            stream_id: rng.stream_id(),
                        });
                    }
                    acc_dz[l].fill(0.0);
                    acc_du[l].fill(0.0);
                }
            }
        }
        Ok(states)
    }
}

/// Fine and coarse terminal states driven by identical noise.
pub fn simulate_coupled<C: Coefficients>(
    model: &C,
    fine: &TimeGrid,
    coarse: &TimeGrid,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let plan = CoupledPlan::new(fine, &[coarse])?;
    let mut out = plan.simulate(model, rng)?;
    let c = out.pop().unwrap();
    let f = out.pop().unwrap();
    Ok((f, c))
}

/// Writes a recorded path as CSV with header `t,y0,y1,...`.
pub fn write_path_csv<W: Write>(path: &[(f64, Vec<f64>)], mut w: W) -> Result<()> {
    let d = path.first().map_or(0, |p| p.1.len());
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..d).map(|i| format!("y{i}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (t, y) in path {
        let row: Vec<String> = std::iter::once(t.to_string())
            .chain(y.iter().map(f64::to_string))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
