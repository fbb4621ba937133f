//! Parallel Monte Carlo estimation of `E g(Y_T)` and of coupled weak-error
//! differences.
//!
//! Path `j` is always driven by stream `(master_seed, j)`. Paths are grouped
//! in fixed-size chunks whose running moments are merged in chunk order, so a
//! result is bit-identical for every worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::euler::{simulate_terminal, CoupledPlan, EulerConfig};
use crate::grids::TimeGrid;
use crate::models::Coefficients;
use crate::rng::RngStream;

/// Paths per chunk.
pub const CHUNK: u64 = 256;

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Running mean and centred second moment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCResult {
    pub mean: f64,
    pub stderr: f64,
    /// Paths that contributed (overflowed paths excluded).
    pub n: u64,
    pub overflow_count: u64,
    pub seed: u64,
}

impl MCResult {
    pub fn from_moments(m: &Moments, overflow_count: u64, seed: u64) -> Self {
        Self {
            mean: m.mean,
            stderr: m.stderr(),
            n: m.n,
            overflow_count,
            seed,
        }
    }
}

/// Per-component moments over a block of paths.
#[derive(Clone, Debug, PartialEq)]
pub struct PathMoments {
    pub components: Vec<Moments>,
    pub overflow_count: u64,
}

impl PathMoments {
    pub fn new(width: usize) -> Self {
        Self {
            components: vec![Moments::default(); width],
            overflow_count: 0,
        }
    }

    pub fn merge(&mut self, other: &PathMoments) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.merge(b);
        }
        self.overflow_count += other.overflow_count;
    }

    pub fn paths(&self) -> u64 {
        self.components.first().map_or(0, |m| m.n)
    }
}

/// Runs `path(stream, out)` for stream ids `first..first + n` and merges the
/// `width` outputs per path. Overflowed paths are counted and skipped; any
/// other error aborts.
pub fn run_paths<F>(
    seed: u64,
    first: u64,
    n: u64,
    width: usize,
    workers: usize,
    path: F,
) -> Result<PathMoments>
where
    F: Fn(&mut RngStream, &mut [f64]) -> Result<()> + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let run_chunk = |c: u64| -> Result<PathMoments> {
        let mut acc = PathMoments::new(width);
        let mut out = vec![0.0; width];
        let lo = first + c * CHUNK;
        let hi = (lo + CHUNK).min(first + n);
        for id in lo..hi {
            let mut rng = RngStream::new(seed, id);
            match path(&mut rng, &mut out) {
                Ok(()) => {
                    for (m, &x) in acc.components.iter_mut().zip(&out) {
                        m.push(x);
                    }
                }
                Err(Error::Overflow { .. }) => acc.overflow_count += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(acc)
    };
    let chunks: Vec<Result<PathMoments>> = if workers <= 1 {
        (0..n_chunks).map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| (0..n_chunks).into_par_iter().map(run_chunk).collect())
    };
    let mut total = PathMoments::new(width);
    for c in chunks {
        total.merge(&c?);
    }
    Ok(total)
}

fn finish(m: PathMoments, seed: u64) -> Result<Vec<MCResult>> {
    if m.paths() == 0 {
        return Err(Error::AllOverflow(m.overflow_count as usize));
    }
    Ok(m.components
        .iter()
        .map(|c| MCResult::from_moments(c, m.overflow_count, seed))
        .collect())
}

/// `E g(Y_T)` with path `j` on stream `(master_seed, j)`.
pub fn estimate<C, G>(
    config: &EulerConfig<'_, C>,
    g: &G,
    n_paths: u64,
    master_seed: u64,
    workers: usize,
) -> Result<MCResult>
where
    C: Coefficients,
    G: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    if n_paths < 2 {
        return invalid("need at least two paths");
    }
    let cfg = EulerConfig {
        model: config.model,
        grid: config.grid,
        record_path: false,
    };
    let m = run_paths(master_seed, 0, n_paths, 1, workers, |rng, out| {
        out[0] = g(&simulate_terminal(&cfg, rng)?.terminal);
        Ok(())
    })?;
    Ok(finish(m, master_seed)?.remove(0))
}

/// `E[g(Y_T^coarse) - g(Y_T^fine)]` with both levels driven by the same noise.
pub fn estimate_coupled_difference<C, G>(
    model: &C,
    fine: &TimeGrid,
    coarse: &TimeGrid,
    g: &G,
    n_paths: u64,
    master_seed: u64,
    workers: usize,
) -> Result<MCResult>
where
    C: Coefficients,
    G: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    if n_paths < 2 {
        return invalid("need at least two paths");
    }
    let plan = CoupledPlan::new(fine, &[coarse])?;
    let m = run_paths(master_seed, 0, n_paths, 1, workers, |rng, out| {
        let ys = plan.simulate(model, rng)?;
        out[0] = g(&ys[1]) - g(&ys[0]);
        Ok(())
    })?;
    Ok(finish(m, master_seed)?.remove(0))
}

/// For a plan with levels `l = 0..L`, accumulates per path the outputs
/// `[g(Y^fine), g(Y^l) - g(Y^fine) for each l]` over stream ids
/// `first..first + n`.
pub fn run_coupled_levels<C, G>(
    plan: &CoupledPlan,
    model: &C,
    g: &G,
    seed: u64,
    first: u64,
    n: u64,
    workers: usize,
) -> Result<PathMoments>
where
    C: Coefficients,
    G: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    run_paths(seed, first, n, plan.levels() + 1, workers, |rng, out| {
        let ys = plan.simulate(model, rng)?;
        let gf = g(&ys[0]);
        out[0] = gf;
        for (o, y) in out[1..].iter_mut().zip(&ys[1..]) {
            *o = g(y) - gf;
        }
        Ok(())
    })
}

/// One emitted row of Monte Carlo output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub delta: f64,
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
    pub overflow_count: u64,
    pub seed: u64,
}

impl McRecord {
    pub const CSV_HEADER: &'static str = "alpha,beta,delta,n,mean,stderr,overflow_count,seed";

    pub fn new(alpha: f64, beta: Option<f64>, delta: f64, r: &MCResult) -> Self {
        Self {
            alpha,
            beta,
            delta,
            n: r.n,
            mean: r.mean,
            stderr: r.stderr,
            overflow_count: r.overflow_count,
            seed: r.seed,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.alpha,
            self.beta.map_or(String::new(), |b| b.to_string()),
            self.delta,
            self.n,
            self.mean,
            self.stderr,
            self.overflow_count,
            self.seed
        )
    }
}
