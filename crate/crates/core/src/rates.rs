//! Weak-error ladders, log-log order fits and the one-step experiment.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::euler::{
    simulate_terminal, step_in_place, CoupledPlan, EulerConfig, NoiseSampler, Workspace,
};
use crate::grids::uniform_grid;
use crate::models::{validate_beta, Coefficients};
use crate::montecarlo::{run_coupled_levels, run_paths, PathMoments, CHUNK};
use crate::oracle::{steps_for, ReferenceKind, ReferenceValue};
use crate::stats::{ols, LinearFit};

/// Ladder points with error at or below this are treated as exact zeros.
pub const EXACT_FLOOR: f64 = 1e-12;
/// A point is noise-masked when its error is below this many standard errors.
pub const MASK_SIGMAS: f64 = 3.0;
/// Slopes are accepted down to `kappa - SLOPE_TOLERANCE`.
pub const SLOPE_TOLERANCE: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kappa {
    Order(f64),
    /// `beta == alpha`, where no rate is asserted.
    Boundary,
}

impl Kappa {
    pub fn value(&self) -> Option<f64> {
        match self {
            Kappa::Order(k) => Some(*k),
            Kappa::Boundary => None,
        }
    }
}

/// Predicted weak order: `beta / alpha` for `beta < alpha`, `1` for
/// `beta > alpha`.
pub fn kappa(alpha: f64, beta: f64) -> Result<Kappa> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return invalid(format!("stability index must lie in (0, 2], got {alpha}"));
    }
    validate_beta(beta)?;
    Ok(if beta < alpha {
        Kappa::Order(beta / alpha)
    } else if beta > alpha {
        Kappa::Order(1.0)
    } else {
        Kappa::Boundary
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "exact (noise-masked)")]
    Exact,
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
    /// Boundary case `beta == alpha`: slope reported, nothing asserted.
    #[serde(rename = "REPORTED")]
    Reported,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Exact => "exact (noise-masked)",
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Reported => "REPORTED",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub alpha: f64,
    /// Regularity driving the predicted order (`None` for smooth data).
    pub beta: Option<f64>,
    pub deltas: Vec<f64>,
    pub errors: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub noise_mask: Vec<bool>,
    pub n_paths: u64,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub kappa_predicted: Kappa,
    pub reference: Option<ReferenceValue>,
    /// Set for state-independent models, where a fully masked ladder means
    /// the scheme is exact rather than under-resolved.
    #[serde(default)]
    pub exact_expected: bool,
    pub seed: u64,
}

fn noise_mask(errors: &[f64], stderrs: &[f64]) -> Vec<bool> {
    errors
        .iter()
        .zip(stderrs)
        .map(|(&e, &s)| e <= EXACT_FLOOR || e < MASK_SIGMAS * s)
        .collect()
}

impl RateFit {
    pub fn new(
        alpha: f64,
        beta: Option<f64>,
        deltas: Vec<f64>,
        errors: Vec<f64>,
        stderrs: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if deltas.len() != errors.len() || deltas.len() != stderrs.len() {
            return invalid("ladder vectors must have equal length");
        }
        let kappa_predicted = match beta {
            Some(b) => kappa(alpha, b)?,
            None => Kappa::Order(1.0),
        };
        Ok(Self {
            alpha,
            beta,
            noise_mask: noise_mask(&errors, &stderrs),
            deltas,
            errors,
            stderrs,
            n_paths: 0,
            slope: None,
            intercept: None,
            r_squared: None,
            kappa_predicted,
            reference: None,
            exact_expected: false,
            seed,
        })
    }

    pub fn unmasked(&self) -> usize {
        self.noise_mask.iter().filter(|m| !**m).count()
    }

    pub fn verdict(&self) -> Verdict {
        if self.noise_mask.iter().all(|&m| m) {
            let zeros = self.errors.iter().all(|&e| e <= EXACT_FLOOR);
            return if zeros || self.exact_expected {
                Verdict::Exact
            } else {
                Verdict::Inconclusive
            };
        }
        let Some(slope) = self.slope else {
            return Verdict::Inconclusive;
        };
        match self.kappa_predicted {
            Kappa::Boundary => Verdict::Reported,
            Kappa::Order(k) if slope >= k - SLOPE_TOLERANCE => Verdict::Pass,
            Kappa::Order(_) => Verdict::Fail,
        }
    }

    /// Errors, in order of decreasing step, restricted to unmasked points.
    pub fn unmasked_errors_by_decreasing_delta(&self) -> Vec<f64> {
        let mut pts: Vec<(f64, f64)> = self
            .deltas
            .iter()
            .zip(&self.errors)
            .zip(&self.noise_mask)
            .filter(|(_, m)| !**m)
            .map(|((&d, &e), _)| (d, e))
            .collect();
        pts.sort_by(|a, b| b.0.total_cmp(&a.0));
        pts.into_iter().map(|p| p.1).collect()
    }

    pub const CSV_HEADER: &'static str = "delta,error,stderr,masked,n_paths";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for i in 0..self.deltas.len() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                self.deltas[i], self.errors[i], self.stderrs[i], self.noise_mask[i], self.n_paths
            ));
        }
        s
    }

    pub fn summary(&self) -> RateSummary {
        RateSummary {
            alpha: self.alpha,
            beta: self.beta,
            kappa_predicted: self.kappa_predicted.value(),
            slope: self.slope,
            r_squared: self.r_squared,
            verdict: self.verdict(),
            unmasked_points: self.unmasked(),
            n_paths: self.n_paths,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub kappa_predicted: Option<f64>,
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
    pub verdict: Verdict,
    pub unmasked_points: usize,
    pub n_paths: u64,
    pub seed: u64,
}

/// Least squares of `log error` on `log delta` over unmasked points; fills
/// the slope fields of `fit`.
pub fn fit_order(fit: &mut RateFit) -> Result<LinearFit> {
    fit.slope = None;
    fit.intercept = None;
    fit.r_squared = None;
    let (x, y): (Vec<f64>, Vec<f64>) = fit
        .deltas
        .iter()
        .zip(&fit.errors)
        .zip(&fit.noise_mask)
        .filter(|(_, m)| !**m)
        .map(|((d, e), _)| (d.ln(), e.ln()))
        .unzip();
    if x.len() < 3 {
        return Err(Error::Inconclusive(format!(
            "{} unmasked ladder points, need at least 3",
            x.len()
        )));
    }
    let lf = ols(&x, &y)?;
    fit.slope = Some(lf.slope);
    fit.intercept = Some(lf.intercept);
    fit.r_squared = Some(lf.r_squared);
    Ok(lf)
}

/// How ladder errors are measured.
#[derive(Clone, Debug, PartialEq)]
pub enum LadderReference {
    /// Independent estimates at each step size against a fixed value.
    Value(ReferenceValue),
    /// Coupled differences against a uniform fine grid of step `delta_ref`
    /// driven by the same noise.
    CoupledFine { delta_ref: f64 },
}

/// Path budget. With `max_paths` above `n_paths`, the count doubles until the
/// smallest-step error exceeds five standard errors or the budget runs out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathBudget {
    pub n_paths: u64,
    pub max_paths: u64,
}

impl PathBudget {
    pub fn fixed(n_paths: u64) -> Self {
        Self {
            n_paths,
            max_paths: n_paths,
        }
    }
}

fn validate_deltas(horizon: f64, deltas: &[f64]) -> Result<Vec<usize>> {
    if deltas.is_empty() {
        return invalid("empty step-size ladder");
    }
    for (i, a) in deltas.iter().enumerate() {
        if deltas[..i].contains(a) {
            return invalid(format!("duplicate step size {a} in ladder"));
        }
    }
    deltas.iter().map(|&d| steps_for(horizon, d)).collect()
}

/// Per-step-size weak errors `|E g(Y_T^delta) - reference|`.
#[allow(clippy::too_many_arguments)]
pub fn weak_error_ladder<C, G>(
    model: &C,
    g: &G,
    beta: Option<f64>,
    horizon: f64,
    deltas: &[f64],
    reference: &LadderReference,
    budget: PathBudget,
    seed: u64,
    workers: usize,
) -> Result<RateFit>
where
    C: Coefficients,
    G: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let steps = validate_deltas(horizon, deltas)?;
    if budget.n_paths < 2 {
        return invalid("need at least two paths");
    }
    let grids = steps
        .iter()
        .map(|&n| uniform_grid(horizon, n))
        .collect::<Result<Vec<_>>>()?;
    // smallest step drives the stopping rule
    let smallest = (0..deltas.len())
        .min_by(|&a, &b| deltas[a].total_cmp(&deltas[b]))
        .unwrap();

    // Each runner adds paths [first, first + n) to its accumulators and
    // reports (errors, stderrs, reference).
    enum Runner {
        Direct {
            acc: Vec<PathMoments>,
            value: ReferenceValue,
        },
        Coupled {
            plan: CoupledPlan,
            acc: PathMoments,
        },
    }
    let mut runner = match reference {
        LadderReference::Value(v) => {
            if !(v.error_bound >= 0.0 && v.error_bound.is_finite()) {
                return invalid("reference error bound must be finite and non-negative");
            }
            Runner::Direct {
                acc: vec![PathMoments::new(1); grids.len()],
                value: v.clone(),
            }
        }
        LadderReference::CoupledFine { delta_ref } => {
            let n_ref = steps_for(horizon, *delta_ref)?;
            if let Some(&n) = steps.iter().find(|&&n| n_ref % n != 0) {
                return invalid(format!(
                    "reference grid ({n_ref} steps) does not refine a {n}-step ladder grid"
                ));
            }
            let fine = uniform_grid(horizon, n_ref)?;
            let refs: Vec<&_> = grids.iter().collect();
            Runner::Coupled {
                plan: CoupledPlan::new(&fine, &refs)?,
                acc: PathMoments::new(grids.len() + 1),
            }
        }
    };

    let mut done = 0u64;
    let mut batch = budget.n_paths;
    loop {
        match &mut runner {
            Runner::Direct { acc, .. } => {
                for (a, grid) in acc.iter_mut().zip(&grids) {
                    let cfg = EulerConfig {
                        model,
                        grid,
                        record_path: false,
                    };
                    let m = run_paths(seed, done, batch, 1, workers, |rng, out| {
                        out[0] = g(&simulate_terminal(&cfg, rng)?.terminal);
                        Ok(())
                    })?;
                    a.merge(&m);
                }
            }
            Runner::Coupled { plan, acc } => {
                let m = run_coupled_levels(plan, model, g, seed, done, batch, workers)?;
                acc.merge(&m);
            }
        }
        done += batch;

        let (errors, stderrs, refv) = match &runner {
            Runner::Direct { acc, value } => {
                if acc.iter().any(|a| a.paths() == 0) {
                    return Err(Error::AllOverflow(done as usize));
                }
                let e = acc
                    .iter()
                    .map(|a| (a.components[0].mean - value.value).abs())
                    .collect::<Vec<_>>();
                let s = acc
                    .iter()
                    .map(|a| a.components[0].stderr().hypot(value.error_bound))
                    .collect::<Vec<_>>();
                (e, s, value.clone())
            }
            Runner::Coupled { acc, .. } => {
                if acc.paths() == 0 {
                    return Err(Error::AllOverflow(done as usize));
                }
                let c = &acc.components;
                let e = c[1..].iter().map(|m| m.mean.abs()).collect::<Vec<_>>();
                let s = c[1..].iter().map(|m| m.stderr()).collect::<Vec<_>>();
                let r = ReferenceValue {
                    value: c[0].mean,
                    kind: ReferenceKind::FineEuler,
                    error_bound: c[0].stderr(),
                };
                (e, s, r)
            }
        };

        let (e, s) = (errors[smallest], stderrs[smallest]);
        let resolved = e <= EXACT_FLOOR || e >= 5.0 * s;
        if resolved || done >= budget.max_paths {
            let mut fit =
                RateFit::new(model.alpha(), beta, deltas.to_vec(), errors, stderrs, seed)?;
            fit.n_paths = done;
            fit.reference = Some(refv);
            fit.exact_expected = model.state_independent();
            return Ok(fit);
        }
        // keep later batches chunk-aligned so results match a single run
        batch = done.min(budget.max_paths - done).div_ceil(CHUNK) * CHUNK;
    }
}

/// For each step `delta`, the largest over start points `y0` of
/// `|E f(Y_delta) - f(y0)|` after one Euler step, with the order fitted in
/// `delta`.
#[allow(clippy::too_many_arguments)]
pub fn one_step_experiment<C, F>(
    model: &C,
    f: &F,
    f_regularity: Option<f64>,
    start_points: &[Vec<f64>],
    deltas: &[f64],
    n_paths: u64,
    seed: u64,
    workers: usize,
) -> Result<RateFit>
where
    C: Coefficients,
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    if start_points.is_empty() {
        return invalid("need at least one start point");
    }
    if n_paths < 2 {
        return invalid("need at least two paths");
    }
    for (i, a) in deltas.iter().enumerate() {
        if !(*a > 0.0) || deltas[..i].contains(a) {
            return invalid(format!("step sizes must be positive and distinct, got {a}"));
        }
    }
    let d = model.dim();
    if start_points.iter().any(|p| p.len() != d) {
        return invalid("start point dimension mismatch");
    }
    let noise = NoiseSampler::new(model)?;
    let n_sub = model.sub_indices().len();
    let mut errors = Vec::with_capacity(deltas.len());
    let mut stderrs = Vec::with_capacity(deltas.len());
    for (li, &dt) in deltas.iter().enumerate() {
        let mut best = (0.0f64, 0.0f64);
        for (pi, y0) in start_points.iter().enumerate() {
            let f0 = f(y0);
            // distinct stream blocks per (delta, start point)
            let first = ((li * start_points.len() + pi) as u64) << 40;
            let m = run_paths(seed, first, n_paths, 1, workers, |rng, out| {
                let mut ws = Workspace::new(d);
                let mut dz = vec![0.0; d];
                let mut du = vec![0.0; n_sub];
                let mut y = y0.clone();
                noise.draw(dt, rng, &mut dz, &mut du);
                step_in_place(model, &mut y, dt, &dz, &du, &mut ws);
                out[0] = f(&y) - f0;
                Ok(())
            })?;
            let c = m.components[0];
            if pi == 0 || c.mean.abs() > best.0 {
                best = (c.mean.abs(), c.stderr());
            }
        }
        errors.push(best.0);
        stderrs.push(best.1);
    }
    let mut fit = RateFit::new(
        model.alpha(),
        f_regularity,
        deltas.to_vec(),
        errors,
        stderrs,
        seed,
    )?;
    fit.n_paths = n_paths;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ConstantCoefficients;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(2.0, 1.5).unwrap(), Kappa::Order(0.75));
        assert_eq!(kappa(0.5, 1.3).unwrap(), Kappa::Order(1.0));
        assert_eq!(kappa(1.5, 1.5).unwrap(), Kappa::Boundary);
        assert!(kappa(1.5, 2.0).is_err());
        assert!(kappa(2.5, 0.5).is_err());
    }

    fn ladder() -> Vec<f64> {
        (3..=8).map(|k| (-(k as f64)).exp2()).collect()
    }

    #[test]
    fn exact_power_law_slope() {
        let d = ladder();
        let e: Vec<f64> = d.iter().map(|x| 0.3 * x.powf(0.75)).collect();
        let mut fit = RateFit::new(2.0, Some(1.5), d, e, vec![0.0; 6], 0).unwrap();
        fit_order(&mut fit).unwrap();
        assert!((fit.slope.unwrap() - 0.75).abs() < 1e-10);
        assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(fit.verdict(), Verdict::Pass);
    }

    #[test]
    fn masked_outlier_does_not_move_slope() {
        let d = ladder();
        let mut e: Vec<f64> = d.iter().map(|x| 2.0 * x).collect();
        let mut s = vec![1e-6; 6];
        e[5] = 1e-3;
        s[5] = 1.0;
        let mut fit = RateFit::new(1.5, Some(2.5), d, e, s, 0).unwrap();
        assert!(fit.noise_mask[5]);
        fit_order(&mut fit).unwrap();
        assert!((fit.slope.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn perturbed_power_law_slope() {
        let d = ladder();
        let mut rng = RngStream::new(3, 0);
        let e: Vec<f64> = d
            .iter()
            .map(|x| 0.5 * x * (1.0 + 0.05 * (2.0 * rng.random::<f64>() - 1.0)))
            .collect();
        // oracle: direct least squares on the log points
        let lx: Vec<f64> = d.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
        let mx = lx.iter().sum::<f64>() / 6.0;
        let my = ly.iter().sum::<f64>() / 6.0;
        let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
        let mut fit = RateFit::new(1.5, Some(2.5), d, e, vec![0.0; 6], 0).unwrap();
        fit_order(&mut fit).unwrap();
        let slope = fit.slope.unwrap();
        assert!((slope - num / den).abs() < 1e-12);
        assert!((0.9..=1.1).contains(&slope));
    }

    #[test]
    fn fewer_than_three_points_is_inconclusive() {
        let d = ladder();
        let e = vec![1.0, 0.5, 0.0, 0.0, 0.0, 0.0];
        let mut fit = RateFit::new(1.5, Some(0.5), d, e, vec![0.01; 6], 0).unwrap();
        assert!(matches!(fit_order(&mut fit), Err(Error::Inconclusive(_))));
        assert_eq!(fit.verdict(), Verdict::Inconclusive);
        let mut all =
            RateFit::new(1.5, Some(0.5), ladder(), vec![1e-3; 6], vec![0.01; 6], 0).unwrap();
        assert!(fit_order(&mut all).is_err());
        assert_eq!(all.verdict(), Verdict::Inconclusive);
        all.exact_expected = true;
        assert_eq!(all.verdict(), Verdict::Exact);
    }

    #[test]
    fn duplicate_deltas_rejected() {
        let cc = ConstantCoefficients::identity(1.5, vec![0.0]);
        let r = weak_error_ladder(
            &cc,
            &|y: &[f64]| y[0].cos(),
            None,
            1.0,
            &[0.25, 0.25, 0.125],
            &LadderReference::CoupledFine {
                delta_ref: 1.0 / 64.0,
            },
            PathBudget::fixed(100),
            0,
            1,
        );
        assert!(r.is_err());
    }

    #[test]
    fn constant_model_ladder_is_noise_masked() {
        let cc = ConstantCoefficients::identity(1.2, vec![0.3]);
        let g = |y: &[f64]| y[0].cos();
        let d = [0.25, 0.125, 0.0625];
        let coupled = weak_error_ladder(
            &cc,
            &g,
            None,
            1.0,
            &d,
            &LadderReference::CoupledFine {
                delta_ref: 1.0 / 128.0,
            },
            PathBudget::fixed(2000),
            4,
            1,
        )
        .unwrap();
        assert!(coupled.noise_mask.iter().all(|&m| m), "{coupled:?}");
        assert_eq!(coupled.verdict(), Verdict::Exact);

        let exact = crate::oracle::spectral_expectation(
            &cc,
            &crate::models::test_fn::TestFunction::Cosine {
                omega: vec![1.0],
                phase: 0.0,
            },
            1.0,
        )
        .unwrap();
        let direct = weak_error_ladder(
            &cc,
            &g,
            None,
            1.0,
            &d,
            &LadderReference::Value(exact),
            PathBudget::fixed(20_000),
            5,
            1,
        )
        .unwrap();
        assert!(
            direct
                .errors
                .iter()
                .zip(&direct.stderrs)
                .all(|(e, s)| *e <= 3.0 * s),
            "{direct:?}"
        );
    }

    #[test]
    fn one_step_with_constant_f_is_zero() {
        let cc = ConstantCoefficients::identity(1.0, vec![0.0]);
        let fit = one_step_experiment(
            &cc,
            &|_: &[f64]| 2.0,
            None,
            &[vec![0.0], vec![1.0]],
            &[0.1, 0.05, 0.025],
            500,
            1,
            1,
        )
        .unwrap();
        assert!(fit.errors.iter().all(|&e| e == 0.0));
        assert_eq!(fit.verdict(), Verdict::Exact);
    }

    #[test]
    fn one_step_cauchy_cosine_is_order_one() {
        // E cos(y0 + dZ) - cos(y0) = (e^{-delta} - 1) cos(y0)
        let cc = ConstantCoefficients::identity(1.0, vec![0.0]);
        let deltas = [0.2, 0.1, 0.05, 0.025];
        let starts = vec![vec![0.0], vec![1.0]];
        let mut fit = one_step_experiment(
            &cc,
            &|y: &[f64]| y[0].cos(),
            None,
            &starts,
            &deltas,
            200_000,
            2,
            1,
        )
        .unwrap();
        for (d, (e, s)) in deltas.iter().zip(fit.errors.iter().zip(&fit.stderrs)) {
            let exact = 1.0 - (-d).exp();
            assert!((e - exact).abs() < 4.0 * s, "delta {d}: {e} vs {exact}");
        }
        fit_order(&mut fit).unwrap();
        assert!((fit.slope.unwrap() - 1.0).abs() < 0.15, "{:?}", fit.slope);
    }

    #[test]
    fn csv_and_summary() {
        let mut fit = RateFit::new(
            2.0,
            Some(1.5),
            vec![0.5, 0.25, 0.125],
            vec![0.4, 0.2, 0.1],
            vec![0.01; 3],
            9,
        )
        .unwrap();
        fit_order(&mut fit).unwrap();
        let csv = fit.to_csv();
        assert_eq!(csv.lines().next().unwrap(), RateFit::CSV_HEADER);
        assert_eq!(csv.lines().count(), 4);
        let s = serde_json::to_value(fit.summary()).unwrap();
        assert_eq!(s["verdict"], "PASS");
        assert_eq!(s["kappa_predicted"], 0.75);
    }
}
