//! Reference values for `E g(X_T)`.
//!
//! Constant coefficients admit exact terminal sampling and, in one
//! dimension, a closed-form characteristic function
//! `E exp(i xi X_T) = exp(i xi x0 + T psi(xi))` with the real even symbol
//! `psi(xi) = i a xi 1{alpha in (1,2]} - |c xi|^alpha - sum_i |k_i xi|^{alpha_i}`.
//! Variable coefficients fall back to fine-grid Euler.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::euler::{EulerConfig, NoiseSampler};
use crate::grids::uniform_grid;
use crate::models::test_fn::TestFunction;
use crate::models::{drift_active, Coefficients, ConstantCoefficients};
use crate::montecarlo::{estimate, MCResult};
use crate::quadrature;
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    ExactSampling,
    Spectral,
    FineEuler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub value: f64,
    pub kind: ReferenceKind,
    pub error_bound: f64,
}

/// `X_T` for constant coefficients, with no discretization error.
pub fn exact_terminal_sample(
    cc: &ConstantCoefficients,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    cc.validate()?;
    if !(horizon > 0.0) {
        return invalid("horizon must be positive");
    }
    let d = cc.dim();
    let noise = NoiseSampler::new(cc)?;
    let mut dz = vec![0.0; d];
    let mut du = vec![0.0; cc.sub_indices.len()];
    noise.draw(horizon, rng, &mut dz, &mut du);
    let mut x = cc.x0.clone();
    for i in 0..d {
        let mut v: f64 = cc.mixing[i * d..(i + 1) * d]
            .iter()
            .zip(&dz)
            .map(|(a, b)| a * b)
            .sum();
        if let (Some(a), true) = (&cc.drift, drift_active(cc.alpha)) {
            v += a[i] * horizon;
        }
        if let Some(k) = &cc.loads {
            v += k[i] * du[i];
        }
        x[i] += v;
    }
    Ok(x)
}

/// Monte Carlo mean of `g(X_T)` by exact sampling.
pub fn exact_sampling_reference<G>(
    cc: &ConstantCoefficients,
    g: &G,
    horizon: f64,
    n_paths: u64,
    seed: u64,
    workers: usize,
) -> Result<ReferenceValue>
where
    G: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    if n_paths < 2 {
        return invalid("need at least two paths");
    }
    let m = crate::montecarlo::run_paths(seed, 0, n_paths, 1, workers, |rng, out| {
        out[0] = g(&exact_terminal_sample(cc, horizon, rng)?);
        Ok(())
    })?;
    let c = m.components[0];
    Ok(ReferenceValue {
        value: c.mean,
        kind: ReferenceKind::ExactSampling,
        error_bound: c.stderr(),
    })
}

/// Characteristic exponent of a one-dimensional constant-coefficient model.
pub fn symbol(cc: &ConstantCoefficients, xi: f64) -> Complex64 {
    let c = cc.mixing[0];
    let mut re = -(c * xi).abs().powf(cc.alpha);
    if let Some(k) = &cc.loads {
        for (ki, &ai) in k.iter().zip(&cc.sub_indices) {
            re -= (ki * xi).abs().powf(ai);
        }
    }
    let im = match (&cc.drift, drift_active(cc.alpha)) {
        (Some(a), true) => a[0] * xi,
        _ => 0.0,
    };
    Complex64::new(re, im)
}

fn characteristic(cc: &ConstantCoefficients, horizon: f64, xi: f64) -> Complex64 {
    (Complex64::new(0.0, xi * cc.x0[0]) + horizon * symbol(cc, xi)).exp()
}

/// `E cos(omega X_T + phase)` in closed form.
fn cosine_expectation(cc: &ConstantCoefficients, horizon: f64, omega: f64, phase: f64) -> f64 {
    (Complex64::from_polar(1.0, phase) * characteristic(cc, horizon, omega)).re
}

/// `E g(X_T)` from the characteristic function of a one-dimensional
/// constant-coefficient model. Cosine-type test functions are exact; a
/// Gaussian bump is integrated against its Fourier transform.
pub fn spectral_expectation(
    cc: &ConstantCoefficients,
    g: &TestFunction,
    horizon: f64,
) -> Result<ReferenceValue> {
    cc.validate()?;
    if cc.dim() != 1 {
        return invalid(format!(
            "spectral reference needs d = 1, got d = {}",
            cc.dim()
        ));
    }
    if !(horizon > 0.0) {
        return invalid("horizon must be positive");
    }
    let exact = |value: f64| ReferenceValue {
        value,
        kind: ReferenceKind::Spectral,
        error_bound: 0.0,
    };
    match g {
        TestFunction::Constant(v) => Ok(exact(*v)),
        TestFunction::Cosine { omega, phase } => {
            Ok(exact(cosine_expectation(cc, horizon, omega[0], *phase)))
        }
        TestFunction::Weierstrass(f) => {
            let mut v = f.base();
            if !f.is_constant() {
                for (j, (u, &phi)) in f.directions().iter().zip(f.phases()).enumerate() {
                    let w = f.amplitude() * (-f.target_beta() * j as f64).exp2();
                    v += w * cosine_expectation(cc, horizon, (j as f64).exp2() * u[0], phi);
                }
            }
            Ok(exact(v))
        }
        TestFunction::GaussianBump {
            center,
            width,
            height,
        } => {
            // E g = (h w / sqrt(2 pi)) int exp(-w^2 xi^2 / 2) Re(exp(-i xi m) phi_X(xi)) dxi
            let (m, w) = (center[0], *width);
            let cutoff = (80.0f64).sqrt() / w;
            let integrand = |xi: f64| {
                let phi = characteristic(cc, horizon, xi) * Complex64::from_polar(1.0, -xi * m);
                (-0.5 * w * w * xi * xi).exp() * phi.re
            };
            let pref = 2.0 * height * w / (2.0 * std::f64::consts::PI).sqrt();
            let coarse = pref * quadrature::composite(0.0, cutoff, 32, 16, integrand);
            let fine = pref * quadrature::composite(0.0, cutoff, 64, 16, integrand);
            let bound = (fine - coarse).abs() + pref.abs() * (-40.0f64).exp() / (w * w * cutoff);
            if !(fine.is_finite() && bound < 1e-8) {
                return Err(Error::Quadrature(format!(
                    "Fourier quadrature did not converge (bound {bound})"
                )));
            }
            Ok(ReferenceValue {
                value: fine,
                kind: ReferenceKind::Spectral,
                error_bound: bound,
            })
        }
    }
}

/// Number of uniform steps of size `delta` on `[0, horizon]`; `horizon / delta`
/// must be an integer.
pub fn steps_for(horizon: f64, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && horizon > 0.0) {
        return invalid("step and horizon must be positive");
    }
    let n = (horizon / delta).round();
    if n < 1.0 || ((horizon / delta) - n).abs() > 1e-9 * n {
        return invalid(format!(
            "horizon {horizon} is not a multiple of step {delta}"
        ));
    }
    Ok(n as usize)
}

/// Euler estimate on a uniform grid of step `delta_ref`; the error bound is
/// the Monte Carlo standard error only (the `O(delta_ref^kappa)` bias is not
/// included).
pub fn fine_euler_reference<C, G>(
    model: &C,
    g: &G,
    horizon: f64,
    delta_ref: f64,
    n_paths: u64,
    seed: u64,
    workers: usize,
) -> Result<ReferenceValue>
where
    C: Coefficients,
    G: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let grid = uniform_grid(horizon, steps_for(horizon, delta_ref)?)?;
    let cfg = EulerConfig {
        model,
        grid: &grid,
        record_path: false,
    };
    let r: MCResult = estimate(&cfg, g, n_paths, seed, workers)?;
    Ok(ReferenceValue {
        value: r.mean,
        kind: ReferenceKind::FineEuler,
        error_bound: r.stderr,
    })
}
