//! Exact samplers for symmetric, positive and isotropic stable laws.
//!
//! Scale convention: a unit-time symmetric (or isotropic) increment with
//! scale `sigma` has characteristic function `exp(-(sigma |xi|)^alpha)`.
//! At `alpha = 2` this is a Gaussian with per-coordinate variance
//! `2 sigma^2`; at `alpha = 1` it is a Cauchy law with scale `sigma`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    alpha: f64,
    dim: usize,
    scale: f64,
}

impl StableLaw {
    pub fn new(alpha: f64, dim: usize, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return invalid(format!("stability index must lie in (0, 2], got {alpha}"));
        }
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return invalid(format!("scale must be positive and finite, got {scale}"));
        }
        Ok(Self { alpha, dim, scale })
    }

    /// Unit-scale law.
    pub fn standard(alpha: f64, dim: usize) -> Result<Self> {
        Self::new(alpha, dim, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

#[inline]
fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e.max(f64::MIN_POSITIVE)
}

#[inline]
fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

/// Unit symmetric stable variate by the Chambers-Mallows-Stuck formula.
#[inline]
pub(crate) fn unit_symmetric<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let g: f64 = StandardNormal.sample(rng);
        return std::f64::consts::SQRT_2 * g;
    }
    let theta = PI * open01(rng) - FRAC_PI_2;
    if alpha == 1.0 {
        return theta.tan();
    }
    let e = exp1(rng);
    let a = (alpha * theta).sin() / theta.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * theta).cos() / e).powf((1.0 - alpha) / alpha);
    a * b
}

/// Positive stable variate (Kanter's representation).
#[inline]
pub(crate) fn unit_positive<R: Rng + ?Sized>(alpha_pos: f64, rng: &mut R) -> f64 {
    let u = PI * open01(rng);
    let e = exp1(rng);
    let a = (alpha_pos * u).sin() / u.sin().powf(1.0 / alpha_pos);
    let b = (((1.0 - alpha_pos) * u).sin() / e).powf((1.0 - alpha_pos) / alpha_pos);
    a * b
}

/// One-dimensional symmetric stable variate with characteristic function
/// `exp(-(sigma |xi|)^alpha)`.
pub fn sample_symmetric_1d<R: Rng + ?Sized>(law: &StableLaw, rng: &mut R) -> Result<f64> {
    if law.dim != 1 {
        return invalid(format!(
            "expected a one-dimensional law, got dim {}",
            law.dim
        ));
    }
    Ok(law.scale * unit_symmetric(law.alpha, rng))
}

/// Positive stable variate `S` with `E exp(-lambda S) = exp(-lambda^alpha_pos)`.
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha_pos: f64, rng: &mut R) -> Result<f64> {
    if !(alpha_pos > 0.0 && alpha_pos < 1.0) {
        return invalid(format!(
            "positive stable index must lie in (0, 1), got {alpha_pos}"
        ));
    }
    Ok(unit_positive(alpha_pos, rng))
}

/// Isotropic stable vector written into `out` (length = law dimension).
///
/// For `alpha < 2` the vector is `sqrt(2 S) G` with `S` positive
/// `(alpha/2)`-stable and `G` a standard Gaussian vector, since
/// `E exp(i <xi, sqrt(2S) G>) = E exp(-S |xi|^2) = exp(-|xi|^alpha)`.
pub fn sample_isotropic_into<R: Rng + ?Sized>(law: &StableLaw, rng: &mut R, out: &mut [f64]) {
    debug_assert_eq!(out.len(), law.dim);
    let radial = if law.alpha == 2.0 {
        std::f64::consts::SQRT_2
    } else {
        (2.0 * unit_positive(0.5 * law.alpha, rng)).sqrt()
    };
    let k = law.scale * radial;
    for v in out.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *v = k * g;
    }
}

pub fn sample_isotropic<R: Rng + ?Sized>(law: &StableLaw, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; law.dim];
    sample_isotropic_into(law, rng, &mut out);
    out
}

/// Increment of the isotropic process over a time step `dt`, using the
/// self-similarity `Z_{t+dt} - Z_t = dt^{1/alpha} Z_1` in law.
pub fn increment_into<R: Rng + ?Sized>(law: &StableLaw, dt: f64, rng: &mut R, out: &mut [f64]) {
    sample_isotropic_into(law, rng, out);
    let s = dt.powf(1.0 / law.alpha);
    for v in out.iter_mut() {
        *v *= s;
    }
}

pub fn increment<R: Rng + ?Sized>(law: &StableLaw, dt: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    let mut out = vec![0.0; law.dim];
    increment_into(law, dt, rng, &mut out);
    Ok(out)
}
