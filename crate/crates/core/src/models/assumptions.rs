//! Numerical spot checks of the nondegeneracy and small-jump assumptions and
//! an empirical Hölder-Zygmund seminorm.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{m_density_from_matrix, Coefficients};
use crate::error::{invalid, Error, Result};
use crate::quadrature;
use crate::rng::RngStream;

const GL_ORDER: usize = 16;

/// Quasi-uniform lattice on `[-half_width, half_width]^dim` (about half the
/// points) topped up with seeded uniform points to `n` in total.
pub fn probe_points(dim: usize, n: usize, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    let per_axis = ((n / 2).max(1) as f64)
        .powf(1.0 / dim as f64)
        .floor()
        .max(1.0) as usize;
    let lattice = per_axis.pow(dim as u32).min(n);
    let mut pts = Vec::with_capacity(n);
    for idx in 0..lattice {
        let mut rem = idx;
        let p: Vec<f64> = (0..dim)
            .map(|_| {
                let k = rem % per_axis;
                rem /= per_axis;
                if per_axis == 1 {
                    0.0
                } else {
                    -half_width + 2.0 * half_width * k as f64 / (per_axis - 1) as f64
                }
            })
            .collect();
        pts.push(p);
    }
    let mut rng = RngStream::new(seed, 0);
    while pts.len() < n {
        pts.push(
            (0..dim)
                .map(|_| half_width * (2.0 * rng.random::<f64>() - 1.0))
                .collect(),
        );
    }
    pts
}

/// Unit directions used for the minimum over `|xi| = 1`.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0]],
        2 => (0..count)
            .map(|i| {
                let t = PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci points on the upper half of S^2 (the integrand is even in xi).
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    let mut v = vec![r * t.cos(), r * t.sin(), z];
                    v.resize(dim, 0.0);
                    v
                })
                .collect()
        }
    }
}

/// `int_{S^{d-1}} |(w, xi)|^alpha m(x, w) mu_{d-1}(dw)` for `d <= 3`, with
/// quadrature panels split where `(w, xi)` vanishes.
pub fn sphere_integral<C: Coefficients>(
    model: &C,
    x: &[f64],
    xi: &[f64],
    quadrature_n: usize,
) -> Result<f64> {
    let d = model.dim();
    let alpha = model.alpha();
    let mut c = vec![0.0; d * d];
    model.mixing(x, &mut c);
    let m = |w: &[f64]| m_density_from_matrix(d, alpha, &c, w);
    let dot = |w: &[f64]| w.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
    let value = match d {
        1 => [1.0, -1.0]
            .iter()
            .map(|&w| dot(&[w]).abs().powf(alpha) * m(&[w]))
            .sum(),
        2 => {
            let psi = xi[1].atan2(xi[0]);
            let panels = (quadrature_n / (2 * GL_ORDER)).max(1);
            let f = |t: f64| {
                let w = [t.cos(), t.sin()];
                dot(&w).abs().powf(alpha) * m(&w)
            };
            quadrature::composite(psi - PI / 2.0, psi + PI / 2.0, panels, GL_ORDER, f)
                + quadrature::composite(psi + PI / 2.0, psi + 1.5 * PI, panels, GL_ORDER, f)
        }
        3 => {
            let (e1, e2) = orthonormal_complement(xi);
            let n_theta = ((quadrature_n as f64).sqrt() as usize).max(16);
            let panels = (quadrature_n / (n_theta * 2 * GL_ORDER)).max(1);
            let inner = |phi: f64| {
                let (sp, cp) = phi.sin_cos();
                let mut s = 0.0;
                for k in 0..n_theta {
                    let th = 2.0 * PI * k as f64 / n_theta as f64;
                    let (st, ct) = th.sin_cos();
                    let w: Vec<f64> = (0..3)
                        .map(|i| cp * xi[i] + sp * (ct * e1[i] + st * e2[i]))
                        .collect();
                    s += m(&w);
                }
                cp.abs().powf(alpha) * sp * s * 2.0 * PI / n_theta as f64
            };
            quadrature::composite(0.0, PI / 2.0, panels, GL_ORDER, inner)
                + quadrature::composite(PI / 2.0, PI, panels, GL_ORDER, inner)
        }
        _ => {
            return Err(Error::Quadrature(format!(
                "sphere quadrature supports d <= 3, got d = {d}"
            )))
        }
    };
    if !value.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite sphere integral at x = {x:?}"
        )));
    }
    Ok(value)
}

fn orthonormal_complement(xi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let a = if xi[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let proj: f64 = (0..3).map(|i| a[i] * xi[i]).sum();
    let mut e1: Vec<f64> = (0..3).map(|i| a[i] - proj * xi[i]).collect();
    let n = e1.iter().map(|v| v * v).sum::<f64>().sqrt();
    e1.iter_mut().for_each(|v| *v /= n);
    let e2 = vec![
        xi[1] * e1[2] - xi[2] * e1[1],
        xi[2] * e1[0] - xi[0] * e1[2],
        xi[0] * e1[1] - xi[1] * e1[0],
    ];
    (e1, e2)
}

/// Minimum over probe points and unit directions of the nondegeneracy
/// integral. The assumption holds numerically when the result is positive.
pub fn check_a1_nondegeneracy<C: Coefficients>(
    model: &C,
    probe_points: &[Vec<f64>],
    quadrature_n: usize,
) -> Result<f64> {
    if probe_points.is_empty() {
        return invalid("need at least one probe point");
    }
    let dirs = sphere_directions(model.dim(), 32);
    let mut best = f64::INFINITY;
    for x in probe_points {
        for xi in &dirs {
            best = best.min(sphere_integral(model, x, xi, quadrature_n)?);
        }
    }
    Ok(best)
}

/// `sup_x sum_i |k_i(x)|^{alpha_i} 2 delta^{alpha - alpha_i} / (alpha - alpha_i)`,
/// the small-jump integral of the coordinate-axis part.
pub fn check_a1_small_jumps<C: Coefficients>(
    model: &C,
    probe_points: &[Vec<f64>],
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    let idx = model.sub_indices();
    if idx.is_empty() {
        return Ok(0.0);
    }
    let alpha = model.alpha();
    let mut k = vec![0.0; model.dim()];
    let mut sup = 0.0f64;
    for x in probe_points {
        model.loads(x, &mut k);
        let v: f64 = k
            .iter()
            .zip(idx)
            .map(|(ki, &ai)| ki.abs().powf(ai) * 2.0 * delta.powf(alpha - ai) / (alpha - ai))
            .sum();
        sup = sup.max(v);
    }
    Ok(sup)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }
}

/// Sampling plan for [`holder_seminorm_estimate`]: `|h|` is log-uniform on
/// `[h_min, h_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderProbe {
    pub n_pairs: usize,
    pub h_min: f64,
    pub h_max: f64,
}

fn mixed_difference<F: Fn(&[f64]) -> f64 + ?Sized>(
    f: &F,
    x: &mut Vec<f64>,
    axes: &[usize],
    step: f64,
) -> f64 {
    match axes.split_first() {
        None => f(x),
        Some((&a, rest)) => {
            let x0 = x[a];
            x[a] = x0 + step;
            let up = mixed_difference(f, x, rest, step);
            x[a] = x0 - step;
            let down = mixed_difference(f, x, rest, step);
            x[a] = x0;
            (up - down) / (2.0 * step)
        }
    }
}

/// Empirical lower bound on the `C^beta` seminorm of `f` over a box.
///
/// With `beta = r + s`, `r` integer and `s in (0, 1]`, each sampled pair
/// `(x, h)` contributes `|D f(x+h) - D f(x)| / |h|^s` (or the symmetric second
/// difference over `|h|` when `s = 1`), where `D` is an order-`r` mixed
/// partial along random axes taken by central differences with step `|h|/8`.
pub fn holder_seminorm_estimate<F>(
    f: &F,
    beta: f64,
    domain: &BoxDomain,
    probe: &HolderProbe,
    rng: &mut RngStream,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    if !(beta > 0.0) {
        return invalid("beta must be positive");
    }
    if !(probe.h_min > 0.0 && probe.h_min <= probe.h_max) {
        return invalid("need 0 < h_min <= h_max");
    }
    let dim = domain.lo.len();
    let order = beta.ceil() as usize - 1;
    let frac = beta - order as f64;
    let (lmin, lmax) = (probe.h_min.ln(), probe.h_max.ln());
    let mut best = 0.0f64;
    for _ in 0..probe.n_pairs {
        let x: Vec<f64> = domain
            .lo
            .iter()
            .zip(&domain.hi)
            .map(|(a, b)| a + (b - a) * rng.random::<f64>())
            .collect();
        let hn = (lmin + (lmax - lmin) * rng.random::<f64>()).exp();
        let mut u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let un = u.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
        u.iter_mut().for_each(|a| *a *= hn / un);
        let axes: Vec<usize> = (0..order).map(|_| rng.random_range(0..dim)).collect();
        let step = hn / 8.0;
        let shifted =
            |sign: f64| -> Vec<f64> { x.iter().zip(&u).map(|(a, b)| a + sign * b).collect() };
        let d0 = mixed_difference(f, &mut x.clone(), &axes, step);
        let dp = mixed_difference(f, &mut shifted(1.0), &axes, step);
        let q = if frac < 1.0 {
            (dp - d0).abs() / hn.powf(frac)
        } else {
            let dm = mixed_difference(f, &mut shifted(-1.0), &axes, step);
            (dp - 2.0 * d0 + dm).abs() / hn
        };
        if q.is_finite() {
            best = best.max(q);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        make_example1_model, ConstantCoefficients, Example1Config, HolderField, LoadConfig,
    };

    #[test]
    fn one_dimensional_identity_gives_two() {
        let cc = ConstantCoefficients::identity(0.8, vec![0.0]);
        let v = check_a1_nondegeneracy(&cc, &[vec![0.0], vec![1.0]], 64).unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn planar_cauchy_identity_gives_four() {
        let cc = ConstantCoefficients::identity(1.0, vec![0.0, 0.0]);
        let v = check_a1_nondegeneracy(&cc, &[vec![0.0, 0.0]], 512).unwrap();
        assert!((v - 4.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn anisotropic_matches_dense_trapezoid() {
        let mut cc = ConstantCoefficients::identity(1.5, vec![0.0, 0.0]);
        cc.mixing = vec![1.0, 0.0, 0.0, 2.0];
        // Independent oracle: uniform trapezoid of the explicit formula.
        let oracle = |psi: f64| {
            let n = 400_000;
            let h = 2.0 * PI / n as f64;
            (0..n)
                .map(|i| {
                    let t = i as f64 * h;
                    let (w0, w1) = (t.cos(), t.sin());
                    let dot = (w0 * psi.cos() + w1 * psi.sin()).abs().powf(1.5);
                    let inv = ((w0 / 1.0).powi(2) + (w1 / 2.0).powi(2)).sqrt();
                    dot / (2.0 * inv.powf(3.5)) * h
                })
                .sum::<f64>()
        };
        let dirs = sphere_directions(2, 32);
        let mut min_oracle = f64::INFINITY;
        for xi in &dirs {
            let psi = xi[1].atan2(xi[0]);
            let q = sphere_integral(&cc, &[0.0, 0.0], xi, 512).unwrap();
            let o = oracle(psi);
            assert!((q - o).abs() < 1e-6, "psi {psi}: {q} vs {o}");
            min_oracle = min_oracle.min(o);
        }
        let v = check_a1_nondegeneracy(&cc, &[vec![0.0, 0.0]], 512).unwrap();
        assert!(v > 0.0 && (v - min_oracle).abs() < 1e-6);
    }

    #[test]
    fn three_dimensional_identity() {
        // int_{S^2} |w_3|^alpha dw = 4 pi / (alpha + 1)
        let cc = ConstantCoefficients::identity(1.0, vec![0.0; 3]);
        let v = sphere_integral(&cc, &[0.0; 3], &[0.0, 0.0, 1.0], 4096).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-6, "{v}");
    }

    #[test]
    fn small_jumps_closed_form() {
        let cfg = Example1Config {
            loads: Some(LoadConfig {
                offset: 1.0,
                amplitude: 0.0,
                sub_indices: vec![0.5],
            }),
            ..Default::default()
        };
        let m = make_example1_model(1.5, 1, 0.7, &cfg).unwrap();
        let probes = probe_points(1, 100, 4.0, 0);
        let v = check_a1_small_jumps(&m, &probes, 0.1).unwrap();
        assert!((v - 0.2).abs() < 1e-12);
        let half = check_a1_small_jumps(&m, &probes, 0.05).unwrap();
        assert!((half / v - 0.5f64).abs() < 1e-12);
        let none = ConstantCoefficients::identity(1.5, vec![0.0]);
        assert_eq!(check_a1_small_jumps(&none, &probes, 0.1).unwrap(), 0.0);
        assert!(check_a1_small_jumps(&m, &probes, 1.5).is_err());
    }

    #[test]
    fn small_jumps_decrease_to_zero() {
        let cfg = Example1Config {
            loads: Some(LoadConfig {
                offset: 0.5,
                amplitude: 0.2,
                sub_indices: vec![0.4, 1.1],
            }),
            seed: 2,
            ..Default::default()
        };
        let m = make_example1_model(1.6, 2, 0.6, &cfg).unwrap();
        let probes = probe_points(2, 2000, 4.0, 1);
        let vals: Vec<f64> = (1..=6)
            .map(|e| check_a1_small_jumps(&m, &probes, 10f64.powi(-e)).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        // the two terms decay like delta^1.2 and delta^0.5
        let r = vals[5] / vals[4];
        assert!((10f64.powf(-1.2)..=10f64.powf(-0.5)).contains(&r), "{r}");
        assert!(vals[5] < 1e-2);
    }

    #[test]
    fn constant_function_has_zero_seminorm() {
        let mut rng = RngStream::new(0, 0);
        let probe = HolderProbe {
            n_pairs: 500,
            h_min: 1e-4,
            h_max: 1.0,
        };
        for beta in [0.5, 1.0, 2.3] {
            let v = holder_seminorm_estimate(
                &|_: &[f64]| 3.0,
                beta,
                &BoxDomain::cube(2, 1.0),
                &probe,
                &mut rng,
            )
            .unwrap();
            assert_eq!(v, 0.0);
        }
    }

    fn seminorm(f: &HolderField, beta: f64, n_pairs: usize, h_min: f64, seed: u64) -> f64 {
        let mut rng = RngStream::new(seed, 0);
        let probe = HolderProbe {
            n_pairs,
            h_min,
            h_max: 1.0,
        };
        holder_seminorm_estimate(
            &|x: &[f64]| f.eval(x),
            beta,
            &BoxDomain::cube(1, 3.0),
            &probe,
            &mut rng,
        )
        .unwrap()
    }

    #[test]
    fn weierstrass_seminorm_stable_at_its_index() {
        let mut rng = RngStream::new(1, 0);
        let w = HolderField::weierstrass(1, 0.7, 0.0, 1.0, 16, &mut rng).unwrap();
        let small = seminorm(&w, 0.7, 2_000, 1e-4, 2);
        let large = seminorm(&w, 0.7, 20_000, 1e-4, 3);
        assert!(small.is_finite() && large.is_finite());
        assert!((large / small - 1.0).abs() < 0.2, "{small} vs {large}");
        let coarse = seminorm(&w, 0.9, 5_000, 1e-2, 4);
        let fine = seminorm(&w, 0.9, 5_000, 1e-4, 4);
        assert!(fine > 2.0 * coarse, "{coarse} vs {fine}");
    }

    #[test]
    fn zygmund_branch_for_abs_sine() {
        // Brute-force oracle: sup of |f(x+h) - 2 f(x) + f(x-h)| / |h| on a grid.
        let f = |x: &[f64]| x[0].sin().abs();
        let mut oracle = 0.0f64;
        for i in 0..2000 {
            let x = -3.0 + 6.0 * i as f64 / 2000.0;
            for k in 0..60 {
                let h = 10f64.powf(-4.0 + 4.0 * k as f64 / 60.0);
                let q = ((x + h).sin().abs() - 2.0 * x.sin().abs() + (x - h).sin().abs()).abs() / h;
                oracle = oracle.max(q);
            }
        }
        let mut rng = RngStream::new(5, 0);
        let probe = HolderProbe {
            n_pairs: 20_000,
            h_min: 1e-4,
            h_max: 1.0,
        };
        let v =
            holder_seminorm_estimate(&f, 1.0, &BoxDomain::cube(1, 3.0), &probe, &mut rng).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(v <= 2.0 + 1e-9 && v >= 0.5 * oracle, "{v} vs {oracle}");
        assert!(oracle <= 2.0 + 1e-9);
    }
}
