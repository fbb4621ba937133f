//! Bounded test functions `g` with declared regularity.

use serde::{Deserialize, Serialize};

use super::holder::{HolderField, DEFAULT_DEPTH};
use crate::error::Result;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunctionKind {
    /// `cos(<u, x> + phi)` with a seeded unit direction and phase.
    Smooth,
    /// Lacunary series of index `alpha + beta`.
    Weierstrass,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    /// `cos(<omega, x> + phase)`.
    Cosine {
        omega: Vec<f64>,
        phase: f64,
    },
    /// `height * exp(-|x - center|^2 / (2 width^2))`.
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        height: f64,
    },
    Weierstrass(HolderField),
}

impl TestFunction {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Constant(v) => *v,
            TestFunction::Cosine { omega, phase } => {
                (omega.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + phase).cos()
            }
            TestFunction::GaussianBump {
                center,
                width,
                height,
            } => {
                let r2: f64 = center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum();
                height * (-r2 / (2.0 * width * width)).exp()
            }
            TestFunction::Weierstrass(f) => f.eval(x),
        }
    }

    /// Declared Hölder regularity (`INFINITY` for smooth functions).
    pub fn regularity(&self) -> f64 {
        match self {
            TestFunction::Weierstrass(f) => f.target_beta(),
            _ => f64::INFINITY,
        }
    }

    pub fn sup_bound(&self) -> f64 {
        match self {
            TestFunction::Constant(v) => v.abs(),
            TestFunction::Cosine { .. } => 1.0,
            TestFunction::GaussianBump { height, .. } => height.abs(),
            TestFunction::Weierstrass(f) => f.sup_bound(),
        }
    }
}

/// Test function of the requested kind; the Weierstrass kind has regularity
/// exactly `alpha + beta`.
pub fn make_test_function(
    kind: &TestFunctionKind,
    dim: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
) -> Result<TestFunction> {
    let mut rng = RngStream::new(seed, u64::MAX);
    match kind {
        TestFunctionKind::Smooth => {
            use rand::Rng;
            use rand_distr::{Distribution, StandardNormal};
            let mut u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            u.iter_mut().for_each(|a| *a /= n);
            let phase = std::f64::consts::TAU * rng.random::<f64>();
            Ok(TestFunction::Cosine { omega: u, phase })
        }
        TestFunctionKind::Weierstrass => Ok(TestFunction::Weierstrass(HolderField::weierstrass(
            dim,
            alpha + beta,
            0.0,
            1.0,
            DEFAULT_DEPTH,
            &mut rng,
        )?)),
    }
}

/// Wraps a user function so its values are clamped to `[-bound, bound]`.
pub fn clamped<G: Fn(&[f64]) -> f64>(g: G, bound: f64) -> impl Fn(&[f64]) -> f64 {
    move |x| g(x).clamp(-bound, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::assumptions::{holder_seminorm_estimate, BoxDomain, HolderProbe};

    #[test]
    fn smooth_is_bounded_cosine() {
        let g = make_test_function(&TestFunctionKind::Smooth, 2, 1.5, 0.5, 3).unwrap();
        match &g {
            TestFunction::Cosine { omega, .. } => {
                let n: f64 = omega.iter().map(|a| a * a).sum();
                assert!((n - 1.0).abs() < 1e-14);
            }
            _ => panic!("expected cosine"),
        }
        assert_eq!(g.regularity(), f64::INFINITY);
        for i in 0..100 {
            assert!(g.eval(&[i as f64, -0.3 * i as f64]).abs() <= 1.0);
        }
    }

    #[test]
    fn weierstrass_kind_has_index_alpha_plus_beta() {
        let g = make_test_function(&TestFunctionKind::Weierstrass, 1, 2.0, 0.2, 1).unwrap();
        assert!((g.regularity() - 2.2).abs() < 1e-15);
        let f = |x: &[f64]| g.eval(x);
        let seminorm = |beta: f64, h_min: f64| {
            let mut rng = RngStream::new(7, 0);
            let probe = HolderProbe {
                n_pairs: 4_000,
                h_min,
                h_max: 1.0,
            };
            holder_seminorm_estimate(&f, beta, &BoxDomain::cube(1, 3.0), &probe, &mut rng).unwrap()
        };
        let ok_coarse = seminorm(2.2, 1e-2);
        let ok_fine = seminorm(2.2, 1e-4);
        assert!(
            ok_fine.is_finite() && ok_fine < 1.5 * ok_coarse,
            "{ok_coarse} vs {ok_fine}"
        );
        let bad_coarse = seminorm(2.4, 1e-2);
        let bad_fine = seminorm(2.4, 1e-4);
        assert!(bad_fine > 2.0 * bad_coarse, "{bad_coarse} vs {bad_fine}");
    }

    #[test]
    fn clamp_wrapper() {
        let g = clamped(|x: &[f64]| 10.0 * x[0], 1.0);
        assert_eq!(g(&[5.0]), 1.0);
        assert_eq!(g(&[-5.0]), -1.0);
        assert_eq!(g(&[0.05]), 0.5);
    }

    #[test]
    fn bump_and_constant() {
        let b = TestFunction::GaussianBump {
            center: vec![1.0],
            width: 0.5,
            height: 2.0,
        };
        assert_eq!(b.eval(&[1.0]), 2.0);
        assert_eq!(TestFunction::Constant(0.4).eval(&[9.0]), 0.4);
    }
}
