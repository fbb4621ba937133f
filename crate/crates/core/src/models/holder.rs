//! Lacunary cosine series with prescribed Hölder regularity.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default truncation depth of the lacunary series.
pub const DEFAULT_DEPTH: usize = 16;

/// `base + amplitude * sum_{j=0}^{depth} 2^{-beta j} cos(2^j <u_j, x> + phi_j)`.
///
/// For non-integer `beta` the untruncated series lies in `C^beta` and in no
/// `C^gamma` with `gamma > beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "FieldParts")]
pub struct HolderField {
    target_beta: f64,
    base: f64,
    amplitude: f64,
    depth: usize,
    directions: Vec<Vec<f64>>,
    phases: Vec<f64>,
    // 2^j u_j flattened, and amplitude 2^{-beta j}; empty when amplitude == 0.
    #[serde(skip)]
    freqs: Vec<f64>,
    #[serde(skip)]
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct FieldParts {
    target_beta: f64,
    base: f64,
    amplitude: f64,
    depth: usize,
    directions: Vec<Vec<f64>>,
    phases: Vec<f64>,
}

impl From<FieldParts> for HolderField {
    fn from(p: FieldParts) -> Self {
        Self::from_parts(
            p.target_beta,
            p.base,
            p.amplitude,
            p.depth,
            p.directions,
            p.phases,
        )
    }
}

fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

/// `sum_{j=0}^{depth} 2^{-beta j}`.
pub fn series_weight_sum(beta: f64, depth: usize) -> f64 {
    (0..=depth).map(|j| (-beta * j as f64).exp2()).sum()
}

impl HolderField {
    pub fn weierstrass<R: Rng + ?Sized>(
        dim: usize,
        target_beta: f64,
        base: f64,
        amplitude: f64,
        depth: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if !(target_beta > 0.0 && target_beta.is_finite()) {
            return invalid(format!("Hölder index must be positive, got {target_beta}"));
        }
        if dim == 0 {
            return invalid("field dimension must be at least 1");
        }
        let directions: Vec<Vec<f64>> = (0..=depth).map(|_| unit_vector(dim, rng)).collect();
        let phases: Vec<f64> = (0..=depth)
            .map(|_| 2.0 * PI * rng.random::<f64>())
            .collect();
        Ok(Self::from_parts(
            target_beta,
            base,
            amplitude,
            depth,
            directions,
            phases,
        ))
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self::from_parts(
            f64::INFINITY,
            value,
            0.0,
            0,
            vec![vec![0.0; dim]],
            vec![0.0],
        )
    }

    fn from_parts(
        target_beta: f64,
        base: f64,
        amplitude: f64,
        depth: usize,
        directions: Vec<Vec<f64>>,
        phases: Vec<f64>,
    ) -> Self {
        let mut field = Self {
            target_beta,
            base,
            amplitude,
            depth,
            directions,
            phases,
            freqs: Vec::new(),
            weights: Vec::new(),
        };
        field.rebuild_cache();
        field
    }

    fn rebuild_cache(&mut self) {
        self.freqs.clear();
        self.weights.clear();
        if self.amplitude == 0.0 {
            return;
        }
        for (j, u) in self.directions.iter().enumerate() {
            let scale = (j as f64).exp2();
            self.freqs.extend(u.iter().map(|c| scale * c));
            self.weights
                .push(self.amplitude * (-self.target_beta * j as f64).exp2());
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.weights.is_empty() {
            return self.base;
        }
        let d = x.len();
        let mut s = 0.0;
        for (j, (&w, &phi)) in self.weights.iter().zip(&self.phases).enumerate() {
            let f = &self.freqs[j * d..(j + 1) * d];
            let arg: f64 = f.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + phi;
            s += w * arg.cos();
        }
        self.base + s
    }

    pub fn is_constant(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn target_beta(&self) -> f64 {
        self.target_beta
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.directions.first().map_or(0, Vec::len)
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Largest possible deviation from `base`.
    pub fn oscillation_bound(&self) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            self.amplitude.abs() * series_weight_sum(self.target_beta, self.depth)
        }
    }

    /// Bound on `|field|`.
    pub fn sup_bound(&self) -> f64 {
        self.base.abs() + self.oscillation_bound()
    }

    /// Lower bound on the field value.
    pub fn inf_bound(&self) -> f64 {
        self.base - self.oscillation_bound()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn constant_field() {
        let f = HolderField::constant(2, 1.5);
        assert_eq!(f.eval(&[3.0, -1.0]), 1.5);
        assert!(f.is_constant());
        assert_eq!(f.sup_bound(), 1.5);
    }

    #[test]
    fn matches_series_definition() {
        let mut rng = RngStream::new(3, 0);
        let f = HolderField::weierstrass(2, 0.7, 1.0, 0.3, 16, &mut rng).unwrap();
        let x = [0.4, -1.2];
        let mut direct = 1.0;
        for j in 0..=16 {
            let u = &f.directions()[j];
            let arg = (j as f64).exp2() * (u[0] * x[0] + u[1] * x[1]) + f.phases()[j];
            direct += 0.3 * (-0.7 * j as f64).exp2() * arg.cos();
        }
        assert!((f.eval(&x) - direct).abs() < 1e-12);
    }

    #[test]
    fn respects_declared_bounds() {
        let mut rng = RngStream::new(4, 0);
        let f = HolderField::weierstrass(1, 0.5, 2.0, 0.4, 16, &mut rng).unwrap();
        for i in 0..10_000 {
            let x = [-50.0 + 0.01 * i as f64];
            let v = f.eval(&x);
            assert!(v <= f.sup_bound() + 1e-12 && v >= f.inf_bound() - 1e-12);
        }
    }

    #[test]
    fn cache_survives_serde_round_trip() {
        let mut rng = RngStream::new(5, 0);
        let f = HolderField::weierstrass(1, 1.5, 0.0, 1.0, 8, &mut rng).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g: HolderField = serde_json::from_str(&s).unwrap();
        assert_eq!(f.eval(&[0.3]), g.eval(&[0.3]));
    }

    #[test]
    fn series_sum_closed_form() {
        let s = series_weight_sum(0.7, 16);
        let closed = (1.0 - (-0.7f64 * 17.0).exp2()) / (1.0 - (-0.7f64).exp2());
        assert!((s - closed).abs() < 1e-13);
    }
}
