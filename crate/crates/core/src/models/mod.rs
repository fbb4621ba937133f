//! The process class: an SDE driven by an isotropic `alpha`-stable
//! process `Z` and independent one-dimensional `alpha_i`-stable processes
//! `U^i`,
//!
//! ```text
//! dX = 1{alpha in (1,2]} a(X) dt + c(X-) dZ + diag(k(X-)) dU
//! ```
//!
//! with bounded Hölder coefficient fields.

pub mod assumptions;
pub mod holder;
pub mod test_fn;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;

pub use holder::{series_weight_sum, HolderField, DEFAULT_DEPTH};

/// `true` when the drift term is switched on for this stability index.
#[inline]
pub fn drift_active(alpha: f64) -> bool {
    alpha > 1.0 && alpha <= 2.0
}

/// Rejects `beta <= 0` and integer `beta`.
pub fn validate_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return invalid(format!(
            "Hölder index must be positive and finite, got {beta}"
        ));
    }
    if beta.fract() == 0.0 {
        return invalid(format!("Hölder index must not be an integer, got {beta}"));
    }
    Ok(())
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return invalid(format!("stability index must lie in (0, 2], got {alpha}"));
    }
    Ok(())
}

/// Coefficient access used by the Euler stepper. Matrices are row-major.
pub trait Coefficients: Sync {
    fn alpha(&self) -> f64;
    fn dim(&self) -> usize;
    /// Indices `alpha_i` of the coordinatewise stable drivers; empty when the
    /// model has no `diag(k) dU` term.
    fn sub_indices(&self) -> &[f64];
    fn has_drift(&self) -> bool;
    fn drift(&self, x: &[f64], out: &mut [f64]);
    fn mixing(&self, x: &[f64], out: &mut [f64]);
    fn loads(&self, x: &[f64], out: &mut [f64]);
    fn initial_state(&self, rng: &mut RngStream, out: &mut [f64]);
    /// True when no coefficient depends on the state, so Euler is exact.
    fn state_independent(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialLaw {
    Point { x0: Vec<f64> },
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
}

impl InitialLaw {
    fn dim(&self) -> usize {
        match self {
            InitialLaw::Point { x0 } => x0.len(),
            InitialLaw::UniformBox { lo, .. } => lo.len(),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if let InitialLaw::UniformBox { lo, hi } = self {
            if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
                return invalid("initial box needs lo < hi coordinatewise");
            }
        }
        if self.dim() != dim {
            return invalid(format!(
                "initial value has dimension {}, model has {dim}",
                self.dim()
            ));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
        use rand::Rng;
        match self {
            InitialLaw::Point { x0 } => out.copy_from_slice(x0),
            InitialLaw::UniformBox { lo, hi } => {
                for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
                    *o = a + (b - a) * rng.random::<f64>();
                }
            }
        }
    }
}

/// Constant coefficients with no structural checks, for exact references and
/// raw test harnesses (a zero mixing matrix is allowed here).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantCoefficients {
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<f64>>,
    /// Row-major `d x d`.
    pub mixing: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loads: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sub_indices: Vec<f64>,
    pub x0: Vec<f64>,
}

impl ConstantCoefficients {
    /// `c = I`, no drift, no loads, started at `x0`.
    pub fn identity(alpha: f64, x0: Vec<f64>) -> Self {
        let d = x0.len();
        let mut mixing = vec![0.0; d * d];
        for i in 0..d {
            mixing[i * d + i] = 1.0;
        }
        Self {
            alpha,
            drift: None,
            mixing,
            loads: None,
            sub_indices: Vec::new(),
            x0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_alpha(self.alpha)?;
        let d = self.x0.len();
        if d == 0 {
            return invalid("dimension must be at least 1");
        }
        if self.mixing.len() != d * d {
            return invalid(format!("mixing matrix needs {} entries", d * d));
        }
        if let Some(a) = &self.drift {
            if a.len() != d {
                return invalid("drift dimension mismatch");
            }
        }
        match &self.loads {
            Some(k) => {
                if k.len() != d || self.sub_indices.len() != d {
                    return invalid("loads and sub-indices need one entry per coordinate");
                }
                for &ai in &self.sub_indices {
                    if !(ai > 0.0 && ai < self.alpha) {
                        return invalid(format!("sub-index {ai} must lie in (0, alpha)"));
                    }
                }
            }
            None => {
                if !self.sub_indices.is_empty() {
                    return invalid("sub-indices given without loads");
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }
}

impl Coefficients for ConstantCoefficients {
    fn state_independent(&self) -> bool {
        true
    }
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn dim(&self) -> usize {
        self.x0.len()
    }
    fn sub_indices(&self) -> &[f64] {
        &self.sub_indices
    }
    fn has_drift(&self) -> bool {
        self.drift.is_some()
    }
    fn drift(&self, _x: &[f64], out: &mut [f64]) {
        match &self.drift {
            Some(a) => out.copy_from_slice(a),
            None => out.fill(0.0),
        }
    }
    fn mixing(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.mixing);
    }
    fn loads(&self, _x: &[f64], out: &mut [f64]) {
        match &self.loads {
            Some(k) => out.copy_from_slice(k),
            None => out.fill(0.0),
        }
    }
    fn initial_state(&self, _rng: &mut RngStream, out: &mut [f64]) {
        out.copy_from_slice(&self.x0);
    }
}

/// Amplitudes and offsets for [`make_example1_model`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example1Config {
    /// Diagonal offset of `c`.
    pub c0: f64,
    /// Amplitude of the Hölder field multiplying the identity in `c`.
    #[serde(default)]
    pub c1: f64,
    /// Amplitude of the off-diagonal Hölder fields of `c`.
    #[serde(default)]
    pub c_off: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<FieldConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loads: Option<LoadConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_box: Option<(Vec<f64>, Vec<f64>)>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

impl Default for Example1Config {
    fn default() -> Self {
        Self {
            c0: 1.0,
            c1: 0.0,
            c_off: 0.0,
            drift: None,
            loads: None,
            x0: None,
            x0_box: None,
            depth: DEFAULT_DEPTH,
            seed: 0,
        }
    }
}

/// `offset + amplitude * W_beta(x)` per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub offset: f64,
    #[serde(default)]
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    pub offset: f64,
    #[serde(default)]
    pub amplitude: f64,
    /// One index per coordinate, or a single index shared by all.
    pub sub_indices: Vec<f64>,
}

/// A validated model of the process class.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessModel {
    alpha: f64,
    dim: usize,
    beta: Option<f64>,
    drift: Option<Vec<HolderField>>,
    mixing: Vec<HolderField>,
    loads: Option<Vec<HolderField>>,
    sub_indices: Vec<f64>,
    x0: InitialLaw,
    det_lower_bound: f64,
    shared_diag: bool,
}

/// Lower bound on `|det A|` for a strictly row-diagonally-dominant matrix
/// with diagonal entries at least `diag_min` and off-diagonal entries at most
/// `off_max` in magnitude (Ostrowski).
fn dominance_det_bound(dim: usize, diag_min: f64, off_max: f64) -> f64 {
    let margin = diag_min - (dim as f64 - 1.0) * off_max;
    if margin <= 0.0 {
        0.0
    } else {
        margin.powi(dim as i32)
    }
}

/// Builds a model whose fields are lacunary series of index `beta`:
/// `c(x) = (c0 + c1 W(x)) I + c_off * (independent fields off the diagonal)`,
/// `k_i(x) = k0 + k1 W_i(x)` and, for `alpha in (1, 2]`,
/// `a_i(x) = a0 + a1 W_i(x)`.
pub fn make_example1_model(
    alpha: f64,
    dim: usize,
    beta: f64,
    config: &Example1Config,
) -> Result<ProcessModel> {
    validate_alpha(alpha)?;
    validate_beta(beta)?;
    if dim == 0 {
        return invalid("dimension must be at least 1");
    }
    if !(config.c0 > 0.0) {
        return invalid("c0 must be positive");
    }
    if config.drift.is_some() && !drift_active(alpha) {
        return invalid(format!(
            "a drift is only allowed for alpha in (1, 2], got alpha = {alpha}"
        ));
    }
    let depth = config.depth;
    let mut stream_id = 0u64;
    let mut field = |base: f64, amplitude: f64| -> Result<HolderField> {
        stream_id += 1;
        if amplitude == 0.0 {
            return Ok(HolderField::constant(dim, base));
        }
        let mut rng = RngStream::new(config.seed, stream_id);
        HolderField::weierstrass(dim, beta, base, amplitude, depth, &mut rng)
    };

    let diag = field(config.c0, config.c1)?;
    let mut mixing = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                mixing.push(diag.clone());
            } else {
                mixing.push(field(0.0, config.c_off)?);
            }
        }
    }
    let off_max = config.c_off.abs() * series_weight_sum(beta, depth);
    let det_lower_bound =
        dominance_det_bound(dim, diag.inf_bound(), if dim > 1 { off_max } else { 0.0 });
    if !(det_lower_bound > 0.0) {
        return Err(Error::Model(format!(
            "degenerate mixing configuration: c0 = {}, c1 = {}, c_off = {} cannot guarantee inf |det c| > 0",
            config.c0, config.c1, config.c_off
        )));
    }

    let drift = match &config.drift {
        Some(fc) => Some(
            (0..dim)
                .map(|_| field(fc.offset, fc.amplitude))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };

    let (loads, sub_indices) = match &config.loads {
        Some(lc) => {
            let idx = match lc.sub_indices.len() {
                1 => vec![lc.sub_indices[0]; dim],
                n if n == dim => lc.sub_indices.clone(),
                n => return invalid(format!("expected 1 or {dim} sub-indices, got {n}")),
            };
            for &ai in &idx {
                if !(ai > 0.0 && ai < alpha) {
                    return invalid(format!("sub-index {ai} must lie in (0, alpha = {alpha})"));
                }
            }
            let k = (0..dim)
                .map(|_| field(lc.offset, lc.amplitude))
                .collect::<Result<Vec<_>>>()?;
            (Some(k), idx)
        }
        None => (None, Vec::new()),
    };

    let x0 = match (&config.x0, &config.x0_box) {
        (Some(_), Some(_)) => return invalid("give either x0 or x0_box, not both"),
        (Some(p), None) => InitialLaw::Point { x0: p.clone() },
        (None, Some((lo, hi))) => InitialLaw::UniformBox {
            lo: lo.clone(),
            hi: hi.clone(),
        },
        (None, None) => InitialLaw::Point { x0: vec![0.0; dim] },
    };
    x0.validate(dim)?;

    Ok(ProcessModel {
        alpha,
        dim,
        beta: Some(beta),
        drift,
        mixing,
        loads,
        sub_indices,
        x0,
        det_lower_bound,
        shared_diag: true,
    })
}

impl ProcessModel {
    /// A constant-coefficient member of the class; requires `det c != 0`.
    pub fn constant(cc: &ConstantCoefficients) -> Result<Self> {
        cc.validate()?;
        if cc.drift.is_some() && !drift_active(cc.alpha) {
            return invalid(format!(
                "a drift is only allowed for alpha in (1, 2], got alpha = {}",
                cc.alpha
            ));
        }
        let d = cc.dim();
        let det = linalg::determinant(d, &cc.mixing).abs();
        if !(det > 0.0) {
            return Err(Error::Model("mixing matrix is singular".into()));
        }
        let consts = |v: &[f64]| {
            v.iter()
                .map(|&a| HolderField::constant(d, a))
                .collect::<Vec<_>>()
        };
        Ok(Self {
            alpha: cc.alpha,
            dim: d,
            beta: None,
            drift: cc.drift.as_deref().map(consts),
            mixing: consts(&cc.mixing),
            loads: cc.loads.as_deref().map(consts),
            sub_indices: cc.sub_indices.clone(),
            x0: InitialLaw::Point { x0: cc.x0.clone() },
            det_lower_bound: det,
            shared_diag: false,
        })
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn initial_law(&self) -> &InitialLaw {
        &self.x0
    }

    /// Constructive lower bound on `inf_x |det c(x)|`.
    pub fn det_lower_bound(&self) -> f64 {
        self.det_lower_bound
    }

    pub fn mixing_fields(&self) -> &[HolderField] {
        &self.mixing
    }

    pub fn drift_fields(&self) -> Option<&[HolderField]> {
        self.drift.as_deref()
    }

    pub fn load_fields(&self) -> Option<&[HolderField]> {
        self.loads.as_deref()
    }

    /// Bound on every coefficient field's magnitude.
    pub fn coefficient_bound(&self) -> f64 {
        self.all_fields()
            .map(HolderField::sup_bound)
            .fold(0.0, f64::max)
    }

    fn all_fields(&self) -> impl Iterator<Item = &HolderField> {
        self.mixing
            .iter()
            .chain(self.drift.iter().flatten())
            .chain(self.loads.iter().flatten())
    }

    pub fn is_constant(&self) -> bool {
        self.all_fields().all(HolderField::is_constant)
    }

    /// The frozen coefficients of a constant model started at a point.
    pub fn as_constant(&self) -> Result<ConstantCoefficients> {
        if !self.is_constant() {
            return Err(Error::Model("model coefficients are not constant".into()));
        }
        let x0 = match &self.x0 {
            InitialLaw::Point { x0 } => x0.clone(),
            InitialLaw::UniformBox { .. } => {
                return Err(Error::Model(
                    "exact references need a point initial value".into(),
                ))
            }
        };
        let vals = |v: &[HolderField]| v.iter().map(HolderField::base).collect::<Vec<_>>();
        Ok(ConstantCoefficients {
            alpha: self.alpha,
            drift: self.drift.as_deref().map(vals),
            mixing: vals(&self.mixing),
            loads: self.loads.as_deref().map(vals),
            sub_indices: self.sub_indices.clone(),
            x0,
        })
    }

    pub fn jump_spec(&self) -> JumpSpec<'_, Self> {
        JumpSpec { model: self }
    }
}

impl Coefficients for ProcessModel {
    fn state_independent(&self) -> bool {
        self.is_constant()
    }
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn sub_indices(&self) -> &[f64] {
        &self.sub_indices
    }
    fn has_drift(&self) -> bool {
        self.drift.is_some()
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        match &self.drift {
            Some(a) => {
                for (o, f) in out.iter_mut().zip(a) {
                    *o = f.eval(x);
                }
            }
            None => out.fill(0.0),
        }
    }
    fn mixing(&self, x: &[f64], out: &mut [f64]) {
        if !self.shared_diag {
            for (o, f) in out.iter_mut().zip(&self.mixing) {
                *o = f.eval(x);
            }
            return;
        }
        let diag = self.mixing[0].eval(x);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let k = i * self.dim + j;
                out[k] = if i == j { diag } else { self.mixing[k].eval(x) };
            }
        }
    }
    fn loads(&self, x: &[f64], out: &mut [f64]) {
        match &self.loads {
            Some(k) => {
                for (o, f) in out.iter_mut().zip(k) {
                    *o = f.eval(x);
                }
            }
            None => out.fill(0.0),
        }
    }
    fn initial_state(&self, rng: &mut RngStream, out: &mut [f64]) {
        self.x0.draw(rng, out);
    }
}

/// Jump-intensity description of a model: the density `m(x, y)`
/// against `dy / |y|^{d+alpha}` and the coordinate-axis part with weights
/// `|k_i(x)|^{alpha_i}` against `dy_i / |y_i|^{1+alpha_i}`.
pub struct JumpSpec<'a, C: Coefficients> {
    model: &'a C,
}

impl<'a, C: Coefficients> JumpSpec<'a, C> {
    pub fn new(model: &'a C) -> Self {
        Self { model }
    }

    /// `m(x, y) = |y|^{d+alpha} / (|det c(x)| |c(x)^{-1} y|^{d+alpha})`.
    pub fn m_density(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.model.dim();
        let mut c = vec![0.0; d * d];
        self.model.mixing(x, &mut c);
        m_density_from_matrix(d, self.model.alpha(), &c, y)
    }

    /// `(|k_i(x)|^{alpha_i}, alpha_i)` per axis.
    pub fn rho_nu_summary(&self, x: &[f64]) -> Vec<(f64, f64)> {
        let idx = self.model.sub_indices();
        if idx.is_empty() {
            return Vec::new();
        }
        let mut k = vec![0.0; self.model.dim()];
        self.model.loads(x, &mut k);
        k.iter()
            .zip(idx)
            .map(|(ki, &ai)| (ki.abs().powf(ai), ai))
            .collect()
    }
}

pub(crate) fn m_density_from_matrix(d: usize, alpha: f64, c: &[f64], y: &[f64]) -> f64 {
    let (det, sol) = linalg::det_and_solve(d, c, y);
    let p = d as f64 + alpha;
    let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ns = sol.iter().map(|a| a * a).sum::<f64>().sqrt();
    // (|y| / |c^{-1} y|)^{d+alpha} / |det c|
    (ny / ns).powf(p) / det.abs()
}

pub mod linalg {
    /// Determinant and solution of `A s = y` by partial-pivot elimination.
    pub fn det_and_solve(d: usize, a: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
        let mut m = a.to_vec();
        let mut b = y.to_vec();
        let mut det = 1.0;
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&i, &j| m[i * d + col].abs().total_cmp(&m[j * d + col].abs()))
                .unwrap_or(col);
            if m[piv * d + col] == 0.0 {
                return (0.0, vec![f64::NAN; d]);
            }
            if piv != col {
                for k in 0..d {
                    m.swap(col * d + k, piv * d + k);
                }
                b.swap(col, piv);
                det = -det;
            }
            let p = m[col * d + col];
            det *= p;
            for r in col + 1..d {
                let f = m[r * d + col] / p;
                if f != 0.0 {
                    for k in col..d {
                        m[r * d + k] -= f * m[col * d + k];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
        let mut s = vec![0.0; d];
        for r in (0..d).rev() {
            let acc: f64 = (r + 1..d).map(|k| m[r * d + k] * s[k]).sum();
            s[r] = (b[r] - acc) / m[r * d + r];
        }
        (det, s)
    }

    pub fn determinant(d: usize, a: &[f64]) -> f64 {
        det_and_solve(d, a, &vec![0.0; d]).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_diffusion_from_degenerate_config() {
        let cfg = Example1Config {
            c0: 1.0,
            c1: 0.0,
            ..Default::default()
        };
        let m = make_example1_model(2.0, 1, 1.5, &cfg).unwrap();
        assert!(m.is_constant());
        assert_eq!(m.as_constant().unwrap().mixing, vec![1.0]);
    }

    #[test]
    fn nondegeneracy_bound_from_series_sum() {
        let cfg = Example1Config {
            c0: 1.0,
            c1: 0.3,
            seed: 9,
            ..Default::default()
        };
        let m = make_example1_model(1.5, 2, 0.7, &cfg).unwrap();
        let s = series_weight_sum(0.7, 16);
        let expected = (1.0 - 0.3 * s).powi(2);
        assert!((m.det_lower_bound() - expected).abs() < 1e-14);
        assert!(m.det_lower_bound() > 0.0);
    }

    #[test]
    fn drift_rejected_outside_one_two() {
        let cfg = Example1Config {
            drift: Some(FieldConfig {
                offset: 1.0,
                amplitude: 0.0,
            }),
            ..Default::default()
        };
        assert!(make_example1_model(0.5, 1, 0.7, &cfg).is_err());
        assert!(make_example1_model(1.0, 1, 0.7, &cfg).is_err());
        assert!(make_example1_model(1.5, 1, 0.7, &cfg).is_ok());
    }

    #[test]
    fn rejects_integer_beta_and_large_sub_index() {
        let cfg = Example1Config::default();
        assert!(make_example1_model(1.5, 1, 1.0, &cfg).is_err());
        assert!(make_example1_model(1.5, 1, 0.0, &cfg).is_err());
        let cfg = Example1Config {
            loads: Some(LoadConfig {
                offset: 1.0,
                amplitude: 0.0,
                sub_indices: vec![1.5],
            }),
            ..Default::default()
        };
        assert!(make_example1_model(1.5, 1, 0.5, &cfg).is_err());
    }

    #[test]
    fn rejects_degenerate_mixing() {
        let cfg = Example1Config {
            c0: 1.0,
            c1: 0.5,
            ..Default::default()
        };
        // 0.5 * sum 2^{-0.7 j} > 1
        assert!(make_example1_model(1.5, 1, 0.7, &cfg).is_err());
        let cfg = Example1Config {
            c0: 1.0,
            c_off: 1.0,
            ..Default::default()
        };
        assert!(make_example1_model(1.5, 2, 0.7, &cfg).is_err());
    }

    #[test]
    fn identity_density_is_one() {
        let cc = ConstantCoefficients::identity(1.5, vec![0.0, 0.0]);
        let j = JumpSpec::new(&cc);
        assert!((j.m_density(&[0.0, 0.0], &[0.3, -2.0]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn determinant_and_solve() {
        let a = [0.0, 2.0, 1.0, 3.0];
        let (det, s) = linalg::det_and_solve(2, &a, &[4.0, 5.0]);
        assert!((det + 2.0).abs() < 1e-14);
        assert!((s[0] + 1.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sampled_det_respects_bound() {
        let cfg = Example1Config {
            c0: 1.0,
            c1: 0.2,
            c_off: 0.05,
            seed: 3,
            ..Default::default()
        };
        let m = make_example1_model(1.2, 2, 0.8, &cfg).unwrap();
        let probes = assumptions::probe_points(2, 10_000, 4.0, 1);
        let mut c = [0.0; 4];
        for x in &probes {
            m.mixing(x, &mut c);
            assert!(linalg::determinant(2, &c).abs() >= m.det_lower_bound());
        }
        for x in &probes {
            m.mixing(x, &mut c);
            assert!(c.iter().all(|v| v.abs() <= m.coefficient_bound()));
        }
    }

    #[test]
    fn constant_model_requires_nonsingular_mixing() {
        let mut cc = ConstantCoefficients::identity(1.0, vec![0.0]);
        cc.mixing = vec![0.0];
        assert!(ProcessModel::constant(&cc).is_err());
        cc.mixing = vec![2.0];
        assert!(ProcessModel::constant(&cc).is_ok());
        cc.drift = Some(vec![1.0]);
        assert!(ProcessModel::constant(&cc).is_err());
    }
}
