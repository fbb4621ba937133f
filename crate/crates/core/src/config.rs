//! Experiment configuration files (TOML).
//!
//! A file holds a `[model]` table, an optional `[test_function]` table and one
//! table per subcommand. Unknown keys are rejected everywhere.
//!
//! ```toml
//! seed = 7
//!
//! [model]
//! kind = "example1"
//! alpha = 1.5
//! dim = 1
//! beta = 2.5
//! [model.params]
//! c0 = 0.5
//! c1 = 0.05
//! drift = { offset = 1.0, amplitude = 1.0 }
//!
//! [test_function]
//! kind = "smooth"
//!
//! [ladder]
//! n_paths = 4000
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grids::GridSpec;
use crate::models::holder::{HolderField, DEFAULT_DEPTH};
use crate::models::test_fn::{make_test_function, TestFunction, TestFunctionKind};
use crate::models::{
    make_example1_model, validate_beta, Coefficients, ConstantCoefficients, Example1Config,
    ProcessModel,
};
use crate::rng::RngStream;

pub const DEFAULT_HORIZON: f64 = 1.0;
pub const DEFAULT_LADDER_PATHS: u64 = 4000;
pub const DEFAULT_REFERENCE_PATHS: u64 = 1_000_000;
pub const DEFAULT_SIMULATE_PATHS: u64 = 10_000;
pub const DEFAULT_ONE_STEP_PATHS: u64 = 20_000;
pub const DEFAULT_ONE_STEP_STARTS: usize = 64;
pub const DEFAULT_ORACLE_PATHS: u64 = 100_000;
pub const DEFAULT_ORACLE_DELTA_REF: f64 = 1.0 / 1024.0;
/// Exponents `k` of the default ladder `delta = 2^-k * T`.
pub const DEFAULT_LADDER_EXPONENTS: std::ops::RangeInclusive<i32> = 3..=8;
/// The coupled reference grid is this many times finer than the finest rung.
pub const DEFAULT_REF_FACTOR: f64 = 8.0;

pub fn default_ladder(horizon: f64) -> Vec<f64> {
    DEFAULT_LADDER_EXPONENTS
        .map(|k| horizon * 2f64.powi(-k))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Example1 {
        alpha: f64,
        dim: usize,
        beta: f64,
        #[serde(default)]
        params: Example1Config,
    },
    Constant(ConstantCoefficients),
}

impl ModelSpec {
    pub fn build(&self) -> Result<ProcessModel> {
        match self {
            ModelSpec::Example1 {
                alpha,
                dim,
                beta,
                params,
            } => make_example1_model(*alpha, *dim, *beta, params),
            ModelSpec::Constant(cc) => ProcessModel::constant(cc),
        }
    }
}

/// Parses the body of a `[model]` table on its own.
pub fn parse_model_spec(s: &str) -> Result<ModelSpec> {
    toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunctionSpec {
    Constant {
        value: f64,
    },
    /// `cos(<omega, x> + phase)`.
    Cosine {
        omega: Vec<f64>,
        #[serde(default)]
        phase: f64,
    },
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        #[serde(default = "one")]
        height: f64,
    },
    /// Cosine with a seeded unit frequency and phase.
    Smooth {
        #[serde(default)]
        seed: u64,
    },
    /// Lacunary field of regularity `alpha + beta`; `beta` defaults to the
    /// model's.
    Weierstrass {
        #[serde(default)]
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
    /// Lacunary field of regularity exactly `beta`.
    Holder {
        beta: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

impl TestFunctionSpec {
    pub fn build(&self, model: &ProcessModel) -> Result<TestFunction> {
        let d = model.dim();
        let check_dim = |n: usize, what: &str| {
            if n == d {
                Ok(())
            } else {
                invalid(format!("{what} has length {n}, model dimension is {d}"))
            }
        };
        match self {
            TestFunctionSpec::Constant { value } => Ok(TestFunction::Constant(*value)),
            TestFunctionSpec::Cosine { omega, phase } => {
                check_dim(omega.len(), "omega")?;
                Ok(TestFunction::Cosine {
                    omega: omega.clone(),
                    phase: *phase,
                })
            }
            TestFunctionSpec::GaussianBump {
                center,
                width,
                height,
            } => {
                check_dim(center.len(), "center")?;
                if !(*width > 0.0) {
                    return invalid("bump width must be positive");
                }
                Ok(TestFunction::GaussianBump {
                    center: center.clone(),
                    width: *width,
                    height: *height,
                })
            }
            TestFunctionSpec::Smooth { seed } => {
                make_test_function(&TestFunctionKind::Smooth, d, model.alpha(), 1.0, *seed)
            }
            TestFunctionSpec::Weierstrass { seed, beta } => {
                let Some(b) = beta.or(model.beta()) else {
                    return invalid("weierstrass test function needs beta when the model has constant coefficients");
                };
                make_test_function(&TestFunctionKind::Weierstrass, d, model.alpha(), b, *seed)
            }
            TestFunctionSpec::Holder { beta, seed } => {
                validate_beta(*beta)?;
                let mut rng = RngStream::new(*seed, u64::MAX - 1);
                Ok(TestFunction::Weierstrass(HolderField::weierstrass(
                    d,
                    *beta,
                    0.0,
                    1.0,
                    DEFAULT_DEPTH,
                    &mut rng,
                )?))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSpec {
    /// Coupled differences against a fine Euler grid on the same noise.
    CoupledFine,
    /// Independent fine Euler estimate.
    FineEuler,
    /// Closed form (constant one-dimensional models).
    Spectral,
    /// Exact terminal sampling (constant models).
    ExactSampling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSpec {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default = "default_ladder_paths")]
    pub n_paths: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_paths: Option<u64>,
    #[serde(default = "default_reference")]
    pub reference: ReferenceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_ref: Option<f64>,
    #[serde(default = "default_reference_paths")]
    pub reference_paths: u64,
}

fn default_horizon() -> f64 {
    DEFAULT_HORIZON
}
fn default_ladder_paths() -> u64 {
    DEFAULT_LADDER_PATHS
}
fn default_reference() -> ReferenceSpec {
    ReferenceSpec::CoupledFine
}
fn default_reference_paths() -> u64 {
    DEFAULT_REFERENCE_PATHS
}

impl Default for LadderSpec {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            deltas: None,
            n_paths: DEFAULT_LADDER_PATHS,
            max_paths: None,
            reference: ReferenceSpec::CoupledFine,
            delta_ref: None,
            reference_paths: DEFAULT_REFERENCE_PATHS,
        }
    }
}

impl LadderSpec {
    pub fn deltas(&self) -> Vec<f64> {
        self.deltas
            .clone()
            .unwrap_or_else(|| default_ladder(self.horizon))
    }

    pub fn delta_ref(&self) -> f64 {
        self.delta_ref.unwrap_or_else(|| {
            let min = self.deltas().into_iter().fold(f64::INFINITY, f64::min);
            min / DEFAULT_REF_FACTOR
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub grid: GridSpec,
    #[serde(default = "default_simulate_paths")]
    pub n_paths: u64,
    #[serde(default)]
    pub record_path: bool,
}

fn default_simulate_paths() -> u64 {
    DEFAULT_SIMULATE_PATHS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneStepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default = "default_one_step_paths")]
    pub n_paths: u64,
    /// Defaults to points drawn uniformly from `[-2, 2]^d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_points: Option<Vec<Vec<f64>>>,
}

fn default_one_step_paths() -> u64 {
    DEFAULT_ONE_STEP_PATHS
}

impl Default for OneStepSpec {
    fn default() -> Self {
        Self {
            deltas: None,
            n_paths: DEFAULT_ONE_STEP_PATHS,
            start_points: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_oracle_paths")]
    pub n_paths: u64,
    /// Step of the fine Euler reference for state-dependent models.
    #[serde(default = "default_oracle_delta_ref")]
    pub delta_ref: f64,
}

fn default_oracle_paths() -> u64 {
    DEFAULT_ORACLE_PATHS
}
fn default_oracle_delta_ref() -> f64 {
    DEFAULT_ORACLE_DELTA_REF
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            n_paths: DEFAULT_ORACLE_PATHS,
            delta_ref: DEFAULT_ORACLE_DELTA_REF,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Output directory for CSV and JSON artifacts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_function: Option<TestFunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_step: Option<OneStepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

impl ExperimentConfig {
    /// Parses and validates; the model and test function are built once so
    /// that every error surfaces before any simulation starts.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.model.build()?;
        if let Some(t) = &self.test_function {
            t.build(&model)?;
        }
        if self.workers == Some(0) {
            return invalid("workers must be at least 1");
        }
        if let Some(l) = &self.ladder {
            if !(l.horizon > 0.0 && l.horizon.is_finite()) {
                return invalid("ladder horizon must be positive");
            }
            if l.n_paths < 2 {
                return invalid("ladder needs at least two paths");
            }
            if l.max_paths.is_some_and(|m| m < l.n_paths) {
                return invalid("max_paths must be at least n_paths");
            }
            let ds = l.deltas();
            if ds.iter().any(|d| !(*d > 0.0 && *d <= l.horizon)) {
                return invalid("ladder steps must lie in (0, horizon]");
            }
            if !(l.delta_ref() > 0.0) {
                return invalid("reference step must be positive");
            }
        }
        if let Some(s) = &self.simulate {
            s.grid.build()?;
        }
        if let Some(o) = &self.one_step {
            if let Some(ps) = &o.start_points {
                if ps.is_empty() || ps.iter().any(|p| p.len() != model.dim()) {
                    return invalid("start points must be non-empty and match the model dimension");
                }
            }
        }
        if let Some(o) = &self.oracle {
            if !(o.horizon > 0.0 && o.delta_ref > 0.0) {
                return invalid("oracle horizon and delta_ref must be positive");
            }
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<ProcessModel> {
        self.model.build()
    }

    pub fn build_test_function(&self, model: &ProcessModel) -> Result<TestFunction> {
        match &self.test_function {
            Some(t) => t.build(model),
            None => invalid("config has no [test_function] table"),
        }
    }
}
