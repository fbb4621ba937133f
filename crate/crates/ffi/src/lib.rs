//! C ABI over `weak_euler`.
//!
//! Every function returns a [`WeStatus`]; on failure the message is kept in
//! thread-local storage and can be copied out with
//! [`we_last_error_message`]. Models are opaque handles created by
//! `we_model_*` constructors and released with [`we_model_free`].
//!
//! Test functions cross the boundary as callbacks. They may be called
//! concurrently from several worker threads and must be thread-safe.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use weak_euler::config::ModelSpec;
use weak_euler::euler::EulerConfig;
use weak_euler::grids::uniform_grid;
use weak_euler::models::{make_example1_model, Coefficients, Example1Config, ProcessModel};
use weak_euler::montecarlo::estimate;
use weak_euler::rates::{
    fit_order, kappa, weak_error_ladder, Kappa, LadderReference, PathBudget, Verdict,
};
use weak_euler::rng::RngStream;
use weak_euler::stable_rng::{sample_isotropic_into, sample_positive_stable, StableLaw};
use weak_euler::Error;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or a malformed buffer.
    InvalidArgument = 1,
    /// Parameters or configuration rejected by the library.
    Validation = 2,
    /// Too few resolved points to fit an order.
    Inconclusive = 3,
    /// A trajectory overflowed, or every path did.
    Overflow = 4,
    Io = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Opaque model handle.
pub struct WeModel {
    inner: ProcessModel,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WeMcResult {
    pub mean: f64,
    pub std_error: f64,
    /// Paths that contributed to the mean.
    pub n: u64,
    pub overflow_count: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeVerdict {
    Exact = 0,
    Pass = 1,
    Fail = 2,
    Inconclusive = 3,
    Reported = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeRateSummary {
    /// NaN when no slope could be fitted.
    pub slope: f64,
    pub r_squared: f64,
    /// NaN on the boundary `beta == alpha`.
    pub kappa_predicted: f64,
    pub unmasked_points: u32,
    pub verdict: WeVerdict,
}

/// `g(y, dim, ctx)`.
pub type WeTestFunction =
    Option<unsafe extern "C" fn(y: *const f64, dim: usize, ctx: *mut c_void) -> f64>;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> WeStatus {
    match e {
        Error::InvalidParameter(_)
        | Error::Grid(_)
        | Error::Model(_)
        | Error::Config(_)
        | Error::Quadrature(_) => WeStatus::Validation,
        Error::Inconclusive(_) => WeStatus::Inconclusive,
        Error::Overflow { .. } | Error::AllOverflow(_) => WeStatus::Overflow,
        Error::Io(_) => WeStatus::Io,
    }
}

enum Failure {
    Arg(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> WeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            WeStatus::Ok
        }
        Ok(Err(Failure::Arg(m))) => {
            set_error(m.to_string());
            WeStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".to_string());
            WeStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Arg("null output pointer"))
}

unsafe fn model_ref<'a>(m: *const WeModel) -> Result<&'a ProcessModel, Failure> {
    m.as_ref()
        .map(|m| &m.inner)
        .ok_or(Failure::Arg("null model handle"))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Arg("null output buffer"));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes, into `buf`. Returns the full message length
/// (without the terminator); pass a null `buf` to query it.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn we_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Builds a model from the TOML body of a `[model]` table, e.g.
/// `kind = "example1"`, `alpha = 1.5`, `dim = 1`, `beta = 2.5`.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_model_from_toml(
    toml: *const c_char,
    out: *mut *mut WeModel,
) -> WeStatus {
    guard(|| {
        let out = out_ref(out)?;
        if toml.is_null() {
            return Err(Failure::Arg("null string"));
        }
        let s = CStr::from_ptr(toml)
            .to_str()
            .map_err(|_| Failure::Arg("string is not UTF-8"))?;
        let spec: ModelSpec = weak_euler::config::parse_model_spec(s)?;
        *out = Box::into_raw(Box::new(WeModel {
            inner: spec.build()?,
        }));
        Ok(())
    })
}

/// Lacunary-field model with `c = (c0 + c1 W) I` plus off-diagonal fields of
/// amplitude `c_off`, no drift or jump loads.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_model_example1(
    alpha: f64,
    dim: usize,
    beta: f64,
    c0: f64,
    c1: f64,
    c_off: f64,
    seed: u64,
    out: *mut *mut WeModel,
) -> WeStatus {
    guard(|| {
        let out = out_ref(out)?;
        let cfg = Example1Config {
            c0,
            c1,
            c_off,
            seed,
            ..Default::default()
        };
        *out = Box::into_raw(Box::new(WeModel {
            inner: make_example1_model(alpha, dim, beta, &cfg)?,
        }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from a `we_model_*` constructor that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn we_model_free(model: *mut WeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `alpha` and `dim` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_model_info(
    model: *const WeModel,
    alpha: *mut f64,
    dim: *mut usize,
) -> WeStatus {
    guard(|| {
        let m = model_ref(model)?;
        *out_ref(alpha)? = m.alpha();
        *out_ref(dim)? = m.dim();
        Ok(())
    })
}

/// Predicted weak order; `*boundary` is set to 1 (and `*out` to NaN) when
/// `beta == alpha`.
///
/// # Safety
/// `out` and `boundary` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_kappa(
    alpha: f64,
    beta: f64,
    out: *mut f64,
    boundary: *mut i32,
) -> WeStatus {
    guard(|| {
        let (o, b) = (out_ref(out)?, out_ref(boundary)?);
        match kappa(alpha, beta)? {
            Kappa::Order(k) => {
                *o = k;
                *b = 0;
            }
            Kappa::Boundary => {
                *o = f64::NAN;
                *b = 1;
            }
        }
        Ok(())
    })
}

/// `n` isotropic stable vectors of dimension `dim`, row-major into `out`
/// (length `n * dim`), from stream `stream_id` of `seed`.
///
/// # Safety
/// `out` must be valid for `n * dim` writes.
#[no_mangle]
pub unsafe extern "C" fn we_sample_isotropic(
    alpha: f64,
    dim: usize,
    seed: u64,
    stream_id: u64,
    n: usize,
    out: *mut f64,
) -> WeStatus {
    guard(|| {
        let law = StableLaw::standard(alpha, dim)?;
        let len = n
            .checked_mul(dim)
            .ok_or(Failure::Arg("n * dim overflows"))?;
        let buf = out_slice(out, len)?;
        let mut rng = RngStream::new(seed, stream_id);
        for row in buf.chunks_exact_mut(dim) {
            sample_isotropic_into(&law, &mut rng, row);
        }
        Ok(())
    })
}

/// `n` one-sided stable variates with Laplace transform `exp(-s^alpha)`,
/// `alpha` in (0, 1).
///
/// # Safety
/// `out` must be valid for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn we_sample_positive(
    alpha: f64,
    seed: u64,
    stream_id: u64,
    n: usize,
    out: *mut f64,
) -> WeStatus {
    guard(|| {
        let buf = out_slice(out, n)?;
        let mut rng = RngStream::new(seed, stream_id);
        for x in buf {
            *x = sample_positive_stable(alpha, &mut rng)?;
        }
        Ok(())
    })
}

struct Callback {
    f: unsafe extern "C" fn(*const f64, usize, *mut c_void) -> f64,
    ctx: *mut c_void,
}

// The caller promises a thread-safe callback (see the crate docs).
unsafe impl Sync for Callback {}

impl Callback {
    fn new(g: WeTestFunction, ctx: *mut c_void) -> Result<Self, Failure> {
        Ok(Self {
            f: g.ok_or(Failure::Arg("null test function"))?,
            ctx,
        })
    }

    fn call(&self, y: &[f64]) -> f64 {
        unsafe { (self.f)(y.as_ptr(), y.len(), self.ctx) }
    }
}

/// Monte Carlo estimate of `E g(Y_T)` on a uniform grid of `n_steps` steps.
/// The result does not depend on `workers`.
///
/// # Safety
/// `model` must be a live handle, `g` thread-safe, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_estimate(
    model: *const WeModel,
    horizon: f64,
    n_steps: usize,
    g: WeTestFunction,
    ctx: *mut c_void,
    n_paths: u64,
    seed: u64,
    workers: usize,
    out: *mut WeMcResult,
) -> WeStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out_ref(out)?;
        let cb = Callback::new(g, ctx)?;
        let grid = uniform_grid(horizon, n_steps)?;
        let cfg = EulerConfig {
            model: m,
            grid: &grid,
            record_path: false,
        };
        let r = estimate(&cfg, &|y: &[f64]| cb.call(y), n_paths, seed, workers.max(1))?;
        *out = WeMcResult {
            mean: r.mean,
            std_error: r.stderr,
            n: r.n,
            overflow_count: r.overflow_count,
        };
        Ok(())
    })
}

/// Weak-error ladder over `deltas` (each dividing `horizon`) with coupled
/// differences against a fine grid of step `delta_ref`, followed by the
/// log-log order fit. An unfittable ladder is reported through the verdict,
/// not the status.
///
/// # Safety
/// `deltas` must be valid for `n_deltas` reads; other pointers as in
/// [`we_estimate`].
#[no_mangle]
pub unsafe extern "C" fn we_converge(
    model: *const WeModel,
    horizon: f64,
    deltas: *const f64,
    n_deltas: usize,
    delta_ref: f64,
    g: WeTestFunction,
    ctx: *mut c_void,
    n_paths: u64,
    seed: u64,
    workers: usize,
    out: *mut WeRateSummary,
) -> WeStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out_ref(out)?;
        let cb = Callback::new(g, ctx)?;
        if deltas.is_null() || n_deltas == 0 {
            return Err(Failure::Arg("empty step ladder"));
        }
        let ds = std::slice::from_raw_parts(deltas, n_deltas);
        let mut fit = weak_error_ladder(
            m,
            &|y: &[f64]| cb.call(y),
            m.beta(),
            horizon,
            ds,
            &LadderReference::CoupledFine { delta_ref },
            PathBudget::fixed(n_paths),
            seed,
            workers.max(1),
        )?;
        match fit_order(&mut fit) {
            Ok(_) | Err(Error::Inconclusive(_)) => {}
            Err(e) => return Err(e.into()),
        }
        *out = WeRateSummary {
            slope: fit.slope.unwrap_or(f64::NAN),
            r_squared: fit.r_squared.unwrap_or(f64::NAN),
            kappa_predicted: fit.kappa_predicted.value().unwrap_or(f64::NAN),
            unmasked_points: fit.unmasked() as u32,
            verdict: match fit.verdict() {
                Verdict::Exact => WeVerdict::Exact,
                Verdict::Pass => WeVerdict::Pass,
                Verdict::Fail => WeVerdict::Fail,
                Verdict::Inconclusive => WeVerdict::Inconclusive,
                Verdict::Reported => WeVerdict::Reported,
            },
        };
        Ok(())
    })
}
