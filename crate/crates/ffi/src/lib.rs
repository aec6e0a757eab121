//! C ABI over the `closeness` crate.
//!
//! Every function returns a [`ClosenessStatus`]; results go through out
//! pointers. After a non-`OK` status, [`closeness_last_error_message`]
//! describes the failure on the calling thread. Objects are opaque handles
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use closeness::closeness::{
    conditional_theta_given_mu, interpret_dirichlet, BaseMeasure, DensityMode, Interpretation, RemotenessSpec,
};
use closeness::inference::{
    posterior_summary, run_sampler, ChainSet, ClosenessModelConfig, GelmanModelConfig, Group, Model, ObservedGroups,
    SamplerConfig,
};
use closeness::manifold::{kl_divergence, manifold_volume, SimplexPoint, DEFAULT_SUM_TOL};
use closeness::numerics::log_gamma;
use closeness::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosenessStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnsupportedDimension = 3,
    Numeric = 4,
    Sampler = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosenessBaseMeasure {
    Fisher = 0,
    Lebesgue = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosenessDensityMode {
    Intrinsic = 0,
    Integration = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosenessModel {
    Closeness = 0,
    Gelman = 1,
}

/// Grouped binomial observations.
pub struct ClosenessGroups(ObservedGroups);

/// Posterior draws from [`closeness_fit`].
pub struct ClosenessChainSet {
    set: ChainSet,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ClosenessStatus {
    match e {
        Error::UnsupportedDimension { .. } => ClosenessStatus::UnsupportedDimension,
        Error::Numeric(_) => ClosenessStatus::Numeric,
        Error::Sampler(_) => ClosenessStatus::Sampler,
        Error::Io(_) => ClosenessStatus::Io,
        _ => ClosenessStatus::InvalidArgument,
    }
}

fn fail(status: ClosenessStatus, msg: impl Into<String>) -> ClosenessStatus {
    set_error(msg.into());
    status
}

fn guard<F: FnOnce() -> Result<(), ClosenessStatus>>(f: F) -> ClosenessStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ClosenessStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(ClosenessStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, ClosenessStatus>;
}

impl<T> OrStatus<T> for closeness::Result<T> {
    fn or_status(self) -> Result<T, ClosenessStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), ClosenessStatus> {
    if p.is_null() {
        Err(fail(ClosenessStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or point to `len` readable values.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], ClosenessStatus> {
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

fn base(b: ClosenessBaseMeasure) -> BaseMeasure {
    match b {
        ClosenessBaseMeasure::Fisher => BaseMeasure::Fisher,
        ClosenessBaseMeasure::Lebesgue => BaseMeasure::Lebesgue,
    }
}

fn point(coords: &[f64]) -> Result<SimplexPoint, ClosenessStatus> {
    SimplexPoint::new(coords.to_vec(), DEFAULT_SUM_TOL).or_status()
}

/// Message for the last failed call on this thread, or null. The string
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn closeness_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `D(mu || theta)` for two points with `len` coordinates each.
///
/// # Safety
/// `mu` and `theta` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_kl_divergence(
    mu: *const f64,
    theta: *const f64,
    len: usize,
    out: *mut f64,
) -> ClosenessStatus {
    guard(|| {
        non_null(out, "out")?;
        let mu = point(slice(mu, len, "mu")?)?;
        let theta = point(slice(theta, len, "theta")?)?;
        *out = kl_divergence(&mu, &theta).or_status()?;
        Ok(())
    })
}

/// Volume of the multinomial manifold `M_n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_manifold_volume(n: usize, out: *mut f64) -> ClosenessStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = manifold_volume(n).or_status()?;
        Ok(())
    })
}

/// `ln Γ(x)` for `x > 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_log_gamma(x: f64, out: *mut f64) -> ClosenessStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = log_gamma(x).or_status()?;
        Ok(())
    })
}

/// Log density of `theta` under the closeness conditional `theta | mu`.
///
/// # Safety
/// `mu` and `theta` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_conditional_log_density(
    mu: *const f64,
    theta: *const f64,
    len: usize,
    gamma: f64,
    base_measure: ClosenessBaseMeasure,
    mode: ClosenessDensityMode,
    out: *mut f64,
) -> ClosenessStatus {
    guard(|| {
        non_null(out, "out")?;
        let mu = point(slice(mu, len, "mu")?)?;
        let theta = point(slice(theta, len, "theta")?)?;
        let spec = RemotenessSpec::new(gamma, base(base_measure), mu.dim()).or_status()?;
        let mode = match mode {
            ClosenessDensityMode::Intrinsic => DensityMode::Intrinsic,
            ClosenessDensityMode::Integration => DensityMode::Integration,
        };
        *out = conditional_theta_given_mu(&spec, &mu).or_status()?.log_density(&theta, mode).or_status()?;
        Ok(())
    })
}

/// Reads `Dirichlet(alpha)` as a closeness conditional. On success
/// `*centered` tells whether a center exists; if so `mu_out` (length
/// `len`) and `*gamma_out` hold it, otherwise they are left untouched.
///
/// # Safety
/// `alpha` and `mu_out` must point to `len` doubles; `gamma_out` and
/// `centered` must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_interpret_dirichlet(
    alpha: *const f64,
    len: usize,
    base_measure: ClosenessBaseMeasure,
    mu_out: *mut f64,
    gamma_out: *mut f64,
    centered: *mut bool,
) -> ClosenessStatus {
    guard(|| {
        non_null(mu_out, "mu_out")?;
        non_null(gamma_out, "gamma_out")?;
        non_null(centered, "centered")?;
        let alpha = slice(alpha, len, "alpha")?;
        match interpret_dirichlet(alpha, base(base_measure)).or_status()? {
            Interpretation::Centered { mu, gamma } => {
                ptr::copy_nonoverlapping(mu.coords().as_ptr(), mu_out, len);
                *gamma_out = gamma;
                *centered = true;
            }
            Interpretation::NoPreferredCenter => *centered = false,
        }
        Ok(())
    })
}

/// Builds a group set from `len` pairs `(y[i], n[i])`.
///
/// # Safety
/// `y` and `n` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_groups_new(
    y: *const u64,
    n: *const u64,
    len: usize,
    out: *mut *mut ClosenessGroups,
) -> ClosenessStatus {
    guard(|| {
        non_null(out, "out")?;
        let (y, n) = (slice(y, len, "y")?, slice(n, len, "n")?);
        let groups = y.iter().zip(n).map(|(&y, &n)| Group { y, n }).collect();
        let g = ObservedGroups::new(groups, None).or_status()?;
        *out = Box::into_raw(Box::new(ClosenessGroups(g)));
        Ok(())
    })
}

/// The embedded 71-group rat-tumor table.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_groups_rat_tumor(out: *mut *mut ClosenessGroups) -> ClosenessStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(ClosenessGroups(closeness::cli::load_rat_tumor())));
        Ok(())
    })
}

/// Number of groups.
///
/// # Safety
/// `groups` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_groups_len(groups: *const ClosenessGroups, out: *mut usize) -> ClosenessStatus {
    guard(|| {
        non_null(groups, "groups")?;
        non_null(out, "out")?;
        *out = (*groups).0.len();
        Ok(())
    })
}

/// # Safety
/// `groups` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn closeness_groups_free(groups: *mut ClosenessGroups) {
    if !groups.is_null() {
        drop(Box::from_raw(groups));
    }
}

/// Samples the closeness or Gelman model with default priors.
///
/// # Safety
/// `groups` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_fit(
    groups: *const ClosenessGroups,
    model: ClosenessModel,
    chains: usize,
    iterations: usize,
    burn_in: usize,
    seed: u64,
    out: *mut *mut ClosenessChainSet,
) -> ClosenessStatus {
    guard(|| {
        non_null(groups, "groups")?;
        non_null(out, "out")?;
        let m = match model {
            ClosenessModel::Closeness => Model::Closeness(ClosenessModelConfig::default()),
            ClosenessModel::Gelman => Model::Gelman(GelmanModelConfig::default()),
        };
        let cfg = SamplerConfig { chains, iterations, burn_in, seed, ..SamplerConfig::default() };
        let set = run_sampler(&m, &(*groups).0, &cfg).or_status()?;
        let names = set.param_names.iter().map(|n| CString::new(n.as_str()).unwrap_or_default()).collect();
        *out = Box::into_raw(Box::new(ClosenessChainSet { set, names }));
        Ok(())
    })
}

/// Number of chains, kept draws per chain and parameters.
///
/// # Safety
/// `set` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_chainset_shape(
    set: *const ClosenessChainSet,
    chains: *mut usize,
    draws: *mut usize,
    params: *mut usize,
) -> ClosenessStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(chains, "chains")?;
        non_null(draws, "draws")?;
        non_null(params, "params")?;
        let s = &(*set).set;
        *chains = s.chains.len();
        *draws = s.draws_per_chain();
        *params = s.param_names.len();
        Ok(())
    })
}

/// Name of parameter `index`, owned by `set`.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_chainset_param_name(
    set: *const ClosenessChainSet,
    index: usize,
    out: *mut *const c_char,
) -> ClosenessStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(out, "out")?;
        let s = &*set;
        let name = s
            .names
            .get(index)
            .ok_or_else(|| fail(ClosenessStatus::InvalidArgument, format!("no parameter {index}")))?;
        *out = name.as_ptr();
        Ok(())
    })
}

unsafe fn param_index(set: &ClosenessChainSet, name: *const c_char) -> Result<usize, ClosenessStatus> {
    non_null(name, "name")?;
    let name = CStr::from_ptr(name)
        .to_str()
        .map_err(|_| fail(ClosenessStatus::InvalidArgument, "parameter name is not UTF-8"))?;
    set.set
        .param_index(name)
        .ok_or_else(|| fail(ClosenessStatus::InvalidArgument, format!("unknown parameter {name:?}")))
}

/// Copies the draws of parameter `name` in chain `chain` into `buf`.
/// `*written` receives the number of draws; if `capacity` is smaller the
/// call fails with `BUFFER_TOO_SMALL` and nothing is copied.
///
/// # Safety
/// `set` must be a live handle, `name` a NUL-terminated string, `buf`
/// writable for `capacity` doubles and `written` writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_chainset_draws(
    set: *const ClosenessChainSet,
    name: *const c_char,
    chain: usize,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> ClosenessStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(written, "written")?;
        let s = &*set;
        let j = param_index(s, name)?;
        let c = s
            .set
            .chains
            .get(chain)
            .ok_or_else(|| fail(ClosenessStatus::InvalidArgument, format!("no chain {chain}")))?;
        *written = c.draws.len();
        if capacity < c.draws.len() {
            return Err(fail(
                ClosenessStatus::BufferTooSmall,
                format!("need room for {} draws, got {capacity}", c.draws.len()),
            ));
        }
        non_null(buf, "buf")?;
        for (i, row) in c.draws.iter().enumerate() {
            *buf.add(i) = row[j];
        }
        Ok(())
    })
}

/// Posterior mean and median of parameter `name` over all chains.
///
/// # Safety
/// `set` must be a live handle, `name` a NUL-terminated string and the
/// out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn closeness_chainset_summary(
    set: *const ClosenessChainSet,
    name: *const c_char,
    mean: *mut f64,
    median: *mut f64,
) -> ClosenessStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(mean, "mean")?;
        non_null(median, "median")?;
        let s = &*set;
        let j = param_index(s, name)?;
        let summary = posterior_summary(&s.set).or_status()?;
        *mean = summary[j].1.mean;
        *median = summary[j].1.median();
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn closeness_chainset_free(set: *mut ClosenessChainSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
