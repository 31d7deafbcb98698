// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! C ABI over the `ctoqw` library.
//!
//! Coins live behind an opaque [`CtoqwCoin`] handle. Every fallible entry
//! point returns a [`CtoqwStatus`]; on failure a description can be read
//! with [`ctoqw_last_error_message`] from the same thread. Complex matrices
//! cross the boundary as `2·d²` doubles, row-major, real and imaginary parts
//! interleaved. Panics never unwind into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::os::raw::c_int;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ctoqw::classifier::{self, Verdict};
use ctoqw::lattice;
use ctoqw::model::{Coin, CoinFile, DensityMatrix};
use ctoqw::numkernel::{c64, CMatrix};
use ctoqw::{auxiliary, trajectory, Error};

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtoqwStatus {
    Ok = 0,
    /// Bad input: shapes, values, file contents or parameters.
    InvalidInput = 1,
    /// The computation ran but its result cannot be trusted.
    Numerical = 2,
    /// A required pointer argument was null.
    NullPointer = 3,
    /// An output buffer is shorter than required.
    BufferTooSmall = 4,
    /// Internal error; the library caught a panic.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtoqwVerdict {
    Recurrent = 0,
    Transient = 1,
    PartiallyRecurrent = 2,
    Undetermined = 3,
}

impl From<Verdict> for CtoqwVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Recurrent => CtoqwVerdict::Recurrent,
            Verdict::Transient => CtoqwVerdict::Transient,
            Verdict::PartiallyRecurrent => CtoqwVerdict::PartiallyRecurrent,
            Verdict::Undetermined => CtoqwVerdict::Undetermined,
        }
    }
}

/// Classification summary. `rule` holds a NUL-terminated tag such as
/// `"corR-1"`. For partially recurrent two-level coins
/// `transient_state` holds the 2x2 transient density (8 doubles).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CtoqwClassification {
    pub verdict: CtoqwVerdict,
    pub rule: [c_char; 24],
    pub has_drift: c_int,
    pub drift: f64,
    pub h1: c_int,
    pub kernel_dim: usize,
    pub has_transient_state: c_int,
    pub transient_state: [f64; 8],
}

/// Opaque coin handle.
pub struct CtoqwCoin {
    coin: Coin,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> CtoqwStatus {
    if err.is_numerical() {
        CtoqwStatus::Numerical
    } else {
        CtoqwStatus::InvalidInput
    }
}

/// Failure carried out of an entry point body.
enum Fail {
    Lib(Error),
    Status(CtoqwStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(CtoqwStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, translating errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> CtoqwStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CtoqwStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_last_error(msg);
            s
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {msg}"));
            CtoqwStatus::Internal
        }
    }
}

unsafe fn coin_ref<'a>(coin: *const CtoqwCoin) -> Result<&'a Coin, Fail> {
    coin.as_ref().map(|c| &c.coin).ok_or_else(|| null("coin"))
}

unsafe fn read_matrix(name: &str, data: *const f64, d: usize) -> Result<CMatrix, Fail> {
    if data.is_null() {
        return Err(null(name));
    }
    let v = std::slice::from_raw_parts(data, 2 * d * d);
    Ok(CMatrix::from_fn(d, d, |i, j| c64(v[2 * (i * d + j)], v[2 * (i * d + j) + 1])))
}

unsafe fn write_matrix(m: &CMatrix, out: *mut f64, len: usize) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    let d = m.nrows();
    if len < 2 * d * d {
        return Err(Fail::Status(CtoqwStatus::BufferTooSmall, format!("need {} doubles, got {len}", 2 * d * d)));
    }
    let v = std::slice::from_raw_parts_mut(out, 2 * d * d);
    for i in 0..d {
        for j in 0..d {
            v[2 * (i * d + j)] = m[(i, j)].re;
            v[2 * (i * d + j) + 1] = m[(i, j)].im;
        }
    }
    Ok(())
}

/// Initial state from an optional buffer; null means `I/d`.
unsafe fn initial_state(rho0: *const f64, d: usize) -> Result<DensityMatrix, Fail> {
    if rho0.is_null() {
        return Ok(DensityMatrix::maximally_mixed(d));
    }
    Ok(DensityMatrix::new(read_matrix("rho0", rho0, d)?)?)
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message describing the last failure on this thread, or null. The
/// pointer stays valid until the next call into the library on the same
/// thread.
#[no_mangle]
pub extern "C" fn ctoqw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ctoqw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a coin file (`{"d", "C", "A", "H"}` JSON) into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ctoqw_coin_from_json(json: *const c_char, out: *mut *mut CtoqwCoin) -> CtoqwStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(null(if json.is_null() { "json" } else { "out" }));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Fail::Status(CtoqwStatus::InvalidInput, "json is not UTF-8".into()))?;
        let coin = CoinFile::from_json(text)?.coin()?;
        put(out, Box::into_raw(Box::new(CtoqwCoin { coin })), "out")
    })
}

/// Builds a coin from three `2·d²` interleaved buffers.
///
/// # Safety
/// `c`, `a` and `h` must each point to `2·d²` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ctoqw_coin_from_arrays(
    d: usize,
    c: *const f64,
    a: *const f64,
    h: *const f64,
    out: *mut *mut CtoqwCoin,
) -> CtoqwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if d == 0 {
            return Err(Fail::Status(CtoqwStatus::InvalidInput, "dimension must be positive".into()));
        }
        let coin =
            ctoqw::model::validate_coin(read_matrix("c", c, d)?, read_matrix("a", a, d)?, read_matrix("h", h, d)?, d)?;
        put(out, Box::into_raw(Box::new(CtoqwCoin { coin })), "out")
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `coin` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ctoqw_coin_free(coin: *mut CtoqwCoin) {
    if !coin.is_null() {
        drop(Box::from_raw(coin));
    }
}

/// Internal dimension `d`, or 0 for a null handle.
///
/// # Safety
/// `coin` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ctoqw_coin_dim(coin: *const CtoqwCoin) -> usize {
    coin.as_ref().map_or(0, |c| c.coin.dim())
}

/// Writes the unique stationary state (`2·d²` doubles). Fails with
/// `Numerical` when the stationary state is not unique.
///
/// # Safety
/// `coin` must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ctoqw_stationary_state(coin: *const CtoqwCoin, out: *mut f64, len: usize) -> CtoqwStatus {
    guard(|| {
        let coin = coin_ref(coin)?;
        let st = auxiliary::stationary_states(coin)?;
        let rho = st.rho_inv.ok_or(Error::NoStationaryState)?;
        write_matrix(rho.matrix(), out, len)
    })
}

/// Asymptotic drift `m`.
///
/// # Safety
/// `coin` must be live; `m` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ctoqw_drift(coin: *const CtoqwCoin, m: *mut f64) -> CtoqwStatus {
    guard(|| {
        let coin = coin_ref(coin)?;
        let rho = auxiliary::stationary_states(coin)?.rho_inv.ok_or(Error::NoStationaryState)?;
        put(m, auxiliary::drift(coin, &rho)?.m, "m")
    })
}

/// Writes the trace-free drift operator `J` (`2·d²` doubles).
///
/// # Safety
/// `coin` must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ctoqw_drift_operator(coin: *const CtoqwCoin, out: *mut f64, len: usize) -> CtoqwStatus {
    guard(|| {
        let coin = coin_ref(coin)?;
        let rho = auxiliary::stationary_states(coin)?.rho_inv.ok_or(Error::NoStationaryState)?;
        let m = auxiliary::drift(coin, &rho)?.m;
        write_matrix(&auxiliary::solve_drift_operator(coin, m)?.j, out, len)
    })
}

/// Recurrence classification.
///
/// # Safety
/// `coin` must be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ctoqw_classify(coin: *const CtoqwCoin, out: *mut CtoqwClassification) -> CtoqwStatus {
    guard(|| {
        let coin = coin_ref(coin)?;
        let r = classifier::classify(coin)?;
        let mut rule = [0 as c_char; 24];
        for (dst, &b) in rule.iter_mut().zip(r.rule.tag().as_bytes().iter().take(23)) {
            *dst = b as c_char;
        }
        let mut result = CtoqwClassification {
            verdict: r.verdict.into(),
            rule,
            has_drift: c_int::from(r.m.is_some()),
            drift: r.m.unwrap_or(f64::NAN),
            h1: c_int::from(r.h1),
            kernel_dim: r.kernel_dim,
            has_transient_state: 0,
            transient_state: [0.0; 8],
        };
        if let Some(s) = r.transient_state.as_ref().filter(|s| s.dim() == 2) {
            result.has_transient_state = 1;
            write_matrix(s.matrix(), result.transient_state.as_mut_ptr(), 8)?;
        }
        put(out, result, "out")
    })
}

/// `p_{i0 → j}(t)` on the truncated lattice. `rho0` may be null for `I/d`;
/// `radius == 0` picks a truncation that keeps leakage below tolerance.
///
/// # Safety
/// `coin` must be live; `rho0` null or `2·d²` doubles; `p` valid.
#[no_mangle]
pub unsafe extern "C" fn ctoqw_transition_probability(
    coin: *const CtoqwCoin,
    rho0: *const f64,
    i0: i64,
    j: i64,
    t: f64,
    radius: usize,
    p: *mut f64,
) -> CtoqwStatus {
    guard(|| {
        let coin = coin_ref(coin)?;
        let rho = initial_state(rho0, coin.dim())?;
        let gen = if radius == 0 {
            lattice::fit_radius(coin, &rho, i0, t)?
        } else {
            lattice::build_block_generator(coin, radius)?
        };
        put(p, lattice::transition_probability(&gen, &rho, i0, j, t)?, "p")
    })
}

/// Monte Carlo estimate of the drift over `n_paths` paths to `horizon`.
///
/// # Safety
/// `coin` must be live; `rho0` null or `2·d²` doubles; outputs valid.
#[no_mangle]
pub unsafe extern "C" fn ctoqw_estimate_drift(
    coin: *const CtoqwCoin,
    rho0: *const f64,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    mean: *mut f64,
    std_error: *mut f64,
) -> CtoqwStatus {
    guard(|| {
        let coin = coin_ref(coin)?;
        let rho = initial_state(rho0, coin.dim())?;
        if mean.is_null() || std_error.is_null() {
            return Err(null("output"));
        }
        let est = trajectory::estimate_drift(coin, &rho, horizon, n_paths, seed)?;
        put(mean, est.mean, "mean")?;
        put(std_error, est.stderr, "std_error")
    })
}
