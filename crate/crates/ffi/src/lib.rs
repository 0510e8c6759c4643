//! C ABI over `kerr-revival`.
//!
//! Objects are opaque handles created by `kr_*_new` and released by the
//! matching `kr_*_free`. Every fallible call returns a [`KrStatus`]; on
//! failure a message is kept per thread and can be read with
//! [`kr_last_error_message`]. Complex results are written as interleaved
//! `(re, im)` pairs, so an output of `n` values needs `2 n` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use kerr_revival::exact::{wigner_exact, ExactKerr, GridSpec};
use kerr_revival::tdwkb::wavefunction_tdwkb;
use kerr_revival::theta::{correlation_theta_quantum, correlation_theta_semiclassical};
use kerr_revival::vanvleck::{correlation_vanvleck, wavefunction_vanvleck_grid, WavefunctionOptions};
use kerr_revival::{Error, ModelParams, Picture};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    TailBudgetExceeded = 3,
    OverflowGuard = 4,
    GridTooCoarse = 5,
    GridTooSmall = 6,
    Domain = 7,
    EmptyWindow = 8,
    NoConvergence = 9,
    SlowConvergence = 10,
    NotPrimitiveWkb = 11,
    UnresolvedSegment = 12,
    DegenerateArc = 13,
    CausticDivergence = 14,
    Panic = 15,
}

impl From<&Error> for KrStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => KrStatus::InvalidParameter,
            Error::TailBudgetExceeded { .. } => KrStatus::TailBudgetExceeded,
            Error::OverflowGuard { .. } => KrStatus::OverflowGuard,
            Error::GridTooCoarse { .. } => KrStatus::GridTooCoarse,
            Error::GridTooSmall { .. } => KrStatus::GridTooSmall,
            Error::Domain { .. } => KrStatus::Domain,
            Error::EmptyWindow { .. } => KrStatus::EmptyWindow,
            Error::NoConvergence { .. } => KrStatus::NoConvergence,
            Error::SlowConvergence { .. } => KrStatus::SlowConvergence,
            Error::NotPrimitiveWkb(_) => KrStatus::NotPrimitiveWkb,
            Error::UnresolvedSegment { .. } => KrStatus::UnresolvedSegment,
            Error::DegenerateArc => KrStatus::DegenerateArc,
            Error::CausticDivergence { .. } => KrStatus::CausticDivergence,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrPicture {
    Lab = 0,
    Interaction = 1,
}

fn to_picture(raw: c_int) -> Result<Picture, KrStatus> {
    match raw {
        x if x == KrPicture::Lab as c_int => Ok(Picture::Lab),
        x if x == KrPicture::Interaction as c_int => Ok(Picture::Interaction),
        x => Err(fail(KrStatus::InvalidParameter, format!("unknown picture {x}"))),
    }
}

/// Correlation methods.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrCorrelation {
    Exact = 0,
    Vanvleck = 1,
    ThetaQuantum = 2,
    ThetaSemiclassical = 3,
}

/// Wavefunction methods. `Exact` and `Vanvleck` are lab-frame; `Tdwkb` is
/// interaction-picture.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrWavefunction {
    Exact = 0,
    Vanvleck = 1,
    VanvleckBothFamilies = 2,
    Tdwkb = 3,
}

fn correlation_method(raw: c_int) -> Result<KrCorrelation, KrStatus> {
    [KrCorrelation::Exact, KrCorrelation::Vanvleck, KrCorrelation::ThetaQuantum, KrCorrelation::ThetaSemiclassical]
        .into_iter()
        .find(|m| *m as c_int == raw)
        .ok_or_else(|| fail(KrStatus::InvalidParameter, format!("unknown correlation method {raw}")))
}

fn wavefunction_method(raw: c_int) -> Result<KrWavefunction, KrStatus> {
    [KrWavefunction::Exact, KrWavefunction::Vanvleck, KrWavefunction::VanvleckBothFamilies, KrWavefunction::Tdwkb]
        .into_iter()
        .find(|m| *m as c_int == raw)
        .ok_or_else(|| fail(KrStatus::InvalidParameter, format!("unknown wavefunction method {raw}")))
}

/// Model parameters (opaque).
pub struct KrParams(ModelParams);

/// Truncated Fock-basis propagator (opaque).
pub struct KrExact(ExactKerr);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: KrStatus, msg: impl Into<String>) -> KrStatus {
    set_error(msg.into());
    status
}

/// Run `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), KrStatus>) -> KrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KrStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(KrStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> KrStatus {
    fail(KrStatus::from(&e), e.to_string())
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, KrStatus> {
    p.as_ref().ok_or_else(|| fail(KrStatus::NullPointer, format!("{name} is null")))
}

unsafe fn input<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], KrStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(KrStatus::NullPointer, format!("{name} is null")));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn output<'a>(p: *mut f64, n: usize, name: &str) -> Result<&'a mut [f64], KrStatus> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(KrStatus::NullPointer, format!("{name} is null")));
    }
    Ok(slice::from_raw_parts_mut(p, n))
}

fn write_complex(out: &mut [f64], values: &[Complex64]) {
    for (pair, v) in out.chunks_exact_mut(2).zip(values) {
        pair[0] = v.re;
        pair[1] = v.im;
    }
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), KrStatus> {
    if out.is_null() {
        return Err(fail(KrStatus::NullPointer, "output handle is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn kr_params_new(gamma: f64, hbar: f64, q0: f64, p0: f64, out: *mut *mut KrParams) -> KrStatus {
    guard(|| {
        let p = ModelParams::new(gamma, hbar, q0, p0).map_err(lib)?;
        store(out, KrParams(p))
    })
}

/// `gamma = hbar = 1`, `(q0, p0) = (0, 14)`.
///
/// # Safety
/// As [`kr_params_new`].
#[no_mangle]
pub unsafe extern "C" fn kr_params_reference(out: *mut *mut KrParams) -> KrStatus {
    guard(|| store(out, KrParams(ModelParams::reference())))
}

/// Replace the interaction-picture pivot.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kr_params_set_n0(params: *mut KrParams, n0: f64) -> KrStatus {
    guard(|| {
        let p = params.as_mut().ok_or_else(|| fail(KrStatus::NullPointer, "params is null"))?;
        p.0 = p.0.with_n0(n0).map_err(lib)?;
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kr_params_free(params: *mut KrParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Writes `T1`, `T2` and the mean photon number `nu`. Any output may be null.
///
/// # Safety
/// `params` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn kr_params_scales(params: *const KrParams, t1: *mut f64, t2: *mut f64, nu: *mut f64) -> KrStatus {
    guard(|| {
        let p = &borrow(params, "params")?.0;
        let times = p.times();
        for (dst, v) in [(t1, times.t1), (t2, times.t2), (nu, p.nu())] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}

/// Exact propagator in `picture` (a [`KrPicture`]) with `n_max` Fock
/// states; `n_max = 0` picks the default truncation for the photon number.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kr_exact_new(
    params: *const KrParams,
    picture: c_int,
    n_max: usize,
    out: *mut *mut KrExact,
) -> KrStatus {
    guard(|| {
        let p = &borrow(params, "params")?.0;
        let picture = to_picture(picture)?;
        let ex = if n_max == 0 {
            ExactKerr::new(p, picture)
        } else {
            ExactKerr::with_n_max(p, picture, n_max)
        }
        .map_err(lib)?;
        store(out, KrExact(ex))
    })
}

/// # Safety
/// `exact` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kr_exact_free(exact: *mut KrExact) {
    if !exact.is_null() {
        drop(Box::from_raw(exact));
    }
}

/// `<psi(0)|psi(t)>` at each of `n` times; `out` holds `2 n` doubles.
///
/// # Safety
/// `exact` must be a live handle, `times` readable for `n` doubles and `out`
/// writable for `2 n`.
#[no_mangle]
pub unsafe extern "C" fn kr_exact_autocorrelation(
    exact: *const KrExact,
    times: *const f64,
    n: usize,
    out: *mut f64,
) -> KrStatus {
    guard(|| {
        let ex = &borrow(exact, "exact")?.0;
        let times = input(times, n, "times")?;
        let out = output(out, 2 * n, "out")?;
        let values: Vec<Complex64> = times.iter().map(|&t| ex.autocorrelation(t)).collect();
        write_complex(out, &values);
        Ok(())
    })
}

/// `psi(q_j, t)` in the handle's picture; `out` holds `2 n` doubles.
///
/// # Safety
/// As [`kr_exact_autocorrelation`] with `q` in place of `times`.
#[no_mangle]
pub unsafe extern "C" fn kr_exact_wavefunction(
    exact: *const KrExact,
    t: f64,
    q: *const f64,
    n: usize,
    out: *mut f64,
) -> KrStatus {
    guard(|| {
        let ex = &borrow(exact, "exact")?.0;
        let q = input(q, n, "q")?;
        let out = output(out, 2 * n, "out")?;
        write_complex(out, &ex.wavefunction(t, q).map_err(lib)?);
        Ok(())
    })
}

/// Exact Wigner function at time `t` on a `q_steps x p_steps` grid, written
/// row-major in `q` (`out[i * p_steps + j]` is at `(q_i, p_j)`).
///
/// # Safety
/// `exact` must be a live handle and `out` writable for `q_steps * p_steps`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn kr_exact_wigner(
    exact: *const KrExact,
    t: f64,
    q_min: f64,
    q_max: f64,
    q_steps: usize,
    p_min: f64,
    p_max: f64,
    p_steps: usize,
    out: *mut f64,
) -> KrStatus {
    guard(|| {
        let ex = &borrow(exact, "exact")?.0;
        let len = q_steps
            .checked_mul(p_steps)
            .ok_or_else(|| fail(KrStatus::InvalidParameter, "grid size overflows"))?;
        let out = output(out, len, "out")?;
        let grid = GridSpec { q_min, q_max, q_steps, p_min, p_max, p_steps };
        let w = wigner_exact(&ex.state(t), &grid).map_err(lib)?;
        out.copy_from_slice(&w.values);
        Ok(())
    })
}

/// Lab-frame autocorrelation at `n` times by `method` (a [`KrCorrelation`]).
///
/// # Safety
/// `params` must be a live handle, `times` readable for `n` doubles and
/// `out` writable for `2 n`.
#[no_mangle]
pub unsafe extern "C" fn kr_correlation(
    params: *const KrParams,
    method: c_int,
    times: *const f64,
    n: usize,
    out: *mut f64,
) -> KrStatus {
    guard(|| {
        let p = &borrow(params, "params")?.0;
        let times = input(times, n, "times")?;
        let out = output(out, 2 * n, "out")?;
        let values: Vec<Complex64> = match correlation_method(method)? {
            KrCorrelation::Exact => {
                let ex = ExactKerr::new(p, Picture::Lab).map_err(lib)?;
                times.iter().map(|&t| ex.autocorrelation(t)).collect()
            }
            KrCorrelation::Vanvleck => times.iter().map(|&t| correlation_vanvleck(p, t)).collect::<Result<_, _>>().map_err(lib)?,
            KrCorrelation::ThetaQuantum => {
                times.iter().map(|&t| correlation_theta_quantum(p, t)).collect::<Result<_, _>>().map_err(lib)?
            }
            KrCorrelation::ThetaSemiclassical => times
                .iter()
                .map(|&t| correlation_theta_semiclassical(p, t))
                .collect::<Result<_, _>>()
                .map_err(lib)?,
        };
        write_complex(out, &values);
        Ok(())
    })
}

/// `psi(q_j, t)` by `method` (a [`KrWavefunction`]) with default options.
///
/// # Safety
/// `params` must be a live handle, `q` readable for `n` doubles and `out`
/// writable for `2 n`.
#[no_mangle]
pub unsafe extern "C" fn kr_wavefunction(
    params: *const KrParams,
    method: c_int,
    t: f64,
    q: *const f64,
    n: usize,
    out: *mut f64,
) -> KrStatus {
    guard(|| {
        let p = &borrow(params, "params")?.0;
        let q = input(q, n, "q")?;
        let out = output(out, 2 * n, "out")?;
        let method = wavefunction_method(method)?;
        let values = match method {
            KrWavefunction::Exact => ExactKerr::new(p, Picture::Lab).and_then(|ex| ex.wavefunction(t, q)),
            KrWavefunction::Vanvleck | KrWavefunction::VanvleckBothFamilies => {
                let opts = WavefunctionOptions {
                    include_negative_momentum: method == KrWavefunction::VanvleckBothFamilies,
                    ..Default::default()
                };
                wavefunction_vanvleck_grid(p, t, q, &opts)
            }
            KrWavefunction::Tdwkb => wavefunction_tdwkb(p, t, q).map(|w| w.values),
        }
        .map_err(lib)?;
        write_complex(out, &values);
        Ok(())
    })
}
