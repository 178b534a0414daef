//! C ABI over `h2xh2`.
//!
//! Every fallible function returns an [`H2Status`]. On failure a message is
//! kept per thread and can be read with [`h2xh2_last_error`]. Models are
//! opaque handles released with [`h2xh2_model_free`]; strings returned by the
//! library are released with [`h2xh2_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use h2xh2::parallel::{adapted_frame, detq_derivatives_at_0, mean_curvature_of_parallel};
use h2xh2::surface::point_geometry;
use h2xh2::verify::{run_suite, SuiteConfig};
use h2xh2::zoo::{CurvatureSpec, Family, Model, ModelSpec};
use h2xh2::GeomError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum H2Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Geometry = 3,
    FocalPoint = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum H2ModelKind {
    /// Parameter: `kappa_gamma`.
    Gamma = 0,
    /// Parameter: `c`.
    OneOne = 1,
    /// Parameter: `c`.
    OneMinusOne = 2,
    /// Parameter: `tau`.
    Tau = 3,
}

/// Opaque model handle.
pub struct H2Model {
    inner: Model,
}

/// Pointwise data at one chart point. `x` and `normal` are stacked
/// `(p, q)` in `R^3 x R^3`; `lambdas` are ascending.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct H2PointGeometry {
    pub x: [f64; 6],
    pub normal: [f64; 6],
    pub lambdas: [f64; 3],
    pub c: f64,
    pub h: f64,
    pub rho: f64,
    pub k: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn geom_status(e: &GeomError) -> H2Status {
    match e {
        GeomError::InvalidParameter { .. } => H2Status::InvalidArgument,
        GeomError::FocalPoint { .. } => H2Status::FocalPoint,
        _ => H2Status::Geometry,
    }
}

struct Fail(H2Status, String);

impl From<GeomError> for Fail {
    fn from(e: GeomError) -> Self {
        Fail(geom_status(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(H2Status::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> H2Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => H2Status::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            H2Status::Panic
        }
    }
}

unsafe fn model_ref<'a>(m: *const H2Model) -> Result<&'a Model, Fail> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn read_u(u: *const f64) -> Result<[f64; 3], Fail> {
    if u.is_null() {
        return Err(null("u"));
    }
    Ok([*u, *u.add(1), *u.add(2)])
}

unsafe fn store_model(spec: ModelSpec, out: *mut *mut H2Model) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let inner = spec.build()?;
    *out = Box::into_raw(Box::new(H2Model { inner }));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn h2xh2_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn h2xh2_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds one of the one-parameter families.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn h2xh2_model_new(kind: H2ModelKind, param: f64, out: *mut *mut H2Model) -> H2Status {
    guard(|| {
        let family = match kind {
            H2ModelKind::Gamma => Family::Gamma { kappa_gamma: param },
            H2ModelKind::OneOne => Family::OneOne { c: param },
            H2ModelKind::OneMinusOne => Family::OneMinusOne { c: param },
            H2ModelKind::Tau => Family::Tau { tau: param },
        };
        store_model(family.into(), out)
    })
}

/// Builds a product of two constant-curvature curves.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn h2xh2_model_new_kk(
    c: f64,
    kappa: f64,
    kappa_tilde: f64,
    out: *mut *mut H2Model,
) -> H2Status {
    guard(|| {
        let family = Family::Kk {
            c,
            kappa: CurvatureSpec::Constant(kappa),
            kappa_tilde: CurvatureSpec::Constant(kappa_tilde),
        };
        store_model(family.into(), out)
    })
}

/// Builds a model from its JSON description, e.g. `{"kind":"M_tau","tau":-2}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn h2xh2_model_from_json(json: *const c_char, out: *mut *mut H2Model) -> H2Status {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(H2Status::InvalidArgument, e.to_string()))?;
        let spec: ModelSpec =
            serde_json::from_str(text).map_err(|e| Fail(H2Status::InvalidArgument, e.to_string()))?;
        store_model(spec, out)
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `m` must come from one of the constructors and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn h2xh2_model_free(m: *mut H2Model) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Chart box of the model.
///
/// # Safety
/// `lo` and `hi` must each be valid for three writes.
#[no_mangle]
pub unsafe extern "C" fn h2xh2_model_domain(m: *const H2Model, lo: *mut f64, hi: *mut f64) -> H2Status {
    guard(|| {
        let model = model_ref(m)?;
        if lo.is_null() || hi.is_null() {
            return Err(null("lo/hi"));
        }
        let d = model.surface.domain;
        ptr::copy_nonoverlapping(d.lo.as_ptr(), lo, 3);
        ptr::copy_nonoverlapping(d.hi.as_ptr(), hi, 3);
        Ok(())
    })
}

/// Pointwise geometry at chart point `u[3]`.
///
/// # Safety
/// `u` must be valid for three reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn h2xh2_point_geometry(
    m: *const H2Model,
    u: *const f64,
    out: *mut H2PointGeometry,
) -> H2Status {
    guard(|| {
        let model = model_ref(m)?;
        let u = read_u(u)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pg = point_geometry(&model.surface, u)?;
        *out = H2PointGeometry {
            x: pg.x,
            normal: pg.normal,
            lambdas: pg.lambdas,
            c: pg.c,
            h: pg.h,
            rho: pg.rho,
            k: pg.k,
        };
        Ok(())
    })
}

/// Mean curvature of the parallel hypersurface at distance `l`.
///
/// # Safety
/// `u` must be valid for three reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn h2xh2_parallel_mean_curvature(
    m: *const H2Model,
    u: *const f64,
    l: f64,
    out: *mut f64,
) -> H2Status {
    guard(|| {
        let model = model_ref(m)?;
        let u = read_u(u)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pg = point_geometry(&model.surface, u)?;
        *out = mean_curvature_of_parallel(&adapted_frame(&pg)?, l)?;
        Ok(())
    })
}

/// Closed-form `d^k det Q / dl^k` at `l = 0` for `k = 1, 2, 4, 6, 8`.
///
/// # Safety
/// `u` must be valid for three reads and `out` for five writes.
#[no_mangle]
pub unsafe extern "C" fn h2xh2_detq_derivatives(m: *const H2Model, u: *const f64, out: *mut f64) -> H2Status {
    guard(|| {
        let model = model_ref(m)?;
        let u = read_u(u)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pg = point_geometry(&model.surface, u)?;
        let d = detq_derivatives_at_0(&adapted_frame(&pg)?, pg.rho);
        ptr::copy_nonoverlapping(d.as_ptr(), out, d.len());
        Ok(())
    })
}

/// Runs the identity suite for a JSON configuration and returns the JSON
/// report in `*report` (free with [`h2xh2_string_free`]). `*all_passed` is
/// set to whether every non-informational check passed.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `report` and `all_passed`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn h2xh2_verify(
    config_json: *const c_char,
    report: *mut *mut c_char,
    all_passed: *mut bool,
) -> H2Status {
    guard(|| {
        if config_json.is_null() || report.is_null() || all_passed.is_null() {
            return Err(null("argument"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Fail(H2Status::InvalidArgument, e.to_string()))?;
        let cfg: SuiteConfig =
            serde_json::from_str(text).map_err(|e| Fail(H2Status::InvalidArgument, e.to_string()))?;
        let r = run_suite(cfg).map_err(|e| Fail(H2Status::InvalidArgument, e.to_string()))?;
        let json = CString::new(r.to_json()).map_err(|e| Fail(H2Status::Geometry, e.to_string()))?;
        *all_passed = r.all_passed();
        *report = json.into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn h2xh2_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
