//! C interface to the multichannel Jost-matrix engine.
//!
//! Conventions, uniform across the whole surface:
//! * Handles (`JostModel`, `JostExpansion`) are opaque; create them with the
//!   constructors here, free them with the matching `_free`. Handles are not
//!   thread-safe; share them across threads only behind your own lock.
//! * Complex scalars pass as separate `re`/`im` doubles. Complex matrices
//!   pass as caller-allocated `f64` buffers of `2*n*n` entries, row-major,
//!   each entry as an adjacent `[re, im]` pair. Momentum vectors likewise
//!   use `2*n`.
//! * Riemann sheets are strings of `+`/`-` signs, one per channel, e.g.
//!   `"--"`; the physical sheet is all `+`.
//! * Every call returns `JostStatus` (or NULL for constructors) on failure
//!   and leaves a human-readable message in `jost_last_error()`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use jost_core::{
    bound_state_scan, det_fin, find_spectral_point, integrate_coefficients, integrate_direct,
    s_matrix, Channel, ChannelSet, DetSource, ExpansionTable, JostError, NoroTaylorPotential,
    PolyExpPotential, RadialPotential, Rotation, SheetSelector, SolverSettings,
    TabulatedPotential,
};

/// Result of every fallible call. Anything but OK leaves a message in
/// `jost_last_error()`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JostStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// Arguments failed validation (bad sheet string, bad tolerances, ...).
    InvalidInput = 2,
    /// The energy/rotation combination has no convergent contour.
    OutsideDomain = 3,
    /// The radial integration diverged, underflowed, or ran out of steps.
    Diverged = 4,
    /// A channel momentum is too close to a threshold for this formulation.
    NearThreshold = 5,
    /// A matrix that must be inverted is numerically singular.
    Singular = 6,
    /// The root search did not converge or wandered off.
    NoConvergence = 7,
    /// File or serialization failure.
    Io = 8,
    /// An output buffer is too small; counts are still written.
    BufferTooSmall = 9,
    /// Internal panic; state may be stale but memory is intact.
    Panic = 10,
}

fn status_of(e: &JostError) -> JostStatus {
    match e {
        JostError::InvalidInput(_) | JostError::Potential(_) | JostError::TooManySheets(_) => {
            JostStatus::InvalidInput
        }
        JostError::OutsideDomain { .. } => JostStatus::OutsideDomain,
        JostError::Diverged { .. } | JostError::StepUnderflow { .. } | JostError::MaxSteps(_) => {
            JostStatus::Diverged
        }
        JostError::NearThreshold { .. } => JostStatus::NearThreshold,
        JostError::Singular(_) | JostError::SingularJost { .. } => JostStatus::Singular,
        JostError::NoConvergence { .. } | JostError::RootWandered(_) => JostStatus::NoConvergence,
        JostError::Io(_) | JostError::Serde(_) => JostStatus::Io,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).unwrap_or_default();
    });
}

fn fail(e: &JostError) -> JostStatus {
    set_error(&e.to_string());
    status_of(e)
}

fn fail_null(what: &str) -> JostStatus {
    set_error(&format!("{what} must not be NULL"));
    JostStatus::NullArgument
}

/// Message from the most recent failing call on this thread, empty if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn jost_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guarded<F: FnOnce() -> JostStatus>(f: F) -> JostStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            JostStatus::Panic
        }
    }
}

fn guarded_ptr<T, F: FnOnce() -> Option<T>>(f: F) -> *mut T {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Some(v)) => Box::into_raw(Box::new(v)),
        Ok(None) => std::ptr::null_mut(),
        Err(_) => {
            set_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// A channel set, a potential, and solver settings: everything needed to
/// evaluate Jost matrices. Opaque.
pub struct JostModel {
    cs: ChannelSet,
    pot: Box<dyn RadialPotential>,
    settings: SolverSettings,
}

/// A saved power series of the factorized Jost system around one center.
/// Opaque.
pub struct JostExpansion {
    table: ExpansionTable,
}

unsafe fn parse_cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, JostStatus> {
    if p.is_null() {
        return Err(fail_null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        JostStatus::InvalidInput
    })
}

unsafe fn parse_sheet(
    p: *const c_char,
    n_channels: usize,
) -> Result<SheetSelector, JostStatus> {
    let text = parse_cstr(p, "sheet")?;
    let sheet: SheetSelector = text.parse().map_err(|e: JostError| fail(&e))?;
    if sheet.len() != n_channels {
        set_error(&format!(
            "sheet {text:?} has {} signs for {n_channels} channels",
            sheet.len()
        ));
        return Err(JostStatus::InvalidInput);
    }
    Ok(sheet)
}

unsafe fn channel_set(
    thresholds: *const f64,
    masses: *const f64,
    ells: *const u32,
    n_channels: usize,
    hbar: f64,
) -> Option<ChannelSet> {
    if thresholds.is_null() || masses.is_null() || ells.is_null() {
        fail_null("thresholds/masses/ells");
        return None;
    }
    if n_channels == 0 {
        set_error("n_channels must be positive");
        return None;
    }
    let t = std::slice::from_raw_parts(thresholds, n_channels);
    let m = std::slice::from_raw_parts(masses, n_channels);
    let l = std::slice::from_raw_parts(ells, n_channels);
    let channels: Result<Vec<Channel>, JostError> = (0..n_channels)
        .map(|i| Channel::new(t[i], m[i], l[i]))
        .collect();
    let channels = match channels {
        Ok(c) => c,
        Err(e) => {
            fail(&e);
            return None;
        }
    };
    match ChannelSet::new(channels, hbar) {
        Ok(cs) => Some(cs),
        Err(e) => {
            fail(&e);
            None
        }
    }
}

/// The bundled two-channel benchmark model (thresholds 0 and 0.1, unit
/// masses, s waves, strongly coupled r^2 e^{-r} potential).
#[no_mangle]
pub extern "C" fn jost_model_noro_taylor() -> *mut JostModel {
    guarded_ptr(|| {
        Some(JostModel {
            cs: ChannelSet::noro_taylor(),
            pot: Box::new(NoroTaylorPotential),
            settings: SolverSettings::default(),
        })
    })
}

/// Model with V(r) = C r^power e^{-rate r}; `strength` is the row-major
/// n x n coupling matrix C. NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn jost_model_new_poly_exp(
    thresholds: *const f64,
    masses: *const f64,
    ells: *const u32,
    n_channels: usize,
    hbar: f64,
    strength: *const f64,
    power: u32,
    rate: f64,
) -> *mut JostModel {
    guarded_ptr(|| {
        let cs = channel_set(thresholds, masses, ells, n_channels, hbar)?;
        if strength.is_null() {
            fail_null("strength");
            return None;
        }
        let s = std::slice::from_raw_parts(strength, n_channels * n_channels);
        let mat = DMatrix::from_fn(n_channels, n_channels, |i, j| s[i * n_channels + j]);
        match PolyExpPotential::new(mat, power, rate) {
            Ok(pot) => Some(JostModel { cs, pot: Box::new(pot), settings: SolverSettings::default() }),
            Err(e) => {
                fail(&e);
                None
            }
        }
    })
}

/// Model with a potential interpolated from a whitespace-separated table
/// file (`r V11 V12 ...` with a `#` header line). NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn jost_model_new_tabulated(
    thresholds: *const f64,
    masses: *const f64,
    ells: *const u32,
    n_channels: usize,
    hbar: f64,
    path: *const c_char,
) -> *mut JostModel {
    guarded_ptr(|| {
        let cs = channel_set(thresholds, masses, ells, n_channels, hbar)?;
        let path = match parse_cstr(path, "path") {
            Ok(p) => p,
            Err(_) => return None,
        };
        match TabulatedPotential::from_path(Path::new(path)) {
            Ok(pot) => {
                if pot.n_channels() != cs.len() {
                    set_error(&format!(
                        "table couples {} channels, model defines {}",
                        pot.n_channels(),
                        cs.len()
                    ));
                    return None;
                }
                Some(JostModel { cs, pot: Box::new(pot), settings: SolverSettings::default() })
            }
            Err(e) => {
                fail(&e);
                None
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn jost_model_free(model: *mut JostModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of channels, 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn jost_model_n_channels(model: *const JostModel) -> usize {
    if model.is_null() {
        0
    } else {
        (*model).cs.len()
    }
}

unsafe fn update_settings(
    model: *mut JostModel,
    patch: impl FnOnce(&mut SolverSettings),
) -> JostStatus {
    if model.is_null() {
        return fail_null("model");
    }
    let model = &mut *model;
    let mut next = model.settings;
    patch(&mut next);
    match next.validate() {
        Ok(()) => {
            model.settings = next;
            JostStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Integration window [r_min, r_max].
#[no_mangle]
pub unsafe extern "C" fn jost_model_set_limits(
    model: *mut JostModel,
    r_min: f64,
    r_max: f64,
) -> JostStatus {
    guarded(|| {
        update_settings(model, |s| {
            s.r_min = r_min;
            s.r_max = r_max;
        })
    })
}

/// Relative and absolute local error tolerances of the radial integrator.
#[no_mangle]
pub unsafe extern "C" fn jost_model_set_tolerances(
    model: *mut JostModel,
    rel_tol: f64,
    abs_tol: f64,
) -> JostStatus {
    guarded(|| {
        update_settings(model, |s| {
            s.rel_tol = rel_tol;
            s.abs_tol = abs_tol;
        })
    })
}

/// Pin the contour rotation angle (radians).
#[no_mangle]
pub unsafe extern "C" fn jost_model_set_rotation(model: *mut JostModel, theta: f64) -> JostStatus {
    guarded(|| update_settings(model, |s| s.rotation = Rotation::Fixed(theta)))
}

/// Let the solver pick the rotation angle per energy (the default).
#[no_mangle]
pub unsafe extern "C" fn jost_model_set_rotation_auto(model: *mut JostModel) -> JostStatus {
    guarded(|| update_settings(model, |s| s.rotation = Rotation::Auto))
}

fn write_complex(dst: &mut [f64], idx: usize, z: Complex64) {
    dst[2 * idx] = z.re;
    dst[2 * idx + 1] = z.im;
}

unsafe fn write_matrix(dst: *mut f64, m: &DMatrix<Complex64>) {
    let n = m.nrows();
    let out = std::slice::from_raw_parts_mut(dst, 2 * n * n);
    for i in 0..n {
        for j in 0..n {
            write_complex(out, i * n + j, m[(i, j)]);
        }
    }
}

/// Channel momenta k_n(E) on a sheet; `k` holds 2*n doubles.
#[no_mangle]
pub unsafe extern "C" fn jost_momenta(
    model: *const JostModel,
    e_re: f64,
    e_im: f64,
    sheet: *const c_char,
    k: *mut f64,
) -> JostStatus {
    guarded(|| {
        if model.is_null() {
            return fail_null("model");
        }
        if k.is_null() {
            return fail_null("k");
        }
        let model = &*model;
        let sheet = match parse_sheet(sheet, model.cs.len()) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match model.cs.momenta(Complex64::new(e_re, e_im), &sheet) {
            Ok(ks) => {
                let out = std::slice::from_raw_parts_mut(k, 2 * model.cs.len());
                for (i, ki) in ks.iter().enumerate() {
                    write_complex(out, i, *ki);
                }
                JostStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// F_in and F_out at one energy on one sheet; each buffer holds 2*n*n
/// doubles (row-major, [re, im] pairs). Either buffer may be NULL to skip.
#[no_mangle]
pub unsafe extern "C" fn jost_compute(
    model: *const JostModel,
    e_re: f64,
    e_im: f64,
    sheet: *const c_char,
    f_in: *mut f64,
    f_out: *mut f64,
) -> JostStatus {
    guarded(|| {
        if model.is_null() {
            return fail_null("model");
        }
        let model = &*model;
        let sheet = match parse_sheet(sheet, model.cs.len()) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let jp = match integrate_direct(
            &model.cs,
            model.pot.as_ref(),
            Complex64::new(e_re, e_im),
            &sheet,
            &model.settings,
        ) {
            Ok(jp) => jp,
            Err(e) => return fail(&e),
        };
        if !f_in.is_null() {
            write_matrix(f_in, &jp.f_in);
        }
        if !f_out.is_null() {
            write_matrix(f_out, &jp.f_out);
        }
        JostStatus::Ok
    })
}

/// det F_in(E) on a sheet.
#[no_mangle]
pub unsafe extern "C" fn jost_det_fin(
    model: *const JostModel,
    e_re: f64,
    e_im: f64,
    sheet: *const c_char,
    det_re: *mut f64,
    det_im: *mut f64,
) -> JostStatus {
    guarded(|| {
        if model.is_null() {
            return fail_null("model");
        }
        if det_re.is_null() || det_im.is_null() {
            return fail_null("det_re/det_im");
        }
        let model = &*model;
        let sheet = match parse_sheet(sheet, model.cs.len()) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let source = DetSource::Direct { potential: model.pot.as_ref(), settings: &model.settings };
        match det_fin(&source, &model.cs, Complex64::new(e_re, e_im), &sheet) {
            Ok(d) => {
                *det_re = d.re;
                *det_im = d.im;
                JostStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Flux-normalized S-matrix S = K^{1/2} F_out F_in^{-1} K^{-1/2};
/// `s` holds 2*n*n doubles.
#[no_mangle]
pub unsafe extern "C" fn jost_s_matrix(
    model: *const JostModel,
    e_re: f64,
    e_im: f64,
    sheet: *const c_char,
    s: *mut f64,
) -> JostStatus {
    guarded(|| {
        if model.is_null() {
            return fail_null("model");
        }
        if s.is_null() {
            return fail_null("s");
        }
        let model = &*model;
        let sheet = match parse_sheet(sheet, model.cs.len()) {
            Ok(sh) => sh,
            Err(st) => return st,
        };
        let jp = match integrate_direct(
            &model.cs,
            model.pot.as_ref(),
            Complex64::new(e_re, e_im),
            &sheet,
            &model.settings,
        ) {
            Ok(jp) => jp,
            Err(e) => return fail(&e),
        };
        match s_matrix(&model.cs, &jp) {
            Ok(mat) => {
                write_matrix(s, &mat);
                JostStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Muller search for a zero of det F_in from `(guess_re, guess_im)`.
/// `iterations` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn jost_find_spectral_point(
    model: *const JostModel,
    guess_re: f64,
    guess_im: f64,
    sheet: *const c_char,
    tol: f64,
    max_iter: usize,
    e_re: *mut f64,
    e_im: *mut f64,
    residual: *mut f64,
    iterations: *mut usize,
) -> JostStatus {
    guarded(|| {
        if model.is_null() {
            return fail_null("model");
        }
        if e_re.is_null() || e_im.is_null() || residual.is_null() {
            return fail_null("e_re/e_im/residual");
        }
        let model = &*model;
        let sheet = match parse_sheet(sheet, model.cs.len()) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let source = DetSource::Direct { potential: model.pot.as_ref(), settings: &model.settings };
        match find_spectral_point(
            &source,
            &model.cs,
            Complex64::new(guess_re, guess_im),
            &sheet,
            tol,
            max_iter,
        ) {
            Ok(p) => {
                *e_re = p.energy.re;
                *e_im = p.energy.im;
                *residual = p.residual;
                if !iterations.is_null() {
                    *iterations = p.iterations;
                }
                JostStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Scan [e_min, e_max] on the physical sheet for bound states. Writes up to
/// `capacity` energies (real parts, ascending) into `energies` and the
/// number found into `count`; returns BUFFER_TOO_SMALL if more were found
/// than fit.
#[no_mangle]
pub unsafe extern "C" fn jost_bound_states(
    model: *const JostModel,
    e_min: f64,
    e_max: f64,
    n_samples: usize,
    energies: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> JostStatus {
    guarded(|| {
        if model.is_null() {
            return fail_null("model");
        }
        if count.is_null() || (energies.is_null() && capacity > 0) {
            return fail_null("energies/count");
        }
        let model = &*model;
        let source = DetSource::Direct { potential: model.pot.as_ref(), settings: &model.settings };
        match bound_state_scan(&source, &model.cs, e_min, e_max, n_samples) {
            Ok(points) => {
                *count = points.len();
                let n_write = points.len().min(capacity);
                if n_write > 0 {
                    let out = std::slice::from_raw_parts_mut(energies, n_write);
                    for (slot, p) in out.iter_mut().zip(points.iter()) {
                        *slot = p.energy.re;
                    }
                }
                if points.len() > capacity {
                    set_error(&format!(
                        "found {} bound states, buffer holds {capacity}",
                        points.len()
                    ));
                    JostStatus::BufferTooSmall
                } else {
                    JostStatus::Ok
                }
            }
            Err(e) => fail(&e),
        }
    })
}

/// Power series of the factorized Jost system around `(center_re,
/// center_im)` up to `order`. NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn jost_expansion_compute(
    model: *const JostModel,
    center_re: f64,
    center_im: f64,
    order: usize,
) -> *mut JostExpansion {
    guarded_ptr(|| {
        if model.is_null() {
            fail_null("model");
            return None;
        }
        let model = &*model;
        match integrate_coefficients(
            &model.cs,
            model.pot.as_ref(),
            Complex64::new(center_re, center_im),
            order,
            &model.settings,
        ) {
            Ok(table) => Some(JostExpansion { table }),
            Err(e) => {
                fail(&e);
                None
            }
        }
    })
}

/// Load a table saved by `jost_expansion_save` (or the CLI). NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn jost_expansion_load(path: *const c_char) -> *mut JostExpansion {
    guarded_ptr(|| {
        let path = match parse_cstr(path, "path") {
            Ok(p) => p,
            Err(_) => return None,
        };
        match ExpansionTable::load(Path::new(path)) {
            Ok(table) => Some(JostExpansion { table }),
            Err(e) => {
                fail(&e);
                None
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn jost_expansion_save(
    expansion: *const JostExpansion,
    path: *const c_char,
) -> JostStatus {
    guarded(|| {
        if expansion.is_null() {
            return fail_null("expansion");
        }
        let path = match parse_cstr(path, "path") {
            Ok(p) => p,
            Err(st) => return st,
        };
        match (*expansion).table.save(Path::new(path)) {
            Ok(()) => JostStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn jost_expansion_free(expansion: *mut JostExpansion) {
    if !expansion.is_null() {
        drop(Box::from_raw(expansion));
    }
}

/// Expansion center; both outputs required.
#[no_mangle]
pub unsafe extern "C" fn jost_expansion_center(
    expansion: *const JostExpansion,
    center_re: *mut f64,
    center_im: *mut f64,
) -> JostStatus {
    guarded(|| {
        if expansion.is_null() {
            return fail_null("expansion");
        }
        if center_re.is_null() || center_im.is_null() {
            return fail_null("center_re/center_im");
        }
        let c = (*expansion).table.center();
        *center_re = c.re;
        *center_im = c.im;
        JostStatus::Ok
    })
}

/// Truncation order M, 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn jost_expansion_order(expansion: *const JostExpansion) -> usize {
    if expansion.is_null() {
        0
    } else {
        (*expansion).table.order()
    }
}

/// F_in, F_out from the table at one energy and sheet; same buffer layout
/// as `jost_compute`. Either buffer may be NULL to skip.
#[no_mangle]
pub unsafe extern "C" fn jost_expansion_eval(
    expansion: *const JostExpansion,
    e_re: f64,
    e_im: f64,
    sheet: *const c_char,
    f_in: *mut f64,
    f_out: *mut f64,
) -> JostStatus {
    guarded(|| {
        if expansion.is_null() {
            return fail_null("expansion");
        }
        let table = &(*expansion).table;
        let sheet = match parse_sheet(sheet, table.channels().len()) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match table.jost(Complex64::new(e_re, e_im), &sheet) {
            Ok(jp) => {
                if !f_in.is_null() {
                    write_matrix(f_in, &jp.f_in);
                }
                if !f_out.is_null() {
                    write_matrix(f_out, &jp.f_out);
                }
                JostStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// det F_in from the table (threshold-safe form).
#[no_mangle]
pub unsafe extern "C" fn jost_expansion_det(
    expansion: *const JostExpansion,
    e_re: f64,
    e_im: f64,
    sheet: *const c_char,
    det_re: *mut f64,
    det_im: *mut f64,
) -> JostStatus {
    guarded(|| {
        if expansion.is_null() {
            return fail_null("expansion");
        }
        if det_re.is_null() || det_im.is_null() {
            return fail_null("det_re/det_im");
        }
        let table = &(*expansion).table;
        let sheet = match parse_sheet(sheet, table.channels().len()) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let source = DetSource::Expansion(table);
        match det_fin(&source, table.channels(), Complex64::new(e_re, e_im), &sheet) {
            Ok(d) => {
                *det_re = d.re;
                *det_im = d.im;
                JostStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Muller search on the table's determinant; microseconds per root.
/// `iterations` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn jost_expansion_find_root(
    expansion: *const JostExpansion,
    guess_re: f64,
    guess_im: f64,
    sheet: *const c_char,
    tol: f64,
    max_iter: usize,
    e_re: *mut f64,
    e_im: *mut f64,
    residual: *mut f64,
    iterations: *mut usize,
) -> JostStatus {
    guarded(|| {
        if expansion.is_null() {
            return fail_null("expansion");
        }
        if e_re.is_null() || e_im.is_null() || residual.is_null() {
            return fail_null("e_re/e_im/residual");
        }
        let table = &(*expansion).table;
        let sheet = match parse_sheet(sheet, table.channels().len()) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let source = DetSource::Expansion(table);
        match find_spectral_point(
            &source,
            table.channels(),
            Complex64::new(guess_re, guess_im),
            &sheet,
            tol,
            max_iter,
        ) {
            Ok(p) => {
                *e_re = p.energy.re;
                *e_im = p.energy.im;
                *residual = p.residual;
                if !iterations.is_null() {
                    *iterations = p.iterations;
                }
                JostStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
