//! C interface to `mcprop`.
//!
//! Objects are handed out as opaque pointers and released with the matching
//! `*_free` function. Fallible calls return an [`McpStatus`]; on failure the
//! message is available from [`mcp_last_error`] on the same thread until the
//! next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mcprop::app::{self, AppId};
use mcprop::dirac::{combine, Atom, BinaryOp, DiracMixture};
use mcprop::dist::{MixtureComponent, ParametricDist};
use mcprop::mc::SampleSet;
use mcprop::metrics::wasserstein1;
use mcprop::rng::RngHandle;
use mcprop::transform::Transform;
use mcprop::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McpStatus {
    Ok = 0,
    InvalidArgument = 1,
    /// A probability outside (0, 1).
    Domain = 2,
    /// Quadrature failure, singular operand or degenerate basis.
    Numerical = 3,
    /// A non-finite value while propagating.
    Propagation = 4,
    Io = 5,
    NullPointer = 6,
    /// The caller's buffer is shorter than the result.
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McpOp {
    Add = 0,
    Sub = 1,
    Mul = 2,
    Div = 3,
}

impl From<McpOp> for BinaryOp {
    fn from(op: McpOp) -> Self {
        match op {
            McpOp::Add => BinaryOp::Add,
            McpOp::Sub => BinaryOp::Sub,
            McpOp::Mul => BinaryOp::Mul,
            McpOp::Div => BinaryOp::Div,
        }
    }
}

/// Seeded xoshiro256** generator.
pub struct McpRng(RngHandle);

/// Equal-mass Dirac mixture.
pub struct McpDirac(DiracMixture);

/// Owned array of samples.
pub struct McpSamples(SampleSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|&b| b != 0);
        CString::new(bytes).expect("nul bytes removed")
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> McpStatus {
    match e {
        Error::Domain(_) => McpStatus::Domain,
        Error::NonConvergent { .. }
        | Error::Singularity(_)
        | Error::DependentBasis { .. }
        | Error::SourceDepleted(_) => McpStatus::Numerical,
        Error::Propagation { .. } => McpStatus::Propagation,
        Error::Io(_) | Error::Csv(_) | Error::Checksum(_) => McpStatus::Io,
        _ => McpStatus::InvalidArgument,
    }
}

struct Fail(McpStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let s = status_of(&e);
        set_error(e.to_string());
        Fail(s)
    }
}

fn fail(status: McpStatus, msg: &str) -> Fail {
    set_error(msg.to_string());
    Fail(status)
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> McpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => McpStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("panic: {msg}"));
            McpStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| fail(McpStatus::NullPointer, &format!("{what} is null")))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| fail(McpStatus::NullPointer, &format!("{what} is null")))
}

unsafe fn array<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(McpStatus::NullPointer, &format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(fail(McpStatus::NullPointer, "output pointer is null"));
    }
    out.write(v);
    Ok(())
}

unsafe fn write_dirac(out: *mut *mut McpDirac, d: DiracMixture) -> Result<(), Fail> {
    write_out(out, Box::into_raw(Box::new(McpDirac(d))))
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mcp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mcp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn mcp_rng_new(seed: u64) -> *mut McpRng {
    Box::into_raw(Box::new(McpRng(RngHandle::seeded(seed))))
}

/// # Safety
/// `rng` must come from [`mcp_rng_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mcp_rng_free(rng: *mut McpRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// Next uniform on the open unit interval.
///
/// # Safety
/// `rng` must be a live generator and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_rng_next_f64(rng: *mut McpRng, out: *mut f64) -> McpStatus {
    guard(|| {
        let rng = borrow_mut(rng, "rng")?;
        write_out(out, rng.0.next_f64())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_gaussian(mean: f64, std_dev: f64, r: usize, out: *mut *mut McpDirac) -> McpStatus {
    guard(|| {
        let d = ParametricDist::gaussian(mean, std_dev)?;
        write_dirac(out, DiracMixture::from_dist(&d, r)?)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_uniform(lower: f64, upper: f64, r: usize, out: *mut *mut McpDirac) -> McpStatus {
    guard(|| {
        let d = ParametricDist::uniform(lower, upper)?;
        write_dirac(out, DiracMixture::from_dist(&d, r)?)
    })
}

/// Gaussian mixture from three parallel arrays of length `len`.
///
/// # Safety
/// The arrays must hold `len` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_mixture(
    weights: *const f64,
    means: *const f64,
    std_devs: *const f64,
    len: usize,
    r: usize,
    out: *mut *mut McpDirac,
) -> McpStatus {
    guard(|| {
        let w = array(weights, len, "weights")?;
        let m = array(means, len, "means")?;
        let s = array(std_devs, len, "std_devs")?;
        let comps = (0..len).map(|i| MixtureComponent::new(w[i], m[i], s[i])).collect();
        let d = ParametricDist::mixture(comps)?;
        write_dirac(out, DiracMixture::from_dist(&d, r)?)
    })
}

/// Mixture from explicit atoms, sorted by position with masses summing to 1.
///
/// # Safety
/// The arrays must hold `len` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_from_atoms(
    positions: *const f64,
    masses: *const f64,
    len: usize,
    out: *mut *mut McpDirac,
) -> McpStatus {
    guard(|| {
        let p = array(positions, len, "positions")?;
        let m = array(masses, len, "masses")?;
        let atoms = p
            .iter()
            .zip(m)
            .map(|(&position, &mass)| Atom { position, mass })
            .collect();
        write_dirac(out, DiracMixture::from_atoms(atoms)?)
    })
}

/// Distribution of `a op b` for independent operands, requantized to `r` atoms.
///
/// # Safety
/// `a` and `b` must be live mixtures and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_combine(
    a: *const McpDirac,
    b: *const McpDirac,
    op: McpOp,
    r: usize,
    out: *mut *mut McpDirac,
) -> McpStatus {
    guard(|| {
        let (a, b) = (borrow(a, "a")?, borrow(b, "b")?);
        write_dirac(out, combine(&a.0, &b.0, op.into(), r)?)
    })
}

/// # Safety
/// `d` must be a live mixture and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_affine(
    d: *const McpDirac,
    scale: f64,
    offset: f64,
    out: *mut *mut McpDirac,
) -> McpStatus {
    guard(|| {
        let d = borrow(d, "d")?;
        write_dirac(out, d.0.apply_unary(&Transform::affine(scale, offset))?)
    })
}

/// # Safety
/// `d` must be a live mixture and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_sigmoid(d: *const McpDirac, out: *mut *mut McpDirac) -> McpStatus {
    guard(|| {
        let d = borrow(d, "d")?;
        write_dirac(out, d.0.apply_unary(&Transform::sigmoid())?)
    })
}

/// Output of the named application (`convergence-challenge` or
/// `poiseuille`) propagated with `r` atoms per input.
///
/// # Safety
/// `app` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_app_dirac_prop(app: *const c_char, r: usize, out: *mut *mut McpDirac) -> McpStatus {
    guard(|| {
        let app = parse_app(app)?;
        write_dirac(out, app::dirac_prop(app, r)?)
    })
}

/// `n` Monte Carlo output samples of the named application.
///
/// # Safety
/// `app` must be a NUL-terminated string, `rng` live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_app_monte_carlo(
    app: *const c_char,
    rng: *mut McpRng,
    n: usize,
    out: *mut *mut McpSamples,
) -> McpStatus {
    guard(|| {
        let app = parse_app(app)?;
        let rng = borrow_mut(rng, "rng")?;
        let s = app::monte_carlo(app, &mut rng.0, n)?;
        write_out(out, Box::into_raw(Box::new(McpSamples(s))))
    })
}

unsafe fn parse_app(app: *const c_char) -> Result<AppId, Fail> {
    if app.is_null() {
        return Err(fail(McpStatus::NullPointer, "app is null"));
    }
    let s = CStr::from_ptr(app)
        .to_str()
        .map_err(|_| fail(McpStatus::InvalidArgument, "app is not UTF-8"))?;
    Ok(s.parse()?)
}

/// # Safety
/// `d` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_free(d: *mut McpDirac) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of atoms, or 0 for null.
///
/// # Safety
/// `d` must be null or a live mixture.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_len(d: *const McpDirac) -> usize {
    d.as_ref().map_or(0, |d| d.0.atoms().len())
}

/// # Safety
/// `d` must be a live mixture and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_mean(d: *const McpDirac, out: *mut f64) -> McpStatus {
    guard(|| {
        let d = borrow(d, "d")?;
        write_out(out, d.0.mean())
    })
}

/// Copies the atoms into two caller arrays of capacity `cap`.
///
/// # Safety
/// `positions` and `masses` must each have room for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_atoms(
    d: *const McpDirac,
    positions: *mut f64,
    masses: *mut f64,
    cap: usize,
) -> McpStatus {
    guard(|| {
        let atoms = borrow(d, "d")?.0.atoms();
        if cap < atoms.len() {
            return Err(fail(
                McpStatus::BufferTooSmall,
                &format!("need room for {} atoms, got {cap}", atoms.len()),
            ));
        }
        if positions.is_null() || masses.is_null() {
            return Err(fail(McpStatus::NullPointer, "output array is null"));
        }
        for (i, a) in atoms.iter().enumerate() {
            positions.add(i).write(a.position);
            masses.add(i).write(a.mass);
        }
        Ok(())
    })
}

/// Draws `n` samples from the mixture.
///
/// # Safety
/// `d` and `rng` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_dirac_sample(
    d: *const McpDirac,
    rng: *mut McpRng,
    n: usize,
    out: *mut *mut McpSamples,
) -> McpStatus {
    guard(|| {
        let d = borrow(d, "d")?;
        let rng = borrow_mut(rng, "rng")?;
        let s = d.0.sample(&mut rng.0, n)?;
        write_out(out, Box::into_raw(Box::new(McpSamples(s))))
    })
}

/// # Safety
/// `s` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mcp_samples_len(s: *const McpSamples) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Pointer to the sample values, valid until `s` is freed.
///
/// # Safety
/// `s` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mcp_samples_data(s: *const McpSamples) -> *const f64 {
    s.as_ref().map_or(ptr::null(), |s| s.0.values().as_ptr())
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mcp_samples_free(s: *mut McpSamples) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Wasserstein-1 distance between two empirical samples.
///
/// # Safety
/// `a` and `b` must hold `na` and `nb` readable values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn mcp_wasserstein1(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    out: *mut f64,
) -> McpStatus {
    guard(|| {
        let a = SampleSet::from_values(array(a, na, "a")?.to_vec());
        let b = SampleSet::from_values(array(b, nb, "b")?.to_vec());
        write_out(out, wasserstein1(&a, &b)?.distance)
    })
}
