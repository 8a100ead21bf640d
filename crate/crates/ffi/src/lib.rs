//! C interface to `freelip`. Objects cross the boundary as opaque handles,
//! strings as NUL-terminated UTF-8, and every call returns a status code.
//! Strings handed out by the library are released with `freelip_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use freelip::cycles::{edge_vector_from_json, fundamental_cycle_basis, quotient_norm};
use freelip::error::Error;
use freelip::graph::{family_counts, FamilyKind, FamilySpec, TwoPoleGraph};
use freelip::haar::haar_witness_bound;
use freelip::lfnorm::ae_norm;
use freelip::metric::{MetricSpace, Molecule};
use freelip::numeric::{fmt_q, to_f64, Q};

pub const FREELIP_OK: i32 = 0;
pub const FREELIP_ERR_INVALID: i32 = 2;
pub const FREELIP_ERR_SOLVER: i32 = 3;
pub const FREELIP_ERR_RESOURCE: i32 = 4;
pub const FREELIP_ERR_NULL: i32 = 5;
pub const FREELIP_ERR_UTF8: i32 = 6;
pub const FREELIP_ERR_PANIC: i32 = 7;

pub const FREELIP_FAMILY_DIAMOND: u32 = 0;
pub const FREELIP_FAMILY_MULTIDIAMOND: u32 = 1;
pub const FREELIP_FAMILY_LAAKSO: u32 = 2;

/// Finite metric space.
pub struct FreelipSpace(MetricSpace);

/// Two-pole graph.
pub struct FreelipGraph(TwoPoleGraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Lib(Error),
    Null,
    Utf8,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, records any failure for `freelip_last_error` and maps it to a code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FREELIP_OK,
        Ok(Err(Fail::Lib(e))) => {
            let code = e.exit_code();
            set_error(e.to_string());
            code
        }
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            FREELIP_ERR_NULL
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("argument is not valid UTF-8".into());
            FREELIP_ERR_UTF8
        }
        Err(_) => {
            set_error("internal panic".into());
            FREELIP_ERR_PANIC
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null);
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8)
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    out.write(v);
    Ok(())
}

fn owned(s: String) -> *mut c_char {
    CString::new(s).expect("library strings have no NUL").into_raw()
}

unsafe fn put_rational(value: *mut f64, exact: *mut *mut c_char, x: &Q) -> Result<(), Fail> {
    put(value, to_f64(x))?;
    if !exact.is_null() {
        exact.write(owned(fmt_q(x)));
    }
    Ok(())
}

/// Message for the most recent failure on this thread, or NULL. Free it
/// with `freelip_string_free`.
#[no_mangle]
pub extern "C" fn freelip_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn freelip_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn freelip_space_from_json(json: *const c_char, out: *mut *mut FreelipSpace) -> i32 {
    guard(|| {
        let s = MetricSpace::from_json(text(json)?)?;
        put(out, Box::into_raw(Box::new(FreelipSpace(s))))
    })
}

/// # Safety
/// `s` must be NULL or a handle from `freelip_space_from_json`, freed only once.
#[no_mangle]
pub unsafe extern "C" fn freelip_space_free(s: *mut FreelipSpace) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of points, or 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn freelip_space_len(s: *const FreelipSpace) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Transportation norm of the molecule `{"point": coeff, …}`. `exact`, if
/// not NULL, receives the rational value as text.
///
/// # Safety
/// Pointers must be valid; `molecule_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn freelip_ae_norm(
    s: *const FreelipSpace,
    molecule_json: *const c_char,
    value: *mut f64,
    exact: *mut *mut c_char,
) -> i32 {
    guard(|| {
        let s = &s.as_ref().ok_or(Fail::Null)?.0;
        let m = Molecule::from_json(s, text(molecule_json)?)?;
        let (v, _) = ae_norm(s, &m)?;
        put_rational(value, exact, &v)
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn freelip_graph_from_json(json: *const c_char, out: *mut *mut FreelipGraph) -> i32 {
    guard(|| {
        let g = TwoPoleGraph::from_json(text(json)?)?;
        put(out, Box::into_raw(Box::new(FreelipGraph(g))))
    })
}

fn spec(family: u32, level: usize, branch: usize) -> Result<FamilySpec, Fail> {
    let kind = match family {
        FREELIP_FAMILY_DIAMOND => FamilyKind::Diamond,
        FREELIP_FAMILY_MULTIDIAMOND => FamilyKind::Multidiamond(branch),
        FREELIP_FAMILY_LAAKSO => FamilyKind::Laakso,
        f => return Err(Error::Invalid(format!("unknown family {f}")).into()),
    };
    Ok(FamilySpec { kind, level })
}

/// Builds level `level` of a family; `branch` is used by the multibranching family.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn freelip_graph_generate(family: u32, level: usize, branch: usize, out: *mut *mut FreelipGraph) -> i32 {
    guard(|| {
        let g = spec(family, level, branch)?.build()?;
        put(out, Box::into_raw(Box::new(FreelipGraph(g))))
    })
}

/// Closed-form edge, vertex and cycle-space counts without building the graph.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn freelip_family_counts(
    family: u32,
    level: usize,
    branch: usize,
    edges: *mut u64,
    vertices: *mut u64,
    cycle_dim: *mut u64,
) -> i32 {
    guard(|| {
        let c = family_counts(&spec(family, level, branch)?)?;
        let narrow = |x: u128| u64::try_from(x).map_err(|_| Fail::Lib(Error::ResourceLimit("count exceeds 64 bits".into())));
        put(edges, narrow(c.edges)?)?;
        put(vertices, narrow(c.vertices)?)?;
        put(cycle_dim, narrow(c.cycle_dim)?)
    })
}

/// # Safety
/// `g` must be NULL or a graph handle, freed only once.
#[no_mangle]
pub unsafe extern "C" fn freelip_graph_free(g: *mut FreelipGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn freelip_graph_edge_count(g: *const FreelipGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn freelip_graph_vertex_count(g: *const FreelipGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.vertex_count())
}

/// Graph as JSON text.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn freelip_graph_to_json(g: *const FreelipGraph, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let g = &g.as_ref().ok_or(Fail::Null)?.0;
        put(out, owned(g.to_json().to_string()))
    })
}

/// Norm of the edge vector `{"edge-id": coeff, …}` modulo the cycle space.
///
/// # Safety
/// Pointers must be valid; `vector_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn freelip_quotient_norm(
    g: *const FreelipGraph,
    vector_json: *const c_char,
    value: *mut f64,
    exact: *mut *mut c_char,
) -> i32 {
    guard(|| {
        let g = &g.as_ref().ok_or(Fail::Null)?.0;
        let x = edge_vector_from_json(g, text(vector_json)?)?;
        let v = quotient_norm(g, &x, &fundamental_cycle_basis(g).vectors)?;
        put_rational(value, exact, &v)
    })
}

/// `‖Qf‖₁` for the Haar witness on `D_n`.
///
/// # Safety
/// `value` must be valid; `exact` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn freelip_haar_witness(n: usize, value: *mut f64, exact: *mut *mut c_char) -> i32 {
    guard(|| {
        let (_, w) = haar_witness_bound(n)?;
        put_rational(value, exact, &w.qf_norm)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_witness_through_the_abi() {
        let mut v = 0.0;
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { freelip_haar_witness(2, &mut v, &mut s) }, FREELIP_OK);
        assert_eq!(unsafe { CStr::from_ptr(s) }.to_str().unwrap(), "7/4");
        unsafe { freelip_string_free(s) };
        assert_eq!(unsafe { freelip_haar_witness(0, &mut v, ptr::null_mut()) }, FREELIP_ERR_INVALID);
        let msg = freelip_last_error();
        assert!(!msg.is_null());
        unsafe { freelip_string_free(msg) };
    }
}
