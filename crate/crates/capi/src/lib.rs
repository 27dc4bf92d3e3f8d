//! C ABI over the decoding workbench. Conventions:
//!
//! * Graphs live behind opaque `LpdecGraph` handles; free with
//!   [`lpdec_graph_free`].
//! * Every fallible call returns an [`LpdecStatus`]; on failure a
//!   thread-local message is readable via [`lpdec_last_error`] until the
//!   next failing call on the same thread.
//! * Strings returned through out-pointers are NUL-terminated, owned by
//!   the caller, and must be released with [`lpdec_string_free`].
//! * Rationals cross the boundary as exact "p/q" strings; structured
//!   results cross as JSON.
//! * Panics never unwind across the boundary; they become
//!   `LPDEC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lpdec::decoder::{lp_decode, ErrorPattern};
use lpdec::forest::extract_gmax;
use lpdec::graphs::{build_regular, TannerGraph};
use lpdec::lp::{fmt_rat, rat_i};
use lpdec::witness::{find_dual_witness, remove_cycles_and_normalize, to_wdag, BudgetVector};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[allow(non_camel_case_types)]
pub enum LpdecStatus {
    LPDEC_STATUS_OK = 0,
    /// A pointer argument was NULL.
    LPDEC_STATUS_NULL_ARGUMENT = 1,
    /// A string argument was not valid UTF-8.
    LPDEC_STATUS_BAD_UTF8 = 2,
    /// The library rejected the inputs; see lpdec_last_error().
    LPDEC_STATUS_ERROR = 3,
    /// An internal invariant breached; see lpdec_last_error().
    LPDEC_STATUS_PANIC = 4,
}

use LpdecStatus::*;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).expect("NUL stripped"));
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread. Never NULL.
#[no_mangle]
pub extern "C" fn lpdec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Opaque Tanner graph handle.
pub struct LpdecGraph {
    inner: TannerGraph,
}

fn guard(f: impl FnOnce() -> LpdecStatus) -> LpdecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            LPDEC_STATUS_PANIC
        }
    }
}

/// Read a required UTF-8 string argument.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, LpdecStatus> {
    if s.is_null() {
        set_error("string argument is NULL".into());
        return Err(LPDEC_STATUS_NULL_ARGUMENT);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8".into());
        LPDEC_STATUS_BAD_UTF8
    })
}

fn write_string(out: *mut *mut c_char, text: String) -> LpdecStatus {
    let c = CString::new(text.replace('\0', " ")).expect("NUL stripped");
    unsafe { *out = c.into_raw() };
    LPDEC_STATUS_OK
}

fn write_graph(out: *mut *mut LpdecGraph, g: TannerGraph) -> LpdecStatus {
    let boxed = Box::new(LpdecGraph { inner: g });
    unsafe { *out = Box::into_raw(boxed) };
    LPDEC_STATUS_OK
}

unsafe fn graph_ref<'a>(g: *const LpdecGraph) -> Result<&'a TannerGraph, LpdecStatus> {
    if g.is_null() {
        set_error("graph handle is NULL".into());
        return Err(LPDEC_STATUS_NULL_ARGUMENT);
    }
    Ok(&(*g).inner)
}

/// Bits argument: one byte per variable, 0 = clean, nonzero = flipped.
unsafe fn read_bits(
    graph: &TannerGraph,
    bits: *const u8,
    len: usize,
) -> Result<ErrorPattern, LpdecStatus> {
    if bits.is_null() {
        set_error("bit buffer is NULL".into());
        return Err(LPDEC_STATUS_NULL_ARGUMENT);
    }
    if len != graph.n_vars {
        set_error(format!("bit buffer holds {len} entries, the code has {}", graph.n_vars));
        return Err(LPDEC_STATUS_ERROR);
    }
    let slice = std::slice::from_raw_parts(bits, len);
    Ok(ErrorPattern::new(slice.iter().map(|&b| b != 0).collect()))
}

/// Parse a graph from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn lpdec_graph_from_json(
    json: *const c_char,
    out: *mut *mut LpdecGraph,
) -> LpdecStatus {
    guard(|| {
        if out.is_null() {
            set_error("out pointer is NULL".into());
            return LPDEC_STATUS_NULL_ARGUMENT;
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match TannerGraph::from_json(text) {
            Ok(g) => write_graph(out, g),
            Err(e) => {
                set_error(e.to_string());
                LPDEC_STATUS_ERROR
            }
        }
    })
}

/// Sample a (d_v, d_c)-regular code on n variables.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpdec_graph_build_regular(
    d_v: usize,
    d_c: usize,
    n: usize,
    seed: u64,
    out: *mut *mut LpdecGraph,
) -> LpdecStatus {
    guard(|| {
        if out.is_null() {
            set_error("out pointer is NULL".into());
            return LPDEC_STATUS_NULL_ARGUMENT;
        }
        match build_regular(d_v, d_c, n, seed) {
            Ok(g) => write_graph(out, g),
            Err(e) => {
                set_error(e.to_string());
                LPDEC_STATUS_ERROR
            }
        }
    })
}

/// Serialize a graph to JSON; release the string with
/// lpdec_string_free().
///
/// # Safety
/// `graph` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpdec_graph_to_json(
    graph: *const LpdecGraph,
    out: *mut *mut c_char,
) -> LpdecStatus {
    guard(|| {
        if out.is_null() {
            set_error("out pointer is NULL".into());
            return LPDEC_STATUS_NULL_ARGUMENT;
        }
        match graph_ref(graph) {
            Ok(g) => write_string(out, g.to_json()),
            Err(s) => s,
        }
    })
}

/// Number of variable nodes, or -1 for a NULL handle.
///
/// # Safety
/// `graph` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn lpdec_graph_n_vars(graph: *const LpdecGraph) -> i64 {
    if graph.is_null() {
        return -1;
    }
    (*graph).inner.n_vars as i64
}

/// Number of check nodes, or -1 for a NULL handle.
///
/// # Safety
/// `graph` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn lpdec_graph_n_checks(graph: *const LpdecGraph) -> i64 {
    if graph.is_null() {
        return -1;
    }
    (*graph).inner.n_checks as i64
}

/// Release a graph handle. NULL is a no-op.
///
/// # Safety
/// `graph` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lpdec_graph_free(graph: *mut LpdecGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Decode one error pattern. On success, `*success_out` reports whether
/// the all-zero codeword is the unique optimum and `*value_out` holds
/// the optimal cost as "p/q".
///
/// # Safety
/// Pointer arguments must be valid; `bits` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lpdec_decode(
    graph: *const LpdecGraph,
    bits: *const u8,
    len: usize,
    success_out: *mut bool,
    value_out: *mut *mut c_char,
) -> LpdecStatus {
    guard(|| {
        if success_out.is_null() || value_out.is_null() {
            set_error("out pointer is NULL".into());
            return LPDEC_STATUS_NULL_ARGUMENT;
        }
        let g = match graph_ref(graph) {
            Ok(g) => g,
            Err(s) => return s,
        };
        let pattern = match read_bits(g, bits, len) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match lp_decode(g, &pattern.llr()) {
            Ok(result) => {
                *success_out = result.success;
                write_string(value_out, fmt_rat(&result.optimal_value))
            }
            Err(e) => {
                set_error(e.to_string());
                LPDEC_STATUS_ERROR
            }
        }
    })
}

/// Decode and cross-check against the certificate search. `*json_out`
/// receives {"success": bool, "margin": "p/q", "alpha_max": "p/q"} where
/// margin is the best uniform certificate slack and alpha_max the
/// largest weight in the flow view of the certificate (0 when none
/// exists).
///
/// # Safety
/// Pointer arguments must be valid; `bits` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lpdec_analyze(
    graph: *const LpdecGraph,
    bits: *const u8,
    len: usize,
    json_out: *mut *mut c_char,
) -> LpdecStatus {
    guard(|| {
        if json_out.is_null() {
            set_error("out pointer is NULL".into());
            return LPDEC_STATUS_NULL_ARGUMENT;
        }
        let g = match graph_ref(graph) {
            Ok(g) => g,
            Err(s) => return s,
        };
        let pattern = match read_bits(g, bits, len) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let llr = pattern.llr();
        let run = || -> lpdec::Result<String> {
            let decoded = lp_decode(g, &llr)?;
            let found = find_dual_witness(g, &BudgetVector::from_llr(&llr), None)?;
            let has_witness = found.margin > rat_i(0);
            if decoded.success != has_witness {
                return Err(lpdec::Error::Experiment(format!(
                    "decoder and certificate search disagree: success = {}, margin = {}",
                    decoded.success,
                    fmt_rat(&found.margin)
                )));
            }
            let alpha = match &found.weighting {
                Some(w) => {
                    let flow = remove_cycles_and_normalize(&to_wdag(g, w, &llr.gamma)?)?;
                    extract_gmax(&flow)?.alpha_max
                }
                None => rat_i(0),
            };
            Ok(format!(
                "{{\"success\": {}, \"margin\": \"{}\", \"alpha_max\": \"{}\"}}",
                decoded.success,
                fmt_rat(&found.margin),
                fmt_rat(&alpha)
            ))
        };
        match run() {
            Ok(text) => write_string(json_out, text),
            Err(e) => {
                set_error(e.to_string());
                LPDEC_STATUS_ERROR
            }
        }
    })
}

/// Release a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lpdec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
