//! C interface. Every call returns a [`ZsfStatus`]; on failure the message is
//! kept per thread and read with [`zsf_last_error`]. Searches and tables are
//! opaque handles owned by the caller and released with their `_free`
//! function. No call unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use zsfree::oracle::{self, OracleOptions};
use zsfree::report::{self, TableRow};
use zsfree::search::{enumerate, SearchConfig};
use zsfree::{AlmostExample, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZsfStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Capacity = 3,
    Overflow = 4,
    InstantiationFailed = 5,
    Audit = 6,
    Checkpoint = 7,
    Interrupted = 8,
    Io = 9,
    BufferTooSmall = 10,
    OutOfRange = 11,
    Panic = 12,
}

/// Value reported for an infinite `f_n(k)` and for defaults.
pub const ZSF_NONE: usize = usize::MAX;

/// Search option bits.
pub const ZSF_NO_SYMMETRY: u32 = 1;
pub const ZSF_NO_ANTICLIQUE: u32 = 2;
pub const ZSF_NO_MEMO: u32 = 4;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> ZsfStatus {
    match e {
        Error::InvalidArgument(_) => ZsfStatus::InvalidArgument,
        Error::Capacity { .. } => ZsfStatus::Capacity,
        Error::Overflow => ZsfStatus::Overflow,
        Error::InstantiationFailed(_) => ZsfStatus::InstantiationFailed,
        Error::Audit(_) => ZsfStatus::Audit,
        Error::Checkpoint(_) => ZsfStatus::Checkpoint,
        Error::Interrupted { .. } => ZsfStatus::Interrupted,
        Error::Io(_) | Error::Json(_) => ZsfStatus::Io,
    }
}

fn fail(status: ZsfStatus, msg: impl Into<String>) -> ZsfStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<ZsfStatus, Error>) -> ZsfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => fail(status_of(&e), e.to_string()),
        Err(_) => fail(ZsfStatus::Panic, "internal panic"),
    }
}

unsafe fn input<'a, T>(p: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        // SAFETY: the caller promises `len` readable elements at `p`.
        Some(unsafe { slice::from_raw_parts(p, len) })
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zsf_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            // SAFETY: `buf` holds `len > n` bytes.
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
        }
        msg.len() + 1
    })
}

/// Number of distinct nonempty subset sums of `elements` in `Z_n` and
/// whether none of them is zero.
///
/// # Safety
/// `elements` must point to `len` values; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn zsf_sumset_size(
    n: u64,
    elements: *const u64,
    len: usize,
    count_out: *mut usize,
    zero_sum_free_out: *mut bool,
) -> ZsfStatus {
    guard(|| {
        let Some(el) = (unsafe { input(elements, len) }) else {
            return Ok(fail(ZsfStatus::NullPointer, "elements is null"));
        };
        if count_out.is_null() || zero_sum_free_out.is_null() {
            return Ok(fail(ZsfStatus::NullPointer, "output pointer is null"));
        }
        if n == 0 {
            return Ok(fail(ZsfStatus::InvalidArgument, "modulus must be positive"));
        }
        let info = oracle::sumset_size(n, el);
        // SAFETY: checked non-null above.
        unsafe {
            *count_out = info.count;
            *zero_sum_free_out = info.zero_sum_free;
        }
        Ok(ZsfStatus::Ok)
    })
}

/// Whether `elements` are distinct nonzero residues mod `n`, zero-sum free,
/// with exactly `ell` nonempty sums.
///
/// # Safety
/// `elements` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn zsf_verify_example(n: u64, elements: *const u64, len: usize, ell: usize) -> bool {
    catch_unwind(|| match unsafe { input(elements, len) } {
        Some(el) => oracle::verify_example(n, el, ell),
        None => false,
    })
    .unwrap_or(false)
}

/// `f_n(k)` by enumeration. `*value_out` is [`ZSF_NONE`] when no
/// zero-sum-free `k`-set exists; otherwise the minimizing set is written to
/// `witness_out` (room for `k` values) unless it is null.
///
/// # Safety
/// `value_out` must be valid; `witness_out` null or valid for `k` writes.
#[no_mangle]
pub unsafe extern "C" fn zsf_brute_force_f(
    n: u64,
    k: usize,
    orbit_reduction: bool,
    value_out: *mut usize,
    witness_out: *mut u64,
) -> ZsfStatus {
    guard(|| {
        if value_out.is_null() {
            return Ok(fail(ZsfStatus::NullPointer, "value_out is null"));
        }
        let f = oracle::brute_force_f(n, k, OracleOptions { orbit_reduction })?;
        // SAFETY: checked non-null; the caller sized `witness_out` for `k`.
        unsafe {
            *value_out = f.value.unwrap_or(ZSF_NONE);
            if let (Some(w), false) = (&f.witness, witness_out.is_null()) {
                ptr::copy_nonoverlapping(w.elements.as_ptr(), witness_out, k);
            }
        }
        Ok(ZsfStatus::Ok)
    })
}

/// Almost-examples of one search, one per relabeling orbit.
pub struct ZsfSearch {
    k: usize,
    examples: Vec<AlmostExample>,
}

/// Runs a search. `ell_max` of [`ZSF_NONE`] selects `k(k+1)/2 - 1`;
/// `flags` combines `ZSF_NO_*` bits.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zsf_search_run(
    k: usize,
    ell_max: usize,
    flags: u32,
    workers: usize,
    out: *mut *mut ZsfSearch,
) -> ZsfStatus {
    guard(|| {
        if out.is_null() {
            return Ok(fail(ZsfStatus::NullPointer, "out is null"));
        }
        let mut cfg = SearchConfig::new(k).with_workers(workers).with_toggles(
            flags & ZSF_NO_SYMMETRY == 0,
            flags & ZSF_NO_ANTICLIQUE == 0,
            flags & ZSF_NO_MEMO == 0,
        );
        if ell_max != ZSF_NONE {
            cfg = cfg.with_ell_max(ell_max);
        }
        let outcome = enumerate(&cfg)?;
        let handle = Box::new(ZsfSearch { k, examples: outcome.examples });
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(handle) };
        Ok(ZsfStatus::Ok)
    })
}

/// Number of almost-examples, 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zsf_search_count(s: *const ZsfSearch) -> usize {
    // SAFETY: the caller passes null or a live handle.
    unsafe { s.as_ref() }.map_or(0, |s| s.examples.len())
}

/// Class count of almost-example `i`.
///
/// # Safety
/// `s` must be a live handle and `ell_out` valid.
#[no_mangle]
pub unsafe extern "C" fn zsf_search_ell(s: *const ZsfSearch, i: usize, ell_out: *mut usize) -> ZsfStatus {
    // SAFETY: the caller passes null or a live handle.
    let Some(s) = (unsafe { s.as_ref() }) else {
        return fail(ZsfStatus::NullPointer, "search handle is null");
    };
    if ell_out.is_null() {
        return fail(ZsfStatus::NullPointer, "ell_out is null");
    }
    match s.examples.get(i) {
        // SAFETY: checked non-null.
        Some(ae) => unsafe {
            *ell_out = ae.ell();
            ZsfStatus::Ok
        },
        None => fail(ZsfStatus::OutOfRange, format!("index {i} out of {}", s.examples.len())),
    }
}

/// Class labels of almost-example `i`, one per nonempty subset in mask
/// order; `buf` needs `2^k - 1` bytes.
///
/// # Safety
/// `s` must be a live handle; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn zsf_search_labels(s: *const ZsfSearch, i: usize, buf: *mut u8, len: usize) -> ZsfStatus {
    // SAFETY: the caller passes null or a live handle.
    let Some(s) = (unsafe { s.as_ref() }) else {
        return fail(ZsfStatus::NullPointer, "search handle is null");
    };
    let Some(ae) = s.examples.get(i) else {
        return fail(ZsfStatus::OutOfRange, format!("index {i} out of {}", s.examples.len()));
    };
    let need = (1usize << s.k) - 1;
    if buf.is_null() {
        return fail(ZsfStatus::NullPointer, "buf is null");
    }
    if len < need {
        return fail(ZsfStatus::BufferTooSmall, format!("labels need {need} bytes"));
    }
    // SAFETY: `buf` holds at least `need` bytes.
    unsafe { ptr::copy_nonoverlapping(ae.labels().as_ptr(), buf, need) };
    ZsfStatus::Ok
}

/// Releases a search handle; null is ignored.
///
/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zsf_search_free(s: *mut ZsfSearch) {
    if !s.is_null() {
        // SAFETY: created by `Box::into_raw` in `zsf_search_run`.
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Rows of the table for one `k`.
pub struct ZsfTable {
    rows: Vec<TableRow>,
}

/// One table row without its example elements.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct ZsfTableRow {
    pub k: usize,
    /// The row applies when `divisor | n`.
    pub divisor: u64,
    pub n_min_observed: u64,
    pub value: usize,
    pub example_n: u64,
    /// Number of example elements, always `k`.
    pub example_len: usize,
    pub minimal: bool,
}

/// Searches, solves and builds the table for `k`, sweeping moduli up to
/// `sweep_limit`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zsf_table_build(
    k: usize,
    sweep_limit: u64,
    workers: usize,
    out: *mut *mut ZsfTable,
) -> ZsfStatus {
    guard(|| {
        if out.is_null() {
            return Ok(fail(ZsfStatus::NullPointer, "out is null"));
        }
        let outcome = enumerate(&SearchConfig::new(k).with_workers(workers))?;
        let analysis = report::analyze(k, &outcome.examples)?;
        let rows = report::build_table(k, &analysis.families, sweep_limit)?;
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(ZsfTable { rows })) };
        Ok(ZsfStatus::Ok)
    })
}

/// Number of rows, 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zsf_table_len(t: *const ZsfTable) -> usize {
    // SAFETY: the caller passes null or a live handle.
    unsafe { t.as_ref() }.map_or(0, |t| t.rows.len())
}

/// Row `i`; its example elements go to `elements` (room for `k` values)
/// unless it is null.
///
/// # Safety
/// `t` must be a live handle, `row_out` valid, `elements` null or valid for
/// `elements_len` writes.
#[no_mangle]
pub unsafe extern "C" fn zsf_table_row(
    t: *const ZsfTable,
    i: usize,
    row_out: *mut ZsfTableRow,
    elements: *mut u64,
    elements_len: usize,
) -> ZsfStatus {
    // SAFETY: the caller passes null or a live handle.
    let Some(t) = (unsafe { t.as_ref() }) else {
        return fail(ZsfStatus::NullPointer, "table handle is null");
    };
    if row_out.is_null() {
        return fail(ZsfStatus::NullPointer, "row_out is null");
    }
    let Some(r) = t.rows.get(i) else {
        return fail(ZsfStatus::OutOfRange, format!("row {i} out of {}", t.rows.len()));
    };
    if !elements.is_null() {
        if elements_len < r.example_elements.len() {
            return fail(ZsfStatus::BufferTooSmall, format!("example needs {} values", r.example_elements.len()));
        }
        // SAFETY: `elements` holds at least `example_elements.len()` values.
        unsafe { ptr::copy_nonoverlapping(r.example_elements.as_ptr(), elements, r.example_elements.len()) };
    }
    let row = ZsfTableRow {
        k: r.k,
        divisor: r.divisor,
        n_min_observed: r.n_min_observed,
        value: r.value,
        example_n: r.example_n,
        example_len: r.example_elements.len(),
        minimal: r.minimal,
    };
    // SAFETY: checked non-null.
    unsafe { *row_out = row };
    ZsfStatus::Ok
}

/// Releases a table handle; null is ignored.
///
/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zsf_table_free(t: *mut ZsfTable) {
    if !t.is_null() {
        // SAFETY: created by `Box::into_raw` in `zsf_table_build`.
        drop(unsafe { Box::from_raw(t) });
    }
}
