//! C ABI for the batch RL workbench.
//!
//! Phases run from a JSON experiment config (`brl_run_json`); datasets
//! open as opaque handles for transition reads. Every function returns a
//! `BRL_*` status code; `brl_last_error` describes the most recent
//! failure on the calling thread.
//!
//! The public header lives at `include/brl.h` and is kept in sync by a
//! test in this crate.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use brl::dataset::{dataset_read, Dataset};
use brl::error::Error;
use brl::harness::{run, ExperimentConfig};

pub const BRL_OK: i32 = 0;
pub const BRL_ERR_IO: i32 = 1;
pub const BRL_ERR_USAGE: i32 = 2;
pub const BRL_ERR_CONFIG: i32 = 3;
pub const BRL_ERR_INPUT_SHAPE: i32 = 4;
pub const BRL_ERR_PHASE: i32 = 5;
pub const BRL_ERR_FORMAT: i32 = 6;
pub const BRL_ERR_CORRUPTION: i32 = 7;
pub const BRL_ERR_DIVERGENCE: i32 = 8;
pub const BRL_ERR_PARSE: i32 = 9;
pub const BRL_ERR_JSON: i32 = 10;
pub const BRL_ERR_NULL: i32 = 100;
pub const BRL_ERR_UTF8: i32 = 101;
pub const BRL_ERR_PANIC: i32 = 102;
pub const BRL_ERR_RANGE: i32 = 103;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => BRL_ERR_IO,
        Error::Usage(_) => BRL_ERR_USAGE,
        Error::Config(_) => BRL_ERR_CONFIG,
        Error::InputShape(_) => BRL_ERR_INPUT_SHAPE,
        Error::Phase(_) => BRL_ERR_PHASE,
        Error::Format(_) => BRL_ERR_FORMAT,
        Error::Corruption(_) => BRL_ERR_CORRUPTION,
        Error::Divergence { .. } => BRL_ERR_DIVERGENCE,
        Error::Parse { .. } => BRL_ERR_PARSE,
        Error::Json(_) => BRL_ERR_JSON,
    }
}

fn fail(e: &Error) -> i32 {
    set_error(&e.to_string());
    error_code(e)
}

/// Message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn brl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Static library version string.
#[no_mangle]
pub extern "C" fn brl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn cstr_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, i32> {
    if ptr.is_null() {
        set_error(&format!("{name} is NULL"));
        return Err(BRL_ERR_NULL);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{name} is not valid UTF-8"));
        BRL_ERR_UTF8
    })
}

/// Runs one experiment phase described by a JSON config document
/// (same schema as the CLI's --config file, including "phase").
///
/// # Safety
/// `config_json` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn brl_run_json(config_json: *const c_char) -> i32 {
    let json = match cstr_arg(config_json, "config_json") {
        Ok(s) => s,
        Err(code) => return code,
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<(), Error> {
        let config: ExperimentConfig = serde_json::from_str(json)?;
        run(&config)
    }));
    match outcome {
        Ok(Ok(())) => BRL_OK,
        Ok(Err(e)) => fail(&e),
        Err(_) => {
            set_error("panic inside brl_run_json");
            BRL_ERR_PANIC
        }
    }
}

/// Opaque dataset handle.
pub struct BrlDataset {
    inner: Dataset,
}

/// Opens a "BRL1" dataset file. On success writes a handle to `out`;
/// release it with `brl_dataset_close`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid
/// pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn brl_dataset_open(path: *const c_char, out: *mut *mut BrlDataset) -> i32 {
    if out.is_null() {
        set_error("out is NULL");
        return BRL_ERR_NULL;
    }
    let path = match cstr_arg(path, "path") {
        Ok(s) => s,
        Err(code) => return code,
    };
    match catch_unwind(|| dataset_read(Path::new(path))) {
        Ok(Ok(ds)) => {
            *out = Box::into_raw(Box::new(BrlDataset { inner: ds }));
            BRL_OK
        }
        Ok(Err(e)) => {
            *out = ptr::null_mut();
            fail(&e)
        }
        Err(_) => {
            *out = ptr::null_mut();
            set_error("panic inside brl_dataset_open");
            BRL_ERR_PANIC
        }
    }
}

/// Frees a dataset handle. NULL is a no-op.
///
/// # Safety
/// `ds` must be a handle returned by `brl_dataset_open`, not yet closed.
#[no_mangle]
pub unsafe extern "C" fn brl_dataset_close(ds: *mut BrlDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Number of transitions. NULL handles report 0.
///
/// # Safety
/// `ds` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn brl_dataset_len(ds: *const BrlDataset) -> u64 {
    if ds.is_null() {
        return 0;
    }
    (*ds).inner.len() as u64
}

/// Observation dimensionality. NULL handles report 0.
///
/// # Safety
/// `ds` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn brl_dataset_obs_dim(ds: *const BrlDataset) -> u32 {
    if ds.is_null() {
        return 0;
    }
    (*ds).inner.meta().obs_dim as u32
}

/// Action dimensionality. NULL handles report 0.
///
/// # Safety
/// `ds` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn brl_dataset_act_dim(ds: *const BrlDataset) -> u32 {
    if ds.is_null() {
        return 0;
    }
    (*ds).inner.meta().act_dim as u32
}

/// Copies transition `idx` into caller buffers: `obs` and `next_obs`
/// receive obs_dim doubles each, `action` act_dim doubles, and `flags`
/// one byte (bit0 = done, bit1 = timeout). Any output pointer may be
/// NULL to skip that field.
///
/// # Safety
/// Non-NULL buffers must be large enough for the advertised dimensions.
#[no_mangle]
pub unsafe extern "C" fn brl_dataset_transition(
    ds: *const BrlDataset,
    idx: u64,
    obs: *mut f64,
    action: *mut f64,
    next_obs: *mut f64,
    flags: *mut u8,
) -> i32 {
    if ds.is_null() {
        set_error("ds is NULL");
        return BRL_ERR_NULL;
    }
    let dataset = &(*ds).inner;
    if idx >= dataset.len() as u64 {
        set_error(&format!(
            "index {idx} out of range ({} transitions)",
            dataset.len()
        ));
        return BRL_ERR_RANGE;
    }
    let t = dataset.get(idx as usize);
    if !obs.is_null() {
        ptr::copy_nonoverlapping(t.obs.as_ptr(), obs, t.obs.len());
    }
    if !action.is_null() {
        ptr::copy_nonoverlapping(t.action.as_ptr(), action, t.action.len());
    }
    if !next_obs.is_null() {
        ptr::copy_nonoverlapping(t.next_obs.as_ptr(), next_obs, t.next_obs.len());
    }
    if !flags.is_null() {
        *flags = (t.done as u8) | ((t.timeout as u8) << 1);
    }
    BRL_OK
}
