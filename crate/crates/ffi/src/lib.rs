//! C ABI for the `pgst` library.
//!
//! States and verdicts are opaque heap objects owned by the caller and
//! released with their `_free` function. Every fallible call returns a
//! [`PgstStatus`]; on failure a description is available from
//! [`pgst_last_error_message`] on the same thread. Panics never cross the
//! boundary and are reported as `PGST_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pgst::cli::AUTO_CROSS_CHECK_MAX_N;
use pgst::decider::{decide_auto, decide_pgst_general, decide_pgst_parity_r, decide_pgst_parity_s};
use pgst::dynamics::{find_transfer_time, transfer_fidelity, SearchOptions};
use pgst::report::{parse_verdict_document, CrossCheck, VerdictJson};
use pgst::state::eigenvalue_support;
use pgst::statespec::StateSpec;
use pgst::{Error, PureState};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgstStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    /// The inputs do not meet the method's hypotheses.
    Refused = 4,
    InvalidArgument = 5,
    Internal = 6,
    BufferTooSmall = 7,
}

/// Decision procedure selector for [`pgst_decide`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgstMethod {
    Auto = 0,
    General = 1,
    SSets = 2,
    RSets = 3,
}

/// Outcome of [`pgst_find_transfer_time`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PgstTimeResult {
    pub tau: f64,
    pub delta: f64,
    pub achieved_overlap: f64,
    pub overlap_lower_bound: f64,
    pub budget_used: u64,
    pub complete: bool,
}

/// A parsed state on a path.
pub struct PgstState {
    state: PureState,
    spec: String,
}

/// A decision with its certificate.
pub struct PgstVerdict {
    json: VerdictJson,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let clean = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

struct Failure(PgstStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } => PgstStatus::ParseError,
            Error::Refused { .. } => PgstStatus::Refused,
            Error::Inconsistent(_) => PgstStatus::Internal,
            Error::IndexOutOfRange { .. }
            | Error::InvalidState(_)
            | Error::InvalidArgument(_)
            | Error::FieldMismatch { .. }
            | Error::ModulusMismatch { .. }
            | Error::LengthMismatch { .. } => PgstStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(PgstStatus::NullPointer, format!("{name} is null"))
}

/// Run `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PgstStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            PgstStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal error: {message}"));
            PgstStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(text: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if text.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|e| Failure(PgstStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn state_ref<'a>(state: *const PgstState) -> Result<&'a PgstState, Failure> {
    state.as_ref().ok_or_else(|| null("state"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pgst_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `capacity - 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn pgst_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && capacity > 0 {
            let count = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, count);
            *buf.add(count) = 0;
        }
        bytes.len()
    })
}

/// Parse a state literal such as `"1:1,3:1"` for the path on `n` vertices.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pgst_state_parse(
    text: *const c_char,
    n: usize,
    out: *mut *mut PgstState,
) -> PgstStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(text, "text")?;
        let spec = StateSpec::parse(text, n)?;
        let state = spec.to_state()?;
        *out = Box::into_raw(Box::new(PgstState {
            state,
            spec: spec.render(),
        }));
        Ok(())
    })
}

/// Release a state. Null is ignored.
///
/// # Safety
/// `state` must be null or come from [`pgst_state_parse`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pgst_state_free(state: *mut PgstState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of vertices of the state's path.
///
/// # Safety
/// `state` must be a live state and `n` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pgst_state_n(state: *const PgstState, n: *mut usize) -> PgstStatus {
    guard(|| {
        let s = state_ref(state)?;
        let n = n.as_mut().ok_or_else(|| null("n"))?;
        *n = s.state.n();
        Ok(())
    })
}

/// Eigenvalue support indices in increasing order.
///
/// `*len` always receives the support size. When it exceeds `capacity` the
/// call returns `PGST_STATUS_BUFFER_TOO_SMALL` and writes nothing to `buf`.
///
/// # Safety
/// `state` must be a live state, `len` valid for writing, and `buf` valid for
/// `capacity` elements (it may be null when `capacity` is 0).
#[no_mangle]
pub unsafe extern "C" fn pgst_support(
    state: *const PgstState,
    buf: *mut usize,
    capacity: usize,
    len: *mut usize,
) -> PgstStatus {
    guard(|| {
        let s = state_ref(state)?;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        let support = eigenvalue_support(&s.state)?;
        *len = support.len();
        if support.len() > capacity {
            return Err(Failure(
                PgstStatus::BufferTooSmall,
                format!("support has {} entries, buffer holds {capacity}", support.len()),
            ));
        }
        if !support.is_empty() && buf.is_null() {
            return Err(null("buf"));
        }
        for (i, j) in support.indices.iter().enumerate() {
            *buf.add(i) = *j;
        }
        Ok(())
    })
}

/// Decide PGST between the state and its mirror image.
///
/// # Safety
/// `state` must be a live state and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pgst_decide(
    state: *const PgstState,
    method: PgstMethod,
    out: *mut *mut PgstVerdict,
) -> PgstStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let s = state_ref(state)?;
        let spec = s.spec.clone();
        let json = match method {
            PgstMethod::General => VerdictJson::new(&decide_pgst_general(&s.state)?, spec),
            PgstMethod::SSets => VerdictJson::new(&decide_pgst_parity_s(&s.state)?, spec),
            PgstMethod::RSets => VerdictJson::new(&decide_pgst_parity_r(&s.state)?, spec),
            PgstMethod::Auto => {
                let auto = decide_auto(&s.state, AUTO_CROSS_CHECK_MAX_N)?;
                let cross_check = auto.general.map(|g| CrossCheck {
                    method: g.method,
                    answer: g.answer,
                    agree: g.answer == auto.verdict.answer,
                });
                VerdictJson::new(&auto.verdict, spec).auto(cross_check)
            }
        };
        *out = Box::into_raw(Box::new(PgstVerdict { json }));
        Ok(())
    })
}

/// Release a verdict. Null is ignored.
///
/// # Safety
/// `verdict` must be null or come from [`pgst_decide`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pgst_verdict_free(verdict: *mut PgstVerdict) {
    if !verdict.is_null() {
        drop(Box::from_raw(verdict));
    }
}

/// Whether the verdict is positive.
///
/// # Safety
/// `verdict` must be a live verdict and `is_yes` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pgst_verdict_answer(verdict: *const PgstVerdict, is_yes: *mut bool) -> PgstStatus {
    guard(|| {
        let v = verdict.as_ref().ok_or_else(|| null("verdict"))?;
        let is_yes = is_yes.as_mut().ok_or_else(|| null("is_yes"))?;
        *is_yes = v.json.answer.is_yes();
        Ok(())
    })
}

/// Serialize the verdict as JSON. Free the string with [`pgst_string_free`].
///
/// # Safety
/// `verdict` must be a live verdict and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pgst_verdict_to_json(
    verdict: *const PgstVerdict,
    out: *mut *mut c_char,
) -> PgstStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let v = verdict.as_ref().ok_or_else(|| null("verdict"))?;
        let text =
            serde_json::to_string(&v.json).map_err(|e| Failure(PgstStatus::Internal, e.to_string()))?;
        *out = CString::new(text)
            .map_err(|e| Failure(PgstStatus::Internal, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// Re-verify the certificate in a JSON verdict (or a CLI `decide` report).
/// Returns `PGST_STATUS_OK` if it checks out and `PGST_STATUS_REFUSED` if not.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pgst_verdict_check_json(json: *const c_char) -> PgstStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let doc = parse_verdict_document(text).map_err(|e| Failure(PgstStatus::ParseError, e))?;
        doc.check().map_err(|e| Failure(PgstStatus::Refused, e))
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pgst_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `|<mirror|U(t)|v>|` and its square for the normalized state.
///
/// # Safety
/// `state` must be a live state; `overlap` and `fidelity` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pgst_transfer_fidelity(
    state: *const PgstState,
    t: f64,
    overlap: *mut f64,
    fidelity: *mut f64,
) -> PgstStatus {
    guard(|| {
        let s = state_ref(state)?;
        let overlap = overlap.as_mut().ok_or_else(|| null("overlap"))?;
        let fidelity = fidelity.as_mut().ok_or_else(|| null("fidelity"))?;
        if !t.is_finite() {
            return Err(Failure(PgstStatus::InvalidArgument, "t must be finite".into()));
        }
        let (o, f) = transfer_fidelity(&s.state, &s.state.mirror(), t)?;
        *overlap = o;
        *fidelity = f;
        Ok(())
    })
}

/// Search for a time with overlap at least `1 - epsilon`. A `budget` of 0
/// selects the default.
///
/// # Safety
/// `state` must be a live state and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pgst_find_transfer_time(
    state: *const PgstState,
    epsilon: f64,
    budget: u64,
    out: *mut PgstTimeResult,
) -> PgstStatus {
    guard(|| {
        let s = state_ref(state)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let mut options = SearchOptions::default();
        if budget > 0 {
            options.budget = budget;
        }
        let r = find_transfer_time(&s.state, epsilon, options)?;
        *out = PgstTimeResult {
            tau: r.tau,
            delta: r.delta,
            achieved_overlap: r.achieved_overlap,
            overlap_lower_bound: r.overlap_lower_bound,
            budget_used: r.budget_used,
            complete: r.complete,
        };
        Ok(())
    })
}
