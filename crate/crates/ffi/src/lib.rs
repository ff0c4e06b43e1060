//! C ABI for graphfuse.
//!
//! Every fallible function returns a [`GfStatus`] and writes its result through an out
//! pointer. On failure the message is kept per thread and can be fetched with
//! [`gf_last_error_message`]. Strings returned by this library must be released with
//! [`gf_string_free`]; handles with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use graphfuse::analysis::{
    bell_fidelity_depolarizing, calibrate_bell_depolarizing, product_correlator,
};
use graphfuse::graph::{SetLabel, StabilizerSet};
use graphfuse::protocol::{builtin, run, BackendChoice, ProtocolProgram, RunConfig, RunResult};
use graphfuse::quantum::PauliString;
use graphfuse::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidParameter = 4,
    InvalidGraph = 5,
    OddCycle = 6,
    SettingMismatch = 7,
    Simulation = 8,
    Panic = 9,
}

/// Backend selector for [`gf_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfBackend {
    Auto = 0,
    Dense = 1,
    Tableau = 2,
}

/// Opaque protocol program.
pub struct GfProgram(ProtocolProgram);

/// Opaque result of one protocol execution, including the final state.
pub struct GfRun(RunResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GfStatus {
    match e.root() {
        Error::Parse { .. } => GfStatus::Parse,
        Error::InvalidParameter(_) => GfStatus::InvalidParameter,
        Error::InvalidGraph(_) => GfStatus::InvalidGraph,
        Error::OddCycle(_) => GfStatus::OddCycle,
        Error::SettingMismatch(_) => GfStatus::SettingMismatch,
        _ => GfStatus::Simulation,
    }
}

struct Fail(GfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            GfStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(GfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(GfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(GfStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(GfStatus::NullPointer, format!("{what} is null")));
    }
    out.write(v);
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("interior NULs removed")
        .into_raw()
}

/// Copy of the last error message on this thread, or NULL if none.
/// Free with [`gf_string_free`].
#[no_mangle]
pub extern "C" fn gf_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |c| c.clone().into_raw())
    })
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Load a built-in protocol (`bell`, `box`, `pentagon`, `hexagon`, `tree`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_program_builtin(
    name: *const c_char,
    out: *mut *mut GfProgram,
) -> GfStatus {
    guard(|| {
        let p = builtin(str_arg(name, "name")?)?;
        write(out, Box::into_raw(Box::new(GfProgram(p))), "out")
    })
}

/// Parse a program from its text form.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_program_from_text(
    text: *const c_char,
    out: *mut *mut GfProgram,
) -> GfStatus {
    guard(|| {
        let p = ProtocolProgram::from_text(str_arg(text, "text")?)?;
        write(out, Box::into_raw(Box::new(GfProgram(p))), "out")
    })
}

/// Text form of a program. Free the string with [`gf_string_free`].
///
/// # Safety
/// `program` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_program_to_text(
    program: *const GfProgram,
    out: *mut *mut c_char,
) -> GfStatus {
    guard(|| {
        let p = as_ref(program, "program")?;
        write(out, to_c_string(p.0.to_text()), "out")
    })
}

/// # Safety
/// `program` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn gf_program_free(program: *mut GfProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Execute a program. With `post_select` set every fusion is forced to succeed.
///
/// # Safety
/// `program` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_run(
    program: *const GfProgram,
    backend: GfBackend,
    post_select: bool,
    seed: u64,
    out: *mut *mut GfRun,
) -> GfStatus {
    guard(|| {
        let p = as_ref(program, "program")?;
        let cfg = RunConfig {
            backend: match backend {
                GfBackend::Auto => BackendChoice::Auto,
                GfBackend::Dense => BackendChoice::Dense,
                GfBackend::Tableau => BackendChoice::Tableau,
            },
            post_select,
            seed,
            ..RunConfig::default()
        };
        let r = run(&p.0, &cfg)?;
        write(out, Box::into_raw(Box::new(GfRun(r))), "out")
    })
}

/// # Safety
/// `run` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn gf_run_free(run: *mut GfRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Whether every fusion heralded success.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gf_run_success(run: *const GfRun) -> bool {
    run.as_ref().is_some_and(|r| r.0.success)
}

/// Number of qubits in the final register, 0 for NULL.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gf_run_num_qubits(run: *const GfRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.state.num_qubits())
}

/// Probability of the recorded herald outcomes.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_run_probability(run: *const GfRun, out: *mut f64) -> GfStatus {
    guard(|| write(out, as_ref(run, "run")?.0.probability, "out"))
}

/// Exact expectation of a Pauli string such as `"+XZZI"` on the final state.
///
/// # Safety
/// `run` must be a live handle, `pauli` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gf_run_expectation(
    run: *const GfRun,
    pauli: *const c_char,
    out: *mut f64,
) -> GfStatus {
    guard(|| {
        let r = as_ref(run, "run")?;
        let p: PauliString = str_arg(pauli, "pauli")?.parse()?;
        write(out, r.0.state.expectation(&p)?, "out")
    })
}

/// Exact witness quantities `G_a`, `G_b` and `P = G_a + G_b - 1` of the final state
/// against the program's expected graph.
///
/// # Safety
/// Handles must be live and every out pointer writable.
#[no_mangle]
pub unsafe extern "C" fn gf_run_witness(
    run: *const GfRun,
    program: *const GfProgram,
    g_a: *mut f64,
    g_b: *mut f64,
    p: *mut f64,
) -> GfStatus {
    guard(|| {
        let r = as_ref(run, "run")?;
        let prog = as_ref(program, "program")?;
        let g = prog.0.expected.as_ref().ok_or_else(|| {
            Fail(
                GfStatus::InvalidParameter,
                "program has no expected graph".into(),
            )
        })?;
        let set = StabilizerSet::partitioned(g)?;
        let a = product_correlator(&r.0.state, &set, SetLabel::A)?;
        let b = product_correlator(&r.0.state, &set, SetLabel::B)?;
        write(g_a, a, "g_a")?;
        write(g_b, b, "g_b")?;
        write(p, a + b - 1.0, "p")
    })
}

/// Herald-conditioned Bell fidelity under per-emission depolarizing probability `p`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_bell_fidelity(p: f64, out: *mut f64) -> GfStatus {
    guard(|| write(out, bell_fidelity_depolarizing(p)?, "out"))
}

/// Depolarizing probability at which the Bell fidelity equals `target`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_calibrate_bell(target: f64, out: *mut f64) -> GfStatus {
    guard(|| write(out, calibrate_bell_depolarizing(target)?, "out"))
}
