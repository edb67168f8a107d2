//! C ABI for modalpd.
//!
//! Every fallible function returns an [`MpStatus`]; on failure the message
//! is available from [`mp_last_error`] on the same thread. Tables are opaque
//! and owned by the caller until passed to [`mp_table_free`]. Strings
//! returned through `out` parameters must be released with
//! [`mp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use modalpd::arena::{play_names, round_robin, ArenaError, Payoffs};
use modalpd::report::{MatchEntry, PayoffEntry, ReportDocument};
use modalpd::{
    builtin_library, parse_agent_file, parse_formula, Action, AgentError, AgentTable, SolverError,
};

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Syntax or validation error in an agent file, formula or payoff list.
    InvalidInput = 3,
    /// An agent name did not resolve.
    UnknownAgent = 4,
    /// The two agents cannot be played against each other.
    Unsupported = 5,
    /// A bug: solver invariant violated or a panic was caught.
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpAction {
    Cooperate = 0,
    Defect = 1,
}

/// Opaque agent table.
pub struct MpTable {
    inner: AgentTable,
}

/// Outcome of one match. Proof levels are -1 for syntactic agents.
/// Payoffs are exact fractions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MpMatch {
    pub action_x: MpAction,
    pub action_y: MpAction,
    pub proof_level_x: i64,
    pub proof_level_y: i64,
    pub payoff_x_num: i64,
    pub payoff_x_den: i64,
    pub payoff_y_num: i64,
    pub payoff_y_den: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(MpStatus, String);

impl From<AgentError> for Fail {
    fn from(e: AgentError) -> Self {
        let status = match e {
            AgentError::UnknownAgent { .. } | AgentError::NoSuchAgent(_) => MpStatus::UnknownAgent,
            _ => MpStatus::InvalidInput,
        };
        Fail(status, e.to_string())
    }
}

impl From<SolverError> for Fail {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Agent(a) => a.into(),
            SolverError::UnknownPair(_) => Fail(MpStatus::InvalidInput, e.to_string()),
            _ => Fail(MpStatus::Internal, e.to_string()),
        }
    }
}

impl From<ArenaError> for Fail {
    fn from(e: ArenaError) -> Self {
        match e {
            ArenaError::Agent(a) => a.into(),
            ArenaError::Solver(s) => s.into(),
            ArenaError::UnknownAgent(_) => Fail(MpStatus::UnknownAgent, e.to_string()),
            ArenaError::MixedKindsUnsupported { .. } => Fail(MpStatus::Unsupported, e.to_string()),
            ArenaError::FixedPointViolation(..) => Fail(MpStatus::Internal, e.to_string()),
            _ => Fail(MpStatus::InvalidInput, e.to_string()),
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal error: panic in modalpd");
            MpStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(MpStatus::NullArgument, format!("`{what}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(MpStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn table_arg<'a>(p: *const MpTable) -> Result<&'a AgentTable, Fail> {
    p.as_ref()
        .map(|t| &t.inner)
        .ok_or_else(|| Fail(MpStatus::NullArgument, "`table` is null".into()))
}

unsafe fn payoffs_arg(p: *const c_char) -> Result<Payoffs, Fail> {
    if p.is_null() {
        return Ok(Payoffs::default());
    }
    Ok(str_arg(p, "payoffs")?.parse()?)
}

fn check_out<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        Err(Fail(MpStatus::NullArgument, "`out` is null".into()))
    } else {
        Ok(())
    }
}

unsafe fn write_string(out: *mut *mut c_char, s: String) {
    *out = CString::new(s).expect("no interior NUL").into_raw();
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn mp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New table holding the builtin agents.
///
/// # Safety
/// `out` must be null or point to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn mp_table_builtin(out: *mut *mut MpTable) -> MpStatus {
    guard(|| {
        check_out(out)?;
        *out = Box::into_raw(Box::new(MpTable {
            inner: builtin_library(),
        }));
        Ok(())
    })
}

/// Parses an agent file on top of the builtin agents.
///
/// # Safety
/// `text` must be null or a NUL-terminated string; `out` as for
/// [`mp_table_builtin`].
#[no_mangle]
pub unsafe extern "C" fn mp_table_parse(text: *const c_char, out: *mut *mut MpTable) -> MpStatus {
    guard(|| {
        check_out(out)?;
        let text = str_arg(text, "text")?;
        let inner = parse_agent_file(text)?;
        *out = Box::into_raw(Box::new(MpTable { inner }));
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a pointer returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mp_table_free(table: *mut MpTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Plays `x` against `y`. `payoffs` is `"T,R,P,S"`, or null for 5,3,1,0.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `table` as for
/// [`mp_table_free`]; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_play(
    table: *const MpTable,
    x: *const c_char,
    y: *const c_char,
    payoffs: *const c_char,
    out: *mut MpMatch,
) -> MpStatus {
    guard(|| {
        check_out(out)?;
        let table = table_arg(table)?;
        let (x, y) = (str_arg(x, "x")?, str_arg(y, "y")?);
        let payoffs = payoffs_arg(payoffs)?;
        let m = play_names(x, y, table, &payoffs)?;
        let action = |a: Action| match a {
            Action::C => MpAction::Cooperate,
            Action::D => MpAction::Defect,
        };
        let level = |l: Option<usize>| l.map_or(-1, |n| n as i64);
        *out = MpMatch {
            action_x: action(m.actions.0),
            action_y: action(m.actions.1),
            proof_level_x: level(m.proof_levels.0),
            proof_level_y: level(m.proof_levels.1),
            payoff_x_num: *m.payoffs.0.numer(),
            payoff_x_den: *m.payoffs.0.denom(),
            payoff_y_num: *m.payoffs.1.numer(),
            payoff_y_den: *m.payoffs.1.denom(),
        };
        Ok(())
    })
}

/// Plays `x` against `y` and writes the JSON report (schema "1") to `out`.
///
/// # Safety
/// As for [`mp_play`]; `out` receives a string to free with [`mp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mp_play_json(
    table: *const MpTable,
    x: *const c_char,
    y: *const c_char,
    payoffs: *const c_char,
    out: *mut *mut c_char,
) -> MpStatus {
    guard(|| {
        check_out(out)?;
        let table = table_arg(table)?;
        let (x, y) = (str_arg(x, "x")?, str_arg(y, "y")?);
        let payoffs = payoffs_arg(payoffs)?;
        let m = play_names(x, y, table, &payoffs)?;
        let mut doc = ReportDocument::new(vec!["play".into(), x.into(), y.into()]);
        doc.agents.push(ReportDocument::agent_entry(table, x)?);
        if x != y {
            doc.agents.push(ReportDocument::agent_entry(table, y)?);
        }
        doc.warnings = table.warnings().to_vec();
        doc.warnings.extend(payoffs.warnings());
        doc.payoffs = Some(PayoffEntry::from_payoffs(&payoffs));
        doc.matches.push(MatchEntry::from_result(&m));
        write_string(out, doc.to_json());
        Ok(())
    })
}

/// Round robin over the comma-separated `roster`; writes the JSON report.
///
/// # Safety
/// As for [`mp_play_json`].
#[no_mangle]
pub unsafe extern "C" fn mp_tournament_json(
    table: *const MpTable,
    roster: *const c_char,
    payoffs: *const c_char,
    out: *mut *mut c_char,
) -> MpStatus {
    guard(|| {
        check_out(out)?;
        let table = table_arg(table)?;
        let roster: Vec<String> = str_arg(roster, "roster")?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        let payoffs = payoffs_arg(payoffs)?;
        let report = round_robin(&roster, table, &payoffs)?;
        let mut doc = ReportDocument::new(vec!["tournament".into(), "--roster".into(), roster.join(",")]);
        for name in &roster {
            doc.agents.push(ReportDocument::agent_entry(table, name)?);
        }
        doc.warnings = table.warnings().to_vec();
        doc.warnings.extend(payoffs.warnings());
        doc.payoffs = Some(PayoffEntry::from_payoffs(&payoffs));
        doc.set_tournament(&report);
        write_string(out, doc.to_json());
        Ok(())
    })
}

/// Parses a formula and writes its canonical ASCII rendering.
///
/// # Safety
/// As for [`mp_play_json`].
#[no_mangle]
pub unsafe extern "C" fn mp_formula_canonical(text: *const c_char, out: *mut *mut c_char) -> MpStatus {
    guard(|| {
        check_out(out)?;
        let f =
            parse_formula(str_arg(text, "text")?).map_err(|e| Fail(MpStatus::InvalidInput, e.to_string()))?;
        write_string(out, f.to_string());
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
