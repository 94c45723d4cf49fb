//! C interface. Every function returns one of the `UQ_*` status codes and
//! writes results through out-pointers. After a non-zero status,
//! `uq_last_error_message` describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use uqclone::closure::{check_upp, parse_defs, UppVerdict};
use uqclone::csp::{count_models, unique_model, Count, Instance, Uniqueness};
use uqclone::lattice::{atom_profile, covered_verdict, usat_class, CoveredVerdict, TractableReason, UsatClass};
use uqclone::relcore::{Language, Relation};
use uqclone::{Budget, Error};

pub const UQ_OK: c_int = 0;
pub const UQ_ERR_NULL: c_int = 1;
pub const UQ_ERR_UTF8: c_int = 2;
pub const UQ_ERR_PARSE: c_int = 3;
pub const UQ_ERR_BUDGET: c_int = 4;
pub const UQ_ERR_PRECONDITION: c_int = 5;
pub const UQ_ERR_UNKNOWN: c_int = 6;
pub const UQ_ERR_PANIC: c_int = 7;
pub const UQ_ERR_IO: c_int = 8;
/// Arity or domain mismatch.
pub const UQ_ERR_MISMATCH: c_int = 9;

pub const UQ_USAT_COMPLEMENT_CLOSED: c_int = 0;
pub const UQ_USAT_BOTH_CONSTANTS: c_int = 1;
pub const UQ_USAT_SCHAEFER: c_int = 2;
pub const UQ_USAT_CONP_COMPLETE: c_int = 3;
pub const UQ_USAT_US_COMPLETE: c_int = 4;

pub const UQ_COVERED: c_int = 0;
pub const UQ_NOT_COVERED: c_int = 1;
pub const UQ_FROZEN_COLLAPSE: c_int = 2;

pub const UQ_ZERO_MODELS: c_int = 0;
pub const UQ_UNIQUE_MODEL: c_int = 1;
pub const UQ_MANY_MODELS: c_int = 2;

pub const UQ_UPP_VALID: c_int = 0;
pub const UQ_UPP_WRONG_RELATION: c_int = 1;
pub const UQ_UPP_NOT_UNIQUE: c_int = 2;
pub const UQ_UPP_NOT_FROZEN: c_int = 3;

/// Opaque constraint language.
pub struct UqLanguage(Language);

/// Opaque CSP instance.
pub struct UqInstance(Instance);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(c_int, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } => UQ_ERR_PARSE,
            Error::Arity(_) | Error::Domain(_) => UQ_ERR_MISMATCH,
            Error::Budget(_) => UQ_ERR_BUDGET,
            Error::Precondition(_) => UQ_ERR_PRECONDITION,
            Error::Unknown(_) => UQ_ERR_UNKNOWN,
            Error::Io { .. } => UQ_ERR_IO,
        };
        Fail(code, e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> c_int {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => UQ_OK,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            UQ_ERR_PANIC
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(UQ_ERR_NULL, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(UQ_ERR_UTF8, format!("{what}: {e}")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failure on this thread, or null. Free with
/// `uq_string_free`.
#[no_mangle]
pub extern "C" fn uq_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn uq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `relation` blocks.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out_lang` writable.
#[no_mangle]
pub unsafe extern "C" fn uq_language_parse(src: *const c_char, out_lang: *mut *mut UqLanguage) -> c_int {
    guard(|| {
        let slot = out(out_lang, "out_lang")?;
        let lang = Language::parse(text(src, "src")?)?;
        *slot = Box::into_raw(Box::new(UqLanguage(lang)));
        Ok(())
    })
}

/// # Safety
/// `lang` must be null or come from `uq_language_parse`.
#[no_mangle]
pub unsafe extern "C" fn uq_language_free(lang: *mut UqLanguage) {
    if !lang.is_null() {
        drop(Box::from_raw(lang));
    }
}

/// Complexity of unique satisfiability over a Boolean language, as a
/// `UQ_USAT_*` code.
///
/// # Safety
/// `lang` must come from `uq_language_parse`; `out_class` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uq_usat_class(lang: *const UqLanguage, out_class: *mut c_int) -> c_int {
    guard(|| {
        let slot = out(out_class, "out_class")?;
        *slot = match usat_class(&handle(lang, "lang")?.0)? {
            UsatClass::Tractable(TractableReason::ComplementClosed) => UQ_USAT_COMPLEMENT_CLOSED,
            UsatClass::Tractable(TractableReason::BothConstants) => UQ_USAT_BOTH_CONSTANTS,
            UsatClass::Tractable(TractableReason::SchaeferEnumerable) => UQ_USAT_SCHAEFER,
            UsatClass::CoNPComplete => UQ_USAT_CONP_COMPLETE,
            UsatClass::USComplete => UQ_USAT_US_COMPLETE,
        };
        Ok(())
    })
}

/// Bit i is set when the language is preserved by atom i of
/// (0, 1, not, and, or, majority, xor3).
///
/// # Safety
/// `lang` must come from `uq_language_parse`; `out_bits` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uq_atom_profile(lang: *const UqLanguage, out_bits: *mut u8) -> c_int {
    guard(|| {
        let slot = out(out_bits, "out_bits")?;
        let p = atom_profile(&handle(lang, "lang")?.0)?;
        *slot = p.bits().iter().enumerate().fold(0u8, |m, (i, &b)| m | (b as u8) << i);
        Ok(())
    })
}

/// `UQ_COVERED`, `UQ_NOT_COVERED` or `UQ_FROZEN_COLLAPSE` for a co-clone
/// name such as `IE0` or `IS11^3`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out_verdict` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uq_covered_verdict(name: *const c_char, out_verdict: *mut c_int) -> c_int {
    guard(|| {
        let slot = out(out_verdict, "out_verdict")?;
        *slot = match covered_verdict(text(name, "name")?)? {
            CoveredVerdict::Covered => UQ_COVERED,
            CoveredVerdict::NotCovered => UQ_NOT_COVERED,
            CoveredVerdict::FrozenCollapse => UQ_FROZEN_COLLAPSE,
        };
        Ok(())
    })
}

fn resolve_base<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        Ok(Path::new("."))
    } else {
        unsafe { text(p, "base_dir").map(Path::new) }
    }
}

/// Parses an instance. A `lang` line is resolved against `base_dir`
/// (the working directory when null).
///
/// # Safety
/// `src` must be a NUL-terminated string, `base_dir` null or one, and
/// `out_inst` writable.
#[no_mangle]
pub unsafe extern "C" fn uq_instance_parse(
    src: *const c_char,
    base_dir: *const c_char,
    out_inst: *mut *mut UqInstance,
) -> c_int {
    guard(|| {
        let slot = out(out_inst, "out_inst")?;
        let inst = Instance::parse(text(src, "src")?, resolve_base(base_dir)?)?;
        *slot = Box::into_raw(Box::new(UqInstance(inst)));
        Ok(())
    })
}

/// # Safety
/// `inst` must be null or come from `uq_instance_parse`.
#[no_mangle]
pub unsafe extern "C" fn uq_instance_free(inst: *mut UqInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must come from `uq_instance_parse`; `out_n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uq_instance_var_count(inst: *const UqInstance, out_n: *mut usize) -> c_int {
    guard(|| {
        *out(out_n, "out_n")? = handle(inst, "inst")?.0.vars.len();
        Ok(())
    })
}

/// Counts models, stopping at `cap` when it is non-zero. `out_capped` is
/// set to 1 when the cap was reached.
///
/// # Safety
/// `inst` must come from `uq_instance_parse`; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn uq_instance_count_models(
    inst: *const UqInstance,
    cap: u64,
    out_count: *mut u64,
    out_capped: *mut c_int,
) -> c_int {
    guard(|| {
        let count = out(out_count, "out_count")?;
        let capped = out(out_capped, "out_capped")?;
        let cap = (cap != 0).then_some(cap as u128);
        let (n, at_least) = match count_models(&handle(inst, "inst")?.0, cap, &Budget::default())? {
            Count::Exact(n) => (n, false),
            Count::AtLeast(n) => (n, true),
        };
        *count = u64::try_from(n).map_err(|_| Fail(UQ_ERR_BUDGET, format!("{n} models do not fit in 64 bits")))?;
        *capped = at_least as c_int;
        Ok(())
    })
}

/// Decides whether the instance has exactly one model. When `model` is
/// non-null it receives the unique model (or the first model when there
/// are several) and must hold `model_len >= var count` bytes.
///
/// # Safety
/// `inst` must come from `uq_instance_parse`; `out_status` must be
/// writable; `model` must be null or valid for `model_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn uq_instance_unique(
    inst: *const UqInstance,
    out_status: *mut c_int,
    model: *mut u8,
    model_len: usize,
) -> c_int {
    guard(|| {
        let status = out(out_status, "out_status")?;
        let inst = &handle(inst, "inst")?.0;
        if !model.is_null() && model_len < inst.vars.len() {
            return Err(Fail(
                UQ_ERR_PRECONDITION,
                format!("model buffer holds {model_len} values, need {}", inst.vars.len()),
            ));
        }
        let (code, first) = match unique_model(inst, &Budget::default())? {
            Uniqueness::Zero => (UQ_ZERO_MODELS, None),
            Uniqueness::Unique(t) => (UQ_UNIQUE_MODEL, Some(t)),
            Uniqueness::Many(a, _) => (UQ_MANY_MODELS, Some(a)),
        };
        if let (false, Some(t)) = (model.is_null(), first) {
            std::slice::from_raw_parts_mut(model, t.len()).copy_from_slice(&t);
        }
        *status = code;
        Ok(())
    })
}

/// Checks definition `index` of a definition file against the relation in
/// `target_src` (one `relation` block). `over` paths are resolved against
/// `base_dir`.
///
/// # Safety
/// String arguments must be NUL-terminated (`base_dir` may be null);
/// `out_verdict` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uq_check_upp(
    defs_src: *const c_char,
    base_dir: *const c_char,
    index: usize,
    target_src: *const c_char,
    out_verdict: *mut c_int,
) -> c_int {
    guard(|| {
        let slot = out(out_verdict, "out_verdict")?;
        let defs = parse_defs(text(defs_src, "defs_src")?, resolve_base(base_dir)?)?;
        let def = defs
            .get(index)
            .ok_or_else(|| Fail(UQ_ERR_PRECONDITION, format!("definition {index} of {}", defs.len())))?;
        let target = Relation::parse(text(target_src, "target_src")?)?;
        *slot = match check_upp(def, &target, &Budget::default())? {
            UppVerdict::Valid(_) => UQ_UPP_VALID,
            UppVerdict::WrongRelation { .. } => UQ_UPP_WRONG_RELATION,
            UppVerdict::NotUnique { .. } => UQ_UPP_NOT_UNIQUE,
            UppVerdict::NotFrozen { .. } => UQ_UPP_NOT_FROZEN,
        };
        Ok(())
    })
}
