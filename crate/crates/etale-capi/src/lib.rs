//! C ABI for the etale workbench: opaque handles, integer status codes, and
//! owned C strings. Every function is panic-safe; errors are reported by
//! the returned status, with a per-thread message retrievable through
//! [`etale_last_error`]. Strings returned by this library must be released
//! with [`etale_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use etale::descent::{minimize_energy, seeded_start_from, DescentOptions};
use etale::extension::{classify_extensions, QModule};
use etale::groupoid::FiniteGroupoid;
use etale::isometry::parse_word;
use etale::morphism::MorphismSpace;
use etale::specfile::{parse_spec, SpecFile};

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

/// Status codes returned by the C API.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum EtaleStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8Error = 2,
    ParseError = 3,
    DomainError = 4,
    Panic = 5,
}

/// Opaque groupoid handle.
pub struct EtaleGroupoid {
    inner: FiniteGroupoid,
}

fn set_error(message: String) {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guarded<F: FnOnce() -> EtaleStatus>(f: F) -> EtaleStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".to_string());
            EtaleStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, EtaleStatus> {
    if ptr.is_null() {
        set_error("null pointer argument".into());
        return Err(EtaleStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_error(format!("invalid utf-8: {e}"));
        EtaleStatus::Utf8Error
    })
}

fn give_string(out: *mut *mut c_char, s: String) -> EtaleStatus {
    let c = match CString::new(s) {
        Ok(c) => c,
        Err(e) => {
            set_error(format!("string contains interior nul: {e}"));
            return EtaleStatus::DomainError;
        }
    };
    unsafe { *out = c.into_raw() };
    EtaleStatus::Ok
}

/// Version of the library, as a static string (do not free).
#[no_mangle]
pub extern "C" fn etale_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// The last error message on this thread, as a newly allocated string, or
/// NULL if no error occurred yet. Free with [`etale_string_free`].
#[no_mangle]
pub extern "C" fn etale_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(c) => c.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Frees a string allocated by this library. NULL is ignored.
///
/// # Safety
/// `s` must have been returned by a function of this library and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn etale_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a groupoid-denoting spec (groupoid-explicit, groupoid-action, or
/// group) into a handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn etale_groupoid_parse(
    text: *const c_char,
    out: *mut *mut EtaleGroupoid,
) -> EtaleStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return EtaleStatus::NullPointer;
    }
    let text = match read_str(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    guarded(|| match parse_spec(text) {
        Ok(spec) => match spec.to_groupoid() {
            Some(g) => {
                *out = Box::into_raw(Box::new(EtaleGroupoid { inner: g }));
                EtaleStatus::Ok
            }
            None => {
                set_error(format!("spec kind {:?} does not denote a groupoid", spec.kind()));
                EtaleStatus::DomainError
            }
        },
        Err(e) => {
            set_error(e.to_string());
            EtaleStatus::ParseError
        }
    })
}

/// Releases a groupoid handle. NULL is ignored.
///
/// # Safety
/// `g` must come from [`etale_groupoid_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn etale_groupoid_free(g: *mut EtaleGroupoid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn etale_groupoid_object_count(g: *const EtaleGroupoid) -> isize {
    if g.is_null() {
        return -1;
    }
    (*g).inner.object_count() as isize
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn etale_groupoid_arrow_count(g: *const EtaleGroupoid) -> isize {
    if g.is_null() {
        return -1;
    }
    (*g).inner.arrow_count() as isize
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn etale_groupoid_orbit_count(g: *const EtaleGroupoid) -> isize {
    if g.is_null() {
        return -1;
    }
    (*g).inner.orbits().len() as isize
}

/// Number of violated groupoid axioms (0 means valid).
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn etale_groupoid_violation_count(g: *const EtaleGroupoid) -> isize {
    if g.is_null() {
        return -1;
    }
    (*g).inner.validate().len() as isize
}

/// Order of the isotropy group at the given object, or -1 on error.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn etale_groupoid_isotropy_order(
    g: *const EtaleGroupoid,
    object: usize,
) -> isize {
    if g.is_null() {
        return -1;
    }
    match (*g).inner.isotropy(object) {
        Ok(iso) => iso.group.order() as isize,
        Err(e) => {
            set_error(e.to_string());
            -1
        }
    }
}

/// The validation report as newline-separated text (empty when valid).
///
/// # Safety
/// `g` must be a live handle; `out` a valid string slot. Free the string
/// with [`etale_string_free`].
#[no_mangle]
pub unsafe extern "C" fn etale_groupoid_validate_report(
    g: *const EtaleGroupoid,
    out: *mut *mut c_char,
) -> EtaleStatus {
    if g.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return EtaleStatus::NullPointer;
    }
    guarded(|| {
        let lines: Vec<String> = (*g).inner.validate().iter().map(|v| v.to_string()).collect();
        give_string(out, lines.join("\n"))
    })
}

/// Number of pointed morphism classes from `source` to `target` over the
/// star object, computed with the given search cap. Returns -1 on error.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn etale_morphism_class_count(
    source: *const EtaleGroupoid,
    target: *const EtaleGroupoid,
    star: usize,
    cap: usize,
) -> isize {
    if source.is_null() || target.is_null() {
        set_error("null pointer argument".into());
        return -1;
    }
    let mut result = -1isize;
    let status = guarded(|| {
        match MorphismSpace::enumerate(&(*source).inner, &(*target).inner, star, cap) {
            Ok(space) => {
                result = space.len() as isize;
                EtaleStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                EtaleStatus::DomainError
            }
        }
    });
    if status == EtaleStatus::Ok {
        result
    } else {
        -1
    }
}

/// Number of extension classes of the quotient by the abelian kernel with
/// the trivial action, from two group spec texts. Returns -1 on error.
///
/// # Safety
/// Both texts must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn etale_extension_class_count(
    quotient_spec: *const c_char,
    kernel_spec: *const c_char,
    cap: usize,
) -> isize {
    let (q_text, k_text) = match (read_str(quotient_spec), read_str(kernel_spec)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return -1,
    };
    let mut result = -1isize;
    guarded(|| {
        let parse_group = |text: &str| match parse_spec(text) {
            Ok(SpecFile::Group(g)) => Ok(g),
            Ok(other) => Err(format!("expected a group spec, found {}", other.kind())),
            Err(e) => Err(e.to_string()),
        };
        let q = match parse_group(q_text) {
            Ok(g) => g,
            Err(e) => {
                set_error(e);
                return EtaleStatus::ParseError;
            }
        };
        let k = match parse_group(k_text) {
            Ok(g) => g,
            Err(e) => {
                set_error(e);
                return EtaleStatus::ParseError;
            }
        };
        let module = match QModule::trivial(&q, k) {
            Ok(m) => m,
            Err(e) => {
                set_error(e.to_string());
                return EtaleStatus::DomainError;
            }
        };
        match classify_extensions(&q, &module, cap) {
            Ok(cls) => {
                result = cls.classes.len() as isize;
                EtaleStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                EtaleStatus::DomainError
            }
        }
    });
    result
}

/// Runs twisted-loop energy descent over an orbifold spec text and writes
/// the minimized length.
///
/// # Safety
/// `orbifold_spec` and `twist_word` must be valid strings, `out_length` a
/// valid double slot.
#[no_mangle]
pub unsafe extern "C" fn etale_geodesic_min_length(
    orbifold_spec: *const c_char,
    twist_word: *const c_char,
    samples: usize,
    seed: u64,
    grad_tol: f64,
    out_length: *mut f64,
) -> EtaleStatus {
    if out_length.is_null() {
        set_error("null output pointer".into());
        return EtaleStatus::NullPointer;
    }
    let (spec_text, word) = match (read_str(orbifold_spec), read_str(twist_word)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    guarded(|| {
        let orb = match parse_spec(spec_text) {
            Ok(SpecFile::Orbifold(o)) => o,
            Ok(other) => {
                set_error(format!("expected an orbifold spec, found {}", other.kind()));
                return EtaleStatus::ParseError;
            }
            Err(e) => {
                set_error(e.to_string());
                return EtaleStatus::ParseError;
            }
        };
        let twist = match parse_word(&orb.generators, &orb.generator_names, word) {
            Ok(t) => t,
            Err(e) => {
                set_error(e.to_string());
                return EtaleStatus::ParseError;
            }
        };
        let start = match seeded_start_from(orb.geometry, &twist, samples, seed) {
            Ok(s) => s,
            Err(e) => {
                set_error(e.to_string());
                return EtaleStatus::DomainError;
            }
        };
        let opts = DescentOptions { grad_tol, ..Default::default() };
        match minimize_energy(&start, &opts) {
            Ok((_, report)) => {
                *out_length = report.length;
                EtaleStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                EtaleStatus::DomainError
            }
        }
    })
}
