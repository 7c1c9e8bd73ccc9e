//! Exercises the C ABI from Rust and, when a C compiler is present, from an
//! actual C translation unit linked against the produced static library.

use std::ffi::{CStr, CString};
use std::ptr;

use etale_capi::*;

const FIXTURE_A: &str = "\
kind: groupoid-action
[group]
name: cyclic 2
[graph]
objects: -1 0 1
edge: -1 0
edge: 0 1
[action]
act: -1 0 1
act: 1 0 -1
";

const TORUS: &str = "\
kind: orbifold
geometry: flat 2
word-bound: 2
generator: a 1 0 0 1 1 0
generator: b 1 0 0 1 0 1
";

#[test]
fn parse_inspect_free() {
    let text = CString::new(FIXTURE_A).unwrap();
    let mut handle: *mut EtaleGroupoid = ptr::null_mut();
    unsafe {
        let status = etale_groupoid_parse(text.as_ptr(), &mut handle);
        assert!(matches!(status, EtaleStatus::Ok));
        assert_eq!(etale_groupoid_object_count(handle), 3);
        assert_eq!(etale_groupoid_arrow_count(handle), 6);
        assert_eq!(etale_groupoid_orbit_count(handle), 2);
        assert_eq!(etale_groupoid_violation_count(handle), 0);
        assert_eq!(etale_groupoid_isotropy_order(handle, 1), 2);
        assert_eq!(etale_groupoid_isotropy_order(handle, 2), 1);
        assert_eq!(etale_groupoid_isotropy_order(handle, 9), -1);
        let mut report: *mut std::ffi::c_char = ptr::null_mut();
        let status = etale_groupoid_validate_report(handle, &mut report);
        assert!(matches!(status, EtaleStatus::Ok));
        assert_eq!(CStr::from_ptr(report).to_str().unwrap(), "");
        etale_string_free(report);
        etale_groupoid_free(handle);
    }
}

#[test]
fn parse_error_sets_message() {
    let text = CString::new("kind: nonsense\n").unwrap();
    let mut handle: *mut EtaleGroupoid = ptr::null_mut();
    unsafe {
        let status = etale_groupoid_parse(text.as_ptr(), &mut handle);
        assert!(matches!(status, EtaleStatus::ParseError));
        let msg = etale_last_error();
        assert!(!msg.is_null());
        let text = CStr::from_ptr(msg).to_str().unwrap().to_string();
        assert!(text.contains("nonsense"), "{text}");
        etale_string_free(msg);
    }
}

#[test]
fn morphism_and_extension_counts() {
    let a = CString::new(FIXTURE_A).unwrap();
    let mut g: *mut EtaleGroupoid = ptr::null_mut();
    unsafe {
        assert!(matches!(etale_groupoid_parse(a.as_ptr(), &mut g), EtaleStatus::Ok));
        let count = etale_morphism_class_count(g, g, 2, 10_000_000);
        assert_eq!(count, 10);
        etale_groupoid_free(g);
    }
    let c2 = CString::new("kind: group\n[group]\nname: cyclic 2\n").unwrap();
    let c3 = CString::new("kind: group\n[group]\nname: cyclic 3\n").unwrap();
    unsafe {
        assert_eq!(etale_extension_class_count(c2.as_ptr(), c2.as_ptr(), 1_000_000), 2);
        assert_eq!(etale_extension_class_count(c2.as_ptr(), c3.as_ptr(), 1_000_000), 1);
    }
}

#[test]
fn geodesic_length_through_the_abi() {
    let spec = CString::new(TORUS).unwrap();
    let word = CString::new("a^3*b^4").unwrap();
    let mut length = 0.0f64;
    unsafe {
        let status =
            etale_geodesic_min_length(spec.as_ptr(), word.as_ptr(), 64, 0, 1e-6, &mut length);
        assert!(matches!(status, EtaleStatus::Ok));
    }
    assert!((length - 5.0).abs() < 1e-3, "length {length}");
}

/// Compile a small C program against the generated header and static
/// library, run it, and check its output.
#[test]
fn c_translation_unit_links_and_runs() {
    let manifest = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    if !include.join("etale.h").exists() {
        panic!("header not generated");
    }
    // the staticlib lands next to the test binary's profile directory
    let mut lib_dir = std::env::current_exe().unwrap();
    lib_dir.pop(); // test binary name
    lib_dir.pop(); // deps/
    let lib = lib_dir.join("libetale_capi.a");
    if !lib.exists() {
        // cdylib fallback
        let so = lib_dir.join("libetale_capi.so");
        assert!(so.exists(), "no staticlib or cdylib found in {}", lib_dir.display());
    }
    let cc = which_cc();
    let Some(cc) = cc else {
        eprintln!("no C compiler found; skipping the link smoke test");
        return;
    };
    let tmp = std::env::temp_dir().join(format!("etale_capi_smoke_{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let c_src = tmp.join("smoke.c");
    std::fs::write(
        &c_src,
        r#"
#include <stdio.h>
#include <string.h>
#include "etale.h"

static const char *SPEC =
    "kind: groupoid-action\n"
    "[group]\n"
    "name: cyclic 2\n"
    "[graph]\n"
    "objects: -1 0 1\n"
    "edge: -1 0\n"
    "edge: 0 1\n"
    "[action]\n"
    "act: -1 0 1\n"
    "act: 1 0 -1\n";

int main(void) {
    EtaleGroupoid *g = NULL;
    if (etale_groupoid_parse(SPEC, &g) != ETALE_STATUS_OK) return 1;
    if (etale_groupoid_orbit_count(g) != 2) return 2;
    if (etale_groupoid_violation_count(g) != 0) return 3;
    etale_groupoid_free(g);
    printf("orbits-ok\n");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.join("smoke");
    let status = std::process::Command::new(&cc)
        .arg(&c_src)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-letale_capi")
        .arg("-lpthread")
        .arg("-ldl")
        .arg("-lm")
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("compiler invocation failed");
    assert!(status.success(), "C compilation failed");
    let out = std::process::Command::new(&exe).output().expect("smoke binary runs");
    assert!(out.status.success(), "smoke binary exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "orbits-ok");
    let _ = std::fs::remove_dir_all(&tmp);
}

fn which_cc() -> Option<String> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc)
            .arg("--version")
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
        {
            return Some(cc.to_string());
        }
    }
    None
}
