use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use freelip_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { freelip_string_free(s) };
    out
}

#[test]
fn space_norm_round_trip() {
    let json = CString::new(r#"{"points":["a","b","c"],"dist":[[0,1,2],[1,0,1],[2,1,0]]}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { freelip_space_from_json(json.as_ptr(), &mut s) }, FREELIP_OK);
    assert_eq!(unsafe { freelip_space_len(s) }, 3);
    let m = CString::new(r#"{"a":"1/2","c":"-1/2"}"#).unwrap();
    let (mut v, mut exact) = (0.0, ptr::null_mut());
    assert_eq!(unsafe { freelip_ae_norm(s, m.as_ptr(), &mut v, &mut exact) }, FREELIP_OK);
    assert_eq!(v, 1.0);
    assert_eq!(take(exact), "1");
    let unbalanced = CString::new(r#"{"a":"1"}"#).unwrap();
    assert_eq!(unsafe { freelip_ae_norm(s, unbalanced.as_ptr(), &mut v, ptr::null_mut()) }, FREELIP_ERR_INVALID);
    assert!(!take(freelip_last_error()).is_empty());
    unsafe { freelip_space_free(s) };
}

#[test]
fn graphs_and_quotient_norm() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { freelip_graph_generate(FREELIP_FAMILY_LAAKSO, 1, 0, &mut g) }, FREELIP_OK);
    assert_eq!(unsafe { freelip_graph_edge_count(g) }, 6);
    assert_eq!(unsafe { freelip_graph_vertex_count(g) }, 6);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { freelip_graph_to_json(g, &mut text) }, FREELIP_OK);
    let text = CString::new(take(text)).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { freelip_graph_from_json(text.as_ptr(), &mut h) }, FREELIP_OK);
    let x = CString::new(r#"{"sb":"1","st":"1"}"#).unwrap();
    let mut v = 0.0;
    assert_eq!(unsafe { freelip_quotient_norm(h, x.as_ptr(), &mut v, ptr::null_mut()) }, FREELIP_OK);
    assert_eq!(v, 2.0);
    unsafe {
        freelip_graph_free(g);
        freelip_graph_free(h);
    }
}

#[test]
fn counts_and_codes() {
    let (mut e, mut v, mut c) = (0u64, 0u64, 0u64);
    assert_eq!(unsafe { freelip_family_counts(FREELIP_FAMILY_DIAMOND, 3, 0, &mut e, &mut v, &mut c) }, FREELIP_OK);
    assert_eq!((e, v, c), (64, 44, 21));
    assert_eq!(unsafe { freelip_family_counts(FREELIP_FAMILY_DIAMOND, 40, 0, &mut e, &mut v, &mut c) }, FREELIP_ERR_RESOURCE);
    assert_eq!(unsafe { freelip_family_counts(9, 1, 0, &mut e, &mut v, &mut c) }, FREELIP_ERR_INVALID);
    assert_eq!(unsafe { freelip_graph_generate(FREELIP_FAMILY_DIAMOND, 1, 0, ptr::null_mut()) }, FREELIP_ERR_NULL);
    assert_eq!(unsafe { freelip_space_from_json(ptr::null(), ptr::null_mut()) }, FREELIP_ERR_NULL);
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let header_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(header_dir.join("freelip.h")).unwrap();
    for f in ["freelip_ae_norm", "freelip_graph_generate", "freelip_haar_witness", "freelip_string_free"] {
        assert!(header.contains(f), "{f} missing from header");
    }
    let lib = target_dir().join("libfreelip_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link check: no cc or no static library");
        return;
    }
    let dir = std::env::temp_dir().join(format!("freelip-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "freelip.h"
int main(void) {
    double v = 0; char *s = NULL;
    if (freelip_haar_witness(2, &v, &s) != FREELIP_OK) return 1;
    printf("%s %.2f\n", s, v);
    freelip_string_free(s);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "7/4 1.75\n");
}
