//! Compiles a C program against the generated header and the static
//! library, then runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

fn staticlib() -> Option<PathBuf> {
    // the test binary lives in target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libweak_euler_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_declares_the_api() {
    let h =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/weak_euler.h"))
            .unwrap();
    for name in [
        "we_last_error_message",
        "we_model_from_toml",
        "we_model_example1",
        "we_model_free",
        "we_model_info",
        "we_kappa",
        "we_sample_isotropic",
        "we_sample_positive",
        "we_estimate",
        "we_converge",
        "typedef struct WeModel WeModel;",
        "WE_STATUS_VALIDATION = 2",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = staticlib() else {
        panic!("static library not found next to the test binary");
    };
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempdir();
    let exe = tmp.join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(dir.join("include"))
        .arg(dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C build failed");
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

fn tempdir() -> PathBuf {
    let p = std::env::temp_dir().join(format!("weak-euler-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&p).unwrap();
    p
}
