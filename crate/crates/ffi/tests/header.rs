use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/outbreak.h")
}

const EXPORTS: &[&str] = &[
    "ob_last_error_message",
    "ob_version",
    "ob_doubling_time",
    "ob_prevalence",
    "ob_iqd",
    "ob_domestic_fit",
    "ob_thresholds_new",
    "ob_thresholds_free",
    "ob_thresholds_horizon",
    "ob_thresholds_get",
    "ob_verdict",
    "ob_sequential_run",
    "ob_sequential_free",
    "ob_sequential_len",
    "ob_sequential_row",
    "ob_sequential_detection_day",
];

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in EXPORTS {
        let declared = text
            .lines()
            .any(|l| !l.trim_start().starts_with('*') && l.contains(&format!("{name}(")));
        assert!(declared, "{name} missing from header");
    }
    assert!(text.contains("typedef struct ObThresholdTable ObThresholdTable;"));
    assert!(text.contains("OB_STATUS_ALL_SIMULATIONS_EMPTY = 5"));
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include "outbreak.h"

int main(void) {
    double t = 0.0;
    if (ob_doubling_time(0.1, &t) != OB_STATUS_OK) return 1;
    if (ob_doubling_time(0.0, &t) != OB_STATUS_INVALID_ARGUMENT) return 2;
    if (ob_last_error_message()[0] == '\0') return 3;

    double alphas[] = {0.05, 0.01};
    ObDetectorConfig cfg = {1e-4, 0.1, 1000, 20, 1000, alphas, 2, 5};
    ObThresholdTable *table = NULL;
    if (ob_thresholds_new(&cfg, OB_MODE_KNOWN_START, &table) != OB_STATUS_OK) return 4;
    if (ob_thresholds_horizon(table) != 20) return 5;
    uint64_t c = 0;
    if (ob_thresholds_get(table, 20, 0, &c) != OB_STATUS_OK || c == 0) return 6;
    ob_thresholds_free(table);

    printf("%.6f %s\n", t, ob_version());
    return 0;
}
"#;

/// The cdylib sits next to the `deps` directory holding this test binary.
fn cdylib_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_compiles_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler ({cc}); header check only");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = header().parent().unwrap().to_path_buf();

    let syntax = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(syntax.status.success(), "{}", String::from_utf8_lossy(&syntax.stderr));

    let lib = cdylib_dir();
    if !lib.join("liboutbreak_ffi.so").exists() {
        eprintln!("cdylib not built in {}; syntax check only", lib.display());
        return;
    }
    let bin = dir.path().join("main");
    let build = Command::new(&cc)
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg("-L")
        .arg(&lib)
        .args(["-loutbreak_ffi", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&bin).env("LD_LIBRARY_PATH", &lib).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.starts_with("6.931472 "), "{stdout}");
}
