//! Compile and run a small C program against the generated header and the
//! static library, proving the ABI end to end.

use std::path::PathBuf;
use std::process::Command;

const C_SOURCE: &str = r#"
#include <stdio.h>
#include <stdlib.h>
#include "qbd.h"

int main(void) {
    QbdParams *params = NULL;
    if (qbd_params_new(0.5, 1.0, 192, 1e-40, &params) != QbdStatus_Ok) return 1;

    double c = 0.0;
    if (qbd_c_constant(params, &c) != QbdStatus_Ok) return 2;

    QbdEngine *engine = NULL;
    if (qbd_engine_new(params, -8, 32, &engine) != QbdStatus_Ok) return 3;

    size_t len = qbd_engine_window_len(engine);
    double *probs = malloc(len * sizeof(double));
    double defect = 0.0;
    if (qbd_transition_row(engine, 0, 0.5, probs, len, &defect) != QbdStatus_Ok) return 4;

    double sum = 0.0;
    for (size_t i = 0; i < len; i++) sum += probs[i];
    printf("c=%.12f sum=%.12f defect=%.3e\n", c, sum, defect);

    /* error path: message should be retrievable */
    if (qbd_transition_row(engine, 99, 0.5, probs, len, &defect) != QbdStatus_InvalidArgument)
        return 5;
    char msg[128];
    qbd_last_error(msg, sizeof msg);
    printf("err=%s\n", msg);

    free(probs);
    qbd_engine_free(engine);
    qbd_params_free(params);
    return 0;
}
"#;

#[test]
fn c_program_compiles_links_and_runs() {
    // locate target/debug from the test executable's own path
    let exe = std::env::current_exe().expect("test exe path");
    let debug_dir = exe
        .parent() // deps/
        .and_then(|p| p.parent()) // debug/
        .expect("target/debug")
        .to_path_buf();
    let lib = debug_dir.join("libqbd_ffi.a");
    assert!(lib.exists(), "static library not built: {}", lib.display());

    let include_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let work = std::env::temp_dir().join(format!("qbd-cabi-{}", std::process::id()));
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    let bin = work.join("qbd_c_test");
    std::fs::write(&src, C_SOURCE).unwrap();

    let compile = Command::new("gcc")
        .arg(&src)
        .arg("-I")
        .arg(&include_dir)
        .arg(&lib)
        .args(["-lgmp", "-lmpfr", "-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&bin)
        .output()
        .expect("gcc available");
    assert!(
        compile.status.success(),
        "gcc failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&bin).output().expect("run C test");
    assert!(
        run.status.success(),
        "C program exited {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    let out = String::from_utf8_lossy(&run.stdout);
    assert!(out.contains("c=2.666666666667"), "output: {out}");
    assert!(out.contains("sum=1.000000000000"), "output: {out}");
    assert!(out.contains("err=start exponent 99 outside window"), "output: {out}");

    let _ = std::fs::remove_dir_all(work);
}
