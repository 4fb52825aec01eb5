//! CLI half of the acceptance suite: rerunning `run` with identical flags
//! must produce byte-identical CSV output.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_layercast"))
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!(
        "layercast-acceptance-{}-{name}",
        std::process::id()
    ));
    p
}

#[test]
fn rerun_is_byte_identical() {
    let out_a = temp_path("a.csv");
    let out_b = temp_path("b.csv");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args([
                "run",
                "--nodes",
                "25",
                "--receivers",
                "5",
                "--layers",
                "2",
                "--scheme",
                "pushback",
                "--criterion",
                "mincut",
                "--schedule",
                "sequential",
                "--field",
                "2^10",
                "--trials",
                "200",
                "--seed",
                "314159",
                "--out",
            ])
            .arg(out)
            .status()
            .expect("binary runs");
        assert!(status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    let pass = a == b && !a.is_empty();
    println!(
        "[acceptance] replay determinism: {} — two identical `run` invocations, {} bytes each, byte-identical: {}",
        if pass { "PASS" } else { "FAIL" },
        a.len(),
        a == b
    );
    let _ = std::fs::remove_file(&out_a);
    let _ = std::fs::remove_file(&out_b);
    assert!(pass);
}
