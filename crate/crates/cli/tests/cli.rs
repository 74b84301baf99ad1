use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const NON_CONTACT: &str = r#"
seed = 3

[surface.plane]
z = ["1", "u", "v", "0"]
domain = { lo = [-1, -1, -1, -1], hi = [1, 1, 1, 1] }

[[check]]
name = "plane-contact"
kind = "contact"
surface = "plane"
tolerance = 1e-10
domain = { lo = [-1, -1, -1, -1], hi = [1, 1, 1, 1] }
samples = 10
"#;

fn hspace(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hspace"))
        .args(args)
        .env("HSPACE_REPORT_DIR", dir)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn builtin_suite_passes_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["run", "--suite", "hspace-flat", "--seed", "7", "--samples", "8", "--report"];
    let o = hspace(&[&args[..], &[a.to_str().unwrap()]].concat(), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = hspace(&[&args[..], &[b.to_str().unwrap()]].concat(), dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn failing_check_exits_one_and_still_writes_report() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("plane.toml");
    std::fs::write(&cfg, NON_CONTACT).unwrap();
    let o = hspace(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    let report = std::fs::read_to_string(dir.path().join("hspace-report.json")).unwrap();
    assert!(report.contains("plane-contact"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, format!("bogus_key = 1\n{NON_CONTACT}")).unwrap();
    let o = hspace(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus_key"));
    assert!(!dir.path().join("hspace-report.json").exists());
}

#[test]
fn unwritable_report_path_is_an_error() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("missing").join("r.json");
    let o = hspace(
        &["verify-metric", "--metric", "flat-3", "--samples", "4", "--report", target.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn subcommands_run() {
    let dir = TempDir::new().unwrap();
    let cases: [&[&str]; 4] = [
        &["verify-metric", "--metric", "round-s3", "--scalar", "6"],
        &["verify-weyl", "--weyl", "s2xr"],
        &["surface-pipeline", "--surface", "model-rotational"],
        &["calderbank", "--weyl", "flat-euclidean"],
    ];
    for args in cases {
        let o = hspace(&[args, &["--samples", "6", "--seed", "1"]].concat(), dir.path());
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stdout));
        assert!(dir.path().join("hspace-report.json").exists());
    }
}

#[test]
fn unknown_builtin_is_an_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&hspace(&["verify-metric", "--metric", "nope"], dir.path())), 2);
    assert_eq!(code(&hspace(&["run", "--suite", "nope"], dir.path())), 2);
}
