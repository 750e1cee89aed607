use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn szlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn help_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = szlab(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("bound-sweep"));
}

#[test]
fn coeffs_reports_entropy_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = szlab(&["coeffs", "--g", "eta:1", "--s", "1.0"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("0.0833333"), "{text}");
    assert!(dir.path().join("config.resolved.toml").exists());
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = szlab(&["szego", "--config", missing.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(64));
    let o = szlab(&["szego", "--frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(64));
    let o = szlab(&["coeffs", "--g", "no_such_function"], dir.path());
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn violated_constraint_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ps.toml");
    fs::write(&cfg, "theorem = \"ps\"\np = 1.0\nfunction = \"bump\"\n").unwrap();
    let o = szlab(&["bound-sweep", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["bound-sweep", "--theorem", "bks", "--trials", "3", "--seed", "11"];
    let oa = szlab(&args, &a);
    let ob = szlab(&args, &b);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(oa.stdout, ob.stdout);
    for name in ["bounds.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}
