use std::path::Path;
use std::process::Command;

use uqclone::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("uqclone").chain(args.iter().copied()).map(Into::into);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn cases() -> Vec<(String, Vec<String>)> {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/cases.txt")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (name, args) = l.split_once('|').unwrap();
            (name.trim().to_string(), args.split_whitespace().map(String::from).collect())
        })
        .collect()
}

#[test]
fn in_process_output_matches_golden() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    for (name, args) in cases() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (_, out, _) = call(&args);
        let want = std::fs::read_to_string(format!("tests/golden/{name}.out")).unwrap();
        assert_eq!(out, want, "{name}");
    }
}

#[test]
fn every_verdict_line_is_well_formed() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    for (name, args) in cases() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (_, out, _) = call(&args);
        for line in out.lines().filter(|l| l.starts_with("VERDICT")) {
            let toks: Vec<&str> = line.split(' ').collect();
            assert!(toks.len() >= 3, "{name}: {line}");
            assert!(toks.iter().all(|t| !t.is_empty()), "{name}: {line}");
        }
    }
}

#[test]
fn exit_codes() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    assert_eq!(call(&["covered", "IE0"]).0, 0);
    assert_eq!(call(&["--help"]).0, 0);
    assert_eq!(call(&["frobnicate"]).0, 1);
    assert_eq!(call(&["count"]).0, 1);

    let (code, out, err) = call(&["count", "samples/does-not-exist.inst"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.starts_with("error: "), "{err}");

    let (code, _, err) = call(&["covered", "NOT_A_CLONE"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: "), "{err}");

    let (code, out, _) = call(&["count", "samples/or3.inst", "--max-vars", "3"]);
    assert_eq!(code, 2);
    assert!(out.starts_with("VERDICT budget-exceeded "), "{out}");
}

#[test]
fn dualizing_an_instance_needs_a_language_path() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let (code, _, err) = call(&["dual", "samples/sat3.inst"]);
    assert_eq!(code, 1);
    assert!(err.contains("--lang-out"), "{err}");
}

#[test]
fn binary_agrees_with_library_entry_point() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let bin = env!("CARGO_BIN_EXE_uqclone");
    for args in [vec!["count", "samples/or3.inst"], vec!["--jobs", "4", "unique", "samples/unsat3.inst"]] {
        let o = Command::new(bin).args(&args).current_dir(dir).output().unwrap();
        std::env::set_current_dir(dir).unwrap();
        let (code, out, _) = call(&args);
        assert_eq!(o.status.code(), Some(code));
        assert_eq!(String::from_utf8(o.stdout).unwrap(), out);
    }
}
