mod common;

use std::process::Command;

use ealinfer::cli::{run, Output, EXIT_NOT_TYPABLE, EXIT_SAT, EXIT_UNSAT, EXIT_USAGE};

fn ealinfer(args: &[&str]) -> Output {
    run(std::iter::once("ealinfer").chain(args.iter().copied()))
}

#[test]
fn exit_codes_follow_the_outcome() {
    let two = ealinfer(&["infer", common::TWO]);
    assert_eq!(two.code, EXIT_SAT);
    assert!(two.stdout.contains("type: !(a -o a) -o !(a -o a)"), "{}", two.stdout);
    let bad = ealinfer(&["infer", common::UNTYPABLE]);
    assert_eq!(bad.code, EXIT_UNSAT);
    assert!(bad.stdout.contains("certificate:") && bad.stdout.contains(">= 1"));
    assert_eq!(ealinfer(&["infer", "\\x.(x x)"]).code, EXIT_NOT_TYPABLE);
    assert_eq!(ealinfer(&["infer"]).code, EXIT_USAGE);
    assert_eq!(ealinfer(&["infer", "(x"]).code, EXIT_USAGE);
    assert_eq!(ealinfer(&["infer", "\\x.x", "--bound", "0"]).code, EXIT_USAGE);
    assert_eq!(ealinfer(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(ealinfer(&["--help"]).code, 0);
}

#[test]
fn pinned_types() {
    let oo = ["infer", common::SHARED_ID, "--type", "o -> o", "--pin-eal"];
    for ty in ["!o -o !o", "!(!o -o !o)"] {
        let mut a = oo.to_vec();
        a.push(ty);
        let out = ealinfer(&a);
        assert_eq!(out.code, EXIT_SAT, "{ty}: {}", out.stdout);
        assert!(out.stdout.contains(&format!("type: {ty}")));
    }
    let out = ealinfer(&["infer", "\\x.x", "--pin-eal", "!a -o a"]);
    assert_eq!(out.code, EXIT_UNSAT);
    assert_eq!(ealinfer(&["infer", "\\x.x", "--pin-eal", "a -o a -o a"]).code, EXIT_USAGE);
}

#[test]
fn check_reduce_and_oracle() {
    let ok = ealinfer(&["check", "\\x.!(\\y.(a (b y)))[x1/a, x2/b][x/x1,x2]"]);
    assert_eq!((ok.code, ok.stdout.as_str()), (0, "!(A -o A) -o !(A -o A)\n"));
    let illegal = ealinfer(&["check", "(x x)"]);
    assert_eq!(illegal.code, 1);
    assert!(illegal.stderr.contains("not legal"));
    let ill = ealinfer(&["check", "f : A -o A |- !((g y))[f/g, x/y]"]);
    assert_eq!(ill.code, 1);
    assert!(ill.stderr.contains("ill-typed"), "{}", ill.stderr);
    assert_eq!(ealinfer(&["reduce", "(\\x.x y)", "--rule", "beta"]).stdout, "y\n");
    assert_eq!(ealinfer(&["reduce", "\\x.x", "--rule", "dup"]).code, 1);
    let n = ealinfer(&["reduce", "(x y)[!(\\w.w)/x,y]", "--normalize"]);
    assert_eq!(n.code, 0);
    assert!(n.stdout.contains("\\w.w"));
    let o = ealinfer(&["oracle", "\\x.x", "--max-boxes", "1"]);
    assert_eq!(o.stdout.lines().count(), 2);
    assert_eq!(ealinfer(&["oracle", common::UNTYPABLE, "--max-boxes", "2"]).stdout, "");
    assert!(ealinfer(&["oracle", common::TWO, "--max-boxes", "2"]).stdout.contains("|- !(A -o A) -o !(A -o A)"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["infer", common::SHARED_ID, "--solutions", "4", "--trace"],
        vec!["infer", common::TWO, "--json", "--solutions", "3"],
        vec!["infer", common::UNTYPABLE, "--json"],
    ] {
        assert_eq!(ealinfer(&args), ealinfer(&args));
    }
}

#[test]
fn binary_reads_files_and_environment() {
    let exe = env!("CARGO_BIN_EXE_ealinfer");
    let dir = std::env::temp_dir().join(format!("ealinfer-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("two.lam");
    std::fs::write(&file, format!("{}\n", common::TWO)).unwrap();
    let dot = dir.join("two.dot");
    let out = Command::new(exe)
        .args(["infer", file.to_str().unwrap(), "--dot", dot.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph term {"));
    let out = Command::new(exe).args(["infer", common::TWO, "--json"]).env("EALINFER_BOUND", "3").output().unwrap();
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["bound"], 3);
    let out = Command::new(exe).args(["infer", "\\x.(x x)"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
    std::fs::remove_dir_all(&dir).unwrap();
}
