use std::path::PathBuf;
use std::process::{Command, Output};

fn palinword(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_palinword")).args(args).env_remove("PALINWORD_BUDGET").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Certificate text without the elapsed line.
fn identity(o: &Output) -> String {
    stdout(o).lines().filter(|l| !l.starts_with("elapsed_ms=")).collect::<Vec<_>>().join("\n")
}

fn field(o: &Output, key: &str) -> Option<String> {
    stdout(o).lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')).map(str::to_string))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("palinword-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&palinword(&["--help"])), 0);
    assert_eq!(code(&palinword(&["--version"])), 0);
    assert_eq!(code(&palinword(&["backtrack", "--help"])), 0);
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(code(&palinword(&[])), 3);
    assert_eq!(code(&palinword(&["frobnicate"])), 3);
    assert_eq!(code(&palinword(&["backtrack", "--constraints", "no-such-set", "--target", "5"])), 3);
    assert_eq!(code(&palinword(&["backtrack", "--alphabet", "3", "--threshold", "1/2", "--target", "5"])), 3);
    assert_eq!(code(&palinword(&["verify-morphism", "--morphism", "u4", "--alpha", "seven", "--beta", "2+"])), 3);
    assert_eq!(code(&palinword(&["census", "--text", "0.1"])), 3);
    assert_eq!(code(&palinword(&["reproduce", "9.z"])), 3);
}

#[test]
fn check_only_parses_without_running() {
    let runs: [&[&str]; 9] = [
        &["verify-morphism", "--morphism", "u609", "--alpha", "7/4+", "--beta", "52/27+", "--palindromes", "16"],
        &["backtrack", "--constraints", "4122-17-palindromes", "--target", "1000", "--expect", "exhausted"],
        &["census", "--word", "g-h", "--length", "10000"],
        &["max-exponent", "--word", "g-h", "--length", "100000", "--expect", "41/22"],
        &["core", "--constraints", "gamma-good", "--length", "186", "--compare", "gamma-eta"],
        &["rauzy", "--constraints", "16-good", "--order", "21", "--compare", "gamma-eta"],
        &["bispecial", "--triplets", "h"],
        &["critical-exponent", "--word", "g-h"],
        &["reproduce", "table1"],
    ];
    for args in runs {
        let mut v = args.to_vec();
        v.push("--check-only");
        let o = palinword(&v);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(field(&o, "result.check_only").as_deref(), Some("inputs parsed"), "{args:?}");
    }
}

#[test]
fn transfer_claims_with_their_bounds() {
    let o = palinword(&["verify-morphism", "--morphism", "u4", "--alpha", "7/4+", "--beta", "2+", "--palindromes", "7"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&o, "result.transfer").as_deref(), Some("PASS"));
    assert_eq!(field(&o, "result.t").as_deref(), Some("16"));

    let o = palinword(&["verify-morphism", "--morphism", "u25", "--alpha", "7/4+", "--beta", "9/4+", "--palindromes", "6"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&o, "result.t").as_deref(), Some("9"));

    let o = palinword(&["verify-morphism", "--morphism", "u4", "--alpha", "7/4+", "--beta", "2+", "--palindromes", "6"]);
    assert_eq!(code(&o), 1);
    assert_eq!(field(&o, "result.image_palindromes").as_deref(), Some("7"));
    assert_eq!(field(&o, "status").as_deref(), Some("REFUTED"));
}

#[test]
fn morphism_files_are_accepted() {
    let path = scratch("u4.txt");
    std::fs::write(&path, palinword::fixtures::morphism_text("u4").unwrap()).unwrap();
    let o = palinword(&["verify-morphism", "--morphism", path.to_str().unwrap(), "--alpha", "7/4+", "--beta", "2+", "--palindromes", "7"]);
    assert_eq!(code(&o), 0);
    let builtin = palinword(&["verify-morphism", "--morphism", "u4", "--alpha", "7/4+", "--beta", "2+", "--palindromes", "7"]);
    assert_eq!(field(&o, "input.morphism"), field(&builtin, "input.morphism"));
}

#[test]
fn nonuniform_morphism_is_not_applicable() {
    let o = palinword(&["verify-morphism", "--morphism", "f", "--alpha", "3", "--beta", "10/3+"]);
    assert_eq!(code(&o), 4);
    assert_eq!(field(&o, "status").as_deref(), Some("NOT-APPLICABLE"));
}

#[test]
fn backtrack_outcomes() {
    let o = palinword(&["backtrack", "--constraints", "sqfree-010-16", "--target", "1000", "--expect", "exhausted"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&o, "result.outcome").as_deref(), Some("EXHAUSTED"));

    let o = palinword(&["backtrack", "--constraints", "94-six-palindromes", "--target", "1000", "--expect", "exhausted"]);
    assert_eq!(code(&o), 0);

    let o = palinword(&["backtrack", "--alphabet", "3", "--square-free", "--target", "200"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&o, "result.outcome").as_deref(), Some("REACHED"));
    assert_eq!(field(&o, "result.witness").map(|w| w.len()), Some(200));

    let o = palinword(&["backtrack", "--constraints", "sqfree-010-16", "--target", "1000", "--expect", "reached"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn flags_extend_a_builtin_set() {
    let base = palinword(&["backtrack", "--constraints", "sqfree-010-16", "--target", "1000", "--expect", "exhausted", "--check-only"]);
    let flags = palinword(&["backtrack", "--alphabet", "3", "--square-free", "--forbid", "010", "--max-palindromes", "16", "--target", "1000", "--expect", "exhausted", "--check-only"]);
    assert_eq!(field(&base, "input.constraints"), field(&flags, "input.constraints"));
}

#[test]
fn budget_checkpoint_and_resume() {
    let cp = scratch("search.checkpoint");
    let cp_s = cp.to_str().unwrap();
    let o = palinword(&["backtrack", "--alphabet", "3", "--square-free", "--target", "3000", "--budget", "500", "--checkpoint", cp_s]);
    assert_eq!(code(&o), 2);
    assert_eq!(field(&o, "result.outcome").as_deref(), Some("BUDGET"));
    assert!(cp.exists());

    let o = palinword(&["backtrack", "--alphabet", "3", "--square-free", "--target", "3000", "--resume", cp_s]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(field(&o, "result.outcome").as_deref(), Some("REACHED"));

    // A checkpoint only resumes the search it came from.
    let o = palinword(&["backtrack", "--alphabet", "3", "--square-free", "--target", "2999", "--resume", cp_s]);
    assert_eq!(code(&o), 3);

    let env = Command::new(env!("CARGO_BIN_EXE_palinword"))
        .args(["backtrack", "--alphabet", "3", "--square-free", "--target", "3000"])
        .env("PALINWORD_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(code(&env), 2);
}

#[test]
fn certificates_are_reproducible() {
    let args = ["backtrack", "--constraints", "94-six-palindromes", "--target", "1000", "--expect", "exhausted"];
    let a = palinword(&args);
    let b = palinword(&args);
    assert_eq!(identity(&a), identity(&b));
    assert!(stdout(&a).lines().last().unwrap().starts_with("elapsed_ms="));

    // Node counts of parallel runs include the split prefixes; the rest agrees.
    let mut par = args.to_vec();
    par.extend(["--jobs", "2"]);
    let (p, q) = (palinword(&par), palinword(&par));
    assert_eq!(identity(&p), identity(&q));
    for key in ["result.outcome", "result.longest", "result.witness", "status"] {
        assert_eq!(field(&a, key), field(&p, key), "{key}");
    }

    let args = ["critical-exponent", "--word", "g-h", "--expect", "41/22"];
    assert_eq!(identity(&palinword(&args)), identity(&palinword(&args)));
}

#[test]
fn out_file_matches_stdout() {
    let path = scratch("census.cert");
    let o = palinword(&["census", "--word", "t", "--length", "10000", "--expect", "6", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&o));
}

#[test]
fn word_measurements() {
    let o = palinword(&["census", "--word", "g-h", "--length", "10000", "--expect", "16"]);
    assert_eq!(code(&o), 0);
    let o = palinword(&["census", "--text", "012012", "--expect", "5"]);
    assert_eq!(code(&o), 1);
    assert_eq!(field(&o, "result.palindromes").as_deref(), Some("4"));

    let o = palinword(&["max-exponent", "--word", "g-h", "--length", "100000", "--expect", "41/22"]);
    assert_eq!(code(&o), 0);
    let o = palinword(&["max-exponent", "--text", "0101", "--expect", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&o, "result.witness").as_deref(), Some("start=0 period=2 length=4 factor=0101"));
}

#[test]
fn bispecial_commands() {
    let o = palinword(&["bispecial", "--triplets", "h", "--steps", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&o, "result.initial_triplets").as_deref(), Some("18"));
    assert!(field(&o, "result.family.18").is_some());

    let o = palinword(&["bispecial", "--word", "g-h", "--max-len", "8"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&o, "result.bispecial.0").map(|s| s.starts_with("ε ")), Some(true));

    let o = palinword(&["critical-exponent", "--word", "g-h", "--expect", "41/22"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&o, "result.max_ratio").as_deref(), Some("19/22"));
    let o = palinword(&["critical-exponent", "--word", "t", "--expect", "2"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn graphs_and_cores() {
    let o = palinword(&["core", "--constraints", "gamma-good", "--length", "20", "--compare", "gamma-eta"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = palinword(&["rauzy", "--constraints", "16-good", "--order", "21", "--compare", "gamma-eta"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(field(&o, "result.weak_components").as_deref(), Some("2"));
    assert_eq!(field(&o, "result.reversal_symmetric").as_deref(), Some("true"));
}

#[test]
fn reproduce_claims() {
    for claim in ["3.a", "3.b", "3.c", "5", "012", "lp.c"] {
        let o = palinword(&["reproduce", claim]);
        assert_eq!(code(&o), 0, "{claim}: {}", stdout(&o));
    }
    let o = palinword(&["reproduce", "3.b"]);
    assert_eq!(field(&o, "result.3.b.image_palindromes").as_deref(), Some("6"));
    assert_eq!(field(&o, "result.3.b.transfer").as_deref(), Some("PASS"));
}
