use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use actgram::grammar::load_grammar;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn actgram(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_actgram")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn induce_writes_a_valid_grammar() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g.pcfg");
    let r = actgram(&["induce", "--algo", "kari", "--n-key", "1", path(&fixtures().join("coffee.txt")), "-o", path(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let g = load_grammar(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(g.var_id("VR_1").is_some());
}

#[test]
fn parse_prints_toy_result() {
    let r = actgram(&[
        "parse",
        "--grammar",
        path(&fixtures().join("toy.pcfg")),
        "--probs",
        path(&fixtures().join("toy_uniform.csv")),
    ]);
    assert!(r.status.success());
    let text = String::from_utf8(r.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1 x5 x6"));
    assert!(text.contains("grammar_prob\t0.245000000"), "{text}");
}

#[test]
fn metrics_on_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let labels = tmp.path().join("a.labels");
    std::fs::write(&labels, "a\na\nb\nc\nc\n").unwrap();
    let r = actgram(&["metrics", path(&labels), path(&labels)]);
    let text = String::from_utf8(r.stdout).unwrap();
    assert_eq!(text, "edit\t100.0000\nf1@10\t100.0000\nf1@25\t100.0000\nf1@50\t100.0000\naccuracy\t100.0000\n");
}

#[test]
fn unknown_flags_are_rejected_on_one_line() {
    let r = actgram(&["parse", "--bogus"]);
    assert_eq!(r.status.code(), Some(2));
    assert_eq!(String::from_utf8(r.stderr).unwrap().trim().lines().count(), 1);
}

#[test]
fn runtime_errors_are_single_line() {
    let r = actgram(&["induce", "/nonexistent/corpus.txt"]);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8(r.stderr).unwrap();
    assert_eq!(err.trim().lines().count(), 1);
    assert!(err.starts_with("error: "), "{err}");
}

#[test]
fn flag_beats_config_beats_default() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    let coffee = fixtures().join("coffee.txt");
    std::fs::write(&cfg, "algo = flat\n").unwrap();
    let from_config = actgram(&["--config", path(&cfg), "induce", path(&coffee)]);
    let from_flag = actgram(&["induce", "--algo", "flat", path(&coffee)]);
    let default = actgram(&["induce", path(&coffee)]);
    assert!(from_config.status.success() && from_flag.status.success());
    assert_eq!(from_config.stdout, from_flag.stdout);
    assert_ne!(default.stdout, from_flag.stdout);

    std::fs::write(&cfg, "algo = right-regular\n").unwrap();
    let overridden = actgram(&["--config", path(&cfg), "induce", "--algo", "flat", path(&coffee)]);
    assert_eq!(overridden.stdout, from_flag.stdout);

    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert!(!actgram(&["--config", path(&cfg), "induce", path(&coffee)]).status.success());
}

#[test]
fn output_directory_is_not_clobbered() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    std::fs::create_dir(&dir).unwrap();
    std::fs::write(dir.join("keep.txt"), "x").unwrap();
    let r = actgram(&["synth", "--videos", "2", "-o", path(&dir)]);
    assert!(!r.status.success());
    assert!(dir.join("keep.txt").exists());
    let r = actgram(&["synth", "--videos", "2", "--force", "-o", path(&dir)]);
    assert!(r.status.success());
    assert!(dir.join("manifest.txt").exists() && !dir.join("keep.txt").exists());
    let leftovers = std::fs::read_dir(tmp.path()).unwrap().count();
    assert_eq!(leftovers, 1);
}

#[test]
fn version_is_printed() {
    let r = actgram(&["--version"]);
    assert!(r.status.success());
    assert_eq!(String::from_utf8(r.stdout).unwrap().trim(), "actgram 0.1.0");
}

#[test]
fn refine_on_generated_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fx");
    assert!(actgram(&["synth", "--videos", "3", "-o", path(&dir)]).status.success());
    let r = actgram(&[
        "refine",
        "--grammar",
        path(&dir.join("self.pcfg")),
        "--manifest",
        path(&dir.join("manifest_clean.txt")),
        "--stride",
        "4",
        "-o",
        path(&tmp.path().join("report.csv")),
    ]);
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("after edit 100.0000"), "{text}");
}

#[test]
fn bundled_coffee_grammar_loads() {
    let g = load_grammar(&std::fs::read_to_string(fixtures().join("coffee_breakfast.pcfg")).unwrap()).unwrap();
    let seq: Vec<String> = ["SIL", "take cup", "pour coffee", "pour milk", "spoon sugar", "stir coffee", "SIL"]
        .map(String::from)
        .to_vec();
    assert!(actgram::parser::accepts(&g, &seq));
    assert!(!actgram::parser::accepts(&g, &seq[1..]));
}
