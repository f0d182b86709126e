//! End-to-end checks of the command-line interface: report contents, exit
//! codes, and reproducibility.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_outerlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn dist_two_roses_fixture() {
    let out = run(&["dist", "rose:1/2,1/2", "rose:1/3,2/3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("forward = 4/3"), "{text}");
    assert!(text.contains("backward = 3/2"), "{text}");
    assert!(text.contains("exp_d = 2/1"), "{text}");
    // byte-identical on rerun
    let again = run(&["dist", "rose:1/2,1/2", "rose:1/3,2/3"]);
    assert_eq!(text, String::from_utf8(again.stdout).unwrap());
}

#[test]
fn primitive_exit_codes() {
    let out = run(&["primitive", "aab"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("basis = {"), "{text}");
    assert!(text.contains("aab"), "{text}");
    // non-primitive class: certification failed
    assert_eq!(run(&["primitive", "abab"]).status.code(), Some(3));
}

#[test]
fn invalid_input_is_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["dist", "rose:0,1", "rose:1/2,1/2"]).status.code(), Some(2));
    assert_eq!(run(&["primitive", "a?b"]).status.code(), Some(2));
}

#[test]
fn common_factor_reports() {
    let out = run(&["common-factor", "a", "b", "--rank", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict = contained"), "{text}");

    let out = run(&["common-factor", "a", "ab", "--rank", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("verdict = fills"));
}

#[test]
fn schottky_and_min_from_config() {
    let dir = std::env::temp_dir().join(format!("outerlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.txt");
    std::fs::write(
        &cfg,
        "name = cli\nrank = 2\neps = 1/20\ndepth = 4\ngrid = -1,0,1\nB = 20\nsamples = 3\nseed = 5\nk = 4\nL_free = 2\nL_orbit = 2\n",
    )
    .unwrap();
    let out = run(&["schottky", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("freeness = free-at-(k=4, L=2)"), "{text}");
    assert!(text.contains("config_hash = "), "{text}");

    let out = run(&["min", "abAB:1", "--eps", "1/20"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("min_value = 2/1"));
    std::fs::remove_dir_all(&dir).ok();
}
