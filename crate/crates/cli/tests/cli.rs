use std::fs;
use std::process::{Command, Output};

use modal_core::kripke::{FrameClass, Model};
use modal_core::qbf::{ladner_translate, parse_qbf};
use modal_core::parse;

fn modalred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modalred"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sat_reports_unsat_on_symmetric_frames() {
    let o = modalred(&["sat", "--class", "KB", "--formula", "p1 & <>[]~p1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "UNSAT\n");
}

#[test]
fn sat_prints_a_checkable_witness() {
    let o = modalred(&["sat", "--class", "kd", "--formula", "<>p1 & <>~p1 & []<>p2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let (head, model_text) = text.split_once("# world ").unwrap();
    assert_eq!(head, "SAT\n");
    let (world, model_text) = model_text.split_once('\n').unwrap();
    let model = Model::parse_file(model_text).unwrap();
    assert!(model.frame().is_in_class(FrameClass::KD));
    let f = parse("<>p1 & <>~p1 & []<>p2").unwrap();
    assert!(model.model_check(world.parse().unwrap(), &f).unwrap());
}

#[test]
fn unsat_with_requested_witness_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.model");
    let o = modalred(&["sat", "--class", "T", "--formula", "p1 & []~p1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn valid_and_invalid() {
    let o = modalred(&["valid", "--class", "KTB", "--formula", "p1 -> []<>p1"]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "VALID\n".to_string()));
    let o = modalred(&["valid", "--class", "K", "--formula", "[]p1 -> p1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("INVALID\n# world "));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(modalred(&["sat", "--class", "S5", "--formula", "p1"]).status.code(), Some(2));
    assert_eq!(modalred(&["sat", "--class", "K", "--formula", "p1 &"]).status.code(), Some(2));
    assert_eq!(modalred(&["fmt", "--formula", "p0"]).status.code(), Some(2));
    assert_eq!(modalred(&["qbf-eval", "--qbf", "E p2 . p2"]).status.code(), Some(2));
    assert_eq!(modalred(&["check", "--formula", "p1", "--model", "/nonexistent"]).status.code(), Some(2));
    assert_eq!(modalred(&["selftest", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn fmt_prints_canonical_text() {
    let o = modalred(&["fmt", "--formula", "((p1))&(p2|~p3)->[]p1"]);
    assert_eq!(stdout(&o), "p1 & (p2 | ~p3) -> []p1\n");
    let o = modalred(&["fmt", "--core", "--formula", "<>p1"]);
    assert_eq!(stdout(&o), "[](p1 -> false) -> false\n");
}

#[test]
fn qbf_commands() {
    let dir = tempfile::tempdir().unwrap();
    let theta = dir.path().join("theta.qbf");
    fs::write(&theta, "E p1 . p1\n").unwrap();
    let o = modalred(&["qbf-translate", "--in", theta.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let printed = parse(stdout(&o).trim()).unwrap();
    assert_eq!(printed, ladner_translate(&parse_qbf("E p1 . p1").unwrap()));

    assert_eq!(stdout(&modalred(&["qbf-eval", "--qbf", "A p1 E p2 . (p1 -> p2) & (p2 -> p1)"])), "true\n");
    assert_eq!(stdout(&modalred(&["qbf-eval", "--qbf", "E p1 A p2 . (p1 -> p2) & (p2 -> p1)"])), "false\n");

    let out = dir.path().join("w.model");
    let o = modalred(&["qbf-witness", "--qbf", "A p1 E p2 . (p1 -> p2) & (p2 -> p1)", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let model = Model::parse_file(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(model.world_count(), 5);
    let f = ladner_translate(&parse_qbf("A p1 E p2 . (p1 -> p2) & (p2 -> p1)").unwrap());
    assert!(model.model_check(0, &f).unwrap());

    assert_eq!(modalred(&["qbf-witness", "--qbf", "A p1 . p1"]).status.code(), Some(1));
}

#[test]
fn chain_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m1.model");
    let o = modalred(&["onevar-chain", "--k", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let model = Model::parse_file(&text).unwrap();
    assert_eq!(model.world_count(), 7);
    assert_eq!(model.truth_set(1), [0, 4, 5, 6].into());
    assert_eq!(model.to_file_string(), text);

    let o = modalred(&["check", "--model", out.to_str().unwrap(), "--formula", "(~p1 & []~p1) & <><>p1"]);
    assert_eq!(stdout(&o), "2\n");
    let o = modalred(&["check", "--model", out.to_str().unwrap(), "--formula", "p1", "--world", "4"]);
    assert_eq!(stdout(&o), "true\n");
}

#[test]
fn attach_links_roots() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m.model");
    fs::write(&input, "worlds 1\nrel 0 0\nval p1 0\nval p2 0\n").unwrap();
    let o = modalred(&["onevar-attach", "--model", input.to_str().unwrap(), "--n", "1", "--class", "KTB"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# r1 1\n# r2 8\n"));
    let model = Model::parse_file(&text).unwrap();
    assert_eq!(model.world_count(), 21);
    assert!(model.frame().has_edge(0, 1) && model.frame().has_edge(8, 0));

    let o = modalred(&["onevar-attach", "--model", input.to_str().unwrap(), "--n", "2", "--class", "KTB"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn star_and_embed_use_one_variable() {
    for cmd in ["onevar-star", "onevar-embed"] {
        let o = modalred(&[cmd, "--formula", "[]p1 -> <>p2"]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(parse(stdout(&o).trim()).unwrap().vars(), [1].into());
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["sat", "--class", "KB", "--formula", "<>p1 & <>~p1 & [](p1 -> <>p2)"];
    assert_eq!(modalred(&args).stdout, modalred(&args).stdout);
    let args = ["selftest", "--suite", "chain"];
    assert_eq!(modalred(&args).stdout, modalred(&args).stdout);
}

#[test]
fn selftest_runs_one_suite() {
    let o = modalred(&["selftest", "--suite", "lemma3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("PASS lemma3"));
}
