use std::path::PathBuf;
use std::process::{Command, Output};

use modalpd::report::ReportDocument;

fn modalpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modalpd"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn agent_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("modalpd-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn check_builtin_file() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/agents/builtin.agents");
    let o = modalpd(&["check", path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("8 agents OK"), "{out}");
    assert!(
        out.lines()
            .any(|l| l.starts_with("PrudentBot") && l.contains("  1  ")),
        "{out}"
    );
    assert!(stderr(&o).is_empty());

    let o = modalpd(&["check", path, "--json"]);
    let doc = ReportDocument::from_json(&stdout(&o)).unwrap();
    assert_eq!(doc.agents.len(), 8);
}

#[test]
fn check_reports_rule_violations() {
    let bad = agent_file("bad.agents", "agent Bad(Opp) := Opp(Self)\n");
    let o = modalpd(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not fully modalized"), "{}", stderr(&o));

    let cyclic = agent_file(
        "cyclic.agents",
        "agent A(Opp) := [] Opp(B)\nagent B(Opp) := [] Opp(A)\n",
    );
    let o = modalpd(&["check", cyclic.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cyclic reference"), "{}", stderr(&o));

    let syntax = agent_file("syntax.agents", "agent C(Opp) := [](Opp(Self)\n");
    let o = modalpd(&["check", syntax.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1, column 29"), "{}", stderr(&o));
}

#[test]
fn play_examples() {
    let o = modalpd(&["play", "FairBot", "FairBot"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("C C, PA ⊢ both"));

    let o = modalpd(&["play", "PrudentBot", "DefectBot", "--trace"]);
    let out = stdout(&o);
    assert!(out.contains(": D D,"), "{out}");
    assert!(out.contains("trace PrudentBot(DefectBot): T,F,"), "{out}");
    assert!(out.contains("PA+1 ⊢ [PrudentBot(DefectBot)=D]"), "{out}");

    let o = modalpd(&["play", "FairBot", "WaitFairBot<0>", "--trace"]);
    let out = stdout(&o);
    assert!(out.contains(": D D,"), "{out}");
    assert!(out.contains("trace FairBot(WaitFairBot<0>): T,F,F"), "{out}");
    assert!(out.contains("trace WaitFairBot<0>(FairBot): F,T,F"), "{out}");
}

#[test]
fn play_json() {
    let o = modalpd(&[
        "play",
        "PrudentBot",
        "CooperateBot",
        "--json",
        "--payoffs",
        "7/2,3,1,0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let doc = ReportDocument::from_json(&text).unwrap();
    assert_eq!(doc.to_json(), text);
    assert_eq!(doc.schema_version, "1");
    let m = &doc.matches[0];
    assert_eq!(m.proof_levels, [Some(2), Some(0)]);
    assert_eq!(m.payoffs, ["7/2".to_string(), "0".to_string()]);
    for side in &m.sides {
        assert!(side.trace.len() >= side.stabilization);
        modalpd::parse_formula(&side.normal_form).unwrap();
    }
    assert!(doc.warnings.is_empty());

    let o = modalpd(&["play", "FairBot", "FairBot", "--json", "--payoffs", "9,3,1,0"]);
    let doc = ReportDocument::from_json(&stdout(&o)).unwrap();
    assert_eq!(doc.warnings.len(), 1, "{:?}", doc.warnings);
}

#[test]
fn play_errors() {
    let o = modalpd(&["play", "FairBot", "Nobody"]);
    assert_eq!(o.status.code(), Some(1));
    let o = modalpd(&["play", "FairBot", "CliqueBot"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("syntactic"));
    let o = modalpd(&["play", "CliqueBot", "CliqueBot"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("C C"));
    let o = modalpd(&["play", "FairBot", "WaitFairBot<65>"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tournament_matrix() {
    let o = modalpd(&[
        "tournament",
        "--roster",
        "CooperateBot,DefectBot,FairBot,PrudentBot",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .skip(1)
        .take(4)
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect();
    let actions: Vec<Vec<&str>> = rows
        .iter()
        .map(|r| r[1..5].iter().map(String::as_str).collect())
        .collect();
    assert_eq!(
        actions,
        vec![
            vec!["C", "C", "C", "C"],
            vec!["D", "D", "D", "D"],
            vec!["C", "D", "C", "C"],
            vec!["D", "D", "C", "C"],
        ]
    );

    let o = modalpd(&["tournament", "--roster", "FairBot", "--json"]);
    let doc = ReportDocument::from_json(&stdout(&o)).unwrap();
    assert_eq!(doc.matches.len(), 1);
    assert_eq!(doc.scores.unwrap()[0].score, "3");
}

#[test]
fn searches() {
    let o = modalpd(&["search", "exploiter", "FairBot", "--max-nodes", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("none found ("));

    let o = modalpd(&["search", "distinguisher", "FairBot", "PrudentBot"]);
    assert!(stdout(&o).starts_with("found Z"), "{}", stdout(&o));

    let o = modalpd(&["search", "rank0-theorem", "--max-nodes", "5"]);
    assert!(stdout(&o).starts_with("0 violations / "), "{}", stdout(&o));

    let o = modalpd(&["search", "exploiter", "FairBot", "--max-nodes", "12"]);
    assert_eq!(o.status.code(), Some(1));
    let o = modalpd(&["search", "exploiter", "FairBot", "--sub-agents", "PrudentBot"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("rank-0 sub-agents"), "{}", stderr(&o));
}
