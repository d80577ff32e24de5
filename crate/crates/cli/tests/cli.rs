use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn archcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_archcalc"))
        .args(args)
        .env_remove("ARCHCALC_SEARCH_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn torch_has_six_tiers() {
    let o = archcalc(&["tiers", path(&fixture("torch.archc")), "--max"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("max tiers: 6\n"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("tier ")).count(), 6);
}

#[test]
fn oracle_agrees_on_every_small_fixture() {
    for name in ["tn3", "tn6", "torch", "triangle", "pipeline", "wilkinson"] {
        let f = fixture(&format!("{name}.archc"));
        let search = archcalc(&["tiers", path(&f), "--max"]);
        let oracle = archcalc(&["tiers", path(&f), "--max", "--oracle"]);
        assert_eq!(search.status.code(), Some(0), "{name}");
        let first = |o: &Output| stdout(o).lines().next().unwrap().to_owned();
        assert_eq!(first(&search), first(&oracle), "{name}");
    }
}

#[test]
fn triangle_has_no_surjection_onto_t3() {
    let o = archcalc(&["hom", path(&fixture("triangle.archc")), path(&fixture("tn3.archc")), "--surjective"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "no surjective homomorphism");
}

#[test]
fn validate_reports_codes() {
    let o = archcalc(&["validate", path(&fixture("t0.archc"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "valid");

    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.archc");
    std::fs::write(&bad, "arch bad\nelements: a a\nrel r/2:\n  (a, b)\n  (a)\n").unwrap();
    let o = archcalc(&["validate", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    for code in ["DUPLICATE_ELEMENT", "DANGLING_ELEMENT", "ARITY_MISMATCH"] {
        assert!(out.contains(code), "{out}");
    }

    std::fs::write(&bad, "arch bad\nelements: a\nrel r/2\n").unwrap();
    let o = archcalc(&["validate", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PARSE_ERROR at 3:"));
}

#[test]
fn usage_errors_exit_two() {
    let o = archcalc(&["tiers", path(&fixture("t1.archc")), "--max"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NOT_BNC"));
    assert_eq!(archcalc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(archcalc(&["fixture", "nope", "--out", "x.archc"]).status.code(), Some(2));
    let t3 = fixture("tn3.archc");
    let both = archcalc(&["hom", path(&t3), path(&t3), "--iso", "--surjective"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exits_three() {
    let o = Command::new(env!("CARGO_BIN_EXE_archcalc"))
        .args(["hom", path(&fixture("torch.archc")), path(&fixture("tn6.archc")), "--surjective"])
        .env("ARCHCALC_SEARCH_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("SEARCH_BUDGET_EXCEEDED"));

    let o = Command::new(env!("CARGO_BIN_EXE_archcalc"))
        .args(["hom", path(&fixture("t1.archc")), path(&fixture("t1.archc"))])
        .env("ARCHCALC_SEARCH_BUDGET", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn witnesses_compose() {
    let dir = TempDir::new().unwrap();
    let h1 = dir.path().join("h1.archc");
    let h2 = dir.path().join("h2.archc");
    let hc = dir.path().join("hc.archc");
    let o = archcalc(&["hom", path(&fixture("pipeline.archc")), path(&fixture("tn3.archc")), "--surjective", "--witness", path(&h1)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = archcalc(&["hom", path(&fixture("t1.archc")), path(&fixture("tn3.archc")), "--witness", path(&h2)]);
    assert_eq!(o.status.code(), Some(1), "T1's id has nowhere to go in T3");
    assert!(!h2.exists());
    let o = archcalc(&["hom", path(&fixture("tn3.archc")), path(&fixture("tn3.archc")), "--iso", "--witness", path(&h2)]);
    assert_eq!(o.status.code(), Some(0));
    let o = archcalc(&["compose", path(&h1), path(&h2), "--out", path(&hc)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = archcalc(&["validate", path(&hc)]);
    assert_eq!(stdout(&v).trim(), "valid hom");

    let o = archcalc(&["compose", path(&h2), path(&h1), "--out", path(&hc)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NOT_COMPOSABLE"));
}

#[test]
fn restrict_and_subarch() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("wilkinson.archc");
    let star = fixture("wilkinson-star.archc");
    let o = archcalc(&["restrict", path(&star), "--elements", "A,x,b", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(fixture("wilkinson.archc")).unwrap());
    assert_eq!(archcalc(&["subarch", path(&out), path(&star)]).status.code(), Some(0));
    assert_eq!(archcalc(&["subarch", path(&star), path(&out)]).status.code(), Some(1));
    let o = archcalc(&["restrict", path(&star), "--elements", "A,nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tier_partition_check() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("p.archc");
    std::fs::write(&p, "partition p\ntier: ui\ntier: api\ntier: db log\n").unwrap();
    let o = archcalc(&["tiers", path(&fixture("pipeline.archc")), "--check", path(&p)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "valid 3-tier partition");
    std::fs::write(&p, "partition p\ntier: ui db\ntier: api\ntier: log\n").unwrap();
    let o = archcalc(&["tiers", path(&fixture("pipeline.archc")), "--check", path(&p)]);
    assert_eq!(o.status.code(), Some(0), "ui-api-db fit in adjacent tiers");
    std::fs::write(&p, "partition p\ntier: ui\ntier: log\ntier: db api\n").unwrap();
    let o = archcalc(&["tiers", path(&fixture("pipeline.archc")), "--check", path(&p)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dot_round_trip() {
    let dir = TempDir::new().unwrap();
    let arch = dir.path().join("p.archc");
    let dot = dir.path().join("p.dot");
    let back = dir.path().join("back.archc");
    assert_eq!(archcalc(&["import-dot", path(&fixture("pipeline.dot")), "--out", path(&arch)]).status.code(), Some(0));
    assert_eq!(archcalc(&["validate", path(&arch), "--emit-dot", path(&dot)]).status.code(), Some(0));
    assert_eq!(archcalc(&["import-dot", path(&dot), "--out", path(&back)]).status.code(), Some(0));
    let body = |p: &Path| std::fs::read_to_string(p).unwrap().lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&arch), body(&back));

    std::fs::write(&dot, "digraph g { a -> }").unwrap();
    let o = archcalc(&["import-dot", path(&dot), "--out", path(&back)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PARSE_ERROR at 1:18"));

    let o = archcalc(&["validate", path(&fixture("t1.archc")), "--emit-dot", path(&dot)]);
    assert_eq!(o.status.code(), Some(1), "T1 has a function, so it is not B&C");
}
