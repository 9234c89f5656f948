use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;
use wsticky::rewrite::RewriteError;
use wsticky::transform::TransformError;
use wsticky::Error;

const VRPT: &str = "
v(X) -> exists Y: r(X,Y).
p(X,Y) -> exists Z: p(Y,Z).
r(X,Y), r(Y,Z) -> p(X,Z).
p(X,Y), p(Y,Z) -> t(Y,Z).
";

const RSU_CYCLE: &str = "
r(X,Y), p(X,Z) -> s(X,Y,Z).
u(X) -> exists Y: r(Y,X).
s(X,Y,Z) -> u(Y).
";

const EMPLOYEES: &str = "
emp(joe). mgr(ann).
emp(X) -> exists Y: rep(X,Y).
rep(X,Y) -> mgr(Y).
";

const PC_GROUNDING: &str = "
p(a,b). c(b).
p(X,Y) -> exists Z: p(Y,Z).
p(X,Y), c(X), p(Y,Z) -> u(Y).
q() :- u(X).
";

const VRTP_SKOLEM: &str = "
v(a).
v(X) -> exists Y: r(X,Y).
r(X,Y) -> exists Z: t(X,Z).
t(X,Y), v(X) -> p(X,Y).
p(X,Y) -> exists Z: p(Y,Z).
";

const PRST_WEAK: &str = "
p(a,b). r(a,b).
p(X,Y) -> exists Z: p(Y,Z).
p(X,Y), p(Y,Z) -> s(X,Y,Z).
s(X,Y,Z), r(X,Y) -> t(Y,Z).
";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(TempDir::new().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Run {
        let out = Command::new(env!("CARGO_BIN_EXE_wsticky"))
            .args(args)
            .current_dir(self.0.path())
            .output()
            .unwrap();
        Run {
            code: out.status.code().unwrap(),
            stdout: String::from_utf8(out.stdout).unwrap(),
            stderr: String::from_utf8(out.stderr).unwrap(),
        }
    }

    fn ok(&self, args: &[&str]) -> String {
        let r = self.run(args);
        assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
        r.stdout
    }
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn classify_vrpt() {
    let d = Dir::new();
    d.file("vrpt.dl", VRPT);
    let v = json(&d.ok(&["classify", "vrpt.dl"]));
    assert_eq!(v["pi_f"], json!(["v[1]", "r[1]", "r[2]"]));
    assert_eq!(v["pi_inf"], json!(["p[1]", "p[2]", "t[1]", "t[2]"]));
    assert_eq!(v["weakly_sticky"], json!(true));
    assert_eq!(v["sticky"], json!(false));
    assert_eq!(v["weakly_acyclic"], json!(false));
}

#[test]
fn classify_rsu_cycle_and_empty() {
    let d = Dir::new();
    d.file("ex1.dl", RSU_CYCLE);
    let v = json(&d.ok(&["classify", "ex1.dl"]));
    assert_eq!(v["sticky"], json!(false));
    assert_eq!(v["weakly_acyclic"], json!(true));
    assert_eq!(
        v["marked"],
        json!([
            {"rule": 1, "var": "X"}, {"rule": 1, "var": "Z"},
            {"rule": 3, "var": "X"}, {"rule": 3, "var": "Z"},
        ])
    );

    d.file("empty.dl", "");
    let v = json(&d.ok(&["classify", "empty.dl"]));
    assert_eq!(
        v,
        json!({
            "sticky": true, "weakly_acyclic": true, "weakly_sticky": true, "zero_infinity": true,
            "pi_f": [], "pi_inf": [], "marked": [],
        })
    );
}

#[test]
fn ground_pc_grounding() {
    let d = Dir::new();
    d.file("s3.dl", PC_GROUNDING);
    assert_eq!(
        d.ok(&["ground", "s3.dl", "--resumptions", "0"]),
        "c(b).\np(a,b).\np(a,b) -> p(b,_n1).\n"
    );
    let one = d.ok(&["ground", "s3.dl", "--resumptions", "1"]);
    assert_eq!(one.lines().filter(|l| l.contains("->")).count(), 3, "{one}");
    // the query has one variable, so one resumption by default
    assert_eq!(d.ok(&["ground", "s3.dl"]), one);

    d.file("facts.dl", "p(a,b).\nq(W) :- p(W,X).\n");
    assert_eq!(d.ok(&["ground", "facts.dl"]), "p(a,b).\n");
}

#[test]
fn ground_output_reparses() {
    let d = Dir::new();
    d.file("s3.dl", PC_GROUNDING);
    let out = d.ok(&["ground", "s3.dl", "--out", "g.dl"]);
    assert!(out.is_empty());
    let v = json(&d.ok(&["classify", "g.dl"]));
    assert_eq!(v["sticky"], json!(true));
    assert_eq!(
        d.ok(&["ground", "g.dl"]),
        fs::read_to_string(d.path("g.dl")).unwrap()
    );
}

#[test]
fn answers_in_all_modes() {
    let d = Dir::new();
    d.file("emp.dl", EMPLOYEES);
    d.file("q1.dl", "q(W1) :- rep(W1,W2).");
    d.file("q2.dl", "q(W1) :- mgr(W1).");
    for mode in [
        &["--mode", "groundws"][..],
        &["--mode", "hybrid"],
        &["--mode", "oracle", "--depth", "8"],
    ] {
        let mut args = vec!["answer", "emp.dl", "--query", "q1.dl"];
        args.extend(mode);
        assert_eq!(d.ok(&args), "joe\n");
        args[3] = "q2.dl";
        assert_eq!(d.ok(&args), "ann\n");
        args.extend(["--format", "json"]);
        assert_eq!(json(&d.ok(&args)), json!({"answers": [["ann"]]}));
    }
}

#[test]
fn boolean_answers() {
    let d = Dir::new();
    d.file("s3.dl", PC_GROUNDING);
    let yes = d.ok(&["answer", "s3.dl", "--format", "json"]);
    assert_eq!(json(&yes), json!({"answers": [[]]}));
    let no = d.ok(&["answer", "s3.dl", "--resumptions", "0", "--format", "json"]);
    assert_eq!(json(&no), json!({"answers": []}));
    assert_eq!(d.ok(&["answer", "s3.dl", "--mode", "hybrid"]), "\n");
    assert_eq!(
        d.ok(&["answer", "s3.dl", "--mode", "oracle", "--depth", "6"]),
        "\n"
    );
}

#[test]
fn csv_facts() {
    let d = Dir::new();
    d.file(
        "rules.dl",
        "emp(X) -> exists Y: rep(X,Y).\nrep(X,Y) -> mgr(Y).\nq(W) :- rep(W,V).\n",
    );
    d.file("emp.csv", "joe\n\"o'neil, k\"\n");
    d.file("mgr.csv", "ann\n");
    let out = d.ok(&[
        "answer",
        "rules.dl",
        "--csv",
        "emp=emp.csv",
        "--csv",
        "mgr/1=mgr.csv",
    ]);
    assert_eq!(out, "joe\no'neil, k\n");

    d.file("other.csv", "a,b\n");
    let r = d.run(&["answer", "rules.dl", "--csv", "zzz=other.csv"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    let r = d.run(&["answer", "rules.dl", "--csv", "emp/2=other.csv"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    let r = d.run(&["answer", "rules.dl", "--csv", "emp=missing.csv"]);
    assert_eq!(r.code, 6, "{}", r.stderr);
}

#[test]
fn reduce_rank_vrtp_skolem() {
    let d = Dir::new();
    d.file("s4.dl", VRTP_SKOLEM);
    assert_eq!(
        d.ok(&["reduce-rank", "s4.dl"]),
        "v(a).\n\
         v(X) -> r_x1(X,#f1,X).\n\
         r_x1(X,Y,Y') -> t_x1(X,#f2,X).\n\
         t_x1(X,Y,Y'), v(X) -> p_x1(X,#_,Y,Y').\n\
         p_x1(X,X',Y,Y') -> exists Z: p_x1(Y,Y',Z,#_).\n"
    );
}

#[test]
fn partial_ground_prst_weak() {
    let d = Dir::new();
    d.file("ex4.dl", PRST_WEAK);
    let out = d.ok(&["partial-ground", "ex4.dl"]);
    let rules: Vec<&str> = out.lines().filter(|l| l.contains("->")).collect();
    assert_eq!(
        rules,
        vec![
            "p(X,Y) -> exists Z: p(Y,Z).",
            "p(X,Y), p(Y,Z) -> s(X,Y,Z).",
            "s(a,Y,Z), r(a,Y) -> t(Y,Z).",
            "s(b,Y,Z), r(b,Y) -> t(Y,Z).",
        ]
    );
    d.file("g.dl", &out);
    assert_eq!(json(&d.ok(&["classify", "g.dl"]))["sticky"], json!(true));
}

#[test]
fn rewrite_and_sql() {
    let d = Dir::new();
    d.file("t.dl", "t(X,Y) -> p(Y).\nq(W) :- p(W).\n");
    assert_eq!(
        d.ok(&["rewrite", "t.dl"]),
        "q(W) :- p(W).\nq(W) :- t(U1,W).\n"
    );
    // p is only derived, so only t gets a table
    assert_eq!(
        d.ok(&["emit-sql", "t.dl"]),
        "SELECT t0.c2 AS w FROM t AS t0;\n"
    );
    d.file("tp.dl", "p(a).\nt(X,Y) -> p(Y).\nq(W) :- p(W).\n");
    assert_eq!(
        d.ok(&["emit-sql", "tp.dl"]),
        "SELECT t0.c1 AS w FROM p AS t0 UNION SELECT t0.c2 AS w FROM t AS t0;\n"
    );
}

#[test]
fn stage_chain_matches_hybrid() {
    let d = Dir::new();
    d.file(
        "e5.dl",
        "v(a). s(a,b). p(c,a).
         p(X,Y) -> exists Z: p(Y,Z).
         p(X,Y), p(Y,Z) -> u(Y).
         v(X) -> exists Y: r(X,Y).
         r(X,Y), s(X,Z) -> c(Z).
         c(X) -> exists Y: p(X,Y).
         q(W) :- u(W).",
    );
    d.ok(&["reduce-rank", "e5.dl", "--out", "r.dl"]);
    d.ok(&["partial-ground", "r.dl", "--out", "g.dl"]);
    assert_eq!(json(&d.ok(&["classify", "g.dl"]))["sticky"], json!(true));
    let hybrid = d.ok(&["answer", "e5.dl", "--mode", "hybrid"]);
    assert_eq!(hybrid, "a\n");
    assert_eq!(d.ok(&["answer", "g.dl"]), hybrid);
    assert_eq!(d.ok(&["answer", "e5.dl"]), hybrid);
    assert_eq!(
        d.ok(&["answer", "e5.dl", "--mode", "oracle", "--depth", "8"]),
        hybrid
    );
}

#[test]
fn exit_codes() {
    let d = Dir::new();
    d.file("vrpt.dl", VRPT);
    d.file("bad.dl", "p(X.\n");
    d.file("arity.dl", "p(a). p(a,b).\n");
    d.file("reserved.dl", "p(X) -> q_x1(X).\n");
    d.file(
        "sticky_not.dl",
        "p(X,Y) -> exists Z: p(Y,Z).\np(X,Y), p(Y,Z) -> s(X).\nq() :- s(X).\n",
    );
    d.file("two.dl", "p(a).\nq(X) :- p(X).\nq() :- p(a).\n");
    let code = |args: &[&str]| {
        let r = d.run(args);
        assert!(r.stdout.is_empty(), "{args:?}: {}", r.stdout);
        assert!(r.stderr.starts_with("error: "), "{args:?}: {}", r.stderr);
        r.code
    };
    assert_eq!(code(&["classify", "bad.dl"]), 2);
    assert_eq!(code(&["answer", "vrpt.dl"]), 2);
    assert_eq!(code(&["answer", "two.dl"]), 2);
    assert_eq!(code(&["answer", "two.dl", "--mode", "oracle"]), 2);
    assert_eq!(code(&["classify", "vrpt.dl", "--format", "tsv"]), 2);
    assert_eq!(code(&["classify", "arity.dl"]), 3);
    assert_eq!(code(&["rewrite", "sticky_not.dl"]), 4);
    assert_eq!(code(&["partial-ground", "sticky_not.dl"]), 4);
    assert_eq!(code(&["classify", "absent.dl"]), 6);
    assert_eq!(
        code(&["classify", "vrpt.dl", "--out", "no/such/dir/x.json"]),
        6
    );
    assert_eq!(d.run(&["frobnicate"]).code, 2);
    // generated lexemes are accepted so stage outputs can be fed back
    assert_eq!(d.run(&["classify", "reserved.dl"]).code, 0);

    assert_eq!(
        Error::Rewrite(RewriteError::DisjunctCapExceeded(1)).exit_code(),
        5
    );
    assert_eq!(
        Error::Transform(TransformError::IterationCap(1)).exit_code(),
        5
    );
    assert_eq!(Error::Internal("x".into()).exit_code(), 7);
}

fn all_commands(dir: &Path) -> Vec<Vec<String>> {
    let p = dir.join("s3.dl").display().to_string();
    [
        vec!["classify"],
        vec!["ground"],
        vec!["answer"],
        vec!["answer", "--mode", "hybrid"],
        vec![
            "answer", "--mode", "oracle", "--depth", "6", "--format", "json",
        ],
        vec!["reduce-rank"],
        vec!["partial-ground"],
        vec!["rewrite"],
        vec!["emit-sql"],
    ]
    .into_iter()
    .map(|args| {
        let mut v: Vec<String> = vec![args[0].to_string(), p.clone()];
        v.extend(args[1..].iter().map(|s| s.to_string()));
        v
    })
    .collect()
}

#[test]
fn reruns_are_byte_identical() {
    let d = Dir::new();
    d.file("s3.dl", "p(a,b). c(b).\np(X,Y) -> exists Z: p(Y,Z).\np(X,Y), c(X), p(Y,Z) -> u(Y).\nq(W) :- p(W,V).\n");
    for args in all_commands(d.0.path()) {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = d.run(&args);
        let second = d.run(&args);
        assert_eq!(
            (first.code, &first.stdout),
            (second.code, &second.stdout),
            "{args:?}"
        );
        assert!(!first.stdout.is_empty() || first.code != 0, "{args:?}");
    }
}
