use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const FIG1: &str = "q(x1,x2,x3,x4,x5,x6) :- T(y1,y2,y3), T(x2,x3,y4), T(x1,y4,x3), \
    R(x6,y1), R(x4,y2), R(y2,x5), x3 = x6.\n";

const UNION: &str = "[schema]\nrel R/2; rel A/1;\n[tgds]\n[query]\n\
    q(x,y,z,t) :- R(x,y), R(y,z), A(x), A(y), A(z), A(t).\n\
    q(x,y,z,t) :- R(z,t), R(t,x), A(x), A(y), A(z), A(t).\n\
    q(x,y,z,t) :- R(y,z), R(z,t), A(x), A(y), A(z), A(t).\n";

const TRIANGLE: &str = "R(a,b). R(b,c). R(c,a). A(a). A(b). A(c).\n";

const GUARDED: &str = "[schema]\nrel R/2;\n[tgds]\nR(x,y) -> S(x,y).\n[query]\nq(x) :- R(x,y), S(y,z).\n";

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(TempDir::new().expect("temp dir"))
    }
    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).expect("write fixture");
        p
    }
}

fn run<P: AsRef<Path>>(args: &[&str], files: &[P]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cqcount"));
    c.args(args);
    for f in files {
        c.arg(f.as_ref());
    }
    c.output().expect("run cqcount")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("JSON output")
}

#[test]
fn count_prints_decimal() {
    let d = Dir::new();
    let q = d.file("q.cq", "q(x) :- R(x,y).\n");
    let db = d.file("d.db", TRIANGLE);
    let o = run(&["count"], &[q, db]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3\n");
}

#[test]
fn measure_json_matches_report() {
    let d = Dir::new();
    let q = d.file("fig1.cq", FIG1);
    let v = json(&run(&["measure", "--json"], &[q]));
    assert_eq!(v, serde_json::json!({"tw": 2, "ctw": 2, "ss": 3, "lmn": 2}));
}

#[test]
fn measure_decomposition_has_bags() {
    let d = Dir::new();
    let q = d.file("fig1.cq", FIG1);
    let v = json(&run(&["measure", "--json", "--decomposition"], &[q]));
    assert!(!v["decomposition"]["bags"].as_array().unwrap().is_empty());
}

#[test]
fn closure_lists_members_and_coefficients() {
    let d = Dir::new();
    let q = d.file("union.omq", UNION);
    let o = run(&["closure"], &[&q]);
    let text = stdout(&o);
    assert!(text.starts_with("closure: {1} {2} {3} {1,3} {2,3}\n"), "{text}");
    assert!(text.contains("+3 {1}"));
    assert!(text.contains("-2 {1,3}"));
    let v = json(&run(&["closure", "--json"], &[&q]));
    assert_eq!(v["closure"].as_array().unwrap().len(), 5);
    let mut cs: Vec<i64> = v["classes"].as_array().unwrap().iter().map(|c| c["coefficient"].as_i64().unwrap()).collect();
    cs.sort();
    assert_eq!(cs, vec![-2, 3]);
}

#[test]
fn union_count_and_extraction_agree_with_brute_force() {
    let d = Dir::new();
    let q = d.file("union.omq", UNION);
    let db = d.file("d.db", TRIANGLE);
    assert_eq!(stdout(&run(&["count"], &[&q, &db])), "21\n");
    let v = json(&run(&["--json", "recover", "extract", "--target", "1,3"], &[&q, &db]));
    assert_eq!(v["count"], serde_json::json!(3));
}

#[test]
fn answers_and_core() {
    let d = Dir::new();
    let q = d.file("q.cq", "q(x) :- R(x,y), R(x,z).\n");
    let db = d.file("d.db", "R(a,b). R(c,c).\n");
    assert_eq!(stdout(&run(&["answers"], &[&q, &db])), "(a)\n(c)\n");
    assert_eq!(stdout(&run(&["core"], &[&q])).matches("R(").count(), 1);
}

#[test]
fn chase_adds_derived_facts() {
    let d = Dir::new();
    let t = d.file("t.tgd", "R(x,y) -> S(x,y).\n");
    let db = d.file("d.db", "R(a,b).\n");
    let v = json(&run(&["--json", "chase"], &[t, db]));
    assert_eq!(v["new_facts"], serde_json::json!(1));
    assert!(v["database"].as_str().unwrap().contains("S(a, b)"));
}

#[test]
fn containment_and_equivalence() {
    let d = Dir::new();
    let a = d.file("a.cq", "q(x) :- R(x,y).\n");
    let b = d.file("b.cq", "q(x) :- R(x,y), R(y,z).\n");
    assert_eq!(stdout(&run(&["contains"], &[&b, &a])), "true\n");
    assert_eq!(stdout(&run(&["contains"], &[&a, &b])), "false\n");
    let v = json(&run(&["--json", "equiv", "--counting"], &[&a, &b]));
    assert_eq!(v["holds"], serde_json::json!(false));
    assert!(v["counterexample"].is_string());
    let t = d.file("t.tgd", "R(x,y) -> R(y,x).\n");
    let v = json(&run(&["--json", "equiv", "--ontology", t.to_str().unwrap()], &[&a, &b]));
    assert_eq!(v["holds"], serde_json::json!(true));
}

#[test]
fn recovery_with_brute_and_external_oracle() {
    let d = Dir::new();
    let q = d.file("q.cq", "q(x,y) :- R(x,y).\n");
    let db = d.file("d.db", "R(a,b). R(b,c). R(c,a). R(a,a).\n");
    let o = run(&["recover", "partial-domain", "--domain", "a,b"], &[&q, &db]);
    assert_eq!(stdout(&o), "2\n");
    let o = run(&["recover", "strata", "--set", "a"], &[&q, &db]);
    assert_eq!(stdout(&o), "0: 1\n1: 2\n2: 1\n");
    // A constant external oracle is a constant polynomial in the clone count.
    let o = run(&["--oracle", "cmd:cat >/dev/null; echo 5", "recover", "partial-domain", "--domain", "a"], &[&q, &db]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "5\n");
    let o = run(&["--oracle", "cmd:echo nope", "recover", "partial-domain", "--domain", "a"], &[&q, &db]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reductions_run() {
    let d = Dir::new();
    let q = d.file("g.omq", GUARDED);
    let text = stdout(&run(&["reduce", "mark"], &[&q]));
    assert!(text.contains("M_x"), "{text}");
    let v = json(&run(&["--json", "reduce", "sharp"], &[&q]));
    let sharp = v["sharp_query"].as_str().unwrap().to_string();
    assert!(sharp.contains("G_"), "{sharp}");
}

#[test]
fn approximations() {
    let d = Dir::new();
    let q = d.file("union.omq", UNION);
    let o = run(&["approx", "ctw", "--k", "1"], &[&q]);
    assert_eq!(o.status.code(), Some(0));
    let g = d.file("g.omq", GUARDED);
    let v = json(&run(&["--json", "approx", "mk", "--k", "1", "--measures", "tw"], &[&g]));
    assert_eq!(v["equivalent"], serde_json::json!(true));
    let o = run(&["approx", "mk", "--k", "1", "--measures", "bogus"], &[&g]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn witness_separates_disjuncts() {
    let d = Dir::new();
    let q = d.file("union.omq", UNION);
    let o = run(&["witness"], &[&q]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).trim().is_empty());
}

#[test]
fn selftest_is_deterministic() {
    let a = run::<&str>(&["--json", "--seed", "7", "selftest", "--cases", "10"], &[]);
    let b = run::<&str>(&["--json", "--seed", "7", "selftest", "--cases", "10"], &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["suites"].as_array().unwrap().len(), 8);
}

#[test]
fn parse_json_export() {
    let d = Dir::new();
    let q = d.file("g.omq", GUARDED);
    let v = json(&run(&["--json", "parse"], &[&q]));
    assert_eq!(v["kind"], serde_json::json!("omq"));
}

#[test]
fn exit_codes() {
    let d = Dir::new();
    let q = d.file("q.cq", "q(x) :- R(x,y).\n");
    let bad = d.file("bad.cq", "q(x) :- R(x,.\n");
    let db = d.file("d.db", TRIANGLE);
    assert_eq!(run::<&str>(&["frobnicate"], &[]).status.code(), Some(2));
    assert_eq!(run(&["count"], &[&q, &d.0.path().join("missing.db")]).status.code(), Some(2));
    assert_eq!(run(&["count"], &[&q, &d.file("d.txt", "")]).status.code(), Some(2));
    assert_eq!(run(&["count"], &[&bad, &db]).status.code(), Some(1));
    assert_eq!(run(&["--timeout", "0", "selftest", "--cases", "100000"], &[] as &[&str]).status.code(), Some(3));
}
