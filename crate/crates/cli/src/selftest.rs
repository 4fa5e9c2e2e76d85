//! Seeded property suites checked against brute-force oracles.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use cqcount::algebra::direct_product;
use cqcount::chase::chase_database;
use cqcount::closure::inclusion_exclusion_count;
use cqcount::gen::*;
use cqcount::hom::{answers, core, count_answers, count_answers_by_assignment, count_cq};
use cqcount::recovery::{partial_domain_count, BruteForce};
use cqcount::reductions::{mark, marked_count_via_unmarked_oracle};
use cqcount::text::{parse_query, serialize_ucq};
use cqcount::{ConjunctiveQuery, Database, Schema, UnionQuery};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub cases: usize,
    pub failure: Option<String>,
}

type Check = fn(&mut ChaCha8Rng) -> Result<(), String>;

fn schema() -> Schema {
    Schema::from_pairs([("A", 1), ("R", 2)]).expect("valid schema")
}

fn cq(r: &mut ChaCha8Rng) -> ConjunctiveQuery {
    let shape = CqShape {
        vars: r.gen_range(1..=4),
        answers: r.gen_range(0..=2),
        atoms: r.gen_range(1..=3),
        equality_rate: 0.0,
    };
    random_cq(r, &schema(), shape)
}

fn ucq(r: &mut ChaCha8Rng) -> UnionQuery {
    let shape = CqShape {
        vars: r.gen_range(1..=4),
        answers: r.gen_range(0..=2),
        atoms: r.gen_range(1..=3),
        equality_rate: 0.2,
    };
    let n = r.gen_range(1..=3);
    random_ucq(r, &schema(), n, shape)
}

fn db(r: &mut ChaCha8Rng, s: &Schema) -> Database {
    let n = r.gen_range(1..=4);
    let density = r.gen_range(0.2..0.7);
    random_database(r, s, n, density)
}

fn counting(r: &mut ChaCha8Rng) -> Result<(), String> {
    let q = ucq(r);
    let d = db(r, &schema());
    let (a, b) = (count_answers(&q, &d), count_answers_by_assignment(&q, &d));
    (a == b).then_some(()).ok_or(format!("{} on {d:?}: {a} vs {b}", serialize_ucq(&q)))
}

fn product(r: &mut ChaCha8Rng) -> Result<(), String> {
    let q = cq(r);
    let (d1, d2) = (db(r, &schema()), db(r, &schema()));
    let p = direct_product(&d1, &d2).map_err(|e| e.to_string())?;
    let (a, b) = (count_cq(&q, &p), count_cq(&q, &d1) * count_cq(&q, &d2));
    (a == b).then_some(()).ok_or(format!("{q:?}: {a} vs {b}"))
}

fn inclusion_exclusion(r: &mut ChaCha8Rng) -> Result<(), String> {
    let q = ucq(r);
    let d = db(r, &schema());
    let a = inclusion_exclusion_count(&q, &d).map_err(|e| e.to_string())?;
    let b = BigInt::from(count_answers(&q, &d));
    (a == b).then_some(()).ok_or(format!("{}: {a} vs {b}", serialize_ucq(&q)))
}

fn chase(r: &mut ChaCha8Rng) -> Result<(), String> {
    let s = Schema::from_pairs([("A", 1), ("R", 2), ("S", 2)]).expect("valid schema");
    let n = r.gen_range(1..=3);
    let o = random_full_guarded_ontology(r, &s, n);
    let d = db(r, &s);
    let once = chase_database(&d, &o).map_err(|e| e.to_string())?.database;
    let twice = chase_database(&once, &o).map_err(|e| e.to_string())?.database;
    (once == twice).then_some(()).ok_or("chase is not idempotent".to_string())
}

fn partial_domain(r: &mut ChaCha8Rng) -> Result<(), String> {
    let q = ucq(r);
    let d = db(r, &schema());
    let f: BTreeSet<_> = d.adom().into_iter().filter(|_| r.gen_bool(0.5)).collect();
    let got = partial_domain_count(&q, &d, &f, &mut BruteForce(q.clone())).map_err(|e| e.to_string())?;
    let want = answers(&q, &d).tuples.iter().filter(|t| t.iter().all(|c| f.contains(c))).count();
    (got == BigInt::from(want)).then_some(()).ok_or(format!("{}: {got} vs {want}", serialize_ucq(&q)))
}

fn marked(r: &mut ChaCha8Rng) -> Result<(), String> {
    let q = core(&cq(r));
    let m = mark(&q, &Schema::new()).map_err(|e| e.to_string())?;
    let d = db(r, m.marked_schema());
    let got = marked_count_via_unmarked_oracle(&m, &d, &mut BruteForce(q.clone().into())).map_err(|e| e.to_string())?;
    let want = BigInt::from(count_cq(&m.query, &d));
    (got == want).then_some(()).ok_or(format!("{q:?}: {got} vs {want}"))
}

fn cores(r: &mut ChaCha8Rng) -> Result<(), String> {
    let q = cq(r);
    let c = core(&q);
    let d = db(r, &schema());
    let (a, b) = (answers(&q.clone().into(), &d), answers(&c.clone().into(), &d));
    (a == b).then_some(()).ok_or(format!("core of {q:?} changes answers"))
}

fn round_trip(r: &mut ChaCha8Rng) -> Result<(), String> {
    let q = ucq(r);
    let text = serialize_ucq(&q);
    let back = parse_query(&text, Some(q.schema())).map_err(|e| format!("{text}: {e}"))?;
    (back == q).then_some(()).ok_or(format!("round trip changed {text}"))
}

const SUITES: [(&str, Check); 8] = [
    ("count-vs-assignment", counting),
    ("product-rule", product),
    ("inclusion-exclusion", inclusion_exclusion),
    ("chase-idempotent", chase),
    ("partial-domain", partial_domain),
    ("marked-recovery", marked),
    ("core-preserves-answers", cores),
    ("text-round-trip", round_trip),
];

pub fn run(seed: u64, cases: usize) -> Vec<SuiteResult> {
    SUITES
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut r = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut failure = None;
            let mut done = 0;
            for case in 0..cases {
                done += 1;
                if let Err(e) = check(&mut r) {
                    failure = Some(format!("case {case}: {e}"));
                    break;
                }
            }
            SuiteResult {
                suite: name,
                cases: done,
                failure,
            }
        })
        .collect()
}
