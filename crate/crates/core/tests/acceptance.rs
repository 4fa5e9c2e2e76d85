//! Acceptance criteria 1–14. Each test writes one PASS/FAIL line to stderr
//! (bypassing output capture) and fails on FAIL.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cqcount::algebra::{clone_set, direct_product};
use cqcount::approx::{decide_mk_equivalence, MeasureSet, MkBudget, MkVerdict};
use cqcount::chase::{chase_database, chase_query, omq_count, satisfies};
use cqcount::closure::{conjunction, expand, inclusion_exclusion_count, DEFAULT_DISJUNCT_CAP};
use cqcount::equivalence::{counting_equivalent, Class};
use cqcount::gen::*;
use cqcount::hom::{answer_automorphism_count, answers, core, count_answers, count_cq};
use cqcount::measures::{measure_report, Measure, MeasureReport};
use cqcount::recovery::{
    extract_cq_counts_from_ucq_oracle, partial_domain_count, BruteForce, OmqOracle, RecoveryBudget,
};
use cqcount::reductions::{
    core_chased_marking, mark, marked_count_via_unmarked_oracle, sharp_count_via_marked_omq_oracle,
    sharp_query, DEFAULT_FLOOD_BUDGET,
};
use cqcount::text::{parse_cq, parse_query};
use cqcount::*;

/// Counts are compared exactly.
const COUNT_TOLERANCE: u32 = 0;
/// Minimum share of non-equivalent pairs with a counterexample found.
const COUNTEREXAMPLE_RATE: f64 = 0.8;
/// Wall-clock allowance for the UCQ-to-CQ extraction criterion.
const EXTRACTION_LIMIT: Duration = Duration::from_secs(120);

const FIG1: &str = "q(x1,x2,x3,x4,x5,x6) :- T(y1,y2,y3), T(x2,x3,y4), T(x1,y4,x3), \
    R(x6,y1), R(x4,y2), R(y2,x5), x3 = x6.";

const WORKED_UCQ: &str = "q(x,y,z,t) :- R(x,y), R(y,z), A(x), A(y), A(z), A(t).\n\
    q(x,y,z,t) :- R(z,t), R(t,x), A(x), A(y), A(z), A(t).\n\
    q(x,y,z,t) :- R(y,z), R(z,t), A(x), A(y), A(z), A(t).";

type Outcome = std::result::Result<String, String>;

fn report(n: u32, name: &str, outcome: Outcome) {
    let line = match &outcome {
        Ok(detail) => format!("criterion {n:>2} PASS {name}: {detail}\n"),
        Err(detail) => format!("criterion {n:>2} FAIL {name}: {detail}\n"),
    };
    let _ = std::io::stderr().write_all(line.as_bytes());
    if let Err(e) = outcome {
        panic!("criterion {n} failed: {e}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact(a: &BigInt, b: &BigInt) -> bool {
    let diff = if a > b { a - b } else { b - a };
    diff <= BigInt::from(COUNT_TOLERANCE)
}

fn big(n: BigUint) -> BigInt {
    BigInt::from(n)
}

fn ar_schema() -> Schema {
    Schema::from_pairs([("A", 1), ("R", 2)]).unwrap()
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn rand_cq(
    r: &mut StdRng,
    s: &Schema,
    vars: std::ops::RangeInclusive<usize>,
    answers: std::ops::RangeInclusive<usize>,
    atoms: std::ops::RangeInclusive<usize>,
) -> ConjunctiveQuery {
    let shape = CqShape::new(r.gen_range(vars), r.gen_range(answers), r.gen_range(atoms));
    random_cq(r, s, shape)
}

fn small_db(rng: &mut StdRng, schema: &Schema, max_consts: usize) -> Database {
    let n = rng.gen_range(1..=max_consts);
    let density = rng.gen_range(0.2..0.7);
    random_database(rng, schema, n, density)
}

#[test]
fn criterion_01_fig1_measures() {
    let outcome = (|| {
        let q = parse_cq(FIG1, None).map_err(|e| e.to_string())?;
        let r = measure_report(&q).map_err(|e| e.to_string())?;
        let want = MeasureReport { tw: 2, ctw: 2, ss: 3, lmn: 2 };
        ensure(r == want, || format!("got {r:?}, expected {want:?}"))?;
        Ok(format!("{r:?}"))
    })();
    report(1, "measures of the six-answer example", outcome);
}

#[test]
fn criterion_02_worked_closure() {
    let outcome = (|| {
        let q = parse_query(WORKED_UCQ, None).map_err(|e| e.to_string())?;
        let e = expand(&q, &Class::all(), DEFAULT_DISJUNCT_CAP).map_err(|e| e.to_string())?;
        let mut closure: Vec<Vec<usize>> = e.closure().iter().map(|c| c.index_set.clone()).collect();
        closure.sort();
        let want = vec![vec![1], vec![1, 3], vec![2], vec![2, 3], vec![3]];
        ensure(closure == want, || format!("closure {closure:?}"))?;
        let mut coeffs: Vec<(Vec<usize>, i64)> =
            e.surviving().map(|c| (e.representative(c).index_set.clone(), c.coefficient)).collect();
        coeffs.sort();
        ensure(coeffs == vec![(vec![1], 3), (vec![1, 3], -2)], || format!("coefficients {coeffs:?}"))?;
        let p1 = conjunction(&q, &[1]).unwrap();
        let p13 = conjunction(&q, &[1, 3]).unwrap();
        let mut r = rng(2);
        for i in 0..100 {
            let d = small_db(&mut r, q.schema(), 5);
            let lhs = big(count_answers(&q, &d));
            let rhs = BigInt::from(3) * big(count_cq(&p1, &d)) - BigInt::from(2) * big(count_cq(&p13, &d));
            ensure(exact(&lhs, &rhs), || format!("database {i}: #q={lhs}, recombined={rhs}"))?;
        }
        Ok("five classes, 3·#p1 − 2·#p13 exact on 100 databases".into())
    })();
    report(2, "closure of the worked UCQ", outcome);
}

#[test]
fn criterion_03_inclusion_exclusion() {
    let outcome = (|| {
        let s = ar_schema();
        let mut r = rng(3);
        for i in 0..50 {
            let nd = r.gen_range(1..=3);
            let shape = CqShape::new(r.gen_range(1..=5), r.gen_range(0..=2), r.gen_range(1..=4));
            let q = random_ucq(&mut r, &s, nd, shape);
            let d = small_db(&mut r, &s, 4);
            let ie = inclusion_exclusion_count(&q, &d).map_err(|e| e.to_string())?;
            let direct = big(count_answers(&q, &d));
            ensure(exact(&ie, &direct), || format!("instance {i}: {ie} vs {direct}"))?;
        }
        Ok("50 random UCQs exact".into())
    })();
    report(3, "raw inclusion-exclusion", outcome);
}

#[test]
fn criterion_04_product_rule() {
    let outcome = (|| {
        let s = ar_schema();
        let mut r = rng(4);
        for i in 0..100 {
            let shape = CqShape::new(r.gen_range(1..=4), r.gen_range(0..=2), r.gen_range(1..=3));
            let q = random_cq(&mut r, &s, shape);
            let d1 = small_db(&mut r, &s, 3);
            let d2 = small_db(&mut r, &s, 3);
            let p = direct_product(&d1, &d2).map_err(|e| e.to_string())?;
            let lhs = big(count_cq(&q, &p));
            let rhs = big(count_cq(&q, &d1) * count_cq(&q, &d2));
            ensure(exact(&lhs, &rhs), || format!("instance {i}: {lhs} vs {rhs}"))?;
        }
        Ok("100 instances exact".into())
    })();
    report(4, "product rule", outcome);
}

#[test]
fn criterion_05_cloning_law() {
    let outcome = (|| {
        let s = ar_schema();
        let mut r = rng(5);
        let mut checked = 0;
        for i in 0..40 {
            let shape = CqShape::new(r.gen_range(1..=4), r.gen_range(1..=2), r.gen_range(1..=3));
            let q = random_cq(&mut r, &s, shape);
            let d = small_db(&mut r, &s, 3);
            let adom: Vec<Const> = d.adom().into_iter().collect();
            if adom.is_empty() {
                continue;
            }
            let t: BTreeSet<Const> = adom.iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
            let k = q.arity();
            let u = UnionQuery::single(q.clone());
            let mut base = vec![BigInt::from(0); k + 1];
            for tup in &answers(&u, &d).tuples {
                base[tup.iter().filter(|c| t.contains(*c)).count()] += 1;
            }
            for j in 1..=3usize {
                let cl = clone_set(&d, &t, j).map_err(|e| e.to_string())?;
                let back: BTreeMap<Const, Const> = cl
                    .classes
                    .iter()
                    .flat_map(|(c, copies)| copies.iter().map(move |x| (x.clone(), c.clone())))
                    .collect();
                let mut strata = vec![BigInt::from(0); k + 1];
                for tup in &answers(&u, &cl.database).tuples {
                    strata[tup.iter().filter(|c| t.contains(&back[*c])).count()] += 1;
                }
                for (si, (got, b)) in strata.iter().zip(&base).enumerate() {
                    let want = b * BigInt::from(j.pow(si as u32));
                    ensure(exact(got, &want), || {
                        format!("instance {i}, j={j}, stratum {si}: {got} vs {want}")
                    })?;
                }
                checked += 1;
            }
        }
        Ok(format!("{checked} cloned databases, strata scale by j^i"))
    })();
    report(5, "cloning law", outcome);
}

#[test]
fn criterion_06_partial_domain() {
    let outcome = (|| {
        let s = ar_schema();
        let mut r = rng(6);
        for i in 0..100 {
            let shape = CqShape::new(r.gen_range(1..=4), r.gen_range(0..=2), r.gen_range(1..=3));
            let nd = r.gen_range(1..=2);
            let q = random_ucq(&mut r, &s, nd, shape);
            let d = small_db(&mut r, &s, 4);
            let adom: Vec<Const> = d.adom().into_iter().collect();
            let f: BTreeSet<Const> = adom.iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
            let got = partial_domain_count(&q, &d, &f, &mut BruteForce(q.clone())).map_err(|e| e.to_string())?;
            let want = answers(&q, &d).tuples.iter().filter(|t| t.iter().all(|c| f.contains(c))).count();
            ensure(exact(&got, &BigInt::from(want)), || format!("instance {i}: {got} vs {want}"))?;
            let all = partial_domain_count(&q, &d, &d.adom(), &mut BruteForce(q.clone())).map_err(|e| e.to_string())?;
            let total = big(count_answers(&q, &d));
            ensure(exact(&all, &total), || format!("instance {i} with F = adom: {all} vs {total}"))?;
        }
        Ok("100 triples exact, F = adom gives #q".into())
    })();
    report(6, "partial-domain counting", outcome);
}

#[test]
fn criterion_07_chase() {
    let outcome = (|| {
        let s = Schema::from_pairs([("A", 1), ("R", 2), ("S", 2)]).unwrap();
        let mut r = rng(7);
        for i in 0..100 {
            let nt = r.gen_range(1..=3);
            let o = random_full_guarded_ontology(&mut r, &s, nt);
            let d = small_db(&mut r, &s, 4);
            let ch = chase_database(&d, &o).map_err(|e| e.to_string())?;
            let again = chase_database(&ch.database, &o).map_err(|e| e.to_string())?;
            ensure(again.database == ch.database && again.new_facts == 0, || format!("instance {i}: not idempotent"))?;
            let mut rev: Vec<Tgd> = o.tgds().to_vec();
            rev.reverse();
            let o2 = Ontology::new(rev).unwrap();
            let other = chase_database(&d, &o2).map_err(|e| e.to_string())?;
            ensure(other.database == ch.database, || format!("instance {i}: order dependent"))?;
            let (k, l) = cqcount::chase::head_profile(&o);
            let bound = d.len() * k.pow(k as u32) * l;
            ensure(ch.new_facts <= bound, || format!("instance {i}: {} new facts > {bound}", ch.new_facts))?;
        }
        for i in 0..50 {
            let nt = r.gen_range(1..=3);
            let o = random_full_guarded_ontology(&mut r, &s, nt);
            let a = chase_database(&small_db(&mut r, &s, 3), &o).unwrap().database;
            let b = chase_database(&small_db(&mut r, &s, 3), &o).unwrap().database;
            let p = direct_product(&a, &b).map_err(|e| e.to_string())?;
            let cp = chase_database(&p, &o).map_err(|e| e.to_string())?.database;
            ensure(cp == p, || format!("product {i}: not closed under the chase"))?;
        }
        Ok("100 instances idempotent, confluent, bounded; 50 products closed".into())
    })();
    report(7, "chase", outcome);
}

fn equivalent_variant(q: &ConjunctiveQuery, r: &mut StdRng) -> ConjunctiveQuery {
    // Copies an atom with its quantified variables renamed apart.
    let a = &q.atoms()[r.gen_range(0..q.atoms().len())];
    let copy = a.rename(|v| if q.is_answer_var(v) { v.clone() } else { Var::from(format!("{v}_c")) });
    let mut atoms = q.atoms().to_vec();
    atoms.push(copy);
    ConjunctiveQuery::new(q.schema().clone(), q.answer_vars().to_vec(), atoms, q.equalities().to_vec()).unwrap()
}

#[test]
fn criterion_08_equivalence_decider() {
    let outcome = (|| {
        let s = ar_schema();
        let mut r = rng(8);
        let all: Vec<Database> = all_databases(&s, 3).map_err(|e| e.to_string())?.collect();
        let (mut eq, mut neq, mut found) = (0usize, 0usize, 0usize);
        let mut pairs = 0;
        while pairs < 50 {
            let ans = r.gen_range(0..=2);
            let shape = CqShape::new(r.gen_range(1..=4), ans, r.gen_range(1..=3));
            let q1 = random_cq(&mut r, &s, shape);
            let q2 = if pairs % 3 == 0 { equivalent_variant(&q1, &mut r) } else { random_cq(&mut r, &s, shape) };
            if q1.arity() != q2.arity() || q2.vars().len() > 4 && pairs % 3 != 0 {
                continue;
            }
            pairs += 1;
            let v = counting_equivalent(&q1, &q2);
            if v.holds {
                eq += 1;
                for (j, d) in all.iter().enumerate() {
                    let (a, b) = (count_cq(&q1, d), count_cq(&q2, d));
                    ensure(a == b, || format!("pair {pairs}: declared equivalent but database {j} gives {a} vs {b}"))?;
                }
            } else {
                neq += 1;
                if let Some(d) = &v.counterexample {
                    ensure(count_cq(&q1, d) != count_cq(&q2, d), || format!("pair {pairs}: bogus counterexample"))?;
                    found += 1;
                }
            }
        }
        let rate = if neq == 0 { 1.0 } else { found as f64 / neq as f64 };
        ensure(rate >= COUNTEREXAMPLE_RATE, || format!("counterexamples for {found}/{neq} pairs"))?;
        Ok(format!(
            "{eq} equivalent pairs agree on all {} databases; counterexamples for {found}/{neq} others",
            all.len()
        ))
    })();
    report(8, "equivalence decider against brute force", outcome);
}

fn symmetric_pair_query(r: &mut StdRng, s: &Schema) -> ConjunctiveQuery {
    let base = rand_cq(r, s, 2..=4, 2..=2, 1..=2);
    if base.arity() != 2 {
        return base;
    }
    let (x, y) = (base.answer_vars()[0].clone(), base.answer_vars()[1].clone());
    let swap = |v: &Var| {
        if *v == x {
            y.clone()
        } else if *v == y {
            x.clone()
        } else {
            Var::from(format!("{v}_s"))
        }
    };
    let mut atoms = base.atoms().to_vec();
    atoms.extend(base.atoms().iter().map(|a| a.rename(swap)));
    ConjunctiveQuery::new(s.clone(), base.answer_vars().to_vec(), atoms, Vec::new()).unwrap()
}

#[test]
fn criterion_09_marked_recovery() {
    let outcome = (|| {
        let s = ar_schema();
        let mut r = rng(9);
        let mut symmetric = 0;
        for i in 0..50 {
            let raw = if i % 4 == 0 {
                symmetric_pair_query(&mut r, &s)
            } else {
                rand_cq(&mut r, &s, 1..=3, 0..=2, 1..=3)
            };
            let q = core(&raw);
            if answer_automorphism_count(&q) >= BigUint::from(2u32) {
                symmetric += 1;
            }
            let m = mark(&q, &Schema::new()).map_err(|e| e.to_string())?;
            let d = small_db(&mut r, m.marked_schema(), 3);
            let got = marked_count_via_unmarked_oracle(&m, &d, &mut BruteForce(q.clone().into()))
                .map_err(|e| format!("instance {i}: {e}"))?;
            let want = big(count_cq(&m.query, &d));
            ensure(exact(&got, &want), || format!("instance {i}: {got} vs {want}"))?;
        }
        ensure(symmetric >= 5, || format!("only {symmetric} instances with |I| >= 2"))?;
        Ok(format!("50 instances exact, {symmetric} with |I| >= 2"))
    })();
    report(9, "marked-count recovery", outcome);
}

#[test]
fn criterion_10_sharp_reduction() {
    let outcome = (|| {
        let s = Schema::from_pairs([("A", 1), ("R", 2), ("S", 2)]).unwrap();
        let mut r = rng(10);
        for i in 0..30 {
            let nt = r.gen_range(1..=2);
            let o = random_full_guarded_ontology(&mut r, &s, nt);
            let q = rand_cq(&mut r, &s, 1..=3, 0..=2, 1..=2);
            let omq = Omq::new(o, s.clone(), q.into()).map_err(|e| e.to_string())?;
            let star = core_chased_marking(&omq).map_err(|e| e.to_string())?;
            let sharp = sharp_query(&star.marking.base).map_err(|e| e.to_string())?;
            let d = small_db(&mut r, sharp.query.schema(), 3);
            let run = sharp_count_via_marked_omq_oracle(
                &sharp,
                &star,
                &d,
                &mut OmqOracle(star.omq.clone()),
                DEFAULT_FLOOD_BUDGET,
            )
            .map_err(|e| format!("instance {i}: {e}"))?;
            let want = big(count_cq(&sharp.query, &d));
            ensure(exact(&run.count, &want), || format!("instance {i}: {} vs {want}", run.count))?;
            let fixed = satisfies(&run.flooded, &star.omq.ontology).map_err(|e| e.to_string())?;
            ensure(fixed, || format!("instance {i}: flooded database is not chase-fixed"))?;
        }
        Ok("30 instances exact, flooded database chase-fixed in every run".into())
    })();
    report(10, "sharp-query reduction", outcome);
}

#[test]
fn criterion_11_ucq_extraction() {
    let outcome = (|| {
        let start = Instant::now();
        let q = parse_query(WORKED_UCQ, None).map_err(|e| e.to_string())?;
        let mut r = rng(11);
        for i in 0..20 {
            let d = small_db(&mut r, q.schema(), 4);
            for target in [vec![1usize], vec![1, 3]] {
                let got = extract_cq_counts_from_ucq_oracle(
                    &q,
                    &target,
                    &d,
                    &mut BruteForce(q.clone()),
                    &Class::all(),
                    RecoveryBudget::default(),
                )
                .map_err(|e| format!("database {i}, {target:?}: {e}"))?;
                let want = big(count_cq(&conjunction(&q, &target).unwrap(), &d));
                ensure(exact(&got, &want), || format!("database {i}, {target:?}: {got} vs {want}"))?;
            }
        }
        let took = start.elapsed();
        ensure(took <= EXTRACTION_LIMIT, || format!("took {took:?}"))?;
        Ok(format!("#p1 and #p13 recovered on 20 databases in {took:.1?}"))
    })();
    report(11, "UCQ-to-CQ extraction", outcome);
}

#[test]
fn criterion_12_lowering_measures() {
    let outcome = (|| {
        let mut problems = Vec::new();
        let mut r = rng(12);
        for n in [2usize, 3] {
            let (o, s, q, p) = lowering_example(n);
            let got = measure_report(&q).map_err(|e| e.to_string())?;
            let want = MeasureReport { tw: n / 2, ctw: n, ss: n, lmn: n };
            if got != want {
                problems.push(format!("n={n}: report {got:?}, expected {want:?}"));
            }
            let c = core(&chase_query(&q, &o).map_err(|e| e.to_string())?);
            let cr = measure_report(&c).map_err(|e| e.to_string())?;
            if Measure::ALL.iter().any(|m| m.of(&cr) > 1) {
                problems.push(format!("n={n}: core of the chase has {cr:?}"));
            }
            let qo = Omq::new(o.clone(), s.clone(), q.into()).unwrap();
            let po = Omq::new(o, s.clone(), p.into()).unwrap();
            for i in 0..50 {
                let d = small_db(&mut r, &s, 4);
                let (a, b) = (omq_count(&qo, &d).unwrap(), omq_count(&po, &d).unwrap());
                if a != b {
                    problems.push(format!("n={n}, database {i}: {a} vs {b}"));
                    break;
                }
            }
        }
        if problems.is_empty() {
            Ok("reports match, chased cores have measures <= 1, counts agree on 50 databases".into())
        } else {
            Err(problems.join("; "))
        }
    })();
    report(12, "measure-lowering family", outcome);
}

#[test]
fn criterion_13_approximations() {
    let outcome = (|| {
        let s = ar_schema();
        let all: Vec<Database> = all_databases(&s, 3).map_err(|e| e.to_string())?.collect();
        let mut r = rng(13);
        let mut done = 0;
        while done < 20 {
            let nt = r.gen_range(0..=2);
            let o = random_full_guarded_ontology(&mut r, &s, nt);
            let q = rand_cq(&mut r, &s, 1..=4, 0..=2, 1..=3);
            let ms: Vec<Measure> = Measure::ALL.iter().copied().filter(|_| r.gen_bool(0.5)).collect();
            let ms = if ms.is_empty() { vec![Measure::Tw] } else { ms };
            let m = MeasureSet::new(ms, r.gen_range(1..=2)).unwrap();
            if !m.admits(&q).unwrap() {
                continue;
            }
            done += 1;
            let cqs = Cqs::new(o.clone(), s.clone(), q.clone().into()).map_err(|e| e.to_string())?;
            let v = decide_mk_equivalence(&cqs, &m, &MkBudget::default()).map_err(|e| e.to_string())?;
            let MkVerdict::Equivalent(w) = v else {
                return Err(format!("instance {done}: {v:?}"));
            };
            let u = UnionQuery::single(q.clone());
            for (j, d) in all.iter().enumerate() {
                if !satisfies(d, &o).unwrap() {
                    continue;
                }
                ensure(answers(&u, d) == answers(&w, d), || {
                    format!("instance {done}: witness differs on database {j}")
                })?;
            }
        }
        let tri = parse_cq("q() :- R(a,b), R(b,c), R(c,a).", Some(&s)).unwrap();
        let cqs = Cqs::new(Ontology::empty(), s.clone(), tri.into()).unwrap();
        let m = MeasureSet::new([Measure::Tw], 1).unwrap();
        let v = decide_mk_equivalence(&cqs, &m, &MkBudget::default()).map_err(|e| e.to_string())?;
        ensure(matches!(v, MkVerdict::NotEquivalent), || format!("triangle: {v:?}"))?;
        Ok("20 instances equivalent with matching witnesses; triangle rejected".into())
    })();
    report(13, "M_k approximations", outcome);
}

#[test]
fn criterion_14_core_measures() {
    let outcome = (|| {
        let s = Schema::from_pairs([("A", 1), ("R", 2), ("T", 3)]).unwrap();
        let mut r = rng(14);
        for i in 0..100 {
            let shape = CqShape {
                vars: r.gen_range(2..=7),
                answers: r.gen_range(0..=3),
                atoms: r.gen_range(1..=6),
                equality_rate: 0.1,
            };
            let q = random_cq(&mut r, &s, shape);
            let a = measure_report(&q).map_err(|e| e.to_string())?;
            let b = measure_report(&core(&q)).map_err(|e| e.to_string())?;
            for m in Measure::ALL {
                ensure(m.of(&b) <= m.of(&a), || format!("query {i}: {m} of core {} > {}", m.of(&b), m.of(&a)))?;
            }
        }
        Ok("100 random queries".into())
    })();
    report(14, "core never raises a measure", outcome);
}
