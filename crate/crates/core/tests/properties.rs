use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cqcount::algebra::direct_product;
use cqcount::chase::{chase_database, satisfies};
use cqcount::closure::inclusion_exclusion_count;
use cqcount::gen::{random_cq, random_database, random_full_guarded_ontology, random_ucq, CqShape};
use cqcount::hom::{answers, contained_in, core, count_answers, count_answers_by_assignment, count_cq};
use cqcount::recovery::{partial_domain_count, recover_hom_strata, BruteForce};
use cqcount::reductions::{mark, marked_count_via_unmarked_oracle};
use cqcount::text::{parse_query, serialize_ucq};
use cqcount::{ConjunctiveQuery, Database, Schema, UnionQuery};

fn schema() -> Schema {
    Schema::from_pairs([("A", 1), ("R", 2)]).unwrap()
}

fn shape(r: &mut StdRng, equality_rate: f64) -> CqShape {
    CqShape {
        vars: r.gen_range(1..=4),
        answers: r.gen_range(0..=2),
        atoms: r.gen_range(1..=3),
        equality_rate,
    }
}

fn cq(r: &mut StdRng) -> ConjunctiveQuery {
    let s = shape(r, 0.0);
    random_cq(r, &schema(), s)
}

fn ucq(r: &mut StdRng) -> UnionQuery {
    let s = shape(r, 0.2);
    let n = r.gen_range(1..=3);
    random_ucq(r, &schema(), n, s)
}

fn db(r: &mut StdRng, s: &Schema) -> Database {
    let n = r.gen_range(1..=4);
    let density = r.gen_range(0.2..0.7);
    random_database(r, s, n, density)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn search_count_matches_assignment_count(seed in any::<u64>()) {
        let r = &mut StdRng::seed_from_u64(seed);
        let q = ucq(r);
        let d = db(r, &schema());
        prop_assert_eq!(count_answers(&q, &d), count_answers_by_assignment(&q, &d));
    }

    #[test]
    fn product_multiplies_counts(seed in any::<u64>()) {
        let r = &mut StdRng::seed_from_u64(seed);
        let q = cq(r);
        let (d1, d2) = (db(r, &schema()), db(r, &schema()));
        let p = direct_product(&d1, &d2).unwrap();
        prop_assert_eq!(count_cq(&q, &p), count_cq(&q, &d1) * count_cq(&q, &d2));
    }

    #[test]
    fn inclusion_exclusion_matches_union_count(seed in any::<u64>()) {
        let r = &mut StdRng::seed_from_u64(seed);
        let q = ucq(r);
        let d = db(r, &schema());
        prop_assert_eq!(inclusion_exclusion_count(&q, &d).unwrap(), BigInt::from(count_answers(&q, &d)));
    }

    #[test]
    fn chase_reaches_a_model(seed in any::<u64>()) {
        let r = &mut StdRng::seed_from_u64(seed);
        let s = Schema::from_pairs([("A", 1), ("R", 2), ("S", 2)]).unwrap();
        let n = r.gen_range(1..=3);
        let o = random_full_guarded_ontology(r, &s, n);
        let d = db(r, &s);
        let once = chase_database(&d, &o).unwrap().database;
        prop_assert!(satisfies(&once, &o).unwrap());
        prop_assert!(d.facts().iter().all(|f| once.facts().contains(f)));
        prop_assert_eq!(chase_database(&once, &o).unwrap().database, once);
    }

    #[test]
    fn core_is_equivalent_and_no_larger(seed in any::<u64>()) {
        let r = &mut StdRng::seed_from_u64(seed);
        let q = cq(r);
        let c = core(&q);
        prop_assert!(c.atoms().len() <= q.atoms().len());
        let (qu, cu): (UnionQuery, UnionQuery) = (q.clone().into(), c.clone().into());
        prop_assert!(contained_in(&qu, &cu).unwrap() && contained_in(&cu, &qu).unwrap());
        let d = db(r, &schema());
        prop_assert_eq!(answers(&qu, &d), answers(&cu, &d));
    }

    #[test]
    fn partial_domain_recovery_is_exact(seed in any::<u64>()) {
        let r = &mut StdRng::seed_from_u64(seed);
        let q = ucq(r);
        let d = db(r, &schema());
        let f: BTreeSet<_> = d.adom().into_iter().filter(|_| r.gen_bool(0.5)).collect();
        let got = partial_domain_count(&q, &d, &f, &mut BruteForce(q.clone())).unwrap();
        let want = answers(&q, &d).tuples.iter().filter(|t| t.iter().all(|c| f.contains(c))).count();
        prop_assert_eq!(got, BigInt::from(want));
    }

    #[test]
    fn strata_sum_to_answer_count(seed in any::<u64>()) {
        let r = &mut StdRng::seed_from_u64(seed);
        let q = cq(r);
        let d = db(r, &schema());
        let t: BTreeSet<_> = d.adom().into_iter().filter(|_| r.gen_bool(0.5)).collect();
        let strata = recover_hom_strata(&q, &d, &t, &mut BruteForce(q.clone().into())).unwrap();
        prop_assert_eq!(strata.len(), q.arity() + 1);
        let total: BigInt = strata.iter().sum();
        prop_assert_eq!(total, BigInt::from(count_cq(&q, &d)));
    }

    #[test]
    fn marked_count_from_unmarked_oracle(seed in any::<u64>()) {
        let r = &mut StdRng::seed_from_u64(seed);
        let q = core(&cq(r));
        let m = mark(&q, &Schema::new()).unwrap();
        let d = db(r, m.marked_schema());
        let got = marked_count_via_unmarked_oracle(&m, &d, &mut BruteForce(q.clone().into())).unwrap();
        prop_assert_eq!(got, BigInt::from(count_cq(&m.query, &d)));
    }

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let r = &mut StdRng::seed_from_u64(seed);
        let q = ucq(r);
        let text = serialize_ucq(&q);
        prop_assert_eq!(parse_query(&text, Some(q.schema())).unwrap(), q);
    }
}
