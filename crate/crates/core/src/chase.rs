//! The oblivious chase for guarded full TGDs.
//!
//! Every body match is determined by its guard fact, so a trigger is a pair
//! (dependency, guard fact). Rounds are semi-naive: a trigger is looked at
//! again only when its guard or one of its side facts is new.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hom::{answers, count_answers, AnswerSet};
use crate::model::*;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChaseResult {
    pub database: Database,
    /// Rule applications (distinct triggers fired).
    pub steps: usize,
    pub new_facts: usize,
}

type Binding = HashMap<Var, Const>;

fn unify(atom: &RelAtom, fact: &Fact, b: &mut Binding) -> bool {
    if atom.relation != fact.relation || atom.args.len() != fact.args.len() {
        return false;
    }
    for (v, c) in atom.args.iter().zip(&fact.args) {
        match b.get(v) {
            Some(x) if x != c => return false,
            Some(_) => {}
            None => {
                b.insert(v.clone(), c.clone());
            }
        }
    }
    true
}

fn instantiate(atom: &RelAtom, b: &Binding) -> Fact {
    Fact::new(
        atom.relation.clone(),
        atom.args.iter().map(|v| b[v].clone()).collect(),
    )
}

struct Store {
    all: HashSet<Fact>,
    by_rel: HashMap<RelName, Vec<Fact>>,
}

impl Store {
    fn insert(&mut self, f: Fact) -> bool {
        if self.all.insert(f.clone()) {
            self.by_rel.entry(f.relation.clone()).or_default().push(f);
            true
        } else {
            false
        }
    }
}

/// ch_T(D) for a full ontology.
pub fn chase_database(d: &Database, t: &Ontology) -> Result<ChaseResult> {
    if !t.all_full() {
        return Err(Error::NotFull);
    }
    let schema = d
        .schema()
        .union(&t.schema()?)
        .map_err(|e| Error::SchemaMismatch(e.to_string()))?;
    let mut store = Store {
        all: HashSet::new(),
        by_rel: HashMap::new(),
    };
    for f in d.facts() {
        store.insert(f.clone());
    }
    let mut fired: HashSet<(usize, Fact)> = HashSet::new();
    let mut steps = 0usize;
    let mut delta: Vec<Fact> = d.facts().iter().cloned().collect();

    // Empty-body dependencies fire exactly once.
    let mut derived = Vec::new();
    for tgd in t.tgds() {
        if tgd.body().is_empty() {
            steps += 1;
            let b = Binding::new();
            derived.extend(tgd.head().iter().map(|h| instantiate(h, &b)));
        }
    }
    for f in derived {
        if store.insert(f.clone()) {
            delta.push(f);
        }
    }

    while !delta.is_empty() {
        let mut candidates: Vec<(usize, Fact)> = Vec::new();
        for (ti, tgd) in t.tgds().iter().enumerate() {
            let Some(gi) = tgd.guard_index() else {
                continue;
            };
            let guard = &tgd.body()[gi];
            for f in &delta {
                if f.relation == guard.relation {
                    candidates.push((ti, f.clone()));
                }
                for (si, side) in tgd.body().iter().enumerate() {
                    if si == gi || side.relation != f.relation {
                        continue;
                    }
                    let mut b = Binding::new();
                    if !unify(side, f, &mut b) {
                        continue;
                    }
                    if let Some(gs) = store.by_rel.get(&guard.relation) {
                        for g in gs {
                            let mut b2 = b.clone();
                            if unify(guard, g, &mut b2) {
                                candidates.push((ti, g.clone()));
                            }
                        }
                    }
                }
            }
        }
        let mut next = Vec::new();
        for (ti, g) in candidates {
            if fired.contains(&(ti, g.clone())) {
                continue;
            }
            let tgd = &t.tgds()[ti];
            let mut b = Binding::new();
            if !unify(tgd.guard().expect("non-empty body"), &g, &mut b) {
                continue;
            }
            if !tgd.body().iter().all(|a| store.all.contains(&instantiate(a, &b))) {
                continue;
            }
            fired.insert((ti, g));
            steps += 1;
            for h in tgd.head() {
                let f = instantiate(h, &b);
                if store.insert(f.clone()) {
                    next.push(f);
                }
            }
        }
        delta = next;
    }
    let new_facts = store.all.len() - d.len();
    let mut out = Database::new(schema);
    for f in store.all {
        out.insert_unchecked(f);
    }
    Ok(ChaseResult {
        database: out,
        steps,
        new_facts,
    })
}

/// Does `d` satisfy every dependency of the full ontology `t`?
pub fn satisfies(d: &Database, t: &Ontology) -> Result<bool> {
    Ok(chase_database(d, t)?.new_facts == 0)
}

/// ch_T(q): chase D_q and read it back with q's answer tuple and equalities.
pub fn chase_query(q: &ConjunctiveQuery, t: &Ontology) -> Result<ConjunctiveQuery> {
    let c = canonical_database(q);
    let ch = chase_database(&c.plain, t)?;
    ConjunctiveQuery::from_database(
        &ch.database,
        q.answer_vars().to_vec(),
        q.equalities().to_vec(),
    )
}

fn chased_input(q: &Omq, d: &Database) -> Result<Database> {
    let d = d
        .clone()
        .with_schema(d.schema().union(q.full_schema())?)?;
    Ok(chase_database(&d, &q.ontology)?.database)
}

/// Q(D) = q(ch_O(D)).
pub fn omq_answers(q: &Omq, d: &Database) -> Result<AnswerSet> {
    Ok(answers(&q.query, &chased_input(q, d)?))
}

pub fn omq_count(q: &Omq, d: &Database) -> Result<num_bigint::BigUint> {
    Ok(count_answers(&q.query, &chased_input(q, d)?))
}

/// Chase statistics per dependency, for reporting.
pub fn head_profile(t: &Ontology) -> (usize, usize) {
    let k = t
        .tgds()
        .iter()
        .flat_map(|x| x.head().iter().map(|a| a.args.len()))
        .max()
        .unwrap_or(0);
    let rels: BTreeMap<&RelName, ()> = t
        .tgds()
        .iter()
        .flat_map(|x| x.head().iter().map(|a| (&a.relation, ())))
        .collect();
    (k, rels.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_cq, parse_database, parse_tgds};

    #[test]
    fn single_rule() {
        let t = parse_tgds("R(x,y) -> S(x,y).", None).unwrap();
        let d = parse_database("R(a,b).", None).unwrap();
        let r = chase_database(&d, &t).unwrap();
        assert_eq!(r.database.len(), 2);
        assert_eq!(r.steps, 1);
        assert_eq!(r.new_facts, 1);
        let q = parse_cq("q(x) :- R(x,y).", None).unwrap();
        let c = chase_query(&q, &t).unwrap();
        assert_eq!(c, parse_cq("q(x) :- R(x,y), S(x,y).", None).unwrap().with_schema(c.schema().clone()).unwrap());
    }

    #[test]
    fn empty_ontology_is_identity() {
        let d = parse_database("R(a,b). A(a).", None).unwrap();
        assert_eq!(chase_database(&d, &Ontology::empty()).unwrap().database, d);
    }

    #[test]
    fn side_atoms_and_recursion() {
        let t = parse_tgds("R(x,y), A(x) -> A(y).", None).unwrap();
        let d = parse_database("R(a,b). R(b,c). R(c,d). A(a).", None).unwrap();
        let r = chase_database(&d, &t).unwrap();
        assert_eq!(r.new_facts, 3);
        assert_eq!(chase_database(&r.database, &t).unwrap().new_facts, 0);
    }

    #[test]
    fn non_full_rejected() {
        let t = parse_tgds("R(x,y) -> exists z. R(y,z).", None).unwrap();
        assert_eq!(chase_database(&Database::default(), &t).unwrap_err(), Error::NotFull);
    }
}
