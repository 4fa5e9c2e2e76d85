//! Counting and semi-counting equivalence, plain and over the class of
//! databases chased with a full ontology.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::algebra::{add_top_copies, clone_set};
use crate::chase::{chase_database, chase_query};
use crate::error::{Error, Result};
use crate::hom::{count_cq, identified_query, renaming_equivalent, SurjectionPair};
use crate::model::*;

/// q~ together with, for each original answer slot, the position of its
/// representative in q~'s answer tuple.
#[derive(Clone, Debug)]
pub struct Tilde {
    pub query: ConjunctiveQuery,
    pub slots: Vec<usize>,
}

/// Removes equality atoms by identifying variables. Answer variables of one
/// equality class collapse to the earliest one.
pub fn tilde_with_slots(q: &ConjunctiveQuery) -> Tilde {
    let (query, n) = identified_query(q);
    Tilde {
        query,
        slots: n.slots,
    }
}

pub fn tilde(q: &ConjunctiveQuery) -> ConjunctiveQuery {
    tilde_with_slots(q).query
}

/// Connected pieces of `q`'s atoms (atoms sharing a variable; equality
/// atoms link their two sides).
pub(crate) fn atom_components(q: &ConjunctiveQuery) -> Vec<Vec<RelAtom>> {
    let reps = q.representatives();
    let atoms = q.atoms();
    let mut comp: Vec<usize> = (0..atoms.len()).collect();
    fn find(c: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while c[r] != r {
            r = c[r];
        }
        c[x] = r;
        r
    }
    let mut owner: std::collections::HashMap<&Var, usize> = Default::default();
    for (i, a) in atoms.iter().enumerate() {
        for v in &a.args {
            let r = &reps[v];
            if let Some(&j) = owner.get(r) {
                let (ri, rj) = (find(&mut comp, i), find(&mut comp, j));
                comp[ri] = rj;
            } else {
                owner.insert(r, i);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<RelAtom>> = Default::default();
    for (i, a) in atoms.iter().enumerate() {
        let r = find(&mut comp, i);
        groups.entry(r).or_default().push(a.clone());
    }
    groups.into_values().collect()
}

/// q^: drops every maximal connected subquery without an answer variable.
pub fn hat(q: &ConjunctiveQuery) -> ConjunctiveQuery {
    let keep: Vec<RelAtom> = atom_components(q)
        .into_iter()
        .filter(|c| c.iter().any(|a| a.args.iter().any(|v| q.is_answer_var(v))))
        .flatten()
        .collect();
    q.with_atoms(keep).expect("answer variables stay covered")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Counting,
    SemiCounting,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceVerdict {
    pub relation: Relation,
    pub holds: bool,
    /// Answer-variable surjections (between the normal forms) when it holds.
    #[serde(skip)]
    pub surjections: Option<SurjectionPair>,
    /// A database with different counts when it does not hold.
    pub counterexample: Option<Database>,
    /// Set when no counterexample was found within the search budget.
    pub note: Option<String>,
}

/// Caps for the counterexample search.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    /// Candidate databases tried in the cloning search.
    pub max_databases: usize,
    /// Largest k tried for D' + k·D_top.
    pub max_top_copies: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_databases: 512,
            max_top_copies: 64,
        }
    }
}

pub const NOT_FOUND: &str = "witness not found within budget";

/// The class the deciders are relative to: all databases, or all databases
/// chased with a full ontology.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Class {
    pub ontology: Ontology,
}

impl Class {
    pub fn all() -> Self {
        Class::default()
    }

    pub fn chased(ontology: Ontology) -> Result<Self> {
        if !ontology.all_full() {
            return Err(Error::NotFull);
        }
        Ok(Class { ontology })
    }

    /// Brings a database into the class.
    pub fn close(&self, d: &Database) -> Result<Database> {
        if self.ontology.is_empty() {
            return Ok(d.clone());
        }
        Ok(chase_database(d, &self.ontology)?.database)
    }

    /// ch_O(q~): the equality-free form compared by the deciders.
    pub fn normal_form(&self, q: &ConjunctiveQuery) -> Result<ConjunctiveQuery> {
        let t = tilde(q);
        if self.ontology.is_empty() {
            Ok(t)
        } else {
            chase_query(&t, &self.ontology)
        }
    }

    /// Counting equivalence over the class, without witnesses.
    pub fn counting_equivalent(&self, q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> Result<bool> {
        Ok(renaming_equivalent(&self.normal_form(q1)?, &self.normal_form(q2)?).is_some())
    }

    pub fn semi_counting_equivalent(&self, q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> Result<bool> {
        let h1 = hat(&self.normal_form(q1)?);
        let h2 = hat(&self.normal_form(q2)?);
        Ok(renaming_equivalent(&h1, &h2).is_some())
    }

    fn schema_for(&self, q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> Result<Schema> {
        q1.schema().union(q2.schema())?.union(&self.ontology.schema()?)
    }

    /// Searches cloned canonical databases of the normal forms for a
    /// database where the counts of `q1` and `q2` differ.
    fn cloning_search(
        &self,
        q1: &ConjunctiveQuery,
        q2: &ConjunctiveQuery,
        n1: &ConjunctiveQuery,
        n2: &ConjunctiveQuery,
        budget: SearchBudget,
    ) -> Result<Option<Database>> {
        let schema = self.schema_for(q1, q2)?;
        let mut tried = 0usize;
        let bases = [n1, n2];
        // D_q and its 1-clone first, then every (T, j) cloning system.
        let mut plans: Vec<(usize, BTreeSet<Const>, usize)> = Vec::new();
        for (b, n) in bases.iter().enumerate() {
            let all: BTreeSet<Const> = canonical_database(n).plain.adom();
            plans.push((b, BTreeSet::new(), 1));
            plans.push((b, all, 2));
        }
        for (b, n) in bases.iter().enumerate() {
            let xs: Vec<Const> = n.answer_vars().iter().map(Var::to_const).collect();
            for mask in 0u64..(1u64 << xs.len().min(20)) {
                let t: BTreeSet<Const> = xs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, c)| c.clone())
                    .collect();
                for j in 2..=xs.len() + 1 {
                    plans.push((b, t.clone(), j));
                }
            }
        }
        for (b, t, j) in plans {
            if tried >= budget.max_databases {
                return Ok(None);
            }
            tried += 1;
            let base = canonical_database(bases[b]).plain.with_schema(schema.clone())?;
            let d = if j == 1 { base } else { clone_set(&base, &t, j)?.database };
            let d = self.close(&d)?;
            if count_cq(q1, &d) != count_cq(q2, &d) {
                return Ok(Some(d));
            }
        }
        Ok(None)
    }

    /// Counting equivalence with a surjection pair or counterexample.
    pub fn counting_verdict(
        &self,
        q1: &ConjunctiveQuery,
        q2: &ConjunctiveQuery,
        budget: SearchBudget,
    ) -> Result<EquivalenceVerdict> {
        let n1 = self.normal_form(q1)?;
        let n2 = self.normal_form(q2)?;
        if let Some(s) = renaming_equivalent(&n1, &n2) {
            return Ok(EquivalenceVerdict {
                relation: Relation::Counting,
                holds: true,
                surjections: Some(s),
                counterexample: None,
                note: None,
            });
        }
        let cx = self.cloning_search(q1, q2, &n1, &n2, budget)?;
        Ok(EquivalenceVerdict {
            relation: Relation::Counting,
            holds: false,
            surjections: None,
            note: cx.is_none().then(|| NOT_FOUND.to_string()),
            counterexample: cx,
        })
    }

    /// Semi-counting equivalence: counting equivalence of the hats. A
    /// counterexample has both counts positive.
    pub fn semi_counting_verdict(
        &self,
        q1: &ConjunctiveQuery,
        q2: &ConjunctiveQuery,
        budget: SearchBudget,
    ) -> Result<EquivalenceVerdict> {
        let h1 = hat(&self.normal_form(q1)?);
        let h2 = hat(&self.normal_form(q2)?);
        if let Some(s) = renaming_equivalent(&h1, &h2) {
            return Ok(EquivalenceVerdict {
                relation: Relation::SemiCounting,
                holds: true,
                surjections: Some(s),
                counterexample: None,
                note: None,
            });
        }
        let cx = match self.cloning_search(&h1, &h2, &h1, &h2, budget)? {
            None => None,
            Some(base) => self.pad_with_top(q1, q2, &base, budget)?,
        };
        Ok(EquivalenceVerdict {
            relation: Relation::SemiCounting,
            holds: false,
            surjections: None,
            note: cx.is_none().then(|| NOT_FOUND.to_string()),
            counterexample: cx,
        })
    }

    /// D' + k·D_top for k = 1, 2, … until the counts of q1 and q2 split.
    pub fn pad_with_top(
        &self,
        q1: &ConjunctiveQuery,
        q2: &ConjunctiveQuery,
        base: &Database,
        budget: SearchBudget,
    ) -> Result<Option<Database>> {
        let schema = self.schema_for(q1, q2)?;
        let base = base.clone().with_schema(schema.clone())?;
        for k in 1..=budget.max_top_copies {
            let d = self.close(&add_top_copies(&base, &schema, k)?)?;
            if count_cq(q1, &d) != count_cq(q2, &d) {
                return Ok(Some(d));
            }
        }
        Ok(None)
    }
}

/// Plain counting equivalence.
pub fn counting_equivalent(q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> EquivalenceVerdict {
    Class::all()
        .counting_verdict(q1, q2, SearchBudget::default())
        .expect("the plain class has no ontology to fail on")
}

/// Plain semi-counting equivalence.
pub fn semi_counting_equivalent(q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> EquivalenceVerdict {
    Class::all()
        .semi_counting_verdict(q1, q2, SearchBudget::default())
        .expect("the plain class has no ontology to fail on")
}

/// Counting equivalence over databases chased with `o`.
pub fn counting_equivalent_over_class(
    q1: &ConjunctiveQuery,
    q2: &ConjunctiveQuery,
    o: &Ontology,
) -> Result<EquivalenceVerdict> {
    Class::chased(o.clone())?.counting_verdict(q1, q2, SearchBudget::default())
}

pub fn semi_counting_equivalent_over_class(
    q1: &ConjunctiveQuery,
    q2: &ConjunctiveQuery,
    o: &Ontology,
) -> Result<EquivalenceVerdict> {
    Class::chased(o.clone())?.semi_counting_verdict(q1, q2, SearchBudget::default())
}

fn single(q: &Omq) -> Result<&ConjunctiveQuery> {
    match q.query.disjuncts() {
        [d] => Ok(d),
        _ => Err(Error::Invalid("expected an OMQ whose query is a single CQ".into())),
    }
}

/// Counting equivalence of two OMQs with the same full ontology over a full
/// data schema.
pub fn omq_counting_equivalent(q1: &Omq, q2: &Omq) -> Result<EquivalenceVerdict> {
    if q1.ontology != q2.ontology {
        return Err(Error::Invalid("OMQs must share their ontology".into()));
    }
    if !q1.full_data_schema() || !q2.full_data_schema() {
        return Err(Error::Invalid("OMQs must have a full data schema".into()));
    }
    counting_equivalent_over_class(single(q1)?, single(q2)?, &q1.ontology)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_cq, parse_tgds};

    fn cq(s: &str) -> ConjunctiveQuery {
        parse_cq(s, None).unwrap()
    }

    #[test]
    fn tilde_identifies() {
        let t = tilde_with_slots(&cq("q(x1,x2) :- R(x1,x2), x1 = x2."));
        assert_eq!(t.query, cq("q(x1) :- R(x1,x1)."));
        assert_eq!(t.slots, vec![0, 0]);
        let q = cq("q(x) :- R(x,y).");
        assert_eq!(tilde(&q), q);
    }

    #[test]
    fn hat_drops_boolean_parts() {
        let q = cq("q(x) :- A(x), R(y,z).");
        assert_eq!(hat(&q).atoms().len(), 1);
        assert!(hat(&cq("q() :- R(x,y).")).atoms().is_empty());
    }

    #[test]
    fn counting() {
        let q = cq("q(x,y) :- R(x,y).");
        assert!(counting_equivalent(&q, &q).holds);
        let v = counting_equivalent(&q, &cq("q(x,y) :- R(x,y), R(y,x)."));
        assert!(!v.holds);
        assert!(v.counterexample.is_some());
    }

    #[test]
    fn semi_counting() {
        let a = cq("q(x) :- A(x).");
        let b = cq("q(x) :- A(x), B(y).");
        assert!(!counting_equivalent(&a, &b).holds);
        assert!(semi_counting_equivalent(&a, &b).holds);
        assert!(semi_counting_equivalent(&cq("q() :- A(x)."), &cq("q() :- R(x,y), R(y,x).")).holds);
        let v = semi_counting_equivalent(&a, &cq("q(x) :- A(x), R(x,y)."));
        assert!(!v.holds);
        let d = v.counterexample.unwrap();
        assert_ne!(count_cq(&a, &d), count_cq(&cq("q(x) :- A(x), R(x,y)."), &d));
    }

    #[test]
    fn over_class() {
        let o = parse_tgds("R(x,y) -> S(x,y).", None).unwrap();
        let q = cq("q(x,y) :- R(x,y).");
        let p = cq("q(x,y) :- R(x,y), S(x,y).");
        assert!(!counting_equivalent(&q, &p).holds);
        assert!(counting_equivalent_over_class(&q, &p, &o).unwrap().holds);
    }
}
