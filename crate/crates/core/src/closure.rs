//! Inclusion–exclusion expansion of a UCQ grouped by counting equivalence,
//! and the resulting closure.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use serde::Serialize;

use crate::canon::canonical_key;
use crate::equivalence::Class;
use crate::error::{Error, Result};
use crate::hom::{core, count_cq, renaming_equivalent};
use crate::model::*;

pub const DEFAULT_DISJUNCT_CAP: usize = 12;

/// ⋀_{i∈I} p_i, with I given 1-based.
#[derive(Clone, Debug, Serialize)]
pub struct Conjunction {
    pub index_set: Vec<usize>,
    #[serde(serialize_with = "as_text")]
    pub query: ConjunctiveQuery,
}

fn as_text<S: serde::Serializer>(q: &ConjunctiveQuery, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::text::serialize_cq(q))
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceClass {
    /// Indices into [`ClosureExpansion::conjunctions`].
    pub members: Vec<usize>,
    pub coefficient: i64,
    /// Index of the member with the lexicographically least index set.
    pub representative: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureExpansion {
    pub conjunctions: Vec<Conjunction>,
    pub classes: Vec<EquivalenceClass>,
}

impl ClosureExpansion {
    pub fn surviving(&self) -> impl Iterator<Item = &EquivalenceClass> {
        self.classes.iter().filter(|c| c.coefficient != 0)
    }

    /// Conjunctions belonging to a class with non-zero coefficient.
    pub fn closure(&self) -> Vec<&Conjunction> {
        let mut idx: Vec<usize> = self.surviving().flat_map(|c| c.members.iter().copied()).collect();
        idx.sort();
        idx.iter().map(|&i| &self.conjunctions[i]).collect()
    }

    pub fn representative(&self, class: &EquivalenceClass) -> &Conjunction {
        &self.conjunctions[class.representative]
    }

    /// The class containing the conjunction with index set `set`.
    pub fn class_of(&self, set: &[usize]) -> Option<&EquivalenceClass> {
        let i = self.conjunctions.iter().position(|c| c.index_set == set)?;
        self.classes.iter().find(|c| c.members.contains(&i))
    }
}

/// Renames the quantified variables of `p` (disjunct `i`, 1-based) apart.
fn rename_apart(p: &ConjunctiveQuery, i: usize, taken: &BTreeSet<Var>) -> Result<ConjunctiveQuery> {
    let mut ren = BTreeMap::new();
    for v in p.quantified_vars() {
        let mut name = format!("d{i}_{v}");
        while taken.contains(&Var::new(&name)) {
            name.push('\'');
        }
        ren.insert(v.clone(), Var::from(name));
    }
    p.rename(|v| ren.get(v).cloned().unwrap_or_else(|| v.clone()))
}

/// The conjunction of the disjuncts listed (1-based) in `set`.
pub fn conjunction(q: &UnionQuery, set: &[usize]) -> Result<ConjunctiveQuery> {
    let taken: BTreeSet<Var> = q.disjuncts().iter().flat_map(|d| d.vars()).collect();
    let mut atoms = Vec::new();
    let mut eqs = Vec::new();
    for &i in set {
        let d = q
            .disjuncts()
            .get(i.wrapping_sub(1))
            .ok_or_else(|| Error::Invalid(format!("no disjunct {i}")))?;
        let r = rename_apart(d, i, &taken)?;
        atoms.extend(r.atoms().iter().cloned());
        eqs.extend(r.equalities().iter().cloned());
    }
    ConjunctiveQuery::new(q.schema().clone(), q.answer_vars().to_vec(), atoms, eqs)
}

fn index_set(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

/// Builds all 2^n − 1 conjunctions and groups them by counting
/// equivalence over `class`.
pub fn expand(q: &UnionQuery, class: &Class, cap: usize) -> Result<ClosureExpansion> {
    let n = q.disjuncts().len();
    if n > cap {
        return Err(Error::Budget(format!("{n} disjuncts exceed the cap of {cap}")));
    }
    let mut conjunctions = Vec::new();
    let mut classes: Vec<EquivalenceClass> = Vec::new();
    let mut class_forms: Vec<ConjunctiveQuery> = Vec::new();
    let mut by_key: HashMap<String, usize> = HashMap::new();
    for mask in 1u64..(1u64 << n) {
        let set = index_set(mask, n);
        let query = conjunction(q, &set)?;
        let nf = core(&class.normal_form(&query)?);
        let key = canonical_key(&nf);
        let ci = match by_key.get(&key) {
            Some(&c) => c,
            None => {
                let found = class_forms
                    .iter()
                    .position(|f| renaming_equivalent(&nf, f).is_some());
                let c = match found {
                    Some(c) => c,
                    None => {
                        classes.push(EquivalenceClass {
                            members: Vec::new(),
                            coefficient: 0,
                            representative: conjunctions.len(),
                        });
                        class_forms.push(nf);
                        classes.len() - 1
                    }
                };
                by_key.insert(key, c);
                c
            }
        };
        let sign = if set.len() % 2 == 1 { 1 } else { -1 };
        let idx = conjunctions.len();
        conjunctions.push(Conjunction { index_set: set, query });
        let cl = &mut classes[ci];
        cl.members.push(idx);
        cl.coefficient += sign;
        if conjunctions[idx].index_set < conjunctions[cl.representative].index_set {
            cl.representative = idx;
        }
    }
    Ok(ClosureExpansion {
        conjunctions,
        classes,
    })
}

/// Σ coefficient · count over surviving classes; `counts` is keyed by the
/// representative's index set.
pub fn recombine(exp: &ClosureExpansion, counts: &BTreeMap<Vec<usize>, BigUint>) -> Result<BigInt> {
    let mut total = BigInt::from(0);
    for c in exp.surviving() {
        let rep = &exp.representative(c).index_set;
        let n = counts
            .get(rep)
            .ok_or_else(|| Error::MissingCount(format!("{rep:?}")))?;
        total += BigInt::from(c.coefficient) * BigInt::from(n.clone());
    }
    Ok(total)
}

/// Representative counts taken directly on `d`.
pub fn representative_counts(exp: &ClosureExpansion, d: &Database) -> BTreeMap<Vec<usize>, BigUint> {
    exp.surviving()
        .map(|c| {
            let r = exp.representative(c);
            (r.index_set.clone(), count_cq(&r.query, d))
        })
        .collect()
}

/// Σ_I (−1)^{|I|+1} #(⋀_I p_i)(D) without any grouping.
pub fn inclusion_exclusion_count(q: &UnionQuery, d: &Database) -> Result<BigInt> {
    let n = q.disjuncts().len();
    let mut total = BigInt::from(0);
    for mask in 1u64..(1u64 << n) {
        let set = index_set(mask, n);
        let c = BigInt::from(count_cq(&conjunction(q, &set)?, d));
        if set.len() % 2 == 1 {
            total += c;
        } else {
            total -= c;
        }
    }
    Ok(total)
}
