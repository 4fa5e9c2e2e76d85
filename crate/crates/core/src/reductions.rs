//! The reduction chain between CQSs, OMQs, marked OMQs and plain CQs.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;

use crate::algebra::pair;
use crate::chase::{chase_database, omq_count, satisfies};
use crate::equivalence::tilde;
use crate::error::{Error, Result};
use crate::hom::{answer_automorphism_count, core};
use crate::model::*;
use crate::recovery::{cloning_system, partial_domain_count, CountOracle};
use crate::text::appearance_order;

/// #q(D) for a CQS, D checked against the constraints.
pub fn cqs_count_via_omq(s: &Cqs, d: &Database) -> Result<BigUint> {
    if !s.constraints.all_full() {
        return Err(Error::NotFull);
    }
    let d = d.clone().with_schema(d.schema().union(&s.schema)?)?;
    if !satisfies(&d, &s.constraints)? {
        return Err(Error::ConstraintViolation("database violates the constraints".into()));
    }
    omq_count(&s.as_omq(), &d)
}

/// #Q(D) for a full OMQ from an oracle that counts the query on databases
/// satisfying the ontology: chase once, then read off the answers over
/// adom(D).
pub fn omq_count_via_cqs(q: &Omq, d: &Database, oracle: &mut dyn CountOracle) -> Result<BigInt> {
    if !q.ontology.all_full() {
        return Err(Error::NotFull);
    }
    let schema = d.schema().union(q.full_schema())?;
    let star = chase_database(&d.clone().with_schema(schema)?, &q.ontology)?.database;
    partial_domain_count(&q.query, &star, &d.adom(), oracle)
}

/// Replaces the query by its equality-free form q~.
pub fn remove_equalities(q: &Omq) -> Result<Omq> {
    let [cq] = q.query.disjuncts() else {
        return Err(Error::Invalid("equality removal expects a single CQ".into()));
    };
    Omq::new(q.ontology.clone(), q.data_schema.clone(), tilde(cq).into())
}

/// q★: one fresh unary marker per variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkedQuery {
    pub base: ConjunctiveQuery,
    pub query: ConjunctiveQuery,
    pub markers: BTreeMap<Var, RelName>,
}

impl MarkedQuery {
    pub fn base_schema(&self) -> &Schema {
        self.base.schema()
    }

    pub fn marked_schema(&self) -> &Schema {
        self.query.schema()
    }
}

/// Adds M_x(x) for every variable x; names avoid `avoid` and the query's
/// own schema.
pub fn mark(q: &ConjunctiveQuery, avoid: &Schema) -> Result<MarkedQuery> {
    let mut schema = q.schema().union(avoid)?;
    let mut markers = BTreeMap::new();
    for v in q.vars() {
        let name = schema.fresh_name(&format!("M_{v}"));
        schema.declare(name.clone(), 1)?;
        markers.insert(v, name);
    }
    let mut atoms = q.atoms().to_vec();
    atoms.extend(markers.iter().map(|(v, r)| RelAtom::new(r.clone(), vec![v.clone()])));
    let query = ConjunctiveQuery::new(schema, q.answer_vars().to_vec(), atoms, q.equalities().to_vec())?;
    Ok(MarkedQuery {
        base: q.clone(),
        query,
        markers,
    })
}

/// Q★ = (Ω, Σ★, core(ch_Ω(q))★) together with its marking.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkedOmq {
    pub omq: Omq,
    pub marking: MarkedQuery,
    /// Σ, the unmarked data schema.
    pub schema: Schema,
}

pub fn core_chased_marking(q: &Omq) -> Result<MarkedOmq> {
    if !q.ontology.all_full() {
        return Err(Error::NotFull);
    }
    if !q.full_data_schema() {
        return Err(Error::Invalid("marking needs an OMQ over the full schema".into()));
    }
    let [cq] = q.query.disjuncts() else {
        return Err(Error::Invalid("marking expects a single CQ".into()));
    };
    if !cq.is_equality_free() {
        return Err(Error::Invalid("marking expects an equality-free CQ".into()));
    }
    let base = core(&crate::chase::chase_query(cq, &q.ontology)?);
    let marking = mark(&base, &q.data_schema)?;
    let omq = Omq::new(
        q.ontology.clone(),
        marking.marked_schema().clone(),
        marking.query.clone().into(),
    )?;
    Ok(MarkedOmq {
        omq,
        marking,
        schema: q.data_schema.clone(),
    })
}

/// #q★(D) for a Σ★-database D, asking the oracle only for unmarked counts
/// #q(·) on Σ-databases.
pub fn marked_count_via_unmarked_oracle(
    marked: &MarkedQuery,
    d: &Database,
    oracle: &mut dyn CountOracle,
) -> Result<BigInt> {
    let q = &marked.base;
    if !q.is_equality_free() {
        return Err(Error::Invalid("marked recovery expects an equality-free query".into()));
    }
    if core(q).atoms().len() != q.atoms().len() {
        return Err(Error::Invalid("marked recovery expects a core".into()));
    }
    // D°: facts of D_q × D whose elements (x, a) carry the marker M_x(a).
    let marked_with: BTreeSet<(Var, Const)> = marked
        .markers
        .iter()
        .flat_map(|(v, r)| d.facts_of(r).map(move |f| (v.clone(), f.args[0].clone())))
        .collect();
    let mut by_rel: BTreeMap<&RelName, Vec<&Fact>> = BTreeMap::new();
    for f in d.facts() {
        by_rel.entry(&f.relation).or_default().push(f);
    }
    let mut origin: BTreeMap<Const, Var> = BTreeMap::new();
    let mut circ = Database::new(q.schema().clone());
    for atom in q.atoms() {
        for f in by_rel.get(&atom.relation).into_iter().flatten() {
            if f.args.len() != atom.args.len() {
                continue;
            }
            let ok = atom
                .args
                .iter()
                .zip(&f.args)
                .all(|(v, a)| marked_with.contains(&(v.clone(), a.clone())));
            if !ok {
                continue;
            }
            let args: Vec<Const> = atom
                .args
                .iter()
                .zip(&f.args)
                .map(|(v, a)| {
                    let c = pair(&v.to_const(), a);
                    origin.insert(c.clone(), v.clone());
                    c
                })
                .collect();
            circ.insert_unchecked(Fact::new(atom.relation.clone(), args));
        }
    }
    let xs: Vec<Var> = q.answer_vars().to_vec();
    let k = xs.len();
    let automorphisms = BigInt::from(answer_automorphism_count(q));
    let mut total = BigInt::zero();
    for mask in 0u64..(1u64 << k) {
        let t: BTreeSet<&Var> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| &xs[i]).collect();
        let f: BTreeSet<Const> = origin
            .iter()
            .filter(|(_, v)| t.contains(v))
            .map(|(c, _)| c.clone())
            .collect();
        let h_t = cloning_system(&circ, &f, k, oracle)?.swap_remove(k);
        if (k - t.len()).is_multiple_of(2) {
            total += h_t;
        } else {
            total -= h_t;
        }
    }
    if (&total % &automorphisms) != BigInt::zero() {
        return Err(Error::OracleInconsistent(format!(
            "{total} is not divisible by {automorphisms} automorphisms"
        )));
    }
    Ok(total / automorphisms)
}

/// q♯: one atom G_S(S̄) per maximal guarded set S of D_q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharpQuery {
    pub query: ConjunctiveQuery,
    /// Fresh relation and its ordered variable tuple.
    pub origin: Vec<(RelName, Vec<Var>)>,
}

pub fn sharp_query(q: &ConjunctiveQuery) -> Result<SharpQuery> {
    if !q.is_equality_free() {
        return Err(Error::Invalid("q♯ expects an equality-free query".into()));
    }
    let order: BTreeMap<Var, usize> = appearance_order(q).into_iter().enumerate().map(|(i, v)| (v, i)).collect();
    let sets: BTreeSet<BTreeSet<Var>> = q.atoms().iter().map(|a| a.args.iter().cloned().collect()).collect();
    let maximal: Vec<&BTreeSet<Var>> = sets
        .iter()
        .filter(|s| !sets.iter().any(|t| t != *s && s.is_subset(t)))
        .collect();
    let mut schema = q.schema().clone();
    let mut fresh = Schema::new();
    let mut origin = Vec::new();
    let mut atoms = Vec::new();
    for s in maximal {
        let mut tuple: Vec<Var> = s.iter().cloned().collect();
        let label: Vec<&str> = tuple.iter().map(Var::as_str).collect();
        let name = schema.fresh_name(&format!("G_{}", label.join("_")));
        tuple.sort_by_key(|v| order[v]);
        schema.declare(name.clone(), tuple.len())?;
        fresh.declare(name.clone(), tuple.len())?;
        atoms.push(RelAtom::new(name.clone(), tuple.clone()));
        origin.push((name, tuple));
    }
    let query = ConjunctiveQuery::new(fresh, q.answer_vars().to_vec(), atoms, Vec::new())?;
    Ok(SharpQuery { query, origin })
}

/// Result of the ontology-removal reduction.
#[derive(Clone, Debug)]
pub struct SharpRun {
    pub count: BigInt,
    /// D★, handed to the oracle.
    pub flooded: Database,
}

pub const DEFAULT_FLOOD_BUDGET: usize = 1_000_000;

/// #q♯(D♯) from an oracle for the marked OMQ Q★ that q♯ was built from.
pub fn sharp_count_via_marked_omq_oracle(
    sharp: &SharpQuery,
    marked: &MarkedOmq,
    d_sharp: &Database,
    oracle: &mut dyn CountOracle,
    flood_budget: usize,
) -> Result<SharpRun> {
    // P = D_{q♯} × D♯, remembering the variable behind each element.
    let mut origin: BTreeMap<Const, Var> = BTreeMap::new();
    let mut guarded: BTreeSet<BTreeSet<Const>> = BTreeSet::new();
    for atom in sharp.query.atoms() {
        for f in d_sharp.facts_of(&atom.relation) {
            if f.args.len() != atom.args.len() {
                continue;
            }
            let args: Vec<Const> = atom
                .args
                .iter()
                .zip(&f.args)
                .map(|(v, a)| {
                    let c = pair(&v.to_const(), a);
                    origin.insert(c.clone(), v.clone());
                    c
                })
                .collect();
            guarded.insert(args.into_iter().collect());
        }
    }
    let guarded: Vec<&BTreeSet<Const>> = guarded
        .iter()
        .filter(|s| !guarded.iter().any(|t| t != *s && s.is_subset(t)))
        .collect();
    let estimate: usize = guarded
        .iter()
        .map(|s| {
            marked
                .schema
                .relations()
                .map(|(_, a)| s.len().saturating_pow(a as u32))
                .fold(0usize, usize::saturating_add)
        })
        .fold(0usize, usize::saturating_add);
    if estimate > flood_budget {
        return Err(Error::Budget(format!("flooding needs about {estimate} facts, budget {flood_budget}")));
    }
    let mut star = Database::new(marked.omq.data_schema.clone());
    for s in &guarded {
        let elems: Vec<&Const> = s.iter().collect();
        for (r, a) in marked.schema.relations() {
            let mut idx = vec![0usize; a];
            loop {
                star.insert_unchecked(Fact::new(r.clone(), idx.iter().map(|&i| elems[i].clone()).collect()));
                let mut p = 0;
                while p < a {
                    idx[p] += 1;
                    if idx[p] < elems.len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
                if p == a {
                    break;
                }
            }
        }
    }
    for (c, v) in &origin {
        if let Some(m) = marked.marking.markers.get(v) {
            star.insert_unchecked(Fact::new(m.clone(), vec![c.clone()]));
        }
    }
    let count = oracle.count(&star)?;
    Ok(SharpRun { count, flooded: star })
}
