//! Random and exhaustive generators for small test instances.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::*;

/// Databases with more candidate facts than this are not enumerated.
pub const EXHAUSTIVE_FACT_CAP: usize = 20;

pub fn constants(n: usize) -> Vec<Const> {
    (0..n).map(|i| Const::from(format!("c{i}"))).collect()
}

fn tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Every fact over `schema` with constants c0..c{n-1}.
pub fn all_facts(schema: &Schema, n: usize) -> Vec<Fact> {
    let cs = constants(n);
    let mut out = Vec::new();
    for (r, a) in schema.relations() {
        for t in tuples(n, a) {
            out.push(Fact::new(r.clone(), t.iter().map(|&i| cs[i].clone()).collect()));
        }
    }
    out
}

/// Each candidate fact is kept with probability `density`.
pub fn random_database<R: Rng + ?Sized>(rng: &mut R, schema: &Schema, n: usize, density: f64) -> Database {
    let facts: Vec<Fact> = all_facts(schema, n).into_iter().filter(|_| rng.gen_bool(density)).collect();
    Database::from_facts(schema.clone(), facts).expect("facts follow the schema")
}

/// Every database over `schema` whose constants lie in c0..c{n-1}.
pub fn all_databases(schema: &Schema, n: usize) -> Result<impl Iterator<Item = Database>> {
    let facts = all_facts(schema, n);
    if facts.len() > EXHAUSTIVE_FACT_CAP {
        return Err(Error::Budget(format!(
            "{} candidate facts exceed the exhaustive cap of {EXHAUSTIVE_FACT_CAP}",
            facts.len()
        )));
    }
    let schema = schema.clone();
    Ok((0u64..(1u64 << facts.len())).map(move |mask| {
        let chosen = facts.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, f)| f.clone());
        Database::from_facts(schema.clone(), chosen).expect("facts follow the schema")
    }))
}

fn var(i: usize) -> Var {
    Var::from(format!("v{i}"))
}

/// Shape of a random CQ.
#[derive(Clone, Copy, Debug)]
pub struct CqShape {
    pub vars: usize,
    pub answers: usize,
    pub atoms: usize,
    /// Probability of each possible answer equality.
    pub equality_rate: f64,
}

impl CqShape {
    pub fn new(vars: usize, answers: usize, atoms: usize) -> Self {
        CqShape {
            vars,
            answers,
            atoms,
            equality_rate: 0.0,
        }
    }
}

/// A random CQ over `schema`; variables not placed in any atom are dropped.
pub fn random_cq<R: Rng + ?Sized>(rng: &mut R, schema: &Schema, shape: CqShape) -> ConjunctiveQuery {
    let rels: Vec<(RelName, usize)> = schema.relations().map(|(r, a)| (r.clone(), a)).collect();
    assert!(!rels.is_empty(), "schema must be nonempty");
    let nv = shape.vars.max(1);
    let answers = shape.answers.min(nv);
    let mut atoms: Vec<RelAtom> = (0..shape.atoms.max(1))
        .map(|_| {
            let (r, a) = rels.choose(rng).expect("nonempty").clone();
            RelAtom::new(r, (0..a).map(|_| var(rng.gen_range(0..nv))).collect())
        })
        .collect();
    // Place uncovered answer variables into random positions.
    let pos: Vec<(usize, usize)> = atoms
        .iter()
        .enumerate()
        .flat_map(|(i, a)| (0..a.args.len()).map(move |p| (i, p)))
        .collect();
    for x in 0..answers {
        let v = var(x);
        if atoms.iter().any(|a| a.args.contains(&v)) {
            continue;
        }
        if pos.is_empty() {
            break;
        }
        let (i, p) = *pos.choose(rng).expect("nonempty");
        let old = atoms[i].args[p].clone();
        let still = atoms
            .iter()
            .enumerate()
            .any(|(j, a)| a.args.iter().enumerate().any(|(q, w)| w == &old && (j, q) != (i, p)));
        if old.as_str()[1..].parse::<usize>().is_ok_and(|k| k < answers) && !still {
            // Would uncover another answer variable; extend instead.
            let (r, a) = rels.iter().find(|(_, a)| *a >= 1).expect("positive arity").clone();
            atoms.push(RelAtom::new(r, (0..a).map(|_| v.clone()).collect()));
        } else {
            atoms[i].args[p] = v;
        }
    }
    let present: BTreeSet<Var> = atoms.iter().flat_map(|a| a.args.iter().cloned()).collect();
    let answer_vars: Vec<Var> = (0..answers).map(var).filter(|v| present.contains(v)).collect();
    let mut eqs = Vec::new();
    for i in 0..answer_vars.len() {
        for j in i + 1..answer_vars.len() {
            if shape.equality_rate > 0.0 && rng.gen_bool(shape.equality_rate) {
                eqs.push((answer_vars[i].clone(), answer_vars[j].clone()));
            }
        }
    }
    ConjunctiveQuery::new(schema.clone(), answer_vars, atoms, eqs).expect("generated query is valid")
}

/// A random UCQ whose disjuncts share the answer tuple.
pub fn random_ucq<R: Rng + ?Sized>(rng: &mut R, schema: &Schema, disjuncts: usize, shape: CqShape) -> UnionQuery {
    loop {
        let ds: Vec<ConjunctiveQuery> = (0..disjuncts.max(1)).map(|_| random_cq(rng, schema, shape)).collect();
        let a = ds[0].answer_vars().to_vec();
        if ds.iter().all(|d| d.answer_vars() == a.as_slice()) {
            return UnionQuery::new(ds).expect("shared answer tuple");
        }
    }
}

/// Random full guarded TGDs over `schema`: a guard atom with distinct
/// variables, an optional side atom over guard variables and a head over
/// guard variables.
pub fn random_full_guarded_ontology<R: Rng + ?Sized>(rng: &mut R, schema: &Schema, tgds: usize) -> Ontology {
    let rels: Vec<(RelName, usize)> = schema.relations().map(|(r, a)| (r.clone(), a)).collect();
    let mut out = Vec::new();
    while out.len() < tgds {
        let (g, ga) = rels.choose(rng).expect("nonempty").clone();
        let gv: Vec<Var> = (0..ga).map(var).collect();
        let pick = |rng: &mut R, a: usize| -> Vec<Var> {
            (0..a).map(|_| gv[rng.gen_range(0..gv.len().max(1))].clone()).collect()
        };
        let mut body = vec![RelAtom::new(g.clone(), gv.clone())];
        if ga > 0 && rng.gen_bool(0.3) {
            let (s, sa) = rels.choose(rng).expect("nonempty").clone();
            if sa == 0 || ga > 0 {
                body.push(RelAtom::new(s, pick(rng, sa)));
            }
        }
        let (h, ha) = rels.choose(rng).expect("nonempty").clone();
        if ha > 0 && ga == 0 {
            continue;
        }
        let head = vec![RelAtom::new(h, pick(rng, ha))];
        if body.contains(&head[0]) {
            continue;
        }
        if let Ok(t) = Tgd::new(body, head, Vec::new()) {
            out.push(t);
        }
    }
    Ontology::new(out).expect("relations follow the schema")
}

/// The family with Ω = {R(x,y) → S(x,y)} whose measures drop to 1 under
/// Ω: returns (Ω, {R,S}, q_n, p_n), with p_n being q_n without S-atoms.
pub fn lowering_example(n: usize) -> (Ontology, Schema, ConjunctiveQuery, ConjunctiveQuery) {
    let schema = Schema::from_pairs([("R", 2), ("S", 2)]).expect("valid schema");
    let ont = Ontology::new(vec![Tgd::new(
        vec![RelAtom::parse_args("R", &["x", "y"])],
        vec![RelAtom::parse_args("S", &["x", "y"])],
        Vec::new(),
    )
    .expect("full TGD")])
    .expect("valid ontology");
    let x = |i: usize| Var::from(format!("x{i}"));
    let z = |i: usize| Var::from(format!("z{i}"));
    let y = |i: usize, j: usize| Var::from(format!("y{i}_{j}"));
    let mut r_atoms = Vec::new();
    for i in 1..=n {
        r_atoms.push(RelAtom::new("R", vec![x(i), z(1)]));
    }
    for i in 1..n {
        r_atoms.push(RelAtom::new("R", vec![z(i), z(i + 1)]));
    }
    let mut s_atoms = Vec::new();
    for i in 1..=n {
        s_atoms.push(RelAtom::new("S", vec![x(i), y(i, n + 1 - i)]));
    }
    for i in 1..=n {
        for j in 1..=n {
            if i + j >= 2 && i + j <= n {
                s_atoms.push(RelAtom::new("S", vec![y(i + 1, j), y(i, j)]));
                s_atoms.push(RelAtom::new("S", vec![y(i, j + 1), y(i, j)]));
            }
        }
    }
    let answers: Vec<Var> = (1..=n).map(x).chain((1..=n).map(z)).collect();
    let p = ConjunctiveQuery::new(schema.clone(), answers.clone(), r_atoms.clone(), Vec::new()).expect("valid p_n");
    let mut all = r_atoms;
    all.extend(s_atoms);
    let q = ConjunctiveQuery::new(schema.clone(), answers, all, Vec::new()).expect("valid q_n");
    (ont, schema, q, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn generators_are_valid() {
        let mut rng = StdRng::seed_from_u64(7);
        let s = Schema::from_pairs([("A", 1), ("R", 2)]).unwrap();
        for _ in 0..200 {
            let q = random_cq(&mut rng, &s, CqShape { vars: 4, answers: 2, atoms: 3, equality_rate: 0.2 });
            assert!(q.answer_vars().len() <= 2);
            let o = random_full_guarded_ontology(&mut rng, &s, 2);
            assert!(o.all_full());
        }
        assert_eq!(all_databases(&s, 2).unwrap().count(), 1 << 6);
        assert!(all_databases(&s, 5).is_err());
    }

    #[test]
    fn lowering_shape() {
        let (_, _, q, p) = lowering_example(2);
        assert_eq!(q.answer_vars().len(), 4);
        assert_eq!(p.atoms().len(), 3);
        assert_eq!(q.atoms().len(), 7);
    }
}
