//! Collapsing-based approximations of OMQs and the M_k approximation of
//! CQSs under full constraints.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use crate::canon::canonical_key;
use crate::chase::chase_query;
use crate::error::{Error, Result};
use crate::hom::{contained_under_full, core};
use crate::measures::Measure;
use crate::model::*;

pub const DEFAULT_COLLAPSING_VAR_CAP: usize = 9;
pub const DEFAULT_MK_NODE_BUDGET: usize = 20_000;
/// Subqueries of a chased disjunct are enumerated exhaustively up to this
/// many atoms.
const SUBQUERY_ATOM_CAP: usize = 10;

/// A CQ obtained by identifying variables and adding answer equalities.
#[derive(Clone, Debug)]
pub struct Collapsing {
    pub source: ConjunctiveQuery,
    /// Image of every variable of the source.
    pub identification: BTreeMap<Var, Var>,
    /// Equalities added on top of the source's own.
    pub added_equalities: Vec<(Var, Var)>,
    pub query: ConjunctiveQuery,
}

/// Restricted growth strings of length `n`; `ok` filters partial strings.
fn partitions(n: usize, ok: &dyn Fn(&[usize]) -> bool, out: &mut dyn FnMut(&[usize])) {
    fn go(
        n: usize,
        cur: &mut Vec<usize>,
        max: usize,
        ok: &dyn Fn(&[usize]) -> bool,
        out: &mut dyn FnMut(&[usize]),
    ) {
        if cur.len() == n {
            out(cur);
            return;
        }
        for b in 0..=max {
            cur.push(b);
            if ok(cur) {
                go(n, cur, if b == max { max + 1 } else { max }, ok, out);
            }
            cur.pop();
        }
    }
    go(n, &mut Vec::new(), 0, ok, out);
}

fn check_cap(q: &ConjunctiveQuery, cap: usize) -> Result<()> {
    let n = q.vars().len();
    if n > cap {
        return Err(Error::Budget(format!("{n} variables exceed the collapsing cap of {cap}")));
    }
    Ok(())
}

fn for_each_collapsing(q: &ConjunctiveQuery, cap: usize, f: &mut dyn FnMut(Collapsing)) -> Result<()> {
    check_cap(q, cap)?;
    let vars: Vec<Var> = q.vars().into_iter().collect();
    let is_ans: Vec<bool> = vars.iter().map(|v| q.is_answer_var(v)).collect();
    let ans: Vec<Var> = q.answer_vars().to_vec();
    let reps = q.representatives();
    // No block may hold two answer variables.
    let var_ok = |cur: &[usize]| {
        let i = cur.len() - 1;
        !is_ans[i] || !(0..i).any(|j| is_ans[j] && cur[j] == cur[i])
    };
    // Answer partitions keep every equality the source already has.
    let eq_ok = |cur: &[usize]| {
        let i = cur.len() - 1;
        (0..i).all(|j| (reps[&ans[j]] == reps[&ans[i]]) <= (cur[j] == cur[i]))
    };
    let mut var_parts = Vec::new();
    partitions(vars.len(), &var_ok, &mut |p| var_parts.push(p.to_vec()));
    let mut eq_parts = Vec::new();
    partitions(ans.len(), &eq_ok, &mut |p| eq_parts.push(p.to_vec()));
    let own: BTreeSet<(Var, Var)> = q.equalities().iter().cloned().collect();
    for vp in &var_parts {
        let mut name: BTreeMap<usize, Var> = BTreeMap::new();
        for (i, &b) in vp.iter().enumerate() {
            if is_ans[i] {
                name.insert(b, vars[i].clone());
            }
        }
        for (i, &b) in vp.iter().enumerate() {
            name.entry(b).or_insert_with(|| vars[i].clone());
        }
        let identification: BTreeMap<Var, Var> =
            vars.iter().zip(vp).map(|(v, b)| (v.clone(), name[b].clone())).collect();
        let atoms: Vec<RelAtom> = q
            .atoms()
            .iter()
            .map(|a| a.rename(|v| identification[v].clone()))
            .collect();
        for ep in &eq_parts {
            let mut eqs = Vec::new();
            let mut added = Vec::new();
            for i in 0..ans.len() {
                if let Some(j) = (0..i).find(|&j| ep[j] == ep[i]) {
                    let pair = if ans[j] < ans[i] {
                        (ans[j].clone(), ans[i].clone())
                    } else {
                        (ans[i].clone(), ans[j].clone())
                    };
                    eqs.push(pair.clone());
                    if !own.contains(&pair) {
                        added.push(pair);
                    }
                }
            }
            let query = ConjunctiveQuery::new(q.schema().clone(), ans.clone(), atoms.clone(), eqs)?;
            f(Collapsing {
                source: q.clone(),
                identification: identification.clone(),
                added_equalities: added,
                query,
            });
        }
    }
    Ok(())
}

/// Number of (identification, equality) choices before isomorphism
/// deduplication.
pub fn collapsing_count(q: &ConjunctiveQuery) -> Result<usize> {
    let mut n = 0;
    for_each_collapsing(q, DEFAULT_COLLAPSING_VAR_CAP, &mut |_| n += 1)?;
    Ok(n)
}

/// All collapsings of `q` up to isomorphism; the identity comes first.
pub fn collapsings(q: &ConjunctiveQuery) -> Result<Vec<Collapsing>> {
    collapsings_with_cap(q, DEFAULT_COLLAPSING_VAR_CAP)
}

pub fn collapsings_with_cap(q: &ConjunctiveQuery, cap: usize) -> Result<Vec<Collapsing>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    seen.insert(canonical_key(q));
    out.push(Collapsing {
        source: q.clone(),
        identification: q.vars().into_iter().map(|v| (v.clone(), v)).collect(),
        added_equalities: Vec::new(),
        query: q.clone(),
    });
    for_each_collapsing(q, cap, &mut |c| {
        if seen.insert(canonical_key(&c.query)) {
            out.push(c);
        }
    })?;
    Ok(out)
}

fn collapsing_approximation(q: &Omq, keep: &dyn Fn(&ConjunctiveQuery) -> Result<bool>) -> Result<Omq> {
    let mut seen = HashSet::new();
    let mut disjuncts = Vec::new();
    for d in q.query.disjuncts() {
        for c in collapsings(d)? {
            if keep(&c.query)? && seen.insert(canonical_key(&c.query)) {
                disjuncts.push(c.query);
            }
        }
    }
    if disjuncts.is_empty() {
        return Err(Error::Invalid("no collapsing qualifies".into()));
    }
    Omq::new(q.ontology.clone(), q.data_schema.clone(), UnionQuery::new(disjuncts)?)
}

/// Q^CTW_k: the collapsings of contract treewidth at most `k`.
pub fn ctw_approximation(q: &Omq, k: usize) -> Result<Omq> {
    collapsing_approximation(q, &|c| Ok(Measure::Ctw.compute(c)? <= k))
}

/// Q^SS_k: the collapsings of starsize at most `k`; needs k ≥ ar(Σ).
pub fn ss_approximation(q: &Omq, k: usize) -> Result<Omq> {
    let ar = q.data_schema.max_arity();
    if k < ar {
        return Err(Error::Invalid(format!(
            "starsize bound {k} is below the data schema arity {ar}; the approximation is only defined for k >= {ar}"
        )));
    }
    collapsing_approximation(q, &|c| Ok(Measure::Ss.compute(c)? <= k))
}

/// A nonempty set of measures with a common bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureSet {
    pub measures: BTreeSet<Measure>,
    pub k: usize,
}

impl MeasureSet {
    pub fn new(measures: impl IntoIterator<Item = Measure>, k: usize) -> Result<Self> {
        let measures: BTreeSet<Measure> = measures.into_iter().collect();
        if measures.is_empty() {
            return Err(Error::Invalid("measure set is empty".into()));
        }
        if k == 0 {
            return Err(Error::Invalid("measure bound must be at least 1".into()));
        }
        Ok(MeasureSet { measures, k })
    }

    pub fn admits(&self, q: &ConjunctiveQuery) -> Result<bool> {
        for m in &self.measures {
            if m.compute(q)? > self.k {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn admits_union(&self, q: &UnionQuery) -> Result<bool> {
        for d in q.disjuncts() {
            if !self.admits(d)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MkBudget {
    /// Search states explored per uncovered disjunct.
    pub max_nodes: usize,
}

impl Default for MkBudget {
    fn default() -> Self {
        MkBudget {
            max_nodes: DEFAULT_MK_NODE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MkProgress {
    pub candidates_tested: usize,
    pub candidates_kept: usize,
    pub search_nodes: usize,
}

/// Candidates found for q^M_k.
#[derive(Clone, Debug)]
pub struct MkApproximation {
    /// |V| = ℓ · ar(Σ).
    pub variable_budget: usize,
    /// Kept candidates with no other kept candidate containing them.
    pub query: Option<UnionQuery>,
    /// Disjuncts of q (0-based) contained in some kept candidate.
    pub covered: Vec<bool>,
    /// True when the union is equivalent to q^M_k.
    pub authoritative: bool,
    /// True when every uncovered disjunct was shown to admit no candidate.
    pub exhausted: bool,
    pub progress: MkProgress,
}

#[derive(Clone, Debug)]
pub enum MkVerdict {
    Equivalent(UnionQuery),
    NotEquivalent,
    Unknown(String),
}

impl MkVerdict {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            MkVerdict::Equivalent(_) => Some(true),
            MkVerdict::NotEquivalent => Some(false),
            MkVerdict::Unknown(_) => None,
        }
    }
}

struct Pool<'a> {
    cqs: &'a Cqs,
    measures: &'a MeasureSet,
    var_budget: usize,
    seen: HashSet<String>,
    kept: Vec<ConjunctiveQuery>,
    progress: MkProgress,
}

impl Pool<'_> {
    fn offer(&mut self, p: ConjunctiveQuery) -> Result<bool> {
        if p.vars().len() > self.var_budget || !self.seen.insert(canonical_key(&p)) {
            return Ok(false);
        }
        self.progress.candidates_tested += 1;
        if !self.measures.admits(&p)? {
            return Ok(false);
        }
        let u = UnionQuery::single(p.clone());
        if !contained_under_full(&u, &self.cqs.query, &self.cqs.constraints)? {
            return Ok(false);
        }
        self.progress.candidates_kept += 1;
        self.kept.push(p);
        Ok(true)
    }

    fn covers(&self, qi: &ConjunctiveQuery) -> Result<bool> {
        let u = UnionQuery::single(qi.clone());
        for p in &self.kept {
            if contained_under_full(&u, &UnionQuery::single(p.clone()), &self.cqs.constraints)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn subsets_covering_answers(q: &ConjunctiveQuery, out: &mut Vec<Vec<RelAtom>>) {
    let atoms = q.atoms();
    let n = atoms.len();
    if n <= SUBQUERY_ATOM_CAP {
        for mask in 1u64..(1u64 << n) {
            out.push((0..n).filter(|i| mask >> i & 1 == 1).map(|i| atoms[i].clone()).collect());
        }
    }
    let rels: Vec<RelName> = atoms
        .iter()
        .map(|a| a.relation.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if rels.len() <= 16 {
        for mask in 1u64..(1u64 << rels.len()) {
            let keep: BTreeSet<&RelName> = (0..rels.len()).filter(|i| mask >> i & 1 == 1).map(|i| &rels[i]).collect();
            out.push(atoms.iter().filter(|a| keep.contains(&a.relation)).cloned().collect());
        }
    }
}

fn seeds(qi: &ConjunctiveQuery, t: &Ontology) -> Result<Vec<ConjunctiveQuery>> {
    let mut out = vec![qi.clone(), core(qi)];
    let ch = chase_query(qi, t)?;
    let mut subs = Vec::new();
    subsets_covering_answers(&ch, &mut subs);
    for atoms in subs {
        if let Ok(p) = ConjunctiveQuery::new(qi.schema().clone(), qi.answer_vars().to_vec(), atoms, qi.equalities().to_vec()) {
            out.push(core(&p));
        }
    }
    Ok(out)
}

/// Outcome of the unfolding search for one disjunct.
enum Search {
    Found,
    Exhausted,
    OutOfBudget,
}

/// Searches for p with a homomorphism into ch_T(D_{q_i}) that is an M_k-query
/// contained in q, adding atoms one at a time.
fn unfold_search(pool: &mut Pool, qi: &ConjunctiveQuery, budget: &MkBudget) -> Result<Search> {
    let t = &pool.cqs.constraints;
    let ch = chase_query(qi, t)?;
    let reps = qi.representatives();
    let schema = qi.schema().clone();
    let ans: Vec<Var> = qi.answer_vars().to_vec();
    // Target facts over representatives.
    let facts: Vec<(RelName, Vec<Var>)> = ch
        .atoms()
        .iter()
        .map(|a| (a.relation.clone(), a.args.iter().map(|v| reps.get(v).cloned().unwrap_or_else(|| v.clone())).collect()))
        .collect();
    #[derive(Clone)]
    struct State {
        atoms: Vec<RelAtom>,
        image: BTreeMap<Var, Var>,
        fresh: usize,
    }
    let start = State {
        atoms: Vec::new(),
        image: ans.iter().map(|x| (x.clone(), reps[x].clone())).collect(),
        fresh: 0,
    };
    let key = |s: &State| -> String {
        let mut atoms = s.atoms.clone();
        for (v, c) in &s.image {
            atoms.push(RelAtom::new(RelName::new(&format!("@{c}")), vec![v.clone()]));
        }
        match ConjunctiveQuery::infer(ans.clone(), atoms, Vec::new()) {
            Ok(q) => canonical_key(&q),
            Err(_) => String::new(),
        }
    };
    let as_query = |s: &State| -> Result<ConjunctiveQuery> {
        let present: BTreeSet<&Var> = s.atoms.iter().flat_map(|a| a.args.iter()).collect();
        let av: Vec<Var> = ans.iter().filter(|x| present.contains(x)).cloned().collect();
        let eqs: Vec<(Var, Var)> = qi
            .equalities()
            .iter()
            .filter(|(a, b)| present.contains(a) && present.contains(b))
            .cloned()
            .collect();
        ConjunctiveQuery::new(schema.clone(), av, s.atoms.clone(), eqs)
    };
    let mut visited = HashSet::new();
    visited.insert(key(&start));
    let mut queue = VecDeque::from([start]);
    let mut nodes = 0usize;
    while let Some(s) = queue.pop_front() {
        nodes += 1;
        pool.progress.search_nodes += 1;
        if nodes > budget.max_nodes {
            return Ok(Search::OutOfBudget);
        }
        if !s.atoms.is_empty() {
            let partial = as_query(&s)?;
            if !pool.measures.admits(&partial)? {
                continue;
            }
            if partial.answer_vars().len() == ans.len() && pool.offer(partial.clone())? {
                return Ok(Search::Found);
            }
        }
        let nvars = s.image.len();
        for (rel, target) in &facts {
            // Each position takes an existing variable with the right image
            // or a new variable.
            let mut choices: Vec<Vec<Option<Var>>> = Vec::new();
            for c in target {
                let mut opts: Vec<Option<Var>> = s
                    .image
                    .iter()
                    .filter(|(_, img)| *img == c)
                    .map(|(v, _)| Some(v.clone()))
                    .collect();
                opts.push(None);
                choices.push(opts);
            }
            let mut idx = vec![0usize; target.len()];
            loop {
                let mut next = s.clone();
                let mut args = Vec::new();
                let mut ok = true;
                for (p, &i) in idx.iter().enumerate() {
                    match &choices[p][i] {
                        Some(v) => args.push(v.clone()),
                        None => {
                            let c = &target[p];
                            if nvars + (next.fresh - s.fresh) >= pool.var_budget {
                                ok = false;
                                break;
                            }
                            let v = Var::from(format!("u{}", next.fresh));
                            next.fresh += 1;
                            next.image.insert(v.clone(), c.clone());
                            args.push(v);
                        }
                    }
                }
                if ok {
                    let atom = RelAtom::new(rel.clone(), args);
                    if !next.atoms.contains(&atom) {
                        next.atoms.push(atom);
                        next.atoms.sort();
                        if visited.insert(key(&next)) {
                            queue.push_back(next);
                        }
                    }
                }
                // Advance the mixed-radix counter.
                let mut p = 0;
                loop {
                    if p == idx.len() {
                        break;
                    }
                    idx[p] += 1;
                    if idx[p] < choices[p].len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
                if p == idx.len() {
                    break;
                }
            }
        }
    }
    Ok(Search::Exhausted)
}

fn minimal_union(kept: &[ConjunctiveQuery], t: &Ontology) -> Result<Option<UnionQuery>> {
    let mut order: Vec<&ConjunctiveQuery> = kept.iter().collect();
    order.sort_by_key(|p| (p.atoms().len(), p.vars().len()));
    let mut out: Vec<ConjunctiveQuery> = Vec::new();
    for p in order {
        let u = UnionQuery::single(p.clone());
        let mut redundant = false;
        for o in &out {
            if contained_under_full(&u, &UnionQuery::single(o.clone()), t)? {
                redundant = true;
                break;
            }
        }
        if !redundant {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Ok(None);
    }
    Ok(Some(UnionQuery::new(out)?))
}

/// Candidates for q^M_k: seeds from subqueries of the chased disjuncts,
/// then a bounded unfolding search for each disjunct still uncovered.
pub fn mk_approximation(s: &Cqs, m: &MeasureSet, budget: &MkBudget) -> Result<MkApproximation> {
    mk_approximation_with_progress(s, m, budget, &mut |_| {})
}

pub fn mk_approximation_with_progress(
    s: &Cqs,
    m: &MeasureSet,
    budget: &MkBudget,
    report: &mut dyn FnMut(&MkProgress),
) -> Result<MkApproximation> {
    let t = &s.constraints;
    if !t.all_full() {
        return Err(Error::NotFull);
    }
    let ell = s.query.disjuncts().iter().map(|d| d.vars().len()).max().unwrap_or(0);
    let var_budget = ell * s.schema.max_arity().max(1);
    let mut pool = Pool {
        cqs: s,
        measures: m,
        var_budget,
        seen: HashSet::new(),
        kept: Vec::new(),
        progress: MkProgress::default(),
    };
    for qi in s.query.disjuncts() {
        for p in seeds(qi, t)? {
            pool.offer(p)?;
        }
        report(&pool.progress);
    }
    let mut covered = Vec::new();
    for qi in s.query.disjuncts() {
        covered.push(pool.covers(qi)?);
    }
    let mut exhausted = true;
    if covered.iter().any(|c| !c) {
        if t.is_empty() {
            // Without constraints a maximal disjunct is covered exactly when
            // its core is an M_k-query, and the core is always a seed.
        } else {
            for (i, qi) in s.query.disjuncts().iter().enumerate() {
                if covered[i] {
                    continue;
                }
                match unfold_search(&mut pool, qi, budget)? {
                    Search::Found => {}
                    Search::Exhausted => {}
                    Search::OutOfBudget => exhausted = false,
                }
                report(&pool.progress);
            }
            for (i, qi) in s.query.disjuncts().iter().enumerate() {
                if !covered[i] {
                    covered[i] = pool.covers(qi)?;
                }
            }
        }
    }
    let all = covered.iter().all(|&c| c);
    Ok(MkApproximation {
        variable_budget: var_budget,
        query: minimal_union(&pool.kept, t)?,
        authoritative: all,
        exhausted: all || exhausted,
        covered,
        progress: pool.progress,
    })
}

/// Is q ≡_T q^M_k? The witness is the kept union when it is.
pub fn decide_mk_equivalence(s: &Cqs, m: &MeasureSet, budget: &MkBudget) -> Result<MkVerdict> {
    let a = mk_approximation(s, m, budget)?;
    if a.authoritative {
        let w = a.query.expect("covered disjuncts imply a candidate");
        return Ok(MkVerdict::Equivalent(w));
    }
    if a.exhausted {
        return Ok(MkVerdict::NotEquivalent);
    }
    Ok(MkVerdict::Unknown(format!(
        "unknown within budget: {} search states explored",
        a.progress.search_nodes
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hom::contained_under_full;
    use crate::text::{parse_cq, parse_omq};

    fn cq(s: &str) -> ConjunctiveQuery {
        parse_cq(s, None).unwrap()
    }

    fn bell(n: usize) -> usize {
        let mut row = vec![1usize];
        for _ in 0..n {
            let mut next = vec![*row.last().unwrap()];
            for &r in &row {
                let l = *next.last().unwrap();
                next.push(l + r);
            }
            row = next;
        }
        row[0]
    }

    #[test]
    fn single_quantified() {
        let c = collapsings(&cq("q(x) :- R(x,y).")).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(canonical_key(&c[0].query), canonical_key(&cq("q(x) :- R(x,y).")));
        assert_eq!(canonical_key(&c[1].query), canonical_key(&cq("q(x) :- R(x,x).")));
    }

    #[test]
    fn boolean_partition_count() {
        let q = cq("q() :- R(a,b), R(b,c), S(c).");
        assert_eq!(collapsing_count(&q).unwrap(), bell(3));
    }

    #[test]
    fn answer_pairs_become_equalities() {
        let q = cq("q(x,y) :- R(x,y).");
        let c = collapsings(&q).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.iter().any(|c| c.query.equalities().len() == 1));
        assert!(c.iter().all(|c| c.query.atoms()[0].args.len() == 2));
    }

    #[test]
    fn ctw_approximation_contained() {
        let q = parse_omq(
            "[schema]\nrel R/2;\n[tgds]\n[query]\nq(x1,x2,x3) :- R(x1,y), R(x2,y), R(x3,y).\n",
        )
        .unwrap();
        let a = ctw_approximation(&q, 1).unwrap();
        assert!(contained_under_full(&a.query, &q.query, &q.ontology).unwrap());
        assert!(a.query.disjuncts().iter().all(|d| Measure::Ctw.compute(d).unwrap() <= 1));
        assert!(ctw_approximation(&q, 3).unwrap().query.disjuncts().len() > 1);
        assert!(ss_approximation(&q, 1).is_err());
    }

    #[test]
    fn triangle_not_tw1() {
        let q = cq("q() :- R(a,b), R(b,c), R(c,a).");
        let s = Cqs::new(Ontology::empty(), q.schema().clone(), UnionQuery::single(q)).unwrap();
        let m = MeasureSet::new([Measure::Tw], 1).unwrap();
        let v = decide_mk_equivalence(&s, &m, &MkBudget::default()).unwrap();
        assert_eq!(v.as_bool(), Some(false));
    }

    #[test]
    fn already_mk() {
        let q = cq("q(x) :- R(x,y), R(y,z).");
        let s = Cqs::new(Ontology::empty(), q.schema().clone(), UnionQuery::single(q)).unwrap();
        let m = MeasureSet::new([Measure::Tw, Measure::Ctw], 1).unwrap();
        assert_eq!(decide_mk_equivalence(&s, &m, &MkBudget::default()).unwrap().as_bool(), Some(true));
    }

    #[test]
    fn lowering_at_two() {
        let omq = parse_omq(
            "[schema]\nrel R/2; rel S/2;\n[tgds]\nR(x,y) -> S(x,y).\n[query]\n\
             q(x1,x2,z1,z2) :- R(x1,z1), R(x2,z1), R(z1,z2), S(x1,y12), S(x2,y21), S(y21,y11), S(y12,y11).\n",
        )
        .unwrap();
        let s = Cqs::new(omq.ontology.clone(), omq.data_schema.clone(), omq.query.clone()).unwrap();
        let m = MeasureSet::new([Measure::Tw, Measure::Ctw], 1).unwrap();
        let MkVerdict::Equivalent(w) = decide_mk_equivalence(&s, &m, &MkBudget::default()).unwrap() else {
            panic!("expected equivalence");
        };
        let p2 = cq("q(x1,x2,z1,z2) :- R(x1,z1), R(x2,z1), R(z1,z2).").with_schema(omq.data_schema.clone()).unwrap();
        let p2 = UnionQuery::single(p2);
        assert!(contained_under_full(&w, &p2, &s.constraints).unwrap());
        assert!(contained_under_full(&p2, &w, &s.constraints).unwrap());
    }

    #[test]
    fn triangle_under_constraints_not_equivalent() {
        let omq = parse_omq("[schema]\nrel R/2; rel S/2;\n[tgds]\nR(x,y) -> S(x,y).\n[query]\nq() :- R(a,b), R(b,c), R(c,a).\n").unwrap();
        let s = Cqs::new(omq.ontology.clone(), omq.data_schema.clone(), omq.query.clone()).unwrap();
        let m = MeasureSet::new([Measure::Tw], 1).unwrap();
        let v = decide_mk_equivalence(&s, &m, &MkBudget { max_nodes: 2000 }).unwrap();
        assert_ne!(v.as_bool(), Some(true));
    }
}
