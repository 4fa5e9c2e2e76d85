//! Homomorphism search and the operations built on it: answer counting,
//! cores, containment, renaming equivalence, automorphisms.
//!
//! Every count in the crate that is called "brute force" ends up here.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::chase::chase_database;
use crate::error::{Error, Result};
use crate::model::*;

const UNBOUND: u32 = u32::MAX;

struct RelIndex {
    tuples: Vec<Box<[u32]>>,
    set: HashSet<Box<[u32]>>,
    by_pos: Vec<HashMap<u32, Vec<u32>>>,
}

/// A database with integer constants and per-position indexes.
pub struct IndexedDb {
    consts: Vec<Const>,
    ids: HashMap<Const, u32>,
    rels: HashMap<RelName, RelIndex>,
}

impl IndexedDb {
    pub fn new(db: &Database) -> Self {
        let mut consts = Vec::new();
        let mut ids = HashMap::new();
        for c in db.adom() {
            ids.insert(c.clone(), consts.len() as u32);
            consts.push(c);
        }
        let mut rels: HashMap<RelName, RelIndex> = HashMap::new();
        for f in db.facts() {
            let t: Box<[u32]> = f.args.iter().map(|c| ids[c]).collect();
            let idx = rels.entry(f.relation.clone()).or_insert_with(|| RelIndex {
                tuples: Vec::new(),
                set: HashSet::new(),
                by_pos: vec![HashMap::new(); f.args.len()],
            });
            let n = idx.tuples.len() as u32;
            for (p, &v) in t.iter().enumerate() {
                idx.by_pos[p].entry(v).or_default().push(n);
            }
            idx.set.insert(t.clone());
            idx.tuples.push(t);
        }
        IndexedDb { consts, ids, rels }
    }

    pub fn constants(&self) -> &[Const] {
        &self.consts
    }

    pub fn id(&self, c: &Const) -> Option<u32> {
        self.ids.get(c).copied()
    }
}

struct CAtom<'a> {
    rel: Option<&'a RelIndex>,
    args: Vec<usize>,
}

/// One homomorphism problem: atoms over numbered variables, a database,
/// fixed values and per-variable domain restrictions.
struct Problem<'a> {
    db: &'a IndexedDb,
    atoms: Vec<CAtom<'a>>,
    nvars: usize,
    fixed: Vec<u32>,
    allowed: Vec<Option<Vec<bool>>>,
    extra: Vec<Const>,
    impossible: bool,
}

impl<'a> Problem<'a> {
    fn new(
        db: &'a IndexedDb,
        atoms: &[RelAtom],
        vars: &[Var],
        fixed: &BTreeMap<Var, Const>,
        allowed: &BTreeMap<Var, BTreeSet<Const>>,
    ) -> (Self, HashMap<Var, usize>) {
        let mut var_ids: HashMap<Var, usize> = HashMap::new();
        for v in vars.iter().chain(atoms.iter().flat_map(|a| a.args.iter())) {
            let n = var_ids.len();
            var_ids.entry(v.clone()).or_insert(n);
        }
        let nvars = var_ids.len();
        let mut impossible = false;
        let catoms: Vec<CAtom> = atoms
            .iter()
            .map(|a| {
                let rel = db.rels.get(&a.relation);
                if rel.is_none() {
                    impossible = true;
                }
                CAtom {
                    rel,
                    args: a.args.iter().map(|v| var_ids[v]).collect(),
                }
            })
            .collect();
        let mut fixed_ids = vec![UNBOUND; nvars];
        let mut extra = Vec::new();
        for (v, c) in fixed {
            if let Some(&i) = var_ids.get(v) {
                fixed_ids[i] = match db.id(c) {
                    Some(id) => id,
                    None => {
                        extra.push(c.clone());
                        (db.consts.len() + extra.len() - 1) as u32
                    }
                };
            }
        }
        let mut allowed_ids = vec![None; nvars];
        for (v, cs) in allowed {
            if let Some(&i) = var_ids.get(v) {
                let mut bits = vec![false; db.consts.len()];
                for c in cs {
                    if let Some(id) = db.id(c) {
                        bits[id as usize] = true;
                    }
                }
                allowed_ids[i] = Some(bits);
            }
        }
        (
            Problem {
                db,
                atoms: catoms,
                nvars,
                fixed: fixed_ids,
                allowed: allowed_ids,
                extra,
                impossible,
            },
            var_ids,
        )
    }

    fn constant(&self, id: u32) -> Const {
        let i = id as usize;
        if i < self.db.consts.len() {
            self.db.consts[i].clone()
        } else {
            self.extra[i - self.db.consts.len()].clone()
        }
    }

    fn rel(&self, a: usize) -> &'a RelIndex {
        self.atoms[a].rel.expect("checked by `impossible`")
    }

    fn permitted(&self, v: usize, c: u32) -> bool {
        match &self.allowed[v] {
            None => true,
            Some(bits) => bits.get(c as usize).copied().unwrap_or(false),
        }
    }

    fn atom_holds(&self, a: usize, assign: &[u32]) -> bool {
        let t: Box<[u32]> = self.atoms[a].args.iter().map(|&v| assign[v]).collect();
        self.rel(a).set.contains(&t)
    }

    fn bound_count(&self, a: usize, assign: &[u32]) -> usize {
        let mut seen: Vec<usize> = Vec::new();
        for &v in &self.atoms[a].args {
            if assign[v] != UNBOUND && !seen.contains(&v) {
                seen.push(v);
            }
        }
        seen.len()
    }

    fn fully_bound(&self, a: usize, assign: &[u32]) -> bool {
        self.atoms[a].args.iter().all(|&v| assign[v] != UNBOUND)
    }

    fn candidates(&self, a: usize, assign: &[u32]) -> Candidates<'_> {
        let rel = self.rel(a);
        let mut best: Option<&Vec<u32>> = None;
        for (p, &v) in self.atoms[a].args.iter().enumerate() {
            if assign[v] != UNBOUND {
                match rel.by_pos[p].get(&assign[v]) {
                    None => return Candidates::Some(&[]),
                    Some(list) => {
                        if best.is_none_or(|b| list.len() < b.len()) {
                            best = Some(list);
                        }
                    }
                }
            }
        }
        match best {
            Some(l) => Candidates::Some(l),
            None => Candidates::All(rel.tuples.len()),
        }
    }

    /// Binds the variables of atom `a` to tuple `t`; on success returns the
    /// variables newly bound.
    fn bind(&self, a: usize, t: &[u32], assign: &mut [u32], trail: &mut Vec<usize>) -> bool {
        let mark = trail.len();
        for (p, &v) in self.atoms[a].args.iter().enumerate() {
            let c = t[p];
            if assign[v] == UNBOUND {
                if !self.permitted(v, c) {
                    self.undo(assign, trail, mark);
                    return false;
                }
                assign[v] = c;
                trail.push(v);
            } else if assign[v] != c {
                self.undo(assign, trail, mark);
                return false;
            }
        }
        true
    }

    fn undo(&self, assign: &mut [u32], trail: &mut Vec<usize>, mark: usize) {
        while trail.len() > mark {
            let v = trail.pop().unwrap();
            assign[v] = UNBOUND;
        }
    }

    /// Marks fully bound unsatisfied atoms as satisfied, failing if one
    /// does not hold. Newly marked atoms are pushed to `sat_trail`.
    fn propagate(&self, assign: &[u32], sat: &mut [bool], sat_trail: &mut Vec<usize>) -> bool {
        for a in 0..self.atoms.len() {
            if !sat[a] && self.fully_bound(a, assign) {
                if !self.atom_holds(a, assign) {
                    return false;
                }
                sat[a] = true;
                sat_trail.push(a);
            }
        }
        true
    }

    fn initial(&self) -> Option<(Vec<u32>, Vec<bool>)> {
        if self.impossible {
            return None;
        }
        let assign = self.fixed.clone();
        for (v, &c) in assign.iter().enumerate() {
            if c != UNBOUND && (c as usize) < self.db.consts.len() && !self.permitted(v, c) {
                return None;
            }
        }
        let mut sat = vec![false; self.atoms.len()];
        let mut tr = Vec::new();
        if !self.propagate(&assign, &mut sat, &mut tr) {
            return None;
        }
        Some((assign, sat))
    }

    fn pick(&self, assign: &[u32], sat: &[bool], need: impl Fn(usize) -> bool) -> Option<usize> {
        let mut best: Option<(usize, usize, usize)> = None;
        for a in 0..self.atoms.len() {
            if sat[a] || !need(a) {
                continue;
            }
            let b = self.bound_count(a, assign);
            let size = match self.candidates(a, assign) {
                Candidates::Some(l) => l.len(),
                Candidates::All(n) => n,
            };
            let better = match best {
                None => true,
                Some((_, bb, bs)) => size < bs || (size == bs && b > bb),
            };
            if better {
                best = Some((a, b, size));
            }
        }
        best.map(|(a, _, _)| a)
    }

    /// Is there an extension of `assign` satisfying all atoms?
    fn extend(&self, assign: &mut [u32], sat: &mut [bool], trail: &mut Vec<usize>) -> bool {
        let Some(a) = self.pick(assign, sat, |_| true) else {
            return true;
        };
        let cands = self.candidates(a, assign);
        for i in 0..cands.len() {
            let t = &self.rel(a).tuples[cands.get(i) as usize];
            let mark = trail.len();
            if !self.bind(a, t, assign, trail) {
                continue;
            }
            let mut sat_trail = Vec::new();
            sat[a] = true;
            sat_trail.push(a);
            let ok = self.propagate(assign, sat, &mut sat_trail) && self.extend(assign, sat, trail);
            for s in sat_trail {
                sat[s] = false;
            }
            self.undo(assign, trail, mark);
            if ok {
                return true;
            }
        }
        false
    }

    fn exists(&self) -> bool {
        match self.initial() {
            None => false,
            Some((mut assign, mut sat)) => self.extend(&mut assign, &mut sat, &mut Vec::new()),
        }
    }

    /// Calls `visit` once per distinct projection of a homomorphism onto
    /// `project`.
    fn projections(&self, project: &[usize], visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>) {
        let Some((mut assign, mut sat)) = self.initial() else {
            return;
        };
        let in_proj: Vec<bool> = {
            let mut b = vec![false; self.nvars];
            for &v in project {
                b[v] = true;
            }
            b
        };
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        let mut trail = Vec::new();
        let _ = self.phase1(project, &in_proj, &mut assign, &mut sat, &mut trail, &mut seen, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn phase1(
        &self,
        project: &[usize],
        in_proj: &[bool],
        assign: &mut [u32],
        sat: &mut [bool],
        trail: &mut Vec<usize>,
        seen: &mut HashSet<Vec<u32>>,
        visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let unbound_proj = project.iter().copied().find(|&v| assign[v] == UNBOUND);
        let Some(free) = unbound_proj else {
            let key: Vec<u32> = project.iter().map(|&v| assign[v]).collect();
            if seen.contains(&key) {
                return ControlFlow::Continue(());
            }
            if self.extend(assign, sat, trail) {
                visit(&key)?;
                seen.insert(key);
            }
            return ControlFlow::Continue(());
        };
        let pick = self.pick(assign, sat, |a| {
            self.atoms[a]
                .args
                .iter()
                .any(|&v| in_proj[v] && assign[v] == UNBOUND)
        });
        match pick {
            Some(a) => {
                let cands = self.candidates(a, assign);
                for i in 0..cands.len() {
                    let t = &self.rel(a).tuples[cands.get(i) as usize];
                    let mark = trail.len();
                    if !self.bind(a, t, assign, trail) {
                        continue;
                    }
                    let mut sat_trail = vec![a];
                    sat[a] = true;
                    let r = if self.propagate(assign, sat, &mut sat_trail) {
                        self.phase1(project, in_proj, assign, sat, trail, seen, visit)
                    } else {
                        ControlFlow::Continue(())
                    };
                    for s in sat_trail {
                        sat[s] = false;
                    }
                    self.undo(assign, trail, mark);
                    r?;
                }
                ControlFlow::Continue(())
            }
            None => {
                // A projected variable outside every remaining atom ranges
                // over the (restricted) active domain.
                for c in 0..self.db.consts.len() as u32 {
                    if !self.permitted(free, c) {
                        continue;
                    }
                    assign[free] = c;
                    trail.push(free);
                    let mark = trail.len() - 1;
                    let r = self.phase1(project, in_proj, assign, sat, trail, seen, visit);
                    self.undo(assign, trail, mark);
                    r?;
                }
                ControlFlow::Continue(())
            }
        }
    }

    /// Connected pieces of the problem (atoms sharing a variable that is
    /// not fixed), each with the projected variables it contains.
    fn components(&self, project: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
        let n = self.atoms.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let nx = p[c];
                p[c] = r;
                c = nx;
            }
            r
        }
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for a in 0..n {
            for &v in &self.atoms[a].args {
                if self.fixed[v] != UNBOUND {
                    continue;
                }
                if let Some(&b) = owner.get(&v) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                } else {
                    owner.insert(v, a);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for a in 0..n {
            let r = find(&mut parent, a);
            groups.entry(r).or_default().push(a);
        }
        groups
            .into_values()
            .map(|atoms| {
                let mut pv: Vec<usize> = Vec::new();
                for &v in project {
                    if atoms.iter().any(|&a| self.atoms[a].args.contains(&v)) && !pv.contains(&v) {
                        pv.push(v);
                    }
                }
                (atoms, pv)
            })
            .collect()
    }

    fn sub(&self, keep: &[usize]) -> Problem<'a> {
        Problem {
            db: self.db,
            atoms: keep
                .iter()
                .map(|&a| CAtom {
                    rel: self.atoms[a].rel,
                    args: self.atoms[a].args.clone(),
                })
                .collect(),
            nvars: self.nvars,
            fixed: self.fixed.clone(),
            allowed: self.allowed.clone(),
            extra: self.extra.clone(),
            impossible: self.impossible,
        }
    }

    /// Number of distinct projections onto `project`, multiplying over
    /// independent components.
    fn count(&self, project: &[usize]) -> BigUint {
        if self.initial().is_none() {
            return BigUint::zero();
        }
        let mut total = BigUint::one();
        let mut covered: HashSet<usize> = HashSet::new();
        for (atoms, pv) in self.components(project) {
            let sub = self.sub(&atoms);
            if pv.is_empty() {
                if !sub.exists() {
                    return BigUint::zero();
                }
                continue;
            }
            covered.extend(pv.iter().copied());
            let mut n = 0u64;
            sub.projections(&pv, &mut |_| {
                n += 1;
                ControlFlow::Continue(())
            });
            if n == 0 {
                return BigUint::zero();
            }
            total *= n;
        }
        let mut seen_free = HashSet::new();
        for &v in project {
            if covered.contains(&v) || !seen_free.insert(v) {
                continue;
            }
            if self.fixed[v] != UNBOUND {
                continue;
            }
            let n = (0..self.db.consts.len() as u32)
                .filter(|&c| self.permitted(v, c))
                .count();
            total *= n as u64;
        }
        total
    }
}

enum Candidates<'r> {
    Some(&'r [u32]),
    All(usize),
}

impl Candidates<'_> {
    fn len(&self) -> usize {
        match self {
            Candidates::Some(l) => l.len(),
            Candidates::All(n) => *n,
        }
    }

    fn get(&self, i: usize) -> u32 {
        match self {
            Candidates::Some(l) => l[i],
            Candidates::All(_) => i as u32,
        }
    }
}

/// The equality-free body of `q` over representatives, with the list of
/// distinct representative answer variables and, per answer slot, the
/// index into that list.
pub(crate) struct Normalized {
    pub atoms: Vec<RelAtom>,
    pub reps: Vec<Var>,
    pub slots: Vec<usize>,
    pub map: BTreeMap<Var, Var>,
}

pub(crate) fn normalize(q: &ConjunctiveQuery) -> Normalized {
    let map = q.representatives();
    let atoms = q.atoms().iter().map(|a| a.rename(|v| map[v].clone())).collect();
    let mut reps: Vec<Var> = Vec::new();
    let mut slots = Vec::new();
    for x in q.answer_vars() {
        let r = &map[x];
        let i = match reps.iter().position(|y| y == r) {
            Some(i) => i,
            None => {
                reps.push(r.clone());
                reps.len() - 1
            }
        };
        slots.push(i);
    }
    Normalized {
        atoms,
        reps,
        slots,
        map,
    }
}

/// Lifts a partial assignment on original variables to representatives;
/// `None` when it contradicts the equality atoms.
fn lift_fixed(n: &Normalized, fixed: &BTreeMap<Var, Const>) -> Option<BTreeMap<Var, Const>> {
    let mut out: BTreeMap<Var, Const> = BTreeMap::new();
    for (v, c) in fixed {
        let r = n.map.get(v).cloned().unwrap_or_else(|| v.clone());
        if let Some(prev) = out.get(&r) {
            if prev != c {
                return None;
            }
        }
        out.insert(r, c.clone());
    }
    Some(out)
}

/// All projections onto `project` of homomorphisms from `q` to `db` that
/// agree with `fixed`. Equality atoms are honoured.
pub fn find_homomorphisms(
    q: &ConjunctiveQuery,
    db: &Database,
    fixed: &BTreeMap<Var, Const>,
    project: &[Var],
) -> BTreeSet<Vec<Const>> {
    let idx = IndexedDb::new(db);
    find_homomorphisms_indexed(q, &idx, fixed, &BTreeMap::new(), project)
}

/// As [`find_homomorphisms`], with per-variable allowed images.
pub fn find_homomorphisms_indexed(
    q: &ConjunctiveQuery,
    idx: &IndexedDb,
    fixed: &BTreeMap<Var, Const>,
    allowed: &BTreeMap<Var, BTreeSet<Const>>,
    project: &[Var],
) -> BTreeSet<Vec<Const>> {
    let n = normalize(q);
    let Some(fx) = lift_fixed(&n, fixed) else {
        return BTreeSet::new();
    };
    let mut al: BTreeMap<Var, BTreeSet<Const>> = BTreeMap::new();
    for (v, cs) in allowed {
        let r = n.map.get(v).cloned().unwrap_or_else(|| v.clone());
        match al.get_mut(&r) {
            Some(prev) => *prev = prev.intersection(cs).cloned().collect(),
            None => {
                al.insert(r, cs.clone());
            }
        }
    }
    let proj_reps: Vec<Var> = project
        .iter()
        .map(|v| n.map.get(v).cloned().unwrap_or_else(|| v.clone()))
        .collect();
    let mut vars: Vec<Var> = q.vars().into_iter().map(|v| n.map[&v].clone()).collect();
    vars.extend(proj_reps.iter().cloned());
    let (p, ids) = Problem::new(idx, &n.atoms, &vars, &fx, &al);
    let pids: Vec<usize> = proj_reps.iter().map(|v| ids[v]).collect();
    let mut uniq: Vec<usize> = Vec::new();
    for &i in &pids {
        if !uniq.contains(&i) {
            uniq.push(i);
        }
    }
    let mut out = BTreeSet::new();
    p.projections(&uniq, &mut |t| {
        let full = pids
            .iter()
            .map(|i| {
                let k = uniq.iter().position(|u| u == i).unwrap();
                p.constant(t[k])
            })
            .collect();
        out.insert(full);
        ControlFlow::Continue(())
    });
    out
}

/// Is there a homomorphism from `q` to `db` extending `fixed`?
pub fn exists_homomorphism(q: &ConjunctiveQuery, db: &Database, fixed: &BTreeMap<Var, Const>) -> bool {
    exists_homomorphism_indexed(q, &IndexedDb::new(db), fixed)
}

pub fn exists_homomorphism_indexed(
    q: &ConjunctiveQuery,
    idx: &IndexedDb,
    fixed: &BTreeMap<Var, Const>,
) -> bool {
    let n = normalize(q);
    let Some(fx) = lift_fixed(&n, fixed) else {
        return false;
    };
    let vars: Vec<Var> = n.map.values().cloned().collect();
    let (p, _) = Problem::new(idx, &n.atoms, &vars, &fx, &BTreeMap::new());
    p.exists()
}

/// q(D) as a set of answer tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerSet {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<Const>>,
}

impl AnswerSet {
    pub fn count(&self) -> BigUint {
        BigUint::from(self.tuples.len())
    }
}

fn cq_answer_ids(q: &ConjunctiveQuery, idx: &IndexedDb, out: &mut dyn FnMut(Vec<u32>)) {
    let n = normalize(q);
    let vars: Vec<Var> = n.map.values().cloned().collect();
    let (p, ids) = Problem::new(idx, &n.atoms, &vars, &BTreeMap::new(), &BTreeMap::new());
    let pids: Vec<usize> = n.reps.iter().map(|v| ids[v]).collect();
    if p.initial().is_none() {
        return;
    }
    // Enumerate each component separately and combine by Cartesian product.
    let mut parts: Vec<(Vec<usize>, Vec<Vec<u32>>)> = Vec::new();
    for (atoms, pv) in p.components(&pids) {
        let sub = p.sub(&atoms);
        if pv.is_empty() {
            if !sub.exists() {
                return;
            }
            continue;
        }
        let mut rows = Vec::new();
        sub.projections(&pv, &mut |t| {
            rows.push(t.to_vec());
            ControlFlow::Continue(())
        });
        if rows.is_empty() {
            return;
        }
        parts.push((pv, rows));
    }
    let mut cur = vec![UNBOUND; p.nvars];
    fn rec(
        parts: &[(Vec<usize>, Vec<Vec<u32>>)],
        k: usize,
        cur: &mut Vec<u32>,
        pids: &[usize],
        slots: &[usize],
        out: &mut dyn FnMut(Vec<u32>),
    ) {
        if k == parts.len() {
            out(slots.iter().map(|&s| cur[pids[s]]).collect());
            return;
        }
        let (vars, rows) = &parts[k];
        for r in rows {
            for (v, c) in vars.iter().zip(r) {
                cur[*v] = *c;
            }
            rec(parts, k + 1, cur, pids, slots, out);
        }
    }
    rec(&parts, 0, &mut cur, &pids, &n.slots, out);
}

/// q(D) for a union: the set union over disjuncts.
pub fn answers(q: &UnionQuery, db: &Database) -> AnswerSet {
    let idx = IndexedDb::new(db);
    let mut ids: HashSet<Vec<u32>> = HashSet::new();
    for d in q.disjuncts() {
        cq_answer_ids(d, &idx, &mut |t| {
            ids.insert(t);
        });
    }
    AnswerSet {
        arity: q.arity(),
        tuples: ids
            .into_iter()
            .map(|t| t.into_iter().map(|i| idx.consts[i as usize].clone()).collect())
            .collect(),
    }
}

/// #q(D) for a union, counting each tuple once.
pub fn count_answers(q: &UnionQuery, db: &Database) -> BigUint {
    if q.disjuncts().len() == 1 {
        return count_cq(&q.disjuncts()[0], db);
    }
    let idx = IndexedDb::new(db);
    let mut ids: HashSet<Vec<u32>> = HashSet::new();
    for d in q.disjuncts() {
        cq_answer_ids(d, &idx, &mut |t| {
            ids.insert(t);
        });
    }
    BigUint::from(ids.len())
}

/// #q(D) by trying every assignment of the variables to adom(D). Slow;
/// meant as an independent reference.
pub fn count_answers_by_assignment(q: &UnionQuery, db: &Database) -> BigUint {
    let adom: Vec<Const> = db.adom().into_iter().collect();
    let mut tuples: BTreeSet<Vec<Const>> = BTreeSet::new();
    for d in q.disjuncts() {
        let vars: Vec<Var> = d.vars().into_iter().collect();
        if !vars.is_empty() && adom.is_empty() {
            continue;
        }
        let mut idx = vec![0usize; vars.len()];
        loop {
            let val: BTreeMap<&Var, &Const> = vars.iter().zip(&idx).map(|(v, &i)| (v, &adom[i])).collect();
            let ok = d.equalities().iter().all(|(a, b)| val[a] == val[b])
                && d.atoms().iter().all(|a| {
                    db.contains(&Fact::new(a.relation.clone(), a.args.iter().map(|v| val[v].clone()).collect()))
                });
            if ok {
                tuples.insert(d.answer_vars().iter().map(|x| val[x].clone()).collect());
            }
            let mut p = 0;
            while p < idx.len() {
                idx[p] += 1;
                if idx[p] < adom.len() {
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
    BigUint::from(tuples.len())
}

/// #q(D) for a single CQ, multiplying counts of independent components.
pub fn count_cq(q: &ConjunctiveQuery, db: &Database) -> BigUint {
    count_cq_indexed(q, &IndexedDb::new(db))
}

pub fn count_cq_indexed(q: &ConjunctiveQuery, idx: &IndexedDb) -> BigUint {
    let n = normalize(q);
    let vars: Vec<Var> = n.map.values().cloned().collect();
    let (p, ids) = Problem::new(idx, &n.atoms, &vars, &BTreeMap::new(), &BTreeMap::new());
    let pids: Vec<usize> = n.reps.iter().map(|v| ids[v]).collect();
    p.count(&pids)
}

/// The equality-free query q~ read off D~_q, with the representative answer
/// variables as its answer tuple.
pub(crate) fn identified_query(q: &ConjunctiveQuery) -> (ConjunctiveQuery, Normalized) {
    let n = normalize(q);
    let t = ConjunctiveQuery::new(q.schema().clone(), n.reps.clone(), n.atoms.clone(), vec![])
        .expect("identification keeps a valid query");
    (t, n)
}

fn identity_fix(vars: &[Var]) -> BTreeMap<Var, Const> {
    vars.iter().map(|v| (v.clone(), v.to_const())).collect()
}

/// core(q): drops relational atoms while an answer-fixing homomorphism into
/// the smaller query exists. Equality atoms are kept.
pub fn core(q: &ConjunctiveQuery) -> ConjunctiveQuery {
    let (qt, n) = identified_query(q);
    let fix = identity_fix(qt.answer_vars());
    let mut kept: Vec<RelAtom> = qt.atoms().to_vec();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < kept.len() {
            let mut smaller = kept.clone();
            smaller.remove(i);
            let target = atoms_db(qt.schema(), &smaller);
            if exists_homomorphism(&qt, &target, &fix) {
                kept = smaller;
                changed = true;
            } else {
                i += 1;
            }
        }
        if !changed {
            break;
        }
    }
    // Map surviving identified atoms back to original atoms.
    let mut atoms = Vec::new();
    for k in &kept {
        let orig = q
            .atoms()
            .iter()
            .find(|a| a.rename(|v| n.map[v].clone()) == *k)
            .expect("identified atom has a source");
        atoms.push(orig.clone());
    }
    q.with_atoms(atoms).expect("core keeps answer variables covered")
}

/// The database whose facts are the given atoms with variables read as
/// constants.
pub(crate) fn atoms_db(schema: &Schema, atoms: &[RelAtom]) -> Database {
    let mut d = Database::new(schema.clone());
    for a in atoms {
        d.insert_unchecked(Fact::new(
            a.relation.clone(),
            a.args.iter().map(Var::to_const).collect(),
        ));
    }
    d
}

/// Does some disjunct of `q2` map into `target` (a canonical database of a
/// disjunct `p` of q1, possibly chased) sending answer slots to p's images?
fn disjunct_maps(q2: &UnionQuery, target: &IndexedDb, images: &[Const]) -> bool {
    q2.disjuncts().iter().any(|d| {
        let fix: BTreeMap<Var, Const> = d
            .answer_vars()
            .iter()
            .cloned()
            .zip(images.iter().cloned())
            .collect();
        // Conflicting fixings (equal answer vars sent to distinct images)
        // are rejected by `lift_fixed`.
        exists_homomorphism_indexed(d, target, &fix)
    })
}

fn check_arity(q1: &UnionQuery, q2: &UnionQuery) -> Result<()> {
    if q1.arity() != q2.arity() {
        return Err(Error::Invalid(format!(
            "arity mismatch: {} vs {}",
            q1.arity(),
            q2.arity()
        )));
    }
    Ok(())
}

/// q1 ⊆ q2 over all databases.
pub fn contained_in(q1: &UnionQuery, q2: &UnionQuery) -> Result<bool> {
    contained_under_full(q1, q2, &Ontology::empty())
}

/// q1 ⊆ q2 over all databases satisfying the full ontology `t`.
pub fn contained_under_full(q1: &UnionQuery, q2: &UnionQuery, t: &Ontology) -> Result<bool> {
    if !t.all_full() {
        return Err(Error::NotFull);
    }
    check_arity(q1, q2)?;
    for p in q1.disjuncts() {
        let c = canonical_database(p);
        let schema = c.identified.schema().union(q2.schema())?.union(&t.schema()?)?;
        let target = chase_database(&c.identified.clone().with_schema(schema)?, t)?.database;
        let images: Vec<Const> = p.answer_vars().iter().map(|x| c.var_map[x].clone()).collect();
        if !disjunct_maps(q2, &IndexedDb::new(&target), &images) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Answer-variable surjections witnessing renaming equivalence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurjectionPair {
    /// Image in x̄2 of each variable of x̄1.
    pub forward: Vec<Var>,
    /// Image in x̄1 of each variable of x̄2.
    pub backward: Vec<Var>,
}

fn surjection(q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> Option<Vec<Var>> {
    let targets: BTreeSet<Const> = q2.answer_vars().iter().map(Var::to_const).collect();
    let allowed: BTreeMap<Var, BTreeSet<Const>> = q1
        .answer_vars()
        .iter()
        .map(|x| (x.clone(), targets.clone()))
        .collect();
    let d2 = canonical_database(q2).plain;
    let idx = IndexedDb::new(&d2);
    let homs = find_homomorphisms_indexed(q1, &idx, &BTreeMap::new(), &allowed, q1.answer_vars());
    homs.into_iter()
        .find(|img| img.iter().collect::<BTreeSet<_>>().len() == targets.len())
        .map(|img| img.iter().map(Const::to_var).collect())
}

/// Renaming equivalence of two equality-free CQs.
pub fn renaming_equivalent(q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> Option<SurjectionPair> {
    let s1: BTreeSet<&Var> = q1.answer_vars().iter().collect();
    let s2: BTreeSet<&Var> = q2.answer_vars().iter().collect();
    if s1.len() != s2.len() {
        return None;
    }
    let forward = surjection(q1, q2)?;
    let backward = surjection(q2, q1)?;
    Some(SurjectionPair { forward, backward })
}

/// |I|: maps on the answer variables of the core `q` that extend to an
/// automorphism.
pub fn answer_automorphism_count(q: &ConjunctiveQuery) -> BigUint {
    let (qt, _) = identified_query(q);
    let xs = qt.answer_vars();
    let targets: BTreeSet<Const> = xs.iter().map(Var::to_const).collect();
    let allowed = xs.iter().map(|x| (x.clone(), targets.clone())).collect();
    let d = canonical_database(&qt).plain;
    let homs = find_homomorphisms_indexed(&qt, &IndexedDb::new(&d), &BTreeMap::new(), &allowed, xs);
    // For a core, a homomorphism permuting the answer variables is onto.
    let n = homs
        .into_iter()
        .filter(|img| img.iter().collect::<BTreeSet<_>>().len() == xs.len())
        .count();
    BigUint::from(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_cq, parse_database, parse_query};

    fn cq(s: &str) -> ConjunctiveQuery {
        parse_cq(s, None).unwrap()
    }

    fn db(s: &str) -> Database {
        parse_database(s, None).unwrap()
    }

    #[test]
    fn homomorphisms_projection() {
        let q = cq("q(x) :- R(x,y).");
        let d = db("R(a,b). R(b,c).");
        let h = find_homomorphisms(&q, &d, &BTreeMap::new(), &[Var::new("x")]);
        let expected: BTreeSet<Vec<Const>> =
            [vec![Const::new("a")], vec![Const::new("b")]].into();
        assert_eq!(h, expected);
        assert_eq!(count_cq(&q, &d), BigUint::from(2u32));
    }

    #[test]
    fn equality_respected() {
        let q = cq("q(x1,x2) :- R(x1,x2), x1 = x2.");
        let d = db("R(a,b). R(c,c).");
        let a = answers(&UnionQuery::single(q.clone()), &d);
        assert_eq!(a.tuples.len(), 1);
        assert!(a.tuples.contains(&vec![Const::new("c"), Const::new("c")]));
    }

    #[test]
    fn boolean_on_top() {
        let q = cq("q() :- R(x,y), R(y,z).");
        assert_eq!(count_cq(&q, &db("R(c,c).")), BigUint::one());
        assert_eq!(count_cq(&cq("q() :- true."), &Database::default()), BigUint::one());
    }

    #[test]
    fn union_counts_once() {
        let q = parse_query("q(x) :- A(x).\nq(x) :- B(x).", None).unwrap();
        let d = db("A(a). B(a). B(b).");
        assert_eq!(count_answers(&q, &d), BigUint::from(2u32));
    }

    #[test]
    fn core_folds() {
        let c = core(&cq("q() :- R(x,y), R(x,z)."));
        assert_eq!(c.atoms().len(), 1);
        let t = cq("q() :- R(x,y), R(y,z), R(z,x).");
        assert_eq!(core(&t), t);
        let c = core(&cq("q(x) :- R(x,y), R(x,x)."));
        assert_eq!(c.atoms().len(), 1);
    }

    #[test]
    fn containment() {
        let q1 = UnionQuery::single(cq("q(x) :- R(x,y), R(y,z)."));
        let q2 = UnionQuery::single(cq("q(x) :- R(x,y)."));
        assert!(contained_in(&q1, &q2).unwrap());
        assert!(!contained_in(&q2, &q1).unwrap());
        assert!(contained_in(&q1, &q1).unwrap());
    }

    #[test]
    fn renaming() {
        let a = cq("q(x,y) :- R(x,y).");
        let b = cq("q(x,y) :- R(y,x).");
        assert!(renaming_equivalent(&a, &b).is_some());
        assert!(renaming_equivalent(&a, &a).is_some());
        assert!(renaming_equivalent(&a, &cq("q(x) :- R(x,y).")).is_none());
    }

    #[test]
    fn automorphisms() {
        assert_eq!(answer_automorphism_count(&cq("q(x1,x2) :- R(x1,x2).")), BigUint::one());
        assert_eq!(
            answer_automorphism_count(&cq("q(x1,x2) :- R(x1,x2), R(x2,x1).")),
            BigUint::from(2u32)
        );
        assert_eq!(answer_automorphism_count(&cq("q() :- R(x,y).")), BigUint::one());
    }
}
