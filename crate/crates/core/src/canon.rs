//! Canonical labelling of queries up to renaming of quantified variables,
//! by colour refinement with individualization.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{ConjunctiveQuery, Var};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Answer(usize),
    Quant(usize),
}

struct Shape {
    atoms: Vec<(String, Vec<Slot>)>,
    eqs: Vec<(usize, usize)>,
    n: usize,
}

fn shape(q: &ConjunctiveQuery) -> Shape {
    let pos: BTreeMap<&Var, usize> = q.answer_vars().iter().enumerate().map(|(i, v)| (v, i)).collect();
    let quant: Vec<Var> = q.quantified_vars().into_iter().collect();
    let qpos: BTreeMap<&Var, usize> = quant.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let slot = |v: &Var| match pos.get(v) {
        Some(&i) => Slot::Answer(i),
        None => Slot::Quant(qpos[v]),
    };
    Shape {
        atoms: q
            .atoms()
            .iter()
            .map(|a| (a.relation.to_string(), a.args.iter().map(slot).collect()))
            .collect(),
        eqs: q.equalities().iter().map(|(a, b)| (pos[a], pos[b])).collect(),
        n: quant.len(),
    }
}

fn slot_code(s: Slot, colors: &[usize]) -> String {
    match s {
        Slot::Answer(i) => format!("a{i}"),
        Slot::Quant(v) => format!("c{}", colors[v]),
    }
}

/// Refines `colors` until the partition is stable; colour ids are ranks of
/// isomorphism-invariant signatures.
fn refine(sh: &Shape, colors: &mut Vec<usize>) {
    loop {
        let classes_before = colors.iter().collect::<BTreeSet<_>>().len();
        let mut sigs: Vec<String> = vec![String::new(); sh.n];
        let mut parts: Vec<Vec<String>> = vec![Vec::new(); sh.n];
        for (rel, args) in &sh.atoms {
            let codes: Vec<String> = args.iter().map(|&s| slot_code(s, colors)).collect();
            let body = format!("{rel}({})", codes.join(","));
            for (p, s) in args.iter().enumerate() {
                if let Slot::Quant(v) = s {
                    parts[*v].push(format!("{p}:{body}"));
                }
            }
        }
        for v in 0..sh.n {
            parts[v].sort();
            sigs[v] = format!("{}|{}", colors[v], parts[v].join(";"));
        }
        let uniq: BTreeSet<&String> = sigs.iter().collect();
        let rank: BTreeMap<&String, usize> = uniq.into_iter().enumerate().map(|(i, s)| (s, i)).collect();
        let new: Vec<usize> = sigs.iter().map(|s| rank[s]).collect();
        let classes_after = new.iter().collect::<BTreeSet<_>>().len();
        *colors = new;
        if classes_after == classes_before {
            return;
        }
    }
}

fn render(sh: &Shape, order: &[usize]) -> String {
    let mut atoms: Vec<String> = sh
        .atoms
        .iter()
        .map(|(rel, args)| {
            let a: Vec<String> = args
                .iter()
                .map(|s| match s {
                    Slot::Answer(i) => format!("a{i}"),
                    Slot::Quant(v) => format!("v{}", order[*v]),
                })
                .collect();
            format!("{rel}({})", a.join(","))
        })
        .collect();
    atoms.sort();
    atoms.dedup();
    let mut eqs: Vec<String> = sh
        .eqs
        .iter()
        .map(|&(a, b)| {
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            format!("a{a}=a{b}")
        })
        .collect();
    eqs.sort();
    format!("{};{}", atoms.join(","), eqs.join(","))
}

fn search(sh: &Shape, colors: Vec<usize>, best: &mut Option<String>) {
    let mut colors = colors;
    refine(sh, &mut colors);
    let mut count: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &colors {
        *count.entry(c).or_default() += 1;
    }
    let target = count.iter().find(|(_, &n)| n > 1).map(|(&c, _)| c);
    match target {
        None => {
            let s = render(sh, &colors);
            if best.as_ref().is_none_or(|b| s < *b) {
                *best = Some(s);
            }
        }
        Some(c) => {
            for v in 0..sh.n {
                if colors[v] != c {
                    continue;
                }
                // Individualize v: it gets a colour just below its class.
                let next: Vec<usize> = colors
                    .iter()
                    .enumerate()
                    .map(|(u, &k)| {
                        if u == v {
                            2 * k
                        } else {
                            2 * k + 1
                        }
                    })
                    .collect();
                search(sh, next, best);
            }
        }
    }
}

/// A string equal for two queries iff they are identical after renaming
/// quantified variables (answer variables are compared by position).
pub fn canonical_key(q: &ConjunctiveQuery) -> String {
    let sh = shape(q);
    let mut best = None;
    search(&sh, vec![0; sh.n], &mut best);
    let key = best.unwrap_or_default();
    format!("{}/{key}", q.answer_vars().len())
}

/// Isomorphism that keeps every answer position in place.
pub fn are_isomorphic(a: &ConjunctiveQuery, b: &ConjunctiveQuery) -> bool {
    a.answer_vars().len() == b.answer_vars().len() && canonical_key(a) == canonical_key(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_cq;

    fn cq(s: &str) -> ConjunctiveQuery {
        parse_cq(s, None).unwrap()
    }

    #[test]
    fn renaming_invariant() {
        let a = cq("q(x) :- R(x,y), R(y,z), S(z).");
        let b = cq("q(x) :- R(x,u), R(u,w), S(w).");
        assert_eq!(canonical_key(&a), canonical_key(&b));
        let c = cq("q(x) :- R(x,y), R(z,y), S(z).");
        assert_ne!(canonical_key(&a), canonical_key(&c));
    }

    #[test]
    fn symmetric_structures() {
        let a = cq("q() :- R(a,b), R(b,c), R(c,a), R(d,e), R(e,f), R(f,d).");
        let b = cq("q() :- R(f,e), R(e,d), R(d,f), R(c,b), R(b,a), R(a,c).");
        assert!(are_isomorphic(&a, &b));
        let c = cq("q() :- R(a,b), R(b,c), R(c,d), R(d,e), R(e,f), R(f,a).");
        assert!(!are_isomorphic(&a, &c));
    }

    #[test]
    fn answer_positions_matter() {
        let a = cq("q(x,y) :- R(x,y).");
        let b = cq("q(y,x) :- R(x,y).");
        assert!(!are_isomorphic(&a, &b));
    }
}
