//! Database operations: direct product, disjoint union, cloning, induced
//! subdatabases, the top database and schema restriction.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{Const, Database, Fact, Schema};

/// The product constant `(a|b)`.
pub fn pair(a: &Const, b: &Const) -> Const {
    Const::from(format!("({a}|{b})"))
}

fn joint_schema(a: &Database, b: &Database) -> Result<Schema> {
    a.schema()
        .union(b.schema())
        .map_err(|e| Error::SchemaMismatch(e.to_string()))
}

/// D1 × D2: one fact R((a1|b1),…,(an|bn)) per pair of R-facts.
pub fn direct_product(d1: &Database, d2: &Database) -> Result<Database> {
    let schema = joint_schema(d1, d2)?;
    let mut by_rel: BTreeMap<_, Vec<&Fact>> = BTreeMap::new();
    for f in d2.facts() {
        by_rel.entry(&f.relation).or_default().push(f);
    }
    let mut out = Database::new(schema);
    for f in d1.facts() {
        if let Some(gs) = by_rel.get(&f.relation) {
            for g in gs {
                let args = f.args.iter().zip(&g.args).map(|(a, b)| pair(a, b)).collect();
                out.insert_unchecked(Fact::new(f.relation.clone(), args));
            }
        }
    }
    Ok(out)
}

/// D × D × … × D (`l` factors, nested to the left).
pub fn power(d: &Database, l: usize) -> Result<Database> {
    if l == 0 {
        return Err(Error::Invalid("power needs at least one factor".into()));
    }
    let mut acc = d.clone();
    for _ in 1..l {
        acc = direct_product(&acc, d)?;
    }
    Ok(acc)
}

fn fresh(base: &str, taken: &BTreeSet<Const>) -> Const {
    let mut s = base.to_string();
    while taken.contains(&Const::new(&s)) {
        s.push('\'');
    }
    Const::from(s)
}

/// D1 ⊎ D2; constants of D2 that clash with D1 are primed.
pub fn disjoint_union(d1: &Database, d2: &Database) -> Result<Database> {
    let schema = joint_schema(d1, d2)?;
    let a1 = d1.adom();
    let a2 = d2.adom();
    let mut taken: BTreeSet<Const> = a1.union(&a2).cloned().collect();
    let mut ren = BTreeMap::new();
    for c in &a2 {
        if a1.contains(c) {
            let n = fresh(c.as_str(), &taken);
            taken.insert(n.clone());
            ren.insert(c.clone(), n);
        }
    }
    let mut out = Database::new(schema);
    for f in d1.facts() {
        out.insert_unchecked(f.clone());
    }
    for f in d2.facts() {
        let args = f
            .args
            .iter()
            .map(|c| ren.get(c).cloned().unwrap_or_else(|| c.clone()))
            .collect();
        out.insert_unchecked(Fact::new(f.relation.clone(), args));
    }
    Ok(out)
}

/// Result of cloning: the new database and, for every constant of the
/// input, the list of its copies (itself first).
#[derive(Clone, Debug)]
pub struct Cloned {
    pub database: Database,
    pub classes: BTreeMap<Const, Vec<Const>>,
}

/// Gives each constant in `plan` that many copies in total (multiplicity 1
/// leaves it alone) and adds every fact pattern over the copies.
pub fn clone_constants(d: &Database, plan: &BTreeMap<Const, usize>) -> Result<Cloned> {
    let adom = d.adom();
    for (c, &m) in plan {
        if !adom.contains(c) {
            return Err(Error::UnknownConstant(c.to_string()));
        }
        if m == 0 {
            return Err(Error::Invalid(format!("multiplicity of {c} must be at least 1")));
        }
    }
    let mut taken = adom.clone();
    let mut classes = BTreeMap::new();
    for c in &adom {
        let m = plan.get(c).copied().unwrap_or(1);
        let mut copies = vec![c.clone()];
        for k in 1..m {
            let n = fresh(&format!("{c}#{k}"), &taken);
            taken.insert(n.clone());
            copies.push(n);
        }
        classes.insert(c.clone(), copies);
    }
    let mut out = Database::new(d.schema().clone());
    for f in d.facts() {
        let choices: Vec<&Vec<Const>> = f.args.iter().map(|c| &classes[c]).collect();
        let mut idx = vec![0usize; choices.len()];
        loop {
            let args = idx.iter().zip(&choices).map(|(&i, ch)| ch[i].clone()).collect();
            out.insert_unchecked(Fact::new(f.relation.clone(), args));
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
    Ok(Cloned {
        database: out,
        classes,
    })
}

/// Every constant of `set` gets `j` copies in total.
pub fn clone_set(d: &Database, set: &BTreeSet<Const>, j: usize) -> Result<Cloned> {
    let plan = set.iter().map(|c| (c.clone(), j)).collect();
    clone_constants(d, &plan)
}

/// Facts whose arguments all lie in `delta`.
pub fn induced_sub(d: &Database, delta: &BTreeSet<Const>) -> Database {
    let mut out = Database::new(d.schema().clone());
    for f in d.facts() {
        if f.args.iter().all(|c| delta.contains(c)) {
            out.insert_unchecked(f.clone());
        }
    }
    out
}

/// The constant of the top database.
pub const TOP_CONSTANT: &str = "c";

/// D_top: one constant, one all-c fact per relation.
pub fn top_database(schema: &Schema) -> Database {
    let c = Const::new(TOP_CONSTANT);
    let mut out = Database::new(schema.clone());
    for (r, a) in schema.relations() {
        out.insert_unchecked(Fact::new(r.clone(), vec![c.clone(); a]));
    }
    out
}

/// Keeps facts over `sub` and moves the database onto that schema.
pub fn restrict_schema(d: &Database, sub: &Schema) -> Database {
    let mut out = Database::new(sub.clone());
    for f in d.facts() {
        if sub.arity(&f.relation) == Some(f.args.len()) {
            out.insert_unchecked(f.clone());
        }
    }
    out
}

/// D ⊎ D_top ⊎ … ⊎ D_top with `k` top copies.
pub fn add_top_copies(d: &Database, schema: &Schema, k: usize) -> Result<Database> {
    let top = top_database(schema);
    let mut acc = d.clone();
    for _ in 0..k {
        acc = disjoint_union(&acc, &top)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_database;

    fn db(s: &str) -> Database {
        parse_database(s, None).unwrap()
    }

    #[test]
    fn product_single_fact() {
        let p = direct_product(&db("R(a,b)."), &db("R(c,d).")).unwrap();
        assert_eq!(p, db("R((a|c),(b|d))."));
    }

    #[test]
    fn union_renames_apart() {
        let u = disjoint_union(&db("A(a)."), &db("A(a).")).unwrap();
        assert_eq!(u.adom().len(), 2);
        assert_eq!(disjoint_union(&db("A(a)."), &Database::default()).unwrap(), db("A(a)."));
    }

    #[test]
    fn cloning() {
        let d = db("R(a,a).");
        let mut plan = BTreeMap::new();
        plan.insert(Const::new("a"), 2);
        let c = clone_constants(&d, &plan).unwrap();
        assert_eq!(c.database, db("R(a,a). R(a,a#1). R(a#1,a). R(a#1,a#1)."));
        plan.insert(Const::new("a"), 1);
        assert_eq!(clone_constants(&d, &plan).unwrap().database, d);
        // a#1 already used: the clone is primed.
        let d = db("R(a,a#1).");
        plan.insert(Const::new("a"), 2);
        let c = clone_constants(&d, &plan).unwrap();
        assert_eq!(c.classes[&Const::new("a")][1], Const::new("a#1'"));
    }

    #[test]
    fn induced() {
        let d = db("R(a,b). R(b,c).");
        let delta: BTreeSet<Const> = [Const::new("a"), Const::new("b")].into();
        assert_eq!(induced_sub(&d, &delta), db("R(a,b)."));
        assert!(induced_sub(&d, &BTreeSet::new()).is_empty());
        assert_eq!(induced_sub(&d, &d.adom()), d);
    }

    #[test]
    fn top() {
        let s = Schema::from_pairs([("R", 2)]).unwrap();
        assert_eq!(top_database(&s), db("R(c,c)."));
        assert!(top_database(&Schema::new()).is_empty());
    }

    #[test]
    fn restriction() {
        let d = db("R(a,b). S(a).");
        let s = Schema::from_pairs([("S", 1)]).unwrap();
        assert_eq!(restrict_schema(&d, &s).len(), 1);
        assert_eq!(restrict_schema(&d, d.schema()), d);
        assert!(restrict_schema(&d, &Schema::new()).is_empty());
    }
}
