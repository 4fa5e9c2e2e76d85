//! Schemas, databases, queries and dependencies.
//!
//! Every value here is immutable once built; constructors validate the
//! invariants and return [`Error`] on the first violation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

macro_rules! name_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(s: &str) -> Self {
                $name(Arc::from(s))
            }
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(Arc::from(s))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", &self.0)
            }
        }
    };
}

name_type!(
    /// A relation symbol.
    RelName
);
name_type!(
    /// A query or dependency variable.
    Var
);
name_type!(
    /// A database constant.
    Const
);

impl Var {
    /// The constant a variable turns into inside a canonical database.
    pub fn to_const(&self) -> Const {
        Const(self.0.clone())
    }
}

impl Const {
    /// The variable a constant turns into when a database is read as a query.
    pub fn to_var(&self) -> Var {
        Var(self.0.clone())
    }
}

/// Relation symbols with their arities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Schema {
    relations: BTreeMap<RelName, usize>,
}

impl Schema {
    pub fn new() -> Self {
        Schema::default()
    }

    /// Builds a schema from `(name, arity)` pairs; a name declared twice with
    /// different arities is rejected.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self> {
        let mut s = Schema::new();
        for (n, a) in pairs {
            s.declare(RelName::new(n), a)?;
        }
        Ok(s)
    }

    pub fn declare(&mut self, rel: RelName, arity: usize) -> Result<()> {
        match self.relations.get(&rel) {
            Some(&a) if a != arity => Err(Error::ArityMismatch {
                relation: rel.to_string(),
                expected: a,
                found: arity,
            }),
            _ => {
                self.relations.insert(rel, arity);
                Ok(())
            }
        }
    }

    pub fn arity(&self, rel: &RelName) -> Option<usize> {
        self.relations.get(rel).copied()
    }

    pub fn contains(&self, rel: &RelName) -> bool {
        self.relations.contains_key(rel)
    }

    /// ar(Σ): the largest arity, 0 for the empty schema.
    pub fn max_arity(&self) -> usize {
        self.relations.values().copied().max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&RelName, usize)> {
        self.relations.iter().map(|(r, a)| (r, *a))
    }

    pub fn union(&self, other: &Schema) -> Result<Schema> {
        let mut s = self.clone();
        for (r, a) in other.relations() {
            s.declare(r.clone(), a)?;
        }
        Ok(s)
    }

    pub fn is_subschema_of(&self, other: &Schema) -> bool {
        self.relations()
            .all(|(r, a)| other.arity(r) == Some(a))
    }

    pub fn restrict(&self, keep: impl Fn(&RelName) -> bool) -> Schema {
        Schema {
            relations: self
                .relations
                .iter()
                .filter(|(r, _)| keep(r))
                .map(|(r, a)| (r.clone(), *a))
                .collect(),
        }
    }

    /// A relation name starting with `base` that is not yet declared.
    pub fn fresh_name(&self, base: &str) -> RelName {
        let mut name = base.to_string();
        while self.contains(&RelName::new(&name)) {
            name.push('\'');
        }
        RelName::from(name)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Fact {
    pub relation: RelName,
    pub args: Vec<Const>,
}

impl Fact {
    pub fn new(relation: impl Into<RelName>, args: Vec<Const>) -> Self {
        Fact {
            relation: relation.into(),
            args,
        }
    }

    /// Convenience constructor from string slices.
    pub fn parse_args(relation: &str, args: &[&str]) -> Self {
        Fact::new(relation, args.iter().map(|a| Const::new(a)).collect())
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// A finite set of facts over a schema.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Database {
    schema: Schema,
    facts: BTreeSet<Fact>,
}

impl Database {
    pub fn new(schema: Schema) -> Self {
        Database {
            schema,
            facts: BTreeSet::new(),
        }
    }

    /// Builds a database, checking every fact against `schema`.
    pub fn from_facts(schema: Schema, facts: impl IntoIterator<Item = Fact>) -> Result<Self> {
        let mut db = Database::new(schema);
        for f in facts {
            db.insert(f)?;
        }
        Ok(db)
    }

    /// Builds a database whose schema is read off the facts.
    pub fn infer(facts: impl IntoIterator<Item = Fact>) -> Result<Self> {
        let mut db = Database::default();
        for f in facts {
            db.schema.declare(f.relation.clone(), f.args.len())?;
            db.facts.insert(f);
        }
        Ok(db)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    /// Adds a fact; returns whether it was new.
    pub fn insert(&mut self, fact: Fact) -> Result<bool> {
        match self.schema.arity(&fact.relation) {
            None => Err(Error::UnknownRelation(fact.relation.to_string())),
            Some(a) if a != fact.args.len() => Err(Error::ArityMismatch {
                relation: fact.relation.to_string(),
                expected: a,
                found: fact.args.len(),
            }),
            Some(_) => Ok(self.facts.insert(fact)),
        }
    }

    pub(crate) fn insert_unchecked(&mut self, fact: Fact) -> bool {
        self.facts.insert(fact)
    }

    pub fn adom(&self) -> BTreeSet<Const> {
        self.facts
            .iter()
            .flat_map(|f| f.args.iter().cloned())
            .collect()
    }

    pub fn facts_of<'a>(&'a self, rel: &'a RelName) -> impl Iterator<Item = &'a Fact> + 'a {
        self.facts.iter().filter(move |f| &f.relation == rel)
    }

    /// Replaces the schema by a larger one.
    pub fn with_schema(mut self, schema: Schema) -> Result<Self> {
        if !self.schema.is_subschema_of(&schema) {
            // Relations absent from the facts may be dropped.
            for f in &self.facts {
                if schema.arity(&f.relation) != Some(f.args.len()) {
                    return Err(Error::SchemaMismatch(format!(
                        "relation {} not in target schema",
                        f.relation
                    )));
                }
            }
        }
        self.schema = schema;
        Ok(self)
    }
}

/// A relational atom over variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RelAtom {
    pub relation: RelName,
    pub args: Vec<Var>,
}

impl RelAtom {
    pub fn new(relation: impl Into<RelName>, args: Vec<Var>) -> Self {
        RelAtom {
            relation: relation.into(),
            args,
        }
    }

    /// Convenience constructor from string slices.
    pub fn parse_args(relation: &str, args: &[&str]) -> Self {
        RelAtom::new(relation, args.iter().map(|a| Var::new(a)).collect())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.args.iter()
    }

    pub fn rename(&self, f: impl Fn(&Var) -> Var) -> RelAtom {
        RelAtom::new(self.relation.clone(), self.args.iter().map(f).collect())
    }
}

impl fmt::Debug for RelAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Either kind of query atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Atom {
    Relational(RelAtom),
    Equality(Var, Var),
}

/// A conjunctive query with answer variables, relational atoms and equality
/// atoms between answer variables.
///
/// Atoms and equalities are kept sorted and deduplicated so that structural
/// equality coincides with equality of atom sets.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ConjunctiveQuery {
    schema: Schema,
    answer_vars: Vec<Var>,
    atoms: Vec<RelAtom>,
    equalities: Vec<(Var, Var)>,
}

impl fmt::Debug for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::text::serialize_cq(self))
    }
}

impl ConjunctiveQuery {
    pub fn new(
        schema: Schema,
        answer_vars: Vec<Var>,
        atoms: Vec<RelAtom>,
        equalities: Vec<(Var, Var)>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for v in &answer_vars {
            if !seen.insert(v.clone()) {
                return Err(Error::RepeatedAnswerVariable(v.to_string()));
            }
        }
        for a in &atoms {
            check_atom_arity(&schema, a)?;
        }
        let mut eqs: Vec<(Var, Var)> = Vec::new();
        for (a, b) in equalities {
            for v in [&a, &b] {
                if !seen.contains(v) {
                    return Err(Error::EqualityOnQuantified(v.to_string()));
                }
            }
            if a != b {
                eqs.push(if a < b { (a, b) } else { (b, a) });
            }
        }
        eqs.sort();
        eqs.dedup();
        let mut atoms = atoms;
        atoms.sort();
        atoms.dedup();
        let q = ConjunctiveQuery {
            schema,
            answer_vars,
            atoms,
            equalities: eqs,
        };
        let reps = q.representatives();
        let covered: BTreeSet<&Var> = q
            .atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .map(|v| &reps[v])
            .collect();
        for v in &q.answer_vars {
            if !covered.contains(&reps[v]) {
                return Err(Error::UnboundAnswerVariable(v.to_string()));
            }
        }
        Ok(q)
    }

    /// Builds a query whose schema is read off its atoms.
    pub fn infer(
        answer_vars: Vec<Var>,
        atoms: Vec<RelAtom>,
        equalities: Vec<(Var, Var)>,
    ) -> Result<Self> {
        let mut schema = Schema::new();
        for a in &atoms {
            schema.declare(a.relation.clone(), a.args.len())?;
        }
        ConjunctiveQuery::new(schema, answer_vars, atoms, equalities)
    }

    /// The Boolean query with no atoms, true on every database.
    pub fn truth(schema: Schema) -> Self {
        ConjunctiveQuery {
            schema,
            answer_vars: Vec::new(),
            atoms: Vec::new(),
            equalities: Vec::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn answer_vars(&self) -> &[Var] {
        &self.answer_vars
    }

    pub fn atoms(&self) -> &[RelAtom] {
        &self.atoms
    }

    pub fn equalities(&self) -> &[(Var, Var)] {
        &self.equalities
    }

    /// All atoms, relational first.
    pub fn all_atoms(&self) -> Vec<Atom> {
        self.atoms
            .iter()
            .cloned()
            .map(Atom::Relational)
            .chain(
                self.equalities
                    .iter()
                    .map(|(a, b)| Atom::Equality(a.clone(), b.clone())),
            )
            .collect()
    }

    pub fn arity(&self) -> usize {
        self.answer_vars.len()
    }

    pub fn is_boolean(&self) -> bool {
        self.answer_vars.is_empty()
    }

    pub fn is_equality_free(&self) -> bool {
        self.equalities.is_empty()
    }

    /// var(q): answer variables plus every variable in an atom.
    pub fn vars(&self) -> BTreeSet<Var> {
        self.answer_vars
            .iter()
            .cloned()
            .chain(self.atoms.iter().flat_map(|a| a.args.iter().cloned()))
            .collect()
    }

    pub fn quantified_vars(&self) -> BTreeSet<Var> {
        let ans: BTreeSet<&Var> = self.answer_vars.iter().collect();
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .filter(|v| !ans.contains(v))
            .cloned()
            .collect()
    }

    pub fn is_answer_var(&self, v: &Var) -> bool {
        self.answer_vars.contains(v)
    }

    /// Maps every variable to the representative of its equality class: the
    /// earliest answer variable of the class, or itself.
    pub fn representatives(&self) -> BTreeMap<Var, Var> {
        let mut parent: BTreeMap<Var, Var> =
            self.vars().into_iter().map(|v| (v.clone(), v)).collect();
        fn find(p: &mut BTreeMap<Var, Var>, v: &Var) -> Var {
            let mut cur = v.clone();
            while p[&cur] != cur {
                cur = p[&cur].clone();
            }
            cur
        }
        let pos: BTreeMap<&Var, usize> = self
            .answer_vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        for (a, b) in &self.equalities {
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra != rb {
                let (keep, drop) = if pos[&ra] < pos[&rb] { (ra, rb) } else { (rb, ra) };
                parent.insert(drop, keep);
            }
        }
        let vars: Vec<Var> = parent.keys().cloned().collect();
        vars.into_iter()
            .map(|v| {
                let r = find(&mut parent, &v);
                (v, r)
            })
            .collect()
    }

    /// Same query with a different (compatible) schema.
    pub fn with_schema(&self, schema: Schema) -> Result<Self> {
        ConjunctiveQuery::new(
            schema,
            self.answer_vars.clone(),
            self.atoms.clone(),
            self.equalities.clone(),
        )
    }

    /// Same body with the given atoms replaced.
    pub fn with_atoms(&self, atoms: Vec<RelAtom>) -> Result<Self> {
        ConjunctiveQuery::new(
            self.schema.clone(),
            self.answer_vars.clone(),
            atoms,
            self.equalities.clone(),
        )
    }

    /// Reads a database as a query: constants become variables, and the
    /// listed constants become the answer variables.
    pub fn from_database(db: &Database, answer_vars: Vec<Var>, equalities: Vec<(Var, Var)>) -> Result<Self> {
        let atoms = db
            .facts()
            .iter()
            .map(|f| RelAtom::new(f.relation.clone(), f.args.iter().map(Const::to_var).collect()))
            .collect();
        ConjunctiveQuery::new(db.schema().clone(), answer_vars, atoms, equalities)
    }

    /// Applies a variable renaming to every atom and the answer tuple.
    pub fn rename(&self, f: impl Fn(&Var) -> Var) -> Result<Self> {
        ConjunctiveQuery::new(
            self.schema.clone(),
            self.answer_vars.iter().map(&f).collect(),
            self.atoms.iter().map(|a| a.rename(&f)).collect(),
            self.equalities
                .iter()
                .map(|(a, b)| (f(a), f(b)))
                .collect(),
        )
    }
}

fn check_atom_arity(schema: &Schema, a: &RelAtom) -> Result<()> {
    match schema.arity(&a.relation) {
        None => Err(Error::UnknownRelation(a.relation.to_string())),
        Some(n) if n != a.args.len() => Err(Error::ArityMismatch {
            relation: a.relation.to_string(),
            expected: n,
            found: a.args.len(),
        }),
        Some(_) => Ok(()),
    }
}

/// D_q, D~_q and the surviving answer variables V.
#[derive(Clone, Debug)]
pub struct CanonicalDatabase {
    /// D_q: equality atoms dropped, variables read as constants.
    pub plain: Database,
    /// D~_q: constants identified along equality atoms.
    pub identified: Database,
    /// Constant of D~_q for every variable of q.
    pub var_map: BTreeMap<Var, Const>,
    /// Answer variables that survive as constants of D~_q.
    pub surviving: Vec<Var>,
}

pub fn canonical_database(q: &ConjunctiveQuery) -> CanonicalDatabase {
    let reps = q.representatives();
    let mut plain = Database::new(q.schema().clone());
    let mut identified = Database::new(q.schema().clone());
    for a in q.atoms() {
        plain.insert_unchecked(Fact::new(
            a.relation.clone(),
            a.args.iter().map(Var::to_const).collect(),
        ));
        identified.insert_unchecked(Fact::new(
            a.relation.clone(),
            a.args.iter().map(|v| reps[v].to_const()).collect(),
        ));
    }
    let var_map = reps.iter().map(|(v, r)| (v.clone(), r.to_const())).collect();
    let surviving = q
        .answer_vars()
        .iter()
        .filter(|v| reps[*v] == **v)
        .cloned()
        .collect();
    CanonicalDatabase {
        plain,
        identified,
        var_map,
        surviving,
    }
}

/// A union of conjunctive queries sharing answer variables and schema.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct UnionQuery {
    disjuncts: Vec<ConjunctiveQuery>,
}

impl fmt::Debug for UnionQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::text::serialize_ucq(self))
    }
}

impl UnionQuery {
    /// Checks the disjuncts agree on answer variables and moves them onto the
    /// union of their schemas.
    pub fn new(disjuncts: Vec<ConjunctiveQuery>) -> Result<Self> {
        let first = disjuncts.first().ok_or(Error::EmptyUnion)?;
        let mut schema = first.schema().clone();
        for d in &disjuncts[1..] {
            if d.answer_vars() != first.answer_vars() {
                return Err(Error::AnswerVariableMismatch);
            }
            schema = schema.union(d.schema())?;
        }
        let disjuncts = disjuncts
            .into_iter()
            .map(|d| {
                if d.schema() == &schema {
                    Ok(d)
                } else {
                    d.with_schema(schema.clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(UnionQuery { disjuncts })
    }

    pub fn single(q: ConjunctiveQuery) -> Self {
        UnionQuery { disjuncts: vec![q] }
    }

    pub fn disjuncts(&self) -> &[ConjunctiveQuery] {
        &self.disjuncts
    }

    pub fn answer_vars(&self) -> &[Var] {
        self.disjuncts[0].answer_vars()
    }

    pub fn schema(&self) -> &Schema {
        self.disjuncts[0].schema()
    }

    pub fn arity(&self) -> usize {
        self.answer_vars().len()
    }

    pub fn is_boolean(&self) -> bool {
        self.answer_vars().is_empty()
    }

    pub fn with_schema(&self, schema: Schema) -> Result<Self> {
        UnionQuery::new(
            self.disjuncts
                .iter()
                .map(|d| d.with_schema(schema.clone()))
                .collect::<Result<_>>()?,
        )
    }
}

impl From<ConjunctiveQuery> for UnionQuery {
    fn from(q: ConjunctiveQuery) -> Self {
        UnionQuery::single(q)
    }
}

/// A guarded tuple-generating dependency.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Tgd {
    body: Vec<RelAtom>,
    head: Vec<RelAtom>,
    guard: Option<usize>,
    frontier: Vec<Var>,
    exist_vars: Vec<Var>,
}

impl fmt::Debug for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::text::serialize_tgd(self))
    }
}

impl Tgd {
    /// Builds a TGD. Head variables missing from the body must be listed in
    /// `exist_vars`. The guard is the first body atom holding every body
    /// variable.
    pub fn new(body: Vec<RelAtom>, head: Vec<RelAtom>, exist_vars: Vec<Var>) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::EmptyHead);
        }
        let mut b = Vec::new();
        for a in body {
            if !b.contains(&a) {
                b.push(a);
            }
        }
        let body = b;
        let body_vars: BTreeSet<Var> = body.iter().flat_map(|a| a.args.iter().cloned()).collect();
        let guard = if body.is_empty() {
            None
        } else {
            let g = body
                .iter()
                .position(|a| {
                    let s: BTreeSet<&Var> = a.args.iter().collect();
                    body_vars.iter().all(|v| s.contains(v))
                })
                .ok_or(Error::NoGuard)?;
            Some(g)
        };
        let declared: BTreeSet<Var> = exist_vars.iter().cloned().collect();
        for v in &declared {
            if body_vars.contains(v) {
                return Err(Error::Invalid(format!(
                    "existential variable {v} also occurs in the body"
                )));
            }
        }
        let mut head = head;
        head.sort();
        head.dedup();
        let mut frontier = BTreeSet::new();
        let mut exist = BTreeSet::new();
        for v in head.iter().flat_map(|a| a.args.iter()) {
            if body_vars.contains(v) {
                frontier.insert(v.clone());
            } else if declared.contains(v) {
                exist.insert(v.clone());
            } else {
                return Err(Error::UnboundHeadVariable(v.to_string()));
            }
        }
        Ok(Tgd {
            body,
            head,
            guard,
            frontier: frontier.into_iter().collect(),
            exist_vars: exist.into_iter().collect(),
        })
    }

    pub fn body(&self) -> &[RelAtom] {
        &self.body
    }

    pub fn head(&self) -> &[RelAtom] {
        &self.head
    }

    pub fn guard(&self) -> Option<&RelAtom> {
        self.guard.map(|i| &self.body[i])
    }

    pub fn guard_index(&self) -> Option<usize> {
        self.guard
    }

    pub fn frontier(&self) -> &[Var] {
        &self.frontier
    }

    pub fn exist_vars(&self) -> &[Var] {
        &self.exist_vars
    }

    pub fn is_full(&self) -> bool {
        self.exist_vars.is_empty()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&RelName, usize)> {
        self.body
            .iter()
            .chain(self.head.iter())
            .map(|a| (&a.relation, a.args.len()))
    }
}

/// A finite set of TGDs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Ontology {
    tgds: Vec<Tgd>,
}

impl Ontology {
    pub fn new(tgds: Vec<Tgd>) -> Result<Self> {
        let o = Ontology { tgds };
        o.schema()?;
        Ok(o)
    }

    pub fn empty() -> Self {
        Ontology::default()
    }

    pub fn tgds(&self) -> &[Tgd] {
        &self.tgds
    }

    pub fn is_empty(&self) -> bool {
        self.tgds.is_empty()
    }

    pub fn all_full(&self) -> bool {
        self.tgds.iter().all(Tgd::is_full)
    }

    /// Relations mentioned by the dependencies.
    pub fn schema(&self) -> Result<Schema> {
        let mut s = Schema::new();
        for t in &self.tgds {
            for (r, a) in t.relations() {
                s.declare(r.clone(), a)?;
            }
        }
        Ok(s)
    }
}

/// An ontology-mediated query (O, S, q).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Omq {
    pub ontology: Ontology,
    pub data_schema: Schema,
    pub query: UnionQuery,
}

impl Omq {
    pub fn new(ontology: Ontology, data_schema: Schema, query: UnionQuery) -> Result<Self> {
        let full = ontology.schema()?.union(&data_schema)?;
        let full = full.union(query.schema())?;
        let query = if query.schema() == &full {
            query
        } else {
            query.with_schema(full)?
        };
        Ok(Omq {
            ontology,
            data_schema,
            query,
        })
    }

    /// The data schema, ontology and query symbols together.
    pub fn full_schema(&self) -> &Schema {
        self.query.schema()
    }

    /// True when the data schema holds every symbol of ontology and query.
    pub fn full_data_schema(&self) -> bool {
        self.full_schema().is_subschema_of(&self.data_schema)
    }
}

/// A constraint-query specification (T, S, q).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cqs {
    pub constraints: Ontology,
    pub schema: Schema,
    pub query: UnionQuery,
}

impl Cqs {
    pub fn new(constraints: Ontology, schema: Schema, query: UnionQuery) -> Result<Self> {
        let cs = constraints.schema()?;
        for (r, a) in cs.relations().chain(query.schema().relations()) {
            match schema.arity(r) {
                None => return Err(Error::UnknownRelation(r.to_string())),
                Some(b) if a != b => {
                    return Err(Error::ArityMismatch {
                        relation: r.to_string(),
                        expected: b,
                        found: a,
                    })
                }
                _ => {}
            }
        }
        let query = if query.schema() == &schema {
            query
        } else {
            query.with_schema(schema.clone())?
        };
        Ok(Cqs {
            constraints,
            schema,
            query,
        })
    }

    /// The same specification read as an OMQ over the full schema.
    pub fn as_omq(&self) -> Omq {
        Omq {
            ontology: self.constraints.clone(),
            data_schema: self.schema.clone(),
            query: self.query.clone(),
        }
    }
}

/// Any validated model object.
#[derive(Clone, Debug)]
pub enum ModelObject {
    Schema(Schema),
    Database(Database),
    Query(UnionQuery),
    Ontology(Ontology),
    Omq(Omq),
    Cqs(Cqs),
}

/// Re-checks the invariants of an object built outside the constructors
/// (for instance after deserialization or manual assembly).
pub fn validate(object: &ModelObject) -> Result<()> {
    match object {
        ModelObject::Schema(_) => Ok(()),
        ModelObject::Database(db) => {
            for f in db.facts() {
                let mut probe = Database::new(db.schema().clone());
                probe.insert(f.clone())?;
            }
            Ok(())
        }
        ModelObject::Query(q) => {
            let rebuilt = UnionQuery::new(
                q.disjuncts()
                    .iter()
                    .map(|d| {
                        ConjunctiveQuery::new(
                            d.schema().clone(),
                            d.answer_vars().to_vec(),
                            d.atoms().to_vec(),
                            d.equalities().to_vec(),
                        )
                    })
                    .collect::<Result<_>>()?,
            )?;
            let _ = rebuilt;
            Ok(())
        }
        ModelObject::Ontology(o) => {
            for t in o.tgds() {
                Tgd::new(t.body().to_vec(), t.head().to_vec(), t.exist_vars().to_vec())?;
            }
            o.schema().map(|_| ())
        }
        ModelObject::Omq(q) => {
            validate(&ModelObject::Ontology(q.ontology.clone()))?;
            validate(&ModelObject::Query(q.query.clone()))?;
            Omq::new(q.ontology.clone(), q.data_schema.clone(), q.query.clone()).map(|_| ())
        }
        ModelObject::Cqs(s) => {
            validate(&ModelObject::Ontology(s.constraints.clone()))?;
            validate(&ModelObject::Query(s.query.clone()))?;
            Cqs::new(s.constraints.clone(), s.schema.clone(), s.query.clone()).map(|_| ())
        }
    }
}
