//! Recovering counts from count oracles: Vandermonde systems over cloned
//! databases, homomorphism strata, surjection counts, inequivalence
//! witnesses and extraction of CQ counts from a UCQ oracle.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::algebra::{clone_set, direct_product, power, top_database};
use crate::chase::omq_count;
use crate::closure::{expand, DEFAULT_DISJUNCT_CAP};
use crate::equivalence::{Class, SearchBudget};
use crate::error::{Error, Result};
use crate::hom::{count_answers, count_cq};
use crate::model::*;

/// D ↦ an exact integer.
pub trait CountOracle {
    fn count(&mut self, d: &Database) -> Result<BigInt>;
}

impl<F: FnMut(&Database) -> Result<BigInt>> CountOracle for F {
    fn count(&mut self, d: &Database) -> Result<BigInt> {
        self(d)
    }
}

/// #q(·) by enumeration.
#[derive(Clone, Debug)]
pub struct BruteForce(pub UnionQuery);

impl CountOracle for BruteForce {
    fn count(&mut self, d: &Database) -> Result<BigInt> {
        Ok(count_answers(&self.0, d).into())
    }
}

/// #Q(·) for an ontology-mediated query.
#[derive(Clone, Debug)]
pub struct OmqOracle(pub Omq);

impl CountOracle for OmqOracle {
    fn count(&mut self, d: &Database) -> Result<BigInt> {
        Ok(omq_count(&self.0, d)?.into())
    }
}

impl CountOracle for Box<dyn CountOracle + '_> {
    fn count(&mut self, d: &Database) -> Result<BigInt> {
        (**self).count(d)
    }
}

/// Counts how often the inner oracle is asked.
pub struct Counted<O> {
    pub inner: O,
    pub calls: usize,
}

impl<O> Counted<O> {
    pub fn new(inner: O) -> Self {
        Counted { inner, calls: 0 }
    }
}

impl<O: CountOracle> CountOracle for Counted<O> {
    fn count(&mut self, d: &Database) -> Result<BigInt> {
        self.calls += 1;
        self.inner.count(d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub matrix: Vec<Vec<BigRational>>,
    pub rhs: Vec<BigRational>,
    pub solution: Option<Vec<BigRational>>,
}

impl LinearSystem {
    pub fn new(matrix: Vec<Vec<BigRational>>, rhs: Vec<BigRational>) -> Result<Self> {
        let n = rhs.len();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("linear system must be square".into()));
        }
        Ok(LinearSystem {
            matrix,
            rhs,
            solution: None,
        })
    }

    /// Gauss–Jordan elimination over the rationals.
    pub fn solve(&mut self) -> Result<&[BigRational]> {
        let n = self.rhs.len();
        let mut a: Vec<Vec<BigRational>> = self
            .matrix
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                let mut r = row.clone();
                r.push(b.clone());
                r
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or_else(|| Error::Invalid("singular linear system".into()))?;
            a.swap(col, pivot);
            let p = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x = &*x / &p;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c in col..=n {
                        let v = &a[col][c] * &f;
                        a[r][c] -= v;
                    }
                }
            }
        }
        self.solution = Some(a.into_iter().map(|mut r| r.pop().unwrap()).collect());
        Ok(self.solution.as_deref().unwrap())
    }
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Solves Σ_i u_i · node_j^i = rhs_j for u_0..u_{m−1}.
pub fn solve_vandermonde(nodes: &[BigRational], rhs: &[BigRational]) -> Result<Vec<BigRational>> {
    let distinct: BTreeSet<&BigRational> = nodes.iter().collect();
    if distinct.len() != nodes.len() {
        return Err(Error::DuplicateNodes);
    }
    let m = nodes.len();
    let matrix = nodes
        .iter()
        .map(|x| {
            let mut row = Vec::with_capacity(m);
            let mut p = BigRational::one();
            for _ in 0..m {
                row.push(p.clone());
                p = &p * x;
            }
            row
        })
        .collect();
    let mut sys = LinearSystem::new(matrix, rhs.to_vec())?;
    Ok(sys.solve()?.to_vec())
}

/// An integral solution component, or "oracle inconsistent".
pub fn integral(r: &BigRational) -> Result<BigInt> {
    if r.is_integer() {
        Ok(r.to_integer())
    } else {
        Err(Error::OracleInconsistent(format!("non-integral solution {r}")))
    }
}

fn natural(r: &BigRational) -> Result<BigInt> {
    let n = integral(r)?;
    if n.is_negative() {
        return Err(Error::OracleInconsistent(format!("negative count {n}")));
    }
    Ok(n)
}

/// u_0..u_k from #q(D_j) for D_j = D with every element of `set` cloned
/// to j copies, j = 1..k+1.
pub(crate) fn cloning_system(
    d: &Database,
    set: &BTreeSet<Const>,
    k: usize,
    oracle: &mut dyn CountOracle,
) -> Result<Vec<BigInt>> {
    cloning_polynomial(d, set, k, oracle)?.iter().map(|n| natural(&rat(n.clone()))).collect()
}

/// Integer coefficients of #q(D_j) as a polynomial of degree at most k in j.
fn cloning_polynomial(
    d: &Database,
    set: &BTreeSet<Const>,
    k: usize,
    oracle: &mut dyn CountOracle,
) -> Result<Vec<BigInt>> {
    let mut nodes = Vec::new();
    let mut rhs = Vec::new();
    for j in 1..=k + 1 {
        let dj = if j == 1 { d.clone() } else { clone_set(d, set, j)?.database };
        nodes.push(rat(j as u64));
        rhs.push(rat(oracle.count(&dj)?));
    }
    solve_vandermonde(&nodes, &rhs)?.iter().map(integral).collect()
}

/// #(q(D) ∩ F^{|x̄|}) using only counts on clones of D.
///
/// Clones the constants outside F and reads the constant coefficient: an
/// answer with a position outside F contributes a polynomial in the clone
/// count without constant term, whatever answer equalities the query has.
/// Cloning F itself and reading the top coefficient is wrong for queries with
/// answer equalities, where a repeated constant grows slower than j^|x̄|.
pub fn partial_domain_count(
    q: &UnionQuery,
    d: &Database,
    f: &BTreeSet<Const>,
    oracle: &mut dyn CountOracle,
) -> Result<BigInt> {
    let adom = d.adom();
    if let Some(c) = f.iter().find(|c| !adom.contains(*c)) {
        return Err(Error::UnknownConstant(c.to_string()));
    }
    let outside: BTreeSet<Const> = adom.difference(f).cloned().collect();
    if outside.is_empty() {
        return oracle.count(d);
    }
    let u0 = cloning_polynomial(d, &outside, q.arity(), oracle)?.swap_remove(0);
    natural(&rat(u0))
}

/// |hom_{i,T}(q, D, x̄)| for i = 0..|x̄|.
pub fn recover_hom_strata(
    q: &ConjunctiveQuery,
    d: &Database,
    t: &BTreeSet<Const>,
    oracle: &mut dyn CountOracle,
) -> Result<Vec<BigInt>> {
    if !q.is_equality_free() {
        return Err(Error::Invalid("strata need an equality-free query".into()));
    }
    if let Some(c) = t.iter().find(|c| !d.adom().contains(*c)) {
        return Err(Error::UnknownConstant(c.to_string()));
    }
    cloning_system(d, t, q.arity(), oracle)
}

/// |surj(q, D, x̄)|: answer maps onto x̄ itself, x̄ read as constants of D.
pub fn surjection_count(q: &ConjunctiveQuery, d: &Database, oracle: &mut dyn CountOracle) -> Result<BigInt> {
    let xs: Vec<Const> = q.answer_vars().iter().map(Var::to_const).collect();
    let adom = d.adom();
    if let Some(c) = xs.iter().find(|c| !adom.contains(*c)) {
        return Err(Error::UnknownConstant(c.to_string()));
    }
    let k = xs.len();
    let mut total = BigInt::zero();
    for mask in 0u64..(1u64 << k) {
        let t: BTreeSet<Const> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| xs[i].clone()).collect();
        let hom_t = recover_hom_strata(q, d, &t, oracle)?.swap_remove(k);
        if (k - t.len()).is_multiple_of(2) {
            total += hom_t;
        } else {
            total -= hom_t;
        }
    }
    Ok(total)
}

/// Caps for the witness and extraction searches.
#[derive(Clone, Copy, Debug)]
pub struct RecoveryBudget {
    pub max_power: usize,
    pub search: SearchBudget,
}

impl Default for RecoveryBudget {
    fn default() -> Self {
        RecoveryBudget {
            max_power: 64,
            search: SearchBudget::default(),
        }
    }
}

fn joint_schema<'a>(qs: impl IntoIterator<Item = &'a ConjunctiveQuery>, class: &Class) -> Result<Schema> {
    let mut s = class.ontology.schema()?;
    for q in qs {
        s = s.union(q.schema())?;
    }
    Ok(s)
}

/// A database in the class on which every query has a positive count and
/// queries that are not semi-counting equivalent have different counts.
pub fn witness_database(queries: &[ConjunctiveQuery], class: &Class, budget: RecoveryBudget) -> Result<Database> {
    if queries.is_empty() {
        return Err(Error::Invalid("witness needs at least one query".into()));
    }
    if queries.iter().any(|q| q.is_boolean()) {
        return Err(Error::Invalid("witness queries need answer variables".into()));
    }
    let schema = joint_schema(queries, class)?;
    let mut qs: Vec<ConjunctiveQuery> = Vec::new();
    for q in queries {
        let n = class.normal_form(q)?.with_schema(schema.clone())?;
        let mut dup = false;
        for p in &qs {
            if class.semi_counting_equivalent(p, &n)? {
                dup = true;
                break;
            }
        }
        if !dup {
            qs.push(n);
        }
    }
    let mut dn = class.close(&top_database(&schema))?;
    // Queries placed so far, with their counts on dn.
    let mut placed: Vec<(usize, BigUint)> = vec![(0, count_cq(&qs[0], &dn))];
    for next in 1..qs.len() {
        let c = count_cq(&qs[next], &dn);
        let Some(&(clash, _)) = placed.iter().find(|(_, v)| *v == c) else {
            placed.push((next, c));
            continue;
        };
        let verdict = class.semi_counting_verdict(&qs[next], &qs[clash], budget.search)?;
        let dp = verdict
            .counterexample
            .ok_or_else(|| Error::Budget("no semi-counting counterexample found".into()))?
            .with_schema(schema.clone())?;
        let base: Vec<BigUint> = placed.iter().map(|(i, _)| count_cq(&qs[*i], &dp)).collect();
        let new_base = count_cq(&qs[next], &dp);
        let mut chosen = None;
        for l in 1..=budget.max_power {
            let mut vals: Vec<BigUint> = placed
                .iter()
                .zip(&base)
                .map(|((_, v), b)| b * v.pow(l as u32))
                .collect();
            vals.push(&new_base * c.pow(l as u32));
            let set: BTreeSet<&BigUint> = vals.iter().collect();
            if set.len() == vals.len() && vals.iter().all(|v| !v.is_zero()) {
                chosen = Some((l, vals));
                break;
            }
        }
        let (l, vals) = chosen.ok_or_else(|| Error::Budget(format!("no power up to {} separates the counts", budget.max_power)))?;
        dn = direct_product(&dp, &power(&dn, l)?)?;
        placed.push((next, BigUint::zero()));
        for (p, v) in placed.iter_mut().zip(vals) {
            p.1 = v;
        }
    }
    Ok(dn)
}

fn class_query(class: &Class, q: &ConjunctiveQuery) -> Result<(ConjunctiveQuery, Database)> {
    let n = class.normal_form(q)?;
    let d = canonical_database(&n).plain;
    Ok((n, d))
}

/// Index i in `live` with #p_j(D_{p_i}) = 0 for every other live j.
fn get_min(live: &[usize], qs: &[(ConjunctiveQuery, Database)]) -> Result<usize> {
    live.iter()
        .copied()
        .find(|&i| {
            live.iter()
                .all(|&j| j == i || count_cq(&qs[j].0, &qs[i].1).is_zero())
        })
        .ok_or_else(|| Error::Invalid("queries are counting equivalent or not semi-counting equivalent".into()))
}

struct Peeled<'a> {
    base: &'a mut dyn CountOracle,
    /// Removed queries in order, with #p_i(D_i).
    removed: Vec<(Database, BigInt)>,
}

impl Peeled<'_> {
    /// A_{T_level}(D').
    fn eval(&mut self, level: usize, d: &Database) -> Result<BigInt> {
        if level == 0 {
            return self.base.count(d);
        }
        let (di, norm) = self.removed[level - 1].clone();
        let full = self.eval(level - 1, d)?;
        let prod = direct_product(d, &di)?;
        let scaled = self.eval(level - 1, &prod)?;
        if (&scaled % &norm) != BigInt::zero() {
            return Err(Error::OracleInconsistent(format!("{scaled} is not divisible by {norm}")));
        }
        Ok(full - scaled / norm)
    }
}

/// #target(D) from an oracle for Σ c_i·#p_i(·), the p_i pairwise
/// semi-counting but not counting equivalent.
pub fn extract_from_semi_class(
    class_queries: &[ConjunctiveQuery],
    coeffs: &[BigInt],
    target: usize,
    d: &Database,
    oracle: &mut dyn CountOracle,
    class: &Class,
) -> Result<BigInt> {
    if class_queries.len() != coeffs.len() || target >= class_queries.len() {
        return Err(Error::Invalid("queries, coefficients and target do not line up".into()));
    }
    if coeffs.iter().any(Zero::is_zero) {
        return Err(Error::Invalid("coefficients must be non-zero".into()));
    }
    let qs: Vec<(ConjunctiveQuery, Database)> =
        class_queries.iter().map(|q| class_query(class, q)).collect::<Result<_>>()?;
    let mut live: Vec<usize> = (0..qs.len()).collect();
    let mut peeled = Peeled {
        base: oracle,
        removed: Vec::new(),
    };
    loop {
        let i = get_min(&live, &qs)?;
        let (p, di) = &qs[i];
        let self_count = BigInt::from(count_cq(p, di));
        let v = peeled.eval(peeled.removed.len(), &direct_product(d, di)?)?;
        if i == target {
            let denom = &coeffs[i] * &self_count;
            if (&v % &denom) != BigInt::zero() {
                return Err(Error::OracleInconsistent(format!("{v} is not divisible by {denom}")));
            }
            return Ok(v / denom);
        }
        peeled.removed.push((di.clone(), self_count));
        live.retain(|&j| j != i);
    }
}

/// The counts φ_j(D) of every semi-counting class from #q on D × D∘^l.
fn class_sums(
    d: &Database,
    witness: &Database,
    node_counts: &[BigUint],
    oracle: &mut dyn CountOracle,
) -> Result<Vec<BigInt>> {
    let k = node_counts.len();
    let mut matrix = Vec::with_capacity(k);
    let mut rhs = Vec::with_capacity(k);
    let mut acc = d.clone();
    for l in 1..=k {
        acc = direct_product(&acc, witness)?;
        rhs.push(rat(oracle.count(&acc)?));
        matrix.push(
            node_counts
                .iter()
                .map(|c| rat(BigInt::from(c.pow(l as u32))))
                .collect(),
        );
    }
    let mut sys = LinearSystem::new(matrix, rhs)?;
    sys.solve()?.iter().map(integral).collect()
}

/// #p(D) for the closure member with index set `target`, using only an
/// oracle for #q over the class.
pub fn extract_cq_counts_from_ucq_oracle(
    q: &UnionQuery,
    target: &[usize],
    d: &Database,
    oracle: &mut dyn CountOracle,
    class: &Class,
    budget: RecoveryBudget,
) -> Result<BigInt> {
    let exp = expand(q, class, DEFAULT_DISJUNCT_CAP)?;
    let tc = exp
        .class_of(target)
        .filter(|c| c.coefficient != 0)
        .ok_or_else(|| Error::Invalid(format!("{target:?} is not in the closure")))?;
    let tc_rep = tc.representative;
    let reps: Vec<ConjunctiveQuery> = exp
        .surviving()
        .map(|c| class.normal_form(&exp.conjunctions[c.representative].query))
        .collect::<Result<_>>()?;
    let coeffs: Vec<BigInt> = exp.surviving().map(|c| BigInt::from(c.coefficient)).collect();
    let ti = exp
        .surviving()
        .position(|c| c.representative == tc_rep)
        .expect("target class survives");
    if q.is_boolean() {
        return extract_from_semi_class(&reps, &coeffs, ti, d, oracle, class);
    }
    // Partition the surviving classes by semi-counting equivalence.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, r) in reps.iter().enumerate() {
        let mut home = None;
        for (g, members) in groups.iter().enumerate() {
            if class.semi_counting_equivalent(&reps[members[0]], r)? {
                home = Some(g);
                break;
            }
        }
        match home {
            Some(g) => groups[g].push(i),
            None => groups.push(vec![i]),
        }
    }
    let schema = joint_schema(reps.iter(), class)?;
    let leaders: Vec<ConjunctiveQuery> = groups.iter().map(|g| reps[g[0]].clone()).collect();
    let witness = witness_database(&leaders, class, budget)?;
    let node_counts: Vec<BigUint> = leaders.iter().map(|p| count_cq(p, &witness)).collect();
    let gi = groups.iter().position(|g| g.contains(&ti)).expect("target grouped");
    let members = &groups[gi];
    let mut group_oracle = |dd: &Database| -> Result<BigInt> {
        let dd = dd.clone().with_schema(dd.schema().union(&schema)?)?;
        Ok(class_sums(&dd, &witness, &node_counts, oracle)?.swap_remove(gi))
    };
    let qs: Vec<ConjunctiveQuery> = members.iter().map(|&i| reps[i].clone()).collect();
    let cs: Vec<BigInt> = members.iter().map(|&i| coeffs[i].clone()).collect();
    let local = members.iter().position(|&i| i == ti).expect("target is a member");
    extract_from_semi_class(&qs, &cs, local, d, &mut group_oracle, class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hom::answers;
    use crate::text::{parse_cq, parse_database, parse_query};

    fn r(n: i64) -> BigRational {
        rat(n)
    }

    #[test]
    fn vandermonde_small() {
        assert_eq!(solve_vandermonde(&[r(1), r(2)], &[r(2), r(3)]).unwrap(), vec![r(1), r(1)]);
        assert_eq!(solve_vandermonde(&[r(1)], &[r(7)]).unwrap(), vec![r(7)]);
        assert_eq!(solve_vandermonde(&[r(1), r(1)], &[r(1), r(1)]).unwrap_err(), Error::DuplicateNodes);
    }

    #[test]
    fn partial_domain_with_answer_equalities() {
        let q = parse_query("q(x,y) :- R(x,y), x = y.\nq(x,y) :- A(x), A(y), R(z,z).", None).unwrap();
        let d = parse_database("A(c0). R(c0,c1). R(c1,c1). R(c2,c2). R(c1,c3).", None).unwrap();
        let f: BTreeSet<Const> = [Const::new("c0"), Const::new("c1"), Const::new("c3")].into();
        assert_eq!(partial_domain_count(&q, &d, &f, &mut BruteForce(q.clone())).unwrap(), BigInt::from(2));
        let q = parse_query("q(x,y,z) :- R(x,y), R(y,z), x = y.\nq(x,y,z) :- R(x,y), R(y,z), y = z.\nq(x,y,z) :- R(x,y), R(y,z), x = z.", None).unwrap();
        let d = parse_database("R(a,a). R(b,b).", None).unwrap();
        let f: BTreeSet<Const> = [Const::new("a")].into();
        assert_eq!(partial_domain_count(&q, &d, &f, &mut BruteForce(q.clone())).unwrap(), BigInt::from(1));
    }

    #[test]
    fn partial_domain_examples() {
        let q = parse_query("q(x) :- A(x).", None).unwrap();
        let d = parse_database("A(a). A(b).", None).unwrap();
        let f: BTreeSet<Const> = [Const::new("a")].into();
        assert_eq!(partial_domain_count(&q, &d, &f, &mut BruteForce(q.clone())).unwrap(), BigInt::from(1));
        let q = parse_query("q(x) :- R(x,y).", None).unwrap();
        let d = parse_database("R(a,b). R(b,c).", None).unwrap();
        assert_eq!(partial_domain_count(&q, &d, &f, &mut BruteForce(q.clone())).unwrap(), BigInt::from(1));
        assert_eq!(
            partial_domain_count(&q, &d, &d.adom(), &mut BruteForce(q.clone())).unwrap(),
            BigInt::from(count_answers(&q, &d))
        );
    }

    #[test]
    fn strata_match_enumeration() {
        let q = parse_cq("q(x,y) :- R(x,z), R(z,y).", None).unwrap();
        let d = parse_database("R(a,b). R(b,c). R(c,a). R(a,a).", None).unwrap();
        let t: BTreeSet<Const> = [Const::new("a"), Const::new("c")].into();
        let u = UnionQuery::single(q.clone());
        let strata = recover_hom_strata(&q, &d, &t, &mut BruteForce(u.clone())).unwrap();
        let mut expect = vec![BigInt::zero(); 3];
        for tup in &answers(&u, &d).tuples {
            expect[tup.iter().filter(|c| t.contains(*c)).count()] += 1;
        }
        assert_eq!(strata, expect);
    }

    #[test]
    fn surjections_of_unary() {
        let q = parse_cq("q(x) :- A(x).", None).unwrap();
        let d = canonical_database(&q).plain;
        let n = surjection_count(&q, &d, &mut BruteForce(q.clone().into())).unwrap();
        assert_eq!(n, BigInt::from(1));
    }

    #[test]
    fn witness_separates_stars() {
        let qs: Vec<ConjunctiveQuery> = [
            "q(x) :- R(x,y1).",
            "q(x) :- R(x,y1), R(y1,y2).",
            "q(x) :- R(x,y1), R(y1,y2), R(y2,y3).",
        ]
        .iter()
        .map(|s| parse_cq(s, None).unwrap())
        .collect();
        let w = witness_database(&qs, &Class::all(), RecoveryBudget::default()).unwrap();
        let counts: BTreeSet<BigUint> = qs.iter().map(|q| count_cq(q, &w)).collect();
        assert_eq!(counts.len(), 3);
        assert!(!counts.contains(&BigUint::zero()));
    }

    #[test]
    fn semi_class_singleton_and_pair() {
        let p1 = parse_cq("q(x) :- A(x).", None).unwrap();
        let p2 = parse_cq("q(x) :- A(x), B(y).", None).unwrap();
        let d = parse_database("A(a). A(b). B(c).", None).unwrap();
        let qs = vec![p1.clone(), p2.clone()];
        for scale in [1i64, 2] {
            let cs = vec![BigInt::from(2 * scale), BigInt::from(-scale)];
            let (a, b) = (p1.clone(), p2.clone());
            let (ca, cb) = (cs[0].clone(), cs[1].clone());
            let mut oracle = move |x: &Database| -> Result<BigInt> {
                Ok(&ca * BigInt::from(count_cq(&a, x)) + &cb * BigInt::from(count_cq(&b, x)))
            };
            for t in 0..2 {
                let got = extract_from_semi_class(&qs, &cs, t, &d, &mut oracle, &Class::all()).unwrap();
                assert_eq!(got, BigInt::from(count_cq(&qs[t], &d)));
            }
        }
    }

    #[test]
    fn single_cq_extraction() {
        let q = parse_query("q(x) :- R(x,y).", None).unwrap();
        let d = parse_database("R(a,b). R(b,b).", None).unwrap();
        let got = extract_cq_counts_from_ucq_oracle(
            &q,
            &[1],
            &d,
            &mut BruteForce(q.clone()),
            &Class::all(),
            RecoveryBudget::default(),
        )
        .unwrap();
        assert_eq!(got, BigInt::from(2));
    }
}
