mod oracle;
mod selftest;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use cqcount::approx::{
    ctw_approximation, decide_mk_equivalence, mk_approximation, ss_approximation, MeasureSet, MkBudget, MkVerdict,
};
use cqcount::chase::{chase_database, omq_count};
use cqcount::closure::{expand, DEFAULT_DISJUNCT_CAP};
use cqcount::equivalence::{omq_counting_equivalent, Class, EquivalenceVerdict, SearchBudget};
use cqcount::hom::{answers, contained_under_full, core, count_answers};
use cqcount::measures::{gaifman, linked_matching_number_with, measure_report, treewidth, Linkage, Measure};
use cqcount::recovery::{
    extract_cq_counts_from_ucq_oracle, partial_domain_count, recover_hom_strata, surjection_count, BruteForce,
    Counted, CountOracle, OmqOracle, RecoveryBudget,
};
use cqcount::reductions::{
    core_chased_marking, cqs_count_via_omq, mark, marked_count_via_unmarked_oracle, remove_equalities,
    sharp_count_via_marked_omq_oracle, sharp_query, DEFAULT_FLOOD_BUDGET,
};
use cqcount::text::{
    parse_bytes, serialize, serialize_cq, serialize_database, serialize_omq, serialize_ucq, DocKind,
};
use cqcount::{ConjunctiveQuery, Const, Cqs, Database, ModelObject, Omq, Ontology, Schema, UnionQuery};

use oracle::OracleSpec;

#[derive(Parser, Debug)]
#[command(name = "cqcount", version, about = "Count answers to conjunctive queries under full guarded TGDs")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Search budget for counterexample, flooding and approximation searches.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Count oracle for recovery and reductions: brute or cmd:<shell command>.
    #[arg(long, global = true, default_value = "brute")]
    oracle: OracleSpec,
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Wall-clock limit in seconds.
    #[arg(long, global = true)]
    timeout: Option<u64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Validate a document and print it in normal form.
    Parse { file: PathBuf },
    /// Number of answers of a query, OMQ or CQS on a database.
    Count { query: PathBuf, db: PathBuf },
    /// The answer tuples.
    Answers { query: PathBuf, db: PathBuf },
    /// Chase a database with the dependencies of a .tgd, .omq or .cqs file.
    Chase { tgds: PathBuf, db: PathBuf },
    /// Core of every disjunct.
    Core { query: PathBuf },
    /// Is the first query contained in the second (optionally under full TGDs)?
    Contains {
        q1: PathBuf,
        q2: PathBuf,
        #[arg(long)]
        tgds: Option<PathBuf>,
    },
    /// Counting (or semi-counting) equivalence with a counterexample.
    Equiv {
        q1: PathBuf,
        q2: PathBuf,
        /// Counting equivalence (the default).
        #[arg(long, conflicts_with = "semi")]
        counting: bool,
        #[arg(long)]
        semi: bool,
        #[arg(long, alias = "tgds")]
        ontology: Option<PathBuf>,
    },
    /// Inclusion-exclusion classes and closure of a UCQ or OMQ.
    Closure {
        query: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DISJUNCT_CAP)]
        cap: usize,
    },
    /// tw, ctw, ss and lmn of every disjunct.
    Measure {
        query: PathBuf,
        #[arg(long, value_enum, default_value = "quantified")]
        linkage: LinkageArg,
        /// Also print a tree decomposition of the Gaifman graph.
        #[arg(long)]
        decomposition: bool,
    },
    /// Count recovery from an oracle.
    Recover {
        #[command(subcommand)]
        what: RecoverCmd,
    },
    /// Reductions between counting problems.
    Reduce {
        #[command(subcommand)]
        what: ReduceCmd,
    },
    /// Approximations by collapsings or by M_k queries.
    Approx {
        #[arg(value_enum)]
        kind: ApproxKind,
        file: PathBuf,
        #[arg(long)]
        k: usize,
        /// Comma-separated subset of tw,ctw,ss,lmn (mk only).
        #[arg(long, default_value = "tw,ctw,ss,lmn")]
        measures: String,
    },
    /// A database separating the disjuncts of a UCQ or OMQ.
    Witness { query: PathBuf },
    /// Run the seeded brute-force property suites.
    Selftest {
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
}

#[derive(Subcommand, Debug)]
enum RecoverCmd {
    /// Answers with every component in the given constants.
    #[command(name = "partial-domain")]
    PartialDomain {
        query: PathBuf,
        db: PathBuf,
        #[arg(long, value_delimiter = ',')]
        domain: Vec<String>,
    },
    /// Homomorphism strata by the number of answer positions in a set.
    Strata {
        query: PathBuf,
        db: PathBuf,
        #[arg(long, value_delimiter = ',')]
        set: Vec<String>,
    },
    /// Answer maps onto the answer variables read as constants.
    Surjections { query: PathBuf, db: PathBuf },
    /// A database separating the disjuncts.
    Witness { query: PathBuf },
    /// Count of one closure member from a union-count oracle.
    Extract {
        query: PathBuf,
        db: PathBuf,
        /// 1-based disjunct indices, comma separated.
        #[arg(long, value_delimiter = ',')]
        target: Vec<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum ReduceCmd {
    /// The marked OMQ over the core of the chased query.
    Mark { omq: PathBuf },
    /// Marked count from an unmarked oracle; the database uses M_<var> markers.
    MarkedCount { query: PathBuf, db: PathBuf },
    /// The self-join-free sharp query of the marked core.
    Sharp { omq: PathBuf },
    /// Count the sharp query on a database through the marked OMQ.
    SharpCount { omq: PathBuf, db: PathBuf },
    /// Drop answer equalities from a single-CQ OMQ.
    Equalities { omq: PathBuf },
    /// Count a CQS on a database that satisfies its constraints.
    Cqs { cqs: PathBuf, db: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ApproxKind {
    Ctw,
    Ss,
    Mk,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LinkageArg {
    Quantified,
    Whole,
}

/// A failure caused by the invocation rather than the input.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

#[derive(Debug, thiserror::Error)]
#[error("timed out after {0} s")]
struct Timeout(u64);

struct Out {
    json: bool,
    text: String,
    value: Value,
}

impl Out {
    fn new(json: bool) -> Self {
        Out {
            json,
            text: String::new(),
            value: Value::Null,
        }
    }
    fn emit(&self) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&self.value).expect("JSON value"));
        } else {
            print!("{}", self.text);
        }
    }
}

fn big_json(n: &BigInt) -> Value {
    serde_json::from_str(&n.to_string()).expect("decimal is a JSON number")
}

fn load(path: &Path) -> anyhow::Result<ModelObject> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let kind = DocKind::from_extension(ext)
        .ok_or_else(|| Usage(format!("{}: unknown extension '{ext}'", path.display())))?;
    let bytes = std::fs::read(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    parse_bytes(kind, &bytes).with_context(|| path.display().to_string())
}

fn load_db(path: &Path) -> anyhow::Result<Database> {
    match load(path)? {
        ModelObject::Database(d) => Ok(d),
        _ => Err(Usage(format!("{}: expected a database", path.display())).into()),
    }
}

/// A query together with its ontology (empty for plain queries).
struct Loaded {
    query: UnionQuery,
    ontology: Ontology,
    omq: Option<Omq>,
    cqs: Option<Cqs>,
}

fn load_query(path: &Path) -> anyhow::Result<Loaded> {
    Ok(match load(path)? {
        ModelObject::Query(q) => Loaded {
            query: q,
            ontology: Ontology::empty(),
            omq: None,
            cqs: None,
        },
        ModelObject::Omq(o) => Loaded {
            query: o.query.clone(),
            ontology: o.ontology.clone(),
            omq: Some(o),
            cqs: None,
        },
        ModelObject::Cqs(c) => Loaded {
            query: c.query.clone(),
            ontology: c.constraints.clone(),
            omq: None,
            cqs: Some(c),
        },
        _ => return Err(Usage(format!("{}: expected a query, OMQ or CQS", path.display())).into()),
    })
}

fn load_ontology(path: &Path) -> anyhow::Result<Ontology> {
    Ok(match load(path)? {
        ModelObject::Ontology(o) => o,
        ModelObject::Omq(o) => o.ontology,
        ModelObject::Cqs(c) => c.constraints,
        _ => return Err(Usage(format!("{}: expected dependencies", path.display())).into()),
    })
}

fn single(q: &UnionQuery, what: &str) -> anyhow::Result<ConjunctiveQuery> {
    match q.disjuncts() {
        [d] => Ok(d.clone()),
        _ => Err(Usage(format!("{what} expects a single CQ")).into()),
    }
}

fn constants(names: &[String]) -> BTreeSet<Const> {
    names.iter().map(|n| Const::from(n.as_str())).collect()
}

fn tuple_text(t: &[Const]) -> String {
    let parts: Vec<&str> = t.iter().map(Const::as_str).collect();
    format!("({})", parts.join(", "))
}

fn set_text(s: &[usize]) -> String {
    let parts: Vec<String> = s.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn verdict_out(out: &mut Out, v: &EquivalenceVerdict) {
    let word = if v.holds { "equivalent" } else { "not equivalent" };
    let _ = writeln!(out.text, "{word}");
    if let Some(d) = &v.counterexample {
        let _ = writeln!(out.text, "counterexample:");
        out.text.push_str(&serialize_database(d));
    }
    if let Some(n) = &v.note {
        let _ = writeln!(out.text, "note: {n}");
    }
    out.value = json!({
        "holds": v.holds,
        "relation": v.relation,
        "counterexample": v.counterexample.as_ref().map(serialize_database),
        "note": v.note,
    });
}

fn run(cli: Cli) -> anyhow::Result<Out> {
    let mut out = Out::new(cli.json);
    let search = match cli.budget {
        Some(b) => SearchBudget {
            max_databases: b,
            ..SearchBudget::default()
        },
        None => SearchBudget::default(),
    };
    match cli.command {
        Cmd::Parse { file } => {
            let obj = load(&file)?;
            out.text = serialize(&obj).text;
            out.value = match &obj {
                ModelObject::Schema(s) => json!({"kind": "schema", "value": s}),
                ModelObject::Database(d) => json!({"kind": "database", "value": d}),
                ModelObject::Query(q) => json!({"kind": "query", "value": q}),
                ModelObject::Ontology(o) => json!({"kind": "tgds", "value": o}),
                ModelObject::Omq(o) => json!({"kind": "omq", "value": o}),
                ModelObject::Cqs(c) => json!({"kind": "cqs", "value": c}),
            };
        }
        Cmd::Count { query, db } => {
            let l = load_query(&query)?;
            let d = load_db(&db)?;
            let n: BigInt = match (&l.omq, &l.cqs) {
                (Some(o), _) => omq_count(o, &d)?.into(),
                (_, Some(c)) => cqs_count_via_omq(c, &d)?.into(),
                _ => count_answers(&l.query, &d).into(),
            };
            let _ = writeln!(out.text, "{n}");
            out.value = json!({ "count": big_json(&n) });
        }
        Cmd::Answers { query, db } => {
            let l = load_query(&query)?;
            let mut d = load_db(&db)?;
            if !l.ontology.is_empty() {
                let schema = d.schema().union(l.query.schema())?;
                d = chase_database(&d.with_schema(schema)?, &l.ontology)?.database;
            }
            let a = answers(&l.query, &d);
            for t in &a.tuples {
                let _ = writeln!(out.text, "{}", tuple_text(t));
            }
            out.value = json!({"arity": a.arity, "tuples": a.tuples});
        }
        Cmd::Chase { tgds, db } => {
            let o = load_ontology(&tgds)?;
            let d = load_db(&db)?;
            let schema = d.schema().union(&o.schema()?)?;
            let r = chase_database(&d.with_schema(schema)?, &o)?;
            out.text = serialize_database(&r.database);
            out.value = json!({
                "steps": r.steps,
                "new_facts": r.new_facts,
                "database": serialize_database(&r.database),
            });
        }
        Cmd::Core { query } => {
            let l = load_query(&query)?;
            let cores: Vec<ConjunctiveQuery> = l.query.disjuncts().iter().map(core).collect();
            let texts: Vec<String> = cores.iter().map(serialize_cq).collect();
            for t in &texts {
                let _ = writeln!(out.text, "{t}");
            }
            out.value = json!({ "cores": texts });
        }
        Cmd::Contains { q1, q2, tgds } => {
            let a = load_query(&q1)?;
            let b = load_query(&q2)?;
            let t = match tgds {
                Some(p) => load_ontology(&p)?,
                None => a.ontology.clone(),
            };
            let holds = contained_under_full(&a.query, &b.query, &t)?;
            let _ = writeln!(out.text, "{holds}");
            out.value = json!({ "contained": holds });
        }
        Cmd::Equiv {
            q1,
            q2,
            counting: _,
            semi,
            ontology: tgds,
        } => {
            let a = load_query(&q1)?;
            let b = load_query(&q2)?;
            let v = match (&a.omq, &b.omq, semi, &tgds) {
                (Some(x), Some(y), false, None) => omq_counting_equivalent(x, y)?,
                _ => {
                    let t = match &tgds {
                        Some(p) => load_ontology(p)?,
                        None => a.ontology.clone(),
                    };
                    let class = Class::chased(t)?;
                    let (x, y) = (single(&a.query, "equiv")?, single(&b.query, "equiv")?);
                    if semi {
                        class.semi_counting_verdict(&x, &y, search)?
                    } else {
                        class.counting_verdict(&x, &y, search)?
                    }
                }
            };
            verdict_out(&mut out, &v);
        }
        Cmd::Closure { query, cap } => {
            let l = load_query(&query)?;
            let class = Class::chased(l.ontology.clone())?;
            let e = expand(&l.query, &class, cap)?;
            let closure: Vec<Vec<usize>> = e.closure().iter().map(|c| c.index_set.clone()).collect();
            let members: Vec<String> = closure.iter().map(|s| set_text(s)).collect();
            let _ = writeln!(out.text, "closure: {}", members.join(" "));
            let mut classes = Vec::new();
            for c in e.surviving() {
                let rep = e.representative(c);
                let ms: Vec<String> = c.members.iter().map(|&i| set_text(&e.conjunctions[i].index_set)).collect();
                let _ = writeln!(
                    out.text,
                    "{:+} {} members {} :: {}",
                    c.coefficient,
                    set_text(&rep.index_set),
                    ms.join(" "),
                    serialize_cq(&rep.query)
                );
                classes.push(json!({
                    "coefficient": c.coefficient,
                    "representative": rep.index_set,
                    "members": c.members.iter().map(|&i| e.conjunctions[i].index_set.clone()).collect::<Vec<_>>(),
                    "query": serialize_cq(&rep.query),
                }));
            }
            out.value = json!({ "closure": closure, "classes": classes });
        }
        Cmd::Measure {
            query,
            linkage,
            decomposition,
        } => {
            let l = load_query(&query)?;
            let mut reports = Vec::new();
            for d in l.query.disjuncts() {
                let mut r = measure_report(d)?;
                if let LinkageArg::Whole = linkage {
                    r.lmn = linked_matching_number_with(d, Linkage::Whole)?;
                }
                let _ = writeln!(out.text, "tw={} ctw={} ss={} lmn={}", r.tw, r.ctw, r.ss, r.lmn);
                let mut v = serde_json::to_value(r)?;
                if decomposition {
                    let td = treewidth(&gaifman(d))?.decomposition;
                    for (i, b) in td.bags.iter().enumerate() {
                        let _ = writeln!(out.text, "  bag {i}: {{{}}}", b.join(", "));
                    }
                    for (a, b) in &td.tree_edges {
                        let _ = writeln!(out.text, "  edge {a} {b}");
                    }
                    v["decomposition"] = serde_json::to_value(&td)?;
                }
                reports.push(v);
            }
            out.value = if reports.len() == 1 {
                reports.pop().expect("one report")
            } else {
                Value::Array(reports)
            };
        }
        Cmd::Recover { what } => recover(&mut out, what, &cli.oracle)?,
        Cmd::Reduce { what } => reduce(&mut out, what, &cli.oracle, cli.budget)?,
        Cmd::Approx { kind, file, k, measures } => approx(&mut out, kind, &file, k, &measures, cli.budget)?,
        Cmd::Witness { query } => witness(&mut out, &query, Some(search))?,
        Cmd::Selftest { cases } => {
            let results = selftest::run(cli.seed, cases);
            for r in &results {
                match &r.failure {
                    None => {
                        let _ = writeln!(out.text, "{}: ok ({} cases)", r.suite, r.cases);
                    }
                    Some(f) => {
                        let _ = writeln!(out.text, "{}: FAILED {f}", r.suite);
                    }
                }
            }
            out.value = json!({ "seed": cli.seed, "suites": results });
            if results.iter().any(|r| r.failure.is_some()) {
                out.emit();
                return Err(anyhow!("selftest failed"));
            }
        }
    }
    Ok(out)
}

/// The brute-force oracle for a loaded query: OMQ semantics when it has an
/// ontology.
fn brute_for(l: &Loaded) -> Box<dyn CountOracle> {
    match &l.omq {
        Some(o) => Box::new(OmqOracle(o.clone())),
        None if !l.ontology.is_empty() => Box::new(OmqOracle(Omq {
            ontology: l.ontology.clone(),
            data_schema: l.query.schema().clone(),
            query: l.query.clone(),
        })),
        None => Box::new(BruteForce(l.query.clone())),
    }
}

fn witness(out: &mut Out, query: &Path, search: Option<SearchBudget>) -> anyhow::Result<()> {
    let l = load_query(query)?;
    let class = Class::chased(l.ontology.clone())?;
    let budget = RecoveryBudget {
        search: search.unwrap_or_default(),
        ..RecoveryBudget::default()
    };
    let w = cqcount::recovery::witness_database(l.query.disjuncts(), &class, budget)?;
    out.text = serialize_database(&w);
    out.value = json!({ "database": serialize_database(&w) });
    Ok(())
}

fn count_out(out: &mut Out, n: &BigInt, calls: usize) {
    let _ = writeln!(out.text, "{n}");
    out.value = json!({ "count": big_json(n), "oracle_calls": calls });
}

fn recover(out: &mut Out, what: RecoverCmd, spec: &OracleSpec) -> anyhow::Result<()> {
    match what {
        RecoverCmd::PartialDomain { query, db, domain } => {
            let l = load_query(&query)?;
            let d = load_db(&db)?;
            let mut o = Counted::new(oracle::select(spec, brute_for(&l)));
            let n = partial_domain_count(&l.query, &d, &constants(&domain), &mut o)?;
            count_out(out, &n, o.calls);
        }
        RecoverCmd::Strata { query, db, set } => {
            let l = load_query(&query)?;
            let q = single(&l.query, "strata")?;
            let d = load_db(&db)?;
            let mut o = Counted::new(oracle::select(spec, brute_for(&l)));
            let s = recover_hom_strata(&q, &d, &constants(&set), &mut o)?;
            for (i, n) in s.iter().enumerate() {
                let _ = writeln!(out.text, "{i}: {n}");
            }
            out.value = json!({ "strata": s.iter().map(big_json).collect::<Vec<_>>(), "oracle_calls": o.calls });
        }
        RecoverCmd::Surjections { query, db } => {
            let l = load_query(&query)?;
            let q = single(&l.query, "surjections")?;
            let d = load_db(&db)?;
            let mut o = Counted::new(oracle::select(spec, brute_for(&l)));
            let n = surjection_count(&q, &d, &mut o)?;
            count_out(out, &n, o.calls);
        }
        RecoverCmd::Witness { query } => witness(out, &query, None)?,
        RecoverCmd::Extract { query, db, target } => {
            let l = load_query(&query)?;
            let d = load_db(&db)?;
            let class = Class::chased(l.ontology.clone())?;
            let mut o = Counted::new(oracle::select(spec, brute_for(&l)));
            let n = extract_cq_counts_from_ucq_oracle(&l.query, &target, &d, &mut o, &class, RecoveryBudget::default())?;
            count_out(out, &n, o.calls);
        }
    }
    Ok(())
}

fn load_omq(path: &Path) -> anyhow::Result<Omq> {
    match load(path)? {
        ModelObject::Omq(o) => Ok(o),
        ModelObject::Cqs(c) => Ok(c.as_omq()),
        ModelObject::Query(q) => Ok(Omq::new(Ontology::empty(), q.schema().clone(), q)?),
        _ => Err(Usage(format!("{}: expected an OMQ", path.display())).into()),
    }
}

/// The OMQ with its data schema widened to every symbol it mentions.
fn load_full_omq(path: &Path) -> anyhow::Result<Omq> {
    let o = load_omq(path)?;
    let full = o.data_schema.union(o.query.schema())?.union(&o.ontology.schema()?)?;
    Ok(Omq::new(o.ontology, full, o.query)?)
}

fn reduce(out: &mut Out, what: ReduceCmd, spec: &OracleSpec, budget: Option<usize>) -> anyhow::Result<()> {
    match what {
        ReduceCmd::Mark { omq } => {
            let star = core_chased_marking(&load_full_omq(&omq)?)?;
            out.text = serialize_omq(&star.omq);
            let markers: BTreeMap<String, String> =
                star.marking.markers.iter().map(|(v, r)| (v.to_string(), r.to_string())).collect();
            out.value = json!({ "omq": serialize_omq(&star.omq), "markers": markers });
        }
        ReduceCmd::MarkedCount { query, db } => {
            let l = load_query(&query)?;
            let q = single(&l.query, "marked-count")?;
            let m = mark(&q, &Schema::new())?;
            let d = load_db(&db)?;
            let d = d.clone().with_schema(d.schema().union(m.marked_schema())?)?;
            let mut o = Counted::new(oracle::select(spec, Box::new(BruteForce(q.clone().into()))));
            let n = marked_count_via_unmarked_oracle(&m, &d, &mut o)?;
            count_out(out, &n, o.calls);
        }
        ReduceCmd::Sharp { omq } => {
            let star = core_chased_marking(&load_full_omq(&omq)?)?;
            let sharp = sharp_query(&star.marking.base)?;
            let _ = writeln!(out.text, "{}", serialize_cq(&sharp.query));
            out.value = json!({ "sharp_query": serialize_cq(&sharp.query), "marked_omq": serialize_omq(&star.omq) });
        }
        ReduceCmd::SharpCount { omq, db } => {
            let star = core_chased_marking(&load_full_omq(&omq)?)?;
            let sharp = sharp_query(&star.marking.base)?;
            let d = load_db(&db)?;
            let d = d.clone().with_schema(d.schema().union(sharp.query.schema())?)?;
            let mut o = Counted::new(oracle::select(spec, Box::new(OmqOracle(star.omq.clone()))));
            let run = sharp_count_via_marked_omq_oracle(
                &sharp,
                &star,
                &d,
                &mut o,
                budget.unwrap_or(DEFAULT_FLOOD_BUDGET),
            )?;
            let _ = writeln!(out.text, "{}", run.count);
            out.value = json!({
                "count": big_json(&run.count),
                "sharp_query": serialize_cq(&sharp.query),
                "flooded_facts": run.flooded.len(),
                "oracle_calls": o.calls,
            });
        }
        ReduceCmd::Equalities { omq } => {
            let r = remove_equalities(&load_omq(&omq)?)?;
            out.text = serialize_omq(&r);
            out.value = json!({ "omq": serialize_omq(&r) });
        }
        ReduceCmd::Cqs { cqs, db } => {
            let c = match load(&cqs)? {
                ModelObject::Cqs(c) => c,
                _ => bail!(Usage(format!("{}: expected a CQS", cqs.display()))),
            };
            let n: BigInt = cqs_count_via_omq(&c, &load_db(&db)?)?.into();
            count_out(out, &n, 0);
        }
    }
    Ok(())
}

fn parse_measures(s: &str) -> anyhow::Result<Vec<Measure>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<Measure>().map_err(|e| Usage(e.to_string()).into()))
        .collect()
}

fn approx(
    out: &mut Out,
    kind: ApproxKind,
    file: &Path,
    k: usize,
    measures: &str,
    budget: Option<usize>,
) -> anyhow::Result<()> {
    match kind {
        ApproxKind::Ctw | ApproxKind::Ss => {
            let q = load_omq(file)?;
            let a = match kind {
                ApproxKind::Ctw => ctw_approximation(&q, k)?,
                _ => ss_approximation(&q, k)?,
            };
            out.text = serialize_omq(&a);
            out.value = json!({
                "disjuncts": a.query.disjuncts().len(),
                "omq": serialize_omq(&a),
            });
        }
        ApproxKind::Mk => {
            let s = match load(file)? {
                ModelObject::Cqs(c) => c,
                ModelObject::Omq(_) | ModelObject::Query(_) => {
                    let o = load_full_omq(file)?;
                    Cqs::new(o.ontology, o.data_schema, o.query)?
                }
                _ => bail!(Usage(format!("{}: expected a CQS", file.display()))),
            };
            let m = MeasureSet::new(parse_measures(measures)?, k)?;
            let b = MkBudget {
                max_nodes: budget.unwrap_or(MkBudget::default().max_nodes),
            };
            let verdict = decide_mk_equivalence(&s, &m, &b)?;
            let approx = mk_approximation(&s, &m, &b)?;
            let witness = match &verdict {
                MkVerdict::Equivalent(w) => Some(serialize_ucq(w)),
                _ => None,
            };
            let word = match &verdict {
                MkVerdict::Equivalent(_) => "equivalent".to_string(),
                MkVerdict::NotEquivalent => "not equivalent".to_string(),
                MkVerdict::Unknown(why) => format!("unknown: {why}"),
            };
            let _ = writeln!(out.text, "{word}");
            if let Some(w) = &witness {
                out.text.push_str(w);
            } else if let Some(q) = &approx.query {
                let _ = writeln!(out.text, "candidates (authoritative: {}):", approx.authoritative);
                out.text.push_str(&serialize_ucq(q));
            }
            out.value = json!({
                "equivalent": verdict.as_bool(),
                "witness": witness,
                "candidates": approx.query.as_ref().map(serialize_ucq),
                "authoritative": approx.authoritative,
                "variable_budget": approx.variable_budget,
                "progress": approx.progress,
            });
            if let MkVerdict::Unknown(why) = verdict {
                out.emit();
                return Err(cqcount::Error::Budget(why).into());
            }
        }
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        2
    } else if e.downcast_ref::<Timeout>().is_some() {
        3
    } else if let Some(cqcount::Error::Budget(_)) = e.downcast_ref::<cqcount::Error>() {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let timeout = cli.timeout;
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(run(cli));
    });
    let result = match timeout {
        Some(s) => rx
            .recv_timeout(Duration::from_secs(s))
            .unwrap_or_else(|_| Err(Timeout(s).into())),
        None => rx.recv().unwrap_or_else(|_| Err(anyhow!("worker thread panicked"))),
    };
    match result {
        Ok(out) => {
            out.emit();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
