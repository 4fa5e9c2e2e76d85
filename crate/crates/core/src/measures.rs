//! Structural measures of conjunctive queries: treewidth, contract
//! treewidth, starsize and linked matching number.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::*;

/// Largest graph handed to the exact treewidth routine.
pub const TREEWIDTH_VERTEX_CAP: usize = 24;
/// Largest number of quantified variables for the linked matching search.
pub const LMN_VARIABLE_CAP: usize = 16;

/// A simple undirected graph on named vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    adj: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn new(names: impl IntoIterator<Item = String>) -> Self {
        let names: Vec<String> = names.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let adj = vec![BTreeSet::new(); names.len()];
        Graph { names, adj }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    /// Self-loops are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn add_edge_by_name(&mut self, a: &str, b: &str) -> Result<()> {
        let i = self.index_of(a).ok_or_else(|| Error::Invalid(format!("no vertex {a}")))?;
        let j = self.index_of(b).ok_or_else(|| Error::Invalid(format!("no vertex {b}")))?;
        self.add_edge(i, j);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, ns) in self.adj.iter().enumerate() {
            for &b in ns {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn named_edges(&self) -> Vec<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(a, b)| (self.names[a].clone(), self.names[b].clone()))
            .collect()
    }

    /// The subgraph induced by `keep`.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> Graph {
        let mut g = Graph::new(keep.iter().map(|&v| self.names[v].clone()));
        for (a, b) in self.edges() {
            if keep.contains(&a) && keep.contains(&b) {
                g.add_edge_by_name(&self.names[a], &self.names[b]).expect("vertex kept");
            }
        }
        g
    }

    /// Connected components as sorted vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.names.len()];
        let mut out = Vec::new();
        for s in 0..self.names.len() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            vertices: &'a [String],
            edges: Vec<(String, String)>,
        }
        View {
            vertices: &self.names,
            edges: self.named_edges(),
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<String>>,
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn width(&self) -> usize {
        let w = self.bags.iter().map(Vec::len).max().unwrap_or(0);
        w.saturating_sub(1).max(1)
    }

    /// Checks vertex cover, edge cover, connectivity of occurrences and that
    /// the tree is a tree.
    pub fn is_valid_for(&self, g: &Graph) -> bool {
        let n = self.bags.len();
        if n == 0 {
            return g.vertex_count() == 0;
        }
        if self.tree_edges.len() != n - 1 {
            return false;
        }
        let mut tree = Graph::new((0..n).map(|i| format!("{i:08}")));
        for &(a, b) in &self.tree_edges {
            if a >= n || b >= n {
                return false;
            }
            tree.add_edge(a, b);
        }
        if tree.components().len() != 1 {
            return false;
        }
        let sets: Vec<BTreeSet<&str>> = self.bags.iter().map(|b| b.iter().map(String::as_str).collect()).collect();
        for name in g.names() {
            let holders: BTreeSet<usize> = (0..n).filter(|&i| sets[i].contains(name.as_str())).collect();
            if holders.is_empty() || tree.induced(&holders).components().len() != 1 {
                return false;
            }
        }
        g.named_edges()
            .iter()
            .all(|(a, b)| sets.iter().any(|s| s.contains(a.as_str()) && s.contains(b.as_str())))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Treewidth {
    pub width: usize,
    pub decomposition: TreeDecomposition,
}

/// Number of vertices outside `s ∪ {v}` reachable from `v` through `s`.
fn q_value(nb: &[u32], s: u32, v: usize) -> u32 {
    let mut visited = 0u32;
    let mut out = 0u32;
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        let mut m = nb[u];
        while m != 0 {
            let w = m.trailing_zeros() as usize;
            m &= m - 1;
            let bit = 1u32 << w;
            if s & bit != 0 {
                if visited & bit == 0 {
                    visited |= bit;
                    stack.push(w);
                }
            } else if w != v {
                out |= bit;
            }
        }
    }
    out.count_ones()
}

/// Optimal elimination order of a connected graph given by neighbour masks.
fn elimination_order(nb: &[u32]) -> Vec<usize> {
    let n = nb.len();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut tw = vec![0u8; 1usize << n];
    for s in 1..=full {
        let mut best = u8::MAX;
        let mut m = s;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let rest = s & !(1u32 << v);
            let c = tw[rest as usize].max(q_value(nb, rest, v) as u8);
            best = best.min(c);
        }
        tw[s as usize] = best;
    }
    let mut order = VecDeque::new();
    let mut s = full;
    while s != 0 {
        let mut m = s;
        loop {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let rest = s & !(1u32 << v);
            if tw[rest as usize].max(q_value(nb, rest, v) as u8) == tw[s as usize] {
                order.push_front(v);
                s = rest;
                break;
            }
        }
    }
    order.into()
}

/// Bags {v} ∪ later neighbours in the filled graph, each hung below the
/// bag of its earliest later neighbour.
fn decomposition_from_order(g: &Graph, vertices: &[usize], order: &[usize]) -> (Vec<Vec<usize>>, Vec<(usize, usize)>) {
    let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut fill: BTreeMap<usize, BTreeSet<usize>> = order
        .iter()
        .map(|&v| {
            let gv = vertices[v];
            let ns = g.neighbors(gv).iter().filter_map(|w| vertices.iter().position(|x| x == w)).collect();
            (v, ns)
        })
        .collect();
    let mut bags = Vec::new();
    let mut parents = Vec::new();
    for &v in order {
        let later: BTreeSet<usize> = fill[&v].iter().copied().filter(|w| pos[w] > pos[&v]).collect();
        for &a in &later {
            for &b in &later {
                if a != b {
                    fill.get_mut(&a).unwrap().insert(b);
                }
            }
        }
        let parent = later.iter().min_by_key(|w| pos[*w]).map(|w| pos[w]);
        let mut bag: Vec<usize> = later.iter().map(|&w| vertices[w]).collect();
        bag.push(vertices[v]);
        bag.sort();
        bags.push(bag);
        parents.push(parent);
    }
    let last = order.len() - 1;
    let edges = parents
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != last)
        .map(|(i, p)| (i, p.unwrap_or(last)))
        .collect();
    (bags, edges)
}

/// Exact treewidth with a witnessing decomposition. Graphs without edges
/// have treewidth one.
pub fn treewidth(g: &Graph) -> Result<Treewidth> {
    let mut bags: Vec<Vec<usize>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut width = 0usize;
    for comp in g.components() {
        if comp.len() > TREEWIDTH_VERTEX_CAP {
            return Err(Error::Budget(format!(
                "treewidth of a {}-vertex component exceeds the cap of {TREEWIDTH_VERTEX_CAP}",
                comp.len()
            )));
        }
        let idx: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let nb: Vec<u32> = comp
            .iter()
            .map(|&v| g.neighbors(v).iter().fold(0u32, |m, w| m | 1 << idx[w]))
            .collect();
        let order = elimination_order(&nb);
        let (b, e) = decomposition_from_order(g, &comp, &order);
        width = width.max(b.iter().map(Vec::len).max().unwrap_or(1) - 1);
        let offset = bags.len();
        if offset > 0 {
            edges.push((0, offset));
        }
        edges.extend(e.into_iter().map(|(x, y)| (x + offset, y + offset)));
        bags.extend(b);
    }
    let decomposition = TreeDecomposition {
        bags: bags
            .into_iter()
            .map(|b| b.into_iter().map(|v| g.names()[v].clone()).collect())
            .collect(),
        tree_edges: edges,
    };
    Ok(Treewidth {
        width: if g.edge_count() == 0 { 1 } else { width },
        decomposition,
    })
}

/// Width of the best elimination ordering, by trying them all.
pub fn treewidth_brute_force(g: &Graph) -> usize {
    fn width_of(g: &Graph, order: &[usize]) -> usize {
        let n = order.len();
        let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
        let mut done = vec![false; n];
        let mut w = 0;
        for &v in order {
            let later: Vec<usize> = adj[v].iter().copied().filter(|&u| !done[u]).collect();
            w = w.max(later.len());
            for &a in &later {
                for &b in &later {
                    if a != b {
                        adj[a].insert(b);
                    }
                }
            }
            done[v] = true;
        }
        w
    }
    fn permute(g: &Graph, cur: &mut Vec<usize>, used: &mut Vec<bool>, best: &mut usize) {
        if cur.len() == used.len() {
            *best = (*best).min(width_of(g, cur));
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                permute(g, cur, used, best);
                cur.pop();
                used[v] = false;
            }
        }
    }
    if g.edge_count() == 0 {
        return 1;
    }
    let mut best = usize::MAX;
    permute(g, &mut Vec::new(), &mut vec![false; g.vertex_count()], &mut best);
    best
}

/// G_q, built on D~_q.
pub fn gaifman(q: &ConjunctiveQuery) -> Graph {
    let c = canonical_database(q);
    let mut g = Graph::new(c.identified.adom().iter().map(|a| a.to_string()));
    for f in c.identified.facts() {
        for a in &f.args {
            for b in &f.args {
                g.add_edge_by_name(a.as_str(), b.as_str()).expect("constant of D~_q");
            }
        }
    }
    g
}

/// Answer-variable vertices of G_q.
fn answer_vertices(q: &ConjunctiveQuery, g: &Graph) -> BTreeSet<usize> {
    canonical_database(q)
        .surviving
        .iter()
        .filter_map(|v| g.index_of(v.as_str()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct XComponent {
    pub quantified: BTreeSet<String>,
    pub answer: BTreeSet<String>,
    pub graph: Graph,
}

/// The x̄-components of G_q.
pub fn x_components(q: &ConjunctiveQuery) -> Vec<XComponent> {
    let g = gaifman(q);
    let ans = answer_vertices(q, &g);
    let quant: BTreeSet<usize> = (0..g.vertex_count()).filter(|v| !ans.contains(v)).collect();
    let inner = g.induced(&quant);
    inner
        .components()
        .into_iter()
        .map(|comp| {
            let vs: BTreeSet<usize> = comp.iter().map(|&i| g.index_of(&inner.names()[i]).unwrap()).collect();
            let touched: BTreeSet<usize> = vs
                .iter()
                .flat_map(|&v| g.neighbors(v).iter().copied())
                .filter(|w| ans.contains(w))
                .collect();
            let mut graph = Graph::new(vs.iter().chain(&touched).map(|&v| g.names()[v].clone()));
            for (a, b) in g.edges() {
                if vs.contains(&a) || vs.contains(&b) {
                    graph.add_edge_by_name(&g.names()[a], &g.names()[b]).expect("endpoint kept");
                }
            }
            XComponent {
                quantified: vs.iter().map(|&v| g.names()[v].clone()).collect(),
                answer: touched.iter().map(|&v| g.names()[v].clone()).collect(),
                graph,
            }
        })
        .collect()
}

/// G_q on the answer variables plus edges between answer variables that
/// share an x̄-component.
pub fn contract(q: &ConjunctiveQuery) -> Graph {
    let g = gaifman(q);
    let ans = answer_vertices(q, &g);
    let mut c = g.induced(&ans);
    for comp in x_components(q) {
        for a in &comp.answer {
            for b in &comp.answer {
                c.add_edge_by_name(a, b).expect("answer vertex");
            }
        }
    }
    c
}

pub fn contract_treewidth(q: &ConjunctiveQuery) -> Result<usize> {
    Ok(treewidth(&contract(q))?.width)
}

/// Largest number of answer variables in one x̄-component; 0 without any.
pub fn starsize(q: &ConjunctiveQuery) -> usize {
    x_components(q).iter().map(|c| c.answer.len()).max().unwrap_or(0)
}

/// Where the vertex-disjoint paths of node-well-linkedness may run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Linkage {
    /// Paths stay among the quantified variables.
    #[default]
    Quantified,
    /// Paths may use any vertex of G_q.
    Whole,
}

/// Maximum number of vertex-disjoint paths from `a` to `b` in `g`.
fn disjoint_paths(g: &Graph, allowed: &BTreeSet<usize>, a: &[usize], b: &[usize]) -> usize {
    // Node v splits into 2v (in) and 2v+1 (out); source 2n, sink 2n+1.
    let n = g.vertex_count();
    let (src, snk) = (2 * n, 2 * n + 1);
    let mut cap: BTreeMap<(usize, usize), i32> = BTreeMap::new();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); 2 * n + 2];
    let mut arc = |u: usize, v: usize, c: i32| {
        *cap.entry((u, v)).or_default() += c;
        cap.entry((v, u)).or_default();
        adj[u].insert(v);
        adj[v].insert(u);
    };
    for &v in allowed {
        arc(2 * v, 2 * v + 1, 1);
        for &w in g.neighbors(v) {
            if allowed.contains(&w) {
                arc(2 * v + 1, 2 * w, 1);
            }
        }
    }
    for &v in a {
        arc(src, 2 * v, 1);
    }
    for &v in b {
        arc(2 * v + 1, snk, 1);
    }
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; 2 * n + 2];
        prev[src] = src;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            if u == snk {
                break;
            }
            for &w in &adj[u] {
                if prev[w] == usize::MAX && cap[&(u, w)] > 0 {
                    prev[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if prev[snk] == usize::MAX {
            return flow;
        }
        let mut v = snk;
        while v != src {
            let u = prev[v];
            *cap.get_mut(&(u, v)).unwrap() -= 1;
            *cap.get_mut(&(v, u)).unwrap() += 1;
            v = u;
        }
        flow += 1;
    }
}

fn node_well_linked(g: &Graph, allowed: &BTreeSet<usize>, s: &[usize]) -> bool {
    let m = s.len();
    // Assign each element to S1, S2 or neither.
    let mut assign = vec![0u8; m];
    loop {
        let s1: Vec<usize> = (0..m).filter(|&i| assign[i] == 1).map(|i| s[i]).collect();
        let s2: Vec<usize> = (0..m).filter(|&i| assign[i] == 2).map(|i| s[i]).collect();
        if !s1.is_empty() && s1.len() == s2.len() && s1 < s2 && disjoint_paths(g, allowed, &s1, &s2) < s1.len() {
            return false;
        }
        let mut i = 0;
        loop {
            if i == m {
                return true;
            }
            assign[i] += 1;
            if assign[i] == 3 {
                assign[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// Does a matching in `g` cover all of `s` using distinct vertices of `xs`?
fn covers(g: &Graph, xs: &BTreeSet<usize>, s: &[usize]) -> bool {
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    fn augment(g: &Graph, xs: &BTreeSet<usize>, y: usize, seen: &mut BTreeSet<usize>, owner: &mut BTreeMap<usize, usize>) -> bool {
        for &x in g.neighbors(y) {
            if !xs.contains(&x) || !seen.insert(x) {
                continue;
            }
            let free = match owner.get(&x) {
                None => true,
                Some(&y2) => augment(g, xs, y2, seen, owner),
            };
            if free {
                owner.insert(x, y);
                return true;
            }
        }
        false
    }
    s.iter().all(|&y| augment(g, xs, y, &mut BTreeSet::new(), &mut owner))
}

/// Size of the largest linked matching from x̄ to ȳ in G_q.
pub fn linked_matching_number_with(q: &ConjunctiveQuery, linkage: Linkage) -> Result<usize> {
    let g = gaifman(q);
    let xs = answer_vertices(q, &g);
    let ys: Vec<usize> = (0..g.vertex_count()).filter(|v| !xs.contains(v)).collect();
    // Only quantified variables adjacent to an answer variable can be matched.
    let cand: Vec<usize> = ys
        .iter()
        .copied()
        .filter(|&y| g.neighbors(y).iter().any(|x| xs.contains(x)))
        .collect();
    if cand.len() > LMN_VARIABLE_CAP {
        return Err(Error::Budget(format!(
            "{} matchable quantified variables exceed the cap of {LMN_VARIABLE_CAP}",
            cand.len()
        )));
    }
    let allowed: BTreeSet<usize> = match linkage {
        Linkage::Quantified => ys.iter().copied().collect(),
        Linkage::Whole => (0..g.vertex_count()).collect(),
    };
    let top = cand.len().min(xs.len());
    for m in (1..=top).rev() {
        let mut found = false;
        for_each_subset(&cand, m, &mut |s| {
            if !found && covers(&g, &xs, s) && node_well_linked(&g, &allowed, s) {
                found = true;
            }
        });
        if found {
            return Ok(m);
        }
    }
    Ok(0)
}

pub fn linked_matching_number(q: &ConjunctiveQuery) -> Result<usize> {
    linked_matching_number_with(q, Linkage::default())
}

fn for_each_subset(items: &[usize], m: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(items: &[usize], m: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == m {
            f(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < m - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, m, i + 1, cur, f);
            cur.pop();
        }
    }
    go(items, m, 0, &mut Vec::new(), f);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureReport {
    pub tw: usize,
    pub ctw: usize,
    pub ss: usize,
    pub lmn: usize,
}

pub fn measure_report(q: &ConjunctiveQuery) -> Result<MeasureReport> {
    Ok(MeasureReport {
        tw: treewidth(&gaifman(q))?.width,
        ctw: contract_treewidth(q)?,
        ss: starsize(q),
        lmn: linked_matching_number(q)?,
    })
}

/// One of the four measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Measure {
    Tw,
    Ctw,
    Ss,
    Lmn,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Tw, Measure::Ctw, Measure::Ss, Measure::Lmn];

    pub fn of(self, r: &MeasureReport) -> usize {
        match self {
            Measure::Tw => r.tw,
            Measure::Ctw => r.ctw,
            Measure::Ss => r.ss,
            Measure::Lmn => r.lmn,
        }
    }

    /// Computes only this measure.
    pub fn compute(self, q: &ConjunctiveQuery) -> Result<usize> {
        match self {
            Measure::Tw => Ok(treewidth(&gaifman(q))?.width),
            Measure::Ctw => contract_treewidth(q),
            Measure::Ss => Ok(starsize(q)),
            Measure::Lmn => linked_matching_number(q),
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tw" => Ok(Measure::Tw),
            "ctw" => Ok(Measure::Ctw),
            "ss" => Ok(Measure::Ss),
            "lmn" => Ok(Measure::Lmn),
            _ => Err(Error::Invalid(format!("unknown measure {s}"))),
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Measure::Tw => "TW",
            Measure::Ctw => "CTW",
            Measure::Ss => "SS",
            Measure::Lmn => "LMN",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_cq;

    const FIG1: &str = "q(x1,x2,x3,x4,x5,x6) :- T(y1,y2,y3), T(x2,x3,y4), T(x1,y4,x3), \
        R(x6,y1), R(x4,y2), R(y2,x5), x3 = x6.";

    fn cq(s: &str) -> ConjunctiveQuery {
        parse_cq(s, None).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let mut g = Graph::new((0..n).map(|i| format!("v{i:02}")));
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    #[test]
    fn treewidth_basics() {
        assert_eq!(treewidth(&Graph::new(["a".to_string()])).unwrap().width, 1);
        let mut k4 = Graph::new((0..4).map(|i| i.to_string()));
        for a in 0..4 {
            for b in 0..4 {
                k4.add_edge(a, b);
            }
        }
        let t = treewidth(&k4).unwrap();
        assert_eq!(t.width, 3);
        assert!(t.decomposition.is_valid_for(&k4));
        let c = cycle(6);
        let t = treewidth(&c).unwrap();
        assert_eq!(t.width, 2);
        assert!(t.decomposition.is_valid_for(&c));
        assert_eq!(treewidth_brute_force(&c), 2);
    }

    #[test]
    fn figure_one() {
        let q = cq(FIG1);
        let g = gaifman(&q);
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(x_components(&q).len(), 2);
        assert_eq!(
            measure_report(&q).unwrap(),
            MeasureReport {
                tw: 2,
                ctw: 2,
                ss: 3,
                lmn: 2
            }
        );
        assert_eq!(linked_matching_number_with(&q, Linkage::Whole).unwrap(), 3);
    }

    #[test]
    fn small_cases() {
        let q = cq("q(x) :- R(x,y).");
        assert_eq!(linked_matching_number(&q).unwrap(), 1);
        let q = cq("q(x,y) :- R(x,y).");
        assert_eq!(starsize(&q), 0);
        assert_eq!(linked_matching_number(&q).unwrap(), 0);
        assert_eq!(contract(&q), gaifman(&q));
        let star = cq("q(x1,x2,x3) :- P(z,x1), P(z,x2), P(z,x3).");
        assert_eq!(starsize(&star), 3);
        assert_eq!(contract_treewidth(&star).unwrap(), 2);
    }

    #[test]
    fn subdivided_clique() {
        let mut atoms = Vec::new();
        for i in 1..=4 {
            for j in i + 1..=4 {
                atoms.push(format!("E(x{i},y{i}{j}), E(y{i}{j},x{j})"));
            }
        }
        let q = cq(&format!("q(x1,x2,x3,x4) :- {}.", atoms.join(", ")));
        let k4 = contract(&q);
        assert_eq!(k4.edge_count(), 6);
        assert_eq!(contract_treewidth(&q).unwrap(), 3);
    }
}
