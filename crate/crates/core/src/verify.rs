//! Votes, popularity margins and structural popularity checks.
//!
//! The structural check works on the digraph `D` over all agents that has an
//! arc `w -> f` for every non-matching edge kept in `G_M` and an arc `f -> w`
//! for every matching edge. Alternating paths and cycles of `G_M` are exactly
//! the directed simple paths and cycles of `D` (the graph is bipartite, so no
//! blossoms arise).

use std::collections::VecDeque;

use crate::model::{AgentId, Edge, Instance, Matching};
use crate::oracle::{self, OracleError};

/// +1 if `x` prefers its partner in `m1` to its partner in `m2`, −1 for the
/// reverse, 0 if indifferent. Being unmatched is worst.
pub fn vote(i: &Instance, x: AgentId, m1: &Matching, m2: &Matching) -> i32 {
    i.compare(x, m1.mate(x), m2.mate(x))
}

/// Δ(m1, m2): votes for `m1` minus votes for `m2`.
pub fn popularity_margin(i: &Instance, m1: &Matching, m2: &Matching) -> i64 {
    let w: i64 = (0..i.num_workers())
        .map(|w| i.compare(AgentId::worker(w), m1.worker_mate(w), m2.worker_mate(w)) as i64)
        .sum();
    let f: i64 = (0..i.num_firms())
        .map(|f| i.compare(AgentId::firm(f), m1.firm_mate(f), m2.firm_mate(f)) as i64)
        .sum();
    w + f
}

/// Classification of an edge relative to a matching `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    /// Both endpoints prefer each other to their `M`-partners.
    MinusMinus,
    /// Exactly one endpoint does.
    PlusMinus,
    /// Neither does.
    PlusPlus,
    /// The edge is in `M`.
    Matched,
}

pub fn edge_label(i: &Instance, m: &Matching, e: Edge) -> EdgeLabel {
    if m.contains(e) {
        return EdgeLabel::Matched;
    }
    let wp = i.compare(e.worker_id(), Some(e.firm), m.worker_mate(e.worker)) > 0;
    let fp = i.compare(e.firm_id(), Some(e.worker), m.firm_mate(e.firm)) > 0;
    match (wp, fp) {
        (true, true) => EdgeLabel::MinusMinus,
        (false, false) => EdgeLabel::PlusPlus,
        _ => EdgeLabel::PlusMinus,
    }
}

/// `G_M` together with the label of every edge of the instance.
#[derive(Debug, Clone)]
pub struct LabeledGraph<'a> {
    instance: &'a Instance,
    matching: &'a Matching,
    labels: Vec<(Edge, EdgeLabel)>,
}

pub fn label_graph<'a>(i: &'a Instance, m: &'a Matching) -> LabeledGraph<'a> {
    let labels = i.edges().into_iter().map(|e| (e, edge_label(i, m, e))).collect();
    LabeledGraph { instance: i, matching: m, labels }
}

impl<'a> LabeledGraph<'a> {
    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn matching(&self) -> &'a Matching {
        self.matching
    }

    /// All edges with labels, ordered by (worker, firm).
    pub fn labels(&self) -> &[(Edge, EdgeLabel)] {
        &self.labels
    }

    pub fn label(&self, e: Edge) -> Option<EdgeLabel> {
        self.labels
            .binary_search_by_key(&e, |&(x, _)| x)
            .ok()
            .map(|k| self.labels[k].1)
    }

    pub fn with_label(&self, label: EdgeLabel) -> Vec<Edge> {
        self.labels
            .iter()
            .filter(|&&(_, l)| l == label)
            .map(|&(e, _)| e)
            .collect()
    }

    /// Edges of `G_M`: everything except `PlusPlus`.
    pub fn retained(&self) -> Vec<Edge> {
        self.labels
            .iter()
            .filter(|&&(_, l)| l != EdgeLabel::PlusPlus)
            .map(|&(e, _)| e)
            .collect()
    }
}

/// Which popularity condition a certificate violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    /// Alternating cycle through a `MinusMinus` edge.
    Cycle,
    /// Alternating path from an unmatched agent through a `MinusMinus` edge.
    UnmatchedPath,
    /// Alternating path through two `MinusMinus` edges.
    DoublePath,
}

/// An alternating cycle or path witnessing that a matching is not popular.
///
/// `edges` lists the structure in traversal order. Paths are extended by the
/// matching edges at their ends, so `M ⊕ edges` is a matching that beats `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub violation: Violation,
    pub edges: Vec<Edge>,
}

impl Certificate {
    pub fn improving_matching(&self, m: &Matching) -> Matching {
        let mut out = m.clone();
        for &e in &self.edges {
            out.remove(e);
        }
        for &e in &self.edges {
            if !m.contains(e) {
                out.insert(e).expect("certificate is an alternating structure");
            }
        }
        out
    }
}

struct Digraph {
    nw: usize,
    out: Vec<Vec<usize>>,
    rev: Vec<Vec<usize>>,
    /// `MinusMinus` arcs as (worker node, firm node), ascending.
    minus: Vec<(usize, usize)>,
}

impl Digraph {
    fn build(i: &Instance, m: &Matching) -> Self {
        let nw = i.num_workers();
        let n = i.num_agents();
        let mut out = vec![Vec::new(); n];
        let mut rev = vec![Vec::new(); n];
        let mut minus = Vec::new();
        for w in 0..nw {
            let mw = m.worker_mate(w);
            let mut fs = i.worker_prefs(w).to_vec();
            fs.sort_unstable();
            for f in fs {
                if mw == Some(f) {
                    out[nw + f].push(w);
                    rev[w].push(nw + f);
                    continue;
                }
                let wp = mw.is_none_or(|g| i.worker_rank(w, f) < i.worker_rank(w, g));
                let fp = m
                    .firm_mate(f)
                    .is_none_or(|v| i.firm_rank(f, w) < i.firm_rank(f, v));
                if wp || fp {
                    out[w].push(nw + f);
                    rev[nw + f].push(w);
                }
                if wp && fp {
                    minus.push((w, nw + f));
                }
            }
        }
        for r in rev.iter_mut() {
            r.sort_unstable();
        }
        Digraph { nw, out, rev, minus }
    }

    fn edge(&self, a: usize, b: usize) -> Edge {
        if a < self.nw {
            Edge::new(a, b - self.nw)
        } else {
            Edge::new(b, a - self.nw)
        }
    }

    fn path_edges(&self, nodes: &[usize]) -> Vec<Edge> {
        nodes.windows(2).map(|p| self.edge(p[0], p[1])).collect()
    }

    /// Strongly connected component id of every node (iterative Tarjan).
    fn scc(&self) -> Vec<usize> {
        let n = self.out.len();
        const UNSEEN: usize = usize::MAX;
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut comp = vec![UNSEEN; n];
        let mut stack = Vec::new();
        let mut call: Vec<(usize, usize)> = Vec::new();
        let mut next = 0;
        let mut ncomp = 0;
        for root in 0..n {
            if index[root] != UNSEEN {
                continue;
            }
            call.push((root, 0));
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut k)) = call.last_mut() {
                if *k < self.out[v].len() {
                    let u = self.out[v][*k];
                    *k += 1;
                    if index[u] == UNSEEN {
                        index[u] = next;
                        low[u] = next;
                        next += 1;
                        stack.push(u);
                        on_stack[u] = true;
                        call.push((u, 0));
                    } else if on_stack[u] {
                        low[v] = low[v].min(index[u]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        loop {
                            let x = stack.pop().expect("tarjan stack");
                            on_stack[x] = false;
                            comp[x] = ncomp;
                            if x == v {
                                break;
                            }
                        }
                        ncomp += 1;
                    }
                }
            }
        }
        comp
    }
}

fn reach(adj: &[Vec<usize>], sources: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    for s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// Shortest path (as nodes) from the first-reached source to a target;
/// ties resolved by ascending node order.
fn bfs_path(
    adj: &[Vec<usize>],
    sources: &[usize],
    is_target: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    const NONE: usize = usize::MAX;
    let mut parent = vec![NONE; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if is_target(v) {
            let mut path = vec![v];
            let mut x = v;
            while parent[x] != NONE {
                x = parent[x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                parent[u] = v;
                queue.push_back(u);
            }
        }
    }
    None
}

/// `None` if `m` is popular in `i`; otherwise an improving structure.
///
/// Conditions are tested in the order cycle, unmatched path, double path.
/// Within a condition the first offending `MinusMinus` edge in
/// (worker, firm) order is reported, with shortest connecting paths.
pub fn popularity_certificate(i: &Instance, m: &Matching) -> Option<Certificate> {
    let d = Digraph::build(i, m);
    if d.minus.is_empty() {
        return None;
    }
    let nw = d.nw;
    let n = d.out.len();
    let mate = |v: usize| -> Option<usize> {
        if v < nw {
            m.worker_mate(v).map(|f| nw + f)
        } else {
            m.firm_mate(v - nw)
        }
    };

    // (i) a MinusMinus arc inside a strongly connected component
    let comp = d.scc();
    if let Some(&(w, f)) = d.minus.iter().find(|&&(w, f)| comp[w] == comp[f]) {
        let back = bfs_path(&d.out, &[f], |v| v == w).expect("same component");
        let mut nodes = vec![w];
        nodes.extend(back);
        return Some(Certificate { violation: Violation::Cycle, edges: d.path_edges(&nodes) });
    }

    // (ii) reachable from an unmatched worker, or reaching an unmatched firm
    let free_workers: Vec<usize> = (0..nw).filter(|&v| mate(v).is_none()).collect();
    let free_firms: Vec<usize> = (nw..n).filter(|&v| mate(v).is_none()).collect();
    let from_free = reach(&d.out, free_workers.iter().copied());
    let to_free = reach(&d.rev, free_firms.iter().copied());
    if let Some(&(w, f)) = d.minus.iter().find(|&&(w, f)| from_free[w] || to_free[f]) {
        let nodes = if from_free[w] {
            let mut nodes = bfs_path(&d.out, &free_workers, |v| v == w).expect("reachable");
            nodes.push(f);
            nodes.extend(mate(f));
            nodes
        } else {
            let mut nodes: Vec<usize> = mate(w).into_iter().collect();
            nodes.push(w);
            nodes.extend(bfs_path(&d.out, &[f], |v| v >= nw && mate(v).is_none()).expect("reachable"));
            nodes
        };
        return Some(Certificate {
            violation: Violation::UnmatchedPath,
            edges: d.path_edges(&nodes),
        });
    }

    // (iii) the head of one MinusMinus arc reaches the tail of another
    let mut is_tail = vec![false; n];
    for &(w, _) in &d.minus {
        is_tail[w] = true;
    }
    let to_tail = reach(&d.rev, d.minus.iter().map(|&(w, _)| w));
    if let Some(&(w1, f1)) = d.minus.iter().find(|&&(_, f)| to_tail[f]) {
        let mid = bfs_path(&d.out, &[f1], |v| is_tail[v]).expect("reachable");
        let w2 = *mid.last().expect("non-empty path");
        let f2 = d
            .minus
            .iter()
            .find(|&&(w, _)| w == w2)
            .map(|&(_, f)| f)
            .expect("tail of a MinusMinus arc");
        let mut nodes: Vec<usize> = mate(w1).into_iter().collect();
        nodes.push(w1);
        nodes.extend(mid);
        nodes.push(f2);
        nodes.extend(mate(f2));
        return Some(Certificate { violation: Violation::DoublePath, edges: d.path_edges(&nodes) });
    }
    None
}

pub fn is_popular(i: &Instance, m: &Matching) -> bool {
    popularity_certificate(i, m).is_none()
}

/// How dominance is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DominanceCheck {
    /// Popular and no augmenting path in `G_M`.
    #[default]
    Structural,
    /// Popular and strictly more popular than every larger matching, by
    /// enumeration (small instances only).
    Definition,
}

pub fn is_dominant(i: &Instance, m: &Matching) -> bool {
    if !is_popular(i, m) {
        return false;
    }
    let d = Digraph::build(i, m);
    let nw = d.nw;
    let from_free = reach(&d.out, (0..nw).filter(|&w| m.worker_mate(w).is_none()));
    !(0..i.num_firms()).any(|f| m.firm_mate(f).is_none() && from_free[nw + f])
}

pub fn is_dominant_with(i: &Instance, m: &Matching, check: DominanceCheck) -> Result<bool, OracleError> {
    match check {
        DominanceCheck::Structural => Ok(is_dominant(i, m)),
        DominanceCheck::Definition => {
            if !is_popular(i, m) {
                return Ok(false);
            }
            let size = m.len();
            for other in oracle::matchings(i, oracle::DEFAULT_BOUND)? {
                if other.len() > size && popularity_margin(i, m, &other) <= 0 {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Whether `m` beats every other matching strictly. Enumerates all matchings,
/// so instances are limited to `bound` agents per side.
pub fn is_strongly_popular(i: &Instance, m: &Matching, bound: usize) -> Result<bool, OracleError> {
    if !is_popular(i, m) {
        return Ok(false);
    }
    for other in oracle::matchings(i, bound)? {
        if other != *m && popularity_margin(i, m, &other) <= 0 {
            return Ok(false);
        }
    }
    Ok(true)
}
