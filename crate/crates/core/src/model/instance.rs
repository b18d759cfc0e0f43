use std::collections::HashMap;

use thiserror::Error;

use super::{AgentId, Edge, Side};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("label `{0}` is declared more than once")]
    DuplicateLabel(String),
    #[error("unknown agent label `{0}`")]
    UnknownLabel(String),
    #[error("`{agent}` lists `{entry}` more than once")]
    DuplicateEntry { agent: String, entry: String },
    #[error("`{agent}` lists `{entry}`, which is on the same side")]
    SameSide { agent: String, entry: String },
    #[error("`{from}` lists `{to}` but `{to}` does not list `{from}`")]
    Asymmetric { from: String, to: String },
    #[error("`{agent}`: new order must rank exactly the current neighbors")]
    NeighborSetChanged { agent: String },
    #[error("agent index {0} out of range")]
    IndexOutOfRange(AgentId),
    #[error("{0} is not an edge of the instance")]
    MissingEdge(String),
}

const NO_RANK: u32 = u32::MAX;

/// A two-sided matching market with strict preferences.
///
/// The edge set is implied by the preference lists: `{w, f}` is an edge iff
/// `w` ranks `f` (and then `f` ranks `w`).
#[derive(Debug, Clone)]
pub struct Instance {
    worker_labels: Vec<String>,
    firm_labels: Vec<String>,
    worker_prefs: Vec<Vec<usize>>,
    firm_prefs: Vec<Vec<usize>>,
    // Row-major rank tables, `NO_RANK` for non-neighbors.
    worker_rank: Vec<u32>,
    firm_rank: Vec<u32>,
    by_label: HashMap<String, AgentId>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.worker_labels == other.worker_labels
            && self.firm_labels == other.firm_labels
            && self.worker_prefs == other.worker_prefs
            && self.firm_prefs == other.firm_prefs
    }
}

impl Eq for Instance {}

impl Instance {
    pub fn new(
        worker_labels: Vec<String>,
        firm_labels: Vec<String>,
        worker_prefs: Vec<Vec<usize>>,
        firm_prefs: Vec<Vec<usize>>,
    ) -> Result<Self, InstanceError> {
        let nw = worker_labels.len();
        let nf = firm_labels.len();
        let mut by_label = HashMap::with_capacity(nw + nf);
        for (i, l) in worker_labels.iter().enumerate() {
            if by_label.insert(l.clone(), AgentId::worker(i)).is_some() {
                return Err(InstanceError::DuplicateLabel(l.clone()));
            }
        }
        for (i, l) in firm_labels.iter().enumerate() {
            if by_label.insert(l.clone(), AgentId::firm(i)).is_some() {
                return Err(InstanceError::DuplicateLabel(l.clone()));
            }
        }
        if worker_prefs.len() != nw {
            return Err(InstanceError::IndexOutOfRange(AgentId::worker(worker_prefs.len())));
        }
        if firm_prefs.len() != nf {
            return Err(InstanceError::IndexOutOfRange(AgentId::firm(firm_prefs.len())));
        }

        let mut worker_rank = vec![NO_RANK; nw * nf];
        for (w, list) in worker_prefs.iter().enumerate() {
            for (r, &f) in list.iter().enumerate() {
                if f >= nf {
                    return Err(InstanceError::IndexOutOfRange(AgentId::firm(f)));
                }
                let slot = &mut worker_rank[w * nf + f];
                if *slot != NO_RANK {
                    return Err(InstanceError::DuplicateEntry {
                        agent: worker_labels[w].clone(),
                        entry: firm_labels[f].clone(),
                    });
                }
                *slot = r as u32;
            }
        }
        let mut firm_rank = vec![NO_RANK; nf * nw];
        for (f, list) in firm_prefs.iter().enumerate() {
            for (r, &w) in list.iter().enumerate() {
                if w >= nw {
                    return Err(InstanceError::IndexOutOfRange(AgentId::worker(w)));
                }
                let slot = &mut firm_rank[f * nw + w];
                if *slot != NO_RANK {
                    return Err(InstanceError::DuplicateEntry {
                        agent: firm_labels[f].clone(),
                        entry: worker_labels[w].clone(),
                    });
                }
                *slot = r as u32;
            }
        }
        for w in 0..nw {
            for f in 0..nf {
                let wr = worker_rank[w * nf + f] != NO_RANK;
                let fr = firm_rank[f * nw + w] != NO_RANK;
                if wr && !fr {
                    return Err(InstanceError::Asymmetric {
                        from: worker_labels[w].clone(),
                        to: firm_labels[f].clone(),
                    });
                }
                if fr && !wr {
                    return Err(InstanceError::Asymmetric {
                        from: firm_labels[f].clone(),
                        to: worker_labels[w].clone(),
                    });
                }
            }
        }

        Ok(Instance {
            worker_labels,
            firm_labels,
            worker_prefs,
            firm_prefs,
            worker_rank,
            firm_rank,
            by_label,
        })
    }

    pub fn builder() -> InstanceBuilder {
        InstanceBuilder::default()
    }

    pub fn num_workers(&self) -> usize {
        self.worker_labels.len()
    }

    pub fn num_firms(&self) -> usize {
        self.firm_labels.len()
    }

    pub fn num_agents(&self) -> usize {
        self.num_workers() + self.num_firms()
    }

    pub fn side_len(&self, side: Side) -> usize {
        match side {
            Side::Worker => self.num_workers(),
            Side::Firm => self.num_firms(),
        }
    }

    pub fn worker_labels(&self) -> &[String] {
        &self.worker_labels
    }

    pub fn firm_labels(&self) -> &[String] {
        &self.firm_labels
    }

    pub fn label(&self, agent: AgentId) -> &str {
        match agent.side {
            Side::Worker => &self.worker_labels[agent.index],
            Side::Firm => &self.firm_labels[agent.index],
        }
    }

    pub fn agent(&self, label: &str) -> Option<AgentId> {
        self.by_label.get(label).copied()
    }

    /// Looks up an edge by its two endpoint labels, in either order.
    pub fn edge_by_labels(&self, x: &str, y: &str) -> Result<Edge, InstanceError> {
        let a = self.agent(x).ok_or_else(|| InstanceError::UnknownLabel(x.to_string()))?;
        let b = self.agent(y).ok_or_else(|| InstanceError::UnknownLabel(y.to_string()))?;
        match Edge::between(a, b) {
            Some(e) if self.has_edge(e) => Ok(e),
            _ => Err(InstanceError::MissingEdge(format!("{{{x}, {y}}}"))),
        }
    }

    pub fn edge_label(&self, e: Edge) -> String {
        format!("{{{}, {}}}", self.worker_labels[e.worker], self.firm_labels[e.firm])
    }

    /// All agents, workers first, each side in index order.
    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.num_workers())
            .map(AgentId::worker)
            .chain((0..self.num_firms()).map(AgentId::firm))
    }

    pub fn worker_prefs(&self, w: usize) -> &[usize] {
        &self.worker_prefs[w]
    }

    pub fn firm_prefs(&self, f: usize) -> &[usize] {
        &self.firm_prefs[f]
    }

    /// Preference list of `agent` as indices into the opposite side.
    pub fn prefs(&self, agent: AgentId) -> &[usize] {
        match agent.side {
            Side::Worker => &self.worker_prefs[agent.index],
            Side::Firm => &self.firm_prefs[agent.index],
        }
    }

    pub fn neighbors(&self, agent: AgentId) -> impl Iterator<Item = AgentId> + '_ {
        let side = agent.side.opposite();
        self.prefs(agent)
            .iter()
            .map(move |&index| AgentId { side, index })
    }

    pub fn degree(&self, agent: AgentId) -> usize {
        self.prefs(agent).len()
    }

    #[inline]
    pub fn worker_rank(&self, w: usize, f: usize) -> Option<usize> {
        let r = self.worker_rank[w * self.num_firms() + f];
        (r != NO_RANK).then_some(r as usize)
    }

    #[inline]
    pub fn firm_rank(&self, f: usize, w: usize) -> Option<usize> {
        let r = self.firm_rank[f * self.num_workers() + w];
        (r != NO_RANK).then_some(r as usize)
    }

    /// Position of `partner` (an index on the opposite side) in `agent`'s list.
    #[inline]
    pub fn rank(&self, agent: AgentId, partner: usize) -> Option<usize> {
        match agent.side {
            Side::Worker => self.worker_rank(agent.index, partner),
            Side::Firm => self.firm_rank(agent.index, partner),
        }
    }

    /// +1 if `agent` strictly prefers partner `a` to partner `b`, −1 for the
    /// reverse, 0 if equal. `None` means unmatched and is worst.
    #[inline]
    pub fn compare(&self, agent: AgentId, a: Option<usize>, b: Option<usize>) -> i32 {
        let key = |p: Option<usize>| match p {
            Some(p) => self.rank(agent, p).unwrap_or(usize::MAX - 1),
            None => usize::MAX,
        };
        let (ka, kb) = (key(a), key(b));
        match ka.cmp(&kb) {
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => -1,
        }
    }

    pub fn prefers(&self, agent: AgentId, a: Option<usize>, b: Option<usize>) -> bool {
        self.compare(agent, a, b) > 0
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        e.worker < self.num_workers()
            && e.firm < self.num_firms()
            && self.worker_rank(e.worker, e.firm).is_some()
    }

    /// Edges ordered by (worker, firm) index.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.num_edges());
        for w in 0..self.num_workers() {
            let mut fs: Vec<usize> = self.worker_prefs[w].clone();
            fs.sort_unstable();
            out.extend(fs.into_iter().map(|f| Edge::new(w, f)));
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.worker_prefs.iter().map(Vec::len).sum()
    }

    /// Every worker–firm pair is an edge.
    pub fn is_complete(&self) -> bool {
        self.num_edges() == self.num_workers() * self.num_firms()
    }

    /// Replaces `agent`'s order by a permutation of its current neighbors.
    pub fn with_reordered(&self, agent: AgentId, order: Vec<usize>) -> Result<Instance, InstanceError> {
        let mut current = self.prefs(agent).to_vec();
        let mut proposed = order.clone();
        current.sort_unstable();
        proposed.sort_unstable();
        if current != proposed {
            return Err(InstanceError::NeighborSetChanged {
                agent: self.label(agent).to_string(),
            });
        }
        let mut worker_prefs = self.worker_prefs.clone();
        let mut firm_prefs = self.firm_prefs.clone();
        match agent.side {
            Side::Worker => worker_prefs[agent.index] = order,
            Side::Firm => firm_prefs[agent.index] = order,
        }
        Instance::new(
            self.worker_labels.clone(),
            self.firm_labels.clone(),
            worker_prefs,
            firm_prefs,
        )
    }

    /// Drops the given edges; the remaining orders are restrictions of the
    /// current ones.
    pub fn without_edges(&self, removed: &[Edge]) -> Result<Instance, InstanceError> {
        for &e in removed {
            if !self.has_edge(e) {
                return Err(InstanceError::MissingEdge(format!("({}, {})", e.worker, e.firm)));
            }
        }
        let worker_prefs = self
            .worker_prefs
            .iter()
            .enumerate()
            .map(|(w, l)| {
                l.iter()
                    .copied()
                    .filter(|&f| !removed.contains(&Edge::new(w, f)))
                    .collect()
            })
            .collect();
        let firm_prefs = self
            .firm_prefs
            .iter()
            .enumerate()
            .map(|(f, l)| {
                l.iter()
                    .copied()
                    .filter(|&w| !removed.contains(&Edge::new(w, f)))
                    .collect()
            })
            .collect();
        Instance::new(
            self.worker_labels.clone(),
            self.firm_labels.clone(),
            worker_prefs,
            firm_prefs,
        )
    }

    /// The same instance with agents re-indexed to follow the given label
    /// orders. Both label lists must be permutations of the current ones.
    pub fn reindexed(&self, workers: &[String], firms: &[String]) -> Result<Instance, InstanceError> {
        let lookup = |label: &String, side: Side| -> Result<usize, InstanceError> {
            match self.agent(label) {
                Some(a) if a.side == side => Ok(a.index),
                _ => Err(InstanceError::UnknownLabel(label.clone())),
            }
        };
        if workers.len() != self.num_workers() || firms.len() != self.num_firms() {
            return Err(InstanceError::UnknownLabel("<label sets differ>".to_string()));
        }
        let old_w: Vec<usize> = workers
            .iter()
            .map(|l| lookup(l, Side::Worker))
            .collect::<Result<_, _>>()?;
        let old_f: Vec<usize> = firms
            .iter()
            .map(|l| lookup(l, Side::Firm))
            .collect::<Result<_, _>>()?;
        let mut new_w = vec![0; old_w.len()];
        for (new, &old) in old_w.iter().enumerate() {
            new_w[old] = new;
        }
        let mut new_f = vec![0; old_f.len()];
        for (new, &old) in old_f.iter().enumerate() {
            new_f[old] = new;
        }
        let worker_prefs = old_w
            .iter()
            .map(|&ow| self.worker_prefs[ow].iter().map(|&f| new_f[f]).collect())
            .collect();
        let firm_prefs = old_f
            .iter()
            .map(|&of| self.firm_prefs[of].iter().map(|&w| new_w[w]).collect())
            .collect();
        Instance::new(workers.to_vec(), firms.to_vec(), worker_prefs, firm_prefs)
    }
}

/// Incremental, label-based construction of an [`Instance`].
#[derive(Debug, Default, Clone)]
pub struct InstanceBuilder {
    workers: Vec<String>,
    firms: Vec<String>,
    prefs: HashMap<String, Vec<String>>,
}

impl InstanceBuilder {
    pub fn worker(&mut self, label: impl Into<String>) -> &mut Self {
        self.workers.push(label.into());
        self
    }

    pub fn firm(&mut self, label: impl Into<String>) -> &mut Self {
        self.firms.push(label.into());
        self
    }

    pub fn workers<I, S>(&mut self, labels: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.workers.extend(labels.into_iter().map(Into::into));
        self
    }

    pub fn firms<I, S>(&mut self, labels: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.firms.extend(labels.into_iter().map(Into::into));
        self
    }

    /// Sets (or replaces) the order of `agent`, most preferred first.
    pub fn prefs<I, S>(&mut self, agent: impl Into<String>, order: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.prefs
            .insert(agent.into(), order.into_iter().map(Into::into).collect());
        self
    }

    pub fn build(&self) -> Result<Instance, InstanceError> {
        let mut index: HashMap<&str, AgentId> = HashMap::new();
        for (i, l) in self.workers.iter().enumerate() {
            if index.insert(l, AgentId::worker(i)).is_some() {
                return Err(InstanceError::DuplicateLabel(l.clone()));
            }
        }
        for (i, l) in self.firms.iter().enumerate() {
            if index.insert(l, AgentId::firm(i)).is_some() {
                return Err(InstanceError::DuplicateLabel(l.clone()));
            }
        }
        let mut worker_prefs = vec![Vec::new(); self.workers.len()];
        let mut firm_prefs = vec![Vec::new(); self.firms.len()];
        // Deterministic error reporting regardless of HashMap order.
        let mut keys: Vec<&String> = self.prefs.keys().collect();
        keys.sort_by_key(|k| index.get(k.as_str()).copied());
        for owner in keys {
            let list = &self.prefs[owner];
            let agent = *index
                .get(owner.as_str())
                .ok_or_else(|| InstanceError::UnknownLabel(owner.clone()))?;
            let mut resolved = Vec::with_capacity(list.len());
            for entry in list {
                let other = *index
                    .get(entry.as_str())
                    .ok_or_else(|| InstanceError::UnknownLabel(entry.clone()))?;
                if other.side == agent.side {
                    return Err(InstanceError::SameSide {
                        agent: owner.clone(),
                        entry: entry.clone(),
                    });
                }
                resolved.push(other.index);
            }
            match agent.side {
                Side::Worker => worker_prefs[agent.index] = resolved,
                Side::Firm => firm_prefs[agent.index] = resolved,
            }
        }
        Instance::new(self.workers.clone(), self.firms.clone(), worker_prefs, firm_prefs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Instance {
        Instance::builder()
            .workers(["w1", "w2"])
            .firms(["f1", "f2"])
            .prefs("w1", ["f2", "f1"])
            .prefs("w2", ["f1"])
            .prefs("f1", ["w1", "w2"])
            .prefs("f2", ["w1"])
            .build()
            .unwrap()
    }

    #[test]
    fn ranks_and_edges() {
        let i = tiny();
        assert_eq!(i.num_edges(), 3);
        assert_eq!(i.worker_rank(0, 1), Some(0));
        assert_eq!(i.firm_rank(1, 1), None);
        assert!(i.has_edge(Edge::new(1, 0)));
        assert!(!i.has_edge(Edge::new(1, 1)));
        assert_eq!(i.edges(), vec![Edge::new(0, 0), Edge::new(0, 1), Edge::new(1, 0)]);
        assert!(!i.is_complete());
    }

    #[test]
    fn compare_treats_unmatched_as_worst() {
        let i = tiny();
        let w1 = AgentId::worker(0);
        assert_eq!(i.compare(w1, Some(1), Some(0)), 1);
        assert_eq!(i.compare(w1, Some(0), Some(1)), -1);
        assert_eq!(i.compare(w1, Some(0), None), 1);
        assert_eq!(i.compare(w1, None, None), 0);
    }

    #[test]
    fn asymmetric_lists_are_rejected() {
        let err = Instance::builder()
            .workers(["w1"])
            .firms(["f1"])
            .prefs("w1", ["f1"])
            .build()
            .unwrap_err();
        assert_eq!(
            err,
            InstanceError::Asymmetric { from: "w1".into(), to: "f1".into() }
        );
    }

    #[test]
    fn duplicates_and_same_side_are_rejected() {
        let dup = Instance::builder()
            .workers(["w1"])
            .firms(["f1"])
            .prefs("w1", ["f1", "f1"])
            .prefs("f1", ["w1"])
            .build();
        assert!(matches!(dup, Err(InstanceError::DuplicateEntry { .. })));
        let same = Instance::builder()
            .workers(["w1", "w2"])
            .prefs("w1", ["w2"])
            .build();
        assert!(matches!(same, Err(InstanceError::SameSide { .. })));
        let label = Instance::builder().workers(["x"]).firms(["x"]).build();
        assert!(matches!(label, Err(InstanceError::DuplicateLabel(_))));
    }

    #[test]
    fn reorder_keeps_neighbor_set() {
        let i = tiny();
        let j = i.with_reordered(AgentId::worker(0), vec![0, 1]).unwrap();
        assert_eq!(j.worker_prefs(0), &[0, 1]);
        assert!(i.with_reordered(AgentId::worker(0), vec![0]).is_err());
    }

    #[test]
    fn reindex_round_trips() {
        let i = tiny();
        let j = i
            .reindexed(&["w2".into(), "w1".into()], &["f2".into(), "f1".into()])
            .unwrap();
        assert_eq!(j.label(AgentId::worker(0)), "w2");
        assert_eq!(j.worker_prefs(1), &[0, 1]);
        let back = j.reindexed(i.worker_labels(), i.firm_labels()).unwrap();
        assert_eq!(back, i);
    }

    #[test]
    fn removing_edges_restricts_orders() {
        let i = tiny();
        let j = i.without_edges(&[Edge::new(0, 0)]).unwrap();
        assert_eq!(j.worker_prefs(0), &[1]);
        assert_eq!(j.firm_prefs(0), &[1]);
        assert!(i.without_edges(&[Edge::new(1, 1)]).is_err());
    }
}
