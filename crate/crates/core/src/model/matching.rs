use thiserror::Error;

use super::{AgentId, Edge, Instance, Side};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("{0} is already matched")]
    AgentTaken(AgentId),
    #[error("pair ({0}, {1}) is outside the instance")]
    OutOfRange(usize, usize),
    #[error("pair {0} is not an edge of the instance")]
    NotAnEdge(String),
}

/// A set of disjoint worker–firm pairs over fixed side sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    worker_mate: Vec<Option<usize>>,
    firm_mate: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(num_workers: usize, num_firms: usize) -> Self {
        Matching {
            worker_mate: vec![None; num_workers],
            firm_mate: vec![None; num_firms],
        }
    }

    pub fn empty_for(instance: &Instance) -> Self {
        Self::empty(instance.num_workers(), instance.num_firms())
    }

    pub fn from_edges<I>(num_workers: usize, num_firms: usize, edges: I) -> Result<Self, MatchingError>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut m = Self::empty(num_workers, num_firms);
        for e in edges {
            m.insert(e)?;
        }
        Ok(m)
    }

    /// Builds a matching and checks every pair against `instance`.
    pub fn from_edges_in<I>(instance: &Instance, edges: I) -> Result<Self, MatchingError>
    where
        I: IntoIterator<Item = Edge>,
    {
        let m = Self::from_edges(instance.num_workers(), instance.num_firms(), edges)?;
        m.validate(instance)?;
        Ok(m)
    }

    pub fn num_workers(&self) -> usize {
        self.worker_mate.len()
    }

    pub fn num_firms(&self) -> usize {
        self.firm_mate.len()
    }

    /// Adds a pair; rejects it if either endpoint is already matched.
    pub fn insert(&mut self, e: Edge) -> Result<(), MatchingError> {
        if e.worker >= self.worker_mate.len() || e.firm >= self.firm_mate.len() {
            return Err(MatchingError::OutOfRange(e.worker, e.firm));
        }
        if self.worker_mate[e.worker].is_some() {
            return Err(MatchingError::AgentTaken(e.worker_id()));
        }
        if self.firm_mate[e.firm].is_some() {
            return Err(MatchingError::AgentTaken(e.firm_id()));
        }
        self.worker_mate[e.worker] = Some(e.firm);
        self.firm_mate[e.firm] = Some(e.worker);
        Ok(())
    }

    /// Removes a pair if present. Returns whether it was present.
    pub fn remove(&mut self, e: Edge) -> bool {
        if self.contains(e) {
            self.worker_mate[e.worker] = None;
            self.firm_mate[e.firm] = None;
            true
        } else {
            false
        }
    }

    /// Unmatches `agent` and its partner, if any.
    pub fn unmatch(&mut self, agent: AgentId) {
        if let Some(p) = self.partner(agent) {
            let e = Edge::between(agent, p).expect("partners are on opposite sides");
            self.remove(e);
        }
    }

    #[inline]
    pub fn worker_mate(&self, w: usize) -> Option<usize> {
        self.worker_mate[w]
    }

    #[inline]
    pub fn firm_mate(&self, f: usize) -> Option<usize> {
        self.firm_mate[f]
    }

    /// Partner index (on the opposite side) of `agent`.
    #[inline]
    pub fn mate(&self, agent: AgentId) -> Option<usize> {
        match agent.side {
            Side::Worker => self.worker_mate[agent.index],
            Side::Firm => self.firm_mate[agent.index],
        }
    }

    pub fn partner(&self, agent: AgentId) -> Option<AgentId> {
        let side = agent.side.opposite();
        self.mate(agent).map(|index| AgentId { side, index })
    }

    pub fn is_matched(&self, agent: AgentId) -> bool {
        self.mate(agent).is_some()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.worker_mate.get(e.worker).copied().flatten() == Some(e.firm)
    }

    /// Pairs ordered by worker index.
    pub fn edges(&self) -> Vec<Edge> {
        self.worker_mate
            .iter()
            .enumerate()
            .filter_map(|(w, f)| f.map(|f| Edge::new(w, f)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.worker_mate.iter().filter(|m| m.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Matched agents, workers first.
    pub fn covered(&self) -> Vec<AgentId> {
        let ws = (0..self.num_workers())
            .filter(|&w| self.worker_mate[w].is_some())
            .map(AgentId::worker);
        let fs = (0..self.num_firms())
            .filter(|&f| self.firm_mate[f].is_some())
            .map(AgentId::firm);
        ws.chain(fs).collect()
    }

    pub fn validate(&self, instance: &Instance) -> Result<(), MatchingError> {
        if self.num_workers() != instance.num_workers() || self.num_firms() != instance.num_firms() {
            return Err(MatchingError::OutOfRange(self.num_workers(), self.num_firms()));
        }
        for e in self.edges() {
            if !instance.has_edge(e) {
                return Err(MatchingError::NotAnEdge(instance.edge_label(e)));
            }
        }
        Ok(())
    }

    pub fn is_valid_for(&self, instance: &Instance) -> bool {
        self.validate(instance).is_ok()
    }

    /// Symmetric difference as an edge list, ordered by worker then firm.
    pub fn symmetric_difference(&self, other: &Matching) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .edges()
            .into_iter()
            .filter(|&e| !other.contains(e))
            .chain(other.edges().into_iter().filter(|&e| !self.contains(e)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Restricts to the first `num_workers`/`num_firms` agents of each side,
    /// dropping pairs that touch the rest.
    pub fn truncated(&self, num_workers: usize, num_firms: usize) -> Matching {
        let mut m = Matching::empty(num_workers, num_firms);
        for e in self.edges() {
            if e.worker < num_workers && e.firm < num_firms {
                m.insert(e).expect("subset of a matching is a matching");
            }
        }
        m
    }

    /// Human-readable form `{w1 f2, w3 f1}` using instance labels.
    pub fn display<'a>(&'a self, instance: &'a Instance) -> impl std::fmt::Display + 'a {
        DisplayMatching { m: self, instance }
    }
}

struct DisplayMatching<'a> {
    m: &'a Matching,
    instance: &'a Instance,
}

impl std::fmt::Display for DisplayMatching<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (k, e) in self.m.edges().into_iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(
                f,
                "{} {}",
                self.instance.label(e.worker_id()),
                self.instance.label(e.firm_id())
            )?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_rejects_shared_agent() {
        let mut m = Matching::empty(2, 2);
        m.insert(Edge::new(0, 1)).unwrap();
        assert_eq!(m.insert(Edge::new(0, 0)), Err(MatchingError::AgentTaken(AgentId::worker(0))));
        assert_eq!(m.insert(Edge::new(1, 1)), Err(MatchingError::AgentTaken(AgentId::firm(1))));
        m.insert(Edge::new(1, 0)).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.partner(AgentId::firm(0)), Some(AgentId::worker(1)));
    }

    #[test]
    fn remove_and_symmetric_difference() {
        let a = Matching::from_edges(2, 2, [Edge::new(0, 0), Edge::new(1, 1)]).unwrap();
        let b = Matching::from_edges(2, 2, [Edge::new(0, 1)]).unwrap();
        assert_eq!(
            a.symmetric_difference(&b),
            vec![Edge::new(0, 0), Edge::new(0, 1), Edge::new(1, 1)]
        );
        let mut c = a.clone();
        assert!(c.remove(Edge::new(0, 0)));
        assert!(!c.remove(Edge::new(0, 0)));
        assert_eq!(c.covered(), vec![AgentId::worker(1), AgentId::firm(1)]);
    }

    #[test]
    fn validate_checks_edges() {
        let i = Instance::builder()
            .workers(["w1"])
            .firms(["f1", "f2"])
            .prefs("w1", ["f1"])
            .prefs("f1", ["w1"])
            .build()
            .unwrap();
        assert!(Matching::from_edges_in(&i, [Edge::new(0, 0)]).is_ok());
        assert!(matches!(
            Matching::from_edges_in(&i, [Edge::new(0, 1)]),
            Err(MatchingError::NotAnEdge(_))
        ));
    }
}
