use std::collections::BTreeSet;

use thiserror::Error;

use super::{AgentId, Edge, Instance, InstanceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("a family needs at least one instance")]
    Empty,
    #[error("instance {index} has a different set of agent labels than the first instance")]
    LabelMismatch { index: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// How the later instances of a family relate to the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyRelation {
    /// All edge sets are identical; only orders may differ.
    SameGraph,
    /// Edge sets differ, but any two instances order common neighbors alike.
    AlteredAvailability,
    Unchecked,
}

/// An ordered list of instances over one set of agent labels.
///
/// Later instances are re-indexed to the first instance's label order, so an
/// `AgentId` or `Edge` means the same agents in every member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFamily {
    instances: Vec<Instance>,
    names: Vec<String>,
    relation: FamilyRelation,
}

impl InstanceFamily {
    pub fn new(instances: Vec<Instance>) -> Result<Self, FamilyError> {
        let names = (0..instances.len()).map(|k| format!("I{}", k + 1)).collect();
        Self::with_names(instances, names)
    }

    pub fn with_names(instances: Vec<Instance>, names: Vec<String>) -> Result<Self, FamilyError> {
        let first = instances.first().ok_or(FamilyError::Empty)?;
        let (ws, fs) = (first.worker_labels().to_vec(), first.firm_labels().to_vec());
        let ws_set: BTreeSet<&String> = ws.iter().collect();
        let fs_set: BTreeSet<&String> = fs.iter().collect();
        let mut aligned = Vec::with_capacity(instances.len());
        for (index, inst) in instances.iter().enumerate() {
            if inst.worker_labels() == ws.as_slice() && inst.firm_labels() == fs.as_slice() {
                aligned.push(inst.clone());
                continue;
            }
            let same = inst.worker_labels().iter().collect::<BTreeSet<_>>() == ws_set
                && inst.firm_labels().iter().collect::<BTreeSet<_>>() == fs_set;
            if !same {
                return Err(FamilyError::LabelMismatch { index });
            }
            aligned.push(inst.reindexed(&ws, &fs)?);
        }
        let relation = classify(&aligned);
        Ok(InstanceFamily { instances: aligned, names, relation })
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn first(&self) -> &Instance {
        &self.instances[0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn relation(&self) -> FamilyRelation {
        self.relation
    }

    /// Agents whose order differs from the first instance in some member.
    pub fn differing_agents(&self) -> Vec<AgentId> {
        let first = self.first();
        first
            .agents()
            .filter(|&a| self.instances[1..].iter().any(|i| i.prefs(a) != first.prefs(a)))
            .collect()
    }

    /// Edges present in every member, ordered by (worker, firm).
    pub fn common_edges(&self) -> Vec<Edge> {
        self.first()
            .edges()
            .into_iter()
            .filter(|&e| self.instances.iter().all(|i| i.has_edge(e)))
            .collect()
    }
}

fn classify(instances: &[Instance]) -> FamilyRelation {
    let first = &instances[0];
    let edges = first.edges();
    if instances[1..].iter().all(|i| i.edges() == edges) {
        return FamilyRelation::SameGraph;
    }
    for (k, a) in instances.iter().enumerate() {
        for b in &instances[k + 1..] {
            if !restrictions_agree(a, b) {
                return FamilyRelation::Unchecked;
            }
        }
    }
    FamilyRelation::AlteredAvailability
}

/// Common neighbors in `a`'s order, filtered to those also listed in `b`.
fn common_order(a: &Instance, b: &Instance, agent: AgentId) -> Vec<usize> {
    a.prefs(agent)
        .iter()
        .copied()
        .filter(|&p| b.rank(agent, p).is_some())
        .collect()
}

fn restrictions_agree(a: &Instance, b: &Instance) -> bool {
    a.agents()
        .all(|x| common_order(a, b, x) == common_order(b, a, x))
}

/// Number of discordant pairs between two orders of the same elements.
fn kendall_distance(x: &[usize], y: &[usize]) -> usize {
    let pos: std::collections::HashMap<usize, usize> =
        y.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mapped: Vec<usize> = x.iter().map(|v| pos[v]).collect();
    let mut count = 0;
    for i in 0..mapped.len() {
        for j in i + 1..mapped.len() {
            if mapped[i] > mapped[j] {
                count += 1;
            }
        }
    }
    count
}

/// How a second instance differs from a first one over the same agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationReport {
    /// Agents whose lists differ, in `AgentId` order of the first instance.
    pub changed: Vec<AgentId>,
    /// Discordant pairs on common neighbors, one entry per changed agent.
    pub swap_distance: Vec<(AgentId, usize)>,
    /// Edges of the second instance missing from the first.
    pub added_edges: Vec<Edge>,
    /// Edges of the first instance missing from the second.
    pub removed_edges: Vec<Edge>,
    pub single_agent: bool,
    pub swaps_only: bool,
    pub reduced_availability: bool,
    pub a_complete: bool,
    pub same_graph: bool,
}

pub fn diff_instances(a: &Instance, b: &Instance) -> Result<PerturbationReport, FamilyError> {
    let fam = InstanceFamily::new(vec![a.clone(), b.clone()])?;
    let (a, b) = (&fam.instances[0], &fam.instances[1]);
    let changed: Vec<AgentId> = a.agents().filter(|&x| a.prefs(x) != b.prefs(x)).collect();
    let swap_distance: Vec<(AgentId, usize)> = changed
        .iter()
        .map(|&x| (x, kendall_distance(&common_order(a, b, x), &common_order(b, a, x))))
        .collect();
    let ea: BTreeSet<Edge> = a.edges().into_iter().collect();
    let eb: BTreeSet<Edge> = b.edges().into_iter().collect();
    let added_edges: Vec<Edge> = eb.difference(&ea).copied().collect();
    let removed_edges: Vec<Edge> = ea.difference(&eb).copied().collect();
    let same_graph = added_edges.is_empty() && removed_edges.is_empty();
    let swaps_only = same_graph && swap_distance.iter().all(|&(_, d)| d == 1);
    let reduced_availability = added_edges.is_empty() && restrictions_agree(a, b);
    Ok(PerturbationReport {
        single_agent: changed.len() <= 1,
        changed,
        swap_distance,
        added_edges,
        removed_edges,
        swaps_only,
        reduced_availability,
        a_complete: a.is_complete(),
        same_graph,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Instance {
        Instance::builder()
            .workers(["w1", "w2"])
            .firms(["f1", "f2"])
            .prefs("w1", ["f1", "f2"])
            .prefs("w2", ["f1", "f2"])
            .prefs("f1", ["w1", "w2"])
            .prefs("f2", ["w1", "w2"])
            .build()
            .unwrap()
    }

    #[test]
    fn identity_diff_is_vacuous() {
        let r = diff_instances(&base(), &base()).unwrap();
        assert!(r.changed.is_empty());
        assert!(r.single_agent && r.swaps_only && r.reduced_availability && r.a_complete && r.same_graph);
    }

    #[test]
    fn swap_is_detected() {
        let b = base().with_reordered(AgentId::worker(1), vec![1, 0]).unwrap();
        let r = diff_instances(&base(), &b).unwrap();
        assert_eq!(r.changed, vec![AgentId::worker(1)]);
        assert_eq!(r.swap_distance, vec![(AgentId::worker(1), 1)]);
        assert!(r.swaps_only && r.single_agent && !r.reduced_availability);
        let fam = InstanceFamily::new(vec![base(), b]).unwrap();
        assert_eq!(fam.relation(), FamilyRelation::SameGraph);
        assert_eq!(fam.differing_agents(), vec![AgentId::worker(1)]);
    }

    #[test]
    fn removal_is_reduced_availability() {
        let b = base().without_edges(&[Edge::new(0, 0)]).unwrap();
        let r = diff_instances(&base(), &b).unwrap();
        assert!(r.reduced_availability && !r.same_graph && !r.swaps_only);
        assert_eq!(r.removed_edges, vec![Edge::new(0, 0)]);
        let fam = InstanceFamily::new(vec![base(), b]).unwrap();
        assert_eq!(fam.relation(), FamilyRelation::AlteredAvailability);
        assert_eq!(fam.common_edges().len(), 3);
    }

    #[test]
    fn label_order_is_aligned() {
        let permuted = base()
            .reindexed(&["w2".into(), "w1".into()], &["f1".into(), "f2".into()])
            .unwrap();
        let fam = InstanceFamily::new(vec![base(), permuted]).unwrap();
        assert_eq!(fam.instances()[1], base());
        let other = Instance::builder().workers(["x"]).build().unwrap();
        assert!(matches!(
            InstanceFamily::new(vec![base(), other]),
            Err(FamilyError::LabelMismatch { index: 1 })
        ));
    }

    #[test]
    fn kendall_counts_inversions() {
        assert_eq!(kendall_distance(&[0, 1, 2], &[0, 1, 2]), 0);
        assert_eq!(kendall_distance(&[0, 1, 2], &[2, 1, 0]), 3);
        assert_eq!(kendall_distance(&[0, 1, 2], &[1, 0, 2]), 1);
    }
}
