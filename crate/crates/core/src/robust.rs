//! Matchings that stay popular (or dominant) across a family of instances.

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{AgentId, Edge, FamilyRelation, Instance, InstanceFamily, Matching};
use crate::solve::{
    dominant_matching, gale_shapley, max_weight_popular_with, EdgeSolver, ExhaustiveEdgeSolver,
    SolveError, WeightFunction,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RobustError {
    #[error("the instances do not share one graph")]
    NotSameGraph,
    #[error("more than one agent changes its preferences: {0:?}")]
    MultipleDifferingAgents(Vec<String>),
    #[error("edge {edge} is not incident to {agent}")]
    EdgeNotIncident { edge: String, agent: String },
    #[error("the first instance is not complete")]
    FirstNotComplete,
    #[error("the instances differ by more than edge availability")]
    NotAlteredAvailability,
    #[error("no strategy applies to this family")]
    Unsupported,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RobustMode {
    Popular,
    Dominant,
}

/// The first instance with one agent's list replaced: everything that agent
/// ranks above `y` in any member comes first, then `y`, then the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridInstance {
    pub instance: Instance,
    pub agent: AgentId,
    pub edge: Edge,
    /// The synthesized list of `agent`.
    pub order: Vec<usize>,
}

fn differing_agent(family: &InstanceFamily) -> Result<Option<AgentId>, RobustError> {
    if family.relation() != FamilyRelation::SameGraph {
        return Err(RobustError::NotSameGraph);
    }
    let diff = family.differing_agents();
    match diff.as_slice() {
        [] => Ok(None),
        [x] => Ok(Some(*x)),
        _ => Err(RobustError::MultipleDifferingAgents(
            diff.iter().map(|&a| family.first().label(a).to_string()).collect(),
        )),
    }
}

pub fn hybrid_instance(
    family: &InstanceFamily,
    agent: AgentId,
    e: Edge,
) -> Result<HybridInstance, RobustError> {
    let first = family.first();
    if let Some(x) = differing_agent(family)? {
        if x != agent {
            return Err(RobustError::MultipleDifferingAgents(vec![
                first.label(x).to_string(),
                first.label(agent).to_string(),
            ]));
        }
    }
    let y = match e.other(agent) {
        Some(y) if first.has_edge(e) => y.index,
        _ => {
            return Err(RobustError::EdgeNotIncident {
                edge: format!("({}, {})", e.worker, e.firm),
                agent: first.label(agent).to_string(),
            })
        }
    };
    let mut order = Vec::with_capacity(first.degree(agent));
    for inst in family.instances() {
        for &z in inst.prefs(agent).iter().take_while(|&&z| z != y) {
            if !order.contains(&z) {
                order.push(z);
            }
        }
    }
    order.push(y);
    for &z in first.prefs(agent) {
        if !order.contains(&z) {
            order.push(z);
        }
    }
    let instance = first.with_reordered(agent, order.clone()).map_err(|_| RobustError::NotSameGraph)?;
    Ok(HybridInstance { instance, agent, edge: e, order })
}

/// A matching popular (or dominant) in every member of a family whose
/// members differ in at most one agent's list, or `None` if none exists.
///
/// Follows the single-agent algorithm: the stable (or dominant) matching of
/// the first instance is returned if it leaves the agent unmatched;
/// otherwise each incident edge, in the agent's first-instance order, is
/// tried on its hybrid instance.
pub fn robust_matching(family: &InstanceFamily, mode: RobustMode) -> Result<Option<Matching>, RobustError> {
    robust_matching_with(family, mode, &ExhaustiveEdgeSolver::default())
}

pub fn robust_matching_with<S: EdgeSolver>(
    family: &InstanceFamily,
    mode: RobustMode,
    solver: &S,
) -> Result<Option<Matching>, RobustError> {
    let x = differing_agent(family)?;
    let first = family.first();
    let m = match mode {
        RobustMode::Popular => gale_shapley(first),
        RobustMode::Dominant => dominant_matching(first),
    };
    let x = match x {
        Some(x) if m.is_matched(x) => x,
        _ => return Ok(Some(m)),
    };
    let edges: Vec<Edge> = first
        .neighbors(x)
        .map(|y| Edge::between(x, y).expect("opposite sides"))
        .collect();
    let found = edges
        .par_iter()
        .map(|&e| -> Result<Option<Matching>, RobustError> {
            let h = hybrid_instance(family, x, e)?;
            Ok(match mode {
                RobustMode::Popular => solver.popular_edge(&h.instance, e)?,
                RobustMode::Dominant => solver.dominant_edge(&h.instance, e)?,
            })
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    found.unwrap_or(Ok(None))
}

/// Agents matched by no popular matching of `i`.
pub fn unpopular_agents(i: &Instance) -> Result<Vec<AgentId>, RobustError> {
    unpopular_agents_with(i, &ExhaustiveEdgeSolver::default())
}

pub fn unpopular_agents_with<S: EdgeSolver>(i: &Instance, solver: &S) -> Result<Vec<AgentId>, RobustError> {
    let mut popular_w = vec![false; i.num_workers()];
    let mut popular_f = vec![false; i.num_firms()];
    for e in i.edges() {
        if popular_w[e.worker] && popular_f[e.firm] {
            continue;
        }
        if let Some(m) = solver.popular_edge(i, e)? {
            for g in m.edges() {
                popular_w[g.worker] = true;
                popular_f[g.firm] = true;
            }
        }
    }
    Ok(i
        .agents()
        .filter(|a| match a.is_worker() {
            true => !popular_w[a.index],
            false => !popular_f[a.index],
        })
        .collect())
}

/// Outcome of [`robust_via_unpopular`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FastPath {
    /// Every changed agent is unpopular in the first instance, so any of its
    /// popular matchings is robust.
    Robust(Matching),
    /// The shortcut does not decide the family; this says nothing about
    /// existence.
    Inapplicable(String),
}

impl FastPath {
    pub fn matching(&self) -> Option<&Matching> {
        match self {
            FastPath::Robust(m) => Some(m),
            FastPath::Inapplicable(_) => None,
        }
    }
}

pub fn robust_via_unpopular(family: &InstanceFamily) -> Result<FastPath, RobustError> {
    robust_via_unpopular_with(family, &ExhaustiveEdgeSolver::default())
}

pub fn robust_via_unpopular_with<S: EdgeSolver>(
    family: &InstanceFamily,
    solver: &S,
) -> Result<FastPath, RobustError> {
    if family.relation() != FamilyRelation::SameGraph {
        return Ok(FastPath::Inapplicable("the instances do not share one graph".into()));
    }
    let first = family.first();
    let changed = family.differing_agents();
    if !changed.is_empty() {
        let unpopular = unpopular_agents_with(first, solver)?;
        let popular: Vec<&str> = changed
            .iter()
            .filter(|a| !unpopular.contains(a))
            .map(|&a| first.label(a))
            .collect();
        if !popular.is_empty() {
            return Ok(FastPath::Inapplicable(format!(
                "changed agents matched by some popular matching: {}",
                popular.join(", ")
            )));
        }
    }
    Ok(FastPath::Robust(gale_shapley(first)))
}

/// Robust popular matching for a family whose first member is complete and
/// whose members differ only in which edges are available.
///
/// Edges present in every member weigh 0 and all others −1; a robust
/// matching exists iff a maximum-weight popular matching of the first
/// instance has weight 0.
pub fn robust_reduced_availability(family: &InstanceFamily) -> Result<Option<Matching>, RobustError> {
    robust_reduced_availability_with(family, &ExhaustiveEdgeSolver::default())
}

pub fn robust_reduced_availability_with(
    family: &InstanceFamily,
    solver: &ExhaustiveEdgeSolver,
) -> Result<Option<Matching>, RobustError> {
    let first = family.first();
    if !first.is_complete() {
        return Err(RobustError::FirstNotComplete);
    }
    let ok = match family.relation() {
        FamilyRelation::AlteredAvailability => true,
        FamilyRelation::SameGraph => family.differing_agents().is_empty(),
        FamilyRelation::Unchecked => false,
    };
    if !ok {
        return Err(RobustError::NotAlteredAvailability);
    }
    let common = family.common_edges();
    let w = WeightFunction::from_fn(first, |e| {
        if common.binary_search(&e).is_ok() {
            Zero::zero()
        } else {
            -num_rational::BigRational::from_integer(1.into())
        }
    });
    let (m, weight) = max_weight_popular_with(first, &w, solver)?;
    Ok(weight.is_zero().then_some(m))
}

/// Which method [`robust`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Pick from the family's shape.
    #[default]
    Auto,
    Hybrid,
    Unpopular,
    Reduced,
}

/// Dispatches to a method that decides the family.
///
/// `Auto` uses the hybrid algorithm when at most one agent's list changes
/// over a shared graph, the availability method when the first member is
/// complete and only availability changes, and the unpopular-agent shortcut
/// otherwise (popular mode only). If the shortcut is inapplicable the family
/// is outside every supported class and an error is returned.
pub fn robust(family: &InstanceFamily, mode: RobustMode, strategy: Strategy) -> Result<Option<Matching>, RobustError> {
    match strategy {
        Strategy::Hybrid => robust_matching(family, mode),
        Strategy::Reduced => {
            if mode == RobustMode::Dominant {
                return Err(RobustError::Unsupported);
            }
            robust_reduced_availability(family)
        }
        Strategy::Unpopular => {
            if mode == RobustMode::Dominant {
                return Err(RobustError::Unsupported);
            }
            match robust_via_unpopular(family)? {
                FastPath::Robust(m) => Ok(Some(m)),
                FastPath::Inapplicable(_) => Err(RobustError::Unsupported),
            }
        }
        Strategy::Auto => {
            let relation = family.relation();
            if relation == FamilyRelation::SameGraph && family.differing_agents().len() <= 1 {
                return robust_matching(family, mode);
            }
            if mode == RobustMode::Popular
                && relation == FamilyRelation::AlteredAvailability
                && family.first().is_complete()
            {
                return robust_reduced_availability(family);
            }
            if mode == RobustMode::Popular && relation == FamilyRelation::SameGraph {
                if let FastPath::Robust(m) = robust_via_unpopular(family)? {
                    return Ok(Some(m));
                }
            }
            Err(RobustError::Unsupported)
        }
    }
}
