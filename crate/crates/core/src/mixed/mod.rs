//! Fractional (mixed) popular matchings of complete instances.
//!
//! The popularity polytope of a complete instance is the perfect matching
//! polytope cut by `Δ(μ, χ_M) >= 0` for every matching `M`. Constraints are
//! enumerated, so instances are limited to [`DEFAULT_MIXED_BOUND`] agents per
//! side by default.

mod simplex;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{AgentId, Edge, Instance, InstanceFamily, Matching};
use crate::oracle::{self, OracleError};

pub use simplex::feasible_point;

pub const DEFAULT_MIXED_BOUND: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MixedError {
    #[error("instance {0} is not complete")]
    NotComplete(String),
    #[error("a complete instance with {workers} workers and {firms} firms has no perfect matching")]
    Unbalanced { workers: usize, firms: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Nonnegative rational weights on edges. Absent edges have weight 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FractionalMatching {
    weights: BTreeMap<Edge, BigRational>,
}

impl FractionalMatching {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_matching(m: &Matching) -> Self {
        let mut mu = Self::new();
        for e in m.edges() {
            mu.set(e, BigRational::one());
        }
        mu
    }

    pub fn set(&mut self, e: Edge, value: BigRational) {
        if value.is_zero() {
            self.weights.remove(&e);
        } else {
            self.weights.insert(e, value);
        }
    }

    pub fn weight(&self, e: Edge) -> BigRational {
        self.weights.get(&e).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Edges with nonzero weight, in edge order.
    pub fn entries(&self) -> impl Iterator<Item = (Edge, &BigRational)> {
        self.weights.iter().map(|(&e, q)| (e, q))
    }

    /// The matching this point is the incidence vector of, if any.
    pub fn as_matching(&self, i: &Instance) -> Option<Matching> {
        if self.weights.values().any(|q| !q.is_one()) {
            return None;
        }
        Matching::from_edges_in(i, self.weights.keys().copied()).ok()
    }

    /// Total weight at `x`.
    pub fn load(&self, x: AgentId) -> BigRational {
        self.entries()
            .filter(|(e, _)| e.contains(x))
            .map(|(_, q)| q.clone())
            .sum()
    }

    /// Nonnegative, supported on edges of `i`, and weight 1 at every agent.
    pub fn is_perfect_in(&self, i: &Instance) -> bool {
        self.entries().all(|(e, q)| !q.is_negative() && i.has_edge(e))
            && i.agents().all(|x| self.load(x).is_one())
    }

    /// One `w f p/q` line per edge with nonzero weight.
    pub fn display(&self, i: &Instance) -> String {
        self.entries()
            .map(|(e, q)| format!("{} {} {}\n", i.label(e.worker_id()), i.label(e.firm_id()), q))
            .collect()
    }
}

/// Expected margin of `mu` against `m`: every agent votes with the mass on
/// partners it prefers to its partner in `m`, minus the mass on partners it
/// likes less. Mass not placed on any edge counts as being unmatched.
pub fn fractional_margin(i: &Instance, mu: &FractionalMatching, m: &Matching) -> BigRational {
    let mut total = BigRational::zero();
    for x in i.agents() {
        let current = m.mate(x);
        let mut placed = BigRational::zero();
        for (e, q) in mu.entries().filter(|(e, _)| e.contains(x)) {
            let y = e.other(x).expect("incident").index;
            placed += q;
            total += q * BigRational::from_integer(i.compare(x, Some(y), current).into());
        }
        let rest = BigRational::one() - placed;
        if !rest.is_zero() {
            total += rest * BigRational::from_integer(i.compare(x, None, current).into());
        }
    }
    total
}

fn check(family: &InstanceFamily) -> Result<(), MixedError> {
    for (i, name) in family.instances().iter().zip(family.names()) {
        if !i.is_complete() {
            return Err(MixedError::NotComplete(name.clone()));
        }
        if i.num_workers() != i.num_firms() {
            return Err(MixedError::Unbalanced { workers: i.num_workers(), firms: i.num_firms() });
        }
    }
    Ok(())
}

fn all_matchings(family: &InstanceFamily, bound: usize) -> Result<Vec<Vec<Matching>>, MixedError> {
    family
        .instances()
        .iter()
        .map(|i| Ok(oracle::matchings(i, bound)?.collect()))
        .collect()
}

/// Whether `mu` lies in the popularity polytope of every member.
pub fn point_in_joint_polytope(family: &InstanceFamily, mu: &FractionalMatching) -> Result<bool, MixedError> {
    point_in_joint_polytope_with(family, mu, DEFAULT_MIXED_BOUND)
}

pub fn point_in_joint_polytope_with(
    family: &InstanceFamily,
    mu: &FractionalMatching,
    bound: usize,
) -> Result<bool, MixedError> {
    check(family)?;
    if !family.instances().iter().all(|i| mu.is_perfect_in(i)) {
        return Ok(false);
    }
    let all = all_matchings(family, bound)?;
    Ok(family
        .instances()
        .iter()
        .zip(&all)
        .all(|(i, ms)| ms.par_iter().all(|m| !fractional_margin(i, mu, m).is_negative())))
}

fn coefficients(i: &Instance, edges: &[Edge], m: &Matching) -> Vec<BigRational> {
    edges
        .iter()
        .map(|e| {
            let (w, f) = (e.worker_id(), e.firm_id());
            let c = i.compare(w, Some(e.firm), m.mate(w)) + i.compare(f, Some(e.worker), m.mate(f));
            BigRational::from_integer(c.into())
        })
        .collect()
}

/// A point in the intersection of the members' popularity polytopes, or
/// `None` if the intersection is empty. All members must be complete.
pub fn joint_polytope_feasible(family: &InstanceFamily) -> Result<Option<FractionalMatching>, MixedError> {
    joint_polytope_feasible_with(family, DEFAULT_MIXED_BOUND)
}

pub fn joint_polytope_feasible_with(
    family: &InstanceFamily,
    bound: usize,
) -> Result<Option<FractionalMatching>, MixedError> {
    check(family)?;
    let all = all_matchings(family, bound)?;
    let first = family.first();
    let edges = first.edges();
    let mut eq_rows = Vec::new();
    for x in first.agents() {
        eq_rows.push(
            edges
                .iter()
                .map(|e| if e.contains(x) { BigRational::one() } else { BigRational::zero() })
                .collect::<Vec<_>>(),
        );
    }
    let eq_rhs = vec![BigRational::one(); eq_rows.len()];
    let mut cuts: Vec<Vec<BigRational>> = Vec::new();
    // Lazily add the most violated margin constraint until none is violated.
    loop {
        let zeros = vec![BigRational::zero(); cuts.len()];
        let Some(x) = feasible_point(edges.len(), &eq_rows, &eq_rhs, &cuts, &zeros) else {
            return Ok(None);
        };
        let mut mu = FractionalMatching::new();
        for (&e, q) in edges.iter().zip(x) {
            mu.set(e, q);
        }
        let mut worst: Option<(BigRational, usize, usize)> = None;
        for (k, (i, ms)) in family.instances().iter().zip(&all).enumerate() {
            let margins: Vec<BigRational> = ms.par_iter().map(|m| fractional_margin(i, &mu, m)).collect();
            for (idx, d) in margins.into_iter().enumerate() {
                if d.is_negative() && worst.as_ref().is_none_or(|(w, _, _)| d < *w) {
                    worst = Some((d, k, idx));
                }
            }
        }
        match worst {
            None => return Ok(Some(mu)),
            Some((_, k, idx)) => cuts.push(coefficients(&family.instances()[k], &edges, &all[k][idx])),
        }
    }
}

/// A matching whose incidence vector lies in every member's polytope, that
/// is, a matching popular in every member. `None` if there is none.
pub fn integral_point_exists(family: &InstanceFamily) -> Result<Option<Matching>, MixedError> {
    integral_point_exists_with(family, DEFAULT_MIXED_BOUND)
}

pub fn integral_point_exists_with(family: &InstanceFamily, bound: usize) -> Result<Option<Matching>, MixedError> {
    check(family)?;
    let all = all_matchings(family, bound)?;
    let first = family.first();
    let n = first.num_workers();
    let perfect: Vec<&Matching> = all[0].iter().filter(|m| m.len() == n).collect();
    Ok(perfect
        .into_iter()
        .find(|m| {
            let mu = FractionalMatching::from_matching(m);
            family
                .instances()
                .iter()
                .zip(&all)
                .all(|(i, ms)| ms.par_iter().all(|other| !fractional_margin(i, &mu, other).is_negative()))
        })
        .cloned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_instance, seeded};
    use crate::verify::{is_popular, popularity_margin};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn integral_margin_matches_popularity_margin() {
        let mut rng = seeded(5);
        for _ in 0..20 {
            let i = random_instance(&mut rng, 3, 3, 0.7);
            let ms: Vec<Matching> = oracle::matchings(&i, 8).unwrap().collect();
            for a in ms.iter().take(12) {
                for b in ms.iter().take(12) {
                    let got = fractional_margin(&i, &FractionalMatching::from_matching(a), b);
                    assert_eq!(got, BigRational::from_integer(popularity_margin(&i, a, b).into()));
                }
            }
        }
    }

    #[test]
    fn one_by_one() {
        let i = random_instance(&mut seeded(1), 1, 1, 1.0);
        let fam = InstanceFamily::new(vec![i.clone(), i.clone()]).unwrap();
        let mu = joint_polytope_feasible(&fam).unwrap().unwrap();
        assert_eq!(mu.weight(Edge::new(0, 0)), q(1, 1));
        assert_eq!(mu.as_matching(&i).unwrap().len(), 1);
    }

    #[test]
    fn single_complete_instance_has_integral_points() {
        let mut rng = seeded(9);
        for _ in 0..10 {
            let i = random_instance(&mut rng, 3, 3, 1.0);
            let fam = InstanceFamily::new(vec![i.clone()]).unwrap();
            let mu = joint_polytope_feasible(&fam).unwrap().unwrap();
            assert!(point_in_joint_polytope(&fam, &mu).unwrap());
            let m = integral_point_exists(&fam).unwrap().unwrap();
            assert!(is_popular(&i, &m));
            assert!(point_in_joint_polytope(&fam, &FractionalMatching::from_matching(&m)).unwrap());
        }
    }

    #[test]
    fn preconditions() {
        let i = random_instance(&mut seeded(2), 2, 3, 1.0);
        let fam = InstanceFamily::new(vec![i]).unwrap();
        assert!(matches!(joint_polytope_feasible(&fam), Err(MixedError::Unbalanced { .. })));
        let j = random_instance(&mut seeded(2), 3, 3, 0.3);
        if !j.is_complete() {
            let fam = InstanceFamily::new(vec![j]).unwrap();
            assert!(matches!(integral_point_exists(&fam), Err(MixedError::NotComplete(_))));
        }
    }
}
