//! Exhaustive ground truth for small instances.
//!
//! Every matching of the instance is enumerated and classified directly from
//! the definitions of popularity, dominance, strong popularity and stability.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{AgentId, Edge, Instance, InstanceFamily, Matching};
use crate::verify;

/// Default limit on agents per side for enumeration.
pub const DEFAULT_BOUND: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {per_side} agents on one side; enumeration is limited to {bound}")]
    TooLarge { per_side: usize, bound: usize },
}

fn check_bound(i: &Instance, bound: usize) -> Result<(), OracleError> {
    let per_side = i.num_workers().max(i.num_firms());
    if per_side > bound {
        return Err(OracleError::TooLarge { per_side, bound });
    }
    Ok(())
}

/// Streams every matching of `i` exactly once.
///
/// Workers are decided in index order; each tries "unmatched" first, then its
/// free neighbors by ascending firm index. The empty matching comes first.
pub fn matchings(i: &Instance, bound: usize) -> Result<Matchings, OracleError> {
    check_bound(i, bound)?;
    let options = (0..i.num_workers())
        .map(|w| {
            let mut fs = i.worker_prefs(w).to_vec();
            fs.sort_unstable();
            fs
        })
        .collect();
    Ok(Matchings {
        options,
        choice: vec![0; i.num_workers()],
        current: Matching::empty_for(i),
        state: State::Fresh,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Fresh,
    Running,
    Done,
}

#[derive(Debug, Clone)]
pub struct Matchings {
    options: Vec<Vec<usize>>,
    // 0 = unmatched, k = options[w][k - 1]
    choice: Vec<usize>,
    current: Matching,
    state: State,
}

impl Iterator for Matchings {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        match self.state {
            State::Done => return None,
            State::Fresh => {
                self.state = State::Running;
                return Some(self.current.clone());
            }
            State::Running => {}
        }
        let mut w = self.choice.len();
        while w > 0 {
            w -= 1;
            let old = self.choice[w];
            if old > 0 {
                self.current.remove(Edge::new(w, self.options[w][old - 1]));
            }
            let next = (old..self.options[w].len())
                .find(|&k| self.current.firm_mate(self.options[w][k]).is_none());
            match next {
                Some(k) => {
                    self.choice[w] = k + 1;
                    self.current
                        .insert(Edge::new(w, self.options[w][k]))
                        .expect("firm is free");
                    return Some(self.current.clone());
                }
                None => self.choice[w] = 0,
            }
        }
        self.state = State::Done;
        None
    }
}

/// How popularity is decided during classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// From margins against every matching. A structural certificate, when
    /// one exists, is only used to find a beating matching faster; a matching
    /// is never rejected without a matching that beats it.
    #[default]
    Pairwise,
    /// Through the polynomial verifier (popularity and dominance).
    Structural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub bound: usize,
    pub method: Method,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { bound: DEFAULT_BOUND, method: Method::Pairwise }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetKind {
    Popular,
    Dominant,
    Strong,
    Stable,
}

/// All matchings of an instance with the indices of each class.
#[derive(Debug, Clone)]
pub struct Classification {
    pub all: Vec<Matching>,
    pub popular: Vec<usize>,
    pub dominant: Vec<usize>,
    pub strong: Vec<usize>,
    pub stable: Vec<usize>,
}

impl Classification {
    pub fn set(&self, kind: SetKind) -> Vec<Matching> {
        let idx = match kind {
            SetKind::Popular => &self.popular,
            SetKind::Dominant => &self.dominant,
            SetKind::Strong => &self.strong,
            SetKind::Stable => &self.stable,
        };
        idx.iter().map(|&k| self.all[k].clone()).collect()
    }
}

/// Popular by definition: no matching in `all` is preferred to `m`.
pub fn is_popular_by_definition(i: &Instance, m: &Matching, all: &[Matching]) -> bool {
    all.iter().all(|o| verify::popularity_margin(i, m, o) >= 0)
}

pub fn is_stable(i: &Instance, m: &Matching) -> bool {
    !i.edges().into_iter().any(|e| {
        !m.contains(e)
            && i.prefers(e.worker_id(), Some(e.firm), m.worker_mate(e.worker))
            && i.prefers(e.firm_id(), Some(e.worker), m.firm_mate(e.firm))
    })
}

fn popular_pairwise(i: &Instance, m: &Matching, all: &[Matching]) -> bool {
    if let Some(c) = verify::popularity_certificate(i, m) {
        let other = c.improving_matching(m);
        if other.is_valid_for(i) && verify::popularity_margin(i, m, &other) < 0 {
            return false;
        }
    }
    is_popular_by_definition(i, m, all)
}

pub fn classify(i: &Instance, config: &OracleConfig) -> Result<Classification, OracleError> {
    let all: Vec<Matching> = matchings(i, config.bound)?.collect();
    let flags: Vec<(bool, bool, bool, bool)> = all
        .par_iter()
        .map(|m| {
            let stable = is_stable(i, m);
            let popular = match config.method {
                Method::Pairwise => popular_pairwise(i, m, &all),
                Method::Structural => verify::is_popular(i, m),
            };
            if !popular {
                return (false, false, false, stable);
            }
            let dominant = match config.method {
                Method::Pairwise => all
                    .iter()
                    .filter(|o| o.len() > m.len())
                    .all(|o| verify::popularity_margin(i, m, o) > 0),
                Method::Structural => verify::is_dominant(i, m),
            };
            let strong = all
                .iter()
                .all(|o| o == m || verify::popularity_margin(i, m, o) > 0);
            (true, dominant, strong, stable)
        })
        .collect();
    let pick = |f: fn(&(bool, bool, bool, bool)) -> bool| -> Vec<usize> {
        flags.iter().enumerate().filter(|(_, x)| f(x)).map(|(k, _)| k).collect()
    };
    Ok(Classification {
        popular: pick(|x| x.0),
        dominant: pick(|x| x.1),
        strong: pick(|x| x.2),
        stable: pick(|x| x.3),
        all,
    })
}

pub fn set(i: &Instance, kind: SetKind, config: &OracleConfig) -> Result<Vec<Matching>, OracleError> {
    Ok(classify(i, config)?.set(kind))
}

pub fn popular_set(i: &Instance, config: &OracleConfig) -> Result<Vec<Matching>, OracleError> {
    set(i, SetKind::Popular, config)
}

pub fn dominant_set(i: &Instance, config: &OracleConfig) -> Result<Vec<Matching>, OracleError> {
    set(i, SetKind::Dominant, config)
}

pub fn strong_set(i: &Instance, config: &OracleConfig) -> Result<Vec<Matching>, OracleError> {
    set(i, SetKind::Strong, config)
}

pub fn stable_set(i: &Instance, config: &OracleConfig) -> Result<Vec<Matching>, OracleError> {
    set(i, SetKind::Stable, config)
}

/// Matchings in the `kind` set of every member of the family, in enumeration
/// order of the first instance.
pub fn robust_set(
    family: &InstanceFamily,
    kind: SetKind,
    config: &OracleConfig,
) -> Result<Vec<Matching>, OracleError> {
    let (first, rest) = family.instances().split_first().expect("non-empty family");
    let mut candidates = set(first, kind, config)?;
    for inst in rest {
        let members: BTreeSet<Matching> = set(inst, kind, config)?.into_iter().collect();
        candidates.retain(|m| members.contains(m));
    }
    Ok(candidates)
}

/// Agents covered by no matching of `set`.
pub fn uncovered_agents(i: &Instance, set: &[Matching]) -> Vec<AgentId> {
    i.agents()
        .filter(|&a| set.iter().all(|m| !m.is_matched(a)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;

    // Independent count: recursion over firms rather than workers.
    fn count_by_firms(i: &Instance, f: usize, used: &mut Vec<bool>) -> u64 {
        if f == i.num_firms() {
            return 1;
        }
        let mut total = count_by_firms(i, f + 1, used);
        for &w in i.firm_prefs(f) {
            if !used[w] {
                used[w] = true;
                total += count_by_firms(i, f + 1, used);
                used[w] = false;
            }
        }
        total
    }

    fn complete(n: usize) -> Instance {
        let mut b = Instance::builder();
        let ws: Vec<String> = (1..=n).map(|k| format!("w{k}")).collect();
        let fs: Vec<String> = (1..=n).map(|k| format!("f{k}")).collect();
        b.workers(ws.clone()).firms(fs.clone());
        for w in &ws {
            b.prefs(w.clone(), fs.clone());
        }
        for f in &fs {
            b.prefs(f.clone(), ws.clone());
        }
        b.build().unwrap()
    }

    #[test]
    fn small_counts() {
        let one = parse_instance("workers: w\nfirms: f\npref w: f\npref f: w\n").unwrap();
        let ms: Vec<_> = matchings(&one, 8).unwrap().collect();
        assert_eq!(ms.len(), 2);
        assert!(ms[0].is_empty());
        assert_eq!(matchings(&complete(2), 8).unwrap().count(), 7);
        assert_eq!(matchings(&complete(4), 8).unwrap().count(), 209);
    }

    #[test]
    fn enumeration_is_distinct_and_matches_independent_count() {
        for n in 0..=4 {
            let i = complete(n);
            let ms: Vec<_> = matchings(&i, 8).unwrap().collect();
            let distinct: BTreeSet<_> = ms.iter().cloned().collect();
            assert_eq!(distinct.len(), ms.len());
            assert_eq!(ms.len() as u64, count_by_firms(&i, 0, &mut vec![false; n]));
        }
    }

    #[test]
    fn bound_is_enforced() {
        assert_eq!(
            matchings(&complete(3), 2).unwrap_err(),
            OracleError::TooLarge { per_side: 3, bound: 2 }
        );
    }

    #[test]
    fn no_edges_gives_empty_popular_set() {
        let i = parse_instance("workers: w\nfirms: f\n").unwrap();
        let p = popular_set(&i, &OracleConfig::default()).unwrap();
        assert_eq!(p, vec![Matching::empty_for(&i)]);
    }

    #[test]
    fn methods_agree_on_complete_three() {
        let i = complete(3);
        let a = classify(&i, &OracleConfig::default()).unwrap();
        let b = classify(&i, &OracleConfig { method: Method::Structural, ..Default::default() })
            .unwrap();
        assert_eq!(a.popular, b.popular);
        assert_eq!(a.dominant, b.dominant);
        assert_eq!(a.stable.len(), 1);
        assert!(a.popular.contains(&a.stable[0]));
        assert!(a.strong.len() <= 1);
    }
}
