use std::ops::ControlFlow;

use super::{dominant_matching, gale_shapley, SolveError};
use crate::model::{Edge, Instance, Matching};
use crate::verify::{is_dominant, is_popular};

/// Default limit on agents per side for [`ExhaustiveEdgeSolver`].
pub const DEFAULT_EDGE_BOUND: usize = 12;

/// Finds popular or dominant matchings that contain a given edge.
pub trait EdgeSolver: Sync {
    fn popular_edge(&self, i: &Instance, e: Edge) -> Result<Option<Matching>, SolveError>;
    fn dominant_edge(&self, i: &Instance, e: Edge) -> Result<Option<Matching>, SolveError>;
}

/// Certified search over matchings that contain the edge.
///
/// Candidates must cover every agent the stable matching covers (an agent
/// matched there is matched in every popular matching). For dominance they
/// must cover exactly the agents covered by a dominant matching. Each
/// candidate is checked by the structural verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveEdgeSolver {
    pub bound: usize,
}

impl Default for ExhaustiveEdgeSolver {
    fn default() -> Self {
        ExhaustiveEdgeSolver { bound: DEFAULT_EDGE_BOUND }
    }
}

impl ExhaustiveEdgeSolver {
    fn check(&self, i: &Instance, e: Option<Edge>) -> Result<(), SolveError> {
        let per_side = i.num_workers().max(i.num_firms());
        if per_side > self.bound {
            return Err(SolveError::TooLarge { per_side, bound: self.bound });
        }
        if let Some(e) = e {
            if !i.has_edge(e) {
                return Err(SolveError::EdgeNotInInstance(format!("({}, {})", e.worker, e.firm)));
            }
        }
        Ok(())
    }

    /// Calls `visit` on every popular matching containing `forced` (all
    /// popular matchings if `None`), in search order, until it breaks.
    pub fn for_each_popular<B>(
        &self,
        i: &Instance,
        forced: Option<Edge>,
        mut visit: impl FnMut(&Matching) -> ControlFlow<B>,
    ) -> Result<Option<B>, SolveError> {
        self.check(i, forced)?;
        let s = gale_shapley(i);
        let must_w: Vec<bool> = (0..i.num_workers()).map(|w| s.worker_mate(w).is_some()).collect();
        let must_f: Vec<bool> = (0..i.num_firms()).map(|f| s.firm_mate(f).is_some()).collect();
        let search = Search {
            i,
            must_w,
            must_f,
            allow_w: vec![true; i.num_workers()],
            allow_f: vec![true; i.num_firms()],
        };
        Ok(search.run(forced, |m| if is_popular(i, m) { visit(m) } else { ControlFlow::Continue(()) }))
    }

    pub fn for_each_dominant<B>(
        &self,
        i: &Instance,
        forced: Option<Edge>,
        mut visit: impl FnMut(&Matching) -> ControlFlow<B>,
    ) -> Result<Option<B>, SolveError> {
        self.check(i, forced)?;
        let d = dominant_matching(i);
        let cov_w: Vec<bool> = (0..i.num_workers()).map(|w| d.worker_mate(w).is_some()).collect();
        let cov_f: Vec<bool> = (0..i.num_firms()).map(|f| d.firm_mate(f).is_some()).collect();
        let search = Search {
            i,
            must_w: cov_w.clone(),
            must_f: cov_f.clone(),
            allow_w: cov_w,
            allow_f: cov_f,
        };
        Ok(search.run(forced, |m| if is_dominant(i, m) { visit(m) } else { ControlFlow::Continue(()) }))
    }
}

impl EdgeSolver for ExhaustiveEdgeSolver {
    fn popular_edge(&self, i: &Instance, e: Edge) -> Result<Option<Matching>, SolveError> {
        self.for_each_popular(i, Some(e), |m| ControlFlow::Break(m.clone()))
    }

    fn dominant_edge(&self, i: &Instance, e: Edge) -> Result<Option<Matching>, SolveError> {
        self.for_each_dominant(i, Some(e), |m| ControlFlow::Break(m.clone()))
    }
}

pub fn popular_edge(i: &Instance, e: Edge) -> Result<Option<Matching>, SolveError> {
    ExhaustiveEdgeSolver::default().popular_edge(i, e)
}

pub fn dominant_edge(i: &Instance, e: Edge) -> Result<Option<Matching>, SolveError> {
    ExhaustiveEdgeSolver::default().dominant_edge(i, e)
}

struct Search<'a> {
    i: &'a Instance,
    must_w: Vec<bool>,
    must_f: Vec<bool>,
    allow_w: Vec<bool>,
    allow_f: Vec<bool>,
}

impl Search<'_> {
    fn run<B>(
        &self,
        forced: Option<Edge>,
        mut leaf: impl FnMut(&Matching) -> ControlFlow<B>,
    ) -> Option<B> {
        let mut m = Matching::empty_for(self.i);
        if let Some(e) = forced {
            if !self.allow_w[e.worker] || !self.allow_f[e.firm] {
                return None;
            }
            m.insert(e).expect("empty matching");
        }
        let options: Vec<Vec<usize>> = (0..self.i.num_workers())
            .map(|w| {
                let mut fs: Vec<usize> = self
                    .i
                    .worker_prefs(w)
                    .iter()
                    .copied()
                    .filter(|&f| self.allow_f[f])
                    .collect();
                fs.sort_unstable();
                fs
            })
            .collect();
        match self.go(0, &options, &mut m, &mut leaf) {
            ControlFlow::Break(b) => Some(b),
            ControlFlow::Continue(()) => None,
        }
    }

    // Workers before `w` are decided.
    fn feasible(&self, w: usize, options: &[Vec<usize>], m: &Matching) -> bool {
        let nw = self.i.num_workers();
        for (v, opts) in options.iter().enumerate().take(nw).skip(w) {
            if self.must_w[v]
                && m.worker_mate(v).is_none()
                && !opts.iter().any(|&f| m.firm_mate(f).is_none())
            {
                return false;
            }
        }
        for f in 0..self.i.num_firms() {
            if self.must_f[f]
                && m.firm_mate(f).is_none()
                && !self.i.firm_prefs(f).iter().any(|&v| {
                    v >= w && self.allow_w[v] && m.worker_mate(v).is_none()
                })
            {
                return false;
            }
        }
        true
    }

    fn go<B>(
        &self,
        w: usize,
        options: &[Vec<usize>],
        m: &mut Matching,
        leaf: &mut impl FnMut(&Matching) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        if !self.feasible(w, options, m) {
            return ControlFlow::Continue(());
        }
        if w == self.i.num_workers() {
            return leaf(m);
        }
        if m.worker_mate(w).is_some() || !self.allow_w[w] {
            return self.go(w + 1, options, m, leaf);
        }
        if !self.must_w[w] {
            self.go(w + 1, options, m, leaf)?;
        }
        for &f in &options[w] {
            if m.firm_mate(f).is_some() {
                continue;
            }
            let e = Edge::new(w, f);
            m.insert(e).expect("free pair");
            let r = self.go(w + 1, options, m, leaf);
            m.remove(e);
            r?;
        }
        ControlFlow::Continue(())
    }
}
