use std::collections::BTreeMap;
use std::ops::ControlFlow;

use num_rational::BigRational;
use num_traits::Zero;

use super::{ExhaustiveEdgeSolver, SolveError};
use crate::model::{Edge, Instance, Matching};

/// Rational weights on the edges of one instance. Unlisted edges weigh 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightFunction {
    weights: BTreeMap<Edge, BigRational>,
}

impl WeightFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_fn(i: &Instance, mut f: impl FnMut(Edge) -> BigRational) -> Self {
        let weights = i.edges().into_iter().map(|e| (e, f(e))).collect();
        WeightFunction { weights }
    }

    pub fn from_map(i: &Instance, weights: BTreeMap<Edge, BigRational>) -> Result<Self, SolveError> {
        if let Some(e) = weights.keys().find(|&&e| !i.has_edge(e)) {
            return Err(SolveError::WeightOffGraph(format!("({}, {})", e.worker, e.firm)));
        }
        Ok(WeightFunction { weights })
    }

    pub fn weight(&self, e: Edge) -> BigRational {
        self.weights.get(&e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total(&self, m: &Matching) -> BigRational {
        m.edges().into_iter().map(|e| self.weight(e)).sum()
    }
}

/// Parses `worker firm weight` lines; weights are integers or `p/q`.
pub fn parse_weights(text: &str, i: &Instance) -> Result<WeightFunction, SolveError> {
    let mut weights = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| SolveError::WeightSyntax { line: k + 1, message };
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [x, y, w] = parts.as_slice() else {
            return Err(syntax("expected `worker firm weight`".into()));
        };
        let e = i.edge_by_labels(x, y).map_err(|err| syntax(err.to_string()))?;
        let value: BigRational = w
            .parse()
            .map_err(|_| syntax(format!("`{w}` is not a rational number")))?;
        weights.insert(e, value);
    }
    WeightFunction::from_map(i, weights)
}

/// A popular matching of maximum weight on a complete instance. Among
/// optimal matchings the first in search order is returned.
pub fn max_weight_popular(
    i: &Instance,
    w: &WeightFunction,
) -> Result<(Matching, BigRational), SolveError> {
    max_weight_popular_with(i, w, &ExhaustiveEdgeSolver::default())
}

pub fn max_weight_popular_with(
    i: &Instance,
    w: &WeightFunction,
    solver: &ExhaustiveEdgeSolver,
) -> Result<(Matching, BigRational), SolveError> {
    if !i.is_complete() {
        return Err(SolveError::NotComplete);
    }
    let mut best: Option<(Matching, BigRational)> = None;
    solver.for_each_popular::<()>(i, None, |m| {
        let total = w.total(m);
        if best.as_ref().is_none_or(|(_, b)| total > *b) {
            best = Some((m.clone(), total));
        }
        ControlFlow::Continue(())
    })?;
    Ok(best.expect("stable matchings are popular"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;
    use num_bigint::BigInt;

    #[test]
    fn one_by_one() {
        let i = parse_instance("workers: w\nfirms: f\npref w: f\npref f: w\n").unwrap();
        let w = parse_weights("w f 5\n", &i).unwrap();
        let (m, total) = max_weight_popular(&i, &w).unwrap();
        assert_eq!(m.edges(), vec![Edge::new(0, 0)]);
        assert_eq!(total, BigRational::from_integer(BigInt::from(5)));
    }

    #[test]
    fn zero_weights_and_rationals() {
        let i = parse_instance(
            "workers: a b\nfirms: x y\npref a: x y\npref b: x y\npref x: a b\npref y: a b\n",
        )
        .unwrap();
        let (_, total) = max_weight_popular(&i, &WeightFunction::zero()).unwrap();
        assert!(total.is_zero());
        let w = parse_weights("a y 1/2\n", &i).unwrap();
        assert_eq!(w.weight(Edge::new(0, 1)), BigRational::new(1.into(), 2.into()));
        assert!(parse_weights("a y x\n", &i).is_err());
    }

    #[test]
    fn incomplete_is_rejected() {
        let i = parse_instance("workers: w\nfirms: f g\npref w: f\npref f: w\n").unwrap();
        assert_eq!(
            max_weight_popular(&i, &WeightFunction::zero()).unwrap_err(),
            SolveError::NotComplete
        );
    }
}
