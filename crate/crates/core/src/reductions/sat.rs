//! Monotone 3-SAT to a pair of instances that differ at two firms.
//!
//! Per literal position (clause `j`, position `i`) a positive clause gets
//! workers `a c d` and firms `b e f`; a negative clause gets `abar cbar dbar`
//! and `bbar ebar fbar`. Labels read `kind.j<j>.i<i>`. Shared agents are
//! workers `t1 t2 t3 w1 w2` and firms `s1 s2 v1 v2`.

use std::collections::BTreeMap;

use super::{CnfFormula, GadgetPair, ReductionError};
use crate::model::{Instance, InstanceBuilder, InstanceFamily, Matching};
use crate::verify::{is_dominant, is_popular};

fn lab(kind: &str, j: usize, i: usize) -> String {
    format!("{kind}.j{j}.i{i}")
}

struct Slot {
    j: usize,
    i: usize,
    positive: bool,
    var: usize,
}

fn slots(f: &CnfFormula) -> Vec<Slot> {
    let mut out = Vec::new();
    for (jj, c) in f.clauses().iter().enumerate() {
        let positive = f.polarity(jj) == Some(true);
        for (ii, l) in c.iter().enumerate() {
            out.push(Slot { j: jj + 1, i: ii + 1, positive, var: l.var });
        }
    }
    out
}

pub fn reduce_sat(f: &CnfFormula) -> Result<GadgetPair, ReductionError> {
    f.validate_monotone3()?;
    let slots = slots(f);
    let mut workers = Vec::new();
    let mut firms = Vec::new();
    let mut provenance = BTreeMap::new();
    for s in &slots {
        let (ws, fs) = if s.positive {
            (["a", "c", "d"], ["b", "e", "f"])
        } else {
            (["abar", "cbar", "dbar"], ["bbar", "ebar", "fbar"])
        };
        for k in ws {
            workers.push(lab(k, s.j, s.i));
        }
        for k in fs {
            firms.push(lab(k, s.j, s.i));
        }
        for k in ws.iter().chain(fs.iter()) {
            provenance.insert(format!("{k}_{}^{}", s.i, s.j), lab(k, s.j, s.i));
        }
    }
    for w in ["t1", "t2", "t3", "w1", "w2"] {
        workers.push(w.to_string());
        provenance.insert(format!("{}_{}", &w[..1], &w[1..]), w.to_string());
    }
    for x in ["s1", "s2", "v1", "v2"] {
        firms.push(x.to_string());
        provenance.insert(format!("{}_{}", &x[..1], &x[1..]), x.to_string());
    }

    let mut b = InstanceBuilder::default();
    b.workers(workers.iter().cloned()).firms(firms.iter().cloned());

    // Cross-gadget edges join c of X_k with bbar of every occurrence of not X_k.
    let partners = |s: &Slot| -> Vec<String> {
        let kind = if s.positive { "bbar" } else { "c" };
        slots
            .iter()
            .filter(|o| o.var == s.var && o.positive != s.positive)
            .map(|o| lab(kind, o.j, o.i))
            .collect()
    };

    for s in &slots {
        let (j, i) = (s.j, s.i);
        let l = |k: &str| lab(k, j, i);
        if s.positive {
            let a_next: Vec<String> = if i < 3 {
                vec![l("f"), lab("b", j, i + 1), "v2".into()]
            } else {
                vec![l("f"), "v1".into(), "v2".into()]
            };
            b.prefs(l("a"), a_next);
            let prev = if i > 1 { lab("a", j, i - 1) } else { "t1".into() };
            b.prefs(l("b"), [l("c"), prev, l("d")]);
            let mut c = vec![l("e")];
            c.extend(partners(s));
            c.extend([l("b"), "v2".into()]);
            b.prefs(l("c"), c);
            b.prefs(l("d"), [l("b"), l("e"), l("f"), "v2".into()]);
            b.prefs(l("e"), [l("d"), l("c")]);
            b.prefs(l("f"), [l("d"), l("a")]);
        } else {
            let a_next: Vec<String> = if i < 3 {
                vec![l("fbar"), lab("bbar", j, i + 1), lab("ebar", j, i + 1), "v2".into()]
            } else {
                vec![l("fbar"), "v1".into(), "v2".into()]
            };
            b.prefs(l("abar"), a_next);
            let prev = if i > 1 { lab("abar", j, i - 1) } else { "t1".into() };
            let mut bb = vec![prev.clone(), l("cbar")];
            bb.extend(partners(s));
            bb.push(l("dbar"));
            b.prefs(l("bbar"), bb);
            b.prefs(l("cbar"), [l("ebar"), l("bbar"), "v2".into()]);
            b.prefs(l("dbar"), ["v2".into(), l("bbar"), l("fbar"), l("ebar")]);
            b.prefs(l("ebar"), [prev, l("dbar"), l("cbar")]);
            b.prefs(l("fbar"), [l("abar"), l("dbar")]);
        }
    }

    let mut t1 = vec!["s1".to_string()];
    let mut v1 = Vec::new();
    for s in &slots {
        if s.i == 1 {
            if s.positive {
                t1.push(lab("b", s.j, 1));
            } else {
                t1.extend([lab("bbar", s.j, 1), lab("ebar", s.j, 1)]);
            }
        }
        if s.i == 3 {
            v1.push(lab(if s.positive { "a" } else { "abar" }, s.j, 3));
        }
    }
    t1.push("v2".into());
    v1.push("w1".into());
    b.prefs("t1", t1);
    b.prefs("t2", ["s2", "s1"]);
    b.prefs("t3", ["s2"]);
    b.prefs("w1", ["v2", "v1"]);
    b.prefs("w2", ["v2"]);
    b.prefs("s2", ["t2", "t3"]);
    b.prefs("v1", v1);

    let mut tail: Vec<String> = workers
        .iter()
        .filter(|w| w.contains('.'))
        .cloned()
        .collect();
    tail.push("t1".into());

    let mut ba = b.clone();
    ba.prefs("s1", ["t2", "t1"]);
    let mut v2a = vec!["w1".to_string(), "w2".to_string()];
    v2a.extend(tail.iter().cloned());
    ba.prefs("v2", v2a);

    let mut bb = b;
    bb.prefs("s1", ["t1", "t2"]);
    let mut v2b = tail;
    v2b.extend(["w2".to_string(), "w1".to_string()]);
    bb.prefs("v2", v2b);

    let family = InstanceFamily::with_names(
        vec![ba.build()?, bb.build()?],
        vec!["A".into(), "B".into()],
    )?;
    Ok(GadgetPair { family, provenance })
}

fn check_shape(pair: &GadgetPair, f: &CnfFormula) -> Result<(), ReductionError> {
    f.validate_monotone3()?;
    let i = pair.family.first();
    if pair.family.len() != 2 || i.num_agents() != 18 * f.clauses().len() + 9 {
        return Err(ReductionError::Mismatch("pair was not built from this formula".into()));
    }
    Ok(())
}

fn literal_edges(positive: bool, true_pattern: bool, j: usize, i: usize) -> [(String, String); 3] {
    let l = |k: &str| lab(k, j, i);
    match (positive, true_pattern) {
        (true, true) => [(l("c"), l("b")), (l("d"), l("e")), (l("a"), l("f"))],
        (true, false) => [(l("d"), l("b")), (l("c"), l("e")), (l("a"), l("f"))],
        (false, true) => [(l("dbar"), l("bbar")), (l("cbar"), l("ebar")), (l("abar"), l("fbar"))],
        (false, false) => [(l("cbar"), l("bbar")), (l("dbar"), l("ebar")), (l("abar"), l("fbar"))],
    }
}

fn matching_of(i: &Instance, pairs: &[(String, String)]) -> Result<Matching, ReductionError> {
    let edges = pairs
        .iter()
        .map(|(x, y)| i.edge_by_labels(x, y))
        .collect::<Result<Vec<_>, _>>()?;
    Matching::from_edges_in(i, edges).map_err(|e| ReductionError::Mismatch(e.to_string()))
}

/// The matching built from a satisfying assignment. It is checked to be
/// popular and dominant in both instances before it is returned.
pub fn witness_matching(
    pair: &GadgetPair,
    f: &CnfFormula,
    assignment: &[bool],
) -> Result<Matching, ReductionError> {
    check_shape(pair, f)?;
    if assignment.len() != f.num_vars() {
        return Err(ReductionError::AssignmentLength { expected: f.num_vars(), got: assignment.len() });
    }
    if let Some(j) = f.first_unsatisfied(assignment) {
        return Err(ReductionError::Unsatisfied { clause: j + 1 });
    }
    let mut pairs: Vec<(String, String)> = [("t1", "s1"), ("t2", "s2"), ("w1", "v1"), ("w2", "v2")]
        .iter()
        .map(|&(x, y)| (x.to_string(), y.to_string()))
        .collect();
    for s in slots(f) {
        let literal_true = assignment[s.var - 1] == s.positive;
        pairs.extend(literal_edges(s.positive, literal_true, s.j, s.i));
    }
    let m = matching_of(pair.family.first(), &pairs)?;
    for (inst, name) in pair.family.instances().iter().zip(pair.family.names()) {
        if !is_popular(inst, &m) || !is_dominant(inst, &m) {
            return Err(ReductionError::SelfCheck(format!(
                "witness matching is not dominant in instance {name}"
            )));
        }
    }
    Ok(m)
}

/// Reads an assignment off a matching: a variable is true if one of its
/// positive occurrences carries the true pattern, false if one of its
/// negative occurrences carries the true pattern of the negated literal,
/// and true otherwise.
pub fn extract_assignment(
    pair: &GadgetPair,
    f: &CnfFormula,
    m: &Matching,
) -> Result<Vec<bool>, ReductionError> {
    check_shape(pair, f)?;
    let inst = pair.family.first();
    let has = |s: &Slot| -> Result<bool, ReductionError> {
        for (x, y) in literal_edges(s.positive, true, s.j, s.i) {
            if !m.contains(inst.edge_by_labels(&x, &y)?) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut value = vec![None; f.num_vars()];
    for s in slots(f).iter().filter(|s| s.positive) {
        if has(s)? {
            value[s.var - 1] = Some(true);
        }
    }
    for s in slots(f).iter().filter(|s| !s.positive) {
        if value[s.var - 1].is_none() && has(s)? {
            value[s.var - 1] = Some(false);
        }
    }
    Ok(value.into_iter().map(|v| v.unwrap_or(true)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::{parse_dimacs, Literal};
    use crate::{AgentId, Side};

    fn single() -> CnfFormula {
        CnfFormula::new(1, vec![vec![Literal::pos(1); 3]]).unwrap()
    }

    #[test]
    fn single_clause_counts() {
        let p = reduce_sat(&single()).unwrap();
        let a = p.family.first();
        assert_eq!(a.num_agents(), 27);
        assert_eq!((a.num_workers(), a.num_firms()), (14, 13));
        let diff: Vec<&str> = p.family.differing_agents().into_iter().map(|x| a.label(x)).collect();
        assert_eq!(diff, vec!["s1", "v2"]);
        assert_eq!(p.provenance.len(), 27);
        for l in a.worker_labels().iter().chain(a.firm_labels()) {
            assert!(p.provenance.values().any(|v| v == l), "{l}");
        }
    }

    #[test]
    fn v2_lists() {
        let p = reduce_sat(&single()).unwrap();
        let a = &p.family.instances()[0];
        let b = &p.family.instances()[1];
        let v2 = a.agent("v2").unwrap();
        let names = |i: &Instance| -> Vec<String> {
            i.prefs(v2).iter().map(|&w| i.label(AgentId::worker(w)).to_string()).collect()
        };
        let na = names(a);
        assert_eq!(&na[..3], ["w1", "w2", "a.j1.i1"]);
        assert_eq!(na.last().unwrap(), "t1");
        assert_eq!(na.len(), 12);
        let nb = names(b);
        assert_eq!(&nb[nb.len() - 3..], ["t1", "w2", "w1"]);
        assert_eq!(v2.side, Side::Firm);
    }

    #[test]
    fn cross_edges_join_opposite_literals() {
        let f = parse_dimacs("p cnf 5 3\n1 2 3 0\n-4 -1 -2 0\n5 4 1 0\n").unwrap();
        let p = reduce_sat(&f).unwrap();
        let a = p.family.first();
        let e = |x: &str, y: &str| a.edge_by_labels(x, y).is_ok();
        assert!(e("c.j1.i1", "bbar.j2.i2"));
        assert!(e("c.j3.i3", "bbar.j2.i2"));
        assert!(e("c.j3.i2", "bbar.j2.i1"));
        assert!(e("c.j1.i2", "bbar.j2.i3"));
        assert!(!e("c.j1.i3", "bbar.j2.i1"));
        let bb = a.agent("bbar.j2.i2").unwrap();
        let order: Vec<&str> = a.prefs(bb).iter().map(|&w| a.label(AgentId::worker(w))).collect();
        assert_eq!(order, ["abar.j2.i1", "cbar.j2.i2", "c.j1.i1", "c.j3.i3", "dbar.j2.i2"]);
        assert_eq!(a.num_agents(), 63);
    }

    #[test]
    fn witness_for_single_clause() {
        let f = single();
        let p = reduce_sat(&f).unwrap();
        let m = witness_matching(&p, &f, &[true]).unwrap();
        let a = p.family.first();
        let uncovered: Vec<&str> = a
            .agents()
            .filter(|&x| !m.is_matched(x))
            .map(|x| a.label(x))
            .collect();
        assert_eq!(uncovered, vec!["t3"]);
        assert_eq!(extract_assignment(&p, &f, &m).unwrap(), vec![true]);
        assert!(matches!(witness_matching(&p, &f, &[false]), Err(ReductionError::Unsatisfied { clause: 1 })));
    }

    #[test]
    fn rejects_bad_formulas() {
        assert!(matches!(reduce_sat(&CnfFormula::new(1, vec![]).unwrap()), Err(ReductionError::EmptyFormula)));
        let mixed = CnfFormula::new(2, vec![vec![Literal::pos(1), Literal::neg(2), Literal::pos(1)]]).unwrap();
        assert!(reduce_sat(&mixed).is_err());
    }
}
