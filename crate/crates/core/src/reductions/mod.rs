//! Instance pairs built from hard source problems.

mod cnf;
mod sat;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{AgentId, Edge, FamilyError, Instance, InstanceBuilder, InstanceError, InstanceFamily};

pub use cnf::{parse_dimacs, serialize_dimacs, CnfFormula, Literal};
pub use sat::{extract_assignment, reduce_sat, witness_matching};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("line {line}: {message}")]
    Dimacs { line: usize, message: String },
    #[error("the formula has no clauses")]
    EmptyFormula,
    #[error("clause {clause} has {len} literals, expected 3")]
    ClauseArity { clause: usize, len: usize },
    #[error("clause {clause} mixes positive and negative literals")]
    NotMonotone { clause: usize },
    #[error("clause {clause} mentions variable {var}, which is out of range")]
    VariableOutOfRange { clause: usize, var: usize },
    #[error("assignment has {got} values, the formula has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error("the assignment falsifies clause {clause}")]
    Unsatisfied { clause: usize },
    #[error("internal check failed: {0}")]
    SelfCheck(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("source instance violates the promise: {0}")]
    Promise(String),
    #[error("{0} is not an edge of the source instance")]
    EdgeNotInInstance(String),
    #[error("the two edges share an agent")]
    EdgesNotDisjoint,
    #[error("label {0} is already used by the source instance")]
    LabelTaken(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Two instances over one agent set, plus the role of each constructed agent.
/// `provenance` maps role names such as `a_2^3`, `s_1` or `l_a` to labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetPair {
    pub family: InstanceFamily,
    pub provenance: BTreeMap<String, String>,
}

fn copy_into(src: &Instance, b: &mut InstanceBuilder) {
    b.workers(src.worker_labels().iter().cloned());
    b.firms(src.firm_labels().iter().cloned());
    for x in src.agents() {
        let names: Vec<String> = src.neighbors(x).map(|y| src.label(y).to_string()).collect();
        b.prefs(src.label(x), names);
    }
}

fn fresh(src: &Instance, label: &str) -> Result<String, ReductionError> {
    match src.agent(label) {
        Some(_) => Err(ReductionError::LabelTaken(label.to_string())),
        None => Ok(label.to_string()),
    }
}

fn add(b: &mut InstanceBuilder, side: crate::Side, label: &str) {
    match side {
        crate::Side::Worker => b.worker(label),
        crate::Side::Firm => b.firm(label),
    };
}

/// Orients `e` as `(a, b, c)`: `a` has `b` as its only neighbor, `b` has
/// exactly one other neighbor `c`, and `b`, `c` rank each other first.
fn forbidden_edge_roles(src: &Instance, e: Edge) -> Result<(AgentId, AgentId, AgentId), ReductionError> {
    let mut last = String::new();
    for (a, b) in [(e.worker_id(), e.firm_id()), (e.firm_id(), e.worker_id())] {
        if src.degree(a) != 1 {
            last = format!("{} has more than one neighbor", src.label(a));
            continue;
        }
        if src.degree(b) != 2 {
            last = format!("{} must have exactly two neighbors", src.label(b));
            continue;
        }
        let c = src.neighbors(b).find(|&y| y != a).expect("degree two");
        if src.neighbors(b).next() != Some(c) || src.neighbors(c).next() != Some(b) {
            last = format!("{} and {} do not rank each other first", src.label(b), src.label(c));
            continue;
        }
        return Ok((a, b, c));
    }
    Err(ReductionError::Promise(last))
}

/// Given a source instance, an edge `e = {a, b}` and an agent `d`, builds a
/// pair that has a robust popular matching iff the source has a popular
/// matching avoiding `e` and covering `d`. The pair differs by one swap at
/// `a` and one at the new agent `aux.ld`.
pub fn reduce_forbidden_edge_force_vert(
    src: &Instance,
    e: Edge,
    d: AgentId,
) -> Result<GadgetPair, ReductionError> {
    if !src.has_edge(e) {
        return Err(ReductionError::EdgeNotInInstance(format!("{{W{}, F{}}}", e.worker, e.firm)));
    }
    if d.index >= src.side_len(d.side) {
        return Err(InstanceError::IndexOutOfRange(d).into());
    }
    let (a, b, c) = forbidden_edge_roles(src, e)?;
    if d == a {
        return Err(ReductionError::Promise(format!(
            "{} is the leaf of the forbidden edge and cannot be the forced agent",
            src.label(a)
        )));
    }
    let la = fresh(src, "aux.la")?;
    let ra = fresh(src, "aux.ra")?;
    let ld = fresh(src, "aux.ld")?;
    let rd = fresh(src, "aux.rd")?;
    let (al, bl, dl) = (src.label(a).to_string(), src.label(b).to_string(), src.label(d).to_string());

    let mut base = InstanceBuilder::default();
    copy_into(src, &mut base);
    add(&mut base, a.side.opposite(), &la);
    add(&mut base, a.side, &ra);
    add(&mut base, d.side.opposite(), &ld);
    add(&mut base, d.side, &rd);
    base.prefs(&la, [&al, &ra]);
    base.prefs(&ra, [&la]);
    base.prefs(&rd, [&ld]);
    let mut d_list: Vec<String> = src.neighbors(d).map(|y| src.label(y).to_string()).collect();
    d_list.push(ld.clone());
    base.prefs(&dl, d_list);

    let mut ia = base.clone();
    ia.prefs(&al, [&bl, &la]);
    ia.prefs(&ld, [&dl, &rd]);
    let mut ib = base;
    ib.prefs(&al, [&la, &bl]);
    ib.prefs(&ld, [&rd, &dl]);

    let family = InstanceFamily::with_names(vec![ia.build()?, ib.build()?], vec!["A".into(), "B".into()])?;
    let provenance = [
        ("a", al),
        ("b", bl),
        ("c", src.label(c).to_string()),
        ("d", dl),
        ("l_a", la),
        ("r_a", ra),
        ("l_d", ld),
        ("r_d", rd),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(GadgetPair { family, provenance })
}

/// The source instance and a copy without two disjoint edges. Robust popular
/// matchings of the pair are the popular matchings of the source that avoid
/// both edges.
pub fn reduce_two_forbidden(src: &Instance, e: Edge, e2: Edge) -> Result<GadgetPair, ReductionError> {
    for x in [e, e2] {
        if !src.has_edge(x) {
            return Err(ReductionError::EdgeNotInInstance(format!("{{W{}, F{}}}", x.worker, x.firm)));
        }
    }
    if e.worker == e2.worker || e.firm == e2.firm {
        return Err(ReductionError::EdgesNotDisjoint);
    }
    let reduced = src.without_edges(&[e, e2])?;
    let family = InstanceFamily::with_names(vec![src.clone(), reduced], vec!["A".into(), "B".into()])?;
    let mut provenance = BTreeMap::new();
    for (name, x) in [("e", e), ("e2", e2)] {
        provenance.insert(format!("{name}.worker"), src.label(x.worker_id()).to_string());
        provenance.insert(format!("{name}.firm"), src.label(x.firm_id()).to_string());
    }
    Ok(GadgetPair { family, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{diff_instances, FamilyRelation};

    fn src() -> Instance {
        // a = w1 is a leaf at b = f1; c = w2 and f1 rank each other first.
        let mut b = Instance::builder();
        b.workers(["w1", "w2", "w3"]).firms(["f1", "f2", "f3"]);
        b.prefs("w1", ["f1"]);
        b.prefs("w2", ["f1", "f2"]);
        b.prefs("w3", ["f2", "f3"]);
        b.prefs("f1", ["w2", "w1"]);
        b.prefs("f2", ["w3", "w2"]);
        b.prefs("f3", ["w3"]);
        b.build().unwrap()
    }

    #[test]
    fn fefv_structure() {
        let s = src();
        let e = s.edge_by_labels("w1", "f1").unwrap();
        let d = s.agent("f3").unwrap();
        let p = reduce_forbidden_edge_force_vert(&s, e, d).unwrap();
        let [a, b] = p.family.instances() else { panic!() };
        assert_eq!(a.num_agents(), 10);
        let r = diff_instances(a, b).unwrap();
        let changed: Vec<&str> = r.changed.iter().map(|&x| a.label(x)).collect();
        assert_eq!(changed, ["w1", "aux.ld"]);
        assert!(r.swaps_only && r.same_graph);
        let f3 = a.agent("f3").unwrap();
        assert_eq!(a.label(a.neighbors(f3).last().unwrap()), "aux.ld");
        assert_eq!(p.provenance["c"], "w2");
    }

    #[test]
    fn fefv_promises() {
        let s = src();
        let d = s.agent("f3").unwrap();
        let bad = s.edge_by_labels("w2", "f2").unwrap();
        assert!(matches!(reduce_forbidden_edge_force_vert(&s, bad, d), Err(ReductionError::Promise(_))));
        let e = s.edge_by_labels("w1", "f1").unwrap();
        let a = s.agent("w1").unwrap();
        assert!(reduce_forbidden_edge_force_vert(&s, e, a).is_err());
    }

    #[test]
    fn two_forbidden_structure() {
        let s = src();
        let e = s.edge_by_labels("w1", "f1").unwrap();
        let e2 = s.edge_by_labels("w3", "f2").unwrap();
        let p = reduce_two_forbidden(&s, e, e2).unwrap();
        assert_eq!(p.family.relation(), FamilyRelation::AlteredAvailability);
        let r = diff_instances(p.family.first(), &p.family.instances()[1]).unwrap();
        assert!(r.reduced_availability);
        assert_eq!(r.removed_edges, vec![e, e2]);
        assert_eq!(reduce_two_forbidden(&s, e, e), Err(ReductionError::EdgesNotDisjoint));
        let shared = s.edge_by_labels("w2", "f1").unwrap();
        assert_eq!(reduce_two_forbidden(&s, e, shared), Err(ReductionError::EdgesNotDisjoint));
    }
}
