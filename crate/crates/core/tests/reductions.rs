use popmatch::generate::{random_forbidden_edge_source, random_instance, seeded};
use popmatch::model::{parse_instance, Matching};
use popmatch::oracle::{self, OracleConfig, SetKind};
use popmatch::reductions::{
    extract_assignment, parse_dimacs, reduce_forbidden_edge_force_vert, reduce_sat,
    reduce_two_forbidden, witness_matching, CnfFormula, Literal,
};
use popmatch::verify::{is_dominant, is_popular};
use popmatch::{Edge, Instance};
use rand::seq::SliceRandom;
use rand::Rng;

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn three_clause_witness() {
    let f = parse_dimacs(&fixture("three_clauses.cnf")).unwrap();
    let p = reduce_sat(&f).unwrap();
    let assignment = [false, true, true, false, true];
    let m = witness_matching(&p, &f, &assignment).unwrap();
    let a = p.family.first();
    let has = |x: &str, y: &str| m.contains(a.edge_by_labels(x, y).unwrap());
    // C1 = X1 or X2 or X3 with X1 false
    assert!(has("d.j1.i1", "b.j1.i1") && has("c.j1.i1", "e.j1.i1"));
    assert!(has("c.j1.i2", "b.j1.i2") && has("d.j1.i2", "e.j1.i2"));
    // C2 = not X4 or not X1 or not X2; the first two literals are true
    assert!(has("dbar.j2.i1", "bbar.j2.i1") && has("cbar.j2.i1", "ebar.j2.i1"));
    assert!(has("dbar.j2.i2", "bbar.j2.i2"));
    assert!(has("cbar.j2.i3", "bbar.j2.i3") && has("dbar.j2.i3", "ebar.j2.i3"));
    assert!(has("t1", "s1") && has("t2", "s2") && has("w1", "v1") && has("w2", "v2"));
    assert_eq!(m.len(), (a.num_agents() - 1) / 2);
    assert_eq!(extract_assignment(&p, &f, &m).unwrap(), assignment);
    for inst in p.family.instances() {
        assert!(is_popular(inst, &m) && is_dominant(inst, &m));
    }
}

fn random_monotone<R: Rng>(rng: &mut R, clauses: usize, vars: usize) -> CnfFormula {
    let cs = (0..clauses)
        .map(|_| {
            let negated = rng.gen_bool(0.5);
            (0..3).map(|_| Literal { var: rng.gen_range(1..=vars), negated }).collect()
        })
        .collect();
    CnfFormula::new(vars, cs).unwrap()
}

#[test]
fn every_satisfying_assignment_gives_a_robust_dominant_witness() {
    let mut rng = seeded(21);
    for _ in 0..40 {
        let clauses = rng.gen_range(1..=2);
        let vars = rng.gen_range(1..=4);
        let f = random_monotone(&mut rng, clauses, vars);
        let p = reduce_sat(&f).unwrap();
        let a = p.family.first();
        let diff: Vec<&str> = p.family.differing_agents().into_iter().map(|x| a.label(x)).collect();
        assert_eq!(diff, ["s1", "v2"]);
        for bits in 0u32..1 << f.num_vars() {
            let asg: Vec<bool> = (0..f.num_vars()).map(|k| bits >> k & 1 == 1).collect();
            let w = witness_matching(&p, &f, &asg);
            assert_eq!(w.is_ok(), f.is_satisfied_by(&asg));
            if let Ok(m) = w {
                let back = extract_assignment(&p, &f, &m).unwrap();
                assert!(f.is_satisfied_by(&back));
            }
        }
    }
}

fn popular_avoiding_covering(src: &Instance, e: Edge, d: popmatch::AgentId) -> bool {
    oracle::popular_set(src, &OracleConfig::default())
        .unwrap()
        .iter()
        .any(|m| !m.contains(e) && m.is_matched(d))
}

#[test]
fn forbidden_edge_round_trip() {
    let mut rng = seeded(22);
    let cfg = OracleConfig::default();
    for _ in 0..60 {
        let (src, e, d) = random_forbidden_edge_source(&mut rng, 4, 0.6);
        let p = reduce_forbidden_edge_force_vert(&src, e, d).unwrap();
        let robust = oracle::robust_set(&p.family, SetKind::Popular, &cfg).unwrap();
        assert_eq!(!robust.is_empty(), popular_avoiding_covering(&src, e, d), "{src:?}");
        for m in &robust {
            let projected = Matching::from_edges_in(
                &src,
                m.edges().into_iter().filter(|x| x.worker < src.num_workers() && x.firm < src.num_firms()),
            )
            .unwrap();
            assert!(is_popular(&src, &projected) && !projected.contains(e) && projected.is_matched(d));
        }
    }
}

#[test]
fn two_forbidden_on_swap_pair() {
    let a = parse_instance(&fixture("swap_a.txt")).unwrap();
    let m2 = parse_instance(&fixture("swap_a.txt"))
        .and_then(|i| popmatch::model::parse_matching(&fixture("swap_m2.txt"), &i))
        .unwrap();
    let p = reduce_two_forbidden(
        &a,
        a.edge_by_labels("w1", "f1").unwrap(),
        a.edge_by_labels("w2", "f3").unwrap(),
    )
    .unwrap();
    let got = oracle::robust_set(&p.family, SetKind::Popular, &OracleConfig::default()).unwrap();
    assert_eq!(got, vec![m2]);
}

#[test]
fn two_forbidden_keeps_exactly_the_avoiding_popular_matchings() {
    let mut rng = seeded(23);
    let cfg = OracleConfig::default();
    let mut checked = 0;
    while checked < 80 {
        let (nw, nf) = (rng.gen_range(2..=5), rng.gen_range(2..=5));
        let src = random_instance(&mut rng, nw, nf, 0.6);
        let edges = src.edges();
        let pairs: Vec<(Edge, Edge)> = edges
            .iter()
            .flat_map(|&x| edges.iter().map(move |&y| (x, y)))
            .filter(|(x, y)| x.worker != y.worker && x.firm != y.firm)
            .collect();
        let Some(&(e, e2)) = pairs.choose(&mut rng) else { continue };
        let p = reduce_two_forbidden(&src, e, e2).unwrap();
        let got = oracle::robust_set(&p.family, SetKind::Popular, &cfg).unwrap();
        let want: Vec<Matching> = oracle::popular_set(&src, &cfg)
            .unwrap()
            .into_iter()
            .filter(|m| !m.contains(e) && !m.contains(e2))
            .collect();
        assert_eq!(got, want);
        checked += 1;
    }
}
