use proptest::prelude::*;

use num_rational::BigRational;
use popmatch::generate::{perturb_agent, random_instance, seeded};
use popmatch::mixed::{fractional_margin, FractionalMatching};
use popmatch::model::{
    diff_instances, parse_family, parse_instance, parse_matching, serialize_family, serialize_instance,
    serialize_matching,
};
use popmatch::oracle::{self, OracleConfig};
use popmatch::robust::hybrid_instance;
use popmatch::solve::{dominant_matching, gale_shapley};
use popmatch::verify::{is_dominant, is_popular, popularity_certificate, popularity_margin};
use popmatch::{AgentId, Instance, InstanceFamily, Matching};
use rand::Rng;

/// Seed, worker count, firm count and density.
fn instance() -> impl Strategy<Value = Instance> {
    (any::<u64>(), 1usize..=4, 1usize..=4, 0.2f64..=1.0)
        .prop_map(|(s, nw, nf, p)| random_instance(&mut seeded(s), nw, nf, p))
}

/// An instance with two of its matchings, chosen by index.
fn with_matchings() -> impl Strategy<Value = (Instance, Matching, Matching)> {
    (instance(), any::<usize>(), any::<usize>()).prop_map(|(i, a, b)| {
        let all: Vec<Matching> = oracle::matchings(&i, 8).unwrap().collect();
        let (x, y) = (all[a % all.len()].clone(), all[b % all.len()].clone());
        (i, x, y)
    })
}

fn single_agent_pair() -> impl Strategy<Value = (Instance, Instance, AgentId)> {
    (instance(), any::<u64>()).prop_filter_map("no agent of degree two", |(a, s)| {
        let mut rng = seeded(s);
        let xs: Vec<AgentId> = a.agents().filter(|&x| a.degree(x) >= 2).collect();
        if xs.is_empty() {
            return None;
        }
        let x = xs[rng.gen_range(0..xs.len())];
        let b = perturb_agent(&mut rng, &a, x);
        Some((a, b, x))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn instance_text_round_trips(i in instance()) {
        prop_assert_eq!(parse_instance(&serialize_instance(&i)).unwrap(), i);
    }

    #[test]
    fn matching_text_round_trips((i, m, _) in with_matchings()) {
        prop_assert_eq!(parse_matching(&serialize_matching(&m, &i), &i).unwrap(), m);
    }

    #[test]
    fn family_text_round_trips((a, b, _) in single_agent_pair()) {
        let fam = InstanceFamily::new(vec![a, b]).unwrap();
        prop_assert_eq!(parse_family(&serialize_family(&fam)).unwrap(), fam);
    }

    #[test]
    fn margin_is_antisymmetric((i, a, b) in with_matchings()) {
        prop_assert_eq!(popularity_margin(&i, &a, &b), -popularity_margin(&i, &b, &a));
        prop_assert_eq!(popularity_margin(&i, &a, &a), 0);
    }

    #[test]
    fn fractional_margin_extends_margin((i, a, b) in with_matchings()) {
        let got = fractional_margin(&i, &FractionalMatching::from_matching(&a), &b);
        prop_assert_eq!(got, BigRational::from_integer(popularity_margin(&i, &a, &b).into()));
    }

    #[test]
    fn diff_is_symmetric((a, b, x) in single_agent_pair()) {
        let ab = diff_instances(&a, &b).unwrap();
        let ba = diff_instances(&b, &a).unwrap();
        prop_assert_eq!(&ab.changed, &ba.changed);
        prop_assert_eq!(&ab.swap_distance, &ba.swap_distance);
        prop_assert_eq!(&ab.added_edges, &ba.removed_edges);
        prop_assert_eq!(ab.swaps_only, ba.swaps_only);
        prop_assert_eq!(ab.changed, vec![x]);
    }

    #[test]
    fn stable_is_popular_and_dominant_is_dominant(i in instance()) {
        prop_assert!(is_popular(&i, &gale_shapley(&i)));
        let d = dominant_matching(&i);
        prop_assert!(is_dominant(&i, &d));
        prop_assert!(d.len() >= gale_shapley(&i).len());
    }

    #[test]
    fn certificates_are_sound((i, m, _) in with_matchings()) {
        match popularity_certificate(&i, &m) {
            Some(c) => {
                let better = c.improving_matching(&m);
                prop_assert!(better.is_valid_for(&i));
                prop_assert!(popularity_margin(&i, &better, &m) > 0);
            }
            None => prop_assert!(is_popular(&i, &m)),
        }
    }

    #[test]
    fn strong_implies_popular(i in instance()) {
        let c = oracle::classify(&i, &OracleConfig::default()).unwrap();
        prop_assert!(c.strong.len() <= 1);
        for k in &c.strong {
            prop_assert!(c.popular.contains(k));
        }
        for k in &c.dominant {
            prop_assert!(c.popular.contains(k));
        }
    }

    #[test]
    fn hybrid_orders_are_permutations((a, b, x) in single_agent_pair(), pick in any::<usize>()) {
        let fam = InstanceFamily::new(vec![a.clone(), b.clone()]).unwrap();
        let edges: Vec<_> = a.edges().into_iter().filter(|e| e.contains(x)).collect();
        let e = edges[pick % edges.len()];
        let y = e.other(x).unwrap().index;
        let h = hybrid_instance(&fam, x, e).unwrap();
        let mut sorted = h.order.clone();
        sorted.sort_unstable();
        let mut neighbors = a.prefs(x).to_vec();
        neighbors.sort_unstable();
        prop_assert_eq!(sorted, neighbors);
        // above y: exactly what x ranks above y in some instance
        let pos = h.order.iter().position(|&z| z == y).unwrap();
        for &z in a.prefs(x) {
            let above = [&a, &b].iter().any(|i| i.rank(x, z) < i.rank(x, y));
            let placed = h.order.iter().position(|&t| t == z).unwrap();
            prop_assert_eq!(above, placed < pos);
        }
        // every other agent keeps its first-instance list
        for other in a.agents().filter(|&o| o != x) {
            prop_assert_eq!(h.instance.prefs(other), a.prefs(other));
        }
    }
}
