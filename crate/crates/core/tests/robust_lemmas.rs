//! Hybrid instances against brute force on random single-agent pairs.

use std::collections::BTreeSet;

use popmatch::generate::{random_single_agent_pair, seeded};
use popmatch::oracle::{self, OracleConfig, SetKind};
use popmatch::robust::{hybrid_instance, robust_matching, RobustMode};
use popmatch::{InstanceFamily, Matching};
use rand::Rng;

fn pairs(seed: u64, count: usize) -> Vec<(InstanceFamily, popmatch::AgentId)> {
    let mut rng = seeded(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let p = rng.gen_range(0.4..=1.0);
        if let Some((a, b, x)) = random_single_agent_pair(&mut rng, 4, p) {
            out.push((InstanceFamily::new(vec![a, b]).unwrap(), x));
        }
    }
    out
}

#[test]
fn hybrid_sets_match_robust_sets_per_edge() {
    let cfg = OracleConfig::default();
    for (fam, x) in pairs(31, 120) {
        for kind in [SetKind::Popular, SetKind::Dominant] {
            let robust: BTreeSet<Matching> = oracle::robust_set(&fam, kind, &cfg).unwrap().into_iter().collect();
            for e in fam.first().edges().into_iter().filter(|e| e.contains(x)) {
                let h = hybrid_instance(&fam, x, e).unwrap();
                let in_h: BTreeSet<Matching> = oracle::set(&h.instance, kind, &cfg)
                    .unwrap()
                    .into_iter()
                    .filter(|m| m.contains(e))
                    .collect();
                let want: BTreeSet<Matching> = robust.iter().filter(|m| m.contains(e)).cloned().collect();
                assert_eq!(in_h, want, "{kind:?} {e:?} {fam:?}");
            }
        }
    }
}

#[test]
fn algorithm_answers_match_oracle() {
    let cfg = OracleConfig::default();
    for (fam, _) in pairs(32, 150) {
        for (mode, kind) in [(RobustMode::Popular, SetKind::Popular), (RobustMode::Dominant, SetKind::Dominant)] {
            let robust = oracle::robust_set(&fam, kind, &cfg).unwrap();
            match robust_matching(&fam, mode).unwrap() {
                Some(m) => assert!(robust.contains(&m), "{fam:?}"),
                None => assert!(robust.is_empty(), "{fam:?}"),
            }
        }
    }
}
