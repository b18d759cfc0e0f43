//! Seeded random instances for tests and experiments.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{AgentId, Edge, Instance};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Each worker–firm pair is an edge with probability `density`; every agent
/// orders its neighbors uniformly at random. Labels are `w1..`, `f1..`.
pub fn random_instance<R: Rng>(rng: &mut R, workers: usize, firms: usize, density: f64) -> Instance {
    let mut worker_prefs = vec![Vec::new(); workers];
    let mut firm_prefs = vec![Vec::new(); firms];
    for (w, wp) in worker_prefs.iter_mut().enumerate() {
        for (f, fp) in firm_prefs.iter_mut().enumerate() {
            if rng.gen_bool(density.clamp(0.0, 1.0)) {
                wp.push(f);
                fp.push(w);
            }
        }
    }
    for l in worker_prefs.iter_mut().chain(firm_prefs.iter_mut()) {
        l.shuffle(rng);
    }
    Instance::new(
        (1..=workers).map(|k| format!("w{k}")).collect(),
        (1..=firms).map(|k| format!("f{k}")).collect(),
        worker_prefs,
        firm_prefs,
    )
    .expect("symmetric by construction")
}

/// A uniformly random reordering of `agent`'s list that differs from the
/// current one whenever the agent has at least two neighbors.
pub fn perturb_agent<R: Rng>(rng: &mut R, i: &Instance, agent: AgentId) -> Instance {
    let current = i.prefs(agent).to_vec();
    let mut order = current.clone();
    if current.len() >= 2 {
        while order == current {
            order.shuffle(rng);
        }
    }
    i.with_reordered(agent, order).expect("same neighbor set")
}

/// One adjacent transposition in `agent`'s list at a random position.
pub fn random_swap<R: Rng>(rng: &mut R, i: &Instance, agent: AgentId) -> Instance {
    let mut order = i.prefs(agent).to_vec();
    if order.len() >= 2 {
        let k = rng.gen_range(0..order.len() - 1);
        order.swap(k, k + 1);
    }
    i.with_reordered(agent, order).expect("same neighbor set")
}

/// A pair over one graph where exactly one agent (with two or more
/// neighbors) reorders its list. Side sizes are drawn from `1..=max_side`.
/// Returns `None` if the drawn graph has no agent of degree two.
pub fn random_single_agent_pair<R: Rng>(
    rng: &mut R,
    max_side: usize,
    density: f64,
) -> Option<(Instance, Instance, AgentId)> {
    let nw = rng.gen_range(1..=max_side);
    let nf = rng.gen_range(1..=max_side);
    let a = random_instance(rng, nw, nf, density);
    let candidates: Vec<AgentId> = a.agents().filter(|&x| a.degree(x) >= 2).collect();
    let x = *candidates.choose(rng)?;
    let b = perturb_agent(rng, &a, x);
    Some((a, b, x))
}

/// Removes each edge independently with probability `drop`.
pub fn drop_edges<R: Rng>(rng: &mut R, i: &Instance, drop: f64) -> Instance {
    let removed: Vec<Edge> = i
        .edges()
        .into_iter()
        .filter(|_| rng.gen_bool(drop.clamp(0.0, 1.0)))
        .collect();
    i.without_edges(&removed).expect("edges of the instance")
}

/// A source instance for the forbidden-edge reduction, with the forbidden
/// edge `{a, b}` and a forced agent `d != a`. Agent `a` is a leaf at `b`, `b`
/// has one other neighbor `c`, and `b`, `c` rank each other first. The rest
/// is random with at most `max_side` agents per side in total (`max_side >= 2`).
/// The leaf is a worker or a firm with equal probability.
pub fn random_forbidden_edge_source<R: Rng>(
    rng: &mut R,
    max_side: usize,
    density: f64,
) -> (Instance, Edge, AgentId) {
    let max_side = max_side.max(2);
    let nl = rng.gen_range(1..max_side);
    let nr = rng.gen_range(1..max_side);
    let core = random_instance(rng, nl, nr, density);
    // Left agents are on the leaf's side.
    let leaf_is_worker = rng.gen_bool(0.5);
    let left: Vec<String> = (1..=nl + 1).map(|k| format!("{}{k}", if leaf_is_worker { "w" } else { "f" })).collect();
    let right: Vec<String> = (1..=nr + 1).map(|k| format!("{}{k}", if leaf_is_worker { "f" } else { "w" })).collect();
    let c = rng.gen_range(0..nl);
    let mut b = Instance::builder();
    let (a_label, b_label) = (left[nl].clone(), right[nr].clone());
    for (w, label) in left.iter().enumerate().take(nl) {
        let mut order: Vec<String> = core.worker_prefs(w).iter().map(|&f| right[f].clone()).collect();
        if w == c {
            order.insert(0, b_label.clone());
        }
        b.prefs(label.clone(), order);
    }
    for (f, label) in right.iter().enumerate().take(nr) {
        b.prefs(label.clone(), core.firm_prefs(f).iter().map(|&w| left[w].clone()));
    }
    b.prefs(a_label.clone(), [b_label.clone()]);
    b.prefs(b_label.clone(), [left[c].clone(), a_label.clone()]);
    if leaf_is_worker {
        b.workers(left).firms(right);
    } else {
        b.workers(right).firms(left);
    }
    let i = b.build().expect("symmetric by construction");
    let e = i.edge_by_labels(&a_label, &b_label).expect("edge was added");
    let a = i.agent(&a_label).expect("label exists");
    let others: Vec<AgentId> = i.agents().filter(|&x| x != a).collect();
    let d = *others.choose(rng).expect("at least three agents");
    (i, e, d)
}
