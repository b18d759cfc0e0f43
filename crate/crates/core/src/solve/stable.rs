use crate::model::{Edge, Instance, Matching};

/// Worker-proposing deferred acceptance.
pub fn gale_shapley(i: &Instance) -> Matching {
    let mut m = Matching::empty_for(i);
    let mut next = vec![0usize; i.num_workers()];
    let mut free: Vec<usize> = (0..i.num_workers()).rev().collect();
    while let Some(w) = free.pop() {
        let prefs = i.worker_prefs(w);
        while next[w] < prefs.len() {
            let f = prefs[next[w]];
            next[w] += 1;
            match m.firm_mate(f) {
                None => {
                    m.insert(Edge::new(w, f)).expect("both free");
                    break;
                }
                Some(v) if i.firm_rank(f, w) < i.firm_rank(f, v) => {
                    m.remove(Edge::new(v, f));
                    m.insert(Edge::new(w, f)).expect("both free");
                    free.push(v);
                    break;
                }
                Some(_) => {}
            }
        }
    }
    m
}

/// A dominant matching: deferred acceptance where a worker rejected by all
/// its neighbors proposes a second time at a higher level, and firms prefer
/// any higher-level proposal to every lower-level one.
pub fn dominant_matching(i: &Instance) -> Matching {
    let nw = i.num_workers();
    let mut m = Matching::empty_for(i);
    let mut level = vec![0u8; nw];
    let mut next = vec![0usize; nw];
    let mut free: Vec<usize> = (0..nw).rev().collect();
    // smaller key wins at a firm
    let key = |w: usize, lvl: u8, f: usize| (std::cmp::Reverse(lvl), i.firm_rank(f, w));
    while let Some(w) = free.pop() {
        let prefs = i.worker_prefs(w);
        loop {
            if next[w] == prefs.len() {
                if level[w] == 0 && !prefs.is_empty() {
                    level[w] = 1;
                    next[w] = 0;
                    continue;
                }
                break;
            }
            let f = prefs[next[w]];
            next[w] += 1;
            match m.firm_mate(f) {
                None => {
                    m.insert(Edge::new(w, f)).expect("both free");
                    break;
                }
                Some(v) if key(w, level[w], f) < key(v, level[v], f) => {
                    m.remove(Edge::new(v, f));
                    m.insert(Edge::new(w, f)).expect("both free");
                    free.push(v);
                    break;
                }
                Some(_) => {}
            }
        }
    }
    m
}
