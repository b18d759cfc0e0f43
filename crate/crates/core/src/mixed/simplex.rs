//! Phase-one simplex over exact rationals.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

type Q = BigRational;

/// Finds `x >= 0` with `eq_rows · x = eq_rhs` and `ge_rows · x >= ge_rhs`,
/// or `None` if there is no such point. Bland's rule, so it terminates.
pub fn feasible_point(
    num_vars: usize,
    eq_rows: &[Vec<Q>],
    eq_rhs: &[Q],
    ge_rows: &[Vec<Q>],
    ge_rhs: &[Q],
) -> Option<Vec<Q>> {
    let m = eq_rows.len() + ge_rows.len();
    let slacks = ge_rows.len();
    // columns: x | slack | artificial | rhs
    let art0 = num_vars + slacks;
    let width = art0 + m + 1;
    let rhs = width - 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    for (r, row) in eq_rows.iter().chain(ge_rows).enumerate() {
        debug_assert_eq!(row.len(), num_vars);
        let mut line = vec![Q::zero(); width];
        line[..num_vars].clone_from_slice(row);
        if r >= eq_rows.len() {
            line[num_vars + r - eq_rows.len()] = -Q::one();
        }
        line[rhs] = if r < eq_rows.len() { eq_rhs[r].clone() } else { ge_rhs[r - eq_rows.len()].clone() };
        if line[rhs].is_negative() {
            for v in line.iter_mut() {
                *v = -v.clone();
            }
        }
        line[art0 + r] = Q::one();
        t.push(line);
    }
    let mut basis: Vec<usize> = (art0..art0 + m).collect();
    // Reduced costs for minimizing the sum of artificials.
    let mut obj = vec![Q::zero(); width];
    for line in &t {
        for (o, v) in obj.iter_mut().zip(line) {
            *o += v;
        }
    }
    for o in &mut obj[art0..art0 + m] {
        *o = Q::zero();
    }

    while let Some(enter) = (0..rhs).find(|&j| obj[j].is_positive()) {
        let mut leave: Option<(usize, Q)> = None;
        for (r, line) in t.iter().enumerate() {
            if !line[enter].is_positive() {
                continue;
            }
            let ratio = &line[rhs] / &line[enter];
            let better = match &leave {
                None => true,
                Some((l, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*l]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        let (p, _) = leave.expect("phase one is bounded below");
        let pivot = t[p][enter].clone();
        for v in t[p].iter_mut() {
            *v /= &pivot;
        }
        let prow = t[p].clone();
        for (r, line) in t.iter_mut().enumerate() {
            if r != p && !line[enter].is_zero() {
                let f = line[enter].clone();
                for (v, pv) in line.iter_mut().zip(&prow) {
                    if !pv.is_zero() {
                        *v -= &f * pv;
                    }
                }
            }
        }
        let f = obj[enter].clone();
        for (v, pv) in obj.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
        basis[p] = enter;
    }

    if obj[rhs].is_positive() {
        return None;
    }
    let mut x = vec![Q::zero(); num_vars];
    for (r, &b) in basis.iter().enumerate() {
        if b < num_vars {
            x[b] = t[r][rhs].clone();
        }
    }
    Some(x)
}
