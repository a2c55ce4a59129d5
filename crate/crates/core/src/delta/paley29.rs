//! The ten-row subsystem that pins down the threshold of the Paley system on
//! 29 points, and the class weights that meet it.

use std::collections::BTreeMap;

use crate::linarith::{Interval, ParamPoly, ParamSystem};
use crate::rational::Rational;

const VARS: [usize; 10] = [1, 3, 4, 5, 7, 8, 9, 10, 11, 14];

fn idx(class: usize) -> usize {
    VARS.iter().position(|&c| c == class).expect("class in the subsystem")
}

/// Homogeneous rows over `w1, w3, w4, w5, w7, w8, w9, w10, w11, w14` (in
/// that variable order).
pub fn paley29_reduced_subsystem(interval: Interval) -> ParamSystem {
    let names = VARS.iter().map(|c| format!("w{c}")).collect();
    let mut sys = ParamSystem::new(names, interval).expect("nonempty interval");
    let t = ParamPoly::t();
    let c = |k: i64| ParamPoly::constant(k);
    let stretch: [(usize, i64, usize); 5] = [(1, 3, 3), (4, 2, 8), (5, 2, 10), (9, 2, 11), (7, 2, 14)];
    for (letter, count, target) in stretch {
        sys.push_sparse(
            &[(idx(letter), c(count)), (idx(target), -&t)],
            ParamPoly::zero(),
            format!("path w{target}"),
        );
    }
    let tri: [(usize, usize, usize); 5] = [(3, 1, 4), (8, 1, 9), (10, 1, 9), (11, 4, 7), (14, 5, 9)];
    for (s, a, b) in tri {
        sys.push_sparse(
            &[(idx(s), c(1)), (idx(a), c(-1)), (idx(b), c(-1))],
            ParamPoly::zero(),
            format!("tri w{s}<=w{a}+w{b}"),
        );
    }
    sys
}

/// Variable indices in elimination order: w3, w8, w10, w11, w14, w7, w4, w5, w1.
pub fn paley29_elimination_order() -> Vec<usize> {
    [3, 8, 10, 11, 14, 7, 4, 5, 1].iter().map(|&c| idx(c)).collect()
}

/// Index of `w9`, the variable left after elimination.
pub fn paley29_keep() -> usize {
    idx(9)
}

/// Class weights `w1..w14` as functions of `r`; at the threshold root they
/// form a metric meeting the stretch bound `r`.
pub fn paley29_weights(r: &Rational) -> BTreeMap<usize, Rational> {
    let k = |v: i64| Rational::from_integer(v.into());
    let r2 = r * r;
    let a = r * k(3) - &r2;
    let b = k(6) - r * k(2) - &r2;
    let c = k(6) - r * k(2);
    let d = k(6) + r - &r2 * k(2);
    let mut w = BTreeMap::new();
    w.insert(1, r2.clone());
    w.insert(2, r * k(2));
    w.insert(3, r * k(3));
    w.insert(4, a.clone());
    w.insert(5, a);
    for cls in [6, 7, 9] {
        w.insert(cls, b.clone());
    }
    w.insert(8, c.clone());
    w.insert(10, c);
    for cls in [11, 12, 14] {
        w.insert(cls, d.clone());
    }
    w.insert(13, k(6) + r - &r2 * k(3));
    w
}
