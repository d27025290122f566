//! Independent oracle: enumerate a full depth-k cover and sweep it for
//! hull pairs with different first symbols that meet.

#![allow(dead_code)]

use ifs_core::{IFSystem, Interval, Scalar, Word};

pub fn s(n: i64, d: i64) -> Scalar {
    Scalar::new(n, d)
}

pub struct Overlap {
    pub w1: Word,
    pub w2: Word,
    pub hull1: Interval,
    pub hull2: Interval,
    pub common: Interval,
}

/// Every pair of depth-`depth` cylinders from distinct first-level pieces
/// whose closed hulls meet; `w1` has the smaller first symbol.
pub fn overlapping_cells(sys: &IFSystem, depth: usize) -> Vec<Overlap> {
    let mut cells: Vec<(Word, Interval)> = sys.cover(depth).unwrap().cells;
    cells.sort_by(|a, b| a.1.lo().cmp(b.1.lo()));
    let mut active: Vec<usize> = Vec::new();
    let mut hits = Vec::new();
    for k in 0..cells.len() {
        let lo = cells[k].1.lo().clone();
        active.retain(|&j| cells[j].1.hi() >= &lo);
        for &j in &active {
            let (a, b) = (&cells[j], &cells[k]);
            if a.0.first() != b.0.first() {
                let common = a.1.intersection(&b.1).expect("active hulls meet");
                let (x, y) = if a.0.first() < b.0.first() { (a, b) } else { (b, a) };
                hits.push(Overlap {
                    w1: x.0.clone(),
                    w2: y.0.clone(),
                    hull1: x.1.clone(),
                    hull2: y.1.clone(),
                    common,
                });
            }
        }
        active.push(k);
    }
    hits
}

/// Overlapping pairs other than those whose hulls both contain `h`.
pub fn overlaps_away_from(sys: &IFSystem, depth: usize, h: &Scalar) -> Vec<Overlap> {
    overlapping_cells(sys, depth)
        .into_iter()
        .filter(|o| !(o.hull1.contains(h) && o.hull2.contains(h)))
        .collect()
}
