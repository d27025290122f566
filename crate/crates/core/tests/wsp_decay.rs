mod common;

use common::s;
use ifs_core::wsp::witness_search;
use ifs_core::{build_spqr, IFSParams};

#[test]
fn defect_first_improves_past_m_300() {
    // p·q/r² = 81/80 makes (1, 1) an unusually close approach; the rotation
    // by log 40/log 45 next beats it at m = 324.
    let sys = build_spqr(&IFSParams::paper(s(1, 40), s(1, 50), s(1, 45)).unwrap());
    let short = witness_search(&sys, 1e-300, 20).unwrap();
    let long = witness_search(&sys, 1e-300, 600).unwrap();
    let (b20, b600) = (short.best().unwrap(), long.best().unwrap());
    assert_eq!((b20.m, b20.n), (1, 1));
    assert_eq!(b20.ratio_defect, s(1, 80));
    assert!(b600.ratio_defect < b20.ratio_defect);
    assert_eq!((b600.m, b600.n), (518, 502));
    let first_gain = long.best_so_far.iter().position(|&d| d < b20.ratio_defect_f64).unwrap();
    assert_eq!(first_gain, 324);
    assert!(long.best_so_far.windows(2).all(|w| w[1] <= w[0]));
}
