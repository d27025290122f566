mod common;

use common::{overlapping_cells, overlaps_away_from, s};
use ifs_core::system::touch_point;
use ifs_core::{
    build_spqr, certify_all_pairs, Address, CertifyConfig, IFSParams, IFSystem, Interval, PairStatus, Scalar, Word,
};

fn system(q: Scalar) -> IFSystem {
    build_spqr(&IFSParams::paper(s(1, 40), q, s(1, 45)).unwrap())
}

/// Brute-force refinement of one hull pair: splits the wider word until the
/// hulls separate, both contain `h`, or `budget` splits are used up.
fn separates(sys: &IFSystem, u: &Word, v: &Word, budget: usize, h: &Scalar) -> bool {
    let (hu, hv) = (sys.cylinder(u).unwrap(), sys.cylinder(v).unwrap());
    if !hu.intersects(&hv) || (hu.contains(h) && hv.contains(h)) {
        return true;
    }
    if budget == 0 {
        return false;
    }
    (1..=6u8).all(|k| {
        if hu.width() >= hv.width() {
            separates(sys, &u.child(k), v, budget - 1, h)
        } else {
            separates(sys, u, &v.child(k), budget - 1, h)
        }
    })
}

fn pi(sys: &IFSystem, pre: &[u8], period: &[u8]) -> Scalar {
    sys.exact_point(&Address::new(Word::from_symbols(pre.to_vec()), Word::from_symbols(period.to_vec())).unwrap())
        .unwrap()
}

#[test]
fn companion_triple_certifies_and_oracle_agrees() {
    let sys = system(s(1, 52));
    let cert = certify_all_pairs(
        &IFSParams::paper(s(1, 40), s(1, 52), s(1, 45)).unwrap(),
        &CertifyConfig::new(s(1, 1_000_000_000_000)),
    )
    .unwrap();
    assert!(cert.unique_one_point);
    assert_eq!(cert.pairs.iter().filter(|p| p.status.is_disjoint()).count(), 14);
    assert_eq!(
        cert.pair(3, 4).unwrap().status,
        PairStatus::CertifiedTouchPoint { at: touch_point() }
    );
    // Depth-6 overlaps away from h are only near-misses that split apart deeper.
    let h = touch_point();
    let leftovers = overlaps_away_from(&sys, 6, &h);
    for o in &leftovers {
        assert_eq!((o.w1.first(), o.w2.first()), (Some(3), Some(4)), "{} {}", o.w1, o.w2);
        assert!(separates(&sys, &o.w1, &o.w2, 8, &h), "{} / {} stays overlapping", o.w1, o.w2);
    }
}

#[test]
fn headline_triple_has_a_second_common_point() {
    let sys = system(s(1, 50));
    // π(3·2·6^∞) = S_3 S_2(1) and π(4·5·1^∞) = S_4 S_5(0) both equal h − 1/225.
    let x = pi(&sys, &[3, 2], &[6]);
    let y = pi(&sys, &[4, 5], &[1]);
    assert_eq!(x, y);
    assert_eq!(x, touch_point() - s(1, 225));
    let h = touch_point();
    let off_h = overlaps_away_from(&sys, 6, &h);
    assert!(off_h.iter().any(|o| o.common == Interval::point(s(119, 225))));
    let cert = certify_all_pairs(
        &IFSParams::paper(s(1, 40), s(1, 50), s(1, 45)).unwrap(),
        &CertifyConfig::new(s(1, 1_000_000_000_000)),
    )
    .unwrap();
    assert!(!cert.unique_one_point);
    assert_eq!(
        cert.pair(3, 4).unwrap().status,
        PairStatus::OverlapWitness {
            w1: "32".parse().unwrap(),
            w2: "45".parse().unwrap()
        }
    );
}

#[test]
fn depth_one_hulls_meet_only_at_3_and_4() {
    // S_3[0,1] = [h − q, h] and S_4[0,1] = [h − r, h] share `[h − min(q, r), h]`.
    let sys = system(s(1, 52));
    let hits = overlapping_cells(&sys, 1);
    assert_eq!(hits.len(), 1);
    let o = &hits[0];
    assert_eq!((o.w1.first(), o.w2.first()), (Some(3), Some(4)));
    assert_eq!(o.common, Interval::new(touch_point() - s(1, 52), touch_point()).unwrap());
    assert!(overlaps_away_from(&sys, 1, &touch_point()).is_empty());
}

#[test]
fn certified_pairs_are_confirmed_by_brute_force() {
    let h = touch_point();
    for q in [s(1, 52), s(1, 58), s(1, 66), s(1, 77)] {
        let params = IFSParams::paper(s(1, 40), q.clone(), s(1, 45)).unwrap();
        let cert = certify_all_pairs(&params, &CertifyConfig::new(s(1, 100_000_000))).unwrap();
        let sys = build_spqr(&params);
        for o in overlaps_away_from(&sys, 4, &h) {
            let pair = (o.w1.first().unwrap(), o.w2.first().unwrap());
            let status = &cert.pair(pair.0, pair.1).unwrap().status;
            if matches!(status, PairStatus::CertifiedDisjoint | PairStatus::CertifiedTouchPoint { .. }) {
                assert!(separates(&sys, &o.w1, &o.w2, 10, &h), "q={q}: {} / {}", o.w1, o.w2);
            }
        }
    }
}

#[test]
fn reported_witnesses_are_genuine() {
    // Each witness either names coincident maps or hulls meeting at one
    // endpoint, which is a point of K because 0 and 1 are.
    for k in [45, 46, 48, 50, 53, 60, 75] {
        let params = IFSParams::paper(s(1, 40), s(1, k), s(1, 45)).unwrap();
        let cert = certify_all_pairs(&params, &CertifyConfig::new(s(1, 1_000_000_000_000))).unwrap();
        let Some((w1, w2)) = cert.witness() else { continue };
        let sys = build_spqr(&params);
        let (f1, f2) = (sys.word_map(w1).unwrap(), sys.word_map(w2).unwrap());
        let (c1, c2) = (sys.cylinder(w1).unwrap(), sys.cylinder(w2).unwrap());
        assert!(f1 == f2 || c1.touch_point(&c2).is_some(), "q=1/{k}: {w1} {w2}");
        assert!(sys.endpoints_in_attractor());
    }
}
