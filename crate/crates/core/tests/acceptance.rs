//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion, and exits non-zero if any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{overlaps_away_from, s};
use ifs_core::certify::certify_pair_34;
use ifs_core::dimension::{cover_sum, moran_dimension, subsystem_sequence, MoranProblem, RCoefficient};
use ifs_core::scan::{dmn_interval, reproduce_witness, scan_delta_mn, verify_displacement, verify_tech2, Classification};
use ifs_core::system::touch_point;
use ifs_core::wsp::{build_g, build_h, witness_search};
use ifs_core::{
    build_spqr, certify_all_pairs, AffineMap1D, Address, CertifyConfig, Error, IFSParams, IFSystem, PairStatus,
    Scalar, Word,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn paper(p: Scalar, q: Scalar, r: Scalar) -> IFSParams {
    IFSParams::paper(p, q, r).expect("paper-mode triple")
}

fn headline() -> IFSParams {
    paper(s(1, 40), s(1, 50), s(1, 45))
}

/// `H_m(x) = h − p^m q (1 − a) + p^m q r x`.
fn h_oracle(p: &Scalar, q: &Scalar, r: &Scalar, m: usize) -> AffineMap1D {
    let (h, a) = (s(8, 15), s(1, 5));
    let pmq = p.pow(m as i32) * q;
    AffineMap1D::new(&pmq * r, h - &pmq * (Scalar::one() - a))
}

/// `G_n(x) = h − r^(n+1) (1 − a) + r^(n+2) x`.
fn g_oracle(r: &Scalar, n: usize) -> AffineMap1D {
    let (h, a) = (s(8, 15), s(1, 5));
    AffineMap1D::new(r.pow(n as i32 + 2), h - r.pow(n as i32 + 1) * (Scalar::one() - a))
}

fn random_paper_ratio(rng: &mut ChaCha8Rng) -> Scalar {
    // Uniform rational in (0, 1/36) with denominator 36·10^4.
    s(rng.gen_range(1..10_000), 360_000)
}

fn closed_forms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut checked = 0;
    for _ in 0..5 {
        let (p, q, r) = (random_paper_ratio(&mut rng), random_paper_ratio(&mut rng), random_paper_ratio(&mut rng));
        let sys = build_spqr(&paper(p.clone(), q.clone(), r.clone()));
        for k in 0..=10 {
            let (h, g) = (build_h(&sys, k).map_err(|e| e.to_string())?, build_g(&sys, k).map_err(|e| e.to_string())?);
            ensure(h == h_oracle(&p, &q, &r, k), format!("H_{k} differs at ({p}, {q}, {r})"))?;
            ensure(g == g_oracle(&r, k), format!("G_{k} differs at ({p}, {q}, {r})"))?;
            checked += 2;
        }
    }
    Ok(format!("{checked} compositions coefficient-equal over 5 seeded triples"))
}

fn moran_fixtures() -> Check {
    let tol = 1e-12;
    let half = moran_dimension(&MoranProblem::new(vec![0.5, 0.5]).unwrap(), tol).map_err(|e| e.to_string())?;
    ensure((half - 1.0).abs() < 1e-12, format!("ratio 1/2 gives {half}"))?;
    let third = moran_dimension(&MoranProblem::new(vec![1.0 / 3.0; 2]).unwrap(), tol).map_err(|e| e.to_string())?;
    let cantor = 2f64.ln() / 3f64.ln();
    ensure((third - cantor).abs() < 1e-12, format!("ratio 1/3 gives {third}"))?;
    let mut notes = Vec::new();
    for c in [RCoefficient::Two, RCoefficient::Four] {
        let seq = subsystem_sequence(&headline(), 20, c, tol).map_err(|e| e.to_string())?;
        ensure(seq.strictly_increasing(), format!("c = {}: d_n not strictly increasing", c.value()))?;
        let d20 = &seq.entries[20];
        ensure(d20.gap > 0.0 && d20.gap < 1e-6, format!("c = {}: d* − d_20 = {:e}", c.value(), d20.gap))?;
        ensure(
            (seq.limit - d20.dimension).abs() < 1e-6,
            format!("c = {}: |d_20 − d*| = {:e}", c.value(), (seq.limit - d20.dimension).abs()),
        )?;
        notes.push(format!("c={}: d*={:.12} d*-d_20={:.3e}", c.value(), seq.limit, d20.gap));
    }
    Ok(format!("ratio 1/2 → {half}, ratio 1/3 → {third:.15}; {}", notes.join("; ")))
}

fn certification_run() -> Check {
    let params = headline();
    let sys = build_spqr(&params);
    let h = touch_point();
    // The oracle is built first and stands on its own.
    let oracle = overlaps_away_from(&sys, 6, &h);
    let cert = certify_all_pairs(&params, &CertifyConfig::new(s(1, 1_000_000_000_000))).map_err(|e| e.to_string())?;
    let disjoint = cert.pairs.iter().filter(|p| p.status.is_disjoint()).count();
    let touch = cert.pair(3, 4).map(|p| &p.status);
    let oracle_note = match oracle.first() {
        None => "depth-6 oracle: no overlap away from h".to_string(),
        Some(o) => format!(
            "depth-6 oracle: {} hull pairs meet away from h, first {}/{} at {}",
            oracle.len(),
            o.w1,
            o.w2,
            o.common
        ),
    };
    // Agreement: the certifier's witness must be one the oracle also sees.
    let agree = match cert.witness() {
        Some((w1, w2)) => oracle
            .iter()
            .any(|o| o.w1.prefix(w1.len()) == *w1 && o.w2.prefix(w2.len()) == *w2),
        None => oracle.is_empty(),
    };
    ensure(agree, format!("certifier and oracle disagree; {oracle_note}"))?;
    let expected = disjoint == 14 && matches!(touch, Some(PairStatus::CertifiedTouchPoint { at }) if *at == h);
    ensure(oracle.is_empty(), format!("expected a unique touch point; {oracle_note}; certifier (3,4): {touch:?}"))?;
    ensure(expected, format!("{disjoint} disjoint pairs, (3,4): {touch:?}"))?;
    Ok(format!("14 disjoint + touch point 8/15; {oracle_note}"))
}

fn resonance_witness() -> Check {
    let (p, r) = (s(1, 40), s(1, 45));
    // Coefficients of H_1 and G_1 agree iff p·q = r².
    let q = r.pow(2) / &p;
    ensure(q == s(40, 2025), format!("constructed q = {q}"))?;
    let sys = build_spqr(&paper(p.clone(), q.clone(), r.clone()));
    let (h1, g1) = (build_h(&sys, 1).unwrap(), build_g(&sys, 1).unwrap());
    ensure(h1 == g1, "H_1 ≠ G_1 at the constructed q")?;
    let named = (Word::from_symbols(vec![3, 1, 5]), Word::from_symbols(vec![4, 6, 2]));
    ensure(sys.word_map(&named.0).unwrap() == sys.word_map(&named.1).unwrap(), "S_315 ≠ S_462")?;
    let rep = certify_pair_34(&sys, &CertifyConfig::new(s(1, 1_000_000_000_000))).map_err(|e| e.to_string())?;
    let PairStatus::OverlapWitness { w1, w2 } = &rep.status else {
        return Err(format!("expected an overlap witness, got {:?}", rep.status));
    };
    let (f1, f2) = (sys.word_map(w1).unwrap(), sys.word_map(w2).unwrap());
    ensure(f1 == f2, format!("witness {w1}/{w2} does not coincide exactly"))?;
    ensure(
        w1.prefix(2) == Word::from_symbols(vec![3, 1]) && w2.prefix(2) == Word::from_symbols(vec![4, 6]),
        format!("witness {w1}/{w2} is not on the (1, 1) branch"),
    )?;
    Ok(format!("q = {q}: H_1 = G_1 (315 ≡ 462); certifier names coincident pair {w1} ≡ {w2}"))
}

fn wsp_decay() -> Check {
    let sys = build_spqr(&headline());
    let short = witness_search(&sys, 1e-300, 20).map_err(|e| e.to_string())?;
    let long = witness_search(&sys, 1e-300, 200).map_err(|e| e.to_string())?;
    let (b20, b200) = (short.best().unwrap(), long.best().unwrap());
    ensure(long.best_so_far.windows(2).all(|w| w[1] <= w[0]), "best-so-far increased")?;
    ensure(
        b200.ratio_defect < b20.ratio_defect,
        format!("best over m ≤ 200 ({:e}) not below m ≤ 20 ({:e})", b200.ratio_defect_f64, b20.ratio_defect_f64),
    )?;
    Ok(format!(
        "m ≤ 20: {:.3e} at (m,n)=({},{}); m ≤ 200: {:.3e} at ({},{})",
        b20.ratio_defect_f64, b20.m, b20.n, b200.ratio_defect_f64, b200.m, b200.n
    ))
}

fn displacement_bound() -> Check {
    let (p, q, r) = (s(1, 40), s(1, 50), s(1, 45));
    let q2 = &q + s(1, 1_000_000);
    let rep = verify_displacement(&p, &q, &q2, &r, 1000, 12, 0x5eed_0006).map_err(|e| e.to_string())?;
    ensure(rep.violations == 0, format!("{} violations of δ/(1−R) + slack", rep.violations))?;
    ensure(rep.max_ratio_to_36_35 <= 1.0, format!("ratio to 36δ/35 is {}", rep.max_ratio_to_36_35))?;
    // 3·5·1^∞ moves by exactly δ(1 − a); 3·1^∞ is h in both systems.
    let (a, b) = (build_spqr(&paper(p.clone(), q.clone(), r.clone())), build_spqr(&paper(p, q2, r)));
    let at = |w: Vec<u8>, sys: &IFSystem| sys.exact_point(&Address::new(Word::from_symbols(w), Word::symbol(1)).unwrap()).unwrap();
    ensure((at(vec![3, 5], &a) - at(vec![3, 5], &b)).abs() == &rep.delta * s(4, 5), "3·5·1^∞ displacement")?;
    ensure(at(vec![3], &a) == at(vec![3], &b), "3·1^∞ moved")?;
    Ok(format!(
        "1000 addresses, 0 violations; max |π−π'|/(δ/(1−R)) = {:.6}, max/(36δ/35) = {:.6}",
        rep.max_ratio_to_bound, rep.max_ratio_to_36_35
    ))
}

fn anti_lipschitz_margin() -> Check {
    let (p, r) = (s(1, 40), s(1, 45));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    // D_10 is empty for these p, r: a·r²/p ≥ r.
    ensure(dmn_interval(&p, &r, 1, 0).is_none(), "D_10 unexpectedly non-empty")?;
    let empty = verify_tech2(&p, &r, 1, 0, &s(1, 50), &s(1, 60), 1, 8, 0);
    ensure(matches!(empty, Err(Error::OutsideDomain { .. })), "verifier accepted q outside empty D_10")?;
    let mut configs = 0;
    let mut notes = Vec::new();
    for (m, n) in [(0usize, 0usize), (0, 1)] {
        let d = dmn_interval(&p, &r, m, n).ok_or("D_mn unexpectedly empty")?;
        let mut worst = f64::INFINITY;
        let mut worst_trunc = f64::INFINITY;
        for round in 0..10 {
            let pick = |rng: &mut ChaCha8Rng| d.lo() + d.width() * s(rng.gen_range(1..65_536), 65_536);
            let (q, q2) = (pick(&mut rng), pick(&mut rng));
            if q == q2 {
                continue;
            }
            let rep = verify_tech2(&p, &r, m, n, &q, &q2, 50, 8, 0x5eed_0700 + round).map_err(|e| e.to_string())?;
            ensure(rep.violations == 0, format!("(m,n)=({m},{n}) q={q} q'={q2}: {} violations", rep.violations))?;
            ensure(rep.min_ratio > rep.constant, "exact ratio at or below p^m/35")?;
            worst = worst.min(rep.min_ratio_f64);
            worst_trunc = worst_trunc.min(rep.min_truncated_ratio_f64);
            configs += rep.samples;
        }
        notes.push(format!(
            "({m},{n}): min |ΔΦ|/|q−q'| = {worst:.5} (truncated {worst_trunc:.5}) vs p^m/35 = {:.5}",
            (p.pow(m as i32) / s(35, 1)).to_f64()
        ));
    }
    ensure(configs >= 1000, format!("only {configs} configurations"))?;
    Ok(format!("{configs} configurations, D_10 empty; {}", notes.join("; ")))
}

fn cover_sum_identity() -> Check {
    let cantor = IFSystem::new(vec![AffineMap1D::new(s(1, 3), s(0, 1)), AffineMap1D::new(s(1, 3), s(2, 3))]).unwrap();
    let d = 2f64.ln() / 3f64.ln();
    for k in 1..=10 {
        let sum = cover_sum(&cantor, d, k).map_err(|e| e.to_string())?;
        ensure((sum - 1.0).abs() < 1e-9, format!("Cantor depth {k}: {sum}"))?;
    }
    let sys = build_spqr(&headline());
    let ds = moran_dimension(&MoranProblem::from_system(&sys).unwrap(), 1e-12).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for k in 1..=8 {
        let sum = cover_sum(&sys, ds, k).map_err(|e| e.to_string())?;
        worst = worst.max((sum - 1.0).abs());
    }
    ensure(worst < 1e-9, format!("S_pqr cover sum drifts by {worst:e}"))?;
    Ok(format!("Cantor depths 1–10 and S_pqr depths 1–8 at d = {ds:.12}: max |sum − 1| = {worst:.2e}"))
}

fn scan_sanity() -> Check {
    let (p, r) = (s(1, 40), s(1, 45));
    let res = scan_delta_mn(&p, &r, 0, 0, 4096, 6).map_err(|e| e.to_string())?;
    let domain = res.domain.clone().ok_or("D_00 empty")?;
    ensure(res.entries.len() == 4096, "grid size")?;
    ensure(res.entries.iter().all(|e| domain.lo() < &e.q && &e.q < domain.hi()), "grid q outside D_00")?;
    ensure(res.bad_fraction < 0.5, format!("bad fraction {}", res.bad_fraction))?;
    for e in res.bad_entries() {
        let Classification::Intersecting { w1, w2 } = &e.class else { unreachable!() };
        let again = reproduce_witness(&p, &e.q, &r, 0, 0, 6, w1, w2).map_err(|e| e.to_string())?;
        ensure(again, format!("witness {w1}/{w2} at q = {} does not reproduce", e.q))?;
    }
    let bound = 2.0 * 6f64.ln() / 45f64.ln();
    ensure((res.dimension_bound - bound).abs() < 1e-12, "bound metadata")?;
    ensure((res.dimension_bound - 0.9413).abs() < 1e-4, "bound ≈ 0.9413")?;
    let slope = res.bad_box_dimension.as_ref().map(|b| b.slope);
    Ok(format!(
        "bad fraction {:.4} ({} of 4096), all witnesses reproduce, bound {:.5}, bad-set box estimate {}",
        res.bad_fraction,
        res.bad_count,
        res.dimension_bound,
        slope.map_or("n/a".into(), |s| format!("{s:.3}"))
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 closed-form compositions", closed_forms, Duration::from_secs(1)),
        ("2 Moran fixtures and subsystem sequence", moran_fixtures, Duration::from_secs(1)),
        ("3 certification of (1/40, 1/50, 1/45)", certification_run, Duration::from_secs(60)),
        ("4 resonance witness", resonance_witness, Duration::from_secs(5)),
        ("5 WSP defect decay", wsp_decay, Duration::from_secs(30)),
        ("6 displacement bound", displacement_bound, Duration::from_secs(10)),
        ("7 anti-Lipschitz margin", anti_lipschitz_margin, Duration::from_secs(30)),
        ("8 cover-sum identity", cover_sum_identity, Duration::from_secs(5)),
        ("9 scan sanity", scan_sanity, Duration::from_secs(300)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("took {elapsed:.2?}, budget {budget:?}; {detail}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  criterion {name} [{elapsed:.2?}]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name} [{elapsed:.2?}]: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
