//! Scale-bounded certification of the piece intersections of `S_pqr`.
//!
//! Pieces `K_i`, `K_j` other than `(3, 4)` are separated by refining the two
//! cylinder words until their hulls are disjoint. For `(3, 4)` the touch
//! point `h` sits in both hulls at every depth, so the pair is decomposed as
//!
//! ```text
//! K_3 = {h} ∪ ⋃_m S_3 S_1^m (⋃_{i≠1} K_i)
//! K_4 = {h} ∪ ⋃_n S_4 S_6^n (⋃_{j≠6} K_j)
//! ```
//!
//! and every branch `(3·1^m·i, 4·6^n·j)` whose scale is at least `ε` is
//! refined. A branch is cut when the distances of its two families from `h`
//! cannot interleave; in paper mode that is exactly the ratio test
//! `q·p^m / r^(n+1) ∉ [a, 1/a]`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::AffineMap1D;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::Scalar;
use crate::system::{build_spqr, IFSParams, IFSystem};
use crate::word::{Address, Word};

pub const DEFAULT_STEP_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PairStatus {
    CertifiedDisjoint,
    CertifiedTouchPoint { at: Scalar },
    OverlapWitness { w1: Word, w2: Word },
    UnknownBelowScale { eps: Scalar, unresolved: Vec<(Word, Word)> },
}

impl PairStatus {
    pub fn is_disjoint(&self) -> bool {
        matches!(self, PairStatus::CertifiedDisjoint)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifyConfig {
    pub eps: Scalar,
    /// Refinement nodes allowed per branch before giving up with an error.
    pub step_cap: usize,
}

impl CertifyConfig {
    pub fn new(eps: Scalar) -> Self {
        CertifyConfig {
            eps,
            step_cap: DEFAULT_STEP_CAP,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchStats {
    pub branches: usize,
    pub nodes: usize,
    /// Largest number of symbols appended to a branch's base words.
    pub max_depth: usize,
}

impl BranchStats {
    fn absorb(&mut self, other: &RefineStats) {
        self.branches += 1;
        self.nodes += other.nodes;
        self.max_depth = self.max_depth.max(other.max_depth);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub pair: (u8, u8),
    #[serde(flatten)]
    pub status: PairStatus,
    pub stats: BranchStats,
}

/// `(m, n)` bookkeeping of the touch-pair decomposition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchPlan {
    /// Pairs whose families overlap at hull level and are refined.
    pub surviving: Vec<(usize, usize)>,
    /// Pairs inside the enumeration window whose families are hull-disjoint.
    pub pruned: Vec<(usize, usize)>,
    pub max_m: usize,
    pub max_n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TouchPairReport {
    pub status: PairStatus,
    pub plan: BranchPlan,
    pub stats: BranchStats,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub params: IFSParams,
    pub eps: Scalar,
    pub step_cap: usize,
    pub unique_one_point: bool,
    pub pairs: Vec<PairReport>,
    pub touch_plan: BranchPlan,
}

impl Certificate {
    pub fn pair(&self, i: u8, j: u8) -> Option<&PairReport> {
        let key = (i.min(j), i.max(j));
        self.pairs.iter().find(|p| p.pair == key)
    }

    pub fn witness(&self) -> Option<(&Word, &Word)> {
        self.pairs.iter().find_map(|p| match &p.status {
            PairStatus::OverlapWitness { w1, w2 } => Some((w1, w2)),
            _ => None,
        })
    }
}

/// Outcome of refining a single word pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Refined {
    Disjoint,
    /// The two composed maps are equal, so the pieces coincide.
    Coincident(Word, Word),
    /// Hulls meet in one endpoint that is a point of both pieces.
    Touch(Word, Word, Scalar),
    /// Pairs still overlapping once both hulls are narrower than `ε`.
    Unresolved(Vec<(Word, Word)>),
    /// First pair still overlapping when both words hit the level cap.
    LevelCap(Word, Word),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct RefineStats {
    pub nodes: usize,
    pub max_depth: usize,
}

#[derive(Clone, Debug)]
pub(crate) enum Limit {
    Scale(Scalar),
    Levels(usize),
}

struct Node {
    u: Word,
    fu: AffineMap1D,
    v: Word,
    fv: AffineMap1D,
}

/// Depth-first refinement of `(u, v)`, always splitting the word whose hull
/// is wider.
pub(crate) fn refine_pair(
    sys: &IFSystem,
    u: &Word,
    v: &Word,
    limit: &Limit,
    step_cap: usize,
) -> Result<(Refined, RefineStats)> {
    u.check_alphabet(sys.alphabet())?;
    v.check_alphabet(sys.alphabet())?;
    let unit = Interval::unit();
    let endpoints_in_k = sys.endpoints_in_attractor();
    let (base_u, base_v) = (u.len(), v.len());
    let mut stats = RefineStats::default();
    let mut unresolved = Vec::new();
    let mut stack = vec![Node {
        u: u.clone(),
        fu: sys.word_map_unchecked(u),
        v: v.clone(),
        fv: sys.word_map_unchecked(v),
    }];

    while let Some(node) = stack.pop() {
        stats.nodes += 1;
        if stats.nodes > step_cap {
            return Err(Error::StepCapExceeded {
                cap: step_cap,
                w1: u.to_string(),
                w2: v.to_string(),
            });
        }
        let (du, dv) = (node.u.len() - base_u, node.v.len() - base_v);
        stats.max_depth = stats.max_depth.max(du).max(dv);
        if node.fu == node.fv {
            return Ok((Refined::Coincident(node.u, node.v), stats));
        }
        let hu = node.fu.image(&unit);
        let hv = node.fv.image(&unit);
        if !hu.intersects(&hv) {
            continue;
        }
        if endpoints_in_k {
            if let Some(x) = hu.touch_point(&hv) {
                return Ok((Refined::Touch(node.u, node.v, x), stats));
            }
        }
        let (wu, wv) = (hu.width(), hv.width());
        let split_u = match limit {
            Limit::Scale(eps) => {
                if wu.greater(&wv) < eps {
                    unresolved.push((node.u, node.v));
                    continue;
                }
                wu >= wv
            }
            Limit::Levels(cap) => match (du < *cap, dv < *cap) {
                (false, false) => return Ok((Refined::LevelCap(node.u, node.v), stats)),
                (true, false) => true,
                (false, true) => false,
                (true, true) => wu >= wv,
            },
        };
        for (k, g) in sys.maps().iter().enumerate().rev() {
            let s = k as u8 + 1;
            if split_u {
                stack.push(Node {
                    u: node.u.child(s),
                    fu: node.fu.compose(g),
                    v: node.v.clone(),
                    fv: node.fv.clone(),
                });
            } else {
                stack.push(Node {
                    u: node.u.clone(),
                    fu: node.fu.clone(),
                    v: node.v.child(s),
                    fv: node.fv.compose(g),
                });
            }
        }
    }
    if unresolved.is_empty() {
        Ok((Refined::Disjoint, stats))
    } else {
        Ok((Refined::Unresolved(unresolved), stats))
    }
}

/// Exact closed-hull comparison of two cylinders.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HullRelation {
    Disjoint,
    Overlapping,
}

pub fn hull_separation_check(sys: &IFSystem, w1: &Word, w2: &Word) -> Result<HullRelation> {
    let (a, b) = (sys.cylinder(w1)?, sys.cylinder(w2)?);
    Ok(if a.intersects(&b) {
        HullRelation::Overlapping
    } else {
        HullRelation::Disjoint
    })
}

/// Geometry of the six-map family needed by the touch-pair decomposition.
pub(crate) struct TouchGeometry {
    pub touch: Scalar,
    /// `|λ_3|`, `|λ_1|`, `|λ_4|`, `|λ_6|`.
    lam3: Scalar,
    lam1: Scalar,
    lam4: Scalar,
    lam6: Scalar,
    /// Hull of `⋃_{i≠1} S_i[0,1]` and of `⋃_{j≠6} S_j[0,1]`.
    left: Interval,
    right: Interval,
}

impl TouchGeometry {
    pub(crate) fn new(sys: &IFSystem) -> Result<Self> {
        if sys.alphabet() != 6 {
            return Err(Error::NotParametricShape(format!(
                "expected 6 maps, found {}",
                sys.alphabet()
            )));
        }
        let (zero, one) = (Scalar::zero(), Scalar::one());
        let unit = Interval::unit();
        for k in 1..=6u8 {
            let hull = sys.map(k)?.image(&unit);
            if !unit.contains_interval(&hull) {
                return Err(Error::HullAssumption {
                    word: k.to_string(),
                    interval: hull.to_string(),
                });
            }
        }
        let s1 = sys.map(1)?;
        let s6 = sys.map(6)?;
        if s1.apply(&zero) != zero || s6.apply(&one) != one {
            return Err(Error::NotParametricShape("S_1 must fix 0 and S_6 must fix 1".into()));
        }
        let touch = sys.map(3)?.apply(&zero);
        if sys.map(4)?.apply(&one) != touch {
            return Err(Error::NotParametricShape("S_3(0) and S_4(1) differ".into()));
        }
        let hull_of = |range: std::ops::RangeInclusive<u8>| -> Result<Interval> {
            let mut acc: Option<Interval> = None;
            for k in range {
                let iv = sys.map(k)?.image(&unit);
                acc = Some(match acc {
                    Some(a) => a.hull(&iv),
                    None => iv,
                });
            }
            Ok(acc.expect("nonempty range"))
        };
        let left = hull_of(2..=6)?;
        let right = hull_of(1..=5)?;
        if !left.lo().is_positive() || right.hi() >= &one {
            return Err(Error::NotParametricShape(
                "pieces other than K_1 (resp. K_6) reach 0 (resp. 1)".into(),
            ));
        }
        Ok(TouchGeometry {
            touch,
            lam3: sys.map(3)?.ratio().abs(),
            lam1: s1.ratio().abs(),
            lam4: sys.map(4)?.ratio().abs(),
            lam6: s6.ratio().abs(),
            left,
            right,
        })
    }

    /// Distance range from `h` of the family `S_3 S_1^m (left)`.
    fn dist_a(&self, m: usize) -> (Scalar, Scalar) {
        let scale = &self.lam3 * self.lam1.pow(m as i32);
        (&scale * self.left.lo(), &scale * self.left.hi())
    }

    /// Distance range from `h` of the family `S_4 S_6^n (right)`.
    fn dist_b(&self, n: usize) -> (Scalar, Scalar) {
        let scale = &self.lam4 * self.lam6.pow(n as i32);
        let one = Scalar::one();
        (&scale * (&one - self.right.hi()), &scale * (&one - self.right.lo()))
    }

    /// Whether family `m` is at or above scale `ε`: `|λ_3||λ_1|^m ≥ ε·gap_a`,
    /// which reads `q·p^m ≥ ε·a` in paper mode.
    fn a_above_scale(&self, m: usize, eps: &Scalar) -> bool {
        &self.lam3 * self.lam1.pow(m as i32) >= eps * self.left.lo()
    }

    /// `|λ_4||λ_6|^n ≥ ε·gap_b`, i.e. `r^(n+1) ≥ ε·a` in paper mode.
    fn b_above_scale(&self, n: usize, eps: &Scalar) -> bool {
        &self.lam4 * self.lam6.pow(n as i32) >= eps * (Scalar::one() - self.right.hi())
    }
}

pub(crate) fn family_hulls(sys: &IFSystem, m: usize, n: usize) -> Result<(Interval, Interval)> {
    let geom = TouchGeometry::new(sys)?;
    let a = sys.map(3)?.compose(&sys.map(1)?.power(m)).image(&geom.left);
    let b = sys.map(4)?.compose(&sys.map(6)?.power(n)).image(&geom.right);
    Ok((a, b))
}

/// Base words `3·1^m·i` and `4·6^n·j`.
pub fn branch_words(m: usize, n: usize, i: u8, j: u8) -> (Word, Word) {
    (
        Word::symbol(3).concat(&Word::repeat(1, m)).child(i),
        Word::symbol(4).concat(&Word::repeat(6, n)).child(j),
    )
}

/// Enumerates every `(m, n)` in which at least one family is above scale
/// `ε` and whose distance ranges from `h` overlap.
pub fn branch_plan(sys: &IFSystem, eps: &Scalar) -> Result<BranchPlan> {
    let geom = TouchGeometry::new(sys)?;
    let mut surviving = BTreeSet::new();
    let mut pruned = BTreeSet::new();
    let mut max_m = 0;
    let mut max_n = 0;

    let mut classify = |m: usize, n: usize| -> Result<()> {
        if surviving.contains(&(m, n)) || pruned.contains(&(m, n)) {
            return Ok(());
        }
        let (a, b) = family_hulls(sys, m, n)?;
        if a.intersects(&b) {
            surviving.insert((m, n));
        } else {
            pruned.insert((m, n));
        }
        Ok(())
    };

    let mut m = 0;
    while geom.a_above_scale(m, eps) {
        max_m = max_m.max(m);
        let (a_lo, a_hi) = geom.dist_a(m);
        let mut n = 0;
        loop {
            let (b_lo, b_hi) = geom.dist_b(n);
            if b_hi < a_lo {
                break;
            }
            if b_lo <= a_hi {
                classify(m, n)?;
                max_n = max_n.max(n);
            }
            n += 1;
        }
        m += 1;
    }
    let mut n = 0;
    while geom.b_above_scale(n, eps) {
        max_n = max_n.max(n);
        let (b_lo, b_hi) = geom.dist_b(n);
        let mut m = 0;
        loop {
            let (a_lo, a_hi) = geom.dist_a(m);
            if a_hi < b_lo {
                break;
            }
            if a_lo <= b_hi {
                classify(m, n)?;
                max_m = max_m.max(m);
            }
            m += 1;
        }
        n += 1;
    }
    Ok(BranchPlan {
        surviving: surviving.into_iter().collect(),
        pruned: pruned.into_iter().collect(),
        max_m,
        max_n,
    })
}

/// Certifies `K_3 ∩ K_4 = {h}` down to scale `ε`.
pub fn certify_pair_34(sys: &IFSystem, cfg: &CertifyConfig) -> Result<TouchPairReport> {
    let geom = TouchGeometry::new(sys)?;
    let plan = branch_plan(sys, &cfg.eps)?;
    let mut branches = Vec::new();
    for &(m, n) in &plan.surviving {
        for i in 2..=6u8 {
            for j in 1..=5u8 {
                branches.push(branch_words(m, n, i, j));
            }
        }
    }
    let limit = Limit::Scale(cfg.eps.clone());
    let results: Vec<(Refined, RefineStats)> = branches
        .par_iter()
        .map(|(u, v)| refine_pair(sys, u, v, &limit, cfg.step_cap))
        .collect::<Result<_>>()?;

    let mut stats = BranchStats::default();
    let mut witness = None;
    let mut unresolved = Vec::new();
    for (outcome, st) in results {
        stats.absorb(&st);
        match outcome {
            Refined::Disjoint => {}
            Refined::Coincident(u, v) | Refined::Touch(u, v, _) | Refined::LevelCap(u, v) => {
                witness.get_or_insert((u, v));
            }
            Refined::Unresolved(list) => unresolved.extend(list),
        }
    }
    let status = if let Some((w1, w2)) = witness {
        PairStatus::OverlapWitness { w1, w2 }
    } else if !unresolved.is_empty() {
        PairStatus::UnknownBelowScale {
            eps: cfg.eps.clone(),
            unresolved,
        }
    } else {
        PairStatus::CertifiedTouchPoint { at: geom.touch }
    };
    Ok(TouchPairReport {
        status,
        plan,
        stats,
    })
}

/// Certifies all 15 unordered pairs of first-level pieces.
pub fn certify_all_pairs(params: &IFSParams, cfg: &CertifyConfig) -> Result<Certificate> {
    let sys = build_spqr(params);
    certify_system(&sys, params.clone(), cfg)
}

pub(crate) fn certify_system(
    sys: &IFSystem,
    params: IFSParams,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let touch = certify_pair_34(sys, cfg)?;
    let limit = Limit::Scale(cfg.eps.clone());
    let mut pairs = Vec::with_capacity(15);
    for i in 1..=6u8 {
        for j in (i + 1)..=6u8 {
            if (i, j) == (3, 4) {
                pairs.push(PairReport {
                    pair: (3, 4),
                    status: touch.status.clone(),
                    stats: touch.stats.clone(),
                });
                continue;
            }
            let (outcome, st) =
                refine_pair(sys, &Word::symbol(i), &Word::symbol(j), &limit, cfg.step_cap)?;
            let status = match outcome {
                Refined::Disjoint => PairStatus::CertifiedDisjoint,
                Refined::Coincident(w1, w2)
                | Refined::Touch(w1, w2, _)
                | Refined::LevelCap(w1, w2) => PairStatus::OverlapWitness { w1, w2 },
                Refined::Unresolved(unresolved) => PairStatus::UnknownBelowScale {
                    eps: cfg.eps.clone(),
                    unresolved,
                },
            };
            let mut stats = BranchStats::default();
            stats.absorb(&st);
            pairs.push(PairReport {
                pair: (i, j),
                status,
                stats,
            });
        }
    }
    let unique_one_point = pairs.iter().all(|p| match (&p.pair, &p.status) {
        ((3, 4), PairStatus::CertifiedTouchPoint { at }) => at == &touch_value(sys),
        ((3, 4), _) => false,
        (_, status) => status.is_disjoint(),
    });
    Ok(Certificate {
        params,
        eps: cfg.eps.clone(),
        step_cap: cfg.step_cap,
        unique_one_point,
        pairs,
        touch_plan: touch.plan,
    })
}

fn touch_value(sys: &IFSystem) -> Scalar {
    sys.maps()[2].apply(&Scalar::zero())
}

/// The two addresses of the touch point: `3·1^∞` and `4·6^∞`. Both are
/// checked to land exactly on `S_3(0) = S_4(1)`.
pub fn critical_addresses(sys: &IFSystem) -> Result<(Address, Address)> {
    let geom = TouchGeometry::new(sys)?;
    let first = Address::new(Word::symbol(3), Word::symbol(1))?;
    let second = Address::new(Word::symbol(4), Word::symbol(6))?;
    for addr in [&first, &second] {
        let x = sys.exact_point(addr)?;
        if x != geom.touch {
            return Err(Error::NotParametricShape(format!(
                "address {addr} maps to {x}, not {}",
                geom.touch
            )));
        }
    }
    Ok((first, second))
}
