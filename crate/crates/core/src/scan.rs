//! Grid scans of the bad parameter sets `Δ_mn(p, r)` and sampled checks of
//! the displacement and anti-Lipschitz bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{branch_words, refine_pair, Limit, Refined};
use crate::dimension::{least_squares, BoxCountRow, BoxEstimate};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::Scalar;
use crate::system::{build_spqr, gap_constant, IFSParams, IFSystem, Mode};
use crate::word::{Address, Word};

/// Largest extra refinement depth accepted by the scanner.
pub const MAX_SCAN_DEPTH: usize = 10;

const SCAN_STEP_CAP: usize = 5_000_000;

const SCAN_NOTE: &str = "bad cells are classified at finite depth, so the bad set found \
is a superset of the true one; its box-dimension estimate can only exceed the Hausdorff \
dimension and is reported for its scaling trend, not as a check of the bound";

/// `D_mn(p, r) = (a·r^(n+1)/p^m, r)`; `None` when the interval is empty.
pub fn dmn_interval(p: &Scalar, r: &Scalar, m: usize, n: usize) -> Option<Interval> {
    let lo = gap_constant() * r.pow(n as i32 + 1) / p.pow(m as i32);
    (lo < *r).then(|| Interval::new(lo, r.clone()).expect("lo < r"))
}

/// `−2·log 6 / log r`, the dimension bound for each `Δ_mn(p, r)`.
pub fn delta_dimension_bound(r: &Scalar) -> f64 {
    -2.0 * 6f64.ln() / r.ln()
}

/// Validates `p` and `r` by building a paper-mode triple with an admissible `q`.
fn check_pr(p: &Scalar, r: &Scalar) -> Result<()> {
    IFSParams::new(p.clone(), r.clone(), r.clone(), Mode::Paper).map(|_| ())
}

fn system_for(p: &Scalar, q: &Scalar, r: &Scalar) -> Result<IFSystem> {
    Ok(build_spqr(&IFSParams::new(p.clone(), q.clone(), r.clone(), Mode::Paper)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    /// Every branch pair separated within `resolving_depth` extra symbols.
    Separated { resolving_depth: usize },
    /// Hulls of `w1` and `w2` still meet at the depth limit.
    Intersecting { w1: Word, w2: Word },
}

impl Classification {
    pub fn is_bad(&self) -> bool {
        matches!(self, Classification::Intersecting { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub q: Scalar,
    #[serde(flatten)]
    pub class: Classification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub p: Scalar,
    pub r: Scalar,
    pub m: usize,
    pub n: usize,
    pub grid_size: usize,
    pub depth: usize,
    pub domain: Option<Interval>,
    /// Ordered by `q`.
    pub entries: Vec<ScanEntry>,
    pub bad_count: usize,
    pub bad_fraction: f64,
    /// Box-count regression of the bad cells over dyadic coarsenings.
    pub bad_box_dimension: Option<BoxEstimate>,
    pub dimension_bound: f64,
    pub note: String,
}

impl ScanResult {
    pub fn bad_entries(&self) -> impl Iterator<Item = &ScanEntry> {
        self.entries.iter().filter(|e| e.class.is_bad())
    }
}

/// Classifies one system on the `(m, n)` branch: each pair
/// `(3·1^m·i, 4·6^n·j)` with `i ≠ 1`, `j ≠ 6` is refined by at most `depth`
/// extra symbols per word.
pub fn classify_system(sys: &IFSystem, m: usize, n: usize, depth: usize) -> Result<Classification> {
    let limit = Limit::Levels(depth);
    let mut resolving_depth = 0;
    for i in 2..=6u8 {
        for j in 1..=5u8 {
            let (u, v) = branch_words(m, n, i, j);
            let (outcome, stats) = refine_pair(sys, &u, &v, &limit, SCAN_STEP_CAP)?;
            let (w1, w2) = match outcome {
                Refined::Disjoint => {
                    resolving_depth = resolving_depth.max(stats.max_depth);
                    continue;
                }
                Refined::Coincident(w1, w2) | Refined::Touch(w1, w2, _) | Refined::LevelCap(w1, w2) => {
                    (w1, w2)
                }
                Refined::Unresolved(mut pairs) => pairs.swap_remove(0),
            };
            return Ok(Classification::Intersecting { w1, w2 });
        }
    }
    Ok(Classification::Separated { resolving_depth })
}

pub fn classify_q(p: &Scalar, q: &Scalar, r: &Scalar, m: usize, n: usize, depth: usize) -> Result<Classification> {
    classify_system(&system_for(p, q, r)?, m, n, depth)
}

/// Midpoints of `grid_size` equal cells of `domain`.
pub fn grid_points(domain: &Interval, grid_size: usize) -> Vec<Scalar> {
    let two_g = Scalar::from_int(2 * grid_size as i64);
    let w = domain.width();
    (0..grid_size)
        .map(|k| domain.lo() + &w * Scalar::from_int(2 * k as i64 + 1) / &two_g)
        .collect()
}

pub fn scan_delta_mn(
    p: &Scalar,
    r: &Scalar,
    m: usize,
    n: usize,
    grid_size: usize,
    depth: usize,
) -> Result<ScanResult> {
    check_pr(p, r)?;
    if grid_size < 2 {
        return Err(Error::InvalidArgument("grid size must be at least 2".into()));
    }
    if depth > MAX_SCAN_DEPTH {
        return Err(Error::DepthCap { depth, cap: MAX_SCAN_DEPTH });
    }
    let domain = dmn_interval(p, r, m, n);
    let entries: Vec<ScanEntry> = match &domain {
        None => Vec::new(),
        Some(d) => grid_points(d, grid_size)
            .into_par_iter()
            .map(|q| {
                let class = classify_q(p, &q, r, m, n, depth)?;
                Ok(ScanEntry { q, class })
            })
            .collect::<Result<_>>()?,
    };
    let bad: Vec<bool> = entries.iter().map(|e| e.class.is_bad()).collect();
    let bad_count = bad.iter().filter(|b| **b).count();
    let bad_fraction = if entries.is_empty() {
        0.0
    } else {
        bad_count as f64 / entries.len() as f64
    };
    let bad_box_dimension = domain.as_ref().and_then(|d| bad_cell_dimension(&bad, &d.width()));
    Ok(ScanResult {
        p: p.clone(),
        r: r.clone(),
        m,
        n,
        grid_size,
        depth,
        domain,
        entries,
        bad_count,
        bad_fraction,
        bad_box_dimension,
        dimension_bound: delta_dimension_bound(r),
        note: SCAN_NOTE.to_string(),
    })
}

/// Regresses `log N` on `log(1/δ)` where `N` counts groups of `2^ℓ` adjacent
/// cells containing a bad cell; needs three resolutions and a bad cell.
fn bad_cell_dimension(bad: &[bool], width: &Scalar) -> Option<BoxEstimate> {
    if !bad.iter().any(|b| *b) {
        return None;
    }
    let fine = Scalar::from_int(bad.len() as i64);
    let (mut xs, mut ys, mut rows) = (Vec::new(), Vec::new(), Vec::new());
    let mut level = 0u32;
    while bad.len() >> level >= 2 {
        let group = 1usize << level;
        let count = bad.chunks(group).filter(|c| c.iter().any(|b| *b)).count() as u64;
        let scale = width * Scalar::from_int(group as i64) / &fine;
        xs.push(-scale.ln());
        ys.push((count as f64).ln());
        rows.push(BoxCountRow {
            depth: None,
            scale: scale.to_f64(),
            count,
            running_slope: None,
        });
        level += 1;
    }
    if rows.len() < 3 {
        return None;
    }
    // Coarsest first, so running slopes accumulate toward finer scales.
    rows.reverse();
    xs.reverse();
    ys.reverse();
    for k in 1..rows.len() {
        rows[k].running_slope = Some(least_squares(&xs[..=k], &ys[..=k]).0);
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    Some(BoxEstimate {
        slope,
        intercept,
        rows,
        residuals,
    })
}

/// Re-checks a reported witness: the words lie on the `(m, n)` branch, use
/// at most `depth` extra symbols, and their hulls meet for this `q`.
#[allow(clippy::too_many_arguments)]
pub fn reproduce_witness(
    p: &Scalar,
    q: &Scalar,
    r: &Scalar,
    m: usize,
    n: usize,
    depth: usize,
    w1: &Word,
    w2: &Word,
) -> Result<bool> {
    let sys = system_for(p, q, r)?;
    let (base_u, base_v) = (Word::symbol(3).concat(&Word::repeat(1, m)), Word::symbol(4).concat(&Word::repeat(6, n)));
    let on_branch = |w: &Word, base: &Word, skip: u8| {
        w.len() > base.len()
            && w.len() <= base.len() + 1 + depth
            && w.prefix(base.len()) == *base
            && w.symbols()[base.len()] != skip
    };
    if !on_branch(w1, &base_u, 1) || !on_branch(w2, &base_v, 6) {
        return Ok(false);
    }
    Ok(sys.cylinder(w1)?.intersects(&sys.cylinder(w2)?))
}

/// Eventually periodic address with preperiod length `< 8` and period
/// length in `1..=4`.
pub fn random_address<R: Rng>(rng: &mut R, alphabet: u8) -> Address {
    let pre_len = rng.gen_range(0..8);
    let pre: Vec<u8> = (0..pre_len).map(|_| rng.gen_range(1..=alphabet)).collect();
    let per_len = rng.gen_range(1..=4);
    let per: Vec<u8> = (0..per_len).map(|_| rng.gen_range(1..=alphabet)).collect();
    let (pre, per) = (Word::from_symbols(pre), Word::from_symbols(per));
    Address::new(pre, per).expect("nonempty period")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementSample {
    pub address: String,
    pub exact: f64,
    pub truncated: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementReport {
    pub p: Scalar,
    pub q: Scalar,
    pub q_prime: Scalar,
    pub r: Scalar,
    pub seed: u64,
    pub samples: usize,
    pub depth: usize,
    /// `δ = |q − q'|`.
    pub delta: Scalar,
    /// `δ / (1 − R)` with `R = max(p, q, q', r)`.
    pub bound: Scalar,
    /// Samples whose exact or truncated displacement exceeds the bound.
    pub violations: usize,
    /// Largest exact displacement divided by the bound.
    pub max_ratio_to_bound: f64,
    /// Largest exact displacement divided by `36δ/35`.
    pub max_ratio_to_36_35: f64,
    pub worst: Option<DisplacementSample>,
}

impl DisplacementReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples eventually periodic addresses `σ` and compares `π(σ)` under `q`
/// and `q'`: exactly through fixed points, and through depth-`depth`
/// cylinders with slack equal to the sum of their half-widths.
pub fn verify_displacement(
    p: &Scalar,
    q: &Scalar,
    q_prime: &Scalar,
    r: &Scalar,
    samples: usize,
    depth: usize,
    seed: u64,
) -> Result<DisplacementReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let sys = system_for(p, q, r)?;
    let sys2 = system_for(p, q_prime, r)?;
    let delta = (q - q_prime).abs();
    let big_r = p.greater(q).greater(q_prime).greater(r).clone();
    let bound = &delta / (Scalar::one() - &big_r);
    let alt = &delta * Scalar::new(36, 35);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let addresses: Vec<Address> = (0..samples).map(|_| random_address(&mut rng, 6)).collect();

    let checked: Vec<(Address, Scalar, Scalar, Scalar)> = addresses
        .into_par_iter()
        .map(|addr| {
            let exact = (sys.exact_point(&addr)? - sys2.exact_point(&addr)?).abs();
            let (m1, e1) = sys.address_point(&addr, depth)?;
            let (m2, e2) = sys2.address_point(&addr, depth)?;
            Ok((addr, exact, (m1 - m2).abs(), e1 + e2))
        })
        .collect::<Result<_>>()?;

    let mut violations = 0;
    let mut worst: Option<(Scalar, DisplacementSample)> = None;
    for (addr, exact, truncated, slack) in checked {
        if exact > bound || truncated > &bound + &slack {
            violations += 1;
        }
        if worst.as_ref().is_none_or(|(w, _)| exact > *w) {
            let sample = DisplacementSample {
                address: addr.to_string(),
                exact: exact.to_f64(),
                truncated: truncated.to_f64(),
                slack: slack.to_f64(),
            };
            worst = Some((exact, sample));
        }
    }
    let worst_exact = worst.as_ref().map(|(w, _)| w.clone()).unwrap_or_else(Scalar::zero);
    let ratio = |b: &Scalar| if b.is_zero() { 0.0 } else { (&worst_exact / b).to_f64() };
    Ok(DisplacementReport {
        p: p.clone(),
        q: q.clone(),
        q_prime: q_prime.clone(),
        r: r.clone(),
        seed,
        samples,
        depth,
        max_ratio_to_bound: ratio(&bound),
        max_ratio_to_36_35: ratio(&alt),
        delta,
        bound,
        violations,
        worst: worst.map(|(_, s)| s),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tech2Report {
    pub p: Scalar,
    pub r: Scalar,
    pub m: usize,
    pub n: usize,
    pub q: Scalar,
    pub q_prime: Scalar,
    pub seed: u64,
    pub samples: usize,
    pub depth: usize,
    /// `p^m / 35`.
    pub constant: Scalar,
    /// Smallest exact `|ΔΦ| / |q − q'|`.
    pub min_ratio: Scalar,
    pub min_ratio_f64: f64,
    /// Smallest `(|ΔΦ_trunc| − slack) / |q − q'|` over truncated evaluations.
    pub min_truncated_ratio_f64: f64,
    /// Samples failing the strict inequality exactly or after truncation.
    pub violations: usize,
}

impl Tech2Report {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `(σ, τ, i, j)` and checks
/// `|Φ(q', σ, τ) − Φ(q, σ, τ)| > (p^m/35)·|q − q'|` where
/// `Φ(q, σ, τ) = S_3 S_1^m S_i π_q(σ) − S_4 S_6^n S_j π_q(τ)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_tech2(
    p: &Scalar,
    r: &Scalar,
    m: usize,
    n: usize,
    q: &Scalar,
    q_prime: &Scalar,
    samples: usize,
    depth: usize,
    seed: u64,
) -> Result<Tech2Report> {
    check_pr(p, r)?;
    let domain = dmn_interval(p, r, m, n);
    for x in [q, q_prime] {
        let inside = domain.as_ref().is_some_and(|d| d.lo() < x && x < d.hi());
        if !inside {
            return Err(Error::OutsideDomain {
                value: x.to_string(),
                domain: domain.as_ref().map_or("empty".to_string(), |d| format!("({}, {})", d.lo(), d.hi())),
            });
        }
    }
    if q == q_prime {
        return Err(Error::InvalidArgument("q and q' must differ".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let sys = system_for(p, q, r)?;
    let sys2 = system_for(p, q_prime, r)?;
    let dq = (q - q_prime).abs();
    let constant = p.pow(m as i32) / Scalar::from_int(35);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs: Vec<(Address, Address, u8, u8)> = (0..samples)
        .map(|_| {
            let sigma = random_address(&mut rng, 6);
            let tau = random_address(&mut rng, 6);
            (sigma, tau, rng.gen_range(2..=6), rng.gen_range(1..=5))
        })
        .collect();

    let results: Vec<(Scalar, Scalar)> = configs
        .into_par_iter()
        .map(|(sigma, tau, i, j)| {
            let (u, v) = branch_words(m, n, i, j);
            let ps = Address::new(u.concat(sigma.preperiod()), sigma.period().clone())?;
            let pt = Address::new(v.concat(tau.preperiod()), tau.period().clone())?;
            let phi = |s: &IFSystem| -> Result<Scalar> { Ok(s.exact_point(&ps)? - s.exact_point(&pt)?) };
            let exact = (phi(&sys2)? - phi(&sys)?).abs() / &dq;
            // Truncated cylinders: each midpoint is within its half-width of π.
            let mut diff = Scalar::zero();
            let mut slack = Scalar::zero();
            for (s, sign) in [(&sys2, 1i64), (&sys, -1)] {
                let (a, ea) = s.address_point(&ps, u.len() + depth)?;
                let (b, eb) = s.address_point(&pt, v.len() + depth)?;
                diff = diff + (a - b) * Scalar::from_int(sign);
                slack = slack + ea + eb;
            }
            Ok((exact, (diff.abs() - slack) / &dq))
        })
        .collect::<Result<_>>()?;

    let mut violations = 0;
    let mut min_ratio: Option<Scalar> = None;
    let mut min_trunc = f64::INFINITY;
    for (exact, trunc) in results {
        if exact <= constant || trunc <= constant {
            violations += 1;
        }
        min_trunc = min_trunc.min(trunc.to_f64());
        if min_ratio.as_ref().is_none_or(|m| exact < *m) {
            min_ratio = Some(exact);
        }
    }
    let min_ratio = min_ratio.expect("samples ≥ 1");
    Ok(Tech2Report {
        p: p.clone(),
        r: r.clone(),
        m,
        n,
        q: q.clone(),
        q_prime: q_prime.clone(),
        seed,
        samples,
        depth,
        constant,
        min_ratio_f64: min_ratio.to_f64(),
        min_ratio,
        min_truncated_ratio_f64: min_trunc,
        violations,
    })
}
