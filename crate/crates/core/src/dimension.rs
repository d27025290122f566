//! Moran equations, the subsystem dimension sequence, box counting and
//! cover sums.
//!
//! These quantities are irrational in general, so this module works in
//! binary64. Bisection is used throughout since every Moran function here is
//! strictly decreasing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::system::{IFSParams, IFSystem, IntervalCover, FULL_COVER_CAP};

pub const DEFAULT_TOL: f64 = 1e-12;

/// Coefficient of `r^d` in the reduced Moran equation `p^d + q^d + c·r^d = 1`.
/// `Four` counts the four maps of ratio `r` in the six-map system; `Two`
/// is the three-generator form `{S_2, S_3, S_4}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum RCoefficient {
    Two,
    #[default]
    Four,
}

impl RCoefficient {
    pub fn value(self) -> u32 {
        match self {
            RCoefficient::Two => 2,
            RCoefficient::Four => 4,
        }
    }

    pub fn from_value(c: u32) -> Result<Self> {
        match c {
            2 => Ok(RCoefficient::Two),
            4 => Ok(RCoefficient::Four),
            other => Err(Error::InvalidArgument(format!("coefficient must be 2 or 4, got {other}"))),
        }
    }
}

/// `Σ λ_i^d = 1` over a finite list of ratio magnitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoranProblem {
    ratios: Vec<f64>,
}

impl MoranProblem {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::InvalidMoran("empty ratio list".into()));
        }
        if let Some(bad) = ratios.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::InvalidMoran(format!("ratio {bad} outside (0,1)")));
        }
        Ok(MoranProblem { ratios })
    }

    pub fn from_system(sys: &IFSystem) -> Result<Self> {
        MoranProblem::new(sys.maps().iter().map(|f| f.ratio().abs().to_f64()).collect())
    }

    /// Ratios `p, q` and `c` copies of `r`.
    pub fn reduced(params: &IFSParams, c: RCoefficient) -> Result<Self> {
        let r = params.r.to_f64();
        let mut ratios = vec![params.p.to_f64(), params.q.to_f64()];
        ratios.extend(std::iter::repeat_n(r, c.value() as usize));
        MoranProblem::new(ratios)
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn eval(&self, d: f64) -> f64 {
        self.ratios.iter().map(|x| x.powf(d)).sum()
    }
}

/// Bisection for the root of a strictly decreasing `f` with `f(lo) > 1 > f(hi)`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick the endpoint with the smaller residual.
    if (f(lo) - 1.0).abs() <= (f(hi) - 1.0).abs() {
        lo
    } else {
        hi
    }
}

fn upper_bracket(f: &impl Fn(f64) -> f64) -> Result<f64> {
    let mut hi = 1.0;
    while f(hi) >= 1.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Bracket("no upper bracket below d = 1e6".into()));
        }
    }
    Ok(hi)
}

/// Similarity dimension: the `d` with `Σ λ_i^d = 1`.
pub fn moran_dimension(prob: &MoranProblem, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if prob.ratios.len() < 2 {
        return Err(Error::DimensionZero);
    }
    let f = |d: f64| prob.eval(d);
    let hi = upper_bracket(&f)?;
    let d = bisect_decreasing(f, 0.0, hi);
    let residual = (prob.eval(d) - 1.0).abs();
    if residual >= tol {
        return Err(Error::Bracket(format!("residual {residual:e} exceeds tolerance {tol:e}")));
    }
    Ok(d)
}

/// `Σ_{k=0}^{n} p^{kd} (q^d + c·r^d)`.
fn subsystem_sum(p: f64, q: f64, r: f64, c: f64, n: usize, d: f64) -> f64 {
    // (1 − p^{(n+1)d}) / (1 − p^d), accurate for small d.
    let geometric = f64::exp_m1((n as f64 + 1.0) * d * p.ln()) / f64::exp_m1(d * p.ln());
    geometric * (q.powf(d) + c * r.powf(d))
}

/// Dimension of the truncated system `{S_1^k S_j : k ≤ n}` by direct bisection
/// of `Σ_{k=0}^{n} p^{kd}(q^d + c·r^d) = 1`.
pub fn subsystem_dimension(params: &IFSParams, n: usize, c: RCoefficient, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let (p, q, r) = (params.p.to_f64(), params.q.to_f64(), params.r.to_f64());
    let cv = c.value() as f64;
    let f = |d: f64| subsystem_sum(p, q, r, cv, n, d);
    let hi = upper_bracket(&f)?;
    let d = bisect_decreasing(f, 0.0, hi);
    let residual = (f(d) - 1.0).abs();
    if residual >= tol {
        return Err(Error::Bracket(format!("residual {residual:e} exceeds tolerance {tol:e}")));
    }
    Ok(d)
}

/// Limit of the subsystem sequence: root of `p^d + q^d + c·r^d = 1`.
pub fn closed_form_dimension(params: &IFSParams, c: RCoefficient, tol: f64) -> Result<f64> {
    moran_dimension(&MoranProblem::reduced(params, c)?, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsystemEntry {
    pub n: usize,
    /// `d_n` from direct bisection.
    pub dimension: f64,
    /// `d* − d_n`, solved on its own so it stays accurate when the gap is
    /// far below the resolution of `d_n` itself.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsystemSequence {
    pub coefficient: u32,
    pub limit: f64,
    pub entries: Vec<SubsystemEntry>,
    /// Empirical ratio `gap_{n+1} / gap_n` at the tail; tends to `p^{d*}`.
    pub rate: Option<f64>,
}

impl SubsystemSequence {
    /// `d_0 < d_1 < …` expressed through the gaps: strictly decreasing and positive.
    pub fn strictly_increasing(&self) -> bool {
        self.entries.iter().all(|e| e.gap > 0.0)
            && self.entries.windows(2).all(|w| w[1].gap < w[0].gap)
    }
}

/// Gap `t = d* − d_n` from
/// `Σ_i w_i·expm1(t·L_i) = p^{(n+1)(d*−t)}·(q^{d*−t} + c·r^{d*−t})`
/// with `w_i = λ_i^{d*}` normalised to sum 1 and `L_i = −ln λ_i`. Writing the
/// left side through `expm1` keeps full relative precision for tiny gaps.
fn subsystem_gap(p: f64, q: f64, r: f64, c: f64, limit: f64, n: usize, upper: f64) -> f64 {
    let ratios = [(p, 1.0), (q, 1.0), (r, c)];
    let total: f64 = ratios.iter().map(|(x, k)| k * x.powf(limit)).sum();
    let psi = |t: f64| {
        let lhs: f64 = ratios
            .iter()
            .map(|(x, k)| k * x.powf(limit) / total * f64::exp_m1(-t * x.ln()))
            .sum();
        let d = limit - t;
        let rhs = p.powf((n as f64 + 1.0) * d) * (q.powf(d) + c * r.powf(d));
        lhs - rhs
    };
    let (mut lo, mut hi) = (0.0f64, upper);
    for _ in 0..4000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn subsystem_sequence(
    params: &IFSParams,
    n_max: usize,
    c: RCoefficient,
    tol: f64,
) -> Result<SubsystemSequence> {
    let limit = closed_form_dimension(params, c, tol)?;
    let d0 = subsystem_dimension(params, 0, c, tol)?;
    let (p, q, r) = (params.p.to_f64(), params.q.to_f64(), params.r.to_f64());
    let cv = c.value() as f64;
    let upper = limit - d0;
    let mut entries = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let gap = if n == 0 {
            upper
        } else {
            subsystem_gap(p, q, r, cv, limit, n, upper)
        };
        entries.push(SubsystemEntry {
            n,
            dimension: subsystem_dimension(params, n, c, tol)?,
            gap,
        });
    }
    let rate = match entries.as_slice() {
        [.., a, b] if a.gap > 0.0 => Some(b.gap / a.gap),
        _ => None,
    };
    Ok(SubsystemSequence {
        coefficient: c.value(),
        limit,
        entries,
        rate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCountRow {
    pub depth: Option<usize>,
    pub scale: f64,
    pub count: u64,
    /// Slope of the fit through this row and all coarser rows.
    pub running_slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub rows: Vec<BoxCountRow>,
    pub residuals: Vec<f64>,
}

/// Number of mesh boxes `[kδ, (k+1)δ)` met by the interior of the merged
/// union; degenerate components count one box.
pub fn box_count(cover: &IntervalCover, delta: &Scalar) -> u64 {
    let mut count: u64 = 0;
    let mut last_box: Option<num_bigint::BigInt> = None;
    for iv in cover.merged() {
        let first = (iv.lo() / delta).floor();
        let end = if iv.lo() == iv.hi() {
            &first + 1
        } else {
            (iv.hi() / delta).ceil()
        };
        let start = match &last_box {
            Some(prev) if prev >= &first => prev + 1,
            _ => first,
        };
        if end > start {
            let span: num_bigint::BigInt = &end - &start;
            count += u64::try_from(span).unwrap_or(u64::MAX);
            last_box = Some(end - 1);
        }
    }
    count
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares slope of `log N(δ)` against `log(1/δ)`.
pub fn box_dimension_estimate(covers: &[IntervalCover]) -> Result<BoxEstimate> {
    let mut scales: Vec<&Scalar> = covers.iter().map(|c| &c.scale).collect();
    scales.sort();
    scales.dedup();
    if covers.len() < 3 || scales.len() < 3 {
        return Err(Error::TooFewCovers {
            need: 3,
            got: scales.len().min(covers.len()),
        });
    }
    let mut ordered: Vec<&IntervalCover> = covers.iter().collect();
    ordered.sort_by(|a, b| b.scale.cmp(&a.scale));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rows = Vec::new();
    for cover in ordered {
        let count = box_count(cover, &cover.scale);
        xs.push(-cover.scale.ln());
        ys.push((count as f64).ln());
        let running_slope = (xs.len() >= 2).then(|| least_squares(&xs, &ys).0);
        rows.push(BoxCountRow {
            depth: cover.depth,
            scale: cover.scale.to_f64(),
            count,
            running_slope,
        });
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    Ok(BoxEstimate {
        slope,
        intercept,
        rows,
        residuals,
    })
}

/// `Σ_{|w| = n} |S_w[0,1]|^d` over the full depth-`n` cover.
///
/// At the similarity dimension this sum is identically 1 because widths are
/// products of ratios, so it cannot by itself reveal that the
/// `d`-dimensional measure vanishes.
pub fn cover_sum(sys: &IFSystem, d: f64, depth: usize) -> Result<f64> {
    if d.is_nan() || d <= 0.0 {
        return Err(Error::InvalidArgument("exponent must be positive".into()));
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if depth > FULL_COVER_CAP {
        return Err(Error::DepthCap {
            depth,
            cap: FULL_COVER_CAP,
        });
    }
    // |S_w[0,1]| = Π |λ_{w_i}|, so |S_w[0,1]|^d = Π |λ_{w_i}|^d word by word.
    let weights: Vec<f64> = sys.maps().iter().map(|f| f.ratio().abs().to_f64().powf(d)).collect();
    let mut total = 0.0;
    let mut stack = vec![(1.0f64, 0usize)];
    while let Some((w, level)) = stack.pop() {
        if level == depth {
            total += w;
            continue;
        }
        for lam in &weights {
            stack.push((w * lam, level + 1));
        }
    }
    Ok(total)
}
