//! Identity-defect witnesses against the weak separation property.
//!
//! `H_m = S_3 S_1^m S_5` and `G_n = S_4 S_6^n S_2` are both orientation
//! preserving:
//!
//! ```text
//! H_m(x) = h − p^m q (1 − a) + p^m q r · x
//! G_n(x) = h − r^(n+1) (1 − a) + r^(n+2) · x
//! G_n⁻¹ H_m(x) = (r^(n+1) − p^m q)(1 − a) / r^(n+2) + (p^m q / r^(n+1)) · x
//! ```
//!
//! When `p^m q / r^(n+1)` approaches 1 along a sequence of `(m, n)` the maps
//! `G_n⁻¹ H_m` approach the identity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::AffineMap1D;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::system::{gap_constant, touch_point, IFSParams, IFSystem};

/// `S_3 ∘ S_1^m ∘ S_5`.
pub fn build_h(sys: &IFSystem, m: usize) -> Result<AffineMap1D> {
    check_six(sys)?;
    Ok(sys.map(3)?.compose(&sys.map(1)?.power(m)).compose(sys.map(5)?))
}

/// `S_4 ∘ S_6^n ∘ S_2`.
pub fn build_g(sys: &IFSystem, n: usize) -> Result<AffineMap1D> {
    check_six(sys)?;
    Ok(sys.map(4)?.compose(&sys.map(6)?.power(n)).compose(sys.map(2)?))
}

fn check_six(sys: &IFSystem) -> Result<()> {
    if sys.alphabet() != 6 {
        return Err(Error::NotParametricShape(format!(
            "expected 6 maps, found {}",
            sys.alphabet()
        )));
    }
    Ok(())
}

/// Closed form of `H_m` from the parameters alone.
pub fn h_closed_form(params: &IFSParams, m: usize) -> AffineMap1D {
    let scale = params.p.pow(m as i32) * &params.q;
    let one_minus_a = Scalar::one() - gap_constant();
    AffineMap1D::new(&scale * &params.r, touch_point() - &scale * one_minus_a)
}

/// Closed form of `G_n` from the parameters alone.
pub fn g_closed_form(params: &IFSParams, n: usize) -> AffineMap1D {
    let rn1 = params.r.pow(n as i32 + 1);
    let one_minus_a = Scalar::one() - gap_constant();
    AffineMap1D::new(&rn1 * &params.r, touch_point() - &rn1 * one_minus_a)
}

/// Closed form of `G_n⁻¹ ∘ H_m`.
pub fn witness_closed_form(params: &IFSParams, m: usize, n: usize) -> AffineMap1D {
    let pmq = params.p.pow(m as i32) * &params.q;
    let rn1 = params.r.pow(n as i32 + 1);
    let one_minus_a = Scalar::one() - gap_constant();
    let offset = (&rn1 - &pmq) * one_minus_a / params.r.pow(n as i32 + 2);
    AffineMap1D::new(pmq / rn1, offset)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub m: usize,
    pub n: usize,
    /// `G_n⁻¹ ∘ H_m`.
    pub map: AffineMap1D,
    /// `|ratio − 1|`, exact.
    pub ratio_defect: Scalar,
    /// `|offset|`, exact.
    pub offset_defect: Scalar,
    pub ratio_defect_f64: f64,
    pub offset_defect_f64: f64,
}

impl WitnessPair {
    fn from_map(m: usize, n: usize, map: AffineMap1D) -> Self {
        let ratio_defect = (map.ratio() - Scalar::one()).abs();
        let offset_defect = map.offset().abs();
        WitnessPair {
            m,
            n,
            ratio_defect_f64: ratio_defect.to_f64(),
            offset_defect_f64: offset_defect.to_f64(),
            map,
            ratio_defect,
            offset_defect,
        }
    }

    /// True iff `G_n⁻¹ H_m` is exactly the identity.
    pub fn is_exact(&self) -> bool {
        self.ratio_defect.is_zero() && self.offset_defect.is_zero()
    }
}

/// Identity defect of `G_n⁻¹ ∘ H_m`, computed by exact composition.
pub fn defect(sys: &IFSystem, m: usize, n: usize) -> Result<WitnessPair> {
    let map = build_g(sys, n)?.inverse()?.compose(&build_h(sys, m)?);
    Ok(WitnessPair::from_map(m, n, map))
}

/// The `n ≥ 0` minimising `|log|ratio(G_n⁻¹ H_m)||`, found by exact power
/// comparisons (a float estimate only seeds the search).
pub fn best_n_for(sys: &IFSystem, m: usize) -> Result<usize> {
    let h = build_h(sys, m)?;
    let g0 = build_g(sys, 0)?;
    let lam6 = sys.map(6)?.ratio().abs();
    // |ratio(n)| = base / λ_6^n, increasing in n.
    let base = (h.ratio() / g0.ratio()).abs();
    let rho = |n: usize| &base / lam6.pow(n as i32);
    let one = Scalar::one();
    if base >= one {
        return Ok(0);
    }
    // Smallest n with rho(n) ≥ 1.
    let guess = (-base.ln() / -lam6.ln()).ceil().max(0.0) as usize;
    let mut n = guess.max(1);
    while n > 1 && rho(n - 1) >= one {
        n -= 1;
    }
    while rho(n) < one {
        n += 1;
    }
    // Compare |log ρ(n)| with |log ρ(n−1)|: the first is smaller iff ρ(n)·ρ(n−1) < 1.
    if rho(n) * rho(n - 1) < one {
        Ok(n)
    } else {
        Ok(n - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSearch {
    pub target_defect: f64,
    pub max_m: usize,
    /// Largest `m` actually examined.
    pub searched_to: usize,
    pub reached: bool,
    /// One pair per examined `m`, sorted by ratio defect.
    pub pairs: Vec<WitnessPair>,
    /// Best ratio defect among `m ≤ k`, for each examined `k`.
    pub best_so_far: Vec<f64>,
    /// Some examined pair has `G_n⁻¹ H_m` exactly the identity.
    pub exact_resonance: bool,
    /// Exponents `(a, b)` with `|λ_1|^a = |λ_6|^b`, when found below
    /// [`COMMENSURABILITY_SEARCH`]; the attainable ratios are then discrete.
    pub commensurable: Option<(u32, u32)>,
}

impl WitnessSearch {
    pub fn best(&self) -> Option<&WitnessPair> {
        self.pairs.first()
    }
}

/// For each `m ≤ max_m` picks the bracketing `n` and records the defect of
/// `G_n⁻¹ H_m`. Stops early once the ratio defect reaches `target_defect`.
pub fn witness_search(sys: &IFSystem, target_defect: f64, max_m: usize) -> Result<WitnessSearch> {
    if target_defect.is_nan() || target_defect <= 0.0 {
        return Err(Error::InvalidArgument("target defect must be positive".into()));
    }
    let target = Scalar::from_f64(target_defect)
        .ok_or_else(|| Error::InvalidArgument("target defect must be finite".into()))?;
    let all: Vec<WitnessPair> = (0..=max_m)
        .into_par_iter()
        .map(|m| best_n_for(sys, m).and_then(|n| defect(sys, m, n)))
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    let mut best_so_far = Vec::new();
    let mut best: Option<Scalar> = None;
    let mut reached = false;
    for pair in all {
        let improved = best.as_ref().is_none_or(|b| &pair.ratio_defect < b);
        if improved {
            best = Some(pair.ratio_defect.clone());
        }
        best_so_far.push(best.as_ref().expect("set above").to_f64());
        let hit = pair.ratio_defect <= target;
        pairs.push(pair);
        if hit {
            reached = true;
            break;
        }
    }
    let searched_to = pairs.len() - 1;
    let exact_resonance = pairs.iter().any(WitnessPair::is_exact);
    let commensurable = commensurable_exponents(
        &sys.map(1)?.ratio().abs(),
        &sys.map(6)?.ratio().abs(),
        COMMENSURABILITY_SEARCH,
    );
    pairs.sort_by(|a, b| a.ratio_defect.cmp(&b.ratio_defect).then(a.m.cmp(&b.m)));
    Ok(WitnessSearch {
        target_defect,
        max_m,
        searched_to,
        reached,
        pairs,
        best_so_far,
        exact_resonance,
        commensurable,
    })
}

/// Largest exponent tried by [`commensurable_exponents`] in a search.
pub const COMMENSURABILITY_SEARCH: u32 = 16;

/// Smallest `(a, b)` with `a, b ≤ max_exp` and `x^a = y^b`.
///
/// A hit proves `log x / log y = b / a` is rational; a miss proves nothing.
pub fn commensurable_exponents(x: &Scalar, y: &Scalar, max_exp: u32) -> Option<(u32, u32)> {
    (1..=max_exp)
        .flat_map(|a| (1..=max_exp).map(move |b| (a, b)))
        .find(|&(a, b)| x.pow(a as i32) == y.pow(b as i32))
}

/// `q = r^(n+1) / p^m`, the value at which `H_m = G_n` exactly.
pub fn resonant_q(p: &Scalar, r: &Scalar, m: usize, n: usize) -> Scalar {
    r.pow(n as i32 + 1) / p.pow(m as i32)
}
