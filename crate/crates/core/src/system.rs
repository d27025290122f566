//! Iterated function systems on the line and the six-map family `S_pqr`.

use serde::{Deserialize, Serialize};

use crate::affine::AffineMap1D;
use crate::error::{Error, Result};
use crate::interval::{merge_intervals, Interval};
use crate::scalar::Scalar;
use crate::word::{Address, Word};

/// Default cap on full `m^n` cover enumeration.
pub const FULL_COVER_CAP: usize = 12;

/// Touch point `h` of the parametric family.
pub fn touch_point() -> Scalar {
    Scalar::new(8, 15)
}

/// Gap constant `a = 3/15`.
pub fn gap_constant() -> Scalar {
    Scalar::new(3, 15)
}

/// Upper end of the strict parameter box.
pub fn paper_bound() -> Scalar {
    Scalar::new(1, 36)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `0 < p, q, r < 1/36`.
    #[default]
    Paper,
    /// `0 < p, q, r < 1`.
    Relaxed,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IFSParams {
    pub p: Scalar,
    pub q: Scalar,
    pub r: Scalar,
    pub mode: Mode,
}

impl IFSParams {
    pub fn new(p: Scalar, q: Scalar, r: Scalar, mode: Mode) -> Result<Self> {
        let upper = match mode {
            Mode::Paper => paper_bound(),
            Mode::Relaxed => Scalar::one(),
        };
        for (name, value) in [("p", &p), ("q", &q), ("r", &r)] {
            if !value.is_positive() || value >= &upper {
                return Err(Error::ParameterOutOfRange {
                    name,
                    value: value.to_string(),
                    bound: format!("0 < {name} < {upper} ({mode:?} mode)"),
                });
            }
        }
        Ok(IFSParams { p, q, r, mode })
    }

    pub fn paper(p: Scalar, q: Scalar, r: Scalar) -> Result<Self> {
        IFSParams::new(p, q, r, Mode::Paper)
    }

    pub fn h(&self) -> Scalar {
        touch_point()
    }

    pub fn a(&self) -> Scalar {
        gap_constant()
    }

    pub fn with_q(&self, q: Scalar) -> Result<Self> {
        IFSParams::new(self.p.clone(), q, self.r.clone(), self.mode)
    }
}

/// An ordered list of contractions `S_1, …, S_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IFSystem {
    maps: Vec<AffineMap1D>,
}

impl IFSystem {
    pub fn new(maps: Vec<AffineMap1D>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidArgument("system needs at least one map".into()));
        }
        if maps.len() > u8::MAX as usize {
            return Err(Error::InvalidArgument("alphabet too large".into()));
        }
        for (k, f) in maps.iter().enumerate() {
            if !f.is_contraction() {
                return Err(Error::NotContraction {
                    index: k + 1,
                    ratio: f.ratio().to_string(),
                });
            }
        }
        Ok(IFSystem { maps })
    }

    pub fn alphabet(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[AffineMap1D] {
        &self.maps
    }

    /// Map for the 1-based symbol `s`.
    pub fn map(&self, s: u8) -> Result<&AffineMap1D> {
        if s == 0 || s as usize > self.maps.len() {
            return Err(Error::BadSymbol {
                symbol: s,
                alphabet: self.maps.len(),
            });
        }
        Ok(&self.maps[s as usize - 1])
    }

    /// `S_w = S_{w_1} ∘ … ∘ S_{w_n}`.
    pub fn word_map(&self, w: &Word) -> Result<AffineMap1D> {
        w.check_alphabet(self.alphabet())?;
        Ok(self.word_map_unchecked(w))
    }

    pub(crate) fn word_map_unchecked(&self, w: &Word) -> AffineMap1D {
        w.symbols()
            .iter()
            .fold(AffineMap1D::identity(), |acc, &s| acc.compose(&self.maps[s as usize - 1]))
    }

    /// Hull `S_w([0,1])`.
    pub fn cylinder(&self, w: &Word) -> Result<Interval> {
        Ok(self.word_map(w)?.image(&Interval::unit()))
    }

    pub fn max_ratio(&self) -> Scalar {
        self.maps
            .iter()
            .map(|f| f.ratio().abs())
            .max()
            .expect("nonempty system")
    }

    /// True when some map fixes 0 and some map fixes 1; then every hull
    /// endpoint `S_w(0)`, `S_w(1)` is a point of the attractor.
    pub fn endpoints_in_attractor(&self) -> bool {
        let fixes = |x: Scalar| self.maps.iter().any(|f| f.apply(&x) == x);
        fixes(Scalar::zero()) && fixes(Scalar::one())
    }

    /// All `m^n` words of length `n` with their hulls.
    pub fn cover(&self, depth: usize) -> Result<IntervalCover> {
        self.cover_with_cap(depth, FULL_COVER_CAP)
    }

    pub fn cover_with_cap(&self, depth: usize, cap: usize) -> Result<IntervalCover> {
        if depth > cap {
            return Err(Error::DepthCap { depth, cap });
        }
        let mut level = vec![(Word::empty(), AffineMap1D::identity())];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * self.alphabet());
            for (w, f) in &level {
                for (k, g) in self.maps.iter().enumerate() {
                    next.push((w.child(k as u8 + 1), f.compose(g)));
                }
            }
            level = next;
        }
        let cells: Vec<(Word, Interval)> = level
            .into_iter()
            .map(|(w, f)| (w, f.image(&Interval::unit())))
            .collect();
        let scale = cells
            .iter()
            .map(|(_, iv)| iv.width())
            .max()
            .unwrap_or_else(Scalar::one);
        Ok(IntervalCover {
            depth: Some(depth),
            scale,
            cells,
        })
    }

    /// Moran cut at scale `delta`: the words whose hull width is at most
    /// `delta` while their parent's exceeds it. Every point of the attractor
    /// lies in one of these hulls.
    pub fn moran_cut(&self, delta: &Scalar) -> Result<IntervalCover> {
        if !delta.is_positive() {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        let mut cells = Vec::new();
        let mut stack = vec![(Word::empty(), AffineMap1D::identity())];
        while let Some((w, f)) = stack.pop() {
            if &f.ratio().abs() <= delta {
                cells.push((w, f.image(&Interval::unit())));
                continue;
            }
            for (k, g) in self.maps.iter().enumerate().rev() {
                stack.push((w.child(k as u8 + 1), f.compose(g)));
            }
        }
        Ok(IntervalCover {
            depth: None,
            scale: delta.clone(),
            cells,
        })
    }

    /// Midpoint of the depth-`n` cylinder of `addr` and its half-width,
    /// which bounds the distance to the true point `π(addr)`.
    pub fn address_point(&self, addr: &Address, n: usize) -> Result<(Scalar, Scalar)> {
        let hull = self.cylinder(&addr.truncate(n))?;
        Ok((hull.midpoint(), hull.width() / Scalar::from_int(2)))
    }

    /// Exact `π(u·v^∞) = S_u(fix S_v)`.
    pub fn exact_point(&self, addr: &Address) -> Result<Scalar> {
        let period = self.word_map(addr.period())?;
        let fix = period.fixed_point()?;
        Ok(self.word_map(addr.preperiod())?.apply(&fix))
    }
}

/// The six maps of the parametric family:
/// `S_1 = px`, `S_2 = a + rx`, `S_3 = h − qx`, `S_4 = h − r + rx`,
/// `S_5 = 1 − a − rx`, `S_6 = 1 − r + rx`.
pub fn build_spqr(params: &IFSParams) -> IFSystem {
    let IFSParams { p, q, r, .. } = params;
    let h = touch_point();
    let a = gap_constant();
    let one = Scalar::one();
    let maps = vec![
        AffineMap1D::new(p.clone(), Scalar::zero()),
        AffineMap1D::new(r.clone(), a.clone()),
        AffineMap1D::new(-q, h.clone()),
        AffineMap1D::new(r.clone(), &h - r),
        AffineMap1D::new(-r, &one - &a),
        AffineMap1D::new(r.clone(), &one - r),
    ];
    IFSystem::new(maps).expect("validated parameters give contractions")
}

/// Validates the triple for `mode` and builds the system.
pub fn build_spqr_checked(p: Scalar, q: Scalar, r: Scalar, mode: Mode) -> Result<IFSystem> {
    Ok(build_spqr(&IFSParams::new(p, q, r, mode)?))
}

/// `ρ_R(σ, τ) = R^w` with `w` the number of leading symbols the words share.
pub fn address_metric(sigma: &Word, tau: &Word, radius: &Scalar) -> Result<Scalar> {
    if sigma.len() != tau.len() {
        return Err(Error::LengthMismatch(sigma.len(), tau.len()));
    }
    if !radius.is_positive() || radius >= &Scalar::one() {
        return Err(Error::InvalidArgument(format!("metric base {radius} must lie in (0,1)")));
    }
    match sigma
        .symbols()
        .iter()
        .zip(tau.symbols())
        .position(|(x, y)| x != y)
    {
        Some(k) => Ok(radius.pow(k as i32)),
        None => Ok(Scalar::zero()),
    }
}

/// Finite family of hulls covering (a piece of) an attractor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCover {
    /// Word length for full covers; `None` for Moran cuts.
    pub depth: Option<usize>,
    /// Nominal box size used for counting.
    pub scale: Scalar,
    pub cells: Vec<(Word, Interval)>,
}

impl IntervalCover {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Union of the hulls as sorted disjoint intervals.
    pub fn merged(&self) -> Vec<Interval> {
        merge_intervals(self.cells.iter().map(|(_, iv)| iv.clone()).collect())
    }

    pub fn union_contains(&self, x: &Scalar) -> bool {
        self.cells.iter().any(|(_, iv)| iv.contains(x))
    }

    /// Total width `Σ |hull|` before merging.
    pub fn total_width(&self) -> Scalar {
        self.cells
            .iter()
            .fold(Scalar::zero(), |acc, (_, iv)| acc + iv.width())
    }
}
