//! One-dimensional affine maps `x ↦ offset + ratio·x` with exact coefficients.
//!
//! A negative ratio encodes an orientation-reversing map, so composition
//! stays a plain product of ratios.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineMap1D {
    ratio: Scalar,
    offset: Scalar,
}

impl AffineMap1D {
    pub fn new(ratio: Scalar, offset: Scalar) -> Self {
        AffineMap1D { ratio, offset }
    }

    pub fn identity() -> Self {
        AffineMap1D::new(Scalar::one(), Scalar::zero())
    }

    pub fn ratio(&self) -> &Scalar {
        &self.ratio
    }

    pub fn offset(&self) -> &Scalar {
        &self.offset
    }

    pub fn is_identity(&self) -> bool {
        self.ratio == 1 && self.offset.is_zero()
    }

    pub fn is_contraction(&self) -> bool {
        let m = self.ratio.abs();
        m.is_positive() && m < 1
    }

    pub fn apply(&self, x: &Scalar) -> Scalar {
        &self.offset + &self.ratio * x
    }

    /// `self ∘ inner`, i.e. `x ↦ self(inner(x))`.
    pub fn compose(&self, inner: &AffineMap1D) -> AffineMap1D {
        AffineMap1D {
            ratio: &self.ratio * &inner.ratio,
            offset: &self.offset + &self.ratio * &inner.offset,
        }
    }

    /// `self` composed with itself `k` times; `k = 0` gives the identity.
    pub fn power(&self, k: usize) -> AffineMap1D {
        let mut acc = AffineMap1D::identity();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }

    pub fn inverse(&self) -> Result<AffineMap1D> {
        if self.ratio.is_zero() {
            return Err(Error::NotInvertible);
        }
        let ratio = self.ratio.recip();
        let offset = -(&self.offset * &ratio);
        Ok(AffineMap1D { ratio, offset })
    }

    pub fn fixed_point(&self) -> Result<Scalar> {
        if self.ratio == 1 {
            return Err(Error::NoFixedPoint);
        }
        Ok(&self.offset / (Scalar::one() - &self.ratio))
    }

    /// Exact image of a closed interval; endpoints swap for negative ratio.
    pub fn image(&self, iv: &Interval) -> Interval {
        Interval::spanning(self.apply(iv.lo()), self.apply(iv.hi()))
    }
}

impl fmt::Display for AffineMap1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x ↦ {} + ({})·x", self.offset, self.ratio)
    }
}

impl fmt::Debug for AffineMap1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
