//! Exact-arithmetic analysis of the six-map self-similar family `S_pqr` on
//! `[0, 1]`: overlap certification, weak-separation defect witnesses,
//! similarity and subsystem dimensions, and parameter scans.

pub mod affine;
pub mod certify;
pub mod dimension;
pub mod error;
pub mod interval;
pub mod scalar;
pub mod scan;
pub mod system;
pub mod word;
pub mod wsp;

pub use affine::AffineMap1D;
pub use certify::{
    certify_all_pairs, certify_pair_34, critical_addresses, hull_separation_check, Certificate,
    CertifyConfig, HullRelation, PairStatus,
};
pub use error::{Error, Result};
pub use interval::Interval;
pub use scalar::Scalar;
pub use system::{build_spqr, IFSParams, IFSystem, IntervalCover, Mode};
pub use word::{Address, Word};
