//! Shared parameter fixtures for the benchmarks.

use ifs_core::{build_spqr, IFSParams, IFSystem, Scalar};

/// `(1/40, q, 1/45)` in paper mode.
pub fn params_with_q(q: Scalar) -> IFSParams {
    IFSParams::paper(Scalar::new(1, 40), q, Scalar::new(1, 45)).expect("fixture lies in the restricted box")
}

pub fn default_params() -> IFSParams {
    params_with_q(Scalar::new(1, 50))
}

/// Companion triple whose pieces certify to `ε = 10⁻¹²`.
pub fn certifiable_params() -> IFSParams {
    params_with_q(Scalar::new(1, 52))
}

pub fn default_system() -> IFSystem {
    build_spqr(&default_params())
}
