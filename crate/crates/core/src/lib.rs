//! Random current representation of ferromagnetic Ising models.
//!
//! Exact small-graph oracles (`exact`, `transfer`), Monte Carlo sampling of
//! sourceless currents and spins (`sampler`), cluster analysis of duplicated
//! currents (`percolation`) and torus Fourier tools (`spectral`). Couplings
//! and regions are generic over [`num::Real`]; the samplers work in `f64`.

// `!(x >= 0)` style tests reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod num;
pub mod region;
pub mod currents;
pub mod exact;
pub mod transfer;
pub mod rng;
pub mod stats;
pub mod sampler;
pub mod percolation;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};

pub type Model = model::CouplingModel<f64>;
pub type Lattice = region::Region<f64>;
pub type ModelF32 = model::CouplingModel<f32>;
pub type LatticeF32 = region::Region<f32>;
