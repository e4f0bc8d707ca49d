//! Coherent information of CSS stabilizer codes under erasure and Pauli noise.
//!
//! The crate computes the coherent information (CI) of a noisy encoded state
//! three ways and cross-checks them against each other:
//!
//! - exact erasure-only CI by counting recoverable logical operators,
//!   averaged over erasure configurations (enumerated or stratified Monte Carlo),
//! - exact Pauli-noise CI from coset probability tables
//!   (CI = k - H(logical class | syndrome), in bits),
//! - CI from the disordered spin models attached to the code, evaluated by
//!   exact partition-function sums.
//!
//! Pseudo-thresholds are crossings of CI curves of two code distances and
//! erasure thresholds come from finite-size scaling collapse; see [`analysis`].

pub mod analysis;
pub mod codes;
pub mod coset;
pub mod erasure;
pub mod gf2;
pub mod noise;
pub mod par;
pub mod rng;
pub mod statmech;

pub use analysis::{find_crossing, fss_collapse, CiCurve, CiPoint, CollapseResult};
pub use codes::CssCode;
pub use coset::{combined_ci, pauli_ci, CosetTable};
pub use erasure::{exact_ci, stratified_ci, ErasureAnalysis, ErasureConfig};
pub use gf2::{BitMatrix, BitVec};
pub use noise::{Couplings, NoiseSpec, PauliChannel};
pub use statmech::{ci_statmech, SpinModel};
