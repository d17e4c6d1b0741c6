//! Quantum-measurement collapse as a first-passage random walk, seeded by
//! symmetrized system-detector states and their conjugate detector images.
//!
//! The crate has four layers:
//!
//! - [`state_algebra`]: labeled complex state vectors, tensor-product
//!   composites, permutation parity, pairwise (anti)symmetrization, and
//!   Gaussian-packet overlap decay.
//! - [`detector_imaging`]: the detector modeled as a sea of paired
//!   state/anti-state microstates; bosonic and fermionic system-detector
//!   composites, exchange-term decomposition, hole-pair reduction, conjugate
//!   image extraction, diagonal bound states, and a no-cloning witness.
//! - [`collapse_walk`]: discretization of Born weights onto a simplex
//!   lattice, the symmetric pair-transfer walk with face absorption, and an
//!   exact absorbing-chain oracle for the absorption probabilities.
//! - [`ensemble`]: seed-reproducible parallel ensembles, chi-square
//!   goodness of fit, efficiency thinning, and JSON/CSV export.
//!
//! The `qcollapse` binary exposes the same operations as subcommands; see
//! [`cli`]. Runnable walkthroughs live in the crate's `examples/` directory.

pub mod cli;
pub mod collapse_walk;
pub mod detector_imaging;
pub mod ensemble;
pub mod error;
pub mod rng;
pub mod special;
pub mod state_algebra;

pub use error::{Error, Result};

pub use collapse_walk::{
    absorption_oracle, discretize, run_collapse, CollapseOutcome, LatticeWalkState, Rounding,
    SimplexPoint, WalkConfig,
};
pub use detector_imaging::{
    antisymmetrize_fermion, born_weights, build_sea, combine_unsymmetrized, decompose_exchange,
    extract_image, fermion_effective_product, form_bound_state, hole_reduce, no_cloning_witness,
    symmetrize_boson, BoundState, DetectorSea, ExchangeDecomposition, ImageState,
};
pub use ensemble::{chi_square_gof, export, run_ensemble, EnsembleConfig, EnsembleStats};
pub use state_algebra::{
    exchange_term_norm, permutation_sign, symmetrize_pair, BasisLabel, CompositeState,
    GaussianPacket, Grid1D, ProductTerm, PureState, Slot, Statistics,
};
