//! Stochastic chemical kinetics for macrosystems.
//!
//! The crate is `no_std` (it needs `alloc`) and contains the numerical
//! kernels only:
//!
//! * [`network`]: reaction networks, the text format, conservation laws.
//! * [`ssa`]: exact Markov-jump simulation at population scale `N`.
//! * [`meanfield`]: the mass-action (Guldberg–Waage) limit and its Lyapunov
//!   function.
//! * [`equilibrium`]: unitarity / detailed balance, entropy projection and
//!   exact analysis of small chains.
//! * [`models`]: the model gallery (Ehrenfest, Schlögl, wealth exchange,
//!   Lotka–Volterra, majority rule, random surfers, Kac ring, Yule, monkey text).
//! * [`stats`]: concentration checks, fits and distances used to verify the
//!   limit theorems empirically.
//!
//! File IO, the CLI and parallel ensembles live in the `macrokin` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod equilibrium;
pub mod linalg;
pub mod math;
pub mod meanfield;
pub mod models;
pub mod network;
pub mod rng;
pub mod ssa;
pub mod stats;

pub use network::{ConservationBasis, Reaction, ReactionNetwork, SpeciesTable};
pub use rng::SplitMix64;
pub use ssa::{CountState, IntensityConvention, SimConfig, Trajectory};
