//! Exact lazy random walks on finitely generated groups.
//!
//! The crate computes the n-step distributions `P^(n)` of the lazy walk
//! `P = ½δ_e + ½·uniform(S)` on ℤ^d, the integer Heisenberg group, free
//! groups, lamplighters `ℤ_m ≀ ℤ` and `ℤ ≀ ℤ`, and derives from them:
//!
//! - observables: return probability, entropy, speed, off-diagonal profiles,
//!   and the two norm identities relating `‖P^(n) − ρ_g P^(n)‖²` and
//!   `‖∇P^(n)‖²` to return probabilities;
//! - an equivariant cocycle built from the walk and the compression function
//!   it certifies;
//! - exponent fits and a suite of inequality checks among return
//!   probability, entropy, speed, volume growth and compression.

pub mod compression;
pub mod error;
pub mod exponents;
pub mod group;
pub mod numeric;
pub mod observables;
pub mod suite;
pub mod walk;

pub use error::{Error, Result};
pub use group::{
    BallTable, FreeAbelian, FreeGroup, Group, GroupSpec, Heisenberg, LampElem, MemoryBudget, Wreath,
};
pub use walk::{SparseMeasure, WalkOptions, WalkTrace};
