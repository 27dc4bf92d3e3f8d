//! Exact-arithmetic workbench for linear programming decoding of LDPC codes,
//! spatially coupled chains, and their circulant graph covers.
//!
//! The crate is organised bottom-up:
//!
//! * [`lp`] — dense two-phase rational simplex plus small exact linear
//!   algebra helpers. Everything downstream inherits its exactness.
//! * [`graphs`] — Tanner graph constructions (regular, spatially coupled,
//!   graph cover, derived) and structural validation.
//! * [`decoder`] — the fundamental polytope and primal LP decoding.
//! * [`witness`] — dual witnesses, hyperflows, and the cycle-removal
//!   normalisation that turns one into the other.
//! * [`forest`] — extraction of the heaviest-edge subgraph and its
//!   expansion into a weighted forest.
//! * [`bounds`] — edge-weight bounds for regular and coupled ensembles.
//! * [`tightness`] — the explicit family showing the regular-code bound is
//!   tight up to constants.
//! * [`experiments`] — seeded Monte Carlo drivers over the binary
//!   symmetric channel.

pub mod bounds;
pub mod decoder;
pub mod experiments;
pub mod forest;
pub mod graphs;
pub mod lp;
pub mod tightness;
pub mod witness;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
