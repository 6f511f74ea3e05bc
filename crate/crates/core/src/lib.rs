//! Exact engine for parity-enhanced combinatorial formulae on Gauss diagrams
//! of virtual knots.
//!
//! - [`diagram`]: Gauss diagrams, the textual Gauss code, canonical keys.
//! - [`parity`]: Gaussian and index-hierarchy parities, the functorial map.
//! - [`moves`]: Reidemeister moves and diagram surgery.
//! - [`linalg`]: exact sparse kernels, ranks and particular solutions.
//! - [`polyak`]: subdiagram expansions, relation matrices, formula bases.
//! - [`formulae`]: count polynomials, generator systems and probes.

pub mod diagram;
pub mod error;
pub mod formulae;
pub mod linalg;
pub mod moves;
pub mod parity;
pub mod polyak;

pub use diagram::{Ambient, Arrow, CanonicalKey, GaussDiagram, MarkedDiagram, Sign};
pub use error::{Error, ParseError, Result};
pub use parity::ParityRule;
