//! Doubling chains of ellipsoid charts in the complement of a complex
//! algebraic hypersurface `H = {P = 0}`.
//!
//! The crate builds explicit chains of affine doubling charts joining two
//! points of the unit cube that stay clear of `H`, certifies every claimed
//! property (chart clearance, chain length, intersection radii), and
//! exercises the downstream Kobayashi-distance and doubling-constant bounds.

pub mod analysis;
pub mod chain;
pub mod clearball;
pub mod hypersurface;
pub mod multipoly;
pub mod punctured;
pub mod sampling;
pub mod svg;
pub mod unipoly;

pub use chain::{build_chain, verify_chain, ChainConfig, ChainError, DoublingChain};
pub use clearball::{find_clear_ball, ClearBall};
pub use hypersurface::{ClearanceCertificate, EllipsoidChart};
pub use multipoly::{CLine, MultiPoly};
pub use punctured::{DiskCover, PuncturedDisk};
pub use unipoly::{RootSet, UniPoly};

pub type C64 = num_complex::Complex64;
