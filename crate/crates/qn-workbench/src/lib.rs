//! Exact symbolic workbench for the quadratic algebras `Q_n` and `gr Q_n`
//! on subset generators, and for their homological invariants.
//!
//! The crate provides:
//! - free-algebra arithmetic with the subset generator order ([`freealg`]),
//! - exact sparse linear algebra over Q and prime fields ([`linalg`]),
//! - noncommutative Groebner bases for homogeneous ideals, truncated by
//!   degree ([`groebner`]),
//! - the defining presentations, closed-form Groebner basis, and normal-word
//!   combinatorics of the `Q_n` family ([`qn`]),
//! - Hilbert series, quadratic duals, and the alternating-sum consistency
//!   check ([`series`]),
//! - the explicit generator-indexed complex, its homology, bigraded Tor, and
//!   the Koszulity verdict ([`resolution`]).

pub mod freealg;
pub mod groebner;
pub mod linalg;
pub mod qn;
pub mod resolution;
pub mod scalar;
pub mod series;
pub mod util;

/// Errors shared across the workbench.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("relation {0} is zero")]
    ZeroRelation(usize),
    #[error("relation {0} is not homogeneous")]
    NonHomogeneous(usize),
    #[error("relation {0} is a nonzero constant")]
    ConstantRelation(usize),
    #[error("relation {0} is not quadratic")]
    NotQuadratic(usize),
    #[error("n = {got} is out of range (need n >= {min})")]
    BadN { min: u8, got: u8 },
    #[error("degree bound {got} is too small (need at least {min})")]
    BadDegree { min: usize, got: usize },
    #[error("truncation degree {have} is insufficient (need at least {need})")]
    InsufficientTruncation { need: usize, have: usize },
    #[error("invalid overlap descriptor")]
    InvalidOverlap,
    #[error("subalgebra generator set is not downward closed")]
    NotDownwardClosed,
    #[error("cache file rejected: {0}")]
    Cache(String),
    #[error("presentation file rejected: {0}")]
    Presentation(String),
    #[error(transparent)]
    Parse(#[from] freealg::ParseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
