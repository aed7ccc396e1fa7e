//! Translation and holonomy extension loci of knot exteriors.
//!
//! Given a two-generator presentation of a knot group with peripheral data,
//! this crate traces the real curves of boundary-elliptic and
//! boundary-hyperbolic PSL(2,R) representations, lifts them to the universal
//! cover to read off translation numbers, and reports intervals of Dehn
//! filling slopes along which the filled manifold has left-orderable
//! fundamental group.

pub mod alexander;
pub mod locus;
pub mod presentation;
pub mod psl2r;
pub mod riley;
pub mod roots;
pub mod tracer;

pub use alexander::{
    alexander_points, alexander_points_detailed, alexander_polynomial, fox_derivative,
    AlexanderPoint, LaurentPoly,
};
pub use presentation::{parse_presentation, Presentation, Word};
pub use roots::positive_real_roots;

use thiserror::Error as ThisError;

/// Two-bridge presentation of b(p, q) with the Seifert genus filled in from
/// the Alexander degree, which computes it for two-bridge knots.
pub fn two_bridge(p: u64, q: u64) -> Result<Presentation, Error> {
    let mut pres = presentation::two_bridge_words(p, q)?;
    let delta = alexander::alexander_polynomial(&pres)?;
    let span = delta.hi() - delta.lo();
    debug_assert!(span % 2 == 0, "knot Alexander polynomials have even span");
    pres.genus = Some((span / 2) as u32);
    Ok(pres)
}

/// Errors surfaced by the library.
#[derive(Debug, ThisError)]
pub enum Error {
    /// A value fed to an operation violates its input contract.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Presentation text that does not parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// An iteration failed to settle within its budget.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// A corrector landed on a point where the curve's Jacobian loses rank.
    #[error("branch point: {0}")]
    BranchPoint(String),
    /// A linear constraint with no integer solution.
    #[error("sheet equation has no solution: {0}")]
    Sheet(String),
    /// Serialized locus data with an unknown or mismatched version tag.
    #[error("unsupported format version: {0}")]
    Version(String),
    /// Malformed serialized locus data.
    #[error("decode error: {0}")]
    Decode(String),
}
