//! Exact and statistical computations for rational points along expanding
//! closed horocycles on the modular surface.
//!
//! The library is organized around a few layers:
//!
//! * [`numth`] — arbitrary-precision rationals, continued fractions,
//!   multiplicative functions, and witness searches for `psi`-approximability;
//! * [`hyperbolic`] — exact upper half-plane points, integer Möbius actions,
//!   fundamental-domain reduction with word recording, orbit heights and
//!   cusp-neighborhood membership;
//! * [`measures`] — test functions, hyperbolic area means, horocycle means,
//!   the `nu` family of limit measures, and Monte-Carlo estimation over the
//!   fundamental domain;
//! * [`sampling`] — the evenly spaced sample sets on closed horocycles, their
//!   empirical means, minimum orbit heights, and excursion diagnostics;
//! * [`symmetry`] — exact symmetry identities for the sample sets and their
//!   decompositions into primitive pieces, with verifiable witnesses;
//! * [`congruence`] — the congruence covers attached to a sample density
//!   `n`: membership, indices, cusps, widths, and cylinder volumes;
//! * [`hecke`] — classical and normalized double-coset averaging operators
//!   and second-moment estimators driven by them;
//! * [`diophantine_experiments`] — certified cusp-excursion predictions for
//!   targets with prescribed Diophantine behavior.
//!
//! Everything that is claimed exactly is computed in exact rational
//! arithmetic and, where practical, returned together with a certificate
//! that can be re-verified independently. Monte-Carlo estimators report
//! their standard errors and are deterministic for a fixed seed regardless
//! of thread count.

pub mod numth;
pub mod hyperbolic;
pub mod measures;
pub mod sampling;
pub mod symmetry;
pub mod congruence;
pub mod hecke;
pub mod diophantine_experiments;

pub(crate) mod mc;

pub use numth::{Int, Rational};
