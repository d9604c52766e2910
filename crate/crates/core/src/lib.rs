//! Numerical machinery for the two-time distribution of local random growth.
//!
//! The crate evaluates the two-time distribution `F_tt` of the KPZ fixed
//! point as a matrix Fredholm determinant coupled to a contour integral,
//! computes the coefficients of its long-time expansion and its short-time
//! limit (including the Baik-Rains distribution), and cross-validates
//! everything against a geometric last-passage percolation simulator.
//!
//! Module layout:
//!
//! * [`quad`] — Gauss-Legendre panels, graded half-line rules, truncated
//!   vertical-line contour rules and circle rules.
//! * [`airy`] — the Airy function, tilted/shifted A-functions, their
//!   contour-integral derivatives and antiderivatives.
//! * [`opcalc`] — Nyström discretization of integral operators on
//!   `L²(ℝ₊)` and on `L² ⊕ L²`: composition, resolvents, traces,
//!   Fredholm determinants.
//! * [`painleve`] — Hastings-McLeod solution of Painlevé II; an
//!   independent route to the Tracy-Widom distribution used as an oracle.
//! * [`coeffs`] — Tracy-Widom `F₂`, the b-tables, the scalars entering
//!   the long-time expansion, the short-time `ψ` and Baik-Rains `F₀`.
//! * [`twotime`] — assembly of the block operator `Q(u)`, the u-circle
//!   integral for `F_tt`, and the long/short-time cross-checks.
//! * [`lppsim`] — Monte Carlo last-passage percolation with geometric
//!   weights producing empirical one- and two-time height statistics.

pub mod airy;
pub mod coeffs;
pub mod lppsim;
pub mod opcalc;
pub mod painleve;
pub mod quad;
pub mod twotime;

mod dd;
pub mod linalg;

use thiserror::Error;

/// Errors surfaced by the numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature rules do not match")]
    RuleMismatch,
    #[error("operator is numerically singular (condition estimate {0:.3e})")]
    NearSingular(f64),
    #[error("quadrature did not converge: doubling nodes moved the value by {0:.3e}")]
    NotConverged(f64),
    #[error("derivative extrapolation disagreement {got:.3e} exceeds {tol:.3e}")]
    DerivativeDisagreement { got: f64, tol: f64 },
    #[error("contour configuration violates the ordering constraints: {0}")]
    ContourViolation(String),
    #[error("exponential factorization inadmissible: {0}")]
    FactorizationInadmissible(String),
    #[error("fit failure: {0}")]
    FitFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
