//! Desk-scale computational toolkit for the Lipschitz geometry of
//! Culler–Vogtmann Outer space of the free group `F_n` (`n = 2, 3`).
//!
//! The crate is organized bottom-up:
//!
//! * [`words`] — freely/cyclically reduced words and canonical conjugacy classes;
//! * [`aut`] — automorphisms of `F_n`, inner-ness decisions, iwip heuristics;
//! * [`stallings`] — Stallings fold graphs: subgroup membership and basis certificates;
//! * [`whitehead`] — Whitehead minimization, primitivity, common proper free factors;
//! * [`graph`] — marked metric graphs (points of volume-one Outer space);
//! * [`candidates`] — candidate loops, systole, thick part;
//! * [`lipschitz`] — one-sided and symmetrized Lipschitz metrics, exact stretch factors;
//! * [`laminations`] — rational measured laminations, the length pairing, balance parameters;
//! * [`lp`] — exact rational simplex method (Bland's rule);
//! * [`minima`] — per-simplex minimization, local search, lines of minima, balancing projection;
//! * [`contracting`] — contraction certification and axis quality reports;
//! * [`morse`] — synthetic quasi-geodesic Morse testing;
//! * [`factorgraph`] — basic classes, the shadow map, small free-factor-graph distances;
//! * [`lab`] — experiment catalog, Schottky constructions, orbit experiments, reports.

pub mod aut;
pub mod candidates;
pub mod contracting;
pub mod error;
pub mod factorgraph;
pub mod graph;
pub mod lab;
pub mod laminations;
pub mod lipschitz;
pub mod lp;
pub mod minima;
pub mod morse;
pub mod stallings;
pub mod whitehead;
pub mod words;

pub use error::{Error, Result};

/// Exact scalar used throughout the metric core.
pub type Rational = num::BigRational;

use num::BigInt;

/// Shorthand for small rational constants.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Convert an exact rational to `f64` (reports only; the core never rounds).
pub fn to_f64(r: &Rational) -> f64 {
    num::ToPrimitive::to_f64(r).expect("rational out of f64 range")
}

/// Exact dyadic rational equal to the given finite `f64`.
pub fn dyadic_from_f64(x: f64) -> Rational {
    assert!(x.is_finite());
    Rational::from_float(x).expect("finite float")
}
