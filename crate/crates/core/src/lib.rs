//! Exact intersection probabilities for needles and spherocylinders dropped
//! on a rectangular line grid, together with a reproducible Monte Carlo
//! cross-check and tools for exploring the probability landscape over shape
//! and grid parameters.
//!
//! Four problem variants are covered, each with closed forms over the full
//! parameter range (any length, any cap diameter, any cell):
//!
//! | variant | formula | simulation |
//! |---------|---------|------------|
//! | in-plane needle | [`analytic::prob_2d_needle`] | [`montecarlo::estimate`] |
//! | in-plane spherocylinder | [`analytic::prob_2d_sc`] | [`montecarlo::estimate`] |
//! | tilted needle | [`analytic::prob_3d_needle`] | [`montecarlo::estimate`] |
//! | tilted spherocylinder | [`analytic::prob_3d_sc`] | [`montecarlo::estimate`] |
//!
//! The single-line-family limits live in [`analytic::prob_bnp`], sweeps and
//! minima searches in [`landscape`], and the cross-validation suite in
//! [`verify`].

pub mod analytic;
pub mod geometry;
pub mod landscape;
pub mod montecarlo;
pub mod quadrature;
pub mod verify;

pub use geometry::{
    classify_regime, validate_and_canonicalize, Embedding, Error, GridCell, Probability, Regime,
    RegimeKind, Result, Shape, Variant,
};
pub use quadrature::QuadratureSettings;
