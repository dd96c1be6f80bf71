//! Harmonic embeddings of weighted planar graphs and their discrete
//! potential theory, together with a continuum reference solver for the
//! linearized Monge-Ampere equation.
//!
//! The crate is organized bottom-up:
//! - [`planar`]: combinatorial maps, duals with split outer vertex, corner graphs;
//! - [`embedding`]: Tutte embeddings, dual embeddings, potentials, t-surfaces;
//! - [`meshgen`]: lattice and convex-hull graph generators;
//! - [`harmonic`]: the discrete operator, Dirichlet/Green solvers, conjugates;
//! - [`regularity`]: numerical checkers for convexity/Lipschitz/walk properties;
//! - [`walk`]: continuous-time random walks and Monte-Carlo estimators;
//! - [`continuum`]: finite-element solver for the divergence-form operator;
//! - [`harness`]: convergence experiments and cross-checks;
//! - [`render`]: SVG output.

pub mod continuum;
pub mod embedding;
pub mod expr;
pub mod geom;
pub mod harmonic;
pub mod harness;
pub mod meshgen;
pub mod planar;
pub mod regularity;
pub mod render;
pub mod rng;
pub mod sparse;
pub mod tol;
pub mod walk;

pub use geom::Cx;
