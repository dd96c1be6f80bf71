//! Central numerical tolerances.
//!
//! Everything that gets asserted somewhere lives here under a name, so the
//! tests and the library agree on one set of numbers.

/// Relative harmonicity residual allowed at an interior vertex:
/// |sum c (H(v')-H(v))| <= HARMONICITY_RTOL * sum c |H(v')-H(v)|.
pub const HARMONICITY_RTOL: f64 = 1e-10;

/// Relative target residual for conjugate-gradient solves. Tighter than the
/// harmonicity tolerance because the per-vertex residual check divides by a
/// local (mesh-scale) quantity while the solver residual is global.
pub const CG_RTOL: f64 = 1e-14;

/// Iteration cap for conjugate gradient, as a multiple of sqrt(n).
pub const CG_ITER_FACTOR: f64 = 40.0;
pub const CG_ITER_BASE: usize = 200;

/// Co-tree closure defect allowed when integrating dual embeddings,
/// potentials and conjugates (relative to the largest increment).
pub const CLOSURE_RTOL: f64 = 1e-10;

/// Agreement of the two equivalent expressions for a potential increment
/// (via the right or the left dual vertex), relative.
pub const INCREMENT_AGREEMENT_RTOL: f64 = 1e-12;

/// Per-face affine consistency of the potential, relative.
pub const FACE_AFFINE_RTOL: f64 = 1e-12;

/// |dT| = |dO| on faces of the t-surface, relative to |dT|.
pub const TSURFACE_EDGE_RTOL: f64 = 1e-12;

/// On-edge / on-vertex tolerance for point location.
pub const POINT_LOCATION_TOL: f64 = 1e-12;

/// c |v1-v2|^2 = 4 Area(T(u)) per edge, relative.
pub const WHITE_AREA_RTOL: f64 = 1e-10;

/// Loop integrals of the closed 1-form of a t-holomorphic field, relative.
pub const THOLO_LOOP_RTOL: f64 = 1e-9;

/// Green conjugate monodromy must equal -1 within this.
pub const MONODROMY_TOL: f64 = 1e-9;

/// Dirichlet energy equality between a harmonic function and its conjugate.
pub const ENERGY_EQUALITY_RTOL: f64 = 1e-9;

/// Witnesses stored in property reports must reproduce the reported extreme
/// value within this when re-evaluated.
pub const WITNESS_RTOL: f64 = 1e-9;

/// Weak residual of the finite-element solve against interior nodal tests,
/// relative to the energy scale of the system.
pub const FEM_RESIDUAL_RTOL: f64 = 1e-10;

/// Loop defect allowed when path-integrating a continuum conjugate.
pub const CONTINUUM_LOOP_TOL: f64 = 1e-8;

/// Continuum Green conjugate monodromy tolerance.
pub const CONTINUUM_MONODROMY_TOL: f64 = 1e-6;

/// Fixed constant of the Caccioppoli right-hand side; comes from a radial
/// C^2 cutoff with |grad| <= 2/r.
pub const CACCIOPPOLI_C: f64 = 4.0;
