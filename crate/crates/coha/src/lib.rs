//! Exact computations around quivers with potential: quantum-torus partition
//! functions and their slope factorizations, refined BPS invariants,
//! finite-field point counting of dimensionally reduced module stacks,
//! shuffle-algebra graded dimensions, DWZ mutation, and the classification
//! of cubic potentials on the triangle quiver with doubled arrows.
//!
//! All coefficient arithmetic is exact: Laurent objects in `q^{1/2}` with
//! arbitrary-precision rational coefficients, and rational functions in `q`.

pub mod qarith;
pub mod quiver;
pub mod qtorus;
pub mod dimred;
pub mod shuffle;
pub mod mutation;
pub mod germ;
pub mod presets;
pub mod pipeline;
pub mod selftest;
