//! Geometric and fractional phases of entangled two-qudit pure states
//! under local unitary evolutions.
//!
//! The library is organized around the su(d) Lie algebra in a trace
//! normalization Tr(T_A T_B) = δ_AB/(2d):
//!
//! - [`algebra`]: generators, structure constants, roots, fundamental and
//!   magnetic weights, adjoint matrices, embedded su(2) triplets.
//! - [`states`]: two-qudit states as d×d coefficient matrices, invariants
//!   I_p, concurrence, SU(d)-constrained Schmidt/polar decompositions, and
//!   the deformation retract onto maximally entangled states.
//! - [`evolution`]: local unitary paths t ↦ (S₁(t), S₂(t)), Cartan weight
//!   loops, coset loops, connections and moving frames, and the coset/Cartan
//!   split S = UV.
//! - [`phase`]: the kinematic (Mukunda–Simon) geometric phase, its
//!   decomposition into overlap, Cartan and coset sectors, and fractional
//!   phase detection.
//! - [`monopole`]: two-parameter coset surfaces, the parameter-space
//!   connection C^A_μ, flatness and Stokes checks, and the monopole-like
//!   flux form of the coset phase contribution.
//! - [`topology`]: center-element classification, the adjoint image
//!   R(S), projective equivalence, and retraction verification.
//! - [`io`]: JSON schemas for states and paths.
//! - [`sample`]: seeded random states, unitaries and paths used by the
//!   verification suites.

pub mod algebra;
pub mod error;
pub mod evolution;
pub mod io;
pub mod linalg;
pub mod monopole;
pub mod phase;
pub mod sample;
pub mod states;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
