//! Single-atom edge-like states in 2D optical ribbons.
//!
//! The crate builds the ribbon and tilted-square geometries, the few-state
//! tunnelling Hamiltonians of the l = 0 and l = 1 orbital manifolds, their
//! dark edge-state families, and the dynamics used to probe them. The
//! [`continuum`] module integrates the full 2D Schrödinger equation on a grid
//! to extract tunnelling rates and cross-check the few-state models.
//!
//! Units: lengths in σ = √(ħ/mω), times in ω⁻¹, energies in ħω.

pub mod continuum;
pub mod darkstates;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod fewstate;
pub mod lattice;
pub mod synthetic;

pub use darkstates::{
    binary_digit, dark_edge_subspace, els_l0, els_l1, enumerate_els_l0, trial_state_l0,
    trial_state_l1, ElsL0, StateVector,
};
pub use dynamics::{EvolutionPlan, Propagator, PulseEvent};
pub use error::{Error, Result};
pub use exec::Execution;
pub use fewstate::{
    build_h0, build_h1, spectrum, CouplingSet, Hamiltonian, Manifold, ManifoldBasis, Winding,
};
pub use lattice::{build_ribbon, build_tilted_square, Lattice, RibbonSpec, SiteClass};
