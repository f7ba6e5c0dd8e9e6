//! Two-dimensional continuum solver in oscillator units (ħ = m = ω = 1,
//! lengths in σ): min-of-parabolas trap landscape, local trap eigenstates,
//! split-step propagation and tunnelling-rate extraction.

mod extract;
mod fft;
mod grid;
mod local;
mod operators;
mod potential;
mod snapshot;
mod split_step;
mod validate;

pub use extract::{
    extract_coupling_l0, extract_couplings_l1, l1_bond_grid, project_two_site_l1, two_well_grid, two_well_sites,
    two_well_splitting, BondProjection, L1Couplings, TwoWellSplitting, MIN_OVERLAP_EIGENVALUE,
};
pub use grid::{default_margin, GridConfig, GridPreset, GridWavefunction, PotentialField};
pub use local::{local_state_at, prepare_local_state, radial_profile, relax_radial, LocalOrbital, RadialProfile, EDGE_TOLERANCE};
pub use operators::{angular_momentum, GridHamiltonian};
pub use potential::{build_potential, potential_from_sites, site_population, VoronoiMap, MIN_MARGIN};
pub use snapshot::{population_csv, read_snapshot, write_snapshot, Snapshot, MAGIC};
pub use split_step::{split_step_propagate, SplitStep, LEAK_BAND, LEAK_THRESHOLD};
pub use validate::{
    grid_phase_sweep, local_basis, model_hamiltonian, superpose, validate_fewstate, GridSweep, ValidationReport,
};
