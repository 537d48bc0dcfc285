//! Thermodynamics of a self-gravitating uniform Bose gas in a box.
//!
//! The gas self-interacts through a contact (electromagnetic) coupling and
//! through Newtonian gravity, with gravity treated either as a classical
//! field sourced by the mean density or as a quantized interaction. The two
//! treatments change the quasiparticle spectrum differently: the classical
//! one only offsets the spectrum (the heat capacity is untouched), the
//! quantized one feeds the mode-dependent box coefficients of 1/r into the
//! dispersion relation and thereby into every thermodynamic observable.
//!
//! Modules follow the pipeline: [`constants`] (species and configuration)
//! -> [`cube`] (box-potential Fourier coefficients and their oracles) ->
//! [`spectrum`] (dispersion relations and Bogolyubov coefficients) ->
//! [`thermo`] (heat-capacity mode sums) -> [`experiment`] (deviations,
//! thresholds, validity checks, scans) -> [`cli`].

pub mod cli;
pub mod constants;
pub mod cube;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod numerics;
pub mod spectrum;
pub mod thermo;

pub use constants::{
    derived_quantities, lookup_species, GasParameters, PhysicalConstants, Species, CODATA_2018,
};
pub use cube::{gk_approx, gk_oracle_1d, gk_oracle_3d, v0_closed_form, FourierMode, ModeIndex};
pub use error::{Error, Result};
pub use spectrum::{
    build_couplings, chemical_potential, classify_ngb, dispersion, BogolyubovCoefficients,
    CouplingSet, DispersionPoint, GravityTheory, NgbClass, Spectrum,
};
pub use thermo::{heat_capacity, internal_energy, mode_term, ThermoResult};
