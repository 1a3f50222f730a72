//! Multiplier densities `Q`, `P`, `R`, their closed-form geometric factors,
//! mantle and boundary terms, flux bookkeeping and manufactured-solution
//! verification.

pub mod densities;
pub mod flux;
pub mod manufactured;

pub use densities::{
    boundary_density, div_alpha, energy_density, h_alpha, mantle_density, multiplier_value, qpr_densities,
    slice_weight, time_slice_i, time_slice_i_expansion, FieldSample, MultiplierDensities,
};
pub use flux::{flux_accumulate, flux_density, FluxLedger, FluxRecord};
pub use manufactured::{fitted_order, identity_residual, residual_table, IdentitySetup, Jet, Manufactured, ResidualRow};
