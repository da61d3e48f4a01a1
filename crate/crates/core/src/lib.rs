//! Multichannel Jost-matrix engine.
//!
//! Solves coupled-channel radial Schrodinger problems by integrating a
//! momentum-factorized linear system for the Jost matrices F_in and F_out,
//! from which S-matrices, bound states and resonances on any sheet of the
//! energy Riemann surface follow. A power-series expansion of the factorized
//! matrices around a chosen center gives a semi-analytic Jost matrix that can
//! be evaluated cheaply anywhere inside its validity domain, on any sheet.

pub mod analysis;
pub mod channels;
pub mod error;
pub mod expansion;
pub mod potential;
pub mod riccati;
pub mod solver;

pub use analysis::{
    bound_state_scan, cross_sections, cross_sections_to_csv, det_fin, find_spectral_point,
    s_matrix, spectral_points_to_csv, symmetry_residual, CrossSectionRow, DetSource,
    SpectralPoint,
};
pub use channels::{Channel, ChannelSet, SheetSelector};
pub use error::{JostError, Result};
pub use expansion::{
    accuracy_map, domain_contains, domain_margin, real_axis_crossing, AccuracyMap,
    ExpansionTable, GridSpec,
};
pub use potential::{
    NoroTaylorPotential, PolyExpPotential, RadialPotential, TabulatedPotential, ZeroPotential,
};
pub use solver::{
    integrate_coefficients, integrate_direct, integrate_tilde, jost_from_tilde, JostPair,
    Rotation, SolverSettings, TildePair,
};
