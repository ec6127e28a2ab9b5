//! Birkhoff normal form, resonance estimates and lattice NLS dynamics for
//! long-time localization with quasi-periodic potentials on Z^d.

pub mod lattice_poly;
pub mod potential;
pub mod resonance;
pub mod normal_form;
pub mod dynamics;
pub mod app;
