//! Band topology and stroboscopic dynamics of triple-kicked quantum rotors at resonance.
//!
//! The angular-momentum lattice l = 0, 1, … of a linear rotor driven by short
//! alignment pulses splits into N-site cells at quantum resonance. This crate
//! builds the resulting Floquet operators, labels their real eigenframes on the
//! (k, α) torus, finds band nodes and Dirac strings, evaluates patch Euler
//! classes and evolves rotor states through pulse protocols.

pub mod angular;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod topology;

pub use angular::{LatticeSpec, Mode, PulseVector};
pub use error::{Error, Result};
pub use floquet::{BandField, BandFrame, Convention, KAlphaGrid};
