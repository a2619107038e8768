//! Multi-frequency resonances of a superconducting waveguide resonator with a
//! periodically flux-modulated inline SQUID.
//!
//! The crate is organized as a pipeline:
//!
//! - [`circuit`] — physical parameters and the dimensionless constants derived
//!   from them,
//! - [`modesolver`] — roots of the truncated transcendental resonance
//!   condition, sideband amplitudes and spatial mode profiles,
//! - [`quantizer`] — effective oscillator constants and zero-point amplitudes
//!   of a solved mode,
//! - [`coupling`] — transmon charge coupling, sideband couplings, cross-Kerr
//!   shift and multi-tone gate calibration,
//! - [`dynamics`] — a dense Lindblad master-equation engine with a bichromatic
//!   two-qubit gate on top, plus entanglement metrics,
//! - [`tdoracle`] — an independent leapfrog simulation of the discrete LC
//!   chain used to cross-check the frequency-domain solver.
//!
//! All quantities are SI with angular frequencies in rad/s. Configuration
//! boundaries (GHz, cm, fF) are converted once, in the CLI layer.

pub mod circuit;
pub mod consts;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod modesolver;
pub mod quantizer;
mod roots;
pub mod tdoracle;

pub use circuit::{derive_constants, validate, CircuitParams, DerivedConstants, DriveSet, DriveTone};
pub use error::{Error, Result};
pub use modesolver::{
    drive_sweep, floquet_mode, floquet_mode_general, mode_profile, multi_tone_carrier,
    static_odd_modes, FloquetMode, ModeProfile,
};
pub use coupling::{
    calibrate_gate, charge_matrix_element, cross_kerr, quasi_static_coupling, sideband_coupling,
    CouplingResult, GateCalibration, Sideband, TransmonParams,
};
pub use quantizer::{
    effective_capacitance, kerr_coefficient, quantize, voltage_prefactors, QuantizedMode,
};
