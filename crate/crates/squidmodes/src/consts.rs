//! Physical constants (SI, CODATA 2018).

/// Magnetic flux quantum h/2e (Wb).
pub const PHI_0: f64 = 2.067833848e-15;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054571817e-34;

/// Elementary charge (C).
pub const E_CHARGE: f64 = 1.602176634e-19;

/// Reduced flux quantum Φ₀/2π (Wb).
pub const PHI_0_BAR: f64 = PHI_0 / std::f64::consts::TAU;
