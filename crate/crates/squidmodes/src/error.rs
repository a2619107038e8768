//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A physical parameter violates its invariant.
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: &'static str, message: String },

    /// No sign change found while bracketing a root.
    #[error("no root in bracket [{lo}, {hi}] for branch {branch}")]
    NoRootInBracket { branch: u32, lo: f64, hi: f64 },

    /// A sideband denominator is too close to a pole of the truncated
    /// resonance condition; the three-component ansatz is invalid there.
    #[error("sideband denominator {value:.3e} within pole threshold {threshold:.1e} (sideband resonant with another mode)")]
    PoleProximity { value: f64, threshold: f64 },

    /// The outermost sideband amplitude of the generalized solver is not
    /// negligible; the truncation order is too low.
    #[error("truncation at M={order} not converged: |phi_M| = {amplitude:.3e} exceeds 0.1 |phi_0|")]
    NonConvergedTruncation { order: usize, amplitude: f64 },

    /// An iterative solve did not converge.
    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    /// Gate calibration would require a modulation amplitude outside the
    /// weak-modulation regime.
    #[error("required modulation amplitude {amplitude:.4} E_J0 exceeds 0.5")]
    AmplitudeOutOfRange { amplitude: f64 },

    /// A coordinate lies outside the resonator.
    #[error("position {x:.4e} m outside resonator [-{d:.4e}, {d:.4e}] m")]
    OutOfRange { x: f64, d: f64 },

    /// Both factors of the dispersive denominator must stay away from zero.
    #[error("cross-Kerr denominator factor within 1% of resonance ({which})")]
    Resonance { which: &'static str },

    /// The integration step is too coarse for the requested dynamics.
    #[error("step resolution violated: dt * max rate = {product:.3e} >= 0.05")]
    StepResolution { product: f64 },

    /// Density-matrix positivity was lost during integration.
    #[error("positivity lost: smallest eigenvalue {min_eig:.3e} below -1e-5")]
    PositivityLoss { min_eig: f64 },

    /// Mean photon number climbed too close to the Fock cutoff.
    #[error("Fock overflow: mean photon number {n_mean:.3} exceeds N/4 = {limit:.2}")]
    FockOverflow { n_mean: f64, limit: f64 },

    /// Operator or state dimensions do not match.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Input is not a density matrix.
    #[error("not a density matrix: {reason}")]
    NotADensityMatrix { reason: String },

    /// Explicit time stepping would be unstable.
    #[error("CFL violation: dt = {dt:.3e} s >= dx/v = {limit:.3e} s")]
    CflViolation { dt: f64, limit: f64 },

    /// The chain simulation blew up (static drive should conserve energy).
    #[error("chain instability: flux norm grew {factor:.1e}x")]
    Instability { factor: f64 },

    /// Not enough samples for spectral estimation.
    #[error("insufficient samples: {got} < {required}")]
    InsufficientSamples { got: usize, required: usize },
}
