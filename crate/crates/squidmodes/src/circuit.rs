//! Resonator and drive parameters, and the dimensionless constants every
//! other module consumes.

use serde::{Deserialize, Serialize};

use crate::consts::PHI_0_BAR;
use crate::error::{Error, Result};

/// Geometry and electrical constants of the resonator + inline SQUID.
///
/// The SQUID sits at x = 0 of a waveguide spanning [-d, d] with open ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Half-length d of the resonator (m).
    pub half_length: f64,
    /// Wave propagation speed v (m/s).
    pub wave_speed: f64,
    /// Characteristic impedance Z = sqrt(L_T/C_T) (Ohm).
    pub impedance: f64,
    /// Static Josephson energy E_J0 (J).
    pub ej_static: f64,
    /// SQUID capacitance C (F). The boundary condition neglects it; it only
    /// enters the effective capacitance of a quantized mode.
    pub squid_capacitance: f64,
}

/// One harmonic flux-modulation tone of the SQUID.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveTone {
    /// Angular modulation frequency omega_d (rad/s).
    pub omega_d: f64,
    /// Modulation amplitude delta_E_J (J, signed).
    pub delta_ej: f64,
}

/// A set of simultaneous modulation tones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveSet {
    pub tones: Vec<DriveTone>,
}

impl DriveSet {
    pub fn single(tone: DriveTone) -> Self {
        Self { tones: vec![tone] }
    }
}

/// Dimensionless constants of the boundary-value problem.
///
/// `gamma = 2 L_T d / L_J` measures the line inductance against the static
/// Josephson inductance; `gamma_d` is the same ratio for the modulated part
/// of each tone, with `gamma_d / gamma = delta_E_J / (2 E_J0)` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    /// Inductance per length L_T = Z/v (H/m).
    pub l_t: f64,
    /// Capacitance per length C_T = 1/(Z v) (F/m).
    pub c_t: f64,
    /// Static Josephson inductance L_J = (Φ₀/2π)²/E_J0 (H).
    pub l_j: f64,
    /// 2 L_T d / L_J.
    pub gamma: f64,
    /// Per-tone 2 L_T d / δL_J, same order as the drive set.
    pub gamma_d: Vec<f64>,
    /// Half-length d (m), carried for wavenumber/frequency conversion.
    pub half_length: f64,
    /// Wave speed v (m/s).
    pub wave_speed: f64,
}

impl DerivedConstants {
    /// omega_d d / v for a tone: the dimensionless sideband offset in kd.
    pub fn tone_offset(&self, tone: &DriveTone) -> f64 {
        tone.omega_d * self.half_length / self.wave_speed
    }

    /// gamma_d for an arbitrary tone (not necessarily in the drive set).
    pub fn gamma_d_for(&self, tone: &DriveTone, params: &CircuitParams) -> f64 {
        self.gamma * tone.delta_ej / (2.0 * params.ej_static)
    }

    /// Convert a dimensionless wavenumber kd to an angular frequency (rad/s).
    pub fn omega_of_kd(&self, kd: f64) -> f64 {
        kd * self.wave_speed / self.half_length
    }
}

fn require_positive(value: f64, field: &'static str) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::InvalidParameter {
            field,
            message: format!("{field} must be positive, got {value}"),
        });
    }
    Ok(())
}

/// Derive the dimensionless constants from circuit parameters and a drive set.
pub fn derive_constants(params: &CircuitParams, tones: &DriveSet) -> Result<DerivedConstants> {
    require_positive(params.half_length, "d")?;
    require_positive(params.wave_speed, "v")?;
    require_positive(params.impedance, "Z")?;
    require_positive(params.ej_static, "E_J0")?;
    if params.squid_capacitance < 0.0 {
        return Err(Error::InvalidParameter {
            field: "C",
            message: "SQUID capacitance must be non-negative".into(),
        });
    }
    let l_t = params.impedance / params.wave_speed;
    let c_t = 1.0 / (params.impedance * params.wave_speed);
    let l_j = PHI_0_BAR * PHI_0_BAR / params.ej_static;
    let gamma = 2.0 * l_t * params.half_length / l_j;
    let gamma_d = tones
        .tones
        .iter()
        .map(|t| gamma * t.delta_ej / (2.0 * params.ej_static))
        .collect();
    Ok(DerivedConstants {
        l_t,
        c_t,
        l_j,
        gamma,
        gamma_d,
        half_length: params.half_length,
        wave_speed: params.wave_speed,
    })
}

/// Severity of a [`validate`] finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One violated invariant.
#[derive(Debug, Clone)]
pub struct Violation {
    pub severity: Severity,
    pub field: &'static str,
    pub message: String,
}

/// Check every invariant of the parameter set; total function, returns all
/// findings instead of failing on the first.
///
/// The neglect of the SQUID capacitance in the boundary condition requires
/// C ω² << L_T/L_J; evaluated at the fundamental static mode and flagged as a
/// warning above 1% of the bound.
pub fn validate(params: &CircuitParams, tones: &DriveSet) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut err = |field: &'static str, message: String| {
        out.push(Violation {
            severity: Severity::Error,
            field,
            message,
        });
    };
    if !(params.half_length > 0.0) {
        err("d", "d must be positive".into());
    }
    if !(params.wave_speed > 0.0) {
        err("v", "v must be positive".into());
    }
    if !(params.impedance > 0.0) {
        err("Z", "Z must be positive".into());
    }
    if !(params.ej_static > 0.0) {
        err("E_J0", "E_J0 must be positive".into());
    }
    if params.squid_capacitance < 0.0 {
        err("C", "C must be non-negative".into());
    }
    for (i, tone) in tones.tones.iter().enumerate() {
        if !(tone.omega_d > 0.0) {
            err("omega_d", format!("tone {i}: omega_d must be positive"));
        }
        if tone.delta_ej.abs() >= params.ej_static {
            err(
                "delta_EJ",
                format!("tone {i}: modulation exceeds static Josephson energy"),
            );
        }
    }
    if out.is_empty() && params.squid_capacitance > 0.0 {
        // capacitance-neglect check at the fundamental static mode
        if let Ok(c) = derive_constants(params, tones) {
            if let Ok(roots) = crate::modesolver::static_odd_modes(&c, 1) {
                let omega = c.omega_of_kd(roots[0]);
                let lhs = params.squid_capacitance * omega * omega;
                let rhs = c.l_t / c.l_j;
                if lhs > 0.01 * rhs {
                    out.push(Violation {
                        severity: Severity::Warning,
                        field: "C",
                        message: format!(
                            "C omega^2 = {lhs:.3e} not small against L_T/L_J = {rhs:.3e}; \
                             boundary condition neglects the Josephson capacitance"
                        ),
                    });
                }
            }
        }
    }
    out
}
