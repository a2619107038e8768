//! Effective-oscillator quantization of a solved mode.
//!
//! The carrier amplitude of a multi-frequency mode behaves as a harmonic
//! oscillator with effective capacitance `C_omega` fixed by the kinetic part
//! of the Lagrangian and `L_omega` chosen to reproduce the carrier frequency.
//! Zero-point amplitudes and the quartic (Kerr) correction follow.

use serde::Serialize;

use crate::circuit::CircuitParams;
use crate::consts::{HBAR, PHI_0_BAR};
use crate::error::{Error, Result};
use crate::modesolver::{mode_profile, FloquetMode};

/// A quantized mode: oscillator constants and zero-point amplitudes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuantizedMode {
    /// Effective capacitance C_omega (F).
    pub c_omega: f64,
    /// Effective inductance 1/(C_omega omega^2) (H).
    pub l_omega: f64,
    /// Zero-point flux sqrt(hbar / 2 C_omega omega) (Wb).
    pub phi_zpf: f64,
    /// Zero-point charge sqrt(hbar C_omega omega / 2) (C).
    pub q_zpf: f64,
    /// Self-Kerr coefficient (rad/s, negative).
    pub kerr: f64,
    /// The underlying resonance.
    pub mode: FloquetMode,
}

/// C_omega = C_T d (1 + sin(2kd)/(2kd)) + C cos^2(kd).
pub fn effective_capacitance(mode: &FloquetMode, params: &CircuitParams) -> f64 {
    let c_t = 1.0 / (params.impedance * params.wave_speed);
    let kd = mode.kd;
    c_t * params.half_length * (1.0 + (2.0 * kd).sin() / (2.0 * kd))
        + params.squid_capacitance * kd.cos().powi(2)
}

/// Quartic correction to the junction cosine, expressed as the a†a†aa
/// prefactor in angular-frequency units:
/// kerr = -(E_J0 / 4 hbar) (phi_zpf / (Φ₀/2π))⁴ cos⁴(kd).
pub fn kerr_coefficient(qmode: &QuantizedMode, params: &CircuitParams) -> f64 {
    let phase_zpf = qmode.phi_zpf / PHI_0_BAR;
    -(params.ej_static / (4.0 * HBAR)) * phase_zpf.powi(4) * qmode.mode.kd.cos().powi(4)
}

/// Build the full quantized-mode record for a solved resonance.
pub fn quantize(mode: &FloquetMode, params: &CircuitParams) -> QuantizedMode {
    let c_omega = effective_capacitance(mode, params);
    let omega = mode.omega;
    let l_omega = 1.0 / (c_omega * omega * omega);
    let phi_zpf = (HBAR / (2.0 * c_omega * omega)).sqrt();
    let q_zpf = (HBAR * c_omega * omega / 2.0).sqrt();
    let mut q = QuantizedMode {
        c_omega,
        l_omega,
        phi_zpf,
        q_zpf,
        kerr: 0.0,
        mode: *mode,
    };
    q.kerr = kerr_coefficient(&q, params);
    q
}

/// Per-photon voltage amplitudes of the carrier and the two sidebands at
/// position x: V_omega = ½ sqrt(hbar/2C_omega omega) omega u_omega(x), and
/// V_± with the sideband frequency and amplitude ratio folded in.
pub fn voltage_prefactors(qmode: &QuantizedMode, x: f64) -> Result<(f64, f64, f64)> {
    let mode = &qmode.mode;
    if x.abs() > mode.half_length * (1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            x,
            d: mode.half_length,
        });
    }
    let prof = mode_profile(mode, &[x])?;
    let scale = 0.5 * qmode.phi_zpf;
    let (omega_minus, omega_plus) = mode.sideband_omegas();
    let v_omega = scale * mode.omega * prof.u_omega[0];
    let v_plus = scale * omega_plus * mode.a_plus * prof.u_plus[0];
    let v_minus = scale * omega_minus * mode.a_minus * prof.u_minus[0];
    Ok((v_omega, v_plus, v_minus))
}

/// JSON-facing summary of one quantized mode.
#[derive(Debug, Clone, Serialize)]
pub struct ModeRecord {
    pub branch: u32,
    pub kd: f64,
    #[serde(rename = "omega_GHz")]
    pub omega_ghz: f64,
    #[serde(rename = "A_plus")]
    pub a_plus: f64,
    #[serde(rename = "A_minus")]
    pub a_minus: f64,
    #[serde(rename = "C_omega_fF")]
    pub c_omega_ff: f64,
    #[serde(rename = "phi_zpf_Wb")]
    pub phi_zpf_wb: f64,
    #[serde(rename = "kerr_kHz")]
    pub kerr_khz: f64,
}

impl QuantizedMode {
    pub fn record(&self) -> ModeRecord {
        ModeRecord {
            branch: self.mode.branch,
            kd: self.mode.kd,
            omega_ghz: self.mode.omega / std::f64::consts::TAU / 1e9,
            a_plus: self.mode.a_plus,
            a_minus: self.mode.a_minus,
            c_omega_ff: self.c_omega * 1e15,
            phi_zpf_wb: self.phi_zpf,
            kerr_khz: self.kerr / std::f64::consts::TAU / 1e3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{derive_constants, DriveSet, DriveTone};
    use crate::consts::HBAR;
    use crate::modesolver::floquet_mode;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn fig2() -> (CircuitParams, FloquetMode) {
        let params = CircuitParams {
            half_length: 0.012,
            wave_speed: 1.2e8,
            impedance: 50.0,
            ej_static: HBAR * TAU * 715e9,
            squid_capacitance: 0.0,
        };
        let c = derive_constants(&params, &DriveSet::default()).unwrap();
        let tone = DriveTone {
            omega_d: TAU * 2.0e9,
            delta_ej: 0.4 * params.ej_static,
        };
        let mode = floquet_mode(&c, &tone, 3).unwrap();
        (params, mode)
    }

    #[test]
    fn fig2_effective_capacitance() {
        let (params, mode) = fig2();
        let c = effective_capacitance(&mode, &params);
        assert_relative_eq!(c, 2.0418670e-12, max_relative = 1e-6);
    }

    #[test]
    fn capacitance_at_quarter_wave() {
        // kd = pi/2 makes sin(2kd) = 0 and cos^2(kd) = 0
        let (params, mut mode) = fig2();
        mode.kd = FRAC_PI_2;
        let c = effective_capacitance(&mode, &params);
        let c_t_d = params.half_length / (params.impedance * params.wave_speed);
        assert_relative_eq!(c, c_t_d, epsilon = 1e-25);
        let mut with_cap = params;
        with_cap.squid_capacitance = 1e-13;
        let c2 = effective_capacitance(&mode, &with_cap);
        assert_relative_eq!(c2, c_t_d, max_relative = 1e-25);
    }

    #[test]
    fn fig2_zero_point_flux() {
        let (params, mode) = fig2();
        let q = quantize(&mode, &params);
        assert_relative_eq!(q.phi_zpf, 2.3654605e-17, max_relative = 1e-6);
    }

    #[test]
    fn canonical_pair_identities() {
        let (params, mode) = fig2();
        let q = quantize(&mode, &params);
        assert_relative_eq!(q.phi_zpf * q.q_zpf, HBAR / 2.0, max_relative = 1e-12);
        assert_relative_eq!(
            q.l_omega * q.c_omega * mode.omega * mode.omega,
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn zpf_scaling_with_capacitance() {
        let (params, mode) = fig2();
        let q = quantize(&mode, &params);
        // doubling C_omega at fixed omega: q_zpf up by sqrt2, phi_zpf down by sqrt2
        let q2 = (HBAR * 2.0 * q.c_omega * mode.omega / 2.0).sqrt();
        let p2 = (HBAR / (2.0 * 2.0 * q.c_omega * mode.omega)).sqrt();
        assert_relative_eq!(q2 / q.q_zpf, 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(q.phi_zpf / p2, 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn fig2_kerr_small_and_negative() {
        let (params, mode) = fig2();
        let q = quantize(&mode, &params);
        assert!(q.kerr < 0.0);
        assert!(q.kerr.abs() / TAU < 1e6); // well below a MHz
        assert_relative_eq!(q.kerr, -2661.25, max_relative = 1e-4);
    }

    #[test]
    fn kerr_zero_at_quarter_wave_and_quartic_scaling() {
        let (params, mut mode) = fig2();
        mode.kd = FRAC_PI_2;
        let q = quantize(&mode, &params);
        assert!(q.kerr.abs() < 1e-20);
        // quartic scaling in phi_zpf
        let (params, mode) = fig2();
        let q = quantize(&mode, &params);
        let mut doubled = q;
        doubled.phi_zpf *= 2.0;
        let k2 = kerr_coefficient(&doubled, &params);
        assert_relative_eq!(k2 / q.kerr, 16.0, max_relative = 1e-12);
    }

    #[test]
    fn kerr_invariant_under_drive_sign() {
        let (params, _) = fig2();
        let c = derive_constants(&params, &DriveSet::default()).unwrap();
        let kerr_at = |amp: f64| {
            let tone = DriveTone {
                omega_d: TAU * 2.0e9,
                delta_ej: amp * params.ej_static,
            };
            let mode = floquet_mode(&c, &tone, 3).unwrap();
            quantize(&mode, &params).kerr
        };
        // kd is even in delta_EJ, so kerr is too
        assert_relative_eq!(kerr_at(0.2), kerr_at(-0.2), max_relative = 1e-12);
    }

    #[test]
    fn voltage_prefactors_ratios_and_zeros() {
        let (params, mode) = fig2();
        let q = quantize(&mode, &params);
        let x = 0.25 * mode.half_length;
        let (v_o, v_p, v_m) = voltage_prefactors(&q, x).unwrap();
        let prof = mode_profile(&mode, &[x]).unwrap();
        let (w_m, w_p) = mode.sideband_omegas();
        assert_relative_eq!(
            v_p / v_o,
            (w_p / mode.omega) * mode.a_plus * prof.u_plus[0] / prof.u_omega[0],
            max_relative = 1e-12
        );
        assert_relative_eq!(
            v_m / v_o,
            (w_m / mode.omega) * mode.a_minus * prof.u_minus[0] / prof.u_omega[0],
            max_relative = 1e-12
        );
        // no drive -> no sideband voltage
        let c = derive_constants(&params, &DriveSet::default()).unwrap();
        let tone = DriveTone {
            omega_d: TAU * 2.0e9,
            delta_ej: 0.0,
        };
        let mode0 = floquet_mode(&c, &tone, 3).unwrap();
        let q0 = quantize(&mode0, &params);
        let (_, v_p0, v_m0) = voltage_prefactors(&q0, x).unwrap();
        assert_eq!(v_p0, 0.0);
        assert_eq!(v_m0, 0.0);
        assert!(voltage_prefactors(&q, 2.0 * mode.half_length).is_err());
    }

    #[test]
    fn carrier_voltage_at_junction_edge() {
        let (params, mode) = fig2();
        let q = quantize(&mode, &params);
        let eps = 1e-12 * mode.half_length;
        let (v_o, _, _) = voltage_prefactors(&q, eps).unwrap();
        let expect = 0.5 * q.phi_zpf * mode.omega * mode.kd.cos();
        assert_relative_eq!(v_o, expect, max_relative = 1e-6);
    }
}
