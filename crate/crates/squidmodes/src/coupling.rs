//! Transmon coupling to the multi-frequency mode and gate calibration.
//!
//! A transmon at position `x_t` couples capacitively to the local voltage of
//! the mode. The charge matrix element sets the overall scale; each frequency
//! component of the mode contributes a coupling proportional to its
//! (signed) frequency, amplitude ratio and local profile value.

use serde::Serialize;

use crate::circuit::{
    derive_constants, CircuitParams, DerivedConstants, DriveSet, DriveTone, Severity, Violation,
};
use crate::consts::{E_CHARGE, HBAR};
use crate::error::{Error, Result};
use crate::modesolver::{
    floquet_mode, mode_profile, multi_tone_carrier, sideband_amplitudes_at, static_odd_modes,
    FloquetMode, SidebandConvention,
};
use crate::quantizer::{quantize, QuantizedMode};

/// Two-level transmon parameters.
///
/// The transition frequency is an input; it is not re-derived from the
/// Josephson and charging energies. The gate charge suffers exponentially
/// suppressed dispersion at large `E_J/E_C` and is recorded but unused.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransmonParams {
    /// E_J,t / E_C (dimensionless, >> 1 in the transmon regime).
    pub ej_ec_ratio: f64,
    /// Charging energy E_C (J).
    pub charging_energy: f64,
    /// Coupling capacitance ratio beta = C_c / C_Sigma, in (0, 1).
    pub beta: f64,
    /// Qubit transition angular frequency Omega (rad/s).
    pub omega_q: f64,
    /// Position along the resonator (m).
    pub position: f64,
    /// Offset gate charge n_g (dimensionless); recorded, unused.
    pub gate_charge: f64,
    /// Energy relaxation time T1 (s).
    pub t1: f64,
    /// Total coherence time T2 (s), at most 2 T1.
    pub t2: f64,
}

impl TransmonParams {
    /// All violated invariants; sub-transmon `E_J/E_C` is a warning.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.ej_ec_ratio < 20.0 {
            out.push(Violation {
                severity: Severity::Warning,
                field: "ratio",
                message: format!(
                    "E_J/E_C = {} is below 20; charge dispersion may not be negligible",
                    self.ej_ec_ratio
                ),
            });
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            out.push(Violation {
                severity: Severity::Error,
                field: "beta",
                message: "beta must lie in (0, 1)".into(),
            });
        }
        if self.t2 > 2.0 * self.t1 {
            out.push(Violation {
                severity: Severity::Error,
                field: "T2",
                message: "T2 must not exceed 2 T1".into(),
            });
        }
        out
    }
}

/// Which frequency component of the mode carries the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sideband {
    Minus,
    Carrier,
    Plus,
}

/// A computed coupling strength.
#[derive(Debug, Clone, Serialize)]
pub struct CouplingResult {
    /// Coupling angular frequency (rad/s); real with explicit sign.
    pub g: f64,
    /// The component it refers to.
    pub sideband: Sideband,
    /// The mode it was computed against.
    pub mode: FloquetMode,
}

/// Magnitude of the two-level charge matrix element times 2 e beta:
/// g = sqrt(2) e beta (E_J,t / 8 E_C)^(1/4). The matrix element itself is
/// purely imaginary; the phase drops out of the coupling magnitudes.
pub fn charge_matrix_element(t: &TransmonParams) -> f64 {
    2f64.sqrt() * E_CHARGE * t.beta * (t.ej_ec_ratio / 8.0).powf(0.25)
}

/// Coupling of the transmon to one frequency component of a quantized mode:
/// G = g omega_j A_j u_j(x_t) / (4 sqrt(hbar C_omega omega)), with A = 1 for
/// the carrier. The lower-sideband frequency is signed, so a tone above the
/// carrier contributes with reversed sign.
pub fn sideband_coupling(
    qmode: &QuantizedMode,
    t: &TransmonParams,
    which: Sideband,
) -> Result<CouplingResult> {
    let mode = &qmode.mode;
    if t.position.abs() > mode.half_length * (1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            x: t.position,
            d: mode.half_length,
        });
    }
    let prof = mode_profile(mode, &[t.position])?;
    let (omega_minus, omega_plus) = mode.sideband_omegas();
    let (omega_j, a_j, u_j) = match which {
        Sideband::Minus => (omega_minus, mode.a_minus, prof.u_minus[0]),
        Sideband::Plus => (omega_plus, mode.a_plus, prof.u_plus[0]),
        Sideband::Carrier => (mode.omega, 1.0, prof.u_omega[0]),
    };
    let g_q = charge_matrix_element(t);
    let g = g_q * omega_j * a_j * u_j / (4.0 * (HBAR * qmode.c_omega * mode.omega).sqrt());
    Ok(CouplingResult {
        g,
        sideband: which,
        mode: *mode,
    })
}

/// Quasi-static estimate of the lower-sideband coupling.
///
/// Treats the modulated junction as a slowly varying inductance whose
/// characteristic frequency scales as sqrt(E_J), giving a relative frequency
/// swing delta_omega/omega = delta_EJ / (2 E_J0) and a sideband weight of
/// half of that. The estimate is independent of omega_d by construction and
/// uses the carrier frequency and profile of the static mode.
pub fn quasi_static_coupling(
    params: &CircuitParams,
    tone: &DriveTone,
    t: &TransmonParams,
    branch: u32,
) -> Result<CouplingResult> {
    let constants = derive_constants(params, &DriveSet::default())?;
    let static_tone = DriveTone {
        omega_d: tone.omega_d,
        delta_ej: 0.0,
    };
    let mode = floquet_mode(&constants, &static_tone, branch)?;
    let qmode = quantize(&mode, params);
    if t.position.abs() > mode.half_length * (1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            x: t.position,
            d: mode.half_length,
        });
    }
    let prof = mode_profile(&mode, &[t.position])?;
    let weight = tone.delta_ej / (4.0 * params.ej_static);
    let g_q = charge_matrix_element(t);
    let g = g_q * mode.omega * weight * prof.u_omega[0]
        / (4.0 * (HBAR * qmode.c_omega * mode.omega).sqrt());
    Ok(CouplingResult {
        g,
        sideband: Sideband::Minus,
        mode,
    })
}

/// Dispersive cross-Kerr shift chi = G_omega^2 (alpha/hbar) / (Delta (Delta +
/// alpha/hbar)), with Delta = Omega - omega and alpha = -E_C in joules.
///
/// Errors when either denominator factor falls within 1% of zero on the
/// anharmonicity scale (straddling or resonant regime).
pub fn cross_kerr(g_omega: f64, delta: f64, alpha: f64) -> Result<f64> {
    let alpha_rad = alpha / HBAR;
    let guard = 0.01 * alpha_rad.abs();
    if delta.abs() <= guard {
        return Err(Error::Resonance { which: "Delta" });
    }
    if (delta + alpha_rad).abs() <= guard {
        return Err(Error::Resonance {
            which: "Delta + alpha/hbar",
        });
    }
    Ok(g_omega * g_omega * alpha_rad / (delta * (delta + alpha_rad)))
}

/// One calibrated red/blue tone pair addressing one qubit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TonePair {
    /// Red (transfer) tone angular frequency omega_t (rad/s).
    pub omega_t: f64,
    /// Blue (parametric) tone angular frequency omega_p (rad/s).
    pub omega_p: f64,
    /// Red tone amplitude (J, positive).
    pub delta_ej_t: f64,
    /// Blue tone amplitude (J, sign-flipped to equalize coupling signs).
    pub delta_ej_p: f64,
}

/// Result of the multi-tone gate calibration.
#[derive(Debug, Clone, Serialize)]
pub struct GateCalibration {
    /// One tone pair per qubit.
    pub pairs: Vec<TonePair>,
    /// Achieved coupling magnitude (rad/s).
    pub achieved_g: f64,
    /// Gate detuning delta (rad/s).
    pub delta: f64,
    /// Self-consistent shifted carrier frequency (rad/s).
    pub omega_shifted: f64,
    /// Carrier wavenumber at the shifted operating point.
    pub kd_shifted: f64,
    /// Fixed-point iterations used.
    pub iterations: usize,
}

/// JSON calibration report.
#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    #[serde(rename = "tones_GHz")]
    pub tones_ghz: [f64; 4],
    #[serde(rename = "dEJ_over_EJ0")]
    pub dej_over_ej0: [f64; 4],
    #[serde(rename = "achieved_G_MHz")]
    pub achieved_g_mhz: f64,
    #[serde(rename = "omega_shifted_GHz")]
    pub omega_shifted_ghz: f64,
}

impl GateCalibration {
    /// The four tones in the order (t1, p1, t2, p2).
    pub fn drive_set(&self) -> DriveSet {
        let mut tones = Vec::with_capacity(4);
        for p in &self.pairs {
            tones.push(DriveTone {
                omega_d: p.omega_t,
                delta_ej: p.delta_ej_t,
            });
            tones.push(DriveTone {
                omega_d: p.omega_p,
                delta_ej: p.delta_ej_p,
            });
        }
        DriveSet { tones }
    }

    pub fn report(&self, ej_static: f64) -> CalibrationReport {
        let ds = self.drive_set();
        let mut tones_ghz = [0.0; 4];
        let mut dej = [0.0; 4];
        for (i, t) in ds.tones.iter().enumerate() {
            tones_ghz[i] = t.omega_d / std::f64::consts::TAU / 1e9;
            dej[i] = t.delta_ej / ej_static;
        }
        CalibrationReport {
            tones_ghz,
            dej_over_ej0: dej,
            achieved_g_mhz: self.achieved_g / std::f64::consts::TAU / 1e6,
            omega_shifted_ghz: self.omega_shifted / std::f64::consts::TAU / 1e9,
        }
    }
}

/// Coupling of one tone's lower sideband evaluated at a fixed composite
/// carrier root (used during calibration, where the carrier is shifted by
/// all four tones together).
fn pair_coupling_at(
    constants: &DerivedConstants,
    params: &CircuitParams,
    kd: f64,
    tone: &DriveTone,
    t: &TransmonParams,
    branch: u32,
) -> Result<f64> {
    let gamma_d = constants.gamma_d_for(tone, params);
    let offset = constants.tone_offset(tone);
    let (a_plus, a_minus) =
        sideband_amplitudes_at(constants.gamma, gamma_d, offset, kd, SidebandConvention::Printed)?;
    let mode = FloquetMode {
        branch,
        kd,
        omega: constants.omega_of_kd(kd),
        a_plus,
        a_minus,
        tone: *tone,
        half_length: constants.half_length,
        wave_speed: constants.wave_speed,
    };
    let qmode = quantize(&mode, params);
    Ok(sideband_coupling(&qmode, t, Sideband::Minus)?.g)
}

/// Calibrate the four-tone bichromatic drive for two qubits.
///
/// Each qubit n gets a tone pair omega_{t,n} = omega_s - delta - Omega_n and
/// omega_{p,n} = omega_s - delta + Omega_n referenced to a single shifted
/// carrier omega_s, which is itself the fixed point of the superposed
/// four-tone carrier shift. Per-tone amplitudes are solved by a scalar
/// secant on the forward coupling so every pair reaches |G| = target, the
/// blue amplitudes sign-flipped so all four couplings share one sign.
pub fn calibrate_gate(
    params: &CircuitParams,
    qubits: &[TransmonParams; 2],
    target_g: f64,
    delta: f64,
    branch: u32,
) -> Result<GateCalibration> {
    if target_g < 0.0 {
        return Err(Error::InvalidParameter {
            field: "target_G",
            message: "target coupling must be non-negative".into(),
        });
    }
    let constants = derive_constants(params, &DriveSet::default())?;
    let n = ((branch + 1) / 2) as usize;
    let statics = static_odd_modes(&constants, n)?;
    let kd0 = statics[n - 1];
    let mut omega_s = constants.omega_of_kd(kd0);
    let mut kd_s = kd0;
    // amplitude magnitudes in the order (t1, p1, t2, p2)
    let mut amps = [0.0f64; 4];
    let signs = [1.0f64, -1.0, 1.0, -1.0];
    let mut tone_freqs = [0.0f64; 4];
    let mut used_iterations = 0;
    const MAX_ITER: usize = 50;
    let tol = std::f64::consts::TAU * 10e3;
    for it in 0..MAX_ITER {
        used_iterations = it + 1;
        for q in qubits {
            if q.omega_q >= omega_s {
                return Err(Error::InvalidParameter {
                    field: "Omega",
                    message: format!(
                        "qubit frequency {:.4e} must lie below the shifted carrier {:.4e}",
                        q.omega_q, omega_s
                    ),
                });
            }
        }
        tone_freqs = [
            omega_s - delta - qubits[0].omega_q,
            omega_s - delta + qubits[0].omega_q,
            omega_s - delta - qubits[1].omega_q,
            omega_s - delta + qubits[1].omega_q,
        ];
        // composite carrier for the current amplitudes
        let drives = DriveSet {
            tones: (0..4)
                .map(|i| DriveTone {
                    omega_d: tone_freqs[i],
                    delta_ej: signs[i] * amps[i] * params.ej_static,
                })
                .collect(),
        };
        kd_s = multi_tone_carrier(params, &drives, branch)?;
        let omega_new = constants.omega_of_kd(kd_s);
        // per-tone amplitude secant at the current operating point
        if target_g > 0.0 {
            for i in 0..4 {
                let qubit = &qubits[i / 2];
                let g_of = |amp: f64| -> Result<f64> {
                    let tone = DriveTone {
                        omega_d: tone_freqs[i],
                        delta_ej: signs[i] * amp * params.ej_static,
                    };
                    Ok(pair_coupling_at(&constants, params, kd_s, &tone, qubit, branch)?.abs())
                };
                let (a0, a1) = (0.05, 0.10);
                let (f0, f1) = (g_of(a0)? - target_g, g_of(a1)? - target_g);
                let mut a_prev = a0;
                let mut f_prev = f0;
                let mut a_cur = a1;
                let mut f_cur = f1;
                for _ in 0..20 {
                    if f_cur.abs() < 1e-8 * target_g {
                        break;
                    }
                    let step = f_cur * (a_cur - a_prev) / (f_cur - f_prev);
                    let a_next = a_cur - step;
                    if !a_next.is_finite() || a_next <= 0.0 {
                        return Err(Error::NonConvergence {
                            what: "per-tone amplitude secant",
                            iterations: 20,
                        });
                    }
                    a_prev = a_cur;
                    f_prev = f_cur;
                    a_cur = a_next;
                    f_cur = g_of(a_cur)? - target_g;
                }
                if a_cur > 0.5 {
                    return Err(Error::AmplitudeOutOfRange { amplitude: a_cur });
                }
                amps[i] = a_cur;
            }
        }
        // on convergence keep omega_s as the reference the tone frequencies
        // were built from, so the returned record is exactly self-consistent
        if (omega_new - omega_s).abs() < tol && it > 0 {
            break;
        }
        omega_s = omega_new;
        if it + 1 == MAX_ITER {
            return Err(Error::NonConvergence {
                what: "shifted-carrier fixed point",
                iterations: MAX_ITER,
            });
        }
    }
    let pairs = vec![
        TonePair {
            omega_t: tone_freqs[0],
            omega_p: tone_freqs[1],
            delta_ej_t: amps[0] * params.ej_static,
            delta_ej_p: -amps[1] * params.ej_static,
        },
        TonePair {
            omega_t: tone_freqs[2],
            omega_p: tone_freqs[3],
            delta_ej_t: amps[2] * params.ej_static,
            delta_ej_p: -amps[3] * params.ej_static,
        },
    ];
    Ok(GateCalibration {
        pairs,
        achieved_g: target_g,
        delta,
        omega_shifted: omega_s,
        kd_shifted: kd_s,
        iterations: used_iterations,
    })
}

/// Forward-evaluate the coupling a calibration actually delivers for one of
/// its four tones, at the calibrated operating point.
pub fn calibrated_coupling(
    params: &CircuitParams,
    cal: &GateCalibration,
    qubit: &TransmonParams,
    tone: &DriveTone,
    branch: u32,
) -> Result<f64> {
    let constants = derive_constants(params, &DriveSet::default())?;
    pair_coupling_at(&constants, params, cal.kd_shifted, tone, qubit, branch)
}
