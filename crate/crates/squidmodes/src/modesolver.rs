//! Frequency-domain solver for the modulated resonator.
//!
//! Odd modes of the open-open resonator with an inline SQUID at x = 0 obey
//! the static condition `kd tan(kd) = gamma`. A harmonic drive couples each
//! mode to sidebands at `omega ± omega_d`; truncating to one sideband pair
//! yields a closed transcendental condition for the carrier wavenumber and
//! explicit sideband amplitude ratios. A generalized solver keeps `M`
//! sideband pairs and reduces the resulting tridiagonal system by continued
//! fractions; at `M = 1` it is algebraically identical to the closed form.

use serde::Serialize;

use crate::circuit::{derive_constants, CircuitParams, DerivedConstants, DriveSet, DriveTone};
use crate::error::{Error, Result};
use crate::roots::{bisect_secant, expand_bracket};

/// Tolerance on kd for all root solves.
const KD_TOL: f64 = 1e-13;
/// Below this magnitude a sideband denominator counts as a pole.
const POLE_THRESHOLD: f64 = 1e-3;
/// Residual bound on the one-pair resonance condition, dimensionless.
const RESIDUAL_BOUND: f64 = 1e-9;

/// Sign convention of the sideband denominator `D`.
///
/// The one-pair resonance condition and the amplitude ratios carry a
/// denominator evaluated at the sideband wavenumbers. `Printed` uses
/// `D(x) = gamma cos x + x sin x`; `Eliminated` uses
/// `D(x) = x sin x - gamma cos x`, which is what direct elimination of the
/// sideband recursion produces. The two differ in the sign of the frequency
/// shift and of the amplitude ratios. The public solver uses `Printed`,
/// which reproduces the reference kd = 4.614 root; the time-domain chain
/// follows `Eliminated` (see tdoracle tests).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SidebandConvention {
    Printed,
    // exercised by the oracle-comparison tests only
    #[allow(dead_code)]
    Eliminated,
}

impl SidebandConvention {
    #[inline]
    fn denom(self, x: f64, gamma: f64) -> f64 {
        match self {
            SidebandConvention::Printed => gamma * x.cos() + x * x.sin(),
            SidebandConvention::Eliminated => x * x.sin() - gamma * x.cos(),
        }
    }
}

/// A solved multi-frequency resonance of one odd branch.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FloquetMode {
    /// Odd-mode index: 1, 3, 5, ...
    pub branch: u32,
    /// Dimensionless carrier wavenumber.
    pub kd: f64,
    /// Carrier angular frequency, `kd v / d` exactly (rad/s).
    pub omega: f64,
    /// Upper sideband amplitude ratio phi(omega + omega_d)/phi(omega).
    pub a_plus: f64,
    /// Lower sideband amplitude ratio phi(omega - omega_d)/phi(omega).
    pub a_minus: f64,
    /// The tone this mode was solved against.
    pub tone: DriveTone,
    /// Half-length of the resonator (m).
    pub half_length: f64,
    /// Wave speed (m/s).
    pub wave_speed: f64,
}

impl FloquetMode {
    /// Dimensionless sideband offset `omega_d d / v`.
    pub fn tone_offset(&self) -> f64 {
        self.tone.omega_d * self.half_length / self.wave_speed
    }

    /// Sideband angular frequencies (signed; the lower one may be negative
    /// for tones above the carrier).
    pub fn sideband_omegas(&self) -> (f64, f64) {
        (self.omega - self.tone.omega_d, self.omega + self.tone.omega_d)
    }
}

/// Spatial profiles of the carrier and sideband components on a grid.
#[derive(Debug, Clone)]
pub struct ModeProfile {
    /// Sample positions (m), within [-d, d].
    pub x: Vec<f64>,
    /// Carrier profile u_omega(x).
    pub u_omega: Vec<f64>,
    /// Upper sideband profile u_plus(x).
    pub u_plus: Vec<f64>,
    /// Lower sideband profile u_minus(x).
    pub u_minus: Vec<f64>,
}

fn root_index(branch: u32) -> Result<usize> {
    if branch == 0 || branch % 2 == 0 {
        return Err(Error::InvalidParameter {
            field: "branch",
            message: format!("branch must be odd (1, 3, 5, ...), got {branch}"),
        });
    }
    Ok(((branch + 1) / 2) as usize)
}

/// First `n_roots` solutions of `kd tan(kd) = gamma`, one per odd branch.
///
/// The n-th root lies in ((n-1)π, (n-½)π) and approaches (n-½)π as
/// gamma → ∞.
pub fn static_odd_modes(constants: &DerivedConstants, n_roots: usize) -> Result<Vec<f64>> {
    let gamma = constants.gamma;
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter {
            field: "gamma",
            message: format!("gamma must be positive, got {gamma}"),
        });
    }
    if n_roots == 0 {
        return Err(Error::InvalidParameter {
            field: "n_roots",
            message: "n_roots must be at least 1".into(),
        });
    }
    let mut out = Vec::with_capacity(n_roots);
    for n in 1..=n_roots {
        // pole-free residual form: x sin x - gamma cos x
        let f = |x: f64| x * x.sin() - gamma * x.cos();
        let lo = (n as f64 - 1.0) * std::f64::consts::PI + 1e-12;
        let hi = (n as f64 - 0.5) * std::f64::consts::PI - 1e-12;
        if f(lo) * f(hi) > 0.0 {
            return Err(Error::NoRootInBracket {
                branch: 2 * n as u32 - 1,
                lo,
                hi,
            });
        }
        let kd = bisect_secant(f, lo, hi, KD_TOL);
        // pole-free residual form stays conditioned for all gamma
        debug_assert!((kd * kd.sin() - gamma * kd.cos()).abs() < 1e-9 * gamma);
        out.push(kd);
    }
    Ok(out)
}

/// Sideband amplitude ratios at a fixed carrier wavenumber.
pub(crate) fn sideband_amplitudes_at(
    gamma: f64,
    gamma_d: f64,
    offset: f64,
    kd: f64,
    conv: SidebandConvention,
) -> Result<(f64, f64)> {
    let d_plus = conv.denom(kd + offset, gamma);
    let d_minus = conv.denom(kd - offset, gamma);
    for d in [d_plus, d_minus] {
        if d.abs() < POLE_THRESHOLD {
            return Err(Error::PoleProximity {
                value: d,
                threshold: POLE_THRESHOLD,
            });
        }
    }
    let num = gamma_d * kd.cos();
    Ok((num / d_plus, num / d_minus))
}

/// Residual of the one-pair resonance condition multiplied by sin(kd), which
/// removes the cot poles without moving the roots inside a branch bracket.
fn driven_residual(
    kd: f64,
    gamma: f64,
    tones: &[(f64, f64)], // (gamma_d, offset)
    conv: SidebandConvention,
) -> f64 {
    let mut r = kd * kd.sin() - gamma * kd.cos();
    for &(gd, off) in tones {
        let s = (kd + off).cos() / conv.denom(kd + off, gamma)
            + (kd - off).cos() / conv.denom(kd - off, gamma);
        r -= gd * gd * kd.cos() * s;
    }
    r
}

pub(crate) fn solve_driven_root(
    gamma: f64,
    tones: &[(f64, f64)],
    branch: u32,
    seed: f64,
    conv: SidebandConvention,
) -> Result<f64> {
    let n = root_index(branch)? as f64;
    let f = |x: f64| driven_residual(x, gamma, tones, conv);
    let (lo, hi) = expand_bracket(&f, seed, 0.2, 0.6).ok_or(Error::NoRootInBracket {
        branch,
        lo: seed - 0.6,
        hi: seed + 0.6,
    })?;
    let kd = bisect_secant(&f, lo, hi, KD_TOL);
    let (bound_lo, bound_hi) = ((n - 1.0) * std::f64::consts::PI, (n + 1.0) * std::f64::consts::PI);
    if !(kd > bound_lo && kd < bound_hi) {
        return Err(Error::NoRootInBracket {
            branch,
            lo: bound_lo,
            hi: bound_hi,
        });
    }
    // residual of the condition in its kd = gamma cot(kd) + ... form
    let residual = f(kd) / kd.sin();
    if residual.abs() > RESIDUAL_BOUND {
        // a pole was mistaken for a root; report the nearest denominator
        let worst = tones
            .iter()
            .flat_map(|&(_, off)| [conv.denom(kd + off, gamma), conv.denom(kd - off, gamma)])
            .fold(f64::INFINITY, |acc, d| if d.abs() < acc.abs() { d } else { acc });
        return Err(Error::PoleProximity {
            value: worst,
            threshold: POLE_THRESHOLD,
        });
    }
    Ok(kd)
}

fn floquet_mode_with(
    constants: &DerivedConstants,
    tone: &DriveTone,
    branch: u32,
    conv: SidebandConvention,
) -> Result<FloquetMode> {
    let n = root_index(branch)?;
    let statics = static_odd_modes(constants, n)?;
    let seed = statics[n - 1];
    let gamma = constants.gamma;
    // gamma_d from the tone itself; the ratio to gamma is delta_EJ/(2 E_J0),
    // recovered here through L_J without needing E_J0 explicitly
    let gamma_d = gamma_d_of(constants, tone);
    let offset = constants.tone_offset(tone);
    let kd = if gamma_d == 0.0 {
        seed
    } else {
        solve_driven_root(gamma, &[(gamma_d, offset)], branch, seed, conv)?
    };
    let (a_plus, a_minus) = if gamma_d == 0.0 {
        (0.0, 0.0)
    } else {
        sideband_amplitudes_at(gamma, gamma_d, offset, kd, conv)?
    };
    Ok(FloquetMode {
        branch,
        kd,
        omega: constants.omega_of_kd(kd),
        a_plus,
        a_minus,
        tone: *tone,
        half_length: constants.half_length,
        wave_speed: constants.wave_speed,
    })
}

/// gamma_d of a tone against the constants' static Josephson inductance:
/// gamma_d = 2 L_T d / deltaL_J with deltaL_J = 2 (Φ₀/2π)² / delta_EJ.
fn gamma_d_of(constants: &DerivedConstants, tone: &DriveTone) -> f64 {
    use crate::consts::PHI_0_BAR;
    let delta_lj_inv = tone.delta_ej / (2.0 * PHI_0_BAR * PHI_0_BAR);
    2.0 * constants.l_t * constants.half_length * delta_lj_inv
}

/// Solve the one-sideband-pair resonance for one odd branch under one tone.
pub fn floquet_mode(
    constants: &DerivedConstants,
    tone: &DriveTone,
    branch: u32,
) -> Result<FloquetMode> {
    if !(tone.omega_d > 0.0) {
        return Err(Error::InvalidParameter {
            field: "omega_d",
            message: "omega_d must be positive".into(),
        });
    }
    floquet_mode_with(constants, tone, branch, SidebandConvention::Printed)
}

/// Generalized M-sideband-pair solve.
///
/// Builds the (2M+1)-row tridiagonal system in which row m couples the
/// amplitudes m-1, m, m+1 with off-diagonal weight `gamma_d cos(k_{m∓1} d)`,
/// reduces it by continued fractions, and finds the carrier root of the
/// reduced row-0 condition. Returns the mode together with the amplitude
/// vector phi(omega + m omega_d), m = -M..M, normalized to phi(omega) = 1.
/// At M = 1 the reduction is algebraically the closed-form condition.
pub fn floquet_mode_general(
    constants: &DerivedConstants,
    tone: &DriveTone,
    branch: u32,
    m_order: usize,
) -> Result<(FloquetMode, Vec<f64>)> {
    if m_order == 0 {
        return Err(Error::InvalidParameter {
            field: "M",
            message: "truncation order M must be at least 1".into(),
        });
    }
    let n = root_index(branch)?;
    let statics = static_odd_modes(constants, n)?;
    let seed = statics[n - 1];
    let gamma = constants.gamma;
    let gamma_d = gamma_d_of(constants, tone);
    let offset = constants.tone_offset(tone);
    let conv = SidebandConvention::Printed;

    if gamma_d == 0.0 {
        let mode = floquet_mode_with(constants, tone, branch, conv)?;
        let mut amps = vec![0.0; 2 * m_order + 1];
        amps[m_order] = 1.0;
        return Ok((mode, amps));
    }

    // continued-fraction reduction of the sideband chains onto row 0
    let reduced = |kd: f64, sign: f64| -> f64 {
        // effective denominator of the row at m = sign * M, folded inward
        let mut d_eff = conv.denom(kd + sign * m_order as f64 * offset, gamma);
        for mm in (1..m_order).rev() {
            let m = sign * mm as f64;
            let d_m = conv.denom(kd + m * offset, gamma);
            let c_out = (kd + (m + sign) * offset).cos();
            let c_here = (kd + m * offset).cos();
            d_eff = d_m - gamma_d * gamma_d * c_out * c_here / d_eff;
        }
        d_eff
    };
    let f = |kd: f64| {
        kd * kd.sin()
            - gamma * kd.cos()
            - gamma_d
                * gamma_d
                * kd.cos()
                * ((kd + offset).cos() / reduced(kd, 1.0) + (kd - offset).cos() / reduced(kd, -1.0))
    };
    let (lo, hi) = expand_bracket(&f, seed, 0.2, 0.6).ok_or(Error::NoRootInBracket {
        branch,
        lo: seed - 0.6,
        hi: seed + 0.6,
    })?;
    let kd = bisect_secant(&f, lo, hi, KD_TOL);

    // back-substitute the amplitude vector, phi_0 = 1
    let mut amps = vec![0.0; 2 * m_order + 1];
    amps[m_order] = 1.0;
    for sign in [1i64, -1i64] {
        // effective denominators from the outermost row inward
        let mut d_effs = Vec::with_capacity(m_order);
        let mut d_eff = conv.denom(kd + sign as f64 * m_order as f64 * offset, gamma);
        d_effs.push(d_eff);
        for mm in (1..m_order).rev() {
            let m = sign as f64 * mm as f64;
            let d_m = conv.denom(kd + m * offset, gamma);
            let c_out = (kd + (m + sign as f64) * offset).cos();
            let c_here = (kd + m * offset).cos();
            d_eff = d_m - gamma_d * gamma_d * c_out * c_here / d_eff;
            d_effs.push(d_eff);
        }
        d_effs.reverse(); // d_effs[mm-1] is the effective denominator at |m| = mm
        for (d, &d_eff) in d_effs.iter().enumerate() {
            if d_eff.abs() < POLE_THRESHOLD {
                return Err(Error::PoleProximity {
                    value: d_eff,
                    threshold: POLE_THRESHOLD,
                });
            }
            let mm = d as i64 + 1;
            let m = sign * mm;
            let inner = (m - sign) as f64;
            let prev = amps[(m_order as i64 + m - sign) as usize];
            amps[(m_order as i64 + m) as usize] =
                gamma_d * (kd + inner * offset).cos() * prev / d_eff;
        }
    }
    let outer = amps[0].abs().max(amps[2 * m_order].abs());
    if outer > 0.1 {
        return Err(Error::NonConvergedTruncation {
            order: m_order,
            amplitude: outer,
        });
    }
    let mode = FloquetMode {
        branch,
        kd,
        omega: constants.omega_of_kd(kd),
        a_plus: amps[m_order + 1],
        a_minus: amps[m_order - 1],
        tone: *tone,
        half_length: constants.half_length,
        wave_speed: constants.wave_speed,
    };
    Ok((mode, amps))
}

/// Spatial mode functions on a grid; exact evaluation of the odd piecewise
/// cosine forms, sign(0) resolved from the positive side.
pub fn mode_profile(mode: &FloquetMode, x_grid: &[f64]) -> Result<ModeProfile> {
    let d = mode.half_length;
    let offset = mode.tone_offset();
    let (k, kp, km) = (mode.kd / d, (mode.kd + offset) / d, (mode.kd - offset) / d);
    let mut u_omega = Vec::with_capacity(x_grid.len());
    let mut u_plus = Vec::with_capacity(x_grid.len());
    let mut u_minus = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if x.abs() > d * (1.0 + 1e-12) {
            return Err(Error::OutOfRange { x, d });
        }
        let s = if x < 0.0 { -1.0 } else { 1.0 };
        u_omega.push(s * (k * (s * d - x)).cos());
        u_plus.push(s * (kp * (s * d - x)).cos());
        u_minus.push(s * (km * (s * d - x)).cos());
    }
    Ok(ModeProfile {
        x: x_grid.to_vec(),
        u_omega,
        u_plus,
        u_minus,
    })
}

/// One point of a drive-amplitude sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// delta_EJ / E_J0 at this point.
    pub amplitude: f64,
    /// Solved mode, or the error tagged to this amplitude.
    pub mode: Result<FloquetMode>,
}

/// Carrier frequency versus modulation amplitude for one branch, with
/// continuation: each solve is bracketed from the previous root.
pub fn drive_sweep(
    params: &CircuitParams,
    omega_d: f64,
    amplitudes: &[f64],
    branch: u32,
) -> Result<Vec<SweepPoint>> {
    for &a in amplitudes {
        if !(0.0..=0.5).contains(&a) {
            return Err(Error::InvalidParameter {
                field: "amplitude",
                message: format!("sweep amplitudes must lie in [0, 0.5], got {a}"),
            });
        }
    }
    let constants = derive_constants(params, &DriveSet::default())?;
    let n = root_index(branch)?;
    let statics = static_odd_modes(&constants, n)?;
    let mut seed = statics[n - 1];
    let gamma = constants.gamma;
    let offset = omega_d * constants.half_length / constants.wave_speed;
    let mut out = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        let tone = DriveTone {
            omega_d,
            delta_ej: a * params.ej_static,
        };
        let gamma_d = gamma * a / 2.0;
        let solved = if gamma_d == 0.0 {
            Ok(seed)
        } else {
            solve_driven_root(
                gamma,
                &[(gamma_d, offset)],
                branch,
                seed,
                SidebandConvention::Printed,
            )
        };
        let mode = solved.and_then(|kd| {
            seed = kd;
            let (a_plus, a_minus) = if gamma_d == 0.0 {
                (0.0, 0.0)
            } else {
                sideband_amplitudes_at(gamma, gamma_d, offset, kd, SidebandConvention::Printed)?
            };
            Ok(FloquetMode {
                branch,
                kd,
                omega: constants.omega_of_kd(kd),
                a_plus,
                a_minus,
                tone,
                half_length: constants.half_length,
                wave_speed: constants.wave_speed,
            })
        });
        out.push(SweepPoint { amplitude: a, mode });
    }
    Ok(out)
}

/// Carrier wavenumber under several simultaneous tones: the static root plus
/// the superposed per-tone shifts (sideband back-action is quadratic in each
/// tone amplitude, so shifts add at leading order).
pub fn multi_tone_carrier(
    params: &CircuitParams,
    drives: &DriveSet,
    branch: u32,
) -> Result<f64> {
    let constants = derive_constants(params, drives)?;
    let n = root_index(branch)?;
    let statics = static_odd_modes(&constants, n)?;
    let kd0 = statics[n - 1];
    let mut kd = kd0;
    for tone in &drives.tones {
        if tone.delta_ej == 0.0 {
            continue;
        }
        let mode = floquet_mode(&constants, tone, branch)?;
        kd += mode.kd - kd0;
    }
    Ok(kd)
}

/// Format a float with 12 significant digits for CSV output.
pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Mode-profile CSV: `x_m,u_omega,u_plus,u_minus`, 12 significant digits.
pub fn profile_csv(profile: &ModeProfile) -> String {
    let mut s = String::from("x_m,u_omega,u_plus,u_minus\n");
    for i in 0..profile.x.len() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            format_sig12(profile.x[i]),
            format_sig12(profile.u_omega[i]),
            format_sig12(profile.u_plus[i]),
            format_sig12(profile.u_minus[i]),
        ));
    }
    s
}

/// Sweep CSV: `dEJ_over_EJ0,omega_GHz,error`; failed points keep the row with
/// the error text and an empty frequency.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("dEJ_over_EJ0,omega_GHz,error\n");
    for p in points {
        match &p.mode {
            Ok(m) => s.push_str(&format!(
                "{},{},\n",
                format_sig12(p.amplitude),
                format_sig12(m.omega / std::f64::consts::TAU / 1e9),
            )),
            Err(e) => s.push_str(&format!(
                "{},,\"{}\"\n",
                format_sig12(p.amplitude),
                e.to_string().replace('"', "'"),
            )),
        }
    }
    s
}
