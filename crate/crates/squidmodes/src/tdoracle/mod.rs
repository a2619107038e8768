//! Independent time-domain verification of the frequency-domain solver.
//!
//! The resonator + SQUID circuit is discretized as the LC chain it is drawn
//! as: two half-lines of LC cells joined by the (linearized, time-dependent)
//! junction spring. Leapfrog integration of the chain, seeded with a carrier
//! profile at rest, exposes the intrinsic carrier frequency and sideband
//! content of the driven mode, which `verify_mode` compares against the
//! solver's predictions.

pub mod spectrum;

pub use spectrum::{fit_components, spectrum, SpectralPeak, SpectrumReport};

use serde::Serialize;

use crate::circuit::{CircuitParams, DriveTone};
use crate::consts::PHI_0;
use crate::error::{Error, Result};
use crate::modesolver::{floquet_mode, format_sig12, FloquetMode};

/// Initial flux configuration of the chain (velocities start at zero).
#[derive(Debug, Clone)]
pub enum ChainInit {
    /// Odd carrier profile sign(x) cos(k (sign(x) d - x)) at wavenumber kd/d.
    CarrierProfile { kd: f64 },
    /// Explicit node fluxes, one per node (2 N_cells + 2 values).
    Custom(Vec<f64>),
}

/// Discretized chain state under leapfrog evolution.
///
/// Node layout: indices 0..=N are the left half (x = -d .. 0⁻), indices
/// N+1..=2N+1 the right half (x = 0⁺ .. d), with Δx = d / N_cells. End and
/// junction nodes carry half a cell capacitance.
#[derive(Debug, Clone)]
pub struct ChainState {
    /// Cells per half.
    pub n_cells: usize,
    /// Node fluxes (Wb).
    pub phi: Vec<f64>,
    /// Node flux velocities (V).
    pub vel: Vec<f64>,
    /// Cell size (m).
    pub dx: f64,
    /// Current time (s).
    pub t: f64,
    dt: f64,
    accel: Vec<f64>,
    mass: Vec<f64>,
    inv_l: f64,
    kj_static: f64,
    kj_drive: f64,
    omega_d: f64,
    c_junction: f64,
}

impl ChainState {
    pub fn new(
        params: &CircuitParams,
        tone: Option<&DriveTone>,
        init: &ChainInit,
        n_cells: usize,
        dt: f64,
    ) -> Result<Self> {
        if n_cells < 100 {
            return Err(Error::InvalidParameter {
                field: "N_cells",
                message: format!("need at least 100 cells per half, got {n_cells}"),
            });
        }
        let dx = params.half_length / n_cells as f64;
        let cfl = dx / params.wave_speed;
        if !(dt > 0.0) || dt >= cfl {
            return Err(Error::CflViolation { dt, limit: cfl });
        }
        let l_t = params.impedance / params.wave_speed;
        let c_t = 1.0 / (params.impedance * params.wave_speed);
        let cap = c_t * dx;
        let n_nodes = 2 * (n_cells + 1);
        let mut mass = vec![cap; n_nodes];
        mass[0] = 0.5 * cap;
        mass[n_nodes - 1] = 0.5 * cap;
        mass[n_cells] = 0.5 * cap;
        mass[n_cells + 1] = 0.5 * cap;
        let phase_factor = (std::f64::consts::TAU / PHI_0).powi(2);
        let (kj_drive, omega_d) = match tone {
            Some(t) => (phase_factor * t.delta_ej, t.omega_d),
            None => (0.0, 1.0),
        };
        let phi = match init {
            ChainInit::CarrierProfile { kd } => {
                let k = kd / params.half_length;
                let d = params.half_length;
                (0..n_nodes)
                    .map(|i| {
                        if i <= n_cells {
                            let x = -d + i as f64 * dx;
                            -(k * (d + x)).cos()
                        } else {
                            let x = (i - n_cells - 1) as f64 * dx;
                            (k * (d - x)).cos()
                        }
                    })
                    .collect()
            }
            ChainInit::Custom(v) => {
                if v.len() != n_nodes {
                    return Err(Error::DimensionMismatch {
                        expected: n_nodes,
                        actual: v.len(),
                    });
                }
                v.clone()
            }
        };
        let mut state = Self {
            n_cells,
            phi,
            vel: vec![0.0; n_nodes],
            dx,
            t: 0.0,
            dt,
            accel: vec![0.0; n_nodes],
            mass,
            inv_l: 1.0 / (l_t * dx),
            kj_static: phase_factor * params.ej_static,
            kj_drive,
            omega_d,
            c_junction: params.squid_capacitance,
        };
        state.compute_accel();
        Ok(state)
    }

    /// Junction spring constant at time t (N/Wb², i.e. 1/H).
    fn junction_spring(&self, t: f64) -> f64 {
        self.kj_static + self.kj_drive * (self.omega_d * t).cos()
    }

    /// Flux jump across the SQUID.
    pub fn junction_jump(&self) -> f64 {
        self.phi[self.n_cells + 1] - self.phi[self.n_cells]
    }

    fn compute_accel(&mut self) {
        let n = self.n_cells;
        let kj = self.junction_spring(self.t);
        let phi = &self.phi;
        let a = &mut self.accel;
        a.iter_mut().for_each(|x| *x = 0.0);
        // intra-half springs
        for j in 0..n {
            let f = (phi[j + 1] - phi[j]) * self.inv_l;
            a[j] += f;
            a[j + 1] -= f;
        }
        for j in (n + 1)..(2 * n + 1) {
            let f = (phi[j + 1] - phi[j]) * self.inv_l;
            a[j] += f;
            a[j + 1] -= f;
        }
        // junction spring between the halves
        let fj = kj * (phi[n + 1] - phi[n]);
        a[n] += fj;
        a[n + 1] -= fj;
        if self.c_junction == 0.0 {
            for (acc, &m) in a.iter_mut().zip(self.mass.iter()) {
                *acc /= m;
            }
        } else {
            // the junction capacitance couples the two junction-node
            // accelerations; solve the 2x2 block, the rest is diagonal
            let (fl, fr) = (a[n], a[n + 1]);
            for (i, (acc, &m)) in a.iter_mut().zip(self.mass.iter()).enumerate() {
                if i != n && i != n + 1 {
                    *acc /= m;
                }
            }
            let (ml, mr, c) = (self.mass[n], self.mass[n + 1], self.c_junction);
            let det = ml * mr + c * (ml + mr);
            a[n] = ((mr + c) * fl + c * fr) / det;
            a[n + 1] = (c * fl + (ml + c) * fr) / det;
        }
    }

    /// One velocity-Verlet step.
    pub fn step(&mut self) {
        let half = 0.5 * self.dt;
        for (v, &acc) in self.vel.iter_mut().zip(self.accel.iter()) {
            *v += half * acc;
        }
        for (p, &v) in self.phi.iter_mut().zip(self.vel.iter()) {
            *p += self.dt * v;
        }
        self.t += self.dt;
        self.compute_accel();
        for (v, &acc) in self.vel.iter_mut().zip(self.accel.iter()) {
            *v += half * acc;
        }
    }

    /// Reverse the direction of time (valid for static drives).
    pub fn reverse_velocities(&mut self) {
        for v in &mut self.vel {
            *v = -*v;
        }
    }

    /// Leapfrog-consistent total energy: the staggered kinetic product
    /// Σ ½ m v⁻ v⁺ plus the potential, which is conserved to roundoff for
    /// static drives at any stable step.
    pub fn energy(&self) -> f64 {
        let half_dt = 0.5 * self.dt;
        let mut kin = 0.0;
        for ((&v, &acc), &m) in self.vel.iter().zip(self.accel.iter()).zip(self.mass.iter()) {
            kin += 0.5 * m * (v - half_dt * acc) * (v + half_dt * acc);
        }
        // junction-capacitance kinetic term
        if self.c_junction > 0.0 {
            let n = self.n_cells;
            let dv = (self.vel[n + 1] - half_dt * self.accel[n + 1])
                * (self.vel[n + 1] + half_dt * self.accel[n + 1]);
            let dv2 = (self.vel[n] - half_dt * self.accel[n])
                * (self.vel[n] + half_dt * self.accel[n]);
            let cross = (self.vel[n + 1] - half_dt * self.accel[n + 1])
                * (self.vel[n] + half_dt * self.accel[n]);
            // ½ C (v_R - v_L)² in staggered form
            kin += 0.5 * self.c_junction * (dv + dv2 - 2.0 * cross);
        }
        let mut pot = 0.0;
        let n = self.n_cells;
        for j in 0..n {
            pot += 0.5 * (self.phi[j + 1] - self.phi[j]).powi(2) * self.inv_l;
        }
        for j in (n + 1)..(2 * n + 1) {
            pot += 0.5 * (self.phi[j + 1] - self.phi[j]).powi(2) * self.inv_l;
        }
        pot += 0.5 * self.junction_spring(self.t) * self.junction_jump().powi(2);
        kin + pot
    }
}

/// A sampled probe series.
#[derive(Debug, Clone)]
pub struct ProbeSeries {
    /// Flux at the probe node, one value per sample starting at t = 0.
    pub values: Vec<f64>,
    /// Sample interval (s).
    pub sample_dt: f64,
    /// Probe position (m).
    pub probe_x: f64,
}

/// Chain run parameters.
#[derive(Debug, Clone)]
pub struct ChainRunConfig {
    /// Cells per half (default 400).
    pub n_cells: usize,
    /// Courant number v dt / dx (default 0.4).
    pub courant: f64,
    /// Probe position as a fraction of d on the right half (default 0.5).
    pub probe_frac: f64,
    /// Number of probe samples.
    pub n_samples: usize,
    /// Steps between samples.
    pub sample_stride: usize,
}

impl Default for ChainRunConfig {
    fn default() -> Self {
        Self {
            n_cells: 400,
            courant: 0.4,
            probe_frac: 0.5,
            n_samples: 1 << 17,
            sample_stride: 64,
        }
    }
}

/// Evolve the chain and record the probe flux.
pub fn simulate_chain(
    params: &CircuitParams,
    tone: Option<&DriveTone>,
    init: &ChainInit,
    cfg: &ChainRunConfig,
) -> Result<ProbeSeries> {
    let dx = params.half_length / cfg.n_cells as f64;
    let dt = cfg.courant * dx / params.wave_speed;
    let mut chain = ChainState::new(params, tone, init, cfg.n_cells, dt)?;
    let probe_idx =
        cfg.n_cells + 1 + ((cfg.probe_frac * cfg.n_cells as f64).round() as usize).min(cfg.n_cells);
    let norm0 = chain
        .phi
        .iter()
        .fold(0.0f64, |m, &x| m.max(x.abs()))
        .max(1e-300);
    let mut values = Vec::with_capacity(cfg.n_samples);
    values.push(chain.phi[probe_idx]);
    for _ in 1..cfg.n_samples {
        for _ in 0..cfg.sample_stride {
            chain.step();
        }
        values.push(chain.phi[probe_idx]);
        let norm = chain.phi.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if norm > 1e3 * norm0 {
            return Err(Error::Instability {
                factor: norm / norm0,
            });
        }
    }
    Ok(ProbeSeries {
        values,
        sample_dt: cfg.sample_stride as f64 * dt,
        probe_x: (probe_idx - cfg.n_cells - 1) as f64 * dx,
    })
}

/// Comparison of the chain spectrum against a solved mode.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    /// Solver carrier frequency (rad/s).
    pub omega_predicted: f64,
    /// Measured carrier frequency (rad/s).
    pub omega_measured: f64,
    /// omega_measured - omega_predicted (rad/s).
    pub freq_error: f64,
    pub a_plus_predicted: f64,
    pub a_minus_predicted: f64,
    pub a_plus_measured: f64,
    pub a_minus_measured: f64,
    /// Relative magnitude errors ||A_meas| - |A_pred|| / |A_pred|.
    pub a_plus_error: f64,
    pub a_minus_error: f64,
    pub sign_match_plus: bool,
    pub sign_match_minus: bool,
}

/// Solve the mode, run the chain seeded with its carrier profile, and
/// compare carrier frequency and signed sideband ratios.
pub fn verify_mode(
    params: &CircuitParams,
    tone: &DriveTone,
    branch: u32,
    run_cfg: Option<ChainRunConfig>,
) -> Result<VerifyReport> {
    let constants = crate::circuit::derive_constants(params, &crate::circuit::DriveSet::default())?;
    let mode = floquet_mode(&constants, tone, branch)?;
    let mut cfg = run_cfg.unwrap_or_default();
    // sample fast enough to keep the upper sideband well below Nyquist
    let dx = params.half_length / cfg.n_cells as f64;
    let dt = cfg.courant * dx / params.wave_speed;
    let f_top = (mode.omega + tone.omega_d) / std::f64::consts::TAU;
    let target_fs = 5.0 * f_top;
    cfg.sample_stride = ((1.0 / (target_fs * dt)).floor() as usize).max(1);
    let series = simulate_chain(
        params,
        if tone.delta_ej == 0.0 { None } else { Some(tone) },
        &ChainInit::CarrierProfile { kd: mode.kd },
        &cfg,
    )?;
    verify_against(&mode, tone, &series)
}

/// Compare an already-recorded probe series against a solved mode.
pub fn verify_against(
    mode: &FloquetMode,
    tone: &DriveTone,
    series: &ProbeSeries,
) -> Result<VerifyReport> {
    let f_pred = mode.omega / std::f64::consts::TAU;
    let carrier = spectrum::peak_near(&series.values, series.sample_dt, f_pred, 50e6)?;
    let omega_measured = std::f64::consts::TAU * carrier.frequency;
    let (a_plus_measured, a_minus_measured) = if tone.delta_ej == 0.0 {
        (0.0, 0.0)
    } else {
        let f_d = tone.omega_d / std::f64::consts::TAU;
        let comps = fit_components(
            &series.values,
            series.sample_dt,
            &[carrier.frequency, carrier.frequency - f_d, carrier.frequency + f_d],
        );
        let v = mode.wave_speed;
        let d = mode.half_length;
        let x = series.probe_x;
        let u_at = |omega: f64| ((omega / v) * (d - x)).cos();
        let u_c = u_at(omega_measured);
        let u_m = u_at(omega_measured - tone.omega_d);
        let u_p = u_at(omega_measured + tone.omega_d);
        (
            (comps[2] / comps[0]).re * (u_c / u_p),
            (comps[1] / comps[0]).re * (u_c / u_m),
        )
    };
    let rel_err = |meas: f64, pred: f64| {
        if pred == 0.0 {
            if meas == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (meas.abs() - pred.abs()).abs() / pred.abs()
        }
    };
    let sign_match = |meas: f64, pred: f64| meas.signum() == pred.signum() || pred == 0.0;
    Ok(VerifyReport {
        omega_predicted: mode.omega,
        omega_measured,
        freq_error: omega_measured - mode.omega,
        a_plus_predicted: mode.a_plus,
        a_minus_predicted: mode.a_minus,
        a_plus_measured,
        a_minus_measured,
        a_plus_error: rel_err(a_plus_measured, mode.a_plus),
        a_minus_error: rel_err(a_minus_measured, mode.a_minus),
        sign_match_plus: sign_match(a_plus_measured, mode.a_plus),
        sign_match_minus: sign_match(a_minus_measured, mode.a_minus),
    })
}

/// Time-series CSV: `t_ns,phi_probe`.
pub fn series_csv(series: &ProbeSeries) -> String {
    let mut s = String::from("t_ns,phi_probe\n");
    for (i, &x) in series.values.iter().enumerate() {
        s.push_str(&format!(
            "{},{}\n",
            format_sig12(i as f64 * series.sample_dt * 1e9),
            format_sig12(x),
        ));
    }
    s
}

/// Spectrum CSV: `f_GHz,re,im,abs`.
pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut s = String::from("f_GHz,re,im,abs\n");
    for p in &report.peaks {
        s.push_str(&format!(
            "{},{},{},{}\n",
            format_sig12(p.frequency / 1e9),
            format_sig12(p.amplitude.re),
            format_sig12(p.amplitude.im),
            format_sig12(p.amplitude.norm()),
        ));
    }
    s
}
