//! Configuration file schema and unit conversion.
//!
//! Files use laboratory units (GHz, cm, fF, µs); everything becomes SI with
//! angular frequencies at this boundary, the one place where 2π enters.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use squidmodes::circuit::{CircuitParams, DriveSet, DriveTone};
use squidmodes::consts::HBAR;
use squidmodes::coupling::TransmonParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToneConfig {
    #[serde(rename = "omega_d_GHz")]
    pub omega_d_ghz: f64,
    #[serde(rename = "dEJ_over_EJ0")]
    pub dej_over_ej0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransmonConfig {
    /// E_J,t / E_C.
    pub ratio: f64,
    /// Charging energy E_C/h in GHz; derived from the transmon frequency
    /// relation at the given ratio when omitted.
    #[serde(rename = "EC_GHz", default)]
    pub ec_ghz: Option<f64>,
    pub beta: f64,
    #[serde(rename = "Omega_GHz")]
    pub omega_ghz: f64,
    pub x_t_over_d: f64,
    #[serde(default)]
    pub ng: f64,
    #[serde(rename = "T1_us", default = "default_t1_us")]
    pub t1_us: f64,
    #[serde(rename = "T2_us", default = "default_t2_us")]
    pub t2_us: f64,
}

fn default_t1_us() -> f64 {
    10.0
}
fn default_t2_us() -> f64 {
    5.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateSection {
    #[serde(rename = "target_G_MHz", default = "default_target_g")]
    pub target_g_mhz: f64,
    #[serde(rename = "delta_MHz", default = "default_delta")]
    pub delta_mhz: f64,
    #[serde(rename = "kappa_MHz", default = "default_kappa")]
    pub kappa_mhz: f64,
    #[serde(default = "default_fock")]
    pub fock_cutoff: usize,
    #[serde(default = "default_dt_ns")]
    pub dt_ns: f64,
    /// Defaults to one gate period 2π/delta.
    #[serde(default)]
    pub t_final_ns: Option<f64>,
    #[serde(default = "default_true")]
    pub include_kerr: bool,
    #[serde(default = "default_branch")]
    pub branch: u32,
    #[serde(default = "default_initial")]
    pub initial: String,
}

fn default_target_g() -> f64 {
    2.5
}
fn default_delta() -> f64 {
    10.0
}
fn default_kappa() -> f64 {
    0.2
}
fn default_fock() -> usize {
    10
}
fn default_dt_ns() -> f64 {
    0.05
}
fn default_true() -> bool {
    true
}
fn default_branch() -> u32 {
    1
}
fn default_initial() -> String {
    "gg".into()
}

impl Default for GateSection {
    fn default() -> Self {
        Self {
            target_g_mhz: default_target_g(),
            delta_mhz: default_delta(),
            kappa_mhz: default_kappa(),
            fock_cutoff: default_fock(),
            dt_ns: default_dt_ns(),
            t_final_ns: None,
            include_kerr: true,
            branch: default_branch(),
            initial: default_initial(),
        }
    }
}

/// Root configuration record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    pub d_cm: f64,
    pub v_m_per_s: f64,
    pub impedance_ohm: f64,
    #[serde(rename = "EJ0_GHz")]
    pub ej0_ghz: f64,
    #[serde(rename = "C_fF", default)]
    pub c_ff: f64,
    #[serde(default)]
    pub tones: Vec<ToneConfig>,
    #[serde(default)]
    pub transmon: Option<TransmonConfig>,
    #[serde(default)]
    pub qubits: Vec<TransmonConfig>,
    #[serde(default)]
    pub gate: Option<GateSection>,
}

impl Config {
    pub fn circuit(&self) -> CircuitParams {
        CircuitParams {
            half_length: self.d_cm * 1e-2,
            wave_speed: self.v_m_per_s,
            impedance: self.impedance_ohm,
            ej_static: HBAR * TAU * self.ej0_ghz * 1e9,
            squid_capacitance: self.c_ff * 1e-15,
        }
    }

    pub fn drive_set(&self) -> DriveSet {
        let ej = HBAR * TAU * self.ej0_ghz * 1e9;
        DriveSet {
            tones: self
                .tones
                .iter()
                .map(|t| DriveTone {
                    omega_d: TAU * t.omega_d_ghz * 1e9,
                    delta_ej: t.dej_over_ej0 * ej,
                })
                .collect(),
        }
    }
}

impl TransmonConfig {
    pub fn to_params(&self, circuit: &CircuitParams) -> TransmonParams {
        let omega_q = TAU * self.omega_ghz * 1e9;
        let ec = match self.ec_ghz {
            Some(ghz) => HBAR * TAU * ghz * 1e9,
            // transmon frequency relation: hbar Omega = sqrt(8 EJ EC) - EC
            None => HBAR * omega_q / ((8.0 * self.ratio).sqrt() - 1.0),
        };
        TransmonParams {
            ej_ec_ratio: self.ratio,
            charging_energy: ec,
            beta: self.beta,
            omega_q,
            position: self.x_t_over_d * circuit.half_length,
            gate_charge: self.ng,
            t1: self.t1_us * 1e-6,
            t2: self.t2_us * 1e-6,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let text = r#"{
            "d_cm": 0.25, "v_m_per_s": 1.2e8, "impedance_ohm": 50.0,
            "EJ0_GHz": 715.0,
            "tones": [{"omega_d_GHz": 6.0, "dEJ_over_EJ0": 0.3}]
        }"#;
        let cfg: Config = serde_json::from_str(text).unwrap();
        let p = cfg.circuit();
        assert_eq!(p.half_length, 0.0025);
        assert_eq!(p.squid_capacitance, 0.0);
        let ds = cfg.drive_set();
        assert_eq!(ds.tones.len(), 1);
        assert!((ds.tones[0].delta_ej / p.ej_static - 0.3).abs() < 1e-12);
    }

    #[test]
    fn transmon_charging_energy_falls_back_to_frequency_relation() {
        let t = TransmonConfig {
            ratio: 80.0,
            ec_ghz: None,
            beta: 2.0 / 3.0,
            omega_ghz: 4.82188,
            x_t_over_d: 0.1,
            ng: 0.0,
            t1_us: 10.0,
            t2_us: 5.0,
        };
        let cfg = Config {
            d_cm: 0.25,
            v_m_per_s: 1.2e8,
            impedance_ohm: 50.0,
            ej0_ghz: 715.0,
            c_ff: 0.0,
            tones: vec![],
            transmon: Some(t.clone()),
            qubits: vec![],
            gate: None,
        };
        let params = t.to_params(&cfg.circuit());
        let ec_ghz = params.charging_energy / HBAR / TAU / 1e9;
        assert!((ec_ghz - 0.198446).abs() < 1e-5);
    }
}
