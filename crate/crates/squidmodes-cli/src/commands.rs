//! The four pipeline commands.

use std::f64::consts::TAU;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;
use serde_json::json;

use squidmodes::circuit::{derive_constants, validate, DriveTone, Severity};
use squidmodes::coupling::{
    calibrate_gate, cross_kerr, quasi_static_coupling, sideband_coupling, Sideband,
};
use squidmodes::dynamics::{run_gate, trajectory_csv, GateConfig, InitialState};
use squidmodes::modesolver::{
    drive_sweep, floquet_mode, floquet_mode_general, format_sig12, mode_profile, profile_csv,
    sweep_csv,
};
use squidmodes::quantizer::quantize;

use crate::config::Config;
use crate::output::{parallel_map, thread_cap, ManifestBuilder};
use crate::OutputFormat;

fn check_config(cfg: &Config) -> anyhow::Result<()> {
    let findings = validate(&cfg.circuit(), &cfg.drive_set());
    let mut bad = false;
    for f in &findings {
        match f.severity {
            Severity::Error => {
                eprintln!("config error [{}]: {}", f.field, f.message);
                bad = true;
            }
            Severity::Warning => eprintln!("config warning [{}]: {}", f.field, f.message),
        }
    }
    if bad {
        Err(anyhow!(squidmodes::Error::InvalidParameter {
            field: "config",
            message: "configuration violates parameter invariants".into(),
        }))
    } else {
        Ok(())
    }
}

fn emit_record(
    manifest: &mut ManifestBuilder,
    out_dir: &Path,
    stem: &str,
    value: &serde_json::Value,
    format: OutputFormat,
) -> anyhow::Result<()> {
    match format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(value)?;
            text.push('\n');
            manifest.emit(&out_dir.join(format!("{stem}.json")), &text)
        }
        OutputFormat::Csv => {
            // flattened key,value table
            let mut rows = String::from("key,value\n");
            flatten_json("", value, &mut rows);
            manifest.emit(&out_dir.join(format!("{stem}.csv")), &rows)
        }
    }
}

fn flatten_json(prefix: &str, value: &serde_json::Value, out: &mut String) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_json(&key, v, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_json(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => {
            out.push_str(&format!("{prefix},{other}\n"));
        }
    }
}

pub fn cmd_modes(
    cfg: &Config,
    verbatim: String,
    out_dir: &Path,
    branch: u32,
    m_order: usize,
    format: OutputFormat,
) -> anyhow::Result<()> {
    check_config(cfg)?;
    let params = cfg.circuit();
    let drives = cfg.drive_set();
    let tone = *drives
        .tones
        .first()
        .ok_or_else(|| anyhow!(squidmodes::Error::InvalidParameter {
            field: "tones",
            message: "the modes command needs at least one tone".into(),
        }))?;
    let constants = derive_constants(&params, &drives)?;
    let mode = floquet_mode(&constants, &tone, branch)?;
    let qmode = quantize(&mode, &params);
    let mut record = serde_json::to_value(qmode.record())?;
    if m_order > 1 {
        let (general, amps) = floquet_mode_general(&constants, &tone, branch, m_order)?;
        record.as_object_mut().unwrap().insert(
            "general".into(),
            json!({
                "M": m_order,
                "kd": general.kd,
                "kd_delta_vs_closed_form": general.kd - mode.kd,
                "sideband_amplitudes": amps,
            }),
        );
    }
    let mut manifest = ManifestBuilder::new("modes", verbatim);
    emit_record(&mut manifest, out_dir, "mode", &record, format)?;
    let d = params.half_length;
    let n = 801;
    let grid: Vec<f64> = (0..n)
        .map(|i| -d + 2.0 * d * i as f64 / (n - 1) as f64)
        .collect();
    let profile = mode_profile(&mode, &grid)?;
    manifest.emit(&out_dir.join("mode_profile.csv"), &profile_csv(&profile))?;
    manifest.finish(out_dir)
}

pub fn cmd_sweep(
    cfg: &Config,
    verbatim: String,
    out_dir: &Path,
    omega_d_ghz: Option<f64>,
    amp_min: f64,
    amp_max: f64,
    steps: usize,
    branches: &[u32],
) -> anyhow::Result<()> {
    check_config(cfg)?;
    if steps < 2 {
        return Err(anyhow!(squidmodes::Error::InvalidParameter {
            field: "steps",
            message: "a sweep needs at least 2 steps".into(),
        }));
    }
    let params = cfg.circuit();
    let omega_d = match omega_d_ghz {
        Some(ghz) => TAU * ghz * 1e9,
        None => {
            cfg.tones
                .first()
                .ok_or_else(|| anyhow!(squidmodes::Error::InvalidParameter {
                    field: "omega_d",
                    message: "no --omega-d-ghz given and no tone in the config".into(),
                }))?
                .omega_d_ghz
                * TAU
                * 1e9
        }
    };
    let amplitudes: Vec<f64> = (0..steps)
        .map(|i| amp_min + (amp_max - amp_min) * i as f64 / (steps - 1) as f64)
        .collect();
    let results = parallel_map(branches.to_vec(), thread_cap(), |branch| {
        drive_sweep(&params, omega_d, &amplitudes, branch).map(|pts| (branch, sweep_csv(&pts)))
    });
    let mut manifest = ManifestBuilder::new("sweep", verbatim);
    for r in results {
        let (branch, csv) = r?;
        manifest.emit(&out_dir.join(format!("sweep_branch{branch}.csv")), &csv)?;
    }
    manifest.finish(out_dir)
}

pub fn cmd_coupling(
    cfg: &Config,
    verbatim: String,
    out_dir: &Path,
    omega_d_ghz_list: &[f64],
    amp_max: f64,
    steps: usize,
) -> anyhow::Result<()> {
    check_config(cfg)?;
    let params = cfg.circuit();
    let transmon_cfg = cfg
        .transmon
        .as_ref()
        .ok_or_else(|| anyhow!(squidmodes::Error::InvalidParameter {
            field: "transmon",
            message: "the coupling command needs a transmon section".into(),
        }))?;
    let transmon = transmon_cfg.to_params(&params);
    for f in transmon.validate() {
        match f.severity {
            Severity::Error => {
                return Err(anyhow!(squidmodes::Error::InvalidParameter {
                    field: "transmon",
                    message: f.message,
                }))
            }
            Severity::Warning => eprintln!("transmon warning [{}]: {}", f.field, f.message),
        }
    }
    let constants = derive_constants(&params, &cfg.drive_set())?;
    let branch = 1u32;
    let statics = squidmodes::modesolver::static_odd_modes(&constants, 1)?;
    let omega0 = constants.omega_of_kd(statics[0]);
    for &ghz in omega_d_ghz_list {
        let omega_minus = omega0 - TAU * ghz * 1e9;
        if (transmon.omega_q - omega_minus).abs() > TAU * 1e6 {
            eprintln!(
                "coupling warning: transmon frequency {:.4} GHz is not resonant with the \
                 lower sideband {:.4} GHz of the {ghz} GHz tone",
                transmon.omega_q / TAU / 1e9,
                omega_minus / TAU / 1e9
            );
        }
    }
    let amplitudes: Vec<f64> = (0..steps)
        .map(|i| amp_max * i as f64 / (steps - 1).max(1) as f64)
        .collect();
    // one row per amplitude: full coupling per tone frequency, then the
    // quasi-static estimate
    struct Row {
        amp: f64,
        full: Vec<f64>,
        qs: f64,
    }
    let rows = parallel_map(amplitudes, thread_cap(), |amp| -> anyhow::Result<Row> {
        let mut full = Vec::with_capacity(omega_d_ghz_list.len());
        let mut tone0 = None;
        for &ghz in omega_d_ghz_list {
            let tone = DriveTone {
                omega_d: TAU * ghz * 1e9,
                delta_ej: amp * params.ej_static,
            };
            tone0.get_or_insert(tone);
            let mode = floquet_mode(&constants, &tone, branch)?;
            let qmode = quantize(&mode, &params);
            full.push(sideband_coupling(&qmode, &transmon, Sideband::Minus)?.g);
        }
        let qs = quasi_static_coupling(&params, &tone0.unwrap(), &transmon, branch)?.g;
        Ok(Row { amp, full, qs })
    });
    let mut csv = String::from("dEJ_over_EJ0");
    for &ghz in omega_d_ghz_list {
        csv.push_str(&format!(",G_full_MHz_wd_{ghz}GHz"));
    }
    csv.push_str(",G_qs_MHz\n");
    for row in rows {
        let row = row?;
        csv.push_str(&format_sig12(row.amp));
        for g in row.full {
            csv.push(',');
            csv.push_str(&format_sig12(g / TAU / 1e6));
        }
        csv.push(',');
        csv.push_str(&format_sig12(row.qs / TAU / 1e6));
        csv.push('\n');
    }
    let mut manifest = ManifestBuilder::new("coupling", verbatim);
    manifest.emit(&out_dir.join("coupling.csv"), &csv)?;
    manifest.finish(out_dir)
}

/// Flag overrides for the gate command.
#[derive(Debug, Clone, Default, Serialize)]
pub struct GateOverrides {
    pub lossless: bool,
    pub no_kerr: bool,
    pub t1_us: Option<f64>,
    pub t2_us: Option<f64>,
    pub kappa_mhz: Option<f64>,
    pub target_g_mhz: Option<f64>,
    pub delta_mhz: Option<f64>,
    pub fock: Option<usize>,
    pub dt_ns: Option<f64>,
    pub t_final_ns: Option<f64>,
}

pub fn cmd_gate(
    cfg: &Config,
    verbatim: String,
    out_dir: &Path,
    overrides: &GateOverrides,
    format: OutputFormat,
) -> anyhow::Result<()> {
    check_config(cfg)?;
    let params = cfg.circuit();
    if cfg.qubits.len() != 2 {
        return Err(anyhow!(squidmodes::Error::InvalidParameter {
            field: "qubits",
            message: format!("the gate command needs exactly 2 qubits, got {}", cfg.qubits.len()),
        }));
    }
    let gate_section = cfg.gate.clone().unwrap_or_default();
    let qubits = [
        cfg.qubits[0].to_params(&params),
        cfg.qubits[1].to_params(&params),
    ];
    let target_g = TAU * overrides.target_g_mhz.unwrap_or(gate_section.target_g_mhz) * 1e6;
    let delta = TAU * overrides.delta_mhz.unwrap_or(gate_section.delta_mhz) * 1e6;
    let branch = gate_section.branch;
    let cal = calibrate_gate(&params, &qubits, target_g, delta, branch)?;

    // per-qubit dispersive shift at the calibrated operating point
    let constants = derive_constants(&params, &squidmodes::circuit::DriveSet::default())?;
    let include_kerr = gate_section.include_kerr && !overrides.no_kerr;
    let chi = if include_kerr {
        let mut acc = 0.0;
        for q in &qubits {
            let probe = DriveTone {
                omega_d: TAU * 1e9,
                delta_ej: 0.0,
            };
            let mut mode = floquet_mode(&constants, &probe, branch)?;
            mode.kd = cal.kd_shifted;
            mode.omega = cal.omega_shifted;
            let qmode = quantize(&mode, &params);
            let g_w = sideband_coupling(&qmode, q, Sideband::Carrier)?.g;
            acc += cross_kerr(g_w.abs(), q.omega_q - cal.omega_shifted, -q.charging_energy)?;
        }
        0.5 * acc
    } else {
        0.0
    };

    let initial = match gate_section.initial.as_str() {
        "gg" => InitialState::Gg,
        "ge" => InitialState::Ge,
        "eg" => InitialState::Eg,
        "ee" => InitialState::Ee,
        other => {
            return Err(anyhow!(squidmodes::Error::InvalidParameter {
                field: "initial",
                message: format!("unknown initial state label `{other}`"),
            }))
        }
    };
    let (kappa, t1, t2) = if overrides.lossless {
        (0.0, [1e99; 2], [1e99; 2])
    } else {
        (
            TAU * overrides.kappa_mhz.unwrap_or(gate_section.kappa_mhz) * 1e6,
            [
                overrides.t1_us.map(|x| x * 1e-6).unwrap_or(qubits[0].t1),
                overrides.t1_us.map(|x| x * 1e-6).unwrap_or(qubits[1].t1),
            ],
            [
                overrides.t2_us.map(|x| x * 1e-6).unwrap_or(qubits[0].t2),
                overrides.t2_us.map(|x| x * 1e-6).unwrap_or(qubits[1].t2),
            ],
        )
    };
    let gate_cfg = GateConfig {
        g: target_g,
        delta,
        chi,
        kappa,
        t1,
        t2,
        n_fock: overrides.fock.unwrap_or(gate_section.fock_cutoff),
        include_kerr,
        t_final: overrides
            .t_final_ns
            .or(gate_section.t_final_ns)
            .map(|ns| ns * 1e-9)
            .unwrap_or(TAU / delta),
        dt: overrides.dt_ns.unwrap_or(gate_section.dt_ns) * 1e-9,
        initial,
        snapshot_stride: 100,
    };
    let run = run_gate(&gate_cfg)?;
    let metrics = json!({
        "achieved_G_MHz": cal.achieved_g / TAU / 1e6,
        "omega_shifted_GHz": cal.omega_shifted / TAU / 1e9,
        "calibration": cal.report(params.ej_static),
        "chi_kHz": chi / TAU / 1e3,
        "fidelity_phase_optimized": run.metrics.fidelity_phase_optimized,
        "fidelity_phase_fixed": run.metrics.fidelity_phase_fixed,
        "concurrence_wootters": run.metrics.concurrence_wootters,
        "concurrence_shortcut": run.metrics.concurrence_shortcut,
        "mean_photon_final": run.metrics.mean_photon_final,
        "gate_config": &gate_cfg,
        "integrator": {"method": "fixed-step RK4", "dt_ns": gate_cfg.dt * 1e9},
    });
    let mut manifest = ManifestBuilder::new("gate", verbatim);
    emit_record(&mut manifest, out_dir, "gate_metrics", &metrics, format)?;
    let csv = trajectory_csv(&run.trajectory).context("gate trajectory carries no series")?;
    manifest.emit(&out_dir.join("trajectory.csv"), &csv)?;
    manifest.finish(out_dir)
}
