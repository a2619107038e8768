//! Property tests for the algebraic invariants of the pipeline.

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use squidmodes::circuit::{derive_constants, CircuitParams, DriveSet, DriveTone};
use squidmodes::consts::{HBAR, PHI_0_BAR};
use squidmodes::coupling::{calibrate_gate, calibrated_coupling, cross_kerr, TransmonParams};
use squidmodes::dynamics::metrics::{concurrence, partial_trace_oscillator};
use squidmodes::dynamics::{run_gate, GateConfig, InitialState};
use squidmodes::modesolver::{drive_sweep, floquet_mode, floquet_mode_general};
use squidmodes::quantizer::quantize;

fn params_with_gamma(gamma: f64, d: f64) -> CircuitParams {
    let v = 1.2e8;
    let l_t = 50.0 / v;
    CircuitParams {
        half_length: d,
        wave_speed: v,
        impedance: 50.0,
        ej_static: gamma * PHI_0_BAR * PHI_0_BAR / (2.0 * l_t * d),
        squid_capacitance: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_d_ratio_identity(
        gamma in 1.0f64..200.0,
        frac in -0.9f64..0.9,
        d in 1e-3f64..5e-2,
    ) {
        let p = params_with_gamma(gamma, d);
        let tones = DriveSet::single(DriveTone {
            omega_d: TAU * 1e9,
            delta_ej: frac * p.ej_static,
        });
        let c = derive_constants(&p, &tones).unwrap();
        // algebraic identity to machine precision
        let expect = frac / 2.0;
        prop_assert!((c.gamma_d[0] / c.gamma - expect).abs() <= 2.0 * f64::EPSILON * expect.abs());
    }

    #[test]
    fn gamma_scales_linearly_with_length(
        gamma in 1.0f64..200.0,
        scale in 0.1f64..10.0,
    ) {
        let p1 = params_with_gamma(gamma, 0.012);
        let mut p2 = p1;
        p2.half_length *= scale;
        let c1 = derive_constants(&p1, &DriveSet::default()).unwrap();
        let c2 = derive_constants(&p2, &DriveSet::default()).unwrap();
        prop_assert!((c2.gamma / c1.gamma - scale).abs() < 1e-12 * scale);
    }

    #[test]
    fn chi_sign_follows_the_closed_formula(
        g_mhz in 1.0f64..500.0,
        delta_ghz in -8.0f64..8.0,
        ec_mhz in 50.0f64..800.0,
    ) {
        let g = TAU * g_mhz * 1e6;
        let delta = TAU * delta_ghz * 1e9;
        let alpha = -HBAR * TAU * ec_mhz * 1e6;
        match cross_kerr(g, delta, alpha) {
            Ok(chi) => {
                let alpha_rad = alpha / HBAR;
                let expected_sign = alpha_rad.signum() * (delta * (delta + alpha_rad)).signum();
                if chi != 0.0 {
                    prop_assert_eq!(chi.signum(), expected_sign);
                }
            }
            Err(_) => {
                // resonance guard: one factor within 1% of zero
                let alpha_rad = alpha / HBAR;
                let guard = 0.01 * alpha_rad.abs();
                prop_assert!(
                    delta.abs() <= guard || (delta + alpha_rad).abs() <= guard
                );
            }
        }
    }
}

proptest! {
    // solver-backed properties run fewer cases
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn general_m1_agrees_with_closed_form(
        gamma in 5.0f64..100.0,
        amp in 0.0f64..0.4,
        wd in 0.1f64..2.0,
        branch_idx in 0usize..3,
    ) {
        let d = 0.012;
        let p = params_with_gamma(gamma, d);
        let tone = DriveTone {
            omega_d: wd * p.wave_speed / d,
            delta_ej: amp * p.ej_static,
        };
        let c = derive_constants(&p, &DriveSet::default()).unwrap();
        let branch = [1u32, 3, 5][branch_idx];
        let closed = floquet_mode(&c, &tone, branch);
        let general = floquet_mode_general(&c, &tone, branch, 1);
        match (closed, general) {
            (Ok(cm), Ok((gm, amps))) => {
                prop_assert!((cm.kd - gm.kd).abs() < 1e-9);
                prop_assert!((cm.a_plus - amps[2]).abs() < 1e-8);
                prop_assert!((cm.a_minus - amps[0]).abs() < 1e-8);
            }
            // both reject pole-adjacent inputs the same way
            (Err(_), Err(_)) => {}
            // the generalized solver additionally rejects sideband
            // amplitudes beyond its truncation-convergence bound, which the
            // closed form does not police
            (Ok(cm), Err(squidmodes::Error::NonConvergedTruncation { .. })) => {
                prop_assert!(cm.a_plus.abs() > 0.1 || cm.a_minus.abs() > 0.1);
            }
            (a, b) => prop_assert!(false, "solver disagreement: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn sweep_is_monotone_continuous(
        gamma in 5.0f64..100.0,
        wd in 0.1f64..2.0,
    ) {
        let d = 0.012;
        let p = params_with_gamma(gamma, d);
        let omega_d = wd * p.wave_speed / d;
        let amps: Vec<f64> = (0..21).map(|i| 0.4 * i as f64 / 20.0).collect();
        if let Ok(points) = drive_sweep(&p, omega_d, &amps, 3) {
            let omegas: Vec<f64> = match points
                .iter()
                .map(|pt| pt.mode.as_ref().map(|m| m.omega))
                .collect::<Result<_, _>>()
            {
                Ok(v) => v,
                Err(_) => return Ok(()), // pole inside the sweep range
            };
            let increasing = omegas[20] >= omegas[0];
            for w in omegas.windows(2) {
                if increasing {
                    prop_assert!(w[1] >= w[0] - 1e-6);
                } else {
                    prop_assert!(w[1] <= w[0] + 1e-6);
                }
                // continuity: no bracket jumps between adjacent amplitudes
                prop_assert!((w[1] - w[0]).abs() < 0.02 * omegas[0]);
            }
        }
    }

    #[test]
    fn quantizer_identities_hold_on_solved_modes(
        gamma in 5.0f64..100.0,
        amp in 0.0f64..0.4,
        wd in 0.1f64..2.0,
    ) {
        let d = 0.012;
        let p = params_with_gamma(gamma, d);
        let tone = DriveTone {
            omega_d: wd * p.wave_speed / d,
            delta_ej: amp * p.ej_static,
        };
        let c = derive_constants(&p, &DriveSet::default()).unwrap();
        if let Ok(mode) = floquet_mode(&c, &tone, 3) {
            let q = quantize(&mode, &p);
            prop_assert!((q.l_omega * q.c_omega * mode.omega * mode.omega - 1.0).abs() < 1e-12);
            prop_assert!((q.phi_zpf * q.q_zpf / (HBAR / 2.0) - 1.0).abs() < 1e-12);
            prop_assert!(q.kerr < 0.0);
        }
    }
}

#[test]
fn calibration_round_trip_over_random_qubit_frequencies() {
    let p = params_with_gamma(9.11275, 0.0025);
    let mut rng = ChaCha8Rng::seed_from_u64(0xca11b8a7e);
    let target = TAU * 2.5e6;
    let mut successes = 0;
    for _ in 0..12 {
        let f1: f64 = rng.gen_range(4.0..8.0);
        let f2: f64 = rng.gen_range(4.0..8.0);
        let q1 = TransmonParams {
            ej_ec_ratio: 80.0,
            charging_energy: HBAR * TAU * f1 * 1e9 / (640f64.sqrt() - 1.0),
            beta: 2.0 / 3.0,
            omega_q: TAU * f1 * 1e9,
            position: 0.1 * p.half_length,
            gate_charge: 0.0,
            t1: 10e-6,
            t2: 5e-6,
        };
        let q2 = TransmonParams {
            omega_q: TAU * f2 * 1e9,
            charging_energy: HBAR * TAU * f2 * 1e9 / (640f64.sqrt() - 1.0),
            position: -0.1 * p.half_length,
            ..q1
        };
        let cal = match calibrate_gate(&p, &[q1, q2], target, TAU * 10e6, 1) {
            Ok(c) => c,
            Err(_) => continue, // sideband parked on a pole for this draw
        };
        for (i, tone) in cal.drive_set().tones.iter().enumerate() {
            let qubit = if i < 2 { &q1 } else { &q2 };
            let g = calibrated_coupling(&p, &cal, qubit, tone, 1).unwrap();
            assert!(
                (g.abs() / target - 1.0).abs() < 0.01,
                "round trip off at tone {i}: |G| = {}",
                g.abs() / TAU / 1e6
            );
        }
        successes += 1;
    }
    assert!(successes >= 8, "only {successes}/12 draws calibratable");
}

#[test]
fn shortcut_concurrence_matches_wootters_only_on_the_bell_manifold() {
    // ideal gate trajectory: mid-gate the reduced state leaks outside
    // {gg, ee} and the coherence shortcut overshoots the true concurrence;
    // whenever that leakage is below 1e-3 the two agree within 0.02
    let cfg = GateConfig {
        g: TAU * 2.5e6,
        delta: TAU * 10e6,
        chi: 0.0,
        kappa: 0.0,
        t1: [1e99; 2],
        t2: [1e99; 2],
        n_fock: 8,
        include_kerr: false,
        t_final: 100e-9,
        dt: 0.1e-9,
        initial: InitialState::Gg,
        snapshot_stride: 25,
    };
    let run = run_gate(&cfg).unwrap();
    let mut checked_on_manifold = 0;
    let mut saw_overshoot = false;
    for (_, rho) in &run.trajectory.snapshots {
        let reduced = partial_trace_oscillator(rho).unwrap();
        let (wootters, shortcut) = concurrence(&reduced).unwrap();
        let leakage = reduced[(1, 1)].re + reduced[(2, 2)].re;
        if leakage < 1e-3 {
            assert!(
                (wootters - shortcut.abs()).abs() < 0.02,
                "on-manifold disagreement: wootters {wootters}, shortcut {shortcut}, leakage {leakage}"
            );
            checked_on_manifold += 1;
        } else if shortcut.abs() > wootters {
            saw_overshoot = true;
        }
    }
    assert!(checked_on_manifold >= 2);
    assert!(
        saw_overshoot,
        "expected the shortcut to overshoot mid-gate where leakage is large"
    );
}

#[test]
fn lossy_final_state_is_dominated_by_the_bell_elements() {
    let cfg = GateConfig {
        g: TAU * 2.5e6,
        delta: TAU * 10e6,
        chi: -TAU * 151.8e3,
        kappa: TAU * 0.2e6,
        t1: [10e-6; 2],
        t2: [5e-6; 2],
        n_fock: 8,
        include_kerr: true,
        t_final: 100e-9,
        dt: 0.1e-9,
        initial: InitialState::Gg,
        snapshot_stride: 250,
    };
    let run = run_gate(&cfg).unwrap();
    let reduced = partial_trace_oscillator(&run.trajectory.final_rho).unwrap();
    let dominant = [
        reduced[(0, 0)].norm(),
        reduced[(3, 3)].norm(),
        reduced[(3, 0)].norm(),
    ];
    let floor = dominant.iter().cloned().fold(f64::INFINITY, f64::min);
    for i in 0..4 {
        for j in 0..4 {
            if (i, j) == (0, 0) || (i, j) == (3, 3) || (i, j) == (3, 0) || (i, j) == (0, 3) {
                continue;
            }
            assert!(
                reduced[(i, j)].norm() < floor,
                "element ({i},{j}) = {} rivals the Bell elements",
                reduced[(i, j)].norm()
            );
        }
    }
}
