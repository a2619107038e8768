//! Bichromatic two-qubit gate: Hamiltonian builder, collapse set, and the
//! full simulation with derived entanglement series.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::lindblad::{evolve_with, EvolveConfig, TimeDependent, Trajectory};
use super::linalg::CMat;
use super::metrics::{bell_fidelity, concurrence, partial_trace_oscillator};
use super::operators::GateSpace;
use crate::error::{Error, Result};
use crate::modesolver::format_sig12;

/// Initial product state label, always with the oscillator in vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Gg,
    Ge,
    Eg,
    Ee,
}

impl InitialState {
    fn qubit_indices(self) -> (usize, usize) {
        match self {
            InitialState::Gg => (0, 0),
            InitialState::Ge => (0, 1),
            InitialState::Eg => (1, 0),
            InitialState::Ee => (1, 1),
        }
    }
}

/// Parameters of one gate simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateConfig {
    /// Sideband coupling G (rad/s).
    pub g: f64,
    /// Bichromatic detuning delta (rad/s); the gate closes at 2 pi / delta.
    pub delta: f64,
    /// Cross-Kerr coefficient chi (rad/s), applied as chi a†a sum_n |e><e|_n.
    pub chi: f64,
    /// Resonator decay rate kappa (rad/s).
    pub kappa: f64,
    /// Per-qubit relaxation times (s).
    pub t1: [f64; 2],
    /// Per-qubit total coherence times (s).
    pub t2: [f64; 2],
    /// Fock-space truncation.
    pub n_fock: usize,
    /// Include the cross-Kerr term.
    pub include_kerr: bool,
    /// Total simulated time (s); at least one gate period.
    pub t_final: f64,
    /// Integration step (s).
    pub dt: f64,
    /// Initial two-qubit state (oscillator in vacuum).
    pub initial: InitialState,
    /// Snapshot every this many steps.
    pub snapshot_stride: usize,
}

impl GateConfig {
    /// Gate duration tau = 2 pi / delta.
    pub fn tau(&self) -> f64 {
        std::f64::consts::TAU / self.delta
    }

    /// The fastest rate the integrator must resolve.
    pub fn rate_scale(&self) -> f64 {
        self.delta.abs().max(self.g.abs()).max(self.chi.abs())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_fock < 4 {
            return Err(Error::InvalidParameter {
                field: "N",
                message: format!("Fock cutoff must be at least 4, got {}", self.n_fock),
            });
        }
        for q in 0..2 {
            if self.t2[q] > 2.0 * self.t1[q] {
                return Err(Error::InvalidParameter {
                    field: "T2",
                    message: format!("qubit {}: T2 must not exceed 2 T1", q + 1),
                });
            }
        }
        let product = self.dt * self.rate_scale();
        if product >= 0.05 {
            return Err(Error::StepResolution { product });
        }
        if self.t_final + 1e-15 < self.tau() {
            return Err(Error::InvalidParameter {
                field: "t_final",
                message: "the trajectory must cover at least one gate period".into(),
            });
        }
        Ok(())
    }
}

/// H(t) = G (X e^{-i delta t} + X† e^{+i delta t}) + chi a†a sum_n |e><e|_n,
/// with X = a (sigma_x,1 + sigma_x,2); in angular-frequency units.
///
/// With `rotating_only` the counter-rotating products a sigma_- and
/// a† sigma_+ are filtered out, leaving the excitation-exchanging
/// beam-splitter coupling.
pub struct MsHamiltonian {
    x: CMat,
    x_dag: CMat,
    kerr: Option<CMat>,
    g: f64,
    delta: f64,
    dim: usize,
}

impl MsHamiltonian {
    pub fn new(space: &GateSpace, cfg: &GateConfig, rotating_only: bool) -> Self {
        use super::linalg::{adjoint, matmul_into};
        let x = if rotating_only {
            // a (sigma_+,1 + sigma_+,2)
            let sp_sum = &adjoint(&space.sm[0]) + &adjoint(&space.sm[1]);
            let mut m = CMat::zeros((space.dim, space.dim));
            matmul_into(&space.a, &sp_sum, &mut m);
            m
        } else {
            let mut m = CMat::zeros((space.dim, space.dim));
            matmul_into(&space.a, &space.sx_sum, &mut m);
            m
        };
        let x_dag = super::linalg::adjoint(&x);
        let kerr = if cfg.include_kerr && cfg.chi != 0.0 {
            Some(space.kerr_op.mapv(|z| z * C64::new(cfg.chi, 0.0)))
        } else {
            None
        };
        Self {
            x,
            x_dag,
            kerr,
            g: cfg.g,
            delta: cfg.delta,
            dim: space.dim,
        }
    }
}

impl TimeDependent for MsHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, t: f64, out: &mut CMat) {
        let phase = C64::from_polar(self.g, -self.delta * t);
        let phase_c = phase.conj();
        match &self.kerr {
            Some(k) => {
                for ((o, (&x, &xd)), &kk) in out
                    .iter_mut()
                    .zip(self.x.iter().zip(self.x_dag.iter()))
                    .zip(k.iter())
                {
                    *o = phase * x + phase_c * xd + kk;
                }
            }
            None => {
                for (o, (&x, &xd)) in out.iter_mut().zip(self.x.iter().zip(self.x_dag.iter())) {
                    *o = phase * x + phase_c * xd;
                }
            }
        }
    }
}

/// Build the gate Hamiltonian for a configuration.
pub fn build_ms_hamiltonian(cfg: &GateConfig, rotating_only: bool) -> (GateSpace, MsHamiltonian) {
    let space = GateSpace::new(cfg.n_fock);
    let h = MsHamiltonian::new(&space, cfg, rotating_only);
    (space, h)
}

/// Collapse rates below this are dropped entirely, so that "effectively
/// infinite" lifetimes and strictly lossless runs are bit-identical.
const RATE_FLOOR: f64 = 1e-30;

/// Collapse set: sqrt(kappa) a, per-qubit sqrt(1/T1) sigma_-, and pure
/// dephasing sqrt(gamma_phi/2) sigma_z with gamma_phi = 1/T2 - 1/(2 T1),
/// which puts the off-diagonal decay at exactly 1/T2.
pub fn collapse_operators(space: &GateSpace, cfg: &GateConfig) -> Vec<CMat> {
    let mut out = Vec::new();
    if cfg.kappa > RATE_FLOOR {
        out.push(space.a.mapv(|z| z * C64::new(cfg.kappa.sqrt(), 0.0)));
    }
    for q in 0..2 {
        let gamma1 = 1.0 / cfg.t1[q];
        if gamma1 > RATE_FLOOR {
            out.push(space.sm[q].mapv(|z| z * C64::new(gamma1.sqrt(), 0.0)));
        }
        let gamma_phi = 1.0 / cfg.t2[q] - 0.5 / cfg.t1[q];
        if gamma_phi > RATE_FLOOR {
            out.push(
                space.sz[q].mapv(|z| z * C64::new((gamma_phi / 2.0).sqrt(), 0.0)),
            );
        }
    }
    out
}

/// Step-resolved derived quantities of a gate trajectory.
#[derive(Debug, Clone, Default)]
pub struct GateSeries {
    pub rho_gggg: Vec<f64>,
    pub rho_eeee: Vec<f64>,
    pub im_rho_eegg: Vec<f64>,
    pub concurrence: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub n_photon: Vec<f64>,
}

/// Final-state metrics of a gate run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GateMetrics {
    pub concurrence_wootters: f64,
    pub concurrence_shortcut: f64,
    pub fidelity_phase_fixed: f64,
    pub fidelity_phase_optimized: f64,
    pub mean_photon_final: f64,
}

/// A finished gate simulation.
#[derive(Debug, Clone)]
pub struct GateRun {
    pub trajectory: Trajectory,
    pub metrics: GateMetrics,
}

/// Simulate the bichromatic gate from `|initial, vac>`.
pub fn run_gate(cfg: &GateConfig) -> Result<GateRun> {
    cfg.validate()?;
    let (space, h) = build_ms_hamiltonian(cfg, false);
    let collapse = collapse_operators(&space, cfg);
    let (q1, q2) = cfg.initial.qubit_indices();
    let rho0 = space.basis_density(q1, q2, 0);
    let evolve_cfg = EvolveConfig {
        dt: cfg.dt,
        t_final: cfg.t_final,
        snapshot_stride: cfg.snapshot_stride.max(1),
        rate_scale: Some(cfg.rate_scale()),
    };
    let mut series = GateSeries::default();
    let n_limit = space.n_fock as f64 / 4.0;
    let n_fock = space.n_fock;
    let mut traj = evolve_with(&h, &collapse, &rho0, &evolve_cfg, |_, _, rho| {
        let reduced = partial_trace_oscillator(rho)?;
        let (wootters, _) = concurrence(&reduced)?;
        let (_, f_opt) = bell_fidelity(&reduced)?;
        // mean photon number from the diagonal
        let mut n_mean = 0.0;
        for q in 0..4 {
            for m in 0..n_fock {
                n_mean += rho[(q * n_fock + m, q * n_fock + m)].re * m as f64;
            }
        }
        if n_mean > n_limit {
            return Err(Error::FockOverflow {
                n_mean,
                limit: n_limit,
            });
        }
        series.rho_gggg.push(reduced[(0, 0)].re);
        series.rho_eeee.push(reduced[(3, 3)].re);
        series.im_rho_eegg.push(reduced[(3, 0)].im);
        series.concurrence.push(wootters);
        series.fidelity.push(f_opt);
        series.n_photon.push(n_mean);
        Ok(())
    })?;
    let reduced = partial_trace_oscillator(&traj.final_rho)?;
    let (wootters, shortcut) = concurrence(&reduced)?;
    let (f_fixed, f_opt) = bell_fidelity(&reduced)?;
    let metrics = GateMetrics {
        concurrence_wootters: wootters,
        concurrence_shortcut: shortcut,
        fidelity_phase_fixed: f_fixed,
        fidelity_phase_optimized: f_opt,
        mean_photon_final: *series.n_photon.last().unwrap(),
    };
    traj.series = Some(series);
    Ok(GateRun {
        trajectory: traj,
        metrics,
    })
}

/// Trajectory CSV: `t_ns,rho_gggg,rho_eeee,im_rho_eegg,concurrence,fidelity,
/// n_photon` with 12 significant digits.
pub fn trajectory_csv(traj: &Trajectory) -> Option<String> {
    let series = traj.series.as_ref()?;
    let mut s =
        String::from("t_ns,rho_gggg,rho_eeee,im_rho_eegg,concurrence,fidelity,n_photon\n");
    for (i, &t) in traj.times.iter().enumerate() {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_sig12(t * 1e9),
            format_sig12(series.rho_gggg[i]),
            format_sig12(series.rho_eeee[i]),
            format_sig12(series.im_rho_eegg[i]),
            format_sig12(series.concurrence[i]),
            format_sig12(series.fidelity[i]),
            format_sig12(series.n_photon[i]),
        ));
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::linalg::{hermiticity_defect, hermitian_eigen};
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    pub(crate) fn fig5_config() -> GateConfig {
        GateConfig {
            g: TAU * 2.5e6,
            delta: TAU * 10e6,
            chi: -TAU * 151.78e3,
            kappa: TAU * 0.2e6,
            t1: [10e-6, 10e-6],
            t2: [5e-6, 5e-6],
            n_fock: 10,
            include_kerr: true,
            t_final: 100e-9,
            dt: 0.05e-9,
            initial: InitialState::Gg,
            snapshot_stride: 100,
        }
    }

    #[test]
    fn hamiltonian_is_hermitian_and_periodic() {
        let cfg = fig5_config();
        let (space, h) = build_ms_hamiltonian(&cfg, false);
        let mut h1 = CMat::zeros((space.dim, space.dim));
        let mut h2 = CMat::zeros((space.dim, space.dim));
        for &t in &[0.0, 13.7e-9, 61.3e-9] {
            h.eval_into(t, &mut h1);
            assert!(hermiticity_defect(&h1) < 1e-12 * TAU * 10e6);
            h.eval_into(t + cfg.tau(), &mut h2);
            let diff = (&h1 - &h2).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            assert!(diff < 1e-12 * TAU * 10e6);
        }
    }

    #[test]
    fn zero_coupling_means_zero_hamiltonian() {
        let mut cfg = fig5_config();
        cfg.g = 0.0;
        cfg.chi = 0.0;
        let (space, h) = build_ms_hamiltonian(&cfg, false);
        let mut buf = CMat::zeros((space.dim, space.dim));
        h.eval_into(17.0e-9, &mut buf);
        assert!(buf.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn spectral_norm_at_gate_parameters() {
        let cfg = fig5_config();
        let (space, h) = build_ms_hamiltonian(&cfg, false);
        let mut buf = CMat::zeros((space.dim, space.dim));
        h.eval_into(0.0, &mut buf);
        let (eigs, _) = hermitian_eigen(&buf, false);
        let norm = eigs.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
        // of order 2 pi x 10 MHz at N = 10
        assert!(norm / TAU / 1e6 > 5.0 && norm / TAU / 1e6 < 60.0);
    }

    #[test]
    fn collapse_rate_floor_drops_infinite_lifetimes() {
        let mut cfg = fig5_config();
        let space = GateSpace::new(cfg.n_fock);
        cfg.kappa = 0.0;
        cfg.t1 = [1e99, 1e99];
        cfg.t2 = [1e99, 1e99];
        assert!(collapse_operators(&space, &cfg).is_empty());
        cfg.kappa = TAU * 0.2e6;
        cfg.t1 = [10e-6, 10e-6];
        cfg.t2 = [5e-6, 5e-6];
        assert_eq!(collapse_operators(&space, &cfg).len(), 5);
    }

    #[test]
    fn gate_config_guards() {
        let mut cfg = fig5_config();
        cfg.n_fock = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = fig5_config();
        cfg.dt = 1e-6;
        assert!(matches!(cfg.validate(), Err(Error::StepResolution { .. })));
        let mut cfg = fig5_config();
        cfg.t2 = [30e-6, 5e-6];
        assert!(cfg.validate().is_err());
        let mut cfg = fig5_config();
        cfg.t_final = 50e-9;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn ideal_gate_reaches_bell_state() {
        let mut cfg = fig5_config();
        cfg.kappa = 0.0;
        cfg.t1 = [1e99, 1e99];
        cfg.t2 = [1e99, 1e99];
        cfg.include_kerr = false;
        cfg.n_fock = 8;
        let run = run_gate(&cfg).unwrap();
        assert!(run.metrics.concurrence_wootters > 0.9999);
        assert!(run.metrics.fidelity_phase_optimized > 0.9999);
        // this convention realizes (|gg> + i|ee>)/sqrt(2) exactly
        assert!(run.metrics.fidelity_phase_fixed > 0.9999);
        assert!(run.metrics.mean_photon_final < 1e-4);
        run.trajectory.check_invariants().unwrap();
    }

    #[test]
    fn g_zero_stays_in_ground_state() {
        let mut cfg = fig5_config();
        cfg.g = 0.0;
        cfg.chi = 0.0;
        cfg.kappa = 0.0;
        cfg.t1 = [1e99, 1e99];
        cfg.t2 = [1e99, 1e99];
        cfg.n_fock = 4;
        cfg.dt = 0.5e-9;
        let run = run_gate(&cfg).unwrap();
        let series = run.trajectory.series.as_ref().unwrap();
        assert_relative_eq!(*series.rho_gggg.last().unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(run.metrics.fidelity_phase_optimized, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn trajectory_csv_shape() {
        let mut cfg = fig5_config();
        cfg.n_fock = 4;
        cfg.dt = 0.5e-9;
        cfg.include_kerr = false;
        let run = run_gate(&cfg).unwrap();
        let csv = trajectory_csv(&run.trajectory).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t_ns,rho_gggg,rho_eeee,im_rho_eegg,concurrence,fidelity,n_photon"
        );
        assert_eq!(csv.lines().count(), 202); // header + 201 steps
    }
}
