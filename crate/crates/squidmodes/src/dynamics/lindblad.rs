//! Fixed-step RK4 integration of the Lindblad master equation.
//!
//! The right-hand side is evaluated in drift-plus-jump form,
//! `rho_dot = A rho + (A rho)† + sum_c c rho c†` with
//! `A = -i H - ½ sum_c c†c`, which is one dense matrix product per
//! evaluation for Hermitian states plus cheap sparse jump sandwiches.
//! Hamiltonians are supplied in angular-frequency units (H/hbar).

use num_complex::Complex64 as C64;

use super::linalg::{adjoint, hermiticity_defect, matmul_into, min_eigenvalue, trace, CMat, SparseOp};
use crate::error::{Error, Result};

/// A time-dependent operator in angular-frequency units.
pub trait TimeDependent {
    fn dim(&self) -> usize;
    fn eval_into(&self, t: f64, out: &mut CMat);
}

/// A constant Hamiltonian.
pub struct StaticHamiltonian(pub CMat);

impl TimeDependent for StaticHamiltonian {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn eval_into(&self, _t: f64, out: &mut CMat) {
        out.assign(&self.0);
    }
}

/// Integration grid and guards.
#[derive(Debug, Clone)]
pub struct EvolveConfig {
    /// Time step (s).
    pub dt: f64,
    /// End time (s); the grid uses round(t_final/dt) steps.
    pub t_final: f64,
    /// Store a density-matrix snapshot every this many steps.
    pub snapshot_stride: usize,
    /// When set, dt times this rate must stay below 0.05.
    pub rate_scale: Option<f64>,
}

/// Integrated trajectory: step-resolved times, strided snapshots and the
/// final state. Gate-specific derived series are attached by the gate layer.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<(usize, CMat)>,
    pub final_rho: CMat,
    pub series: Option<super::gate::GateSeries>,
}

/// Bounds used by [`Trajectory::check_invariants`].
#[derive(Debug, Clone, Copy)]
pub struct InvariantReport {
    pub max_trace_dev: f64,
    pub max_herm_defect: f64,
    pub min_eigenvalue: f64,
}

impl Trajectory {
    /// Verify trace, hermiticity and positivity on every stored snapshot:
    /// |tr - 1| < 1e-6, hermiticity defect < 1e-9, smallest eigenvalue
    /// > -1e-7.
    pub fn check_invariants(&self) -> Result<InvariantReport> {
        let mut report = InvariantReport {
            max_trace_dev: 0.0,
            max_herm_defect: 0.0,
            min_eigenvalue: f64::INFINITY,
        };
        for (_, rho) in &self.snapshots {
            let tr_dev = (trace(rho).re - 1.0).abs().max(trace(rho).im.abs());
            let herm = hermiticity_defect(rho);
            let min_eig = min_eigenvalue(rho);
            report.max_trace_dev = report.max_trace_dev.max(tr_dev);
            report.max_herm_defect = report.max_herm_defect.max(herm);
            report.min_eigenvalue = report.min_eigenvalue.min(min_eig);
        }
        if report.max_trace_dev >= 1e-6 {
            return Err(Error::NotADensityMatrix {
                reason: format!("trace deviation {:.3e}", report.max_trace_dev),
            });
        }
        if report.max_herm_defect >= 1e-9 {
            return Err(Error::NotADensityMatrix {
                reason: format!("hermiticity defect {:.3e}", report.max_herm_defect),
            });
        }
        if report.min_eigenvalue <= -1e-7 {
            return Err(Error::PositivityLoss {
                min_eig: report.min_eigenvalue,
            });
        }
        Ok(report)
    }
}

struct Work {
    h: CMat,
    drift: CMat,
    prod: CMat,
    jump: CMat,
    k: [CMat; 4],
    stage: CMat,
}

impl Work {
    fn new(dim: usize) -> Self {
        let z = || CMat::zeros((dim, dim));
        Self {
            h: z(),
            drift: z(),
            prod: z(),
            jump: z(),
            k: [z(), z(), z(), z()],
            stage: z(),
        }
    }
}

fn rhs(
    h_op: &dyn TimeDependent,
    m_half: &CMat,
    jumps: &[SparseOp],
    t: f64,
    rho: &CMat,
    w_h: &mut CMat,
    w_drift: &mut CMat,
    w_prod: &mut CMat,
    w_jump: &mut CMat,
    out: &mut CMat,
) {
    let dim = rho.nrows();
    h_op.eval_into(t, w_h);
    // drift = -i H - ½ sum c†c
    let minus_i = C64::new(0.0, -1.0);
    for i in 0..dim {
        for j in 0..dim {
            w_drift[(i, j)] = minus_i * w_h[(i, j)] - m_half[(i, j)];
        }
    }
    matmul_into(w_drift, rho, w_prod);
    // out = drift rho + (drift rho)† for Hermitian rho
    for i in 0..dim {
        for j in 0..dim {
            out[(i, j)] = w_prod[(i, j)] + w_prod[(j, i)].conj();
        }
    }
    for jump in jumps {
        jump.sandwich_acc(rho, w_jump, out);
    }
}

/// Integrate the master equation, invoking `on_step(step, t, rho)` at every
/// grid point including t = 0 and the final time.
pub fn evolve_with(
    h_op: &dyn TimeDependent,
    collapse: &[CMat],
    rho0: &CMat,
    cfg: &EvolveConfig,
    mut on_step: impl FnMut(usize, f64, &CMat) -> Result<()>,
) -> Result<Trajectory> {
    let dim = rho0.nrows();
    if rho0.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: rho0.ncols(),
        });
    }
    if h_op.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: h_op.dim(),
        });
    }
    for c in collapse {
        if c.nrows() != dim || c.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: c.nrows(),
            });
        }
    }
    let tr = trace(rho0);
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-12 || hermiticity_defect(rho0) > 1e-9 {
        return Err(Error::NotADensityMatrix {
            reason: "initial state must be Hermitian with unit trace".into(),
        });
    }
    if let Some(rate) = cfg.rate_scale {
        let product = cfg.dt * rate;
        if product >= 0.05 {
            return Err(Error::StepResolution { product });
        }
    }
    if !(cfg.dt > 0.0) || !(cfg.t_final >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "dt",
            message: "dt must be positive and t_final non-negative".into(),
        });
    }

    // ½ sum c†c and sparse jump forms
    let mut m_half = CMat::zeros((dim, dim));
    let mut tmp = CMat::zeros((dim, dim));
    for c in collapse {
        let cd = adjoint(c);
        matmul_into(&cd, c, &mut tmp);
        m_half = &m_half + &tmp;
    }
    m_half.mapv_inplace(|z| z * 0.5);
    let jumps: Vec<SparseOp> = collapse.iter().map(SparseOp::from_dense).collect();

    let n_steps = (cfg.t_final / cfg.dt).round() as usize;
    let stride = cfg.snapshot_stride.max(1);
    let mut w = Work::new(dim);
    let mut rho = rho0.clone();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut snapshots = Vec::new();

    for step in 0..=n_steps {
        let t = step as f64 * cfg.dt;
        times.push(t);
        on_step(step, t, &rho)?;
        if step % stride == 0 || step == n_steps {
            let min_eig = min_eigenvalue(&rho);
            if min_eig < -1e-5 {
                return Err(Error::PositivityLoss { min_eig });
            }
            snapshots.push((step, rho.clone()));
        }
        if step == n_steps {
            break;
        }
        // classical RK4
        let dt = cfg.dt;
        let half = 0.5 * dt;
        rhs(h_op, &m_half, &jumps, t, &rho, &mut w.h, &mut w.drift, &mut w.prod, &mut w.jump, {
            let (k0, _) = w.k.split_at_mut(1);
            &mut k0[0]
        });
        stage_from(&rho, &w.k[0], half, &mut w.stage);
        rhs(h_op, &m_half, &jumps, t + half, &w.stage, &mut w.h, &mut w.drift, &mut w.prod, &mut w.jump, {
            let (_, rest) = w.k.split_at_mut(1);
            &mut rest[0]
        });
        stage_from(&rho, &w.k[1], half, &mut w.stage);
        rhs(h_op, &m_half, &jumps, t + half, &w.stage, &mut w.h, &mut w.drift, &mut w.prod, &mut w.jump, {
            let (_, rest) = w.k.split_at_mut(2);
            &mut rest[0]
        });
        stage_from(&rho, &w.k[2], dt, &mut w.stage);
        rhs(h_op, &m_half, &jumps, t + dt, &w.stage, &mut w.h, &mut w.drift, &mut w.prod, &mut w.jump, {
            let (_, rest) = w.k.split_at_mut(3);
            &mut rest[0]
        });
        let sixth = dt / 6.0;
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] += C64::new(sixth, 0.0)
                    * (w.k[0][(i, j)]
                        + C64::new(2.0, 0.0) * (w.k[1][(i, j)] + w.k[2][(i, j)])
                        + w.k[3][(i, j)]);
            }
        }
    }
    Ok(Trajectory {
        times,
        snapshots,
        final_rho: rho,
        series: None,
    })
}

fn stage_from(rho: &CMat, k: &CMat, factor: f64, out: &mut CMat) {
    let f = C64::new(factor, 0.0);
    for ((o, &r), &kk) in out.iter_mut().zip(rho.iter()).zip(k.iter()) {
        *o = r + f * kk;
    }
}

/// Integrate and return the trajectory without step observables.
pub fn lindblad_evolve(
    h_op: &dyn TimeDependent,
    collapse: &[CMat],
    rho0: &CMat,
    cfg: &EvolveConfig,
) -> Result<Trajectory> {
    evolve_with(h_op, collapse, rho0, cfg, |_, _, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::operators::{annihilation, identity, sigma_minus};
    use approx::assert_relative_eq;
    use ndarray::array;
    use std::f64::consts::TAU;

    #[test]
    fn free_evolution_is_identity() {
        let dim = 4;
        let h = StaticHamiltonian(CMat::zeros((dim, dim)));
        let mut rho0 = CMat::zeros((dim, dim));
        rho0[(1, 1)] = C64::new(0.5, 0.0);
        rho0[(2, 2)] = C64::new(0.5, 0.0);
        rho0[(1, 2)] = C64::new(0.25, 0.1);
        rho0[(2, 1)] = C64::new(0.25, -0.1);
        let cfg = EvolveConfig {
            dt: 1e-9,
            t_final: 100e-9,
            snapshot_stride: 10,
            rate_scale: None,
        };
        let tr = lindblad_evolve(&h, &[], &rho0, &cfg).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                assert_relative_eq!(tr.final_rho[(i, j)].re, rho0[(i, j)].re, epsilon = 1e-12);
                assert_relative_eq!(tr.final_rho[(i, j)].im, rho0[(i, j)].im, epsilon = 1e-12);
            }
        }
        tr.check_invariants().unwrap();
    }

    #[test]
    fn photon_decay_matches_exponential() {
        let n = 6;
        let kappa = TAU * 0.2e6;
        let a = annihilation(n);
        let c = a.mapv(|z| z * C64::new(kappa.sqrt(), 0.0));
        let mut rho0 = CMat::zeros((n, n));
        rho0[(1, 1)] = C64::new(1.0, 0.0);
        let t_end = 1.0 / kappa;
        let cfg = EvolveConfig {
            dt: t_end / 800.0,
            t_final: t_end,
            snapshot_stride: 100,
            rate_scale: None,
        };
        let h = StaticHamiltonian(CMat::zeros((n, n)));
        let tr = lindblad_evolve(&h, &[c], &rho0, &cfg).unwrap();
        let p1 = tr.final_rho[(1, 1)].re;
        assert!((p1 - (-1.0f64).exp()).abs() < 1e-4);
        tr.check_invariants().unwrap();
    }

    #[test]
    fn resonant_swap_completes_at_half_period() {
        // single qubit ⊗ oscillator beam splitter at delta = 0
        let n = 6;
        let g = TAU * 2.5e6;
        let a_f = annihilation(n);
        let sm = sigma_minus();
        let sp = super::super::linalg::adjoint(&sm);
        let h_mat = {
            let term = super::super::linalg::kron(&sp, &a_f);
            let m = &term + &super::super::linalg::adjoint(&term);
            m.mapv(|z| z * C64::new(g, 0.0))
        };
        let h = StaticHamiltonian(h_mat);
        // |e, 0> at index 1*n + 0
        let dim = 2 * n;
        let mut rho0 = CMat::zeros((dim, dim));
        rho0[(n, n)] = C64::new(1.0, 0.0);
        let t_swap = std::f64::consts::PI / (2.0 * g);
        let cfg = EvolveConfig {
            dt: 0.05e-9,
            t_final: t_swap,
            snapshot_stride: 400,
            rate_scale: Some(g),
        };
        let tr = lindblad_evolve(&h, &[], &rho0, &cfg).unwrap();
        // excitation fully transferred to |g, 1> (index 1)
        assert!(tr.final_rho[(1, 1)].re > 1.0 - 1e-6);
        // excitation number conserved
        let mut exc = 0.0;
        for q in 0..2 {
            for m in 0..n {
                exc += tr.final_rho[(q * n + m, q * n + m)].re * (q + m) as f64;
            }
        }
        assert_relative_eq!(exc, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn step_resolution_guard() {
        let h = StaticHamiltonian(CMat::zeros((2, 2)));
        let rho0 = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let cfg = EvolveConfig {
            dt: 1e-9,
            t_final: 1e-7,
            snapshot_stride: 1,
            rate_scale: Some(1e9),
        };
        match lindblad_evolve(&h, &[], &rho0, &cfg) {
            Err(Error::StepResolution { .. }) => {}
            other => panic!("expected StepResolution, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn rejects_non_density_input() {
        let h = StaticHamiltonian(CMat::zeros((2, 2)));
        let bad = array![
            [C64::new(2.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let cfg = EvolveConfig {
            dt: 1e-9,
            t_final: 1e-8,
            snapshot_stride: 1,
            rate_scale: None,
        };
        assert!(lindblad_evolve(&h, &[], &bad, &cfg).is_err());
        let mismatched = identity(3).mapv(|z| z / 3.0);
        assert!(lindblad_evolve(&h, &[], &mismatched, &cfg).is_err());
    }
}
