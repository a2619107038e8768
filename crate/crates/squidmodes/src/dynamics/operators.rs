//! Operator construction on the composite qubit ⊗ qubit ⊗ Fock space.
//!
//! Ordering: qubit 1 ⊗ qubit 2 ⊗ oscillator, qubit basis (g, e) = (0, 1),
//! so a composite index reads (q1 * 2 + q2) * N + n.

use num_complex::Complex64 as C64;

use super::linalg::{hermiticity_defect, kron, CMat};

/// A labelled dense operator.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub label: String,
    pub matrix: CMat,
}

impl OperatorSpec {
    pub fn new(label: impl Into<String>, matrix: CMat) -> Self {
        Self {
            label: label.into(),
            matrix,
        }
    }

    /// Relative hermiticity defect of the matrix.
    pub fn hermiticity(&self) -> f64 {
        let scale = self
            .matrix
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        hermiticity_defect(&self.matrix) / scale
    }
}

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Truncated Fock annihilation operator, superdiagonal sqrt(m).
pub fn annihilation(n_fock: usize) -> CMat {
    let mut a = CMat::zeros((n_fock, n_fock));
    for m in 1..n_fock {
        a[(m - 1, m)] = C64::new((m as f64).sqrt(), 0.0);
    }
    a
}

pub fn identity(n: usize) -> CMat {
    CMat::eye(n)
}

/// sigma_- = |g><e|.
pub fn sigma_minus() -> CMat {
    let mut s = CMat::zeros((2, 2));
    s[(0, 1)] = C64::new(1.0, 0.0);
    s
}

pub fn sigma_x() -> CMat {
    let mut s = CMat::zeros((2, 2));
    s[(0, 1)] = C64::new(1.0, 0.0);
    s[(1, 0)] = C64::new(1.0, 0.0);
    s
}

/// sigma_z = |e><e| - |g><g|.
pub fn sigma_z() -> CMat {
    let mut s = CMat::zeros((2, 2));
    s[(0, 0)] = C64::new(-1.0, 0.0);
    s[(1, 1)] = C64::new(1.0, 0.0);
    s
}

/// |e><e| projector.
pub fn excited_projector() -> CMat {
    let mut s = CMat::zeros((2, 2));
    s[(1, 1)] = C64::new(1.0, 0.0);
    s
}

/// All composite-space operators the gate engine needs.
#[derive(Debug, Clone)]
pub struct GateSpace {
    pub n_fock: usize,
    pub dim: usize,
    /// Oscillator annihilation on the full space.
    pub a: CMat,
    /// Per-qubit lowering operators.
    pub sm: [CMat; 2],
    /// Per-qubit sigma_z.
    pub sz: [CMat; 2],
    /// sigma_x,1 + sigma_x,2.
    pub sx_sum: CMat,
    /// Photon number operator a†a.
    pub n_photon: CMat,
    /// a†a (|e><e|_1 + |e><e|_2), the cross-Kerr operator shape.
    pub kerr_op: CMat,
}

impl GateSpace {
    pub fn new(n_fock: usize) -> Self {
        let i2 = identity(2);
        let i_f = identity(n_fock);
        let a_f = annihilation(n_fock);
        let a = kron(&kron(&i2, &i2), &a_f);
        let sm1 = kron(&kron(&sigma_minus(), &i2), &i_f);
        let sm2 = kron(&kron(&i2, &sigma_minus()), &i_f);
        let sz1 = kron(&kron(&sigma_z(), &i2), &i_f);
        let sz2 = kron(&kron(&i2, &sigma_z()), &i_f);
        let sx_sum = &kron(&kron(&sigma_x(), &i2), &i_f) + &kron(&kron(&i2, &sigma_x()), &i_f);
        let n_photon = {
            let mut n = CMat::zeros((4 * n_fock, 4 * n_fock));
            for q in 0..4 {
                for m in 0..n_fock {
                    n[(q * n_fock + m, q * n_fock + m)] = C64::new(m as f64, 0.0);
                }
            }
            n
        };
        let pe = excited_projector();
        let proj_sum = &kron(&kron(&pe, &i2), &i_f) + &kron(&kron(&i2, &pe), &i_f);
        let mut kerr_op = CMat::zeros((4 * n_fock, 4 * n_fock));
        super::linalg::matmul_into(&n_photon, &proj_sum, &mut kerr_op);
        Self {
            n_fock,
            dim: 4 * n_fock,
            a,
            sm: [sm1, sm2],
            sz: [sz1, sz2],
            sx_sum,
            n_photon,
            kerr_op,
        }
    }

    /// Composite basis index of (q1, q2, photon number).
    pub fn index(&self, q1: usize, q2: usize, n: usize) -> usize {
        (q1 * 2 + q2) * self.n_fock + n
    }

    /// Pure composite state |q1 q2, n>.
    pub fn basis_density(&self, q1: usize, q2: usize, n: usize) -> CMat {
        let mut rho = CMat::zeros((self.dim, self.dim));
        let i = self.index(q1, q2, n);
        rho[(i, i)] = C64::new(1.0, 0.0);
        rho
    }
}

/// Maximally mixed state on `dim` levels.
pub fn maximally_mixed(dim: usize) -> CMat {
    let mut rho = CMat::zeros((dim, dim));
    for i in 0..dim {
        rho[(i, i)] = C64::new(1.0 / dim as f64, 0.0);
    }
    rho
}

#[allow(unused)]
fn c_is_zero(z: C64) -> bool {
    z == czero()
}
