//! Dense complex matrix helpers for the open-system engine.
//!
//! Dimensions here are tens, not thousands; a buffered triple-loop matmul,
//! a triplet-sparse product for collapse operators and a cyclic Jacobi
//! eigensolver cover everything without native linear-algebra dependencies.

use ndarray::Array2;
use num_complex::Complex64 as C64;

pub type CMat = Array2<C64>;

/// out = a * b (out is overwritten).
pub fn matmul_into(a: &CMat, b: &CMat, out: &mut CMat) {
    let n = a.nrows();
    let k_dim = a.ncols();
    debug_assert_eq!(b.nrows(), k_dim);
    out.fill(C64::new(0.0, 0.0));
    for i in 0..n {
        for k in 0..k_dim {
            let aik = a[(i, k)];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            let b_row = b.row(k);
            let mut out_row = out.row_mut(i);
            for (o, &bkj) in out_row.iter_mut().zip(b_row.iter()) {
                *o += aik * bkj;
            }
        }
    }
}

/// Conjugate transpose.
pub fn adjoint(a: &CMat) -> CMat {
    let mut out = CMat::zeros((a.ncols(), a.nrows()));
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = aij * b[(p, q)];
                }
            }
        }
    }
    out
}

pub fn trace(a: &CMat) -> C64 {
    a.diag().iter().sum()
}

/// Largest absolute deviation from hermiticity.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// A collapse operator stored as nonzero triplets; products with a dense
/// density matrix then cost O(nnz * dim) instead of a full matmul.
#[derive(Debug, Clone)]
pub struct SparseOp {
    pub dim: usize,
    pub triplets: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn from_dense(a: &CMat) -> Self {
        let mut triplets = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != C64::new(0.0, 0.0) {
                    triplets.push((i, j, a[(i, j)]));
                }
            }
        }
        Self {
            dim: a.nrows(),
            triplets,
        }
    }

    /// out += c * rho * c†, using `work` as the c * rho intermediate.
    pub fn sandwich_acc(&self, rho: &CMat, work: &mut CMat, out: &mut CMat) {
        work.fill(C64::new(0.0, 0.0));
        for &(i, k, v) in &self.triplets {
            let rho_row = rho.row(k);
            let mut w_row = work.row_mut(i);
            for (w, &r) in w_row.iter_mut().zip(rho_row.iter()) {
                *w += v * r;
            }
        }
        // out[:, j] += conj(v) * work[:, k] for each (j, k, v)
        for &(j, k, v) in &self.triplets {
            let vc = v.conj();
            for i in 0..self.dim {
                out[(i, j)] += work[(i, k)] * vc;
            }
        }
    }
}

/// Eigenvalues (ascending) and, optionally, eigenvectors of a Hermitian
/// matrix by cyclic Jacobi with complex rotations.
pub fn hermitian_eigen(a: &CMat, want_vectors: bool) -> (Vec<f64>, Option<CMat>) {
    let n = a.nrows();
    let mut m = a.clone();
    // symmetrize away roundoff-level defects
    for i in 0..n {
        for j in 0..n {
            let s = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = s;
            m[(j, i)] = s.conj();
        }
    }
    let mut v = if want_vectors {
        Some(CMat::eye(n))
    } else {
        None
    };
    let scale: f64 = m
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm();
            }
        }
        if off < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / apq.norm(); // e^{i arg}
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: col_p' = c col_p - s conj(phase) col_q is applied
                // as m <- J† m J with J[p,p]=c, J[q,q]=c, J[p,q]=s*phase,
                // J[q,p]=-s*conj(phase)
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c - miq * s * phase.conj();
                    m[(i, q)] = mip * s * phase + miq * c;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c - mqj * s * phase;
                    m[(q, j)] = mpj * s * phase.conj() + mqj * c;
                }
                if let Some(vv) = v.as_mut() {
                    for i in 0..n {
                        let vip = vv[(i, p)];
                        let viq = vv[(i, q)];
                        vv[(i, p)] = vip * c - viq * s * phase.conj();
                        vv[(i, q)] = vip * s * phase + viq * c;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let eigs: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vecs = v.map(|vv| {
        let mut sorted = CMat::zeros((n, n));
        for (new_col, &old_col) in order.iter().enumerate() {
            for i in 0..n {
                sorted[(i, new_col)] = vv[(i, old_col)];
            }
        }
        sorted
    });
    (eigs, vecs)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigen(a, false).0[0]
}

/// Hermitian square root via the spectral decomposition, clamping
/// roundoff-negative eigenvalues to zero.
pub fn hermitian_sqrt(a: &CMat) -> CMat {
    let n = a.nrows();
    let (eigs, vecs) = hermitian_eigen(a, true);
    let v = vecs.unwrap();
    let mut out = CMat::zeros((n, n));
    for k in 0..n {
        let lam = eigs[k].max(0.0).sqrt();
        if lam == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[(i, k)] * v[(j, k)].conj() * C64::new(lam, 0.0);
            }
        }
    }
    out
}
