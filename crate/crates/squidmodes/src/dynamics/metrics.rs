//! Entanglement and fidelity metrics for the two-qubit reduced state.

use num_complex::Complex64 as C64;

use super::linalg::{hermitian_eigen, hermitian_sqrt, hermiticity_defect, matmul_into, trace, CMat};
use crate::error::{Error, Result};

/// Trace out the oscillator factor of a (2 ⊗ 2 ⊗ N)-dimensional state.
pub fn partial_trace_oscillator(rho: &CMat) -> Result<CMat> {
    let dim = rho.nrows();
    if rho.ncols() != dim || dim % 4 != 0 || dim == 0 {
        return Err(Error::DimensionMismatch {
            expected: 4 * (dim / 4).max(1),
            actual: dim,
        });
    }
    let n = dim / 4;
    let mut out = CMat::zeros((4, 4));
    for a in 0..4 {
        for b in 0..4 {
            let mut s = C64::new(0.0, 0.0);
            for m in 0..n {
                s += rho[(a * n + m, b * n + m)];
            }
            out[(a, b)] = s;
        }
    }
    Ok(out)
}

fn check_two_qubit_density(rho: &CMat) -> Result<()> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: rho.nrows(),
        });
    }
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > 1e-6 || tr.im.abs() > 1e-9 {
        return Err(Error::NotADensityMatrix {
            reason: format!("trace = {tr}"),
        });
    }
    if hermiticity_defect(rho) > 1e-6 {
        return Err(Error::NotADensityMatrix {
            reason: "not Hermitian".into(),
        });
    }
    Ok(())
}

/// Spin-flipped state (sigma_y ⊗ sigma_y) rho* (sigma_y ⊗ sigma_y).
fn spin_flip(rho: &CMat) -> CMat {
    let mut yy = CMat::zeros((4, 4));
    // sigma_y ⊗ sigma_y in the (gg, ge, eg, ee) basis is the anti-diagonal
    // (-1, 1, 1, -1)
    yy[(0, 3)] = C64::new(-1.0, 0.0);
    yy[(1, 2)] = C64::new(1.0, 0.0);
    yy[(2, 1)] = C64::new(1.0, 0.0);
    yy[(3, 0)] = C64::new(-1.0, 0.0);
    let conj = rho.mapv(|z| z.conj());
    let mut t = CMat::zeros((4, 4));
    let mut out = CMat::zeros((4, 4));
    matmul_into(&yy, &conj, &mut t);
    matmul_into(&t, &yy, &mut out);
    out
}

/// Wootters concurrence and the coherence shortcut 2 Im rho_ee,gg.
///
/// The shortcut equals the concurrence only for states supported on
/// {gg, ee}; it is returned signed.
pub fn concurrence(rho: &CMat) -> Result<(f64, f64)> {
    check_two_qubit_density(rho)?;
    let flipped = spin_flip(rho);
    // Hermitian route: eigenvalues of R = sqrt(rho) rho~ sqrt(rho)
    let root = hermitian_sqrt(rho);
    let mut t = CMat::zeros((4, 4));
    let mut r = CMat::zeros((4, 4));
    matmul_into(&root, &flipped, &mut t);
    matmul_into(&t, &root, &mut r);
    let (eigs, _) = hermitian_eigen(&r, false);
    let mut lams: Vec<f64> = eigs.iter().map(|&e| e.max(0.0).sqrt()).collect();
    lams.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let wootters = (lams[0] - lams[1] - lams[2] - lams[3]).max(0.0);
    let shortcut = 2.0 * rho[(3, 0)].im;
    Ok((wootters, shortcut))
}

/// Fidelity against the Bell state (|gg> + i e^{-i phi} |ee>)/sqrt(2):
/// phase-fixed (phi = 0) and maximized over the local z-phase phi.
pub fn bell_fidelity(rho: &CMat) -> Result<(f64, f64)> {
    check_two_qubit_density(rho)?;
    let half_pop = 0.5 * (rho[(0, 0)].re + rho[(3, 3)].re);
    let coh = rho[(3, 0)];
    let fixed = half_pop + coh.im;
    let optimized = half_pop + coh.norm();
    Ok((fixed, optimized))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::linalg::kron;
    use crate::dynamics::operators::maximally_mixed;
    use approx::assert_relative_eq;

    fn bell_plus_i() -> CMat {
        // (|gg> + i|ee>)/sqrt(2)
        let mut psi = [C64::new(0.0, 0.0); 4];
        psi[0] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        psi[3] = C64::new(0.0, 1.0 / 2f64.sqrt());
        let mut rho = CMat::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                rho[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        rho
    }

    #[test]
    fn bell_state_metrics() {
        let rho = bell_plus_i();
        let (w, s) = concurrence(&rho).unwrap();
        assert_relative_eq!(w, 1.0, epsilon = 1e-10);
        assert_relative_eq!(s, 1.0, epsilon = 1e-12);
        let (fixed, opt) = bell_fidelity(&rho).unwrap();
        assert_relative_eq!(fixed, 1.0, epsilon = 1e-12);
        assert_relative_eq!(opt, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ground_state_metrics() {
        let mut rho = CMat::zeros((4, 4));
        rho[(0, 0)] = C64::new(1.0, 0.0);
        let (w, s) = concurrence(&rho).unwrap();
        assert_eq!(w, 0.0);
        assert_eq!(s, 0.0);
        let (fixed, opt) = bell_fidelity(&rho).unwrap();
        assert_relative_eq!(fixed, 0.5, epsilon = 1e-12);
        assert_relative_eq!(opt, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn phase_rotated_bell_recovered_by_optimization() {
        // (|gg> - i|ee>)/sqrt(2): fixed-phase fidelity collapses, optimized
        // fidelity stays at unity
        let mut psi = [C64::new(0.0, 0.0); 4];
        psi[0] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        psi[3] = C64::new(0.0, -1.0 / 2f64.sqrt());
        let mut rho = CMat::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                rho[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        let (fixed, opt) = bell_fidelity(&rho).unwrap();
        assert_relative_eq!(fixed, 0.0, epsilon = 1e-12);
        assert_relative_eq!(opt, 1.0, epsilon = 1e-12);
        let (w, s) = concurrence(&rho).unwrap();
        assert_relative_eq!(w, 1.0, epsilon = 1e-10);
        assert_relative_eq!(s, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let n = 5;
        let mut rho_q = CMat::zeros((4, 4));
        rho_q[(0, 0)] = C64::new(0.25, 0.0);
        rho_q[(3, 3)] = C64::new(0.75, 0.0);
        rho_q[(0, 3)] = C64::new(0.1, 0.2);
        rho_q[(3, 0)] = C64::new(0.1, -0.2);
        let mut rho_osc = CMat::zeros((n, n));
        rho_osc[(0, 0)] = C64::new(0.5, 0.0);
        rho_osc[(2, 2)] = C64::new(0.5, 0.0);
        let full = kron(&rho_q, &rho_osc);
        let red = partial_trace_oscillator(&full).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(red[(i, j)].re, rho_q[(i, j)].re, epsilon = 1e-12);
                assert_relative_eq!(red[(i, j)].im, rho_q[(i, j)].im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_of_maximally_mixed() {
        let full = maximally_mixed(4 * 7);
        let red = partial_trace_oscillator(&full).unwrap();
        for i in 0..4 {
            assert_relative_eq!(red[(i, i)].re, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn dimension_and_density_guards() {
        let bad = CMat::zeros((6, 6));
        assert!(partial_trace_oscillator(&bad).is_err());
        let not_density = CMat::zeros((4, 4));
        assert!(concurrence(&not_density).is_err());
    }
}
