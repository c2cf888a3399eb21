//! Cyclic Jacobi eigensolver for symmetric/Hermitian matrices.
//!
//! A complex off-diagonal entry is first rotated onto the real axis with a
//! unit phase, then annihilated with a classic real Jacobi rotation; the
//! real path degenerates to the textbook scheme (the phase is +-1). The
//! rotation order is fixed (row-cyclic), so results are deterministic.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{SpectralDecomp, SymMatrix};

const MAX_SWEEPS: usize = 64;
const OFF_TOL: f64 = 1e-13;
const SIGN_EPS: f64 = 1e-12;

pub(super) fn jacobi_eig<S: Scalar>(
    m: &SymMatrix<S>,
    guess: Option<&[S]>,
) -> Result<SpectralDecomp<S>> {
    let n = m.n();
    let fro = m.fro_norm();

    let mut v: Vec<S> = match guess {
        Some(g) => {
            if g.len() != n * n {
                return Err(Error::DimensionMismatch(format!(
                    "eigenvector guess must be {n}x{n}"
                )));
            }
            g.to_vec()
        }
        None => identity(n),
    };

    if fro == 0.0 {
        return Ok(SpectralDecomp {
            eigenvalues: vec![0.0; n],
            eigenvectors: identity(n),
            n,
        });
    }

    // With a guess V the iteration runs on B = V' M V, which is nearly
    // diagonal when the guess is good; accumulated rotations land on top of
    // V so the final eigenvectors refer to the original matrix.
    let mut a: Vec<S> = match guess {
        Some(_) => congruence(m, &v),
        None => m.data().to_vec(),
    };

    let off_tol_abs = OFF_TOL * fro;
    let rot_eps = off_tol_abs / n as f64;
    let mut converged = false;
    let mut off = off_norm(&a, n);
    for _sweep in 0..MAX_SWEEPS {
        if off <= off_tol_abs {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q, rot_eps);
            }
        }
        off = off_norm(&a, n);
    }
    if !converged && off_norm(&a, n) > off_tol_abs {
        return Err(Error::EigenNonConvergence {
            sweeps: MAX_SWEEPS,
            residual: off_norm(&a, n),
        });
    }

    // Sort eigenpairs by eigenvalue, descending; ties keep rotation order.
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re()).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = vec![S::ZERO; n * n];
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(diag[src]);
        // Phase convention: first coordinate with modulus > SIGN_EPS made
        // real-positive.
        let mut phase = S::ONE;
        for i in 0..n {
            let val = v[i * n + src];
            if val.abs() > SIGN_EPS {
                phase = val.unit_phase().conj();
                break;
            }
        }
        for i in 0..n {
            eigenvectors[i * n + dst] = v[i * n + src] * phase;
        }
    }

    Ok(SpectralDecomp {
        eigenvalues,
        eigenvectors,
        n,
    })
}

fn identity<S: Scalar>(n: usize) -> Vec<S> {
    let mut v = vec![S::ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = S::ONE;
    }
    v
}

/// `B = V' M V`, re-symmetrized.
fn congruence<S: Scalar>(m: &SymMatrix<S>, v: &[S]) -> Vec<S> {
    let n = m.n();
    let md = m.data();
    let mut tmp = vec![S::ZERO; n * n]; // M V
    for i in 0..n {
        for l in 0..n {
            let mil = md[i * n + l];
            if mil == S::ZERO {
                continue;
            }
            let row = &v[l * n..(l + 1) * n];
            let out = &mut tmp[i * n..(i + 1) * n];
            for j in 0..n {
                out[j] += mil * row[j];
            }
        }
    }
    let mut b = vec![S::ZERO; n * n];
    for i in 0..n {
        for l in 0..n {
            let c = v[l * n + i].conj();
            let row = &tmp[l * n..(l + 1) * n];
            let out = &mut b[i * n..(i + 1) * n];
            for j in 0..n {
                out[j] += c * row[j];
            }
        }
    }
    // Round-off can leave a tiny asymmetry; restore the Hermitian invariant.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (b[i * n + j] + b[j * n + i].conj()).scale(0.5);
            b[i * n + j] = avg;
            b[j * n + i] = avg.conj();
        }
        let d = b[i * n + i];
        b[i * n + i] = S::from_re(d.re());
    }
    b
}

fn off_norm<S: Scalar>(a: &[S], n: usize) -> f64 {
    let mut acc = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            acc += a[p * n + q].abs2();
        }
    }
    (2.0 * acc).sqrt()
}

#[inline]
fn rotate<S: Scalar>(a: &mut [S], v: &mut [S], n: usize, p: usize, q: usize, rot_eps: f64) {
    let apq = a[p * n + q];
    let r = apq.abs();
    if r <= rot_eps {
        return;
    }
    let app = a[p * n + p].re();
    let aqq = a[q * n + q].re();
    let u = apq.unit_phase();

    let tau = (app - aqq) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let uc = u.scale(c);
    let us = u.scale(s);

    // Columns p and q mix under A <- U2' A U2 with
    // U2 = [[u c, -u s], [s, c]] acting on coordinates (p, q); rows follow
    // by Hermitian symmetry and the 2x2 block is set analytically.
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let new_kp = akp * uc + akq.scale(s);
        let new_kq = akq.scale(c) - akp * us;
        a[k * n + p] = new_kp;
        a[p * n + k] = new_kp.conj();
        a[k * n + q] = new_kq;
        a[q * n + k] = new_kq.conj();
    }
    let app_new = c * c * app + 2.0 * c * s * r + s * s * aqq;
    let aqq_new = s * s * app - 2.0 * c * s * r + c * c * aqq;
    a[p * n + p] = S::from_re(app_new);
    a[q * n + q] = S::from_re(aqq_new);
    a[p * n + q] = S::ZERO;
    a[q * n + p] = S::ZERO;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * uc + vkq.scale(s);
        v[k * n + q] = vkq.scale(c) - vkp * us;
    }
}
