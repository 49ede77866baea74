//! Smallest eigenpairs of the Hermitian pencil `K x = λ M x`.
//!
//! Large problems use a block Krylov space of `(K - σM)⁻¹ M` built with
//! `M`-orthogonalization and thick restarts; small ones go to a dense
//! Cholesky-reduced Hermitian eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::{CsrMatrix, EnvelopeCholesky};
use crate::error::{Error, Result};

pub const DENSE_LIMIT: usize = 400;
const BLOCK: usize = 4;
const MAX_RESTARTS: usize = 60;
const SEED: u64 = 0x6d61_6773_7065_63;

type Vector = Vec<Complex64>;

#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// `M`-normalized eigenvectors.
    pub vectors: Vec<Vector>,
    /// `‖Kx - λMx‖ / (λ‖Mx‖)` per pair.
    pub residuals: Vec<f64>,
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Relative to `max(|λ|, floor)` so that near-zero eigenvalues are judged
/// against the spectral scale of the shift.
fn relative_residual(kx: &[Complex64], mx: &[Complex64], lambda: f64, floor: f64) -> f64 {
    let r: f64 = kx
        .iter()
        .zip(mx)
        .map(|(k, m)| (k - m * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = lambda.abs().max(floor).max(f64::MIN_POSITIVE) * norm(mx);
    r / scale
}

pub fn smallest(k: &CsrMatrix, m: &CsrMatrix, n_eigs: usize, shift: f64, tol: f64) -> Result<Eigenpairs> {
    let n = k.n;
    if n_eigs == 0 || n_eigs > n {
        return Err(Error::Precondition(format!(
            "requested {n_eigs} eigenvalues of a problem with {n} unknowns"
        )));
    }
    if n <= DENSE_LIMIT || n_eigs + 2 * BLOCK >= n / 2 {
        dense(k, m, n_eigs, shift.abs())
    } else {
        krylov(k, m, n_eigs, shift, tol)
    }
}

pub fn dense(k: &CsrMatrix, m: &CsrMatrix, n_eigs: usize, floor: f64) -> Result<Eigenpairs> {
    let kd = k.to_dense();
    let md = m.to_dense();
    let chol = md
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Assembly("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Assembly("singular mass factor".into()))?;
    let mut c = &linv * kd.clone() * linv.adjoint();
    c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = Eigenpairs {
        values: Vec::with_capacity(n_eigs),
        vectors: Vec::with_capacity(n_eigs),
        residuals: Vec::with_capacity(n_eigs),
    };
    for &idx in order.iter().take(n_eigs) {
        let y = eig.eigenvectors.column(idx).into_owned();
        let x = linv.adjoint() * y;
        let x: Vector = x.iter().copied().collect();
        let lambda = eig.eigenvalues[idx];
        let res = relative_residual(&k.apply(&x), &m.apply(&x), lambda, floor);
        out.values.push(lambda);
        out.vectors.push(x);
        out.residuals.push(res);
    }
    Ok(out)
}

struct Basis {
    q: Vec<Vector>,
    mq: Vec<Vector>,
}

impl Basis {
    /// `M`-orthonormalizes `w` against the basis (two passes) and appends it;
    /// returns false when `w` is numerically inside the span.
    fn push(&mut self, m: &CsrMatrix, mut w: Vector) -> bool {
        let mut mw = m.apply(&w);
        let before = dot(&w, &mw).re.max(0.0).sqrt();
        if before == 0.0 || !before.is_finite() {
            return false;
        }
        for _ in 0..2 {
            for (q, mq) in self.q.iter().zip(&self.mq) {
                let c = dot(mq, &w);
                axpy(-c, q, &mut w);
                axpy(-c, mq, &mut mw);
            }
        }
        let after = dot(&w, &mw).re.max(0.0).sqrt();
        if after <= 1e-10 * before {
            return false;
        }
        let inv = 1.0 / after;
        w.iter_mut().for_each(|v| *v *= inv);
        mw.iter_mut().for_each(|v| *v *= inv);
        self.q.push(w);
        self.mq.push(mw);
        true
    }
}

fn krylov(k: &CsrMatrix, m: &CsrMatrix, n_eigs: usize, shift: f64, tol: f64) -> Result<Eigenpairs> {
    let n = k.n;
    let shifted = k.add_scaled(-shift, m)?;
    let chol = EnvelopeCholesky::factor(&shifted)?;
    let op = |x: &[Complex64]| -> Vector {
        let mut y = m.apply(x);
        chol.solve_in_place(&mut y);
        y
    };
    let max_dim = (2 * n_eigs + 3 * BLOCK).max(n_eigs + 30).min(n);
    let keep = (n_eigs + BLOCK).min(max_dim - BLOCK);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let random = |rng: &mut ChaCha8Rng| -> Vector {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    };

    let mut basis = Basis { q: Vec::new(), mq: Vec::new() };
    let mut block: Vec<Vector> = (0..BLOCK).map(|_| op(&random(&mut rng))).collect();
    let mut worst = f64::INFINITY;
    for _ in 0..MAX_RESTARTS {
        // expand
        while basis.q.len() < max_dim {
            let start = basis.q.len();
            for w in block.drain(..) {
                if basis.q.len() >= max_dim {
                    break;
                }
                if !basis.push(m, w) {
                    let r = op(&random(&mut rng));
                    basis.push(m, r);
                }
            }
            if basis.q.len() == start {
                break;
            }
            block = basis.q[start..].iter().map(|q| op(q)).collect();
        }
        // Rayleigh-Ritz
        let dim = basis.q.len();
        let kq: Vec<Vector> = basis.q.iter().map(|q| k.apply(q)).collect();
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = dot(&basis.q[i], &kq[j]);
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        for i in 0..dim {
            for j in 0..i {
                let avg = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
                h[(i, j)] = avg;
                h[(j, i)] = avg.conj();
            }
            h[(i, i)].im = 0.0;
        }
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let combine = |vs: &[Vector], col: usize| -> Vector {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (i, v) in vs.iter().enumerate() {
                axpy(eig.eigenvectors[(i, col)], v, &mut out);
            }
            out
        };
        let mut ritz = Vec::with_capacity(keep);
        let mut residuals = Vec::with_capacity(n_eigs);
        for (rank, &col) in order.iter().take(keep).enumerate() {
            let x = combine(&basis.q, col);
            let mx = combine(&basis.mq, col);
            let lambda = eig.eigenvalues[col];
            if rank < n_eigs {
                let kx = combine(&kq, col);
                residuals.push(relative_residual(&kx, &mx, lambda, shift.abs()));
            }
            ritz.push((lambda, x, mx));
        }
        worst = residuals.iter().cloned().fold(0.0, f64::max);
        if worst <= tol {
            let mut out = Eigenpairs {
                values: Vec::with_capacity(n_eigs),
                vectors: Vec::with_capacity(n_eigs),
                residuals,
            };
            for (lambda, x, _) in ritz.into_iter().take(n_eigs) {
                out.values.push(lambda);
                out.vectors.push(x);
            }
            return Ok(out);
        }
        // thick restart on the lowest Ritz vectors, expanding from the
        // unconverged ones
        let mut next: Vec<usize> = (0..n_eigs).filter(|&i| residuals[i] > tol).collect();
        next.extend(n_eigs..keep);
        next.truncate(BLOCK);
        block = next.iter().map(|&i| op(&ritz[i].1)).collect();
        basis.q.clear();
        basis.mq.clear();
        for (_, x, mx) in ritz {
            basis.q.push(x);
            basis.mq.push(mx);
        }
    }
    Err(Error::EigenSolver {
        iterations: MAX_RESTARTS,
        residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1-D Dirichlet Laplacian with lumped unit mass: eigenvalues
    /// `4 sin²(kπ / 2(n+1))`.
    fn laplacian(n: usize) -> (CsrMatrix, CsrMatrix) {
        let mut kt = Vec::new();
        let mut mt = Vec::new();
        for i in 0..n {
            kt.push((i, i, Complex64::new(2.0, 0.0)));
            mt.push((i, i, Complex64::new(1.0, 0.0)));
            if i + 1 < n {
                kt.push((i, i + 1, Complex64::new(-1.0, 0.0)));
                kt.push((i + 1, i, Complex64::new(-1.0, 0.0)));
            }
        }
        (CsrMatrix::from_triplets(n, kt), CsrMatrix::from_triplets(n, mt))
    }

    fn exact(n: usize, k: usize) -> f64 {
        let s = (k as f64 * std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin();
        4.0 * s * s
    }

    #[test]
    fn dense_matches_closed_form() {
        let (k, m) = laplacian(50);
        let e = dense(&k, &m, 3, 0.0).unwrap();
        for j in 0..3 {
            assert!((e.values[j] - exact(50, j + 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn krylov_matches_closed_form() {
        let (k, m) = laplacian(1000);
        let e = krylov(&k, &m, 5, 0.0, 1e-8).unwrap();
        for j in 0..5 {
            assert!((e.values[j] / exact(1000, j + 1) - 1.0).abs() < 1e-9, "{j}");
            assert!(e.residuals[j] <= 1e-8);
        }
    }
}
