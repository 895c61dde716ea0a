//! Shift-invert Krylov–Schur iteration for the eigenvalues nearest a complex shift.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex;

use super::banded::BandedLu;
use super::sparse::Csr;
use crate::error::{Error, Result};
use crate::scalar::{cz, norm2, Cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArnoldiOptions {
    /// Krylov dimension; `None` selects `max(20, 4·count)`.
    pub subspace: Option<usize>,
    pub max_restarts: usize,
    /// Relative residual target `‖Av − λv‖ ≤ tol·‖A‖`.
    pub tol: f64,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        ArnoldiOptions { subspace: None, max_restarts: 300, tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct PartialEigen<T> {
    pub values: Vec<Complex<T>>,
    pub vectors: Vec<Vec<Complex<T>>>,
    pub residuals: Vec<T>,
    pub restarts: usize,
}

fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let mut s = cz::<T>();
    for (x, y) in a.iter().zip(b) {
        s += x.conj_() * *y;
    }
    s
}

/// Moves the diagonal entry at `k+1` in front of `k` with a Givens rotation (T upper triangular).
fn swap_adjacent<T: Real>(t: &mut DMatrix<Complex<T>>, q: &mut DMatrix<Complex<T>>, k: usize) {
    let (a, b, c) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k + 1)]);
    let x = [b, c - a];
    let nx = (x[0].abs2() + x[1].abs2()).sqrt();
    if nx == T::ZERO {
        return;
    }
    let (g0, g1) = (x[0] / nx, x[1] / nx);
    // unitary G with first column (g0, g1)
    let n = t.nrows();
    for j in 0..n {
        let (u, v) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = g0.conj_() * u + g1.conj_() * v;
        t[(k + 1, j)] = -g1 * u + g0 * v;
    }
    for i in 0..n {
        let (u, v) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = u * g0 + v * g1;
        t[(i, k + 1)] = -u * g1.conj_() + v * g0.conj_();
    }
    t[(k + 1, k)] = cz();
    for i in 0..q.nrows() {
        let (u, v) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = u * g0 + v * g1;
        q[(i, k + 1)] = -u * g1.conj_() + v * g0.conj_();
    }
}

/// The `count` eigenvalues of `a` closest to `shift`, with unit eigenvectors and true residuals.
pub fn eigs_near<T: Real>(
    a: &Csr<T>,
    shift: Complex<T>,
    count: usize,
    opts: &ArnoldiOptions,
) -> Result<PartialEigen<T>> {
    let n = a.nrows;
    if count == 0 || n == 0 {
        return Ok(PartialEigen { values: vec![], vectors: vec![], residuals: vec![], restarts: 0 });
    }
    let count = count.min(n);
    let lu = BandedLu::factor(a, shift)?;
    let m = opts.subspace.unwrap_or((4 * count).max(20)).min(n).max(count + 1).min(n);
    let anorm = a.norm_inf().max(T::EPSILON);
    let tol = T::lit(opts.tol);

    // deterministic start vector
    let mut v0: Vec<Complex<T>> =
        (0..n).map(|i| Complex::new(T::ONE + T::lit(((i * 7919) % 101) as f64 / 101.0), T::ZERO)).collect();
    let nv = norm2(&v0);
    v0.iter_mut().for_each(|z| *z /= nv);

    let mut basis: Vec<Vec<Complex<T>>> = vec![v0];
    let mut h = DMatrix::from_element(m + 1, m, cz::<T>());
    let mut kept = 0usize;
    let mut restarts = 0usize;
    loop {
        let mut size = m;
        for j in kept..m {
            let mut w = lu.solve(&basis[j]);
            for _pass in 0..2 {
                for (i, vi) in basis.iter().enumerate().take(j + 1) {
                    let c = dot(vi, &w);
                    h[(i, j)] += c;
                    for (wz, vz) in w.iter_mut().zip(vi) {
                        *wz -= c * *vz;
                    }
                }
            }
            let beta = norm2(&w);
            h[(j + 1, j)] = Complex::new(beta, T::ZERO);
            if beta <= T::EPSILON * T::lit(1e3) * h.iter().fold(T::ZERO, |x, z| x.max(z.abs_())) {
                size = j + 1;
                break;
            }
            w.iter_mut().for_each(|z| *z /= beta);
            basis.push(w);
        }
        let hm = h.view((0, 0), (size, size)).into_owned();
        let schur = Schur::try_new(hm, T::EPSILON, 100 * size.max(10))
            .ok_or_else(|| Error::numeric("projected Schur iteration failed"))?;
        let (mut q, mut t) = schur.unpack();
        // bubble the `count` largest |θ| to the front
        let want = count.min(size);
        for slot in 0..want {
            let mut best = slot;
            for i in slot..size {
                if t[(i, i)].abs_() > t[(best, best)].abs_() {
                    best = i;
                }
            }
            let mut k = best;
            while k > slot {
                swap_adjacent(&mut t, &mut q, k - 1);
                k -= 1;
            }
        }
        // Ritz vectors of the leading block
        let beta_last = if size < basis.len() { h[(size, size - 1)] } else { cz() };
        let mut values = Vec::with_capacity(want);
        let mut vectors = Vec::with_capacity(want);
        let mut residuals = Vec::with_capacity(want);
        let mut all_ok = true;
        for k in 0..want {
            let theta = t[(k, k)];
            let mut y = vec![cz::<T>(); size];
            y[k] = Complex::new(T::ONE, T::ZERO);
            for i in (0..k).rev() {
                let mut acc = cz::<T>();
                for jj in (i + 1)..=k {
                    acc += t[(i, jj)] * y[jj];
                }
                let mut d = t[(i, i)] - theta;
                if d.abs_() < T::EPSILON {
                    d = Complex::new(T::EPSILON, T::ZERO);
                }
                y[i] = -acc / d;
            }
            let s: Vec<Complex<T>> = (0..size)
                .map(|i| {
                    let mut acc = cz::<T>();
                    for jj in 0..size {
                        acc += q[(i, jj)] * y[jj];
                    }
                    acc
                })
                .collect();
            let mut x = vec![cz::<T>(); n];
            for (i, si) in s.iter().enumerate() {
                for (xz, bz) in x.iter_mut().zip(&basis[i]) {
                    *xz += *si * *bz;
                }
            }
            let nx = norm2(&x);
            x.iter_mut().for_each(|z| *z /= nx);
            let lam = shift + Complex::new(T::ONE, T::ZERO) / theta;
            let ax = a.matvec(&x);
            let r: Vec<Complex<T>> = ax.iter().zip(&x).map(|(p, q)| *p - lam * *q).collect();
            let res = norm2(&r);
            if !(res <= tol * anorm) {
                all_ok = false;
            }
            values.push(lam);
            vectors.push(x);
            residuals.push(res);
        }
        if all_ok || size < m {
            return Ok(PartialEigen { values, vectors, residuals, restarts });
        }
        restarts += 1;
        if restarts > opts.max_restarts {
            let worst = residuals.iter().fold(T::ZERO, |a, &b| a.max(b));
            return Err(Error::NoConvergence { iterations: restarts, residual: worst.to_f64_lossy() });
        }
        // Krylov–Schur truncation: keep a few extra vectors beyond the wanted ones.
        let keep = (want + (m - want) / 2).min(m - 1).max(want);
        for slot in want..keep {
            let mut best = slot;
            for i in slot..size {
                if t[(i, i)].abs_() > t[(best, best)].abs_() {
                    best = i;
                }
            }
            let mut k = best;
            while k > slot {
                swap_adjacent(&mut t, &mut q, k - 1);
                k -= 1;
            }
        }
        let mut new_basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(m + 1);
        for j in 0..keep {
            let mut x = vec![cz::<T>(); n];
            for i in 0..size {
                let c = q[(i, j)];
                for (xz, bz) in x.iter_mut().zip(&basis[i]) {
                    *xz += c * *bz;
                }
            }
            new_basis.push(x);
        }
        new_basis.push(basis[size].clone());
        let mut hn = DMatrix::from_element(m + 1, m, cz::<T>());
        for i in 0..keep {
            for j in 0..keep {
                hn[(i, j)] = t[(i, j)];
            }
        }
        for j in 0..keep {
            hn[(keep, j)] = beta_last * q[(size - 1, j)];
        }
        basis = new_basis;
        h = hn;
        kept = keep;
    }
}
