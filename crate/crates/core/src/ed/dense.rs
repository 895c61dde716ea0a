//! Dense non-Hermitian eigensolver built on the complex Schur form.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{cz, Cplx, Real};

/// Eigenvalues and (optionally) unit eigenvectors of a dense complex matrix.
pub fn eig_dense<T: Real>(
    m: &DMatrix<Complex<T>>,
    vectors: bool,
) -> Result<(Vec<Complex<T>>, Option<DMatrix<Complex<T>>>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| DMatrix::from_element(0, 0, cz()))));
    }
    if !m.iter().all(|z| z.is_finite_()) {
        return Err(Error::numeric("matrix contains non-finite entries"));
    }
    let eps = T::EPSILON;
    let (q, t) = schur(m).ok_or_else(|| {
        Error::numeric(format!("Schur iteration did not converge (dim {n}, norm {:e})", frob(m).to_f64_lossy()))
    })?;
    let vals: Vec<Complex<T>> = (0..n).map(|i| t[(i, i)]).collect();
    if !vectors {
        return Ok((vals, None));
    }
    let tn = frob(&t).max(T::ONE);
    let small = eps * tn;
    let mut y = DMatrix::from_element(n, n, cz::<T>());
    for k in 0..n {
        let lam = t[(k, k)];
        y[(k, k)] = Complex::new(T::ONE, T::ZERO);
        for i in (0..k).rev() {
            let mut acc = cz::<T>();
            for jj in (i + 1)..=k {
                acc += t[(i, jj)] * y[(jj, k)];
            }
            let mut d = t[(i, i)] - lam;
            if d.abs_() < small {
                d = Complex::new(small, T::ZERO);
            }
            y[(i, k)] = -acc / d;
        }
    }
    let mut v = q * y;
    for k in 0..n {
        let mut s = T::ZERO;
        for i in 0..n {
            s += v[(i, k)].abs2();
        }
        let s = s.sqrt();
        if s > T::ZERO {
            for i in 0..n {
                v[(i, k)] /= s;
            }
        }
    }
    Ok((vals, Some(v)))
}

/// Complex Schur form `m = Q T Q†`. The QR iteration can stall on exactly degenerate spectra;
/// a fixed random unitary similarity is tried before giving up.
fn schur<T: Real>(m: &DMatrix<Complex<T>>) -> Option<(DMatrix<Complex<T>>, DMatrix<Complex<T>>)> {
    let n = m.nrows();
    let maxit = 200 * n.max(10);
    if let Some(s) = Schur::try_new(m.clone(), T::EPSILON, maxit) {
        return Some(s.unpack());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..3 {
        let g = DMatrix::from_fn(n, n, |_, _| {
            Complex::new(T::lit(rng.random_range(-1.0..1.0)), T::lit(rng.random_range(-1.0..1.0)))
        });
        let u = g.qr().q();
        let rotated = u.adjoint() * m * &u;
        if let Some(s) = Schur::try_new(rotated, T::EPSILON, maxit) {
            let (q, t) = s.unpack();
            return Some((u * q, t));
        }
    }
    None
}

pub(crate) fn frob<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::ZERO, |a, z| a + z.abs2()).sqrt()
}

/// Sorts ascending by `(Re, Im)` and returns the permutation applied.
pub fn sort_re_im<T: Real>(vals: &[Complex<T>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (vals[a], vals[b]);
        x.re.partial_cmp(&y.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    idx
}
