//! Banded LU with partial pivoting for the shift-invert solves.

use num_complex::Complex;

use super::sparse::Csr;
use crate::error::{Error, Result};
use crate::scalar::{cz, Cplx, Real};

/// Factorization of `A − σI` for a matrix with lower/upper bandwidths `kl`, `ku`.
///
/// Row `i` stores columns `i − kl ..= i + ku + kl`, enough for the fill produced by row swaps.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    width: usize,
    band: Vec<Complex<T>>,
    /// Multipliers of elimination step `c`, rows `c+1 ..= c+kl`.
    mult: Vec<Complex<T>>,
    piv: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    pub fn factor(a: &Csr<T>, shift: Complex<T>) -> Result<Self> {
        let n = a.nrows;
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut band = vec![cz::<T>(); n * width];
        let at = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            for (j, v) in a.row(i) {
                band[at(i, j)] += v;
            }
            band[at(i, i)] -= shift;
        }
        let scale = a.norm_inf().max(shift.abs_()).max(T::EPSILON);
        let mut mult = vec![cz::<T>(); n * kl.max(1)];
        let mut piv = vec![0usize; n];
        for c in 0..n {
            let last = (c + kl).min(n - 1);
            let mut p = c;
            let mut best = band[at(c, c)].abs_();
            for r in (c + 1)..=last {
                let v = band[at(r, c)].abs_();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > T::EPSILON * scale * T::lit(1e-3)) {
                return Err(Error::numeric(format!(
                    "shifted matrix is numerically singular at column {c}; choose a different shift"
                )));
            }
            piv[c] = p;
            let hi = (c + ku + kl).min(n - 1);
            if p != c {
                for j in c..=hi {
                    band.swap(at(c, j), at(p, j));
                }
            }
            let d = band[at(c, c)];
            for r in (c + 1)..=last {
                let f = band[at(r, c)] / d;
                mult[c * kl.max(1) + (r - c - 1)] = f;
                band[at(r, c)] = cz();
                if f.re == T::ZERO && f.im == T::ZERO {
                    continue;
                }
                for j in (c + 1)..=hi {
                    let u = band[at(c, j)];
                    band[at(r, j)] -= f * u;
                }
            }
        }
        Ok(BandedLu { n, kl, width, band, mult, piv })
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let (n, kl, w) = (self.n, self.kl, self.width);
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        let mut x = b.to_vec();
        for c in 0..n {
            let p = self.piv[c];
            if p != c {
                x.swap(c, p);
            }
            let xc = x[c];
            let last = (c + kl).min(n.saturating_sub(1));
            for r in (c + 1)..=last {
                let f = self.mult[c * kl.max(1) + (r - c - 1)];
                x[r] -= f * xc;
            }
        }
        let ku_eff = w - kl - 1;
        for i in (0..n).rev() {
            let hi = (i + ku_eff).min(n - 1);
            let mut acc = x[i];
            for j in (i + 1)..=hi {
                acc -= self.band[at(i, j)] * x[j];
            }
            x[i] = acc / self.band[at(i, i)];
        }
        x
    }
}
