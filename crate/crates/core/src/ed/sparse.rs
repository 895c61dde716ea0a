//! Compressed sparse rows over complex entries.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::scalar::{cz, Cplx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> Csr<T> {
    /// Assembles from (row, col, value) triplets; duplicates are summed, columns sorted per row.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, Complex<T>)>) -> Self {
        trip.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values: Vec<Complex<T>> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                let n = values.len() - 1;
                values[n] += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Csr { nrows, ncols, indptr, indices, values }
    }

    pub fn from_dense(m: &DMatrix<Complex<T>>) -> Self {
        let mut trip = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v.re != T::ZERO || v.im != T::ZERO {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), trip)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[a..b].binary_search(&j) {
            Ok(p) => self.values[a + p],
            Err(_) => cz(),
        }
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let mut acc = cz();
                for (j, v) in self.row(i) {
                    acc += v * x[j];
                }
                acc
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, cz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.nrows {
            for (j, _) in self.row(i) {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> T {
        let mut m = T::ZERO;
        for i in 0..self.nrows {
            let mut s = T::ZERO;
            for (_, v) in self.row(i) {
                s += v.abs_();
            }
            m = m.max(s);
        }
        m
    }

    /// Max absolute column sum.
    pub fn norm_one(&self) -> T {
        let mut col = vec![T::ZERO; self.ncols];
        for (j, v) in self.indices.iter().zip(&self.values) {
            col[*j] += v.abs_();
        }
        col.into_iter().fold(T::ZERO, |a, b| a.max(b))
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs_diff_dense(&self, other: &DMatrix<Complex<T>>) -> T {
        let d = self.to_dense() - other;
        d.iter().fold(T::ZERO, |a, z| a.max(z.abs_()))
    }

    /// Coordinate-list text: one `row col re im` line per stored entry, zero-based, row-major.
    pub fn to_coo_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# rows={} cols={} nnz={}", self.nrows, self.ncols, self.nnz());
        let _ = writeln!(s, "row,col,re,im");
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                let _ = writeln!(s, "{i},{j},{:e},{:e}", v.re.to_f64_lossy(), v.im.to_f64_lossy());
            }
        }
        s
    }

    /// Parses the output of [`Csr::to_coo_text`].
    pub fn from_coo_text(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        let head = lines.next()?;
        let grab = |key: &str| -> Option<usize> {
            head.split_whitespace().find_map(|t| t.strip_prefix(key)).and_then(|v| v.parse().ok())
        };
        let (nrows, ncols) = (grab("rows=")?, grab("cols=")?);
        let mut trip = Vec::new();
        for line in lines.skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return None;
            }
            let re: f64 = f[2].parse().ok()?;
            let im: f64 = f[3].parse().ok()?;
            trip.push((f[0].parse().ok()?, f[1].parse().ok()?, Complex::new(T::lit(re), T::lit(im))));
        }
        Some(Self::from_triplets(nrows, ncols, trip))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_sort() {
        let c = |x: f64| Complex::new(x, 0.0);
        let m = Csr::<f64>::from_triplets(2, 3, vec![(1, 2, c(1.0)), (0, 1, c(2.0)), (1, 0, c(3.0)), (1, 2, c(4.0))]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), c(5.0));
        assert_eq!(m.get(0, 0), c(0.0));
        assert_eq!(m.matvec(&[c(1.0), c(1.0), c(1.0)]), vec![c(2.0), c(8.0)]);
        assert_eq!(m.bandwidths(), (1, 1));
    }

    #[test]
    fn coo_roundtrip() {
        let m = Csr::<f64>::from_triplets(
            3,
            3,
            vec![(0, 0, Complex::new(-1.5, 0.25)), (2, 1, Complex::new(1e-3, -7.0)), (1, 2, Complex::new(3.0, 0.0))],
        );
        let back = Csr::<f64>::from_coo_text(&m.to_coo_text()).unwrap();
        assert_eq!(m, back);
    }
}
