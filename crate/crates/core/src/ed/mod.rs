//! Sector matrices and their non-Hermitian eigenproblems.

pub mod analysis;
pub mod arnoldi;
pub mod banded;
pub mod dense;
pub mod export;
pub mod integrability;
pub mod ladder;
pub mod sparse;
pub mod stencil;

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MemoryBudget, SectorLabel};
use crate::scalar::{cz, norm2, Cplx, Real};
use sparse::Csr;

pub use arnoldi::ArnoldiOptions;
pub use stencil::{build_sector_matrix, build_sector_matrix_su3, build_sector_matrix_with, Family, StencilOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildMethod {
    /// Closed-form matrix elements in the sector basis.
    Stencil,
    /// Projection of the literal doubled-space Liouvillian.
    Oracle,
}

/// The Liouvillian restricted to one weak-symmetry sector.
#[derive(Debug, Clone)]
pub struct SectorMatrix<T> {
    pub sector: SectorLabel,
    pub n_atoms: usize,
    pub dim: usize,
    pub entries: Csr<T>,
    pub build_method: BuildMethod,
}

impl<T: Real> SectorMatrix<T> {
    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        self.entries.to_dense()
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        self.entries.matvec(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    DenseFull,
    ShiftInvertPartial,
}

impl SpectrumMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumMethod::DenseFull => "dense_full",
            SpectrumMethod::ShiftInvertPartial => "shift_invert_partial",
        }
    }
}

/// Eigenvalues of one sector. Eigenvectors are stored as columns.
#[derive(Debug, Clone)]
pub struct SpectrumResult<T> {
    pub sector: SectorLabel,
    pub eigenvalues: Vec<Complex<T>>,
    pub eigenvectors: Option<DMatrix<Complex<T>>>,
    pub method: SpectrumMethod,
    pub residual_norms: Vec<T>,
    pub matrix_norm: T,
    pub elapsed_secs: f64,
}

impl<T: Real> SpectrumResult<T> {
    pub fn max_re(&self) -> T {
        self.eigenvalues.iter().fold(-T::ONE / T::EPSILON, |a, z| a.max(z.re))
    }
}

/// Residuals `‖Mv − λv‖` for unit columns `v`.
fn residuals<T: Real>(m: &Csr<T>, vals: &[Complex<T>], vecs: &DMatrix<Complex<T>>) -> Vec<T> {
    (0..vals.len())
        .map(|k| {
            let v: Vec<Complex<T>> = vecs.column(k).iter().copied().collect();
            let mv = m.matvec(&v);
            let r: Vec<Complex<T>> = mv.iter().zip(&v).map(|(a, b)| *a - vals[k] * *b).collect();
            norm2(&r)
        })
        .collect()
}

/// Every eigenvalue of a sector, sorted ascending by `(Re, Im)`.
///
/// Residuals are computed from eigenvectors; when `vectors` is false they are still
/// formed internally and then dropped.
pub fn full_spectrum<T: Real>(
    matrix: &SectorMatrix<T>,
    vectors: bool,
    budget: &MemoryBudget,
) -> Result<SpectrumResult<T>> {
    budget.check_dense(matrix.dim, &format!("sector {}", matrix.sector))?;
    let t0 = Instant::now();
    let dense = matrix.to_dense();
    let (vals, vecs) = dense::eig_dense(&dense, true).map_err(|e| match e {
        Error::Numeric(msg) => Error::numeric(format!(
            "{msg}; sector {} dim {} ‖M‖₁ = {:e}",
            matrix.sector,
            matrix.dim,
            matrix.entries.norm_one().to_f64_lossy()
        )),
        other => other,
    })?;
    let vecs = vecs.expect("requested");
    let res = residuals(&matrix.entries, &vals, &vecs);
    let perm = dense::sort_re_im(&vals);
    let eigenvalues: Vec<Complex<T>> = perm.iter().map(|&i| vals[i]).collect();
    let residual_norms: Vec<T> = perm.iter().map(|&i| res[i]).collect();
    let eigenvectors = vectors.then(|| {
        let mut out = DMatrix::from_element(matrix.dim, matrix.dim, cz::<T>());
        for (c, &i) in perm.iter().enumerate() {
            out.set_column(c, &vecs.column(i));
        }
        out
    });
    Ok(SpectrumResult {
        sector: matrix.sector.clone(),
        eigenvalues,
        eigenvectors,
        method: SpectrumMethod::DenseFull,
        residual_norms,
        matrix_norm: matrix.entries.norm_one(),
        elapsed_secs: t0.elapsed().as_secs_f64(),
    })
}

/// Eigenvalues only, sorted by `(Re, Im)`; no eigenvectors and no residuals.
pub fn eigenvalues_only<T: Real>(matrix: &SectorMatrix<T>, budget: &MemoryBudget) -> Result<Vec<Complex<T>>> {
    budget.check_dense(matrix.dim, &format!("sector {}", matrix.sector))?;
    let (vals, _) = dense::eig_dense(&matrix.to_dense(), false)?;
    let perm = dense::sort_re_im(&vals);
    Ok(perm.iter().map(|&i| vals[i]).collect())
}

/// The `count` eigenvalues closest to `shift` via shift-invert Krylov–Schur.
pub fn target_eigenvalues_near<T: Real>(
    matrix: &SectorMatrix<T>,
    shift: Complex<T>,
    count: usize,
    opts: &ArnoldiOptions,
) -> Result<SpectrumResult<T>> {
    let t0 = Instant::now();
    let pe = arnoldi::eigs_near(&matrix.entries, shift, count, opts).map_err(|e| match e {
        Error::NoConvergence { iterations, residual } => Error::numeric(format!(
            "shift-invert did not converge in sector {} after {iterations} restarts (residual {residual:e}); try a different shift",
            matrix.sector
        )),
        other => other,
    })?;
    let mut order: Vec<usize> = (0..pe.values.len()).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = ((pe.values[a] - shift).norm_sqr_(), (pe.values[b] - shift).norm_sqr_());
        da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
    });
    let n = matrix.dim;
    let mut vecs = DMatrix::from_element(n, order.len(), cz::<T>());
    for (c, &i) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, c)] = pe.vectors[i][r];
        }
    }
    Ok(SpectrumResult {
        sector: matrix.sector.clone(),
        eigenvalues: order.iter().map(|&i| pe.values[i]).collect(),
        eigenvectors: Some(vecs),
        method: SpectrumMethod::ShiftInvertPartial,
        residual_norms: order.iter().map(|&i| pe.residuals[i]).collect(),
        matrix_norm: matrix.entries.norm_inf(),
        elapsed_secs: t0.elapsed().as_secs_f64(),
    })
}

/// Slowest nonzero mode of a sector with no zero eigenvalue: shift-invert near the right edge,
/// then a refinement pass shifted onto the best candidate.
pub fn rightmost_mode<T: Real>(matrix: &SectorMatrix<T>, opts: &ArnoldiOptions) -> Result<(Complex<T>, T)> {
    // Gershgorin bound on the right edge keeps the first shift off the spectrum.
    let diag = matrix.entries.diagonal();
    let mut edge = -T::ONE / T::EPSILON;
    for (i, d) in diag.iter().enumerate() {
        let off: T = matrix.entries.row(i).filter(|(j, _)| *j != i).fold(T::ZERO, |a, (_, v)| a + v.abs_());
        edge = edge.max(d.re + off);
    }
    let edge = edge.min(T::ZERO);
    let im_center = diag.iter().fold(T::ZERO, |a, d| a + d.im) / T::from_count(diag.len().max(1));
    let first = target_eigenvalues_near(matrix, Complex::new(edge + T::HALF, im_center), 6, opts)?;
    let mut best = 0;
    for (i, z) in first.eigenvalues.iter().enumerate() {
        if z.re > first.eigenvalues[best].re {
            best = i;
        }
    }
    let cand = first.eigenvalues[best];
    let refine = target_eigenvalues_near(matrix, cand + Complex::new(T::lit(0.5), T::ZERO), 6, opts)?;
    let mut bi = 0;
    for (i, z) in refine.eigenvalues.iter().enumerate() {
        if z.re > refine.eigenvalues[bi].re {
            bi = i;
        }
    }
    Ok((refine.eigenvalues[bi], refine.residual_norms[bi]))
}

trait NormSqr<T> {
    fn norm_sqr_(self) -> T;
}

impl<T: Real> NormSqr<T> for Complex<T> {
    fn norm_sqr_(self) -> T {
        self.re * self.re + self.im * self.im
    }
}

/// Largest pairing distance between two eigenvalue multisets under greedy nearest matching.
/// `None` when the sizes differ.
pub fn multiset_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Option<T> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst = T::ZERO;
    for x in a {
        let mut best: Option<(usize, T)> = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (*x - *y).norm_sqr_();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best?;
        used[j] = true;
        worst = worst.max(d.sqrt());
    }
    Some(worst)
}
