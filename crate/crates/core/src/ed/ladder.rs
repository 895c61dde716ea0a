//! Schwinger-boson generators on the symmetric irrep and the literal doubled-space Liouvillian.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex;

use super::sparse::Csr;
use super::{BuildMethod, SectorMatrix};
use crate::error::{Error, Result};
use crate::model::{enumerate_basis, LiouvParams, MemoryBudget, SectorLabel};
use crate::scalar::{cr, cz, Cplx, Real};

/// Occupation vectors with `Σk = L`, lexicographic in `(k_2, …, k_N)`.
pub fn occupation_basis(n_levels: usize, n_atoms: usize) -> Vec<Vec<usize>> {
    enumerate_basis(n_atoms, &SectorLabel::zero(n_levels))
        .into_iter()
        .map(|st| st.k.into_iter().map(|x| x as usize).collect())
        .collect()
}

/// `K[α][β] = b_α† b_β` on the occupation basis: `K_αβ|k⟩ = √((k_α+1)k_β) |k + e_α − e_β⟩`.
pub fn ladder_matrices<T: Real>(n_levels: usize, n_atoms: usize) -> Vec<Vec<DMatrix<T>>> {
    let basis = occupation_basis(n_levels, n_atoms);
    let index: HashMap<&[usize], usize> = basis.iter().enumerate().map(|(i, k)| (k.as_slice(), i)).collect();
    let d = basis.len();
    let mut out = Vec::with_capacity(n_levels);
    for a in 0..n_levels {
        let mut row = Vec::with_capacity(n_levels);
        for b in 0..n_levels {
            let mut m = DMatrix::from_element(d, d, T::ZERO);
            for (col, k) in basis.iter().enumerate() {
                if a == b {
                    m[(col, col)] = T::from_count(k[a]);
                    continue;
                }
                if k[b] == 0 {
                    continue;
                }
                let mut k2 = k.clone();
                k2[a] += 1;
                k2[b] -= 1;
                let r = index[k2.as_slice()];
                m[(r, col)] = T::from_count((k[a] + 1) * k[b]).sqrt();
            }
            row.push(m);
        }
        out.push(row);
    }
    out
}

/// Sparse Kronecker product `A ⊗ B` scaled by `c`, appended as triplets.
fn kron_into<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, c: Complex<T>, trip: &mut Vec<(usize, usize, Complex<T>)>) {
    let (rb, cb) = b.shape();
    let nz = |m: &DMatrix<T>| -> Vec<(usize, usize, T)> {
        let mut v = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != T::ZERO {
                    v.push((i, j, m[(i, j)]));
                }
            }
        }
        v
    };
    let (na, nb) = (nz(a), nz(b));
    for &(i1, j1, x) in &na {
        for &(i2, j2, y) in &nb {
            trip.push((i1 * rb + i2, j1 * cb + j2, c * (x * y)));
        }
    }
}

/// The vectorized Liouvillian on the full doubled space, `|k⟩⟨j| ↦ |k⟩ ⊗ |j⟩`.
#[derive(Debug, Clone)]
pub struct OracleMatrix<T> {
    pub n_levels: usize,
    pub n_atoms: usize,
    pub basis: Vec<Vec<usize>>,
    pub matrix: Csr<T>,
}

/// Literal assembly with the restricted jump table of `params`.
pub fn build_oracle_matrix<T: Real>(params: &LiouvParams<T>, budget: &MemoryBudget) -> Result<OracleMatrix<T>> {
    build_oracle_matrix_with_rates(params, |a, b| params.rate(a, b), budget)
}

/// Literal assembly with an arbitrary jump-rate table `x(α, β)`:
/// `L = −i Σ ε_α (K_αα⊗I − I⊗K_ααᵀ) + Σ x_αβ [K_αβ⊗K_βαᵀ − ½(K_βαK_αβ⊗I + I⊗(K_βαK_αβ)ᵀ)]`.
pub fn build_oracle_matrix_with_rates<T: Real>(
    params: &LiouvParams<T>,
    rates: impl Fn(usize, usize) -> T,
    budget: &MemoryBudget,
) -> Result<OracleMatrix<T>> {
    params.validate()?;
    let n = params.n_levels;
    let basis = occupation_basis(n, params.n_atoms);
    let d = basis.len();
    let dim = d.checked_mul(d).ok_or_else(|| Error::resource("doubled dimension overflows"))?;
    budget.check_entries(dim.saturating_mul(n * n + 1), "oracle matrix")?;
    let k = ladder_matrices::<T>(n, params.n_atoms);
    let id = DMatrix::<T>::identity(d, d);
    let mi = Complex::new(T::ZERO, -T::ONE);
    let mut trip = Vec::new();
    for a in 0..n {
        let e = params.eps[a];
        kron_into(&k[a][a], &id, mi * e, &mut trip);
        kron_into(&id, &k[a][a].transpose(), -mi * e, &mut trip);
    }
    for a in 0..n {
        for b in 0..n {
            let x = rates(a, b);
            if x == T::ZERO {
                continue;
            }
            let kba_kab = &k[b][a] * &k[a][b];
            kron_into(&k[a][b], &k[b][a].transpose(), cr(x), &mut trip);
            kron_into(&kba_kab, &id, cr(-x * T::HALF), &mut trip);
            kron_into(&id, &kba_kab.transpose(), cr(-x * T::HALF), &mut trip);
        }
    }
    let matrix = Csr::from_triplets(dim, dim, trip);
    Ok(OracleMatrix { n_levels: n, n_atoms: params.n_atoms, basis, matrix })
}

impl<T: Real> OracleMatrix<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows
    }

    fn irrep_index(&self) -> HashMap<Vec<i64>, usize> {
        self.basis.iter().enumerate().map(|(i, k)| (k.iter().map(|&x| x as i64).collect(), i)).collect()
    }

    /// Sector label of every doubled-space index.
    pub fn sector_of_index(&self) -> Vec<SectorLabel> {
        let d = self.basis.len();
        (0..self.dim())
            .map(|g| {
                let (k, j) = (&self.basis[g / d], &self.basis[g % d]);
                SectorLabel(k.iter().zip(j).map(|(a, b)| *a as i64 - *b as i64).collect())
            })
            .collect()
    }

    /// Restriction to one sector in the sector basis order.
    pub fn project(&self, sector: &SectorLabel) -> SectorMatrix<T> {
        let d = self.basis.len();
        let idx = self.irrep_index();
        let states = enumerate_basis(self.n_atoms, sector);
        let global: Vec<usize> = states
            .iter()
            .map(|st| {
                let j = st.jbar(sector);
                idx[&st.k] * d + idx[&j]
            })
            .collect();
        let local: HashMap<usize, usize> = global.iter().enumerate().map(|(l, &g)| (g, l)).collect();
        let mut trip = Vec::new();
        for (r, &g) in global.iter().enumerate() {
            for (c, v) in self.matrix.row(g) {
                if let Some(&lc) = local.get(&c) {
                    trip.push((r, lc, v));
                }
            }
        }
        let n = global.len();
        SectorMatrix {
            sector: sector.clone(),
            n_atoms: self.n_atoms,
            dim: n,
            entries: Csr::from_triplets(n, n, trip),
            build_method: BuildMethod::Oracle,
        }
    }

    /// Largest entry coupling two different sectors; zero when `[S_α, L] = 0`.
    pub fn cross_sector_max(&self) -> T {
        let sec = self.sector_of_index();
        let mut m = T::ZERO;
        for r in 0..self.dim() {
            for (c, v) in self.matrix.row(r) {
                if sec[r] != sec[c] {
                    m = m.max(v.abs_());
                }
            }
        }
        m
    }

    /// `‖[S_α, L]‖_max` for `S_α = K_αα ⊗ I − I ⊗ K_αα`, evaluated entrywise.
    pub fn weak_symmetry_commutator(&self, alpha: usize) -> T {
        let d = self.basis.len();
        let s_of = |g: usize| self.basis[g / d][alpha] as i64 - self.basis[g % d][alpha] as i64;
        let mut m = T::ZERO;
        for r in 0..self.dim() {
            for (c, v) in self.matrix.row(r) {
                let w = v * T::from_int(s_of(r) - s_of(c));
                m = m.max(w.abs_());
            }
        }
        m
    }

    /// Max over columns of `|Σ_{k} L_{(k,k), col}|`: the trace functional is a left null vector.
    pub fn trace_annihilation(&self) -> T {
        let d = self.basis.len();
        let mut acc = vec![cz::<T>(); self.dim()];
        for k in 0..d {
            let r = k * d + k;
            for (c, v) in self.matrix.row(r) {
                acc[c] += v;
            }
        }
        acc.into_iter().fold(T::ZERO, |a, z| a.max(z.abs_()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_obey_algebra() {
        let k = ladder_matrices::<f64>(3, 3);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for e in 0..3 {
                        let lhs = &k[a][b] * &k[c][e] - &k[c][e] * &k[a][b];
                        let mut rhs = DMatrix::zeros(lhs.nrows(), lhs.ncols());
                        if b == c {
                            rhs += &k[a][e];
                        }
                        if a == e {
                            rhs -= &k[c][b];
                        }
                        assert!((lhs - rhs).abs().max() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_small_structure() {
        let p = LiouvParams::<f64>::new(3, 1, vec![0.3, -0.1, 0.7], 1.0, 0.4, 0.2).unwrap();
        let o = build_oracle_matrix(&p, &MemoryBudget::default()).unwrap();
        assert_eq!(o.dim(), 9);
        assert_eq!(o.cross_sector_max(), 0.0);
        for a in 0..3 {
            assert_eq!(o.weak_symmetry_commutator(a), 0.0);
        }
        assert!(o.trace_annihilation() < 1e-14);
    }
}
