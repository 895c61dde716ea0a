//! Direct sector assembly from closed-form matrix elements.
//!
//! In the basis `|k⟩ ⊗ |j̄⟩` with `j̄ = k − s` the restricted Liouvillian has
//!
//! * diagonal `−iΣε_α s_α − Γ₀/2 Σs_α² − Γ(L² + (N−1)L) + Γ/2 Σ(k_α² + j̄_α²) − Γp/2 Σ_β (2β−N−1)(k_β + j̄_β)`,
//! * hops `k → k + e_α − e_β`, `j̄ → j̄ + e_α − e_β` with amplitude `x_αβ √((k_α+1) k_β (j̄_α+1) j̄_β)`.
//!
//! These follow from the literal vectorized form and are certified against it entrywise.

use super::sparse::Csr;
use super::{BuildMethod, SectorMatrix};
use crate::error::{Error, Result};
use crate::model::{LiouvParams, MemoryBudget, SectorBasis, SectorLabel};
use crate::scalar::Real;
use num_complex::Complex;

/// One family of matrix elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Diagonal,
    /// Transfer of one excitation from level `β` to level `α` in both copies (zero-based).
    Hop {
        alpha: usize,
        beta: usize,
    },
}

impl Family {
    /// `1 + N(N−1)` families; seven for three levels.
    pub fn all(n_levels: usize) -> Vec<Family> {
        let mut v = vec![Family::Diagonal];
        for alpha in 0..n_levels {
            for beta in 0..n_levels {
                if alpha != beta {
                    v.push(Family::Hop { alpha, beta });
                }
            }
        }
        v
    }
}

/// Optional sign flip of one family; used to show that the oracle comparison detects errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StencilOptions {
    pub flip: Option<Family>,
}

pub fn build_sector_matrix<T: Real>(
    params: &LiouvParams<T>,
    sector: &SectorLabel,
    budget: &MemoryBudget,
) -> Result<SectorMatrix<T>> {
    build_sector_matrix_with(params, sector, budget, StencilOptions::default())
}

/// Three-level entry point; rejects other `N`.
pub fn build_sector_matrix_su3<T: Real>(
    params: &LiouvParams<T>,
    sector: &SectorLabel,
    budget: &MemoryBudget,
) -> Result<SectorMatrix<T>> {
    if params.n_levels != 3 {
        return Err(Error::domain("build_sector_matrix_su3 requires n_levels = 3"));
    }
    build_sector_matrix(params, sector, budget)
}

pub fn build_sector_matrix_with<T: Real>(
    params: &LiouvParams<T>,
    sector: &SectorLabel,
    budget: &MemoryBudget,
    opts: StencilOptions,
) -> Result<SectorMatrix<T>> {
    params.validate()?;
    let n = params.n_levels;
    sector.validate(n, params.n_atoms)?;
    let basis = SectorBasis::new(params.n_atoms, sector);
    let dim = basis.len();
    budget.check_entries(dim.saturating_mul(1 + n * (n - 1)), "sector matrix")?;

    let l = T::from_count(params.n_atoms);
    let (g, g0, p) = (params.gamma, params.gamma0, params.p);
    let s = &sector.0;
    let mut eps_s = T::ZERO;
    for a in 0..n {
        eps_s += params.eps[a] * T::from_int(s[a]);
    }
    let constant_re = -g0 * T::HALF * T::from_int(sector.sum_sq()) - g * (l * l + T::from_count(n - 1) * l);
    let sign = |f: Family| if opts.flip == Some(f) { -T::ONE } else { T::ONE };

    let mut trip = Vec::with_capacity(dim * (1 + n * (n - 1)));
    for (col, st) in basis.states.iter().enumerate() {
        let k = &st.k;
        let j: Vec<i64> = k.iter().zip(s).map(|(k, s)| k - s).collect();
        let mut re = constant_re;
        for a in 0..n {
            re += g * T::HALF * T::from_int(k[a] * k[a] + j[a] * j[a]);
            let w = T::from_int(2 * (a as i64 + 1) - n as i64 - 1);
            re -= g * p * T::HALF * w * T::from_int(k[a] + j[a]);
        }
        trip.push((col, col, Complex::new(re, -eps_s) * sign(Family::Diagonal)));

        for a in 0..n {
            for b in 0..n {
                if a == b || k[b] == 0 || j[b] == 0 {
                    continue;
                }
                let mut k2 = k.clone();
                k2[a] += 1;
                k2[b] -= 1;
                let row = basis.index_of(&k2).expect("hop stays inside the sector");
                let amp = params.rate(a, b) * T::from_int((k[a] + 1) * k[b] * (j[a] + 1) * j[b]).sqrt();
                let f = Family::Hop { alpha: a, beta: b };
                trip.push((row, col, Complex::new(amp * sign(f), T::ZERO)));
            }
        }
    }
    Ok(SectorMatrix {
        sector: sector.clone(),
        n_atoms: params.n_atoms,
        dim,
        entries: Csr::from_triplets(dim, dim, trip),
        build_method: BuildMethod::Stencil,
    })
}

/// Entrywise comparison of the stencil and the projected literal Liouvillian.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OracleComparison {
    pub sector: SectorLabel,
    pub dim: usize,
    pub max_abs_delta: f64,
}

/// Compares every sector at the given parameters.
pub fn compare_with_oracle<T: Real>(
    params: &LiouvParams<T>,
    budget: &MemoryBudget,
    opts: StencilOptions,
) -> Result<Vec<OracleComparison>> {
    let oracle = super::ladder::build_oracle_matrix(params, budget)?;
    let mut out = Vec::new();
    for s in crate::model::enumerate_sectors(params.n_levels, params.n_atoms) {
        let a = build_sector_matrix_with(params, &s, budget, opts)?;
        let b = oracle.project(&s);
        let delta = a.entries.max_abs_diff_dense(&b.entries.to_dense());
        out.push(OracleComparison { sector: s, dim: a.dim, max_abs_delta: delta.to_f64_lossy() });
    }
    Ok(out)
}
