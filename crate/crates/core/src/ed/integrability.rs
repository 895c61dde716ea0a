//! Numerical spot check of the two Richardson-Gaudin integrals of motion on the doubled space.
//!
//! With `K_αβ,1 = K_αβ ⊗ I` and `J_αβ = −I ⊗ K_βα`,
//!
//! ```text
//! R₁ = Σ χ_α K_αα,1 + cot z Σ K_αα,1 J_αα + (1/sin z) Σ_{α<β} (e^{iz} K_αβ,1 J_βα + e^{−iz} K_βα,1 J_αβ)
//! R₂ = Σ χ_α J_αα   − cot z Σ K_αα,1 J_αα − (1/sin z) Σ_{α<β} (…)
//! ```
//!
//! and `g sin z (R₁ − R₂) + L_C` is the Liouvillian, where
//! `L_C = −iΣε_α S_α − Γ C² + (Γ−Γ₀)/2 Σ S_α²`, `C² = Σ K_αβ,1 K_βα,1`, `S_α = K_αα,1 + J_αα`.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use super::ladder::{build_oracle_matrix, ladder_matrices};
use crate::error::{Error, Result};
use crate::model::{LiouvParams, MemoryBudget};
use crate::rg::RGMappingConstants;
use crate::scalar::{cr, cz, Cplx, Real};

type CMat<T> = DMatrix<Complex<T>>;

fn kron<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> CMat<T> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::from_element(ra * rb, ca * cb, cz::<T>());
    for i in 0..ra {
        for j in 0..ca {
            let x = a[(i, j)];
            if x == T::ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = cr(x * b[(k, l)]);
                }
            }
        }
    }
    out
}

/// The integrals `(R₁, R₂)` and `L_C` as dense doubled-space matrices.
pub struct Integrals<T> {
    pub r1: CMat<T>,
    pub r2: CMat<T>,
    pub l_c: CMat<T>,
    pub g_sin_z: Complex<T>,
}

pub fn build_integrals<T: Real>(params: &LiouvParams<T>) -> Result<Integrals<T>> {
    let mc = RGMappingConstants::new(params)?;
    let n = params.n_levels;
    let k = ladder_matrices::<T>(n, params.n_atoms);
    let d = k[0][0].nrows();
    let id = DMatrix::<T>::identity(d, d);
    let k1 = |a: usize, b: usize| kron(&k[a][b], &id);
    let jj = |a: usize, b: usize| -kron(&id, &k[b][a]);
    let dim = d * d;
    let zero = || DMatrix::from_element(dim, dim, cz::<T>());
    let (cot, csc, eiz) = (mc.cot_z(), mc.csc_z(), mc.e_iz());
    let emiz = Complex::new(T::ONE, T::ZERO) / eiz;

    let mut diag = zero();
    let mut off = zero();
    for a in 0..n {
        diag += k1(a, a) * jj(a, a);
        for b in (a + 1)..n {
            off += (k1(a, b) * jj(b, a)) * eiz + (k1(b, a) * jj(a, b)) * emiz;
        }
    }
    let mut r1 = zero();
    let mut r2 = zero();
    for a in 0..n {
        r1 += k1(a, a) * mc.chi[a];
        r2 += jj(a, a) * mc.chi[a];
    }
    let coupling = diag * cot + off * csc;
    r1 += &coupling;
    r2 -= &coupling;

    let mut l_c = zero();
    let mi = Complex::new(T::ZERO, -T::ONE);
    for a in 0..n {
        let s = k1(a, a) + jj(a, a);
        l_c += &s * (mi * params.eps[a]);
        l_c += (&s * &s) * cr((params.gamma - params.gamma0) * T::HALF);
        for b in 0..n {
            l_c -= (k1(a, b) * k1(b, a)) * cr(params.gamma);
        }
    }
    Ok(Integrals { r1, r2, l_c, g_sin_z: mc.g_sin_z() })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilityReport {
    /// `max |[R₁, R₂]|`.
    pub commutator: f64,
    /// `max |g sin z (R₁ − R₂) + L_C − L|` against the literal Liouvillian.
    pub reconstruction: f64,
}

/// Dense check; intended for `L ≤ 3`.
pub fn integrability_check<T: Real>(params: &LiouvParams<T>, budget: &MemoryBudget) -> Result<IntegrabilityReport> {
    let d = crate::model::irrep_dimension(params.n_levels, params.n_atoms);
    budget.check_dense(d * d, "integrals of motion")?;
    let ints = build_integrals(params)?;
    let comm = &ints.r1 * &ints.r2 - &ints.r2 * &ints.r1;
    let oracle = build_oracle_matrix(params, budget)?;
    let lm = oracle.matrix.to_dense();
    let rec = (&ints.r1 - &ints.r2) * ints.g_sin_z + &ints.l_c - lm;
    let maxabs = |m: &CMat<T>| m.iter().fold(T::ZERO, |a, z| a.max(z.abs_())).to_f64_lossy();
    let out = IntegrabilityReport { commutator: maxabs(&comm), reconstruction: maxabs(&rec) };
    if !out.commutator.is_finite() {
        return Err(Error::numeric("non-finite commutator"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrals_commute_and_rebuild_liouvillian() {
        for (l, eps, g0, p) in
            [(1, [0.0, 0.0, 0.0], 1.0, 0.5), (2, [-1.0, 0.3, 1.0], 0.4, 0.3), (2, [0.2, 0.0, -0.7], 1.7, -0.6)]
        {
            let params = LiouvParams::<f64>::new(3, l, eps.to_vec(), 1.0, g0, p).unwrap();
            let r = integrability_check(&params, &MemoryBudget::default()).unwrap();
            assert!(r.commutator < 1e-12, "{r:?}");
            assert!(r.reconstruction < 1e-12, "{r:?}");
        }
    }
}
