//! Two-level equations solved as a Heine–Stieltjes problem, and the collective-spin comparison.
//!
//! With `y(x) = Π (x − c_i)` the rational equations say `A y'' + B y' = V y` with
//! `A = (x − i)(x + i)(x − i/p)`, `B/A = (2+s₁)/(x−i) + s₁/(x+i) − L/(x−i/p)` and `V` linear.
//! On polynomials of degree `M = L − s₁` this is an `(M+1)`-dimensional eigenproblem whose
//! eigenvectors are the `y` of every solution.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use super::residual::eigenvalue_from_x;
use crate::ed::dense::eig_dense;
use crate::ed::ladder::{ladder_matrices, occupation_basis};
use crate::ed::{build_sector_matrix, full_spectrum, multiset_distance};
use crate::error::{Error, Result};
use crate::model::{enumerate_basis, enumerate_sectors, LiouvParams, MemoryBudget, SectorLabel};
use crate::scalar::{ci, cr, cz, norm_inf, Cplx, Real};

type C<T> = Complex<T>;

fn poly_mul<T: Real>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    let mut out = vec![cz::<T>(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += *x * *y;
        }
    }
    out
}

/// Roots of a polynomial with increasing coefficients via its companion matrix.
fn poly_roots<T: Real>(coef: &[C<T>]) -> Result<Vec<C<T>>> {
    let deg = coef.len() - 1;
    if deg == 0 {
        return Ok(vec![]);
    }
    let lead = coef[deg];
    if lead.abs_() == T::ZERO {
        return Err(Error::numeric("polynomial has a vanishing leading coefficient"));
    }
    let mut comp = DMatrix::from_element(deg, deg, cz::<T>());
    for i in 1..deg {
        comp[(i, i - 1)] = cr(T::ONE);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coef[i] / lead;
    }
    Ok(eig_dense(&comp, false)?.0)
}

/// Residual rows of the free roots; frozen roots only enter through the pair terms.
fn free_residual<T: Real>(c: &[C<T>], free: &[usize], params: &LiouvParams<T>, s1: T) -> Vec<C<T>> {
    let (i, z, l) = (ci::<T>(), Complex::new(T::ZERO, T::ONE / params.p), T::from_count(params.n_atoms));
    free.iter()
        .map(|&a| {
            let x = c[a];
            let mut f = cr(T::TWO + s1) / (x - i) + cr(s1) / (x + i) - cr(l) / (x - z);
            for (b, &y) in c.iter().enumerate() {
                if b != a {
                    f += cr(T::TWO) / (x - y);
                }
            }
            f
        })
        .collect()
}

fn free_jacobian<T: Real>(c: &[C<T>], free: &[usize], params: &LiouvParams<T>, s1: T) -> DMatrix<C<T>> {
    let (i, z, l) = (ci::<T>(), Complex::new(T::ZERO, T::ONE / params.p), T::from_count(params.n_atoms));
    let inv2 = |u: C<T>| cr(T::ONE) / (u * u);
    let mut j = DMatrix::from_element(free.len(), free.len(), cz::<T>());
    for (r, &a) in free.iter().enumerate() {
        let x = c[a];
        let mut d = -cr(T::TWO + s1) * inv2(x - i) - cr(s1) * inv2(x + i) + cr(l) * inv2(x - z);
        for (b, &y) in c.iter().enumerate() {
            if b != a {
                d -= inv2(x - y) * T::TWO;
            }
        }
        j[(r, r)] = d;
        for (col, &b) in free.iter().enumerate() {
            if b != a {
                j[(r, col)] = inv2(x - c[b]) * T::TWO;
            }
        }
    }
    j
}

/// Newton polish of the companion roots. For `s₁ = 0` the charge at `−i` vanishes and roots may
/// sit exactly there; those are snapped onto `−i` and held fixed.
fn polish<T: Real>(c: &mut [C<T>], params: &LiouvParams<T>, sector: &SectorLabel) -> Result<T> {
    let s1 = T::from_int(sector.0[0]);
    let i = ci::<T>();
    let mut free = Vec::with_capacity(c.len());
    for (a, x) in c.iter_mut().enumerate() {
        if sector.0[0] == 0 && (*x + i).abs_() <= T::lit(1e-5) {
            *x = -i;
        } else {
            free.push(a);
        }
    }
    if free.is_empty() {
        return Ok(T::ZERO);
    }
    for _ in 0..8 {
        let f = free_residual(c, &free, params, s1);
        if norm_inf(&f) <= T::lit(1e-13) {
            break;
        }
        let j = free_jacobian(c, &free, params, s1);
        let rhs = nalgebra::DVector::from_iterator(f.len(), f.iter().map(|z| -*z));
        let Some(dx) = j.lu().solve(&rhs) else { break };
        let mut trial = c.to_vec();
        for (k, &a) in free.iter().enumerate() {
            trial[a] += dx[k];
        }
        let g = free_residual(&trial, &free, params, s1);
        if norm_inf(&g) < norm_inf(&f) {
            c.copy_from_slice(&trial);
        } else {
            break;
        }
    }
    Ok(norm_inf(&free_residual(c, &free, params, s1)))
}

#[derive(Debug, Clone, Serialize)]
pub struct Su2Sector<T> {
    pub sector: SectorLabel,
    pub eigenvalues: Vec<C<T>>,
    /// Rational roots of each solution; empty for sectors obtained by conjugation.
    pub roots: Vec<Vec<C<T>>>,
    pub max_residual: T,
    /// True when the sector was obtained as the conjugate of sector `−s`.
    pub via_conjugation: bool,
}

/// Every solution of the two-level equations in a sector with `s₁ ≥ 0`.
pub fn heine_stieltjes<T: Real>(params: &LiouvParams<T>, sector: &SectorLabel) -> Result<Su2Sector<T>> {
    if params.n_levels != 2 {
        return Err(Error::domain("Heine-Stieltjes path needs n_levels = 2"));
    }
    sector.validate(2, params.n_atoms)?;
    if params.p == T::ZERO || params.p.abs() >= T::ONE {
        return Err(Error::domain("two-level equations need 0 < |p| < 1"));
    }
    let s1 = sector.0[0];
    if s1 < 0 {
        return Err(Error::domain("Heine-Stieltjes path takes s₁ ≥ 0; use conjugation for s₁ < 0"));
    }
    let l = params.n_atoms as i64;
    let m = (l - s1) as usize;
    let i = ci::<T>();
    let z = Complex::new(T::ZERO, T::ONE / params.p);
    let charges = [(i, T::from_int(2 + s1)), (-i, T::from_int(s1)), (z, -T::from_int(l))];
    let lin = |r: C<T>| vec![-r, cr(T::ONE)];
    let a = poly_mul(&poly_mul(&lin(charges[0].0), &lin(charges[1].0)), &lin(charges[2].0));
    let mut b = [cz::<T>(); 3];
    for k in 0..3 {
        let others: Vec<C<T>> = (0..3).filter(|&j| j != k).map(|j| charges[j].0).collect();
        let pk = poly_mul(&lin(others[0]), &lin(others[1]));
        for d in 0..3 {
            b[d] += pk[d] * charges[k].1;
        }
    }
    let mf = T::from_count(m);
    let v1 = cr(mf * (mf - T::ONE)) + b[2] * mf;
    // columns: images of x^n, rows: coefficients up to degree M
    let mut t = DMatrix::from_element(m + 1, m + 1, cz::<T>());
    for n in 0..=m {
        let nf = T::from_count(n);
        let mut img = vec![cz::<T>(); m + 3];
        if n >= 2 {
            for (d, ad) in a.iter().enumerate() {
                img[n - 2 + d] += *ad * (nf * (nf - T::ONE));
            }
        }
        if n >= 1 {
            for (d, bd) in b.iter().enumerate() {
                img[n - 1 + d] += *bd * nf;
            }
        }
        img[n + 1] -= v1;
        for r in 0..=m {
            t[(r, n)] = img[r];
        }
    }
    let (_, vecs) = eig_dense(&t, true)?;
    let vecs = vecs.unwrap();
    let mut eigenvalues = Vec::with_capacity(m + 1);
    let mut roots = Vec::with_capacity(m + 1);
    let mut max_residual = T::ZERO;
    for k in 0..=m {
        let coef: Vec<C<T>> = vecs.column(k).iter().copied().collect();
        let mut c = poly_roots(&coef)?;
        let res = if c.is_empty() { T::ZERO } else { polish(&mut c, params, sector)? };
        max_residual = max_residual.max(res);
        eigenvalues.push(eigenvalue_from_x(&c, &c, params, sector)?);
        roots.push(c);
    }
    Ok(Su2Sector { sector: sector.clone(), eigenvalues, roots, max_residual, via_conjugation: false })
}

/// All sectors; those with `s₁ < 0` are conjugates of `−s`.
pub fn su2_spectrum<T: Real>(params: &LiouvParams<T>) -> Result<Vec<Su2Sector<T>>> {
    let mut out = Vec::new();
    let mut direct: HashMap<SectorLabel, Su2Sector<T>> = HashMap::new();
    for s in enumerate_sectors(2, params.n_atoms) {
        if s.0[0] >= 0 {
            direct.insert(s.clone(), heine_stieltjes(params, &s)?);
        }
    }
    for s in enumerate_sectors(2, params.n_atoms) {
        if s.0[0] >= 0 {
            out.push(direct[&s].clone());
        } else {
            let src = &direct[&s.neg()];
            out.push(Su2Sector {
                sector: s.clone(),
                eigenvalues: src.eigenvalues.iter().map(|z| z.conj_()).collect(),
                roots: vec![],
                max_residual: src.max_residual,
                via_conjugation: true,
            });
        }
    }
    Ok(out)
}

/// Dense vectorized Lindbladian `−i(H⊗I − I⊗Hᵀ) + Σ W⊗W̄ − ½(W†W⊗I + I⊗(W†W)ᵀ)`.
pub fn lindblad_dense<T: Real>(h: &DMatrix<C<T>>, jumps: &[DMatrix<C<T>>]) -> DMatrix<C<T>> {
    let d = h.nrows();
    let id = DMatrix::<C<T>>::identity(d, d);
    let mi = Complex::new(T::ZERO, -T::ONE);
    let mut out = (h.kronecker(&id) - id.kronecker(&h.transpose())) * mi;
    for w in jumps {
        let wd = w.adjoint();
        let wdw = &wd * w;
        out += w.kronecker(&w.map(|z| z.conj_()));
        out -= (wdw.kronecker(&id) + id.kronecker(&wdw.transpose())) * cr(T::HALF);
    }
    out
}

/// The collective-spin Liouvillian with `H = −h S_z`, `W₀ = √(4Γ₀) S_z`, `W± = √(Γ(1∓p)) S±`,
/// `S_z = (K₂₂ − K₁₁)/2`, `S₊ = K₂₁`, `S₋ = K₁₂`.
pub fn collective_spin_liouvillian<T: Real>(n_atoms: usize, h: T, gamma: T, gamma0: T, p: T) -> DMatrix<C<T>> {
    let k = ladder_matrices::<T>(2, n_atoms);
    let c = |m: &DMatrix<T>| m.map(cr);
    let sz = c(&((&k[1][1] - &k[0][0]) * T::HALF));
    let sp = c(&k[1][0]);
    let sm = c(&k[0][1]);
    let ham = &sz * cr(-h);
    let jumps = vec![
        &sz * cr((T::lit(4.0) * gamma0).sqrt()),
        sp * cr((gamma * (T::ONE - p)).sqrt()),
        sm * cr((gamma * (T::ONE + p)).sqrt()),
    ];
    lindblad_dense(&ham, &jumps)
}

fn project<T: Real>(full: &DMatrix<C<T>>, n_levels: usize, n_atoms: usize, s: &SectorLabel) -> DMatrix<C<T>> {
    let basis = occupation_basis(n_levels, n_atoms);
    let d = basis.len();
    let idx: HashMap<Vec<i64>, usize> =
        basis.iter().enumerate().map(|(i, k)| (k.iter().map(|&x| x as i64).collect(), i)).collect();
    let g: Vec<usize> = enumerate_basis(n_atoms, s).iter().map(|st| idx[&st.k] * d + idx[&st.jbar(s)]).collect();
    DMatrix::from_fn(g.len(), g.len(), |r, c| full[(g[r], g[c])])
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftSectorReport {
    pub sector: SectorLabel,
    /// `Γ₀ s₁ s₂`.
    pub shift: f64,
    /// Multiset distance between the collective-spin spectrum and the shifted restricted-model spectrum.
    pub mismatch: f64,
}

/// Compares the collective-spin Liouvillian with the two-level restricted model (`ε = (h/2, −h/2)`).
pub fn collective_spin_shift_check<T: Real>(
    params: &LiouvParams<T>,
    budget: &MemoryBudget,
) -> Result<Vec<ShiftSectorReport>> {
    if params.n_levels != 2 {
        return Err(Error::domain("collective-spin comparison needs n_levels = 2"));
    }
    let h = params.eps[0] - params.eps[1];
    let full = collective_spin_liouvillian(params.n_atoms, h, params.gamma, params.gamma0, params.p);
    let mut out = Vec::new();
    for s in enumerate_sectors(2, params.n_atoms) {
        let a = project(&full, 2, params.n_atoms, &s);
        let (va, _) = eig_dense(&a, false)?;
        let shift = params.gamma0 * T::from_int(s.0[0] * s.0[1]);
        let m = build_sector_matrix(params, &s, budget)?;
        let vb: Vec<C<T>> = full_spectrum(&m, false, budget)?.eigenvalues.iter().map(|z| *z + cr(shift)).collect();
        let mismatch = multiset_distance(&va, &vb).map_or(f64::INFINITY, |x| x.to_f64_lossy());
        out.push(ShiftSectorReport { sector: s, shift: shift.to_f64_lossy(), mismatch });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_dense_spectrum() {
        for (l, p) in [(1usize, 0.3), (3, 0.5), (4, -0.4)] {
            let params = LiouvParams::<f64>::new(2, l, vec![0.35, -0.35], 1.0, 0.6, p).unwrap();
            let b = MemoryBudget::default();
            for sec in su2_spectrum(&params).unwrap() {
                let m = build_sector_matrix(&params, &sec.sector, &b).unwrap();
                let ed = full_spectrum(&m, false, &b).unwrap().eigenvalues;
                let d = multiset_distance(&ed, &sec.eigenvalues).unwrap();
                assert!(d < 1e-7, "L={l} p={p} {} d={d:e}", sec.sector);
                assert!(sec.max_residual < 1e-9, "{}", sec.max_residual);
            }
        }
    }

    #[test]
    fn collective_spin_shift() {
        let params = LiouvParams::<f64>::new(2, 4, vec![0.35, -0.35], 1.0, 0.6, 0.3).unwrap();
        let rep = collective_spin_shift_check(&params, &MemoryBudget::default()).unwrap();
        for r in &rep {
            assert!(r.mismatch < 1e-9, "{r:?}");
        }
        let one = rep.iter().find(|r| r.sector.0 == vec![1, -1]).unwrap();
        assert!((one.shift + 0.6).abs() < 1e-15);
        let zero = rep.iter().find(|r| r.sector.0 == vec![0, 0]).unwrap();
        assert_eq!(zero.shift, 0.0);
    }
}
