//! Algebraic Bethe-ansatz eigenvectors of the three-level Liouvillian.
//!
//! Vectors live on the doubled space as `d×d` arrays `X[k, j]` (`|k⟩⟨j|`), so that
//! `K_ab ⊗ I` acts as `K_ab X` and `I ⊗ B` as `X Bᵀ`. The creation operators act on the
//! lowest-weight state `|L,0,0⟩ ⊗ |0,0,L⟩`.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use crate::ed::ladder::{build_oracle_matrix, ladder_matrices, occupation_basis, OracleMatrix};
use crate::error::{Error, Result};
use crate::model::{enumerate_basis, LiouvParams, MemoryBudget, SectorLabel};
use crate::rg::SpectralSolution;
use crate::scalar::{ci, cr, cz, norm2, Cplx, Real};

type C<T> = Complex<T>;

/// Upper limit on `(m2 + 1) 2^m2 d²`, a proxy for the cost of the insertion sum.
pub const MAX_WORK: usize = 1 << 34;

#[derive(Debug, Clone)]
pub struct BetheVector<T> {
    pub sector: SectorLabel,
    pub eigenvalue: C<T>,
    /// Doubled-space vector, index `k·d + j` in occupation-basis order.
    pub full: Vec<C<T>>,
    /// Components in the sector basis order.
    pub sector_vector: Vec<C<T>>,
    pub terms: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetheCertificate {
    pub sector: SectorLabel,
    pub eigenvalue_re: f64,
    pub eigenvalue_im: f64,
    /// `‖L v − λ v‖ / ‖v‖` with the literal doubled-space matrix.
    pub residual: f64,
    /// Norm fraction outside the sector.
    pub leakage: f64,
    pub norm: f64,
    pub terms: usize,
}

fn work_estimate(n_atoms: usize, m2: usize) -> usize {
    let d = (n_atoms + 1) * (n_atoms + 2) / 2;
    if m2 >= 63 {
        return usize::MAX;
    }
    (m2 + 1).saturating_mul(1usize << m2).saturating_mul(d * d)
}

fn count_terms(m1: usize, m2: usize) -> usize {
    // Σ_k C(m2, k) · m1!/(m1−k)!
    let mut total = 0usize;
    let mut binom = 1usize;
    for k in 0..=m2.min(m1) {
        let mut fall = 1usize;
        for t in 0..k {
            fall = fall.saturating_mul(m1 - t);
        }
        total = total.saturating_add(binom.saturating_mul(fall));
        binom = binom.saturating_mul(m2 - k) / (k + 1);
    }
    total
}

/// Nonzero entries of one ladder matrix.
type Sparse<T> = Vec<(usize, usize, T)>;

struct Ctx<'a, T: Real> {
    k: &'a [Vec<Sparse<T>>],
    d: usize,
    e: Vec<C<T>>,
    wq: Vec<C<T>>,
    kappa: T,
    center: C<T>,
}

impl<T: Real> Ctx<'_, T> {
    /// `K X` for the first copy.
    fn left(&self, a: usize, b: usize, x: &[C<T>], out: &mut [C<T>], f: C<T>) {
        let d = self.d;
        for &(r, c, v) in &self.k[a][b] {
            let f = f * v;
            for j in 0..d {
                out[r * d + j] += x[c * d + j] * f;
            }
        }
    }

    /// Second-copy generator `J_ab = −I ⊗ K_ba`, i.e. `−X K_baᵀ`.
    fn j(&self, a: usize, b: usize, x: &[C<T>], out: &mut [C<T>], f: C<T>) {
        let d = self.d;
        for &(r, c, v) in &self.k[b][a] {
            let f = -f * v;
            for i in 0..d {
                out[i * d + r] += x[i * d + c] * f;
            }
        }
    }

    /// `(K_a0 + r(e) J_a0) X`.
    fn creation(&self, a: usize, e: C<T>, x: &[C<T>]) -> Vec<C<T>> {
        let mut out = vec![cz(); x.len()];
        self.left(a, 0, x, &mut out, cr(T::ONE));
        self.j(a, 0, x, &mut out, self.r(e));
        out
    }

    fn r(&self, e: C<T>) -> C<T> {
        -ci::<T>() * self.kappa / (e - self.center)
    }

    /// `−(e' + i)(ω − c)/(ω − e')` written in the exponential chart of ω.
    fn insertion(&self, q: C<T>, ep: C<T>) -> C<T> {
        let i = ci::<T>();
        let one = cr(T::ONE);
        -(ep + i) * (i * (q + one) - self.center * (q - one)) / (i * (q + one) - ep * (q - one))
    }

    /// Sum over all partial injections of the w roots into the e roots. A w root left out
    /// contributes `−iκ J_21` (applied first); an e root that receives one is created on level 3.
    /// The creation operators commute, so the sum runs as a recursion over the e roots keyed by
    /// the set of w roots already placed, once per number of left-out w roots.
    fn sum(&self, lam: &[C<T>]) -> Vec<C<T>> {
        let (m1, m2) = (self.e.len(), self.wq.len());
        let ins: Vec<Vec<C<T>>> =
            self.wq.iter().map(|&q| self.e.iter().map(|&e| self.insertion(q, e)).collect()).collect();
        let mut total = vec![cz(); lam.len()];
        let mut start = lam.to_vec();
        let mut pref = cr(T::ONE);
        for n_out in 0..=m2 {
            if n_out > 0 {
                let mut next = vec![cz(); lam.len()];
                self.j(2, 1, &start, &mut next, cr(T::ONE));
                start = next;
                pref *= -ci::<T>() * self.kappa;
            }
            let placed = m2 - n_out;
            if placed > m1 {
                continue;
            }
            let mut states: std::collections::HashMap<u64, Vec<C<T>>> = std::collections::HashMap::new();
            states.insert(0, start.clone());
            for (i, &ei) in self.e.iter().enumerate() {
                let left_after = m1 - i - 1;
                let mut next: std::collections::HashMap<u64, Vec<C<T>>> = std::collections::HashMap::new();
                for (used, v) in states {
                    let n_used = used.count_ones() as usize;
                    if n_used + left_after >= placed {
                        add_to(&mut next, used, self.creation(1, ei, &v), cr(T::ONE));
                    }
                    if n_used < placed {
                        let v2 = self.creation(2, ei, &v);
                        for (jw, row) in ins.iter().enumerate() {
                            if used & (1 << jw) == 0 {
                                add_to(&mut next, used | (1 << jw), v2.clone(), row[i]);
                            }
                        }
                    }
                }
                states = next;
            }
            for (_, v) in states {
                for (t, z) in total.iter_mut().zip(&v) {
                    *t += *z * pref;
                }
            }
        }
        total
    }
}

fn add_to<T: Real>(map: &mut std::collections::HashMap<u64, Vec<C<T>>>, key: u64, v: Vec<C<T>>, f: C<T>) {
    match map.get_mut(&key) {
        Some(acc) => acc.iter_mut().zip(&v).for_each(|(a, b)| *a += *b * f),
        None => {
            let mut v = v;
            if f != cr(T::ONE) {
                v.iter_mut().for_each(|z| *z *= f);
            }
            map.insert(key, v);
        }
    }
}

/// Eigenvector attached to a three-level root set with `0 < p < 1`.
pub fn build_eigenvector_su3<T: Real>(sol: &SpectralSolution<T>) -> Result<BetheVector<T>> {
    let params = &sol.params;
    if params.n_levels != 3 || sol.q.len() != 2 {
        return Err(Error::domain("Bethe vectors are implemented for n_levels = 3"));
    }
    if !(params.p > T::ZERO && params.p < T::ONE) {
        return Err(Error::domain("Bethe vectors need 0 < p < 1"));
    }
    let l = params.n_atoms;
    let (m1, m2) = (sol.q[0].len(), sol.q[1].len());
    let terms = count_terms(m1, m2);
    let basis = occupation_basis(3, l);
    let d = basis.len();
    if work_estimate(l, m2) > MAX_WORK {
        return Err(Error::resource(format!(
            "Bethe vector with {m2} second-level roots at d = {d} exceeds the work limit"
        )));
    }
    let pos = |k: [usize; 3]| basis.iter().position(|b| b.as_slice() == k).expect("occupation in basis");
    let mut lam = vec![cz::<T>(); d * d];
    lam[pos([l, 0, 0]) * d + pos([0, 0, l])] = cr(T::ONE);
    let k: Vec<Vec<Sparse<T>>> = ladder_matrices::<T>(3, l)
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|m| {
                    let mut nz = Vec::new();
                    for c in 0..m.ncols() {
                        for r in 0..m.nrows() {
                            if m[(r, c)] != T::ZERO {
                                nz.push((r, c, m[(r, c)]));
                            }
                        }
                    }
                    nz
                })
                .collect()
        })
        .collect();
    let ctx = Ctx {
        k: &k,
        d,
        e: sol.e(),
        wq: sol.q[1].clone(),
        kappa: T::ONE + T::ONE / params.p,
        center: C::new(T::ZERO, T::ONE / params.p),
    };
    let flat = ctx.sum(&lam);
    let acc = DMatrix::from_fn(d, d, |r, c| flat[r * d + c]);
    let n = terms;
    let full: Vec<C<T>> = (0..d * d).map(|g| acc[(g / d, g % d)]).collect();
    let idx = |occ: &[i64]| basis.iter().position(|b| b.iter().zip(occ).all(|(x, y)| *x as i64 == *y)).unwrap();
    let sector_vector =
        enumerate_basis(l, &sol.sector).iter().map(|st| acc[(idx(&st.k), idx(&st.jbar(&sol.sector)))]).collect();
    Ok(BetheVector { sector: sol.sector.clone(), eigenvalue: sol.eigenvalue, full, sector_vector, terms: n })
}

/// Residual of the vector against the literal Liouvillian of `params`.
pub fn certify<T: Real>(
    v: &BetheVector<T>,
    params: &LiouvParams<T>,
    budget: &MemoryBudget,
) -> Result<BetheCertificate> {
    certify_against(v, &build_oracle_matrix(params, budget)?)
}

fn certify_against<T: Real>(v: &BetheVector<T>, oracle: &OracleMatrix<T>) -> Result<BetheCertificate> {
    if oracle.dim() != v.full.len() {
        return Err(Error::domain("vector and parameters describe different atom numbers"));
    }
    let lv = oracle.matrix.matvec(&v.full);
    let r: Vec<C<T>> = lv.iter().zip(&v.full).map(|(a, b)| *a - *b * v.eigenvalue).collect();
    let norm = norm2(&v.full);
    if norm.to_f64_lossy() == 0.0 || !norm.to_f64_lossy().is_finite() {
        return Err(Error::numeric(format!("Bethe vector in sector {} has norm {}", v.sector, norm.to_f64_lossy())));
    }
    let sectors = oracle.sector_of_index();
    let outside: Vec<C<T>> = v.full.iter().zip(&sectors).map(|(z, s)| if *s == v.sector { cz() } else { *z }).collect();
    Ok(BetheCertificate {
        sector: v.sector.clone(),
        eigenvalue_re: v.eigenvalue.re.to_f64_lossy(),
        eigenvalue_im: v.eigenvalue.im.to_f64_lossy(),
        residual: (norm2(&r) / norm).to_f64_lossy(),
        leakage: (norm2(&outside) / norm).to_f64_lossy(),
        norm: norm.to_f64_lossy(),
        terms: v.terms,
    })
}

/// Outcome of checking one root set through its Bethe vector.
#[derive(Clone, Debug)]
pub enum Verdict {
    /// The vector is an eigenvector to the requested tolerance.
    Physical(BetheCertificate),
    /// The roots solve the equations but the vector vanishes or is not an eigenvector.
    Spurious(Option<BetheCertificate>),
    /// Too large to check: too many insertion patterns or the oracle exceeds the budget.
    Unchecked(String),
}

/// Splits RG solutions into physical and spurious ones. Converged solutions whose vector
/// has a relative residual above `rel_tol * (1 + |E|)` are spurious.
pub fn classify<T: Real>(
    params: &LiouvParams<T>,
    solutions: &[SpectralSolution<T>],
    rel_tol: f64,
    budget: &MemoryBudget,
) -> Vec<Verdict> {
    let too_big = |s: &SpectralSolution<T>| work_estimate(params.n_atoms, s.q.get(1).map_or(0, |w| w.len())) > MAX_WORK;
    if solutions.iter().all(too_big) {
        return solutions.iter().map(|_| Verdict::Unchecked("insertion sum over the work limit".into())).collect();
    }
    let oracle = match build_oracle_matrix(params, budget) {
        Ok(o) => o,
        Err(e) => return solutions.iter().map(|_| Verdict::Unchecked(e.to_string())).collect(),
    };
    solutions
        .iter()
        .map(|s| {
            if too_big(s) {
                return Verdict::Unchecked("insertion sum over the work limit".into());
            }
            let v = match build_eigenvector_su3(s) {
                Ok(v) => v,
                Err(e) => return Verdict::Unchecked(e.to_string()),
            };
            match certify_against(&v, &oracle) {
                Ok(c) if c.residual <= rel_tol * (1.0 + s.eigenvalue.abs_().to_f64_lossy()) => Verdict::Physical(c),
                Ok(c) => Verdict::Spurious(Some(c)),
                Err(_) => Verdict::Spurious(None),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_count() {
        assert_eq!(count_terms(1, 1), 2);
        assert_eq!(count_terms(2, 2), 1 + 2 * 2 + 2);
        assert_eq!(count_terms(3, 0), 1);
    }
}
