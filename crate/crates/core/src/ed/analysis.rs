//! Physical observables extracted from sector spectra: steady state, gap, p = 0 bands, dynamics.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use super::ladder::occupation_basis;
use super::{
    build_sector_matrix, dense, full_spectrum, multiset_distance, target_eigenvalues_near, ArnoldiOptions,
    SectorMatrix, SpectrumResult,
};
use crate::error::{Error, Result};
use crate::model::{enumerate_basis, enumerate_sectors, LiouvParams, MemoryBudget, SectorLabel};
use crate::scalar::{cr, cz, Cplx, Real};

/// Sectors up to this dimension are diagonalized densely by the analysis helpers.
pub const DENSE_ANALYSIS_DIM: usize = 700;

#[derive(Debug, Clone)]
pub struct SteadyState<T> {
    pub eigenvalue: Complex<T>,
    /// Sector `(0,…,0)` vector; its entries are the Fock-basis populations.
    pub rho: Vec<Complex<T>>,
    pub occupations: Vec<Vec<i64>>,
    /// Other eigenvalues within the zero tolerance (a non-unique steady state).
    pub degenerate: Vec<Complex<T>>,
    pub residual: T,
}

impl<T: Real> SteadyState<T> {
    /// `⟨K_αα⟩ / L` for each level.
    pub fn level_fractions(&self, n_atoms: usize) -> Vec<T> {
        let n = self.occupations.first().map_or(0, |k| k.len());
        let mut out = vec![T::ZERO; n];
        for (k, r) in self.occupations.iter().zip(&self.rho) {
            for a in 0..n {
                out[a] += r.re * T::from_int(k[a]);
            }
        }
        out.iter().map(|x| *x / T::from_count(n_atoms)).collect()
    }

    /// Most negative real part and largest imaginary part among the populations.
    pub fn population_defect(&self) -> (T, T) {
        let mut neg = T::ZERO;
        let mut im = T::ZERO;
        for r in &self.rho {
            neg = neg.min(r.re);
            im = im.max(r.im.abs());
        }
        (neg, im)
    }
}

fn zero_tol<T: Real>(m: &SectorMatrix<T>) -> T {
    T::lit(1e-9) * m.entries.norm_one().max(T::ONE)
}

/// Kernel vector of the `(0,…,0)` sector, normalized to unit trace.
pub fn steady_state<T: Real>(params: &LiouvParams<T>, budget: &MemoryBudget) -> Result<SteadyState<T>> {
    let s0 = SectorLabel::zero(params.n_levels);
    let m = build_sector_matrix(params, &s0, budget)?;
    let tol = zero_tol(&m);
    let (vals, vecs, res) = if m.dim <= DENSE_ANALYSIS_DIM {
        let sp = full_spectrum(&m, true, budget)?;
        (sp.eigenvalues, sp.eigenvectors.unwrap(), sp.residual_norms)
    } else {
        let count = 3.min(m.dim);
        let sp = target_eigenvalues_near(&m, cr(T::lit(0.25) * params.gamma), count, &ArnoldiOptions::default())?;
        (sp.eigenvalues, sp.eigenvectors.unwrap(), sp.residual_norms)
    };
    let mut best = 0;
    for (i, z) in vals.iter().enumerate() {
        if z.abs_() < vals[best].abs_() {
            best = i;
        }
    }
    let degenerate: Vec<Complex<T>> =
        vals.iter().enumerate().filter(|&(i, z)| i != best && z.abs_() <= tol).map(|(_, z)| *z).collect();
    let mut rho: Vec<Complex<T>> = vecs.column(best).iter().copied().collect();
    let tr = rho.iter().fold(cz::<T>(), |a, z| a + *z);
    if tr.abs_() <= T::EPSILON {
        return Err(Error::numeric("steady-state candidate has zero trace"));
    }
    rho.iter_mut().for_each(|z| *z /= tr);
    let occupations = enumerate_basis(params.n_atoms, &s0).into_iter().map(|st| st.k).collect();
    Ok(SteadyState { eigenvalue: vals[best], rho, occupations, degenerate, residual: res[best] })
}

/// A handful of rightmost eigenvalues of one sector.
fn slow_modes<T: Real>(m: &SectorMatrix<T>, budget: &MemoryBudget) -> Result<Vec<Complex<T>>> {
    if m.dim <= DENSE_ANALYSIS_DIM {
        return Ok(full_spectrum(m, false, budget)?.eigenvalues);
    }
    let imc = m.entries.diagonal().iter().fold(T::ZERO, |a, d| a + d.im) / T::from_count(m.dim);
    let sp = target_eigenvalues_near(m, Complex::new(T::HALF, imc), 6, &ArnoldiOptions::default())?;
    Ok(sp.eigenvalues)
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport<T> {
    pub gap: T,
    pub sector: SectorLabel,
    pub eigenvalue: Complex<T>,
}

/// `min |Re l|` over nonzero modes of the sectors with `max s_α = 1` and the steady-state sector.
pub fn dissipative_gap<T: Real>(params: &LiouvParams<T>, budget: &MemoryBudget) -> Result<GapReport<T>> {
    params.validate()?;
    let mut best: Option<GapReport<T>> = None;
    for s in enumerate_sectors(params.n_levels, params.n_atoms) {
        if !(s.is_zero() || s.max_component() == 1) {
            continue;
        }
        let m = build_sector_matrix(params, &s, budget)?;
        let tol = zero_tol(&m);
        let mut vals = slow_modes(&m, budget)?;
        if s.is_zero() {
            // drop the kernel once
            if let Some(i) = (0..vals.len())
                .min_by(|&a, &b| vals[a].abs_().partial_cmp(&vals[b].abs_()).unwrap_or(std::cmp::Ordering::Equal))
            {
                if vals[i].abs_() <= tol {
                    vals.remove(i);
                }
            }
        }
        for z in vals {
            let g = z.re.abs();
            if best.as_ref().is_none_or(|b| g < b.gap) {
                best = Some(GapReport { gap: g, sector: s.clone(), eigenvalue: z });
            }
        }
    }
    best.ok_or_else(|| Error::numeric("no nonzero mode found"))
}

/// All sector spectra of one instance, in sector order.
pub fn all_spectra<T: Real>(params: &LiouvParams<T>, budget: &MemoryBudget) -> Result<Vec<SpectrumResult<T>>> {
    enumerate_sectors(params.n_levels, params.n_atoms)
        .iter()
        .map(|s| full_spectrum(&build_sector_matrix(params, s, budget)?, false, budget))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralChecks {
    /// `max Re l` over every sector.
    pub max_re: f64,
    /// Largest mismatch between `spectrum(s)` and `conj(spectrum(−s))`.
    pub conjugate_defect: f64,
}

pub fn spectral_checks<T: Real>(spectra: &[SpectrumResult<T>]) -> SpectralChecks {
    let by: HashMap<&SectorLabel, &SpectrumResult<T>> = spectra.iter().map(|s| (&s.sector, s)).collect();
    let mut max_re = f64::NEG_INFINITY;
    let mut defect = 0.0f64;
    for sp in spectra {
        max_re = max_re.max(sp.max_re().to_f64_lossy());
        let neg = sp.sector.neg();
        let d = match by.get(&neg) {
            Some(other) => {
                let conj: Vec<Complex<T>> = other.eigenvalues.iter().map(|z| z.conj_()).collect();
                multiset_distance(&sp.eigenvalues, &conj).map_or(f64::INFINITY, |x| x.to_f64_lossy())
            }
            None => f64::INFINITY,
        };
        defect = defect.max(d);
    }
    SpectralChecks { max_re, conjugate_defect: defect }
}

#[derive(Debug, Clone, Serialize)]
pub struct BandRow {
    pub lambda: usize,
    /// `−Γ(λ² + 2λ)`, the real part in sectors with `Σs² = 0` (all sectors when `Γ = Γ₀`).
    pub casimir_re: f64,
    pub expected: usize,
    pub found: usize,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandTable {
    pub rows: Vec<BandRow>,
    pub total: usize,
    /// Eigenvalues whose real part is not on any band.
    pub unassigned: usize,
    pub ok: bool,
}

/// At `p = 0` every real part is `−Γ(λ²+2λ) + (Γ−Γ₀)/2 Σs²` and band `λ` holds `(λ+1)³` states.
pub fn p0_band_check<T: Real>(params: &LiouvParams<T>, budget: &MemoryBudget, tol: f64) -> Result<BandTable> {
    if params.n_levels != 3 {
        return Err(Error::domain("band check needs n_levels = 3"));
    }
    if params.p != T::ZERO {
        return Err(Error::domain("band check needs p = 0"));
    }
    let g = params.gamma.to_f64_lossy();
    let g0 = params.gamma0.to_f64_lossy();
    let l = params.n_atoms;
    let mut found = vec![0usize; l + 1];
    let mut dev = vec![0.0f64; l + 1];
    let mut unassigned = 0;
    let mut total = 0;
    for sp in all_spectra(params, budget)? {
        let shift = (g - g0) / 2.0 * sp.sector.sum_sq() as f64;
        for z in &sp.eigenvalues {
            total += 1;
            let r = z.re.to_f64_lossy() - shift;
            let lam = (-1.0 + (1.0 - r / g).max(0.0).sqrt()).round();
            let d = (r + g * (lam * lam + 2.0 * lam)).abs();
            if lam < 0.0 || lam as usize > l || d > tol {
                unassigned += 1;
                continue;
            }
            found[lam as usize] += 1;
            dev[lam as usize] = dev[lam as usize].max(d);
        }
    }
    let rows: Vec<BandRow> = (0..=l)
        .map(|lam| BandRow {
            lambda: lam,
            casimir_re: -g * (lam * lam + 2 * lam) as f64,
            expected: (lam + 1).pow(3),
            found: found[lam],
            max_deviation: dev[lam],
        })
        .collect();
    let ok = unassigned == 0 && rows.iter().all(|r| r.expected == r.found);
    Ok(BandTable { rows, total, unassigned, ok })
}

/// Sector decomposition of a density matrix on the symmetric irrep.
fn split_density<T: Real>(
    n_levels: usize,
    n_atoms: usize,
    rho: &DMatrix<Complex<T>>,
) -> BTreeMap<SectorLabel, Vec<(usize, usize, Complex<T>)>> {
    let basis = occupation_basis(n_levels, n_atoms);
    let mut out: BTreeMap<SectorLabel, Vec<(usize, usize, Complex<T>)>> = BTreeMap::new();
    for (a, k) in basis.iter().enumerate() {
        for (b, j) in basis.iter().enumerate() {
            let s = SectorLabel(k.iter().zip(j).map(|(x, y)| *x as i64 - *y as i64).collect());
            out.entry(s).or_default().push((a, b, rho[(a, b)]));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Evolution<T> {
    pub times: Vec<T>,
    pub expectation: Vec<Complex<T>>,
    pub trace: Vec<Complex<T>>,
    /// Largest `‖V‖·‖V⁻¹‖` estimate among the diagonalized sectors.
    pub max_condition: T,
    pub defective_warning: bool,
}

/// `Tr(O ρ(t))` with `ρ(t) = e^{Lt} ρ(0)`, by spectral decomposition of every sector `ρ(0)` touches.
///
/// `rho0` and `observable` are matrices on the occupation basis of [`occupation_basis`].
pub fn evolve_expectation<T: Real>(
    params: &LiouvParams<T>,
    rho0: &DMatrix<Complex<T>>,
    observable: &DMatrix<Complex<T>>,
    times: &[T],
    budget: &MemoryBudget,
) -> Result<Evolution<T>> {
    let basis = occupation_basis(params.n_levels, params.n_atoms);
    let d = basis.len();
    if rho0.shape() != (d, d) || observable.shape() != (d, d) {
        return Err(Error::domain(format!("density matrix and observable must be {d}x{d}")));
    }
    let index: HashMap<Vec<i64>, usize> =
        basis.iter().enumerate().map(|(i, k)| (k.iter().map(|&x| x as i64).collect(), i)).collect();
    let mut expectation = vec![cz::<T>(); times.len()];
    let mut trace = vec![cz::<T>(); times.len()];
    let mut max_condition = T::ONE;
    for (s, entries) in split_density(params.n_levels, params.n_atoms, rho0) {
        if entries.iter().all(|(_, _, z)| z.abs_() == T::ZERO) {
            continue;
        }
        let states = enumerate_basis(params.n_atoms, &s);
        let pos: Vec<(usize, usize)> = states.iter().map(|st| (index[&st.k], index[&st.jbar(&s)])).collect();
        let local: HashMap<(usize, usize), usize> = pos.iter().enumerate().map(|(i, &ab)| (ab, i)).collect();
        let mut x0 = vec![cz::<T>(); states.len()];
        for (a, b, z) in entries {
            x0[local[&(a, b)]] = z;
        }
        let m = build_sector_matrix(params, &s, budget)?;
        budget.check_dense(m.dim, "evolution sector")?;
        let (vals, vecs) = dense::eig_dense(&m.to_dense(), true)?;
        let v = vecs.unwrap();
        let lu = v.clone().lu();
        let c = lu
            .solve(&nalgebra::DVector::from_vec(x0))
            .ok_or_else(|| Error::numeric(format!("eigenvector matrix of sector {s} is singular")))?;
        let inv = lu.try_inverse().unwrap_or_else(|| DMatrix::from_element(m.dim, m.dim, cz()));
        let cond = dense::frob(&v) * dense::frob(&inv);
        max_condition = max_condition.max(cond);
        // weights of each mode in Tr(Oρ) and Tr(ρ)
        let mut w_obs = vec![cz::<T>(); m.dim];
        let mut w_tr = vec![cz::<T>(); m.dim];
        for (i, &(a, b)) in pos.iter().enumerate() {
            for k in 0..m.dim {
                w_obs[k] += observable[(b, a)] * v[(i, k)];
                if a == b {
                    w_tr[k] += v[(i, k)];
                }
            }
        }
        for (ti, &t) in times.iter().enumerate() {
            for k in 0..m.dim {
                let z = vals[k] * t;
                let e = Complex::new(z.re.exp() * z.im.cos(), z.re.exp() * z.im.sin()) * c[k];
                expectation[ti] += w_obs[k] * e;
                trace[ti] += w_tr[k] * e;
            }
        }
    }
    Ok(Evolution {
        times: times.to_vec(),
        expectation,
        trace,
        defective_warning: max_condition > T::lit(1e10),
        max_condition,
    })
}

/// `Tr(O ρ)` for a steady state expressed in the sector `(0,…,0)` basis.
pub fn steady_state_expectation<T: Real>(
    params: &LiouvParams<T>,
    ss: &SteadyState<T>,
    observable: &DMatrix<Complex<T>>,
) -> Complex<T> {
    let basis = occupation_basis(params.n_levels, params.n_atoms);
    let index: HashMap<Vec<i64>, usize> =
        basis.iter().enumerate().map(|(i, k)| (k.iter().map(|&x| x as i64).collect(), i)).collect();
    let mut acc = cz::<T>();
    for (k, r) in ss.occupations.iter().zip(&ss.rho) {
        let a = index[k];
        acc += observable[(a, a)] * *r;
    }
    acc
}
