//! Thermodynamic-limit Schwinger-boson predictions and finite-size fits of the gap.
//!
//! After condensing the bosons of level `η`, the quadratic part of the Liouvillian couples each
//! pair `(c_α, d̄_α)`, `α ≠ η`:
//! `(iΔ − γ) d̄d − (iΔ + γ) c̄c + γ(1∓p) c̄d̄ + γ(1±p) cd`, `Δ = ε_α − ε_η`, with the upper signs for
//! `α > η`. The commutator `[L₀, ·]` closes on `(c, d̄)`; its two eigenvalues `iΔ ± |p|γ` give the
//! quasiboson rates `ω_f` (the decaying one) and `ω_e` (minus the growing one).

use std::fmt::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::ed::{build_sector_matrix, rightmost_mode, ArnoldiOptions};
use crate::error::{Error, Result};
use crate::model::{LiouvParams, MemoryBudget, SectorLabel};
use crate::scalar::{cr, Cplx, Real};

type C<T> = Complex<T>;

fn csqrt<T: Real>(z: C<T>) -> C<T> {
    let r = z.abs_();
    if r == T::ZERO {
        return z;
    }
    let re = ((r + z.re) * T::HALF).max(T::ZERO).sqrt();
    let im = ((r - z.re) * T::HALF).max(T::ZERO).sqrt();
    C::new(re, if z.im < T::ZERO { -im } else { im })
}

#[derive(Debug, Clone, Serialize)]
pub struct TLPrediction<T> {
    /// One-based condensate level.
    pub condensate_level: usize,
    /// `−|p|Γ`.
    pub gap_per_atom: T,
    /// `γ = ΓL`.
    pub gamma_tl: T,
    /// `ω_e, ω_f` for each `α ≠ η`, in level order.
    pub quasiboson_rates: Vec<C<T>>,
    pub vacuum_constant_zero: bool,
}

/// `η = 1` for `p > 0` and `η = N` for `p < 0`.
pub fn condensate_level<T: Real>(params: &LiouvParams<T>) -> Result<usize> {
    if params.p > T::ZERO {
        Ok(1)
    } else if params.p < T::ZERO {
        Ok(params.n_levels)
    } else {
        Err(Error::domain("p = 0 has a degenerate thermodynamic limit and no gap prediction"))
    }
}

/// Dynamical matrix of `[L₀, ·]` on `(c_α, d̄_α)` (levels one-based).
pub fn quadratic_block<T: Real>(alpha: usize, params: &LiouvParams<T>, eta: usize) -> Result<DMatrix<C<T>>> {
    let n = params.n_levels;
    if alpha == eta || alpha == 0 || eta == 0 || alpha > n || eta > n {
        return Err(Error::domain(format!("need distinct levels in 1..={n}, got α={alpha}, η={eta}")));
    }
    let g = params.gamma_tl();
    let i = C::new(T::ZERO, T::ONE);
    let delta = params.eps[alpha - 1] - params.eps[eta - 1];
    let num_d = i * delta - cr(g);
    let num_c = -(i * delta + cr(g));
    let (pair_bar, pair) = if alpha > eta {
        (g * (T::ONE - params.p), g * (T::ONE + params.p))
    } else {
        (g * (T::ONE + params.p), g * (T::ONE - params.p))
    };
    // [c̄c, c] = −c, [c̄d̄, c] = −d̄, [d̄d, d̄] = d̄, [cd, d̄] = c
    Ok(DMatrix::from_row_slice(2, 2, &[-num_c, cr(-pair_bar), cr(pair), num_d]))
}

/// The two quasiboson rates `(ω_e, ω_f)` of level `alpha` above the condensate `eta`.
pub fn quadratic_block_rates<T: Real>(alpha: usize, params: &LiouvParams<T>, eta: usize) -> Result<(C<T>, C<T>)> {
    let m = quadratic_block(alpha, params, eta)?;
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = csqrt(tr * tr - det * cr(T::lit(4.0)));
    let scale = T::ONE + tr.abs_() + det.abs_().sqrt();
    if disc.abs_() <= T::lit(1e3) * T::EPSILON * scale {
        return Err(Error::numeric(format!("quadratic block of level {alpha} is defective")));
    }
    let l1 = (tr + disc) * cr(T::HALF);
    let l2 = (tr - disc) * cr(T::HALF);
    let (decay, grow) = if l1.re < l2.re { (l1, l2) } else { (l2, l1) };
    Ok((-grow, decay))
}

pub fn tl_prediction<T: Real>(params: &LiouvParams<T>) -> Result<TLPrediction<T>> {
    params.validate()?;
    let eta = condensate_level(params)?;
    let mut rates = Vec::with_capacity(2 * (params.n_levels - 1));
    for a in (1..=params.n_levels).filter(|&a| a != eta) {
        let (e, f) = quadratic_block_rates(a, params, eta)?;
        rates.push(e);
        rates.push(f);
    }
    Ok(TLPrediction {
        condensate_level: eta,
        gap_per_atom: -params.p.abs() * params.gamma,
        gamma_tl: params.gamma_tl(),
        quasiboson_rates: rates,
        vacuum_constant_zero: true,
    })
}

/// One finite-size point: real part of the slowest mode divided by `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub n_atoms: usize,
    pub gap_per_atom: f64,
    /// Eigensolver residual divided by `L`.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapScalingFit {
    pub sector: SectorLabel,
    /// Coefficients of `1, 1/L, …, 1/L⁴`.
    pub coefficients: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: Vec<GapSample>,
    /// Root mean square of the fit residuals.
    pub fit_residual: f64,
    /// Condition number of the centered, scaled design matrix.
    pub condition_number: f64,
    /// True when the standard errors come from the scatter of the residuals, false when they
    /// propagate the eigensolver uncertainties (no spare degrees of freedom).
    pub stderr_from_scatter: bool,
}

pub const FIT_ORDER: usize = 4;

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64)
}

/// Least-squares polynomial of order four in `1/L`, regressed in the centered and scaled variable.
pub fn gap_scaling_fit(sector: SectorLabel, samples: &[GapSample]) -> Result<GapScalingFit> {
    let k = FIT_ORDER + 1;
    let mut ls: Vec<usize> = samples.iter().map(|s| s.n_atoms).collect();
    ls.sort_unstable();
    ls.dedup();
    if ls.len() < k || ls.len() != samples.len() || ls[0] == 0 {
        return Err(Error::domain(format!("fit needs at least {k} distinct positive sizes")));
    }
    let n = samples.len();
    let x: Vec<f64> = samples.iter().map(|s| 1.0 / s.n_atoms as f64).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    let half = x.iter().fold(0.0f64, |a, v| a.max((v - mean).abs()));
    let design = DMatrix::from_fn(n, k, |r, c| ((x[r] - mean) / half).powi(c as i32));
    let y = DVector::from_iterator(n, samples.iter().map(|s| s.gap_per_atom));
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 1e-14 * smax) {
        return Err(Error::numeric("rank-deficient design matrix"));
    }
    let b = svd.solve(&y, 0.0).map_err(|e| Error::numeric(e.to_string()))?;
    let resid = &y - &design * &b;
    let dof = n - k;
    let xtx_inv = |w: &DVector<f64>| -> Result<DMatrix<f64>> {
        let mut a = design.transpose() * DMatrix::from_diagonal(w) * &design;
        a = a.try_inverse().ok_or_else(|| Error::numeric("singular normal equations"))?;
        Ok(a)
    };
    let (cov_b, from_scatter) = if dof > 0 {
        let s2 = resid.norm_squared() / dof as f64;
        (xtx_inv(&DVector::from_element(n, 1.0))? * s2, true)
    } else {
        let w = DVector::from_iterator(n, samples.iter().map(|s| 1.0 / s.sigma.max(f64::EPSILON).powi(2)));
        (xtx_inv(&w)?, false)
    };
    // a_j = Σ_k b_k h^{−k} C(k, j) (−m)^{k−j}
    let t = DMatrix::from_fn(k, k, |j, c| {
        if c < j {
            0.0
        } else {
            binom(c, j) * (-mean).powi((c - j) as i32) / half.powi(c as i32)
        }
    });
    let a = &t * &b;
    let cov_a = &t * cov_b * t.transpose();
    Ok(GapScalingFit {
        sector,
        coefficients: a.iter().copied().collect(),
        stderr: (0..k).map(|i| cov_a[(i, i)].max(0.0).sqrt()).collect(),
        samples: samples.to_vec(),
        fit_residual: (resid.norm_squared() / n as f64).sqrt(),
        condition_number: smax / smin,
        stderr_from_scatter: from_scatter,
    })
}

impl GapScalingFit {
    /// `Δ/L ≈ −pΓ + (Γ/L)(±1/2 − 3p/2)` for the sectors `(1,−1,0)` (upper sign) and `(1,0,−1)`.
    pub fn expected_leading(sector: &SectorLabel, p: f64, gamma: f64) -> Option<(f64, f64)> {
        match sector.0.as_slice() {
            [1, -1, 0] => Some((-p * gamma, gamma * (0.5 - 1.5 * p))),
            [1, 0, -1] => Some((-p * gamma, gamma * (-0.5 - 1.5 * p))),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    /// Samples and fitted curve, one row per size: `n_atoms,inv_l,gap_per_atom,fit`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_atoms,inv_l,gap_per_atom,fit\n");
        for s in &self.samples {
            let x = 1.0 / s.n_atoms as f64;
            let f: f64 = self.coefficients.iter().enumerate().map(|(i, c)| c * x.powi(i as i32)).sum();
            let _ = writeln!(out, "{},{:.15e},{:.15e},{:.15e}", s.n_atoms, x, s.gap_per_atom, f);
        }
        out
    }
}

/// Slowest mode of `sector` at `L = params.n_atoms`, per atom.
pub fn gap_sample<T: Real>(
    params: &LiouvParams<T>,
    sector: &SectorLabel,
    budget: &MemoryBudget,
    opts: &ArnoldiOptions,
) -> Result<GapSample> {
    let m = build_sector_matrix(params, sector, budget)?;
    let (z, res) = rightmost_mode(&m, opts)?;
    let l = params.n_atoms as f64;
    Ok(GapSample { n_atoms: params.n_atoms, gap_per_atom: z.re.to_f64_lossy() / l, sigma: res.to_f64_lossy() / l })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtrapolationRow {
    pub n_atoms: usize,
    pub sector: SectorLabel,
    pub exact_re: f64,
    pub expansion: f64,
    pub delta: f64,
}

/// Exact slowest-mode real parts of `(1,−1,0)` and `(1,0,−1)` against `−pΓL + Γ(±1/2 − 3p/2)`.
pub fn finite_size_extrapolation_check<T: Real>(
    params: &LiouvParams<T>,
    sizes: &[usize],
    budget: &MemoryBudget,
) -> Result<Vec<ExtrapolationRow>> {
    if params.n_levels != 3 {
        return Err(Error::domain("extrapolation check is defined for n_levels = 3"));
    }
    let p = params.p.to_f64_lossy();
    let g = params.gamma.to_f64_lossy();
    let mut out = Vec::new();
    for &l in sizes {
        let pl = params.with_atoms(l);
        for s in [SectorLabel(vec![1, -1, 0]), SectorLabel(vec![1, 0, -1])] {
            let sample = gap_sample(&pl, &s, budget, &ArnoldiOptions::default())?;
            let (c0, c1) = GapScalingFit::expected_leading(&s, p, g).expect("known sector");
            let exact_re = sample.gap_per_atom * l as f64;
            let expansion = c0 * l as f64 + c1;
            out.push(ExtrapolationRow { n_atoms: l, sector: s, exact_re, expansion, delta: exact_re - expansion });
        }
    }
    Ok(out)
}
