//! Damped Newton iteration in the exponential chart.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::residual::{eigenvalue_from_q, q_to_x, x_to_q, QSystem};
use crate::error::{Error, Result};
use crate::model::{spectral_counts, LiouvParams, SectorLabel};
use crate::scalar::{norm2, norm_inf, Cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target for `‖F‖∞`; `None` means `1e−10·L`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// Smallest allowed separation of interacting roots (and of roots from fixed poles) in the `q` chart.
    pub collision_tol: f64,
    pub armijo: f64,
    pub min_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: None, max_iter: 100, collision_tol: 1e-8, armijo: 1e-4, min_step: 1e-10 }
    }
}

impl SolverOptions {
    pub fn tol_for<T: Real>(&self, n_atoms: usize) -> T {
        T::lit(self.tol.unwrap_or(1e-10 * n_atoms as f64))
    }
}

/// A root set of the equations for one sector together with its certificate.
#[derive(Debug, Clone)]
pub struct SpectralSolution<T> {
    pub sector: SectorLabel,
    /// Roots in the `q = e^{2iE}` chart, one vector per family.
    pub q: Vec<Vec<Complex<T>>>,
    /// `‖F‖∞` of the exponential-chart residual.
    pub residual_norm: T,
    pub eigenvalue: Complex<T>,
    pub converged: bool,
    pub iterations: usize,
    /// `‖J⁻¹‖∞ · ‖F‖∞`, a first-order bound on the root error.
    pub sensitivity: T,
    pub params: LiouvParams<T>,
}

impl<T: Real> SpectralSolution<T> {
    /// Rational roots `cot E` of family `a` (zero-based).
    pub fn roots_x(&self, a: usize) -> Vec<Complex<T>> {
        self.q[a].iter().map(|&q| q_to_x(q)).collect()
    }

    /// `e_i = cot E_i^{(1)}`.
    pub fn e(&self) -> Vec<Complex<T>> {
        self.roots_x(0)
    }

    /// `ω_i = cot E_i^{(N−1)}`; for two levels this is the same family as [`Self::e`].
    pub fn w(&self) -> Vec<Complex<T>> {
        self.roots_x(self.q.len() - 1)
    }

    pub fn flat_q(&self) -> Vec<Complex<T>> {
        self.q.iter().flatten().copied().collect()
    }
}

pub(crate) fn split<T: Copy>(flat: &[T], counts: &[usize]) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(counts.len());
    let mut o = 0;
    for &m in counts {
        out.push(flat[o..o + m].to_vec());
        o += m;
    }
    out
}

fn solve_linear<T: Real>(j: DMatrix<Complex<T>>, rhs: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
    let b = DVector::from_column_slice(rhs);
    let x = j.lu().solve(&b)?;
    let v: Vec<Complex<T>> = x.iter().copied().collect();
    v.iter().all(|z| z.is_finite_()).then_some(v)
}

fn inverse_norm<T: Real>(j: DMatrix<Complex<T>>) -> T {
    match j.try_inverse() {
        Some(inv) => (0..inv.nrows())
            .map(|r| inv.row(r).iter().fold(T::ZERO, |a, z| a + z.abs_()))
            .fold(T::ZERO, |a, b| a.max(b)),
        None => T::ONE / T::EPSILON,
    }
}

/// Nearest interacting pair, for diagnostics.
fn nearest_pair<T: Real>(sys: &QSystem<T>, q: &[Complex<T>]) -> String {
    let fam = sys.families();
    let mut best = (T::ONE / T::EPSILON, 0, 0);
    for a in 0..q.len() {
        for b in (a + 1)..q.len() {
            let d = (q[a] - q[b]).abs_();
            if d < best.0 {
                best = (d, a, b);
            }
        }
    }
    if q.len() < 2 {
        return "fewer than two roots".into();
    }
    format!(
        "nearest roots {} (family {}) and {} (family {}) at |Δq| = {:e}",
        best.1,
        fam[best.1] + 1,
        best.2,
        fam[best.2] + 1,
        best.0.to_f64_lossy()
    )
}

/// Newton iteration from the exponential-chart guess `q0` (flattened, family order).
pub fn solve_q<T: Real>(
    params: &LiouvParams<T>,
    sector: &SectorLabel,
    q0: &[Complex<T>],
    opts: &SolverOptions,
) -> Result<SpectralSolution<T>> {
    let sys = QSystem::new(params, sector)?;
    if q0.len() != sys.len() {
        return Err(Error::domain(format!(
            "sector {sector} needs {} roots ({:?}), guess has {}",
            sys.len(),
            sys.counts,
            q0.len()
        )));
    }
    if !q0.iter().all(|z| z.is_finite_()) {
        return Err(Error::domain("non-finite initial guess"));
    }
    let tol = opts.tol_for::<T>(params.n_atoms);
    let guard = T::lit(opts.collision_tol);
    let mut q = q0.to_vec();
    let mut f = sys.residual(&q);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let fi = norm_inf(&f);
        if !(fi.to_f64_lossy().is_finite()) {
            break;
        }
        if fi <= tol {
            converged = true;
            break;
        }
        iterations += 1;
        let rhs: Vec<Complex<T>> = f.iter().map(|z| -*z).collect();
        let dx = solve_linear(sys.jacobian(&q), &rhs)
            .ok_or_else(|| Error::Singularity(format!("singular Jacobian; {}", nearest_pair(&sys, &q))))?;
        let f2 = norm2(&f);
        let mut t = T::ONE;
        let mut accepted = None;
        while t >= T::lit(opts.min_step) {
            let qn: Vec<Complex<T>> = q.iter().zip(&dx).map(|(a, d)| *a + *d * t).collect();
            if sys.min_separation(&qn) > guard {
                let fnew = sys.residual(&qn);
                let n2 = norm2(&fnew);
                if n2.to_f64_lossy().is_finite() && n2 < f2 * (T::ONE - T::lit(opts.armijo) * t) {
                    accepted = Some((qn, fnew));
                    break;
                }
            }
            t *= T::HALF;
        }
        match accepted {
            Some((qn, fnew)) => {
                q = qn;
                f = fnew;
            }
            None => break,
        }
    }
    let residual_norm = norm_inf(&f);
    if !converged && residual_norm <= tol {
        converged = true;
    }
    let counts = spectral_counts(params.n_atoms, sector);
    let blocks = split(&q, &counts);
    let eigenvalue = eigenvalue_from_q(&blocks[0], &blocks[blocks.len() - 1], params, sector);
    let sensitivity = inverse_norm(sys.jacobian(&q)) * residual_norm;
    Ok(SpectralSolution {
        sector: sector.clone(),
        q: blocks,
        residual_norm,
        eigenvalue,
        converged,
        iterations,
        sensitivity,
        params: params.clone(),
    })
}

/// Newton from a guess in rational variables, one vector per family.
pub fn solve_x<T: Real>(
    params: &LiouvParams<T>,
    sector: &SectorLabel,
    x0: &[Vec<Complex<T>>],
    opts: &SolverOptions,
) -> Result<SpectralSolution<T>> {
    let q0: Vec<Complex<T>> = x0.iter().flatten().map(|&x| x_to_q(x)).collect();
    solve_q(params, sector, &q0, opts)
}

/// Re-solves an existing (possibly perturbed) solution with new parameters of the same sector.
pub fn solve<T: Real>(
    guess: &SpectralSolution<T>,
    params: &LiouvParams<T>,
    opts: &SolverOptions,
) -> Result<SpectralSolution<T>> {
    solve_q(params, &guess.sector, &guess.flat_q(), opts)
}
