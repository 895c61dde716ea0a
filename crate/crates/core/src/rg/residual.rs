//! Residuals and Jacobians of the Richardson-Gaudin equations in three charts.
//!
//! * rational variables `x = cot E` (`e_i`, `ω_i` for three levels, `c_i` for two),
//! * trigonometric variables `E` (any `N`, evaluation only),
//! * the exponential chart `q = e^{2iE} = (x+i)/(x−i)` used by the solver.
//!
//! In the trigonometric form, family `a` obeys
//! `Σ_b Σ'_{i'} A_ba cot(E_{i'}^{(b)} − E_i^{(a)}) + δ_{a,1} L cot E_i − δ_{a,N−1} L cot(z − E_i) = −2i`
//! with `A` the su(N) Cartan matrix. Multiplying the rational residual by `x² + 1` gives the trigonometric one.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{effective_charges, spectral_counts, LiouvParams, SectorLabel};
use crate::scalar::{ci, cr, cz, Cplx, Real};

type C<T> = Complex<T>;

fn one<T: Real>() -> C<T> {
    cr(T::ONE)
}

/// Scale for collision tests: `max(1, 1/|p|)`.
pub fn collision_scale<T: Real>(p: T) -> T {
    if p == T::ZERO {
        T::ONE
    } else {
        T::ONE.max(T::ONE / p.abs())
    }
}

fn check_pair<T: Real>(a: C<T>, b: C<T>, tol: T, what: &str, i: usize, j: usize) -> Result<()> {
    if (a - b).abs_() <= tol {
        return Err(Error::Singularity(format!(
            "{what} {i} and {j} coincide (|Δ| = {:e})",
            (a - b).abs_().to_f64_lossy()
        )));
    }
    Ok(())
}

fn check_counts(params_n: usize, n_atoms: usize, sector: &SectorLabel, lens: &[usize]) -> Result<()> {
    sector.validate(params_n, n_atoms)?;
    let m = spectral_counts(n_atoms, sector);
    if m != lens {
        return Err(Error::domain(format!("sector {sector} needs {m:?} spectral parameters, got {lens:?}")));
    }
    Ok(())
}

fn pole<T: Real>(p: T) -> C<T> {
    Complex::new(T::ZERO, T::ONE / p)
}

/// Three-level rational residual, `M₁ + M₂` components (e block first).
pub fn residual_su3<T: Real>(
    e: &[C<T>],
    w: &[C<T>],
    params: &LiouvParams<T>,
    sector: &SectorLabel,
) -> Result<Vec<C<T>>> {
    if params.n_levels != 3 {
        return Err(Error::domain("residual_su3 needs n_levels = 3"));
    }
    check_counts(3, params.n_atoms, sector, &[e.len(), w.len()])?;
    if params.p == T::ZERO {
        return Err(Error::domain("rational equations need p ≠ 0"));
    }
    let [qpe, qme, qpw, qmw] = effective_charges::<T>(sector)?;
    let tol = T::lit(1e-14) * collision_scale(params.p);
    let (i, c, l) = (ci::<T>(), pole(params.p), T::from_count(params.n_atoms));
    let mut out = Vec::with_capacity(e.len() + w.len());
    for (a, &x) in e.iter().enumerate() {
        let mut f = cz::<T>();
        for (b, &y) in e.iter().enumerate() {
            if a != b {
                check_pair(x, y, tol, "e", a, b)?;
                f += cr(T::TWO) / (x - y);
            }
        }
        for (b, &y) in w.iter().enumerate() {
            check_pair(x, y, tol, "e/ω", a, b)?;
            f -= one::<T>() / (x - y);
        }
        check_pair(x, i, tol, "e/+i", a, 0)?;
        check_pair(x, -i, tol, "e/−i", a, 0)?;
        f += cr(qpe) / (x - i) + cr(qme) / (x + i);
        out.push(f);
    }
    for (a, &x) in w.iter().enumerate() {
        let mut f = cz::<T>();
        for (b, &y) in w.iter().enumerate() {
            if a != b {
                check_pair(x, y, tol, "ω", a, b)?;
                f += cr(T::TWO) / (x - y);
            }
        }
        for &y in e {
            f -= one::<T>() / (x - y);
        }
        check_pair(x, i, tol, "ω/+i", a, 0)?;
        check_pair(x, -i, tol, "ω/−i", a, 0)?;
        check_pair(x, c, tol, "ω/(i/p)", a, 0)?;
        f += cr(qpw) / (x - i) + cr(qmw) / (x + i) - cr(l) / (x - c);
        out.push(f);
    }
    Ok(out)
}

/// Analytic Jacobian of [`residual_su3`] with respect to `(e, ω)`.
pub fn jacobian_su3<T: Real>(
    e: &[C<T>],
    w: &[C<T>],
    params: &LiouvParams<T>,
    sector: &SectorLabel,
) -> Result<DMatrix<C<T>>> {
    residual_su3(e, w, params, sector)?;
    let [qpe, qme, qpw, qmw] = effective_charges::<T>(sector)?;
    let (i, c, l) = (ci::<T>(), pole(params.p), T::from_count(params.n_atoms));
    let (m1, m2) = (e.len(), w.len());
    let sq = |z: C<T>| one::<T>() / (z * z);
    let mut j = DMatrix::from_element(m1 + m2, m1 + m2, cz::<T>());
    for a in 0..m1 {
        let x = e[a];
        let mut d = -cr::<T>(qpe) * sq(x - i) - cr(qme) * sq(x + i);
        for b in 0..m1 {
            if a != b {
                let t = sq(x - e[b]) * T::TWO;
                d -= t;
                j[(a, b)] = t;
            }
        }
        for b in 0..m2 {
            let t = sq(x - w[b]);
            d += t;
            j[(a, m1 + b)] = -t;
        }
        j[(a, a)] = d;
    }
    for a in 0..m2 {
        let x = w[a];
        let mut d = -cr::<T>(qpw) * sq(x - i) - cr(qmw) * sq(x + i) + cr(l) * sq(x - c);
        for b in 0..m2 {
            if a != b {
                let t = sq(x - w[b]) * T::TWO;
                d -= t;
                j[(m1 + a, m1 + b)] = t;
            }
        }
        for b in 0..m1 {
            let t = sq(x - e[b]);
            d += t;
            j[(m1 + a, b)] = -t;
        }
        j[(m1 + a, m1 + a)] = d;
    }
    Ok(j)
}

/// Two-level rational residual in `c_i = cot E_i`, charges `2 + s₁` at `+i`, `s₁` at `−i`, `−L` at `i/p`.
pub fn residual_su2<T: Real>(c: &[C<T>], params: &LiouvParams<T>, sector: &SectorLabel) -> Result<Vec<C<T>>> {
    if params.n_levels != 2 {
        return Err(Error::domain("residual_su2 needs n_levels = 2"));
    }
    check_counts(2, params.n_atoms, sector, &[c.len()])?;
    if params.p == T::ZERO {
        return Err(Error::domain("rational equations need p ≠ 0"));
    }
    let s1 = T::from_int(sector.0[0]);
    let (i, z, l) = (ci::<T>(), pole(params.p), T::from_count(params.n_atoms));
    let tol = T::lit(1e-14) * collision_scale(params.p);
    let mut out = Vec::with_capacity(c.len());
    for (a, &x) in c.iter().enumerate() {
        let mut f = cz::<T>();
        for (b, &y) in c.iter().enumerate() {
            if a != b {
                check_pair(x, y, tol, "c", a, b)?;
                f += cr(T::TWO) / (x - y);
            }
        }
        check_pair(x, z, tol, "c/(i/p)", a, 0)?;
        f += cr(T::TWO + s1) / (x - i) + cr(s1) / (x + i) - cr(l) / (x - z);
        out.push(f);
    }
    Ok(out)
}

pub fn jacobian_su2<T: Real>(c: &[C<T>], params: &LiouvParams<T>, sector: &SectorLabel) -> Result<DMatrix<C<T>>> {
    residual_su2(c, params, sector)?;
    let s1 = T::from_int(sector.0[0]);
    let (i, z, l) = (ci::<T>(), pole(params.p), T::from_count(params.n_atoms));
    let sq = |u: C<T>| one::<T>() / (u * u);
    let m = c.len();
    let mut j = DMatrix::from_element(m, m, cz::<T>());
    for a in 0..m {
        let x = c[a];
        let mut d = -cr::<T>(T::TWO + s1) * sq(x - i) - cr(s1) * sq(x + i) + cr(l) * sq(x - z);
        for b in 0..m {
            if a != b {
                let t = sq(x - c[b]) * T::TWO;
                d -= t;
                j[(a, b)] = t;
            }
        }
        j[(a, a)] = d;
    }
    Ok(j)
}

/// Complex cotangent from real trigonometric and hyperbolic functions.
pub fn cot_c<T: Real>(z: C<T>) -> C<T> {
    let (a, b) = (z.re, z.im);
    let sin = Complex::new(a.sin() * b.cosh(), a.cos() * b.sinh());
    let cos = Complex::new(a.cos() * b.cosh(), -(a.sin() * b.sinh()));
    cos / sin
}

/// su(N) Cartan matrix entry for zero-based family indices.
pub fn cartan(a: usize, b: usize) -> i64 {
    if a == b {
        2
    } else if a.abs_diff(b) == 1 {
        -1
    } else {
        0
    }
}

/// Trigonometric residual for any `N`; `big_e[a]` holds family `a+1`.
pub fn residual_sun_general<T: Real>(
    big_e: &[Vec<C<T>>],
    params: &LiouvParams<T>,
    sector: &SectorLabel,
) -> Result<Vec<Vec<C<T>>>> {
    let n = params.n_levels;
    let lens: Vec<usize> = big_e.iter().map(|v| v.len()).collect();
    check_counts(n, params.n_atoms, sector, &lens)?;
    let z = super::RGMappingConstants::new(params)?.z;
    let l = T::from_count(params.n_atoms);
    let tol = T::lit(1e-14);
    let mut out = Vec::with_capacity(n - 1);
    for a in 0..n - 1 {
        let mut fam = Vec::with_capacity(big_e[a].len());
        for (i, &x) in big_e[a].iter().enumerate() {
            let mut f = cz::<T>();
            for b in 0..n - 1 {
                let cab = cartan(b, a);
                if cab == 0 {
                    continue;
                }
                for (j, &y) in big_e[b].iter().enumerate() {
                    if a == b && i == j {
                        continue;
                    }
                    check_pair(x, y, tol, "E", i, j)?;
                    f += cot_c(y - x) * T::from_int(cab);
                }
            }
            if a == 0 {
                f += cot_c(x) * l;
            }
            if a == n - 2 {
                f -= cot_c(z - x) * l;
            }
            fam.push(f + ci::<T>() * T::TWO);
        }
        out.push(fam);
    }
    Ok(out)
}

/// `q = (x + i)/(x − i)`; the point at infinity maps to `1`.
pub fn x_to_q<T: Real>(x: C<T>) -> C<T> {
    (x + ci::<T>()) / (x - ci::<T>())
}

/// `x = i(q + 1)/(q − 1)`.
pub fn q_to_x<T: Real>(q: C<T>) -> C<T> {
    ci::<T>() * (q + one::<T>()) / (q - one::<T>())
}

/// The equations in the exponential chart for one sector, all families flattened.
#[derive(Debug, Clone)]
pub struct QSystem<T> {
    pub counts: Vec<usize>,
    pub l: T,
    pub q_z: T,
}

impl<T: Real> QSystem<T> {
    pub fn new(params: &LiouvParams<T>, sector: &SectorLabel) -> Result<Self> {
        sector.validate(params.n_levels, params.n_atoms)?;
        let m = super::RGMappingConstants::new(params)?;
        Ok(QSystem { counts: spectral_counts(params.n_atoms, sector), l: T::from_count(params.n_atoms), q_z: m.q_z() })
    }

    pub fn len(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Family index of each flattened position.
    pub fn families(&self) -> Vec<usize> {
        self.counts.iter().enumerate().flat_map(|(a, &m)| std::iter::repeat_n(a, m)).collect()
    }

    pub fn residual(&self, q: &[C<T>]) -> Vec<C<T>> {
        let fam = self.families();
        let last = self.counts.len() - 1;
        let (i, qz, l) = (ci::<T>(), cr(self.q_z), self.l);
        let mut out = vec![cz::<T>(); q.len()];
        for (k, &qa) in q.iter().enumerate() {
            let a = fam[k];
            let mut f = i * T::TWO;
            for (kk, &qb) in q.iter().enumerate() {
                if kk == k {
                    continue;
                }
                let cab = cartan(fam[kk], a);
                if cab != 0 {
                    f += i * (qb + qa) / (qb - qa) * T::from_int(cab);
                }
            }
            if a == 0 {
                f += i * (qa + one::<T>()) / (qa - one::<T>()) * l;
            }
            if a == last {
                f -= i * (qz + qa) / (qz - qa) * l;
            }
            out[k] = f;
        }
        out
    }

    pub fn jacobian(&self, q: &[C<T>]) -> DMatrix<C<T>> {
        let fam = self.families();
        let last = self.counts.len() - 1;
        let (i, qz, l) = (ci::<T>(), cr(self.q_z), self.l);
        let n = q.len();
        let mut j = DMatrix::from_element(n, n, cz::<T>());
        for k in 0..n {
            let (a, qa) = (fam[k], q[k]);
            let mut d = cz::<T>();
            for kk in 0..n {
                if kk == k {
                    continue;
                }
                let cab = cartan(fam[kk], a);
                if cab == 0 {
                    continue;
                }
                let qb = q[kk];
                let den = (qb - qa) * (qb - qa);
                let w = T::from_int(cab) * T::TWO;
                d += i * qb / den * w;
                j[(k, kk)] = -(i * qa / den * w);
            }
            if a == 0 {
                d -= i * T::TWO * l / ((qa - one::<T>()) * (qa - one::<T>()));
            }
            if a == last {
                d -= i * T::TWO * l * qz / ((qz - qa) * (qz - qa));
            }
            j[(k, k)] = d;
        }
        j
    }

    /// Smallest separation among pairs that interact, and distance to the fixed poles.
    pub fn min_separation(&self, q: &[C<T>]) -> T {
        let fam = self.families();
        let last = self.counts.len() - 1;
        let mut m = T::ONE / T::EPSILON;
        for k in 0..q.len() {
            for kk in (k + 1)..q.len() {
                if cartan(fam[k], fam[kk]) != 0 {
                    m = m.min((q[k] - q[kk]).abs_());
                }
            }
            if fam[k] == 0 {
                m = m.min((q[k] - one::<T>()).abs_());
            }
            if fam[k] == last {
                m = m.min((q[k] - cr(self.q_z)).abs_());
            }
        }
        m
    }
}

/// Constant part `−iΣε_α s_α − Γ(L² + (N−1)L) + (Γ−Γ₀)/2 Σ s_α²` of every eigenvalue in a sector.
pub fn eigenvalue_constant<T: Real>(params: &LiouvParams<T>, sector: &SectorLabel) -> C<T> {
    let l = T::from_count(params.n_atoms);
    let n = T::from_count(params.n_levels);
    let mut es = T::ZERO;
    for (e, s) in params.eps.iter().zip(&sector.0) {
        es += *e * T::from_int(*s);
    }
    let re = -params.gamma * (l * l + (n - T::ONE) * l)
        + (params.gamma - params.gamma0) * T::HALF * T::from_int(sector.sum_sq());
    Complex::new(re, -es)
}

/// Eigenvalue from exponential-chart roots: `cot E = i(q+1)/(q−1)`, `cot(z−E) = i(q_z+q)/(q_z−q)`.
pub fn eigenvalue_from_q<T: Real>(
    q_first: &[C<T>],
    q_last: &[C<T>],
    params: &LiouvParams<T>,
    sector: &SectorLabel,
) -> C<T> {
    let qz = cr((T::ONE + params.p) / (T::ONE - params.p));
    let i = ci::<T>();
    let mut acc = cz::<T>();
    for &q in q_first {
        acc += i * (q + one::<T>()) / (q - one::<T>());
    }
    for &q in q_last {
        acc += i * (qz + q) / (qz - q);
    }
    let l = T::from_count(params.n_atoms);
    eigenvalue_constant(params, sector) - i * acc * (l * params.gamma * params.p * T::HALF)
}

/// Eigenvalue from rational roots: `l_RG = −iLΓp/2 [Σ e_i + Σ (iω_i + p)/(pω_i − i)]`.
/// For two levels pass the same slice twice.
pub fn eigenvalue_from_x<T: Real>(
    e: &[C<T>],
    w: &[C<T>],
    params: &LiouvParams<T>,
    sector: &SectorLabel,
) -> Result<C<T>> {
    let (i, p) = (ci::<T>(), params.p);
    let mut acc = cz::<T>();
    for &x in e {
        acc += x;
    }
    for (k, &x) in w.iter().enumerate() {
        let den = x * p - i;
        if den.abs_() <= T::lit(1e-14) {
            return Err(Error::Singularity(format!("ω {k} sits on the pole i/p")));
        }
        acc += (i * x + cr(p)) / den;
    }
    let l = T::from_count(params.n_atoms);
    Ok(eigenvalue_constant(params, sector) - i * acc * (l * params.gamma * p * T::HALF))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rnd(rng: &mut ChaCha8Rng, n: usize) -> Vec<C<f64>> {
        (0..n).map(|_| Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect()
    }

    #[test]
    fn charts_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = LiouvParams::<f64>::new(3, 5, vec![0.1, 0.0, -0.3], 1.0, 0.7, 0.37).unwrap();
        for s in [vec![0, 0, 0], vec![1, -1, 0], vec![1, 0, -1], vec![-2, 1, 1]] {
            let sec = SectorLabel(s);
            let m = spectral_counts(5, &sec);
            let x = rnd(&mut rng, m[0] + m[1]);
            let (e, w) = x.split_at(m[0]);
            let rat = residual_su3(e, w, &params, &sec).unwrap();
            let sys = QSystem::new(&params, &sec).unwrap();
            let q: Vec<C<f64>> = x.iter().map(|&v| x_to_q(v)).collect();
            let fq = sys.residual(&q);
            let big: Vec<Vec<C<f64>>> =
                vec![e.iter().map(|v| acot(*v)).collect(), w.iter().map(|v| acot(*v)).collect()];
            let ft = residual_sun_general(&big, &params, &sec).unwrap();
            let ft: Vec<C<f64>> = ft.into_iter().flatten().collect();
            for k in 0..x.len() {
                let scaled = rat[k] * (x[k] * x[k] + 1.0);
                assert!((scaled - fq[k]).norm() < 1e-10 * (1.0 + fq[k].norm()), "{k}");
                assert!((ft[k] - fq[k]).norm() < 1e-10 * (1.0 + fq[k].norm()), "{k}");
            }
        }
    }

    fn acot(x: C<f64>) -> C<f64> {
        // E with cot E = x: E = (1/2i) log((x+i)/(x−i))
        let q = (x + Complex::i()) / (x - Complex::i());
        q.ln() / (2.0 * Complex::i())
    }

    #[test]
    fn su2_charts_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = LiouvParams::<f64>::new(2, 4, vec![0.3, -0.3], 1.0, 0.5, -0.45).unwrap();
        for s1 in [0i64, 1, 2, -1] {
            let sec = SectorLabel(vec![s1, -s1]);
            let m = (4 - s1) as usize;
            let x = rnd(&mut rng, m);
            let rat = residual_su2(&x, &params, &sec).unwrap();
            let big = vec![x.iter().map(|v| acot(*v)).collect::<Vec<_>>()];
            let ft = residual_sun_general(&big, &params, &sec).unwrap();
            for k in 0..m {
                let scaled = rat[k] * (x[k] * x[k] + 1.0);
                assert!((scaled - ft[0][k]).norm() < 1e-10 * (1.0 + scaled.norm()));
            }
        }
    }

    fn fd_check(f: &dyn Fn(&[C<f64>]) -> Vec<C<f64>>, j: &DMatrix<C<f64>>, x: &[C<f64>]) -> f64 {
        let h = 1e-7;
        let f0 = f(x);
        let mut worst: f64 = 0.0;
        for k in 0..x.len() {
            let mut xp = x.to_vec();
            xp[k] += h;
            let f1 = f(&xp);
            for r in 0..x.len() {
                let fd = (f1[r] - f0[r]) / h;
                worst = worst.max((fd - j[(r, k)]).norm() / (1.0 + j[(r, k)].norm()));
            }
        }
        worst
    }

    #[test]
    fn jacobians_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = LiouvParams::<f64>::su3(3, [0.0; 3], 0.4).unwrap();
        let sec = SectorLabel(vec![1, -1, 0]);
        let x = rnd(&mut rng, 5);
        let j = jacobian_su3(&x[..2], &x[2..], &params, &sec).unwrap();
        let f = |v: &[C<f64>]| residual_su3(&v[..2], &v[2..], &params, &sec).unwrap();
        assert!(fd_check(&f, &j, &x) < 1e-5);
        let sys = QSystem::new(&params, &sec).unwrap();
        let q: Vec<C<f64>> = x.iter().map(|&v| x_to_q(v)).collect();
        let fq = |v: &[C<f64>]| sys.residual(v);
        assert!(fd_check(&fq, &sys.jacobian(&q), &q) < 1e-5);
        let p2 = LiouvParams::<f64>::new(2, 3, vec![0.0, 0.0], 1.0, 1.0, 0.3).unwrap();
        let s2 = SectorLabel(vec![0, 0]);
        let c = rnd(&mut rng, 3);
        let f2 = |v: &[C<f64>]| residual_su2(v, &p2, &s2).unwrap();
        assert!(fd_check(&f2, &jacobian_su2(&c, &p2, &s2).unwrap(), &c) < 1e-5);
    }

    #[test]
    fn permutation_invariance() {
        let params = LiouvParams::<f64>::su3(2, [0.0; 3], 0.3).unwrap();
        let sec = SectorLabel::zero(3);
        let e = vec![Complex::new(0.3, 1.0), Complex::new(-0.7, 2.0)];
        let w = vec![Complex::new(0.1, 0.2), Complex::new(1.1, -0.4)];
        let r = residual_su3(&e, &w, &params, &sec).unwrap();
        let r2 = residual_su3(&[e[1], e[0]], &w, &params, &sec).unwrap();
        assert!((r[0] - r2[1]).norm() < 1e-14 && (r[1] - r2[0]).norm() < 1e-14);
        let l1 = eigenvalue_from_x(&e, &w, &params, &sec).unwrap();
        let l2 = eigenvalue_from_x(&[e[1], e[0]], &[w[1], w[0]], &params, &sec).unwrap();
        assert!((l1 - l2).norm() < 1e-13);
    }

    #[test]
    fn collisions_are_reported() {
        let params = LiouvParams::<f64>::su3(2, [0.0; 3], 0.3).unwrap();
        let sec = SectorLabel::zero(3);
        let e = vec![Complex::new(0.3, 1.0), Complex::new(0.3, 1.0)];
        let w = vec![Complex::new(0.1, 0.2), Complex::new(1.1, -0.4)];
        assert!(matches!(residual_su3(&e, &w, &params, &sec), Err(Error::Singularity(_))));
        assert!(matches!(residual_su3(&e[..1], &w, &params, &sec), Err(Error::Domain(_))));
    }

    #[test]
    fn middle_family_constant() {
        // N = 4 with a single root in family 2 and empty neighbours: the left side vanishes.
        let params = LiouvParams::<f64>::new(4, 1, vec![0.0; 4], 1.0, 1.0, 0.3).unwrap();
        let sys_counts = spectral_counts(1, &SectorLabel(vec![1, 0, -1, 0]));
        assert_eq!(sys_counts, vec![0, 0, 1]);
        let sec = SectorLabel(vec![1, -1, 1, -1]);
        let m = spectral_counts(1, &sec);
        assert_eq!(m, vec![0, 1, 0]);
        let r = residual_sun_general(&[vec![], vec![Complex::new(0.4, 0.1)], vec![]], &params, &sec).unwrap();
        assert!((r[1][0] - Complex::new(0.0, 2.0)).norm() < 1e-15);
        let _ = cr::<f64>(0.0);
    }
}
