//! Initial guesses and homotopies in `L` and `p` for the three-level equations.
//!
//! For `0 < p < 1` the steady-state roots sit near the circle of radius `r = 1/p − 1` centered at
//! `c = i/p`, which touches `+i` at its lowest point. The ω family lies slightly inside, the e
//! family slightly outside; inversion in the circle, `e = c + r²/conj(ω − c)`, maps one onto the other.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::residual::x_to_q;
use super::solve::{solve_q, solve_x, SolverOptions, SpectralSolution};
use crate::error::{Error, Result};
use crate::model::{spectral_counts, LiouvParams, SectorLabel};
use crate::scalar::{Cplx, Real};

type C<T> = Complex<T>;

fn two_pi<T: Real>() -> T {
    T::two_pi()
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if !(p > T::ZERO && p < T::ONE) {
        return Err(Error::domain(format!(
            "circle initialization and continuation need 0 < p < 1, got {}",
            p.to_f64_lossy()
        )));
    }
    Ok(())
}

fn need_su3<T: Real>(params: &LiouvParams<T>) -> Result<()> {
    if params.n_levels != 3 {
        return Err(Error::domain("continuation routines are implemented for n_levels = 3"));
    }
    Ok(())
}

/// Center `i/p` and radius `1/p − 1` of the steady-state circle.
pub fn circle<T: Real>(p: T) -> (C<T>, T) {
    (Complex::new(T::ZERO, T::ONE / p), (T::ONE / p - T::ONE).abs())
}

fn inversion<T: Real>(w: C<T>, c: C<T>, r: T) -> C<T> {
    let d = w - c;
    c + Complex::new(r * r, T::ZERO) / d.conj_()
}

/// Angle around `c` measured from the direction of `+i`, in `[0, 2π)`.
fn arc_angle<T: Real>(x: C<T>, c: C<T>) -> T {
    let d = x - c;
    let a = d.im.atan2(d.re) + T::frac_pi_2();
    let tp = two_pi::<T>();
    let m = a % tp;
    if m < T::ZERO {
        m + tp
    } else {
        m
    }
}

fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * T::from_count(k) / T::from_count(n - 1)).collect()
}

fn interp<T: Real>(x: T, xs: &[T], ys: &[T]) -> T {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    for k in 1..n {
        if x <= xs[k] {
            let span = xs[k] - xs[k - 1];
            if span <= T::ZERO {
                return ys[k];
            }
            let t = (x - xs[k - 1]) / span;
            return ys[k - 1] + (ys[k] - ys[k - 1]) * t;
        }
    }
    ys[n - 1]
}

/// Redistributes points lying along an arc around `c` to `n_new` points, interpolating the radius
/// and extending the angular span slightly toward the gap at `+i`.
pub fn resample_arc<T: Real>(x: &[C<T>], n_new: usize, c: C<T>) -> Vec<C<T>> {
    let mut pts: Vec<(T, T)> = x.iter().map(|&z| (arc_angle(z, c), (z - c).abs_())).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let ang: Vec<T> = pts.iter().map(|p| p.0).collect();
    let rad: Vec<T> = pts.iter().map(|p| p.1).collect();
    let n = x.len();
    let tp = two_pi::<T>();
    let pi = T::pi();
    let (lo, hi) = if n == 1 {
        let w = T::lit(0.8);
        (T::lit(0.2).max(ang[0] - w), (tp - T::lit(0.2)).min(ang[0] + w))
    } else {
        let sp = (ang[n - 1] - ang[0]) / T::from_count(n - 1);
        (
            T::lit(0.05).max(ang[0] - sp * T::HALF * (ang[0] / pi)),
            (tp - T::lit(0.05)).min(ang[n - 1] + sp * T::HALF * ((tp - ang[n - 1]) / pi)),
        )
    };
    let nu = linspace(T::ZERO, T::ONE, n_new);
    let u_old: Vec<T> = if n > 1 {
        let span = ang[n - 1] - ang[0];
        ang.iter().map(|a| if span > T::ZERO { (*a - ang[0]) / span } else { T::ZERO }).collect()
    } else {
        vec![T::HALF]
    };
    nu.iter()
        .map(|&u| {
            let a = lo + (hi - lo) * u - T::frac_pi_2();
            let r = if n > 1 { interp(u, &u_old, &rad) } else { rad[0] };
            c + Complex::new(r * a.cos(), r * a.sin())
        })
        .collect()
}

fn resample_any<T: Real>(x: &[C<T>], n_new: usize, c: C<T>, r: T) -> Vec<C<T>> {
    if n_new == x.len() {
        return x.to_vec();
    }
    if x.is_empty() {
        let tp = two_pi::<T>();
        return linspace(T::lit(0.3), tp - T::lit(0.3), n_new)
            .into_iter()
            .map(|a| {
                let a = a - T::frac_pi_2();
                c + Complex::new(T::lit(0.9) * r * a.cos(), T::lit(0.9) * r * a.sin())
            })
            .collect();
    }
    resample_arc(x, n_new, c)
}

/// Steady-state guess: `M₂ = L` points ω on an inner arc (0.9 r), `M₁ = L` points e on an outer arc
/// (1.1 r), both spread uniformly over the circle with an angular gap of 0.3 rad on each side of `+i`.
pub fn init_steady_state_guess<T: Real>(n_atoms: usize, p: T) -> Result<[Vec<C<T>>; 2]> {
    check_p(p)?;
    let (c, r) = circle(p);
    let gap = T::lit(0.3);
    let tp = two_pi::<T>();
    let arc = |rho: T| -> Vec<C<T>> {
        let angles = if n_atoms == 1 { vec![T::pi()] } else { linspace(gap, tp - gap, n_atoms) };
        angles
            .into_iter()
            .map(|a| {
                let a = a - T::frac_pi_2();
                c + Complex::new(rho * r * a.cos(), rho * r * a.sin())
            })
            .collect()
    };
    Ok([arc(T::lit(1.1)), arc(T::lit(0.9))])
}

/// The `L = 1` steady state in closed form: `ω = i(3/p − 1)/2`, `e = 2ω − i`.
pub fn steady_state_l1<T: Real>(p: T) -> [C<T>; 2] {
    let w = Complex::new(T::ZERO, (T::lit(3.0) / p - T::ONE) * T::HALF);
    [w * T::TWO - Complex::new(T::ZERO, T::ONE), w]
}

fn ss_tolerance<T: Real>(params: &LiouvParams<T>) -> T {
    let l = T::from_count(params.n_atoms);
    T::lit(1e-8) * l * l * params.gamma
}

fn accept_ss<T: Real>(sol: &SpectralSolution<T>) -> bool {
    sol.converged && sol.eigenvalue.abs_() <= ss_tolerance(&sol.params)
}

#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub parameter: f64,
    pub eigenvalue_re: f64,
    pub eigenvalue_im: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl PathPoint {
    fn of<T: Real>(param: f64, s: &SpectralSolution<T>) -> Self {
        PathPoint {
            parameter: param,
            eigenvalue_re: s.eigenvalue.re.to_f64_lossy(),
            eigenvalue_im: s.eigenvalue.im.to_f64_lossy(),
            residual: s.residual_norm.to_f64_lossy(),
            iterations: s.iterations,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Continued<T> {
    pub solution: SpectralSolution<T>,
    pub path: Vec<PathPoint>,
}

/// Steady-state roots for `L = 1, …, params.n_atoms`, grown one atom at a time.
pub fn steady_state_path<T: Real>(params: &LiouvParams<T>, opts: &SolverOptions) -> Result<Vec<SpectralSolution<T>>> {
    need_su3(params)?;
    check_p(params.p)?;
    let (c, r) = circle(params.p);
    let s0 = SectorLabel::zero(3);
    let [e1, w1] = steady_state_l1(params.p);
    let first = solve_x(&params.with_atoms(1), &s0, &[vec![e1], vec![w1]], opts)?;
    if !accept_ss(&first) {
        return Err(Error::numeric("closed-form L = 1 steady state failed to certify"));
    }
    let mut out = vec![first];
    for l in 2..=params.n_atoms {
        let prev = out.last().unwrap();
        let w = resample_arc(&prev.w(), l, c);
        let e: Vec<C<T>> = w.iter().map(|&z| inversion(z, c, r)).collect();
        let sol = solve_x(&params.with_atoms(l), &s0, &[e, w], opts)?;
        if !accept_ss(&sol) {
            return Err(Error::NoConvergence {
                iterations: sol.iterations,
                residual: sol.residual_norm.to_f64_lossy(),
            });
        }
        out.push(sol);
    }
    Ok(out)
}

/// Steady-state roots at `params`: direct Newton from [`init_steady_state_guess`], falling back to
/// growth in `L` when the direct attempt misses the zero eigenvalue.
pub fn solve_steady_state<T: Real>(params: &LiouvParams<T>, opts: &SolverOptions) -> Result<SpectralSolution<T>> {
    need_su3(params)?;
    let guess = init_steady_state_guess(params.n_atoms, params.p)?;
    if let Ok(sol) = solve_x(params, &SectorLabel::zero(3), &guess, opts) {
        if accept_ss(&sol) {
            return Ok(sol);
        }
    }
    Ok(steady_state_path(params, opts)?.pop().unwrap())
}

/// Tracks a solution to `p_target` with adaptive steps.
pub fn continue_in_p<T: Real>(
    from: &SpectralSolution<T>,
    p_target: T,
    steps: usize,
    opts: &SolverOptions,
) -> Result<Continued<T>> {
    check_p(p_target)?;
    let mut cur = from.clone();
    let mut p = from.params.p;
    let mut step = (p_target - p) / T::from_count(steps.max(1));
    let mut path = vec![PathPoint::of(p.to_f64_lossy(), &cur)];
    let min_step = T::lit(1e-6);
    while (p_target - p).abs() > T::EPSILON * T::lit(16.0) {
        if (p + step - p_target) * step.signum() > T::ZERO {
            step = p_target - p;
        }
        let trial_p = p + step;
        let params = cur.params.with_p(trial_p);
        match solve_q(&params, &cur.sector, &cur.flat_q(), opts) {
            Ok(s) if s.converged => {
                p = trial_p;
                path.push(PathPoint::of(p.to_f64_lossy(), &s));
                cur = s;
            }
            _ => {
                step *= T::HALF;
                if step.abs() < min_step {
                    return Err(Error::numeric(format!(
                        "p-continuation step underflow at p = {} (last good eigenvalue {:.10}{:+.10}i)",
                        p.to_f64_lossy(),
                        cur.eigenvalue.re.to_f64_lossy(),
                        cur.eigenvalue.im.to_f64_lossy()
                    )));
                }
            }
        }
    }
    Ok(Continued { solution: cur, path })
}

/// Grows `L` one atom at a time in a fixed sector, resampling each family along its arc.
pub fn continue_in_l<T: Real>(
    from: &SpectralSolution<T>,
    l_target: usize,
    opts: &SolverOptions,
) -> Result<Continued<T>> {
    need_su3(&from.params)?;
    check_p(from.params.p)?;
    let (c, r) = circle(from.params.p);
    let mut cur = from.clone();
    let mut path = vec![PathPoint::of(cur.params.n_atoms as f64, &cur)];
    while cur.params.n_atoms < l_target {
        let l = cur.params.n_atoms + 1;
        let params = cur.params.with_atoms(l);
        let counts = spectral_counts(l, &cur.sector);
        let guess = if cur.sector.is_zero() {
            let w = resample_arc(&cur.w(), l, c);
            let e = w.iter().map(|&z| inversion(z, c, r)).collect();
            vec![e, w]
        } else {
            vec![resample_any(&cur.e(), counts[0], c, r), resample_any(&cur.w(), counts[1], c, r)]
        };
        let s = solve_x(&params, &cur.sector, &guess, opts)?;
        if !s.converged {
            return Err(Error::numeric(format!(
                "L-continuation failed at L = {l} in sector {} (residual {:e}); last good L = {}",
                cur.sector,
                s.residual_norm.to_f64_lossy(),
                cur.params.n_atoms
            )));
        }
        path.push(PathPoint::of(l as f64, &s));
        cur = s;
    }
    Ok(Continued { solution: cur, path })
}

/// Guess for sector `s` built from steady-state ω roots: ω resampled to `M₂`, e the inversion of ω
/// resampled to `M₁`.
pub fn guess_from_steady_state<T: Real>(ss: &SpectralSolution<T>, sector: &SectorLabel) -> Result<Vec<Vec<C<T>>>> {
    let l = ss.params.n_atoms;
    let m = spectral_counts(l, sector);
    if m.len() != 2 {
        return Err(Error::domain("three-level sector expected"));
    }
    let (c, r) = circle(ss.params.p);
    let w = ss.w();
    let w2 = if m[1] == w.len() { w.clone() } else { resample_any(&w, m[1], c, r) };
    let e2 = resample_any(&w, m[0], c, r).into_iter().map(|z| inversion(z, c, r)).collect();
    Ok(vec![e2, w2])
}

/// Offsets of the auxiliary polarizations used to seed decaying states.
pub const P_OFFSETS: [f64; 9] = [0.0, -0.025, 0.025, -0.05, 0.05, -0.075, 0.075, -0.1, 0.1];

/// Converged solutions in `sector` obtained by seeding from steady-state roots at nearby
/// polarizations `p' = p + δ` and continuing back to `p`. Distinct eigenvalues only, sorted by
/// decreasing real part.
pub fn decaying_candidates<T: Real>(
    params: &LiouvParams<T>,
    sector: &SectorLabel,
    opts: &SolverOptions,
) -> Result<Vec<SpectralSolution<T>>> {
    need_su3(params)?;
    check_p(params.p)?;
    sector.validate(3, params.n_atoms)?;
    let mut found: Vec<SpectralSolution<T>> = Vec::new();
    for d in P_OFFSETS {
        let pp = params.p + T::lit(d);
        if !(pp > T::lit(0.02) && pp < T::lit(0.98)) {
            continue;
        }
        let aux = params.with_p(pp);
        let ss = match steady_state_path(&aux, opts) {
            Ok(mut v) => v.pop().unwrap(),
            Err(_) => continue,
        };
        let guess = guess_from_steady_state(&ss, sector)?;
        let seed = match solve_x(&aux, sector, &guess, opts) {
            Ok(s) if s.converged => s,
            _ => continue,
        };
        let end = if d == 0.0 {
            Ok(Continued { solution: seed, path: vec![] })
        } else {
            continue_in_p(&seed, params.p, 5, opts)
        };
        if let Ok(c) = end {
            let s = c.solution;
            let tol = T::lit(1e-7) * (T::ONE + s.eigenvalue.abs_());
            if s.converged && !found.iter().any(|f| (f.eigenvalue - s.eigenvalue).abs_() <= tol) {
                found.push(s);
            }
        }
    }
    found.sort_by(|a, b| b.eigenvalue.re.partial_cmp(&a.eigenvalue.re).unwrap_or(std::cmp::Ordering::Equal));
    Ok(found)
}

/// Slowest decaying state reachable by [`decaying_candidates`].
pub fn slowest_decaying_state<T: Real>(
    params: &LiouvParams<T>,
    sector: &SectorLabel,
    opts: &SolverOptions,
) -> Result<SpectralSolution<T>> {
    decaying_candidates(params, sector, opts)?
        .into_iter()
        .find(|s| !s.sector.is_zero() || s.eigenvalue.abs_() > ss_tolerance(&s.params))
        .ok_or_else(|| Error::numeric(format!("no decaying solution found in sector {sector}")))
}

/// Random starts around the circle; distinct converged solutions, at most `max_distinct`.
pub fn multistart<T: Real>(
    params: &LiouvParams<T>,
    sector: &SectorLabel,
    starts: usize,
    max_distinct: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<SpectralSolution<T>>> {
    check_p(params.p)?;
    let (c, r) = circle(params.p);
    let m: usize = spectral_counts(params.n_atoms, sector).iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<SpectralSolution<T>> = Vec::new();
    for _ in 0..starts {
        let q0: Vec<C<T>> = (0..m)
            .map(|_| {
                let rho = T::lit(rng.random_range(0.3..1.6));
                let a = T::lit(rng.random_range(0.0..std::f64::consts::TAU));
                x_to_q(c + Complex::new(rho * r * a.cos(), rho * r * a.sin()))
            })
            .collect();
        let o = SolverOptions { max_iter: 60, ..*opts };
        if let Ok(s) = solve_q(params, sector, &q0, &o) {
            let tol = T::lit(1e-7) * (T::ONE + s.eigenvalue.abs_());
            if s.converged && !found.iter().any(|f| (f.eigenvalue - s.eigenvalue).abs_() <= tol) {
                found.push(s);
                if found.len() >= max_distinct {
                    break;
                }
            }
        }
    }
    Ok(found)
}

/// Largest relative radial deviation `| |x − i/p| / r − 1 |` over every root.
pub fn radial_deviation<T: Real>(sol: &SpectralSolution<T>) -> T {
    let (c, r) = circle(sol.params.p);
    let mut m = T::ZERO;
    for fam in 0..sol.q.len() {
        for x in sol.roots_x(fam) {
            m = m.max(((x - c).abs_() / r - T::ONE).abs());
        }
    }
    m
}
