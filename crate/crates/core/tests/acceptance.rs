//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use collective_rg::bethe::{build_eigenvector_su3, certify};
use collective_rg::ed::analysis::{all_spectra, p0_band_check, spectral_checks, steady_state};
use collective_rg::ed::stencil::compare_with_oracle;
use collective_rg::ed::{build_sector_matrix, full_spectrum, ArnoldiOptions, StencilOptions};
use collective_rg::meanfield::{gap_sample, gap_scaling_fit, quadratic_block_rates, GapScalingFit};
use collective_rg::rg::{
    collective_spin_shift_check, jacobian_su3, radial_deviation, residual_su3, slowest_decaying_state,
    solve_steady_state, su2_spectrum, SolverOptions,
};
use collective_rg::{LiouvParams, MemoryBudget, SectorLabel};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn budget() -> MemoryBudget {
    MemoryBudget::default()
}

fn e(x: impl std::fmt::Display) -> String {
    x.to_string()
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let sets =
        [([-1.0, 0.0, 1.0], 1.0, 1.0, 0.5), ([0.3, -0.7, 1.1], 0.8, 1.7, -0.35), ([0.0, 0.0, 0.0], 1.3, 0.4, 0.9)];
    for l in 1..=4 {
        for (eps, g, g0, p) in sets {
            let params = LiouvParams::new(3, l, eps.to_vec(), g, g0, p).map_err(e)?;
            for c in compare_with_oracle(&params, &budget(), StencilOptions::default()).map_err(e)? {
                worst = worst.max(c.max_abs_delta);
            }
        }
    }
    let msg = format!("max |stencil - oracle| = {worst:.2e} over L = 1..4, 3 parameter sets");
    if worst <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn steady_states() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut worst_radial = 0.0f64;
    let opts = SolverOptions::default();
    for l in [4usize, 10, 40] {
        for p in [0.1, 0.25, 0.5] {
            let params = LiouvParams::<f64>::su3(l, [-1.0, 0.0, 1.0], p).map_err(e)?;
            let tol = 1e-8 * (l * l) as f64 * params.gamma;
            let rg = solve_steady_state(&params, &opts).map_err(e)?;
            let ed = steady_state(&params, &budget()).map_err(e)?;
            let rg_ok = rg.converged && rg.eigenvalue.norm() <= tol;
            let ed_ok = ed.eigenvalue.norm() <= tol && ed.residual <= tol;
            ok &= rg_ok && ed_ok;
            if l == 40 {
                worst_radial = worst_radial.max(radial_deviation(&rg));
            }
            if !(rg_ok && ed_ok) {
                lines.push(format!(
                    "L={l} p={p}: |l_RG| = {:.1e}, |l_ED| = {:.1e}",
                    rg.eigenvalue.norm(),
                    ed.eigenvalue.norm()
                ));
            }
        }
    }
    let radial_ok = worst_radial <= 0.05;
    let msg = format!(
        "zero eigenvalue (RG and ED kernel) {}; max radial deviation at L=40 = {:.1}% (limit 5%){}",
        if ok { "ok for all 9 cases" } else { "FAILED" },
        100.0 * worst_radial,
        if lines.is_empty() { String::new() } else { format!("; {}", lines.join("; ")) }
    );
    if ok && radial_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn decaying_states() -> Outcome {
    let params = LiouvParams::<f64>::su3(10, [-1.0, 0.0, 1.0], 0.5).map_err(e)?;
    let opts = SolverOptions::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for (s, target) in [(vec![1, -1, 0], -5.297), (vec![1, 0, -1], -6.388)] {
        let sector = SectorLabel(s);
        let m = build_sector_matrix(&params, &sector, &budget()).map_err(e)?;
        let ed = full_spectrum(&m, false, &budget()).map_err(e)?.eigenvalues;
        let has = ed.iter().any(|z| (z.re - target).abs() < 5e-4);
        let rg = slowest_decaying_state(&params, &sector, &opts).map_err(e)?;
        let d = ed.iter().map(|z| (z - rg.eigenvalue).norm()).fold(f64::INFINITY, f64::min);
        ok &= has && d <= 1e-6;
        parts.push(format!("{sector}: ED has {target} = {has}, RG {:.6} at distance {d:.1e} from ED", rg.eigenvalue));
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn p0_bands() -> Outcome {
    let params = LiouvParams::<f64>::su3(10, [-1.0, 0.0, 1.0], 0.0).map_err(e)?;
    let t = p0_band_check(&params, &budget(), 1e-9).map_err(e)?;
    let dev = t.rows.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    let msg = format!(
        "{} eigenvalues, {} unassigned, max deviation {dev:.1e}, multiplicities (λ+1)³ {}",
        t.total,
        t.unassigned,
        if t.ok { "match" } else { "differ" }
    );
    if t.ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_instances() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (mut re_worst, mut conj_worst) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..20 {
        let n = rng.random_range(2..=3usize);
        let l = rng.random_range(1..=8usize);
        let eps: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = rng.random_range(0.2..2.0);
        let params =
            LiouvParams::new(n, l, eps, g, rng.random_range(0.0..2.0), rng.random_range(-0.95..0.95)).map_err(e)?;
        let sp = all_spectra(&params, &budget()).map_err(e)?;
        let c = spectral_checks(&sp);
        re_worst = re_worst.max(c.max_re / ((l * l) as f64 * g));
        conj_worst = conj_worst.max(c.conjugate_defect);
    }
    let msg = format!("max Re / (L²Γ) = {re_worst:.1e}, max conjugation defect = {conj_worst:.1e}");
    if re_worst <= 1e-9 && conj_worst <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn su2_recovery() -> Outcome {
    let (mut dist, mut shift) = (0.0f64, 0.0f64);
    for l in 1..=6 {
        for p in [0.3, -0.6] {
            let params = LiouvParams::new(2, l, vec![0.45, -0.45], 1.0, 0.7, p).map_err(e)?;
            for sec in su2_spectrum(&params).map_err(e)? {
                let m = build_sector_matrix(&params, &sec.sector, &budget()).map_err(e)?;
                let ed = full_spectrum(&m, false, &budget()).map_err(e)?.eigenvalues;
                let d = collective_rg::ed::multiset_distance(&ed, &sec.eigenvalues).unwrap_or(f64::INFINITY);
                dist = dist.max(d);
            }
            for r in collective_spin_shift_check(&params, &budget()).map_err(e)? {
                shift = shift.max(r.mismatch);
            }
        }
    }
    let msg = format!("RG vs ED multiset distance {dist:.1e}, collective-spin shift mismatch {shift:.1e}");
    if dist <= 1e-7 && shift <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn gap_fit() -> Outcome {
    let sizes = [40usize, 60, 80, 100, 120];
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [0.3, 0.5] {
        for s in [vec![1, -1, 0], vec![1, 0, -1]] {
            let sector = SectorLabel(s);
            let mut samples = Vec::new();
            for &l in &sizes {
                let params = LiouvParams::<f64>::su3(l, [0.0, 0.0, 0.0], p).map_err(e)?;
                samples.push(gap_sample(&params, &sector, &budget(), &ArnoldiOptions::default()).map_err(e)?);
            }
            let fit = gap_scaling_fit(sector.clone(), &samples).map_err(e)?;
            let (c0, c1) = GapScalingFit::expected_leading(&sector, p, 1.0).unwrap();
            let (d0, d1) = ((fit.coefficients[0] - c0).abs(), (fit.coefficients[1] - c1).abs());
            ok &= d0 <= 1e-3 && d1 <= 1e-2;
            parts.push(format!(
                "p={p} {sector}: c0 {:.5} (Δ {d0:.1e}), c1 {:.4} (Δ {d1:.1e})",
                fit.coefficients[0], fit.coefficients[1]
            ));
        }
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn bethe_vectors() -> Outcome {
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    for l in 1..=3 {
        let params = LiouvParams::<f64>::su3(l, [-1.0, 0.0, 1.0], 0.5).map_err(e)?;
        let ss = solve_steady_state(&params, &opts).map_err(e)?;
        let dec = slowest_decaying_state(&params, &SectorLabel(vec![1, -1, 0]), &opts).map_err(e)?;
        for sol in [ss, dec] {
            let v = build_eigenvector_su3(&sol).map_err(e)?;
            let c = certify(&v, &params, &budget()).map_err(e)?;
            worst = worst.max(c.residual).max(c.leakage);
            count += 1;
        }
    }
    let msg = format!("{count} vectors, max relative residual {worst:.1e}");
    if worst <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn meanfield_blocks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(2..=4usize);
        let eps: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut p: f64 = rng.random_range(-0.95..0.95);
        if p.abs() < 0.05 {
            p = 0.05f64.copysign(p);
        }
        let params =
            LiouvParams::new(n, rng.random_range(1..50), eps.clone(), rng.random_range(0.1..2.0), 1.0, p).map_err(e)?;
        let gamma = params.gamma_tl();
        for eta in 1..=n {
            for alpha in (1..=n).filter(|&a| a != eta) {
                let (re, rf) = quadratic_block_rates(alpha, &params, eta).map_err(e)?;
                let d = eps[alpha - 1] - eps[eta - 1];
                let ee = C::new(-p.abs() * gamma, -d);
                let ef = C::new(-p.abs() * gamma, d);
                worst = worst.max((re - ee).norm()).max((rf - ef).norm());
            }
        }
    }
    let msg = format!("max deviation from ±i(ε_α-ε_η) - |p|γ = {worst:.1e} over 10 parameter points");
    if worst <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn finite_difference_jacobians() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst = 0.0f64;
    for (l, m) in [(1usize, 2usize), (2, 4), (4, 8), (10, 20)] {
        let params = LiouvParams::<f64>::su3(l, [-1.0, 0.0, 1.0], rng.random_range(0.2..0.8)).map_err(e)?;
        let sector = SectorLabel::zero(3);
        let c = C::new(0.0, 1.0 / params.p);
        let r = 1.0 / params.p - 1.0;
        let mut done = 0;
        while done < 50 {
            let x: Vec<C> = (0..m)
                .map(|_| {
                    c + C::from_polar(r * rng.random_range(0.3..1.6), rng.random_range(0.0..std::f64::consts::TAU))
                })
                .collect();
            let mut sep = f64::INFINITY;
            for a in 0..m {
                sep = sep.min((x[a] - C::i()).norm()).min((x[a] + C::i()).norm()).min((x[a] - c).norm());
                for b in (a + 1)..m {
                    sep = sep.min((x[a] - x[b]).norm());
                }
            }
            if sep < 0.05 {
                continue;
            }
            let (e1, w1) = x.split_at(l);
            let j = jacobian_su3(e1, w1, &params, &sector).map_err(e)?;
            let mut fd = DMatrix::from_element(m, m, C::new(0.0, 0.0));
            for k in 0..m {
                let h = 1e-6 * (1.0 + x[k].norm());
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[k] += h;
                xm[k] -= h;
                let fp = residual_su3(&xp[..l], &xp[l..], &params, &sector).map_err(e)?;
                let fm = residual_su3(&xm[..l], &xm[l..], &params, &sector).map_err(e)?;
                for i in 0..m {
                    fd[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            worst = worst.max((&j - &fd).norm() / j.norm());
            done += 1;
        }
    }
    let msg = format!("max relative ‖J - J_fd‖ = {worst:.1e} over 4 × 50 points (M₁+M₂ = 2, 4, 8, 20)");
    if worst <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("steady state", steady_states),
        ("decaying states L=10", decaying_states),
        ("p=0 bands", p0_bands),
        ("random instances", random_instances),
        ("SU(2) recovery", su2_recovery),
        ("gap scaling fit", gap_fit),
        ("Bethe vectors", bethe_vectors),
        ("mean-field blocks", meanfield_blocks),
        ("analytic Jacobians", finite_difference_jacobians),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(m) => println!("criterion {:>2} PASS {name}: {m} [{secs:.1}s]", i + 1),
            Err(m) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {m} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
