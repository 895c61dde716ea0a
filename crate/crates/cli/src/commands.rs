//! Subcommand implementations.

use std::fmt::Write;

use collective_rg::bethe::{build_eigenvector_su3, classify, Verdict};
use collective_rg::ed::analysis::{evolve_expectation, spectral_checks, steady_state, steady_state_expectation};
use collective_rg::ed::export::{spectra_to_csv, spectrum_csv_header};
use collective_rg::ed::integrability::integrability_check;
use collective_rg::ed::ladder::{build_oracle_matrix, occupation_basis};
use collective_rg::ed::stencil::{compare_with_oracle, Family};
use collective_rg::ed::{build_sector_matrix, full_spectrum, ArnoldiOptions, SpectrumResult, StencilOptions};
use collective_rg::meanfield::{gap_sample, gap_scaling_fit, tl_prediction, GapSample, GapScalingFit};
use collective_rg::rg::{
    decaying_candidates, heine_stieltjes, multistart, radial_deviation, slowest_decaying_state, solve_steady_state,
    solve_x, su2_spectrum, SolutionRecord, SolverOptions, SpectralSolution,
};
use collective_rg::{
    enumerate_basis, enumerate_sectors, Error, LiouvParams, MemoryBudget, Result, SectorBasis, SectorLabel,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde_json::json;

use crate::cli::{EvolveArgs, GapScanArgs, Method, OracleArgs, RgSolveArgs, SpectrumArgs};
use crate::config::{parse_list, parse_sector};
use crate::output::OutputDir;

/// Relative residual a Bethe vector must reach for its roots to count as physical.
const BETHE_TOL: f64 = 1e-6;

/// Surviving sizes required before a gap fit is attempted.
const MIN_FIT_POINTS: usize = 5;

pub struct Ctx {
    pub params: LiouvParams<f64>,
    pub method: Method,
    pub tol: Option<f64>,
    pub budget: MemoryBudget,
}

fn label_file(s: &SectorLabel) -> String {
    s.0.iter().map(|x| if *x < 0 { format!("m{}", -x) } else { x.to_string() }).collect::<Vec<_>>().join("_")
}

fn cjson(z: C) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

fn solver_opts(ctx: &Ctx) -> SolverOptions {
    SolverOptions { tol: ctx.tol, ..SolverOptions::default() }
}

fn solution_json(sol: &SpectralSolution<f64>) -> serde_json::Value {
    let mut v = serde_json::to_value(SolutionRecord::from_solution(sol)).expect("record serializes");
    let o = v.as_object_mut().expect("object");
    o.insert("converged".into(), json!(sol.converged));
    o.insert("iterations".into(), json!(sol.iterations));
    o.insert("sensitivity".into(), json!(sol.sensitivity));
    v
}

fn write_solution(
    out: &mut OutputDir,
    stem: &str,
    sol: &SpectralSolution<f64>,
    check: serde_json::Value,
) -> Result<()> {
    let mut v = solution_json(sol);
    let o = v.as_object_mut().unwrap();
    o.insert("radial_deviation".into(), json!(radial_deviation(sol)));
    o.insert("bethe_check".into(), check);
    out.json(&format!("{stem}.json"), &v)?;
    out.csv(&format!("{stem}_roots.csv"), &SolutionRecord::from_solution(sol).roots_csv())?;
    Ok(())
}

/// RG eigenvalues with Bethe-vector checks. Returns the rows and the number of spurious roots dropped.
fn rg_rows(ctx: &Ctx, p: &LiouvParams<f64>, sectors: &[SectorLabel]) -> Result<(Vec<(SectorLabel, C, f64)>, usize)> {
    match p.n_levels {
        2 => {
            let all = su2_spectrum(p)?;
            let rows = all
                .into_iter()
                .filter(|s| sectors.contains(&s.sector))
                .flat_map(|s| {
                    let r = s.max_residual;
                    let lab = s.sector.clone();
                    s.eigenvalues.into_iter().map(move |z| (lab.clone(), z, r))
                })
                .collect();
            Ok((rows, 0))
        }
        3 => {
            let opts = solver_opts(ctx);
            let per: Vec<Result<(Vec<(SectorLabel, C, f64)>, usize)>> = sectors
                .par_iter()
                .map(|s| {
                    let found = match decaying_candidates(p, s, &opts) {
                        Ok(f) => f,
                        Err(Error::Domain(m)) => return Err(Error::Domain(m)),
                        Err(e) => {
                            log::warn!("sector {s}: {e}");
                            Vec::new()
                        }
                    };
                    let verdicts = classify(p, &found, BETHE_TOL, &ctx.budget);
                    let mut rows = Vec::new();
                    let mut dropped = 0;
                    for (x, v) in found.iter().zip(verdicts) {
                        if let Verdict::Spurious(_) = v {
                            log::info!("sector {s}: dropped spurious root set with eigenvalue {}", x.eigenvalue);
                            dropped += 1;
                        } else {
                            rows.push((s.clone(), x.eigenvalue, x.residual_norm));
                        }
                    }
                    Ok((rows, dropped))
                })
                .collect();
            let mut rows = Vec::new();
            let mut dropped = 0;
            for r in per {
                let (r, d) = r?;
                rows.extend(r);
                dropped += d;
            }
            Ok((rows, dropped))
        }
        n => Err(Error::domain(format!("Richardson-Gaudin spectra are available for n_levels = 2 or 3, got {n}"))),
    }
}

fn with_sector(s: &SectorLabel, e: Error) -> Error {
    match e {
        Error::Resource(m) if !m.contains(&format!("sector {s}")) => Error::Resource(format!("sector {s}: {m}")),
        other => other,
    }
}

fn p_tag(p: f64) -> String {
    format!("{p}").replace('-', "m")
}

struct SpectrumRun {
    csv: String,
    summary: serde_json::Map<String, serde_json::Value>,
    worst: Option<f64>,
}

fn spectrum_at(ctx: &Ctx, p: &LiouvParams<f64>, sectors: &[SectorLabel], all: bool) -> Result<SpectrumRun> {
    let mut summary = serde_json::Map::new();
    summary.insert("p".into(), json!(p.p));
    summary.insert("sectors".into(), json!(sectors.len()));
    let mut ed: Vec<SpectrumResult<f64>> = Vec::new();
    let mut body = if ctx.method.ed() {
        for s in sectors {
            let dim = SectorBasis::new(p.n_atoms, s).len();
            ctx.budget.check_dense(dim, &format!("sector {s}"))?;
        }
        ed = sectors
            .par_iter()
            .map(|s| {
                build_sector_matrix(p, s, &ctx.budget)
                    .and_then(|m| full_spectrum(&m, false, &ctx.budget))
                    .map_err(|e| with_sector(s, e))
            })
            .collect::<Result<_>>()?;
        if all {
            summary.insert("checks".into(), serde_json::to_value(spectral_checks(&ed)).unwrap());
        }
        summary.insert("ed_eigenvalues".into(), json!(ed.iter().map(|r| r.eigenvalues.len()).sum::<usize>()));
        spectra_to_csv(p.n_levels, &ed)
    } else {
        spectrum_csv_header(p.n_levels) + "\n"
    };
    let mut worst: Option<f64> = None;
    if ctx.method.rg() {
        let (rows, dropped) = rg_rows(ctx, p, sectors)?;
        summary.insert("rg_spurious_dropped".into(), json!(dropped));
        for (s, z, r) in &rows {
            let lab: String = s.0.iter().map(|x| format!("{x},")).collect();
            let _ = writeln!(body, "{lab}{:.15e},{:.15e},rg,{r:.6e}", z.re, z.im);
            if let Some(sp) = ed.iter().find(|sp| &sp.sector == s) {
                let d = sp.eigenvalues.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
                worst = Some(worst.map_or(d, |x: f64| x.max(d)));
            }
        }
        summary.insert("rg_eigenvalues".into(), json!(rows.len()));
        if let Some(w) = worst {
            summary.insert("max_rg_to_ed_distance".into(), json!(w));
        }
    }
    Ok(SpectrumRun { csv: body, summary, worst })
}

/// Rows of a merged spectrum CSV that belong to `s`, with the header.
fn sector_rows(csv: &str, s: &SectorLabel) -> String {
    let prefix: String = s.0.iter().map(|x| format!("{x},")).collect();
    let mut lines = csv.lines();
    let mut out = format!("{}\n", lines.next().unwrap_or(""));
    for l in lines.filter(|l| l.starts_with(&prefix)) {
        out.push_str(l);
        out.push('\n');
    }
    out
}

pub fn spectrum(ctx: &Ctx, args: &SpectrumArgs, out: &mut OutputDir) -> Result<()> {
    let p = &ctx.params;
    let sectors = match &args.sector {
        Some(s) => vec![parse_sector(s, p)?],
        None => enumerate_sectors(p.n_levels, p.n_atoms),
    };
    let all = args.sector.is_none();
    let mut worst: Option<f64> = None;
    if let Some(sweep) = &args.p_sweep {
        let values: Vec<f64> = parse_list(sweep, "p")?;
        let mut runs = Vec::new();
        for pv in values {
            let pp = LiouvParams::new(p.n_levels, p.n_atoms, p.eps.clone(), p.gamma, p.gamma0, pv)?;
            let run = spectrum_at(ctx, &pp, &sectors, all)?;
            out.csv(&format!("spectrum_p{}.csv", p_tag(pv)), &run.csv)?;
            worst = match (worst, run.worst) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
            runs.push(serde_json::Value::Object(run.summary));
        }
        out.json("summary.json", &json!({ "sweep": runs }))?;
    } else {
        let run = spectrum_at(ctx, p, &sectors, all)?;
        for s in &sectors {
            out.csv(&format!("spectrum_{}.csv", label_file(s)), &sector_rows(&run.csv, s))?;
        }
        out.csv("spectrum.csv", &run.csv)?;
        out.json("summary.json", &run.summary)?;
        worst = run.worst;
    }
    if args.dump_coo {
        for s in &sectors {
            let m = build_sector_matrix(p, s, &ctx.budget).map_err(|e| with_sector(s, e))?;
            out.csv(&format!("matrix_{}.csv", label_file(s)), &m.entries.to_coo_text())?;
        }
    }
    if let (Some(w), Some(t)) = (worst, ctx.tol) {
        if w > t {
            return Err(Error::numeric(format!("RG and ED eigenvalues differ by {w:e} > tol {t:e}")));
        }
    }
    Ok(())
}

fn populations_csv(n_levels: usize, occ: &[Vec<i64>], rho: &[C]) -> String {
    let mut csv = String::new();
    for a in 1..=n_levels {
        let _ = write!(csv, "k{a},");
    }
    csv.push_str("re,im\n");
    for (k, r) in occ.iter().zip(rho) {
        let lab: String = k.iter().map(|x| format!("{x},")).collect();
        let _ = writeln!(csv, "{lab}{:.15e},{:.15e}", r.re, r.im);
    }
    csv
}

pub fn steady(ctx: &Ctx, out: &mut OutputDir) -> Result<()> {
    let p = &ctx.params;
    let zero_tol = 1e-8 * (p.n_atoms * p.n_atoms) as f64 * p.gamma;
    let mut ed_rho: Option<Vec<C>> = None;
    if ctx.method.ed() {
        let ss = steady_state(p, &ctx.budget)?;
        let (neg, im) = ss.population_defect();
        out.json(
            "steady_state.json",
            &json!({
                "eigenvalue": cjson(ss.eigenvalue),
                "residual": ss.residual,
                "level_fractions": ss.level_fractions(p.n_atoms),
                "most_negative_population": neg,
                "max_imaginary_population": im,
                "degenerate": ss.degenerate.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
            }),
        )?;
        out.csv("steady_state_populations.csv", &populations_csv(p.n_levels, &ss.occupations, &ss.rho))?;
        if ss.eigenvalue.norm() > zero_tol {
            return Err(Error::numeric(format!("steady-state eigenvalue {} exceeds {zero_tol:e}", ss.eigenvalue)));
        }
        ed_rho = Some(ss.rho);
    }
    if ctx.method.rg() {
        match p.n_levels {
            3 => {
                let sol = solve_steady_state(p, &solver_opts(ctx))?;
                let occ: Vec<Vec<i64>> =
                    enumerate_basis(p.n_atoms, &SectorLabel::zero(3)).into_iter().map(|st| st.k).collect();
                let rho = build_eigenvector_su3(&sol).ok().and_then(|v| {
                    let tr: C = v.sector_vector.iter().sum();
                    (tr.norm() > 0.0).then(|| v.sector_vector.iter().map(|z| z / tr).collect::<Vec<C>>())
                });
                let mut check = json!({ "populations": rho.is_some() });
                if let Some(rho) = &rho {
                    out.csv("steady_state_rg_populations.csv", &populations_csv(3, &occ, rho))?;
                    if let Some(e) = &ed_rho {
                        let d = e.iter().zip(rho).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                        check["max_population_delta_vs_ed"] = json!(d);
                        if let Some(t) = ctx.tol {
                            if d > t {
                                write_solution(out, "steady_state_rg", &sol, check)?;
                                return Err(Error::numeric(format!("RG and ED populations differ by {d:e} > {t:e}")));
                            }
                        }
                    }
                }
                write_solution(out, "steady_state_rg", &sol, check)?;
                if sol.eigenvalue.norm() > zero_tol {
                    return Err(Error::numeric(format!(
                        "RG steady-state eigenvalue {} exceeds {zero_tol:e}",
                        sol.eigenvalue
                    )));
                }
            }
            2 => {
                let hs = heine_stieltjes(p, &SectorLabel::zero(2))?;
                let (k, z) = hs
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                    .map(|(k, z)| (k, *z))
                    .ok_or_else(|| Error::numeric("no two-level solution"))?;
                out.json(
                    "steady_state_rg.json",
                    &json!({
                        "sector": [0, 0],
                        "e": hs.roots[k].iter().map(|x| cjson(*x)).collect::<Vec<_>>(),
                        "w": [],
                        "residual": hs.max_residual,
                        "eigenvalue": cjson(z),
                        "params": p,
                    }),
                )?;
            }
            n => return Err(Error::domain(format!("no steady-state equations for n_levels = {n}"))),
        }
    }
    Ok(())
}

pub fn gap_scan(ctx: &Ctx, args: &GapScanArgs, out: &mut OutputDir) -> Result<()> {
    let p = &ctx.params;
    let sizes: Vec<usize> = parse_list(&args.sizes, "size")?;
    let sectors: Vec<SectorLabel> = args
        .sectors
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_sector(s, &p.with_atoms(*sizes.iter().min().unwrap_or(&p.n_atoms))))
        .collect::<Result<_>>()?;
    if ctx.method == Method::Both {
        return Err(Error::domain("gap-scan takes --method ed or --method rg"));
    }
    let opts = solver_opts(ctx);
    let mut fits = Vec::new();
    for s in &sectors {
        let attempts: Vec<Result<GapSample>> = sizes
            .par_iter()
            .map(|&l| {
                let pl = p.with_atoms(l);
                if ctx.method == Method::Rg {
                    let sol = slowest_decaying_state(&pl, s, &opts)?;
                    Ok(GapSample {
                        n_atoms: l,
                        gap_per_atom: sol.eigenvalue.re / l as f64,
                        sigma: sol.sensitivity.max(sol.residual_norm) / l as f64,
                    })
                } else {
                    gap_sample(&pl, s, &ctx.budget, &ArnoldiOptions::default())
                }
            })
            .collect();
        let mut samples = Vec::new();
        for (l, a) in sizes.iter().zip(attempts) {
            match a {
                Ok(x) => samples.push(x),
                Err(e) => log::warn!("sector {s}, L = {l}: skipped ({e})"),
            }
        }
        if samples.len() < MIN_FIT_POINTS {
            return Err(Error::numeric(format!(
                "sector {s}: only {} of {} sizes succeeded, the fit needs {MIN_FIT_POINTS}",
                samples.len(),
                sizes.len()
            )));
        }
        let fit = gap_scaling_fit(s.clone(), &samples)?;
        let expected = GapScalingFit::expected_leading(s, p.p, p.gamma);
        let mut v = serde_json::to_value(&fit).unwrap();
        if let Some((c0, c1)) = expected {
            v.as_object_mut().unwrap().insert(
                "expected_leading".into(),
                json!({ "c0": c0, "c1": c1, "delta_c0": fit.coefficients[0] - c0, "delta_c1": fit.coefficients[1] - c1 }),
            );
        }
        out.json(&format!("fit_{}.json", label_file(s)), &v)?;
        out.csv(&format!("fit_{}.csv", label_file(s)), &fit.to_csv())?;
        fits.push(fit);
    }
    if p.p != 0.0 {
        let tl = tl_prediction(p)?;
        out.json(
            "tl_prediction.json",
            &json!({
                "condensate_level": tl.condensate_level,
                "gap_per_atom": tl.gap_per_atom,
                "gamma_tl": tl.gamma_tl,
                "quasiboson_rates": tl.quasiboson_rates.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
                "vacuum_constant_zero": tl.vacuum_constant_zero,
            }),
        )?;
    }
    if let Some(t) = ctx.tol {
        for f in &fits {
            if (f.coefficients[0] + p.p.abs() * p.gamma).abs() > t {
                return Err(Error::numeric(format!(
                    "sector {}: zeroth coefficient {} is farther than {t:e} from -|p|Γ",
                    f.sector, f.coefficients[0]
                )));
            }
        }
    }
    Ok(())
}

pub fn rg_solve(ctx: &Ctx, args: &RgSolveArgs, out: &mut OutputDir) -> Result<()> {
    let p = &ctx.params;
    let sector = match &args.sector {
        Some(s) => parse_sector(s, p)?,
        None => SectorLabel::zero(p.n_levels),
    };
    if p.n_levels == 2 {
        if sector.0[0] < 0 {
            return Err(Error::domain("two-level sectors with s1 < 0 are the conjugates of -s; solve -s instead"));
        }
        let hs = heine_stieltjes(p, &sector)?;
        let sols: Vec<serde_json::Value> = hs
            .roots
            .iter()
            .zip(&hs.eigenvalues)
            .map(|(r, z)| json!({ "e": r.iter().map(|x| cjson(*x)).collect::<Vec<_>>(), "eigenvalue": cjson(*z) }))
            .collect();
        out.json(
            "solutions.json",
            &json!({ "sector": sector, "solutions": sols, "residual": hs.max_residual, "params": p }),
        )?;
        return Ok(());
    }
    let opts = solver_opts(ctx);
    let sols: Vec<SpectralSolution<f64>> = if let Some(path) = &args.guess {
        let text = std::fs::read_to_string(path).map_err(|e| Error::domain(format!("{}: {e}", path.display())))?;
        let rec = SolutionRecord::from_json(&text)?;
        let fam = |v: &[collective_rg::rg::ReIm]| v.iter().map(|z| z.to_complex::<f64>()).collect::<Vec<C>>();
        vec![solve_x(p, &rec.sector, &[fam(&rec.e), fam(&rec.w)], &opts)?]
    } else if let Some(n) = args.multistart {
        multistart(p, &sector, n, n, args.seed, &opts)?
    } else if sector.is_zero() {
        vec![solve_steady_state(p, &opts)?]
    } else {
        vec![slowest_decaying_state(p, &sector, &opts)?]
    };
    if sols.is_empty() {
        return Err(Error::numeric(format!("no converged solution in sector {sector}")));
    }
    let verdicts = classify(p, &sols, BETHE_TOL, &ctx.budget);
    let mut spurious = 0;
    for (i, (sol, v)) in sols.iter().zip(&verdicts).enumerate() {
        let stem = if sols.len() == 1 { "solution".to_string() } else { format!("solution_{i}") };
        let check = match v {
            Verdict::Physical(c) => json!({ "status": "physical", "certificate": c }),
            Verdict::Spurious(c) => {
                spurious += 1;
                json!({ "status": "spurious", "certificate": c })
            }
            Verdict::Unchecked(why) => json!({ "status": "unchecked", "reason": why }),
        };
        write_solution(out, &stem, sol, check)?;
    }
    if let Some(bad) = sols.iter().find(|s| !s.converged) {
        return Err(Error::NoConvergence { iterations: bad.iterations, residual: bad.residual_norm });
    }
    if spurious == sols.len() {
        return Err(Error::numeric(format!("every root set found in sector {sector} has a vanishing Bethe vector")));
    }
    Ok(())
}

pub fn oracle_check(ctx: &Ctx, args: &OracleArgs, out: &mut OutputDir) -> Result<()> {
    let p = &ctx.params;
    let flip = match args.flip.as_deref() {
        None => None,
        Some("diag") => Some(Family::Diagonal),
        Some(raw) => {
            let ab: Vec<usize> = parse_list(raw, "level")?;
            match ab[..] {
                [a, b] if a != b && (1..=p.n_levels).contains(&a) && (1..=p.n_levels).contains(&b) => {
                    Some(Family::Hop { alpha: a - 1, beta: b - 1 })
                }
                _ => return Err(Error::domain(format!("--flip takes `diag` or two distinct levels, got {raw}"))),
            }
        }
    };
    let tol = ctx.tol.unwrap_or(1e-12);
    let cmp = compare_with_oracle(p, &ctx.budget, StencilOptions { flip })?;
    let worst = cmp.iter().map(|c| c.max_abs_delta).fold(0.0, f64::max);
    let sectors: Vec<serde_json::Value> = cmp
        .iter()
        .map(|c| {
            let mut v = serde_json::to_value(c).unwrap();
            v["pass"] = json!(c.max_abs_delta <= tol);
            v
        })
        .collect();
    let oracle = build_oracle_matrix(p, &ctx.budget)?;
    let mut report = json!({
        "sectors": sectors,
        "pass": worst <= tol,
        "max_abs_delta": worst,
        "cross_sector_max": oracle.cross_sector_max(),
        "trace_annihilation": oracle.trace_annihilation(),
    });
    if p.p != 0.0 && p.p.abs() < 1.0 {
        let ir = integrability_check(p, &ctx.budget)?;
        report.as_object_mut().unwrap().insert("integrability".into(), serde_json::to_value(ir).unwrap());
    }
    out.json("oracle_check.json", &report)?;
    if worst > tol {
        return Err(Error::numeric(format!("stencil and oracle differ by {worst:e} > {tol:e}")));
    }
    Ok(())
}

pub fn evolve(ctx: &Ctx, args: &EvolveArgs, out: &mut OutputDir) -> Result<()> {
    let p = &ctx.params;
    let k: Vec<usize> = parse_list(&args.initial, "occupation")?;
    if k.len() != p.n_levels || k.iter().sum::<usize>() != p.n_atoms {
        return Err(Error::domain(format!(
            "initial occupations must have {} entries summing to {}",
            p.n_levels, p.n_atoms
        )));
    }
    if args.level == 0 || args.level > p.n_levels {
        return Err(Error::domain(format!("level must be in 1..={}", p.n_levels)));
    }
    if args.steps == 0 || !(args.t_max > 0.0) {
        return Err(Error::domain("need steps > 0 and t_max > 0"));
    }
    let basis = occupation_basis(p.n_levels, p.n_atoms);
    let d = basis.len();
    let idx = basis.iter().position(|b| *b == k).expect("valid occupation is in the basis");
    let mut rho0 = DMatrix::from_element(d, d, C::new(0.0, 0.0));
    rho0[(idx, idx)] = C::new(1.0, 0.0);
    let obs =
        DMatrix::from_fn(
            d,
            d,
            |i, j| if i == j { C::new(basis[i][args.level - 1] as f64, 0.0) } else { C::new(0.0, 0.0) },
        );
    let times: Vec<f64> = (0..=args.steps).map(|i| args.t_max * i as f64 / args.steps as f64).collect();
    let ev = evolve_expectation(p, &rho0, &obs, &times, &ctx.budget)?;
    let mut csv = String::from("t,re,im,trace_re,trace_im\n");
    for ((t, z), tr) in ev.times.iter().zip(&ev.expectation).zip(&ev.trace) {
        let _ = writeln!(csv, "{t:.10e},{:.15e},{:.15e},{:.15e},{:.15e}", z.re, z.im, tr.re, tr.im);
    }
    out.csv("evolution.csv", &csv)?;
    let ss = steady_state(p, &ctx.budget).ok().map(|ss| cjson(steady_state_expectation(p, &ss, &obs)));
    out.json(
        "evolution.json",
        &json!({
            "initial": k,
            "level": args.level,
            "final": cjson(*ev.expectation.last().unwrap()),
            "steady_state_value": ss,
            "max_condition": ev.max_condition,
            "defective_warning": ev.defective_warning,
        }),
    )?;
    if ev.defective_warning {
        log::warn!("eigenvector matrices are badly conditioned (cond {:e})", ev.max_condition);
    }
    Ok(())
}
