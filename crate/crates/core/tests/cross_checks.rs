use collective_rg::bethe::{build_eigenvector_su3, certify, classify, Verdict};
use collective_rg::ed::analysis::{all_spectra, steady_state};
use collective_rg::ed::{build_sector_matrix, full_spectrum};
use collective_rg::meanfield::finite_size_extrapolation_check;
use collective_rg::rg::{decaying_candidates, solve_steady_state, SolverOptions};
use collective_rg::{LiouvParams, MemoryBudget, SectorLabel};

fn params(l: usize, p: f64, gamma0: f64) -> LiouvParams<f64> {
    LiouvParams::new(3, l, vec![-1.0, 0.0, 1.0], 1.0, gamma0, p).unwrap()
}

#[test]
fn bethe_steady_state_populations_match_ed() {
    let budget = MemoryBudget::default();
    for (l, p) in [(3, 0.3), (5, 0.5), (6, 0.8)] {
        let par = params(l, p, 1.0);
        let sol = solve_steady_state(&par, &SolverOptions::default()).unwrap();
        let v = build_eigenvector_su3(&sol).unwrap();
        let cert = certify(&v, &par, &budget).unwrap();
        assert!(cert.residual < 1e-10, "L={l}: residual {}", cert.residual);
        assert!(cert.leakage < 1e-12);
        let tr: num_complex::Complex64 = v.sector_vector.iter().sum();
        let ss = steady_state(&par, &budget).unwrap();
        let d = ss.rho.iter().zip(&v.sector_vector).map(|(a, b)| (a - b / tr).norm()).fold(0.0, f64::max);
        assert!(d < 1e-9, "L={l}: population mismatch {d:e}");
    }
}

#[test]
fn physical_roots_are_ed_eigenvalues_and_spurious_ones_are_not() {
    let budget = MemoryBudget::default();
    let par = params(4, 0.5, 0.0);
    let mut physical = 0;
    let mut spurious = 0;
    for s in ["0,-2,2", "2,-4,2", "1,-1,0", "2,0,-2"] {
        let sector = SectorLabel::new(s.split(',').map(|x| x.parse().unwrap()).collect());
        let ed = full_spectrum(&build_sector_matrix(&par, &sector, &budget).unwrap(), false, &budget).unwrap();
        let found = decaying_candidates(&par, &sector, &SolverOptions::default()).unwrap();
        for (sol, v) in found.iter().zip(classify(&par, &found, 1e-6, &budget)) {
            let dist = ed.eigenvalues.iter().map(|w| (w - sol.eigenvalue).norm()).fold(f64::INFINITY, f64::min);
            match v {
                Verdict::Physical(_) => {
                    physical += 1;
                    assert!(dist < 1e-8, "{sector}: physical root set {} is {dist:e} from ED", sol.eigenvalue);
                }
                Verdict::Spurious(_) => {
                    spurious += 1;
                    assert!(dist > 1e-3, "{sector}: rejected root set {} is an ED eigenvalue", sol.eigenvalue);
                }
                Verdict::Unchecked(why) => panic!("{sector}: unchecked ({why})"),
            }
        }
    }
    assert!(physical >= 2 && spurious >= 1, "physical {physical}, spurious {spurious}");
}

#[test]
fn slowest_modes_approach_the_linear_expansion() {
    let rows = finite_size_extrapolation_check(&params(10, 0.5, 1.0), &[6, 10, 14], &MemoryBudget::default()).unwrap();
    for s in [SectorLabel::new(vec![1, -1, 0]), SectorLabel::new(vec![1, 0, -1])] {
        let deltas: Vec<f64> = rows.iter().filter(|r| r.sector == s).map(|r| r.delta.abs()).collect();
        eprintln!("{s}: |exact - expansion| = {deltas:?}");
        assert_eq!(deltas.len(), 3);
        // the remainder is O(1/L)
        assert!(deltas[2] < deltas[0], "{s}: {deltas:?}");
        assert!(deltas[2] < 0.2, "{s}: {deltas:?}");
    }
}

#[test]
fn every_sector_is_covered_once() {
    let par = params(3, 0.25, 1.0);
    let spectra = all_spectra(&par, &MemoryBudget::default()).unwrap();
    let total: usize = spectra.iter().map(|s| s.eigenvalues.len()).sum();
    assert_eq!(total, 100);
    let trace: num_complex::Complex64 = spectra.iter().flat_map(|s| s.eigenvalues.iter()).sum();
    let matrix_trace: num_complex::Complex64 = spectra
        .iter()
        .map(|s| {
            let m = build_sector_matrix(&par, &s.sector, &MemoryBudget::default()).unwrap();
            m.entries.diagonal().iter().sum::<num_complex::Complex64>()
        })
        .sum();
    assert!((trace - matrix_trace).norm() < 1e-9 * matrix_trace.norm());
}
