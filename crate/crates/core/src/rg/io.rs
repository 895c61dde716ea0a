//! JSON and CSV records of solved root sets.

use std::fmt::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::solve::SpectralSolution;
use crate::error::{Error, Result};
use crate::model::{LiouvParams, SectorLabel};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReIm {
    pub re: f64,
    pub im: f64,
}

impl ReIm {
    pub fn of<T: Real>(z: Complex<T>) -> Self {
        ReIm { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy() }
    }

    pub fn to_complex<T: Real>(self) -> Complex<T> {
        Complex::new(T::lit(self.re), T::lit(self.im))
    }
}

/// Serialized root set: rational roots of the first (`e`) and last (`w`) family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub sector: SectorLabel,
    pub e: Vec<ReIm>,
    pub w: Vec<ReIm>,
    pub residual: f64,
    pub eigenvalue: ReIm,
    pub params: LiouvParams<f64>,
}

impl SolutionRecord {
    pub fn from_solution<T: Real>(sol: &SpectralSolution<T>) -> Self {
        let p = &sol.params;
        SolutionRecord {
            sector: sol.sector.clone(),
            e: sol.e().into_iter().map(ReIm::of).collect(),
            w: if sol.q.len() > 1 { sol.w().into_iter().map(ReIm::of).collect() } else { vec![] },
            residual: sol.residual_norm.to_f64_lossy(),
            eigenvalue: ReIm::of(sol.eigenvalue),
            params: LiouvParams {
                n_levels: p.n_levels,
                n_atoms: p.n_atoms,
                eps: p.eps.iter().map(|x| x.to_f64_lossy()).collect(),
                gamma: p.gamma.to_f64_lossy(),
                gamma0: p.gamma0.to_f64_lossy(),
                p: p.p.to_f64_lossy(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::domain(format!("solution json: {e}")))
    }

    /// Rows `re,im,family` with families `e` and `w`.
    pub fn roots_csv(&self) -> String {
        let mut out = String::from("re,im,family\n");
        for (fam, v) in [("e", &self.e), ("w", &self.w)] {
            for z in v {
                let _ = writeln!(out, "{:.15e},{:.15e},{fam}", z.re, z.im);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let rec = SolutionRecord {
            sector: SectorLabel(vec![1, -1, 0]),
            e: vec![ReIm { re: 0.5, im: 1.25 }],
            w: vec![ReIm { re: -0.5, im: 2.0 }, ReIm { re: 0.0, im: 3.0 }],
            residual: 1e-12,
            eigenvalue: ReIm { re: -5.0, im: 0.1 },
            params: LiouvParams::su3(2, [-1.0, 0.0, 1.0], 0.5).unwrap(),
        };
        let back = SolutionRecord::from_json(&rec.to_json()).unwrap();
        assert_eq!(back, rec);
        let v: serde_json::Value = serde_json::from_str(&rec.to_json()).unwrap();
        for k in ["sector", "e", "w", "residual", "eigenvalue", "params"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(rec.roots_csv().lines().count(), 4);
    }
}
