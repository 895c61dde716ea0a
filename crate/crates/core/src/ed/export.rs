//! CSV rendering of sector spectra.

use std::fmt::Write;

use super::SpectrumResult;
use crate::scalar::Real;

/// Header `s1,…,sN,re,im,method,residual`.
pub fn spectrum_csv_header(n_levels: usize) -> String {
    let mut h = String::new();
    for a in 1..=n_levels {
        let _ = write!(h, "s{a},");
    }
    h.push_str("re,im,method,residual");
    h
}

/// One row per eigenvalue; residual is empty when not computed.
pub fn spectrum_csv_rows<T: Real>(sp: &SpectrumResult<T>, out: &mut String) {
    let lab: String = sp.sector.0.iter().map(|x| format!("{x},")).collect();
    for (i, z) in sp.eigenvalues.iter().enumerate() {
        let res = sp.residual_norms.get(i).map(|r| format!("{:.6e}", r.to_f64_lossy())).unwrap_or_default();
        let _ = writeln!(
            out,
            "{lab}{:.15e},{:.15e},{},{res}",
            z.re.to_f64_lossy(),
            z.im.to_f64_lossy(),
            sp.method.as_str()
        );
    }
}

pub fn spectra_to_csv<T: Real>(n_levels: usize, spectra: &[SpectrumResult<T>]) -> String {
    let mut out = spectrum_csv_header(n_levels);
    out.push('\n');
    for sp in spectra {
        spectrum_csv_rows(sp, &mut out);
    }
    out
}
