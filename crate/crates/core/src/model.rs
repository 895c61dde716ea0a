//! Physical parameters, weak-symmetry sectors and the doubled occupation basis.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One Liouvillian instance: `N` levels, `L` atoms, level energies, rates and polarization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvParams<T> {
    pub n_levels: usize,
    pub n_atoms: usize,
    pub eps: Vec<T>,
    pub gamma: T,
    pub gamma0: T,
    pub p: T,
}

impl<T: Real> LiouvParams<T> {
    pub fn new(n_levels: usize, n_atoms: usize, eps: Vec<T>, gamma: T, gamma0: T, p: T) -> Result<Self> {
        let out = LiouvParams { n_levels, n_atoms, eps, gamma, gamma0, p };
        out.validate()?;
        Ok(out)
    }

    /// Three-level instance with `Γ = Γ₀ = 1`.
    pub fn su3(n_atoms: usize, eps: [f64; 3], p: f64) -> Result<Self> {
        Self::new(3, n_atoms, eps.iter().map(|&e| T::lit(e)).collect(), T::ONE, T::ONE, T::lit(p))
    }

    pub fn validate(&self) -> Result<()> {
        let fin = |x: T| x.to_f64_lossy().is_finite();
        if self.n_levels < 2 {
            return Err(Error::domain(format!("n_levels must be >= 2, got {}", self.n_levels)));
        }
        if self.n_atoms < 1 {
            return Err(Error::domain("n_atoms must be >= 1"));
        }
        if self.eps.len() != self.n_levels {
            return Err(Error::domain(format!(
                "eps has {} entries, expected n_levels = {}",
                self.eps.len(),
                self.n_levels
            )));
        }
        if !self.eps.iter().all(|&e| fin(e)) {
            return Err(Error::domain("eps entries must be finite"));
        }
        if !(fin(self.gamma) && self.gamma > T::ZERO) {
            return Err(Error::domain("gamma must be finite and > 0"));
        }
        if !(fin(self.gamma0) && self.gamma0 >= T::ZERO) {
            return Err(Error::domain("gamma0 must be finite and >= 0"));
        }
        if !(fin(self.p) && self.p.abs() <= T::ONE) {
            return Err(Error::domain("p must satisfy |p| <= 1"));
        }
        Ok(())
    }

    /// Jump-rate table: `Γ₀` on the diagonal, `Γ(1−p)` below, `Γ(1+p)` above.
    pub fn rate(&self, alpha: usize, beta: usize) -> T {
        use std::cmp::Ordering::*;
        match alpha.cmp(&beta) {
            Equal => self.gamma0,
            Greater => self.gamma * (T::ONE - self.p),
            Less => self.gamma * (T::ONE + self.p),
        }
    }

    /// Rescaled rate `γ = ΓL` used by the thermodynamic-limit formulas.
    pub fn gamma_tl(&self) -> T {
        self.gamma * T::from_count(self.n_atoms)
    }

    pub fn with_p(&self, p: T) -> Self {
        LiouvParams { p, ..self.clone() }
    }

    pub fn with_atoms(&self, n_atoms: usize) -> Self {
        LiouvParams { n_atoms, ..self.clone() }
    }

    pub fn from_json_str(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let out: Self = serde_json::from_str(s).map_err(|e| Error::domain(format!("parameter json: {e}")))?;
        out.validate()?;
        Ok(out)
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// Weak-symmetry quantum numbers `s_α = k_α − j̄_α`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SectorLabel(pub Vec<i64>);

impl SectorLabel {
    pub fn new(s: Vec<i64>) -> Self {
        SectorLabel(s)
    }

    pub fn zero(n: usize) -> Self {
        SectorLabel(vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        SectorLabel(self.0.iter().map(|x| -x).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn max_component(&self) -> i64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn sum_sq(&self) -> i64 {
        self.0.iter().map(|x| x * x).sum()
    }

    /// Checks `Σs = 0` and `|s_α| ≤ L`.
    pub fn validate(&self, n_levels: usize, n_atoms: usize) -> Result<()> {
        if self.0.len() != n_levels {
            return Err(Error::domain(format!("sector {self} has {} entries, expected {n_levels}", self.0.len())));
        }
        if self.0.iter().sum::<i64>() != 0 {
            return Err(Error::domain(format!("sector {self} does not sum to zero")));
        }
        let l = n_atoms as i64;
        if self.0.iter().any(|&x| x.abs() > l) {
            return Err(Error::domain(format!("sector {self} has a component outside [-{l}, {l}]")));
        }
        Ok(())
    }

    /// Sum of positive parts; the basis is non-empty iff this is at most `L`.
    fn positive_weight(&self) -> i64 {
        self.0.iter().filter(|&&x| x > 0).sum()
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl From<&[i64]> for SectorLabel {
    fn from(s: &[i64]) -> Self {
        SectorLabel(s.to_vec())
    }
}

/// First-copy occupations `k`; the second copy is `j̄ = k − s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SectorBasisState {
    pub k: Vec<i64>,
}

impl SectorBasisState {
    pub fn jbar(&self, s: &SectorLabel) -> Vec<i64> {
        self.k.iter().zip(&s.0).map(|(k, s)| k - s).collect()
    }
}

/// Every sector with a non-empty basis, lexicographic in `(s_2, …, s_N)`.
pub fn enumerate_sectors(n_levels: usize, n_atoms: usize) -> Vec<SectorLabel> {
    let l = n_atoms as i64;
    let mut out = Vec::new();
    let mut tail = vec![-l; n_levels - 1];
    loop {
        let s1 = -tail.iter().sum::<i64>();
        if s1.abs() <= l {
            let mut s = Vec::with_capacity(n_levels);
            s.push(s1);
            s.extend_from_slice(&tail);
            let lab = SectorLabel(s);
            if lab.positive_weight() <= l {
                out.push(lab);
            }
        }
        // odometer increment, last index fastest
        let mut i = tail.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if tail[i] < l {
                tail[i] += 1;
                for t in tail.iter_mut().skip(i + 1) {
                    *t = -l;
                }
                break;
            }
        }
    }
}

/// Occupation vectors of one sector, lexicographic in `(k_2, …, k_N)`.
pub fn enumerate_basis(n_atoms: usize, s: &SectorLabel) -> Vec<SectorBasisState> {
    let n = s.n();
    let l = n_atoms as i64;
    let mut out = Vec::new();
    if n < 2 || s.0.iter().sum::<i64>() != 0 {
        return out;
    }
    let mut k = vec![0i64; n];
    fn rec(pos: usize, rem: i64, s: &[i64], k: &mut Vec<i64>, out: &mut Vec<SectorBasisState>) {
        let n = s.len();
        if pos == n {
            if rem >= s[0].max(0) {
                k[0] = rem;
                out.push(SectorBasisState { k: k.clone() });
            }
            return;
        }
        let lo = s[pos].max(0);
        let mut v = lo;
        while v <= rem {
            k[pos] = v;
            rec(pos + 1, rem - v, s, k, out);
            v += 1;
        }
    }
    rec(1, l, &s.0, &mut k, &mut out);
    out
}

/// Number of basis states of a sector; closed form for `N = 3`, counting otherwise.
pub fn sector_dimension(n_atoms: usize, s: &SectorLabel) -> Result<usize> {
    s.validate(s.n(), n_atoms)?;
    if s.n() == 3 {
        let smax = s.0[1].abs().max(s.0[2].abs()).max((s.0[1] + s.0[2]).abs());
        let m = n_atoms as i64 - smax;
        if m < 0 {
            return Ok(0);
        }
        return Ok(((m + 1) * (m + 2) / 2) as usize);
    }
    Ok(enumerate_basis(n_atoms, s).len())
}

/// Number of spectral parameters per family, `M_a = L − Σ_{β≤a} s_β`.
pub fn spectral_counts(n_atoms: usize, s: &SectorLabel) -> Vec<usize> {
    let l = n_atoms as i64;
    let mut acc = 0;
    (0..s.n().saturating_sub(1))
        .map(|a| {
            acc += s.0[a];
            (l - acc) as usize
        })
        .collect()
}

/// Effective charges `(Q₊ᵉ, Q₋ᵉ, Q₊^ω, Q₋^ω)` of the three-level rational equations.
pub fn effective_charges<T: Real>(s: &SectorLabel) -> Result<[T; 4]> {
    if s.n() != 3 {
        return Err(Error::domain(format!("effective charges need N = 3, got sector {s}")));
    }
    let d1 = T::from_int(s.0[0] - s.0[1]) * T::HALF;
    let d2 = T::from_int(s.0[1] - s.0[2]) * T::HALF;
    Ok([T::TWO + d1, d1, T::TWO + d2, d2])
}

/// Basis of one sector with a reverse index.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub n_atoms: usize,
    pub sector: SectorLabel,
    pub states: Vec<SectorBasisState>,
    index: HashMap<Vec<i64>, usize>,
}

impl SectorBasis {
    pub fn new(n_atoms: usize, sector: &SectorLabel) -> Self {
        let states = enumerate_basis(n_atoms, sector);
        let index = states.iter().enumerate().map(|(i, st)| (st.k.clone(), i)).collect();
        SectorBasis { n_atoms, sector: sector.clone(), states, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        self.index.get(k).copied()
    }
}

/// Upper bound on matrix entries a caller is willing to allocate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryBudget {
    pub max_dense_dim: usize,
    pub max_entries: usize,
}

impl Default for MemoryBudget {
    fn default() -> Self {
        MemoryBudget { max_dense_dim: 4000, max_entries: 50_000_000 }
    }
}

impl MemoryBudget {
    pub fn check_dense(&self, dim: usize, what: &str) -> Result<()> {
        if dim > self.max_dense_dim || dim.saturating_mul(dim) > self.max_entries {
            return Err(Error::resource(format!("{what}: dense dimension {dim} exceeds limit {}", self.max_dense_dim)));
        }
        Ok(())
    }

    pub fn check_entries(&self, entries: usize, what: &str) -> Result<()> {
        if entries > self.max_entries {
            return Err(Error::resource(format!("{what}: {entries} entries exceed budget {}", self.max_entries)));
        }
        Ok(())
    }
}

/// Dimension of the symmetric irrep `(L, 0, …, 0)`, i.e. `C(L+N−1, N−1)`.
pub fn irrep_dimension(n_levels: usize, n_atoms: usize) -> usize {
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 1..n_levels {
        num *= (n_atoms + i) as u128;
        den *= i as u128;
    }
    (num / den) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_sectors(n: usize, l: usize) -> Vec<SectorLabel> {
        let occ = crate::ed::ladder::occupation_basis(n, l);
        let mut set = std::collections::BTreeSet::new();
        for k in &occ {
            for j in &occ {
                let s: Vec<i64> = k.iter().zip(j).map(|(a, b)| *a as i64 - *b as i64).collect();
                set.insert(s);
            }
        }
        let mut v: Vec<SectorLabel> = set.into_iter().map(SectorLabel).collect();
        v.sort_by(|a, b| a.0[1..].cmp(&b.0[1..]));
        v
    }

    #[test]
    fn sectors_match_pair_enumeration() {
        for (n, l) in [(2, 1), (2, 3), (3, 1), (3, 2), (3, 4), (4, 2)] {
            assert_eq!(enumerate_sectors(n, l), brute_sectors(n, l), "N={n} L={l}");
        }
        assert_eq!(enumerate_sectors(3, 1).len(), 7);
        let two: Vec<Vec<i64>> = enumerate_sectors(2, 1).into_iter().map(|s| s.0).collect();
        assert_eq!(two, vec![vec![1, -1], vec![0, 0], vec![-1, 1]]);
    }

    #[test]
    fn dimensions() {
        let s = |v: &[i64]| SectorLabel(v.to_vec());
        assert_eq!(sector_dimension(10, &s(&[0, 0, 0])).unwrap(), 66);
        assert_eq!(sector_dimension(10, &s(&[1, -1, 0])).unwrap(), 55);
        assert_eq!(sector_dimension(10, &s(&[10, 0, -10])).unwrap(), 1);
        assert_eq!(enumerate_basis(10, &s(&[1, -1, 0])).len(), 55);
        let b1: Vec<Vec<i64>> = enumerate_basis(1, &s(&[0, 0, 0])).into_iter().map(|b| b.k).collect();
        assert_eq!(b1, vec![vec![1, 0, 0], vec![0, 0, 1], vec![0, 1, 0]]);
        assert_eq!(enumerate_basis(2, &s(&[0, 0, 0])).len(), 6);
        assert!(sector_dimension(3, &s(&[1, 1, 1])).is_err());
    }

    #[test]
    fn completeness_and_conjugation() {
        for l in 1..=6 {
            let secs = enumerate_sectors(3, l);
            let tot: usize = secs.iter().map(|s| sector_dimension(l, s).unwrap()).sum();
            let d = (l + 1) * (l + 2) / 2;
            assert_eq!(tot, d * d);
            for s in &secs {
                assert_eq!(sector_dimension(l, s).unwrap(), sector_dimension(l, &s.neg()).unwrap());
                assert_eq!(sector_dimension(l, s).unwrap(), enumerate_basis(l, s).len());
                let m = spectral_counts(l, s);
                let mn = spectral_counts(l, &s.neg());
                assert!(m.iter().zip(&mn).all(|(a, b)| a + b == 2 * l));
            }
        }
    }

    #[test]
    fn counts_and_charges() {
        let s = |v: &[i64]| SectorLabel(v.to_vec());
        assert_eq!(spectral_counts(40, &s(&[0, 0, 0])), vec![40, 40]);
        assert_eq!(spectral_counts(10, &s(&[1, -1, 0])), vec![9, 10]);
        assert_eq!(spectral_counts(10, &s(&[1, 0, -1])), vec![9, 9]);
        assert_eq!(effective_charges::<f64>(&s(&[0, 0, 0])).unwrap(), [2.0, 0.0, 2.0, 0.0]);
        assert_eq!(effective_charges::<f64>(&s(&[1, -1, 0])).unwrap(), [3.0, 1.0, 1.5, -0.5]);
        assert_eq!(effective_charges::<f64>(&s(&[1, 0, -1])).unwrap(), [2.5, 0.5, 2.5, 0.5]);
        assert!(effective_charges::<f64>(&s(&[1, -1])).is_err());
    }

    #[test]
    fn ss_sector_is_diagonal_pairs() {
        let b = enumerate_basis(4, &SectorLabel::zero(3));
        assert_eq!(b.len(), irrep_dimension(3, 4));
        assert!(b.iter().all(|st| st.jbar(&SectorLabel::zero(3)) == st.k));
    }

    #[test]
    fn params_json_roundtrip() {
        let p = LiouvParams::<f64>::su3(4, [-1.0, 0.0, 1.0], 0.5).unwrap();
        let back = LiouvParams::<f64>::from_json_str(&p.to_json()).unwrap();
        assert_eq!(p, back);
        let bad = r#"{"n_levels":3,"n_atoms":2,"eps":[0,0],"gamma":1,"gamma0":1,"p":0.1}"#;
        assert!(matches!(LiouvParams::<f64>::from_json_str(bad), Err(Error::Domain(_))));
        let bad_p = r#"{"n_levels":2,"n_atoms":2,"eps":[0,0],"gamma":1,"gamma0":1,"p":1.5}"#;
        assert!(LiouvParams::<f64>::from_json_str(bad_p).is_err());
    }
}
