//! Constants that map the Liouvillian onto the trigonometric Gaudin algebra.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::LiouvParams;
use crate::scalar::{ci, Real};

/// `cot z = i/p`, `g = Γ√(1−p²)/2`, `χ_α = i(2α − N − 1)`.
///
/// The branch of `z` is fixed by `e^{iz} = −(1+p)/√(1−p²)`, which gives `g sin z = iΓp/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RGMappingConstants<T> {
    pub z: Complex<T>,
    pub g: T,
    pub chi: Vec<Complex<T>>,
    p: T,
    gamma: T,
}

impl<T: Real> RGMappingConstants<T> {
    /// Needs `0 < |p| < 1`; at `p = 0` the pole `i/p` escapes to infinity and at `|p| = 1` the
    /// coupling `g` vanishes.
    pub fn new(params: &LiouvParams<T>) -> Result<Self> {
        params.validate()?;
        let p = params.p;
        if p == T::ZERO || p.abs() >= T::ONE {
            return Err(Error::domain("the Richardson-Gaudin mapping needs 0 < |p| < 1"));
        }
        let s = (T::ONE - p * p).sqrt();
        let eiz = -(T::ONE + p) / s;
        // z = −i log(e^{iz}) with log of a negative real: ln|·| + iπ
        let z = Complex::new(T::pi(), -eiz.abs().ln());
        let n = params.n_levels as i64;
        let chi = (1..=n).map(|a| ci::<T>() * T::from_int(2 * a - n - 1)).collect();
        Ok(RGMappingConstants { z, g: params.gamma * s * T::HALF, chi, p, gamma: params.gamma })
    }

    pub fn e_iz(&self) -> Complex<T> {
        let s = (T::ONE - self.p * self.p).sqrt();
        Complex::new(-(T::ONE + self.p) / s, T::ZERO)
    }

    pub fn cot_z(&self) -> Complex<T> {
        Complex::new(T::ZERO, T::ONE / self.p)
    }

    pub fn csc_z(&self) -> Complex<T> {
        // sin z = i p / √(1−p²)
        let s = (T::ONE - self.p * self.p).sqrt();
        Complex::new(T::ZERO, -s / self.p)
    }

    pub fn g_sin_z(&self) -> Complex<T> {
        Complex::new(T::ZERO, self.gamma * self.p * T::HALF)
    }

    /// `q_z = e^{2iz} = (1+p)/(1−p)`.
    pub fn q_z(&self) -> T {
        (T::ONE + self.p) / (T::ONE - self.p)
    }

    /// `p · cot z − i`, zero up to rounding.
    pub fn consistency(&self) -> T {
        let c = self.cot_z() * self.p - ci::<T>();
        c.re.abs().max(c.im.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Cplx;

    fn cot(z: Complex<f64>) -> Complex<f64> {
        z.cos() / z.sin()
    }

    #[test]
    fn branch_and_identities() {
        for p in [0.1, 0.37, 0.5, -0.4, 0.93] {
            let params = LiouvParams::<f64>::new(3, 2, vec![0.0; 3], 1.3, 1.0, p).unwrap();
            let m = RGMappingConstants::new(&params).unwrap();
            assert!((cot(m.z) - m.cot_z()).abs_() < 1e-12, "p={p}");
            assert!((cot(m.z) * p - Complex::i()).abs_() < 1e-12);
            assert!((1.0 / m.z.sin() - m.csc_z()).abs_() < 1e-12);
            assert!(((Complex::<f64>::i() * m.z).exp() - m.e_iz()).abs_() < 1e-12);
            assert!((m.z.sin() * m.g - m.g_sin_z()).abs_() < 1e-12);
            assert!(((Complex::<f64>::i() * m.z * 2.0).exp().re - m.q_z()).abs() < 1e-12);
            assert!(m.consistency() < 1e-14);
            assert_eq!(m.chi[0], Complex::new(0.0, -2.0));
            assert_eq!(m.chi[2], Complex::new(0.0, 2.0));
        }
        let p0 = LiouvParams::<f64>::su3(2, [0.0; 3], 0.0).unwrap();
        assert!(RGMappingConstants::new(&p0).is_err());
    }
}
