//! Problem parameters and closed-form exponents.

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Serialize, Serializer};

/// Whether `p = m` is admitted (inspection) or `p > m` is required (shooting).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Shooting,
    Inspection,
}

/// The quadruple `(m, N, p, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params<T: Real> {
    pub m: T,
    #[serde(rename = "N")]
    pub n: u32,
    pub p: T,
    pub sigma: T,
    #[serde(skip)]
    pub mode: Mode,
}

impl<T: Real> Params<T> {
    /// Parameters for shooting; requires `p > m`.
    pub fn new(m: T, n: u32, p: T, sigma: T) -> Result<Self> {
        Self::with_mode(m, n, p, sigma, Mode::Shooting)
    }

    /// Parameters for table inspection; admits `p = m`.
    pub fn inspection(m: T, n: u32, p: T, sigma: T) -> Result<Self> {
        Self::with_mode(m, n, p, sigma, Mode::Inspection)
    }

    fn with_mode(m: T, n: u32, p: T, sigma: T, mode: Mode) -> Result<Self> {
        let params = Params { m, n, p, sigma, mode };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.m.is_finite() && self.p.is_finite() && self.sigma.is_finite()) {
            return bad("non-finite parameter".into());
        }
        if self.m <= T::one() {
            return bad(format!("m must exceed 1, got {}", self.m));
        }
        if self.n < 1 {
            return bad("N must be at least 1".into());
        }
        if self.sigma <= T::lit(-2.0) {
            return bad(format!("sigma must exceed -2, got {}", self.sigma));
        }
        match self.mode {
            Mode::Shooting if self.p <= self.m => {
                return bad(format!("p must exceed m for shooting, got p={} m={}", self.p, self.m))
            }
            Mode::Inspection if self.p < self.m => {
                return bad(format!("p must be at least m, got p={} m={}", self.p, self.m))
            }
            _ => {}
        }
        if self.l() <= T::zero() {
            return bad(format!("L = sigma(m-1) + 2(p-1) must be positive, got {}", self.l()));
        }
        Ok(())
    }

    /// Dimension as a scalar.
    pub fn dim(&self) -> T {
        T::from_u32(self.n).expect("dimension fits")
    }

    /// `L = sigma(m-1) + 2(p-1)`.
    pub fn l(&self) -> T {
        self.sigma * (self.m - T::one()) + T::lit(2.0) * (self.p - T::one())
    }

    /// `(p-m)/(sigma+2)`: the unstable eigenvalue at the tail point and the
    /// slope coefficient appearing in the second equation of the system.
    pub fn drift(&self) -> T {
        (self.p - self.m) / (self.sigma + T::lit(2.0))
    }

    /// Tail decay exponent `(sigma+2)/(p-m)`; profiles decay like `xi^-decay`.
    pub fn tail_decay(&self) -> T {
        (self.sigma + T::lit(2.0)) / (self.p - self.m)
    }

    /// Level `Y = -(sigma+2)/(p-m)` of the no-return plane.
    pub fn no_return_level(&self) -> T {
        -self.tail_decay()
    }

    /// `kappa = 1/(alpha(p-1))`, the `z`-coordinate of the special point on the
    /// line of critical points at infinity.
    pub fn kappa(&self) -> T {
        self.l() / ((self.sigma + T::lit(2.0)) * (self.p - T::one()))
    }

    /// Same parameters with a different reaction exponent.
    pub fn with_p(&self, p: T) -> Result<Self> {
        Self::with_mode(self.m, self.n, p, self.sigma, self.mode)
    }

    pub fn to_f64(&self) -> Params<f64> {
        Params {
            m: self.m.to_f64_lossy(),
            n: self.n,
            p: self.p.to_f64_lossy(),
            sigma: self.sigma.to_f64_lossy(),
            mode: self.mode,
        }
    }
}

/// Self-similarity exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedExponents<T: Real> {
    pub alpha: T,
    pub beta: T,
    #[serde(rename = "L")]
    pub l: T,
}

/// `alpha = (sigma+2)/L`, `beta = (p-m)/L`.
pub fn derive<T: Real>(params: &Params<T>) -> Result<DerivedExponents<T>> {
    params.validate()?;
    let l = params.l();
    Ok(DerivedExponents {
        alpha: (params.sigma + T::lit(2.0)) / l,
        beta: (params.p - params.m) / l,
        l,
    })
}

/// A real number or `+infinity`, compared totally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Extended<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// `x < self`.
    pub fn exceeds(&self, x: T) -> bool {
        match self {
            Extended::Finite(v) => x < *v,
            Extended::Infinite => true,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(v) => v.to_f64_lossy(),
            Extended::Infinite => f64::INFINITY,
        }
    }

    pub fn min_with(self, x: T) -> T {
        match self {
            Extended::Finite(v) => v.min(x),
            Extended::Infinite => x,
        }
    }
}

impl<T: Real> Serialize for Extended<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => s.serialize_f64(v.to_f64_lossy()),
            Extended::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<T: Real> std::fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

/// Critical exponents for fixed `(m, N, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentTable<T: Real> {
    pub p_s: Extended<T>,
    pub p_c: Extended<T>,
    #[serde(rename = "p_F")]
    pub p_f: T,
    pub sigma_star: T,
    pub sigma_lower: T,
    pub sigma_c: T,
    #[serde(rename = "K_mN")]
    pub k_mn: T,
}

/// Sobolev critical exponent `m(N+2sigma+2)/(N-2)`, infinite for `N <= 2`.
pub fn sobolev_exponent<T: Real>(m: T, n: u32, sigma: T) -> Extended<T> {
    if n <= 2 {
        return Extended::Infinite;
    }
    let n = T::from_u32(n).unwrap();
    Extended::Finite(m * (n + T::lit(2.0) * sigma + T::lit(2.0)) / (n - T::lit(2.0)))
}

/// `m(N+sigma)/(N-2)`, infinite for `N <= 2`.
pub fn critical_exponent<T: Real>(m: T, n: u32, sigma: T) -> Extended<T> {
    if n <= 2 {
        return Extended::Infinite;
    }
    let n = T::from_u32(n).unwrap();
    Extended::Finite(m * (n + sigma) / (n - T::lit(2.0)))
}

/// Fujita-type exponent `m + (sigma+2)/N`.
pub fn fujita_exponent<T: Real>(m: T, n: u32, sigma: T) -> T {
    m + (sigma + T::lit(2.0)) / T::from_u32(n).unwrap()
}

pub fn exponent_table<T: Real>(params: &Params<T>) -> ExponentTable<T> {
    let (m, sigma) = (params.m, params.sigma);
    let n = params.dim();
    let one = T::one();
    let two = T::lit(2.0);
    ExponentTable {
        p_s: sobolev_exponent(m, params.n, sigma),
        p_c: critical_exponent(m, params.n, sigma),
        p_f: fujita_exponent(m, params.n, sigma),
        sigma_star: (m * n + two) / (m - one),
        sigma_lower: n * (m - one) / (m + one),
        sigma_c: two * (n - one) * (m - one) / (T::lit(3.0) * m + one),
        k_mn: (m * n - n + two * m + two) / (T::lit(4.0) * m),
    }
}

/// Multiplicity thresholds at `sigma = 0`: `min{(mk-1)/(k-1), p_s(0)}`.
pub fn pk_zero<T: Real>(m: T, n: u32, k: u32) -> Result<T> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("k must be at least 2, got {k}")));
    }
    if m <= T::one() {
        return Err(Error::InvalidParams(format!("m must exceed 1, got {m}")));
    }
    let k = T::from_u32(k).unwrap();
    let raw = (m * k - T::one()) / (k - T::one());
    Ok(sobolev_exponent(m, n, T::zero()).min_with(raw))
}

/// Exponent thresholds used by the non-existence argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PohozaevThresholds<T: Real> {
    /// Below or at this `p` the integral identity rules out decaying profiles.
    pub p1_poh: T,
    /// Above this `p` the barrier surface blocks the tail point; undefined at `sigma = 0`.
    pub p2_barrier: Option<T>,
}

pub fn pohozaev_thresholds<T: Real>(params: &Params<T>) -> PohozaevThresholds<T> {
    let (m, sigma) = (params.m, params.sigma);
    let n = params.dim();
    let one = T::one();
    let two = T::lit(2.0);
    let p1_poh = m
        + (sigma + two) * (sigma * (m + one) - n * (m - one)) / (n * (n + two * sigma + two));
    let p2_barrier = if sigma == T::zero() {
        None
    } else {
        Some((n + sigma) * (m - one) / (two * sigma))
    };
    PohozaevThresholds { p1_poh, p2_barrier }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: f64, n: u32, p: f64, s: f64) -> Params<f64> {
        Params::new(m, n, p, s).unwrap()
    }

    #[test]
    fn derived_exponents_by_hand() {
        let d = derive(&p(2.0, 5, 2.1, 0.1)).unwrap();
        assert!((d.l - 2.3).abs() < 1e-14);
        assert!((d.alpha - 2.1 / 2.3).abs() < 1e-14);
        assert!((d.beta - 0.1 / 2.3).abs() < 1e-14);
        let d = derive(&p(2.0, 5, 2.1, 0.0)).unwrap();
        assert!((d.alpha - 1.0 / 1.1).abs() < 1e-14);
        assert!((d.beta - 0.1 / 2.2).abs() < 1e-14);
    }

    #[test]
    fn inspection_mode_has_zero_beta() {
        let q = Params::<f64>::inspection(3.0, 4, 3.0, 0.7).unwrap();
        let d = derive(&q).unwrap();
        assert_eq!(d.beta, 0.0);
        assert!((d.alpha - 0.5).abs() < 1e-15);
        assert!(Params::new(3.0, 4, 3.0, 0.7).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Params::new(1.0, 3, 2.0, 0.0).is_err());
        assert!(Params::new(2.0, 3, 3.0, -2.0).is_err());
        assert!(Params::new(2.0, 0, 3.0, 0.0).is_err());
        assert!(Params::new(2.0, 3, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn table_by_hand() {
        let t = exponent_table(&p(2.0, 5, 2.1, 0.1));
        assert!((t.p_s.finite().unwrap() - 4.8).abs() < 1e-13);
        assert!((t.p_c.finite().unwrap() - 3.4).abs() < 1e-13);
        assert!((t.p_f - 2.42).abs() < 1e-13);
        assert!((t.sigma_star - 12.0).abs() < 1e-13);
        assert!((t.k_mn - 1.375).abs() < 1e-15);
        let t = exponent_table(&p(2.0, 2, 2.1, 0.0));
        assert!(t.p_s.is_infinite() && t.p_c.is_infinite());
        assert!(t.p_s.exceeds(1e300));
    }

    #[test]
    fn pk_zero_values() {
        assert!((pk_zero(2.0f64, 5, 2).unwrap() - 3.0).abs() < 1e-15);
        assert!((pk_zero(2.0f64, 5, 3).unwrap() - 2.5).abs() < 1e-15);
        assert!((pk_zero(2.0f64, 5, 1_000_000).unwrap() - 2.0).abs() < 1e-5);
        assert!(pk_zero(2.0, 5, 1).is_err());
        // 2m-1 = 7 exceeds the Sobolev exponent m(N+2)/(N-2) = 6 at N = 10
        assert!((pk_zero(4.0f64, 10, 2).unwrap() - 6.0).abs() < 1e-13);
        assert!((pk_zero(4.0f64, 5, 2).unwrap() - 7.0).abs() < 1e-13);
    }

    #[test]
    fn thresholds_by_hand() {
        let t = pohozaev_thresholds(&Params::<f64>::inspection(2.0, 3, 2.0, 8.0).unwrap());
        assert!((t.p1_poh - 16.0 / 3.0).abs() < 1e-13);
        let t = pohozaev_thresholds(&Params::<f64>::inspection(2.0, 5, 2.0, 5.0 / 3.0).unwrap());
        assert!((t.p1_poh - 2.0).abs() < 1e-14);
        let t = pohozaev_thresholds(&Params::<f64>::inspection(2.0, 5, 2.0, 2.0).unwrap());
        assert!((t.p2_barrier.unwrap() - 1.75).abs() < 1e-15);
        assert!(pohozaev_thresholds(&p(2.0, 5, 2.1, 0.0)).p2_barrier.is_none());
    }

    #[test]
    fn generic_over_f32() {
        let q = Params::<f32>::new(2.0, 5, 2.1, 0.1).unwrap();
        let d = derive(&q).unwrap();
        assert!((d.l - 2.3).abs() < 1e-5);
    }
}
