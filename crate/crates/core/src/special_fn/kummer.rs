//! Kummer's confluent hypergeometric function `M(a, b, z)` on the real
//! half-line `0 <= z <= 50`, evaluated from its ascending series.

use serde::{Deserialize, Serialize};

use super::dd::Dd;
use crate::error::{Error, Result};

/// Largest `z` accepted by the series evaluators.
pub const Z_MAX: f64 = 50.0;

const MAX_TERMS: usize = 1_000_000;
const REL_TOL: f64 = 1e-16;
const SMALL_RUN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KummerParams {
    pub a: f64,
    pub b: f64,
    pub z: f64,
}

impl KummerParams {
    pub fn new(a: f64, b: f64, z: f64) -> Self {
        KummerParams { a, b, z }
    }

    fn validate(&self) -> Result<()> {
        let KummerParams { a, b, z } = *self;
        if !(a.is_finite() && b.is_finite() && z.is_finite()) {
            return Err(Error::Domain(format!("non-finite Kummer parameters ({a}, {b}, {z})")));
        }
        if b <= 0.0 && b.fract() == 0.0 {
            return Err(Error::Domain(format!("b = {b} is a non-positive integer")));
        }
        if z < 0.0 {
            return Err(Error::Domain(format!("z = {z} is negative")));
        }
        if z > Z_MAX {
            return Err(Error::Domain(format!("z = {z} exceeds the validated envelope z <= {Z_MAX}")));
        }
        Ok(())
    }
}

/// Tail control shared by the series: a term counts as negligible only
/// once the term ratio has settled below one half, so a transient small
/// term (e.g. `a` close to a negative integer) cannot end the sum early.
struct Truncation {
    run: usize,
}

impl Truncation {
    fn new() -> Self {
        Truncation { run: 0 }
    }

    fn done(&mut self, k: usize, p: &KummerParams, terms_small: bool) -> bool {
        let kf = k as f64;
        let settled = kf + p.a > 0.0 && {
            let ratio = (p.a + kf).abs() * p.z / ((p.b + kf).abs() * (kf + 1.0));
            ratio < 0.5
        };
        if terms_small && settled {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run >= SMALL_RUN
    }
}

/// `M(a, b, z) = sum_k (a)_k z^k / ((b)_k k!)`.
pub fn kummer_m(p: KummerParams) -> Result<f64> {
    p.validate()?;
    if p.z == 0.0 {
        return Ok(1.0);
    }
    let a = Dd::new(p.a);
    let b = Dd::new(p.b);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut trunc = Truncation::new();
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let num = (a + kf).mul_f64(p.z);
        let den = (b + kf).mul_f64(kf + 1.0);
        term = term * num / den;
        if term.is_zero() {
            // (a)_k vanished: a is a non-positive integer and M is a polynomial
            return Ok(sum.to_f64());
        }
        sum = sum + term;
        let small = term.abs().hi <= REL_TOL * sum.abs().hi;
        if trunc.done(k + 1, &p, small) {
            return Ok(sum.to_f64());
        }
    }
    Err(Error::KummerNonConvergence {
        a: p.a,
        b: p.b,
        z: p.z,
        terms: MAX_TERMS,
    })
}

/// `dM/dz (a, b, z) = (a / b) M(a + 1, b + 1, z)`.
pub fn kummer_m_dz(p: KummerParams) -> Result<f64> {
    p.validate()?;
    if p.a == 0.0 {
        return Ok(0.0);
    }
    Ok(p.a / p.b * kummer_m(KummerParams::new(p.a + 1.0, p.b + 1.0, p.z))?)
}

/// Second z-derivative, the contiguous relation applied twice.
pub fn kummer_m_dz2(p: KummerParams) -> Result<f64> {
    p.validate()?;
    if p.a == 0.0 || p.a == -1.0 {
        return Ok(0.0);
    }
    let scale = p.a * (p.a + 1.0) / (p.b * (p.b + 1.0));
    Ok(scale * kummer_m(KummerParams::new(p.a + 2.0, p.b + 2.0, p.z))?)
}

/// `dM/da (a, b, z)` by term-wise differentiation of the series.
///
/// The derivative of the Pochhammer symbol is carried through the
/// recurrence `D_{k+1} = D_k (a + k) + (a)_k`, so non-positive integer
/// `a` needs no special casing: the `M` terms stop but the derivative
/// series keeps going.
pub fn kummer_m_da(p: KummerParams) -> Result<f64> {
    p.validate()?;
    if p.z == 0.0 {
        return Ok(0.0);
    }
    let a = Dd::new(p.a);
    let b = Dd::new(p.b);
    // T_k = (a)_k w_k and U_k = d/da (a)_k w_k with w_k = z^k / ((b)_k k!)
    let mut t = Dd::ONE;
    let mut u = Dd::ZERO;
    let mut sum = Dd::ZERO;
    let mut trunc = Truncation::new();
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let rho = Dd::new(p.z) / (b + kf).mul_f64(kf + 1.0);
        let ak = a + kf;
        let u_next = (u * ak + t) * rho;
        let t_next = t * ak * rho;
        u = u_next;
        t = t_next;
        sum = sum + u;
        let scale = sum.abs().hi.max(f64::MIN_POSITIVE);
        let small = u.abs().hi <= REL_TOL * scale && t.abs().hi <= REL_TOL * scale;
        if trunc.done(k + 1, &p, small) {
            return Ok(sum.to_f64());
        }
    }
    Err(Error::KummerNonConvergence {
        a: p.a,
        b: p.b,
        z: p.z,
        terms: MAX_TERMS,
    })
}

/// Logarithmic z-derivative `M'/M`; fails when `|M|` is below `floor`.
pub(crate) fn log_derivative(p: KummerParams, floor: f64) -> Result<(f64, f64)> {
    let m = kummer_m(p)?;
    if m.abs() < floor {
        return Err(Error::Degenerate(format!(
            "M({}, {}, {}) = {m:e} is too close to zero for a logarithmic derivative",
            p.a, p.b, p.z
        )));
    }
    Ok((kummer_m_dz(p)? / m, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn m(a: f64, b: f64, z: f64) -> f64 {
        kummer_m(KummerParams::new(a, b, z)).unwrap()
    }

    #[test]
    fn value_at_origin_is_one() {
        assert_eq!(m(3.7, 2.0, 0.0), 1.0);
    }

    #[test]
    fn terminating_polynomial() {
        assert_relative_eq!(m(-1.0, 1.0, 2.0), -1.0, epsilon = 1e-15);
        // Laguerre L_3(x) = (-x^3 + 9x^2 - 18x + 6) / 6
        let x: f64 = 1.7;
        let l3 = (-x.powi(3) + 9.0 * x * x - 18.0 * x + 6.0) / 6.0;
        assert_relative_eq!(m(-3.0, 1.0, x), l3, max_relative = 1e-14);
    }

    #[test]
    fn exponential_special_case() {
        assert_relative_eq!(m(1.0, 1.0, 1.0), std::f64::consts::E, max_relative = 1e-15);
        assert_relative_eq!(m(2.0, 2.0, 7.5), 7.5f64.exp(), max_relative = 1e-14);
    }

    #[test]
    fn heavy_cancellation_matches_reference() {
        // reference values from a 40-digit evaluation
        assert_relative_eq!(m(-19.58, 1.0, 22.6), -4744.981835268715, max_relative = 1e-12);
        assert_relative_eq!(m(2.5, 3.0, 7.25), 709.9223943335008, max_relative = 1e-14);
    }

    #[test]
    fn z_derivative_examples() {
        let d = |a, b, z| kummer_m_dz(KummerParams::new(a, b, z)).unwrap();
        assert_eq!(d(0.0, 1.0, 5.0), 0.0);
        assert_relative_eq!(d(1.0, 1.0, 1.0), std::f64::consts::E, max_relative = 1e-15);
        assert_relative_eq!(d(-1.0, 1.0, 3.0), -1.0, max_relative = 1e-15);
    }

    #[test]
    fn a_derivative_examples() {
        let d = |a, b, z| kummer_m_da(KummerParams::new(a, b, z)).unwrap();
        assert_eq!(d(2.5, 3.0, 0.0), 0.0);
        // sum_{k>=1} 1 / (k k!) by direct partial sums
        let direct: f64 = (1..30)
            .map(|k| {
                let fact: f64 = (1..=k).map(|j| j as f64).product();
                1.0 / (k as f64 * fact)
            })
            .sum();
        assert_relative_eq!(d(0.0, 1.0, 1.0), direct, max_relative = 1e-14);
        assert_relative_eq!(d(0.0, 1.0, 1.0), 1.317902151454404, max_relative = 1e-14);
        assert_relative_eq!(d(-0.8, 1.0, 1.2), 0.9326394704833222, max_relative = 1e-13);
    }

    #[test]
    fn a_derivative_matches_finite_difference() {
        for &(a, b, z) in &[(-0.8, 1.0, 1.2), (-7.3, 1.0, 0.8), (2.2, 4.0, 12.0), (-15.4, 3.0, 20.0)] {
            let h = 1e-6 * f64::max(1.0, f64::abs(a));
            let fd = (m(a + h, b, z) - m(a - h, b, z)) / (2.0 * h);
            let series = kummer_m_da(KummerParams::new(a, b, z)).unwrap();
            assert_relative_eq!(series, fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(matches!(kummer_m(KummerParams::new(1.0, -2.0, 1.0)), Err(Error::Domain(_))));
        assert!(matches!(kummer_m(KummerParams::new(1.0, 1.0, -0.5)), Err(Error::Domain(_))));
        assert!(matches!(kummer_m(KummerParams::new(1.0, 1.0, 60.0)), Err(Error::Domain(_))));
    }

    proptest! {
        #[test]
        fn ode_residual_is_small(a in -20.0f64..5.0, b in 1u32..=12, z in 1e-6f64..30.0) {
            let p = KummerParams::new(a, b as f64, z);
            let mv = kummer_m(p).unwrap();
            let d1 = kummer_m_dz(p).unwrap();
            let d2 = kummer_m_dz2(p).unwrap();
            let residual = z * d2 + (p.b - z) * d1 - a * mv;
            prop_assert!(residual.abs() <= 1e-9 * (1.0 + mv.abs() + d1.abs()));
        }

        #[test]
        fn lowering_b_identity(a0 in -20.0f64..-0.1, z in 1e-6f64..30.0) {
            // (a - 1) M(a, 2, z) = M'(a, 1, z) - M(a, 1, z)
            let lhs = (a0 - 1.0) * m(a0, 2.0, z);
            let p = KummerParams::new(a0, 1.0, z);
            let rhs = kummer_m_dz(p).unwrap() - kummer_m(p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()).max(1e-300));
        }
    }
}
