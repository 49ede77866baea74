//! Bessel functions of the first kind and their positive zeros.

use std::f64::consts::PI;

use super::dd::Dd;

/// `J_n(x)` from the ascending series, summed in double-double so the
/// alternating terms stay accurate for `x` up to about 60.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = Dd::ONE;
    for j in 1..=order {
        term = term.mul_f64(half) / Dd::new(j as f64);
    }
    let q = -half * half;
    let mut sum = term;
    let mut run = 0;
    for k in 0.. {
        let kf = k as f64;
        term = term.mul_f64(q) / Dd::new((kf + 1.0) * (kf + 1.0 + order as f64));
        sum = sum + term;
        let settled = (kf + 1.0) * (kf + 1.0 + order as f64) > 2.0 * half * half;
        if settled && term.abs().hi <= 1e-17 * sum.abs().hi.max(1e-300) {
            run += 1;
            if run >= 3 {
                break;
            }
        } else {
            run = 0;
        }
        if k > 10_000 {
            break;
        }
    }
    sum.to_f64()
}

/// `J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2`, with `J_0' = -J_1`.
pub fn bessel_j_prime(order: u32, x: f64) -> f64 {
    if order == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(order - 1, x) - bessel_j(order + 1, x))
    }
}

/// k-th positive zero `j_{order,k}` (k >= 1), absolute accuracy ~1e-13.
///
/// Sign changes are bracketed on a grid of spacing 0.25 starting just
/// above `order` (below which `J_order` has no positive zero); zeros are
/// at least ~pi apart, so no bracket holds two of them. The McMahon
/// estimate only decides where to stop stepping.
pub fn bessel_j_zero(order: u32, k: u32) -> f64 {
    assert!(k >= 1, "zeros are indexed from 1");
    let n = order as f64;
    let mcmahon = (k as f64 + 0.5 * n - 0.25) * PI;
    let step = 0.25;
    let mut lo = n + 0.25;
    let mut f_lo = bessel_j(order, lo);
    let mut found = 0;
    loop {
        let hi = lo + step;
        let f_hi = bessel_j(order, hi);
        if f_lo == 0.0 {
            found += 1;
            if found == k {
                return lo;
            }
        } else if f_lo * f_hi < 0.0 {
            found += 1;
            if found == k {
                return bisect(|x| bessel_j(order, x), lo, hi, f_lo);
            }
        }
        lo = hi;
        f_lo = f_hi;
        debug_assert!(lo < 4.0 * mcmahon + 50.0, "zero scan ran away");
    }
}

pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn known_zeros() {
        // frozen from an independent 40-digit evaluation
        assert_abs_diff_eq!(bessel_j_zero(0, 1), 2.404825557695773, epsilon = 1e-12);
        assert_abs_diff_eq!(bessel_j_zero(1, 1), 3.831705970207512, epsilon = 1e-12);
        assert_abs_diff_eq!(bessel_j_zero(0, 2), 5.520078110286311, epsilon = 1e-12);
        assert_abs_diff_eq!(bessel_j_zero(2, 3), 11.619841172149059, epsilon = 1e-11);
        assert_abs_diff_eq!(bessel_j_zero(5, 1), 8.771483815959954, epsilon = 1e-11);
    }

    #[test]
    fn zero_is_a_root_of_the_series() {
        for order in 0..6 {
            for k in 1..5 {
                let j = bessel_j_zero(order, k);
                assert!(bessel_j(order, j).abs() < 1e-12, "J_{order}({j})");
            }
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let x = 4.3;
        let h = 1e-5;
        for order in 0..4 {
            let fd = (bessel_j(order, x + h) - bessel_j(order, x - h)) / (2.0 * h);
            assert_abs_diff_eq!(bessel_j_prime(order, x), fd, epsilon = 1e-9);
        }
    }
}
