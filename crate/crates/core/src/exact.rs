//! Exact comparisons between products of non-negative doubles and integers.
//!
//! Candidate envelopes are floors of ratios `(t + c) / kappa`. Evaluating
//! those ratios in floating point loses the binding constraint in a few
//! percent of cases (`x / (x / n)` often lands just below `n`), so every
//! comparison that decides an integer bound goes through [`cmp_products`],
//! which is exact for finite non-negative doubles and 64-bit integers.

use core::cmp::Ordering;

/// Splits a finite non-negative double into `(mantissa, exponent)` with
/// `x == mantissa * 2^exponent`.
#[inline]
fn decompose(x: f64) -> (u64, i32) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

#[inline]
fn cmp_pow2(a: u128, ea: i32, b: u128, eb: i32) -> Ordering {
    if a == 0 || b == 0 {
        return a.cmp(&b);
    }
    let la = (128 - a.leading_zeros()) as i32 + ea;
    let lb = (128 - b.leading_zeros()) as i32 + eb;
    if la != lb {
        return la.cmp(&lb);
    }
    // Equal magnitudes, so the shift is below the bit length of the other side.
    if ea >= eb {
        (a << (ea - eb) as u32).cmp(&b)
    } else {
        a.cmp(&(b << (eb - ea) as u32))
    }
}

/// Compares `x * a` with `y * b` exactly.
///
/// `x` and `y` must be finite and non-negative.
#[inline]
pub fn cmp_products(x: f64, a: u64, y: f64, b: u64) -> Ordering {
    debug_assert!(x >= 0.0 && x.is_finite() && y >= 0.0 && y.is_finite());
    let (mx, ex) = decompose(x);
    let (my, ey) = decompose(y);
    cmp_pow2(mx as u128 * a as u128, ex, my as u128 * b as u128, ey)
}

/// `floor(s * den / num)` computed exactly; `num` must be positive.
///
/// Saturates at `u64::MAX >> 1` for astronomically large quotients.
#[inline]
pub fn floor_ratio(s: f64, den: u64, num: f64) -> u64 {
    const CAP: u64 = u64::MAX >> 1;
    debug_assert!(num > 0.0);
    let approx = s * den as f64 / num;
    if !(approx < 4.0e18) {
        return CAP;
    }
    // Two roundings put approx within 2.3e-16 relative of the quotient (den
    // is exact below 2^53); when that band holds no integer, floor is exact.
    // Truncation is floor for the non-negative values here.
    if den < (1u64 << 53) {
        let slack = approx * 4.5e-16 + f64::MIN_POSITIVE;
        let lo = (approx - slack) as u64;
        if lo == (approx + slack) as u64 {
            return lo;
        }
    }
    let mut k = approx as u64;
    // k must satisfy k * num <= s * den < (k + 1) * num
    while k > 0 && cmp_products(num, k, s, den) == Ordering::Greater {
        k -= 1;
    }
    while cmp_products(num, k + 1, s, den) != Ordering::Greater {
        k += 1;
    }
    k
}

/// Exact `a / b <= y` for integers `a`, `b > 0` and a double `y >= 0`.
#[inline]
pub fn ratio_at_most(a: u64, b: u64, y: f64) -> bool {
    cmp_products(1.0, a, y, b) != Ordering::Greater
}

/// Compares the rationals `a / b` and `c / d` (denominators positive).
#[inline]
pub fn cmp_ratios(a: u64, b: u64, c: u64, d: u64) -> Ordering {
    (a as u128 * d as u128).cmp(&(c as u128 * b as u128))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_agree_with_exact_order_on_representable_cases() {
        assert_eq!(cmp_products(0.5, 4, 2.0, 1), Ordering::Equal);
        assert_eq!(cmp_products(0.1, 10, 1.0, 1), Ordering::Greater);
        assert_eq!(cmp_products(0.0, 7, 0.0, 3), Ordering::Equal);
        assert_eq!(cmp_products(0.0, 7, 1e-300, 1), Ordering::Less);
        assert_eq!(cmp_products(f64::MIN_POSITIVE / 4.0, 4, f64::MIN_POSITIVE, 1), Ordering::Equal);
    }

    #[test]
    fn floor_ratio_recovers_denominator_at_binding_point() {
        // The float route fails here: 0.7 / (0.7 / 3.0) < 3.
        let mut failures_float = 0;
        for n in 1..2000u64 {
            for &x in &[0.7, 0.1 + 0.0005, 0.35, 0.123456789] {
                assert_eq!(floor_ratio(x, n, x), n);
                if libm::floor(x / (x / n as f64)) as u64 != n {
                    failures_float += 1;
                }
            }
        }
        assert!(failures_float > 0);
    }

    #[test]
    fn floor_ratio_matches_simple_cases() {
        assert_eq!(floor_ratio(0.35, 1, 0.1), 3);
        assert_eq!(floor_ratio(0.0, 5, 0.1), 0);
        assert_eq!(floor_ratio(1.0, 3, 1.0), 3);
    }

    #[test]
    fn ratio_at_most_is_exact() {
        let third = 1.0 / 3.0; // slightly below 1/3
        assert!(!ratio_at_most(1, 3, third));
        assert!(ratio_at_most(1, 3, 0.34));
        assert!(ratio_at_most(0, 1, 0.0));
        assert!(ratio_at_most(1, 10, 0.1)); // 0.1 rounds up
    }
}
