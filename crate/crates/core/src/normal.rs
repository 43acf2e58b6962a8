//! Standard normal tail probabilities and Z-test p-values.

use core::f64::consts::FRAC_1_SQRT_2;

/// `Φ(z)`.
pub fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `1 - Φ(z)`, without cancellation in the upper tail.
pub fn sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Clamps a tail probability into `(0, 1]`.
#[inline]
fn into_unit(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0)
}

/// Two-sided p-value `2 (1 - Φ(|z|))`.
pub fn two_sided_pvalue(z: f64) -> f64 {
    into_unit(libm::erfc(libm::fabs(z) * FRAC_1_SQRT_2))
}

/// Right-sided p-value `1 - Φ(z)`.
pub fn right_sided_pvalue(z: f64) -> f64 {
    into_unit(sf(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // scipy.stats.norm reference values
        let cases = [
            (0.0, 0.5),
            (1.0, 0.841_344_746_068_542_9),
            (-1.959_963_984_540_054, 0.025),
            (3.0, 0.998_650_101_968_369_9),
        ];
        for (z, phi) in cases {
            assert!((cdf(z) - phi).abs() <= 1e-15 * phi.max(1e-300), "z = {z}");
        }
        let tail = sf(8.0);
        let reference = 6.220_960_574_271_785e-16;
        assert!(((tail - reference) / reference).abs() < 1e-14);
    }

    #[test]
    fn pvalues_stay_in_unit_interval() {
        assert_eq!(two_sided_pvalue(0.0), 1.0);
        assert!((two_sided_pvalue(1.959_963_984_540_054) - 0.05).abs() < 1e-15);
        assert_eq!(two_sided_pvalue(60.0), f64::MIN_POSITIVE);
        assert_eq!(right_sided_pvalue(60.0), f64::MIN_POSITIVE);
        assert!((right_sided_pvalue(0.0) - 0.5).abs() < 1e-16);
        assert!(right_sided_pvalue(-40.0) <= 1.0);
    }
}
