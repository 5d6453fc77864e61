//! Log-gamma and digamma for positive real arguments.
//!
//! Both functions shift small arguments upward with the functional recurrence
//! and then evaluate an asymptotic series. Differences such as
//! `ln Γ(x + a) − ln Γ(x)` are formed directly in the asymptotic regime so
//! that large, nearly equal arguments do not lose precision to cancellation.

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Arguments at or above this use the Stirling series directly.
const LN_GAMMA_ASYMPTOTIC: f64 = 10.0;

/// Arguments at or above this use the digamma asymptotic series directly.
const DIGAMMA_ASYMPTOTIC: f64 = 6.0;

/// B_{2k} / (2k (2k − 1)) for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// B_{2k} / (2k) for k = 1..8.
const DIGAMMA_SERIES: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

fn stirling_tail(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

fn ln_gamma_stirling(x: f64) -> f64 {
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_tail(x)
}

/// Shifts `x` up to the asymptotic threshold, returning the shifted argument
/// and `ln(x (x + 1) ... (shifted − 1))`.
fn shift_up(x: f64, threshold: f64) -> (f64, f64) {
    let mut z = x;
    let mut prod = 1.0;
    while z < threshold {
        prod *= z;
        z += 1.0;
    }
    (z, prod.ln())
}

/// Natural logarithm of the gamma function for `x > 0`.
///
/// Returns NaN for non-positive or NaN input.
pub fn ln_gamma(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    if x >= LN_GAMMA_ASYMPTOTIC {
        ln_gamma_stirling(x)
    } else {
        let (z, ln_prod) = shift_up(x, LN_GAMMA_ASYMPTOTIC);
        ln_gamma_stirling(z) - ln_prod
    }
}

/// `ln Γ(x + a) − ln Γ(x)` for `x > 0` and `x + a > 0`.
pub fn ln_gamma_ratio(x: f64, a: f64) -> f64 {
    let z = x + a;
    if !(x > 0.0) || !(z > 0.0) {
        return f64::NAN;
    }
    if a == 0.0 {
        return 0.0;
    }
    if x < LN_GAMMA_ASYMPTOTIC || z < LN_GAMMA_ASYMPTOTIC {
        if x >= LN_GAMMA_ASYMPTOTIC || z >= LN_GAMMA_ASYMPTOTIC {
            // Only one side is small: move it into the asymptotic range.
            let lo = x.min(z);
            let (shifted, ln_prod) = shift_up(lo, LN_GAMMA_ASYMPTOTIC);
            return if x < z {
                ln_gamma_ratio(shifted, z - shifted) + ln_prod
            } else {
                -(ln_gamma_ratio(shifted, x - shifted) + ln_prod)
            };
        }
        return ln_gamma(z) - ln_gamma(x);
    }
    (x - 0.5) * (a / x).ln_1p() + a * z.ln() - a + stirling_tail(z) - stirling_tail(x)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, large) = if a < b { (a, b) } else { (b, a) };
    ln_gamma(small) - ln_gamma_ratio(large, small)
}

fn digamma_series(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    let mut acc = 0.0;
    for c in DIGAMMA_SERIES.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv2
}

/// Digamma ψ(x) = d/dx ln Γ(x) for `x > 0`.
pub fn digamma(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let mut z = x;
    let mut acc = 0.0;
    while z < DIGAMMA_ASYMPTOTIC {
        acc -= 1.0 / z;
        z += 1.0;
    }
    acc + z.ln() - 0.5 / z - digamma_series(z)
}

/// `ψ(x + a) − ψ(x)` for `x > 0` and `x + a > 0`.
pub fn digamma_diff(x: f64, a: f64) -> f64 {
    let v = x + a;
    if !(x > 0.0) || !(v > 0.0) {
        return f64::NAN;
    }
    if a == 0.0 {
        return 0.0;
    }
    let mut u = x;
    let mut v = v;
    let mut acc = 0.0;
    while u < DIGAMMA_ASYMPTOTIC {
        acc += 1.0 / u;
        u += 1.0;
    }
    while v < DIGAMMA_ASYMPTOTIC {
        acc -= 1.0 / v;
        v += 1.0;
    }
    let shift = v - u;
    acc + (shift / u).ln_1p() + 0.5 / u - 0.5 / v - digamma_series(v) + digamma_series(u)
}

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ln(π)`, exported for callers working with half-integer arguments.
pub const LN_PI: f64 = 1.144_729_885_849_400_2;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn ln_gamma_matches_log_factorials() {
        let mut ln_fact = 0.0_f64;
        for n in 1..=170u32 {
            // ln Γ(n) = ln (n−1)!
            assert_abs_diff_eq!(ln_gamma(n as f64), ln_fact, epsilon = 1e-12 * ln_fact.max(1.0));
            ln_fact += (n as f64).ln();
        }
    }

    #[test]
    fn ln_gamma_half_integers() {
        assert_abs_diff_eq!(ln_gamma(0.5), 0.5 * LN_PI, epsilon = 1e-13);
        // Γ(3/2) = √π / 2
        assert_abs_diff_eq!(ln_gamma(1.5), 0.5 * LN_PI - 2f64.ln(), epsilon = 1e-13);
    }

    #[test]
    fn ln_gamma_small_arguments() {
        // Γ(x) ≈ 1/x − γ for tiny x
        let x = 1e-8;
        assert_abs_diff_eq!(ln_gamma(x), (1.0 / x - EULER_GAMMA).ln(), epsilon = 1e-12);
        // Γ(1/4) Γ(3/4) = π √2
        let product = (ln_gamma(0.25) + ln_gamma(0.75)).exp();
        assert_abs_diff_eq!(product, PI * 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn ln_gamma_rejects_non_positive() {
        assert!(ln_gamma(0.0).is_nan());
        assert!(ln_gamma(-1.5).is_nan());
        assert!(ln_gamma(f64::NAN).is_nan());
    }

    #[test]
    fn ln_gamma_against_statrs() {
        let mut x = 1e-3;
        while x < 1e7 {
            let reference = statrs::function::gamma::ln_gamma(x);
            assert_abs_diff_eq!(ln_gamma(x), reference, epsilon = 1e-12 * reference.abs().max(1.0));
            x *= 1.37;
        }
    }

    #[test]
    fn ratio_agrees_with_direct_difference() {
        for &x in &[0.3, 2.0, 7.5, 12.0, 150.0, 4e4] {
            for &a in &[0.0, 0.5, 3.0, 11.0, 250.0, 1e5] {
                let direct = ln_gamma(x + a) - ln_gamma(x);
                let tol = 1e-12 * ln_gamma(x + a).abs().max(ln_gamma(x).abs()).max(1.0);
                assert_abs_diff_eq!(ln_gamma_ratio(x, a), direct, epsilon = tol);
            }
        }
        // negative shifts
        assert_abs_diff_eq!(ln_gamma_ratio(20.0, -15.0), ln_gamma(5.0) - ln_gamma(20.0), epsilon = 1e-11);
    }

    #[test]
    fn ratio_integer_shift_is_rising_factorial() {
        // Γ(x + k)/Γ(x) = x (x+1) ... (x+k−1), summed in log space
        let x = 1e6 + 0.25;
        let direct: f64 = (0..5).map(|k| (x + k as f64).ln()).sum();
        assert_abs_diff_eq!(ln_gamma_ratio(x, 5.0), direct, epsilon = 1e-12 * direct);
    }

    #[test]
    fn ln_beta_symmetric() {
        assert_abs_diff_eq!(ln_beta(2.0, 3.0), (1.0f64 / 12.0).ln(), epsilon = 1e-13);
        assert_abs_diff_eq!(ln_beta(3.5, 0.7), ln_beta(0.7, 3.5), epsilon = 1e-14);
    }

    #[test]
    fn digamma_known_values() {
        assert_abs_diff_eq!(digamma(1.0), -EULER_GAMMA, epsilon = 1e-13);
        assert_abs_diff_eq!(digamma(0.5), -EULER_GAMMA - 2.0 * 2f64.ln(), epsilon = 1e-13);
        let mut harmonic = 0.0;
        for n in 1..200u32 {
            assert_abs_diff_eq!(digamma(n as f64), harmonic - EULER_GAMMA, epsilon = 1e-12);
            harmonic += 1.0 / n as f64;
        }
    }

    #[test]
    fn digamma_against_statrs() {
        let mut x = 1e-3;
        while x < 1e8 {
            assert_abs_diff_eq!(digamma(x), statrs::function::gamma::digamma(x), epsilon = 1e-12 * digamma(x).abs().max(1.0));
            x *= 1.29;
        }
    }

    #[test]
    fn digamma_is_derivative_of_ln_gamma() {
        for &x in &[0.7, 3.0, 9.9, 55.0] {
            let h = 1e-5;
            let fd = (ln_gamma(x + h) - ln_gamma(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(digamma(x), fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn digamma_diff_agrees_with_direct() {
        for &x in &[0.2, 1.0, 5.5, 8.0, 90.0] {
            for &a in &[0.0, 0.4, 2.0, 17.0, 600.0] {
                assert_abs_diff_eq!(digamma_diff(x, a), digamma(x + a) - digamma(x), epsilon = 1e-12);
            }
        }
        // ψ(x + 1) − ψ(x) = 1/x even when x is huge
        let x = 3.3e9;
        assert_abs_diff_eq!(digamma_diff(x, 1.0) * x, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(digamma_diff(7.0, -2.5), digamma(4.5) - digamma(7.0), epsilon = 1e-12);
    }
}
