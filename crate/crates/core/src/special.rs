//! Gamma function on the real line.
//!
//! Lanczos approximation (g = 7, nine coefficients) with reflection below 1/2.
//! Relative error stays under 1e-14 on the ranges used here.

use std::f64::consts::PI;

/// Abscissa of the minimum of Γ on the positive axis.
pub const GAMMA_ARGMIN: f64 = 1.461_632_144_968_362_3;
/// Γ at [`GAMMA_ARGMIN`].
pub const GAMMA_MIN: f64 = 0.885_603_194_410_888_7;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_series(x: f64) -> f64 {
    LANCZOS[1..].iter().enumerate().fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + (i + 1) as f64))
}

/// Γ(x). Poles return ±∞ (or NaN at non-positive integers).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    if x == x.floor() && x <= 23.0 {
        return (1..x as u64).map(|k| k as f64).product();
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * lanczos_series(x)
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x < 20.0 {
        return gamma(x).ln();
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + lanczos_series(x).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_and_half() {
        assert_eq!(gamma(1.0), 1.0);
        assert_eq!(gamma(5.0), 24.0);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma(1.5) - 0.5 * PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn minimum_constant() {
        assert!((gamma(GAMMA_ARGMIN) - GAMMA_MIN).abs() < 1e-15);
        assert!(gamma(GAMMA_ARGMIN - 1e-4) > GAMMA_MIN);
        assert!(gamma(GAMMA_ARGMIN + 1e-4) > GAMMA_MIN);
    }

    #[test]
    fn ln_gamma_large() {
        // ln 100! = ln Γ(101)
        let exact: f64 = (1..=100).map(|k| (k as f64).ln()).sum();
        assert!((ln_gamma(101.0) - exact).abs() < 1e-12 * exact);
        assert!((ln_gamma(30.5) - gamma(30.5).ln()).abs() < 1e-12 * 80.0);
    }
}
