//! Gamma, log-gamma and digamma functions.
//!
//! Gamma and log-gamma come from `libm`. Digamma shifts its argument above
//! 10 with the recurrence and finishes with the asymptotic series.

use std::f64::consts::PI;

use crate::error::{domain, Result};

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma function without the pole check. Callers guarantee `x` is not a
/// non-positive integer.
pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Γ(x). Fails at the poles `0, -1, -2, ...`.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() || is_pole(x) {
        return domain(format!("gamma has a pole at {x}"));
    }
    Ok(gamma_unchecked(x))
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("ln_gamma requires x > 0, got {x}"));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    libm::lgamma(x)
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    if x <= 0.0 {
        // ψ(1 − x) − ψ(x) = π cot(πx)
        acc -= PI / (PI * x).tan();
        x = 1.0 - x;
    }
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli tail: Σ B_{2k} / (2k x^{2k})
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32_760.0 - inv2 / 12.0))))));
    acc + x.ln() - 0.5 * inv - tail
}

/// ψ(x) = Γ'(x)/Γ(x). Fails at the poles `0, -1, -2, ...`.
pub fn digamma(x: f64) -> Result<f64> {
    if x.is_nan() || is_pole(x) {
        return domain(format!("digamma has a pole at {x}"));
    }
    Ok(digamma_unchecked(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_integers_are_factorials() {
        let mut fact = 1.0_f64;
        for n in 1..=20 {
            assert!(rel(gamma(n as f64).unwrap(), fact) < 1e-13, "n = {n}");
            fact *= n as f64;
        }
    }

    #[test]
    fn gamma_half_integers() {
        let sqrt_pi = PI.sqrt();
        assert!(rel(gamma(0.5).unwrap(), 1.772_453_850_905_516) < 1e-14);
        assert!(rel(gamma(1.5).unwrap(), 0.5 * sqrt_pi) < 1e-14);
        assert!(rel(gamma(2.5).unwrap(), 0.75 * sqrt_pi) < 1e-14);
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        let n = 9;
        let mut num = 1.0;
        for k in 1..=2 * n {
            num *= k as f64;
        }
        let mut nf = 1.0;
        for k in 1..=n {
            nf *= k as f64;
        }
        let expected = num * sqrt_pi / (4f64.powi(n) * nf);
        assert!(rel(gamma(9.5).unwrap(), expected) < 1e-13);
    }

    #[test]
    fn gamma_is_accurate_to_a_few_ulp() {
        // 30-digit reference values, rounded to double.
        let cases = [
            (0.3, 2.991568987687591),
            (2.5, 1.329340388179137),
            (6.3, 201.81327518474745),
            (6.5, 287.88527781504433),
            (6.7, 413.4075167652708),
            (11.2, 5819090.083978557),
        ];
        for (x, want) in cases {
            assert!(rel(gamma(x).unwrap(), want) < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn gamma_recurrence_holds() {
        let mut x = 0.1;
        while x <= 10.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!(rel(lhs, rhs) < 1e-12, "x = {x}");
            x += 0.0731;
        }
    }

    #[test]
    fn gamma_poles_rejected() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-3.0).is_err());
        assert!(gamma(-2.5).is_ok());
        assert!(digamma(-1.0).is_err());
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.05, 0.3, 0.5, 1.7, 4.2, 11.0, 19.5] {
            assert!((ln_gamma(x).unwrap() - gamma(x).unwrap().ln()).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn digamma_reference_values() {
        assert!(rel(digamma(1.0).unwrap(), -EULER_GAMMA) < 1e-13);
        assert!(rel(digamma(2.0).unwrap(), 1.0 - EULER_GAMMA) < 1e-13);
        // ψ(1/2) = −γ − 2 ln 2
        assert!(rel(digamma(0.5).unwrap(), -EULER_GAMMA - 2.0 * 2f64.ln()) < 1e-13);
    }

    #[test]
    fn digamma_is_log_gamma_slope() {
        let h = 1e-6;
        let x = 1.5;
        let fd = (ln_gamma(x + h).unwrap() - ln_gamma(x - h).unwrap()) / (2.0 * h);
        assert!((fd - digamma(x).unwrap()).abs() < 1e-8);
        for &x in &[0.2f64, 0.9, 3.3, 7.7, 15.0, 19.9] {
            let h = 1e-5 * x.max(1.0);
            let fd = (ln_gamma(x + h).unwrap() - ln_gamma(x - h).unwrap()) / (2.0 * h);
            assert!(rel(fd, digamma(x).unwrap()) < 1e-7, "x = {x}");
        }
    }

    #[test]
    fn digamma_recurrence() {
        let mut x = 0.05;
        while x < 20.0 {
            let lhs = digamma(x + 1.0).unwrap();
            let rhs = digamma(x).unwrap() + 1.0 / x;
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "x = {x}");
            x += 0.37;
        }
    }
}
