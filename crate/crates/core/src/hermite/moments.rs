//! Closed-form moments `μ_j(ℓ, α) = ∫₀¹ τ^j (ℓ + 1 − τ)^{−α} dτ`.
//!
//! Three regimes keep the evaluation accurate to a few ulps:
//! * `ℓ = 0`: the Beta function `B(j+1, 1−α) = j! / Π_{i≤j}(i+1−α)`.
//! * small `ℓ`: binomial expansion of `τ^j` about `ℓ + 1`, exact but with
//!   cancellation growing like `(ℓ+1)^{j+1}`.
//! * large `ℓ`: the positive series `L^{−α} Σ_k (α)_k/k! · L^{−k}/(j+k+1)`
//!   with `L = ℓ + 1`, which has no cancellation at all.

use crate::caputo::FracOrder;
use crate::scalar::Scalar;

/// First lag evaluated with the series instead of the binomial expansion.
pub(crate) const SERIES_FROM_LAG: usize = 3;

const MAX_SERIES_TERMS: usize = 400;

/// μ_j(ℓ, α) in double precision.
pub fn moment_integral(j: usize, lag: usize, alpha: FracOrder) -> f64 {
    moment(j, lag, alpha.get())
}

pub(crate) fn moment<S: Scalar>(j: usize, lag: usize, alpha: S) -> S {
    if lag == 0 {
        beta_moment(j, alpha)
    } else if lag < SERIES_FROM_LAG {
        binomial_moment(j, lag, alpha)
    } else {
        series_moment(j, lag, alpha)
    }
}

fn beta_moment<S: Scalar>(j: usize, alpha: S) -> S {
    let mut acc = S::cst(1.0);
    for i in 0..=j {
        // (i + 1)/(i + 1 − α), with the leading j! folded in term by term
        let num = if i == 0 { 1.0 } else { i as f64 };
        acc = acc * num / (-alpha + (i + 1) as f64);
    }
    acc
}

pub(crate) fn binomial_moment<S: Scalar>(j: usize, lag: usize, alpha: S) -> S {
    let big = (lag + 1) as f64;
    let small = lag as f64;
    let mut acc = S::cst(0.0);
    let mut binom = 1.0;
    for m in 0..=j {
        let e = -alpha + (m + 1) as f64;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let diff = e.exp_base(big) - e.exp_base(small);
        acc += diff / e * (sign * binom * big.powi((j - m) as i32));
        binom = binom * (j - m) as f64 / (m + 1) as f64;
    }
    acc
}

pub(crate) fn series_moment<S: Scalar>(j: usize, lag: usize, alpha: S) -> S {
    let big = (lag + 1) as f64;
    let inv = 1.0 / big;
    // coef_k = (α)_k / k! · L^{−k}
    let mut coef = S::cst(1.0);
    let mut acc = S::cst(1.0 / (j + 1) as f64);
    for k in 1..MAX_SERIES_TERMS {
        coef = coef * (alpha + (k - 1) as f64) * (inv / k as f64);
        let term = coef / (j + k + 1) as f64;
        acc += term;
        if term.magnitude() <= 1e-18 * acc.magnitude() {
            break;
        }
    }
    (-alpha).exp_base(big) * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::scalar::Dual;

    fn alpha(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    /// Independent quadrature of μ_j with the endpoint singularity removed
    /// by `s = (L − τ)^{1−α}` on the last lag.
    fn oracle(j: usize, lag: usize, a: f64) -> f64 {
        let big = (lag + 1) as f64;
        if lag == 0 {
            let expo = 1.0 / (1.0 - a);
            integrate(|s: f64| (1.0 - s.powf(expo)).max(0.0).powi(j as i32) * expo, 0.0, 1.0, 1e-15, 5000).value
        } else {
            integrate(|t: f64| t.powi(j as i32) * (big - t).powf(-a), 0.0, 1.0, 1e-16, 5000).value
        }
    }

    #[test]
    fn documented_examples() {
        assert!((moment_integral(0, 0, alpha(0.5)) - 2.0).abs() < 1e-15);
        assert!((moment_integral(1, 0, alpha(0.5)) - 4.0 / 3.0).abs() < 1e-15);
        for lag in 0..40 {
            for &a in &[0.2, 0.5, 0.8] {
                let l = lag as f64;
                let expected = ((l + 1.0).powf(1.0 - a) - l.powf(1.0 - a)) / (1.0 - a);
                let got = moment_integral(0, lag, alpha(a));
                assert!(((got - expected) / expected).abs() < 1e-13, "lag={lag} a={a}");
            }
        }
    }

    #[test]
    fn matches_quadrature_oracle() {
        for j in 0..5 {
            for &lag in &[0usize, 1, 2, 3, 4, 7, 9, 30, 127] {
                for &a in &[0.3, 0.5, 0.7] {
                    let got = moment_integral(j, lag, alpha(a));
                    let want = oracle(j, lag, a);
                    assert!(((got - want) / want).abs() < 1e-12, "j={j} lag={lag} a={a}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn regimes_agree_at_crossover() {
        for j in 0..5 {
            for lag in SERIES_FROM_LAG..SERIES_FROM_LAG + 4 {
                let b: f64 = binomial_moment(j, lag, 0.45);
                let s: f64 = series_moment(j, lag, 0.45);
                // Binomial cancellation grows like (ℓ+1)^{j+1}.
                let tol = 64.0 * f64::EPSILON * ((lag + 1) as f64).powi(j as i32 + 1);
                assert!(((b - s) / s).abs() < tol.max(1e-14), "j={j} lag={lag}");
            }
        }
    }

    #[test]
    fn alpha_derivative_matches_finite_difference() {
        // Five-point stencil: the binomial regime cancels, so a tiny step
        // would be dominated by roundoff.
        let h = 1e-3;
        for j in 0..5 {
            for &lag in &[0usize, 1, 2, 5, 60] {
                let a = 0.41;
                let d = moment(j, lag, Dual::var(a)).d;
                let f = |x: f64| moment(j, lag, x);
                let fd = (8.0 * (f(a + h) - f(a - h)) - (f(a + 2.0 * h) - f(a - 2.0 * h))) / (12.0 * h);
                assert!(((d - fd) / fd).abs() < 1e-8, "j={j} lag={lag}: {d} vs {fd}");
            }
        }
    }
}
