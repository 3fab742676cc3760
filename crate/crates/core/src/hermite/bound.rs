//! A-priori truncation bound for the Hermite stencils and an empirical
//! convergence-order estimator.

use super::basis::Degree;
use crate::caputo::FracOrder;
use crate::error::{domain, HnsError, Result};
use crate::special::gamma_unchecked;

/// Upper bound on `|D^α u(t_n) − stencil|` for `u ∈ C^{p+1}` with
/// `max_deriv = sup |u^{(p+1)}|`:
///
/// ```text
/// 1/((p+1)! Γ(1−α)) · [2^{−(p+1)} + α Γ((3+p)/2) Γ((1−2α+p)/2) / Γ(2−α+p)] · max_deriv · Δt^{p+1−α}
/// ```
pub fn error_bound(p: usize, alpha: FracOrder, dt: f64, max_deriv: f64) -> Result<f64> {
    let degree = Degree::try_from(p)?;
    if !(dt > 0.0) {
        return domain(format!("error_bound needs dt > 0, got {dt}"));
    }
    if !(max_deriv >= 0.0) {
        return domain(format!("error_bound needs max_deriv >= 0, got {max_deriv}"));
    }
    let a = alpha.get();
    let pf = degree.p() as f64;
    let half_arg = (1.0 - 2.0 * a + pf) / 2.0;
    if half_arg <= 0.0 && half_arg == half_arg.floor() {
        return domain(format!("Γ pole at (1−2α+p)/2 = {half_arg}"));
    }
    let factorial: f64 = (1..=degree.p() + 1).map(|k| k as f64).product();
    let bracket = 0.5f64.powi(degree.p() as i32 + 1)
        + a * gamma_unchecked((3.0 + pf) / 2.0) * gamma_unchecked(half_arg) / gamma_unchecked(2.0 - a + pf);
    Ok(bracket / (factorial * gamma_unchecked(1.0 - a)) * max_deriv * dt.powf(pf + 1.0 - a))
}

/// Least-squares slope of `ln(error)` against `ln(dt)`.
pub fn estimate_order(dts: &[f64], errors: &[f64]) -> Result<f64> {
    if dts.len() != errors.len() {
        return Err(HnsError::Contract(format!(
            "estimate_order got {} steps and {} errors",
            dts.len(),
            errors.len()
        )));
    }
    if dts.len() < 3 {
        return Err(HnsError::DegenerateFit(format!("need at least 3 points, got {}", dts.len())));
    }
    if errors.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(HnsError::DegenerateFit("errors must be positive and finite".into()));
    }
    if dts.iter().any(|d| !(*d > 0.0)) || dts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(HnsError::DegenerateFit("steps must be positive and strictly decreasing".into()));
    }
    let n = dts.len() as f64;
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    #[test]
    fn linear_bound_reduces_to_l1_constant() {
        for &a in &[0.2, 0.5, 0.9] {
            let dt = 0.01;
            let got = error_bound(1, alpha(a), dt, 1.0).unwrap();
            let l1 = 1.0 / (2.0 * gamma_unchecked(1.0 - a)) * (0.25 + a / ((1.0 - a) * (2.0 - a))) * dt.powf(2.0 - a);
            assert!(((got - l1) / l1).abs() < 1e-13, "a={a}");
        }
    }

    #[test]
    fn bound_scaling() {
        assert_eq!(error_bound(3, alpha(0.4), 0.1, 0.0).unwrap(), 0.0);
        for p in [1, 3, 5] {
            let a = error_bound(p, alpha(0.4), 0.1, 2.0).unwrap();
            let b = error_bound(p, alpha(0.4), 0.05, 2.0).unwrap();
            let want = 2f64.powf(p as f64 + 1.0 - 0.4);
            assert!((a / b - want).abs() < 1e-12 * want);
        }
        assert!(error_bound(2, alpha(0.4), 0.1, 1.0).is_err());
    }

    #[test]
    fn order_of_power_law() {
        let dts = [0.1, 0.05, 0.025, 0.0125];
        let errs: Vec<f64> = dts.iter().map(|d| 3.0 * d * d).collect();
        assert!((estimate_order(&dts, &errs).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fits() {
        assert!(estimate_order(&[0.1, 0.05], &[1.0, 0.5]).is_err());
        assert!(estimate_order(&[0.1, 0.05, 0.01], &[1.0, 0.0, 0.5]).is_err());
        assert!(estimate_order(&[0.1, 0.1, 0.01], &[1.0, 0.3, 0.5]).is_err());
    }
}
