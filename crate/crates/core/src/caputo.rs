//! Core types for Caputo derivatives of order α ∈ (0, 1): the order itself,
//! uniform time grids, nodal fields, analytic references and a brute-force
//! quadrature oracle.

use crate::error::{domain, HnsError, Result};
use crate::quadrature::integrate;
use crate::special::gamma_unchecked;

/// Fractional order α, always strictly inside (0, 1).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            domain(format!("fractional order must lie in (0, 1), got {alpha}"))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = HnsError;
    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

/// Uniform grid `t_k = k·dt`, `k = 0..=N`, on `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return domain(format!("time horizon must be positive, got {horizon}"));
        }
        if steps == 0 {
            return domain("time grid needs at least one step");
        }
        Ok(Self { horizon, steps, dt: horizon / steps as f64 })
    }

    /// Grid with `node_count = N + 1` nodes, the convention used by `M_t`.
    pub fn from_node_count(horizon: f64, node_count: usize) -> Result<Self> {
        if node_count < 2 {
            return domain(format!("need at least two time nodes, got {node_count}"));
        }
        Self::new(horizon, node_count - 1)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn node_count(&self) -> usize {
        self.steps + 1
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.dt
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.node(k)).collect()
    }
}

/// Nodal samples of a scalar function of time and, optionally, its first
/// and second derivatives.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScalarField1D {
    pub values: Vec<f64>,
    pub first: Option<Vec<f64>>,
    pub second: Option<Vec<f64>>,
}

impl ScalarField1D {
    pub fn new(values: Vec<f64>, first: Option<Vec<f64>>, second: Option<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        for (name, list) in [("first", &first), ("second", &second)] {
            if let Some(l) = list {
                if l.len() != n {
                    return Err(HnsError::Contract(format!(
                        "{name}-derivative list has {} entries, values have {n}",
                        l.len()
                    )));
                }
            }
        }
        Ok(Self { values, first, second })
    }

    /// Sample `u` and as many derivatives as are supplied on every grid node.
    pub fn sample(grid: &TimeGrid, derivs: &[&dyn Fn(f64) -> f64]) -> Result<Self> {
        let nodes = grid.nodes();
        let mut lists = derivs.iter().map(|f| nodes.iter().map(|&t| f(t)).collect::<Vec<_>>());
        let values = lists
            .next()
            .ok_or_else(|| HnsError::Contract("sample needs at least the function values".into()))?;
        let first = lists.next();
        let second = lists.next();
        Self::new(values, first, second)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Derivative list of order `d`, if present.
    pub fn order(&self, d: usize) -> Option<&[f64]> {
        match d {
            0 => Some(&self.values),
            1 => self.first.as_deref(),
            2 => self.second.as_deref(),
            _ => None,
        }
    }
}

/// Analytic Caputo derivative of `t^q`: `Γ(q+1)/Γ(q+1−α)·t^{q−α}`, and zero
/// for constants.
pub fn caputo_monomial(q: f64, alpha: FracOrder, t: f64) -> Result<f64> {
    if t < 0.0 {
        return domain(format!("caputo_monomial needs t >= 0, got {t}"));
    }
    if !(q >= 0.0) {
        return domain(format!("caputo_monomial needs q >= 0, got {q}"));
    }
    if q == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let a = alpha.get();
    Ok(gamma_unchecked(q + 1.0) / gamma_unchecked(q + 1.0 - a) * t.powf(q - a))
}

/// Brute-force Caputo derivative by adaptive quadrature of
/// `(1/Γ(1−α)) ∫₀ᵗ u'(τ)(t−τ)^{−α} dτ`.
///
/// The substitution `s = (t−τ)^{1−α}` maps the weak singularity at `τ = t`
/// to a bounded integrand `u'(t − s^{1/(1−α)}) / (1−α)` on `[0, t^{1−α}]`.
pub fn caputo_oracle<F>(uprime: F, alpha: FracOrder, t: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if t < 0.0 {
        return domain(format!("caputo_oracle needs t >= 0, got {t}"));
    }
    if !(tol > 0.0) {
        return domain(format!("caputo_oracle needs tol > 0, got {tol}"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let a = alpha.get();
    let g = gamma_unchecked(1.0 - a);
    let expo = 1.0 / (1.0 - a);
    let upper = t.powf(1.0 - a);
    let integrand = |s: f64| uprime((t - s.powf(expo)).max(0.0)) * expo;
    // The integral is divided by Γ(1−α) afterwards, so tighten accordingly.
    let r = integrate(integrand, 0.0, upper, tol * g, 20_000);
    if !r.converged {
        return Err(HnsError::OracleNonConvergence { estimate: r.value / g, error: r.error / g });
    }
    Ok(r.value / g)
}

/// `‖predicted − exact‖₂ / ‖exact‖₂`.
pub fn relative_l2(predicted: &[f64], exact: &[f64]) -> Result<f64> {
    if predicted.len() != exact.len() {
        return Err(HnsError::Contract(format!(
            "relative_l2 length mismatch: {} vs {}",
            predicted.len(),
            exact.len()
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (p, e) in predicted.iter().zip(exact) {
        num += (p - e) * (p - e);
        den += e * e;
    }
    if den == 0.0 {
        return domain("relative_l2 reference vector has zero norm");
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    #[test]
    fn frac_order_bounds() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(1.0).is_err());
        assert!(FracOrder::new(f64::NAN).is_err());
        assert_eq!(FracOrder::new(0.3).unwrap().get(), 0.3);
    }

    #[test]
    fn grid_nodes_are_equispaced() {
        let g = TimeGrid::from_node_count(2.0, 11).unwrap();
        assert_eq!(g.steps(), 10);
        assert_eq!(g.node_count(), 11);
        let nodes = g.nodes();
        assert_eq!(nodes[0], 0.0);
        assert_eq!(nodes[10], 2.0);
        for w in nodes.windows(2) {
            assert!((w[1] - w[0] - 0.2).abs() < 1e-15);
        }
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(-1.0, 4).is_err());
    }

    #[test]
    fn field_lengths_must_agree() {
        assert!(ScalarField1D::new(vec![0.0; 3], Some(vec![0.0; 2]), None).is_err());
        assert!(ScalarField1D::new(vec![0.0; 3], Some(vec![0.0; 3]), None).is_ok());
    }

    #[test]
    fn monomial_examples() {
        assert_eq!(caputo_monomial(0.0, alpha(0.4), 3.0).unwrap(), 0.0);
        let v = caputo_monomial(2.0, alpha(0.5), 1.0).unwrap();
        assert!((v - 1.504_505_556_127_5).abs() < 1e-10);
        let v = caputo_monomial(1.0, alpha(0.5), 1.0).unwrap();
        assert!((v - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-10);
        assert!(caputo_monomial(1.0, alpha(0.5), -1.0).is_err());
    }

    #[test]
    fn oracle_matches_monomials() {
        let tol = 1e-10;
        for &q in &[1.0, 2.0, 3.0, 4.0, 6.0] {
            for &a in &[0.3, 0.5, 0.7] {
                for &t in &[0.25, 1.0, 2.0] {
                    let uprime = |s: f64| q * s.powf(q - 1.0);
                    let o = caputo_oracle(uprime, alpha(a), t, tol).unwrap();
                    let e = caputo_monomial(q, alpha(a), t).unwrap();
                    assert!((o - e).abs() <= 10.0 * tol, "q={q} a={a} t={t}: {o} vs {e}");
                }
            }
        }
    }

    #[test]
    fn oracle_constant_and_shifted() {
        assert_eq!(caputo_oracle(|_| 0.0, alpha(0.5), 1.0, 1e-10).unwrap(), 0.0);
        // u = 1 + t²: the constant contributes nothing.
        let o = caputo_oracle(|s| 2.0 * s, alpha(0.5), 2.0, 1e-10).unwrap();
        let e = caputo_monomial(2.0, alpha(0.5), 2.0).unwrap();
        assert!((o - e).abs() < 1e-9);
    }

    #[test]
    fn relative_l2_examples() {
        assert_eq!(relative_l2(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(relative_l2(&[1.0, 1.0], &[1.0, 0.0]).unwrap(), 1.0);
        let exact = [0.3, -1.2, 4.0];
        let scaled: Vec<f64> = exact.iter().map(|v| v * (1.0 + 1e-3)).collect();
        assert!((relative_l2(&scaled, &exact).unwrap() - 1e-3).abs() < 1e-15);
        assert!(relative_l2(&[1.0], &[0.0]).is_err());
        assert!(relative_l2(&[1.0], &[0.0, 1.0]).is_err());
    }
}
