//! Scalars that can carry a derivative with respect to the fractional order.
//!
//! Stencil kernels are closed-form in α (powers with α in the exponent and
//! Γ(1 − α)). Building them over [`Dual`] gives ∂kernel/∂α exactly, which the
//! inverse solver needs when α is a trainable unknown.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::special::{digamma_unchecked, gamma_unchecked};

/// Arithmetic needed by the stencil builders.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + Send
    + Sync
{
    fn cst(v: f64) -> Self;
    fn value(self) -> f64;
    /// `base^self` for a plain positive base.
    fn exp_base(self, base: f64) -> Self;
    fn gamma(self) -> Self;
    /// Magnitude used by series truncation tests.
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn exp_base(self, base: f64) -> Self {
        base.powf(self)
    }
    fn gamma(self) -> Self {
        gamma_unchecked(self)
    }
    #[inline]
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

/// First-order forward dual number `v + d ε`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }

    /// Seed an independent variable.
    pub const fn var(v: f64) -> Self {
        Self { v, d: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        let q = self.v / o.v;
        Dual::new(q, (self.d - q * o.d) / o.v)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, o: Dual) {
        self.v += o.v;
        self.d += o.d;
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: f64) -> Dual {
        Dual::new(self.v + o, self.d)
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: f64) -> Dual {
        Dual::new(self.v - o, self.d)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: f64) -> Dual {
        Dual::new(self.v * o, self.d * o)
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: f64) -> Dual {
        Dual::new(self.v / o, self.d / o)
    }
}

impl Scalar for Dual {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual::new(v, 0.0)
    }
    #[inline]
    fn value(self) -> f64 {
        self.v
    }
    fn exp_base(self, base: f64) -> Self {
        let p = base.powf(self.v);
        Dual::new(p, p * base.ln() * self.d)
    }
    fn gamma(self) -> Self {
        let g = gamma_unchecked(self.v);
        Dual::new(g, g * digamma_unchecked(self.v) * self.d)
    }
    #[inline]
    fn magnitude(self) -> f64 {
        self.v.abs().max(self.d.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_gamma_matches_finite_difference() {
        let a = 0.37;
        let g = Dual::var(1.0 - a).gamma();
        let h = 1e-6;
        let fd = (gamma_unchecked(1.0 - a + h) - gamma_unchecked(1.0 - a - h)) / (2.0 * h);
        assert!(((g.d - fd) / fd).abs() < 1e-8);
    }

    #[test]
    fn dual_power_derivative() {
        let e = Dual::var(0.4);
        let p = e.exp_base(3.0);
        assert!((p.v - 3f64.powf(0.4)).abs() < 1e-15);
        assert!((p.d - 3f64.powf(0.4) * 3f64.ln()).abs() < 1e-14);
        let q = (Dual::var(2.0) * Dual::var(2.0)) / Dual::cst(4.0);
        assert_eq!(q, Dual::new(1.0, 1.0));
    }
}
