//! GELU in its exact error-function form, `σ(z) = z Φ(z)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// σ and its first three derivatives at `z`.
#[derive(Clone, Copy, Debug)]
pub struct GeluTaylor {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

#[inline]
fn cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z * FRAC_1_SQRT_2))
}

#[inline]
fn pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

pub fn gelu(z: f64) -> f64 {
    z * cdf(z)
}

#[inline]
pub fn gelu_taylor(z: f64) -> GeluTaylor {
    let phi = pdf(z);
    let cap = cdf(z);
    let z2 = z * z;
    GeluTaylor {
        s0: z * cap,
        s1: cap + z * phi,
        s2: phi * (2.0 - z2),
        s3: phi * z * (z2 - 4.0),
    }
}
