//! Hermite-interpolation quadrature for the Caputo derivative.

mod basis;
mod bound;
mod moments;
mod stencil;

pub use basis::{hermite_basis, Degree, HermiteBasis, Poly, Rational};
pub use bound::{error_bound, estimate_order};
pub use moments::moment_integral;
pub use stencil::{apply_stencil, build_stencil, HermiteStencil, KernelCache, LagKernels, LagWeights, StencilBank};

use std::io::Write;

use crate::caputo::FracOrder;
use crate::error::Result;

/// Write the dimensionless kernels as CSV rows `p,alpha,lag,d,side,kernel_weight`
/// for lags `0..lags`.
pub fn dump_kernels<W: Write>(out: &mut W, degrees: &[Degree], alphas: &[FracOrder], lags: usize) -> Result<()> {
    writeln!(out, "p,alpha,lag,d,side,kernel_weight")?;
    for &deg in degrees {
        for &a in alphas {
            let k = KernelCache::global().get(deg, a, lags);
            for lag in 0..lags {
                for d in 0..deg.orders() {
                    for (side, name) in ["left", "right"].iter().enumerate() {
                        writeln!(out, "{},{},{},{},{},{:e}", deg.p(), a.get(), lag, d, name, k.kernel(lag)[side][d])?;
                    }
                }
            }
        }
    }
    Ok(())
}
