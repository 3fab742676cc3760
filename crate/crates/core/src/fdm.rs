//! L1 finite-difference time march for scalar fractional ODEs
//! `D^α u = a(t)·u + b(t)`.

use std::fmt;
use std::sync::Arc;

use crate::caputo::{relative_l2, FracOrder, ScalarField1D, TimeGrid};
use crate::error::{HnsError, Result};
use crate::special::gamma_unchecked;

type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Affine right-hand side `a(t)·u + b(t)` with initial value and grid.
#[derive(Clone)]
pub struct FdeInstance {
    pub alpha: FracOrder,
    pub u0: f64,
    pub grid: TimeGrid,
    a: TimeFn,
    b: TimeFn,
}

impl fmt::Debug for FdeInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FdeInstance")
            .field("alpha", &self.alpha)
            .field("u0", &self.u0)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl FdeInstance {
    pub fn affine(
        alpha: FracOrder,
        u0: f64,
        grid: TimeGrid,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { alpha, u0, grid, a: Arc::new(a), b: Arc::new(b) }
    }

    /// `D^α u = u + Γ(3)/Γ(3−α) t^{2−α} − t² − 1`, `u(0) = 1`, solved by `1 + t²`.
    pub fn benchmark(alpha: FracOrder, grid: TimeGrid) -> Self {
        let a = alpha.get();
        let c = 2.0 / gamma_unchecked(3.0 - a);
        Self::affine(alpha, 1.0, grid, |_| 1.0, move |t| c * t.powf(2.0 - a) - t * t - 1.0)
    }

    pub fn rhs(&self, t: f64, u: f64) -> f64 {
        (self.a)(t) * u + (self.b)(t)
    }
}

/// March `n = 1..=N`, solving the scalar L1 equation at each step.
pub fn solve_fde_l1(instance: &FdeInstance) -> Result<ScalarField1D> {
    let grid = &instance.grid;
    let steps = grid.steps();
    let alpha = instance.alpha.get();
    let c0 = grid.dt().powf(-alpha) / gamma_unchecked(2.0 - alpha);
    // a_k = (k+1)^{1−α} − k^{1−α}
    let weights: Vec<f64> = (0..steps).map(|k| (k as f64 + 1.0).powf(1.0 - alpha) - (k as f64).powf(1.0 - alpha)).collect();
    let mut u = Vec::with_capacity(steps + 1);
    u.push(instance.u0);
    for n in 1..=steps {
        let t = grid.node(n);
        let lead = c0 * weights[0] - (instance.a)(t);
        if lead.abs() <= 1e-14 * c0 * weights[0] {
            return Err(HnsError::SingularStep { step: n });
        }
        // Known part of c0 Σ_k a_k (u_{n−k} − u_{n−k−1}).
        let mut history = weights[0] * u[n - 1];
        for k in 1..n {
            history -= weights[k] * (u[n - k] - u[n - k - 1]);
        }
        u.push(((instance.b)(t) + c0 * history) / lead);
    }
    ScalarField1D::new(u, None, None)
}

/// Relative L2 error of the benchmark march at the grid nodes.
pub fn benchmark_error(alpha: FracOrder, node_count: usize) -> Result<f64> {
    let grid = TimeGrid::from_node_count(2.0, node_count)?;
    let field = solve_fde_l1(&FdeInstance::benchmark(alpha, grid))?;
    let exact: Vec<f64> = grid.nodes().iter().map(|t| 1.0 + t * t).collect();
    relative_l2(&field.values, &exact)
}
