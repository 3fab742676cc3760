//! Quadrature stencils for the Caputo derivative built from Hermite
//! interpolation on each interval `[t_{k−1}, t_k]`.
//!
//! On a uniform grid the contribution of the interval `ℓ` steps behind the
//! target node depends only on `(p, α, ℓ, d)`:
//!
//! ```text
//! D^α u(t_n) ≈ Σ_{ℓ=0}^{n−1} Σ_d Δt^{d−α} [ K_ℓ^{L,d} u^{(d)}(t_{n−1−ℓ}) + K_ℓ^{R,d} u^{(d)}(t_{n−ℓ}) ]
//! K_ℓ^{e,d} = (1/Γ(1−α)) Σ_j c_j^{e,d} μ_j(ℓ, α)
//! ```
//!
//! where `c^{e,d}` are the coefficients of the derivative of the matching
//! basis polynomial in the local variable τ.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::basis::{hermite_basis, Degree};
use super::moments::moment;
use crate::caputo::{FracOrder, ScalarField1D, TimeGrid};
use crate::error::{domain, HnsError, Result};
use crate::scalar::{Dual, Scalar};

pub(crate) const LEFT: usize = 0;
pub(crate) const RIGHT: usize = 1;

/// `[side][d]` weights for one lag; unused derivative slots are zero.
pub type LagWeights<S = f64> = [[S; 3]; 2];

/// Coefficients of `h'` in τ for every (side, d), per degree.
fn derivative_coeffs(degree: Degree) -> &'static [[Vec<f64>; 3]; 2] {
    static TABLE: OnceLock<Vec<[[Vec<f64>; 3]; 2]>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        Degree::ALL
            .iter()
            .map(|&deg| {
                let basis = hermite_basis(deg.p()).expect("supported degree");
                let mut out: [[Vec<f64>; 3]; 2] = Default::default();
                for (side, row) in out.iter_mut().enumerate() {
                    for (d, slot) in row.iter_mut().enumerate().take(deg.orders()) {
                        *slot = basis.function(d, side).derivative().coeffs_f64();
                    }
                }
                out
            })
            .collect()
    });
    let idx = Degree::ALL.iter().position(|&d| d == degree).unwrap();
    &table[idx]
}

/// Dimensionless per-lag kernels `K_ℓ`, including the `1/Γ(1−α)` factor.
#[derive(Clone, Debug)]
pub struct LagKernels<S = f64> {
    degree: Degree,
    alpha: S,
    kernels: Vec<LagWeights<S>>,
}

impl<S: Scalar> LagKernels<S> {
    /// Kernels for lags `0..lags`.
    pub fn new(degree: Degree, alpha: S, lags: usize) -> Self {
        let mut k = Self { degree, alpha, kernels: Vec::new() };
        k.extend_to(lags);
        k
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn extend_to(&mut self, lags: usize) {
        if lags <= self.kernels.len() {
            return;
        }
        let coeffs = derivative_coeffs(self.degree);
        let inv_gamma = S::cst(1.0) / (-self.alpha + 1.0).gamma();
        let p = self.degree.p();
        let m = self.degree.orders();
        for lag in self.kernels.len()..lags {
            let mu: Vec<S> = (0..p).map(|j| moment(j, lag, self.alpha)).collect();
            let mut w = [[S::cst(0.0); 3]; 2];
            for side in [LEFT, RIGHT] {
                for d in 0..m {
                    let mut acc = S::cst(0.0);
                    for (c, mu_j) in coeffs[side][d].iter().zip(&mu) {
                        if *c != 0.0 {
                            acc += *mu_j * *c;
                        }
                    }
                    w[side][d] = acc * inv_gamma;
                }
            }
            self.kernels.push(w);
        }
    }

    #[inline]
    pub fn kernel(&self, lag: usize) -> &LagWeights<S> {
        &self.kernels[lag]
    }
}

/// Thread-safe cache of double-precision kernels keyed by `(p, α)`.
/// Readers share; a miss or a longer request takes the write lock.
#[derive(Default)]
pub struct KernelCache {
    inner: RwLock<HashMap<(Degree, u64), Arc<LagKernels>>>,
}

impl KernelCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache.
    pub fn global() -> &'static KernelCache {
        static CACHE: OnceLock<KernelCache> = OnceLock::new();
        CACHE.get_or_init(KernelCache::new)
    }

    pub fn get(&self, degree: Degree, alpha: FracOrder, lags: usize) -> Arc<LagKernels> {
        let key = (degree, alpha.get().to_bits());
        if let Some(k) = self.inner.read().unwrap().get(&key) {
            if k.len() >= lags {
                return Arc::clone(k);
            }
        }
        let mut map = self.inner.write().unwrap();
        let entry = map
            .entry(key)
            .or_insert_with(|| Arc::new(LagKernels::new(degree, alpha.get(), 0)));
        if entry.len() < lags {
            let mut grown = (**entry).clone();
            grown.extend_to(lags);
            *entry = Arc::new(grown);
        }
        Arc::clone(entry)
    }
}

/// Weights approximating `D^α u(t_n)` from nodal data on `t_0..t_n`.
#[derive(Clone, Debug)]
pub struct HermiteStencil {
    pub degree: Degree,
    pub alpha: FracOrder,
    pub n: usize,
    pub dt: f64,
    /// `weights[ℓ][side][d]`: side 0 multiplies node `n−1−ℓ`, side 1 node `n−ℓ`.
    pub weights: Vec<LagWeights>,
}

/// Assemble the stencil for node `n` on a grid with step `dt`. `n = 0`
/// yields the empty stencil, whose value is zero.
pub fn build_stencil(p: usize, alpha: FracOrder, n: usize, dt: f64) -> Result<HermiteStencil> {
    let degree = Degree::try_from(p)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return domain(format!("stencil step must be positive, got {dt}"));
    }
    let kernels = KernelCache::global().get(degree, alpha, n);
    let scale = step_scales(degree, alpha.get(), dt);
    let weights = (0..n)
        .map(|lag| {
            let k = kernels.kernel(lag);
            let mut w = [[0.0; 3]; 2];
            for side in [LEFT, RIGHT] {
                for d in 0..degree.orders() {
                    w[side][d] = k[side][d] * scale[d];
                }
            }
            w
        })
        .collect();
    Ok(HermiteStencil { degree, alpha, n, dt, weights })
}

/// `Δt^{d−α}` for `d = 0, 1, 2`.
fn step_scales<S: Scalar>(degree: Degree, alpha: S, dt: f64) -> [S; 3] {
    let mut s = [S::cst(0.0); 3];
    for (d, slot) in s.iter_mut().enumerate().take(degree.orders()) {
        *slot = (-alpha + d as f64).exp_base(dt);
    }
    s
}

/// Weighted sum of nodal data approximating `D^α u(t_n)`.
pub fn apply_stencil(stencil: &HermiteStencil, field: &ScalarField1D) -> Result<f64> {
    let m = stencil.degree.orders();
    let mut lists = Vec::with_capacity(m);
    for d in 0..m {
        let list = field.order(d).ok_or_else(|| {
            HnsError::Contract(format!(
                "degree {} stencil needs derivative order {d} at every node",
                stencil.degree.p()
            ))
        })?;
        lists.push(list);
    }
    if field.len() < stencil.n + 1 {
        return Err(HnsError::Contract(format!(
            "stencil for node {} needs {} nodal samples, field has {}",
            stencil.n,
            stencil.n + 1,
            field.len()
        )));
    }
    let n = stencil.n;
    let mut acc = Compensated::default();
    for (lag, w) in stencil.weights.iter().enumerate() {
        let right = n - lag;
        let left = right - 1;
        for (d, list) in lists.iter().enumerate() {
            acc.add(w[LEFT][d] * list[left]);
            acc.add(w[RIGHT][d] * list[right]);
        }
    }
    Ok(acc.total())
}

/// Neumaier summation.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Dense stencil weights for every target node of one time grid:
/// `D^α u(t_n) ≈ Σ_k Σ_d W[n][k][d] u^{(d)}(t_k)` for `n = 1..=N`.
#[derive(Clone, Debug)]
pub struct StencilBank {
    degree: Degree,
    steps: usize,
    weights: Vec<f64>,
    /// ∂W/∂α when assembled for a trainable order.
    alpha_grad: Option<Vec<f64>>,
}

impl StencilBank {
    pub fn new(degree: Degree, alpha: FracOrder, grid: &TimeGrid) -> Self {
        let kernels = KernelCache::global().get(degree, alpha, grid.steps());
        let scale = step_scales(degree, alpha.get(), grid.dt());
        let mut bank = Self::empty(degree, grid.steps(), false);
        bank.fill(|lag, side, d| kernels.kernel(lag)[side][d] * scale[d], |_, _, _| 0.0);
        bank
    }

    /// Bank that also carries `∂W/∂α`, computed by forward differentiation
    /// of the closed-form kernels.
    pub fn with_alpha_gradient(degree: Degree, alpha: FracOrder, grid: &TimeGrid) -> Self {
        let a = Dual::var(alpha.get());
        let kernels = LagKernels::new(degree, a, grid.steps());
        let scale = step_scales(degree, a, grid.dt());
        let mut bank = Self::empty(degree, grid.steps(), true);
        bank.fill(
            |lag, side, d| (kernels.kernel(lag)[side][d] * scale[d]).v,
            |lag, side, d| (kernels.kernel(lag)[side][d] * scale[d]).d,
        );
        bank
    }

    fn empty(degree: Degree, steps: usize, with_grad: bool) -> Self {
        let len = steps * (steps + 1) * degree.orders();
        Self { degree, steps, weights: vec![0.0; len], alpha_grad: with_grad.then(|| vec![0.0; len]) }
    }

    fn fill(
        &mut self,
        value: impl Fn(usize, usize, usize) -> f64,
        grad: impl Fn(usize, usize, usize) -> f64,
    ) {
        let m = self.degree.orders();
        for n in 1..=self.steps {
            for lag in 0..n {
                let right = n - lag;
                let left = right - 1;
                for d in 0..m {
                    let il = self.index(n, left, d);
                    let ir = self.index(n, right, d);
                    self.weights[il] += value(lag, LEFT, d);
                    self.weights[ir] += value(lag, RIGHT, d);
                    if let Some(g) = self.alpha_grad.as_mut() {
                        g[il] += grad(lag, LEFT, d);
                        g[ir] += grad(lag, RIGHT, d);
                    }
                }
            }
        }
    }

    #[inline]
    fn index(&self, n: usize, k: usize, d: usize) -> usize {
        let m = self.degree.orders();
        ((n - 1) * (self.steps + 1) + k) * m + d
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `W[n][k][d]`, `n ≥ 1`.
    #[inline]
    pub fn weight(&self, n: usize, k: usize, d: usize) -> f64 {
        self.weights[self.index(n, k, d)]
    }

    #[inline]
    pub fn alpha_gradient(&self, n: usize, k: usize, d: usize) -> Option<f64> {
        self.alpha_grad.as_ref().map(|g| g[self.index(n, k, d)])
    }

    pub fn has_alpha_gradient(&self) -> bool {
        self.alpha_grad.is_some()
    }

    /// Row `n` as a slice laid out `[k][d]`.
    #[inline]
    pub fn row(&self, n: usize) -> &[f64] {
        let m = self.degree.orders();
        let start = self.index(n, 0, 0);
        &self.weights[start..start + (self.steps + 1) * m]
    }

    #[inline]
    pub fn grad_row(&self, n: usize) -> Option<&[f64]> {
        let m = self.degree.orders();
        let start = self.index(n, 0, 0);
        self.alpha_grad.as_ref().map(|g| &g[start..start + (self.steps + 1) * m])
    }
}
