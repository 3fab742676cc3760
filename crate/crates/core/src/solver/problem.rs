//! Benchmark problems `D_t^α u + N_x[u] = g` on the unit box with
//! `N_x[u] = −β Δu + γ (1, …, 1)·∇u + c u`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::caputo::FracOrder;
use crate::error::{HnsError, Result};
use crate::net::{InitialFn, InitialJet};
use crate::special::gamma_unchecked;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemId {
    /// Scalar fractional ODE with exact solution `1 + t²`.
    Fde,
    /// 1D diffusion, exact `x² + 2t^α/Γ(1+α)`.
    Tfde,
    /// 2D diffusion with source, exact `t² e^{x+y}`.
    Tfade2d,
    /// 3D advection-diffusion, exact `t² + Σ cos x_i`.
    Fpde3d,
    /// 3D advection-diffusion, exact `t² Σ cos x_i`.
    Fpde3dProduct,
    /// 10D advection, exact `t² Σ cos x_i`.
    Advection10d,
    /// 10D advection-diffusion, exact `t² Σ cos x_i`.
    AdvectionDiffusion10d,
    /// Same equation as `Fpde3dProduct`, used for parameter recovery.
    Inverse3d,
}

impl ProblemId {
    pub const ALL: [ProblemId; 8] = [
        ProblemId::Fde,
        ProblemId::Tfde,
        ProblemId::Tfade2d,
        ProblemId::Fpde3d,
        ProblemId::Fpde3dProduct,
        ProblemId::Advection10d,
        ProblemId::AdvectionDiffusion10d,
        ProblemId::Inverse3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Fde => "fde",
            ProblemId::Tfde => "tfde",
            ProblemId::Tfade2d => "tfade2d",
            ProblemId::Fpde3d => "fpde3d",
            ProblemId::Fpde3dProduct => "fpde3d_product",
            ProblemId::Advection10d => "adv10d",
            ProblemId::AdvectionDiffusion10d => "advdiff10d",
            ProblemId::Inverse3d => "inverse3d",
        }
    }

    /// Order used in the reference experiments.
    pub fn default_alpha(self) -> f64 {
        match self {
            ProblemId::Tfde => 0.65,
            ProblemId::Tfade2d => 0.85,
            _ => 0.5,
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = HnsError;
    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HnsError::Config(format!("unknown problem {s:?}")))
    }
}

/// Coefficients of `N_x[u] = −β Δu + γ Σ ∂_i u + c u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialOperator {
    pub diffusion: f64,
    pub advection: f64,
    pub reaction: f64,
}

impl SpatialOperator {
    pub fn apply(&self, value: f64, grad: &[f64], second: &[f64]) -> f64 {
        let lap: f64 = second.iter().sum();
        let div: f64 = grad.iter().sum();
        -self.diffusion * lap + self.advection * div + self.reaction * value
    }
}

/// Exact solution with time derivatives `[u, u_t, u_tt]` and spatial
/// first and pure second derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactJet {
    pub time: [f64; 3],
    pub grad: Vec<f64>,
    pub second: Vec<f64>,
}

type SpaceTimeFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
type ExactFn = Arc<dyn Fn(&[f64], f64) -> ExactJet + Send + Sync>;

/// How training coordinates are drawn by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Tensor grid, `mx` nodes per axis; boundary nodes carry the boundary term.
    Grid,
    /// `mx` Latin-hypercube points inside, `nb` uniform points per face.
    Lhs { per_face: usize },
}

#[derive(Clone)]
pub struct PdeProblem {
    pub id: ProblemId,
    pub spatial_dim: usize,
    pub alpha: FracOrder,
    pub horizon: f64,
    pub operator: SpatialOperator,
    pub sampling: Sampling,
    forcing: SpaceTimeFn,
    initial: InitialFn,
    exact: ExactFn,
    caputo_exact: SpaceTimeFn,
}

impl fmt::Debug for PdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeProblem")
            .field("id", &self.id)
            .field("spatial_dim", &self.spatial_dim)
            .field("alpha", &self.alpha)
            .field("horizon", &self.horizon)
            .field("operator", &self.operator)
            .finish_non_exhaustive()
    }
}

impl PdeProblem {
    pub fn forcing(&self, x: &[f64], t: f64) -> f64 {
        (self.forcing)(x, t)
    }

    pub fn initial(&self, x: &[f64]) -> InitialJet {
        (self.initial)(x)
    }

    pub fn initial_fn(&self) -> InitialFn {
        Arc::clone(&self.initial)
    }

    /// Dirichlet data; every benchmark takes it from the exact solution.
    pub fn boundary(&self, x: &[f64], t: f64) -> f64 {
        self.exact(x, t)
    }

    pub fn exact(&self, x: &[f64], t: f64) -> f64 {
        (self.exact)(x, t).time[0]
    }

    pub fn exact_jet(&self, x: &[f64], t: f64) -> ExactJet {
        (self.exact)(x, t)
    }

    /// Analytic `D_t^α u` of the exact solution.
    pub fn exact_caputo(&self, x: &[f64], t: f64) -> f64 {
        (self.caputo_exact)(x, t)
    }

    /// `D_t^α u + N_x[u] − g` for the exact solution; zero up to rounding.
    pub fn exact_residual(&self, x: &[f64], t: f64) -> f64 {
        let jet = self.exact_jet(x, t);
        self.exact_caputo(x, t) + self.operator.apply(jet.time[0], &jet.grad, &jet.second) - self.forcing(x, t)
    }
}

fn sum_cos(x: &[f64]) -> f64 {
    x.iter().map(|v| v.cos()).sum()
}

fn sum_sin(x: &[f64]) -> f64 {
    x.iter().map(|v| v.sin()).sum()
}

/// `t² S(x)`-type problems: exact `t² S` or `t² + S` with `S = Σ cos x_i`.
fn cosine_problem(id: ProblemId, alpha: FracOrder, dim: usize, op: SpatialOperator, additive: bool) -> PdeProblem {
    let a = alpha.get();
    let c = 2.0 / gamma_unchecked(3.0 - a);
    let caputo_t2 = move |t: f64| c * t.powf(2.0 - a);
    let exact: ExactFn = if additive {
        Arc::new(move |x: &[f64], t: f64| ExactJet {
            time: [t * t + sum_cos(x), 2.0 * t, 2.0],
            grad: x.iter().map(|v| -v.sin()).collect(),
            second: x.iter().map(|v| -v.cos()).collect(),
        })
    } else {
        Arc::new(move |x: &[f64], t: f64| {
            let s = sum_cos(x);
            ExactJet {
                time: [t * t * s, 2.0 * t * s, 2.0 * s],
                grad: x.iter().map(|v| -t * t * v.sin()).collect(),
                second: x.iter().map(|v| -t * t * v.cos()).collect(),
            }
        })
    };
    let caputo_exact: SpaceTimeFn = if additive {
        Arc::new(move |_: &[f64], t: f64| caputo_t2(t))
    } else {
        Arc::new(move |x: &[f64], t: f64| caputo_t2(t) * sum_cos(x))
    };
    // g = D^α u + N[u] with the spatial parts written out.
    let forcing: SpaceTimeFn = if additive {
        Arc::new(move |x: &[f64], t: f64| caputo_t2(t) + op.diffusion * sum_cos(x) - op.advection * sum_sin(x))
    } else {
        Arc::new(move |x: &[f64], t: f64| {
            let t2 = t * t;
            caputo_t2(t) * sum_cos(x) + op.diffusion * t2 * sum_cos(x) - op.advection * t2 * sum_sin(x)
        })
    };
    let initial: InitialFn = if additive {
        Arc::new(|x: &[f64]| InitialJet {
            value: sum_cos(x),
            grad: x.iter().map(|v| -v.sin()).collect(),
            second: x.iter().map(|v| -v.cos()).collect(),
        })
    } else {
        Arc::new(move |x: &[f64]| InitialJet::zero(x.len()))
    };
    let sampling = match id {
        ProblemId::Fpde3d => Sampling::Grid,
        ProblemId::Inverse3d => Sampling::Lhs { per_face: 50 },
        _ => Sampling::Lhs { per_face: 100 },
    };
    PdeProblem {
        id,
        spatial_dim: dim,
        alpha,
        horizon: 1.0,
        operator: op,
        sampling,
        forcing,
        initial,
        exact,
        caputo_exact,
    }
}

/// Built-in benchmark at order `alpha`.
pub fn builtin(id: ProblemId, alpha: f64) -> Result<PdeProblem> {
    let alpha = FracOrder::new(alpha)?;
    let a = alpha.get();
    let adv_diff = SpatialOperator { diffusion: 1.0, advection: 1.0, reaction: 0.0 };
    let problem = match id {
        ProblemId::Fde => {
            let c = gamma_unchecked(3.0) / gamma_unchecked(3.0 - a);
            PdeProblem {
                id,
                spatial_dim: 0,
                alpha,
                horizon: 2.0,
                // D^α u = u + g₀  ⇔  D^α u − u − g₀ = 0
                operator: SpatialOperator { diffusion: 0.0, advection: 0.0, reaction: -1.0 },
                sampling: Sampling::Grid,
                forcing: Arc::new(move |_, t| c * t.powf(2.0 - a) - t * t - 1.0),
                initial: Arc::new(|_| InitialJet { value: 1.0, grad: Vec::new(), second: Vec::new() }),
                exact: Arc::new(|_, t| ExactJet { time: [1.0 + t * t, 2.0 * t, 2.0], grad: Vec::new(), second: Vec::new() }),
                caputo_exact: Arc::new(move |_, t| c * t.powf(2.0 - a)),
            }
        }
        ProblemId::Tfde => {
            let c = 2.0 / gamma_unchecked(1.0 + a);
            PdeProblem {
                id,
                spatial_dim: 1,
                alpha,
                horizon: 1.0,
                operator: SpatialOperator { diffusion: 1.0, advection: 0.0, reaction: 0.0 },
                sampling: Sampling::Grid,
                forcing: Arc::new(|_, _| 0.0),
                initial: Arc::new(|x| InitialJet { value: x[0] * x[0], grad: vec![2.0 * x[0]], second: vec![2.0] }),
                exact: Arc::new(move |x, t| ExactJet {
                    time: [
                        x[0] * x[0] + c * t.powf(a),
                        c * a * t.powf(a - 1.0),
                        c * a * (a - 1.0) * t.powf(a - 2.0),
                    ],
                    grad: vec![2.0 * x[0]],
                    second: vec![2.0],
                }),
                // D^α t^α = Γ(1+α)
                caputo_exact: Arc::new(|_, _| 2.0),
            }
        }
        ProblemId::Tfade2d => {
            let c = 2.0 / gamma_unchecked(3.0 - a);
            PdeProblem {
                id,
                spatial_dim: 2,
                alpha,
                horizon: 1.0,
                operator: SpatialOperator { diffusion: 1.0, advection: 0.0, reaction: 0.0 },
                sampling: Sampling::Grid,
                forcing: Arc::new(move |x, t| (c * t.powf(2.0 - a) - 2.0 * t * t) * (x[0] + x[1]).exp()),
                initial: Arc::new(|x| InitialJet::zero(x.len())),
                exact: Arc::new(|x, t| {
                    let e = (x[0] + x[1]).exp();
                    let u = t * t * e;
                    ExactJet { time: [u, 2.0 * t * e, 2.0 * e], grad: vec![u, u], second: vec![u, u] }
                }),
                caputo_exact: Arc::new(move |x, t| c * t.powf(2.0 - a) * (x[0] + x[1]).exp()),
            }
        }
        ProblemId::Fpde3d => cosine_problem(id, alpha, 3, adv_diff, true),
        ProblemId::Fpde3dProduct | ProblemId::Inverse3d => cosine_problem(id, alpha, 3, adv_diff, false),
        ProblemId::Advection10d => {
            cosine_problem(id, alpha, 10, SpatialOperator { diffusion: 0.0, advection: 1.0, reaction: 0.0 }, false)
        }
        ProblemId::AdvectionDiffusion10d => cosine_problem(id, alpha, 10, adv_diff, false),
    };
    spot_check(&problem)?;
    Ok(problem)
}

/// All benchmarks at their reference orders.
pub fn builtin_problems() -> Vec<PdeProblem> {
    ProblemId::ALL
        .into_iter()
        .map(|id| builtin(id, id.default_alpha()).expect("reference orders are valid"))
        .collect()
}

/// The exact solution must satisfy its own equation at a few points.
fn spot_check(p: &PdeProblem) -> Result<()> {
    for i in 1..=4 {
        let s = i as f64 / 5.0;
        let x: Vec<f64> = (0..p.spatial_dim).map(|j| (s + 0.13 * j as f64).fract()).collect();
        let t = s * p.horizon;
        let r = p.exact_residual(&x, t);
        let scale = 1.0 + p.exact(&x, t).abs() + p.forcing(&x, t).abs();
        if !(r.abs() <= 1e-12 * scale) {
            return Err(HnsError::Domain(format!("exact solution of {} leaves residual {r:e} at t = {t}", p.id)));
        }
    }
    Ok(())
}
