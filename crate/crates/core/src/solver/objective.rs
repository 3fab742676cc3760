//! Batched loss and gradient over a collocation set.
//!
//! Every spatial point contributes one batch column per time node; residuals
//! at `t_1..t_N` are dense stencil rows applied to the trial jets along the
//! ladder. Parameters are the network weights followed by the trainable
//! scalars of an inverse run.

use std::num::NonZeroUsize;

use super::collocation::CollocationSet;
use super::problem::PdeProblem;
use crate::caputo::FracOrder;
use crate::error::{HnsError, Result};
use crate::hermite::{Degree, StencilBank};
use crate::net::{DenseNet, InitialJet, JetSpec, JetWork};

/// Batch columns per task.
const CHUNK_COLUMNS: usize = 512;

/// Unknown coefficients of an inverse run with their starting values.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct InverseConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

impl InverseConfig {
    pub fn is_forward(&self) -> bool {
        self.count() == 0
    }

    pub fn count(&self) -> usize {
        [self.alpha, self.beta, self.gamma].iter().filter(|v| v.is_some()).count()
    }

    /// Optimizer coordinates of the starting values (`α` through its logit).
    pub fn initial_extras(&self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        if let Some(a) = self.alpha {
            let a = FracOrder::new(a)?.get();
            out.push((a / (1.0 - a)).ln());
        }
        out.extend(self.beta);
        out.extend(self.gamma);
        Ok(out)
    }
}

pub fn sigmoid(theta: f64) -> f64 {
    if theta >= 0.0 {
        1.0 / (1.0 + (-theta).exp())
    } else {
        let e = theta.exp();
        e / (1.0 + e)
    }
}

/// Coefficients decoded from the extra scalars.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Mean-squared loss terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossTerms {
    pub boundary: f64,
    pub residual: f64,
    pub data: f64,
    pub total: f64,
}

impl LossTerms {
    pub(crate) fn new(boundary: f64, residual: f64, data: f64) -> Self {
        Self { boundary, residual, data, total: boundary + residual + data }
    }
}

struct InteriorPoint {
    init: InitialJet,
    /// `g(x, t_n)` for `n = 1..=N`.
    forcing: Vec<f64>,
}

struct BoundaryPoint {
    init: f64,
    /// `B(x, t_n)` for `n = 1..=N`.
    target: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Task {
    Interior { first: usize, count: usize },
    Boundary { first: usize, count: usize },
}

struct Partial {
    boundary: f64,
    residual: f64,
    data: f64,
    grad: Vec<f64>,
    extras: [f64; 3],
}

/// Which jet components the residual needs.
struct Layout {
    spec: JetSpec,
    orders: usize,
    dim: usize,
    t: Option<usize>,
    tt: Option<usize>,
    x: Option<Vec<usize>>,
    xx: Option<Vec<usize>>,
}

impl Layout {
    fn new(dim: usize, degree: Degree, need_grad: bool, need_lap: bool) -> Result<Self> {
        let m = degree.orders();
        let time = dim;
        let mut first = Vec::new();
        let mut second = Vec::new();
        if m >= 2 {
            first.push(time);
        }
        if m == 3 {
            second.push(time);
        }
        if need_grad || need_lap {
            first.extend(0..dim);
        }
        if need_lap {
            second.extend(0..dim);
        }
        let spec = JetSpec::new(&first, &second)?;
        let slots = |coord: usize, second: bool| {
            if second {
                spec.second_slot(coord)
            } else {
                spec.first_slot(coord)
            }
        };
        let t = slots(time, false);
        let tt = slots(time, true);
        let x = (need_grad || need_lap).then(|| (0..dim).map(|c| slots(c, false).unwrap()).collect());
        let xx = need_lap.then(|| (0..dim).map(|c| slots(c, true).unwrap()).collect());
        Ok(Self { spec, orders: m, dim, t, tt, x, xx })
    }
}

/// Loss functional for one problem, collocation set and stencil degree.
pub struct Objective<'a> {
    problem: &'a PdeProblem,
    colloc: &'a CollocationSet,
    degree: Degree,
    inverse: InverseConfig,
    net_params: usize,
    layer_sizes: Vec<usize>,
    layout: Layout,
    value_spec: JetSpec,
    interior: Vec<InteriorPoint>,
    boundary: Vec<BoundaryPoint>,
    fixed_bank: Option<StencilBank>,
    tasks: Vec<Task>,
    threads: usize,
}

impl<'a> Objective<'a> {
    pub fn new(
        problem: &'a PdeProblem,
        colloc: &'a CollocationSet,
        degree: Degree,
        layer_sizes: &[usize],
        inverse: InverseConfig,
    ) -> Result<Self> {
        let dim = problem.spatial_dim;
        if colloc.dim != dim {
            return Err(HnsError::Contract(format!(
                "collocation set is {}-dimensional, problem is {dim}-dimensional",
                colloc.dim
            )));
        }
        if layer_sizes.first() != Some(&(dim + 1)) || layer_sizes.last() != Some(&1) {
            return Err(HnsError::Contract(format!("network {layer_sizes:?} does not map (x, t) to a scalar")));
        }
        if !inverse.is_forward() && colloc.data().is_none() {
            return Err(HnsError::Contract("inverse runs need measurements".into()));
        }
        let net_params = DenseNet::zeros(layer_sizes)?.param_count();
        let op = problem.operator;
        let need_lap = op.diffusion != 0.0 || inverse.beta.is_some();
        let need_grad = op.advection != 0.0 || inverse.gamma.is_some();
        let layout = Layout::new(dim, degree, need_grad && dim > 0, need_lap && dim > 0)?;

        let grid = colloc.grid;
        let steps = grid.steps();
        let interior = (0..colloc.interior_count())
            .map(|i| {
                let x = colloc.interior_point(i);
                InteriorPoint {
                    init: problem.initial(x),
                    forcing: (1..=steps).map(|n| problem.forcing(x, grid.node(n))).collect(),
                }
            })
            .collect();
        let boundary = (0..colloc.boundary_count())
            .map(|i| {
                let x = colloc.boundary_point(i);
                BoundaryPoint {
                    init: problem.initial(x).value,
                    target: (1..=steps).map(|n| problem.boundary(x, grid.node(n))).collect(),
                }
            })
            .collect();
        let fixed_bank = inverse.alpha.is_none().then(|| StencilBank::new(degree, problem.alpha, &grid));

        let mut tasks = Vec::new();
        let per_interior = (CHUNK_COLUMNS / (steps + 1)).max(1);
        let mut first = 0;
        while first < colloc.interior_count() {
            let count = per_interior.min(colloc.interior_count() - first);
            tasks.push(Task::Interior { first, count });
            first += count;
        }
        let per_boundary = (CHUNK_COLUMNS / steps).max(1);
        first = 0;
        while first < colloc.boundary_count() {
            let count = per_boundary.min(colloc.boundary_count() - first);
            tasks.push(Task::Boundary { first, count });
            first += count;
        }

        Ok(Self {
            problem,
            colloc,
            degree,
            inverse,
            net_params,
            layer_sizes: layer_sizes.to_vec(),
            layout,
            value_spec: JetSpec::value_only(),
            interior,
            boundary,
            fixed_bank,
            tasks,
            threads: thread_count(),
        })
    }

    /// Override the worker count (results do not depend on it).
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn net_param_count(&self) -> usize {
        self.net_params
    }

    /// Network parameters plus inverse unknowns.
    pub fn param_count(&self) -> usize {
        self.net_params + self.inverse.count()
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    /// Coefficients at optimizer coordinates `extras`.
    pub fn coefficients(&self, extras: &[f64]) -> Coefficients {
        let mut it = extras.iter().copied();
        let op = self.problem.operator;
        let alpha = match self.inverse.alpha {
            Some(_) => sigmoid(it.next().expect("missing α coordinate")),
            None => self.problem.alpha.get(),
        };
        let beta = if self.inverse.beta.is_some() { it.next().expect("missing β coordinate") } else { op.diffusion };
        let gamma = if self.inverse.gamma.is_some() { it.next().expect("missing γ coordinate") } else { op.advection };
        Coefficients { alpha, beta, gamma }
    }

    /// Loss value and gradient with respect to all `param_count()` coordinates.
    pub fn evaluate(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (terms, grad) = self.evaluate_terms(params)?;
        Ok((terms.total, grad))
    }

    /// Loss split into its terms, with the gradient of the total.
    pub fn evaluate_terms(&self, params: &[f64]) -> Result<(LossTerms, Vec<f64>)> {
        if params.len() != self.param_count() {
            return Err(HnsError::Contract(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let (net_params, extras) = params.split_at(self.net_params);
        let coef = self.coefficients(extras);
        let alpha = match FracOrder::new(coef.alpha) {
            Ok(a) => a,
            // Saturated logit: report an infeasible point to the line search.
            Err(_) => return Ok((LossTerms::new(0.0, f64::INFINITY, 0.0), vec![0.0; params.len()])),
        };
        let owned_bank;
        let bank = match &self.fixed_bank {
            Some(b) => b,
            None => {
                owned_bank = StencilBank::with_alpha_gradient(self.degree, alpha, &self.colloc.grid);
                &owned_bank
            }
        };
        let net = DenseNet::from_params(&self.layer_sizes, net_params.to_vec())?;

        let partials = self.run_tasks(&net, bank, coef);
        let mut grad = vec![0.0; params.len()];
        let (mut b, mut r, mut d) = (0.0, 0.0, 0.0);
        let mut ex = [0.0; 3];
        for p in &partials {
            b += p.boundary;
            r += p.residual;
            d += p.data;
            for (g, v) in grad.iter_mut().zip(&p.grad) {
                *g += v;
            }
            for (e, v) in ex.iter_mut().zip(p.extras) {
                *e += v;
            }
        }
        let mut slot = self.net_params;
        if self.inverse.alpha.is_some() {
            grad[slot] = ex[0] * coef.alpha * (1.0 - coef.alpha);
            slot += 1;
        }
        if self.inverse.beta.is_some() {
            grad[slot] = ex[1];
            slot += 1;
        }
        if self.inverse.gamma.is_some() {
            grad[slot] = ex[2];
        }
        Ok((LossTerms::new(b, r, d), grad))
    }

    fn run_tasks(&self, net: &DenseNet, bank: &StencilBank, coef: Coefficients) -> Vec<Partial> {
        let workers = self.threads.min(self.tasks.len()).max(1);
        if workers == 1 {
            let mut work = JetWork::new();
            return self.tasks.iter().map(|&t| self.run_task(t, net, bank, coef, &mut work)).collect();
        }
        let per = self.tasks.len().div_ceil(workers);
        std::thread::scope(|s| {
            let handles: Vec<_> = self
                .tasks
                .chunks(per)
                .map(|block| {
                    s.spawn(move || {
                        let mut work = JetWork::new();
                        block.iter().map(|&t| self.run_task(t, net, bank, coef, &mut work)).collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("loss worker panicked")).collect()
        })
    }

    fn run_task(&self, task: Task, net: &DenseNet, bank: &StencilBank, coef: Coefficients, work: &mut JetWork) -> Partial {
        let mut partial =
            Partial { boundary: 0.0, residual: 0.0, data: 0.0, grad: vec![0.0; self.net_params], extras: [0.0; 3] };
        match task {
            Task::Interior { first, count } => self.interior_task(first, count, net, bank, coef, work, &mut partial),
            Task::Boundary { first, count } => self.boundary_task(first, count, net, work, &mut partial),
        }
        partial
    }

    #[allow(clippy::too_many_arguments)]
    fn interior_task(
        &self,
        first: usize,
        count: usize,
        net: &DenseNet,
        bank: &StencilBank,
        coef: Coefficients,
        work: &mut JetWork,
        out: &mut Partial,
    ) {
        let grid = &self.colloc.grid;
        let steps = grid.steps();
        let cols = steps + 1;
        let dim = self.layout.dim;
        let npts = count * cols;
        let mut inputs = Vec::with_capacity(npts * (dim + 1));
        for i in first..first + count {
            let x = if dim == 0 { &[][..] } else { self.colloc.interior_point(i) };
            for k in 0..=steps {
                inputs.extend_from_slice(x);
                inputs.push(grid.node(k));
            }
        }
        let spec = &self.layout.spec;
        net.forward_batch(spec, &inputs, work);
        let f = work.output();
        let nc = spec.components();
        let m = self.layout.orders;
        let comp = |slot: usize, col: usize| f[slot * npts + col];

        let n_r = self.colloc.residual_terms() as f64;
        let data = self.colloc.data();
        let n_d = n_r;
        let reaction = self.problem.operator.reaction;
        let mut fbar = vec![0.0; nc * npts];
        // Trial jets along one ladder, `[k][d]`, and their adjoints.
        let mut u = vec![0.0; cols * m];
        let mut ubar = vec![0.0; cols * m];
        let mut ux = vec![0.0; cols * dim];
        let mut uxx = vec![0.0; cols * dim];
        let mut uxbar = vec![0.0; cols * dim];
        let mut uxxbar = vec![0.0; cols * dim];

        for (local, i) in (first..first + count).enumerate() {
            let pt = &self.interior[i];
            let base = local * cols;
            for k in 0..=steps {
                let t = grid.node(k);
                let col = base + k;
                let f0 = comp(0, col);
                u[k * m] = t * f0 + pt.init.value;
                if m >= 2 {
                    let ft = comp(self.layout.t.unwrap(), col);
                    u[k * m + 1] = f0 + t * ft;
                    if m == 3 {
                        u[k * m + 2] = 2.0 * ft + t * comp(self.layout.tt.unwrap(), col);
                    }
                }
                if let Some(xs) = &self.layout.x {
                    for (c, &s) in xs.iter().enumerate() {
                        ux[k * dim + c] = t * comp(s, col) + pt.init.grad[c];
                    }
                }
                if let Some(xs) = &self.layout.xx {
                    for (c, &s) in xs.iter().enumerate() {
                        uxx[k * dim + c] = t * comp(s, col) + pt.init.second[c];
                    }
                }
            }
            ubar.fill(0.0);
            uxbar.fill(0.0);
            uxxbar.fill(0.0);
            for n in 1..=steps {
                let row = &bank.row(n)[..cols * m];
                let caputo: f64 = row.iter().zip(&u).map(|(w, v)| w * v).sum();
                let lap: f64 = if self.layout.xx.is_some() { uxx[n * dim..(n + 1) * dim].iter().sum() } else { 0.0 };
                let div: f64 = if self.layout.x.is_some() { ux[n * dim..(n + 1) * dim].iter().sum() } else { 0.0 };
                let r = caputo - coef.beta * lap + coef.gamma * div + reaction * u[n * m] - pt.forcing[n - 1];
                out.residual += r * r / n_r;
                let rbar = 2.0 * r / n_r;
                for (ub, w) in ubar.iter_mut().zip(row) {
                    *ub += rbar * w;
                }
                ubar[n * m] += rbar * reaction;
                if self.layout.x.is_some() {
                    for v in &mut uxbar[n * dim..(n + 1) * dim] {
                        *v += rbar * coef.gamma;
                    }
                }
                if self.layout.xx.is_some() {
                    for v in &mut uxxbar[n * dim..(n + 1) * dim] {
                        *v -= rbar * coef.beta;
                    }
                }
                if let Some(g) = bank.grad_row(n) {
                    out.extras[0] += rbar * g[..cols * m].iter().zip(&u).map(|(w, v)| w * v).sum::<f64>();
                }
                out.extras[1] -= rbar * lap;
                out.extras[2] += rbar * div;
            }
            if let Some(data) = data {
                for n in 1..=steps {
                    let e = u[n * m] - data[i * steps + n - 1];
                    out.data += e * e / n_d;
                    ubar[n * m] += 2.0 * e / n_d;
                }
            }
            // Back through ũ = t·f + I.
            for k in 0..=steps {
                let t = grid.node(k);
                let col = base + k;
                let (u0, ut, utt) = (ubar[k * m], if m >= 2 { ubar[k * m + 1] } else { 0.0 }, if m == 3 { ubar[k * m + 2] } else { 0.0 });
                fbar[col] = t * u0 + ut;
                if let Some(s) = self.layout.t {
                    fbar[s * npts + col] = t * ut + 2.0 * utt;
                }
                if let Some(s) = self.layout.tt {
                    fbar[s * npts + col] = t * utt;
                }
                if let Some(xs) = &self.layout.x {
                    for (c, &s) in xs.iter().enumerate() {
                        fbar[s * npts + col] = t * uxbar[k * dim + c];
                    }
                }
                if let Some(xs) = &self.layout.xx {
                    for (c, &s) in xs.iter().enumerate() {
                        fbar[s * npts + col] = t * uxxbar[k * dim + c];
                    }
                }
            }
        }
        net.backward_batch(work, &fbar, &mut out.grad);
    }

    fn boundary_task(&self, first: usize, count: usize, net: &DenseNet, work: &mut JetWork, out: &mut Partial) {
        let grid = &self.colloc.grid;
        let steps = grid.steps();
        let dim = self.layout.dim;
        let npts = count * steps;
        let mut inputs = Vec::with_capacity(npts * (dim + 1));
        for i in first..first + count {
            for n in 1..=steps {
                inputs.extend_from_slice(self.colloc.boundary_point(i));
                inputs.push(grid.node(n));
            }
        }
        net.forward_batch(&self.value_spec, &inputs, work);
        let n_b = self.colloc.boundary_terms() as f64;
        let mut fbar = vec![0.0; npts];
        {
            let f = work.output();
            for (local, i) in (first..first + count).enumerate() {
                let pt = &self.boundary[i];
                for n in 1..=steps {
                    let col = local * steps + n - 1;
                    let t = grid.node(n);
                    let e = t * f[col] + pt.init - pt.target[n - 1];
                    out.boundary += e * e / n_b;
                    fbar[col] = t * 2.0 * e / n_b;
                }
            }
        }
        net.backward_batch(work, &fbar, &mut out.grad);
    }
}

/// Worker count: `HNS_THREADS` if set, else the available parallelism.
pub fn thread_count() -> usize {
    std::env::var("HNS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1))
}
