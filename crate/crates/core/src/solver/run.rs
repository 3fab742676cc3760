//! Forward and inverse solves with test-set evaluation.

use std::time::Instant;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::collocation::CollocationSet;
use super::objective::{InverseConfig, Objective};
use super::problem::{PdeProblem, ProblemId};
use super::sampling::sample_lhs;
use crate::error::{HnsError, Result};
use crate::hermite::Degree;
use crate::lbfgs::{minimize, LbfgsConfig, Minimum, Status, TraceEntry};
use crate::net::{default_layer_sizes, init_net, DenseNet, JetSpec, JetWork, TrialSolution};

/// Test points per batched evaluation.
const EVAL_CHUNK: usize = 4096;
/// Largest test cloud evaluated by default.
pub const MAX_TEST_POINTS: usize = 200_000;
const TEST_STREAM: u64 = 0x5851_f42d_4c95_7f2d;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub degree: Degree,
    pub mt: usize,
    /// Spatial nodes per axis (grid problems) or sample count (LHS problems).
    pub mx: usize,
    /// Boundary points per face for LHS problems.
    pub nb: Option<usize>,
    pub seed: u64,
    pub lbfgs: LbfgsConfig,
    /// Test-cloud size for LHS problems.
    pub test_points: Option<usize>,
    pub threads: Option<usize>,
}

impl SolveConfig {
    /// Sizes used for `id` in the reference experiments, third-order stencils.
    pub fn for_problem(id: ProblemId) -> Self {
        let (mt, mx) = match id {
            ProblemId::Fde => (11, 0),
            ProblemId::Tfde => (21, 11),
            ProblemId::Tfade2d => (11, 11),
            ProblemId::Fpde3d => (6, 11),
            ProblemId::Fpde3dProduct | ProblemId::Inverse3d => (6, 1000),
            ProblemId::Advection10d | ProblemId::AdvectionDiffusion10d => (6, 5000),
        };
        Self {
            degree: Degree::Cubic,
            mt,
            mx,
            nb: None,
            seed: 0,
            lbfgs: LbfgsConfig::default(),
            test_points: None,
            threads: None,
        }
    }
}

/// Spatial points and times of a test cloud, plus exact values.
#[derive(Clone, Debug)]
pub struct TestSet {
    pub dim: usize,
    /// Flat `(x, t)` rows.
    pub inputs: Vec<f64>,
    pub exact: Vec<f64>,
}

impl TestSet {
    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    fn from_inputs(problem: &PdeProblem, inputs: Vec<f64>) -> Self {
        let dim = problem.spatial_dim;
        let exact = inputs.chunks(dim + 1).map(|row| problem.exact(&row[..dim], row[dim])).collect();
        Self { dim, inputs, exact }
    }
}

/// Default test cloud: equispaced for the low-dimensional benchmarks, a
/// seeded Latin hypercube of `count` (default 200 000) space-time points
/// otherwise.
pub fn test_set(problem: &PdeProblem, count: Option<usize>, seed: u64) -> Result<TestSet> {
    let line = |n: usize, hi: f64| (0..n).map(move |i| hi * i as f64 / (n - 1) as f64);
    let inputs: Vec<f64> = match problem.id {
        ProblemId::Fde => line(count.unwrap_or(1000), problem.horizon).collect(),
        ProblemId::Tfde => {
            let n = 100;
            line(n, problem.horizon).flat_map(|t| line(n, 1.0).flat_map(move |x| [x, t])).collect()
        }
        ProblemId::Tfade2d => {
            let n = 51;
            let mut v = Vec::with_capacity(n * n * n * 3);
            for t in line(n, problem.horizon) {
                for y in line(n, 1.0) {
                    for x in line(n, 1.0) {
                        v.extend([x, y, t]);
                    }
                }
            }
            v
        }
        _ => {
            let n = count.unwrap_or(MAX_TEST_POINTS);
            let mut pts = sample_lhs(problem.spatial_dim + 1, n, seed ^ TEST_STREAM)?;
            let d = problem.spatial_dim;
            for row in pts.chunks_mut(d + 1) {
                row[d] *= problem.horizon;
            }
            pts
        }
    };
    Ok(TestSet::from_inputs(problem, inputs))
}

/// Trial values on a batch of `(x, t)` rows.
pub fn evaluate_trial(trial: &TrialSolution, inputs: &[f64]) -> Vec<f64> {
    let width = trial.net.input_dim();
    let dim = width - 1;
    let spec = JetSpec::value_only();
    let mut work = JetWork::new();
    let mut out = Vec::with_capacity(inputs.len() / width);
    for chunk in inputs.chunks(EVAL_CHUNK * width) {
        trial.net.forward_batch(&spec, chunk, &mut work);
        for (row, f) in chunk.chunks(width).zip(work.output()) {
            let t = row[dim];
            out.push(t * f + (trial.initial)(&row[..dim]).value);
        }
    }
    out
}

/// `‖ũ − u‖ / ‖u‖` over a test set.
pub fn test_error(trial: &TrialSolution, set: &TestSet) -> Result<f64> {
    crate::caputo::relative_l2(&evaluate_trial(trial, &set.inputs), &set.exact)
}

#[derive(Clone, Debug)]
pub struct ForwardReport {
    pub problem: ProblemId,
    pub alpha: f64,
    pub degree: Degree,
    pub mt: usize,
    pub mx: usize,
    pub rel_l2: f64,
    pub final_loss: f64,
    pub iterations: usize,
    pub status: Status,
    pub trace: Vec<TraceEntry>,
    pub seconds: f64,
    pub test_points: usize,
}

impl ForwardReport {
    pub const CSV_HEADER: &'static str = "problem,alpha,p,mt,mx,rel_l2,final_loss,iters,seconds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{},{},{},{:e},{:e},{},{:.3}",
            self.problem,
            self.alpha,
            self.degree.p(),
            self.mt,
            self.mx,
            self.rel_l2,
            self.final_loss,
            self.iterations,
            self.seconds
        )
    }
}

fn optimize(objective: &Objective<'_>, x0: &[f64], cfg: &LbfgsConfig) -> Result<Minimum> {
    let mut failure = None;
    let min = minimize(
        |x| match objective.evaluate(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                (f64::NAN, vec![0.0; x.len()])
            }
        },
        x0,
        cfg,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(min),
    }
}

fn with_threads<'a>(objective: Objective<'a>, threads: Option<usize>) -> Objective<'a> {
    match threads {
        Some(n) => objective.with_threads(n),
        None => objective,
    }
}

/// Train the trial solution on the default collocation set of `problem`.
pub fn solve_forward(problem: &PdeProblem, cfg: &SolveConfig) -> Result<(TrialSolution, ForwardReport)> {
    let colloc = CollocationSet::for_problem(problem, cfg.mt, cfg.mx, cfg.nb, cfg.seed)?;
    solve_forward_on(problem, &colloc, cfg)
}

/// Train on a caller-supplied collocation set.
pub fn solve_forward_on(
    problem: &PdeProblem,
    colloc: &CollocationSet,
    cfg: &SolveConfig,
) -> Result<(TrialSolution, ForwardReport)> {
    cfg.lbfgs.validate()?;
    let start = Instant::now();
    let sizes = default_layer_sizes(problem.spatial_dim + 1);
    let objective = with_threads(Objective::new(problem, colloc, cfg.degree, &sizes, InverseConfig::default())?, cfg.threads);
    let net = init_net(cfg.seed, &sizes)?;
    let min = optimize(&objective, net.params(), &cfg.lbfgs)?;
    let trial = TrialSolution::new(DenseNet::from_params(&sizes, min.x.clone())?, problem.initial_fn());
    let set = test_set(problem, cfg.test_points, cfg.seed)?;
    let rel_l2 = test_error(&trial, &set)?;
    let report = ForwardReport {
        problem: problem.id,
        alpha: problem.alpha.get(),
        degree: cfg.degree,
        mt: cfg.mt,
        mx: cfg.mx,
        rel_l2,
        final_loss: min.value,
        iterations: min.iterations,
        status: min.status,
        trace: min.trace.clone(),
        seconds: start.elapsed().as_secs_f64(),
        test_points: set.len(),
    };
    Ok((trial, report))
}

/// One recovered coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub name: &'static str,
    pub initial: f64,
    pub value: f64,
    pub truth: f64,
}

impl Estimate {
    pub fn abs_error(&self) -> f64 {
        (self.value - self.truth).abs()
    }
}

#[derive(Clone, Debug)]
pub struct InverseReport {
    pub forward: ForwardReport,
    pub estimates: Vec<Estimate>,
}

impl InverseReport {
    pub const CSV_HEADER: &'static str = "problem,p,mt,mx,parameter,initial,estimate,truth,abs_error,rel_l2,final_loss,iters,seconds";

    pub fn csv_rows(&self) -> Vec<String> {
        let f = &self.forward;
        self.estimates
            .iter()
            .map(|e| {
                format!(
                    "{},{},{},{},{},{:?},{:?},{:?},{:e},{:e},{:e},{},{:.3}",
                    f.problem,
                    f.degree.p(),
                    f.mt,
                    f.mx,
                    e.name,
                    e.initial,
                    e.value,
                    e.truth,
                    e.abs_error(),
                    f.rel_l2,
                    f.final_loss,
                    f.iterations,
                    f.seconds
                )
            })
            .collect()
    }
}

/// Recover the unknown coefficients of `problem` from exact-solution
/// measurements at the interior collocation coordinates.
pub fn solve_inverse(
    problem: &PdeProblem,
    unknowns: &InverseConfig,
    cfg: &SolveConfig,
) -> Result<(TrialSolution, InverseReport)> {
    if unknowns.is_forward() {
        return Err(HnsError::Config("inverse run without unknowns".into()));
    }
    let colloc = CollocationSet::for_problem(problem, cfg.mt, cfg.mx, cfg.nb, cfg.seed)?.with_data(|x, t| problem.exact(x, t));
    solve_inverse_on(problem, &colloc, unknowns, cfg)
}

/// Inverse solve on a collocation set that already carries measurements.
pub fn solve_inverse_on(
    problem: &PdeProblem,
    colloc: &CollocationSet,
    unknowns: &InverseConfig,
    cfg: &SolveConfig,
) -> Result<(TrialSolution, InverseReport)> {
    cfg.lbfgs.validate()?;
    let start = Instant::now();
    let sizes = default_layer_sizes(problem.spatial_dim + 1);
    let objective = with_threads(Objective::new(problem, colloc, cfg.degree, &sizes, *unknowns)?, cfg.threads);
    let net = init_net(cfg.seed, &sizes)?;
    let mut x0 = net.params().to_vec();
    x0.extend(unknowns.initial_extras()?);
    let min = optimize(&objective, &x0, &cfg.lbfgs)?;
    let (net_params, extras) = min.x.split_at(objective.net_param_count());
    let coef = objective.coefficients(extras);
    let trial = TrialSolution::new(DenseNet::from_params(&sizes, net_params.to_vec())?, problem.initial_fn());
    let set = test_set(problem, cfg.test_points, cfg.seed)?;
    let rel_l2 = test_error(&trial, &set)?;

    let op = problem.operator;
    let mut estimates = Vec::new();
    if let Some(a) = unknowns.alpha {
        estimates.push(Estimate { name: "alpha", initial: a, value: coef.alpha, truth: problem.alpha.get() });
    }
    if let Some(b) = unknowns.beta {
        estimates.push(Estimate { name: "beta", initial: b, value: coef.beta, truth: op.diffusion });
    }
    if let Some(g) = unknowns.gamma {
        estimates.push(Estimate { name: "gamma", initial: g, value: coef.gamma, truth: op.advection });
    }
    let forward = ForwardReport {
        problem: problem.id,
        alpha: coef.alpha,
        degree: cfg.degree,
        mt: cfg.mt,
        mx: cfg.mx,
        rel_l2,
        final_loss: min.value,
        iterations: min.iterations,
        status: min.status,
        trace: min.trace.clone(),
        seconds: start.elapsed().as_secs_f64(),
        test_points: set.len(),
    };
    Ok((trial, InverseReport { forward, estimates }))
}

/// `max |ũ(x, 0) − I(x)|` over `count` random spatial points.
pub fn initial_condition_gap(trial: &TrialSolution, problem: &PdeProblem, count: usize, seed: u64) -> f64 {
    let dim = problem.spatial_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let x: Vec<f64> = (0..dim).map(|_| rng.sample(Open01)).collect();
        worst = worst.max((trial.value(&x, 0.0) - problem.initial(&x).value).abs());
    }
    worst
}

