//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! The line search brackets and then zooms with safeguarded cubic
//! interpolation. Failures never raise: the driver reports them through
//! [`Status`] together with the best iterate found.

use std::collections::VecDeque;
use std::io::Write;

use crate::error::{HnsError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsConfig {
    pub history: usize,
    pub max_iters: usize,
    /// Stop once ‖∇f‖₂ falls to this level.
    pub grad_tol: f64,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    /// Objective evaluations allowed per line search.
    pub max_line_search: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { history: 50, max_iters: 3000, grad_tol: 1e-10, wolfe_c1: 1e-4, wolfe_c2: 0.9, max_line_search: 25 }
    }
}

impl LbfgsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(HnsError::Config(format!(
                "Wolfe constants need 0 < c1 < c2 < 1, got c1 = {}, c2 = {}",
                self.wolfe_c1, self.wolfe_c2
            )));
        }
        if self.history == 0 {
            return Err(HnsError::Config("history must be at least 1".into()));
        }
        if self.max_line_search == 0 {
            return Err(HnsError::Config("max_line_search must be at least 1".into()));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(HnsError::Config(format!("grad_tol must be non-negative, got {}", self.grad_tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Gradient norm reached `grad_tol`.
    Converged,
    MaxIterations,
    /// No admissible step, even along steepest descent.
    LineSearchFailed,
    /// The objective returned NaN or infinity at the starting point.
    NonFinite,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max_iterations",
            Status::LineSearchFailed => "line_search_failed",
            Status::NonFinite => "non_finite",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub iter: usize,
    pub loss: f64,
    pub grad_norm: f64,
}

/// Outcome of [`minimize`]. The trace starts with the initial point
/// (`iter = 0`) and gains one entry per accepted iteration.
#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: Status,
    pub trace: Vec<TraceEntry>,
    /// Curvature pairs rejected by the `sᵀy > 1e-10 ‖s‖‖y‖` test.
    pub discarded_pairs: usize,
}

impl Minimum {
    /// Write the trace as CSV `iter,loss,grad_norm`.
    pub fn write_trace<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,loss,grad_norm")?;
        for e in &self.trace {
            writeln!(out, "{},{:e},{:e}", e.iter, e.loss, e.grad_norm)?;
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// `−H∇f` by the two-loop recursion.
fn direction(grad: &[f64], pairs: &VecDeque<Pair>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for p in pairs.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        for (qi, yi) in q.iter_mut().zip(&p.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(last) = pairs.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for (p, a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = p.rho * dot(&p.y, &q);
        for (qi, si) in q.iter_mut().zip(&p.s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

struct Probe {
    step: f64,
    value: f64,
    slope: f64,
    x: Vec<f64>,
    grad: Vec<f64>,
}

enum Search {
    Found(Probe),
    /// Budget exhausted; carries the lowest sufficient-decrease point seen.
    Exhausted(Option<Probe>),
}

/// Minimiser of the cubic through `(a, fa, da)` and `(b, fb, db)`,
/// clamped away from the ends of the bracket.
fn cubic_step(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (hi - lo);
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    let mid = 0.5 * (lo + hi);
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    if t.is_finite() && t > lo + margin && t < hi - margin {
        t
    } else {
        mid
    }
}

struct LineSearch<'a, F> {
    objective: &'a mut F,
    x: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    d0: f64,
    c1: f64,
    c2: f64,
    budget: usize,
    evaluations: usize,
    best: Option<Probe>,
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> LineSearch<'_, F> {
    fn probe(&mut self, step: f64) -> Probe {
        let x: Vec<f64> = self.x.iter().zip(self.dir).map(|(xi, di)| xi + step * di).collect();
        let (value, grad) = (self.objective)(&x);
        self.evaluations += 1;
        let slope = dot(&grad, self.dir);
        Probe { step, value, slope, x, grad }
    }

    fn armijo(&self, p: &Probe) -> bool {
        p.value.is_finite() && p.value <= self.f0 + self.c1 * p.step * self.d0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.abs() <= -self.c2 * self.d0
    }

    fn remember(&mut self, p: &Probe) {
        if self.armijo(p) && self.best.as_ref().map_or(true, |b| p.value < b.value) {
            self.best = Some(Probe { x: p.x.clone(), grad: p.grad.clone(), ..*p });
        }
    }

    fn run(mut self, initial: f64) -> (Search, usize) {
        let mut prev = Probe { step: 0.0, value: self.f0, slope: self.d0, x: Vec::new(), grad: Vec::new() };
        let mut step = initial;
        let mut first = true;
        while self.evaluations < self.budget {
            let cur = self.probe(step);
            if !cur.value.is_finite() || !cur.slope.is_finite() {
                step = 0.5 * (prev.step + step);
                continue;
            }
            self.remember(&cur);
            if !self.armijo(&cur) || (!first && cur.value >= prev.value) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                let n = self.evaluations;
                return (Search::Found(cur), n);
            }
            if cur.slope >= 0.0 {
                return self.zoom(cur, prev);
            }
            step = 2.0 * cur.step;
            prev = cur;
            first = false;
        }
        let n = self.evaluations;
        (Search::Exhausted(self.best), n)
    }

    /// Zoom on a bracket whose `lo` end satisfies sufficient decrease.
    fn zoom(mut self, mut lo: Probe, mut hi: Probe) -> (Search, usize) {
        while self.evaluations < self.budget {
            let step = cubic_step(lo.step, lo.value, lo.slope, hi.step, hi.value, hi.slope);
            if (step - lo.step).abs() <= f64::EPSILON * lo.step.abs().max(1.0) {
                break;
            }
            let cur = self.probe(step);
            if !cur.value.is_finite() || !cur.slope.is_finite() {
                // An infinite end makes the next cubic step a bisection.
                hi = Probe { value: f64::INFINITY, slope: 0.0, ..cur };
                continue;
            }
            self.remember(&cur);
            if !self.armijo(&cur) || cur.value >= lo.value {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    let n = self.evaluations;
                    return (Search::Found(cur), n);
                }
                if cur.slope * (hi.step - lo.step) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
        let n = self.evaluations;
        (Search::Exhausted(self.best), n)
    }
}

/// Minimise `objective`, which returns the value and gradient at a point.
pub fn minimize<F>(mut objective: F, x0: &[f64], config: &LbfgsConfig) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    config.validate()?;
    let mut x = x0.to_vec();
    let (mut f, mut g) = objective(&x);
    let mut evaluations = 1;
    let mut gnorm = norm(&g);
    let mut trace = vec![TraceEntry { iter: 0, loss: f, grad_norm: gnorm }];
    let mut pairs: VecDeque<Pair> = VecDeque::with_capacity(config.history);
    let mut discarded = 0;
    let mut iterations = 0;

    let status = if !f.is_finite() || !gnorm.is_finite() {
        Status::NonFinite
    } else {
        loop {
            if gnorm <= config.grad_tol {
                break Status::Converged;
            }
            if iterations >= config.max_iters {
                break Status::MaxIterations;
            }
            let mut dir = direction(&g, &pairs);
            let mut slope = dot(&g, &dir);
            if !(slope < 0.0) {
                pairs.clear();
                dir = g.iter().map(|v| -v).collect();
                slope = -gnorm * gnorm;
            }
            let initial = if pairs.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };
            let search = LineSearch {
                objective: &mut objective,
                x: &x,
                dir: &dir,
                f0: f,
                d0: slope,
                c1: config.wolfe_c1,
                c2: config.wolfe_c2,
                budget: config.max_line_search,
                evaluations: 0,
                best: None,
            };
            let (outcome, used) = search.run(initial);
            evaluations += used;
            let (probe, wolfe) = match outcome {
                Search::Found(p) => (p, true),
                Search::Exhausted(Some(p)) if p.value < f => (p, false),
                Search::Exhausted(_) => {
                    if pairs.is_empty() {
                        break Status::LineSearchFailed;
                    }
                    // Retry from steepest descent before giving up.
                    pairs.clear();
                    continue;
                }
            };
            let s: Vec<f64> = probe.x.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = probe.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if wolfe && sy > 1e-10 * norm(&s) * norm(&y) {
                if pairs.len() == config.history {
                    pairs.pop_front();
                }
                pairs.push_back(Pair { rho: 1.0 / sy, s, y });
            } else {
                discarded += 1;
            }
            x = probe.x;
            f = probe.value;
            g = probe.grad;
            gnorm = norm(&g);
            iterations += 1;
            trace.push(TraceEntry { iter: iterations, loss: f, grad_norm: gnorm });
        }
    };
    Ok(Minimum { x, value: f, grad_norm: gnorm, iterations, evaluations, status, trace, discarded_pairs: discarded })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        (f, g)
    }

    #[test]
    fn quadratic_in_few_iterations() {
        let c = [1.0, -2.0, 3.5];
        let m = minimize(
            |x| {
                let d: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
                (dot(&d, &d), d.iter().map(|v| 2.0 * v).collect())
            },
            &[0.0; 3],
            &LbfgsConfig::default(),
        )
        .unwrap();
        assert!(m.iterations <= 3, "{} iterations", m.iterations);
        assert!(m.x.iter().zip(&c).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn rosenbrock_from_standard_start() {
        let cfg = LbfgsConfig { max_iters: 100, grad_tol: 1e-12, ..Default::default() };
        let m = minimize(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?} {:?}", m.x, m.status);
        assert!(m.value <= 1e-12);
        assert!(m.trace.windows(2).all(|w| w[1].loss <= w[0].loss));
        assert_eq!(m.trace.len(), m.iterations + 1);
    }

    #[test]
    fn constant_objective_stays_put() {
        let m = minimize(|_| (3.0, vec![0.0, 0.0]), &[0.5, 0.25], &LbfgsConfig::default()).unwrap();
        assert_eq!(m.iterations, 0);
        assert_eq!(m.x, vec![0.5, 0.25]);
        assert_eq!(m.status, Status::Converged);
    }

    #[test]
    fn deterministic() {
        let cfg = LbfgsConfig { max_iters: 40, ..Default::default() };
        let a = minimize(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
        let b = minimize(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn non_finite_start_is_flagged() {
        let m = minimize(|_| (f64::NAN, vec![0.0]), &[1.0], &LbfgsConfig::default()).unwrap();
        assert_eq!(m.status, Status::NonFinite);
    }

    #[test]
    fn rejects_bad_wolfe_constants() {
        let cfg = LbfgsConfig { wolfe_c1: 0.9, wolfe_c2: 0.1, ..Default::default() };
        assert!(minimize(rosenbrock, &[0.0, 0.0], &cfg).is_err());
    }

    #[test]
    fn armijo_only_steps_are_not_stored() {
        // Nearly linear far from the minimum: one probe per search cannot
        // meet the curvature condition, so steps are taken without pairs.
        let cfg = LbfgsConfig { max_iters: 5, max_line_search: 1, ..Default::default() };
        let m = minimize(|x| ((1.0 + x[0] * x[0]).sqrt(), vec![x[0] / (1.0 + x[0] * x[0]).sqrt()]), &[100.0], &cfg)
            .unwrap();
        assert_eq!(m.iterations, 5);
        assert_eq!(m.discarded_pairs, 5);
        assert!(m.trace.windows(2).all(|w| w[1].loss < w[0].loss));
    }
}
