//! Pointwise residuals and the three-term loss, evaluated one coordinate
//! at a time. Slow but direct; the batched [`Objective`](super::Objective)
//! is checked against it.

use super::collocation::CollocationSet;
use super::objective::LossTerms;
use super::problem::{ExactJet, PdeProblem};
use crate::caputo::TimeGrid;
use crate::error::{HnsError, Result};
use crate::hermite::StencilBank;
use crate::net::{trial_jet, TrialSolution};

/// A space-time field that can report time and spatial jets.
pub trait FieldSource {
    /// Number of time orders available (`u`, `u_t`, `u_tt`).
    fn time_orders(&self) -> usize;
    fn sample(&self, x: &[f64], t: f64) -> Result<ExactJet>;
}

/// The problem's analytic solution.
pub struct ExactSolution<'a>(pub &'a PdeProblem);

impl FieldSource for ExactSolution<'_> {
    fn time_orders(&self) -> usize {
        3
    }

    fn sample(&self, x: &[f64], t: f64) -> Result<ExactJet> {
        Ok(self.0.exact_jet(x, t))
    }
}

impl FieldSource for TrialSolution {
    fn time_orders(&self) -> usize {
        3
    }

    fn sample(&self, x: &[f64], t: f64) -> Result<ExactJet> {
        let dim = x.len();
        let coords: Vec<usize> = (0..=dim).collect();
        let jet = trial_jet(self, x, t, &coords, 2)?;
        Ok(ExactJet {
            time: [jet.value, jet.d1[&dim], jet.d2[&dim]],
            grad: (0..dim).map(|c| jet.d1[&c]).collect(),
            second: (0..dim).map(|c| jet.d2[&c]).collect(),
        })
    }
}

/// `D^α u(x, t_n) + N_x[u](x, t_n) − g(x, t_n)` with the Caputo term taken
/// from `bank`.
pub fn residual_at(
    problem: &PdeProblem,
    source: &dyn FieldSource,
    bank: &StencilBank,
    grid: &TimeGrid,
    x: &[f64],
    n: usize,
) -> Result<f64> {
    let m = bank.degree().orders();
    if source.time_orders() < m {
        return Err(HnsError::Contract(format!(
            "degree {} stencils need {m} time orders, source has {}",
            bank.degree().p(),
            source.time_orders()
        )));
    }
    if bank.steps() != grid.steps() || n == 0 || n > grid.steps() {
        return Err(HnsError::Contract(format!("time index {n} outside a {}-step bank", bank.steps())));
    }
    let mut caputo = 0.0;
    let mut at_n = None;
    for k in 0..=n {
        let jet = source.sample(x, grid.node(k))?;
        for d in 0..m {
            caputo += bank.weight(n, k, d) * jet.time[d];
        }
        if k == n {
            at_n = Some(jet);
        }
    }
    let jet = at_n.expect("ladder includes t_n");
    let t = grid.node(n);
    Ok(caputo + problem.operator.apply(jet.time[0], &jet.grad, &jet.second) - problem.forcing(x, t))
}

/// Mean squared boundary mismatch, residual and (if measurements are
/// attached) data misfit.
pub fn total_loss(
    problem: &PdeProblem,
    source: &dyn FieldSource,
    colloc: &CollocationSet,
    bank: &StencilBank,
) -> Result<LossTerms> {
    let grid = &colloc.grid;
    let steps = grid.steps();
    let mut residual = 0.0;
    let mut data = 0.0;
    for i in 0..colloc.interior_count() {
        let x = colloc.interior_point(i);
        for n in 1..=steps {
            let r = residual_at(problem, source, bank, grid, x, n)?;
            residual += r * r;
        }
        if let Some(d) = colloc.data() {
            for n in 1..=steps {
                let e = source.sample(x, grid.node(n))?.time[0] - d[i * steps + n - 1];
                data += e * e;
            }
        }
    }
    let mut boundary = 0.0;
    for i in 0..colloc.boundary_count() {
        let x = colloc.boundary_point(i);
        for n in 1..=steps {
            let t = grid.node(n);
            let e = source.sample(x, t)?.time[0] - problem.boundary(x, t);
            boundary += e * e;
        }
    }
    let n_r = colloc.residual_terms() as f64;
    let n_b = colloc.boundary_terms().max(1) as f64;
    Ok(LossTerms::new(boundary / n_b, residual / n_r, data / n_r))
}
