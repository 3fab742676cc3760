//! Single-point jets of the network and of the trial solution
//! `ũ(x, t) = t·f(x, t) + I(x)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::dense::{DenseNet, JetSpec, JetWork};
use crate::error::{HnsError, Result};

/// A value with first and pure second derivatives along selected
/// coordinates. Coordinates that were not requested are absent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JetValue {
    pub value: f64,
    pub d1: BTreeMap<usize, f64>,
    pub d2: BTreeMap<usize, f64>,
}

impl JetValue {
    fn from_components(spec: &JetSpec, comps: &[f64]) -> Self {
        let mut jet = JetValue { value: comps[0], ..Default::default() };
        for &c in spec.first() {
            jet.d1.insert(c, comps[spec.first_slot(c).unwrap()]);
        }
        for &c in spec.second() {
            jet.d2.insert(c, comps[spec.second_slot(c).unwrap()]);
        }
        jet
    }
}

/// Jet of the network at one input.
pub fn eval_jet(net: &DenseNet, input: &[f64], coords: &[usize], order: usize) -> Result<JetValue> {
    let spec = JetSpec::uniform(coords, order)?;
    eval_jet_spec(net, input, &spec)
}

pub fn eval_jet_spec(net: &DenseNet, input: &[f64], spec: &JetSpec) -> Result<JetValue> {
    check_input(net, input, spec)?;
    let mut work = JetWork::new();
    net.forward_batch(spec, input, &mut work);
    Ok(JetValue::from_components(spec, work.output()))
}

pub(crate) fn check_input(net: &DenseNet, input: &[f64], spec: &JetSpec) -> Result<()> {
    if input.len() != net.input_dim() {
        return Err(HnsError::Contract(format!(
            "network expects {} inputs, got {}",
            net.input_dim(),
            input.len()
        )));
    }
    if let Some(&c) = spec.first().iter().find(|&&c| c >= input.len()) {
        return Err(HnsError::Contract(format!("jet coordinate {c} out of range")));
    }
    Ok(())
}

/// Initial data `I(x)` with its gradient and pure second derivatives.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InitialJet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub second: Vec<f64>,
}

impl InitialJet {
    pub fn zero(dim: usize) -> Self {
        Self { value: 0.0, grad: vec![0.0; dim], second: vec![0.0; dim] }
    }
}

pub type InitialFn = Arc<dyn Fn(&[f64]) -> InitialJet + Send + Sync>;

/// Network wrapped so that the initial condition holds identically.
/// The network input is `(x_1, …, x_d, t)`, so time is coordinate `d`.
#[derive(Clone)]
pub struct TrialSolution {
    pub net: DenseNet,
    pub initial: InitialFn,
}

impl std::fmt::Debug for TrialSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrialSolution").field("layer_sizes", &self.net.layer_sizes()).finish_non_exhaustive()
    }
}

impl TrialSolution {
    pub fn new(net: DenseNet, initial: InitialFn) -> Self {
        Self { net, initial }
    }

    pub fn spatial_dim(&self) -> usize {
        self.net.input_dim() - 1
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        let mut input = x.to_vec();
        input.push(t);
        t * self.net.eval(&input) + (self.initial)(x).value
    }
}

/// Jet of `ũ` at `(x, t)`; `coords` index the network input, so the time
/// coordinate is `x.len()`.
pub fn trial_jet(trial: &TrialSolution, x: &[f64], t: f64, coords: &[usize], order: usize) -> Result<JetValue> {
    let spec = JetSpec::uniform(coords, order)?;
    let mut input = x.to_vec();
    input.push(t);
    let f = eval_jet_spec(&trial.net, &input, &spec)?;
    let init = (trial.initial)(x);
    Ok(combine_trial(&f, &init, x.len(), t))
}

/// Product and sum rules for `t·f + I`.
pub(crate) fn combine_trial(f: &JetValue, init: &InitialJet, time: usize, t: f64) -> JetValue {
    let mut out = JetValue { value: t * f.value + init.value, ..Default::default() };
    for (&c, &v) in &f.d1 {
        let d = if c == time { f.value + t * v } else { t * v + init.grad[c] };
        out.d1.insert(c, d);
    }
    for (&c, &v) in &f.d2 {
        let d = if c == time { 2.0 * f.d1[&c] + t * v } else { t * v + init.second[c] };
        out.d2.insert(c, d);
    }
    out
}
