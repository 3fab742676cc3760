//! Reverse-mode scalar tape and a loss-gradient driver that chains the tape
//! through batched network jets.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::dense::{DenseNet, JetSpec, JetWork};
use super::jet::{check_input, InitialJet};
use crate::error::Result;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    parents: [(usize, f64); 2],
}

/// Wengert list of scalar operations.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: usize,
    val: f64,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Var({}, {})", self.idx, self.val)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&self, val: f64, parents: [(usize, f64); 2]) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { parents });
        Var { tape: self, idx: nodes.len() - 1, val }
    }

    /// New independent variable.
    pub fn var(&self, val: f64) -> Var<'_> {
        self.push(val, [(NONE, 0.0); 2])
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Adjoints of `out` with respect to every node on the tape.
    pub fn gradient(&self, out: Var<'_>) -> Vec<f64> {
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; nodes.len()];
        adj[out.idx] = 1.0;
        for i in (0..=out.idx).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            for &(p, w) in &nodes[i].parents {
                if p != NONE {
                    adj[p] += w * a;
                }
            }
        }
        adj
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.val
    }

    pub fn index(&self) -> usize {
        self.idx
    }

    fn unary(self, val: f64, d: f64) -> Var<'t> {
        self.tape.push(val, [(self.idx, d), (NONE, 0.0)])
    }

    pub fn square(self) -> Var<'t> {
        self.unary(self.val * self.val, 2.0 * self.val)
    }

    pub fn powi(self, n: i32) -> Var<'t> {
        self.unary(self.val.powi(n), n as f64 * self.val.powi(n - 1))
    }

    pub fn exp(self) -> Var<'t> {
        let e = self.val.exp();
        self.unary(e, e)
    }

    pub fn ln(self) -> Var<'t> {
        self.unary(self.val.ln(), 1.0 / self.val)
    }

    pub fn sin(self) -> Var<'t> {
        self.unary(self.val.sin(), self.val.cos())
    }

    pub fn cos(self) -> Var<'t> {
        self.unary(self.val.cos(), -self.val.sin())
    }

    pub fn sqrt(self) -> Var<'t> {
        let s = self.val.sqrt();
        self.unary(s, 0.5 / s)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, o: Var<'t>) -> Var<'t> {
        self.tape.push(self.val + o.val, [(self.idx, 1.0), (o.idx, 1.0)])
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, o: Var<'t>) -> Var<'t> {
        self.tape.push(self.val - o.val, [(self.idx, 1.0), (o.idx, -1.0)])
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, o: Var<'t>) -> Var<'t> {
        self.tape.push(self.val * o.val, [(self.idx, o.val), (o.idx, self.val)])
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, o: Var<'t>) -> Var<'t> {
        let q = self.val / o.val;
        self.tape.push(q, [(self.idx, 1.0 / o.val), (o.idx, -q / o.val)])
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.unary(-self.val, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, c: f64) -> Var<'t> {
        self.unary(self.val + c, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, c: f64) -> Var<'t> {
        self.unary(self.val - c, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, c: f64) -> Var<'t> {
        self.unary(self.val * c, c)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, c: f64) -> Var<'t> {
        self.unary(self.val / c, 1.0 / c)
    }
}

impl<'t> Add<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn add(self, v: Var<'t>) -> Var<'t> {
        v + self
    }
}

impl<'t> Sub<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn sub(self, v: Var<'t>) -> Var<'t> {
        v.unary(self - v.val, -1.0)
    }
}

impl<'t> Mul<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn mul(self, v: Var<'t>) -> Var<'t> {
        v * self
    }
}

/// Jet whose components are tape variables.
#[derive(Clone, Debug)]
pub struct JetVars<'t> {
    pub value: Var<'t>,
    pub d1: BTreeMap<usize, Var<'t>>,
    pub d2: BTreeMap<usize, Var<'t>>,
}

struct Record {
    spec: JetSpec,
    input: Vec<f64>,
    leaves: Vec<usize>,
}

/// Handed to the loss closure of [`loss_gradient`]: records network jets as
/// tape leaves so their adjoints can be pulled back into parameter space.
pub struct LossContext<'t> {
    tape: &'t Tape,
    net: &'t DenseNet,
    extras: Vec<Var<'t>>,
    records: RefCell<Vec<Record>>,
}

impl<'t> LossContext<'t> {
    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    /// Registered extra scalar `i`.
    pub fn extra(&self, i: usize) -> Var<'t> {
        self.extras[i]
    }

    pub fn constant(&self, c: f64) -> Var<'t> {
        self.tape.var(c)
    }

    /// Network jet at `input`.
    pub fn jet(&self, input: &[f64], spec: &JetSpec) -> Result<JetVars<'t>> {
        check_input(self.net, input, spec)?;
        let mut work = JetWork::new();
        self.net.forward_batch(spec, input, &mut work);
        let comps: Vec<Var<'t>> = work.output().iter().map(|&v| self.tape.var(v)).collect();
        self.records.borrow_mut().push(Record {
            spec: spec.clone(),
            input: input.to_vec(),
            leaves: comps.iter().map(|v| v.idx).collect(),
        });
        let mut jet = JetVars { value: comps[0], d1: BTreeMap::new(), d2: BTreeMap::new() };
        for &c in spec.first() {
            jet.d1.insert(c, comps[spec.first_slot(c).unwrap()]);
        }
        for &c in spec.second() {
            jet.d2.insert(c, comps[spec.second_slot(c).unwrap()]);
        }
        Ok(jet)
    }

    /// Jet of `t·f(x, t) + I(x)` where `init` is `I` and its derivatives at `x`.
    pub fn trial_jet(&self, x: &[f64], t: f64, init: &InitialJet, spec: &JetSpec) -> Result<JetVars<'t>> {
        let mut input = x.to_vec();
        input.push(t);
        let f = self.jet(&input, spec)?;
        let time = x.len();
        let mut out = JetVars { value: f.value * t + init.value, d1: BTreeMap::new(), d2: BTreeMap::new() };
        for (&c, &v) in &f.d1 {
            let d = if c == time { f.value + v * t } else { v * t + init.grad[c] };
            out.d1.insert(c, d);
        }
        for (&c, &v) in &f.d2 {
            let d = if c == time { f.d1[&c] * 2.0 + v * t } else { v * t + init.second[c] };
            out.d2.insert(c, d);
        }
        Ok(out)
    }
}

/// Value and gradient of a scalar loss.
#[derive(Clone, Debug, PartialEq)]
pub struct LossGradient {
    pub value: f64,
    pub params: Vec<f64>,
    pub extras: Vec<f64>,
}

/// Exact gradient of `loss` with respect to the network parameters and the
/// extra scalars. The closure builds the loss on the tape from jets
/// requested through the context.
pub fn loss_gradient<F>(net: &DenseNet, extras: &[f64], loss: F) -> Result<LossGradient>
where
    F: for<'t> FnOnce(&LossContext<'t>) -> Result<Var<'t>>,
{
    let tape = Tape::new();
    let ctx = LossContext {
        tape: &tape,
        net,
        extras: extras.iter().map(|&e| tape.var(e)).collect(),
        records: RefCell::new(Vec::new()),
    };
    let out = loss(&ctx)?;
    let adj = tape.gradient(out);
    let mut params = vec![0.0; net.param_count()];
    let mut work = JetWork::new();
    for rec in ctx.records.borrow().iter() {
        let bar: Vec<f64> = rec.leaves.iter().map(|&i| adj[i]).collect();
        if bar.iter().all(|&b| b == 0.0) {
            continue;
        }
        net.forward_batch(&rec.spec, &rec.input, &mut work);
        net.backward_batch(&mut work, &bar, &mut params);
    }
    let extras = ctx.extras.iter().map(|v| adj[v.idx]).collect();
    Ok(LossGradient { value: out.val, params, extras })
}
