#![allow(dead_code)]

use hns_core::net::{init_net, loss_gradient, DenseNet, InitialJet, JetSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random smooth loss over a handful of trial jets of a `[2, 5, 5, 1]` net.
pub struct RandomLoss {
    points: Vec<(f64, f64)>,
    weights: Vec<[f64; 5]>,
    init: InitialJet,
}

impl RandomLoss {
    pub fn new(seed: u64) -> (DenseNet, Self) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = init_net(seed, &[2, 5, 5, 1]).unwrap();
        let n = rng.gen_range(1..4);
        let points = (0..n).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
        let weights = (0..n).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect();
        let x0: f64 = rng.gen_range(0.0..1.0);
        let init = InitialJet { value: x0.sin(), grad: vec![x0.cos()], second: vec![-x0.sin()] };
        (net, Self { points, weights, init })
    }

    /// Σ (w·[u, u_x, u_t, u_xx, u_tt] − 0.1)² with the trial jet at each point.
    pub fn gradient(&self, net: &DenseNet) -> (f64, Vec<f64>) {
        let spec = JetSpec::uniform(&[0, 1], 2).unwrap();
        let g = loss_gradient(net, &[], |ctx| {
            let mut acc = ctx.constant(0.0);
            for ((x, t), w) in self.points.iter().zip(&self.weights) {
                let j = ctx.trial_jet(&[*x], *t, &self.init, &spec)?;
                let mix = j.value * w[0] + j.d1[&0] * w[1] + j.d1[&1] * w[2] + j.d2[&0] * w[3] + j.d2[&1] * w[4];
                acc = acc + (mix - 0.1).square();
            }
            Ok(acc)
        })
        .unwrap();
        (g.value, g.params)
    }

    pub fn value(&self, net: &DenseNet) -> f64 {
        self.gradient(net).0
    }
}

/// Five-point central difference of `f` along parameter `i`.
pub fn fd_param(net: &DenseNet, i: usize, h: f64, f: impl Fn(&DenseNet) -> f64) -> f64 {
    let mut probe = net.clone();
    let mut at = |s: f64| {
        probe.params_mut()[i] = net.params()[i] + s * h;
        f(&probe)
    };
    (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h)
}
