//! Differentiable GELU network: value, input derivatives and exact
//! parameter gradients.

mod dense;
mod gelu;
mod jet;
mod tape;

pub use dense::{init_net, DenseNet, JetSpec, JetWork};
pub use gelu::{gelu, gelu_taylor, GeluTaylor};
pub use jet::{eval_jet, eval_jet_spec, trial_jet, InitialFn, InitialJet, JetValue, TrialSolution};
pub use tape::{loss_gradient, JetVars, LossContext, LossGradient, Tape, Var};

/// Hidden widths used throughout: four layers of twenty.
pub const DEFAULT_HIDDEN: [usize; 4] = [20, 20, 20, 20];

/// `[input_dim, 20, 20, 20, 20, 1]`.
pub fn default_layer_sizes(input_dim: usize) -> Vec<usize> {
    let mut sizes = vec![input_dim];
    sizes.extend_from_slice(&DEFAULT_HIDDEN);
    sizes.push(1);
    sizes
}
