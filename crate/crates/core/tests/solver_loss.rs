use hns_core::caputo::{FracOrder, TimeGrid};
use hns_core::hermite::{Degree, StencilBank};
use hns_core::lbfgs::{minimize, LbfgsConfig, Status};
use hns_core::net::{init_net, DenseNet, TrialSolution};
use hns_core::solver::{
    builtin, residual_at, sigmoid, total_loss, CollocationSet, ExactSolution, InverseConfig, Objective, PdeProblem,
    ProblemId,
};
use hns_core::gamma;

fn small_sizes(problem: &PdeProblem) -> Vec<usize> {
    vec![problem.spatial_dim + 1, 6, 6, 1]
}

fn colloc(problem: &PdeProblem, mt: usize) -> CollocationSet {
    let mx = match problem.spatial_dim {
        0 => 0,
        1 | 2 => 5,
        _ => 7,
    };
    CollocationSet::for_problem(problem, mt, mx, Some(3), 11).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn fde_exact_solution_residual_vanishes_for_cubic_stencils() {
    let p = builtin(ProblemId::Fde, 0.5).unwrap();
    let grid = TimeGrid::from_node_count(2.0, 11).unwrap();
    let bank = StencilBank::new(Degree::Cubic, p.alpha, &grid);
    for n in 1..=10 {
        let r = residual_at(&p, &ExactSolution(&p), &bank, &grid, &[], n).unwrap();
        assert!(r.abs() <= 1e-10, "n = {n}: {r}");
    }
}

#[test]
fn tfde_linear_residual_matches_direct_l1_sum() {
    let alpha = 0.65;
    let p = builtin(ProblemId::Tfde, alpha).unwrap();
    let grid = TimeGrid::from_node_count(1.0, 21).unwrap();
    let bank = StencilBank::new(Degree::Linear, p.alpha, &grid);
    let dt = grid.dt();
    let v = |t: f64| 2.0 * t.powf(alpha) / gamma(1.0 + alpha).unwrap();
    for n in [1, 5, 20] {
        // Textbook L1: Δt^{−α}/Γ(2−α) Σ_k b_k (u_{n−k} − u_{n−k−1}).
        let mut l1 = 0.0;
        for k in 0..n {
            let b = (k as f64 + 1.0).powf(1.0 - alpha) - (k as f64).powf(1.0 - alpha);
            l1 += b * (v(grid.node(n - k)) - v(grid.node(n - k - 1)));
        }
        l1 *= dt.powf(-alpha) / gamma(2.0 - alpha).unwrap();
        // −u_xx = −2 and g = 0, so the residual is the Caputo error of the t part.
        let r = residual_at(&p, &ExactSolution(&p), &bank, &grid, &[0.3], n).unwrap();
        assert!((r - (l1 - 2.0)).abs() < 1e-12, "n = {n}: {r} vs {}", l1 - 2.0);
    }
}

#[test]
fn insufficient_time_orders_are_rejected() {
    struct ValuesOnly<'a>(&'a PdeProblem);
    impl hns_core::solver::FieldSource for ValuesOnly<'_> {
        fn time_orders(&self) -> usize {
            1
        }
        fn sample(&self, x: &[f64], t: f64) -> hns_core::Result<hns_core::solver::ExactJet> {
            Ok(self.0.exact_jet(x, t))
        }
    }
    let p = builtin(ProblemId::Fde, 0.5).unwrap();
    let grid = TimeGrid::from_node_count(2.0, 6).unwrap();
    let bank = StencilBank::new(Degree::Cubic, p.alpha, &grid);
    assert!(residual_at(&p, &ValuesOnly(&p), &bank, &grid, &[], 1).is_err());
    let linear = StencilBank::new(Degree::Linear, p.alpha, &grid);
    assert!(residual_at(&p, &ValuesOnly(&p), &linear, &grid, &[], 1).is_ok());
}

#[test]
fn exact_solution_loss_is_at_rounding_level() {
    let p = builtin(ProblemId::Fde, 0.5).unwrap();
    let c = colloc(&p, 11);
    assert_eq!(c.boundary_terms(), 0);
    let bank = StencilBank::new(Degree::Cubic, p.alpha, &c.grid);
    let terms = total_loss(&p, &ExactSolution(&p), &c, &bank).unwrap();
    assert!(terms.total <= 1e-20, "{terms:?}");
    assert_eq!(terms.boundary, 0.0);
}

#[test]
fn batched_loss_matches_pointwise_loss() {
    let cases = [
        (ProblemId::Fde, Degree::Linear),
        (ProblemId::Fde, Degree::Quintic),
        (ProblemId::Tfde, Degree::Cubic),
        (ProblemId::Tfade2d, Degree::Quintic),
        (ProblemId::Fpde3d, Degree::Cubic),
        (ProblemId::Fpde3dProduct, Degree::Linear),
        (ProblemId::Advection10d, Degree::Cubic),
    ];
    for (id, degree) in cases {
        let p = builtin(id, id.default_alpha()).unwrap();
        let c = colloc(&p, 5);
        let sizes = small_sizes(&p);
        let net = init_net(3, &sizes).unwrap();
        let obj = Objective::new(&p, &c, degree, &sizes, InverseConfig::default()).unwrap();
        let (fast, _) = obj.evaluate_terms(net.params()).unwrap();
        let bank = StencilBank::new(degree, p.alpha, &c.grid);
        let trial = TrialSolution::new(net, p.initial_fn());
        let slow = total_loss(&p, &trial, &c, &bank).unwrap();
        assert!(rel(fast.residual, slow.residual) < 1e-11, "{id} residual {fast:?} vs {slow:?}");
        assert!(rel(fast.boundary, slow.boundary) < 1e-11 || slow.boundary == 0.0, "{id} boundary");
        assert_eq!(fast.data, 0.0);
    }
}

#[test]
fn data_term_matches_pointwise_loss() {
    let p = builtin(ProblemId::Inverse3d, 0.5).unwrap();
    let c = colloc(&p, 4).with_data(|x, t| p.exact(x, t));
    let sizes = small_sizes(&p);
    let net = init_net(8, &sizes).unwrap();
    let obj = Objective::new(&p, &c, Degree::Cubic, &sizes, InverseConfig::default()).unwrap();
    let (fast, _) = obj.evaluate_terms(net.params()).unwrap();
    let bank = StencilBank::new(Degree::Cubic, p.alpha, &c.grid);
    let slow = total_loss(&p, &TrialSolution::new(net, p.initial_fn()), &c, &bank).unwrap();
    assert!(rel(fast.data, slow.data) < 1e-11, "{fast:?} vs {slow:?}");
    assert!(rel(fast.total, slow.total) < 1e-11);
}

fn fd(obj: &Objective<'_>, x: &[f64], i: usize, h: f64) -> f64 {
    let at = |d: f64| {
        let mut y = x.to_vec();
        y[i] += d;
        obj.evaluate(&y).unwrap().0
    };
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

#[test]
fn batched_gradient_matches_finite_differences() {
    for (id, degree) in [(ProblemId::Fde, Degree::Quintic), (ProblemId::Tfade2d, Degree::Cubic), (ProblemId::Advection10d, Degree::Quintic)] {
        let p = builtin(id, id.default_alpha()).unwrap();
        let c = colloc(&p, 4);
        let sizes = small_sizes(&p);
        let net = init_net(21, &sizes).unwrap();
        let obj = Objective::new(&p, &c, degree, &sizes, InverseConfig::default()).unwrap();
        let x = net.params().to_vec();
        let (_, g) = obj.evaluate(&x).unwrap();
        for i in (0..x.len()).step_by(7) {
            let f = fd(&obj, &x, i, 1e-4);
            if f.abs() > 1e-8 {
                assert!(rel(g[i], f) < 1e-6, "{id} param {i}: {} vs {f}", g[i]);
            }
        }
    }
}

#[test]
fn inverse_gradient_matches_finite_differences() {
    let p = builtin(ProblemId::Inverse3d, 0.5).unwrap();
    let c = colloc(&p, 4).with_data(|x, t| p.exact(x, t));
    let sizes = small_sizes(&p);
    let net = init_net(4, &sizes).unwrap();
    let unknowns = InverseConfig { alpha: Some(0.3), beta: Some(0.7), gamma: Some(1.4) };
    let obj = Objective::new(&p, &c, Degree::Cubic, &sizes, unknowns).unwrap();
    let mut x = net.params().to_vec();
    x.extend(unknowns.initial_extras().unwrap());
    let (_, g) = obj.evaluate(&x).unwrap();
    let n = obj.net_param_count();
    for i in [0, 17, n - 1, n, n + 1, n + 2] {
        let f = fd(&obj, &x, i, 1e-4);
        assert!(rel(g[i], f) < 1e-6, "coordinate {i}: {} vs {f}", g[i]);
    }
}

#[test]
fn alpha_gradient_matches_rebuilt_stencils() {
    // ∂loss/∂α from the differentiated weights against forward losses whose
    // stencils are assembled from scratch at α ± h.
    let base = builtin(ProblemId::Inverse3d, 0.5).unwrap();
    let c = colloc(&base, 5).with_data(|x, t| base.exact(x, t));
    let sizes = small_sizes(&base);
    let net = init_net(5, &sizes).unwrap();
    let a0 = 0.42;
    let unknowns = InverseConfig { alpha: Some(a0), ..Default::default() };
    let obj = Objective::new(&base, &c, Degree::Cubic, &sizes, unknowns).unwrap();
    let mut x = net.params().to_vec();
    x.extend(unknowns.initial_extras().unwrap());
    let (_, g) = obj.evaluate(&x).unwrap();
    let dalpha = g[x.len() - 1] / (a0 * (1.0 - a0));

    let loss_at = |a: f64| {
        let mut q = base.clone();
        q.alpha = FracOrder::new(a).unwrap();
        let o = Objective::new(&q, &c, Degree::Cubic, &sizes, InverseConfig::default()).unwrap();
        o.evaluate(net.params()).unwrap().0
    };
    let h = 1e-4;
    let fd = (-loss_at(a0 + 2.0 * h) + 8.0 * loss_at(a0 + h) - 8.0 * loss_at(a0 - h) + loss_at(a0 - 2.0 * h)) / (12.0 * h);
    assert!(rel(dalpha, fd) < 1e-5, "{dalpha} vs {fd}");
}

#[test]
fn thread_count_does_not_change_results() {
    let p = builtin(ProblemId::Fpde3dProduct, 0.5).unwrap();
    let c = CollocationSet::for_problem(&p, 6, 300, Some(20), 2).unwrap();
    let sizes = small_sizes(&p);
    let net = init_net(6, &sizes).unwrap();
    let one = Objective::new(&p, &c, Degree::Cubic, &sizes, InverseConfig::default()).unwrap().with_threads(1);
    let three = Objective::new(&p, &c, Degree::Cubic, &sizes, InverseConfig::default()).unwrap().with_threads(3);
    assert_eq!(one.evaluate(net.params()).unwrap(), three.evaluate(net.params()).unwrap());
}

#[test]
fn inverse_at_a_consistent_optimum_stays_put() {
    // ũ = t·(w t + b) + 1 with w = 1, b = 0 is the FDE solution exactly and
    // cubic stencils integrate it without error, so α = 0.5 is a stationary
    // point of the full inverse loss.
    let p = builtin(ProblemId::Fde, 0.5).unwrap();
    let c = CollocationSet::for_problem(&p, 6, 0, None, 0).unwrap().with_data(|x, t| p.exact(x, t));
    let sizes = [1, 1];
    let net = DenseNet::from_params(&sizes, vec![1.0, 0.0]).unwrap();
    let unknowns = InverseConfig { alpha: Some(0.5), ..Default::default() };
    let obj = Objective::new(&p, &c, Degree::Cubic, &sizes, unknowns).unwrap();
    let mut x0 = net.params().to_vec();
    x0.extend(unknowns.initial_extras().unwrap());
    let (f0, _) = obj.evaluate(&x0).unwrap();
    assert!(f0 < 1e-24, "{f0}");
    let min = minimize(|x| obj.evaluate(x).unwrap(), &x0, &LbfgsConfig::default()).unwrap();
    assert_eq!(min.status, Status::Converged);
    assert!(min.value <= f0);
    assert!((sigmoid(min.x[2]) - 0.5).abs() <= 1e-6);
}

#[test]
fn inverse_without_measurements_is_rejected() {
    let p = builtin(ProblemId::Inverse3d, 0.5).unwrap();
    let c = colloc(&p, 4);
    let unknowns = InverseConfig { alpha: Some(0.2), ..Default::default() };
    assert!(Objective::new(&p, &c, Degree::Cubic, &small_sizes(&p), unknowns).is_err());
}
