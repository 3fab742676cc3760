//! Command implementations behind the `hns` binary. Every command produces
//! a CSV table; files land under `out_dir`.

mod config;
mod tables;

pub use config::{Command, RunConfig};
pub use tables::{table_cells, Cell, Scale};

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::caputo::{caputo_monomial, FracOrder, ScalarField1D, TimeGrid};
use crate::error::{HnsError, Result};
use crate::fdm::benchmark_error;
use crate::hermite::{apply_stencil, build_stencil, dump_kernels, error_bound, estimate_order, Degree};
use crate::lbfgs::LbfgsConfig;
use crate::solver::{builtin, solve_forward, solve_inverse, ForwardReport, InverseConfig, InverseReport, ProblemId, SolveConfig};

/// One file produced by a command.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub contents: String,
}

/// Stencil error for `u = t^{p+1}` at `t = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadRow {
    pub alpha: f64,
    pub p: usize,
    pub n: usize,
    pub dt: f64,
    pub stencil: f64,
    pub exact: f64,
    pub error: f64,
    pub bound: f64,
    /// Least-squares order over the whole `n` sweep.
    pub order: f64,
}

impl QuadRow {
    pub const CSV_HEADER: &'static str = "alpha,p,n,dt,stencil,exact,error,bound,bound_ok,order";

    pub fn bound_ok(&self) -> bool {
        self.error <= self.bound
    }

    fn csv(&self) -> String {
        format!(
            "{:?},{},{},{:?},{:?},{:?},{:e},{:e},{},{:?}",
            self.alpha,
            self.p,
            self.n,
            self.dt,
            self.stencil,
            self.exact,
            self.error,
            self.bound,
            self.bound_ok(),
            self.order
        )
    }
}

/// Nodal data of `t^q` with as many derivatives as `orders`.
pub fn monomial_field(q: u32, grid: &TimeGrid, orders: usize) -> Result<ScalarField1D> {
    let qf = q as f64;
    let v = move |t: f64| t.powi(q as i32);
    let d1 = move |t: f64| if q >= 1 { qf * t.powi(q as i32 - 1) } else { 0.0 };
    let d2 = move |t: f64| if q >= 2 { qf * (qf - 1.0) * t.powi(q as i32 - 2) } else { 0.0 };
    let all: [&dyn Fn(f64) -> f64; 3] = [&v, &d1, &d2];
    ScalarField1D::sample(grid, &all[..orders])
}

/// Stencil errors on `u = t^{p+1}` over `[0, 1]`, their fitted order, and
/// the a-priori bound with `sup |u^{(p+1)}| = (p+1)!`.
pub fn quad_check(alpha: FracOrder, degree: Degree, n_list: &[usize]) -> Result<Vec<QuadRow>> {
    let p = degree.p();
    let q = p as u32 + 1;
    let max_deriv: f64 = (1..=q).map(f64::from).product();
    let exact = caputo_monomial(q as f64, alpha, 1.0)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let grid = TimeGrid::new(1.0, n)?;
        let field = monomial_field(q, &grid, degree.orders())?;
        let stencil = apply_stencil(&build_stencil(p, alpha, n, grid.dt())?, &field)?;
        rows.push(QuadRow {
            alpha: alpha.get(),
            p,
            n,
            dt: grid.dt(),
            stencil,
            exact,
            error: (stencil - exact).abs(),
            bound: error_bound(p, alpha, grid.dt(), max_deriv)?,
            order: f64::NAN,
        });
    }
    if rows.len() >= 3 {
        let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
        let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
        let order = estimate_order(&dts, &errs)?;
        rows.iter_mut().for_each(|r| r.order = order);
    }
    Ok(rows)
}

fn degrees(cfg: &RunConfig, default: &[usize]) -> Result<Vec<Degree>> {
    cfg.list::<usize>("ps")?.unwrap_or_else(|| default.to_vec()).into_iter().map(Degree::try_from).collect()
}

fn alphas(cfg: &RunConfig, default: &[f64]) -> Result<Vec<FracOrder>> {
    cfg.list::<f64>("alphas")?.unwrap_or_else(|| default.to_vec()).into_iter().map(FracOrder::new).collect()
}

fn lbfgs_config(cfg: &RunConfig) -> Result<LbfgsConfig> {
    let mut l = LbfgsConfig::default();
    l.max_iters = cfg.get_or("iters", l.max_iters)?;
    l.grad_tol = cfg.get_or("grad_tol", l.grad_tol)?;
    l.validate()?;
    Ok(l)
}

fn solve_config(cfg: &RunConfig, id: ProblemId) -> Result<SolveConfig> {
    let mut s = SolveConfig::for_problem(id);
    if let Some(p) = cfg.get::<usize>("p")? {
        s.degree = Degree::try_from(p)?;
    }
    s.mt = cfg.get_or("mt", s.mt)?;
    s.mx = cfg.get_or("mx", s.mx)?;
    s.nb = cfg.get("nb")?.or(s.nb);
    s.seed = cfg.get_or("seed", s.seed)?;
    s.test_points = cfg.get("test_points")?.or(s.test_points);
    s.threads = cfg.get("threads")?;
    s.lbfgs = lbfgs_config(cfg)?;
    Ok(s)
}

fn inverse_config(cfg: &RunConfig) -> Result<InverseConfig> {
    let names = cfg.list::<String>("unknowns")?.unwrap_or_else(|| vec!["alpha".into()]);
    let init = cfg.list::<f64>("init")?.unwrap_or_else(|| vec![0.2]);
    if init.len() != 1 && init.len() != names.len() {
        return Err(HnsError::Config(format!("`init` needs 1 or {} values, got {}", names.len(), init.len())));
    }
    let mut inv = InverseConfig::default();
    for (i, name) in names.iter().enumerate() {
        let v = init[if init.len() == 1 { 0 } else { i }];
        let slot = match name.as_str() {
            "alpha" => &mut inv.alpha,
            "beta" => &mut inv.beta,
            "gamma" => &mut inv.gamma,
            other => return Err(HnsError::Config(format!("unknown coefficient {other:?} in `unknowns`"))),
        };
        if slot.replace(v).is_some() {
            return Err(HnsError::Config(format!("`{name}` listed twice in `unknowns`")));
        }
    }
    Ok(inv)
}

fn trace_csv(report: &ForwardReport) -> String {
    let mut s = String::from("iter,loss,grad_norm\n");
    for e in &report.trace {
        let _ = writeln!(s, "{},{:e},{:e}", e.iter, e.loss, e.grad_norm);
    }
    s
}

fn cmd_quad_check(cfg: &RunConfig) -> Result<String> {
    let n_list = cfg.list("n_list")?.unwrap_or_else(|| vec![8, 16, 32, 64, 128]);
    let mut out = format!("{}\n", QuadRow::CSV_HEADER);
    for a in alphas(cfg, &[0.3, 0.5, 0.7])? {
        for d in degrees(cfg, &[1, 3, 5])? {
            for row in quad_check(a, d, &n_list)? {
                out.push_str(&row.csv());
                out.push('\n');
            }
        }
    }
    Ok(out)
}

fn cmd_fdm(cfg: &RunConfig) -> Result<String> {
    let alpha = FracOrder::new(cfg.get_or("alpha", 0.5)?)?;
    let mts = cfg.list("mt_list")?.unwrap_or_else(|| vec![6, 11, 21, 41, 81, 101, 201]);
    let mut out = String::from("mt,rel_l2\n");
    for mt in mts {
        let _ = writeln!(out, "{mt},{:e}", benchmark_error(alpha, mt)?);
    }
    Ok(out)
}

fn cmd_kernels(cfg: &RunConfig) -> Result<String> {
    let mut buf = Vec::new();
    dump_kernels(&mut buf, &degrees(cfg, &[1, 3, 5])?, &alphas(cfg, &[0.5])?, cfg.get_or("lags", 8)?)?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

fn problem_from(cfg: &RunConfig) -> Result<crate::solver::PdeProblem> {
    let id: ProblemId = cfg.require("problem")?;
    builtin(id, cfg.get_or("alpha", id.default_alpha())?)
}

fn cmd_solve(cfg: &RunConfig, extra: &mut Vec<Artifact>) -> Result<String> {
    let problem = problem_from(cfg)?;
    let settings = solve_config(cfg, problem.id)?;
    let (trial, report) = solve_forward(&problem, &settings)?;
    if let Some(file) = cfg.raw("trace_csv") {
        extra.push(Artifact { file: file.into(), contents: trace_csv(&report) });
    }
    if let Some(file) = cfg.raw("checkpoint") {
        let mut buf = Vec::new();
        trial.net.save(&mut buf)?;
        extra.push(Artifact { file: file.into(), contents: String::from_utf8(buf).expect("checkpoint is UTF-8") });
    }
    Ok(format!("{}\n{}\n", ForwardReport::CSV_HEADER, report.csv_row()))
}

fn cmd_inverse(cfg: &RunConfig, extra: &mut Vec<Artifact>) -> Result<String> {
    let problem = problem_from(cfg)?;
    let settings = solve_config(cfg, problem.id)?;
    let (_, report) = solve_inverse(&problem, &inverse_config(cfg)?, &settings)?;
    if let Some(file) = cfg.raw("trace_csv") {
        extra.push(Artifact { file: file.into(), contents: trace_csv(&report.forward) });
    }
    let mut out = format!("{}\n", InverseReport::CSV_HEADER);
    for row in report.csv_rows() {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

fn cmd_table(cfg: &RunConfig) -> Result<String> {
    let table: usize = cfg.require("table")?;
    let scale: Scale = cfg.get_or("scale", Scale::Desk)?;
    let seed: u64 = cfg.get_or("seed", 0)?;
    let lbfgs = lbfgs_config(cfg)?;
    let test_points: Option<usize> = cfg.get("test_points")?;
    let threads: Option<usize> = cfg.get("threads")?;
    let cells = table_cells(table, scale)?;
    let inverse = cells.iter().any(|c| c.unknowns.is_some());
    let mut out = String::new();
    if inverse {
        let _ = writeln!(out, "{},status", InverseReport::CSV_HEADER);
    } else {
        let _ = writeln!(out, "{},status", ForwardReport::CSV_HEADER);
    }
    for (i, cell) in cells.iter().enumerate() {
        let mut s = SolveConfig::for_problem(cell.problem);
        s.degree = cell.degree;
        s.mt = cell.mt;
        s.mx = cell.mx;
        s.seed = seed + i as u64;
        s.lbfgs = lbfgs.clone();
        s.test_points = test_points.or(cell.test_points);
        s.threads = threads;
        let result = builtin(cell.problem, cell.alpha).and_then(|problem| match &cell.unknowns {
            None => solve_forward(&problem, &s).map(|(_, r)| vec![format!("{},{}", r.csv_row(), r.status.as_str())]),
            Some(u) => solve_inverse(&problem, u, &s)
                .map(|(_, r)| r.csv_rows().into_iter().map(|row| format!("{row},{}", r.forward.status.as_str())).collect()),
        });
        match result {
            Ok(rows) => rows.iter().for_each(|r| {
                out.push_str(r);
                out.push('\n');
            }),
            Err(e) => {
                // Keep sweeping; the failure is recorded in place of the row.
                let msg = e.to_string().replace(',', ";");
                let lead = if inverse {
                    format!("{},{},{},{},,,,,,,,,", cell.problem, cell.degree.p(), cell.mt, cell.mx)
                } else {
                    format!("{},{:?},{},{},{},,,,", cell.problem, cell.alpha, cell.degree.p(), cell.mt, cell.mx)
                };
                let _ = writeln!(out, "{lead},error: {msg}");
            }
        }
    }
    Ok(out)
}

/// Run a command and return its CSV (named by `out_csv`, default
/// `<command>.csv`) followed by any side files.
pub fn execute(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let mut extra = Vec::new();
    let main = match cfg.command {
        Command::QuadCheck => cmd_quad_check(cfg)?,
        Command::Solve => cmd_solve(cfg, &mut extra)?,
        Command::Inverse => cmd_inverse(cfg, &mut extra)?,
        Command::Fdm => cmd_fdm(cfg)?,
        Command::Table => cmd_table(cfg)?,
        Command::Kernels => cmd_kernels(cfg)?,
    };
    let default_name = match cfg.command {
        Command::Table => format!("table{}.csv", cfg.raw("table").unwrap_or("")),
        c => format!("{c}.csv"),
    };
    let file = cfg.raw("out_csv").map(String::from).unwrap_or(default_name);
    let mut all = vec![Artifact { file, contents: main }];
    all.extend(extra);
    Ok(all)
}

/// Execute, write every artifact under `out_dir`, and echo the main CSV.
pub fn run(cfg: &RunConfig, echo: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let artifacts = execute(cfg)?;
    let dir = Path::new(cfg.raw("out_dir").unwrap_or("."));
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for a in &artifacts {
        let path = dir.join(&a.file);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, &a.contents)?;
        written.push(path);
    }
    echo.write_all(artifacts[0].contents.as_bytes())?;
    Ok(written)
}
