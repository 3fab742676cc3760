//! Training coordinates: spatial points paired with the full time ladder.

use super::problem::{PdeProblem, Sampling};
use super::sampling::{sample_equidistant, sample_faces, sample_lhs};
use crate::caputo::TimeGrid;
use crate::error::{HnsError, Result};

const LHS_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;
const FACE_STREAM: u64 = 0xc2b2_ae3d_27d4_eb4f;

/// Residual points (each paired with `t_1..t_N`), boundary points (each
/// paired with `t_1..t_N`) and optional measurements for inverse runs.
#[derive(Clone, Debug)]
pub struct CollocationSet {
    pub grid: TimeGrid,
    pub dim: usize,
    interior: Vec<f64>,
    n_interior: usize,
    boundary: Vec<f64>,
    /// `u(x_i, t_n)` at `i * N + (n − 1)`.
    data: Option<Vec<f64>>,
}

impl CollocationSet {
    pub fn new(grid: TimeGrid, dim: usize, interior: Vec<f64>, boundary: Vec<f64>) -> Result<Self> {
        let n_interior = if dim == 0 {
            1
        } else {
            if interior.len() % dim != 0 || boundary.len() % dim != 0 {
                return Err(HnsError::Contract("point lists must hold whole points".into()));
            }
            interior.len() / dim
        };
        if n_interior == 0 {
            return Err(HnsError::Domain("collocation set has no residual points".into()));
        }
        if dim == 0 && !boundary.is_empty() {
            return Err(HnsError::Contract("a problem without space has no boundary".into()));
        }
        Ok(Self { grid, dim, interior, n_interior, boundary, data: None })
    }

    /// Default training set for `problem`: `mt` time nodes and `mx` spatial
    /// nodes per axis (grid problems) or in total (LHS problems). `nb`
    /// overrides the per-face boundary count of LHS problems.
    pub fn for_problem(problem: &PdeProblem, mt: usize, mx: usize, nb: Option<usize>, seed: u64) -> Result<Self> {
        let grid = TimeGrid::from_node_count(problem.horizon, mt)?;
        let dim = problem.spatial_dim;
        if dim == 0 {
            return Self::new(grid, 0, Vec::new(), Vec::new());
        }
        match problem.sampling {
            Sampling::Grid => {
                let g = sample_equidistant(dim, mx)?;
                Self::new(grid, dim, g.gather(&g.interior), g.gather(&g.boundary))
            }
            Sampling::Lhs { per_face } => {
                let interior = sample_lhs(dim, mx, seed ^ LHS_STREAM)?;
                let boundary = sample_faces(dim, nb.unwrap_or(per_face), seed ^ FACE_STREAM)?;
                Self::new(grid, dim, interior, boundary)
            }
        }
    }

    /// Attach measurements `u(x_i, t_n)` taken from `source`.
    pub fn with_data(mut self, source: impl Fn(&[f64], f64) -> f64) -> Self {
        let n = self.grid.steps();
        let mut data = Vec::with_capacity(self.n_interior * n);
        for i in 0..self.n_interior {
            for k in 1..=n {
                data.push(source(self.interior_point(i), self.grid.node(k)));
            }
        }
        self.data = Some(data);
        self
    }

    pub fn interior_count(&self) -> usize {
        self.n_interior
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn interior_point(&self, i: usize) -> &[f64] {
        &self.interior[i * self.dim..(i + 1) * self.dim]
    }

    pub fn boundary_point(&self, i: usize) -> &[f64] {
        &self.boundary[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> Option<&[f64]> {
        self.data.as_deref()
    }

    /// Residual terms `N_r` (points × steps).
    pub fn residual_terms(&self) -> usize {
        self.n_interior * self.grid.steps()
    }

    /// Boundary terms `N_b` (points × steps).
    pub fn boundary_terms(&self) -> usize {
        self.boundary_count() * self.grid.steps()
    }
}
