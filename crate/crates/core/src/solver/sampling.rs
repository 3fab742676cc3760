//! Spatial training and test coordinates on the unit box.

use rand::distributions::Open01;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HnsError, Result};

/// Tensor-product grid with its interior/boundary split. Points are stored
/// flat, `dim` coordinates each, first axis varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSample {
    pub dim: usize,
    pub points: Vec<f64>,
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
}

impl GridSample {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Flat coordinates of the listed points.
    pub fn gather(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().flat_map(|&i| self.point(i).iter().copied()).collect()
    }
}

/// `per_axis` equispaced nodes on `[0, 1]` along each of `dim` axes.
pub fn sample_equidistant(dim: usize, per_axis: usize) -> Result<GridSample> {
    if dim == 0 || per_axis < 2 {
        return Err(HnsError::Domain(format!("grid needs dim ≥ 1 and ≥ 2 nodes per axis, got {dim}, {per_axis}")));
    }
    let total = per_axis
        .checked_pow(dim as u32)
        .ok_or_else(|| HnsError::Domain("grid too large".into()))?;
    let step = 1.0 / (per_axis - 1) as f64;
    let mut points = Vec::with_capacity(total * dim);
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    for flat in 0..total {
        let mut rem = flat;
        let mut on_face = false;
        for _ in 0..dim {
            let i = rem % per_axis;
            rem /= per_axis;
            on_face |= i == 0 || i == per_axis - 1;
            // Exact endpoints regardless of rounding in i·step.
            points.push(if i == per_axis - 1 { 1.0 } else { i as f64 * step });
        }
        if on_face {
            boundary.push(flat);
        } else {
            interior.push(flat);
        }
    }
    Ok(GridSample { dim, points, interior, boundary })
}

/// Latin-hypercube design of `count` points in `(0, 1)^dim`.
pub fn sample_lhs(dim: usize, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 || dim == 0 {
        return Err(HnsError::Domain("LHS needs at least one point and one axis".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![0.0; dim * count];
    let mut strata: Vec<usize> = (0..count).collect();
    for axis in 0..dim {
        strata.shuffle(&mut rng);
        for (i, &s) in strata.iter().enumerate() {
            let u: f64 = rng.sample(Open01);
            points[i * dim + axis] = (s as f64 + u) / count as f64;
        }
    }
    Ok(points)
}

/// `per_face` points on each of the `2·dim` faces of the unit box; the free
/// coordinates on a face form a Latin hypercube.
pub fn sample_faces(dim: usize, per_face: usize, seed: u64) -> Result<Vec<f64>> {
    if dim == 0 || per_face == 0 {
        return Err(HnsError::Domain("face sampling needs dim ≥ 1 and per_face ≥ 1".into()));
    }
    let mut out = Vec::with_capacity(2 * dim * per_face * dim);
    for axis in 0..dim {
        for (side, value) in [0.0, 1.0].into_iter().enumerate() {
            let face_seed = seed.wrapping_add(1 + (2 * axis + side) as u64);
            let free = if dim > 1 { sample_lhs(dim - 1, per_face, face_seed)? } else { Vec::new() };
            for i in 0..per_face {
                let mut it = free[i * (dim - 1)..(i + 1) * (dim - 1)].iter();
                for a in 0..dim {
                    out.push(if a == axis { value } else { *it.next().unwrap() });
                }
            }
            if dim == 1 {
                // A 1D face is a single point.
                out.truncate(out.len() - (per_face - 1));
            }
        }
    }
    Ok(out)
}
