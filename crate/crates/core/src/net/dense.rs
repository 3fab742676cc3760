//! Fully connected GELU network with batched Taylor-jet propagation.
//!
//! Parameters live in one flat vector, layer by layer: the weight matrix
//! (row-major, `out × in`) followed by the bias vector.
//!
//! A batch evaluates a set of input points together with derivatives of the
//! output with respect to selected input coordinates. Every hidden quantity
//! is carried as `1 + F + S` components per point (value, `F` first
//! derivatives, `S` pure second derivatives) and stored `[neuron][comp][pt]`
//! so that the layer products and their adjoints run over contiguous rows.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gelu::gelu_taylor;
use crate::error::{HnsError, Result};

/// Which derivatives a jet evaluation carries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetSpec {
    first: Vec<usize>,
    second: Vec<usize>,
    /// For each second-derivative coordinate, its slot in `first`.
    second_src: Vec<usize>,
}

impl JetSpec {
    /// First derivatives along `first`, pure second derivatives along
    /// `second`. Every coordinate in `second` must also appear in `first`.
    pub fn new(first: &[usize], second: &[usize]) -> Result<Self> {
        let mut seen = first.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != first.len() {
            return Err(HnsError::Contract("repeated first-derivative coordinate".into()));
        }
        let second_src = second
            .iter()
            .map(|c| {
                first.iter().position(|f| f == c).ok_or_else(|| {
                    HnsError::Contract(format!("second derivative along {c} needs the first derivative too"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { first: first.to_vec(), second: second.to_vec(), second_src })
    }

    /// Value only.
    pub fn value_only() -> Self {
        Self { first: Vec::new(), second: Vec::new(), second_src: Vec::new() }
    }

    /// Derivatives up to `order ∈ {1, 2}` along every coordinate in `coords`.
    pub fn uniform(coords: &[usize], order: usize) -> Result<Self> {
        match order {
            1 => Self::new(coords, &[]),
            2 => Self::new(coords, coords),
            _ => Err(HnsError::Contract(format!("jet order must be 1 or 2, got {order}"))),
        }
    }

    pub fn first(&self) -> &[usize] {
        &self.first
    }

    pub fn second(&self) -> &[usize] {
        &self.second
    }

    pub fn components(&self) -> usize {
        1 + self.first.len() + self.second.len()
    }

    /// Component index of `∂/∂x_c`.
    pub fn first_slot(&self, coord: usize) -> Option<usize> {
        self.first.iter().position(|&c| c == coord).map(|i| 1 + i)
    }

    /// Component index of `∂²/∂x_c²`.
    pub fn second_slot(&self, coord: usize) -> Option<usize> {
        self.second.iter().position(|&c| c == coord).map(|i| 1 + self.first.len() + i)
    }

    fn max_coord(&self) -> Option<usize> {
        self.first.iter().copied().max()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseNet {
    sizes: Vec<usize>,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

/// Glorot-uniform weights and zero biases, reproducible from `seed`.
pub fn init_net(seed: u64, layer_sizes: &[usize]) -> Result<DenseNet> {
    let mut net = DenseNet::zeros(layer_sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for l in 0..net.layers() {
        let (fan_in, fan_out) = (net.sizes[l], net.sizes[l + 1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let start = net.offsets[l];
        for w in &mut net.params[start..start + fan_in * fan_out] {
            *w = rng.gen_range(-limit..limit);
        }
    }
    Ok(net)
}

impl DenseNet {
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(HnsError::Contract(format!("invalid layer sizes {layer_sizes:?}")));
        }
        if *layer_sizes.last().unwrap() != 1 {
            return Err(HnsError::Contract("the network must have a scalar output".into()));
        }
        let mut offsets = Vec::with_capacity(layer_sizes.len());
        let mut total = 0;
        for w in layer_sizes.windows(2) {
            offsets.push(total);
            total += w[0] * w[1] + w[1];
        }
        offsets.push(total);
        Ok(Self { sizes: layer_sizes.to_vec(), params: vec![0.0; total], offsets })
    }

    pub fn from_params(layer_sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes)?;
        if params.len() != net.params.len() {
            return Err(HnsError::Contract(format!(
                "layer sizes {layer_sizes:?} need {} parameters, got {}",
                net.params.len(),
                params.len()
            )));
        }
        net.params = params;
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) {
        self.params.copy_from_slice(params);
    }

    /// `(W, b)` of layer `l`.
    fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let start = self.offsets[l];
        self.params[start..start + i * o + o].split_at(i * o)
    }

    /// Plain forward pass.
    pub fn eval(&self, input: &[f64]) -> f64 {
        assert_eq!(input.len(), self.input_dim(), "input dimension");
        let mut a = input.to_vec();
        for l in 0..self.layers() {
            let (w, b) = self.layer(l);
            let fan_in = self.sizes[l];
            let mut z: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(o, bo)| bo + w[o * fan_in..(o + 1) * fan_in].iter().zip(&a).map(|(x, y)| x * y).sum::<f64>())
                .collect();
            if l + 1 < self.layers() {
                for v in &mut z {
                    *v = gelu_taylor(*v).s0;
                }
            }
            a = z;
        }
        a[0]
    }

    /// Text checkpoint: a `layer_sizes` header, then one parameter per line.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        let sizes: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        writeln!(out, "layer_sizes {}", sizes.join(" "))?;
        for p in &self.params {
            // `{:?}` prints the shortest string that parses back to the same bits.
            writeln!(out, "{p:?}")?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| HnsError::Checkpoint("empty checkpoint".into()))??;
        let rest = header
            .strip_prefix("layer_sizes")
            .ok_or_else(|| HnsError::Checkpoint(format!("bad header {header:?}")))?;
        let sizes = rest
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|e| HnsError::Checkpoint(format!("layer size {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut params = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            params.push(line.parse::<f64>().map_err(|e| HnsError::Checkpoint(format!("parameter {line:?}: {e}")))?);
        }
        Self::from_params(&sizes, params).map_err(|e| HnsError::Checkpoint(e.to_string()))
    }

    /// Evaluate jets for `npts` points stored point-major in `inputs`.
    /// Results are read from [`JetWork::output`].
    pub fn forward_batch(&self, spec: &JetSpec, inputs: &[f64], work: &mut JetWork) {
        let dim = self.input_dim();
        assert_eq!(inputs.len() % dim, 0, "inputs must hold whole points");
        if let Some(c) = spec.max_coord() {
            assert!(c < dim, "jet coordinate {c} out of range for input dimension {dim}");
        }
        let npts = inputs.len() / dim;
        work.prepare(self, spec, inputs, npts);
        let nc = spec.components();
        let nf = spec.first.len();

        // Input layer: the input jets are (x, e_c, 0).
        {
            let (w, b) = self.layer(0);
            let out = self.sizes[1];
            let z = &mut work.layers[0].z;
            for o in 0..out {
                let row = &w[o * dim..(o + 1) * dim];
                let base = o * nc * npts;
                for pt in 0..npts {
                    let x = &inputs[pt * dim..(pt + 1) * dim];
                    z[base + pt] = b[o] + row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
                }
                for (f, &c) in spec.first.iter().enumerate() {
                    z[base + (1 + f) * npts..base + (2 + f) * npts].fill(row[c]);
                }
                z[base + (1 + nf) * npts..base + nc * npts].fill(0.0);
            }
        }

        for l in 0..self.layers() {
            if l > 0 {
                let (w, b) = self.layer(l);
                let (fan_in, out) = (self.sizes[l], self.sizes[l + 1]);
                let block = nc * npts;
                let (prev, cur) = work.layers.split_at_mut(l);
                let a = &prev[l - 1].a;
                let z = &mut cur[0].z;
                for o in 0..out {
                    let zr = &mut z[o * block..(o + 1) * block];
                    zr[..npts].fill(b[o]);
                    zr[npts..].fill(0.0);
                    for i in 0..fan_in {
                        let wi = w[o * fan_in + i];
                        for (zv, av) in zr.iter_mut().zip(&a[i * block..(i + 1) * block]) {
                            *zv += wi * av;
                        }
                    }
                }
            }
            if l + 1 < self.layers() {
                activate(&mut work.layers[l], spec, self.sizes[l + 1], npts);
            }
        }
    }

    /// Accumulate into `grad` the parameter gradient of `Σ out_bar · output`
    /// for the batch last passed to [`forward_batch`](Self::forward_batch).
    pub fn backward_batch(&self, work: &mut JetWork, out_bar: &[f64], grad: &mut [f64]) {
        let npts = work.npts;
        let spec = work.spec.clone().expect("backward_batch called before forward_batch");
        let nc = spec.components();
        let block = nc * npts;
        assert_eq!(out_bar.len(), block, "output adjoint shape");
        assert_eq!(grad.len(), self.params.len(), "gradient length");

        let last = self.layers() - 1;
        work.zbar.clear();
        work.zbar.extend_from_slice(out_bar);
        for l in (0..=last).rev() {
            let (fan_in, out) = (self.sizes[l], self.sizes[l + 1]);
            let start = self.offsets[l];
            let (gw, gb) = grad[start..start + fan_in * out + out].split_at_mut(fan_in * out);
            let zbar = &work.zbar;
            for o in 0..out {
                gb[o] += zbar[o * block..o * block + npts].iter().sum::<f64>();
            }
            if l == 0 {
                let dim = fan_in;
                for o in 0..out {
                    let zr = &zbar[o * block..(o + 1) * block];
                    for pt in 0..npts {
                        let zv = zr[pt];
                        let x = &work.inputs[pt * dim..(pt + 1) * dim];
                        for (g, xi) in gw[o * dim..(o + 1) * dim].iter_mut().zip(x) {
                            *g += zv * xi;
                        }
                    }
                    for (f, &c) in spec.first.iter().enumerate() {
                        gw[o * dim + c] += zr[(1 + f) * npts..(2 + f) * npts].iter().sum::<f64>();
                    }
                }
                break;
            }
            let (w, _) = self.layer(l);
            let a = &work.layers[l - 1].a;
            work.abar.clear();
            work.abar.resize(fan_in * block, 0.0);
            for o in 0..out {
                let zr = &zbar[o * block..(o + 1) * block];
                for i in 0..fan_in {
                    let ar = &a[i * block..(i + 1) * block];
                    gw[o * fan_in + i] += zr.iter().zip(ar).map(|(x, y)| x * y).sum::<f64>();
                    let wi = w[o * fan_in + i];
                    for (ab, zv) in work.abar[i * block..(i + 1) * block].iter_mut().zip(zr) {
                        *ab += wi * zv;
                    }
                }
            }
            let layer = &work.layers[l - 1];
            let mut zbar = std::mem::take(&mut work.zbar);
            activate_adjoint(layer, &spec, fan_in, npts, &work.abar, &mut zbar);
            work.zbar = zbar;
        }
    }
}

/// Forward cache for one layer.
#[derive(Clone, Debug, Default)]
struct LayerCache {
    z: Vec<f64>,
    a: Vec<f64>,
    /// σ', σ'', σ''' at the value component, `[neuron][pt]`.
    s1: Vec<f64>,
    s2: Vec<f64>,
    s3: Vec<f64>,
}

/// Reusable buffers for batched jet evaluation.
#[derive(Clone, Debug, Default)]
pub struct JetWork {
    spec: Option<JetSpec>,
    npts: usize,
    inputs: Vec<f64>,
    layers: Vec<LayerCache>,
    zbar: Vec<f64>,
    abar: Vec<f64>,
    output_len: usize,
    last: usize,
}

impl JetWork {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, net: &DenseNet, spec: &JetSpec, inputs: &[f64], npts: usize) {
        self.spec = Some(spec.clone());
        self.npts = npts;
        self.inputs.clear();
        self.inputs.extend_from_slice(inputs);
        let nc = spec.components();
        self.layers.resize_with(net.layers(), LayerCache::default);
        for (l, cache) in self.layers.iter_mut().enumerate() {
            let width = net.sizes[l + 1];
            cache.z.resize(width * nc * npts, 0.0);
            if l + 1 < net.layers() {
                cache.a.resize(width * nc * npts, 0.0);
                cache.s1.resize(width * npts, 0.0);
                cache.s2.resize(width * npts, 0.0);
                cache.s3.resize(width * npts, 0.0);
            }
        }
        self.last = net.layers() - 1;
        self.output_len = nc * npts;
    }

    pub fn points(&self) -> usize {
        self.npts
    }

    /// Output jets laid out `[comp][pt]`.
    pub fn output(&self) -> &[f64] {
        &self.layers[self.last].z[..self.output_len]
    }
}

fn activate(cache: &mut LayerCache, spec: &JetSpec, width: usize, npts: usize) {
    let nc = spec.components();
    let nf = spec.first.len();
    let block = nc * npts;
    for o in 0..width {
        let z = &cache.z[o * block..(o + 1) * block];
        let a = &mut cache.a[o * block..(o + 1) * block];
        for pt in 0..npts {
            let g = gelu_taylor(z[pt]);
            a[pt] = g.s0;
            cache.s1[o * npts + pt] = g.s1;
            cache.s2[o * npts + pt] = g.s2;
            cache.s3[o * npts + pt] = g.s3;
        }
        let s1 = &cache.s1[o * npts..(o + 1) * npts];
        let s2 = &cache.s2[o * npts..(o + 1) * npts];
        for f in 0..nf {
            let r = (1 + f) * npts;
            for pt in 0..npts {
                a[r + pt] = s1[pt] * z[r + pt];
            }
        }
        for (j, &src) in spec.second_src.iter().enumerate() {
            let r = (1 + nf + j) * npts;
            let r1 = (1 + src) * npts;
            for pt in 0..npts {
                let z1 = z[r1 + pt];
                a[r + pt] = s2[pt] * z1 * z1 + s1[pt] * z[r + pt];
            }
        }
    }
}

fn activate_adjoint(cache: &LayerCache, spec: &JetSpec, width: usize, npts: usize, abar: &[f64], zbar: &mut Vec<f64>) {
    let nc = spec.components();
    let nf = spec.first.len();
    let block = nc * npts;
    zbar.clear();
    zbar.resize(width * block, 0.0);
    for o in 0..width {
        let z = &cache.z[o * block..(o + 1) * block];
        let ab = &abar[o * block..(o + 1) * block];
        let zb = &mut zbar[o * block..(o + 1) * block];
        let s1 = &cache.s1[o * npts..(o + 1) * npts];
        let s2 = &cache.s2[o * npts..(o + 1) * npts];
        let s3 = &cache.s3[o * npts..(o + 1) * npts];
        for pt in 0..npts {
            zb[pt] = s1[pt] * ab[pt];
        }
        for f in 0..nf {
            let r = (1 + f) * npts;
            for pt in 0..npts {
                zb[pt] += s2[pt] * z[r + pt] * ab[r + pt];
                zb[r + pt] = s1[pt] * ab[r + pt];
            }
        }
        for (j, &src) in spec.second_src.iter().enumerate() {
            let r = (1 + nf + j) * npts;
            let r1 = (1 + src) * npts;
            for pt in 0..npts {
                let z1 = z[r1 + pt];
                let a2 = ab[r + pt];
                zb[pt] += (s3[pt] * z1 * z1 + s2[pt] * z[r + pt]) * a2;
                zb[r1 + pt] += 2.0 * s2[pt] * z1 * a2;
                zb[r + pt] = s1[pt] * a2;
            }
        }
    }
}
