//   Copyright 2026 robustlp developers
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

//! Piecewise-linear feedforward networks and their exact forward evaluation.
//!
//! A [`Network`] is an ordered list of [`Layer`]s mapping an `input_dim`-vector
//! to `num_labels` logits. Convolution and max-pooling layers act on
//! channel-major (`C x H x W`) flattened vectors.

use crate::error::{Error, Result};

/// Closed interval that every input coordinate is expected to lie in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite("input domain"));
        }
        if lo > hi {
            return Err(Error::InvalidModel(format!(
                "input domain [{lo}, {hi}] is empty"
            )));
        }
        Ok(Domain { lo, hi })
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

/// Channel-major image shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape3 {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape3 {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Shape3 {
            channels,
            height,
            width,
        }
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.height + y) * self.width + x
    }
}

/// Fully-connected layer `W x + b` with `W` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    out_dim: usize,
    in_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    /// Builds a layer from its weight rows; every row must have the same length.
    pub fn new(rows: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let out_dim = rows.len();
        let in_dim = rows.first().map_or(0, Vec::len);
        if let Some((j, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != in_dim) {
            return Err(Error::InvalidModel(format!(
                "weight row {j} has length {}, expected {in_dim}",
                row.len()
            )));
        }
        Self::from_row_major(out_dim, in_dim, rows.into_iter().flatten().collect(), bias)
    }

    pub fn from_row_major(
        out_dim: usize,
        in_dim: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if out_dim == 0 || in_dim == 0 {
            return Err(Error::InvalidModel("dense layer with zero size".into()));
        }
        if weights.len() != out_dim * in_dim {
            return Err(Error::InvalidModel(format!(
                "dense weights have {} entries, expected {out_dim}x{in_dim}",
                weights.len()
            )));
        }
        if bias.len() != out_dim {
            return Err(Error::InvalidModel(format!(
                "dense bias has length {}, expected {out_dim}",
                bias.len()
            )));
        }
        if !weights.iter().chain(&bias).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dense weights"));
        }
        Ok(Dense {
            out_dim,
            in_dim,
            weights,
            bias,
        })
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.in_dim..(j + 1) * self.in_dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub(crate) fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.out_dim)
            .map(|j| dot(self.row(j), x) + self.bias[j])
            .collect()
    }
}

/// 2-D convolution with zero padding. The kernel is indexed
/// `[out_channel][in_channel][ky][kx]` and flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv {
    input_shape: Shape3,
    out_channels: usize,
    kernel_size: (usize, usize),
    stride: usize,
    padding: usize,
    kernel: Vec<f64>,
    bias: Vec<f64>,
}

impl Conv {
    pub fn new(
        input_shape: Shape3,
        out_channels: usize,
        kernel_size: (usize, usize),
        stride: usize,
        padding: usize,
        kernel: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        let (kh, kw) = kernel_size;
        if input_shape.is_empty() || out_channels == 0 || kh == 0 || kw == 0 {
            return Err(Error::InvalidModel("conv layer with zero size".into()));
        }
        if stride == 0 {
            return Err(Error::InvalidModel("conv stride must be positive".into()));
        }
        if input_shape.height + 2 * padding < kh || input_shape.width + 2 * padding < kw {
            return Err(Error::InvalidModel(
                "conv kernel larger than padded input".into(),
            ));
        }
        let expected = out_channels * input_shape.channels * kh * kw;
        if kernel.len() != expected {
            return Err(Error::InvalidModel(format!(
                "conv kernel has {} entries, expected {expected}",
                kernel.len()
            )));
        }
        if bias.len() != out_channels {
            return Err(Error::InvalidModel(format!(
                "conv bias has length {}, expected {out_channels}",
                bias.len()
            )));
        }
        if !kernel.iter().chain(&bias).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("conv weights"));
        }
        Ok(Conv {
            input_shape,
            out_channels,
            kernel_size,
            stride,
            padding,
            kernel,
            bias,
        })
    }

    pub fn input_shape(&self) -> Shape3 {
        self.input_shape
    }

    pub fn output_shape(&self) -> Shape3 {
        let (kh, kw) = self.kernel_size;
        Shape3 {
            channels: self.out_channels,
            height: (self.input_shape.height + 2 * self.padding - kh) / self.stride + 1,
            width: (self.input_shape.width + 2 * self.padding - kw) / self.stride + 1,
        }
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn kernel_size(&self) -> (usize, usize) {
        self.kernel_size
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Nonzero-structure of output unit `j` as `(input index, weight)` pairs,
    /// i.e. row `j` of the equivalent sparse affine map. Padding taps are omitted.
    pub fn row_taps(&self, j: usize) -> Vec<(usize, f64)> {
        let out = self.output_shape();
        let oc = j / (out.height * out.width);
        let oy = (j / out.width) % out.height;
        let ox = j % out.width;
        let (kh, kw) = self.kernel_size;
        let inp = self.input_shape;
        let mut taps = Vec::with_capacity(inp.channels * kh * kw);
        for ic in 0..inp.channels {
            for ky in 0..kh {
                let y = (oy * self.stride + ky) as isize - self.padding as isize;
                if y < 0 || y >= inp.height as isize {
                    continue;
                }
                for kx in 0..kw {
                    let x = (ox * self.stride + kx) as isize - self.padding as isize;
                    if x < 0 || x >= inp.width as isize {
                        continue;
                    }
                    let w = self.kernel[((oc * inp.channels + ic) * kh + ky) * kw + kx];
                    taps.push((inp.index(ic, y as usize, x as usize), w));
                }
            }
        }
        taps
    }

    pub fn row_bias(&self, j: usize) -> f64 {
        let out = self.output_shape();
        self.bias[j / (out.height * out.width)]
    }

    /// The equivalent dense layer. Intended for tests and small inputs.
    pub fn to_dense(&self) -> Dense {
        let in_dim = self.input_shape.len();
        let out_dim = self.output_shape().len();
        let mut weights = vec![0.0; out_dim * in_dim];
        let mut bias = Vec::with_capacity(out_dim);
        for j in 0..out_dim {
            for (m, w) in self.row_taps(j) {
                weights[j * in_dim + m] += w;
            }
            bias.push(self.row_bias(j));
        }
        Dense {
            out_dim,
            in_dim,
            weights,
            bias,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let out_dim = self.output_shape().len();
        (0..out_dim)
            .map(|j| {
                self.row_taps(j)
                    .into_iter()
                    .map(|(m, w)| w * x[m])
                    .sum::<f64>()
                    + self.row_bias(j)
            })
            .collect()
    }
}

/// Max pooling over (possibly overlapping) rectangular windows, per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPool {
    input_shape: Shape3,
    window: (usize, usize),
    stride: usize,
}

impl MaxPool {
    pub fn new(input_shape: Shape3, window: (usize, usize), stride: usize) -> Result<Self> {
        let (wh, ww) = window;
        if input_shape.is_empty() || wh == 0 || ww == 0 || stride == 0 {
            return Err(Error::InvalidModel(
                "maxpool with zero size or stride".into(),
            ));
        }
        if input_shape.height < wh || input_shape.width < ww {
            return Err(Error::InvalidModel("pool window larger than input".into()));
        }
        Ok(MaxPool {
            input_shape,
            window,
            stride,
        })
    }

    pub fn input_shape(&self) -> Shape3 {
        self.input_shape
    }

    pub fn window(&self) -> (usize, usize) {
        self.window
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn output_shape(&self) -> Shape3 {
        let (wh, ww) = self.window;
        Shape3 {
            channels: self.input_shape.channels,
            height: (self.input_shape.height - wh) / self.stride + 1,
            width: (self.input_shape.width - ww) / self.stride + 1,
        }
    }

    pub fn window_len(&self) -> usize {
        self.window.0 * self.window.1
    }

    /// Input indices of the window feeding output unit `j`, in row-major
    /// window order. Position `k` in this list is the pool selection index `k`.
    pub fn window_members(&self, j: usize) -> Vec<usize> {
        let out = self.output_shape();
        let c = j / (out.height * out.width);
        let oy = (j / out.width) % out.height;
        let ox = j % out.width;
        let (wh, ww) = self.window;
        let mut members = Vec::with_capacity(wh * ww);
        for dy in 0..wh {
            for dx in 0..ww {
                members.push(self.input_shape.index(
                    c,
                    oy * self.stride + dy,
                    ox * self.stride + dx,
                ));
            }
        }
        members
    }

    /// Position (within its window) of the maximizing member; lowest position on ties.
    pub fn select(&self, j: usize, x: &[f64]) -> usize {
        let members = self.window_members(j);
        argmax(&members.iter().map(|&m| x[m]).collect::<Vec<_>>())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.output_shape().len())
            .map(|j| {
                self.window_members(j)
                    .into_iter()
                    .map(|m| x[m])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(Dense),
    Conv(Conv),
    Relu,
    MaxPool(MaxPool),
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::Conv(_) => "conv",
            Layer::Relu => "relu",
            Layer::MaxPool(_) => "maxpool",
        }
    }

    /// Output dimension given the incoming dimension, or `None` when the
    /// layer cannot accept an input of that size.
    pub fn output_dim(&self, in_dim: usize) -> Option<usize> {
        match self {
            Layer::Dense(d) => (d.in_dim == in_dim).then_some(d.out_dim),
            Layer::Conv(c) => (c.input_shape.len() == in_dim).then(|| c.output_shape().len()),
            Layer::Relu => Some(in_dim),
            Layer::MaxPool(p) => (p.input_shape.len() == in_dim).then(|| p.output_shape().len()),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Layer::Dense(d) => d.apply(x),
            Layer::Conv(c) => c.apply(x),
            Layer::Relu => x.iter().map(|&v| v.max(0.0)).collect(),
            Layer::MaxPool(p) => p.apply(x),
        }
    }
}

/// A classifier `f(x) = argmax_l [f_k(...f_1(x))]_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    num_labels: usize,
    input_domain: Option<Domain>,
    layers: Vec<Layer>,
}

impl Network {
    pub fn new(
        input_dim: usize,
        num_labels: usize,
        input_domain: Option<Domain>,
        layers: Vec<Layer>,
    ) -> Result<Self> {
        if input_dim == 0 || num_labels == 0 {
            return Err(Error::InvalidModel(
                "input_dim and num_labels must be positive".into(),
            ));
        }
        if layers.is_empty() {
            return Err(Error::InvalidModel("network has no layers".into()));
        }
        let mut dim = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            dim = layer.output_dim(dim).ok_or_else(|| Error::InvalidLayer {
                layer: i,
                reason: format!(
                    "{} layer cannot take an input of dimension {dim}",
                    layer.kind()
                ),
            })?;
        }
        if dim != num_labels {
            return Err(Error::InvalidModel(format!(
                "final layer produces {dim} outputs but num_labels is {num_labels}"
            )));
        }
        Ok(Network {
            input_dim,
            num_labels,
            input_domain,
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn input_domain(&self) -> Option<Domain> {
        self.input_domain
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn with_input_domain(mut self, domain: Option<Domain>) -> Self {
        self.input_domain = domain;
        self
    }

    /// Number of ReLU units plus pooling windows, i.e. the disjunctions in the
    /// exact encoding of the network.
    pub fn num_sites(&self) -> usize {
        let mut dim = self.input_dim;
        let mut sites = 0;
        for layer in &self.layers {
            let out = layer.output_dim(dim).expect("validated at construction");
            match layer {
                Layer::Relu => sites += dim,
                Layer::MaxPool(_) => sites += out,
                _ => {}
            }
            dim = out;
        }
        sites
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::expect_dim(self.input_dim, x.len())?;
        Ok(self
            .layers
            .iter()
            .fold(x.to_vec(), |acc, layer| layer.apply(&acc)))
    }

    /// Inputs to every layer followed by the logits: `trace[i]` feeds layer `i`
    /// and `trace[layers.len()]` is the output.
    pub fn forward_trace(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        Error::expect_dim(self.input_dim, x.len())?;
        let mut trace = Vec::with_capacity(self.layers.len() + 1);
        trace.push(x.to_vec());
        for layer in &self.layers {
            let next = layer.apply(trace.last().expect("non-empty"));
            trace.push(next);
        }
        Ok(trace)
    }

    pub fn classify(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(x)?))
    }

    pub fn second_label(&self, x: &[f64]) -> Result<usize> {
        if self.num_labels < 2 {
            return Err(Error::InvalidArgument(
                "second label requires at least two labels".into(),
            ));
        }
        Ok(second_argmax(&self.forward(x)?))
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the second-largest value under the same lowest-index tie rule,
/// so `[5, 5, 1]` ranks label 0 first and label 1 second.
pub fn second_argmax(values: &[f64]) -> usize {
    let first = argmax(values);
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if i == first {
            continue;
        }
        match best {
            Some(b) if v <= values[b] => {}
            _ => best = Some(i),
        }
    }
    best.expect("at least two values")
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
