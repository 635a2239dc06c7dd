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

//! Random networks and synthetic datasets for tests, benchmarks and the toy
//! task.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::LabeledPoint;
use crate::error::{Error, Result};
use crate::network::{Conv, Dense, Layer, MaxPool, Network, Shape3};

fn random_dense<R: Rng>(rng: &mut R, out_dim: usize, in_dim: usize) -> Result<Dense> {
    let weights = (0..out_dim * in_dim)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let bias = (0..out_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    Dense::from_row_major(out_dim, in_dim, weights, bias)
}

/// Fully connected ReLU network with weights and biases uniform in [-1, 1].
pub fn random_dense_net<R: Rng>(
    rng: &mut R,
    input_dim: usize,
    hidden: &[usize],
    num_labels: usize,
) -> Result<Network> {
    let mut layers = Vec::new();
    let mut fan_in = input_dim;
    for &width in hidden {
        layers.push(Layer::Dense(random_dense(rng, width, fan_in)?));
        layers.push(Layer::Relu);
        fan_in = width;
    }
    layers.push(Layer::Dense(random_dense(rng, num_labels, fan_in)?));
    Network::new(input_dim, num_labels, None, layers)
}

/// Dense, ReLU, then max pooling over adjacent pairs of hidden units.
pub fn random_pool_net<R: Rng>(
    rng: &mut R,
    input_dim: usize,
    hidden: usize,
    num_labels: usize,
) -> Result<Network> {
    if hidden < 2 || hidden % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "pooled width must be even and >= 2, got {hidden}"
        )));
    }
    let pool = MaxPool::new(Shape3::new(1, 1, hidden), (1, 2), 2)?;
    let layers = vec![
        Layer::Dense(random_dense(rng, hidden, input_dim)?),
        Layer::Relu,
        Layer::MaxPool(pool),
        Layer::Dense(random_dense(rng, num_labels, hidden / 2)?),
    ];
    Network::new(input_dim, num_labels, None, layers)
}

/// A one-row convolution over the input treated as a `1 x 1 x n` image,
/// followed by ReLU and a dense output layer.
pub fn random_conv_net<R: Rng>(
    rng: &mut R,
    input_dim: usize,
    channels: usize,
    num_labels: usize,
) -> Result<Network> {
    let kw = input_dim.min(2);
    let shape = Shape3::new(1, 1, input_dim);
    let kernel = (0..channels * kw)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let bias = (0..channels).map(|_| rng.random_range(-1.0..1.0)).collect();
    let conv = Conv::new(shape, channels, (1, kw), 1, 0, kernel, bias)?;
    let width = conv.output_shape().len();
    let layers = vec![
        Layer::Conv(conv),
        Layer::Relu,
        Layer::Dense(random_dense(rng, num_labels, width)?),
    ];
    Network::new(input_dim, num_labels, None, layers)
}

/// `per_class` isotropic Gaussian samples around each center; the label is
/// the center's index.
pub fn gaussian_blobs<R: Rng>(
    rng: &mut R,
    centers: &[Vec<f64>],
    std_dev: f64,
    per_class: usize,
) -> Result<Vec<LabeledPoint>> {
    let normal = Normal::new(0.0, std_dev).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut out = Vec::with_capacity(centers.len() * per_class);
    for (label, c) in centers.iter().enumerate() {
        for _ in 0..per_class {
            let x = c.iter().map(|m| m + normal.sample(rng)).collect();
            out.push(LabeledPoint::new(x, label));
        }
    }
    Ok(out)
}

/// The two-class, two-dimensional task used for fine-tuning experiments.
#[derive(Debug, Clone)]
pub struct ToyTask {
    pub train: Vec<LabeledPoint>,
    pub test: Vec<LabeledPoint>,
}

pub const TOY_CENTERS: [[f64; 2]; 2] = [[-1.0, 0.0], [1.0, 0.0]];
pub const TOY_STD: f64 = 0.5;
pub const TOY_TRAIN_PER_CLASS: usize = 100;
pub const TOY_TEST_PER_CLASS: usize = 100;

pub fn toy_task(seed: u64) -> Result<ToyTask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = TOY_CENTERS.iter().map(|c| c.to_vec()).collect();
    let train = gaussian_blobs(&mut rng, &centers, TOY_STD, TOY_TRAIN_PER_CLASS)?;
    let test = gaussian_blobs(&mut rng, &centers, TOY_STD, TOY_TEST_PER_CLASS)?;
    Ok(ToyTask { train, test })
}
