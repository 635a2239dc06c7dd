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

//! Fixed workloads shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robustlp::synth::random_dense_net;
use robustlp::{Conv, Dense, Layer, MaxPool, Network, Shape3};

/// A seeded dense ReLU network and a seed point for it.
pub fn dense_workload(
    input_dim: usize,
    hidden: &[usize],
    num_labels: usize,
    seed: u64,
) -> (Network, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = random_dense_net(&mut rng, input_dim, hidden, num_labels).expect("valid sizes");
    let x = (0..input_dim)
        .map(|i| ((i * 37 % 17) as f64 / 17.0) - 0.5)
        .collect();
    (net, x)
}

/// A small LeNet-style network on 1x12x12 inputs with deterministic weights.
pub fn conv_workload() -> (Network, Vec<f64>) {
    let wave = |k: usize, scale: f64| (k as f64 * 0.7).sin() * scale;
    let shape = Shape3::new(1, 12, 12);
    let kernel = (0..4 * 9).map(|k| wave(k, 0.5)).collect();
    let conv =
        Conv::new(shape, 4, (3, 3), 1, 1, kernel, vec![0.05, -0.05, 0.1, 0.0]).expect("conv");
    let pool = MaxPool::new(conv.output_shape(), (2, 2), 2).expect("pool");
    let flat = pool.output_shape().len();
    let weights = (0..10 * flat).map(|k| wave(k + 3, 0.1)).collect();
    let dense = Dense::from_row_major(10, flat, weights, vec![0.0; 10]).expect("dense");
    let net = Network::new(
        144,
        10,
        None,
        vec![
            Layer::Conv(conv),
            Layer::Relu,
            Layer::MaxPool(pool),
            Layer::Dense(dense),
        ],
    )
    .expect("consistent layers");
    let x = (0..144).map(|k| wave(k, 1.0)).collect();
    (net, x)
}
