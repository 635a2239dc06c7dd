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

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robustlp::synth::{random_conv_net, random_dense_net, random_pool_net};
use robustlp::{Dense, Layer, Network};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// w = [5/4, 1, 0], b = [ln 9/8, 0, ln 1/3].
pub fn worked_example() -> Network {
    let d = Dense::new(
        vec![vec![1.25], vec![1.0], vec![0.0]],
        vec![(9.0f64 / 8.0).ln(), 0.0, (1.0f64 / 3.0).ln()],
    )
    .unwrap();
    Network::new(1, 3, None, vec![Layer::Dense(d)]).unwrap()
}

/// A random network with at most `max_sites` ReLU/pool sites, input
/// dimension 1..=3 and 2..=3 labels; the architecture family cycles with
/// `k`.
pub fn tiny_net(rng: &mut ChaCha8Rng, k: usize, max_sites: usize) -> Network {
    let n = rng.random_range(1..=3);
    let labels = rng.random_range(2..=3);
    match k % 4 {
        0 => {
            let h = rng.random_range(1..=max_sites.min(6));
            random_dense_net(rng, n, &[h], labels).unwrap()
        }
        1 => {
            let a = rng.random_range(1..=(max_sites / 2).clamp(1, 4));
            let b = rng.random_range(1..=(max_sites - a).clamp(1, 4));
            random_dense_net(rng, n, &[a, b], labels).unwrap()
        }
        2 => {
            // hidden units plus hidden/2 pooling windows
            let h = 2 * rng.random_range(1..=(max_sites / 3).clamp(1, 2));
            random_pool_net(rng, n, h, labels).unwrap()
        }
        _ => {
            let c = rng.random_range(1..=(max_sites / 2).clamp(1, 3));
            random_conv_net(rng, n, c, labels).unwrap()
        }
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
