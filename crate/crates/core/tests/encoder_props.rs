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

mod common;

use proptest::prelude::*;
use rand::Rng;
use robustlp::encoder::{build_disjunctive, pattern_of, SiteKind};
use robustlp::network::argmax;
use robustlp::*;

fn conv_pool_net(rng: &mut rand_chacha::ChaCha8Rng) -> Network {
    let shape = Shape3::new(1, 8, 8);
    let kernel = common::random_point(rng, 2 * 9, 1.0);
    let conv = Conv::new(shape, 2, (3, 3), 1, 1, kernel, vec![0.1, -0.1]).unwrap();
    let pool = MaxPool::new(conv.output_shape(), (2, 2), 2).unwrap();
    let flat = pool.output_shape().len();
    let dense = Dense::from_row_major(
        10,
        flat,
        common::random_point(rng, 10 * flat, 0.5),
        vec![0.0; 10],
    )
    .unwrap();
    Network::new(
        64,
        10,
        None,
        vec![
            Layer::Conv(conv),
            Layer::Relu,
            Layer::MaxPool(pool),
            Layer::Dense(dense),
        ],
    )
    .unwrap()
}

#[test]
fn conv_pool_region_matches_forward() {
    let mut rng = common::rng(3);
    let net = conv_pool_net(&mut rng);
    for _ in 0..5 {
        let seed = common::random_point(&mut rng, 64, 1.0);
        let region = extract_region(&net, &seed).unwrap();
        assert!(region.contains(&seed, 1e-9));
        let logits = net.forward(&seed).unwrap();
        for (a, b) in region.logits.eval(&seed).iter().zip(&logits) {
            assert!((a - b).abs() < 1e-9);
        }
        // 128 ReLU units and 32 windows with 3 rivals each.
        assert_eq!(region.constraints.len(), 128 + 32 * 3);
    }
}

#[test]
fn pattern_count_formula() {
    let mut rng = common::rng(8);
    for k in 0..40 {
        let net = common::tiny_net(&mut rng, k, 8);
        let enc = build_disjunctive(&net).unwrap();
        let mut expected = 1u128;
        for s in enc.sites() {
            expected *= match s.kind {
                SiteKind::Relu => 2,
                SiteKind::Pool { window_len } => window_len as u128,
            };
        }
        assert_eq!(enc.pattern_count(), expected);
        assert_eq!(enc.patterns().count() as u128, expected);
        assert_eq!(enc.sites().len(), net.num_sites());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn seed_lies_in_its_region(seed in any::<u64>(), k in 0usize..4) {
        let mut rng = common::rng(seed);
        let net = common::tiny_net(&mut rng, k, 8);
        let x = common::random_point(&mut rng, net.input_dim(), 3.0);
        let region = extract_region(&net, &x).unwrap();
        for c in &region.constraints {
            prop_assert!(c.slack(&x) >= -1e-9);
        }
    }

    #[test]
    fn region_logits_are_exact_inside_region(seed in any::<u64>(), k in 0usize..4) {
        let mut rng = common::rng(seed);
        let net = common::tiny_net(&mut rng, k, 8);
        let x = common::random_point(&mut rng, net.input_dim(), 3.0);
        let region = extract_region(&net, &x).unwrap();
        for _ in 0..50 {
            let r: f64 = rng.random_range(1e-3..1.0);
            let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(-r..r)).collect();
            if !region.contains(&y, 0.0) {
                continue;
            }
            let exact = net.forward(&y).unwrap();
            for (a, b) in region.logits.eval(&y).iter().zip(&exact) {
                prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
        for (a, b) in region.logits.eval(&x).iter().zip(&net.forward(&x).unwrap()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn output_constraints_characterize_label(seed in any::<u64>(), k in 0usize..4) {
        let mut rng = common::rng(seed);
        let net = common::tiny_net(&mut rng, k, 8);
        let x = common::random_point(&mut rng, net.input_dim(), 3.0);
        let region = extract_region(&net, &x).unwrap();
        let logits = net.forward(&x).unwrap();
        let label = argmax(&logits);
        for l in 0..net.num_labels() {
            let holds = region.output_constraints(l, 0.0).unwrap().iter().all(|c| c.holds(&x, 1e-12));
            let tied = logits.iter().all(|&v| logits[l] >= v - 1e-12);
            prop_assert_eq!(holds, l == label || tied);
        }
    }

    #[test]
    fn margin_constraints_force_target(seed in any::<u64>(), margin in 0.01f64..3.0) {
        let mut rng = common::rng(seed);
        let net = common::tiny_net(&mut rng, 0, 8);
        let x = common::random_point(&mut rng, net.input_dim(), 3.0);
        let region = extract_region(&net, &x).unwrap();
        for l in 0..net.num_labels() {
            let cs = region.output_constraints(l, margin).unwrap();
            prop_assert_eq!(cs.len(), net.num_labels() - 1);
            for _ in 0..20 {
                let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(-2.0..2.0)).collect();
                if region.contains(&y, 0.0) && cs.iter().all(|c| c.holds(&y, 0.0)) {
                    prop_assert_eq!(net.classify(&y).unwrap(), l);
                }
            }
        }
    }

    #[test]
    fn seed_pattern_reproduces_region(seed in any::<u64>(), k in 0usize..4) {
        let mut rng = common::rng(seed);
        let net = common::tiny_net(&mut rng, k, 8);
        let x = common::random_point(&mut rng, net.input_dim(), 3.0);
        let region = extract_region(&net, &x).unwrap();
        prop_assert_eq!(&pattern_of(&net, &x).unwrap(), &region.pattern);
        let inst = build_disjunctive(&net).unwrap().instantiate(&region.pattern).unwrap();
        prop_assert_eq!(&inst.constraints, &region.constraints);
        prop_assert_eq!(&inst.logits, &region.logits);
    }
}
