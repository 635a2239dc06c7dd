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
use robustlp::dataset::{load_csv, load_idx, save_csv};
use robustlp::model_io::{model_from_json, model_to_json};
use robustlp::network::{argmax, second_argmax};
use robustlp::synth::{random_conv_net, random_dense_net, random_pool_net};
use robustlp::*;

/// Direct cross-correlation with zero padding, CHW layout.
#[allow(clippy::too_many_arguments)]
fn conv_reference(
    x: &[f64],
    (c, h, w): (usize, usize, usize),
    oc: usize,
    (kh, kw): (usize, usize),
    stride: usize,
    pad: usize,
    kernel: &[f64],
    bias: &[f64],
) -> Vec<f64> {
    let ph = h + 2 * pad;
    let pw = w + 2 * pad;
    let mut padded = vec![0.0; c * ph * pw];
    for ci in 0..c {
        for y in 0..h {
            for xx in 0..w {
                padded[(ci * ph + y + pad) * pw + xx + pad] = x[(ci * h + y) * w + xx];
            }
        }
    }
    let oh = (ph - kh) / stride + 1;
    let ow = (pw - kw) / stride + 1;
    let mut out = Vec::new();
    for o in 0..oc {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut s = bias[o];
                for ci in 0..c {
                    for ky in 0..kh {
                        for kx in 0..kw {
                            s += kernel[((o * c + ci) * kh + ky) * kw + kx]
                                * padded[(ci * ph + oy * stride + ky) * pw + ox * stride + kx];
                        }
                    }
                }
                out.push(s);
            }
        }
    }
    out
}

#[test]
fn conv_matches_reference() {
    let mut rng = common::rng(11);
    for (shape, oc, k, stride, pad) in [
        ((1, 4, 4), 2, (3, 3), 1, 0),
        ((2, 5, 4), 3, (2, 3), 2, 1),
        ((1, 3, 3), 1, (3, 3), 1, 1),
        ((3, 6, 6), 2, (2, 2), 2, 0),
    ] {
        let kernel = common::random_point(&mut rng, oc * shape.0 * k.0 * k.1, 1.0);
        let bias = common::random_point(&mut rng, oc, 1.0);
        let conv = Conv::new(
            Shape3::new(shape.0, shape.1, shape.2),
            oc,
            k,
            stride,
            pad,
            kernel.clone(),
            bias.clone(),
        )
        .unwrap();
        let x = common::random_point(&mut rng, shape.0 * shape.1 * shape.2, 2.0);
        let expected = conv_reference(&x, shape, oc, k, stride, pad, &kernel, &bias);
        let got = conv.apply(&x);
        assert_eq!(got.len(), expected.len());
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn maxpool_matches_reference() {
    let pool = MaxPool::new(Shape3::new(2, 4, 4), (2, 2), 2).unwrap();
    let x: Vec<f64> = (0..32).map(|i| ((i * 7) % 11) as f64).collect();
    let out = pool.apply(&x);
    let mut expected = Vec::new();
    for c in 0..2 {
        for oy in 0..2 {
            for ox in 0..2 {
                let mut m = f64::NEG_INFINITY;
                for dy in 0..2 {
                    for dx in 0..2 {
                        m = m.max(x[(c * 4 + 2 * oy + dy) * 4 + 2 * ox + dx]);
                    }
                }
                expected.push(m);
            }
        }
    }
    assert_eq!(out, expected);
}

#[test]
fn hand_forward() {
    // relu([x0 - x1, x0 + x1 - 1]) then [[1, 1], [0, 2]] + [0, 1]
    let d1 = Dense::new(vec![vec![1.0, -1.0], vec![1.0, 1.0]], vec![0.0, -1.0]).unwrap();
    let d2 = Dense::new(vec![vec![1.0, 1.0], vec![0.0, 2.0]], vec![0.0, 1.0]).unwrap();
    let net = Network::new(
        2,
        2,
        None,
        vec![Layer::Dense(d1), Layer::Relu, Layer::Dense(d2)],
    )
    .unwrap();
    assert_eq!(net.forward(&[2.0, 1.0]).unwrap(), vec![3.0, 5.0]);
    assert_eq!(net.forward(&[0.0, 0.0]).unwrap(), vec![0.0, 1.0]);
    assert_eq!(net.classify(&[2.0, 1.0]).unwrap(), 1);
}

#[test]
fn worked_example_labels() {
    let net = common::worked_example();
    assert_eq!(net.classify(&[0.0]).unwrap(), 0);
    assert_eq!(net.second_label(&[0.0]).unwrap(), 1);
    // Scores at -1 are (-1.132, -1, -1.099): label 1.
    assert_eq!(net.classify(&[-1.0]).unwrap(), 1);
    assert_eq!(net.classify(&[-1.2]).unwrap(), 2);
}

#[test]
fn tie_rules() {
    assert_eq!(argmax(&[5.0, 5.0, 1.0]), 0);
    assert_eq!(second_argmax(&[5.0, 5.0, 1.0]), 1);
    assert_eq!(second_argmax(&[1.0, 3.0, 3.0]), 2);
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    let pts = vec![
        LabeledPoint::new(vec![0.1, -2.5], 1),
        LabeledPoint::new(vec![1e-17, 3.0], 0),
    ];
    save_csv(&pts, &path).unwrap();
    let spec = DatasetSpec {
        input_dim: 2,
        num_labels: 2,
        domain: None,
    };
    assert_eq!(load_csv(&path, spec).unwrap(), pts);
}

fn idx_files(
    dir: &std::path::Path,
    images: &[[u8; 4]],
    labels: &[u8],
) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut ib = vec![0, 0, 8, 3];
    for v in [images.len() as u32, 2, 2] {
        ib.extend(v.to_be_bytes());
    }
    for im in images {
        ib.extend(im);
    }
    let mut lb = vec![0, 0, 8, 1];
    lb.extend((labels.len() as u32).to_be_bytes());
    lb.extend(labels);
    let (ip, lp) = (dir.join("img.idx"), dir.join("lbl.idx"));
    std::fs::write(&ip, ib).unwrap();
    std::fs::write(&lp, lb).unwrap();
    (ip, lp)
}

#[test]
fn idx_scaling_and_raw() {
    let dir = tempfile::tempdir().unwrap();
    let (ip, lp) = idx_files(dir.path(), &[[0, 255, 51, 102], [1, 2, 3, 4]], &[3, 9]);
    let spec = DatasetSpec {
        input_dim: 4,
        num_labels: 10,
        domain: None,
    };
    let raw = load_idx(&ip, &lp, spec).unwrap();
    assert_eq!(raw[0].x, vec![0.0, 255.0, 51.0, 102.0]);
    assert_eq!(raw[1].label, 9);
    let unit = load_idx(
        &ip,
        &lp,
        DatasetSpec {
            domain: Some(Domain::new(0.0, 1.0).unwrap()),
            ..spec
        },
    )
    .unwrap();
    assert_eq!(unit[0].x, vec![0.0, 1.0, 0.2, 0.4]);
}

#[test]
fn idx_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let spec = DatasetSpec {
        input_dim: 4,
        num_labels: 10,
        domain: None,
    };
    let (ip, lp) = idx_files(dir.path(), &[[0; 4]], &[3, 4]);
    assert!(load_idx(&ip, &lp, spec).is_err(), "count mismatch");
    let (ip, lp) = idx_files(dir.path(), &[[0; 4]], &[12]);
    assert!(load_idx(&ip, &lp, spec).is_err(), "label out of range");
    let (ip, lp) = idx_files(dir.path(), &[[0; 4]], &[1]);
    assert!(load_idx(&lp, &ip, spec).is_err(), "swapped magics");
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let mut rng = common::rng(5);
    let net = random_pool_net(&mut rng, 3, 4, 3).unwrap();
    save_model(&net, &path).unwrap();
    assert_eq!(load_model(&path).unwrap(), net);
    assert!(load_model(dir.path().join("missing.json")).is_err());
}

proptest! {
    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>(), family in 0usize..3) {
        let mut rng = common::rng(seed);
        let net = match family {
            0 => random_dense_net(&mut rng, 3, &[5, 4], 3).unwrap(),
            1 => random_pool_net(&mut rng, 2, 6, 2).unwrap(),
            _ => random_conv_net(&mut rng, 3, 2, 2).unwrap(),
        };
        let back = model_from_json(&model_to_json(&net)).unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn forward_is_shift_invariant_in_output_bias(seed in any::<u64>(), shift in -5.0f64..5.0) {
        // Adding the same constant to every output bias never changes the label.
        let mut rng = common::rng(seed);
        let net = random_dense_net(&mut rng, 2, &[4], 3).unwrap();
        let mut layers = net.layers().to_vec();
        let Layer::Dense(last) = layers.pop().unwrap() else { unreachable!() };
        let bias: Vec<f64> = last.bias().iter().map(|b| b + shift).collect();
        layers.push(Layer::Dense(Dense::from_row_major(last.out_dim(), last.in_dim(), last.weights().to_vec(), bias).unwrap()));
        let shifted = Network::new(2, 3, None, layers).unwrap();
        let x = common::random_point(&mut rng, 2, 3.0);
        let (a, b) = (net.forward(&x).unwrap(), shifted.forward(&x).unwrap());
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((v - u - shift).abs() < 1e-9);
        }
        prop_assert_eq!(argmax(&a), argmax(&b));
    }
}
