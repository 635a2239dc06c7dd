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

//! Dense-network training, the signed-gradient attack, and adversarial
//! fine-tuning.
//!
//! The trainer minimizes softmax cross-entropy with plain minibatch SGD and
//! only supports networks built from [`Dense`] and [`Layer::Relu`] layers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledPoint;
use crate::error::{Error, Result};
use crate::network::{Dense, Domain, Layer, Network};
use crate::robustness::{extract_adversarial, pointwise_robustness, CertifyOptions, TargetPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Fine-tuning continues at `learning_rate * finetune_lr_scale`.
    pub finetune_lr_scale: f64,
    pub rounds: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 100,
            batch_size: 16,
            seed: 0,
            finetune_lr_scale: 0.1,
            rounds: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if !(self.finetune_lr_scale >= 0.0 && self.finetune_lr_scale.is_finite()) {
            return Err(Error::InvalidArgument(
                "fine-tuning scale must be finite and >= 0".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument(
                "batch size must be at least 1".into(),
            ));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidArgument(
                "at least one round is required".into(),
            ));
        }
        Ok(())
    }
}

/// Partials of one layer's parameters, laid out like the layer itself.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Loss and its gradient at one labeled input. `layers[i]` is `None` for
/// parameterless layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub loss: f64,
    pub layers: Vec<Option<DenseGradient>>,
    pub input: Vec<f64>,
}

fn check_trainable(net: &Network) -> Result<()> {
    for (i, layer) in net.layers().iter().enumerate() {
        if !matches!(layer, Layer::Dense(_) | Layer::Relu) {
            return Err(Error::UnsupportedLayer {
                layer: i,
                kind: layer.kind(),
            });
        }
    }
    Ok(())
}

/// Softmax cross-entropy `log sum exp(z) - z[label]` and its gradient in `z`.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = m + sum.ln() - logits[label];
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[label] -= 1.0;
    (loss, grad)
}

/// Backpropagation through a Dense/ReLU network. The ReLU derivative at zero
/// is taken as zero.
pub fn loss_and_gradient(net: &Network, x: &[f64], label: usize) -> Result<Gradient> {
    check_trainable(net)?;
    if label >= net.num_labels() {
        return Err(Error::LabelOutOfRange {
            label,
            num_labels: net.num_labels(),
        });
    }
    let trace = net.forward_trace(x)?;
    let (loss, mut g) = softmax_cross_entropy(trace.last().expect("logits"), label);
    let mut layers = vec![None; net.layers().len()];
    for (i, layer) in net.layers().iter().enumerate().rev() {
        let input = &trace[i];
        match layer {
            Layer::Dense(d) => {
                let mut weights = vec![0.0; d.weights().len()];
                let mut back = vec![0.0; d.in_dim()];
                for (j, &gj) in g.iter().enumerate() {
                    let row = d.row(j);
                    let wrow = &mut weights[j * d.in_dim()..(j + 1) * d.in_dim()];
                    for k in 0..d.in_dim() {
                        wrow[k] = gj * input[k];
                        back[k] += row[k] * gj;
                    }
                }
                layers[i] = Some(DenseGradient { weights, bias: g });
                g = back;
            }
            Layer::Relu => {
                for (gk, &v) in g.iter_mut().zip(input) {
                    if v <= 0.0 {
                        *gk = 0.0;
                    }
                }
            }
            _ => unreachable!("checked above"),
        }
    }
    Ok(Gradient {
        loss,
        layers,
        input: g,
    })
}

fn sgd_epochs(
    net: &mut Network,
    data: &[LabeledPoint],
    lr: f64,
    epochs: usize,
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..epochs {
        order.shuffle(rng);
        for batch in order.chunks(batch_size) {
            let mut acc: Option<Vec<Option<DenseGradient>>> = None;
            for &i in batch {
                let g = loss_and_gradient(net, &data[i].x, data[i].label)?;
                match &mut acc {
                    None => acc = Some(g.layers),
                    Some(a) => {
                        for (al, gl) in a.iter_mut().zip(g.layers) {
                            if let (Some(al), Some(gl)) = (al.as_mut(), gl) {
                                al.weights
                                    .iter_mut()
                                    .zip(&gl.weights)
                                    .for_each(|(a, b)| *a += b);
                                al.bias.iter_mut().zip(&gl.bias).for_each(|(a, b)| *a += b);
                            }
                        }
                    }
                }
            }
            let step = lr / batch.len() as f64;
            for (layer, g) in net.layers_mut().iter_mut().zip(acc.into_iter().flatten()) {
                if let (Layer::Dense(d), Some(g)) = (layer, g) {
                    d.weights_mut()
                        .iter_mut()
                        .zip(&g.weights)
                        .for_each(|(w, gw)| *w -= step * gw);
                    d.bias_mut()
                        .iter_mut()
                        .zip(&g.bias)
                        .for_each(|(b, gb)| *b -= step * gb);
                }
            }
        }
    }
    Ok(())
}

fn check_data(net: &Network, data: &[LabeledPoint]) -> Result<()> {
    for p in data {
        Error::expect_dim(net.input_dim(), p.x.len())?;
        if p.label >= net.num_labels() {
            return Err(Error::LabelOutOfRange {
                label: p.label,
                num_labels: net.num_labels(),
            });
        }
    }
    Ok(())
}

/// Minibatch SGD on softmax cross-entropy. Deterministic given `cfg.seed`.
pub fn train(net: &Network, data: &[LabeledPoint], cfg: &TrainConfig) -> Result<Network> {
    cfg.validate()?;
    check_trainable(net)?;
    check_data(net, data)?;
    let mut out = net.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    sgd_epochs(
        &mut out,
        data,
        cfg.learning_rate,
        cfg.epochs,
        cfg.batch_size,
        &mut rng,
    )?;
    Ok(out)
}

/// Fraction of points whose predicted label matches.
pub fn accuracy(net: &Network, data: &[LabeledPoint]) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for p in data {
        if net.classify(&p.x)? == p.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// A fully connected ReLU network with He-initialized weights and zero bias.
pub fn init_mlp(
    input_dim: usize,
    hidden: &[usize],
    num_labels: usize,
    domain: Option<Domain>,
    seed: u64,
) -> Result<Network> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::new();
    let mut fan_in = input_dim;
    for (i, &width) in hidden
        .iter()
        .chain(std::iter::once(&num_labels))
        .enumerate()
    {
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let weights = (0..width * fan_in)
            .map(|_| normal.sample(&mut rng))
            .collect();
        layers.push(Layer::Dense(Dense::from_row_major(
            width,
            fan_in,
            weights,
            vec![0.0; width],
        )?));
        if i < hidden.len() {
            layers.push(Layer::Relu);
        }
        fan_in = width;
    }
    Network::new(input_dim, num_labels, domain, layers)
}

/// Signed-gradient attack: one step of size `epsilon` up the loss of the
/// predicted label, clamped to the input domain.
pub fn fgsm(net: &Network, x: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let label = net.classify(x)?;
    let g = loss_and_gradient(net, x, label)?;
    Ok(x.iter()
        .zip(&g.input)
        .map(|(&xi, &gi)| {
            let step = if gi > 0.0 {
                epsilon
            } else if gi < 0.0 {
                -epsilon
            } else {
                0.0
            };
            let v = xi + step;
            net.input_domain().map_or(v, |d| d.clamp(v))
        })
        .collect())
}

/// How adversarial examples are generated during fine-tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Attack {
    /// Linear-region search for the second most likely label, with output
    /// margin `alpha`. Examples farther than `max_distance` are discarded.
    Lp {
        alpha: f64,
        max_distance: Option<f64>,
    },
    /// Signed-gradient step; kept only if it changes the predicted label.
    Fgsm { epsilon: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub attacked: usize,
    pub generated: usize,
    pub dropped_by_rounding: usize,
    pub dropped_by_distance: usize,
    pub failures: usize,
}

enum Outcome {
    Example(LabeledPoint),
    None,
    Rounding,
    Distance,
    Failure,
}

fn attack_point(net: &Network, p: &LabeledPoint, attack: &Attack, round_integers: bool) -> Outcome {
    match *attack {
        Attack::Lp {
            alpha,
            max_distance,
        } => {
            let opts = CertifyOptions {
                target: TargetPolicy::Second,
                margin: alpha,
                ..Default::default()
            };
            let rec = match pointwise_robustness(net, &p.x, &opts) {
                Ok(r) => r,
                Err(_) => return Outcome::Failure,
            };
            if !rec.rho_hat.is_finite() {
                return Outcome::None;
            }
            if max_distance.is_some_and(|m| rec.rho_hat > m) {
                return Outcome::Distance;
            }
            match extract_adversarial(&rec, net, round_integers) {
                Ok((_, Some(false))) => Outcome::Rounding,
                Ok((x, _)) => Outcome::Example(LabeledPoint::new(x, p.label)),
                Err(_) => Outcome::Failure,
            }
        }
        Attack::Fgsm { epsilon } => {
            let x = match fgsm(net, &p.x, epsilon) {
                Ok(x) => x,
                Err(_) => return Outcome::Failure,
            };
            let x = if round_integers {
                x.iter()
                    .map(|v| net.input_domain().map_or(v.round(), |d| d.clamp(v.round())))
                    .collect()
            } else {
                x
            };
            match (net.classify(&p.x), net.classify(&x)) {
                (Ok(a), Ok(b)) if a != b => Outcome::Example(LabeledPoint::new(x, p.label)),
                (Ok(_), Ok(_)) => Outcome::None,
                _ => Outcome::Failure,
            }
        }
    }
}

/// Adversarial examples for every training point, labeled with the point's
/// own ground-truth label.
pub fn generate_adversarial(
    net: &Network,
    data: &[LabeledPoint],
    attack: &Attack,
    round_integers: bool,
    round: usize,
) -> (Vec<LabeledPoint>, RoundReport) {
    let outcomes: Vec<Outcome> = data
        .par_iter()
        .map(|p| attack_point(net, p, attack, round_integers))
        .collect();
    let mut report = RoundReport {
        round,
        attacked: data.len(),
        ..Default::default()
    };
    let mut examples = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Example(p) => examples.push(p),
            Outcome::None => {}
            Outcome::Rounding => report.dropped_by_rounding += 1,
            Outcome::Distance => report.dropped_by_distance += 1,
            Outcome::Failure => report.failures += 1,
        }
    }
    report.generated = examples.len();
    (examples, report)
}

/// Runs `cfg.rounds` rounds of: attack the current network on the original
/// training set, add the examples to the accumulated training set, and
/// continue training at the reduced rate.
pub fn finetune(
    net: &Network,
    train_data: &[LabeledPoint],
    cfg: &TrainConfig,
    attack: &Attack,
    round_integers: bool,
) -> Result<(Network, Vec<RoundReport>)> {
    cfg.validate()?;
    check_trainable(net)?;
    check_data(net, train_data)?;
    if let Attack::Lp { alpha, .. } = attack {
        if alpha.is_nan() || *alpha < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha must be >= 0, got {alpha}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = net.clone();
    let mut augmented = train_data.to_vec();
    let mut reports = Vec::with_capacity(cfg.rounds);
    for round in 1..=cfg.rounds {
        let (examples, report) =
            generate_adversarial(&current, train_data, attack, round_integers, round);
        augmented.extend(examples);
        sgd_epochs(
            &mut current,
            &augmented,
            cfg.learning_rate * cfg.finetune_lr_scale,
            cfg.epochs,
            cfg.batch_size,
            &mut rng,
        )?;
        reports.push(report);
    }
    Ok((current, reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example() -> Network {
        let d = Dense::new(
            vec![vec![1.25], vec![1.0], vec![0.0]],
            vec![(9.0f64 / 8.0).ln(), 0.0, (1.0f64 / 3.0).ln()],
        )
        .unwrap();
        Network::new(1, 3, None, vec![Layer::Dense(d)]).unwrap()
    }

    #[test]
    fn cross_entropy_values() {
        let (loss, g) = softmax_cross_entropy(&[0.0, 0.0], 1);
        assert!((loss - 2f64.ln()).abs() < 1e-12);
        assert_eq!(g, vec![0.5, -0.5]);
        let (loss, _) = softmax_cross_entropy(&[1000.0, 0.0], 0);
        assert!(loss.is_finite() && loss < 1e-12);
    }

    #[test]
    fn worked_example_gradients() {
        let net = worked_example();
        // Log-probability J(x,l) = -loss, so dJ(x,l)/dx = w_l - sum_k p_k w_k
        // with p = (9/8, 1, 1/3) / (59/24).
        let dj1 = -loss_and_gradient(&net, &[0.0], 1).unwrap().input[0];
        assert!((dj1 - (1.0 - 57.75 / 59.0)).abs() < 1e-12);
        assert!(dj1 > 0.0);
        let g0 = loss_and_gradient(&net, &[0.0], 0).unwrap().input[0];
        assert!((g0 - (57.75 / 59.0 - 1.25)).abs() < 1e-12);
        assert!(g0 < 0.0);
        assert_eq!(fgsm(&net, &[0.0], 1.0).unwrap(), vec![-1.0]);
    }

    #[test]
    fn zero_input_gradient_leaves_point() {
        let d = Dense::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![1.0, 0.0]).unwrap();
        let net = Network::new(2, 2, None, vec![Layer::Dense(d)]).unwrap();
        assert_eq!(fgsm(&net, &[0.3, 0.7], 0.5).unwrap(), vec![0.3, 0.7]);
    }

    #[test]
    fn fgsm_respects_domain() {
        let net = worked_example().with_input_domain(Some(Domain::new(-0.5, 0.5).unwrap()));
        assert_eq!(fgsm(&net, &[0.0], 1.0).unwrap(), vec![-0.5]);
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let net = init_mlp(2, &[4], 2, None, 1).unwrap();
        let data = vec![
            LabeledPoint::new(vec![1.0, 2.0], 0),
            LabeledPoint::new(vec![-1.0, 0.5], 1),
        ];
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 3,
            ..Default::default()
        };
        assert_eq!(train(&net, &data, &cfg).unwrap(), net);
    }

    #[test]
    fn training_is_deterministic() {
        let net = init_mlp(2, &[4], 2, None, 1).unwrap();
        let data: Vec<LabeledPoint> = (0..20)
            .map(|i| LabeledPoint::new(vec![i as f64 / 10.0 - 1.0, 0.3], usize::from(i >= 10)))
            .collect();
        let cfg = TrainConfig {
            epochs: 5,
            batch_size: 4,
            ..Default::default()
        };
        assert_eq!(
            train(&net, &data, &cfg).unwrap(),
            train(&net, &data, &cfg).unwrap()
        );
    }

    #[test]
    fn rejects_non_dense_layers() {
        let pool =
            crate::network::MaxPool::new(crate::network::Shape3::new(1, 1, 2), (1, 2), 2).unwrap();
        let d = Dense::new(vec![vec![1.0]], vec![0.0]).unwrap();
        let net = Network::new(2, 1, None, vec![Layer::MaxPool(pool), Layer::Dense(d)]).unwrap();
        assert!(matches!(
            loss_and_gradient(&net, &[0.0, 1.0], 0),
            Err(Error::UnsupportedLayer { layer: 0, .. })
        ));
    }
}
