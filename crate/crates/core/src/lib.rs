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

//! Pointwise robustness of piecewise-linear classifiers.
//!
//! The pointwise robustness of a classifier `f` at `x*` is the smallest
//! L-infinity radius around `x*` that contains a point with a different
//! label. For networks built from affine layers, ReLU and max pooling, this
//! crate estimates it by restricting the network to the linear region of the
//! seed, where the label-change condition becomes a linear program:
//!
//! 1. [`encoder::extract_region`] fixes every ReLU and pooling decision to its
//!    value at the seed and returns the halfspaces of that region together
//!    with the logits as affine functions of the input.
//! 2. [`robustness::pointwise_robustness`] minimizes the L-infinity distance
//!    to the seed subject to the region and to a target label winning, using
//!    the lazy constraint loop of [`lp::lazy_solve`].
//!
//! The result overapproximates the true robustness. [`oracle`] computes the
//! exact value on tiny networks by enumerating all activation patterns, and
//! [`metrics`] aggregates per-point estimates into adversarial frequency and
//! severity. [`train`] provides a small SGD trainer, the signed-gradient
//! attack and adversarial fine-tuning.
//!
//! ```
//! use robustlp::{pointwise_robustness, CertifyOptions, Dense, Layer, Network};
//!
//! let d = Dense::new(vec![vec![1.0], vec![-1.0]], vec![0.0, 1.0]).unwrap();
//! let net = Network::new(1, 2, None, vec![Layer::Dense(d)]).unwrap();
//! let rec = pointwise_robustness(&net, &[2.0], &CertifyOptions::default()).unwrap();
//! assert!((rec.rho_hat - 1.5).abs() < 1e-9);
//! ```

pub mod affine;
pub mod dataset;
pub mod encoder;
pub mod error;
pub mod lp;
pub mod metrics;
pub mod model_io;
pub mod network;
pub mod oracle;
pub mod robustness;
pub mod synth;
pub mod train;

pub use affine::{AffineExpr, AffineVector};
pub use dataset::{load_dataset, DatasetFormat, DatasetSpec, LabeledPoint};
pub use encoder::{extract_region, ActivationPattern, HalfspaceConstraint, LinearRegion};
pub use error::{Error, Result};
pub use lp::{LazyStats, LpProblem, LpSolution, LpStatus, SolverOptions};
pub use metrics::{compute_curve, compute_stats, RobustnessCurve, RobustnessStats};
pub use model_io::{load_model, save_model};
pub use network::{Conv, Dense, Domain, Layer, MaxPool, Network, Shape3};
pub use oracle::{exact_robustness, grid_robustness, ExactResult};
pub use robustness::{
    certify_points, pointwise_robustness, CertifyOptions, RecordStatus, RobustnessRecord,
    TargetPolicy,
};
pub use train::{fgsm, finetune, train, Attack, TrainConfig};
