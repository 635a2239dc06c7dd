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

//! JSON model files.
//!
//! ```json
//! {"input_dim": 2, "num_labels": 3, "input_domain": [0, 255],
//!  "layers": [{"type": "dense", "weights": [[1, 0], [0, 1], [1, 1]], "bias": [0, 0, 0]},
//!             {"type": "relu"}]}
//! ```
//!
//! Dense weights are nested row-major arrays. Conv kernels are flat arrays in
//! `[out_channel][in_channel][ky][kx]` order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Conv, Dense, Domain, Layer, MaxPool, Network, Shape3};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    input_dim: usize,
    num_labels: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_domain: Option<[f64; 2]>,
    layers: Vec<LayerFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum LayerFile {
    Dense {
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
    },
    Conv {
        input_shape: [usize; 3],
        out_channels: usize,
        kernel_size: [usize; 2],
        stride: usize,
        padding: usize,
        kernel: Vec<f64>,
        bias: Vec<f64>,
    },
    Relu,
    Maxpool {
        input_shape: [usize; 3],
        window: [usize; 2],
        stride: usize,
    },
}

fn shape(s: [usize; 3]) -> Shape3 {
    Shape3::new(s[0], s[1], s[2])
}

impl LayerFile {
    fn into_layer(self) -> Result<Layer> {
        Ok(match self {
            LayerFile::Dense { weights, bias } => Layer::Dense(Dense::new(weights, bias)?),
            LayerFile::Conv {
                input_shape,
                out_channels,
                kernel_size,
                stride,
                padding,
                kernel,
                bias,
            } => Layer::Conv(Conv::new(
                shape(input_shape),
                out_channels,
                (kernel_size[0], kernel_size[1]),
                stride,
                padding,
                kernel,
                bias,
            )?),
            LayerFile::Relu => Layer::Relu,
            LayerFile::Maxpool {
                input_shape,
                window,
                stride,
            } => Layer::MaxPool(MaxPool::new(
                shape(input_shape),
                (window[0], window[1]),
                stride,
            )?),
        })
    }

    fn from_layer(layer: &Layer) -> Self {
        match layer {
            Layer::Dense(d) => LayerFile::Dense {
                weights: (0..d.out_dim()).map(|j| d.row(j).to_vec()).collect(),
                bias: d.bias().to_vec(),
            },
            Layer::Conv(c) => {
                let s = c.input_shape();
                let (kh, kw) = c.kernel_size();
                LayerFile::Conv {
                    input_shape: [s.channels, s.height, s.width],
                    out_channels: c.out_channels(),
                    kernel_size: [kh, kw],
                    stride: c.stride(),
                    padding: c.padding(),
                    kernel: c.kernel().to_vec(),
                    bias: c.bias().to_vec(),
                }
            }
            Layer::Relu => LayerFile::Relu,
            Layer::MaxPool(p) => {
                let s = p.input_shape();
                let (wh, ww) = p.window();
                LayerFile::Maxpool {
                    input_shape: [s.channels, s.height, s.width],
                    window: [wh, ww],
                    stride: p.stride(),
                }
            }
        }
    }
}

pub fn model_from_json(text: &str) -> Result<Network> {
    let file: ModelFile = serde_json::from_str(text)?;
    let domain = file
        .input_domain
        .map(|[lo, hi]| Domain::new(lo, hi))
        .transpose()?;
    let layers = file
        .layers
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.into_layer().map_err(|e| Error::InvalidLayer {
                layer: i,
                reason: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Network::new(file.input_dim, file.num_labels, domain, layers)
}

pub fn model_to_json(net: &Network) -> String {
    let file = ModelFile {
        input_dim: net.input_dim(),
        num_labels: net.num_labels(),
        input_domain: net.input_domain().map(|d| [d.lo, d.hi]),
        layers: net.layers().iter().map(LayerFile::from_layer).collect(),
    };
    serde_json::to_string_pretty(&file).expect("model serialization is infallible")
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

pub fn save_model(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(net) + "\n").map_err(|e| Error::io(path, e))
}
