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

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use robustlp::metrics::DEFAULT_EPSILON;
use robustlp::{Domain, TargetPolicy};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "robustlp",
    version,
    about = "Pointwise robustness certification for piecewise-linear networks"
)]
pub struct Cli {
    /// Worker threads for per-point work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the robustness of every point in a dataset.
    Certify(CertifyArgs),
    /// Adversarial frequency and severity of a record file.
    Stats(StatsArgs),
    /// Cumulative robustness curve of a record file, as CSV.
    Curve(CurveArgs),
    /// Generate adversarial examples with an output margin.
    Attack(AttackArgs),
    /// Exact robustness by enumerating activation patterns (tiny networks).
    Exact(ExactArgs),
    /// Adversarial fine-tuning.
    Finetune(FinetuneArgs),
    /// Train a dense ReLU network with SGD.
    Train(TrainArgs),
    /// Write the two-dimensional toy dataset.
    GenToy(GenToyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Idx,
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset: CSV rows `label,x0,x1,...` or an IDX image file.
    #[arg(long)]
    pub data: PathBuf,
    /// Dataset encoding.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// IDX label file; required with `--format idx`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// `second`, `all`, or a label index.
    #[arg(long, default_value = "second", value_parser = parse_target)]
    #[serde(serialize_with = "target_name")]
    pub target: TargetPolicy,
    /// Required output margin of the target label over the seed label.
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
    /// Constrain the search to the model's input domain.
    #[arg(long)]
    pub domain_bounds: bool,
    /// Output file, one JSON record per line.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    /// Record file written by `certify`.
    #[arg(long)]
    pub records: PathBuf,
    /// Robustness threshold.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub eps: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    /// Record file written by `certify`.
    #[arg(long)]
    pub records: PathBuf,
    /// Output CSV with columns `epsilon,count`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AttackArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output margin of the target label.
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
    /// Round examples to integers and check they stay adversarial.
    #[arg(long)]
    pub round_integers: bool,
    /// Constrain the search to the model's input domain.
    #[arg(long)]
    pub domain_bounds: bool,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExactArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Refuse networks with more ReLU and max-pool sites than this.
    #[arg(long, default_value_t = robustlp::oracle::DEFAULT_MAX_SITES)]
    pub max_sites: usize,
    /// Output file, one JSON result per line.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    Lp,
    Fgsm,
}

#[derive(Debug, Args, Serialize)]
pub struct SgdArgs {
    /// Learning rate.
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    /// Passes over the data (per round when fine-tuning).
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Minibatch size.
    #[arg(long, default_value_t = 16)]
    pub batch_size: usize,
    /// Seed for initialization and shuffling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct FinetuneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub sgd: SgdArgs,
    /// Attack-and-retrain rounds.
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    /// How adversarial examples are generated.
    #[arg(long, value_enum, default_value_t = AttackKind::Lp)]
    pub attack: AttackKind,
    /// Output margin of the LP attack.
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
    /// Step size of the signed-gradient attack.
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Discard LP examples farther than this from their seed.
    #[arg(long)]
    pub max_distance: Option<f64>,
    /// Learning rate of fine-tuning, as a fraction of `--lr`.
    #[arg(long, default_value_t = 0.1)]
    pub lr_scale: f64,
    /// Round examples to integers; drop those that stop being adversarial.
    #[arg(long)]
    pub round_integers: bool,
    /// Where to write the fine-tuned model.
    #[arg(long)]
    pub out_model: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Starting model; a fresh network is initialized when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Training data: CSV rows `label,x0,x1,...`.
    #[arg(long)]
    pub data: PathBuf,
    /// Hidden widths for a fresh network, e.g. `8` or `16,16`.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub hidden: Vec<usize>,
    /// Input dimension for a fresh network; read from the data when absent.
    #[arg(long)]
    pub input_dim: Option<usize>,
    /// Number of labels for a fresh network; read from the data when absent.
    #[arg(long)]
    pub num_labels: Option<usize>,
    /// Input domain for a fresh network, as `lo,hi`.
    #[arg(long, value_parser = parse_domain)]
    #[serde(serialize_with = "domain_pair")]
    pub domain: Option<Domain>,
    #[command(flatten)]
    pub sgd: SgdArgs,
    /// Where to write the trained model.
    #[arg(long)]
    pub out_model: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GenToyArgs {
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training split CSV.
    #[arg(long)]
    pub out_train: PathBuf,
    /// Test split CSV.
    #[arg(long)]
    pub out_test: PathBuf,
}

fn parse_target(s: &str) -> Result<TargetPolicy, String> {
    match s {
        "second" => Ok(TargetPolicy::Second),
        "all" => Ok(TargetPolicy::All),
        _ => s
            .parse::<usize>()
            .map(TargetPolicy::Fixed)
            .map_err(|_| format!("expected `second`, `all` or a label index, got `{s}`")),
    }
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Domain::new(lo, hi).map_err(|e| e.to_string())
}

fn target_name<S: serde::Serializer>(t: &TargetPolicy, s: S) -> Result<S::Ok, S::Error> {
    match t {
        TargetPolicy::Second => s.serialize_str("second"),
        TargetPolicy::All => s.serialize_str("all"),
        TargetPolicy::Fixed(l) => s.serialize_str(&l.to_string()),
    }
}

fn domain_pair<S: serde::Serializer>(d: &Option<Domain>, s: S) -> Result<S::Ok, S::Error> {
    d.map(|d| [d.lo, d.hi]).serialize(s)
}
