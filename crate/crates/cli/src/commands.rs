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

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use robustlp::dataset::{load_csv, save_csv};
use robustlp::metrics::compute_curve;
use robustlp::oracle::ExactResult;
use robustlp::robustness::extract_adversarial;
use robustlp::train::init_mlp;
use robustlp::*;
use serde::Serialize;

use crate::args::*;
use crate::report::{create, io_error, read_records, write_json_lines, write_manifest};
use crate::CliError;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Certify(a) => certify(&a),
        Command::Stats(a) => stats(&a),
        Command::Curve(a) => curve(&a),
        Command::Attack(a) => attack(&a),
        Command::Exact(a) => exact(&a),
        Command::Finetune(a) => finetune_cmd(&a),
        Command::Train(a) => train_cmd(&a),
        Command::GenToy(a) => gen_toy(&a),
    }
}

fn load(args: &DataArgs) -> Result<(Network, Vec<LabeledPoint>), CliError> {
    let net = load_model(&args.model)?;
    let format = match (args.format, &args.labels) {
        (Format::Csv, _) => DatasetFormat::Csv,
        (Format::Idx, Some(labels)) => DatasetFormat::Idx {
            labels: labels.clone(),
        },
        (Format::Idx, None) => {
            return Err(CliError::Usage("--format idx requires --labels".into()))
        }
    };
    let spec = DatasetSpec {
        input_dim: net.input_dim(),
        num_labels: net.num_labels(),
        domain: net.input_domain(),
    };
    let points = load_dataset(&args.data, &format, spec)?;
    if points.is_empty() {
        eprintln!("warning: {} contains no points", args.data.display());
    }
    Ok((net, points))
}

fn check_margin(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be finite and >= 0, got {v}"
        )))
    }
}

#[derive(Debug, Default, Serialize)]
struct CertifySummary {
    points: usize,
    found: usize,
    none_in_region: usize,
    errors: usize,
}

fn summarize(records: &[RobustnessRecord]) -> CertifySummary {
    let mut s = CertifySummary {
        points: records.len(),
        ..Default::default()
    };
    for r in records {
        match r.status {
            RecordStatus::Found => s.found += 1,
            RecordStatus::NoneInRegion => s.none_in_region += 1,
            RecordStatus::Error => s.errors += 1,
        }
    }
    s
}

fn certify(args: &CertifyArgs) -> Result<(), CliError> {
    let start = Instant::now();
    check_margin("margin", args.margin)?;
    let (net, points) = load(&args.data)?;
    if let TargetPolicy::Fixed(l) = args.target {
        if l >= net.num_labels() {
            return Err(CliError::Usage(format!(
                "--target {l} out of range for {} labels",
                net.num_labels()
            )));
        }
    }
    let opts = CertifyOptions {
        target: args.target,
        margin: args.margin,
        respect_domain: args.domain_bounds,
        ..Default::default()
    };
    let xs: Vec<Vec<f64>> = points.into_iter().map(|p| p.x).collect();
    let records = certify_points(&net, &xs, &opts);
    write_json_lines(&args.out, &records)?;
    let summary = summarize(&records);
    if summary.errors > 0 {
        eprintln!(
            "warning: {} of {} points failed; see the error field of their records",
            summary.errors, summary.points
        );
    }
    write_manifest(
        &args.out,
        "certify",
        Some(&args.data.model),
        Some(&args.data.data),
        args,
        summary,
        start.elapsed(),
    )
}

fn stats(args: &StatsArgs) -> Result<(), CliError> {
    let records = read_records(&args.records)?;
    let stats = compute_stats(&records, args.eps)?;
    let text = serde_json::to_string_pretty(&stats).map_err(|e| CliError::Input(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn curve(args: &CurveArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let records = read_records(&args.records)?;
    let curve = compute_curve(&records);
    curve.write_csv(create(&args.out)?)?;
    #[derive(Serialize)]
    struct Summary {
        records: usize,
        breakpoints: usize,
    }
    let summary = Summary {
        records: records.len(),
        breakpoints: curve.points.len(),
    };
    write_manifest(
        &args.out,
        "curve",
        None,
        Some(&args.records),
        args,
        summary,
        start.elapsed(),
    )
}

#[derive(Debug, Default, Serialize)]
struct AttackSummary {
    points: usize,
    found: usize,
    verified: usize,
    rounding_failures: usize,
}

fn attack(args: &AttackArgs) -> Result<(), CliError> {
    let start = Instant::now();
    check_margin("alpha", args.alpha)?;
    let (net, points) = load(&args.data)?;
    let opts = CertifyOptions {
        margin: args.alpha,
        respect_domain: args.domain_bounds,
        ..Default::default()
    };
    let xs: Vec<Vec<f64>> = points.into_iter().map(|p| p.x).collect();
    let records = certify_points(&net, &xs, &opts);

    let mut w = csv::Writer::from_writer(create(&args.out)?);
    let csv_err = |e: csv::Error| CliError::Input(format!("{}: {e}", args.out.display()));
    let mut header = vec![
        "index",
        "seed_label",
        "target_label",
        "status",
        "rho_hat",
        "verified",
        "rounded_ok",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    header.extend((0..net.input_dim()).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(csv_err)?;

    let mut summary = AttackSummary {
        points: records.len(),
        ..Default::default()
    };
    for rec in &records {
        let mut row = vec![rec.seed_index.to_string(), rec.seed_label.to_string()];
        let found = rec.status == RecordStatus::Found;
        if !found {
            let status = if rec.status == RecordStatus::Error {
                "error"
            } else {
                "none"
            };
            row.extend([
                String::new(),
                status.to_string(),
                String::new(),
                String::new(),
                String::new(),
            ]);
            row.extend((0..net.input_dim()).map(|_| String::new()));
            w.write_record(&row).map_err(csv_err)?;
            continue;
        }
        summary.found += 1;
        let (raw, _) = extract_adversarial(rec, &net, false)?;
        let verified = net.classify(&raw)? != rec.seed_label;
        summary.verified += usize::from(verified);
        let (x, rounded_ok) = extract_adversarial(rec, &net, args.round_integers)?;
        if rounded_ok == Some(false) {
            summary.rounding_failures += 1;
        }
        row.extend([
            rec.target_label.map_or(String::new(), |t| t.to_string()),
            "found".to_string(),
            rec.rho_hat.to_string(),
            verified.to_string(),
            rounded_ok.map_or(String::new(), |b| b.to_string()),
        ]);
        row.extend(x.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| io_error(&args.out, e))?;

    let mut line = format!(
        "found {} adversarial examples for {} points",
        summary.found, summary.points
    );
    if args.round_integers && summary.found > 0 {
        line += &format!(
            "; {} ({:.1}%) no longer adversarial after rounding",
            summary.rounding_failures,
            100.0 * summary.rounding_failures as f64 / summary.found as f64
        );
    }
    println!("{line}");
    write_manifest(
        &args.out,
        "attack",
        Some(&args.data.model),
        Some(&args.data.data),
        args,
        summary,
        start.elapsed(),
    )
}

#[derive(Serialize)]
struct ExactLine {
    index: usize,
    #[serde(flatten)]
    result: ExactResult,
}

fn exact(args: &ExactArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (net, points) = load(&args.data)?;
    if net.num_sites() > args.max_sites {
        return Err(CliError::Usage(format!(
            "network has {} ReLU/pool sites, more than --max-sites {}",
            net.num_sites(),
            args.max_sites
        )));
    }
    let mut lines = Vec::with_capacity(points.len());
    for (index, p) in points.iter().enumerate() {
        let result = exact_robustness(&net, &p.x, args.max_sites)?;
        lines.push(ExactLine { index, result });
    }
    write_json_lines(&args.out, &lines)?;
    let finite = lines.iter().filter(|l| l.result.rho.is_finite()).count();
    #[derive(Serialize)]
    struct Summary {
        points: usize,
        finite: usize,
        patterns_total: u128,
    }
    let summary = Summary {
        points: lines.len(),
        finite,
        patterns_total: lines.first().map_or(0, |l| l.result.patterns_total),
    };
    write_manifest(
        &args.out,
        "exact",
        Some(&args.data.model),
        Some(&args.data.data),
        args,
        summary,
        start.elapsed(),
    )
}

fn sgd_config(sgd: &SgdArgs) -> TrainConfig {
    TrainConfig {
        learning_rate: sgd.lr,
        epochs: sgd.epochs,
        batch_size: sgd.batch_size,
        seed: sgd.seed,
        ..Default::default()
    }
}

fn finetune_cmd(args: &FinetuneArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (net, points) = load(&args.data)?;
    let cfg = TrainConfig {
        rounds: args.rounds,
        finetune_lr_scale: args.lr_scale,
        ..sgd_config(&args.sgd)
    };
    let attack = match args.attack {
        AttackKind::Lp => {
            check_margin("alpha", args.alpha)?;
            Attack::Lp {
                alpha: args.alpha,
                max_distance: args.max_distance,
            }
        }
        AttackKind::Fgsm => Attack::Fgsm {
            epsilon: args.epsilon,
        },
    };
    let (tuned, reports) = finetune(&net, &points, &cfg, &attack, args.round_integers)?;
    for r in &reports {
        eprintln!(
            "round {}: {} examples from {} points ({} dropped by rounding, {} by distance, {} failures)",
            r.round, r.generated, r.attacked, r.dropped_by_rounding, r.dropped_by_distance, r.failures
        );
    }
    save_model(&tuned, &args.out_model)?;
    #[derive(Serialize)]
    struct Summary {
        rounds: usize,
        reports: Vec<robustlp::train::RoundReport>,
    }
    let summary = Summary {
        rounds: reports.len(),
        reports,
    };
    write_manifest(
        &args.out_model,
        "finetune",
        Some(&args.data.model),
        Some(&args.data.data),
        args,
        summary,
        start.elapsed(),
    )
}

/// Input dimension of a CSV dataset, from its first data row.
fn csv_input_dim(path: &Path) -> Result<usize, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').count().saturating_sub(1))
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("{}: no data rows", path.display())))
}

fn train_cmd(args: &TrainArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let net = match &args.model {
        Some(m) => load_model(m)?,
        None => {
            let input_dim = match args.input_dim {
                Some(n) => n,
                None => csv_input_dim(&args.data)?,
            };
            let num_labels = match args.num_labels {
                Some(l) => l,
                None => {
                    let spec = DatasetSpec {
                        input_dim,
                        num_labels: usize::MAX,
                        domain: None,
                    };
                    let max = load_csv(&args.data, spec)?
                        .iter()
                        .map(|p| p.label)
                        .max()
                        .unwrap_or(0);
                    (max + 1).max(2)
                }
            };
            init_mlp(
                input_dim,
                &args.hidden,
                num_labels,
                args.domain,
                args.sgd.seed,
            )?
        }
    };
    let spec = DatasetSpec {
        input_dim: net.input_dim(),
        num_labels: net.num_labels(),
        domain: net.input_domain(),
    };
    let data = load_csv(&args.data, spec)?;
    let trained = train(&net, &data, &sgd_config(&args.sgd))?;
    save_model(&trained, &args.out_model)?;
    let acc = robustlp::train::accuracy(&trained, &data)?;
    println!("training accuracy {acc:.4} on {} points", data.len());
    #[derive(Serialize)]
    struct Summary {
        points: usize,
        training_accuracy: f64,
    }
    let summary = Summary {
        points: data.len(),
        training_accuracy: acc,
    };
    write_manifest(
        &args.out_model,
        "train",
        args.model.as_deref(),
        Some(&args.data),
        args,
        summary,
        start.elapsed(),
    )
}

fn gen_toy(args: &GenToyArgs) -> Result<(), CliError> {
    let task = robustlp::synth::toy_task(args.seed)?;
    save_csv(&task.train, &args.out_train)?;
    save_csv(&task.test, &args.out_test)?;
    let mut out = std::io::stdout();
    let _ = writeln!(
        out,
        "wrote {} training and {} test points",
        task.train.len(),
        task.test.len()
    );
    Ok(())
}
