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

//! Pointwise robustness estimates from the seed's linear region.
//!
//! For a seed `x*` with predicted label `l*` and a target label `l`, the
//! estimate is the smallest `eps` such that some `x` in the seed's linear
//! region with `||x - x*||_inf <= eps` scores `l` at least as high as every
//! other label (plus an optional margin). The LP is posed over the
//! displacement `d = x - x*` and one extra variable `eps`:
//!
//! ```text
//! minimize eps
//!   s.t.  d_i - eps <= 0,  -d_i - eps <= 0        (box, in the core)
//!         logit_l(x* + d) - logit_k(x* + d) >= margin  for all k != l   (core)
//!         region halfspaces at x* + d                 (lazily added pool)
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::{extract_region, HalfspaceConstraint, LinearRegion, Sense};
use crate::error::{Error, Result};
use crate::lp::{
    lazy_solve, LazyStats, LinearConstraint, LpProblem, LpStatus, Relation, SolverOptions,
    VarBounds,
};
use crate::network::{argmax, second_argmax, Domain, Network};

/// Margin used when measuring robustness.
pub const MEASUREMENT_MARGIN: f64 = 0.0;
/// Margin used when generating adversarial examples for fine-tuning.
pub const FINETUNE_MARGIN: f64 = 3.0;

/// Seed slack below which a region constraint is treated as exactly tight.
const SEED_SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPolicy {
    /// The label with the second-highest logit at the seed.
    Second,
    /// Every label other than the predicted one.
    All,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub target: TargetPolicy,
    pub margin: f64,
    /// Bound the LP variables by the network's input domain.
    pub respect_domain: bool,
    pub solver: SolverOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            target: TargetPolicy::Second,
            margin: MEASUREMENT_MARGIN,
            respect_domain: false,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    /// An adversarial example was found in the seed's region.
    Found,
    /// The restricted LP is infeasible: nothing found in the region, which
    /// says nothing about robustness outside of it.
    NoneInRegion,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRecord {
    pub seed_index: usize,
    pub seed_label: usize,
    pub target_label: Option<usize>,
    /// `null` in JSON when no adversarial example was found.
    #[serde(with = "rho_serde")]
    pub rho_hat: f64,
    pub status: RecordStatus,
    #[serde(default)]
    pub adversarial: Option<Vec<f64>>,
    #[serde(default)]
    pub rounded_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub lazy: LazyStats,
}

impl RobustnessRecord {
    fn failed(seed_index: usize, seed_label: usize, message: String) -> Self {
        RobustnessRecord {
            seed_index,
            seed_label,
            target_label: None,
            rho_hat: f64::INFINITY,
            status: RecordStatus::Error,
            adversarial: None,
            rounded_ok: None,
            error: Some(message),
            lazy: LazyStats::default(),
        }
    }
}

pub(crate) mod rho_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// The certification LP for one target, split into the eagerly solved core
/// and the lazily added pool of region halfspaces. Variables are
/// `d_0..d_{n-1}` followed by `eps`.
#[derive(Debug, Clone)]
pub struct RobustnessLp {
    pub core: LpProblem,
    pub pool: Vec<LinearConstraint>,
}

impl RobustnessLp {
    /// Core and pool merged into a single problem.
    pub fn full(&self) -> LpProblem {
        let mut p = self.core.clone();
        for c in &self.pool {
            p.add_constraint(c.clone()).expect("same dimension");
        }
        p
    }
}

/// Rewrites `expr(x* + d) (sense) 0` as a constraint on `(d, eps)`.
fn displaced(h: &HalfspaceConstraint, seed: &[f64], snap: bool) -> LinearConstraint {
    let n = seed.len();
    let mut at_seed = h.expr.eval(seed);
    if snap {
        match h.sense {
            Sense::Ge if at_seed < 0.0 && at_seed > -SEED_SNAP_TOL => at_seed = 0.0,
            Sense::Le if at_seed > 0.0 && at_seed < SEED_SNAP_TOL => at_seed = 0.0,
            _ => {}
        }
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.extend_from_slice(&h.expr.coeffs);
    coeffs.push(0.0);
    let relation = match h.sense {
        Sense::Ge => Relation::Ge,
        Sense::Le => Relation::Le,
        Sense::Eq => Relation::Eq,
    };
    LinearConstraint::new(coeffs, relation, -at_seed)
}

/// Builds the L-infinity certification LP for `target` over an explicit set
/// of region constraints and logit expressions.
pub fn certification_lp(
    constraints: &[HalfspaceConstraint],
    outputs: &[HalfspaceConstraint],
    seed: &[f64],
    domain: Option<Domain>,
) -> RobustnessLp {
    let n = seed.len();
    let eps = n;
    let mut core = LpProblem::new(n + 1);
    let mut objective = vec![0.0; n + 1];
    objective[eps] = 1.0;
    core.set_objective(objective).expect("finite");
    core.set_bounds(eps, VarBounds::NONNEGATIVE).expect("valid");
    if let Some(d) = domain {
        for (i, &s) in seed.iter().enumerate() {
            core.set_bounds(
                i,
                VarBounds {
                    lower: Some((d.lo - s).min(0.0)),
                    upper: Some((d.hi - s).max(0.0)),
                },
            )
            .expect("valid");
        }
    }
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut coeffs = vec![0.0; n + 1];
            coeffs[i] = sign;
            coeffs[eps] = -1.0;
            core.add_constraint(LinearConstraint::new(coeffs, Relation::Le, 0.0))
                .expect("finite");
        }
    }
    for h in outputs {
        core.add_constraint(displaced(h, seed, false))
            .expect("finite");
    }
    let pool = constraints
        .iter()
        .map(|h| displaced(h, seed, true))
        .collect();
    RobustnessLp { core, pool }
}

/// The certification LP for `target` in the seed's linear region.
pub fn region_lp(
    region: &LinearRegion,
    target: usize,
    margin: f64,
    domain: Option<Domain>,
) -> Result<RobustnessLp> {
    let outputs = region.output_constraints(target, margin)?;
    Ok(certification_lp(
        &region.constraints,
        &outputs,
        &region.seed,
        domain,
    ))
}

struct TargetResult {
    target: usize,
    rho: f64,
    adversarial: Option<Vec<f64>>,
    status: LpStatus,
    stats: LazyStats,
}

fn solve_target(
    region: &LinearRegion,
    target: usize,
    opts: &CertifyOptions,
    domain: Option<Domain>,
) -> Result<TargetResult> {
    let lp = region_lp(region, target, opts.margin, domain)?;
    let (solution, stats) = lazy_solve(&lp.core, &lp.pool, &opts.solver);
    let n = region.seed.len();
    let (rho, adversarial) = if solution.is_optimal() {
        let x: Vec<f64> = region
            .seed
            .iter()
            .zip(&solution.z[..n])
            .map(|(s, d)| s + d)
            .collect();
        (solution.z[n].max(0.0), Some(x))
    } else {
        (f64::INFINITY, None)
    };
    Ok(TargetResult {
        target,
        rho,
        adversarial,
        status: solution.status,
        stats,
    })
}

/// Estimates the pointwise robustness of `net` at `seed` by searching the
/// seed's linear region. Misclassified seeds are handled like any other; the
/// reference label is always the predicted one.
pub fn pointwise_robustness(
    net: &Network,
    seed: &[f64],
    opts: &CertifyOptions,
) -> Result<RobustnessRecord> {
    let logits = net.forward(seed)?;
    let num_labels = net.num_labels();
    if num_labels < 2 {
        return Err(Error::InvalidArgument(
            "robustness needs at least two labels".into(),
        ));
    }
    if !opts.margin.is_finite() || opts.margin < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "margin must be finite and >= 0, got {}",
            opts.margin
        )));
    }
    let seed_label = argmax(&logits);
    let targets: Vec<usize> = match opts.target {
        TargetPolicy::Second => vec![second_argmax(&logits)],
        TargetPolicy::All => (0..num_labels).filter(|&l| l != seed_label).collect(),
        TargetPolicy::Fixed(l) => {
            if l >= num_labels {
                return Err(Error::LabelOutOfRange {
                    label: l,
                    num_labels,
                });
            }
            if l == seed_label {
                return Err(Error::InvalidArgument(format!(
                    "target {l} equals the predicted label"
                )));
            }
            vec![l]
        }
    };
    let region = extract_region(net, seed)?;
    let domain = if opts.respect_domain {
        net.input_domain()
    } else {
        None
    };

    let mut stats = LazyStats::default();
    let mut best: Option<TargetResult> = None;
    let mut failure = None;
    for &t in &targets {
        let r = solve_target(&region, t, opts, domain)?;
        stats.absorb(&r.stats);
        match r.status {
            LpStatus::Optimal | LpStatus::Infeasible => {}
            other => failure = Some(format!("target {t}: LP ended with status {other:?}")),
        }
        if best.as_ref().is_none_or(|b| r.rho < b.rho) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one target");
    let found = best.rho.is_finite();
    let status = match (&failure, found) {
        (_, true) => RecordStatus::Found,
        (Some(_), false) => RecordStatus::Error,
        (None, false) => RecordStatus::NoneInRegion,
    };
    let target_label = match opts.target {
        TargetPolicy::All if !found => None,
        _ => Some(best.target),
    };
    Ok(RobustnessRecord {
        seed_index: 0,
        seed_label,
        target_label,
        rho_hat: best.rho,
        status,
        adversarial: best.adversarial,
        rounded_ok: None,
        error: if found { None } else { failure },
        lazy: stats,
    })
}

/// Certifies every point independently and in parallel. Per-point failures
/// become error records; output order follows input order.
pub fn certify_points(
    net: &Network,
    points: &[Vec<f64>],
    opts: &CertifyOptions,
) -> Vec<RobustnessRecord> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut rec = pointwise_robustness(net, x, opts).unwrap_or_else(|e| {
                let label = net.classify(x).unwrap_or(0);
                RobustnessRecord::failed(i, label, e.to_string())
            });
            rec.seed_index = i;
            rec
        })
        .collect()
}

/// The LP optimizer of a record, optionally rounded to integers and clamped to
/// the input domain. With rounding, the flag reports whether the rounded
/// point is still classified differently from the seed.
pub fn extract_adversarial(
    record: &RobustnessRecord,
    net: &Network,
    round_to_integers: bool,
) -> Result<(Vec<f64>, Option<bool>)> {
    let x = record
        .adversarial
        .as_ref()
        .filter(|_| record.rho_hat.is_finite())
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "record {} has no adversarial example",
                record.seed_index
            ))
        })?;
    if !round_to_integers {
        return Ok((x.clone(), None));
    }
    let rounded: Vec<f64> = x
        .iter()
        .map(|v| {
            let r = v.round();
            net.input_domain().map_or(r, |d| d.clamp(r))
        })
        .collect();
    let ok = net.classify(&rounded)? != record.seed_label;
    Ok((rounded, Some(ok)))
}
