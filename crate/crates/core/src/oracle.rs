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

//! Ground-truth robustness for tiny networks.
//!
//! [`exact_robustness`] enumerates every activation pattern, so its cost is
//! exponential in the number of ReLU units and pooling windows.
//! [`grid_robustness`] scans a lattice around the seed and gives an upper
//! bound for inputs of dimension at most three.

use rayon::prelude::*;
use serde::Serialize;

use crate::encoder::{build_disjunctive, output_constraints, ActivationPattern, Instantiation};
use crate::error::{Error, Result};
use crate::lp::{simplex_solve, LpStatus, SolverOptions};
use crate::network::{argmax, Network};
use crate::robustness::certification_lp;

pub const DEFAULT_MAX_SITES: usize = 16;

/// Refuse grids with more points than this.
const MAX_GRID_POINTS: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactResult {
    pub seed_label: usize,
    /// `+inf` (serialized as `null`) when no other label is reachable.
    #[serde(serialize_with = "crate::robustness::rho_serde::serialize")]
    pub rho: f64,
    pub target: Option<usize>,
    pub witness: Option<Vec<f64>>,
    pub pattern: Option<ActivationPattern>,
    pub patterns_feasible: u64,
    pub patterns_total: u128,
}

/// Best adversarial distance within one fixed activation pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternOptimum {
    pub rho: f64,
    pub target: usize,
    pub witness: Vec<f64>,
}

fn check_sites(net: &Network, max_sites: usize) -> Result<()> {
    let sites = net.num_sites();
    if sites > max_sites {
        return Err(Error::TooManySites {
            sites,
            max: max_sites,
        });
    }
    Ok(())
}

/// Whether the pattern's region is nonempty.
fn region_feasible(inst: &Instantiation, seed: &[f64], opts: &SolverOptions) -> bool {
    let lp = certification_lp(&inst.constraints, &[], seed, None);
    simplex_solve(&lp.full(), opts).status == LpStatus::Optimal
}

fn optimum_in(
    inst: &Instantiation,
    seed: &[f64],
    seed_label: usize,
    margin: f64,
    opts: &SolverOptions,
) -> Result<Option<PatternOptimum>> {
    let n = seed.len();
    let mut best: Option<PatternOptimum> = None;
    for target in (0..inst.logits.len()).filter(|&l| l != seed_label) {
        let outputs = output_constraints(&inst.logits, target, margin)?;
        let lp = certification_lp(&inst.constraints, &outputs, seed, None);
        let sol = simplex_solve(&lp.full(), opts);
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            other => {
                return Err(Error::Solver(format!(
                    "exact oracle LP ended with status {other:?}"
                )))
            }
        }
        let rho = sol.z[n].max(0.0);
        if best.as_ref().is_none_or(|b| rho < b.rho) {
            best = Some(PatternOptimum {
                rho,
                target,
                witness: seed.iter().zip(&sol.z[..n]).map(|(s, d)| s + d).collect(),
            });
        }
    }
    Ok(best)
}

/// Smallest adversarial distance restricted to a single activation pattern,
/// over all targets other than the seed's predicted label.
pub fn exact_for_pattern(
    net: &Network,
    seed: &[f64],
    pattern: &ActivationPattern,
    margin: f64,
) -> Result<Option<PatternOptimum>> {
    let enc = build_disjunctive(net)?;
    let inst = enc.instantiate(pattern)?;
    let seed_label = net.classify(seed)?;
    optimum_in(&inst, seed, seed_label, margin, &SolverOptions::default())
}

/// Exact pointwise robustness: the minimum over every activation pattern and
/// every target label of the certification LP on that pattern's region.
/// Closed regions are used throughout, so ties count as label changes.
pub fn exact_robustness(net: &Network, seed: &[f64], max_sites: usize) -> Result<ExactResult> {
    check_sites(net, max_sites)?;
    let seed_label = argmax(&net.forward(seed)?);
    let enc = build_disjunctive(net)?;
    let opts = SolverOptions::default();
    let patterns: Vec<ActivationPattern> = enc.patterns().collect();

    let results = patterns
        .par_iter()
        .map(|p| -> Result<Option<Option<PatternOptimum>>> {
            let inst = enc.instantiate(p)?;
            if !region_feasible(&inst, seed, &opts) {
                return Ok(None);
            }
            Ok(Some(optimum_in(&inst, seed, seed_label, 0.0, &opts)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut feasible = 0u64;
    let mut best: Option<(usize, PatternOptimum)> = None;
    for (i, r) in results.into_iter().enumerate() {
        let Some(opt) = r else { continue };
        feasible += 1;
        if let Some(o) = opt {
            let better = match &best {
                None => true,
                Some((_, b)) => o.rho < b.rho || (o.rho == b.rho && o.target < b.target),
            };
            if better {
                best = Some((i, o));
            }
        }
    }
    let patterns_total = enc.pattern_count();
    Ok(match best {
        Some((i, o)) => ExactResult {
            seed_label,
            rho: o.rho,
            target: Some(o.target),
            witness: Some(o.witness),
            pattern: Some(patterns[i].clone()),
            patterns_feasible: feasible,
            patterns_total,
        },
        None => ExactResult {
            seed_label,
            rho: f64::INFINITY,
            target: None,
            witness: None,
            pattern: None,
            patterns_feasible: feasible,
            patterns_total,
        },
    })
}

/// Every disjunct of a network's exact encoding, instantiated once so that
/// many points can be checked against it.
pub struct ExactEncoding {
    pub instances: Vec<(ActivationPattern, Instantiation)>,
    num_labels: usize,
}

impl ExactEncoding {
    pub fn new(net: &Network, max_sites: usize) -> Result<Self> {
        check_sites(net, max_sites)?;
        let enc = build_disjunctive(net)?;
        let instances = enc
            .patterns()
            .map(|p| {
                let inst = enc.instantiate(&p)?;
                Ok((p, inst))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExactEncoding {
            instances,
            num_labels: net.num_labels(),
        })
    }

    /// `result[l]` is true iff some disjunct has all of its constraints and
    /// the output constraints for label `l` satisfied at `x` (up to `tol`).
    pub fn satisfiable_labels(&self, x: &[f64], tol: f64) -> Vec<bool> {
        let mut sat = vec![false; self.num_labels];
        for (_, inst) in &self.instances {
            if !inst.constraints.iter().all(|c| c.holds(x, tol)) {
                continue;
            }
            let logits = inst.logits.eval(x);
            for (l, s) in sat.iter_mut().enumerate() {
                if !*s {
                    *s = logits.iter().all(|&v| logits[l] >= v - tol);
                }
            }
        }
        sat
    }
}

/// Visits every integer vector of dimension `n` whose largest absolute entry
/// is exactly `k`; stops early when `visit` returns true.
fn for_each_on_shell(n: usize, k: i64, mut visit: impl FnMut(&[i64]) -> bool) -> bool {
    if k == 0 {
        return visit(&vec![0; n]);
    }
    let mut v = vec![0i64; n];
    // The first coordinate reaching magnitude k is `lead`; earlier ones stay
    // strictly inside, later ones range freely.
    for lead in 0..n {
        for lead_val in [-k, k] {
            let ranges: Vec<(i64, i64)> = (0..n)
                .map(|j| match j.cmp(&lead) {
                    std::cmp::Ordering::Less => (-(k - 1), k - 1),
                    std::cmp::Ordering::Equal => (lead_val, lead_val),
                    std::cmp::Ordering::Greater => (-k, k),
                })
                .collect();
            for (j, r) in ranges.iter().enumerate() {
                v[j] = r.0;
            }
            loop {
                if visit(&v) {
                    return true;
                }
                let mut j = 0;
                loop {
                    if j == n {
                        break;
                    }
                    if v[j] < ranges[j].1 {
                        v[j] += 1;
                        break;
                    }
                    v[j] = ranges[j].0;
                    j += 1;
                }
                if j == n {
                    break;
                }
            }
        }
    }
    false
}

/// Upper bound on robustness from a lattice with spacing `resolution` over
/// the box of half-width `radius` around the seed: the L-infinity distance of
/// the nearest lattice point with a different label, or `+inf` if none.
pub fn grid_robustness(net: &Network, seed: &[f64], radius: f64, resolution: f64) -> Result<f64> {
    let n = net.input_dim();
    if n > 3 {
        return Err(Error::GridTooLarge(format!(
            "input dimension {n} exceeds 3"
        )));
    }
    if resolution.is_nan() || resolution <= 0.0 || radius.is_nan() || radius < 0.0 {
        return Err(Error::InvalidArgument(
            "radius and resolution must be positive".into(),
        ));
    }
    let label = net.classify(seed)?;
    let steps = (radius / resolution + 1e-9).floor() as i64;
    let points = (2 * steps as u64 + 1).checked_pow(n as u32);
    if points.is_none_or(|p| p > MAX_GRID_POINTS) {
        return Err(Error::GridTooLarge(format!(
            "{steps} steps per side in dimension {n}"
        )));
    }
    let mut g = vec![0.0; n];
    let mut failure = None;
    for k in 0..=steps {
        let hit = for_each_on_shell(n, k, |v| {
            for ((gi, si), vi) in g.iter_mut().zip(seed).zip(v) {
                *gi = si + resolution * *vi as f64;
            }
            match net.classify(&g) {
                Ok(l) => l != label,
                Err(e) => {
                    failure = Some(e);
                    true
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if hit {
            return Ok(k as f64 * resolution);
        }
    }
    Ok(f64::INFINITY)
}
