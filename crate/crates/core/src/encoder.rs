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

//! Constraint encodings of a network.
//!
//! Each ReLU unit and each pooling window is a disjunction: exactly one of its
//! branches describes the network on a given side of a hyperplane. Fixing one
//! branch per site turns the encoding into a conjunction of halfspaces over the
//! input variables. [`extract_region`] fixes the branches taken by a seed input;
//! [`DisjunctiveEncoding`] enumerates every combination.

use serde::{Deserialize, Serialize};

use crate::affine::{AffineExpr, AffineVector};
use crate::error::{Error, Result};
use crate::network::{Layer, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    /// `expr >= 0`
    Ge,
    /// `expr <= 0`
    Le,
    /// `expr == 0`
    Eq,
}

/// Where a constraint came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Relu {
        layer: usize,
        unit: usize,
    },
    /// The selected member of `window` dominates the member at position `rival`.
    Pool {
        layer: usize,
        window: usize,
        rival: usize,
    },
    /// The target logit dominates logit `rival`.
    Output {
        target: usize,
        rival: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceConstraint {
    pub expr: AffineExpr,
    pub sense: Sense,
    pub origin: Origin,
}

impl HalfspaceConstraint {
    /// Signed distance to violation in expression units; negative when violated.
    pub fn slack(&self, x: &[f64]) -> f64 {
        let v = self.expr.eval(x);
        match self.sense {
            Sense::Ge => v,
            Sense::Le => -v,
            Sense::Eq => -v.abs(),
        }
    }

    pub fn holds(&self, x: &[f64], tol: f64) -> bool {
        self.slack(x) >= -tol
    }
}

/// The branch taken at one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SiteChoice {
    Relu {
        active: bool,
    },
    /// Position of the maximizing member within the pooling window.
    Pool {
        selected: usize,
    },
}

/// One branch per site, in network order (layer by layer, unit by unit).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActivationPattern(pub Vec<SiteChoice>);

impl ActivationPattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The convex set around a seed on which the network is a single affine map.
#[derive(Debug, Clone)]
pub struct LinearRegion {
    pub constraints: Vec<HalfspaceConstraint>,
    pub logits: AffineVector,
    pub seed: Vec<f64>,
    pub pattern: ActivationPattern,
}

impl LinearRegion {
    pub fn output_constraints(
        &self,
        target: usize,
        margin: f64,
    ) -> Result<Vec<HalfspaceConstraint>> {
        output_constraints(&self.logits, target, margin)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|c| c.holds(x, tol))
    }
}

/// `logit_target - logit_other - margin >= 0` for every other label.
pub fn output_constraints(
    logits: &AffineVector,
    target: usize,
    margin: f64,
) -> Result<Vec<HalfspaceConstraint>> {
    if target >= logits.len() {
        return Err(Error::LabelOutOfRange {
            label: target,
            num_labels: logits.len(),
        });
    }
    Ok((0..logits.len())
        .filter(|&r| r != target)
        .map(|rival| {
            let mut expr = logits.get(target).sub(logits.get(rival));
            expr.bias -= margin;
            HalfspaceConstraint {
                expr,
                sense: Sense::Ge,
                origin: Origin::Output { target, rival },
            }
        })
        .collect())
}

/// Walks the network symbolically, asking `choose` for the branch at every
/// site, and collects the halfspaces that make each branch valid.
fn propagate<F>(
    net: &Network,
    mut choose: F,
) -> Result<(Vec<HalfspaceConstraint>, AffineVector, ActivationPattern)>
where
    F: FnMut(usize, usize, &Layer) -> Result<SiteChoice>,
{
    let n = net.input_dim();
    let mut value = AffineVector::identity(n);
    let mut constraints = Vec::new();
    let mut pattern = Vec::with_capacity(net.num_sites());
    for (li, layer) in net.layers().iter().enumerate() {
        value = match layer {
            Layer::Dense(_) | Layer::Conv(_) => value.through_linear(layer)?,
            Layer::Relu => {
                let mut active = Vec::with_capacity(value.len());
                for unit in 0..value.len() {
                    let on = match choose(li, unit, layer)? {
                        SiteChoice::Relu { active } => active,
                        other => {
                            return Err(Error::InvalidArgument(format!(
                                "expected a ReLU choice at layer {li} unit {unit}, got {other:?}"
                            )))
                        }
                    };
                    constraints.push(HalfspaceConstraint {
                        expr: value.get(unit).clone(),
                        sense: if on { Sense::Ge } else { Sense::Le },
                        origin: Origin::Relu { layer: li, unit },
                    });
                    pattern.push(SiteChoice::Relu { active: on });
                    active.push(on);
                }
                value.relu_fix(&active)?
            }
            Layer::MaxPool(pool) => {
                let windows = pool.output_shape().len();
                let mut selected = Vec::with_capacity(windows);
                for window in 0..windows {
                    let k = match choose(li, window, layer)? {
                        SiteChoice::Pool { selected } if selected < pool.window_len() => selected,
                        other => {
                            return Err(Error::InvalidArgument(format!(
                                "invalid pool choice at layer {li} window {window}: {other:?}"
                            )))
                        }
                    };
                    let members = pool.window_members(window);
                    for (rival, &m) in members.iter().enumerate() {
                        if rival != k {
                            constraints.push(HalfspaceConstraint {
                                expr: value.get(members[k]).sub(value.get(m)),
                                sense: Sense::Ge,
                                origin: Origin::Pool {
                                    layer: li,
                                    window,
                                    rival,
                                },
                            });
                        }
                    }
                    pattern.push(SiteChoice::Pool { selected: k });
                    selected.push(k);
                }
                value.maxpool_fix(pool, &selected)?
            }
        };
    }
    Ok((constraints, value, ActivationPattern(pattern)))
}

/// Builds the linear region containing `seed`. A ReLU whose pre-activation is
/// `<= 0` at the seed is fixed inactive; pooling ties select the lowest position.
pub fn extract_region(net: &Network, seed: &[f64]) -> Result<LinearRegion> {
    let trace = net.forward_trace(seed)?;
    let (constraints, logits, pattern) = propagate(net, |li, unit, layer| {
        let input = &trace[li];
        Ok(match layer {
            Layer::Relu => SiteChoice::Relu {
                active: input[unit] > 0.0,
            },
            Layer::MaxPool(pool) => SiteChoice::Pool {
                selected: pool.select(unit, input),
            },
            _ => unreachable!("only activation layers have sites"),
        })
    })?;
    Ok(LinearRegion {
        constraints,
        logits,
        seed: seed.to_vec(),
        pattern,
    })
}

/// The activation pattern induced by an input.
pub fn pattern_of(net: &Network, x: &[f64]) -> Result<ActivationPattern> {
    Ok(extract_region(net, x)?.pattern)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteKind {
    Relu,
    Pool { window_len: usize },
}

impl SiteKind {
    pub fn arity(&self) -> usize {
        match self {
            SiteKind::Relu => 2,
            SiteKind::Pool { window_len } => *window_len,
        }
    }

    fn choice(&self, digit: usize) -> SiteChoice {
        match self {
            SiteKind::Relu => SiteChoice::Relu { active: digit == 1 },
            SiteKind::Pool { .. } => SiteChoice::Pool { selected: digit },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Site {
    pub layer: usize,
    pub unit: usize,
    pub kind: SiteKind,
}

/// A fully fixed disjunct of the exact encoding.
#[derive(Debug, Clone)]
pub struct Instantiation {
    pub constraints: Vec<HalfspaceConstraint>,
    pub logits: AffineVector,
}

/// The full disjunctive encoding of a network: one site per ReLU unit or
/// pooling window, each of which may take any of its branches.
#[derive(Debug, Clone)]
pub struct DisjunctiveEncoding<'a> {
    net: &'a Network,
    sites: Vec<Site>,
}

pub fn build_disjunctive(net: &Network) -> Result<DisjunctiveEncoding<'_>> {
    let mut sites = Vec::with_capacity(net.num_sites());
    let mut dim = net.input_dim();
    for (li, layer) in net.layers().iter().enumerate() {
        match layer {
            Layer::Relu => sites.extend((0..dim).map(|unit| Site {
                layer: li,
                unit,
                kind: SiteKind::Relu,
            })),
            Layer::MaxPool(pool) => sites.extend((0..pool.output_shape().len()).map(|unit| Site {
                layer: li,
                unit,
                kind: SiteKind::Pool {
                    window_len: pool.window_len(),
                },
            })),
            Layer::Dense(_) | Layer::Conv(_) => {}
        }
        dim = layer.output_dim(dim).ok_or(Error::UnsupportedLayer {
            layer: li,
            kind: layer.kind(),
        })?;
    }
    Ok(DisjunctiveEncoding { net, sites })
}

impl<'a> DisjunctiveEncoding<'a> {
    pub fn network(&self) -> &'a Network {
        self.net
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    /// `2^(relu sites) * prod(window sizes)`; saturates at `u128::MAX`.
    pub fn pattern_count(&self) -> u128 {
        self.sites
            .iter()
            .try_fold(1u128, |acc, s| acc.checked_mul(s.kind.arity() as u128))
            .unwrap_or(u128::MAX)
    }

    /// Every activation pattern, in mixed-radix order with the first site
    /// varying fastest.
    pub fn patterns(&self) -> impl Iterator<Item = ActivationPattern> + '_ {
        let mut digits = vec![0usize; self.sites.len()];
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let pattern = ActivationPattern(
                self.sites
                    .iter()
                    .zip(&digits)
                    .map(|(s, &d)| s.kind.choice(d))
                    .collect(),
            );
            done = true;
            for (d, s) in digits.iter_mut().zip(&self.sites) {
                *d += 1;
                if *d < s.kind.arity() {
                    done = false;
                    break;
                }
                *d = 0;
            }
            Some(pattern)
        })
    }

    /// Constraints and logits of the disjunct selected by `pattern`.
    pub fn instantiate(&self, pattern: &ActivationPattern) -> Result<Instantiation> {
        Error::expect_dim(self.sites.len(), pattern.len())?;
        let mut next = pattern.0.iter();
        let (constraints, logits, _) = propagate(self.net, |_, _, _| {
            Ok(*next.next().expect("length checked"))
        })?;
        Ok(Instantiation {
            constraints,
            logits,
        })
    }
}
