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

//! Symbolic evaluation: affine functions of the input variables propagated
//! through the layers of a network.
//!
//! Once every ReLU and pooling choice is fixed, each neuron is an exact
//! affine function of the input, so no per-layer variables are needed.

use crate::error::{Error, Result};
use crate::network::{dot, Layer, MaxPool};

/// `coeffs . x + bias` over `n` input variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineExpr {
    pub coeffs: Vec<f64>,
    pub bias: f64,
}

impl AffineExpr {
    pub fn zero(n: usize) -> Self {
        AffineExpr {
            coeffs: vec![0.0; n],
            bias: 0.0,
        }
    }

    pub fn constant(n: usize, bias: f64) -> Self {
        AffineExpr {
            coeffs: vec![0.0; n],
            bias,
        }
    }

    /// The input variable `x_i`.
    pub fn variable(n: usize, i: usize) -> Self {
        let mut e = Self::zero(n);
        e.coeffs[i] = 1.0;
        e
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x) + self.bias
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.coeffs.iter().all(|c| c.is_finite())
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, other: &AffineExpr, scale: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
        self.bias += scale * other.bias;
    }

    pub fn sub(&self, other: &AffineExpr) -> AffineExpr {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }
}

/// Symbolic values of one layer's neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineVector {
    num_vars: usize,
    exprs: Vec<AffineExpr>,
}

impl AffineVector {
    /// The input layer `{x_0, ..., x_{n-1}}`.
    pub fn identity(n: usize) -> Self {
        AffineVector {
            num_vars: n,
            exprs: (0..n).map(|i| AffineExpr::variable(n, i)).collect(),
        }
    }

    pub fn from_exprs(num_vars: usize, exprs: Vec<AffineExpr>) -> Result<Self> {
        if let Some(e) = exprs.iter().find(|e| e.num_vars() != num_vars) {
            return Err(Error::DimensionMismatch {
                expected: num_vars,
                found: e.num_vars(),
            });
        }
        Ok(AffineVector { num_vars, exprs })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.exprs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exprs.is_empty()
    }

    pub fn exprs(&self) -> &[AffineExpr] {
        &self.exprs
    }

    pub fn get(&self, j: usize) -> &AffineExpr {
        &self.exprs[j]
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.exprs.iter().map(|e| e.eval(x)).collect()
    }

    /// Composes a Dense or Conv layer: output `j` is `sum_m W[j][m] v[m] + b[j]`.
    pub fn through_linear(&self, layer: &Layer) -> Result<AffineVector> {
        let n = self.num_vars;
        let exprs = match layer {
            Layer::Dense(d) => {
                Error::expect_dim(d.in_dim(), self.len())?;
                (0..d.out_dim())
                    .map(|j| {
                        let mut e = AffineExpr::constant(n, d.bias()[j]);
                        for (w, v) in d.row(j).iter().zip(&self.exprs) {
                            if *w != 0.0 {
                                e.add_scaled(v, *w);
                            }
                        }
                        e
                    })
                    .collect()
            }
            Layer::Conv(c) => {
                Error::expect_dim(c.input_shape().len(), self.len())?;
                (0..c.output_shape().len())
                    .map(|j| {
                        let mut e = AffineExpr::constant(n, c.row_bias(j));
                        for (m, w) in c.row_taps(j) {
                            e.add_scaled(&self.exprs[m], w);
                        }
                        e
                    })
                    .collect()
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "{} is not a linear layer",
                    other.kind()
                )))
            }
        };
        Ok(AffineVector { num_vars: n, exprs })
    }

    /// ReLU with a fixed activation pattern: active units pass through,
    /// inactive units become the zero expression.
    pub fn relu_fix(&self, active: &[bool]) -> Result<AffineVector> {
        Error::expect_dim(self.len(), active.len())?;
        let exprs = self
            .exprs
            .iter()
            .zip(active)
            .map(|(e, &on)| {
                if on {
                    e.clone()
                } else {
                    AffineExpr::zero(self.num_vars)
                }
            })
            .collect();
        Ok(AffineVector {
            num_vars: self.num_vars,
            exprs,
        })
    }

    /// Max pooling with a fixed selection: output `j` is the expression of the
    /// `selected[j]`-th member of window `j`.
    pub fn maxpool_fix(&self, pool: &MaxPool, selected: &[usize]) -> Result<AffineVector> {
        Error::expect_dim(pool.input_shape().len(), self.len())?;
        Error::expect_dim(pool.output_shape().len(), selected.len())?;
        let exprs = selected
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                let members = pool.window_members(j);
                members
                    .get(k)
                    .map(|&m| self.exprs[m].clone())
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "selection {k} outside pool window {j} of size {}",
                            members.len()
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AffineVector {
            num_vars: self.num_vars,
            exprs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Dense, Shape3};

    #[test]
    fn identity_dense_keeps_inputs() {
        let d =
            Layer::Dense(Dense::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap());
        let v = AffineVector::identity(2);
        assert_eq!(v.through_linear(&d).unwrap(), v);
    }

    #[test]
    fn hand_expansion() {
        let d = Layer::Dense(Dense::new(vec![vec![2.0, 1.0]], vec![3.0]).unwrap());
        let out = AffineVector::identity(2).through_linear(&d).unwrap();
        assert_eq!(
            out.get(0),
            &AffineExpr {
                coeffs: vec![2.0, 1.0],
                bias: 3.0
            }
        );
    }

    #[test]
    fn relu_fix_rule() {
        let v = AffineVector::identity(1);
        assert_eq!(v.relu_fix(&[true]).unwrap(), v);
        assert_eq!(v.relu_fix(&[false]).unwrap().get(0), &AffineExpr::zero(1));

        let v4 = AffineVector::identity(4);
        let out = v4.relu_fix(&[true, false, false, true]).unwrap();
        assert_eq!(out.get(0), v4.get(0));
        assert_eq!(out.get(1), &AffineExpr::zero(4));
        assert_eq!(out.get(2), &AffineExpr::zero(4));
        assert_eq!(out.get(3), v4.get(3));
        assert!(v4.relu_fix(&[true]).is_err());
    }

    #[test]
    fn maxpool_fix_selects_member() {
        let pool = MaxPool::new(Shape3::new(1, 1, 2), (1, 2), 2).unwrap();
        let v = AffineVector::identity(2);
        assert_eq!(v.maxpool_fix(&pool, &[0]).unwrap().get(0), v.get(0));

        let pool = MaxPool::new(Shape3::new(1, 2, 2), (2, 2), 2).unwrap();
        let v = AffineVector::identity(4);
        assert_eq!(v.maxpool_fix(&pool, &[3]).unwrap().get(0), v.get(3));
        assert!(v.maxpool_fix(&pool, &[4]).is_err());
    }
}
