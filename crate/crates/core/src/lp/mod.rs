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

//! Linear programs, a two-phase primal simplex solver, and lazy constraint
//! generation on top of it.

mod lazy;
mod simplex;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lazy::{lazy_solve, LazyStats};
pub use simplex::simplex_solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

/// `coeffs . z (relation) rhs`
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        LinearConstraint {
            coeffs,
            relation,
            rhs,
        }
    }

    /// Amount by which `z` violates the constraint (zero when satisfied).
    pub fn violation(&self, z: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(z).map(|(a, v)| a * v).sum();
        match self.relation {
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VarBounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl VarBounds {
    pub const FREE: VarBounds = VarBounds {
        lower: None,
        upper: None,
    };
    pub const NONNEGATIVE: VarBounds = VarBounds {
        lower: Some(0.0),
        upper: None,
    };
}

/// Minimize `objective . z` subject to `constraints` and per-variable bounds.
/// Variables are free unless bounded.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    num_vars: usize,
    objective: Vec<f64>,
    constraints: Vec<LinearConstraint>,
    bounds: Vec<VarBounds>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            num_vars,
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            bounds: vec![VarBounds::FREE; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[VarBounds] {
        &self.bounds
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> Result<()> {
        Error::expect_dim(self.num_vars, objective.len())?;
        if !objective.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("LP objective"));
        }
        self.objective = objective;
        Ok(())
    }

    pub fn set_bounds(&mut self, var: usize, bounds: VarBounds) -> Result<()> {
        if var >= self.num_vars {
            return Err(Error::InvalidArgument(format!("no variable {var}")));
        }
        if let (Some(l), Some(u)) = (bounds.lower, bounds.upper) {
            if l > u {
                return Err(Error::InvalidArgument(format!(
                    "empty bounds [{l}, {u}] on variable {var}"
                )));
            }
        }
        if bounds.lower.is_some_and(|v| !v.is_finite())
            || bounds.upper.is_some_and(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("LP bounds"));
        }
        self.bounds[var] = bounds;
        Ok(())
    }

    pub fn add_constraint(&mut self, c: LinearConstraint) -> Result<()> {
        Error::expect_dim(self.num_vars, c.coeffs.len())?;
        if !c.rhs.is_finite() || !c.coeffs.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("LP constraint"));
        }
        self.constraints.push(c);
        Ok(())
    }

    /// Largest violation of any constraint or bound at `z`.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(z));
        let bounds = self.bounds.iter().zip(z).map(|(b, &v)| {
            let lo = b.lower.map_or(0.0, |l| (l - v).max(0.0));
            let hi = b.upper.map_or(0.0, |u| (v - u).max(0.0));
            lo.max(hi)
        });
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable assignment; empty unless optimal.
    pub z: Vec<f64>,
    pub objective_value: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Smallest magnitude accepted as a pivot element.
    pub pivot_tol: f64,
    /// Allowed constraint violation of a reported optimum.
    pub feas_tol: f64,
    /// Violation above which the lazy loop pulls a pool constraint in.
    pub lazy_tol: f64,
    pub max_pivots: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            pivot_tol: 1e-9,
            feas_tol: 1e-7,
            lazy_tol: 1e-7,
            max_pivots: 200_000,
        }
    }
}

pub(crate) fn duration_secs<S: serde::Serializer>(
    d: &Duration,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

pub(crate) fn secs_duration<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Duration, D::Error> {
    let secs = f64::deserialize(d)?;
    Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
}
