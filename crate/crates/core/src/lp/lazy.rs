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

//! Lazy constraint generation: solve over a small working set, then pull in
//! every pool constraint the incumbent violates, until none is violated.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{simplex_solve, LinearConstraint, LpProblem, LpSolution, LpStatus, SolverOptions};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LazyStats {
    pub outer_iterations: usize,
    pub constraints_added: usize,
    /// Size of the pool the added constraints were drawn from.
    pub pool_size: usize,
    /// Constraints in the last LP solved (core plus added).
    pub final_active_count: usize,
    pub total_pivots: usize,
    #[serde(
        rename = "wall_time_s",
        serialize_with = "super::duration_secs",
        deserialize_with = "super::secs_duration"
    )]
    pub wall_time: Duration,
}

impl LazyStats {
    pub(crate) fn absorb(&mut self, other: &LazyStats) {
        self.outer_iterations += other.outer_iterations;
        self.constraints_added += other.constraints_added;
        self.pool_size = self.pool_size.max(other.pool_size);
        self.final_active_count = self.final_active_count.max(other.final_active_count);
        self.total_pivots += other.total_pivots;
        self.wall_time += other.wall_time;
    }
}

/// Minimizes `core` subject additionally to every constraint in `pool`,
/// adding pool constraints only once the incumbent violates them.
///
/// The working set always relaxes the full problem, so an infeasible working
/// set proves the full problem infeasible and a working-set optimum that
/// satisfies the whole pool is optimal for the full problem.
pub fn lazy_solve(
    core: &LpProblem,
    pool: &[LinearConstraint],
    opts: &SolverOptions,
) -> (LpSolution, LazyStats) {
    let start = Instant::now();
    let mut working = core.clone();
    let mut included = vec![false; pool.len()];
    let mut stats = LazyStats {
        pool_size: pool.len(),
        ..LazyStats::default()
    };
    loop {
        stats.outer_iterations += 1;
        let solution = simplex_solve(&working, opts);
        stats.total_pivots += solution.pivots;
        stats.final_active_count = working.constraints().len();

        let violated: Vec<usize> = match solution.status {
            LpStatus::Optimal => (0..pool.len())
                .filter(|&i| !included[i] && pool[i].violation(&solution.z) > opts.lazy_tol)
                .collect(),
            // A relaxation may be unbounded while the full problem is not;
            // fall back to the complete constraint set.
            LpStatus::Unbounded => (0..pool.len()).filter(|&i| !included[i]).collect(),
            LpStatus::Infeasible | LpStatus::IterationLimit => Vec::new(),
        };
        if violated.is_empty() {
            stats.wall_time = start.elapsed();
            return (solution, stats);
        }
        for i in violated {
            included[i] = true;
            stats.constraints_added += 1;
            working
                .add_constraint(pool[i].clone())
                .expect("pool constraints match the core dimension");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Relation, VarBounds};

    #[test]
    fn empty_pool_matches_direct_solve() {
        let mut p = LpProblem::new(2);
        p.set_objective(vec![0.0, 1.0]).unwrap();
        p.set_bounds(1, VarBounds::NONNEGATIVE).unwrap();
        p.add_constraint(LinearConstraint::new(vec![1.0, 0.0], Relation::Le, -2.0))
            .unwrap();
        p.add_constraint(LinearConstraint::new(vec![1.0, 1.0], Relation::Ge, 0.0))
            .unwrap();
        let opts = SolverOptions::default();
        let (lazy, stats) = lazy_solve(&p, &[], &opts);
        assert_eq!(lazy, simplex_solve(&p, &opts));
        assert_eq!(stats.outer_iterations, 1);
        assert_eq!(stats.constraints_added, 0);
    }

    #[test]
    fn pulls_in_violated_constraints() {
        // min x with x >= 0 core; pool x >= 1, x >= 3, x <= 10
        let mut p = LpProblem::new(1);
        p.set_objective(vec![1.0]).unwrap();
        p.set_bounds(0, VarBounds::NONNEGATIVE).unwrap();
        let pool = vec![
            LinearConstraint::new(vec![1.0], Relation::Ge, 1.0),
            LinearConstraint::new(vec![1.0], Relation::Ge, 3.0),
            LinearConstraint::new(vec![1.0], Relation::Le, 10.0),
        ];
        let (s, stats) = lazy_solve(&p, &pool, &SolverOptions::default());
        assert!((s.objective_value - 3.0).abs() < 1e-12);
        assert_eq!(stats.constraints_added, 2);
        assert_eq!(stats.outer_iterations, 2);
    }

    #[test]
    fn unbounded_relaxation_falls_back_to_full_pool() {
        let p = {
            let mut p = LpProblem::new(1);
            p.set_objective(vec![1.0]).unwrap();
            p
        };
        let pool = vec![LinearConstraint::new(vec![1.0], Relation::Ge, -4.0)];
        let (s, _) = lazy_solve(&p, &pool, &SolverOptions::default());
        assert!((s.objective_value + 4.0).abs() < 1e-12);
    }
}
