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

//! Dense-tableau two-phase primal simplex with Bland's anti-cycling rule.
//!
//! The problem is first rewritten over nonnegative columns: lower-bounded
//! variables are shifted, upper-only variables are negated and free variables
//! are split into a positive and a negative part. Rows get a slack, a surplus
//! plus artificial, or an artificial column depending on their relation.

use super::{LpProblem, LpSolution, LpStatus, Relation, SolverOptions};

#[derive(Debug, Clone, Copy)]
enum ColumnMap {
    /// `z = offset + y`
    Shifted { col: usize, offset: f64 },
    /// `z = offset - y`
    Negated { col: usize, offset: f64 },
    /// `z = y_pos - y_neg`
    Split { pos: usize, neg: usize },
}

struct StandardRow {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

struct Tableau {
    /// Constraint rows, then the phase-2 and phase-1 objective rows.
    data: Vec<f64>,
    stride: usize,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    active: Vec<bool>,
    artificial: Vec<bool>,
    /// Constraint rows before any pivot, for refining the final basic solution.
    original: Vec<f64>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.stride + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.stride + self.cols]
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let stride = self.stride;
        let piv = self.at(r, s);
        let (before, rest) = self.data.split_at_mut(r * stride);
        let (prow, after) = rest.split_at_mut(stride);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        prow[s] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[s];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[s] = 0.0;
            }
        };
        before.chunks_exact_mut(stride).for_each(eliminate);
        after.chunks_exact_mut(stride).for_each(eliminate);
        self.basis[r] = s;
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

fn build(p: &LpProblem) -> (Tableau, Vec<ColumnMap>) {
    let mut maps = Vec::with_capacity(p.num_vars());
    let mut ncols = 0;
    let mut bound_rows = Vec::new();
    for b in p.bounds() {
        let map = match (b.lower, b.upper) {
            (Some(l), u) => {
                if let Some(u) = u {
                    bound_rows.push((ncols, u - l));
                }
                ColumnMap::Shifted {
                    col: ncols,
                    offset: l,
                }
            }
            (None, Some(u)) => ColumnMap::Negated {
                col: ncols,
                offset: u,
            },
            (None, None) => {
                ncols += 1;
                ColumnMap::Split {
                    pos: ncols - 1,
                    neg: ncols,
                }
            }
        };
        ncols += 1;
        maps.push(map);
    }
    let structural = ncols;

    let mut rows: Vec<StandardRow> = Vec::with_capacity(p.constraints().len() + bound_rows.len());
    for c in p.constraints() {
        let mut coeffs = vec![0.0; structural];
        let mut rhs = c.rhs;
        for (a, map) in c.coeffs.iter().zip(&maps) {
            if *a == 0.0 {
                continue;
            }
            match *map {
                ColumnMap::Shifted { col, offset } => {
                    coeffs[col] += a;
                    rhs -= a * offset;
                }
                ColumnMap::Negated { col, offset } => {
                    coeffs[col] -= a;
                    rhs -= a * offset;
                }
                ColumnMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push(StandardRow {
            coeffs,
            relation: c.relation,
            rhs,
        });
    }
    for (col, width) in bound_rows {
        let mut coeffs = vec![0.0; structural];
        coeffs[col] = 1.0;
        rows.push(StandardRow {
            coeffs,
            relation: Relation::Le,
            rhs: width,
        });
    }

    // Orient every row so its right-hand side is nonnegative, preferring a
    // slack-covered `<=` row whenever the sign allows it.
    for row in &mut rows {
        let flip = match row.relation {
            Relation::Le => row.rhs < 0.0,
            Relation::Ge => row.rhs <= 0.0,
            Relation::Eq => row.rhs < 0.0,
        };
        if flip {
            row.coeffs.iter_mut().for_each(|v| *v = -*v);
            row.rhs = -row.rhs;
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let extra: usize = rows
        .iter()
        .map(|r| match r.relation {
            Relation::Le | Relation::Eq => 1,
            Relation::Ge => 2,
        })
        .sum();
    let cols = structural + extra;
    let stride = cols + 1;
    let mut data = vec![0.0; (m + 2) * stride];
    let mut basis = vec![0; m];
    let mut artificial = vec![false; cols];
    let mut next = structural;
    for (r, row) in rows.iter().enumerate() {
        let base = r * stride;
        data[base..base + structural].copy_from_slice(&row.coeffs);
        data[base + cols] = row.rhs;
        match row.relation {
            Relation::Le => {
                data[base + next] = 1.0;
                basis[r] = next;
                next += 1;
            }
            Relation::Ge => {
                data[base + next] = -1.0;
                data[base + next + 1] = 1.0;
                artificial[next + 1] = true;
                basis[r] = next + 1;
                next += 2;
            }
            Relation::Eq => {
                data[base + next] = 1.0;
                artificial[next] = true;
                basis[r] = next;
                next += 1;
            }
        }
    }

    // Phase-2 costs. Initial basic columns all have zero cost.
    let obj2 = m * stride;
    for (c, map) in p.objective().iter().zip(&maps) {
        match *map {
            ColumnMap::Shifted { col, .. } => data[obj2 + col] += c,
            ColumnMap::Negated { col, .. } => data[obj2 + col] -= c,
            ColumnMap::Split { pos, neg } => {
                data[obj2 + pos] += c;
                data[obj2 + neg] -= c;
            }
        }
    }

    // Phase-1 reduced costs: minus the sum of rows covered by an artificial.
    let obj1 = (m + 1) * stride;
    for r in 0..m {
        if artificial[basis[r]] {
            for c in 0..stride {
                let v = data[r * stride + c];
                data[obj1 + c] -= v;
            }
        }
    }
    for (c, &is_art) in artificial.iter().enumerate() {
        if is_art {
            data[obj1 + c] = 0.0;
        }
    }

    let original = data[..m * stride].to_vec();
    let tableau = Tableau {
        data,
        stride,
        rows: m,
        cols,
        basis,
        active: vec![true; m],
        artificial,
        original,
    };
    (tableau, maps)
}

fn run_phase(
    t: &mut Tableau,
    obj: usize,
    opts: &SolverOptions,
    pivots: &mut usize,
) -> PhaseOutcome {
    loop {
        // Bland: lowest-index improving column ...
        let entering = (0..t.cols).find(|&c| !t.artificial[c] && t.at(obj, c) < -opts.pivot_tol);
        let Some(s) = entering else {
            return PhaseOutcome::Optimal;
        };
        // ... and among minimum-ratio rows, the lowest-index basic variable.
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..t.rows {
            if !t.active[r] {
                continue;
            }
            let a = t.at(r, s);
            if a <= opts.pivot_tol {
                continue;
            }
            let ratio = t.rhs(r).max(0.0) / a;
            leave = match leave {
                None => Some((r, ratio)),
                Some((br, best)) => {
                    let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                    if ratio < best && !tie || tie && t.basis[r] < t.basis[br] {
                        Some((r, ratio))
                    } else {
                        Some((br, best))
                    }
                }
            };
        }
        let Some((r, _)) = leave else {
            return PhaseOutcome::Unbounded;
        };
        if *pivots >= opts.max_pivots {
            return PhaseOutcome::IterationLimit;
        }
        t.pivot(r, s);
        *pivots += 1;
    }
}

/// Solves `B y_B = b` against the unpivoted rows to strip accumulated
/// round-off from the basic values. Returns `None` if the basis is singular.
fn refine_basic_values(t: &Tableau) -> Option<Vec<f64>> {
    let rows: Vec<usize> = (0..t.rows).filter(|&r| t.active[r]).collect();
    let k = rows.len();
    let mut a = vec![0.0; k * (k + 1)];
    for (i, &r) in rows.iter().enumerate() {
        for (j, &rb) in rows.iter().enumerate() {
            a[i * (k + 1) + j] = t.original[r * t.stride + t.basis[rb]];
        }
        a[i * (k + 1) + k] = t.original[r * t.stride + t.cols];
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| {
            a[x * (k + 1) + col]
                .abs()
                .total_cmp(&a[y * (k + 1) + col].abs())
        })?;
        if a[piv * (k + 1) + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for c in 0..=k {
                a.swap(piv * (k + 1) + c, col * (k + 1) + c);
            }
        }
        for r in col + 1..k {
            let f = a[r * (k + 1) + col] / a[col * (k + 1) + col];
            if f != 0.0 {
                for c in col..=k {
                    a[r * (k + 1) + c] -= f * a[col * (k + 1) + c];
                }
            }
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = a[i * (k + 1) + k];
        for j in i + 1..k {
            s -= a[i * (k + 1) + j] * x[j];
        }
        x[i] = s / a[i * (k + 1) + i];
    }
    Some(x)
}

fn column_values(t: &Tableau, basic: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; t.cols];
    let rows = (0..t.rows).filter(|&r| t.active[r]);
    for (r, v) in rows.zip(basic) {
        y[t.basis[r]] = v.max(0.0);
    }
    y
}

fn map_back(maps: &[ColumnMap], y: &[f64]) -> Vec<f64> {
    maps.iter()
        .map(|m| match *m {
            ColumnMap::Shifted { col, offset } => offset + y[col],
            ColumnMap::Negated { col, offset } => offset - y[col],
            ColumnMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect()
}

/// Minimizes `p` with the two-phase primal simplex method. Deterministic for
/// identical input.
pub fn simplex_solve(p: &LpProblem, opts: &SolverOptions) -> LpSolution {
    let (mut t, maps) = build(p);
    let mut pivots = 0;
    let stop = |status, pivots| LpSolution {
        status,
        z: Vec::new(),
        objective_value: f64::NAN,
        pivots,
    };

    let obj2 = t.rows;
    let obj1 = t.rows + 1;
    let needs_phase1 = t.basis.iter().any(|&b| t.artificial[b]);
    if needs_phase1 {
        match run_phase(&mut t, obj1, opts, &mut pivots) {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::IterationLimit => return stop(LpStatus::IterationLimit, pivots),
            PhaseOutcome::Unbounded => unreachable!("phase 1 is bounded below by zero"),
        }
        let scale = (0..t.rows)
            .map(|r| t.original[r * t.stride + t.cols].abs())
            .fold(1.0, f64::max);
        if -t.rhs(obj1) > opts.feas_tol * scale {
            return stop(LpStatus::Infeasible, pivots);
        }
        // Drive the remaining (zero-valued) artificials out of the basis, or
        // drop their rows when they are linearly dependent on the others.
        for r in 0..t.rows {
            if !t.artificial[t.basis[r]] {
                continue;
            }
            match (0..t.cols).find(|&c| !t.artificial[c] && t.at(r, c).abs() > opts.pivot_tol) {
                Some(s) => {
                    t.pivot(r, s);
                    pivots += 1;
                }
                None => t.active[r] = false,
            }
        }
    }

    match run_phase(&mut t, obj2, opts, &mut pivots) {
        PhaseOutcome::Optimal => {}
        PhaseOutcome::Unbounded => return stop(LpStatus::Unbounded, pivots),
        PhaseOutcome::IterationLimit => return stop(LpStatus::IterationLimit, pivots),
    }

    let basic: Vec<f64> = (0..t.rows)
        .filter(|&r| t.active[r])
        .map(|r| t.rhs(r))
        .collect();
    let mut z = map_back(&maps, &column_values(&t, &basic));
    if p.max_violation(&z) > opts.feas_tol {
        if let Some(refined) = refine_basic_values(&t) {
            let candidate = map_back(&maps, &column_values(&t, &refined));
            if p.max_violation(&candidate) < p.max_violation(&z) {
                z = candidate;
            }
        }
    }
    let objective_value = p.objective().iter().zip(&z).map(|(c, v)| c * v).sum();
    LpSolution {
        status: LpStatus::Optimal,
        z,
        objective_value,
        pivots,
    }
}
