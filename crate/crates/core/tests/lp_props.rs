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

mod common;

use proptest::prelude::*;
use rand::Rng;
use robustlp::lp::{lazy_solve, simplex_solve, LinearConstraint, Relation, VarBounds};
use robustlp::robustness::region_lp;
use robustlp::synth::random_dense_net;
use robustlp::*;

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (v, pv) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= f * pv;
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum of `c.z` over a bounded polytope by enumerating every basic
/// solution; `None` when infeasible.
fn vertex_oracle(c: &[f64], rows: &[(Vec<f64>, f64)], bound: f64) -> Option<f64> {
    let n = c.len();
    // Everything as a.z <= b, including the box.
    let mut all: Vec<(Vec<f64>, f64)> = rows.to_vec();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        all.push((e.clone(), bound));
        e[i] = -1.0;
        all.push((e, bound));
    }
    let m = all.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = idx.iter().map(|&i| all[i].0.clone()).collect();
        let b = idx.iter().map(|&i| all[i].1).collect();
        if let Some(z) = solve_square(a, b) {
            let feasible = all
                .iter()
                .all(|(a, b)| a.iter().zip(&z).map(|(x, y)| x * y).sum::<f64>() <= b + 1e-9);
            if feasible {
                let v: f64 = c.iter().zip(&z).map(|(x, y)| x * y).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < m - n + k {
                idx[k] += 1;
                for j in k + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.random_range(1..=3);
        let m = rng.random_range(0..=5);
        let bound = 5.0;
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let rows: Vec<(Vec<f64>, f64)> = (0..m)
            .map(|_| ((0..n).map(|_| rng.random_range(-2.0..2.0)).collect(), rng.random_range(-3.0..3.0)))
            .collect();
        let mut p = LpProblem::new(n);
        p.set_objective(c.clone()).unwrap();
        for i in 0..n {
            p.set_bounds(i, VarBounds { lower: Some(-bound), upper: Some(bound) }).unwrap();
        }
        for (k, (a, b)) in rows.iter().enumerate() {
            // Mix relations: a.z <= b is also -a.z >= -b.
            let c = if k % 2 == 0 {
                LinearConstraint::new(a.clone(), Relation::Le, *b)
            } else {
                LinearConstraint::new(a.iter().map(|v| -v).collect(), Relation::Ge, -b)
            };
            p.add_constraint(c).unwrap();
        }
        let sol = simplex_solve(&p, &SolverOptions::default());
        match vertex_oracle(&c, &rows, bound) {
            Some(v) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective_value - v).abs() < 1e-6, "{} vs {}", sol.objective_value, v);
                prop_assert!(p.max_violation(&sol.z) <= 1e-7);
            }
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
        }
    }

    #[test]
    fn equality_rows_match_oracle(seed in any::<u64>()) {
        // a.z = b written as two inequalities for the oracle.
        let mut rng = common::rng(seed);
        let n = 3;
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b = rng.random_range(-2.0..2.0);
        let mut p = LpProblem::new(n);
        p.set_objective(c.clone()).unwrap();
        for i in 0..n {
            p.set_bounds(i, VarBounds { lower: Some(-5.0), upper: Some(5.0) }).unwrap();
        }
        p.add_constraint(LinearConstraint::new(a.clone(), Relation::Eq, b)).unwrap();
        let rows = vec![(a.clone(), b), (a.iter().map(|v| -v).collect(), -b)];
        let sol = simplex_solve(&p, &SolverOptions::default());
        let v = vertex_oracle(&c, &rows, 5.0);
        match v {
            Some(v) => prop_assert!((sol.objective_value - v).abs() < 1e-6),
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
        }
    }
}

#[test]
fn lazy_equals_full_on_certification_lps() {
    let mut rng = common::rng(21);
    let opts = SolverOptions::default();
    let mut finite = 0;
    for k in 0..100 {
        let n = 2 + k % 5;
        let net = random_dense_net(&mut rng, n, &[12, 8], 3).unwrap();
        let seed = common::random_point(&mut rng, n, 2.0);
        let region = extract_region(&net, &seed).unwrap();
        let target = net.second_label(&seed).unwrap();
        let lp = region_lp(&region, target, (k % 3) as f64, None).unwrap();
        let (lazy, stats) = lazy_solve(&lp.core, &lp.pool, &opts);
        let full = simplex_solve(&lp.full(), &opts);
        assert_eq!(lazy.status, full.status, "instance {k}");
        if full.is_optimal() {
            finite += 1;
            assert!(
                (lazy.objective_value - full.objective_value).abs() <= 1e-6,
                "instance {k}"
            );
            assert!(lp.full().max_violation(&lazy.z) <= 1e-6);
        }
        assert!(stats.constraints_added <= lp.pool.len());
    }
    assert!(finite > 20);
}

#[test]
fn margin_is_monotone() {
    let mut rng = common::rng(4);
    for k in 0..60 {
        let net = common::tiny_net(&mut rng, k, 8);
        let seed = common::random_point(&mut rng, net.input_dim(), 2.0);
        let mut last = 0.0;
        for margin in [0.0, 0.5, 1.0, 3.0] {
            let opts = CertifyOptions {
                margin,
                ..Default::default()
            };
            let rho = pointwise_robustness(&net, &seed, &opts).unwrap().rho_hat;
            assert!(rho >= last - 1e-9, "instance {k}: {rho} < {last}");
            last = rho;
        }
    }
}

#[test]
fn all_targets_never_exceed_second() {
    let mut rng = common::rng(9);
    for k in 0..60 {
        let net = random_dense_net(&mut rng, 3, &[6], 4).unwrap();
        let seed = common::random_point(&mut rng, 3, 2.0);
        let second = pointwise_robustness(&net, &seed, &CertifyOptions::default()).unwrap();
        let all = pointwise_robustness(
            &net,
            &seed,
            &CertifyOptions {
                target: TargetPolicy::All,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(all.rho_hat <= second.rho_hat + 1e-9, "instance {k}");
    }
}

#[test]
fn respecting_domain_never_lowers_rho() {
    let mut rng = common::rng(12);
    for k in 0..60 {
        let net = random_dense_net(&mut rng, 2, &[6], 2)
            .unwrap()
            .with_input_domain(Some(Domain::new(-1.0, 1.0).unwrap()));
        let seed = common::random_point(&mut rng, 2, 1.0);
        let free = pointwise_robustness(&net, &seed, &CertifyOptions::default()).unwrap();
        let boxed = pointwise_robustness(
            &net,
            &seed,
            &CertifyOptions {
                respect_domain: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(boxed.rho_hat >= free.rho_hat - 1e-9, "instance {k}");
        if let Some(x) = &boxed.adversarial {
            assert!(x.iter().all(|v| (-1.0 - 1e-9..=1.0 + 1e-9).contains(v)));
        }
    }
}
