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

//! Dataset-level robustness statistics.
//!
//! For a threshold `eps`, the adversarial frequency is the fraction of points
//! whose estimated robustness is at most `eps`, and the adversarial severity
//! is the mean robustness over exactly those points. Points without an
//! adversarial example (`rho = +inf`) stay in the denominator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::robustness::RobustnessRecord;

/// Threshold used when none is given, on the 0-255 pixel scale.
pub const DEFAULT_EPSILON: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessStats {
    pub epsilon: f64,
    pub frequency: f64,
    /// `None` when no point falls under the threshold.
    pub severity: Option<f64>,
    pub count_below: usize,
    pub total: usize,
}

pub fn compute_stats(records: &[RobustnessRecord], epsilon: f64) -> Result<RobustnessStats> {
    let rhos: Vec<f64> = records.iter().map(|r| r.rho_hat).collect();
    stats_from_rhos(&rhos, epsilon)
}

pub fn stats_from_rhos(rhos: &[f64], epsilon: f64) -> Result<RobustnessStats> {
    if rhos.is_empty() {
        return Err(Error::InvalidArgument("no records to aggregate".into()));
    }
    if epsilon.is_nan() || epsilon <= 0.0 || epsilon.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let below: Vec<f64> = rhos.iter().copied().filter(|&r| r <= epsilon).collect();
    let severity = (!below.is_empty()).then(|| below.iter().sum::<f64>() / below.len() as f64);
    Ok(RobustnessStats {
        epsilon,
        frequency: below.len() as f64 / rhos.len() as f64,
        severity,
        count_below: below.len(),
        total: rhos.len(),
    })
}

/// Cumulative count of points with `rho <= epsilon`, as a step function
/// sampled at each distinct finite robustness value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCurve {
    pub points: Vec<(f64, usize)>,
}

impl RobustnessCurve {
    pub fn count_at(&self, epsilon: f64) -> usize {
        let k = self.points.partition_point(|&(e, _)| e <= epsilon);
        if k == 0 {
            0
        } else {
            self.points[k - 1].1
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::InvalidArgument(format!("writing curve: {e}"));
        w.write_record(["epsilon", "count"]).map_err(csv_err)?;
        for (e, c) in &self.points {
            w.write_record([e.to_string(), c.to_string()])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("curve", e))?;
        Ok(())
    }
}

pub fn compute_curve(records: &[RobustnessRecord]) -> RobustnessCurve {
    let rhos: Vec<f64> = records.iter().map(|r| r.rho_hat).collect();
    curve_from_rhos(&rhos)
}

pub fn curve_from_rhos(rhos: &[f64]) -> RobustnessCurve {
    let mut finite: Vec<f64> = rhos.iter().copied().filter(|r| r.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let mut points: Vec<(f64, usize)> = Vec::new();
    for (i, r) in finite.into_iter().enumerate() {
        match points.last_mut() {
            Some(last) if last.0 == r => last.1 = i + 1,
            _ => points.push((r, i + 1)),
        }
    }
    RobustnessCurve { points }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_and_severity() {
        let s = stats_from_rhos(&[5.0, 25.0, 10.0, 30.0], 20.0).unwrap();
        assert_eq!(s.frequency, 0.5);
        assert_eq!(s.severity, Some(7.5));
        assert_eq!((s.count_below, s.total), (2, 4));
    }

    #[test]
    fn infinite_rho_never_counts() {
        let s = stats_from_rhos(&[f64::INFINITY; 3], 20.0).unwrap();
        assert_eq!(s.frequency, 0.0);
        assert_eq!(s.severity, None);
        assert_eq!(s.total, 3);
    }

    #[test]
    fn rejects_empty_and_bad_epsilon() {
        assert!(stats_from_rhos(&[], 20.0).is_err());
        assert!(stats_from_rhos(&[1.0], 0.0).is_err());
        assert!(stats_from_rhos(&[1.0], f64::NAN).is_err());
    }

    #[test]
    fn threshold_is_inclusive() {
        assert_eq!(stats_from_rhos(&[20.0], 20.0).unwrap().count_below, 1);
    }

    #[test]
    fn curve_steps() {
        let c = curve_from_rhos(&[5.0, 25.0, 10.0, f64::INFINITY]);
        assert_eq!(c.points, vec![(5.0, 1), (10.0, 2), (25.0, 3)]);
        assert_eq!(c.count_at(4.9), 0);
        assert_eq!(c.count_at(10.0), 2);
        assert_eq!(c.count_at(1e9), 3);
        assert!(curve_from_rhos(&[f64::INFINITY]).points.is_empty());
    }

    #[test]
    fn duplicate_values_merge() {
        let c = curve_from_rhos(&[1.0, 1.0, 2.0]);
        assert_eq!(c.points, vec![(1.0, 2), (2.0, 3)]);
    }

    #[test]
    fn curve_csv() {
        let mut buf = Vec::new();
        curve_from_rhos(&[0.5, 2.0]).write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epsilon,count\n0.5,1\n2,2\n"
        );
    }
}
