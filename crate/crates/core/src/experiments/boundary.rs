use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::farey::{FareyGraph, FareyParams};
use crate::foliation::Slope;
use crate::gromov::{convergence_at_infinity, gromov_product, Convergence};
use crate::metric::{Metric, MetricSample};

use super::{csv_string, ExperimentReport, Lab, Verdict};

impl Lab {
    /// Gromov products `⟨α_m|α_n⟩` based at `1/0` in the curve graph for a
    /// sequence of slopes. When they diverge, the slopes should also
    /// converge on the real line, to the slope of the limiting foliation.
    pub fn boundary_map_audit(&mut self, seq: &[Slope]) -> Result<ExperimentReport> {
        if seq.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "need at least 3 slopes, got {}",
                seq.len()
            )));
        }
        let cfg = self.config.clone();
        let bound = seq.iter().map(Slope::height).max().expect("non-empty").max(1);
        if bound > FareyGraph::MAX_BOUND {
            return Err(Error::Widen(format!(
                "slopes reach height {bound}, above the searchable bound {}; shorten the sequence",
                FareyGraph::MAX_BOUND
            )));
        }
        let graph = FareyGraph::new(FareyParams::TORUS, bound)?;

        // Distinct points, basepoint first.
        let mut index: BTreeMap<Slope, usize> = BTreeMap::new();
        let mut points = vec![Slope::INFINITY];
        index.insert(Slope::INFINITY, 0);
        for &s in seq {
            index.entry(s).or_insert_with(|| {
                points.push(s);
                points.len() - 1
            });
        }
        let m = points.len();
        let mut matrix = vec![0.0; m * m];
        for (i, &a) in points.iter().enumerate() {
            let from = graph.distances_from(a)?;
            for (j, &b) in points.iter().enumerate() {
                let d = from.get(b).ok_or_else(|| Error::Unreachable {
                    from: a.to_string(),
                    to: b.to_string(),
                })?;
                matrix[i * m + j] = d as f64;
            }
        }
        let metric = MetricSample::from_matrix(points.iter().map(Slope::to_string).collect(), matrix)?;
        let ids: Vec<usize> = seq.iter().map(|s| index[s]).collect();
        let conv = convergence_at_infinity(&ids, &metric, 0, 2, Some(cfg.boundary_threshold))?;

        let values: Vec<f64> = seq.iter().map(Slope::value).collect();
        let gaps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let final_gap = *gaps.last().expect("≥ 3 slopes");
        let half = gaps.len() / 2;
        let shrinking = gaps[half..].windows(2).all(|w| w[1] <= w[0]);
        let cauchy = final_gap.is_finite() && final_gap < cfg.cauchy_tol && shrinking;
        let limit = cauchy.then(|| *values.last().expect("non-empty"));

        let outcome = match conv.verdict {
            Convergence::Diverging if cauchy => "converges",
            Convergence::Diverging => "diverging without limit",
            Convergence::Bounded => "bounded",
            Convergence::Inconclusive => "inconclusive",
        };
        let verdict = match outcome {
            "converges" | "bounded" => Verdict::Pass,
            "diverging without limit" => Verdict::Fail,
            _ => Verdict::Inconclusive,
        };

        let mut report = ExperimentReport::new("boundary_map_audit");
        report.param("sequence", seq.iter().map(Slope::to_string).collect::<Vec<_>>());
        cfg.stamp(&mut report);
        report
            .source("height_bound", bound)
            .source("threshold", conv.threshold)
            .source("basepoint", Slope::INFINITY.to_string());
        report.outcome = outcome.into();
        report.verdict = verdict;
        report
            .note("profile_rise", conv.rise)
            .note("final_gap", final_gap)
            .note("limit", limit)
            .note("limit_slope", limit.map(|_| seq.last().expect("non-empty").to_string()));

        let rows: Vec<Vec<String>> = seq
            .iter()
            .enumerate()
            .map(|(n, s)| {
                vec![
                    n.to_string(),
                    s.to_string(),
                    values[n].to_string(),
                    metric.dist(0, ids[n]).to_string(),
                    if n + 1 < seq.len() {
                        gromov_product(&metric, ids[n], ids[n + 1], 0).to_string()
                    } else {
                        String::new()
                    },
                    conv.profile.get(n).map_or_else(String::new, |v| v.to_string()),
                ]
            })
            .collect();
        report.profile_csv = csv_string(
            &["n", "slope", "value", "farey_distance_from_base", "product_with_next", "min_product_tail"],
            &rows,
        )?;
        Ok(report)
    }
}
