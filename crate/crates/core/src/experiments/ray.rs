use crate::error::{Error, Result};
use crate::foliation::ContinuedFraction;
use crate::net::Patch;
use crate::teich::{ford_slope, thin_membership, thin_slope_at, ThinRegion, TeichPoint};

use super::{csv_string, ExperimentReport, Lab, Verdict};

impl Lab {
    /// Electric distance from `i` along the Teichmüller ray toward the
    /// foliation of slope `target`, sampled every `ray_step` up to `t_max`.
    ///
    /// Irrational targets should give a profile that keeps growing as the
    /// ray passes cusp after cusp; rational targets end in one thin region,
    /// where the profile stalls.
    pub fn ray_profile(&mut self, target: &ContinuedFraction, t_max: f64) -> Result<ExperimentReport> {
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("ray length must be non-negative, got {t_max}")));
        }
        let cfg = self.config.clone();
        let rows = cfg.rows_per(cfg.ray_step)?;
        let rational = target.to_slope();
        if let Some(s) = rational {
            if s.q() > cfg.cone_denominator {
                return Err(Error::Widen(format!(
                    "target {s} has denominator above the cone bound {}; rerun with a larger cone denominator",
                    cfg.cone_denominator
                )));
            }
        }
        let toward = match rational {
            Some(s) => s.cusp(),
            None => Some(-target.value()),
        };
        let steps = (t_max / cfg.ray_step + 1e-9).floor() as usize;
        let expected = if rational.is_some() { "bounded" } else { "diverging" };

        let mut report = ExperimentReport::new("ray_profile");
        report
            .param("target", target.to_string())
            .param("T", t_max)
            .param("ray_step", cfg.ray_step);
        cfg.stamp(&mut report);

        let mut times = Vec::with_capacity(steps + 1);
        let mut points = Vec::with_capacity(steps + 1);
        let mut d_el = Vec::with_capacity(steps + 1);
        if steps == 0 {
            times.push(0.0);
            points.push(TeichPoint::BASE);
            d_el.push(0.0);
        } else {
            let patch = Patch::Tube {
                start: TeichPoint::BASE,
                toward,
                length: steps as f64 * cfg.ray_step,
                radius: cfg.tube_radius,
            };
            let cached = self.net(&[patch])?;
            let from = cached.electric.distances_from(cached.net.axis_node(0, 0.0)?)?;
            for k in 0..=steps {
                let t = (k * rows) as f64 * cfg.spacing;
                let node = cached.net.axis_node(0, t)?;
                times.push(t);
                points.push(cached.net.points()[node]);
                d_el.push(from[node]);
            }
            report
                .source("net_nodes", cached.net.len())
                .source("net_edges", cached.net.edges().len())
                .source("cones", cached.electric.cones().len());
        }

        let mut ford = Vec::with_capacity(points.len());
        let mut thin = Vec::with_capacity(points.len());
        for &p in &points {
            ford.push(ford_slope(p)?);
            thin.push(thin_slope_at(p, cfg.epsilon)?);
        }
        let crossings: Vec<usize> = (1..points.len()).filter(|&k| ford[k] != ford[k - 1]).collect();
        let increasing = crossings.windows(2).all(|w| d_el[w[1]] > d_el[w[0]]);
        let last = *d_el.last().expect("profile is non-empty");

        // Tail: from the first sample after which every sample lies in the
        // target's thin region, or the second half for irrational targets.
        let entry = rational.and_then(|s| {
            let region = ThinRegion::new(s, cfg.epsilon).ok()?;
            let inside: Vec<bool> = points.iter().map(|&p| thin_membership(&region, p)).collect();
            let k = inside.iter().rposition(|&b| !b).map_or(0, |k| k + 1);
            (k < points.len()).then_some(k)
        });
        let tail_from = match (rational, entry) {
            (Some(_), Some(k)) => Some(k),
            (Some(_), None) => None,
            (None, _) => Some(points.len() / 2),
        };
        let oscillation = tail_from.map(|k| {
            let tail = &d_el[k..];
            tail.iter().copied().fold(f64::NEG_INFINITY, f64::max) - tail.iter().copied().fold(f64::INFINITY, f64::min)
        });

        let diverging =
            crossings.len() >= cfg.min_cone_crossings && increasing && last > cfg.min_final_distance;
        let bounded = oscillation.is_some_and(|o| o <= cfg.bounded_oscillation);
        let outcome = if diverging {
            "diverging"
        } else if bounded {
            "bounded"
        } else {
            "inconclusive"
        };
        report.outcome = outcome.into();
        report.verdict = if steps == 0 && rational.is_none() {
            Verdict::Inconclusive
        } else {
            Verdict::judge(outcome, expected, &["diverging", "bounded"])
        };
        report
            .note("expected", expected)
            .note("samples", points.len())
            .note("final_d_el", last)
            .note("cone_crossings", crossings.len())
            .note("increasing_across_crossings", increasing)
            .note("tail_oscillation", oscillation)
            .note("thin_entry_time", entry.map(|k| times[k]))
            .note("final_in_target_thin", rational.map(|_| entry.is_some()));

        let rows: Vec<Vec<String>> = (0..points.len())
            .map(|k| {
                vec![
                    times[k].to_string(),
                    points[k].x.to_string(),
                    points[k].y.to_string(),
                    d_el[k].to_string(),
                    ford[k].to_string(),
                    thin[k].map_or_else(String::new, |s| s.to_string()),
                ]
            })
            .collect();
        report.profile_csv = csv_string(&["t", "x", "y", "d_el", "nearest_cusp", "thin"], &rows)?;
        Ok(report)
    }
}
