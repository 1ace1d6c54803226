use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::electric::{quasigeodesic_fit_sample, HoroballElectric, QuasigeodesicReport};
use crate::error::{Error, Result};
use crate::farey::{adjacent, FareyGraph, FareyParams};
use crate::foliation::Slope;
use crate::gromov::{quasi_isometry_fit, QIReport};
use crate::metric::MetricSample;
use crate::net::Patch;
use crate::teich::{teich_distance, TeichPoint};

use super::{csv_string, ExperimentReport, Lab, Verdict};

/// Curve-graph versus thin-region comparison for one denominator bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QiPart {
    pub denominator: i64,
    pub slopes: usize,
    pub fit: QIReport,
    /// Largest electric distance between thin regions of adjacent slopes.
    pub max_edge_thin_distance: f64,
}

/// Slopes `p/q` with `q ≤ max_q` and value in `window`, plus `1/0`.
fn window_slopes(max_q: i64, window: (f64, f64)) -> Vec<Slope> {
    let mut out = vec![Slope::INFINITY];
    for q in 1..=max_q {
        let lo = (window.0 * q as f64).ceil() as i64;
        let hi = (window.1 * q as f64).floor() as i64;
        for p in lo..=hi {
            if num_integer::gcd(p, q) == 1 {
                out.push(Slope::new(p, q).expect("q > 0"));
            }
        }
    }
    out.sort();
    out
}

impl Lab {
    /// Fits `(k, μ)` between curve-graph distance and the electric distance
    /// of thin regions, over all slopes with denominator at most
    /// `denominator` in the configured window.
    pub fn qi_part(&mut self, denominator: i64) -> Result<QiPart> {
        if denominator < 1 {
            return Err(Error::InvalidParameter(format!("denominator bound must be ≥ 1, got {denominator}")));
        }
        let cfg = &self.config;
        let slopes = window_slopes(denominator, cfg.qi_window);
        let n = slopes.len();
        let bound = slopes.iter().map(Slope::height).max().expect("contains 1/0").max(1);
        let graph = FareyGraph::new(FareyParams::TORUS, bound)?;
        let electric = HoroballElectric::new(cfg.epsilon, slopes.clone())?;
        let mut farey = vec![0.0; n * n];
        let mut thin = vec![0.0; n * n];
        let mut max_edge = 0.0f64;
        for (i, &a) in slopes.iter().enumerate() {
            let from = graph.distances_from(a)?;
            for (j, &b) in slopes.iter().enumerate() {
                farey[i * n + j] = from.get(b).ok_or_else(|| Error::Unreachable {
                    from: a.to_string(),
                    to: b.to_string(),
                })? as f64;
                thin[i * n + j] = electric.thin_distance(i, j);
                if adjacent(a, b, FareyParams::TORUS) {
                    max_edge = max_edge.max(thin[i * n + j]);
                }
            }
        }
        let labels: Vec<String> = slopes.iter().map(Slope::to_string).collect();
        let d0 = MetricSample::from_matrix(labels.clone(), farey)?;
        let d1 = MetricSample::from_matrix(labels, thin)?;
        let pairs: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, i, j))).collect();
        let fit = if pairs.is_empty() {
            quasi_isometry_fit(&[(0, 0, 0, 0)], &d0, &d1)?
        } else {
            quasi_isometry_fit(&pairs, &d0, &d1)?
        };
        Ok(QiPart {
            denominator,
            slopes: n,
            fit,
            max_edge_thin_distance: max_edge,
        })
    }

    /// Electric quasigeodesic constants at scale `qi_scale` for
    /// `qi_geodesics` random Teichmüller segments.
    fn qi_geodesics(&mut self) -> Result<Vec<(TeichPoint, TeichPoint, QuasigeodesicReport)>> {
        let cfg = self.config.clone();
        let rows = cfg.rows_per(cfg.ray_step)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut out = Vec::with_capacity(cfg.qi_geodesics);
        while out.len() < cfg.qi_geodesics {
            let mut pick = || TeichPoint {
                x: rng.gen_range(-1.0..=1.0),
                y: rng.gen_range(-2.0f64..=1.0).exp(),
            };
            let (z, w) = (pick(), pick());
            let length = teich_distance(z, w);
            if length < 1.0 {
                continue;
            }
            let cached = self.net(&[Patch::segment_tube(z, w, cfg.tube_radius)])?;
            let samples = (length / cfg.ray_step + 1e-9).floor() as usize;
            let path: Vec<usize> = (0..=samples)
                .map(|k| cached.net.axis_node(0, (k * rows) as f64 * cfg.spacing))
                .collect::<Result<_>>()?;
            let fit = quasigeodesic_fit_sample(&cached.electric.sample(&path)?, cfg.qi_scale)?;
            out.push((z, w, fit));
        }
        Ok(out)
    }

    /// Both halves of the quasi-isometry audit for one denominator bound.
    pub fn qi_audit(&mut self, denominator: i64) -> Result<ExperimentReport> {
        let part_a = self.qi_part(denominator)?;
        let part_b = self.qi_geodesics()?;
        let cfg = self.config.clone();
        let mu_b = part_b.iter().map(|(_, _, f)| f.mu).fold(0.0, f64::max);
        let finite = part_a.fit.k.is_finite() && part_a.fit.mu.is_finite() && part_b.iter().all(|(_, _, f)| f.mu.is_finite());

        let mut report = ExperimentReport::new("qi_audit");
        report
            .param("denominator", denominator)
            .param("window", cfg.qi_window)
            .param("geodesics", cfg.qi_geodesics)
            .param("scale", cfg.qi_scale);
        cfg.stamp(&mut report);
        report.outcome = if finite { "finite constants" } else { "unbounded constants" }.into();
        report.verdict = if finite { Verdict::Pass } else { Verdict::Fail };
        report
            .note("slopes", part_a.slopes)
            .note("k", part_a.fit.k)
            .note("mu", part_a.fit.mu)
            .note("fit", &part_a.fit)
            .note("max_edge_thin_distance", part_a.max_edge_thin_distance)
            .note("thin_gap_of_neighbours", (1.0 / cfg.epsilon).ln())
            .note("geodesic_mu_max", mu_b)
            .note("geodesic_mu_over_k", mu_b / part_a.fit.k);
        let rows: Vec<Vec<String>> = part_b
            .iter()
            .enumerate()
            .map(|(i, (z, w, f))| {
                vec![
                    i.to_string(),
                    z.x.to_string(),
                    z.y.to_string(),
                    w.x.to_string(),
                    w.y.to_string(),
                    teich_distance(*z, *w).to_string(),
                    f.k.to_string(),
                    f.mu.to_string(),
                    f.k_at_zero_mu.map_or_else(String::new, |k| k.to_string()),
                ]
            })
            .collect();
        report.profile_csv = csv_string(
            &["geodesic", "x0", "y0", "x1", "y1", "length", "k", "mu", "k_at_zero_mu"],
            &rows,
        )?;
        Ok(report)
    }

    /// Compares the curve-graph fits at two denominator bounds: the
    /// constants should change by at most the factor `qi_ratio`.
    pub fn qi_stability(&mut self, low: i64, high: i64) -> Result<ExperimentReport> {
        let a = self.qi_part(low)?;
        let b = self.qi_part(high)?;
        let cfg = self.config.clone();
        let ratio = |x: f64, y: f64| {
            if x == y {
                1.0
            } else if x.min(y) <= 0.0 {
                f64::INFINITY
            } else {
                x.max(y) / x.min(y)
            }
        };
        let factor = ratio(a.fit.k, b.fit.k).max(ratio(a.fit.mu, b.fit.mu));
        let stable = factor <= cfg.qi_ratio;

        let mut report = ExperimentReport::new("qi_stability");
        report.param("low", low).param("high", high).param("window", cfg.qi_window);
        cfg.stamp(&mut report);
        report.outcome = if stable { "stable" } else { "unstable" }.into();
        report.verdict = if stable { Verdict::Pass } else { Verdict::Fail };
        report
            .note("factor", if factor.is_finite() { Some(factor) } else { None })
            .note("max_factor", cfg.qi_ratio)
            .note("low_fit", &a)
            .note("high_fit", &b);
        let row = |p: &QiPart| {
            vec![
                p.denominator.to_string(),
                p.slopes.to_string(),
                p.fit.k.to_string(),
                p.fit.mu.to_string(),
                p.max_edge_thin_distance.to_string(),
            ]
        };
        report.profile_csv = csv_string(
            &["denominator", "slopes", "k", "mu", "max_edge_thin_distance"],
            &[row(&a), row(&b)],
        )?;
        Ok(report)
    }
}
