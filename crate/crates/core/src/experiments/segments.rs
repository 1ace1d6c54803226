use crate::error::{Error, Result};
use crate::foliation::ContinuedFraction;
use crate::teich::{ray_toward, teich_distance, GeodesicLine, TeichPoint};

use super::{csv_string, fmt_opt, require_irrational, ExperimentReport, Lab, Verdict};

/// Sampling step along lines inside the comparison window.
const WINDOW_STEP: f64 = 0.01;

/// Teichmüller distance from `z` to the geodesic segment `[a, b]`.
fn segment_distance(z: TeichPoint, a: TeichPoint, b: TeichPoint) -> f64 {
    if a == b {
        return teich_distance(z, a);
    }
    let line = GeodesicLine::through(a, b);
    let foot = line.project(z);
    let length = teich_distance(a, b);
    if teich_distance(a, foot) <= length && teich_distance(foot, b) <= length {
        teich_distance(z, foot)
    } else {
        teich_distance(z, a).min(teich_distance(z, b))
    }
}

fn on_segment(p: TeichPoint, a: TeichPoint, b: TeichPoint) -> bool {
    let length = teich_distance(a, b);
    teich_distance(a, p) <= length + 1e-12 && teich_distance(p, b) <= length + 1e-12
}

impl Lab {
    /// Segments `s_n` from `x_n` (on the ray toward `f`) to `y_n` (on the
    /// ray toward `g`), both at arclength `n·segment_step` from `i`,
    /// compared with the geodesic line joining the two ideal endpoints
    /// inside a fixed ball around `i`.
    ///
    /// When `f` and `g` name the same number, `y_n` is taken at half the
    /// arclength on the same ray and the segments leave every compact set.
    pub fn segment_accumulation(
        &mut self,
        f: &ContinuedFraction,
        g: &ContinuedFraction,
        n: usize,
    ) -> Result<ExperimentReport> {
        require_irrational(f, "F")?;
        require_irrational(g, "G")?;
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one segment".into()));
        }
        let cfg = self.config.clone();
        let (bf, bg) = (-f.value(), -g.value());
        let same = bf == bg;
        let limit = if same { None } else { Some(GeodesicLine::new(Some(bf), Some(bg))?) };
        let window = limit.map_or(cfg.segment_window, |l| l.distance_to(TeichPoint::BASE) + cfg.segment_window);
        let limit_samples = limit.map(|l| l.sample_near(TeichPoint::BASE, window, WINDOW_STEP));

        let mut rows = Vec::with_capacity(n);
        let mut hausdorff = Vec::with_capacity(n);
        let mut to_base = Vec::with_capacity(n);
        let mut endpoint_error = Vec::with_capacity(n);
        for k in 1..=n {
            let t = k as f64 * cfg.segment_step;
            let x = ray_toward(TeichPoint::BASE, Some(bf), t);
            let y = ray_toward(TeichPoint::BASE, Some(bg), if same { 0.5 * t } else { t });
            let d_base = segment_distance(TeichPoint::BASE, x, y);
            let through = GeodesicLine::through(x, y);
            let err = match (through.from, through.to) {
                (Some(a), Some(b)) if !same => Some((a - bf).abs().max((b - bg).abs())),
                _ => None,
            };
            let h = match (&limit, &limit_samples) {
                (Some(line), Some(on_limit)) => {
                    let on_segment_pts: Vec<TeichPoint> = through
                        .sample_near(TeichPoint::BASE, window, WINDOW_STEP)
                        .into_iter()
                        .filter(|&p| on_segment(p, x, y))
                        .collect();
                    if on_segment_pts.is_empty() {
                        None
                    } else {
                        let a = on_segment_pts.iter().map(|&p| line.distance_to(p)).fold(0.0, f64::max);
                        let b = on_limit.iter().map(|&p| segment_distance(p, x, y)).fold(0.0, f64::max);
                        Some(a.max(b))
                    }
                }
                _ => None,
            };
            rows.push(vec![
                k.to_string(),
                t.to_string(),
                d_base.to_string(),
                fmt_opt(h),
                fmt_opt(err),
            ]);
            hausdorff.push(h);
            to_base.push(d_base);
            endpoint_error.push(err);
        }

        let final_h = *hausdorff.last().expect("n ≥ 1");
        let final_err = *endpoint_error.last().expect("n ≥ 1");
        let final_base = *to_base.last().expect("n ≥ 1");
        let escaping = to_base.windows(2).all(|w| w[1] > w[0]) && final_base > window;
        let converges = final_h.is_some_and(|h| h < cfg.segment_hausdorff_tol)
            && final_err.is_some_and(|e| e < cfg.segment_endpoint_tol);
        let outcome = if converges {
            "converges"
        } else if n > 1 && escaping {
            "escapes"
        } else {
            "inconclusive"
        };
        let expected = if same { "escapes" } else { "converges" };

        let mut report = ExperimentReport::new("segment_accumulation");
        report
            .param("F", f.to_string())
            .param("G", g.to_string())
            .param("n", n)
            .param("segment_step", cfg.segment_step);
        cfg.stamp(&mut report);
        report.source("window_radius", window).source("window_step", WINDOW_STEP);
        report.outcome = outcome.into();
        report.verdict = Verdict::judge(outcome, expected, &["converges", "escapes"]);
        report
            .note("expected", expected)
            .note("limit_from", bf)
            .note("limit_to", if same { None } else { Some(bg) })
            .note("final_hausdorff", final_h)
            .note("final_endpoint_error", final_err)
            .note("final_distance_to_base", final_base);
        report.profile_csv = csv_string(&["n", "t", "distance_to_base", "hausdorff", "endpoint_error"], &rows)?;
        Ok(report)
    }
}
