use crate::error::{Error, Result};
use crate::foliation::ContinuedFraction;
use crate::net::Patch;
use crate::teich::TeichPoint;

use super::{csv_string, require_irrational, ExperimentReport, Lab, Verdict};

impl Lab {
    /// Electric Gromov products `⟨x_n|y_n⟩` based at `i` for points
    /// `x_n`, `y_n` at arclength `n·ray_step` along the rays toward `f`
    /// and `g`.
    ///
    /// Distinct irrationals should give a bounded (plateaued) profile. When
    /// `f` and `g` are the same number, `y_n` is sampled at three quarters
    /// of the spacing on the same ray and the profile should grow.
    pub fn separation_profile(
        &mut self,
        f: &ContinuedFraction,
        g: &ContinuedFraction,
        n: usize,
    ) -> Result<ExperimentReport> {
        require_irrational(f, "F")?;
        require_irrational(g, "G")?;
        if n < 4 {
            return Err(Error::InvalidParameter(format!("need at least 4 samples, got {n}")));
        }
        let cfg = self.config.clone();
        let (vf, vg) = (f.value(), g.value());
        let same = vf == vg;
        let step_x = cfg.ray_step;
        let step_y = if same { 0.75 * cfg.ray_step } else { cfg.ray_step };
        let rows_x = cfg.rows_per(step_x)?;
        let rows_y = cfg.rows_per(step_y)?;

        let mut patches = vec![Patch::Tube {
            start: TeichPoint::BASE,
            toward: Some(-vf),
            length: n as f64 * step_x,
            radius: cfg.tube_radius,
        }];
        if !same {
            patches.push(Patch::Tube {
                start: TeichPoint::BASE,
                toward: Some(-vg),
                length: n as f64 * step_y,
                radius: cfg.tube_radius,
            });
        }
        let patch_y = patches.len() - 1;
        let cached = self.net(&patches)?;
        let net = &cached.net;
        let sp = &cached.electric;
        let base = net.axis_node(0, 0.0)?;
        let from_base = sp.distances_from(base)?;

        let mut products = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        let mut envelope = f64::NEG_INFINITY;
        let mut envelopes = Vec::with_capacity(n);
        for k in 1..=n {
            let x = net.axis_node(0, (k * rows_x) as f64 * cfg.spacing)?;
            let y = net.axis_node(patch_y, (k * rows_y) as f64 * cfg.spacing)?;
            let dxy = sp.distances_from(x)?[y];
            let p = 0.5 * (from_base[x] + from_base[y] - dxy);
            envelope = envelope.max(p);
            products.push(p);
            envelopes.push(envelope);
            rows.push(vec![
                k.to_string(),
                from_base[x].to_string(),
                from_base[y].to_string(),
                dxy.to_string(),
                p.to_string(),
                envelope.to_string(),
            ]);
        }
        let quarter = (n / 4).max(1);
        let tail_slope = (envelopes[n - 1] - envelopes[n - 1 - quarter]) / quarter as f64;
        let plateau = tail_slope < cfg.plateau_slope;
        let outcome = if plateau { "separated" } else { "joined" };
        let expected = if same { "joined" } else { "separated" };

        let mut report = ExperimentReport::new("separation_profile");
        report
            .param("F", f.to_string())
            .param("G", g.to_string())
            .param("n", n)
            .param("ray_step", cfg.ray_step);
        cfg.stamp(&mut report);
        report
            .source("net_nodes", net.len())
            .source("net_edges", net.edges().len())
            .source("cones", sp.cones().len());
        report.outcome = outcome.into();
        report.verdict = Verdict::judge(outcome, expected, &["separated", "joined"]);
        report
            .note("expected", expected)
            .note("same_target", same)
            .note("plateau_level", envelopes[n - 1])
            .note("last_quarter_slope", tail_slope)
            .note("final_product", products[n - 1]);
        report.profile_csv = csv_string(&["n", "d_el_base_x", "d_el_base_y", "d_el_x_y", "product", "envelope"], &rows)?;
        Ok(report)
    }
}
