//! Proposition-level experiments on the torus model. Each one returns an
//! [`ExperimentReport`] carrying its verdict, the raw profile and enough
//! provenance to rerun it.

mod boundary;
mod qi;
mod ray;
mod segments;
mod separation;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::electric::ElectricSpace;
use crate::error::{Error, Result};
use crate::foliation::ContinuedFraction;
use crate::net::{HyperbolicNet, NetParams, Patch};

pub use qi::QiPart;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Process exit code: 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    /// Pass when `outcome` is `expected`, fail when it is one of the
    /// definite alternatives, inconclusive otherwise.
    fn judge(outcome: &str, expected: &str, definite: &[&str]) -> Verdict {
        if outcome == expected {
            Verdict::Pass
        } else if definite.contains(&outcome) {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub parameters: BTreeMap<String, Value>,
    pub verdict: Verdict,
    /// What the run showed, e.g. `diverging` or `separated`.
    pub outcome: String,
    pub summary: BTreeMap<String, Value>,
    /// Raw profile as CSV with a header row.
    pub profile_csv: String,
    pub provenance: BTreeMap<String, Value>,
}

impl ExperimentReport {
    fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            parameters: BTreeMap::new(),
            verdict: Verdict::Inconclusive,
            outcome: String::new(),
            summary: BTreeMap::new(),
            profile_csv: String::new(),
            provenance: BTreeMap::new(),
        }
    }

    fn param(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.parameters.insert(key.into(), to_value(v));
        self
    }

    fn note(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.summary.insert(key.into(), to_value(v));
        self
    }

    fn source(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.provenance.insert(key.into(), to_value(v));
        self
    }

    /// Pretty JSON; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn summary_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Thresholds and discretization shared by all experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabConfig {
    pub epsilon: f64,
    /// Teichmüller spacing of net rows.
    pub spacing: f64,
    pub neighbor_factor: f64,
    /// Teichmüller radius of the tubes around rays and segments.
    pub tube_radius: f64,
    /// Arclength between ray samples; a multiple of `spacing`.
    pub ray_step: f64,
    /// Only thin regions of slopes with at most this denominator are coned.
    pub cone_denominator: i64,
    pub min_cone_crossings: usize,
    pub min_final_distance: f64,
    pub bounded_oscillation: f64,
    /// Largest last-quarter slope (per step) of a plateaued envelope.
    pub plateau_slope: f64,
    /// Arclength between successive segment endpoints.
    pub segment_step: f64,
    /// Margin added to the limit line's distance from `i` for the
    /// comparison window.
    pub segment_window: f64,
    pub segment_endpoint_tol: f64,
    pub segment_hausdorff_tol: f64,
    /// Rise of the Farey Gromov-product profile that counts as diverging.
    pub boundary_threshold: f64,
    /// Final gap between successive slope values for a Cauchy verdict.
    pub cauchy_tol: f64,
    pub qi_window: (f64, f64),
    pub qi_ratio: f64,
    pub qi_geodesics: usize,
    pub qi_scale: f64,
    pub seed: u64,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            spacing: 0.0625,
            neighbor_factor: 3.5,
            tube_radius: 1.0,
            ray_step: 0.25,
            cone_denominator: 1_000_000,
            min_cone_crossings: 5,
            min_final_distance: 5.0,
            bounded_oscillation: 1.0,
            plateau_slope: 0.01,
            segment_step: 1.0,
            segment_window: 1.0,
            segment_endpoint_tol: 1e-6,
            segment_hausdorff_tol: 1e-3,
            boundary_threshold: 2.0,
            cauchy_tol: 1e-5,
            qi_window: (-1.0, 1.0),
            qi_ratio: 1.5,
            qi_geodesics: 10,
            qi_scale: 1.0,
            seed: 0,
        }
    }
}

impl LabConfig {
    fn net_params(&self) -> NetParams {
        NetParams {
            spacing: self.spacing,
            neighbor_factor: self.neighbor_factor,
        }
    }

    /// Number of net rows in one step of `step`.
    fn rows_per(&self, step: f64) -> Result<usize> {
        let r = step / self.spacing;
        if step > 0.0 && (r - r.round()).abs() < 1e-9 && r.round() >= 1.0 {
            Ok(r.round() as usize)
        } else {
            Err(Error::InvalidParameter(format!(
                "step {step} must be a positive multiple of the net spacing {}",
                self.spacing
            )))
        }
    }

    fn stamp(&self, report: &mut ExperimentReport) {
        report
            .source("epsilon", self.epsilon)
            .source("grid_spacing", self.spacing)
            .source("neighbor_factor", self.neighbor_factor)
            .source("tube_radius", self.tube_radius)
            .source("cone_denominator", self.cone_denominator)
            .source("seed", self.seed);
    }
}

/// A net together with its electric space.
pub struct CachedNet {
    pub net: HyperbolicNet,
    pub electric: ElectricSpace,
}

/// Runs experiments, reusing nets built for identical parameters.
#[derive(Default)]
pub struct Lab {
    pub config: LabConfig,
    cache: HashMap<String, Arc<CachedNet>>,
}

impl Lab {
    pub fn new(config: LabConfig) -> Self {
        Self {
            config,
            cache: HashMap::new(),
        }
    }

    pub fn cached_nets(&self) -> usize {
        self.cache.len()
    }

    /// Net and electric space for `patches`, keyed by the patches, the
    /// grid, `ε` and the cone denominator bound.
    pub fn net(&mut self, patches: &[Patch]) -> Result<Arc<CachedNet>> {
        let key = serde_json::to_string(&(
            patches,
            self.config.net_params(),
            self.config.epsilon,
            self.config.cone_denominator,
        ))
        .expect("net keys serialize");
        if let Some(hit) = self.cache.get(&key) {
            return Ok(Arc::clone(hit));
        }
        let net = HyperbolicNet::build(patches, self.config.net_params())?;
        let electric = net.electric(self.config.epsilon, self.config.cone_denominator)?;
        let entry = Arc::new(CachedNet { net, electric });
        self.cache.insert(key, Arc::clone(&entry));
        Ok(entry)
    }
}

fn require_irrational(cf: &ContinuedFraction, what: &str) -> Result<()> {
    if cf.is_rational() {
        Err(Error::InvalidParameter(format!(
            "{what} = {cf} is rational; rational targets belong to the ray profile experiment"
        )))
    } else {
        Ok(())
    }
}
