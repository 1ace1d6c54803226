//! Finite nets in the upper half-plane standing in for Teichmüller space.
//!
//! Points sit on horocyclic rows `log y = r·h` with horizontal spacing
//! `h·y`, so the net is uniform in the hyperbolic metric. A patch is
//! either a coordinate window or a tube of fixed radius around a geodesic
//! ray or segment; tubes are laid out around the imaginary axis and moved
//! into place by a Möbius map, which puts the sampled ray points exactly
//! on net nodes.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::electric::{BaseEdges, Cone, ElectricSpace};
use crate::error::{Error, Result};
use crate::foliation::Slope;
use crate::metric::MetricSample;
use crate::teich::{endpoint_beyond, teich_distance, thin_slope_at, Mobius, TeichPoint};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Patch {
    /// `x_min ≤ x ≤ x_max`, `y_min ≤ y ≤ y_max`.
    Window { x_min: f64, x_max: f64, y_min: f64, y_max: f64 },
    /// Points within Teichmüller distance `radius` of the geodesic leaving
    /// `start` toward the boundary point `toward` (`None` for ∞), for
    /// arclengths in `[-radius, length + radius]`.
    Tube {
        start: TeichPoint,
        toward: Option<f64>,
        length: f64,
        radius: f64,
    },
}

impl Patch {
    /// Tube around the segment from `s` to `t`.
    pub fn segment_tube(s: TeichPoint, t: TeichPoint, radius: f64) -> Patch {
        Patch::Tube {
            start: s,
            toward: endpoint_beyond(s, t),
            length: teich_distance(s, t),
            radius,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    /// Teichmüller distance between neighbouring rows.
    pub spacing: f64,
    /// Points closer than `neighbor_factor · spacing` are joined.
    pub neighbor_factor: f64,
}

impl Default for NetParams {
    fn default() -> Self {
        Self {
            spacing: 0.0625,
            neighbor_factor: 3.5,
        }
    }
}

/// Rows of a tube, keyed by row number, holding the axis node.
#[derive(Clone, Debug)]
struct Axis {
    rows: HashMap<i64, usize>,
}

#[derive(Clone, Debug)]
pub struct HyperbolicNet {
    params: NetParams,
    patches: Vec<Patch>,
    points: Vec<TeichPoint>,
    /// Patch and frame coordinates of each point.
    frame: Vec<(u32, TeichPoint)>,
    maps: Vec<Option<Mobius>>,
    axes: Vec<Option<Axis>>,
    edges: Vec<(usize, usize, f64)>,
}

/// Lowest usable imaginary part; below this the row geometry loses
/// precision in double arithmetic.
pub const MIN_HEIGHT: f64 = 1e-13;

impl HyperbolicNet {
    pub fn build(patches: &[Patch], params: NetParams) -> Result<Self> {
        if !(params.spacing > 0.0 && params.neighbor_factor >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "net spacing must be positive and the neighbour factor at least 1, got {params:?}"
            )));
        }
        if patches.is_empty() {
            return Err(Error::InvalidParameter("a net needs at least one patch".into()));
        }
        // Hyperbolic row step.
        let h = 2.0 * params.spacing;
        let mut net = HyperbolicNet {
            params,
            patches: patches.to_vec(),
            points: Vec::new(),
            frame: Vec::new(),
            maps: Vec::new(),
            axes: Vec::new(),
            edges: Vec::new(),
        };
        for (k, patch) in patches.iter().enumerate() {
            match *patch {
                Patch::Window {
                    x_min,
                    x_max,
                    y_min,
                    y_max,
                } => {
                    if !(x_min <= x_max && y_min > 0.0 && y_min <= y_max) {
                        return Err(Error::InvalidParameter(format!("bad window {patch:?}")));
                    }
                    for r in (y_min.ln() / h).ceil() as i64..=(y_max.ln() / h).floor() as i64 {
                        let y = (r as f64 * h).exp();
                        let step = h * y;
                        for c in (x_min / step).ceil() as i64..=(x_max / step).floor() as i64 {
                            let p = TeichPoint { x: c as f64 * step, y };
                            net.push(k, p, p)?;
                        }
                    }
                    net.maps.push(None);
                    net.axes.push(None);
                }
                Patch::Tube {
                    start,
                    toward,
                    length,
                    radius,
                } => {
                    if !(length >= 0.0 && radius > 0.0) {
                        return Err(Error::InvalidParameter(format!("bad tube {patch:?}")));
                    }
                    let map = Mobius::axis_to(start, toward);
                    let width = (2.0 * radius).sinh();
                    let mut axis = HashMap::new();
                    let lo = (-2.0 * (length + radius) / h).floor() as i64;
                    let hi = (2.0 * radius / h).ceil() as i64;
                    for r in lo..=hi {
                        let y = (r as f64 * h).exp();
                        let cols = (width / h).floor() as i64;
                        for c in -cols..=cols {
                            let canonical = TeichPoint { x: c as f64 * h * y, y };
                            let mut p = map.apply(canonical);
                            if c == 0 {
                                axis.insert(r, net.points.len());
                                if r == 0 {
                                    p = start;
                                }
                            }
                            net.push(k, p, canonical)?;
                        }
                    }
                    net.maps.push(Some(map));
                    net.axes.push(Some(Axis { rows: axis }));
                }
            }
        }
        net.link();
        Ok(net)
    }

    fn push(&mut self, patch: usize, p: TeichPoint, canonical: TeichPoint) -> Result<()> {
        if !(p.y >= MIN_HEIGHT && p.y.is_finite() && p.x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "net point ({}, {}) is below the usable height {MIN_HEIGHT}; shorten the ray or move the window",
                p.x, p.y
            )));
        }
        self.points.push(p);
        self.frame.push((patch as u32, canonical));
        Ok(())
    }

    /// Distance between two nodes, measured in a shared tube frame when
    /// possible for accuracy near the boundary.
    fn node_distance(&self, i: usize, j: usize) -> f64 {
        let (pi, ci) = self.frame[i];
        let (pj, cj) = self.frame[j];
        if pi == pj {
            teich_distance(ci, cj)
        } else {
            teich_distance(self.points[i], self.points[j])
        }
    }

    fn link(&mut self) {
        let rho = 2.0 * self.params.neighbor_factor * self.params.spacing;
        let grid = SpatialHash::new(&self.points, rho);
        let limit = self.params.neighbor_factor * self.params.spacing;
        let mut edges = Vec::new();
        for i in 0..self.points.len() {
            grid.for_each_candidate(self.points[i], |j| {
                if j > i {
                    let d = self.node_distance(i, j);
                    if d <= limit {
                        edges.push((i, j, d));
                    }
                }
            });
        }
        self.edges = edges;
    }

    pub fn params(&self) -> NetParams {
        self.params
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn points(&self) -> &[TeichPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Node on the axis of tube `patch` at arclength `t` from its start.
    /// `t` must be a multiple of the spacing.
    pub fn axis_node(&self, patch: usize, t: f64) -> Result<usize> {
        let axis = self
            .axes
            .get(patch)
            .and_then(|a| a.as_ref())
            .ok_or_else(|| Error::InvalidParameter(format!("patch {patch} is not a tube")))?;
        let steps = t / self.params.spacing;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "arclength {t} is not a multiple of the net spacing {}",
                self.params.spacing
            )));
        }
        let row = -(steps.round() as i64);
        axis.rows.get(&row).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("arclength {t} lies outside tube {patch}"))
        })
    }

    /// Nearest node to `z` within the linking radius.
    pub fn locate(&self, z: TeichPoint) -> Option<usize> {
        let grid = SpatialHash::new(&self.points, 2.0 * self.params.neighbor_factor * self.params.spacing);
        let mut best: Option<(f64, usize)> = None;
        grid.for_each_candidate(z, |j| {
            let d = teich_distance(z, self.points[j]);
            if best.map_or(true, |(b, bj)| d < b || (d == b && j < bj)) {
                best = Some((d, j));
            }
        });
        best.filter(|(d, _)| *d <= self.params.neighbor_factor * self.params.spacing)
            .map(|(_, j)| j)
    }

    /// Net points lying in a thin region of a slope with denominator at
    /// most `max_denominator`, grouped by slope.
    pub fn thin_cones(&self, epsilon: f64, max_denominator: i64) -> Result<BTreeMap<Slope, Vec<usize>>> {
        let mut cones: BTreeMap<Slope, Vec<usize>> = BTreeMap::new();
        for (i, &p) in self.points.iter().enumerate() {
            if let Some(s) = thin_slope_at(p, epsilon)? {
                if s.q() <= max_denominator {
                    cones.entry(s).or_default().push(i);
                }
            }
        }
        Ok(cones)
    }

    /// Metric sample of the net points under the Teichmüller distance.
    pub fn metric_sample(&self) -> MetricSample {
        let points = self.points.clone();
        MetricSample::from_points(points, |p| format!("{},{}", p.x, p.y), |a, b| teich_distance(*a, *b))
    }

    /// Net graph with the thin regions of `ε` coned off.
    pub fn electric(&self, epsilon: f64, max_denominator: i64) -> Result<ElectricSpace> {
        let cones = self
            .thin_cones(epsilon, max_denominator)?
            .into_iter()
            .map(|(s, members)| Cone::new(s.to_string(), members))
            .collect();
        self.electric_with(cones)
    }

    pub fn electric_with(&self, cones: Vec<Cone>) -> Result<ElectricSpace> {
        ElectricSpace::build(self.metric_sample(), cones, BaseEdges::Explicit(self.edges.clone()))
    }
}

/// Buckets points by bands of `log y` and by horizontal cells whose width
/// scales with the band height.
struct SpatialHash {
    s: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
    points_x: Vec<f64>,
}

impl SpatialHash {
    fn new(points: &[TeichPoint], s: f64) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            let band = (p.y.ln() / s).floor() as i64;
            let cell = (p.x / Self::width(s, band)).floor() as i64;
            cells.entry((band, cell)).or_default().push(i);
        }
        Self {
            s,
            cells,
            points_x: points.iter().map(|p| p.x).collect(),
        }
    }

    fn width(s: f64, band: i64) -> f64 {
        s * (band as f64 * s).exp()
    }

    /// Calls `f` for every point within hyperbolic distance `s` of `z`
    /// (and some farther ones), in increasing index order per cell.
    fn for_each_candidate(&self, z: TeichPoint, mut f: impl FnMut(usize)) {
        let s = self.s;
        let band = (z.y.ln() / s).floor() as i64;
        for b in band - 1..=band + 1 {
            // |Δx| ≤ 2 sinh(ρ/2) √(y y') for hyperbolic distance ρ.
            let reach = 2.0 * (0.5 * s).sinh() * (z.y * ((b + 1) as f64 * s).exp()).sqrt();
            let w = Self::width(s, b);
            let lo = ((z.x - reach) / w).floor() as i64;
            let hi = ((z.x + reach) / w).floor() as i64;
            for c in lo..=hi {
                if let Some(members) = self.cells.get(&(b, c)) {
                    for &j in members {
                        if (self.points_x[j] - z.x).abs() <= reach {
                            f(j);
                        }
                    }
                }
            }
        }
    }
}
