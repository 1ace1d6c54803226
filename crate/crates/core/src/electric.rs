//! The electric (coned-off) metric: every designated subset gets a cone
//! point joined to its members by edges of length ½.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foliation::Slope;
use crate::metric::{Metric, MetricSample, PathTrace};
use crate::teich::{teich_distance, thin_region_gap, TeichPoint, ThinRegion};

/// Length of each edge from a cone point to a member.
pub const CONE_EDGE: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub name: String,
    pub members: Vec<usize>,
}

impl Cone {
    pub fn new(name: impl Into<String>, members: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            members,
        }
    }
}

/// Which base edges enter the shortest-path graph.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseEdges {
    /// Every pair, weighted by the base distance.
    Complete,
    /// Pairs at base distance at most `r`.
    Radius(f64),
    /// A supplied edge list `(i, j, weight)`.
    Explicit(Vec<(usize, usize, f64)>),
}

/// A metric sample with cone points attached. Nodes `0..len()` are the
/// sample points; node `len() + c` is the cone point of cone `c`.
#[derive(Clone, Debug)]
pub struct ElectricSpace {
    base: MetricSample,
    cones: Vec<Cone>,
    adjacency: Vec<Vec<(u32, f64)>>,
}

/// Complete base graph plus cones.
pub fn build_electric(base: MetricSample, cones: Vec<Cone>) -> Result<ElectricSpace> {
    ElectricSpace::build(base, cones, BaseEdges::Complete)
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl ElectricSpace {
    pub fn build(base: MetricSample, cones: Vec<Cone>, edges: BaseEdges) -> Result<Self> {
        let n = base.len();
        if n + cones.len() > u32::MAX as usize {
            return Err(Error::InvalidParameter("too many nodes".into()));
        }
        let mut adjacency = vec![Vec::new(); n + cones.len()];
        let mut link = |i: usize, j: usize, w: f64| {
            adjacency[i].push((j as u32, w));
            adjacency[j].push((i as u32, w));
        };
        match edges {
            BaseEdges::Complete => {
                for i in 0..n {
                    for j in 0..i {
                        link(i, j, base.dist(i, j));
                    }
                }
            }
            BaseEdges::Radius(r) => {
                for i in 0..n {
                    for j in 0..i {
                        let d = base.dist(i, j);
                        if d <= r {
                            link(i, j, d);
                        }
                    }
                }
            }
            BaseEdges::Explicit(list) => {
                for (i, j, w) in list {
                    base.check_index(i)?;
                    base.check_index(j)?;
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(Error::InvalidParameter(format!("edge ({i},{j}) has weight {w}")));
                    }
                    link(i, j, w);
                }
            }
        }
        for (c, cone) in cones.iter().enumerate() {
            if cone.members.is_empty() {
                return Err(Error::EmptyCone(cone.name.clone()));
            }
            for &m in &cone.members {
                base.check_index(m)?;
                link(n + c, m, CONE_EDGE);
            }
        }
        Ok(Self {
            base,
            cones,
            adjacency,
        })
    }

    pub fn base(&self) -> &MetricSample {
        &self.base
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    /// Number of sample points (cone points excluded).
    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn cone_node(&self, cone: usize) -> usize {
        self.len() + cone
    }

    /// Shortest-path distances from `source` to every node, cone points
    /// included.
    pub fn distances_from(&self, source: usize) -> Result<Vec<f64>> {
        if source >= self.node_count() {
            return Err(Error::IndexOutOfRange {
                index: source,
                len: self.node_count(),
            });
        }
        let mut dist = vec![f64::INFINITY; self.node_count()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry(0.0, source as u32));
        while let Some(Entry(d, v)) = heap.pop() {
            if d > dist[v as usize] {
                continue;
            }
            for &(u, w) in &self.adjacency[v as usize] {
                let nd = d + w;
                if nd < dist[u as usize] {
                    dist[u as usize] = nd;
                    heap.push(Entry(nd, u));
                }
            }
        }
        Ok(dist)
    }

    pub fn d_el(&self, x: usize, y: usize) -> Result<f64> {
        self.base.check_index(y)?;
        Ok(self.distances_from(x)?[y])
    }

    /// Electric distance between the member sets of two cones.
    pub fn cone_gap(&self, a: usize, b: usize) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let d = self.distances_from(self.cone_node(a))?[self.cone_node(b)];
        Ok(d - 2.0 * CONE_EDGE)
    }

    /// Dense electric metric on the given points, in that order.
    pub fn sample(&self, points: &[usize]) -> Result<MetricSample> {
        let m = points.len();
        let mut matrix = vec![0.0; m * m];
        for (a, &p) in points.iter().enumerate() {
            self.base.check_index(p)?;
            let from = self.distances_from(p)?;
            for (b, &q) in points.iter().enumerate() {
                matrix[a * m + b] = if a == b { 0.0 } else { from[q] };
            }
        }
        // Dijkstra sums may round differently in the two directions.
        for a in 0..m {
            for b in 0..a {
                let v = matrix[a * m + b].min(matrix[b * m + a]);
                if !v.is_finite() {
                    return Err(Error::Unreachable {
                        from: self.base.label(points[a]).to_string(),
                        to: self.base.label(points[b]).to_string(),
                    });
                }
                matrix[a * m + b] = v;
                matrix[b * m + a] = v;
            }
        }
        MetricSample::from_matrix(points.iter().map(|&p| self.base.label(p).to_string()).collect(), matrix)
    }

    fn node_label(&self, v: usize) -> String {
        if v < self.len() {
            self.base.label(v).to_string()
        } else {
            format!("cone:{}", self.cones[v - self.len()].name)
        }
    }

    /// Weighted edge list CSV with header `source,target,weight`.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["source", "target", "weight"])?;
        for (v, nbrs) in self.adjacency.iter().enumerate() {
            for &(u, weight) in nbrs {
                if v < u as usize {
                    w.write_record([self.node_label(v), self.node_label(u as usize), weight.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Greedy block ends for the path suffix starting at `s`: block `j` ends
/// at `ends[j]`, and the next block starts there again unless the step
/// out of it is longer than `c`.
fn greedy_block_ends<M: Metric + ?Sized>(d: &M, s: usize, c: f64) -> Vec<usize> {
    let len = d.len();
    let mut ends = Vec::new();
    let mut start = s;
    loop {
        let mut end = start;
        let mut diameter = 0.0f64;
        while end + 1 < len {
            let grown = (start..=end).map(|j| d.dist(j, end + 1)).fold(diameter, f64::max);
            if grown > c {
                break;
            }
            diameter = grown;
            end += 1;
        }
        ends.push(end);
        if end + 1 >= len {
            return ends;
        }
        start = if end > start { end } else { end + 1 };
    }
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale c must be positive, got {c}")));
    }
    Ok(())
}

/// Scale-`c` length of the path whose consecutive points are `0..d.len()`.
pub fn lc_length_of_sample<M: Metric + ?Sized>(d: &M, c: f64) -> Result<f64> {
    check_c(c)?;
    if d.is_empty() {
        return Err(Error::InvalidParameter("empty path".into()));
    }
    Ok(c * greedy_block_ends(d, 0, c).len() as f64)
}

/// `c` times the least number of consecutive blocks of electric diameter
/// at most `c` covering the path.
pub fn lc_length(sp: &ElectricSpace, path: &PathTrace, c: f64) -> Result<f64> {
    check_c(c)?;
    lc_length_of_sample(&sp.sample(path.indices())?, c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasigeodesicReport {
    pub c: f64,
    pub k: f64,
    pub mu: f64,
    /// Pair `(s, t)` of path positions fixing `μ`.
    pub mu_witness: Option<(usize, usize)>,
    /// Smallest `k` that works with `μ = 0`; absent when none does.
    pub k_at_zero_mu: Option<f64>,
    /// The upper inequality `d_el ≤ k·l_c + μ` holds for any path sample.
    pub upper_automatic: bool,
}

/// Electric quasigeodesic constants of a path at scale `c`: `k = 1` and the
/// least `μ ≥ 0` with `l_c(p[s,t]) − μ ≤ d_el(p(s), p(t))` for all sampled
/// `s < t`.
pub fn quasigeodesic_fit(sp: &ElectricSpace, path: &PathTrace, c: f64) -> Result<QuasigeodesicReport> {
    check_c(c)?;
    quasigeodesic_fit_sample(&sp.sample(path.indices())?, c)
}

/// As [`quasigeodesic_fit`] on a precomputed metric of the path points.
pub fn quasigeodesic_fit_sample<M: Metric + ?Sized>(d: &M, c: f64) -> Result<QuasigeodesicReport> {
    check_c(c)?;
    let len = d.len();
    if len < 2 {
        return Err(Error::InvalidParameter("a quasigeodesic fit needs at least 2 points".into()));
    }
    let mut mu = 0.0f64;
    let mut mu_witness = None;
    let mut k0 = Some(1.0f64);
    for s in 0..len - 1 {
        let ends = greedy_block_ends(d, s, c);
        let mut block = 0;
        for t in s + 1..len {
            while ends[block] < t {
                block += 1;
            }
            let lc = c * (block + 1) as f64;
            let del = d.dist(s, t);
            if lc - del > mu {
                mu = lc - del;
                mu_witness = Some((s, t));
            }
            k0 = match k0 {
                Some(k) if del > 0.0 => Some(k.max(lc / del)),
                _ => None,
            };
        }
    }
    Ok(QuasigeodesicReport {
        c,
        k: 1.0,
        mu,
        mu_witness,
        k_at_zero_mu: k0,
        upper_automatic: true,
    })
}

/// The electric metric of the continuous upper half-plane with the
/// horoball thin regions of a finite slope set coned off, in closed form.
///
/// An electric path alternates Teichmüller segments with cone hops, and
/// the cheapest segment between two thin regions is their gap, so
/// distances reduce to shortest paths among the cone points.
#[derive(Clone, Debug)]
pub struct HoroballElectric {
    epsilon: f64,
    slopes: Vec<Slope>,
    /// Cone point to cone point.
    cone: Vec<f64>,
}

impl HoroballElectric {
    pub fn new(epsilon: f64, slopes: Vec<Slope>) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("need 0 < ε ≤ 1, got {epsilon}")));
        }
        let s = slopes.len();
        let mut cone = vec![0.0; s * s];
        for a in 0..s {
            for b in 0..a {
                let w = 2.0 * CONE_EDGE + thin_region_gap(slopes[a], slopes[b], epsilon);
                cone[a * s + b] = w;
                cone[b * s + a] = w;
            }
        }
        for m in 0..s {
            for a in 0..s {
                let am = cone[a * s + m];
                for b in 0..s {
                    let via = am + cone[m * s + b];
                    if via < cone[a * s + b] {
                        cone[a * s + b] = via;
                    }
                }
            }
        }
        Ok(Self { epsilon, slopes, cone })
    }

    pub fn slopes(&self) -> &[Slope] {
        &self.slopes
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn index_of(&self, s: Slope) -> Option<usize> {
        self.slopes.iter().position(|&t| t == s)
    }

    /// Electric distance between the thin regions of slopes `a` and `b`
    /// (indices into [`HoroballElectric::slopes`]).
    pub fn thin_distance(&self, a: usize, b: usize) -> f64 {
        if a == b {
            0.0
        } else {
            self.cone[a * self.slopes.len() + b] - 2.0 * CONE_EDGE
        }
    }

    /// Electric distance from a point to each cone point.
    fn to_cones(&self, z: TeichPoint) -> Vec<f64> {
        let s = self.slopes.len();
        let hop: Vec<f64> = self
            .slopes
            .iter()
            .map(|&a| {
                ThinRegion {
                    curve: a,
                    epsilon: self.epsilon,
                }
                .distance_from(z)
                    + CONE_EDGE
            })
            .collect();
        (0..s)
            .map(|b| (0..s).map(|a| hop[a] + self.cone[a * s + b]).fold(f64::INFINITY, f64::min))
            .collect()
    }

    pub fn point_distance(&self, z: TeichPoint, w: TeichPoint) -> f64 {
        let direct = teich_distance(z, w);
        let from_z = self.to_cones(z);
        self.slopes
            .iter()
            .zip(&from_z)
            .map(|(&b, dz)| {
                dz + CONE_EDGE
                    + ThinRegion {
                        curve: b,
                        epsilon: self.epsilon,
                    }
                    .distance_from(w)
            })
            .fold(direct, f64::min)
    }
}
