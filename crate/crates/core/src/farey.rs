//! The curve graph of the torus (and four-punctured sphere): slopes joined
//! when their intersection number is the smallest possible.
//!
//! Searches run over the finite set of slopes of height `max(|p|, q)` at
//! most a bound. Any geodesic between two slopes stays inside the ladder of
//! Farey triangles separating them, and every ladder vertex has height at
//! most the larger endpoint height, so for the torus graph a bound equal to
//! the input heights already gives exact distances.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foliation::Slope;
use crate::metric::MetricSample;

/// Edge rule: slopes are adjacent when they intersect `threshold` times
/// (1 on the tori, 2 on the four-punctured sphere).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FareyParams {
    threshold: u8,
}

impl FareyParams {
    pub const TORUS: FareyParams = FareyParams { threshold: 1 };
    pub const FOUR_PUNCTURED_SPHERE: FareyParams = FareyParams { threshold: 2 };

    pub fn new(threshold: u8) -> Result<Self> {
        match threshold {
            1 | 2 => Ok(Self { threshold }),
            t => Err(Error::InvalidParameter(format!("threshold must be 1 or 2, got {t}"))),
        }
    }

    pub fn threshold(&self) -> u8 {
        self.threshold
    }
}

impl Default for FareyParams {
    fn default() -> Self {
        Self::TORUS
    }
}

/// `intersection(a, b) == threshold`. Identical slopes are never adjacent.
pub fn adjacent(a: Slope, b: Slope, params: FareyParams) -> bool {
    a != b && a.intersection(&b) == params.threshold as u128
}

/// Height bound that makes bounded searches exact for the pair.
pub fn default_bound(a: Slope, b: Slope, params: FareyParams) -> u64 {
    let h = a.height().max(b.height());
    match params.threshold {
        1 => h,
        _ => 4 * h * h,
    }
}

const UNSEEN: u8 = u8::MAX;

/// Slopes of height at most `bound`, with edges generated on demand from
/// the determinant condition.
#[derive(Clone, Copy, Debug)]
pub struct FareyGraph {
    params: FareyParams,
    bound: u64,
}

/// BFS distances from one source over a [`FareyGraph`].
pub struct FareyDistances {
    graph: FareyGraph,
    source: Slope,
    dist: Vec<u8>,
}

impl FareyGraph {
    /// Largest height bound a dense search table is built for.
    pub const MAX_BOUND: u64 = 8192;

    pub fn new(params: FareyParams, bound: u64) -> Result<Self> {
        if bound == 0 || bound > Self::MAX_BOUND {
            return Err(Error::InvalidParameter(format!(
                "height bound must lie in 1..={}, got {bound}",
                Self::MAX_BOUND
            )));
        }
        Ok(Self { params, bound })
    }

    pub fn params(&self) -> FareyParams {
        self.params
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn contains(&self, s: Slope) -> bool {
        s.height() <= self.bound
    }

    fn check(&self, s: Slope) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::OutsideBound {
                slope: s.to_string(),
                bound: self.bound,
            })
        }
    }

    fn table_len(&self) -> usize {
        let b = self.bound as usize;
        (2 * b + 1) * (b + 1)
    }

    fn index(&self, s: Slope) -> usize {
        let b = self.bound as i64;
        ((s.p() + b) * (b + 1) + s.q()) as usize
    }

    /// All neighbours of `s` inside the height bound.
    pub fn neighbors(&self, s: Slope) -> Vec<Slope> {
        let mut out = Vec::new();
        self.for_each_neighbor(s, |n| out.push(n));
        out
    }

    fn for_each_neighbor(&self, s: Slope, mut f: impl FnMut(Slope)) {
        let t = self.params.threshold as i64;
        let bound = self.bound as i64;
        let (p, q) = (s.p() as i64, s.q() as i64);
        if q == 0 {
            // p·s' − 0·r' = ±t  ⇒  s' = t.
            if t > bound {
                return;
            }
            for r in -bound..=bound {
                if gcd(r, t) == 1 {
                    f(Slope::from_canonical(r as i64, t as i64));
                }
            }
            return;
        }
        if q == t {
            f(Slope::INFINITY);
        }
        // p·s0 − q·r0 = 1.
        let (x, y) = ext_gcd(p, q);
        let (s0, r0) = (x, -y);
        for sigma in [1i64, -1] {
            let (sb, rb) = (sigma * t * s0, sigma * t * r0);
            // s = sb + k q in [1, bound]
            let mut lo = div_ceil(1 - sb, q);
            let mut hi = div_floor(bound - sb, q);
            // r = rb + k p in [-bound, bound]
            if p > 0 {
                lo = lo.max(div_ceil(-bound - rb, p));
                hi = hi.min(div_floor(bound - rb, p));
            } else if p < 0 {
                lo = lo.max(div_ceil(bound - rb, p));
                hi = hi.min(div_floor(-bound - rb, p));
            } else if rb.abs() > bound {
                continue;
            }
            for k in lo..=hi {
                let (r, s) = (rb + k * p, sb + k * q);
                if t == 1 || gcd(r, s) == 1 {
                    f(Slope::from_canonical(r as i64, s as i64));
                }
            }
        }
    }

    /// Breadth-first distances from `source`, stopping early once `stop`
    /// (if any) has been reached or after `max_depth` layers.
    fn bfs(&self, source: Slope, stop: Option<Slope>, max_depth: u8) -> Result<Vec<u8>> {
        self.check(source)?;
        let mut dist = vec![UNSEEN; self.table_len()];
        dist[self.index(source)] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            if Some(v) == stop {
                break;
            }
            let dv = dist[self.index(v)];
            if dv >= max_depth {
                continue;
            }
            if dv == UNSEEN - 1 {
                return Err(Error::Overflow("counting Farey distances"));
            }
            self.for_each_neighbor(v, |n| {
                let i = self.index(n);
                if dist[i] == UNSEEN {
                    dist[i] = dv + 1;
                    queue.push_back(n);
                }
            });
        }
        Ok(dist)
    }

    /// Distances from `source` to every slope in the bound.
    pub fn distances_from(&self, source: Slope) -> Result<FareyDistances> {
        Ok(FareyDistances {
            graph: *self,
            source,
            dist: self.bfs(source, None, UNSEEN - 1)?,
        })
    }

    pub fn distance(&self, a: Slope, b: Slope) -> Result<u32> {
        self.check(b)?;
        let dist = self.bfs(a, Some(b), UNSEEN - 1)?;
        match dist[self.index(b)] {
            UNSEEN => Err(Error::Unreachable {
                from: a.to_string(),
                to: b.to_string(),
            }),
            d => Ok(d as u32),
        }
    }
}

impl FareyDistances {
    pub fn source(&self) -> Slope {
        self.source
    }

    /// `None` when `s` is outside the bound or unreachable.
    pub fn get(&self, s: Slope) -> Option<u32> {
        if !self.graph.contains(s) {
            return None;
        }
        match self.dist[self.graph.index(s)] {
            UNSEEN => None,
            d => Some(d as u32),
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(x, y)` with `a x + b y = gcd(a, b) = 1` for coprime inputs.
fn ext_gcd(a: i64, b: i64) -> (i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let quot = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
        (old_t, t) = (t, old_t - quot * t);
    }
    if old_r < 0 {
        (-old_s, -old_t)
    } else {
        (old_s, old_t)
    }
}

fn div_floor(a: i64, b: i64) -> i64 {
    let d = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        d - 1
    } else {
        d
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}

/// Length of a shortest edge path from `a` to `b` among slopes of height at
/// most `bound`.
pub fn farey_distance(a: Slope, b: Slope, params: FareyParams, bound: u64) -> Result<u32> {
    FareyGraph::new(params, bound)?.distance(a, b)
}

/// One shortest path from `a` to `b`; among equally short continuations the
/// slope smallest in `(q, p)` order is taken.
pub fn geodesic_path(a: Slope, b: Slope, params: FareyParams, bound: u64) -> Result<Vec<Slope>> {
    let graph = FareyGraph::new(params, bound)?;
    graph.check(a)?;
    let from_b = graph.bfs(b, Some(a), UNSEEN - 1)?;
    let mut d = from_b[graph.index(a)];
    if d == UNSEEN {
        return Err(Error::Unreachable {
            from: a.to_string(),
            to: b.to_string(),
        });
    }
    let mut path = vec![a];
    let mut current = a;
    while d > 0 {
        let next = graph
            .neighbors(current)
            .into_iter()
            .filter(|n| from_b[graph.index(*n)] == d - 1)
            .min()
            .expect("BFS layers are consistent");
        path.push(next);
        current = next;
        d -= 1;
    }
    Ok(path)
}

/// Ball around a slope in the height-bounded curve graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FareyBall {
    pub center: Slope,
    pub radius: u32,
    pub bound: u64,
    pub params: FareyParams,
    /// Sorted in `(q, p)` order.
    pub vertices: Vec<Slope>,
    /// Induced edges `(u, v)` with `u < v`.
    pub edges: Vec<(Slope, Slope)>,
    pub dist: BTreeMap<Slope, u32>,
}

/// Vertex cap used by [`ball`].
pub const DEFAULT_BALL_CAP: usize = 200_000;

pub fn ball(center: Slope, radius: u32, params: FareyParams, bound: u64) -> Result<FareyBall> {
    ball_with_cap(center, radius, params, bound, DEFAULT_BALL_CAP)
}

pub fn ball_with_cap(center: Slope, radius: u32, params: FareyParams, bound: u64, cap: usize) -> Result<FareyBall> {
    let graph = FareyGraph::new(params, bound)?;
    let depth = u8::try_from(radius.min((UNSEEN - 1) as u32)).expect("clamped");
    let dist_table = graph.bfs(center, None, depth)?;
    let mut dist = BTreeMap::new();
    let b = bound as i64;
    for q in 0..=b {
        for p in -b..=b {
            let d = dist_table[((p + b) * (b + 1) + q) as usize];
            if d != UNSEEN {
                dist.insert(Slope::from_canonical(p, q), d as u32);
                if dist.len() > cap {
                    return Err(Error::VertexCap { cap });
                }
            }
        }
    }
    let vertices: Vec<Slope> = dist.keys().copied().collect();
    let mut edges = Vec::new();
    for &u in &vertices {
        for v in graph.neighbors(u) {
            if u < v && dist.contains_key(&v) {
                edges.push((u, v));
            }
        }
    }
    edges.sort();
    Ok(FareyBall {
        center,
        radius,
        bound,
        params,
        vertices,
        edges,
        dist,
    })
}

impl FareyBall {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Pairwise curve-graph distances between the ball's vertices (paths may
    /// leave the ball but stay within the height bound).
    pub fn metric_sample(&self) -> Result<MetricSample> {
        let graph = FareyGraph::new(self.params, self.bound)?;
        let n = self.vertices.len();
        let mut matrix = vec![0.0; n * n];
        for (i, &u) in self.vertices.iter().enumerate() {
            let from_u = graph.distances_from(u)?;
            for (j, &v) in self.vertices.iter().enumerate() {
                let d = from_u.get(v).ok_or_else(|| Error::Unreachable {
                    from: u.to_string(),
                    to: v.to_string(),
                })?;
                matrix[i * n + j] = d as f64;
            }
        }
        MetricSample::from_matrix(self.vertices.iter().map(Slope::to_string).collect(), matrix)
    }

    /// Edge list CSV with header `vertex1,vertex2`.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["vertex1", "vertex2"])?;
        for (u, v) in &self.edges {
            w.write_record([u.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Distance CSV with header `vertex,dist`.
    pub fn write_distances_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["vertex", "dist"])?;
        for (v, d) in &self.dist {
            w.write_record([v.to_string(), d.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
