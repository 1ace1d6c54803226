//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's graph or δ code.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use torlab_core::Slope;

/// Every slope of height at most `bound`, as `(p, q)`.
pub fn slopes_up_to(bound: i64) -> Vec<(i64, i64)> {
    let mut out = vec![(1, 0)];
    for q in 1..=bound {
        for p in -bound..=bound {
            if num_integer::gcd(p, q) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

/// Farey graph on the given vertices by scanning every pair's determinant.
pub struct OracleGraph {
    pub vertices: Vec<(i64, i64)>,
    pub index: HashMap<(i64, i64), usize>,
    pub adj: Vec<Vec<usize>>,
}

impl OracleGraph {
    pub fn new(vertices: Vec<(i64, i64)>, threshold: i64) -> Self {
        let n = vertices.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            let (p, q) = vertices[i];
            for j in i + 1..n {
                let (r, s) = vertices[j];
                if (p * s - q * r).abs() == threshold {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        let index = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Self { vertices, index, adj }
    }

    /// Hop counts from `src`; `u32::MAX` when unreachable.
    pub fn bfs(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertices.len()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn slope(&self, i: usize) -> Slope {
        let (p, q) = self.vertices[i];
        Slope::new(p, q).unwrap()
    }
}

/// Gromov product of rows `x`, `y` at `w`.
fn product(d: &[Vec<f64>], x: usize, y: usize, w: usize) -> f64 {
    0.5 * (d[x][w] + d[y][w] - d[x][y])
}

/// `max_{w,x,y,z} min(⟨x|y⟩_w, ⟨y|z⟩_w) − ⟨x|z⟩_w`, by exhaustion.
pub fn delta_product_form(d: &[Vec<f64>]) -> f64 {
    let n = d.len();
    let mut best = 0.0f64;
    for w in 0..n {
        let mut prod = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                prod[x * n + y] = product(d, x, y, w);
            }
        }
        for x in 0..n {
            for y in 0..n {
                let xy = prod[x * n + y];
                if xy <= best {
                    continue;
                }
                for z in 0..n {
                    let v = xy.min(prod[y * n + z]) - prod[x * n + z];
                    if v > best {
                        best = v;
                    }
                }
            }
        }
    }
    best
}

/// Random tree on `n` vertices with integer edge lengths in `1..=max_w`;
/// returns the all-pairs distance matrix.
pub fn random_tree_metric(rng: &mut impl Rng, n: usize, max_w: u32) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        let w = rng.gen_range(1..=max_w) as f64;
        for u in 0..v {
            d[v][u] = d[parent][u] + w;
            d[u][v] = d[v][u];
        }
    }
    d
}

pub fn flatten(d: &[Vec<f64>]) -> Vec<f64> {
    d.iter().flatten().copied().collect()
}
