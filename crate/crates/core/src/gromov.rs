//! Hyperbolicity instruments for finite metric samples: Gromov products,
//! the four-point constant, thin polygons, quasi-isometry constants and
//! sequences converging at infinity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Metric, PathTrace};

/// `½ (d(x, base) + d(y, base) − d(x, y))`.
pub fn gromov_product<M: Metric + ?Sized>(d: &M, x: usize, y: usize, base: usize) -> f64 {
    0.5 * (d.dist(x, base) + d.dist(y, base) - d.dist(x, y))
}

/// Quadruple `(base, x, y, z)` at which `⟨x|z⟩ ≥ min(⟨x|y⟩, ⟨y|z⟩) − δ` is
/// tightest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadruple {
    pub base: usize,
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Quadruple {
    /// `min(⟨x|y⟩, ⟨y|z⟩) − ⟨x|z⟩` at `base`, evaluated in four-point sum
    /// form so that scans and replays round identically.
    pub fn excess<M: Metric + ?Sized>(&self, d: &M) -> f64 {
        let Quadruple { base: w, x, y, z } = *self;
        let big = d.dist(x, z) + d.dist(y, w);
        let other = (d.dist(x, y) + d.dist(z, w)).max(d.dist(y, z) + d.dist(x, w));
        0.5 * (big - other)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GromovReport {
    pub delta: f64,
    /// Absent for samples of at most three points.
    pub witness: Option<Quadruple>,
    pub witness_labels: Option<[String; 4]>,
    pub sample_size: usize,
    /// Whether every quadruple was examined.
    pub exact: bool,
    pub quadruples_checked: u64,
    /// Checked quadruples over the number of unordered quadruples.
    pub coverage: f64,
}

impl GromovReport {
    pub fn replay<M: Metric + ?Sized>(&self, d: &M) -> f64 {
        self.witness.map_or(0.0, |q| q.excess(d))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaOptions {
    /// Largest sample scanned exhaustively.
    pub exact_limit: usize,
    /// Random quadruples drawn per point beyond the exact limit.
    pub samples_per_point: usize,
    pub seed: u64,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        Self {
            exact_limit: 300,
            samples_per_point: 20_000,
            seed: 0,
        }
    }
}

/// The best pairing of four points: the witness whose excess equals the
/// four-point constant of the quadruple.
fn best_pairing<M: Metric + ?Sized>(d: &M, a: usize, b: usize, c: usize, e: usize) -> (f64, Quadruple) {
    let s1 = d.dist(a, b) + d.dist(c, e);
    let s2 = d.dist(a, c) + d.dist(b, e);
    let s3 = d.dist(a, e) + d.dist(b, c);
    // The largest sum pairs {x, z} with {y, base}.
    let q = if s1 >= s2 && s1 >= s3 {
        Quadruple { base: e, x: a, y: c, z: b }
    } else if s2 >= s3 {
        Quadruple { base: e, x: a, y: b, z: c }
    } else {
        Quadruple { base: c, x: a, y: b, z: e }
    };
    (q.excess(d), q)
}

/// Smallest `δ` for which the four-point condition holds for every
/// basepoint and triple of the sample.
pub fn delta_four_point<M: Metric + ?Sized>(sample: &M) -> GromovReport {
    delta_four_point_with(sample, DeltaOptions::default())
}

pub fn delta_four_point_with<M: Metric + ?Sized>(sample: &M, opts: DeltaOptions) -> GromovReport {
    let n = sample.len();
    let total = choose4(n);
    let mut best: Option<(f64, Quadruple)> = None;
    let mut consider = |v: f64, q: Quadruple| {
        if best.map_or(true, |(b, _)| v > b) {
            best = Some((v, q));
        }
    };
    let (exact, checked) = if n <= opts.exact_limit {
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for e in c + 1..n {
                        let (v, q) = best_pairing(sample, a, b, c, e);
                        consider(v, q);
                    }
                }
            }
        }
        (true, total)
    } else {
        // Stratified by the first point so every point is represented.
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut checked = 0u64;
        for a in 0..n {
            for _ in 0..opts.samples_per_point {
                let (b, c, e) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if a == b || a == c || a == e || b == c || b == e || c == e {
                    continue;
                }
                let (v, q) = best_pairing(sample, a, b, c, e);
                consider(v, q);
                checked += 1;
            }
        }
        (false, checked)
    };
    let coverage = if total == 0 { 1.0 } else { (checked as f64 / total as f64).min(1.0) };
    GromovReport {
        delta: best.map_or(0.0, |(v, _)| v.max(0.0)),
        witness: best.map(|(_, q)| q),
        witness_labels: best.and_then(|(_, q)| {
            Some([
                sample.point_label(q.base)?,
                sample.point_label(q.x)?,
                sample.point_label(q.y)?,
                sample.point_label(q.z)?,
            ])
        }),
        sample_size: n,
        exact,
        quadruples_checked: checked,
        coverage,
    }
}

fn choose4(n: usize) -> u64 {
    if n < 4 {
        return 0;
    }
    let n = n as u128;
    (n * (n - 1) * (n - 2) * (n - 3) / 24) as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowReport {
    pub narrow: bool,
    pub worst_offset: f64,
    /// `(side, position along the side)` of the worst point.
    pub worst_point: (usize, usize),
}

/// Whether every sampled point of each side lies within `bound` of the
/// union of the other sides.
pub fn narrow_polygon_check<M: Metric + ?Sized>(sides: &[PathTrace], d: &M, bound: f64) -> Result<NarrowReport> {
    let n = sides.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("a polygon needs at least 3 sides, got {n}")));
    }
    for (i, side) in sides.iter().enumerate() {
        for &p in side.indices() {
            if p >= d.len() {
                return Err(Error::IndexOutOfRange { index: p, len: d.len() });
            }
        }
        let next = &sides[(i + 1) % n];
        if side.last() != next.first() {
            return Err(Error::OpenPolygon {
                side: i,
                end: side.last(),
                next_start: next.first(),
            });
        }
    }
    let mut worst = (0.0f64, (0usize, 0usize));
    for (i, side) in sides.iter().enumerate() {
        for (k, &p) in side.indices().iter().enumerate() {
            let offset = sides
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, s)| s.indices().iter())
                .map(|&q| d.dist(p, q))
                .fold(f64::INFINITY, f64::min);
            if offset > worst.0 {
                worst = (offset, (i, k));
            }
        }
    }
    Ok(NarrowReport {
        narrow: worst.0 <= bound,
        worst_offset: worst.0,
        worst_point: worst.1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub holds: bool,
    pub product: f64,
    /// `d(base, [x, y])` over the sampled geodesic.
    pub distance_to_geodesic: f64,
    /// `d(base, [x, y]) − ⟨x|y⟩`, non-negative when the upper bound holds.
    pub upper_slack: f64,
    /// `⟨x|y⟩ − d(base, [x, y]) + 4δ`, non-negative when the lower bound holds.
    pub lower_slack: f64,
}

/// Checks `d(0, [x, y]) − 4δ ≤ ⟨x|y⟩₀ ≤ d(0, [x, y])` on a sampled geodesic.
pub fn product_distance_sandwich<M: Metric + ?Sized>(
    d: &M,
    base: usize,
    x: usize,
    y: usize,
    geodesic: &PathTrace,
    delta: f64,
) -> Result<SandwichReport> {
    if geodesic.first() != x || geodesic.last() != y {
        return Err(Error::InvalidParameter(format!(
            "geodesic runs from {} to {}, expected {x} to {y}",
            geodesic.first(),
            geodesic.last()
        )));
    }
    let product = gromov_product(d, x, y, base);
    let to_geodesic = geodesic
        .indices()
        .iter()
        .map(|&p| d.dist(base, p))
        .fold(f64::INFINITY, f64::min);
    let upper_slack = to_geodesic - product;
    let lower_slack = product - to_geodesic + 4.0 * delta;
    Ok(SandwichReport {
        holds: upper_slack >= -1e-12 && lower_slack >= -1e-12,
        product,
        distance_to_geodesic: to_geodesic,
        upper_slack,
        lower_slack,
    })
}

/// Related quadruple: `p ~ q` and `p' ~ q'`, with `p, p'` measured by `d0`
/// and `q, q'` by `d1`.
pub type RelatedPair = (usize, usize, usize, usize);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QIReport {
    pub k: f64,
    pub mu: f64,
    /// Coboundedness constant, when computed.
    pub cobounded_l: Option<f64>,
    /// Quadruple fixing `k` (absent when `k = 1` is not forced by any).
    pub k_witness: Option<RelatedPair>,
    /// Quadruple fixing `μ` (absent when `μ = 0`).
    pub mu_witness: Option<RelatedPair>,
    pub pairs: usize,
}

/// Constants `(k, μ)` with `d0/k − μ ≤ d1 ≤ k·d0 + μ` on every quadruple.
///
/// `μ` is first set to the smallest value any `k` allows, which is the
/// spread over quadruples where one side vanishes; `k ≥ 1` is then the
/// smallest value that works with that `μ`.
pub fn quasi_isometry_fit<M0, M1>(pairs: &[RelatedPair], d0: &M0, d1: &M1) -> Result<QIReport>
where
    M0: Metric + ?Sized,
    M1: Metric + ?Sized,
{
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no related pairs to fit".into()));
    }
    let values: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(p, pp, q, qq)| (d0.dist(p, pp), d1.dist(q, qq)))
        .collect();
    let mut mu = 0.0f64;
    let mut mu_witness = None;
    for (i, &(a, b)) in values.iter().enumerate() {
        let forced = if a == 0.0 {
            b
        } else if b == 0.0 {
            a
        } else {
            0.0
        };
        if forced > mu {
            mu = forced;
            mu_witness = Some(pairs[i]);
        }
    }
    let mut k = 1.0f64;
    let mut k_witness = None;
    for (i, &(a, b)) in values.iter().enumerate() {
        let mut need = 1.0f64;
        if a > 0.0 && b + mu > 0.0 {
            need = need.max(a / (b + mu));
        }
        if a > 0.0 {
            need = need.max((b - mu) / a);
        }
        if need > k {
            k = need;
            k_witness = Some(pairs[i]);
        }
    }
    Ok(QIReport {
        k,
        mu,
        cobounded_l: None,
        k_witness,
        mu_witness,
        pairs: pairs.len(),
    })
}

impl QIReport {
    /// Records `L = max over targets of the distance to the image`.
    pub fn with_cobound<M: Metric + ?Sized>(mut self, d1: &M, targets: &[usize], image: &[usize]) -> Self {
        let l = targets
            .iter()
            .map(|&y| image.iter().map(|&q| d1.dist(y, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        self.cobounded_l = Some(l);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convergence {
    Diverging,
    Bounded,
    Inconclusive,
}

impl Convergence {
    pub fn as_str(&self) -> &'static str {
        match self {
            Convergence::Diverging => "diverging",
            Convergence::Bounded => "bounded",
            Convergence::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub verdict: Convergence,
    /// `L(N) = min over N ≤ m < n of ⟨x_m|x_n⟩`.
    pub profile: Vec<f64>,
    pub threshold: f64,
    /// `L(last) − L(mid)` over the second half of the profile.
    pub rise: f64,
}

/// Evidence for `⟨x_m|x_n⟩ → ∞`.
///
/// The verdict is `diverging` when the profile rises by more than
/// `threshold` over its second half and `bounded` when it rises by at most
/// a quarter of it. The default threshold is five times the median step
/// `d(x_i, x_{i+1})`.
pub fn convergence_at_infinity<M: Metric + ?Sized>(
    seq: &[usize],
    d: &M,
    base: usize,
    tail: usize,
    threshold: Option<f64>,
) -> Result<ConvergenceReport> {
    if tail < 2 || seq.len() < tail {
        return Err(Error::InvalidParameter(format!(
            "need sequence length {} ≥ tail {tail} ≥ 2",
            seq.len()
        )));
    }
    for &i in seq.iter().chain([&base]) {
        if i >= d.len() {
            return Err(Error::IndexOutOfRange { index: i, len: d.len() });
        }
    }
    let threshold = threshold.unwrap_or_else(|| {
        let mut steps: Vec<f64> = seq.windows(2).map(|w| d.dist(w[0], w[1])).collect();
        steps.sort_by(f64::total_cmp);
        5.0 * steps[steps.len() / 2]
    });
    let len = seq.len();
    // suffix[N] = min over N ≤ m < n < len.
    let mut suffix = vec![f64::INFINITY; len];
    for m in (0..len - 1).rev() {
        let row = (m + 1..len)
            .map(|n| gromov_product(d, seq[m], seq[n], base))
            .fold(f64::INFINITY, f64::min);
        suffix[m] = row.min(suffix[m + 1]);
    }
    let profile: Vec<f64> = suffix[..=len - tail].to_vec();
    let last = *profile.last().expect("profile is non-empty");
    let rise = last - profile[(profile.len() - 1) / 2];
    let verdict = if rise > threshold {
        Convergence::Diverging
    } else if rise <= 0.25 * threshold {
        Convergence::Bounded
    } else {
        Convergence::Inconclusive
    };
    Ok(ConvergenceReport {
        verdict,
        profile,
        threshold,
        rise,
    })
}
