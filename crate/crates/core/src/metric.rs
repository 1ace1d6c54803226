//! Finite metric samples and sampled paths.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Read access to a finite metric space on indices `0..len()`.
pub trait Metric: Sync {
    fn len(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Name of point `i`, when the metric carries names.
    fn point_label(&self, _i: usize) -> Option<String> {
        None
    }
}

type Oracle = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Store {
    Dense(Vec<f64>),
    Oracle(Oracle),
}

/// Labelled points with either a stored distance matrix or a distance
/// callback.
#[derive(Clone)]
pub struct MetricSample {
    labels: Vec<String>,
    store: Store,
}

impl fmt::Debug for MetricSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.store {
            Store::Dense(_) => "dense",
            Store::Oracle(_) => "oracle",
        };
        f.debug_struct("MetricSample")
            .field("len", &self.labels.len())
            .field("store", &kind)
            .finish()
    }
}

impl MetricSample {
    /// Row-major `n × n` matrix; rejects asymmetric, negative or
    /// non-zero-diagonal input.
    pub fn from_matrix(labels: Vec<String>, matrix: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if matrix.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "distance matrix has {} entries, expected {}",
                matrix.len(),
                n * n
            )));
        }
        for i in 0..n {
            if matrix[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("d({i},{i}) is not zero")));
            }
            for j in 0..i {
                let (a, b) = (matrix[i * n + j], matrix[j * n + i]);
                if !(a >= 0.0 && a.is_finite()) || a != b {
                    return Err(Error::InvalidParameter(format!(
                        "d({i},{j}) = {a} and d({j},{i}) = {b} is not a symmetric finite distance"
                    )));
                }
            }
        }
        Ok(Self {
            labels,
            store: Store::Dense(matrix),
        })
    }

    /// Labels default to the indices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("distance matrix is not square".into()));
        }
        Self::from_matrix((0..n).map(|i| i.to_string()).collect(), rows.concat())
    }

    /// Distances computed on demand. The callback is trusted to be a metric;
    /// [`MetricSample::triangle_audit`] checks it on random triples.
    pub fn from_oracle(labels: Vec<String>, oracle: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            labels,
            store: Store::Oracle(Arc::new(oracle)),
        }
    }

    /// Points of any type with a distance function.
    pub fn from_points<P, F>(points: Vec<P>, label: impl Fn(&P) -> String, dist: F) -> Self
    where
        P: Send + Sync + 'static,
        F: Fn(&P, &P) -> f64 + Send + Sync + 'static,
    {
        let labels = points.iter().map(label).collect();
        Self::from_oracle(labels, move |i, j| if i == j { 0.0 } else { dist(&points[i], &points[j]) })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.store, Store::Dense(_))
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.labels.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.labels.len(),
            })
        }
    }

    /// Dense copy of the sub-sample on `indices`, in that order.
    pub fn restrict(&self, indices: &[usize]) -> Result<MetricSample> {
        for &i in indices {
            self.check_index(i)?;
        }
        let m = indices.len();
        let mut matrix = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..a {
                let d = self.dist(indices[a], indices[b]);
                matrix[a * m + b] = d;
                matrix[b * m + a] = d;
            }
        }
        Ok(MetricSample {
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            store: Store::Dense(matrix),
        })
    }

    pub fn to_dense(&self) -> MetricSample {
        match self.store {
            Store::Dense(_) => self.clone(),
            Store::Oracle(_) => self
                .restrict(&(0..self.len()).collect::<Vec<_>>())
                .expect("indices in range"),
        }
    }

    /// Largest triangle-inequality excess `d(i,k) − d(i,j) − d(j,k)` over
    /// `samples` random triples (all triples when that is fewer).
    pub fn triangle_audit(&self, samples: usize, seed: u64) -> f64 {
        let n = self.len();
        if n < 3 {
            return 0.0;
        }
        let mut worst = f64::NEG_INFINITY;
        let mut check = |i: usize, j: usize, k: usize| {
            worst = worst.max(self.dist(i, k) - self.dist(i, j) - self.dist(j, k));
        };
        if n * n * n <= samples {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        check(i, j, k);
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            }
        }
        worst
    }
}

impl Metric for MetricSample {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.store {
            Store::Dense(m) => m[i * self.labels.len() + j],
            Store::Oracle(f) => f(i, j),
        }
    }

    fn point_label(&self, i: usize) -> Option<String> {
        self.labels.get(i).cloned()
    }
}

impl<M: Metric + ?Sized> Metric for &M {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        (**self).dist(i, j)
    }

    fn point_label(&self, i: usize) -> Option<String> {
        (**self).point_label(i)
    }
}

/// Sample of a path: point indices with strictly increasing parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PathTrace {
    indices: Vec<usize>,
    params: Vec<f64>,
}

impl PathTrace {
    pub fn new(indices: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidParameter("a path needs at least one point".into()));
        }
        if indices.len() != params.len() {
            return Err(Error::InvalidParameter(format!(
                "{} points but {} parameters",
                indices.len(),
                params.len()
            )));
        }
        if params.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("path parameters must increase strictly".into()));
        }
        Ok(Self { indices, params })
    }

    /// Parameters `0, 1, 2, …`.
    pub fn from_indices(indices: Vec<usize>) -> Result<Self> {
        let params = (0..indices.len()).map(|i| i as f64).collect();
        Self::new(indices, params)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn first(&self) -> usize {
        self.indices[0]
    }

    pub fn last(&self) -> usize {
        *self.indices.last().expect("paths are non-empty")
    }

    /// The same points traversed backwards.
    pub fn reversed(&self) -> PathTrace {
        let end = *self.params.last().expect("paths are non-empty");
        PathTrace {
            indices: self.indices.iter().rev().copied().collect(),
            params: self.params.iter().rev().map(|t| end - t).collect(),
        }
    }

    /// `self` followed by `other`, which must start where `self` ends.
    pub fn concat(&self, other: &PathTrace) -> Result<PathTrace> {
        if self.last() != other.first() {
            return Err(Error::InvalidParameter("concatenated paths must share an endpoint".into()));
        }
        let shift = self.params.last().expect("paths are non-empty") - other.params[0];
        let mut indices = self.indices.clone();
        let mut params = self.params.clone();
        indices.extend_from_slice(&other.indices[1..]);
        params.extend(other.params[1..].iter().map(|t| t + shift));
        PathTrace::new(indices, params)
    }
}
