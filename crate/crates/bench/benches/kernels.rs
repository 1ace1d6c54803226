use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torlab_core::*;

/// Random points in the plane under the Euclidean metric.
fn planar_sample(n: usize) -> MetricSample {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
    let mut matrix = Vec::with_capacity(n * n);
    for a in &pts {
        for b in &pts {
            matrix.push(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt());
        }
    }
    MetricSample::from_matrix((0..n).map(|i| i.to_string()).collect(), matrix).unwrap()
}

fn delta_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("delta_four_point");
    group.sample_size(10);
    for n in [20, 40, 60] {
        let sample = planar_sample(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &sample, |b, s| b.iter(|| delta_four_point(s)));
    }
    group.finish();
}

fn farey_bfs(c: &mut Criterion) {
    let mut group = c.benchmark_group("farey_distances_from");
    for bound in [34u64, 136] {
        let graph = FareyGraph::new(FareyParams::TORUS, bound).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(bound), &graph, |b, g| {
            b.iter(|| g.distances_from(Slope::INFINITY).unwrap())
        });
    }
    group.finish();
}

fn electric_dijkstra(c: &mut Criterion) {
    let patch = Patch::Window {
        x_min: -1.0,
        x_max: 1.0,
        y_min: 0.3,
        y_max: 16.0,
    };
    let net = HyperbolicNet::build(&[patch], NetParams::default()).unwrap();
    let space = net.electric(0.1, 1000).unwrap();
    let source = net.locate(TeichPoint::BASE).unwrap();
    c.bench_function("electric_distances_from", |b| b.iter(|| space.distances_from(source).unwrap()));
}

criterion_group!(kernels, delta_scan, farey_bfs, electric_dijkstra);
criterion_main!(kernels);
