mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use common::*;
use torlab_core::electric::lc_length_of_sample;
use torlab_core::foliation::{intersection_exact, rational};
use torlab_core::teich::{extremal_length_exact, ray};
use torlab_core::*;

fn point() -> impl Strategy<Value = TeichPoint> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(x, ly)| TeichPoint::new(x, ly.exp()).unwrap())
}

fn real_foliation() -> impl Strategy<Value = FoliationVec> {
    (-10.0f64..10.0, -10.0f64..10.0)
        .prop_filter("non-zero", |(a, b)| a.abs() + b.abs() > 1e-6)
        .prop_map(|(a, b)| FoliationVec::real(a, b).unwrap())
}

fn small_rational() -> impl Strategy<Value = (i64, i64)> {
    (-60i64..=60, 1i64..=25)
}

fn slope(max: i64) -> impl Strategy<Value = Slope> {
    prop_oneof![
        1 => Just(Slope::INFINITY),
        20 => (-max..=max, 1..=max).prop_filter_map("coprime", |(p, q)| {
            (num_integer::gcd(p, q) == 1).then(|| Slope::new(p, q).unwrap())
        }),
    ]
}

fn metric_points(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..=max)
}

fn euclidean(points: &[(f64, f64)]) -> MetricSample {
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|a| points.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
        .collect();
    MetricSample::from_rows(&rows).unwrap()
}

proptest! {
    #[test]
    fn intersection_symmetric_and_bilinear(
        f in (small_rational(), small_rational()),
        g in (small_rational(), small_rational()),
        c in (1i64..=9, 1i64..=9),
        k in (1i64..=9, 1i64..=9),
    ) {
        let mk = |((a, da), (b, db)): ((i64, i64), (i64, i64))| {
            FoliationVec::exact(rational(a, da), rational(b, db))
        };
        let (Ok(f), Ok(g)) = (mk(f), mk(g)) else { return Ok(()) };
        let fg = intersection_exact(&f, &g).unwrap();
        prop_assert_eq!(&fg, &intersection_exact(&g, &f).unwrap());
        let (c, k) = (rational(c.0, c.1), rational(k.0, k.1));
        let scaled = intersection_exact(&f.scaled_exact(&c).unwrap(), &g.scaled_exact(&k).unwrap()).unwrap();
        prop_assert_eq!(scaled, c * k * fg);
    }

    #[test]
    fn extremal_length_dominates_squared_intersections(
        sigma in point(),
        theta in 0.0f64..4.0 * PI,
        norm in 1e-3f64..=1.0,
        f in real_foliation(),
    ) {
        let (h, v) = hv_pair(sigma, theta, norm).unwrap();
        let ext = extremal_length(&f, sigma);
        for g in [&h, &v] {
            let i = intersection(&f, g);
            prop_assert!(ext >= i * i, "ext {} < i² {}", ext, i * i);
        }
        prop_assert!((intersection(&h, &v) - norm).abs() < 1e-12);
    }

    #[test]
    fn ray_shrinks_its_foliation_at_the_teichmuller_rate(
        tau in point(),
        theta in 0.0f64..2.0 * PI,
        t in 0.0f64..=10.0,
    ) {
        let (h, v) = hv_pair(tau, theta, 1.0).unwrap();
        let end = ray(tau, &v, t).unwrap();
        prop_assert!((0.5 * (extremal_length(&v, tau) / extremal_length(&v, end)).ln() - t).abs() < 1e-9);
        prop_assert!((0.5 * (extremal_length(&h, end) / extremal_length(&h, tau)).ln() - t).abs() < 1e-9);
        prop_assert!((teich_distance(tau, end) - t).abs() < 1e-10);
    }

    #[test]
    fn modular_generators_preserve_distance_and_length(z in point(), w in point(), f in real_foliation()) {
        // T: τ ↦ τ + 1 with (a, b) ↦ (a − b, b); S: τ ↦ −1/τ with (a, b) ↦ (b, −a).
        let t = |p: TeichPoint| TeichPoint::new(p.x + 1.0, p.y).unwrap();
        let s = |p: TeichPoint| {
            let r = p.x * p.x + p.y * p.y;
            TeichPoint::new(-p.x / r, p.y / r).unwrap()
        };
        let (a, b) = f.components();
        let ft = FoliationVec::real(a - b, b).unwrap();
        let fs = FoliationVec::real(b, -a).unwrap();
        let d = teich_distance(z, w);
        let tol = 1e-9 * (1.0 + d);
        prop_assert!((teich_distance(t(z), t(w)) - d).abs() < tol);
        prop_assert!((teich_distance(s(z), s(w)) - d).abs() < tol);
        let ext = extremal_length(&f, z);
        prop_assert!((extremal_length(&ft, t(z)) - ext).abs() <= 1e-9 * ext);
        prop_assert!((extremal_length(&fs, s(z)) - ext).abs() <= 1e-9 * ext);
    }

    #[test]
    fn extremal_length_scales_quadratically(
        f in (small_rational(), small_rational()),
        k in (1i64..=30, 1i64..=30),
        x in small_rational(),
        y in (1i64..=60, 1i64..=25),
    ) {
        let Ok(f) = FoliationVec::exact(rational(f.0 .0, f.0 .1), rational(f.1 .0, f.1 .1)) else { return Ok(()) };
        let k = rational(k.0, k.1);
        let (x, y) = (rational(x.0, x.1), rational(y.0, y.1));
        let base = extremal_length_exact(&f, &x, &y).unwrap();
        let scaled = extremal_length_exact(&f.scaled_exact(&k).unwrap(), &x, &y).unwrap();
        prop_assert_eq!(scaled, &k * &k * base);
    }

    #[test]
    fn teich_distance_is_a_metric(a in point(), b in point(), c in point()) {
        prop_assert!((teich_distance(a, b) - teich_distance(b, a)).abs() < 1e-12);
        prop_assert!(teich_distance(a, c) <= teich_distance(a, b) + teich_distance(b, c) + 1e-9);
    }

    #[test]
    fn convergents_are_farey_adjacent(
        a0 in -5i64..=5,
        prefix in prop::collection::vec(1u64..=6, 0..4),
        period in prop::collection::vec(1u64..=6, 1..4),
    ) {
        let cf = ContinuedFraction::periodic(a0, prefix, period).unwrap();
        let conv = cf.convergents(12).unwrap();
        for w in conv.slopes.windows(2) {
            prop_assert_eq!(w[0].intersection(&w[1]), 1);
            prop_assert!(adjacent(w[0], w[1], FareyParams::TORUS));
        }
    }

    #[test]
    fn doubling_the_bound_changes_no_distance(a in slope(34), b in slope(34)) {
        let h = a.height().max(b.height());
        let d = farey_distance(a, b, FareyParams::TORUS, h).unwrap();
        prop_assert_eq!(d, farey_distance(a, b, FareyParams::TORUS, 2 * h).unwrap());
    }

    #[test]
    fn geodesic_paths_are_shortest_edge_paths(a in slope(20), b in slope(20)) {
        let bound = a.height().max(b.height());
        let path = geodesic_path(a, b, FareyParams::TORUS, bound).unwrap();
        let d = farey_distance(a, b, FareyParams::TORUS, bound).unwrap();
        prop_assert_eq!(path.len(), d as usize + 1);
        prop_assert_eq!(path[0], a);
        prop_assert_eq!(*path.last().unwrap(), b);
        for w in path.windows(2) {
            prop_assert!(adjacent(w[0], w[1], FareyParams::TORUS));
        }
    }

    #[test]
    fn gromov_product_moves_at_most_the_basepoint_shift(pts in metric_points(8)) {
        let m = euclidean(&pts);
        let n = pts.len();
        for x in 0..n {
            for y in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let shift = (gromov_product(&m, x, y, a) - gromov_product(&m, x, y, b)).abs();
                        prop_assert!(shift <= m.dist(a, b) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn delta_grows_with_the_sample(pts in metric_points(14), keep in prop::collection::vec(any::<bool>(), 14)) {
        let m = euclidean(&pts);
        let sub: Vec<usize> = (0..pts.len()).filter(|&i| keep[i]).collect();
        let whole = delta_four_point(&m);
        prop_assert_eq!(whole.replay(&m), whole.delta);
        if sub.len() >= 1 {
            let part = delta_four_point(&m.restrict(&sub).unwrap());
            prop_assert!(part.delta <= whole.delta);
        }
    }

    #[test]
    fn trees_have_zero_delta(seed in any::<u64>(), n in 2usize..40) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = random_tree_metric(&mut rng, n, 20);
        prop_assert_eq!(delta_four_point(&MetricSample::from_rows(&d).unwrap()).delta, 0.0);
    }

    #[test]
    fn qi_fit_is_tight(pts in metric_points(10), scale in 0.5f64..3.0, shift in prop::collection::vec(0.0f64..1.0, 10)) {
        let n = pts.len();
        let d0 = euclidean(&pts);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { scale * d0.dist(i, j) + shift[i.min(j)] }).collect())
            .collect();
        let d1 = MetricSample::from_rows(&rows).unwrap();
        let pairs: Vec<_> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j, i, j))).collect();
        let fit = quasi_isometry_fit(&pairs, &d0, &d1).unwrap();
        let (k, mu) = (fit.k, fit.mu);
        let mut upper_tight = false;
        let mut lower_tight = false;
        for &(p, pp, q, qq) in &pairs {
            let (a, b) = (d0.dist(p, pp), d1.dist(q, qq));
            prop_assert!(b <= k * a + mu + 1e-9 && b >= a / k - mu - 1e-9);
            upper_tight |= (b - (k * a + mu)).abs() < 1e-9;
            lower_tight |= (b - (a / k - mu)).abs() < 1e-9;
        }
        // μ is fixed first and k second, so one of the two inequalities is
        // attained by the k witness and μ by the zero-distance quadruples.
        prop_assert!(upper_tight || lower_tight);
        if let Some((p, pp, q, qq)) = fit.k_witness {
            let (a, b) = (d0.dist(p, pp), d1.dist(q, qq));
            prop_assert!((b - (k * a + mu)).abs() < 1e-9 || (b - (a / k - mu)).abs() < 1e-9);
        }
        if let Some((p, pp, q, qq)) = fit.mu_witness {
            let (a, b) = (d0.dist(p, pp), d1.dist(q, qq));
            prop_assert!((b - (k * a + mu)).abs() < 1e-9 || (b - (a / k - mu)).abs() < 1e-9);
        }
    }

    #[test]
    fn extra_cones_never_lengthen(
        pts in metric_points(10),
        cones in prop::collection::vec(prop::collection::vec(0usize..10, 1..4), 0..3),
        extra in prop::collection::vec(0usize..10, 1..4),
    ) {
        let n = pts.len();
        let m = euclidean(&pts);
        let clip = |c: &Vec<usize>| Cone::new("c", c.iter().map(|&i| i % n).collect());
        let base: Vec<Cone> = cones.iter().map(clip).collect();
        let mut more = base.clone();
        more.push(clip(&extra));
        let a = build_electric(m.clone(), base).unwrap().sample(&(0..n).collect::<Vec<_>>()).unwrap();
        let b = build_electric(m, more).unwrap().sample(&(0..n).collect::<Vec<_>>()).unwrap();
        for x in 0..n {
            for y in 0..n {
                prop_assert!(b.dist(x, y) <= a.dist(x, y) + 1e-12);
            }
        }
    }

    #[test]
    fn electric_distance_matches_path_enumeration(
        pts in metric_points(8),
        cones in prop::collection::vec(prop::collection::vec(0usize..8, 1..4), 0..3),
    ) {
        let n = pts.len();
        let m = euclidean(&pts);
        let cones: Vec<Vec<usize>> = cones.iter().map(|c| c.iter().map(|&i| i % n).collect()).collect();
        let sp = build_electric(m.clone(), cones.iter().map(|c| Cone::new("c", c.clone())).collect()).unwrap();
        // A point-to-point hop costs the base distance, or 1 through a
        // shared cone; shortest paths visit each point at most once.
        let hop = |a: usize, b: usize| {
            let through_cone = cones.iter().any(|c| c.contains(&a) && c.contains(&b));
            if through_cone && a != b { m.dist(a, b).min(1.0) } else { m.dist(a, b) }
        };
        for x in 0..n {
            for y in 0..n {
                let best = enumerate_paths(n, x, y, &hop);
                let got = sp.d_el(x, y).unwrap();
                prop_assert!((got - best).abs() < 1e-9, "{} vs {}", got, best);
                let chains_help = best < m.dist(x, y) - 1e-12;
                if !chains_help {
                    prop_assert!((got - m.dist(x, y)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn lc_length_bounds(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..12), c in 0.25f64..4.0) {
        let m = euclidean(&pts);
        let n = pts.len();
        let l = lc_length_of_sample(&m, c).unwrap();
        prop_assert!(l >= c);
        prop_assert!(l <= c * n as f64);
        let diameter = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m.dist(i, j)).fold(0.0, f64::max);
        if diameter <= c {
            prop_assert_eq!(l, c);
        }
    }
}

/// Shortest simple path cost by depth-first enumeration.
fn enumerate_paths(n: usize, x: usize, y: usize, hop: &impl Fn(usize, usize) -> f64) -> f64 {
    fn go(n: usize, at: usize, y: usize, used: &mut Vec<bool>, cost: f64, best: &mut f64, hop: &impl Fn(usize, usize) -> f64) {
        if cost >= *best {
            return;
        }
        if at == y {
            *best = cost;
            return;
        }
        for next in 0..n {
            if !used[next] {
                used[next] = true;
                go(n, next, y, used, cost + hop(at, next), best, hop);
                used[next] = false;
            }
        }
    }
    let mut used = vec![false; n];
    used[x] = true;
    let mut best = f64::INFINITY;
    go(n, x, y, &mut used, 0.0, &mut best, hop);
    best
}

#[test]
fn slope_classes_agree_with_vanishing_intersection() {
    let mut all = Vec::new();
    for p in -20i64..=20 {
        for q in 0i64..=20 {
            if let Ok(f) = FoliationVec::from_integers(p, q) {
                all.push(f);
            }
        }
    }
    for f in &all {
        let sf = slope_of(f).unwrap();
        for g in &all {
            let same = sf == slope_of(g).unwrap();
            assert_eq!(intersection(f, g) == 0.0, same, "{f:?} {g:?}");
        }
    }
}

#[test]
fn golden_convergents_recede_in_the_curve_graph() {
    let seq = ContinuedFraction::golden().convergents_up_to(1000);
    let bound = seq.iter().map(Slope::height).max().unwrap();
    let graph = FareyGraph::new(FareyParams::TORUS, bound).unwrap();
    let from = graph.distances_from(Slope::INFINITY).unwrap();
    let d: Vec<u32> = seq.iter().map(|&s| from.get(s).unwrap()).collect();
    assert!(d.windows(2).all(|w| w[0] <= w[1]), "{d:?}");
    assert!(*d.last().unwrap() > 4, "{d:?}");
}

#[test]
fn four_punctured_sphere_graph_matches_oracle() {
    let bound = 12;
    let oracle = OracleGraph::new(slopes_up_to(bound), 2);
    let graph = FareyGraph::new(FareyParams::FOUR_PUNCTURED_SPHERE, bound as u64).unwrap();
    for (i, _) in oracle.vertices.iter().enumerate() {
        let truth = oracle.bfs(i);
        let from = graph.distances_from(oracle.slope(i)).unwrap();
        for (j, &t) in truth.iter().enumerate() {
            let expected = (t != u32::MAX).then_some(t);
            assert_eq!(from.get(oracle.slope(j)), expected);
        }
    }
}
