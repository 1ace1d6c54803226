//! Teichmüller space of the torus as the upper half-plane.
//!
//! A point is the modulus `τ = x + iy`. The Teichmüller metric is half of
//! the curvature −1 hyperbolic metric, extremal length of the foliation
//! `(a, b)` is `|a + bτ|² / Im τ`, and the cusp `-a/b` is the ideal point
//! where that foliation becomes short.

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foliation::{FoliationVec, Slope};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeichPoint {
    pub x: f64,
    pub y: f64,
}

impl TeichPoint {
    /// The basepoint `τ = i` (square torus).
    pub const BASE: TeichPoint = TeichPoint { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && y > 0.0) {
            return Err(Error::NotInUpperHalfPlane { x, y });
        }
        Ok(Self { x, y })
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    fn from_complex(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }
}

/// Curvature −1 distance in the upper half-plane, via
/// `2 asinh(|z - w| / (2 sqrt(y_z y_w)))`.
pub fn hyperbolic_distance(s: TeichPoint, t: TeichPoint) -> f64 {
    let dx = s.x - t.x;
    let dy = s.y - t.y;
    let chord = (dx * dx + dy * dy).sqrt();
    2.0 * (chord / (2.0 * (s.y * t.y).sqrt())).asinh()
}

/// Teichmüller distance `½ log K`, i.e. half the hyperbolic distance.
pub fn teich_distance(s: TeichPoint, t: TeichPoint) -> f64 {
    0.5 * hyperbolic_distance(s, t)
}

/// `|a + bτ|² / Im τ`.
pub fn extremal_length(f: &FoliationVec, t: TeichPoint) -> f64 {
    let (a, b) = f.components();
    extremal_length_components(a, b, t)
}

pub(crate) fn extremal_length_components(a: f64, b: f64, t: TeichPoint) -> f64 {
    let re = a + b * t.x;
    let im = b * t.y;
    (re * re + im * im) / t.y
}

/// Extremal length at a rational modulus, computed exactly.
pub fn extremal_length_exact(f: &FoliationVec, x: &BigRational, y: &BigRational) -> Result<BigRational> {
    let FoliationVec::Exact { a, b } = f else {
        return Err(Error::InexactRationality);
    };
    if *y <= BigRational::from_integer(0.into()) {
        return Err(Error::InvalidParameter("Im τ must be positive".into()));
    }
    let re = a + b * x;
    let im = b * y;
    Ok((&re * &re + &im * &im) / y)
}

/// A unit-or-smaller quadratic differential at `base`, given by the
/// direction `theta` of its natural coordinate and its norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadDiffFrame {
    pub base: TeichPoint,
    pub theta: f64,
    pub norm: f64,
}

impl QuadDiffFrame {
    pub fn new(base: TeichPoint, theta: f64, norm: f64) -> Result<Self> {
        if !(norm > 0.0 && norm <= 1.0) {
            return Err(Error::InvalidParameter(format!("norm must lie in (0, 1], got {norm}")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter("theta must be finite".into()));
        }
        Ok(Self { base, theta, norm })
    }

    /// Horizontal and vertical foliations of this differential.
    pub fn hv(&self) -> (FoliationVec, FoliationVec) {
        let (h, v) = hv_components(self.base, self.theta, self.norm);
        (
            FoliationVec::Real { a: h.0, b: h.1 },
            FoliationVec::Real { a: v.0, b: v.1 },
        )
    }
}

/// With `u = sqrt(norm / Im τ)·e^{iθ/2}`: `V = (−Re(uτ), Re u)` and
/// `H = (−Im(uτ), Im u)`, so that `i(H, V) = norm`.
pub fn hv_pair(base: TeichPoint, theta: f64, norm: f64) -> Result<(FoliationVec, FoliationVec)> {
    Ok(QuadDiffFrame::new(base, theta, norm)?.hv())
}

#[allow(clippy::type_complexity)]
pub(crate) fn hv_components(base: TeichPoint, theta: f64, norm: f64) -> ((f64, f64), (f64, f64)) {
    let u = Complex64::from_polar((norm / base.y).sqrt(), 0.5 * theta);
    let ut = u * base.to_complex();
    ((-ut.im, u.im), (-ut.re, u.re))
}

/// Orientation-preserving real Möbius map `z ↦ (az + b)/(cz + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Mobius {
    pub fn apply(&self, z: TeichPoint) -> TeichPoint {
        let zc = z.to_complex();
        let num = zc * self.a + self.b;
        let den = zc * self.c + self.d;
        let den_norm = den.norm_sqr();
        let w = num * den.conj() / den_norm;
        // Im part directly from the determinant keeps relative accuracy deep
        // in a cusp.
        let det = self.a * self.d - self.b * self.c;
        TeichPoint::from_complex(Complex64::new(w.re, z.y * det / den_norm))
    }

    /// Image of the real (or infinite) boundary point.
    pub fn apply_boundary(&self, x: Option<f64>) -> Option<f64> {
        match x {
            None => (self.c != 0.0).then(|| self.a / self.c),
            Some(x) => {
                let den = self.c * x + self.d;
                (den != 0.0).then(|| (self.a * x + self.b) / den)
            }
        }
    }

    /// The map sending `i` to `start` and the boundary point `0` to
    /// `toward`, so that the downward imaginary axis maps onto the
    /// geodesic ray from `start` to `toward` (`None` is the cusp at ∞).
    pub fn axis_to(start: TeichPoint, toward: Option<f64>) -> Self {
        match toward {
            None => Mobius {
                a: start.x,
                b: -start.y,
                c: 1.0,
                d: 0.0,
            },
            Some(xi) => match far_endpoint(start, xi) {
                None => Mobius {
                    a: start.y,
                    b: xi,
                    c: 0.0,
                    d: 1.0,
                },
                Some(eta) => {
                    let z0 = start.to_complex();
                    let lambda = (Complex64::i() * (eta - z0) / (z0 - xi)).re;
                    Mobius {
                        a: eta,
                        b: xi * lambda,
                        c: 1.0,
                        d: lambda,
                    }
                }
            },
        }
    }
}

/// Other endpoint of the geodesic line through `z` ending at `xi`; `None`
/// when that line is vertical.
fn far_endpoint(z: TeichPoint, xi: f64) -> Option<f64> {
    if z.x == xi {
        return None;
    }
    let center = (z.x * z.x + z.y * z.y - xi * xi) / (2.0 * (z.x - xi));
    Some(2.0 * center - xi)
}

/// Point at Teichmüller arclength `t` along the geodesic from `start`
/// toward the ideal endpoint `-a/b` of `v`.
pub fn ray(start: TeichPoint, v: &FoliationVec, t: f64) -> Result<TeichPoint> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("ray time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(start);
    }
    Ok(ray_toward(start, v.ideal_endpoint(), t))
}

pub(crate) fn ray_toward(start: TeichPoint, toward: Option<f64>, t: f64) -> TeichPoint {
    if t == 0.0 {
        return start;
    }
    Mobius::axis_to(start, toward).apply(TeichPoint {
        x: 0.0,
        y: (-2.0 * t).exp(),
    })
}

/// Ideal endpoint beyond `t` of the geodesic line through `s` and `t`.
pub fn endpoint_beyond(s: TeichPoint, t: TeichPoint) -> Option<f64> {
    if s.x == t.x {
        return if t.y < s.y { Some(s.x) } else { None };
    }
    let center = (s.x * s.x + s.y * s.y - t.x * t.x - t.y * t.y) / (2.0 * (s.x - t.x));
    let radius = ((s.x - center).powi(2) + s.y * s.y).sqrt();
    Some(if t.x > s.x { center + radius } else { center - radius })
}

/// `n` points at equal Teichmüller spacing from `s` to `t`, endpoints
/// reproduced exactly. Degenerates to `[s]` when `s == t`.
pub fn geodesic_segment(s: TeichPoint, t: TeichPoint, n: usize) -> Result<Vec<TeichPoint>> {
    if s == t {
        return Ok(vec![s]);
    }
    if n < 2 {
        return Err(Error::InvalidParameter("a segment needs at least 2 points".into()));
    }
    let length = teich_distance(s, t);
    let map = Mobius::axis_to(s, endpoint_beyond(s, t));
    let mut out = Vec::with_capacity(n);
    out.push(s);
    for k in 1..n - 1 {
        let arclength = length * k as f64 / (n - 1) as f64;
        out.push(map.apply(TeichPoint {
            x: 0.0,
            y: (-2.0 * arclength).exp(),
        }));
    }
    out.push(t);
    Ok(out)
}

/// Complete geodesic line between two distinct ideal points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicLine {
    pub from: Option<f64>,
    pub to: Option<f64>,
}

impl GeodesicLine {
    pub fn new(from: Option<f64>, to: Option<f64>) -> Result<Self> {
        if from == to {
            return Err(Error::InvalidParameter("a geodesic line needs two distinct endpoints".into()));
        }
        Ok(Self { from, to })
    }

    /// Supporting line of the segment from `s` to `t`.
    pub fn through(s: TeichPoint, t: TeichPoint) -> Self {
        Self {
            from: endpoint_beyond(t, s),
            to: endpoint_beyond(s, t),
        }
    }

    /// Teichmüller distance from `z` to the line.
    pub fn distance_to(&self, z: TeichPoint) -> f64 {
        let w = self.straighten(z);
        0.5 * (w.re.abs() / w.im.abs()).asinh()
    }

    /// Image of `z` under a Möbius map sending `from ↦ 0` and `to ↦ ∞`.
    fn straighten(&self, z: TeichPoint) -> Complex64 {
        let zc = z.to_complex();
        match (self.from, self.to) {
            (Some(a), Some(b)) => (zc - a) / (zc - b),
            (Some(a), None) => zc - a,
            (None, Some(b)) => -1.0 / (zc - b),
            (None, None) => unreachable!("endpoints are distinct"),
        }
    }

    /// Point of the line nearest to `z`.
    pub fn project(&self, z: TeichPoint) -> TeichPoint {
        let w = self.straighten(z);
        let foot = Complex64::new(0.0, w.norm());
        self.unstraighten(foot)
    }

    fn unstraighten(&self, w: Complex64) -> TeichPoint {
        let z = match (self.from, self.to) {
            (Some(a), Some(b)) => (w * b - a) / (w - 1.0),
            (Some(a), None) => w + a,
            (None, Some(b)) => b - 1.0 / w,
            (None, None) => unreachable!("endpoints are distinct"),
        };
        TeichPoint {
            x: z.re,
            y: z.im.abs(),
        }
    }

    /// Points of the line at Teichmüller arclength spacing `step` that lie
    /// within Teichmüller distance `radius` of `center`.
    pub fn sample_near(&self, center: TeichPoint, radius: f64, step: f64) -> Vec<TeichPoint> {
        let foot = self.project(center);
        let offset = teich_distance(center, foot);
        if offset > radius {
            return Vec::new();
        }
        // Along the line, cosh(2d(center, p)) = cosh(2·offset)·cosh(2s).
        let reach = 0.5 * ((2.0 * radius).cosh() / (2.0 * offset).cosh()).acosh();
        let w0 = self.straighten(foot);
        let count = (reach / step).floor() as i64;
        (-count..=count)
            .map(|k| {
                let s = k as f64 * step;
                self.unstraighten(w0 * (2.0 * s).exp())
            })
            .collect()
    }
}

/// `{τ : ext_τ(curve) ≤ ε}`, a horoball at the cusp of `curve`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinRegion {
    pub curve: Slope,
    pub epsilon: f64,
}

impl ThinRegion {
    pub fn new(curve: Slope, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { curve, epsilon })
    }

    pub fn contains(&self, t: TeichPoint) -> bool {
        thin_membership(self, t)
    }

    /// Euclidean diameter of the horoball (its height bound `1/ε` for the
    /// cusp at infinity).
    pub fn horoball_size(&self) -> f64 {
        let q = self.curve.q() as f64;
        if q == 0.0 {
            1.0 / self.epsilon
        } else {
            self.epsilon / (q * q)
        }
    }

    /// Teichmüller distance from `t` to the region: `½ log(ext/ε)` outside,
    /// zero inside.
    pub fn distance_from(&self, t: TeichPoint) -> f64 {
        let ext = extremal_length_components(self.curve.p() as f64, self.curve.q() as f64, t);
        (0.5 * (ext / self.epsilon).ln()).max(0.0)
    }
}

pub fn thin_membership(r: &ThinRegion, t: TeichPoint) -> bool {
    extremal_length_components(r.curve.p() as f64, r.curve.q() as f64, t) <= r.epsilon
}

/// Teichmüller distance between the thin regions of two curves for the
/// same `ε`: `log(i(α, β)/ε)`, or zero when they meet.
pub fn thin_region_gap(a: Slope, b: Slope, epsilon: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a.intersection(&b) as f64 / epsilon).ln().max(0.0)
}

/// The slope whose Ford horoball region contains `t`, found by reducing
/// `t` into the standard fundamental domain of the modular group.
///
/// For `ε ≤ 1` the thin regions are disjoint and any thin region
/// containing `t` belongs to this slope.
pub fn ford_slope(t: TeichPoint) -> Result<Slope> {
    // g = [[a, b], [c, d]] with w = g(t); tracked in integers.
    let (mut a, mut b, mut c, mut d): (i128, i128, i128, i128) = (1, 0, 0, 1);
    let mut w = t.to_complex();
    for _ in 0..10_000 {
        let n = w.re.round();
        if n != 0.0 {
            w.re -= n;
            let n = n as i128;
            a -= n * c;
            b -= n * d;
        }
        if w.norm_sqr() < 1.0 - 1e-15 {
            w = -1.0 / w;
            (a, b, c, d) = (-c, -d, a, b);
            if a.unsigned_abs().max(b.unsigned_abs()) > i64::MAX as u128 / 4 {
                return Err(Error::Overflow("reducing a modulus"));
            }
        } else {
            // Cusp g^{-1}(∞) = -d/c, i.e. the slope d/c.
            let p = i64::try_from(d).map_err(|_| Error::Overflow("reducing a modulus"))?;
            let q = i64::try_from(c).map_err(|_| Error::Overflow("reducing a modulus"))?;
            return Slope::new(p, q);
        }
    }
    Err(Error::Overflow("reducing a modulus"))
}

/// The thin region containing `t`, if any (`ε` must be at most 1).
pub fn thin_slope_at(t: TeichPoint, epsilon: f64) -> Result<Option<Slope>> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "thin-region lookup needs 0 < ε ≤ 1, got {epsilon}"
        )));
    }
    let s = ford_slope(t)?;
    Ok((extremal_length_components(s.p() as f64, s.q() as f64, t) <= epsilon).then_some(s))
}


#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(x: f64, y: f64) -> TeichPoint {
        TeichPoint::new(x, y).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn distance_examples() {
        assert_eq!(teich_distance(pt(0.0, 1.0), pt(0.0, 1.0)), 0.0);
        let e2 = 2f64.exp();
        assert!(close(teich_distance(pt(0.0, 1.0), pt(0.0, e2)), 1.0, 1e-14));
        let expected = 0.5 * 1.5f64.acosh();
        assert!(close(teich_distance(pt(0.0, 1.0), pt(1.0, 1.0)), expected, 1e-14));
        assert!(close(expected, 0.48121, 1e-5));
    }

    #[test]
    fn extremal_length_examples() {
        let f = FoliationVec::from_integers(1, 0).unwrap();
        assert!(close(extremal_length(&f, pt(0.0, 1.0)), 1.0, 1e-15));
        assert!(close(extremal_length(&f, pt(0.0, 2.0)), 0.5, 1e-15));
        let f2 = FoliationVec::from_integers(2, 0).unwrap();
        assert!(close(extremal_length(&f2, pt(0.0, 1.0)), 4.0, 1e-15));
    }

    #[test]
    fn hv_examples() {
        let (h, v) = hv_pair(pt(0.0, 1.0), 0.0, 1.0).unwrap();
        let (ha, hb) = h.components();
        let (va, vb) = v.components();
        assert!(close(ha, -1.0, 1e-15) && hb.abs() < 1e-15);
        assert!(va.abs() < 1e-15 && close(vb, 1.0, 1e-15));
        assert!(close(crate::foliation::intersection(&h, &v), 1.0, 1e-12));

        let (h, v) = hv_pair(pt(0.0, 1.0), PI, 1.0).unwrap();
        let (ha, hb) = h.components();
        let (va, vb) = v.components();
        assert!(ha.abs() < 1e-15 && close(hb.abs(), 1.0, 1e-15));
        assert!(close(va.abs(), 1.0, 1e-15) && vb.abs() < 1e-15);

        assert!(hv_pair(pt(0.0, 1.0), 0.0, 0.0).is_err());
        assert!(hv_pair(pt(0.0, 1.0), 0.0, 1.5).is_err());
    }

    #[test]
    fn ray_examples() {
        let v = FoliationVec::from_integers(0, 1).unwrap();
        for t in [0.0, 0.3, 1.0, 4.0] {
            let z = ray(pt(0.0, 1.0), &v, t).unwrap();
            assert!(z.x.abs() < 1e-15);
            assert!(close(z.y, (-2.0 * t).exp(), 1e-14));
        }
        assert_eq!(ray(pt(0.0, 1.0), &v, 0.0).unwrap(), pt(0.0, 1.0));
        assert!(ray(pt(0.0, 1.0), &v, -1.0).is_err());
    }

    #[test]
    fn ray_toward_infinity_and_vertical() {
        let up = FoliationVec::from_integers(1, 0).unwrap();
        let z = ray(pt(0.3, 2.0), &up, 1.0).unwrap();
        assert!(close(z.x, 0.3, 1e-14) && close(z.y, 2.0 * 2f64.exp(), 1e-14));
        let down = FoliationVec::from_integers(-3, 1).unwrap();
        let z = ray(pt(3.0, 2.0), &down, 0.5).unwrap();
        assert!(close(z.x, 3.0, 1e-14) && close(z.y, 2.0 / 1f64.exp(), 1e-14));
    }

    #[test]
    fn segment_examples() {
        let seg = geodesic_segment(pt(0.0, 1.0), pt(0.0, 4.0), 3).unwrap();
        assert_eq!(seg[0], pt(0.0, 1.0));
        assert!(seg[1].x.abs() < 1e-14 && close(seg[1].y, 2.0, 1e-14));
        assert_eq!(seg[2], pt(0.0, 4.0));

        let (s, t) = (pt(-0.7, 0.3), pt(1.9, 2.2));
        let seg = geodesic_segment(s, t, 9).unwrap();
        let step = teich_distance(s, t) / 8.0;
        for w in seg.windows(2) {
            assert!((teich_distance(w[0], w[1]) - step).abs() < 1e-10);
        }
        assert_eq!(geodesic_segment(s, s, 5).unwrap(), vec![s]);
        assert!(geodesic_segment(s, t, 1).is_err());
    }

    #[test]
    fn thin_membership_examples() {
        let r = ThinRegion::new(Slope::INFINITY, 0.1).unwrap();
        assert!(r.contains(pt(0.0, 20.0)));
        assert!(!r.contains(pt(0.0, 1.0)));
        assert!(r.contains(pt(0.4, 10.0)));
        let r = ThinRegion::new(Slope::ZERO, 0.25).unwrap();
        // ext of (0,1) at iy is y.
        assert!(r.contains(pt(0.0, 0.25)));
    }

    #[test]
    fn horoball_shape_matches_formula() {
        let region = ThinRegion::new(Slope::new(2, 5).unwrap(), 0.1).unwrap();
        let cusp = -0.4;
        let diameter = region.horoball_size();
        for k in 0..50 {
            let angle = PI * (k as f64 + 0.5) / 50.0;
            // Circle tangent at the cusp with that diameter.
            let (cx, cy, r) = (cusp, 0.5 * diameter, 0.5 * diameter);
            let inside = pt(cx + 0.99 * r * angle.cos(), cy + 0.99 * r * angle.sin());
            let outside = pt(cx + 1.01 * r * angle.cos(), cy + 1.01 * r * angle.sin());
            assert!(region.contains(inside));
            assert!(!region.contains(outside));
        }
    }

    #[test]
    fn distance_to_thin_region_is_log_ratio() {
        let region = ThinRegion::new(Slope::INFINITY, 0.1).unwrap();
        let z = pt(0.3, 1.0);
        let top = pt(0.3, 10.0);
        assert!(close(region.distance_from(z), teich_distance(z, top), 1e-12));
        assert!(close(thin_region_gap(Slope::ZERO, Slope::INFINITY, 0.1), 10f64.ln(), 1e-15));
    }

    #[test]
    fn ford_slope_finds_the_cusp() {
        let s = |p, q| Slope::new(p, q).unwrap();
        assert_eq!(ford_slope(pt(0.1, 3.0)).unwrap(), Slope::INFINITY);
        assert_eq!(ford_slope(pt(0.0, 0.2)).unwrap(), Slope::ZERO);
        // Tip of the horoball at cusp -2/5 is the slope 2/5.
        assert_eq!(ford_slope(pt(-0.4, 0.03)).unwrap(), s(2, 5));
        assert_eq!(ford_slope(pt(0.6180339887, 1e-6)).unwrap().q() > 100, true);
        assert_eq!(thin_slope_at(pt(-0.4, 0.003), 0.1).unwrap(), Some(s(2, 5)));
        assert_eq!(thin_slope_at(pt(-0.4, 0.03), 0.1).unwrap(), None);
        assert!(thin_slope_at(pt(0.0, 1.0), 2.0).is_err());
    }

    #[test]
    fn geodesic_line_distance_and_sampling() {
        let line = GeodesicLine::new(Some(-1.0), Some(1.0)).unwrap();
        assert!(line.distance_to(pt(0.0, 1.0)) < 1e-15);
        let z = pt(0.0, 2.0);
        assert!(close(line.distance_to(z), teich_distance(z, pt(0.0, 1.0)), 1e-13));
        let pts = line.sample_near(pt(0.0, 1.0), 1.0, 0.1);
        assert_eq!(pts.len(), 21);
        for p in pts {
            assert!(line.distance_to(p) < 1e-12);
            assert!(teich_distance(p, pt(0.0, 1.0)) <= 1.0 + 1e-12);
        }
        let through = GeodesicLine::through(pt(-0.6, 0.8), pt(0.6, 0.8));
        assert!(close(through.from.unwrap(), -1.0, 1e-14));
        assert!(close(through.to.unwrap(), 1.0, 1e-14));
    }
}
