//! Ford circles in the upper half-plane and the horoball geometry of the
//! Farey tessellation.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::farey::{big_to_f64, iota, is_farey_edge, Slope, UnimodularMap};
use crate::ksystem::{height_labelled, kappa_with_pair};
use crate::triangulation::{FareyLabelling, Triangulation};

/// Tolerance for floating-point comparisons of distances.
pub const TOLERANCE: f64 = 1e-9;

/// `ln(1 + √2)`, the thin-triangles constant used for the height bound.
pub fn delta() -> f64 {
    (1.0 + 2f64.sqrt()).ln()
}

/// `(2/√3)·e^{2δ}`.
pub fn height_bound_constant() -> f64 {
    2.0 / 3f64.sqrt() * (2.0 * delta()).exp()
}

/// `ln(2/√3)`: every point of the plane lies this close to a Ford circle.
pub fn covering_constant() -> f64 {
    (2.0 / 3f64.sqrt()).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if y > 0.0 && x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(Error::Invariant(format!(
                "({x}, {y}) is not in the upper half-plane"
            )))
        }
    }
}

/// Ford circle of a slope; `center` and `radius` are `None` for `1/0`,
/// whose horocycle is the line `y = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Horocycle {
    pub base: Slope,
    pub center: Option<(BigRational, BigRational)>,
    pub radius: Option<BigRational>,
}

pub fn ford_circle(s: &Slope) -> Horocycle {
    if s.is_infinity() {
        return Horocycle {
            base: s.clone(),
            center: None,
            radius: None,
        };
    }
    let b = s.denom().clone();
    let r = BigRational::new(BigInt::one(), BigInt::from(2) * &b * &b);
    let x = BigRational::new(s.numer().clone(), b);
    Horocycle {
        base: s.clone(),
        center: Some((x, r.clone())),
        radius: Some(r),
    }
}

/// A geodesic between two distinct cusps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geodesic {
    pub start: Slope,
    pub end: Slope,
}

impl Geodesic {
    pub fn new(start: Slope, end: Slope) -> Result<Self> {
        if start == end {
            return Err(Error::EqualSlopes(start.to_string()));
        }
        Ok(Geodesic { start, end })
    }
}

/// Distance between the Ford circles of `s1` and `s2`, measured after
/// moving `s1` to `1/0`: from the line `y = 1` down to the top of the image
/// circle at height `1/b²`.
pub fn horoball_distance(s1: &Slope, s2: &Slope) -> Result<f64> {
    if s1 == s2 {
        return Err(Error::EqualSlopes(s1.to_string()));
    }
    let m = UnimodularMap::normalizing(s1);
    let b = big_to_f64(m.apply(s2).denom());
    let top = 1.0 / (b * b);
    Ok(-top.ln())
}

/// Signed distance from `z` to the Ford circle of `s` (negative inside).
pub fn point_horoball_distance(z: Point, s: &Slope) -> f64 {
    let m = UnimodularMap::normalizing(s);
    let (_, y) = m.apply_point(z.x, z.y);
    -y.ln()
}

/// Point of the geodesic `s1 ↔ s2` equidistant from both Ford circles.
pub fn geodesic_midpoint(s1: &Slope, s2: &Slope) -> Result<Point> {
    if s1 == s2 {
        return Err(Error::EqualSlopes(s1.to_string()));
    }
    let m = UnimodularMap::normalizing(s1);
    let image = m.apply(s2);
    let b = big_to_f64(image.denom());
    let (x, y) = m.inverse().apply_point(image.to_f64(), 1.0 / b);
    Point::new(x, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    /// Largest distance from a sample to its nearest Ford circle.
    pub max: f64,
    pub at: Point,
    pub samples: usize,
}

/// Samples the fundamental domain `|x| ≤ 1/2, |z| ≥ 1, y ≤ 1` on a
/// `g × g` grid (`g = ⌊√samples⌋`) and measures the distance of each
/// sample to the nearest Ford circle.
pub fn covering_check(samples: usize) -> CoveringReport {
    let g = ((samples.max(1) as f64).sqrt().floor() as usize).max(1);
    let nearby: Vec<Slope> = [(1, 0), (-1, 1), (0, 1), (1, 1), (-1, 2), (1, 2)]
        .iter()
        .map(|&(p, q)| Slope::new(p, q).unwrap())
        .collect();
    let nearest = |z: Point| {
        nearby
            .iter()
            .map(|s| point_horoball_distance(z, s))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = CoveringReport {
        max: f64::NEG_INFINITY,
        at: Point { x: 0.0, y: 1.0 },
        samples: g * g,
    };
    let step = |i: usize| {
        if g == 1 {
            0.5
        } else {
            i as f64 / (g - 1) as f64
        }
    };
    for i in 0..g {
        let x = -0.5 + step(i);
        let floor = (1.0 - x * x).sqrt();
        for j in 0..g {
            let y = if g == 1 {
                1.0
            } else {
                floor + step(j) * (1.0 - floor)
            };
            let z = Point { x, y };
            let d = nearest(z);
            if d > best.max {
                best.max = d;
                best.at = z;
            }
        }
    }
    best
}

/// Farey triangles crossed by `g` in order from `g.start`, each with
/// vertices in increasing slope order (`1/0` last). A geodesic along a
/// Farey edge yields the two triangles on that edge.
pub fn cutting_sequence(g: &Geodesic, bound: usize) -> Vec<[Slope; 3]> {
    let m = UnimodularMap::normalizing(&g.start);
    let back = m.inverse();
    let x = m.apply(&g.end);
    let floor = x.numer().div_floor(x.denom());
    let int = |k: &BigInt| Slope::integer(k.clone());
    let mut raw: Vec<[Slope; 3]> = Vec::new();
    if x.denom().is_one() {
        let below = &floor - 1;
        let above = &floor + 1;
        raw.push([Slope::infinity(), int(&below), int(&floor)]);
        raw.push([Slope::infinity(), int(&floor), int(&above)]);
    } else {
        let (mut lo, mut hi) = (int(&floor), int(&(&floor + 1)));
        raw.push([Slope::infinity(), lo.clone(), hi.clone()]);
        while raw.len() < bound {
            let med = Slope::from_reduced(lo.numer() + hi.numer(), lo.denom() + hi.denom());
            raw.push([lo.clone(), med.clone(), hi.clone()]);
            if med == x {
                break;
            }
            if x < med {
                hi = med;
            } else {
                lo = med;
            }
        }
    }
    raw.truncate(bound.max(1));
    raw.into_iter()
        .map(|tri| {
            let mut img = tri.map(|s| back.apply(&s));
            img.sort();
            img
        })
        .collect()
}

/// Outcome of the midpoint horoball search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometricHoroball {
    pub vertex: usize,
    /// Vertices realising `κ(τ)`.
    pub pair: (usize, usize),
    pub midpoint: Point,
    /// Distance from the midpoint to the chosen horoball.
    pub distance: f64,
    pub height: BigUint,
    pub kappa: BigUint,
}

impl GeometricHoroball {
    /// `ht / √κ`, to compare against [`height_bound_constant`].
    pub fn ratio(&self) -> f64 {
        self.height.to_f64().unwrap() / self.kappa.to_f64().unwrap().sqrt()
    }
}

/// Takes a pair realising `κ(τ)`, walks the Farey triangles crossed by
/// their geodesic and returns the horoball of `τ` nearest the geodesic
/// midpoint. Every vertex of a crossed triangle must be a vertex of `τ`.
pub fn geometric_horoball(t: &Triangulation, l: &FareyLabelling) -> Result<GeometricHoroball> {
    let (kappa, (u, v)) = kappa_with_pair(l);
    let (a, b) = (l.label(u), l.label(v));
    let mid = geodesic_midpoint(a, b)?;
    let bound = 2 * t.n() + 4;
    let tris = cutting_sequence(&Geodesic::new(a.clone(), b.clone())?, bound);
    let edge = is_farey_edge(a, b);
    let mut best: Option<(f64, usize)> = None;
    for s in tris.iter().flatten() {
        let Some(w) = l.vertex_of(s) else {
            if edge {
                continue;
            }
            return Err(Error::Invariant(format!(
                "{s} is crossed by the geodesic {a} ↔ {b} but is not a vertex"
            )));
        };
        let d = point_horoball_distance(mid, s);
        if best.is_none_or(|(bd, bw)| d < bd - TOLERANCE || (d <= bd + TOLERANCE && w < bw)) {
            best = Some((d, w));
        }
    }
    let (distance, vertex) = best.expect("endpoints are vertices");
    Ok(GeometricHoroball {
        vertex,
        pair: (u, v),
        midpoint: mid,
        distance,
        height: height_labelled(l, vertex),
        kappa,
    })
}

/// True when every vertex `δ` of a Farey triangle crossed by `a ↔ b`
/// satisfies `ι(δ, a) ≤ ι(a, b)` and `ι(δ, b) ≤ ι(a, b)`.
pub fn crossed_within_bound(a: &Slope, b: &Slope) -> Result<bool> {
    let g = Geodesic::new(a.clone(), b.clone())?;
    if is_farey_edge(a, b) {
        return Ok(true);
    }
    let ab = iota(a, b);
    let tris = cutting_sequence(&g, usize::MAX);
    Ok(tris
        .iter()
        .flatten()
        .all(|d| iota(d, a) <= ab && iota(d, b) <= ab))
}

/// Convergents `p_i/q_i` of a rational.
pub fn convergents(s: &Slope) -> Vec<Slope> {
    if s.is_infinity() {
        return vec![s.clone()];
    }
    let (mut p, mut q) = (s.numer().clone(), s.denom().clone());
    let (mut h0, mut h1) = (BigInt::from(0), BigInt::from(1));
    let (mut k0, mut k1) = (BigInt::from(1), BigInt::from(0));
    let mut out = Vec::new();
    while !q.is_zero() {
        let (a, r) = p.div_mod_floor(&q);
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        out.push(Slope::from_reduced(h2.clone(), k2.clone()));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        (p, q) = (q, r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{generate, FamilyKind, FamilySpec};
    use crate::ksystem::kappa;
    use crate::triangulation::{default_labelling, enumerate, random_triangulation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(p: i64, q: i64) -> Slope {
        Slope::new(p, q).unwrap()
    }

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn ford_circle_examples() {
        let inf = ford_circle(&Slope::infinity());
        assert!(inf.center.is_none() && inf.radius.is_none());
        let zero = ford_circle(&s(0, 1));
        assert_eq!(zero.center, Some((rat(0, 1), rat(1, 2))));
        assert_eq!(zero.radius, Some(rat(1, 2)));
        let c = ford_circle(&s(2, 5));
        assert_eq!(c.center, Some((rat(2, 5), rat(1, 50))));
        assert_eq!(c.radius, Some(rat(1, 50)));
    }

    #[test]
    fn ford_circles_of_farey_neighbours_are_tangent() {
        // |c1 − c2| = r1 + r2 exactly, compared after squaring.
        for (a, b) in [(s(0, 1), s(1, 1)), (s(1, 3), s(1, 2)), (s(2, 5), s(3, 7))] {
            let (ca, cb) = (ford_circle(&a), ford_circle(&b));
            let ((x1, y1), (x2, y2)) = (ca.center.unwrap(), cb.center.unwrap());
            let (r1, r2) = (ca.radius.unwrap(), cb.radius.unwrap());
            let dx = &x1 - &x2;
            let dy = &y1 - &y2;
            let sum = &r1 + &r2;
            assert_eq!(&dx * &dx + &dy * &dy, &sum * &sum);
        }
    }

    #[test]
    fn horoball_distance_examples() {
        assert!(
            horoball_distance(&Slope::infinity(), &s(0, 1))
                .unwrap()
                .abs()
                < TOLERANCE
        );
        let d = horoball_distance(&Slope::infinity(), &s(1, 2)).unwrap();
        assert!((d - 2.0 * 2f64.ln()).abs() < TOLERANCE);
        let d = horoball_distance(&s(1, 3), &s(2, 3)).unwrap();
        assert!((d - 2.0 * 3f64.ln()).abs() < TOLERANCE);
        assert!(horoball_distance(&s(1, 3), &s(1, 3)).is_err());
    }

    #[test]
    fn horoball_distance_matches_log_iota() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        while checked < 2000 {
            let a = s(rng.random_range(-1000..1000), rng.random_range(1..1000));
            let b = s(rng.random_range(-1000..1000), rng.random_range(1..1000));
            if a == b {
                continue;
            }
            let i = iota(&a, &b).to_f64().unwrap();
            let d = horoball_distance(&a, &b).unwrap();
            assert!((d - 2.0 * i.ln()).abs() <= TOLERANCE, "{a} {b}");
            checked += 1;
        }
    }

    #[test]
    fn point_distance_examples() {
        let inf = Slope::infinity();
        let d = point_horoball_distance(Point { x: 0.0, y: 0.5 }, &inf);
        assert!((d - 2f64.ln()).abs() < TOLERANCE);
        let d = point_horoball_distance(
            Point {
                x: 0.5,
                y: 3f64.sqrt() / 2.0,
            },
            &inf,
        );
        assert!((d - covering_constant()).abs() < TOLERANCE);
        assert!((covering_constant() - 0.14384).abs() < 1e-5);
        // Top of the Ford circle at 1/2: (1/2, 1/4).
        let d = point_horoball_distance(Point { x: 0.5, y: 0.25 }, &s(1, 2));
        assert!(d.abs() < TOLERANCE);
        // Inside the circle the distance is negative.
        assert!(point_horoball_distance(Point { x: 0.5, y: 0.1 }, &s(1, 2)) < 0.0);
    }

    #[test]
    fn midpoint_examples() {
        let m = geodesic_midpoint(&Slope::infinity(), &s(0, 1)).unwrap();
        assert!((m.x).abs() < TOLERANCE && (m.y - 1.0).abs() < TOLERANCE);
        let m = geodesic_midpoint(&Slope::infinity(), &s(1, 2)).unwrap();
        assert!((m.x - 0.5).abs() < TOLERANCE && (m.y - 0.5).abs() < TOLERANCE);
        assert!(geodesic_midpoint(&s(1, 2), &s(1, 2)).is_err());
    }

    #[test]
    fn midpoint_is_equidistant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let a = s(rng.random_range(-60..60), rng.random_range(1..60));
            let b = s(rng.random_range(-60..60), rng.random_range(1..60));
            if a == b {
                continue;
            }
            let m = geodesic_midpoint(&a, &b).unwrap();
            let (da, db) = (
                point_horoball_distance(m, &a),
                point_horoball_distance(m, &b),
            );
            assert!((da - db).abs() <= TOLERANCE, "{a} {b}: {da} {db}");
            let half = horoball_distance(&a, &b).unwrap() / 2.0;
            assert!((da - half).abs() <= 1e-7);
        }
    }

    #[test]
    fn covering_examples() {
        let one = covering_check(1);
        assert_eq!((one.at.x, one.at.y), (0.0, 1.0));
        assert!(one.max.abs() < TOLERANCE);
        let grid = covering_check(10_000);
        assert!(grid.max <= covering_constant() + 1e-6);
        assert!(grid.max <= 0.143842);
        assert!((grid.at.x.abs() - 0.5).abs() < 1e-9);
        assert!((grid.at.y - 3f64.sqrt() / 2.0).abs() < 1e-9);
        let mut last = f64::NEG_INFINITY;
        for g in 1..30 {
            let r = covering_check(g * g);
            assert!(r.max >= last - TOLERANCE);
            last = r.max;
        }
        assert!((last - covering_constant()).abs() < 1e-9);
    }

    #[test]
    fn cutting_sequence_examples() {
        let g = Geodesic::new(Slope::infinity(), s(1, 1)).unwrap();
        let tris = cutting_sequence(&g, 10);
        assert_eq!(
            tris,
            vec![
                [s(0, 1), s(1, 1), Slope::infinity()],
                [s(1, 1), s(2, 1), Slope::infinity()]
            ]
        );
        let g = Geodesic::new(Slope::infinity(), s(2, 5)).unwrap();
        let tris = cutting_sequence(&g, 100);
        assert_eq!(tris.len(), 4);
        assert!(tris.last().unwrap().contains(&s(2, 5)));
        // Every convergent of 2/5 is a crossed vertex; 1/3 is crossed as well.
        let vertices: Vec<&Slope> = tris.iter().flatten().collect();
        for c in convergents(&s(2, 5)) {
            assert!(vertices.contains(&&c), "{c}");
        }
        assert!(vertices.contains(&&s(1, 3)));
        assert_eq!(cutting_sequence(&g, 2).len(), 2);
    }

    #[test]
    fn cutting_sequences_are_dual_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let a = s(rng.random_range(-40..40), rng.random_range(1..40));
            let b = s(rng.random_range(-40..40), rng.random_range(1..40));
            if a == b {
                continue;
            }
            let tris = cutting_sequence(&Geodesic::new(a.clone(), b.clone()).unwrap(), 10_000);
            assert!(tris.first().unwrap().contains(&a));
            assert!(tris.last().unwrap().contains(&b));
            for w in tris.windows(2) {
                let shared = w[0].iter().filter(|x| w[1].contains(x)).count();
                assert_eq!(shared, 2);
            }
            for t in &tris {
                for i in 0..3 {
                    assert!(is_farey_edge(&t[i], &t[(i + 1) % 3]));
                }
            }
            assert!(crossed_within_bound(&a, &b).unwrap());
        }
    }

    #[test]
    fn convergent_examples() {
        assert_eq!(convergents(&s(2, 5)), vec![s(0, 1), s(1, 2), s(2, 5)]);
        assert_eq!(convergents(&s(-3, 2)), vec![s(-2, 1), s(-3, 2)]);
    }

    #[test]
    fn geometric_horoball_small_corpus() {
        let c = height_bound_constant();
        for n in 3..=8 {
            for t in enumerate(n, false).unwrap() {
                let l = default_labelling(&t);
                let g = geometric_horoball(&t, &l).unwrap();
                assert!(g.vertex < n);
                assert!(g.ratio() <= c + TOLERANCE);
                assert_eq!(g.kappa, kappa(&t));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let n = rng.random_range(3..=12);
            let t = random_triangulation(n, &mut rng);
            let l = default_labelling(&t);
            let g = geometric_horoball(&t, &l).unwrap();
            assert!(g.distance <= covering_constant() + 1e-6, "{t:?}");
        }
    }

    #[test]
    fn geometric_horoball_on_farey_family() {
        for h in 3..=7 {
            let (t, l) = generate(&FamilySpec::new(FamilyKind::Farey, h).unwrap()).unwrap();
            let g = geometric_horoball(&t, &l).unwrap();
            assert!(g.ratio() <= height_bound_constant());
        }
    }
}
