//! Periodic homeomorphisms of the circle and the arc-window argument.
//!
//! A period-`p` circle homeomorphism is realized as `h = g o R_{q/p} o g^-1`
//! with `g` a piecewise-linear homeomorphism fixing 0. Angles are handled in
//! turns (`[0, 1)` is one revolution) internally; lengths reported to callers
//! are radians or chords.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::isometry::gcd;
use crate::orbit::Orbit;
use crate::seed;

pub const MIN_SLOPE: f64 = 1.0 / 64.0;
pub const MAX_SLOPE: f64 = 64.0;
/// Orbit points closer than this (radians) are treated as coincident.
pub const COINCIDENCE: f64 = 1e-10;

/// Increasing PL homeomorphism of `[0, 1]` with `g(0) = 0`, `g(1) = 1`,
/// extended to a lift of a circle homeomorphism by `G(u + 1) = G(u) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct PlCircleMap {
    knots: Vec<[f64; 2]>,
}

impl PlCircleMap {
    pub fn identity() -> Self {
        PlCircleMap {
            knots: vec![[0.0, 0.0], [1.0, 1.0]],
        }
    }

    pub fn new(knots: Vec<[f64; 2]>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidCircleMap(m));
        if knots.len() < 2 {
            return bad("need at least the endpoints (0,0) and (1,1)".into());
        }
        if knots[0] != [0.0, 0.0] || *knots.last().unwrap() != [1.0, 1.0] {
            return bad("breakpoints must start at (0,0) and end at (1,1)".into());
        }
        for w in knots.windows(2) {
            let (du, dv) = (w[1][0] - w[0][0], w[1][1] - w[0][1]);
            if !(du > 0.0 && dv > 0.0) {
                return bad(format!("non-monotone breakpoints {:?} -> {:?}", w[0], w[1]));
            }
            let slope = dv / du;
            if !(MIN_SLOPE * (1.0 - 1e-12)..=MAX_SLOPE * (1.0 + 1e-12)).contains(&slope) {
                return bad(format!("slope {slope} outside [1/64, 64]"));
            }
        }
        Ok(PlCircleMap { knots })
    }

    /// Random map with 8..=32 interior breakpoints and slopes in `[1/64, 64]`.
    /// The distortion level is itself random, from nearly rigid to the full
    /// slope range.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let m = rng.random_range(8..=32);
        let level: f64 = rng.random_range(0.05..1.0);
        let mut us: Vec<f64> = (0..m).map(|_| rng.random_range(0.001..0.999)).collect();
        us.sort_by(f64::total_cmp);
        us.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let mut cuts = vec![0.0];
        cuts.extend(us);
        cuts.push(1.0);
        // Log-uniform slopes in [1/8, 8]; renormalizing the total rise by a
        // factor in [1/8, 8] keeps every slope inside [1/64, 64].
        let rises: Vec<f64> = cuts
            .windows(2)
            .map(|w| (w[1] - w[0]) * 8f64.powf(level * rng.random_range(-1.0..1.0)))
            .collect();
        let total: f64 = rises.iter().sum();
        let mut knots = vec![[0.0, 0.0]];
        let mut v = 0.0;
        for (i, r) in rises.iter().enumerate() {
            v += r / total;
            knots.push([cuts[i + 1], v]);
        }
        *knots.last_mut().unwrap() = [1.0, 1.0];
        PlCircleMap { knots }
    }

    pub fn knots(&self) -> &[[f64; 2]] {
        &self.knots
    }

    fn eval_unit(knots: &[[f64; 2]], u: f64, axis: usize) -> f64 {
        let other = 1 - axis;
        let i = knots.partition_point(|k| k[axis] <= u).clamp(1, knots.len() - 1);
        let (a, b) = (knots[i - 1], knots[i]);
        let t = (u - a[axis]) / (b[axis] - a[axis]);
        a[other] + t * (b[other] - a[other])
    }

    /// Lift `G` on the real line.
    pub fn lift(&self, u: f64) -> f64 {
        let f = u.floor();
        f + Self::eval_unit(&self.knots, u - f, 0)
    }

    /// Inverse lift `G^-1`.
    pub fn lift_inverse(&self, v: f64) -> f64 {
        let f = v.floor();
        f + Self::eval_unit(&self.knots, v - f, 1)
    }

    pub fn max_slope(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]))
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<[f64; 2]>> for PlCircleMap {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        PlCircleMap::new(v)
    }
}

impl From<PlCircleMap> for Vec<[f64; 2]> {
    fn from(g: PlCircleMap) -> Self {
        g.knots
    }
}

/// `h = g o R_{q/p} o g^-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleHomeo {
    pub q: usize,
    pub p: usize,
    pub breakpoints: PlCircleMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Builds a conjugated rotation; a random conjugator is drawn from `seed`
/// when `breakpoints` is `None`.
pub fn build_pl_conjugacy(q: usize, p: usize, breakpoints: Option<Vec<[f64; 2]>>, seed: u64) -> Result<CircleHomeo> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("period must be >= 2, got {p}")));
    }
    if gcd(q % p, p) != 1 {
        return Err(Error::InvalidParameter(format!("gcd({q}, {p}) != 1")));
    }
    let (g, seed) = match breakpoints {
        Some(k) => (PlCircleMap::new(k)?, None),
        None => (PlCircleMap::random(&mut seed::rng(seed)), Some(seed)),
    };
    Ok(CircleHomeo {
        q: q % p,
        p,
        breakpoints: g,
        seed,
    })
}

impl CircleHomeo {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || gcd(self.q % self.p, self.p) != 1 {
            return Err(Error::InvalidParameter(format!("gcd({}, {}) != 1", self.q, self.p)));
        }
        PlCircleMap::new(self.breakpoints.knots.clone()).map(|_| ())
    }

    fn step(&self) -> f64 {
        self.q as f64 / self.p as f64
    }

    /// Lift `F(theta) = G(G^-1(theta) + q/p)`; strictly increasing with
    /// `F(theta + 1) = F(theta) + 1`.
    pub fn lift(&self, theta: f64) -> f64 {
        let g = &self.breakpoints;
        g.lift(g.lift_inverse(theta) + self.step())
    }

    /// `h` on angles in turns, reduced to `[0, 1)`.
    pub fn apply_turns(&self, theta: f64) -> f64 {
        self.lift(theta).rem_euclid(1.0)
    }

    pub fn iterate_turns(&self, theta: f64, times: usize) -> f64 {
        (0..times).fold(theta, |t, _| self.apply_turns(t))
    }

    pub fn apply(&self, x: &SpherePoint) -> SpherePoint {
        turns_to_point(self.apply_turns(point_to_turns(x)))
    }

    /// Largest `|h^p(theta) - theta|` (as a chord) over `probes` uniform angles.
    pub fn period_residual(&self, probes: usize) -> f64 {
        (0..probes)
            .map(|i| {
                let t = (i as f64 + 0.5) / probes as f64;
                let back = self.iterate_turns(t, self.p);
                turns_to_point(back).chord(&turns_to_point(t))
            })
            .fold(0.0, f64::max)
    }
}

pub fn point_to_turns(x: &SpherePoint) -> f64 {
    (x.angle() / TAU).rem_euclid(1.0)
}

pub fn turns_to_point(t: f64) -> SpherePoint {
    SpherePoint::on_circle(TAU * t)
}

/// Gaps between circularly adjacent orbit points.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcGaps {
    /// Orbit positions (`0` is `h^1(x)`) in counterclockwise order.
    pub order: Vec<usize>,
    /// `gaps[j]` is the arc (radians) from `order[j]` to `order[j + 1]`.
    pub gaps: Vec<f64>,
}

pub fn arc_gaps(orbit: &Orbit) -> Result<ArcGaps> {
    let pts = &orbit.points;
    if pts[0].ambient_dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: pts[0].ambient_dim(),
        });
    }
    let angles: Vec<f64> = pts.iter().map(|x| x.angle().rem_euclid(TAU)).collect();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]).then(a.cmp(&b)));
    let p = order.len();
    let gaps: Vec<f64> = (0..p)
        .map(|j| {
            let a = angles[order[j]];
            let b = angles[order[(j + 1) % p]];
            if j + 1 == p {
                b + TAU - a
            } else {
                b - a
            }
        })
        .collect();
    if p > 1 && gaps.iter().any(|&g| g < COINCIDENCE) {
        return Err(Error::DegenerateOrbit);
    }
    Ok(ArcGaps { order, gaps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// The maximal k-window of the base orbit lies in `[2 pi k / p, pi]`.
    Window,
    /// The maximal window exceeded `pi`; continuity produced an orbit with an
    /// antipodal pair.
    Antipodal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessChord {
    /// Point whose orbit realizes the chord (the input point, unless `kind`
    /// is `Antipodal`).
    pub base: SpherePoint,
    /// Iterate exponents `(i, j)` in `1..=p` with chord `|h^i(base) - h^j(base)|`.
    pub indices: (usize, usize),
    pub endpoints: (SpherePoint, SpherePoint),
    pub chord: f64,
    /// Largest sum of `k` consecutive gaps of the input orbit (radians).
    pub window_sum: f64,
    pub kind: WitnessKind,
}

/// Chord of length at least `d_p` in some orbit, for odd `p = 2k + 1`.
///
/// Among the `p` windows of `k` consecutive gaps one has sum
/// `S >= 2 pi k / p` (each gap is counted `k` times over all windows, total
/// `2 pi k`). If `S <= pi` its endpoints are at chord `2 sin(S/2) >= d_p`.
/// Otherwise the window length, followed continuously between a window above
/// `pi` and one below it, crosses `pi` and yields an antipodal pair.
pub fn witness_chord(h: &CircleHomeo, x: &SpherePoint) -> Result<WitnessChord> {
    let p = h.p;
    if p.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "witness chords need odd period, got {p}; use antipodal_search"
        )));
    }
    if x.ambient_dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: x.ambient_dim(),
        });
    }
    let k = p / 2;
    let orbit = circle_orbit(h, x);
    let gaps = arc_gaps(&orbit)?;
    let (start, window_sum) = (0..p)
        .map(|s| (s, (0..k).map(|j| gaps.gaps[(s + j) % p]).sum::<f64>()))
        .fold((0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });

    if window_sum <= PI {
        let i = gaps.order[start];
        let j = gaps.order[(start + k) % p];
        let (a, b) = (orbit.points[i].clone(), orbit.points[j].clone());
        return Ok(WitnessChord {
            base: x.clone(),
            indices: (i + 1, j + 1),
            chord: a.chord(&b),
            endpoints: (a, b),
            window_sum,
            kind: WitnessKind::Window,
        });
    }

    // In the conjugated coordinate u the k-th circular successor of g(u) is
    // g(u + k/p); the window length in turns is W(u) = G(u + k/p) - G(u).
    let g = &h.breakpoints;
    let shift = k as f64 / p as f64;
    let window = |u: f64| g.lift(u + shift) - g.lift(u);
    let u0 = g.lift_inverse(point_to_turns(x));
    let samples: Vec<f64> = (0..p).map(|j| u0 + j as f64 / p as f64).collect();
    let hi = *samples
        .iter()
        .max_by(|a, b| window(**a).total_cmp(&window(**b)))
        .expect("p >= 3");
    let lo = *samples
        .iter()
        .min_by(|a, b| window(**a).total_cmp(&window(**b)))
        .expect("p >= 3");
    let (mut a, mut b) = (hi, lo);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if window(m) > 0.5 {
            a = m;
        } else {
            b = m;
        }
        if (a - b).abs() < 1e-16 {
            break;
        }
    }
    let u = 0.5 * (a + b);
    let base = turns_to_point(g.lift(u).rem_euclid(1.0));
    // h^m(g(u)) = g(u + m q / p), so the successor is h^m with m q = k mod p.
    let m = (1..=p).find(|&m| (m * h.q) % p == k).expect("q is invertible mod p");
    let orbit = circle_orbit(h, &base);
    let (pa, pb) = (orbit.points[p - 1].clone(), orbit.points[m - 1].clone());
    Ok(WitnessChord {
        base,
        indices: (p, m),
        chord: pa.chord(&pb),
        endpoints: (pa, pb),
        window_sum,
        kind: WitnessKind::Antipodal,
    })
}

fn circle_orbit(h: &CircleHomeo, x: &SpherePoint) -> Orbit {
    let mut points = Vec::with_capacity(h.p);
    let mut y = x.clone();
    for _ in 0..h.p {
        y = h.apply(&y);
        points.push(y.clone());
    }
    Orbit::from_points(x.clone(), points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntipodalPoint {
    pub x: SpherePoint,
    pub turns: f64,
    /// `|h^k(x) + x|`.
    pub residual: f64,
}

/// Point with `h^k(x) = -x` for a map of even period `2k`, by sign-change
/// bisection of `F^k(theta) - theta - (m + 1/2)`.
pub fn antipodal_search(h: &CircleHomeo) -> Result<AntipodalPoint> {
    if !h.p.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "antipodal search needs even period, got {}",
            h.p
        )));
    }
    let k = h.p / 2;
    let lift_k = |t: f64| (0..k).fold(t, |s, _| h.lift(s));
    let target = lift_k(0.0).floor() + 0.5;
    let phi = |t: f64| lift_k(t) - t - target;

    let finish = |t: f64| {
        let x = turns_to_point(t);
        let y = turns_to_point(h.iterate_turns(t, k));
        let residual = (y.coords() + x.coords()).norm();
        AntipodalPoint { x, turns: t, residual }
    };

    const GRID: usize = 1024;
    let mut prev_t = 0.0;
    let mut prev = phi(0.0);
    if prev == 0.0 {
        return Ok(finish(0.0));
    }
    for i in 1..=GRID {
        let t = i as f64 / GRID as f64;
        let v = phi(t);
        if v == 0.0 {
            return Ok(finish(t));
        }
        if v.signum() != prev.signum() {
            let (mut a, mut b, fa) = (prev_t, t, prev);
            // Bisect to adjacent floats; phi can be steep (slopes up to 64^k).
            loop {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = phi(m);
                if fm == 0.0 {
                    return Ok(finish(m));
                }
                if fm.signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(finish(0.5 * (a + b)));
        }
        prev_t = t;
        prev = v;
    }
    Err(Error::NonConvergence {
        solver: "antipodal-search",
        iterations: GRID,
        residual: prev.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::polygon_diameter;

    fn homeo(q: usize, p: usize, knots: Vec<[f64; 2]>) -> CircleHomeo {
        build_pl_conjugacy(q, p, Some(knots), 0).unwrap()
    }

    #[test]
    fn identity_conjugator_is_a_rotation() {
        let h = homeo(1, 5, vec![[0.0, 0.0], [1.0, 1.0]]);
        let y = h.apply(&SpherePoint::on_circle(0.0));
        assert!(y.chord(&SpherePoint::on_circle(TAU / 5.0)) < 1e-14);
    }

    #[test]
    fn random_conjugacy_is_exactly_periodic() {
        for s in 0..10 {
            let h = build_pl_conjugacy(2, 5, None, s).unwrap();
            assert!(h.period_residual(1000) <= 1e-10);
            assert!(h.breakpoints.max_slope() <= MAX_SLOPE);
        }
    }

    #[test]
    fn rejects_invalid_conjugators() {
        assert!(build_pl_conjugacy(2, 4, None, 0).is_err());
        assert!(build_pl_conjugacy(1, 5, Some(vec![[0.0, 0.0], [0.5, 0.7], [0.4, 0.8], [1.0, 1.0]]), 0).is_err());
        assert!(build_pl_conjugacy(1, 5, Some(vec![[0.0, 0.0], [0.001, 0.9], [1.0, 1.0]]), 0).is_err());
    }

    #[test]
    fn lift_round_trip() {
        let g = PlCircleMap::random(&mut seed::rng(5));
        for i in 0..100 {
            let u = -1.3 + i as f64 * 0.037;
            assert!((g.lift_inverse(g.lift(u)) - u).abs() < 1e-13);
        }
    }

    #[test]
    fn slope_four_conjugator_gives_irregular_gaps() {
        let h = homeo(1, 5, vec![[0.0, 0.0], [0.2, 0.8], [1.0, 1.0]]);
        let orbit = circle_orbit(&h, &SpherePoint::on_circle(0.3));
        let gaps = arc_gaps(&orbit).unwrap();
        assert!((gaps.gaps.iter().sum::<f64>() - TAU).abs() < 1e-9);
        let spread =
            gaps.gaps.iter().cloned().fold(0.0, f64::max) - gaps.gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread > 0.1);
    }

    #[test]
    fn pentagon_witness() {
        let h = homeo(2, 5, vec![[0.0, 0.0], [1.0, 1.0]]);
        let w = witness_chord(&h, &SpherePoint::on_circle(0.0)).unwrap();
        assert_eq!(w.kind, WitnessKind::Window);
        assert!((w.window_sum - TAU * 2.0 / 5.0).abs() < 1e-12);
        assert!((w.chord - polygon_diameter(5)).abs() < 1e-12);
    }

    #[test]
    fn triangle_witness_is_sqrt_three() {
        let h = homeo(1, 3, vec![[0.0, 0.0], [1.0, 1.0]]);
        let w = witness_chord(&h, &SpherePoint::on_circle(1.0)).unwrap();
        assert!((w.chord - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn even_period_is_rejected_by_witness_chord() {
        let h = homeo(1, 4, vec![[0.0, 0.0], [1.0, 1.0]]);
        assert!(witness_chord(&h, &SpherePoint::on_circle(0.0)).is_err());
    }

    #[test]
    fn half_turn_antipode_at_zero() {
        let h = homeo(1, 2, vec![[0.0, 0.0], [1.0, 1.0]]);
        let a = antipodal_search(&h).unwrap();
        assert_eq!(a.turns, 0.0);
        assert!(a.residual < 1e-15);
        let h = homeo(1, 4, vec![[0.0, 0.0], [1.0, 1.0]]);
        let a = antipodal_search(&h).unwrap();
        assert!(a.residual < 1e-12);
    }

    #[test]
    fn conjugated_quarter_turn_has_an_antipodal_point() {
        for s in 0..20 {
            let h = build_pl_conjugacy(3, 4, None, s).unwrap();
            let a = antipodal_search(&h).unwrap();
            assert!(a.residual <= 1e-10, "seed {s}: {}", a.residual);
        }
    }

    #[test]
    fn json_shape() {
        let h = homeo(1, 3, vec![[0.0, 0.0], [0.5, 0.25], [1.0, 1.0]]);
        let v = serde_json::to_value(&h).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"q": 1, "p": 3, "breakpoints": [[0.0, 0.0], [0.5, 0.25], [1.0, 1.0]]})
        );
        let back: CircleHomeo = serde_json::from_value(v).unwrap();
        assert_eq!(back, h);
    }
}
