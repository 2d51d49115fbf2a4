//! Convex pieces (polygons and segments) carrying a uniform probability measure.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

const COLLINEAR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Segment { a: [f64; 2], b: [f64; 2] },
    /// Counter-clockwise hull with fan-triangle cumulative areas.
    Polygon { hull: Vec<[f64; 2]>, area: f64, fan: Vec<f64> },
}

/// The uniform measure on a convex polygon or segment, with a mixture weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiece")]
pub struct PolygonPiece {
    vertices: Vec<[f64; 2]>,
    weight: f64,
    #[serde(skip_serializing)]
    shape: Shape,
}

#[derive(Deserialize)]
struct RawPiece {
    vertices: Vec<[f64; 2]>,
    weight: f64,
}

impl TryFrom<RawPiece> for PolygonPiece {
    type Error = Error;

    fn try_from(raw: RawPiece) -> Result<Self> {
        PolygonPiece::new(raw.vertices, raw.weight)
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; collinear points are dropped.
fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|p, q| p.partial_cmp(q).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= COLLINEAR_EPS
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn shoelace(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        / 2.0
}

/// Sutherland–Hodgman clip of a convex polygon to the half-plane `coord[axis] ≤ bound`.
fn clip(poly: &[[f64; 2]], axis: usize, bound: f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let (p_in, q_in) = (p[axis] <= bound, q[axis] <= bound);
        if p_in {
            out.push(p);
        }
        if p_in != q_in {
            let t = (bound - p[axis]) / (q[axis] - p[axis]);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

impl PolygonPiece {
    /// Validates the vertices (inside the unit square, convex position, not a point).
    ///
    /// Collinear vertex sets become the segment between their extreme points.
    pub fn new(vertices: Vec<[f64; 2]>, weight: f64) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::invalid("a piece needs at least two vertices"));
        }
        if let Some(v) = vertices
            .iter()
            .find(|v| !v.iter().all(|c| c.is_finite() && (0.0..=1.0).contains(c)))
        {
            return Err(Error::invalid(format!("vertex {v:?} lies outside the unit square")));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::invalid(format!("piece weight must be nonnegative, got {weight}")));
        }
        let hull = convex_hull(&vertices);
        let shape = match hull.len() {
            0 | 1 => return Err(Error::invalid("a piece must not collapse to a point")),
            2 => Shape::Segment { a: hull[0], b: hull[1] },
            _ => {
                let mut distinct = vertices.clone();
                distinct.sort_by(|p, q| p.partial_cmp(q).expect("finite coordinates"));
                distinct.dedup();
                if distinct.len() != hull.len() {
                    return Err(Error::invalid(format!(
                        "vertices {vertices:?} are not in convex position"
                    )));
                }
                let mut fan = Vec::with_capacity(hull.len() - 2);
                let mut acc = 0.0;
                for i in 1..hull.len() - 1 {
                    acc += cross(hull[0], hull[i], hull[i + 1]) / 2.0;
                    fan.push(acc);
                }
                Shape::Polygon { area: shoelace(&hull), hull, fan }
            }
        };
        Ok(PolygonPiece { vertices, weight, shape })
    }

    /// Convenience: the segment from `a` to `b`.
    pub fn segment(a: [f64; 2], b: [f64; 2], weight: f64) -> Result<Self> {
        Self::new(vec![a, b], weight)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn is_segment(&self) -> bool {
        matches!(self.shape, Shape::Segment { .. })
    }

    /// Fraction of the piece lying in `[0, x] × [0, y]`.
    pub fn lower_left_fraction(&self, x: f64, y: f64) -> f64 {
        match &self.shape {
            Shape::Segment { a, b } => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for (axis, bound) in [(0, x), (1, y)] {
                    let d = b[axis] - a[axis];
                    if d == 0.0 {
                        if a[axis] > bound {
                            return 0.0;
                        }
                    } else {
                        let t = (bound - a[axis]) / d;
                        if d > 0.0 {
                            hi = hi.min(t);
                        } else {
                            lo = lo.max(t);
                        }
                    }
                }
                (hi - lo).clamp(0.0, 1.0)
            }
            Shape::Polygon { hull, area, .. } => {
                let clipped = clip(&clip(hull, 0, x), 1, y);
                if clipped.len() < 3 {
                    0.0
                } else {
                    (shoelace(&clipped) / area).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// A uniform point of the piece.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        match &self.shape {
            Shape::Segment { a, b } => {
                let t: f64 = rng.gen();
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            }
            Shape::Polygon { hull, fan, .. } => {
                let target = rng.gen::<f64>() * fan[fan.len() - 1];
                let i = fan.partition_point(|&c| c <= target).min(fan.len() - 1) + 1;
                let (p, q, r) = (hull[0], hull[i], hull[i + 1]);
                let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
                if u + v > 1.0 {
                    u = 1.0 - u;
                    v = 1.0 - v;
                }
                [
                    p[0] + u * (q[0] - p[0]) + v * (r[0] - p[0]),
                    p[1] + u * (q[1] - p[1]) + v * (r[1] - p[1]),
                ]
            }
        }
    }
}
