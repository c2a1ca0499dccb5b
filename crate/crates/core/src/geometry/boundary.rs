use alloc::vec;
use alloc::vec::Vec;

use super::{DiskDomain, Point};
use crate::error::invalid;
use crate::quadrature::gauss_legendre_unit;
use crate::{math, Error, Result};

/// One boundary sample: position, frame and quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    /// Arclength from the start of the boundary cycle.
    pub s: f64,
    pub point: Point,
    pub tangent: Point,
    pub normal: Point,
    pub weight: f64,
    /// Index of the straight boundary edge carrying the node (0 on a disk).
    pub edge: usize,
    /// Local coordinate of the node on its edge, in `(0, 1)`.
    pub local: f64,
}

/// How samples are placed on each straight boundary segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeRule {
    /// `q`-point Gauss–Legendre rule per segment.
    Gauss(usize),
    /// Split each segment into `m` equal pieces, one midpoint sample each.
    Midpoints(usize),
    /// Split each segment into pieces no longer than `h`, one midpoint each.
    Spacing(f64),
}

/// Arclength parameterization of a closed, counterclockwise boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryParam {
    pub total_length: f64,
    pub nodes: Vec<BoundaryNode>,
    /// Arclengths of polygon corners, ascending (empty for smooth boundaries).
    pub vertex_positions: Vec<f64>,
    /// Arclength interval `[a, b)` of every side between consecutive corners.
    /// The last side may wrap past `total_length`.
    pub side_ranges: Vec<(f64, f64)>,
    /// Straight segments `(start, end)` in traversal order; empty on a disk.
    pub segments: Vec<(Point, Point)>,
}

impl BoundaryParam {
    /// Uniform angular samples on a circle, the first at angle 0.
    pub fn circle(disk: &DiskDomain, n: usize) -> Self {
        let r = disk.radius;
        let weight = math::TAU * r / n as f64;
        let nodes = (0..n)
            .map(|i| {
                let th = math::TAU * i as f64 / n as f64;
                let (c, s) = (math::cos(th), math::sin(th));
                let tangent = Point::new(-s, c);
                BoundaryNode {
                    s: r * th,
                    point: Point::new(disk.center.x + r * c, disk.center.y + r * s),
                    tangent,
                    normal: tangent.rotate_cw(),
                    weight,
                    edge: 0,
                    local: i as f64 / n as f64,
                }
            })
            .collect();
        let total_length = math::TAU * r;
        Self {
            total_length,
            nodes,
            vertex_positions: Vec::new(),
            side_ranges: vec![(0.0, total_length)],
            segments: Vec::new(),
        }
    }

    /// Samples on a closed chain of straight segments listed counterclockwise.
    pub fn from_segments(segments: &[(Point, Point)], rule: EdgeRule) -> Result<Self> {
        if segments.len() < 3 {
            return Err(invalid(
                "a closed polygonal boundary needs at least three segments",
            ));
        }
        for (k, seg) in segments.iter().enumerate() {
            let next = segments[(k + 1) % segments.len()];
            if seg.1.dist(next.0) > 1e-12 * (1.0 + seg.1.norm()) {
                return Err(Error::InvalidMesh(alloc::format!(
                    "boundary chain is open after segment {k}"
                )));
            }
            if !(seg.0.dist(seg.1) > 0.0) {
                return Err(Error::InvalidMesh(alloc::format!(
                    "segment {k} has zero length"
                )));
            }
        }
        let signed_area: f64 = segments.iter().map(|(a, b)| a.cross(*b)).sum::<f64>() * 0.5;
        if signed_area <= 0.0 {
            return Err(Error::InvalidMesh(
                "boundary is not positively oriented".into(),
            ));
        }
        let gauss = match rule {
            EdgeRule::Gauss(q) if q >= 1 => Some(gauss_legendre_unit(q)),
            EdgeRule::Gauss(_) => return Err(invalid("Gauss rule needs at least one point")),
            _ => None,
        };
        let mut nodes = Vec::new();
        let mut offset = 0.0;
        let mut corners = Vec::new();
        for (k, &(a, b)) in segments.iter().enumerate() {
            let d = b.sub(a);
            let len = d.norm();
            let tangent = d.scale(1.0 / len);
            let normal = tangent.rotate_cw();
            let prev = segments[(k + segments.len() - 1) % segments.len()];
            let pd = prev.1.sub(prev.0);
            let turn = math::abs(pd.cross(d)) / (pd.norm() * len);
            if turn > 1e-10 || pd.dot(d) < 0.0 {
                corners.push(offset);
            }
            let mut place = |t: f64, w: f64| {
                nodes.push(BoundaryNode {
                    s: offset + t * len,
                    point: a.add(d.scale(t)),
                    tangent,
                    normal,
                    weight: w * len,
                    edge: k,
                    local: t,
                });
            };
            match rule {
                EdgeRule::Gauss(_) => {
                    let (x, w) = gauss.as_ref().unwrap();
                    for (t, wt) in x.iter().zip(w) {
                        place(*t, *wt);
                    }
                }
                EdgeRule::Midpoints(_) | EdgeRule::Spacing(_) => {
                    let m = match rule {
                        EdgeRule::Midpoints(m) => m.max(1),
                        EdgeRule::Spacing(h) => (math::ceil(len / h - 1e-9) as usize).max(1),
                        EdgeRule::Gauss(_) => unreachable!(),
                    };
                    for i in 0..m {
                        place((i as f64 + 0.5) / m as f64, 1.0 / m as f64);
                    }
                }
            }
            offset += len;
        }
        let total_length = offset;
        let side_ranges = if corners.is_empty() {
            vec![(0.0, total_length)]
        } else {
            (0..corners.len())
                .map(|i| {
                    let a = corners[i];
                    let b = if i + 1 < corners.len() {
                        corners[i + 1]
                    } else {
                        corners[0] + total_length
                    };
                    (a, b)
                })
                .collect()
        };
        Ok(Self {
            total_length,
            nodes,
            vertex_positions: corners,
            side_ranges,
            segments: segments.to_vec(),
        })
    }

    /// Closed polygon given by its corners in counterclockwise order.
    pub fn polygon(corners: &[Point], rule: EdgeRule) -> Result<Self> {
        let segs: Vec<(Point, Point)> = (0..corners.len())
            .map(|i| (corners[i], corners[(i + 1) % corners.len()]))
            .collect();
        Self::from_segments(&segs, rule)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.weight).collect()
    }

    pub fn arclengths(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.s).collect()
    }

    /// Discrete `L²(∂Ω)` inner product of two sampled functions.
    pub fn l2_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(a.iter().zip(b))
            .map(|(n, (x, y))| n.weight * x * y)
            .sum()
    }

    /// Side index containing arclength `s` (taken modulo the total length).
    pub fn side_of(&self, s: f64) -> usize {
        let l = self.total_length;
        let s = s - math::floor(s / l) * l;
        for (k, &(a, b)) in self.side_ranges.iter().enumerate() {
            if (s >= a && s < b) || (b > l && s + l >= a && s + l < b) {
                return k;
            }
        }
        0
    }

    /// Point at arclength `s` (modulo the total length) on a polygonal boundary.
    pub fn point_at(&self, s: f64) -> Option<Point> {
        let l = self.total_length;
        let mut s = s - math::floor(s / l) * l;
        for &(a, b) in &self.segments {
            let len = a.dist(b);
            if s <= len {
                return Some(a.add(b.sub(a).scale(s / len)));
            }
            s -= len;
        }
        self.segments.last().map(|seg| seg.1)
    }

    /// Check the stored invariants: increasing arclengths inside `[0, L)`
    /// and orthonormal frames.
    pub fn validate(&self) -> Result<()> {
        for w in self.nodes.windows(2) {
            if !(w[1].s > w[0].s) {
                return Err(Error::InvalidMesh(
                    "boundary arclengths are not strictly increasing".into(),
                ));
            }
        }
        for n in &self.nodes {
            if n.s < 0.0 || n.s >= self.total_length {
                return Err(Error::InvalidMesh(
                    "boundary arclength outside [0, L)".into(),
                ));
            }
            if math::abs(n.tangent.norm() - 1.0) > 1e-12
                || math::abs(n.normal.norm() - 1.0) > 1e-12
                || math::abs(n.tangent.dot(n.normal)) > 1e-12
            {
                return Err(Error::InvalidMesh(
                    "boundary frame is not orthonormal".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A scalar function sampled at the nodes of a [`BoundaryParam`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    pub values: Vec<f64>,
}

impl BoundarySamples {
    pub fn new(param: &BoundaryParam, values: Vec<f64>) -> Result<Self> {
        if values.len() != param.len() {
            return Err(Error::BasisMismatch(alloc::format!(
                "{} samples for {} boundary nodes",
                values.len(),
                param.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn from_fn(param: &BoundaryParam, f: impl Fn(&BoundaryNode) -> f64) -> Self {
        Self {
            values: param.nodes.iter().map(f).collect(),
        }
    }

    pub fn zeros(param: &BoundaryParam) -> Self {
        Self {
            values: vec![0.0; param.len()],
        }
    }

    pub fn check(&self, param: &BoundaryParam) -> Result<()> {
        if self.values.len() != param.len() {
            return Err(Error::BasisMismatch(alloc::format!(
                "{} samples for {} boundary nodes",
                self.values.len(),
                param.len()
            )));
        }
        Ok(())
    }

    pub fn l2_norm(&self, param: &BoundaryParam) -> f64 {
        math::sqrt(param.l2_inner(&self.values, &self.values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn square_sides_and_corners() {
        let p = BoundaryParam::polygon(&unit_square(), EdgeRule::Gauss(3)).unwrap();
        assert_eq!(p.vertex_positions, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(p.side_ranges.len(), 4);
        let total: f64 = p.side_ranges.iter().map(|(a, b)| b - a).sum();
        assert_eq!(total, 4.0);
        assert!((p.weights().iter().sum::<f64>() - 4.0).abs() < 1e-14);
        p.validate().unwrap();
        assert_eq!(p.side_of(2.5), 2);
        assert_eq!(p.side_of(4.25), 0);
    }

    #[test]
    fn clockwise_polygon_rejected() {
        let mut v = unit_square();
        v.reverse();
        assert!(BoundaryParam::polygon(&v, EdgeRule::Midpoints(2)).is_err());
    }

    #[test]
    fn collinear_joints_are_not_corners() {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(0.5, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let p = BoundaryParam::polygon(&v, EdgeRule::Spacing(0.1)).unwrap();
        assert_eq!(p.vertex_positions.len(), 4);
        assert_eq!(p.len(), 40);
    }

    #[test]
    fn sample_length_is_checked() {
        let p = BoundaryParam::polygon(&unit_square(), EdgeRule::Midpoints(1)).unwrap();
        assert!(BoundarySamples::new(&p, vec![0.0; 3]).is_err());
        assert!(BoundarySamples::new(&p, vec![0.0; 4]).is_ok());
    }
}
