//! Planar domains: analytic disks, P1 / C1-rectangle meshes, and the
//! arclength parameterization of their boundaries.
//!
//! Boundaries are always traversed counterclockwise; the outward normal is
//! the clockwise rotation of the unit tangent.

mod boundary;
mod disk;
mod mesh;

pub use boundary::{BoundaryNode, BoundaryParam, BoundarySamples, EdgeRule};
pub use disk::{build_disk, DiskDomain};
pub use mesh::{build_polygon_disk_mesh, build_rect_mesh, BoundaryEdge, ElementType, Mesh2D};

use crate::math;

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    /// Clockwise rotation by a right angle; outward normal of a CCW tangent.
    pub fn rotate_cw(self) -> Point {
        Point::new(self.y, -self.x)
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }
}
