use super::{BoundaryParam, Point};
use crate::error::invalid;
use crate::Result;

/// Disk of radius `radius` centred at `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskDomain {
    pub radius: f64,
    pub center: Point,
}

impl DiskDomain {
    pub fn new(radius: f64) -> Result<Self> {
        Self::with_center(radius, Point::default())
    }

    pub fn with_center(radius: f64, center: Point) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid("disk radius must be positive and finite"));
        }
        Ok(Self { radius, center })
    }

    pub fn perimeter(&self) -> f64 {
        crate::math::TAU * self.radius
    }
}

/// Disk with `n_boundary_samples` uniformly spaced boundary nodes, the first at angle 0.
pub fn build_disk(radius: f64, n_boundary_samples: usize) -> Result<(DiskDomain, BoundaryParam)> {
    let disk = DiskDomain::new(radius)?;
    if n_boundary_samples < 8 {
        return Err(invalid("a disk boundary needs at least 8 samples"));
    }
    let param = BoundaryParam::circle(&disk, n_boundary_samples);
    Ok((disk, param))
}
