//! Bicubic Hermite rectangles for `k = 2`. Every vertex `v` carries the four
//! unknowns `u, u_x, u_y, u_xy` at global indices `4v .. 4v + 4`.

use alloc::vec::Vec;

use crate::geometry::{BoundaryParam, Mesh2D, Point};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::math;
use crate::quadrature::gauss_legendre_unit;

pub(super) const DOFS_PER_VERTEX: usize = 4;

/// Cubic Hermite shape `i` on `[0, 1]`: value, first and second derivative.
/// Shapes 1 and 3 are the derivative shapes (unscaled).
fn shape(i: usize, t: f64) -> [f64; 3] {
    let (t2, t3) = (t * t, t * t * t);
    match i {
        0 => [
            1.0 - 3.0 * t2 + 2.0 * t3,
            -6.0 * t + 6.0 * t2,
            -6.0 + 12.0 * t,
        ],
        1 => [t - 2.0 * t2 + t3, 1.0 - 4.0 * t + 3.0 * t2, -4.0 + 6.0 * t],
        2 => [3.0 * t2 - 2.0 * t3, 6.0 * t - 6.0 * t2, 6.0 - 12.0 * t],
        _ => [-t2 + t3, -2.0 * t + 3.0 * t2, -2.0 + 6.0 * t],
    }
}

const CORNER: [(usize, usize); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

struct Rect {
    origin: Point,
    hx: f64,
    hy: f64,
}

fn rect(mesh: &Mesh2D, c: usize) -> Rect {
    let cell = &mesh.cells()[c];
    let p0 = mesh.vertices()[cell[0]];
    let p2 = mesh.vertices()[cell[2]];
    Rect {
        origin: p0,
        hx: p2.x - p0.x,
        hy: p2.y - p0.y,
    }
}

/// Derivatives `[φ, φ_x, φ_y, φ_xx, φ_xy, φ_yy]` of the 16 local shapes at
/// reference point `(ξ, η)`. Local index `4 * corner + kind`.
fn local_basis(r: &Rect, xi: f64, eta: f64) -> [[f64; 6]; 16] {
    let mut out = [[0.0; 6]; 16];
    for (corner, &(a, b)) in CORNER.iter().enumerate() {
        for kind in 0..4 {
            let (dx, dy) = (kind & 1 == 1, kind & 2 == 2);
            let ix = 2 * a + usize::from(dx);
            let iy = 2 * b + usize::from(dy);
            let sx = if dx { r.hx } else { 1.0 };
            let sy = if dy { r.hy } else { 1.0 };
            let fx = shape(ix, xi).map(|v| v * sx);
            let fy = shape(iy, eta).map(|v| v * sy);
            let (ux, uy) = (1.0 / r.hx, 1.0 / r.hy);
            out[4 * corner + kind] = [
                fx[0] * fy[0],
                fx[1] * ux * fy[0],
                fx[0] * fy[1] * uy,
                fx[2] * ux * ux * fy[0],
                fx[1] * ux * fy[1] * uy,
                fx[0] * fy[2] * uy * uy,
            ];
        }
    }
    out
}

/// Kinds follow the bit pattern `u = 0, u_x = 1, u_y = 2, u_xy = 3`.
fn global_dof(mesh: &Mesh2D, c: usize, local: usize) -> usize {
    DOFS_PER_VERTEX * mesh.cells()[c][local / 4] + local % 4
}

/// Element Hessian form `∫ u_xx v_xx + 2 u_xy v_xy + u_yy v_yy`, 4×4 Gauss.
pub(super) fn element_hessian(mesh: &Mesh2D, c: usize) -> Vec<[f64; 16]> {
    let r = rect(mesh, c);
    let (x, w) = gauss_legendre_unit(4);
    let mut k = alloc::vec![[0.0; 16]; 16];
    for (qi, wi) in x.iter().zip(&w) {
        for (qj, wj) in x.iter().zip(&w) {
            let phi = local_basis(&r, *qi, *qj);
            let jw = wi * wj * r.hx * r.hy;
            for i in 0..16 {
                for j in 0..16 {
                    let (a, b) = (phi[i], phi[j]);
                    k[i][j] += jw * (a[3] * b[3] + 2.0 * a[4] * b[4] + a[5] * b[5]);
                }
            }
        }
    }
    k
}

pub(super) fn volume(mesh: &Mesh2D) -> CsrMatrix {
    let n = DOFS_PER_VERTEX * mesh.vertices().len();
    let locals = super::per_cell(mesh, element_hessian);
    let mut b = TripletBuilder::new(n, n);
    for (c, k) in locals.iter().enumerate() {
        for i in 0..16 {
            let gi = global_dof(mesh, c, i);
            for j in 0..16 {
                b.push(gi, global_dof(mesh, c, j), k[i][j]);
            }
        }
    }
    b.build()
}

fn snap(t: f64) -> f64 {
    if math::abs(t) < 1e-12 {
        0.0
    } else if math::abs(t - 1.0) < 1e-12 {
        1.0
    } else {
        t
    }
}

/// Sampling operators for `γ_0` (values) and `γ_1` (outward normal derivative).
pub(super) fn traces(mesh: &Mesh2D, boundary: &BoundaryParam) -> [CsrMatrix; 2] {
    let n = DOFS_PER_VERTEX * mesh.vertices().len();
    let mut t0 = TripletBuilder::new(boundary.len(), n);
    let mut t1 = TripletBuilder::new(boundary.len(), n);
    for (i, node) in boundary.nodes.iter().enumerate() {
        let edge = mesh.boundary_edges()[node.edge];
        let r = rect(mesh, edge.cell);
        let xi = snap((node.point.x - r.origin.x) / r.hx);
        let eta = snap((node.point.y - r.origin.y) / r.hy);
        let phi = local_basis(&r, xi, eta);
        // axis-aligned edges: exact normal components avoid spurious fill-in
        let unit = |c: f64| {
            if c > 0.5 {
                1.0
            } else if c < -0.5 {
                -1.0
            } else {
                0.0
            }
        };
        let (nx, ny) = (unit(edge.normal.x), unit(edge.normal.y));
        for (l, p) in phi.iter().enumerate() {
            let g = global_dof(mesh, edge.cell, l);
            t0.push(i, g, p[0]);
            t1.push(i, g, p[1] * nx + p[2] * ny);
        }
    }
    [t0.build(), t1.build()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_rect_mesh, ElementType};

    #[test]
    fn hermite_shapes_interpolate() {
        let v = |i, t| shape(i, t);
        assert_eq!(v(0, 0.0)[0], 1.0);
        assert_eq!(v(2, 1.0)[0], 1.0);
        assert_eq!(v(1, 0.0)[1], 1.0);
        assert_eq!(v(3, 1.0)[1], 1.0);
        for i in 0..4 {
            for t in [0.0, 1.0] {
                let expect_val = (i == 0 && t == 0.0) || (i == 2 && t == 1.0);
                let expect_der = (i == 1 && t == 0.0) || (i == 3 && t == 1.0);
                assert_eq!(v(i, t)[0], f64::from(u8::from(expect_val)));
                assert_eq!(v(i, t)[1], f64::from(u8::from(expect_der)));
            }
        }
    }

    #[test]
    fn reproduces_quadratics() {
        // u = x² + 3xy − y² on [0,2]×[0,1]: u_xx = 2, u_xy = 3, u_yy = −2
        let (mesh, _) = build_rect_mesh(2.0, 1.0, 1, 1, ElementType::C1Rectangle).unwrap();
        let k = element_hessian(&mesh, 0);
        let mut coeffs = [0.0; 16];
        for (corner, v) in mesh.cells()[0].iter().enumerate() {
            let p = mesh.vertices()[*v];
            let (x, y) = (p.x, p.y);
            coeffs[4 * corner] = x * x + 3.0 * x * y - y * y;
            coeffs[4 * corner + 1] = 2.0 * x + 3.0 * y;
            coeffs[4 * corner + 2] = 3.0 * x - 2.0 * y;
            coeffs[4 * corner + 3] = 3.0;
        }
        let mut q = 0.0;
        for i in 0..16 {
            for j in 0..16 {
                q += coeffs[i] * k[i][j] * coeffs[j];
            }
        }
        // (u_xx² + 2u_xy² + u_yy²)·area = (4 + 18 + 4)·2
        assert!((q - 52.0).abs() < 1e-11, "{q}");
    }
}
