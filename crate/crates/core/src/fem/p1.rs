//! Linear triangles for `k = 1`.

use alloc::vec::Vec;

use crate::geometry::{BoundaryParam, Mesh2D};
use crate::linalg::{CsrMatrix, TripletBuilder};

/// Element stiffness `∫ ∇φ_i · ∇φ_j` of a counterclockwise triangle.
pub(super) fn element_stiffness(mesh: &Mesh2D, c: usize) -> [[f64; 3]; 3] {
    let cell = &mesh.cells()[c];
    let p: Vec<_> = cell.iter().map(|&v| mesh.vertices()[v]).collect();
    let area = mesh.cell_area(c);
    let mut b = [0.0; 3];
    let mut g = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        b[i] = p[j].y - p[k].y;
        g[i] = p[k].x - p[j].x;
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (b[i] * b[j] + g[i] * g[j]) / (4.0 * area);
        }
    }
    out
}

pub(super) fn volume(mesh: &Mesh2D) -> CsrMatrix {
    let n = mesh.vertices().len();
    let locals = super::per_cell(mesh, element_stiffness);
    let mut b = TripletBuilder::new(n, n);
    for (c, k) in locals.iter().enumerate() {
        let cell = &mesh.cells()[c];
        for i in 0..3 {
            for j in 0..3 {
                b.push(cell[i], cell[j], k[i][j]);
            }
        }
    }
    b.build()
}

/// Boundary values: linear interpolation along each boundary edge.
pub(super) fn trace(mesh: &Mesh2D, boundary: &BoundaryParam) -> CsrMatrix {
    let mut b = TripletBuilder::new(boundary.len(), mesh.vertices().len());
    for (i, node) in boundary.nodes.iter().enumerate() {
        let (v0, v1) = mesh.boundary_edges()[node.edge].vertices;
        b.push(i, v0, 1.0 - node.local);
        b.push(i, v1, node.local);
    }
    b.build()
}
