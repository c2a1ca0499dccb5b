use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{BoundaryParam, EdgeRule, Point};
use crate::error::invalid;
use crate::{math, Error, Result};

/// Finite element family carried by a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementType {
    /// Linear Lagrange triangles (conforming in H¹).
    P1Triangle,
    /// Bicubic Hermite rectangles with `(u, ∂x u, ∂y u, ∂xy u)` at each vertex (conforming in H²).
    C1Rectangle,
}

impl ElementType {
    pub fn vertices_per_cell(self) -> usize {
        match self {
            ElementType::P1Triangle => 3,
            ElementType::C1Rectangle => 4,
        }
    }
}

/// A boundary edge, oriented counterclockwise along the boundary cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: (usize, usize),
    pub normal: Point,
    /// Arclength at the start vertex.
    pub offset: f64,
    pub length: f64,
    /// The unique cell that owns the edge.
    pub cell: usize,
}

/// Triangle or rectangle mesh with its derived, counterclockwise boundary cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    boundary_edges: Vec<BoundaryEdge>,
    element_type: ElementType,
}

fn signed_area(pts: &[Point]) -> f64 {
    (0..pts.len())
        .map(|i| pts[i].cross(pts[(i + 1) % pts.len()]))
        .sum::<f64>()
        * 0.5
}

impl Mesh2D {
    /// Build a mesh and derive its boundary. Clockwise cells are reoriented;
    /// rectangles are reordered to start at their lower-left corner.
    pub fn new(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        element_type: ElementType,
    ) -> Result<Self> {
        let arity = element_type.vertices_per_cell();
        if cells.is_empty() {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }
        let scale = vertices
            .iter()
            .fold(0.0f64, |m, p| m.max(math::abs(p.x)).max(math::abs(p.y)))
            .max(1.0);
        let mut oriented = Vec::with_capacity(cells.len());
        for (c, cell) in cells.into_iter().enumerate() {
            if cell.len() != arity {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} has {} vertices, expected {arity}",
                    cell.len()
                )));
            }
            if let Some(&bad) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} references missing vertex {bad}"
                )));
            }
            let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&pts);
            if math::abs(area) <= 1e-14 * scale * scale {
                return Err(Error::InvalidMesh(format!("cell {c} is degenerate")));
            }
            let mut cell = cell;
            if area < 0.0 {
                cell.reverse();
            }
            if element_type == ElementType::C1Rectangle {
                cell = canonical_rectangle(&vertices, &cell).ok_or_else(|| {
                    Error::InvalidMesh(format!("cell {c} is not an axis-aligned rectangle"))
                })?;
            }
            oriented.push(cell);
        }
        let boundary_edges = boundary_cycle(&vertices, &oriented)?;
        Ok(Self {
            vertices,
            cells: oriented,
            boundary_edges,
            element_type,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn element_type(&self) -> ElementType {
        self.element_type
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary_edges.iter().map(|e| e.length).sum()
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let pts: Vec<Point> = self.cells[c].iter().map(|&v| self.vertices[v]).collect();
        signed_area(&pts)
    }

    /// Boundary edges as straight segments in traversal order.
    pub fn boundary_segments(&self) -> Vec<(Point, Point)> {
        self.boundary_edges
            .iter()
            .map(|e| (self.vertices[e.vertices.0], self.vertices[e.vertices.1]))
            .collect()
    }

    /// Vertices where the boundary turns, in traversal order.
    pub fn corners(&self) -> Vec<Point> {
        let segs = self.boundary_segments();
        let n = segs.len();
        (0..n)
            .filter(|&k| {
                let p = segs[(k + n - 1) % n];
                let (a, b) = (p.1.sub(p.0), segs[k].1.sub(segs[k].0));
                math::abs(a.cross(b)) > 1e-10 * a.norm() * b.norm() || a.dot(b) < 0.0
            })
            .map(|k| segs[k].0)
            .collect()
    }

    /// Length-weighted sum of outward normals (zero for a closed curve).
    pub fn normal_sum(&self) -> Point {
        self.boundary_edges
            .iter()
            .fold(Point::default(), |acc, e| acc.add(e.normal.scale(e.length)))
    }

    /// Boundary sampling with a `q`-point Gauss rule on every boundary edge.
    pub fn boundary_param(&self, gauss_points: usize) -> Result<BoundaryParam> {
        BoundaryParam::from_segments(&self.boundary_segments(), EdgeRule::Gauss(gauss_points))
    }

    /// Same mesh with cells listed in the order given by `order`.
    pub fn with_cell_order(&self, order: &[usize]) -> Result<Self> {
        let cells = order.iter().map(|&c| self.cells[c].clone()).collect();
        Self::new(self.vertices.clone(), cells, self.element_type)
    }
}

fn canonical_rectangle(vertices: &[Point], cell: &[usize]) -> Option<Vec<usize>> {
    let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
    let start = (0..4).min_by(|&i, &j| {
        (pts[i].y, pts[i].x)
            .partial_cmp(&(pts[j].y, pts[j].x))
            .unwrap()
    })?;
    let rot: Vec<usize> = (0..4).map(|k| cell[(start + k) % 4]).collect();
    let p: Vec<Point> = rot.iter().map(|&v| vertices[v]).collect();
    let tol = 1e-12 * (1.0 + p.iter().fold(0.0f64, |m, q| m.max(q.norm())));
    let axis = math::abs(p[0].y - p[1].y) < tol
        && math::abs(p[1].x - p[2].x) < tol
        && math::abs(p[2].y - p[3].y) < tol
        && math::abs(p[3].x - p[0].x) < tol
        && p[1].x > p[0].x
        && p[2].y > p[1].y;
    axis.then_some(rot)
}

fn boundary_cycle(vertices: &[Point], cells: &[Vec<usize>]) -> Result<Vec<BoundaryEdge>> {
    let mut count: BTreeMap<(usize, usize), (usize, usize, usize)> = BTreeMap::new();
    for (c, cell) in cells.iter().enumerate() {
        for k in 0..cell.len() {
            let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
            let key = (a.min(b), a.max(b));
            let entry = count.entry(key).or_insert((0, c, a));
            entry.0 += 1;
            if entry.0 > 2 {
                return Err(Error::InvalidMesh(format!(
                    "edge ({a}, {b}) is shared by more than two cells"
                )));
            }
        }
    }
    // directed boundary edges keyed by start vertex
    let mut outgoing: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (&(lo, hi), &(n, cell, first)) in &count {
        if n == 1 {
            let (a, b) = if first == lo { (lo, hi) } else { (hi, lo) };
            if outgoing.insert(a, (b, cell)).is_some() {
                return Err(Error::InvalidMesh(format!(
                    "boundary is not a simple curve at vertex {a}"
                )));
            }
        }
    }
    let total = outgoing.len();
    let (&start, _) = outgoing
        .iter()
        .next()
        .ok_or_else(|| Error::InvalidMesh("mesh has no boundary".into()))?;
    let mut edges = Vec::with_capacity(total);
    let mut v = start;
    let mut offset = 0.0;
    loop {
        let &(w, cell) = outgoing
            .get(&v)
            .ok_or_else(|| Error::InvalidMesh(format!("boundary chain breaks at vertex {v}")))?;
        let d = vertices[w].sub(vertices[v]);
        let length = d.norm();
        let normal = d.scale(1.0 / length).rotate_cw();
        edges.push(BoundaryEdge {
            vertices: (v, w),
            normal,
            offset,
            length,
            cell,
        });
        offset += length;
        v = w;
        if v == start {
            break;
        }
        if edges.len() > total {
            return Err(Error::InvalidMesh("boundary chain does not close".into()));
        }
    }
    if edges.len() != total {
        return Err(Error::InvalidMesh(format!(
            "boundary has several components ({} of {total} edges reached)",
            edges.len()
        )));
    }
    let poly: Vec<Point> = edges.iter().map(|e| vertices[e.vertices.0]).collect();
    if signed_area(&poly) <= 0.0 {
        return Err(Error::InvalidMesh(
            "boundary is not positively oriented".into(),
        ));
    }
    Ok(edges)
}

/// Structured mesh of `[0, lx] × [0, ly]` with `nx × ny` rectangles. P1
/// meshes split every rectangle along its rising diagonal. Boundary nodes
/// are 4-point Gauss rules on every boundary edge.
pub fn build_rect_mesh(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    element_type: ElementType,
) -> Result<(Mesh2D, BoundaryParam)> {
    if !(lx > 0.0 && ly > 0.0) {
        return Err(invalid("rectangle side lengths must be positive"));
    }
    if nx == 0 || ny == 0 {
        return Err(invalid(
            "rectangle mesh needs at least one subdivision per direction",
        ));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point::new(
                lx * i as f64 / nx as f64,
                ly * j as f64 / ny as f64,
            ));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            match element_type {
                ElementType::P1Triangle => {
                    cells.push(vec![a, b, c]);
                    cells.push(vec![a, c, d]);
                }
                ElementType::C1Rectangle => cells.push(vec![a, b, c, d]),
            }
        }
    }
    let mesh = Mesh2D::new(vertices, cells, element_type)?;
    let param = mesh.boundary_param(4)?;
    Ok((mesh, param))
}

/// Triangulated regular polygon inscribed in the circle of radius `radius`.
/// `refinement = r` uses `2^r` concentric rings, ring `i` carrying `6 i`
/// vertices, so the boundary is a regular `6·2^r`-gon.
pub fn build_polygon_disk_mesh(radius: f64, refinement: usize) -> Result<(Mesh2D, BoundaryParam)> {
    if !(radius > 0.0) {
        return Err(invalid("disk radius must be positive"));
    }
    if refinement == 0 || refinement > 10 {
        return Err(invalid("polygon-disk refinement must lie in 1..=10"));
    }
    let rings = 1usize << refinement;
    let mut vertices = vec![Point::default()];
    let mut ring_start = vec![0usize];
    for i in 1..=rings {
        ring_start.push(vertices.len());
        let m = 6 * i;
        let r = radius * i as f64 / rings as f64;
        for j in 0..m {
            let th = math::TAU * j as f64 / m as f64;
            vertices.push(Point::new(r * math::cos(th), r * math::sin(th)));
        }
    }
    let mut cells = Vec::new();
    for j in 0..6 {
        cells.push(vec![0, ring_start[1] + j, ring_start[1] + (j + 1) % 6]);
    }
    for i in 2..=rings {
        let (na, nb) = (6 * (i - 1), 6 * i);
        let (sa, sb) = (ring_start[i - 1], ring_start[i]);
        let (mut a, mut b) = (0usize, 0usize);
        while a < na || b < nb {
            // next angles as fractions of a turn; advance the ring whose next vertex comes first
            let next_a = (a + 1) as f64 / na as f64;
            let next_b = (b + 1) as f64 / nb as f64;
            if b < nb && (a == na || next_b <= next_a) {
                cells.push(vec![sa + a % na, sb + b, sb + (b + 1) % nb]);
                b += 1;
            } else {
                cells.push(vec![sa + a, sb + b % nb, sa + (a + 1) % na]);
                a += 1;
            }
        }
    }
    let mesh = Mesh2D::new(vertices, cells, ElementType::P1Triangle)?;
    let param = mesh.boundary_param(4)?;
    Ok((mesh, param))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn unit_square_p1() {
        let (m, p) = build_rect_mesh(1.0, 1.0, 1, 1, ElementType::P1Triangle).unwrap();
        assert_eq!(m.cells().len(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        assert!((p.total_length - 4.0).abs() < 1e-14);
        assert_eq!(p.vertex_positions.len(), 4);
    }

    #[test]
    fn rect_c1_counts() {
        let (m, _) = build_rect_mesh(1.0, 1.0, 2, 2, ElementType::C1Rectangle).unwrap();
        assert_eq!(m.cells().len(), 4);
        assert_eq!(m.boundary_edges().len(), 8);
    }

    #[test]
    fn normals_close_up() {
        let (m, p) = build_rect_mesh(2.0, 1.0, 4, 2, ElementType::P1Triangle).unwrap();
        let s = m.normal_sum();
        assert!(s.x.abs() < 1e-12 && s.y.abs() < 1e-12);
        assert_eq!(p.total_length, 6.0);
        let sides: f64 = p.side_ranges.iter().map(|(a, b)| b - a).sum();
        assert_eq!(sides, 6.0);
        for e in m.boundary_edges() {
            assert!((e.normal.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polygon_disk_perimeter_increases() {
        let mut last = 0.0;
        for r in 1..=5 {
            let (m, p) = build_polygon_disk_mesh(1.0, r).unwrap();
            let per = m.perimeter();
            assert!(per < 2.0 * PI);
            assert!(per > last);
            assert!((per - p.total_length).abs() < 1e-12);
            last = per;
        }
        assert!(2.0 * PI - last < 2e-3);
    }

    #[test]
    fn polygon_disk_cells_positive() {
        let (m, _) = build_polygon_disk_mesh(1.0, 3).unwrap();
        for c in 0..m.cells().len() {
            assert!(m.cell_area(c) > 0.0);
        }
        let total: f64 = (0..m.cells().len()).map(|c| m.cell_area(c)).sum();
        let n = 48.0;
        let polygon_area = 0.5 * n * (2.0 * PI / n).sin();
        assert!((total - polygon_area).abs() < 1e-12);
        let s = m.normal_sum();
        assert!(s.norm() < 1e-10);
    }

    #[test]
    fn refinement_keeps_rect_perimeter() {
        for n in [1, 2, 4, 8] {
            let (_, p) = build_rect_mesh(1.5, 0.5, n, n, ElementType::C1Rectangle).unwrap();
            assert!((p.total_length - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_meshes_rejected() {
        assert!(build_rect_mesh(1.0, 1.0, 0, 1, ElementType::P1Triangle).is_err());
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ];
        assert!(Mesh2D::new(v, vec![vec![0, 1, 2]], ElementType::P1Triangle).is_err());
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.2, 1.0),
        ];
        assert!(Mesh2D::new(v, vec![vec![0, 1, 2, 3]], ElementType::C1Rectangle).is_err());
    }

    #[test]
    fn clockwise_cells_are_reoriented() {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let m = Mesh2D::new(v, vec![vec![0, 2, 1]], ElementType::P1Triangle).unwrap();
        assert!(m.cell_area(0) > 0.0);
        assert_eq!(m.boundary_edges()[0].vertices, (0, 1));
    }
}
