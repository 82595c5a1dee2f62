//! Half-edge (DCEL) triangle mesh.
//!
//! The topology lives in two flat arrays: one [`Vertex`] per point and one
//! [`HalfEdge`] per directed edge. Half-edges `3f`, `3f+1`, `3f+2` bound
//! interior triangle `f` in counterclockwise order, so the half-edge
//! incident to a face is just `3 * f`. Border half-edges (those bounding the
//! exterior face) follow the interior block and are chained into closed
//! loops around every boundary, which keeps rotation queries total: walking
//! around a boundary vertex never falls off the mesh.

use std::fmt;

/// Sentinel for a link that has not been wired yet.
const UNSET: u32 = u32::MAX;

/// A mesh point with its boundary flag and one outgoing half-edge.
///
/// Indices are stored as `u32`: meshes stay under four billion half-edges
/// and the kernels are bound by memory traffic, so narrow links pay off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
    pub is_border: bool,
    /// Index of some half-edge whose origin is this vertex.
    pub incident_halfedge: u32,
}

/// One directed edge record; twins pair up into undirected edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfEdge {
    pub origin: u32,
    pub twin: u32,
    pub next: u32,
    pub prev: u32,
    /// True when the half-edge bounds the exterior face.
    pub is_border: bool,
}

/// An immutable conforming triangulation in half-edge form.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<Vertex>,
    pub halfedges: Vec<HalfEdge>,
    /// Number of interior triangles; interior half-edges are `0..3 * n_faces`.
    pub n_faces: usize,
}

/// Construction failures for [`TriMesh::from_triangles`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildError {
    /// An undirected edge is used by more than two triangles (or twice with
    /// the same direction, which is the same defect after orientation).
    NonManifoldEdge { a: usize, b: usize },
    /// A triangle with repeated vertices or zero signed area.
    DegenerateTriangle { triangle: usize },
    /// A vertex index outside the point array.
    DanglingIndex { triangle: usize, vertex: usize },
    /// A point referenced by no triangle.
    IsolatedVertex { vertex: usize },
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::NonManifoldEdge { a, b } => {
                write!(f, "edge ({a}, {b}) is shared by more than two triangles")
            }
            BuildError::DegenerateTriangle { triangle } => {
                write!(f, "triangle {triangle} has zero signed area")
            }
            BuildError::DanglingIndex { triangle, vertex } => {
                write!(f, "triangle {triangle} references missing vertex {vertex}")
            }
            BuildError::IsolatedVertex { vertex } => {
                write!(f, "vertex {vertex} is not used by any triangle")
            }
        }
    }
}

impl std::error::Error for BuildError {}

impl TriMesh {
    /// Builds the half-edge structure from a triangle soup.
    ///
    /// Triangles given clockwise are silently re-oriented. Every unmatched
    /// interior half-edge gets a border twin, and border half-edges are
    /// chained along their boundary loop.
    pub fn from_triangles(
        points: &[(f64, f64)],
        triangles: &[[usize; 3]],
    ) -> Result<Self, BuildError> {
        let n_points = points.len();
        let n_faces = triangles.len();
        assert!(
            n_points < u32::MAX as usize && 4 * n_faces < u32::MAX as usize,
            "mesh exceeds the u32 index limit"
        );

        let mut halfedges = Vec::with_capacity(3 * n_faces);
        for (fi, tri) in triangles.iter().enumerate() {
            let [a, b, c] = *tri;
            for v in [a, b, c] {
                if v >= n_points {
                    return Err(BuildError::DanglingIndex {
                        triangle: fi,
                        vertex: v,
                    });
                }
            }
            if a == b || b == c || a == c {
                return Err(BuildError::DegenerateTriangle { triangle: fi });
            }
            let area2 = cross(points[a], points[b], points[c]);
            if area2 == 0.0 {
                return Err(BuildError::DegenerateTriangle { triangle: fi });
            }
            // CW input: swap two vertices to make the face CCW.
            let (a, b, c) = if area2 < 0.0 { (a, c, b) } else { (a, b, c) };
            let base = 3 * fi as u32;
            for (k, origin) in [a, b, c].into_iter().enumerate() {
                halfedges.push(HalfEdge {
                    origin: origin as u32,
                    twin: UNSET,
                    next: base + (k as u32 + 1) % 3,
                    prev: base + (k as u32 + 2) % 3,
                    is_border: false,
                });
            }
        }

        // Twin matching on the ordered vertex pair (min, max).
        let mut keyed: Vec<(u64, u32)> = (0..halfedges.len())
            .map(|e| {
                let u = halfedges[e].origin;
                let v = halfedges[halfedges[e].next as usize].origin;
                let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                (((lo as u64) << 32) | hi as u64, e as u32)
            })
            .collect();
        keyed.sort_unstable();
        let mut i = 0;
        while i < keyed.len() {
            let mut j = i + 1;
            while j < keyed.len() && keyed[j].0 == keyed[i].0 {
                j += 1;
            }
            match j - i {
                1 => {} // boundary edge, border twin created below
                2 => {
                    let (e1, e2) = (keyed[i].1 as usize, keyed[j - 1].1 as usize);
                    if halfedges[e1].origin == halfedges[e2].origin {
                        let a = halfedges[e1].origin as usize;
                        let b = halfedges[halfedges[e1].next as usize].origin as usize;
                        return Err(BuildError::NonManifoldEdge { a, b });
                    }
                    halfedges[e1].twin = e2 as u32;
                    halfedges[e2].twin = e1 as u32;
                }
                _ => {
                    let e1 = keyed[i].1 as usize;
                    let a = halfedges[e1].origin as usize;
                    let b = halfedges[halfedges[e1].next as usize].origin as usize;
                    return Err(BuildError::NonManifoldEdge { a, b });
                }
            }
            i = j;
        }

        // Border half-edges, in ascending order of their interior twin.
        let unmatched: Vec<usize> = (0..halfedges.len())
            .filter(|&e| halfedges[e].twin == UNSET)
            .collect();
        for &e in &unmatched {
            let b = halfedges.len() as u32;
            let target = halfedges[halfedges[e].next as usize].origin;
            halfedges.push(HalfEdge {
                origin: target,
                twin: e as u32,
                next: UNSET,
                prev: UNSET,
                is_border: true,
            });
            halfedges[e].twin = b;
        }

        // Chain each border half-edge to the border half-edge leaving its
        // target, found by rotating around that vertex through the interior.
        let n_interior = 3 * n_faces;
        for b in n_interior..halfedges.len() {
            let mut h = halfedges[b].twin as usize;
            loop {
                let candidate = halfedges[halfedges[h].prev as usize].twin as usize;
                if halfedges[candidate].is_border {
                    halfedges[b].next = candidate as u32;
                    halfedges[candidate].prev = b as u32;
                    break;
                }
                h = candidate;
            }
        }

        let mut vertices: Vec<Vertex> = points
            .iter()
            .map(|&(x, y)| Vertex {
                x,
                y,
                is_border: false,
                incident_halfedge: UNSET,
            })
            .collect();
        for (e, he) in halfedges.iter().take(n_interior).enumerate() {
            vertices[he.origin as usize].incident_halfedge = e as u32;
        }
        for he in halfedges.iter().skip(n_interior) {
            vertices[he.origin as usize].is_border = true;
        }
        if let Some(v) = vertices.iter().position(|v| v.incident_halfedge == UNSET) {
            return Err(BuildError::IsolatedVertex { vertex: v });
        }

        Ok(TriMesh {
            vertices,
            halfedges,
            n_faces,
        })
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn n_halfedges(&self) -> usize {
        self.halfedges.len()
    }

    /// Interior half-edges occupy `0..n_interior_halfedges()`.
    #[inline]
    pub fn n_interior_halfedges(&self) -> usize {
        3 * self.n_faces
    }

    #[inline]
    pub fn next(&self, e: usize) -> usize {
        self.halfedges[e].next as usize
    }

    #[inline]
    pub fn prev(&self, e: usize) -> usize {
        self.halfedges[e].prev as usize
    }

    #[inline]
    pub fn twin(&self, e: usize) -> usize {
        self.halfedges[e].twin as usize
    }

    #[inline]
    pub fn origin(&self, e: usize) -> usize {
        self.halfedges[e].origin as usize
    }

    /// Head vertex of `e`, i.e. `origin(twin(e))`.
    #[inline]
    pub fn target(&self, e: usize) -> usize {
        self.halfedges[self.halfedges[e].twin as usize].origin as usize
    }

    #[inline]
    pub fn is_border_halfedge(&self, e: usize) -> bool {
        self.halfedges[e].is_border
    }

    /// True when the undirected edge of `e` lies on the domain boundary.
    #[inline]
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.halfedges[e].is_border || self.halfedges[self.halfedges[e].twin as usize].is_border
    }

    /// Clockwise rotation pivoting on `target(e)`: `twin(next(e))`.
    #[inline]
    pub fn cw_vertex_edge(&self, e: usize) -> usize {
        self.halfedges[self.halfedges[e].next as usize].twin as usize
    }

    /// Counterclockwise rotation pivoting on `origin(e)`: `twin(prev(e))`.
    #[inline]
    pub fn ccw_vertex_edge(&self, e: usize) -> usize {
        self.halfedges[self.halfedges[e].prev as usize].twin as usize
    }

    /// An outgoing half-edge of `v`.
    #[inline]
    pub fn edge_of_vertex(&self, v: usize) -> usize {
        self.vertices[v].incident_halfedge as usize
    }

    /// First half-edge of interior face `f`.
    #[inline]
    pub fn halfedge_of_face(&self, f: usize) -> usize {
        3 * f
    }

    /// Face of an interior half-edge; `None` for border half-edges.
    #[inline]
    pub fn face_of_halfedge(&self, e: usize) -> Option<usize> {
        (e < 3 * self.n_faces).then_some(e / 3)
    }

    /// Number of undirected edges at `v`, counted by clockwise rotation.
    pub fn degree(&self, v: usize) -> usize {
        let start = self.twin(self.edge_of_vertex(v));
        let mut e = self.cw_vertex_edge(start);
        let mut count = 1;
        while e != start {
            count += 1;
            e = self.cw_vertex_edge(e);
            debug_assert!(count <= self.n_halfedges(), "rotation failed to close");
        }
        count
    }

    #[inline]
    pub fn position(&self, v: usize) -> (f64, f64) {
        let p = &self.vertices[v];
        (p.x, p.y)
    }

    /// Squared Euclidean length of the undirected edge of `e`.
    #[inline]
    pub fn squared_length(&self, e: usize) -> f64 {
        let (ax, ay) = self.position(self.origin(e));
        let (bx, by) = self.position(self.target(e));
        let (dx, dy) = (bx - ax, by - ay);
        dx * dx + dy * dy
    }

    /// Finds the half-edge directed `from -> to`, if the edge exists.
    pub fn find_halfedge(&self, from: usize, to: usize) -> Option<usize> {
        let start = self.edge_of_vertex(from);
        let mut e = start;
        loop {
            if self.target(e) == to {
                return Some(e);
            }
            e = self.next(self.twin(e));
            if e == start {
                return None;
            }
        }
    }

    /// Twice the signed area of interior face `f` (positive when CCW).
    pub fn face_signed_area2(&self, f: usize) -> f64 {
        let e = 3 * f;
        let a = self.position(self.origin(e));
        let b = self.position(self.origin(e + 1));
        let c = self.position(self.origin(e + 2));
        cross(a, b, c)
    }

    /// Total domain area (sum of interior face areas).
    pub fn total_area(&self) -> f64 {
        (0..self.n_faces)
            .map(|f| self.face_signed_area2(f))
            .sum::<f64>()
            / 2.0
    }

    /// `V - E + F` counting interior faces only; 1 for a triangulated disk.
    pub fn euler_characteristic(&self) -> i64 {
        let v = self.n_vertices() as i64;
        let e = (self.n_halfedges() / 2) as i64;
        let f = self.n_faces as i64;
        v - e + f
    }

    /// Full structural sweep over every invariant of the representation.
    /// Returns a description of the first violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        let m = self.n_halfedges();
        let interior = self.n_interior_halfedges();
        if m % 2 != 0 {
            return Err(format!("odd half-edge count {m}"));
        }
        for e in 0..m {
            let he = &self.halfedges[e];
            if he.origin as usize >= self.n_vertices() {
                return Err(format!("half-edge {e} has dangling origin"));
            }
            for (name, link) in [("twin", he.twin), ("next", he.next), ("prev", he.prev)] {
                if link as usize >= m {
                    return Err(format!("half-edge {e} has dangling {name}"));
                }
            }
            if self.twin(self.twin(e)) != e || self.twin(e) == e {
                return Err(format!("twin involution broken at {e}"));
            }
            if self.next(self.prev(e)) != e || self.prev(self.next(e)) != e {
                return Err(format!("next/prev inverse broken at {e}"));
            }
            if self.origin(self.next(e)) != self.target(e) {
                return Err(format!("face chain discontinuous at {e}"));
            }
            if he.is_border != (e >= interior) {
                return Err(format!("border flag inconsistent at {e}"));
            }
        }
        for f in 0..self.n_faces {
            let e = 3 * f;
            if self.next(self.next(self.next(e))) != e {
                return Err(format!("face {f} is not a 3-cycle"));
            }
            if self.face_signed_area2(f) <= 0.0 {
                return Err(format!("face {f} is not CCW"));
            }
        }
        for (v, vert) in self.vertices.iter().enumerate() {
            let incident = vert.incident_halfedge as usize;
            if incident >= m || self.origin(incident) != v {
                return Err(format!("vertex {v} has invalid incident half-edge"));
            }
            let on_border = {
                let start = incident;
                let mut e = start;
                let mut hit = false;
                loop {
                    if self.is_boundary_edge(e) {
                        hit = true;
                    }
                    e = self.next(self.twin(e));
                    if e == start {
                        break;
                    }
                }
                hit
            };
            if vert.is_border != on_border {
                return Err(format!("vertex {v} border flag inconsistent"));
            }
        }
        // Rotation closure: cw from e returns to e in degree(target(e)) steps.
        for e in 0..m {
            let d = self.degree(self.target(e));
            let mut cur = e;
            for _ in 0..d {
                cur = self.cw_vertex_edge(cur);
            }
            if cur != e {
                return Err(format!("cw rotation from {e} does not close"));
            }
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn cross(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{single_triangle, square_mesh};

    #[test]
    fn square_counts_and_diagonal_twins() {
        let mesh = square_mesh();
        assert_eq!(mesh.n_faces, 2);
        assert_eq!(mesh.n_interior_halfedges(), 6);
        assert_eq!(mesh.n_halfedges(), 10);
        let d = mesh.find_halfedge(0, 2).expect("diagonal 0->2 exists");
        let dt = mesh.find_halfedge(2, 0).expect("diagonal 2->0 exists");
        assert_eq!(mesh.twin(d), dt);
        assert_eq!(mesh.twin(dt), d);
        assert!(!mesh.is_border_halfedge(d));
        assert!(!mesh.is_border_halfedge(dt));
        mesh.check_invariants().unwrap();
    }

    #[test]
    fn single_triangle_is_all_border() {
        let mesh = single_triangle();
        assert_eq!(mesh.n_halfedges(), 6);
        assert_eq!(mesh.n_interior_halfedges(), 3);
        assert!(mesh.vertices.iter().all(|v| v.is_border));
        mesh.check_invariants().unwrap();
    }

    #[test]
    fn grid9_structure() {
        let (points, tris) = crate::synth::generate_grid(9).unwrap();
        let mesh = TriMesh::from_triangles(&points, &tris).unwrap();
        assert_eq!(mesh.n_faces, 8);
        assert_eq!(mesh.n_interior_halfedges(), 24);
        assert_eq!(mesh.n_halfedges() - mesh.n_interior_halfedges(), 8);
        assert_eq!(mesh.euler_characteristic(), 1);
        mesh.check_invariants().unwrap();
    }

    #[test]
    fn target_identities() {
        let mesh = square_mesh();
        let e = mesh.find_halfedge(0, 1).unwrap();
        assert_eq!(mesh.target(e), 1);
        assert_eq!(mesh.target(mesh.twin(e)), 0);
        for e in 0..mesh.n_halfedges() {
            assert_eq!(mesh.target(mesh.twin(e)), mesh.origin(e));
        }
    }

    #[test]
    fn cw_rotation_pivots_on_target() {
        let mesh = square_mesh();
        let e = mesh.find_halfedge(0, 2).unwrap();
        let r = mesh.cw_vertex_edge(e);
        assert_eq!(mesh.origin(r), 3);
        assert_eq!(mesh.target(r), 2);
        // Closure in degree(target) steps, everywhere (borders included).
        for e in 0..mesh.n_halfedges() {
            let d = mesh.degree(mesh.target(e));
            let mut cur = e;
            for _ in 0..d {
                cur = mesh.cw_vertex_edge(cur);
            }
            assert_eq!(cur, e);
        }
    }

    #[test]
    fn cw_rotation_defined_on_borders_of_single_triangle() {
        let mesh = single_triangle();
        for e in 0..mesh.n_halfedges() {
            let d = mesh.degree(mesh.target(e));
            let mut cur = e;
            for _ in 0..d {
                cur = mesh.cw_vertex_edge(cur);
            }
            assert_eq!(cur, e);
        }
    }

    #[test]
    fn ccw_rotation_pivots_on_origin() {
        let mesh = square_mesh();
        let e = mesh.find_halfedge(0, 1).unwrap();
        let r = mesh.ccw_vertex_edge(e);
        assert_eq!(mesh.origin(r), 0);
        assert_eq!(mesh.target(r), 2, "next CCW outgoing edge from 0 is 0->2");
        for e in 0..mesh.n_halfedges() {
            let d = mesh.degree(mesh.origin(e));
            let mut cur = e;
            for _ in 0..d {
                cur = mesh.ccw_vertex_edge(cur);
            }
            assert_eq!(cur, e);
        }
    }

    #[test]
    fn ccw_rotation_reaches_border_on_single_triangle() {
        let mesh = single_triangle();
        let e = mesh.find_halfedge(0, 1).unwrap();
        let r = mesh.ccw_vertex_edge(e);
        assert_eq!(mesh.origin(r), 0);
        assert!(mesh.is_border_halfedge(r));
    }

    #[test]
    fn degrees() {
        let mesh = square_mesh();
        assert_eq!(mesh.degree(0), 3);
        let tri = single_triangle();
        for v in 0..3 {
            assert_eq!(tri.degree(v), 2);
        }
        let (points, tris) = crate::synth::generate_grid(9).unwrap();
        let grid = TriMesh::from_triangles(&points, &tris).unwrap();
        assert_eq!(grid.degree(4), 6, "grid center: 4 axis edges + 2 diagonals");
    }

    #[test]
    fn edge_of_vertex_contract() {
        let mesh = square_mesh();
        for v in 0..mesh.n_vertices() {
            let e = mesh.edge_of_vertex(v);
            assert!(e < mesh.n_halfedges());
            assert_eq!(mesh.origin(e), v);
        }
        // Rotating from vertex 2 enumerates its 3 incident edges.
        let start = mesh.edge_of_vertex(2);
        let mut seen = vec![mesh.target(start)];
        let mut e = mesh.next(mesh.twin(start));
        while e != start {
            seen.push(mesh.target(e));
            e = mesh.next(mesh.twin(e));
        }
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 3]);
    }

    #[test]
    fn cw_input_is_reoriented() {
        // Same square, both triangles given clockwise.
        let points = vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let mesh = TriMesh::from_triangles(&points, &[[2, 1, 0], [3, 2, 0]]).unwrap();
        mesh.check_invariants().unwrap();
        assert!(mesh.total_area() > 0.0);
        assert_eq!(mesh.n_halfedges(), 10);
    }

    #[test]
    fn build_errors() {
        let points = vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let err = TriMesh::from_triangles(&points, &[[0, 1, 5]]).unwrap_err();
        assert_eq!(
            err,
            BuildError::DanglingIndex {
                triangle: 0,
                vertex: 5
            }
        );

        let collinear = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)];
        let err = TriMesh::from_triangles(&collinear, &[[0, 1, 2]]).unwrap_err();
        assert_eq!(err, BuildError::DegenerateTriangle { triangle: 0 });

        let err = TriMesh::from_triangles(&points, &[[0, 1, 1]]).unwrap_err();
        assert_eq!(err, BuildError::DegenerateTriangle { triangle: 0 });

        // Three triangles on one edge.
        let pts = vec![(0.0, 0.0), (1.0, 0.0), (0.5, 1.0), (0.5, -1.0), (2.0, 0.5)];
        let err = TriMesh::from_triangles(&pts, &[[0, 1, 2], [0, 3, 1], [0, 1, 4]]).unwrap_err();
        assert!(matches!(err, BuildError::NonManifoldEdge { .. }));

        let err = TriMesh::from_triangles(&points, &[[0, 1, 2]]).unwrap_err();
        assert_eq!(err, BuildError::IsolatedVertex { vertex: 3 });
    }

    #[test]
    fn area_and_euler_on_square() {
        let mesh = square_mesh();
        assert!((mesh.total_area() - 1.0).abs() < 1e-15);
        assert_eq!(mesh.euler_characteristic(), 1);
    }
}
