//! Polylla-style tri-to-polygon mesh generation.
//!
//! Any conforming triangulation is converted into a mesh of arbitrary simple
//! polygons by fusing triangles that share a terminal edge (the longest edge
//! of both of its triangles). The engine is implemented twice over one shared
//! half-edge core and the two implementations produce the same mesh:
//!
//! - [`seq::run_sequential`] — the three-phase label / traversal / repair
//!   pipeline, single-threaded;
//! - [`par::run_parallel`] — the same result computed as a sequence of
//!   data-parallel kernels with a barrier between passes, using a fixed
//!   number of workers.
//!
//! Both pipelines rewire the `next`/`prev` links of a copied half-edge array,
//! so no memory is allocated or freed while polygons are formed.
//!
//! See the `examples/` directory for one runnable program per capability
//! (building meshes, running either pipeline, verifying their equivalence,
//! generating inputs, benchmarking phases, rendering SVG). The `polylla`
//! binary wraps the same entry points as subcommands.

pub mod bench;
mod delaunay;
pub mod formats;
pub mod mesh;
pub mod par;
pub mod seq;
pub mod svg;
pub mod synth;
pub mod timing;
pub mod validate;

mod pool;

pub use mesh::{BuildError, HalfEdge, TriMesh, Vertex};
pub use par::{run_parallel, ParConfig};
pub use seq::{run_sequential, PipelineError, PolyMesh};
pub use synth::{GenKind, GenSpec};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::mesh::TriMesh;

    /// Two CCW triangles forming the unit square, diagonal from 0 to 2.
    pub fn square_mesh() -> TriMesh {
        let points = vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        TriMesh::from_triangles(&points, &[[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    /// A single CCW triangle; its longest edge is 1 -> 2.
    pub fn single_triangle() -> TriMesh {
        let points = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
        TriMesh::from_triangles(&points, &[[0, 1, 2]]).unwrap()
    }

    /// Grid mesh with `k * k` points.
    pub fn grid_mesh(k: usize) -> TriMesh {
        crate::synth::generate_trimesh(&crate::synth::GenSpec::grid(k * k)).unwrap()
    }

    /// Seeded random Delaunay mesh.
    pub fn random_mesh(n: usize, seed: u64) -> TriMesh {
        crate::synth::generate_trimesh(&crate::synth::GenSpec::random(n, seed)).unwrap()
    }
}
