//! Deterministic benchmark-input generators: uniform grid triangulations and
//! Delaunay triangulations of seeded random points in the unit square.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::delaunay;
use crate::mesh::{BuildError, TriMesh};

/// Which generator to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Grid,
    Random,
}

/// A reproducible mesh-generation request.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n_points: usize,
    pub rng_seed: u64,
    /// Points closer than this to a side of the unit square are snapped onto
    /// it (random kind only).
    pub border_tolerance: f64,
}

pub const DEFAULT_BORDER_TOLERANCE: f64 = 1e-3;

impl GenSpec {
    pub fn grid(n_points: usize) -> Self {
        GenSpec {
            kind: GenKind::Grid,
            n_points,
            rng_seed: 0,
            border_tolerance: 0.0,
        }
    }

    pub fn random(n_points: usize, rng_seed: u64) -> Self {
        GenSpec {
            kind: GenKind::Random,
            n_points,
            rng_seed,
            border_tolerance: DEFAULT_BORDER_TOLERANCE,
        }
    }

    /// Parses `grid:N` or `random:N`.
    pub fn parse(s: &str) -> Result<Self, GenError> {
        let (kind, n) = s
            .split_once(':')
            .ok_or_else(|| GenError::BadSpec(s.to_string()))?;
        let n_points: usize = n
            .trim()
            .replace('_', "")
            .parse()
            .map_err(|_| GenError::BadSpec(s.to_string()))?;
        match kind.trim() {
            "grid" => Ok(GenSpec::grid(n_points)),
            "random" => Ok(GenSpec::random(n_points, 0)),
            _ => Err(GenError::BadSpec(s.to_string())),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            GenKind::Grid => format!("grid:{}", self.n_points),
            GenKind::Random => format!("random:{}", self.n_points),
        }
    }
}

#[derive(Debug)]
pub enum GenError {
    TooFewPoints { given: usize, minimum: usize },
    /// The rejection loop could not produce distinct points; reaching this
    /// means the sampler itself is broken.
    DuplicatePoint,
    BadSpec(String),
    Build(BuildError),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::TooFewPoints { given, minimum } => {
                write!(f, "need at least {minimum} points, got {given}")
            }
            GenError::DuplicatePoint => write!(f, "could not sample distinct points"),
            GenError::BadSpec(s) => write!(f, "invalid generator spec '{s}'"),
            GenError::Build(e) => write!(f, "generated mesh failed to build: {e}"),
        }
    }
}

impl std::error::Error for GenError {}

impl From<BuildError> for GenError {
    fn from(e: BuildError) -> Self {
        GenError::Build(e)
    }
}

/// Uniform grid triangulation on `s = floor(sqrt(n))` points per side.
///
/// Vertex `k` sits at `(k mod s, k div s)`; each cell is split by the
/// diagonal from its lower-left to its upper-right corner, giving
/// `2 * (s - 1)^2` CCW triangles.
pub fn generate_grid(n: usize) -> Result<(Vec<(f64, f64)>, Vec<[usize; 3]>), GenError> {
    if n < 4 {
        return Err(GenError::TooFewPoints {
            given: n,
            minimum: 4,
        });
    }
    let s = (n as f64).sqrt().floor() as usize;
    let mut points = Vec::with_capacity(s * s);
    for i in 0..s {
        for j in 0..s {
            points.push((j as f64, i as f64));
        }
    }
    let mut triangles = Vec::with_capacity(2 * (s - 1) * (s - 1));
    for i in 0..s * s - s {
        if i % s != s - 1 {
            triangles.push([i, i + 1, i + s + 1]);
            triangles.push([i, i + s + 1, i + s]);
        }
    }
    Ok((points, triangles))
}

/// Delaunay triangulation of `n` seeded uniform points in the unit square,
/// with near-border points snapped onto the border.
pub fn generate_random(spec: &GenSpec) -> Result<(Vec<(f64, f64)>, Vec<[usize; 3]>), GenError> {
    assert_eq!(spec.kind, GenKind::Random);
    let n = spec.n_points;
    if n < 3 {
        return Err(GenError::TooFewPoints {
            given: n,
            minimum: 3,
        });
    }
    let delta = spec.border_tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut seen: HashSet<(u64, u64)> = HashSet::with_capacity(n * 2);
    let mut attempts = 0usize;
    while points.len() < n {
        attempts += 1;
        if attempts > 100 * n + 1000 {
            return Err(GenError::DuplicatePoint);
        }
        let x: f64 = rng.gen();
        let y: f64 = rng.gen();
        let p = (snap(x, delta), snap(y, delta));
        if seen.insert((p.0.to_bits(), p.1.to_bits())) {
            points.push(p);
        }
    }
    let triangles = delaunay::triangulate(&points);
    Ok((points, triangles))
}

fn snap(c: f64, delta: f64) -> f64 {
    if c < delta {
        0.0
    } else if c > 1.0 - delta {
        1.0
    } else {
        c
    }
}

/// Runs the requested generator and builds the half-edge mesh.
pub fn generate_trimesh(spec: &GenSpec) -> Result<TriMesh, GenError> {
    let (points, triangles) = match spec.kind {
        GenKind::Grid => generate_grid(spec.n_points)?,
        GenKind::Random => generate_random(spec)?,
    };
    Ok(TriMesh::from_triangles(&points, &triangles)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::cross;

    #[test]
    fn grid_counts() {
        let (points, tris) = generate_grid(9).unwrap();
        assert_eq!(points.len(), 9);
        assert_eq!(tris.len(), 8);

        let (points, tris) = generate_grid(4).unwrap();
        assert_eq!(points.len(), 4);
        assert_eq!(tris.len(), 2);

        // Million-point request: s = 1000, 2 * 999^2 triangles.
        let (points, tris) = generate_grid(1_000_000).unwrap();
        assert_eq!(points.len(), 1_000_000);
        assert_eq!(tris.len(), 2 * 999 * 999);
    }

    #[test]
    fn grid_is_ccw_and_conforming() {
        let (points, tris) = generate_grid(25).unwrap();
        for t in &tris {
            assert!(cross(points[t[0]], points[t[1]], points[t[2]]) > 0.0);
        }
        let mesh = TriMesh::from_triangles(&points, &tris).unwrap();
        mesh.check_invariants().unwrap();
        assert_eq!(mesh.euler_characteristic(), 1);
    }

    #[test]
    fn grid_too_few_points() {
        assert!(matches!(
            generate_grid(3),
            Err(GenError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn random_is_deterministic() {
        let spec = GenSpec::random(100, 42);
        let (p1, t1) = generate_random(&spec).unwrap();
        let (p2, t2) = generate_random(&spec).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(t1, t2);
        let mesh = TriMesh::from_triangles(&p1, &t1).unwrap();
        mesh.check_invariants().unwrap();
    }

    #[test]
    fn random_delaunay_property() {
        let spec = GenSpec::random(300, 7);
        let (points, tris) = generate_random(&spec).unwrap();
        // Brute-force empty-circumcircle check over all point/triangle pairs.
        for t in &tris {
            let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
            for (i, &p) in points.iter().enumerate() {
                if t.contains(&i) {
                    continue;
                }
                assert!(
                    delaunay::in_circle(a, b, c, p) <= 1e-12,
                    "point {i} violates circumcircle of {t:?}"
                );
            }
        }
    }

    #[test]
    fn random_snapping_hits_borders() {
        let mut spec = GenSpec::random(400, 3);
        spec.border_tolerance = 0.05;
        let (points, tris) = generate_random(&spec).unwrap();
        assert!(points.iter().any(|p| p.0 == 0.0 || p.0 == 1.0));
        assert!(points.iter().any(|p| p.1 == 0.0 || p.1 == 1.0));
        let mesh = TriMesh::from_triangles(&points, &tris).unwrap();
        mesh.check_invariants().unwrap();
    }

    #[test]
    fn random_delta_zero_border_is_hull() {
        let mut spec = GenSpec::random(200, 11);
        spec.border_tolerance = 0.0;
        let (points, tris) = generate_random(&spec).unwrap();
        assert!(points.iter().all(|p| p.0 != 0.0 && p.0 != 1.0));
        let mesh = TriMesh::from_triangles(&points, &tris).unwrap();
        // Every border edge must be a hull edge: all other points strictly
        // to its left.
        for e in mesh.n_interior_halfedges()..mesh.n_halfedges() {
            let a = mesh.position(mesh.origin(e));
            let b = mesh.position(mesh.target(e));
            for (i, &p) in points.iter().enumerate() {
                if i == mesh.origin(e) || i == mesh.target(e) {
                    continue;
                }
                assert!(
                    cross(a, b, p) < 0.0,
                    "border half-edge {e} is not a hull edge"
                );
            }
        }
    }

    #[test]
    fn parse_specs() {
        assert_eq!(GenSpec::parse("grid:10000").unwrap(), GenSpec::grid(10000));
        assert_eq!(
            GenSpec::parse("random:2000").unwrap(),
            GenSpec::random(2000, 0)
        );
        assert!(GenSpec::parse("weird:1").is_err());
        assert!(GenSpec::parse("grid").is_err());
    }
}
