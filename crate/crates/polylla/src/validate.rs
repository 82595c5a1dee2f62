//! Brute-force oracles and mesh checks, independent of the pipelines.
//!
//! The longest-edge propagation path is recomputed here straight from the
//! geometry (not from the pipelines' bit-vectors), so these checks can catch
//! labeling bugs. [`check_polymesh`] bundles the postcondition sweep used by
//! the verification command and the acceptance suite.

use std::collections::HashMap;
use std::fmt;

use crate::mesh::TriMesh;
use crate::seq::PolyMesh;

/// Assignment of every triangle to its terminal-edge region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionPartition {
    /// Region id per triangle.
    pub region_of_triangle: Vec<usize>,
    /// Undirected terminal edge (smaller half-edge index) per region.
    pub terminal_edge_of_region: Vec<usize>,
}

impl RegionPartition {
    pub fn n_regions(&self) -> usize {
        self.terminal_edge_of_region.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    /// The longest-edge walk revisited a triangle; impossible under a
    /// consistent tie-break, so it signals a tie-break bug.
    CycleDetected { triangle: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::CycleDetected { triangle } => {
                write!(f, "longest-edge walk from triangle {triangle} cycles")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Longest half-edge of a face, recomputed from coordinates with the same
/// tie rule as the pipelines (squared length, lowest index wins ties).
fn oracle_longest_halfedge(mesh: &TriMesh, f: usize) -> usize {
    let mut best = 3 * f;
    let mut best_len = f64::NEG_INFINITY;
    for e in 3 * f..3 * f + 3 {
        let (ax, ay) = mesh.position(mesh.origin(e));
        let (bx, by) = mesh.position(mesh.target(e));
        let len = (bx - ax) * (bx - ax) + (by - ay) * (by - ay);
        if len > best_len {
            best = e;
            best_len = len;
        }
    }
    best
}

/// The longest-edge propagation path from triangle `t`: each step crosses
/// the current triangle's longest edge, ending when that edge is also its
/// neighbor's longest edge or lies on the boundary. Returns the visited
/// triangles in order and the terminal edge (its smaller half-edge index).
pub fn lepp(mesh: &TriMesh, t: usize) -> Result<(Vec<usize>, usize), OracleError> {
    let mut path = vec![t];
    let mut current = t;
    loop {
        let e = oracle_longest_halfedge(mesh, current);
        let twin = mesh.twin(e);
        if mesh.is_border_halfedge(twin) {
            return Ok((path, e.min(twin)));
        }
        let neighbor = twin / 3;
        if oracle_longest_halfedge(mesh, neighbor) == twin {
            path.push(neighbor);
            return Ok((path, e.min(twin)));
        }
        if path.contains(&neighbor) {
            return Err(OracleError::CycleDetected { triangle: t });
        }
        path.push(neighbor);
        current = neighbor;
    }
}

/// Groups all triangles by the terminal edge their Lepp reaches. Paths are
/// memoized: every triangle on a path shares its terminal edge.
pub fn terminal_edge_regions(mesh: &TriMesh) -> Result<RegionPartition, OracleError> {
    const UNSET: usize = usize::MAX;
    let mut region_of_triangle = vec![UNSET; mesh.n_faces];
    let mut terminal_edge_of_region = Vec::new();
    let mut region_of_terminal: HashMap<usize, usize> = HashMap::new();
    let mut pending = Vec::new();

    for t in 0..mesh.n_faces {
        if region_of_triangle[t] != UNSET {
            continue;
        }
        pending.clear();
        let mut current = t;
        let terminal;
        loop {
            pending.push(current);
            let e = oracle_longest_halfedge(mesh, current);
            let twin = mesh.twin(e);
            if mesh.is_border_halfedge(twin) {
                terminal = e.min(twin);
                break;
            }
            let neighbor = twin / 3;
            if region_of_triangle[neighbor] != UNSET {
                terminal = terminal_edge_of_region[region_of_triangle[neighbor]];
                break;
            }
            if oracle_longest_halfedge(mesh, neighbor) == twin {
                pending.push(neighbor);
                terminal = e.min(twin);
                break;
            }
            if pending.contains(&neighbor) {
                return Err(OracleError::CycleDetected { triangle: t });
            }
            current = neighbor;
        }
        let region = *region_of_terminal.entry(terminal).or_insert_with(|| {
            terminal_edge_of_region.push(terminal);
            terminal_edge_of_region.len() - 1
        });
        for &p in &pending {
            region_of_triangle[p] = region;
        }
    }
    Ok(RegionPartition {
        region_of_triangle,
        terminal_edge_of_region,
    })
}

/// Triangle components over non-frontier edges: the partition a given
/// frontier bit-vector induces on the faces.
pub fn partition_from_frontier(mesh: &TriMesh, frontier: &[bool]) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let mut component = vec![UNSET; mesh.n_faces];
    let mut next_id = 0;
    let mut stack = Vec::new();
    for t in 0..mesh.n_faces {
        if component[t] != UNSET {
            continue;
        }
        stack.push(t);
        component[t] = next_id;
        while let Some(f) = stack.pop() {
            for e in 3 * f..3 * f + 3 {
                if frontier[e] {
                    continue;
                }
                let twin = mesh.twin(e);
                if mesh.is_border_halfedge(twin) {
                    continue;
                }
                let neighbor = twin / 3;
                if component[neighbor] == UNSET {
                    component[neighbor] = next_id;
                    stack.push(neighbor);
                }
            }
        }
        next_id += 1;
    }
    component
}

/// True when two triangle labelings induce the same partition (up to
/// renaming of the labels).
pub fn partitions_equal(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut fwd: HashMap<usize, usize> = HashMap::new();
    let mut bwd: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b.iter()) {
        if *fwd.entry(x).or_insert(y) != y || *bwd.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}

/// Canonical form of a polygonal mesh: every polygon's half-edge cycle
/// rotated to start at its minimum index, the cycles sorted. Two meshes
/// describe the same polygons iff their canonical forms are equal.
pub fn canonical_polygons(poly: &PolyMesh) -> Vec<Vec<usize>> {
    let mut cycles: Vec<Vec<usize>> = poly
        .seeds
        .iter()
        .map(|&s| {
            let mut cycle = poly.try_cycle(s).expect("seed cycle does not close");
            let min_pos = cycle
                .iter()
                .enumerate()
                .min_by_key(|&(_, &e)| e)
                .map(|(i, _)| i)
                .unwrap();
            cycle.rotate_left(min_pos);
            cycle
        })
        .collect();
    cycles.sort();
    cycles
}

/// Postcondition sweep over a finished polygonal mesh.
#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub polygon_count: usize,
    pub non_simple_polygons: usize,
    pub barrier_tip_count: usize,
    pub partition_consistent: bool,
    pub area_residual: f64,
    pub boundary_covered: bool,
    pub cycles_disjoint: bool,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.non_simple_polygons == 0
            && self.barrier_tip_count == 0
            && self.partition_consistent
            && self.area_residual.abs() <= 1e-9
            && self.boundary_covered
            && self.cycles_disjoint
    }

    /// Machine-readable `key=value` lines.
    pub fn to_kv_lines(&self) -> String {
        format!(
            "polygons={}\nnon_simple={}\nbarrier_tips={}\npartition_consistent={}\narea_residual={:e}\nboundary_covered={}\ncycles_disjoint={}\nall_passed={}\n",
            self.polygon_count,
            self.non_simple_polygons,
            self.barrier_tip_count,
            self.partition_consistent,
            self.area_residual,
            self.boundary_covered,
            self.cycles_disjoint,
            self.all_passed()
        )
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "polygons:              {}", self.polygon_count)?;
        writeln!(f, "non-simple polygons:   {}", self.non_simple_polygons)?;
        writeln!(f, "barrier tips left:     {}", self.barrier_tip_count)?;
        writeln!(f, "partition consistent:  {}", self.partition_consistent)?;
        writeln!(f, "area residual (rel):   {:e}", self.area_residual)?;
        writeln!(f, "boundary covered:      {}", self.boundary_covered)?;
        writeln!(f, "cycles disjoint:       {}", self.cycles_disjoint)?;
        write!(
            f,
            "overall:               {}",
            if self.all_passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Verifies a polygonal mesh against its source triangulation and the
/// oracle's region partition. Failures are reported, not raised.
pub fn check_polymesh(
    poly: &PolyMesh,
    mesh: &TriMesh,
    partition: &RegionPartition,
) -> CheckReport {
    let mut report = CheckReport {
        polygon_count: poly.seeds.len(),
        partition_consistent: true,
        boundary_covered: true,
        cycles_disjoint: true,
        ..CheckReport::default()
    };

    let mut cycle_owner = vec![usize::MAX; poly.halfedges.len()];
    let mut tip_seen = vec![false; mesh.n_vertices()];
    let mut cycles: Vec<Vec<usize>> = Vec::with_capacity(poly.seeds.len());
    for (i, &s) in poly.seeds.iter().enumerate() {
        let Some(cycle) = poly.try_cycle(s) else {
            report.non_simple_polygons += 1;
            report.cycles_disjoint = false;
            cycles.push(Vec::new());
            continue;
        };
        for &e in &cycle {
            if cycle_owner[e] != usize::MAX {
                report.cycles_disjoint = false;
            }
            cycle_owner[e] = i;
        }
        // Vertex-simplicity and barrier tips on this cycle.
        let verts: Vec<usize> = cycle.iter().map(|&e| poly.halfedges[e].origin).collect();
        let mut sorted = verts.clone();
        sorted.sort_unstable();
        let distinct = {
            let before = sorted.len();
            sorted.dedup();
            sorted.len() == before
        };
        if !distinct {
            report.non_simple_polygons += 1;
        }
        for &v in &verts {
            if tip_seen[v] {
                continue;
            }
            tip_seen[v] = true;
            if crate::seq::frontier_edge_count_at(mesh, &poly.frontier_edge, v) == 1 {
                report.barrier_tip_count += 1;
            }
        }
        cycles.push(cycle);
    }

    // Triangle partition: flood each polygon's region over non-frontier
    // edges; every triangle must land in exactly one polygon, and each
    // polygon must stay inside one oracle region.
    let piece = partition_from_frontier(mesh, &poly.frontier_edge);
    let mut piece_to_polygon: Vec<usize> = vec![usize::MAX; poly.seeds.len().max(mesh.n_faces)];
    let mut triangles_covered = 0usize;
    let mut piece_sizes: HashMap<usize, usize> = HashMap::new();
    for &p in &piece {
        *piece_sizes.entry(p).or_insert(0) += 1;
    }
    for (i, cycle) in cycles.iter().enumerate() {
        let mut this_piece = usize::MAX;
        let mut this_region = usize::MAX;
        for &e in cycle {
            let Some(f) = mesh.face_of_halfedge(e) else {
                report.partition_consistent = false;
                continue;
            };
            if this_piece == usize::MAX {
                this_piece = piece[f];
                this_region = partition.region_of_triangle[f];
            } else if piece[f] != this_piece || partition.region_of_triangle[f] != this_region {
                report.partition_consistent = false;
            }
        }
        if this_piece == usize::MAX {
            report.partition_consistent = false;
            continue;
        }
        if piece_to_polygon[this_piece] != usize::MAX {
            report.partition_consistent = false;
        } else {
            piece_to_polygon[this_piece] = i;
            triangles_covered += piece_sizes.get(&this_piece).copied().unwrap_or(0);
        }
    }
    if triangles_covered != mesh.n_faces {
        report.partition_consistent = false;
    }

    // Area conservation, over the cycles that closed.
    let tri_area = mesh.total_area();
    let poly_area: f64 = cycles
        .iter()
        .map(|cycle| {
            let mut acc = 0.0;
            for &e in cycle {
                let a = &poly.vertices[poly.halfedges[e].origin];
                let b = &poly.vertices[poly.halfedges[poly.halfedges[e].twin].origin];
                acc += a.x * b.y - b.x * a.y;
            }
            acc / 2.0
        })
        .sum();
    report.area_residual = if tri_area != 0.0 {
        (poly_area - tri_area) / tri_area
    } else {
        poly_area
    };

    // Every input boundary edge appears in exactly one cycle (through its
    // interior half).
    for e in 0..mesh.n_interior_halfedges() {
        if mesh.is_border_halfedge(mesh.twin(e)) && cycle_owner[e] == usize::MAX {
            report.boundary_covered = false;
        }
    }

    report
}

/// Aggregate polygon statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshStats {
    pub polygon_count: usize,
    /// Histogram of polygon vertex counts.
    pub arity_histogram: Vec<(usize, usize)>,
    pub min_area: f64,
    pub max_area: f64,
    pub mean_area: f64,
    /// Undirected frontier edge count.
    pub frontier_edges: usize,
}

impl fmt::Display for MeshStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "polygons:       {}", self.polygon_count)?;
        let hist: Vec<String> = self
            .arity_histogram
            .iter()
            .map(|(k, n)| format!("{k}-gon x{n}"))
            .collect();
        writeln!(f, "arity:          {}", hist.join(", "))?;
        writeln!(
            f,
            "area:           min {:.6} / mean {:.6} / max {:.6}",
            self.min_area, self.mean_area, self.max_area
        )?;
        write!(f, "frontier edges: {}", self.frontier_edges)
    }
}

pub fn mesh_stats(poly: &PolyMesh) -> MeshStats {
    let mut histogram: HashMap<usize, usize> = HashMap::new();
    let mut min_area = f64::INFINITY;
    let mut max_area = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &s in &poly.seeds {
        let arity = poly.polygon_vertices(s).len();
        *histogram.entry(arity).or_insert(0) += 1;
        let area = poly.polygon_signed_area(s);
        min_area = min_area.min(area);
        max_area = max_area.max(area);
        sum += area;
    }
    let mut arity_histogram: Vec<(usize, usize)> = histogram.into_iter().collect();
    arity_histogram.sort_unstable();
    let n = poly.seeds.len();
    MeshStats {
        polygon_count: n,
        arity_histogram,
        min_area: if n == 0 { 0.0 } else { min_area },
        max_area: if n == 0 { 0.0 } else { max_area },
        mean_area: if n == 0 { 0.0 } else { sum / n as f64 },
        frontier_edges: poly.frontier_edge.iter().filter(|&&b| b).count() / 2,
    }
}
