//! Data-parallel kernel pipeline.
//!
//! The same mesh as [`crate::seq::run_sequential`], computed as eight
//! barrier-separated passes: three label kernels, the extra-frontier kernel
//! that pre-splits non-simple polygons at barrier tips, the adjacency
//! rewiring kernel, two seed canonicalization kernels, and a scan/compact
//! step that turns the seed bits into a dense index array. Every kernel
//! reads only the previous pass's output and computes values for slots its
//! work-item owns (the few cross-slot writes are idempotent true-bits
//! applied after the pass), so the output does not depend on the worker
//! count or on the order work-items run in. The half-edge array is copied
//! once up front and only its `next`/`prev` cells are rewritten: nothing is
//! allocated or freed while polygons form.

use std::sync::Mutex;
use std::time::Instant;

use crate::mesh::{HalfEdge, TriMesh};
use crate::pool::{permutation, run_chunked, run_collect, scan_compact};
use crate::seq::{
    frontier_edge_count_at, is_frontier, longest_halfedge_of_face, middle_edge_at_barrier_tip,
    search_frontier_edge, search_frontier_edge_ccw, seed_pair_representative, PipelineError,
    PolyMesh,
};
use crate::timing::{ms_since, ParPhaseTimings};

/// Execution settings for one pipeline run.
#[derive(Clone, Copy, Debug)]
pub struct ParConfig {
    pub workers: usize,
    /// When set, every kernel's work-items run in a seeded random order;
    /// the output must not change. Test hook.
    pub permutation_seed: Option<u64>,
}

impl ParConfig {
    pub fn new(workers: usize) -> Self {
        ParConfig {
            workers: workers.max(1),
            permutation_seed: None,
        }
    }
}

/// All intermediate and final buffers of one parallel run.
#[derive(Clone, Debug)]
pub struct ParState {
    pub longest_edge: Vec<bool>,
    pub frontier_edge: Vec<bool>,
    pub seed_bits: Vec<bool>,
    pub halfedges_out: Vec<HalfEdge>,
    pub seeds_compact: Vec<usize>,
}

fn kernel_order(cfg: &ParConfig, salt: u64, n_items: usize) -> Option<Vec<usize>> {
    cfg.permutation_seed
        .map(|seed| permutation(n_items, seed ^ (salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))))
}

/// Shared error slot for work items; the first failure wins.
fn record(failure: &Mutex<Option<PipelineError>>, e: PipelineError) {
    failure.lock().unwrap().get_or_insert(e);
}

fn take(failure: Mutex<Option<PipelineError>>) -> Result<(), PipelineError> {
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// One work-item per triangle: mark its longest half-edge. Each triangle
/// owns the three bit slots of its own half-edges.
pub fn kernel_label_longest(mesh: &TriMesh, cfg: &ParConfig) -> Vec<bool> {
    let mut bits = vec![false; mesh.n_halfedges()];
    match kernel_order(cfg, 1, mesh.n_faces) {
        None => {
            let interior = 3 * mesh.n_faces;
            run_chunked(cfg.workers, &mut bits[..interior], 3, |f, slots| {
                slots[longest_halfedge_of_face(mesh, f) - 3 * f] = true;
            });
        }
        Some(order) => {
            for (_, e) in run_collect(cfg.workers, Some(&order), mesh.n_faces, |f| {
                Some(longest_halfedge_of_face(mesh, f))
            }) {
                bits[e] = true;
            }
        }
    }
    bits
}

/// One work-item per half-edge: mark frontier half-edges.
pub fn kernel_label_frontier(mesh: &TriMesh, longest: &[bool], cfg: &ParConfig) -> Vec<bool> {
    let m = mesh.n_halfedges();
    let mut bits = vec![false; m];
    match kernel_order(cfg, 2, m) {
        None => {
            run_chunked(cfg.workers, &mut bits, 1, |e, slot| {
                slot[0] = is_frontier(mesh, longest, e);
            });
        }
        Some(order) => {
            for (e, _) in run_collect(cfg.workers, Some(&order), m, |e| {
                is_frontier(mesh, longest, e).then_some(())
            }) {
                bits[e] = true;
            }
        }
    }
    bits
}

/// One work-item per half-edge: set the seed bit of each terminal pair's
/// representative (the interior half with the smaller index).
pub fn kernel_label_seeds(mesh: &TriMesh, longest: &[bool], cfg: &ParConfig) -> Vec<bool> {
    let m = mesh.n_halfedges();
    let mut bits = vec![false; m];
    match kernel_order(cfg, 3, m) {
        None => {
            run_chunked(cfg.workers, &mut bits, 1, |e, slot| {
                slot[0] = seed_pair_representative(mesh, longest, e);
            });
        }
        Some(order) => {
            for (e, _) in run_collect(cfg.workers, Some(&order), m, |e| {
                seed_pair_representative(mesh, longest, e).then_some(())
            }) {
                bits[e] = true;
            }
        }
    }
    bits
}

/// One work-item per vertex: a barrier tip (exactly one incident frontier
/// edge) promotes its middle incident edge to frontier and seed on both
/// halves. All decisions are made against the input bits as a snapshot; the
/// sparse idempotent updates are applied after the pass.
pub fn kernel_label_extra_frontier(
    mesh: &TriMesh,
    mut frontier: Vec<bool>,
    mut seed_bits: Vec<bool>,
    cfg: &ParConfig,
) -> Result<(Vec<bool>, Vec<bool>), PipelineError> {
    let failure = Mutex::new(None);
    let n = mesh.n_vertices();
    let order = kernel_order(cfg, 4, n);
    let middles = run_collect(cfg.workers, order.as_deref(), n, |v| {
        if frontier_edge_count_at(mesh, &frontier, v) != 1 {
            return None;
        }
        match middle_edge_at_barrier_tip(mesh, &frontier, v) {
            Ok(mid) => Some(mid),
            Err(e) => {
                record(&failure, e);
                None
            }
        }
    });
    take(failure)?;
    for (_, mid) in middles {
        let twin = mesh.twin(mid);
        frontier[mid] = true;
        frontier[twin] = true;
        seed_bits[mid] = true;
        seed_bits[twin] = true;
    }
    Ok((frontier, seed_bits))
}

/// One work-item per frontier half-edge: relink `next` to the first
/// frontier half-edge found rotating clockwise past `next`, and `prev` to
/// the first found rotating counterclockwise past `prev`. Non-frontier
/// half-edges keep the input adjacency.
pub fn kernel_change_attributes(
    mesh: &TriMesh,
    frontier: &[bool],
    cfg: &ParConfig,
) -> Result<Vec<HalfEdge>, PipelineError> {
    change_attributes_into(mesh, frontier, cfg, mesh.halfedges.clone())
}

pub(crate) fn change_attributes_into(
    mesh: &TriMesh,
    frontier: &[bool],
    cfg: &ParConfig,
    mut out: Vec<HalfEdge>,
) -> Result<Vec<HalfEdge>, PipelineError> {
    let m = mesh.n_halfedges();
    let failure = Mutex::new(None);
    let relink = |e: usize| -> Option<(usize, usize)> {
        if !frontier[e] {
            return None;
        }
        let next = search_frontier_edge(mesh, frontier, mesh.next(e));
        let prev = search_frontier_edge_ccw(mesh, frontier, mesh.prev(e));
        match (next, prev) {
            (Some(n), Some(p)) => Some((n, p)),
            _ => {
                record(&failure, PipelineError::InfiniteRotation { halfedge: e });
                None
            }
        }
    };
    match kernel_order(cfg, 5, m) {
        None => {
            run_chunked(cfg.workers, &mut out, 1, |e, slot| {
                if let Some((n, p)) = relink(e) {
                    slot[0].next = n;
                    slot[0].prev = p;
                }
            });
        }
        Some(order) => {
            for (e, (n, p)) in run_collect(cfg.workers, Some(&order), m, relink) {
                out[e].next = n;
                out[e].prev = p;
            }
        }
    }
    take(failure)?;
    Ok(out)
}

/// One work-item per seed bit: move the bit from its (possibly interior)
/// half-edge to the first frontier half-edge found by clockwise rotation,
/// so every seed lies on a polygon cycle.
pub fn kernel_search_frontier_seed(
    mesh: &TriMesh,
    frontier: &[bool],
    mut seed_bits: Vec<bool>,
    cfg: &ParConfig,
) -> Result<Vec<bool>, PipelineError> {
    let m = mesh.n_halfedges();
    let failure = Mutex::new(None);
    let order = kernel_order(cfg, 6, m);
    let moves = run_collect(cfg.workers, order.as_deref(), m, |e| {
        if !seed_bits[e] {
            return None;
        }
        match search_frontier_edge(mesh, frontier, e) {
            Some(found) => Some(found),
            None => {
                record(&failure, PipelineError::InfiniteRotation { halfedge: e });
                None
            }
        }
    });
    take(failure)?;
    // Seeds that moved were interior, their targets are frontier: the
    // clears and sets touch disjoint slots, so application order is free.
    for (e, found) in moves {
        if found != e {
            seed_bits[e] = false;
            seed_bits[found] = true;
        }
    }
    Ok(seed_bits)
}

/// One work-item per seed bit: walk the polygon cycle and keep only the bit
/// at the cycle's minimum half-edge index. Items on the same cycle compute
/// the same minimum, so the updates are idempotent.
pub fn kernel_overwrite_seeds(
    halfedges_out: &[HalfEdge],
    mut seed_bits: Vec<bool>,
    cfg: &ParConfig,
) -> Result<Vec<bool>, PipelineError> {
    let m = halfedges_out.len();
    let failure = Mutex::new(None);
    let order = kernel_order(cfg, 7, m);
    let minima = run_collect(cfg.workers, order.as_deref(), m, |e| {
        if !seed_bits[e] {
            return None;
        }
        let mut min = e;
        let mut curr = halfedges_out[e].next;
        let mut steps = 0usize;
        while curr != e {
            min = min.min(curr);
            curr = halfedges_out[curr].next;
            steps += 1;
            if steps > m {
                record(&failure, PipelineError::InfiniteWalk { seed: e });
                return None;
            }
        }
        Some(min)
    });
    take(failure)?;
    for (e, min) in minima {
        if min != e {
            seed_bits[e] = false;
        }
        seed_bits[min] = true;
    }
    Ok(seed_bits)
}

/// Exclusive-prefix-sum compaction of the seed bit-vector into a strictly
/// increasing index array.
pub fn compact_seeds(seed_bits: &[bool], workers: usize) -> Vec<usize> {
    scan_compact(seed_bits, workers)
}

/// Runs the kernel pipeline with `workers` workers.
pub fn run_parallel(mesh: &TriMesh, workers: usize) -> Result<PolyMesh, PipelineError> {
    run_parallel_with(mesh, &ParConfig::new(workers))
}

pub fn run_parallel_with(mesh: &TriMesh, cfg: &ParConfig) -> Result<PolyMesh, PipelineError> {
    run_parallel_timed(mesh, cfg).map(|(poly, _)| poly)
}

/// [`run_parallel`] with per-kernel wall-clock durations.
pub fn run_parallel_timed(
    mesh: &TriMesh,
    cfg: &ParConfig,
) -> Result<(PolyMesh, ParPhaseTimings), PipelineError> {
    let (state, mut timings) = execute(mesh, cfg)?;

    // Copy back: materialize the output mesh from the working buffers.
    let t = Instant::now();
    let poly = PolyMesh {
        vertices: mesh.vertices.clone(),
        halfedges: state.halfedges_out,
        seeds: state.seeds_compact,
        frontier_edge: state.frontier_edge,
    };
    timings.copy_back = ms_since(t);
    Ok((poly, timings))
}

/// Runs all kernels and returns the full intermediate state.
pub fn run_parallel_stages(mesh: &TriMesh, cfg: &ParConfig) -> Result<ParState, PipelineError> {
    execute(mesh, cfg).map(|(state, _)| state)
}

fn execute(mesh: &TriMesh, cfg: &ParConfig) -> Result<(ParState, ParPhaseTimings), PipelineError> {
    let mut timings = ParPhaseTimings::default();

    // Working copy of the half-edge array, the analog of shipping the mesh
    // to the workers; its next/prev cells are the only state the kernels
    // rewrite.
    let t = Instant::now();
    let device_halfedges = mesh.halfedges.clone();
    timings.copy_to_workers = ms_since(t);

    let t = Instant::now();
    let longest = kernel_label_longest(mesh, cfg);
    timings.label_longest = ms_since(t);

    let t = Instant::now();
    let frontier = kernel_label_frontier(mesh, &longest, cfg);
    timings.label_frontier = ms_since(t);

    let t = Instant::now();
    let seed_bits = kernel_label_seeds(mesh, &longest, cfg);
    timings.label_seeds = ms_since(t);

    let t = Instant::now();
    let (frontier, seed_bits) = kernel_label_extra_frontier(mesh, frontier, seed_bits, cfg)?;
    timings.label_extra = ms_since(t);

    let t = Instant::now();
    let halfedges_out = change_attributes_into(mesh, &frontier, cfg, device_halfedges)?;
    timings.change_attributes = ms_since(t);

    let t = Instant::now();
    let seed_bits = kernel_search_frontier_seed(mesh, &frontier, seed_bits, cfg)?;
    timings.search_frontier = ms_since(t);

    let t = Instant::now();
    let seed_bits = kernel_overwrite_seeds(&halfedges_out, seed_bits, cfg)?;
    timings.overwrite_seeds = ms_since(t);

    let t = Instant::now();
    let seeds_compact = compact_seeds(&seed_bits, cfg.workers);
    timings.scan_compact = ms_since(t);

    let state = ParState {
        longest_edge: longest,
        frontier_edge: frontier,
        seed_bits,
        halfedges_out,
        seeds_compact,
    };
    Ok((state, timings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{label_frontier_edges, label_longest_edges, label_seed_edges, run_sequential};
    use crate::testutil::{grid_mesh, random_mesh, single_triangle, square_mesh};
    use crate::validate::canonical_polygons;

    fn cfg(workers: usize) -> ParConfig {
        ParConfig::new(workers)
    }

    #[test]
    fn label_kernels_match_sequential() {
        for mesh in [
            square_mesh(),
            single_triangle(),
            grid_mesh(4),
            random_mesh(500, 2),
        ] {
            let longest_seq = label_longest_edges(&mesh);
            let frontier_seq = label_frontier_edges(&mesh, &longest_seq);
            let seeds_seq = label_seed_edges(&mesh, &longest_seq);
            for workers in [1usize, 2, 8] {
                let c = cfg(workers);
                let longest = kernel_label_longest(&mesh, &c);
                assert_eq!(longest, longest_seq);
                let frontier = kernel_label_frontier(&mesh, &longest, &c);
                assert_eq!(frontier, frontier_seq);
                let seed_bits = kernel_label_seeds(&mesh, &longest, &c);
                let positions: Vec<usize> = seed_bits
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &b)| b.then_some(i))
                    .collect();
                assert_eq!(positions, seeds_seq);
            }
        }
    }

    #[test]
    fn square_frontier_bit_count() {
        let mesh = square_mesh();
        let c = cfg(2);
        let longest = kernel_label_longest(&mesh, &c);
        let frontier = kernel_label_frontier(&mesh, &longest, &c);
        assert_eq!(frontier.iter().filter(|&&b| b).count(), 8);
    }

    #[test]
    fn grid_seed_bits_one_per_cell() {
        let mesh = grid_mesh(5);
        let c = cfg(2);
        let longest = kernel_label_longest(&mesh, &c);
        let seeds = kernel_label_seeds(&mesh, &longest, &c);
        assert_eq!(seeds.iter().filter(|&&b| b).count(), 16);

        let tri = single_triangle();
        let longest = kernel_label_longest(&tri, &c);
        let seeds = kernel_label_seeds(&tri, &longest, &c);
        assert_eq!(seeds.iter().filter(|&&b| b).count(), 1);
    }

    #[test]
    fn extra_frontier_is_noop_on_grid() {
        let mesh = grid_mesh(6);
        let c = cfg(2);
        let longest = kernel_label_longest(&mesh, &c);
        let frontier = kernel_label_frontier(&mesh, &longest, &c);
        let seeds = kernel_label_seeds(&mesh, &longest, &c);
        let (frontier2, seeds2) =
            kernel_label_extra_frontier(&mesh, frontier.clone(), seeds.clone(), &c).unwrap();
        assert_eq!(frontier, frontier2);
        assert_eq!(seeds, seeds2);
    }

    #[test]
    fn extra_frontier_matches_sequential_repair_set() {
        // The final frontier bits of both pipelines agree, including any
        // middle edges added for barrier tips.
        for seed in 0..12u64 {
            let mesh = random_mesh(350, seed);
            let sequential = run_sequential(&mesh).unwrap();
            let c = cfg(2);
            let longest = kernel_label_longest(&mesh, &c);
            let frontier = kernel_label_frontier(&mesh, &longest, &c);
            let seeds = kernel_label_seeds(&mesh, &longest, &c);
            let (frontier2, _) =
                kernel_label_extra_frontier(&mesh, frontier, seeds, &c).unwrap();
            assert_eq!(frontier2, sequential.frontier_edge, "seed {seed}");
        }
    }

    #[test]
    fn change_attributes_fuses_square() {
        let mesh = square_mesh();
        let c = cfg(2);
        let longest = kernel_label_longest(&mesh, &c);
        let frontier = kernel_label_frontier(&mesh, &longest, &c);
        let out = kernel_change_attributes(&mesh, &frontier, &c).unwrap();
        let h01 = mesh.find_halfedge(0, 1).unwrap();
        let h12 = mesh.find_halfedge(1, 2).unwrap();
        let h23 = mesh.find_halfedge(2, 3).unwrap();
        let h30 = mesh.find_halfedge(3, 0).unwrap();
        assert_eq!(out[h01].next, h12);
        assert_eq!(out[h12].next, h23);
        assert_eq!(out[h23].next, h30);
        assert_eq!(out[h30].next, h01);
        assert_eq!(out[h01].prev, h30);
        // Non-frontier half-edges keep the input adjacency.
        let d = mesh.find_halfedge(0, 2).unwrap();
        assert_eq!(out[d].next, mesh.next(d));
        assert_eq!(out[d].prev, mesh.prev(d));
    }

    #[test]
    fn change_attributes_identity_on_all_frontier_region() {
        let mesh = single_triangle();
        let c = cfg(1);
        let longest = kernel_label_longest(&mesh, &c);
        let frontier = kernel_label_frontier(&mesh, &longest, &c);
        assert!(frontier.iter().all(|&b| b));
        let out = kernel_change_attributes(&mesh, &frontier, &c).unwrap();
        assert_eq!(out, mesh.halfedges);
    }

    #[test]
    fn change_attributes_matches_sequential_cycles() {
        for seed in [3u64, 17, 40] {
            let mesh = random_mesh(400, seed);
            let sequential = run_sequential(&mesh).unwrap();
            let c = cfg(2);
            let out = change_attributes_into(
                &mesh,
                &sequential.frontier_edge,
                &c,
                mesh.halfedges.clone(),
            )
            .unwrap();
            for e in 0..mesh.n_halfedges() {
                if sequential.frontier_edge[e] {
                    assert_eq!(out[e].next, sequential.halfedges[e].next, "next at {e}");
                    assert_eq!(out[e].prev, sequential.halfedges[e].prev, "prev at {e}");
                }
            }
        }
    }

    #[test]
    fn seed_search_moves_diagonal_to_cycle() {
        let mesh = square_mesh();
        let c = cfg(1);
        let longest = kernel_label_longest(&mesh, &c);
        let frontier = kernel_label_frontier(&mesh, &longest, &c);
        let seeds = kernel_label_seeds(&mesh, &longest, &c);
        let moved = kernel_search_frontier_seed(&mesh, &frontier, seeds, &c).unwrap();
        let positions: Vec<usize> = moved
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        assert_eq!(positions.len(), 1);
        let s = positions[0];
        assert!(frontier[s]);
        assert!(mesh.is_boundary_edge(s), "lands on a boundary half-edge");
        assert!(!mesh.is_border_halfedge(s), "stays on the interior half");
    }

    #[test]
    fn seed_search_keeps_frontier_seeds() {
        let tri = single_triangle();
        let c = cfg(1);
        let longest = kernel_label_longest(&tri, &c);
        let frontier = kernel_label_frontier(&tri, &longest, &c);
        let seeds = kernel_label_seeds(&tri, &longest, &c);
        let moved = kernel_search_frontier_seed(&tri, &frontier, seeds.clone(), &c).unwrap();
        assert_eq!(moved, seeds);
    }

    #[test]
    fn overwrite_keeps_min_per_cycle() {
        let mesh = square_mesh();
        let c = cfg(1);
        let state = run_parallel_stages(&mesh, &c).unwrap();
        assert_eq!(state.seeds_compact.len(), 1);
        let s = state.seeds_compact[0];
        // Minimum of its own cycle.
        let mut min = s;
        let mut e = state.halfedges_out[s].next;
        while e != s {
            min = min.min(e);
            e = state.halfedges_out[e].next;
        }
        assert_eq!(s, min);
    }

    #[test]
    fn seed_count_equals_cycle_count_on_random_mesh() {
        let mesh = random_mesh(600, 21);
        let state = run_parallel_stages(&mesh, &cfg(2)).unwrap();
        let canon = canonical_polygons(&PolyMesh {
            vertices: mesh.vertices.clone(),
            halfedges: state.halfedges_out.clone(),
            seeds: state.seeds_compact.clone(),
            frontier_edge: state.frontier_edge.clone(),
        });
        assert_eq!(canon.len(), state.seeds_compact.len());
        for cycle in &canon {
            assert_eq!(cycle[0], *cycle.iter().min().unwrap());
        }
    }

    #[test]
    fn compact_examples() {
        let bits = [false, false, true, false, true, false, false];
        assert_eq!(compact_seeds(&bits, 3), vec![2, 4]);
        assert!(compact_seeds(&[], 2).is_empty());
    }

    #[test]
    fn parallel_equals_sequential_canonically() {
        for seed in 0..10u64 {
            let mesh = random_mesh(500, seed);
            let sequential = run_sequential(&mesh).unwrap();
            for workers in [1usize, 2, 8] {
                let parallel = run_parallel(&mesh, workers).unwrap();
                assert_eq!(
                    canonical_polygons(&parallel),
                    canonical_polygons(&sequential),
                    "seed {seed} workers {workers}"
                );
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mesh = grid_mesh(7);
        let base = run_parallel(&mesh, 1).unwrap();
        for workers in [2usize, 3, 8] {
            assert_eq!(run_parallel(&mesh, workers).unwrap(), base);
        }
    }

    #[test]
    fn permuted_schedules_do_not_change_output() {
        let mesh = random_mesh(400, 33);
        let base = run_parallel(&mesh, 2).unwrap();
        for perm_seed in 0..4u64 {
            let c = ParConfig {
                workers: 3,
                permutation_seed: Some(perm_seed),
            };
            assert_eq!(run_parallel_with(&mesh, &c).unwrap(), base);
        }
    }

    #[test]
    fn no_allocation_during_kernels() {
        let mesh = random_mesh(300, 8);
        let poly = run_parallel(&mesh, 2).unwrap();
        assert_eq!(poly.halfedges.len(), mesh.n_halfedges());
    }
}
