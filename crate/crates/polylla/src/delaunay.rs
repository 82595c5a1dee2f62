//! Incremental Delaunay triangulation (Bowyer-Watson) for building random
//! test meshes. Plain f64 predicates over a far-away super triangle: adequate
//! for seeded uniform points at desk scale, not for adversarial inputs.

use std::collections::HashMap;

use crate::mesh::cross;

const NONE: usize = usize::MAX;

struct Tri {
    v: [usize; 3],
    /// `n[i]` is the neighbor across edge `(v[i], v[(i+1) % 3])`.
    n: [usize; 3],
    alive: bool,
}

/// Positive when `p` lies strictly inside the circumcircle of CCW `(a, b, c)`.
pub(crate) fn in_circle(a: (f64, f64), b: (f64, f64), c: (f64, f64), p: (f64, f64)) -> f64 {
    let (ax, ay) = (a.0 - p.0, a.1 - p.1);
    let (bx, by) = (b.0 - p.0, b.1 - p.1);
    let (cx, cy) = (c.0 - p.0, c.1 - p.1);
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx)
}

/// Triangulates distinct points; returns CCW triangles over the input indices.
pub fn triangulate(points: &[(f64, f64)]) -> Vec<[usize; 3]> {
    let n = points.len();
    assert!(n >= 3, "need at least 3 points");

    let (mut minx, mut miny) = points[0];
    let (mut maxx, mut maxy) = points[0];
    for &(x, y) in points {
        minx = minx.min(x);
        miny = miny.min(y);
        maxx = maxx.max(x);
        maxy = maxy.max(y);
    }
    let d = (maxx - minx).max(maxy - miny).max(1.0);
    let (midx, midy) = ((minx + maxx) / 2.0, (miny + maxy) / 2.0);
    // Super-triangle vertices live at indices n, n+1, n+2. They sit ~1e9
    // data-diameters away so that every circumcircle a hull sliver can have
    // still excludes them; the predicates then behave like the symbolic
    // point-at-infinity treatment up to a ~1e-9 * d window.
    let r = 1.0e9 * d;
    let verts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .chain([
            (midx - 3.0 * r, midy - 2.0 * r),
            (midx + 3.0 * r, midy - 2.0 * r),
            (midx, midy + 3.0 * r),
        ])
        .collect();

    let mut tris: Vec<Tri> = vec![Tri {
        v: [n, n + 1, n + 2],
        n: [NONE; 3],
        alive: true,
    }];
    let mut last = 0usize;
    let mut stamp: Vec<u32> = vec![0];
    let mut epoch = 0u32;
    let mut stack: Vec<usize> = Vec::new();
    let mut cavity: Vec<usize> = Vec::new();
    // Cavity boundary as (a, b, external neighbor), in discovery order.
    let mut boundary: Vec<(usize, usize, usize)> = Vec::new();

    for p in 0..n {
        let pt = verts[p];
        let t0 = locate(&verts, &tris, last, pt);

        epoch += 1;
        stack.clear();
        cavity.clear();
        boundary.clear();
        stack.push(t0);
        stamp[t0] = epoch;
        while let Some(t) = stack.pop() {
            cavity.push(t);
            for i in 0..3 {
                let nb = tris[t].n[i];
                let a = tris[t].v[i];
                let b = tris[t].v[(i + 1) % 3];
                if nb == NONE {
                    boundary.push((a, b, NONE));
                    continue;
                }
                if stamp[nb] == epoch {
                    continue;
                }
                let tv = tris[nb].v;
                if in_circle(verts[tv[0]], verts[tv[1]], verts[tv[2]], pt) > 0.0 {
                    stamp[nb] = epoch;
                    stack.push(nb);
                } else {
                    boundary.push((a, b, nb));
                }
            }
        }
        for &t in &cavity {
            tris[t].alive = false;
        }

        // One new triangle (a, b, p) per boundary edge; the loop around p is
        // stitched through the shared (b, p) / (p, a) edges.
        let base = tris.len();
        let mut start_of: HashMap<usize, usize> = HashMap::with_capacity(boundary.len());
        let mut end_of: HashMap<usize, usize> = HashMap::with_capacity(boundary.len());
        for (k, &(a, b, _)) in boundary.iter().enumerate() {
            let prev_s = start_of.insert(a, base + k);
            let prev_e = end_of.insert(b, base + k);
            debug_assert!(
                prev_s.is_none() && prev_e.is_none(),
                "cavity boundary is not a simple loop"
            );
        }
        for &(a, b, ext) in boundary.iter() {
            let t = tris.len();
            tris.push(Tri {
                v: [a, b, p],
                n: [ext, start_of[&b], end_of[&a]],
                alive: true,
            });
            stamp.push(0);
            if ext != NONE {
                let ev = tris[ext].v;
                for i in 0..3 {
                    if ev[i] == b && ev[(i + 1) % 3] == a {
                        tris[ext].n[i] = t;
                        break;
                    }
                }
            }
        }
        last = base;
    }

    tris.iter()
        .filter(|t| t.alive && t.v.iter().all(|&v| v < n))
        .map(|t| {
            debug_assert!(cross(verts[t.v[0]], verts[t.v[1]], verts[t.v[2]]) > 0.0);
            t.v
        })
        .collect()
}

fn locate(verts: &[(f64, f64)], tris: &[Tri], start: usize, p: (f64, f64)) -> usize {
    let mut cur = start;
    let mut steps = 0usize;
    'walk: loop {
        steps += 1;
        if steps > 4 * tris.len() + 64 {
            break;
        }
        let t = &tris[cur];
        for i in 0..3 {
            let a = verts[t.v[i]];
            let b = verts[t.v[(i + 1) % 3]];
            if cross(a, b, p) < 0.0 {
                let nb = t.n[i];
                if nb == NONE {
                    break 'walk;
                }
                cur = nb;
                continue 'walk;
            }
        }
        return cur;
    }
    // Walk got stuck (float ties); fall back to scanning.
    tris.iter()
        .position(|t| {
            t.alive
                && (0..3).all(|i| {
                    cross(verts[t.v[i]], verts[t.v[(i + 1) % 3]], p) >= 0.0
                })
        })
        .expect("point must lie inside the super triangle")
}
