//! Text mesh formats: Triangle-style `.node`/`.ele` input, OFF polygon
//! output, and a versioned half-edge dump that round-trips both mesh kinds
//! exactly. Header tokens and index conventions are documented in
//! `docs/formats.md`.

use std::fmt;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use crate::mesh::{HalfEdge, TriMesh, Vertex};
use crate::seq::PolyMesh;

pub const HEDUMP_VERSION: u32 = 1;

#[derive(Debug)]
pub enum FormatError {
    /// Malformed content; `line` is 1-based.
    Parse { line: usize, message: String },
    /// A file mixes 0- and 1-based vertex indexing.
    IndexBaseAmbiguous { line: usize },
    VersionMismatch { found: String },
    Io(io::Error),
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Parse { line, message } => write!(f, "line {line}: {message}"),
            FormatError::IndexBaseAmbiguous { line } => {
                write!(f, "line {line}: inconsistent 0-/1-based vertex indexing")
            }
            FormatError::VersionMismatch { found } => {
                write!(f, "unsupported hedump header '{found}'")
            }
            FormatError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<io::Error> for FormatError {
    fn from(e: io::Error) -> Self {
        FormatError::Io(e)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

/// Non-blank, non-comment lines with their 1-based numbers. Triangle files
/// use `#` comments.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_token<T: std::str::FromStr>(
    token: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, FormatError> {
    token
        .ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse::<T>()
        .map_err(|_| parse_err(line, format!("invalid {what}")))
}

/// Reads a Triangle-format `.node`/`.ele` pair. 0- or 1-based indexing is
/// detected from the first node index and applied to both files.
pub fn read_node_ele(
    node_path: &Path,
    ele_path: &Path,
) -> Result<(Vec<(f64, f64)>, Vec<[usize; 3]>), FormatError> {
    let node_text = fs::read_to_string(node_path)?;
    let mut lines = content_lines(&node_text);

    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty .node file"))?;
    let mut tok = header.split_whitespace();
    let n_points: usize = parse_token(tok.next(), hline, "point count")?;
    let dim: usize = parse_token(tok.next(), hline, "dimension")?;
    if dim != 2 {
        return Err(parse_err(hline, format!("expected dimension 2, got {dim}")));
    }
    let n_attrs: usize = parse_token(tok.next(), hline, "attribute count")?;
    let n_markers: usize = parse_token(tok.next(), hline, "boundary marker flag")?;

    let mut points = Vec::with_capacity(n_points);
    let mut base: Option<usize> = None;
    for i in 0..n_points {
        let (lno, line) = lines.next().ok_or_else(|| {
            parse_err(
                hline,
                format!("expected {n_points} points, file ends after {i}"),
            )
        })?;
        let mut tok = line.split_whitespace();
        let idx: usize = parse_token(tok.next(), lno, "point index")?;
        let b = *base.get_or_insert_with(|| idx.min(1));
        if b == 1 && idx == 0 {
            return Err(FormatError::IndexBaseAmbiguous { line: lno });
        }
        if idx != i + b {
            if b == 0 && idx == n_points {
                return Err(FormatError::IndexBaseAmbiguous { line: lno });
            }
            return Err(parse_err(lno, format!("expected point index {}", i + b)));
        }
        let x: f64 = parse_token(tok.next(), lno, "x coordinate")?;
        let y: f64 = parse_token(tok.next(), lno, "y coordinate")?;
        let extra = tok.count();
        if extra != n_attrs + n_markers {
            return Err(parse_err(
                lno,
                format!(
                    "expected {} trailing fields, got {extra}",
                    n_attrs + n_markers
                ),
            ));
        }
        points.push((x, y));
    }
    let base = base.unwrap_or(0);

    let ele_text = fs::read_to_string(ele_path)?;
    let mut lines = content_lines(&ele_text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty .ele file"))?;
    let mut tok = header.split_whitespace();
    let n_triangles: usize = parse_token(tok.next(), hline, "triangle count")?;
    let nodes_per: usize = parse_token(tok.next(), hline, "nodes per triangle")?;
    if nodes_per != 3 {
        return Err(parse_err(
            hline,
            format!("expected 3 nodes per triangle, got {nodes_per}"),
        ));
    }
    let _attrs: usize = parse_token(tok.next(), hline, "attribute count")?;

    let mut triangles = Vec::with_capacity(n_triangles);
    for i in 0..n_triangles {
        let (lno, line) = lines.next().ok_or_else(|| {
            parse_err(
                hline,
                format!("expected {n_triangles} triangles, file ends after {i}"),
            )
        })?;
        let mut tok = line.split_whitespace();
        let _idx: usize = parse_token(tok.next(), lno, "triangle index")?;
        let mut tri = [0usize; 3];
        for slot in tri.iter_mut() {
            let v: usize = parse_token(tok.next(), lno, "vertex index")?;
            if base == 1 && v == 0 {
                return Err(FormatError::IndexBaseAmbiguous { line: lno });
            }
            if v < base || v - base >= n_points {
                if base == 0 && v == n_points {
                    return Err(FormatError::IndexBaseAmbiguous { line: lno });
                }
                return Err(parse_err(lno, format!("vertex index {v} out of range")));
            }
            *slot = v - base;
        }
        triangles.push(tri);
    }
    Ok((points, triangles))
}

/// Writes `<base>.node` and `<base>.ele` (0-based, no attributes/markers).
pub fn write_node_ele(
    points: &[(f64, f64)],
    triangles: &[[usize; 3]],
    base_path: &Path,
) -> Result<(), FormatError> {
    let mut node = String::new();
    node.push_str(&format!("{} 2 0 0\n", points.len()));
    for (i, (x, y)) in points.iter().enumerate() {
        node.push_str(&format!("{i} {x} {y}\n"));
    }
    fs::write(base_path.with_extension("node"), node)?;

    let mut ele = String::new();
    ele.push_str(&format!("{} 3 0\n", triangles.len()));
    for (i, t) in triangles.iter().enumerate() {
        ele.push_str(&format!("{i} {} {} {}\n", t[0], t[1], t[2]));
    }
    fs::write(base_path.with_extension("ele"), ele)?;
    Ok(())
}

/// Writes the polygonal mesh as an OFF file: one face line per seed, the
/// vertex cycle rotated to start at its smallest vertex index. Deterministic
/// for a given mesh.
pub fn write_poly_off(poly: &PolyMesh, path: &Path) -> Result<(), FormatError> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "OFF")?;
    writeln!(out, "{} {} 0", poly.vertices.len(), poly.seeds.len())?;
    for v in &poly.vertices {
        writeln!(out, "{} {} 0", v.x, v.y)?;
    }
    for &s in &poly.seeds {
        let mut cycle = poly.polygon_vertices(s);
        let min_pos = cycle
            .iter()
            .enumerate()
            .min_by_key(|&(_, &v)| v)
            .map(|(i, _)| i)
            .unwrap_or(0);
        cycle.rotate_left(min_pos);
        write!(out, "{}", cycle.len())?;
        for v in cycle {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Either mesh kind, as read back from a hedump file.
#[derive(Clone, Debug)]
pub enum HedumpMesh {
    Tri(TriMesh),
    Poly(PolyMesh),
}

fn write_vertices(out: &mut String, vertices: &[Vertex]) {
    out.push_str(&format!("vertices {}\n", vertices.len()));
    for v in vertices {
        out.push_str(&format!(
            "{} {} {} {}\n",
            v.x,
            v.y,
            u8::from(v.is_border),
            v.incident_halfedge
        ));
    }
}

fn write_halfedges(out: &mut String, halfedges: &[HalfEdge]) {
    out.push_str(&format!("halfedges {}\n", halfedges.len()));
    for he in halfedges {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            he.origin,
            he.twin,
            he.next,
            he.prev,
            u8::from(he.is_border)
        ));
    }
}

/// Serializes a triangulation: vertex and half-edge records verbatim.
pub fn write_hedump_tri(mesh: &TriMesh, path: &Path) -> Result<(), FormatError> {
    let mut out = String::new();
    out.push_str(&format!("polylla-hedump {HEDUMP_VERSION} tri\n"));
    write_vertices(&mut out, &mesh.vertices);
    write_halfedges(&mut out, &mesh.halfedges);
    out.push_str(&format!("faces {}\n", mesh.n_faces));
    fs::write(path, out)?;
    Ok(())
}

/// Serializes a polygonal mesh, including its seed array and frontier bits.
pub fn write_hedump_poly(poly: &PolyMesh, path: &Path) -> Result<(), FormatError> {
    let mut out = String::new();
    out.push_str(&format!("polylla-hedump {HEDUMP_VERSION} poly\n"));
    write_vertices(&mut out, &poly.vertices);
    write_halfedges(&mut out, &poly.halfedges);
    out.push_str(&format!("seeds {}\n", poly.seeds.len()));
    for &s in &poly.seeds {
        out.push_str(&format!("{s}\n"));
    }
    let bits: String = poly
        .frontier_edge
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    out.push_str(&format!(
        "frontier {}\n{}\n",
        poly.frontier_edge.len(),
        bits
    ));
    fs::write(path, out)?;
    Ok(())
}

struct SectionReader<'a> {
    lines: std::vec::IntoIter<(usize, &'a str)>,
    last_line: usize,
}

impl<'a> SectionReader<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.lines.next();
        if let Some((lno, _)) = item {
            self.last_line = lno;
        }
        item
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), FormatError> {
        self.next().ok_or_else(|| {
            parse_err(
                self.last_line,
                format!("unexpected end of file, wanted {what}"),
            )
        })
    }

    fn section(&mut self, name: &str) -> Result<usize, FormatError> {
        let (lno, line) = self.expect(&format!("'{name} <count>'"))?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some(t) if t == name => {}
            _ => return Err(parse_err(lno, format!("expected '{name} <count>' header"))),
        }
        parse_token(tok.next(), lno, "count")
    }
}

/// Reads a hedump of either kind; all indices are range-checked during
/// parsing.
pub fn read_hedump(path: &Path) -> Result<HedumpMesh, FormatError> {
    let text = fs::read_to_string(path)?;
    let all: Vec<(usize, &str)> = content_lines(&text).collect();
    let mut rd = SectionReader {
        lines: all.into_iter(),
        last_line: 0,
    };

    let (hline, header) = rd.expect("hedump header")?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("polylla-hedump") {
        return Err(parse_err(hline, "not a polylla-hedump file"));
    }
    let version = tok.next().unwrap_or("");
    if version != HEDUMP_VERSION.to_string() {
        return Err(FormatError::VersionMismatch {
            found: header.to_string(),
        });
    }
    let kind = tok.next().unwrap_or("");
    if kind != "tri" && kind != "poly" {
        return Err(parse_err(hline, format!("unknown mesh kind '{kind}'")));
    }

    let n_vertices = rd.section("vertices")?;
    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (lno, line) = rd.expect("a vertex record")?;
        let mut tok = line.split_whitespace();
        vertices.push(Vertex {
            x: parse_token(tok.next(), lno, "x")?,
            y: parse_token(tok.next(), lno, "y")?,
            is_border: parse_token::<u8>(tok.next(), lno, "border flag")? != 0,
            incident_halfedge: parse_token(tok.next(), lno, "incident half-edge")?,
        });
    }

    let n_halfedges = rd.section("halfedges")?;
    let mut halfedges = Vec::with_capacity(n_halfedges);
    for _ in 0..n_halfedges {
        let (lno, line) = rd.expect("a half-edge record")?;
        let mut tok = line.split_whitespace();
        let he = HalfEdge {
            origin: parse_token(tok.next(), lno, "origin")?,
            twin: parse_token(tok.next(), lno, "twin")?,
            next: parse_token(tok.next(), lno, "next")?,
            prev: parse_token(tok.next(), lno, "prev")?,
            is_border: parse_token::<u8>(tok.next(), lno, "border flag")? != 0,
        };
        if he.origin as usize >= n_vertices {
            return Err(parse_err(lno, format!("origin {} out of range", he.origin)));
        }
        for (what, link) in [("twin", he.twin), ("next", he.next), ("prev", he.prev)] {
            if link as usize >= n_halfedges {
                return Err(parse_err(lno, format!("{what} {link} out of range")));
            }
        }
        halfedges.push(he);
    }
    for (i, v) in vertices.iter().enumerate() {
        if v.incident_halfedge as usize >= n_halfedges {
            return Err(parse_err(
                0,
                format!("vertex {i} incident half-edge out of range"),
            ));
        }
    }

    if kind == "tri" {
        let n_faces = rd.section("faces")?;
        if 3 * n_faces > n_halfedges {
            return Err(parse_err(rd.last_line, "face count exceeds half-edges"));
        }
        return Ok(HedumpMesh::Tri(TriMesh {
            vertices,
            halfedges,
            n_faces,
        }));
    }

    let n_seeds = rd.section("seeds")?;
    let mut seeds = Vec::with_capacity(n_seeds);
    for _ in 0..n_seeds {
        let (lno, line) = rd.expect("a seed index")?;
        let s: usize = parse_token(line.split_whitespace().next(), lno, "seed")?;
        if s >= n_halfedges {
            return Err(parse_err(lno, format!("seed {s} out of range")));
        }
        seeds.push(s);
    }
    let n_bits = rd.section("frontier")?;
    if n_bits != n_halfedges {
        return Err(parse_err(
            rd.last_line,
            "frontier bit count does not match half-edges",
        ));
    }
    let (lno, bits) = rd.expect("frontier bits")?;
    if bits.len() != n_bits {
        return Err(parse_err(lno, "frontier bit string has wrong length"));
    }
    let frontier_edge = bits
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(parse_err(lno, "frontier bits must be 0 or 1")),
        })
        .collect::<Result<Vec<bool>, _>>()?;

    Ok(HedumpMesh::Poly(PolyMesh {
        vertices,
        halfedges,
        seeds,
        frontier_edge,
    }))
}
