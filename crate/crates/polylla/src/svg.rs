//! SVG rendering of small polygonal meshes: filled polygons (colored by
//! vertex count) with frontier edges stroked. Output is deterministic for a
//! given mesh.

use std::fmt;
use std::io;
use std::path::Path;

use crate::seq::PolyMesh;

#[derive(Debug)]
pub enum RenderError {
    /// Mesh exceeds the element budget for plotting.
    TooLarge { polygons: usize, max: usize },
    Io(io::Error),
}

impl fmt::Display for RenderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenderError::TooLarge { polygons, max } => {
                write!(f, "mesh has {polygons} polygons, plot limit is {max}")
            }
            RenderError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RenderError {}

impl From<io::Error> for RenderError {
    fn from(e: io::Error) -> Self {
        RenderError::Io(e)
    }
}

const PALETTE: [&str; 8] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
];

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 16.0;

/// Renders the mesh to an SVG document string.
pub fn render_polymesh(poly: &PolyMesh, max_elements: usize) -> Result<String, RenderError> {
    if poly.seeds.len() > max_elements {
        return Err(RenderError::TooLarge {
            polygons: poly.seeds.len(),
            max: max_elements,
        });
    }
    let (mut minx, mut miny) = (f64::INFINITY, f64::INFINITY);
    let (mut maxx, mut maxy) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in &poly.vertices {
        minx = minx.min(v.x);
        miny = miny.min(v.y);
        maxx = maxx.max(v.x);
        maxy = maxy.max(v.y);
    }
    let span = (maxx - minx).max(maxy - miny).max(1e-12);
    let scale = (CANVAS - 2.0 * MARGIN) / span;
    let project = |x: f64, y: f64| {
        (
            MARGIN + (x - minx) * scale,
            // SVG y axis points down.
            MARGIN + (maxy - y) * scale,
        )
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{c}\" height=\"{c}\" viewBox=\"0 0 {c} {c}\">\n",
        c = CANVAS
    ));
    for &s in &poly.seeds {
        let cycle = poly.polygon_vertices(s);
        let fill = PALETTE[cycle.len() % PALETTE.len()];
        let points: Vec<String> = cycle
            .iter()
            .map(|&v| {
                let (x, y) = project(poly.vertices[v].x, poly.vertices[v].y);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        out.push_str(&format!(
            "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"#222222\" stroke-width=\"1\"/>\n",
            points.join(" ")
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_polymesh_svg(
    poly: &PolyMesh,
    path: &Path,
    max_elements: usize,
) -> Result<(), RenderError> {
    let svg = render_polymesh(poly, max_elements)?;
    std::fs::write(path, svg)?;
    Ok(())
}
