//! Benchmark harness: runs the pipelines over generated meshes and emits a
//! per-phase timing CSV, one row per (mesh, pipeline, repetition) plus a
//! median summary row per cell. Column names follow the usual phase
//! abbreviations; `golden_header` pins the schema.

use std::fmt;
use std::path::Path;

use crate::mesh::TriMesh;
use crate::par::{run_parallel_timed, ParConfig};
use crate::seq::{run_sequential_timed, PipelineError};
use crate::synth::{generate_trimesh, GenError, GenSpec};
use crate::timing::{fmt_ms, ParPhaseTimings, SeqPhaseTimings};

pub const CSV_HEADER: &str =
    "mesh,n_points,pipeline,rep,LM,LF,LS,Trav,Rep,CtD,LLK,LFK,LSK,LEK,CaK,SFK,OSK,Scan,BtH,TwC,Total";

/// Number of timing columns after the four key columns.
const N_TIMING_COLS: usize = 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PipelineKind {
    Sequential,
    Parallel,
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineKind::Sequential => write!(f, "seq"),
            PipelineKind::Parallel => write!(f, "par"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Measurement {
    Seq(SeqPhaseTimings),
    Par(ParPhaseTimings),
}

impl Measurement {
    /// Timing cells in CSV column order; `None` renders as an empty cell.
    fn cells(&self) -> [Option<f64>; N_TIMING_COLS] {
        match self {
            Measurement::Seq(t) => {
                let mut c = [None; N_TIMING_COLS];
                c[0] = Some(t.label_longest);
                c[1] = Some(t.label_frontier);
                c[2] = Some(t.label_seeds);
                c[3] = Some(t.traversal);
                c[4] = Some(t.repair);
                c[16] = Some(t.total());
                c
            }
            Measurement::Par(t) => {
                let mut c = [None; N_TIMING_COLS];
                c[5] = Some(t.copy_to_workers);
                c[6] = Some(t.label_longest);
                c[7] = Some(t.label_frontier);
                c[8] = Some(t.label_seeds);
                c[9] = Some(t.label_extra);
                c[10] = Some(t.change_attributes);
                c[11] = Some(t.search_frontier);
                c[12] = Some(t.overwrite_seeds);
                c[13] = Some(t.scan_compact);
                c[14] = Some(t.copy_back);
                c[15] = Some(t.total_with_copies());
                c[16] = Some(t.kernel_total());
                c
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub mesh: String,
    pub n_points: usize,
    pub pipeline: PipelineKind,
    /// Repetition ordinal, or `median` for the summary row.
    pub rep: String,
    pub cells: [Option<f64>; N_TIMING_COLS],
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub specs: Vec<GenSpec>,
    pub pipelines: Vec<PipelineKind>,
    pub repetitions: usize,
    pub workers: usize,
}

#[derive(Debug)]
pub enum BenchError {
    Gen(GenError),
    Pipeline(PipelineError),
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::Gen(e) => write!(f, "{e}"),
            BenchError::Pipeline(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for BenchError {}

impl From<GenError> for BenchError {
    fn from(e: GenError) -> Self {
        BenchError::Gen(e)
    }
}

impl From<PipelineError> for BenchError {
    fn from(e: PipelineError) -> Self {
        BenchError::Pipeline(e)
    }
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// One timed measurement of a pipeline on a prebuilt mesh.
pub fn measure(
    mesh: &TriMesh,
    pipeline: PipelineKind,
    workers: usize,
) -> Result<Measurement, PipelineError> {
    match pipeline {
        PipelineKind::Sequential => {
            let (_, t) = run_sequential_timed(mesh)?;
            Ok(Measurement::Seq(t))
        }
        PipelineKind::Parallel => {
            let (_, t) = run_parallel_timed(mesh, &ParConfig::new(workers))?;
            Ok(Measurement::Par(t))
        }
    }
}

/// Runs the whole benchmark matrix. Each mesh is generated once and reused
/// across pipelines and repetitions; after the per-repetition rows of a
/// (mesh, pipeline) cell, a `median` summary row is appended.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for spec in &cfg.specs {
        let mesh = generate_trimesh(spec)?;
        for &pipeline in &cfg.pipelines {
            let mut cell_rows = Vec::with_capacity(cfg.repetitions);
            for rep in 0..cfg.repetitions.max(1) {
                let m = measure(&mesh, pipeline, cfg.workers)?;
                cell_rows.push(BenchRow {
                    mesh: spec.label(),
                    n_points: mesh.n_vertices(),
                    pipeline,
                    rep: rep.to_string(),
                    cells: m.cells(),
                });
            }
            let mut summary = [None; N_TIMING_COLS];
            for (col, slot) in summary.iter_mut().enumerate() {
                let mut values: Vec<f64> =
                    cell_rows.iter().filter_map(|r| r.cells[col]).collect();
                if !values.is_empty() {
                    *slot = Some(median(&mut values));
                }
            }
            let first = &cell_rows[0];
            let median_row = BenchRow {
                mesh: first.mesh.clone(),
                n_points: first.n_points,
                pipeline,
                rep: "median".to_string(),
                cells: summary,
            };
            rows.extend(cell_rows);
            rows.push(median_row);
        }
    }
    Ok(rows)
}

/// Median row of a (mesh label, pipeline) cell.
pub fn median_row<'a>(
    rows: &'a [BenchRow],
    mesh: &str,
    pipeline: PipelineKind,
) -> Option<&'a BenchRow> {
    rows.iter()
        .find(|r| r.mesh == mesh && r.pipeline == pipeline && r.rep == "median")
}

/// Named timing cells of a row, column name to milliseconds.
pub fn named_cells(row: &BenchRow) -> Vec<(&'static str, f64)> {
    const NAMES: [&str; N_TIMING_COLS] = [
        "LM", "LF", "LS", "Trav", "Rep", "CtD", "LLK", "LFK", "LSK", "LEK", "CaK", "SFK", "OSK",
        "Scan", "BtH", "TwC", "Total",
    ];
    NAMES
        .iter()
        .zip(row.cells.iter())
        .filter_map(|(&name, &cell)| cell.map(|v| (name, v)))
        .collect()
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}",
            row.mesh, row.n_points, row.pipeline, row.rep
        ));
        for cell in &row.cells {
            out.push(',');
            if let Some(v) = cell {
                out.push_str(&fmt_ms(*v));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(rows: &[BenchRow], path: &Path) -> std::io::Result<()> {
    std::fs::write(path, rows_to_csv(rows))
}
