//! Grid snapshots: one CSV row per stored individual.
//!
//! Columns: `cell_index,slot,g0..g{d-1},fitness,bd0,bd1,sample_count`.
//! Floats use Rust's shortest round-trip formatting, so reloading and
//! re-exporting a snapshot reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::GridGeometry;
use crate::grid::{CellIndex, Evaluation, Genotype, Grid, Individual};

use super::write_atomic;

pub fn snapshot_header(genotype_dim: usize) -> String {
    let mut h = String::from("cell_index,slot");
    for i in 0..genotype_dim {
        let _ = write!(h, ",g{i}");
    }
    h.push_str(",fitness,bd0,bd1,sample_count\n");
    h
}

pub fn render_snapshot(grid: &Grid, genotype_dim: usize) -> String {
    let mut out = snapshot_header(genotype_dim);
    for (cell, occupants) in grid.occupied() {
        for (slot, ind) in occupants.occupants().iter().enumerate() {
            let _ = write!(out, "{},{}", cell.0, slot);
            for g in ind.genotype.values() {
                let _ = write!(out, ",{g}");
            }
            let e = &ind.evaluation;
            let _ = writeln!(
                out,
                ",{},{},{},{}",
                e.fitness, e.descriptor[0], e.descriptor[1], ind.sample_count
            );
        }
    }
    out
}

/// Writes the grid atomically to `path`.
pub fn export_grid_snapshot(grid: &Grid, genotype_dim: usize, path: &Path) -> Result<()> {
    write_atomic(path, render_snapshot(grid, genotype_dim).as_bytes())
}

pub fn parse_snapshot(text: &str, geometry: GridGeometry, depth: usize) -> Result<Grid> {
    let bad = |line: usize, message: String| Error::Snapshot { line, message };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "missing header".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 6 || columns[..2] != ["cell_index", "slot"] {
        return Err(bad(1, format!("unexpected header `{header}`")));
    }
    let dim = columns.len() - 6;
    if header.to_string() + "\n" != snapshot_header(dim) {
        return Err(bad(1, format!("unexpected header `{header}`")));
    }

    let mut grid = Grid::new(geometry, depth);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(bad(line_no, format!("expected {} fields, got {}", columns.len(), fields.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| bad(line_no, format!("`{s}`: {e}")));
        let float = |s: &str| s.parse::<f64>().map_err(|e| bad(line_no, format!("`{s}`: {e}")));

        let cell = int(fields[0])?;
        let slot = int(fields[1])?;
        if cell >= grid.cell_count() {
            return Err(bad(line_no, format!("cell {cell} outside a grid of {}", grid.cell_count())));
        }
        let cell = CellIndex(cell);
        if slot != grid.cell(cell).len() || slot >= depth {
            return Err(bad(line_no, format!("slot {slot} out of sequence for cell {}", cell.0)));
        }
        let genes = fields[2..2 + dim].iter().map(|s| float(s)).collect::<Result<Vec<_>>>()?;
        let fitness = float(fields[2 + dim])?;
        let bd = [float(fields[3 + dim])?, float(fields[4 + dim])?];
        let sample_count = fields[5 + dim]
            .parse::<u32>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| bad(line_no, format!("invalid sample_count `{}`", fields[5 + dim])))?;
        let mut ind = Individual::new(Genotype::new(genes), Evaluation::new(fitness, bd));
        ind.sample_count = sample_count;
        grid.push(cell, ind);
    }
    Ok(grid)
}

pub fn load_grid_snapshot(path: &Path, geometry: GridGeometry, depth: usize) -> Result<Grid> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text, geometry, depth)
}
