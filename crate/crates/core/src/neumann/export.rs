use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::domain::GridDomain2D;

/// Serialized grid: bounding box, spacing and the run-length encoded mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainExport {
    pub bbox: [[f64; 2]; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Alternating run lengths of inactive and active cells in row-major
    /// order, starting with an inactive run (possibly empty).
    pub mask_rle: Vec<usize>,
}

pub fn encode_mask(mask: &[bool]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0;
    for &m in mask {
        if m == current {
            len += 1;
        } else {
            runs.push(len);
            current = m;
            len = 1;
        }
    }
    runs.push(len);
    runs
}

pub fn decode_mask(runs: &[usize], total: usize) -> Result<Vec<bool>> {
    let mut out = Vec::with_capacity(total);
    for (k, &r) in runs.iter().enumerate() {
        out.extend(std::iter::repeat_n(k % 2 == 1, r));
    }
    if out.len() != total {
        return Err(Error::InvalidArgument(format!("mask runs cover {} cells, expected {total}", out.len())));
    }
    Ok(out)
}

impl DomainExport {
    pub fn of(dom: &GridDomain2D) -> Self {
        let hi = [dom.lo[0] + dom.nx as f64 * dom.h, dom.lo[1] + dom.ny as f64 * dom.h];
        Self { bbox: [dom.lo, hi], h: dom.h, nx: dom.nx, ny: dom.ny, mask_rle: encode_mask(&dom.mask) }
    }

    pub fn mask(&self) -> Result<Vec<bool>> {
        decode_mask(&self.mask_rle, self.nx * self.ny)
    }
}

/// Cell values as a CSV matrix, one grid row per line from the bottom row
/// up; inactive cells are left empty.
pub fn grid_function_csv(dom: &GridDomain2D, values: &[f64]) -> Result<String> {
    if values.len() != dom.cells.len() {
        return Err(Error::InvalidArgument(format!("{} values for {} cells", values.len(), dom.cells.len())));
    }
    let mut grid = vec![None; dom.nx * dom.ny];
    for (c, v) in dom.cells.iter().zip(values) {
        grid[c.j * dom.nx + c.i] = Some(*v);
    }
    let mut out = String::new();
    for row in grid.chunks(dom.nx) {
        let line: Vec<String> = row.iter().map(|v| v.map(|x| format!("{x:e}")).unwrap_or_default()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    Ok(out)
}
