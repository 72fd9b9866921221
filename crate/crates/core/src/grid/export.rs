use std::io::{self, BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AxisSpec, BoundaryPolicy, Grid, ValueField};

/// Writes one CSV line per node in row-major order with header
/// `i0,...,i{n-1},x0,...,x{n-1},value`.
pub fn write_csv<W: Write>(field: &ValueField, mut out: W) -> io::Result<()> {
    let grid = field.grid();
    let n = grid.dim();
    let header: Vec<String> = (0..n)
        .map(|d| format!("i{d}"))
        .chain((0..n).map(|d| format!("x{d}")))
        .chain(std::iter::once("value".to_string()))
        .collect();
    writeln!(out, "{}", header.join(","))?;

    let mut idx = vec![0usize; n];
    let mut p = vec![0.0; n];
    let mut line = String::new();
    for (node, v) in field.values().iter().enumerate() {
        use std::fmt::Write as _;
        grid.unravel(node, &mut idx);
        grid.flat_node_point(node, &mut p);
        line.clear();
        for i in &idx {
            write!(line, "{i},").unwrap();
        }
        for x in &p {
            write!(line, "{x},").unwrap();
        }
        write!(line, "{v}").unwrap();
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// JSON header line preceding the raw little-endian `f64` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterHeader {
    pub axes: Vec<AxisSpec>,
    pub boundary: BoundaryPolicy,
    pub count: usize,
    pub dtype: String,
}

pub fn write_raster<W: Write>(field: &ValueField, mut out: W) -> io::Result<()> {
    let header = RasterHeader {
        axes: field.grid().axes().to_vec(),
        boundary: field.boundary(),
        count: field.values().len(),
        dtype: "f64le".into(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_raster<R: BufRead>(mut input: R) -> io::Result<ValueField> {
    let invalid = |e: String| io::Error::new(io::ErrorKind::InvalidData, e);
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: RasterHeader = serde_json::from_str(line.trim_end()).map_err(|e| invalid(e.to_string()))?;
    if header.dtype != "f64le" {
        return Err(invalid(format!("unsupported dtype {}", header.dtype)));
    }
    let grid = Grid::new(header.axes).map_err(|e| invalid(e.to_string()))?;
    if grid.len() != header.count {
        return Err(invalid(format!(
            "header count {} does not match grid size {}",
            header.count,
            grid.len()
        )));
    }
    let mut bytes = vec![0u8; header.count * 8];
    input.read_exact(&mut bytes)?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ValueField::new(Arc::new(grid), values, header.boundary).map_err(|e| invalid(e.to_string()))
}
