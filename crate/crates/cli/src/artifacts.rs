//! Files written by `solve` and read back by `rollout` and `export`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use symreach::grid::{read_raster, write_csv, write_raster, Grid, ValueField};
use symreach::solver::{PolicyTable, ValueSequence};

use crate::config::ScenarioConfig;

pub fn values_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("values_k{k}.bin"))
}

pub fn values_csv_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("values_k{k}.csv"))
}

pub fn membership_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("membership_k{k}.csv"))
}

pub fn policy_path(dir: &Path) -> PathBuf {
    dir.join("policy.bin")
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

pub fn write_field_raster(field: &ValueField, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    write_raster(field, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_field_csv(field: &ValueField, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    write_csv(field, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<ValueField> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_raster(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

/// Reads `values_k0.bin` through `values_k{horizon}.bin`.
pub fn read_values(dir: &Path, horizon: usize) -> Result<ValueSequence> {
    let fields = (0..=horizon)
        .map(|k| read_field(&values_path(dir, k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ValueSequence::new(fields)?)
}

/// One line per node: `i0,...,x0,...,member` with `member` 0 or 1.
pub fn write_membership<F>(grid: &Grid, mut member: F, path: &Path) -> Result<()>
where
    F: FnMut(usize, &[f64]) -> Result<bool>,
{
    use std::fmt::Write as _;
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    let n = grid.dim();
    let header: Vec<String> = (0..n)
        .map(|d| format!("i{d}"))
        .chain((0..n).map(|d| format!("x{d}")))
        .chain(std::iter::once("member".to_string()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    let mut idx = vec![0usize; n];
    let mut p = vec![0.0; n];
    let mut line = String::new();
    for node in 0..grid.len() {
        grid.unravel(node, &mut idx);
        grid.flat_node_point(node, &mut p);
        line.clear();
        for i in &idx {
            write!(line, "{i},")?;
        }
        for x in &p {
            write!(line, "{x},")?;
        }
        write!(line, "{}", u8::from(member(node, &p)?))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct PolicyHeader {
    controls: usize,
    steps: usize,
    nodes: usize,
    dtype: String,
}

/// JSON header line followed by `steps × nodes` little-endian `u32`.
pub fn write_policy(table: &PolicyTable, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    let header = PolicyHeader {
        controls: table.control_count(),
        steps: table.steps(),
        nodes: if table.steps() > 0 { table.step(0).len() } else { 0 },
        dtype: "u32le".into(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for k in 0..table.steps() {
        for &c in table.step(k) {
            out.write_all(&c.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_policy(path: &Path) -> Result<PolicyTable> {
    use std::io::BufRead;
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut input = BufReader::new(file);
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: PolicyHeader = serde_json::from_str(line.trim_end()).context("policy header")?;
    if header.dtype != "u32le" {
        bail!("unsupported policy dtype {}", header.dtype);
    }
    let mut bytes = vec![0u8; header.steps * header.nodes * 4];
    input.read_exact(&mut bytes).context("policy payload truncated")?;
    let entries: Vec<u32> = bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4-byte chunk")))
        .collect();
    if entries.iter().any(|&c| c as usize >= header.controls) {
        bail!("policy entry out of range for {} controls", header.controls);
    }
    let steps = if header.nodes == 0 {
        vec![Vec::new(); header.steps]
    } else {
        entries.chunks(header.nodes).map(<[u32]>::to_vec).collect()
    };
    Ok(PolicyTable::new(header.controls, steps))
}

/// Run record written next to the exported fields.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ScenarioConfig,
    pub workers: usize,
    pub horizon: usize,
    pub nodes: usize,
    /// `passed`, `failed` or `skipped`.
    pub verification: String,
    /// Wall time of each backward step, indexed by `k`.
    pub step_seconds: Vec<f64>,
    pub total_seconds: f64,
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let table = PolicyTable::new(6, vec![vec![0, 5, 2], vec![1, 1, 3]]);
        let path = dir.path().join("p.bin");
        write_policy(&table, &path).unwrap();
        let back = read_policy(&path).unwrap();
        assert_eq!(back.steps(), 2);
        assert_eq!(back.step(0), &[0, 5, 2]);
        assert_eq!(back.step(1), &[1, 1, 3]);
        assert_eq!(back.control_count(), 6);
    }

    #[test]
    fn policy_rejects_bad_entries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.bin");
        write_policy(&PolicyTable::new(6, vec![vec![0, 5]]), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let n = bytes.len();
        bytes[n - 4..].copy_from_slice(&9u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        assert!(read_policy(&path).is_err());
        std::fs::write(&path, &bytes[..n - 2]).unwrap();
        assert!(read_policy(&path).is_err());
    }
}
