//! File formats: binary fields, CSV tables and `key = value` summaries.
//!
//! A binary field file is the line `pmelab-field 1`, a one-line grid
//! descriptor, the line `rows cols`, then `rows · cols` little-endian `f64`
//! values in row-major order. CSV files are comma-separated with a header row
//! and LF line endings; numbers carry 17 significant digits so that re-reading
//! them reproduces the written `f64` exactly.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{build_masked_grid_n, HoleGeometry, RadialGrid};
use crate::solver::{Checkpoint, InitialData, Mesh, RunRecord, SolverState};

const FIELD_MAGIC: &str = "pmelab-field 1";

/// Header of a binary field file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldHeader {
    pub descriptor: String,
    pub rows: usize,
    pub cols: usize,
}

/// Writes a binary field file.
pub fn write_field(path: &Path, descriptor: &str, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    if rows * cols != values.len() {
        return Err(Error::param(format!("{rows}×{cols} field with {} values", values.len())));
    }
    if descriptor.contains('\n') {
        return Err(Error::param("field descriptors must fit on one line"));
    }
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    write!(out, "{FIELD_MAGIC}\n{descriptor}\n{rows} {cols}\n")?;
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a binary field file.
pub fn read_field(path: &Path) -> Result<(FieldHeader, Vec<f64>)> {
    let bad = |message: String| Error::Format {
        path: path.into(),
        message,
    };
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut line = String::new();
    let mut next_line = |reader: &mut BufReader<fs::File>| -> Result<String> {
        line.clear();
        reader.read_line(&mut line)?;
        Ok(line.trim_end_matches('\n').to_string())
    };
    let magic = next_line(&mut reader)?;
    if magic != FIELD_MAGIC {
        return Err(bad(format!("not a field file (first line `{magic}`)")));
    }
    let descriptor = next_line(&mut reader)?;
    let dims = next_line(&mut reader)?;
    let (rows, cols) = dims
        .split_once(' ')
        .and_then(|(r, c)| Some((r.parse::<usize>().ok()?, c.parse::<usize>().ok()?)))
        .ok_or_else(|| bad(format!("bad dimension line `{dims}`")))?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != rows * cols * 8 {
        return Err(bad(format!("expected {} bytes of data, found {}", rows * cols * 8, bytes.len())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((FieldHeader { descriptor, rows, cols }, values))
}

/// A number with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a numeric table.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::param(format!(
                "row of {} values under a {}-column header",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|&x| fmt17(x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric table written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new().from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| Error::Format {
                    path: path.into(),
                    message: format!("not a number: `{s}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Column names of [`write_checkpoints`].
pub const CHECKPOINT_COLUMNS: [&str; 7] = ["t", "mass", "weighted_moment", "zeta_minus", "zeta_plus", "sup_u", "outflow"];

/// Writes the checkpoint diagnostics of a run.
pub fn write_checkpoints(path: &Path, record: &RunRecord) -> Result<()> {
    let rows: Vec<Vec<f64>> = record
        .checkpoints
        .iter()
        .map(|c| vec![c.t, c.mass, c.weighted_moment, c.zeta_minus, c.zeta_plus, c.sup_u, c.outflow])
        .collect();
    write_csv(path, &CHECKPOINT_COLUMNS, &rows)
}

/// Reads checkpoints written by [`write_checkpoints`].
pub fn read_checkpoints(path: &Path) -> Result<Vec<Checkpoint>> {
    let (header, rows) = read_csv(path)?;
    if header != CHECKPOINT_COLUMNS {
        return Err(Error::Format {
            path: path.into(),
            message: format!("unexpected columns {header:?}"),
        });
    }
    Ok(rows
        .into_iter()
        .map(|r| Checkpoint {
            t: r[0],
            mass: r[1],
            weighted_moment: r[2],
            zeta_minus: r[3],
            zeta_plus: r[4],
            sup_u: r[5],
            outflow: r[6],
        })
        .collect())
}

/// Writes a solver state as a binary field: one row of ring values for
/// radial meshes (with the ring edges in `<name>.edges`), or the full
/// row-major square for masked meshes (zero in hole and truncation cells).
/// The descriptor records the mesh, `t` and `m`.
pub fn write_snapshot(path: &Path, state: &SolverState) -> Result<Vec<std::path::PathBuf>> {
    let disc = state.discretization();
    let descriptor = format!("{} t={:e} m={:e}", state.mesh().describe(), state.t(), state.m());
    match state.mesh() {
        Mesh::Radial(g) => {
            let mut values = vec![0.0; g.len()];
            for (c, &u) in state.u().iter().enumerate() {
                values[disc.mesh_index(c)] = u;
            }
            write_field(path, &descriptor, 1, g.len(), &values)?;
            let edges_path = path.with_extension("edges");
            write_field(
                &edges_path,
                &format!("radial edges stretch={:e}", g.stretch()),
                1,
                g.edges().len(),
                g.edges(),
            )?;
            Ok(vec![path.to_path_buf(), edges_path])
        }
        Mesh::Masked(g) => {
            let mut values = vec![0.0; g.len()];
            for (c, &u) in state.u().iter().enumerate() {
                values[disc.mesh_index(c)] = u;
            }
            write_field(path, &descriptor, g.n(), g.n(), &values)?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

fn descriptor_value(path: &Path, descriptor: &str, key: &str) -> Result<f64> {
    descriptor
        .split_whitespace()
        .find_map(|w| w.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Format {
            path: path.into(),
            message: format!("descriptor `{descriptor}` lacks `{key}`"),
        })
}

/// Reads a snapshot written by [`write_snapshot`]; masked meshes need their
/// hole (`None` for whole-plane grids).
pub fn read_snapshot(path: &Path, hole: Option<HoleGeometry>) -> Result<SolverState> {
    let (header, values) = read_field(path)?;
    let d = &header.descriptor;
    let t = descriptor_value(path, d, "t")?;
    let m = descriptor_value(path, d, "m")?;
    let mesh = if d.starts_with("radial") {
        let edges_path = path.with_extension("edges");
        let (eh, edges) = read_field(&edges_path)?;
        let stretch = descriptor_value(&edges_path, &eh.descriptor, "stretch")?;
        Mesh::Radial(RadialGrid::from_edges(edges, stretch)?)
    } else if d.starts_with("masked") {
        let h = descriptor_value(path, d, "h")?;
        Mesh::Masked(build_masked_grid_n(hole, header.cols, h)?)
    } else {
        return Err(Error::Format {
            path: path.into(),
            message: format!("unknown mesh in `{d}`"),
        });
    };
    let probe = SolverState::new(mesh.clone(), m, t, &InitialData::Zero)?;
    let disc = probe.discretization();
    let u: Vec<f64> = (0..disc.len()).map(|c| values[disc.mesh_index(c)]).collect();
    SolverState::new(mesh, m, t, &InitialData::Values(u))
}

/// Writes `key = value` lines.
pub fn write_key_values(path: &Path, pairs: &[(String, String)]) -> Result<()> {
    let mut text = String::new();
    for (k, v) in pairs {
        if k.contains('=') || k.contains('\n') || v.contains('\n') {
            return Err(Error::param(format!("cannot write `{k}` as a key = value line")));
        }
        text.push_str(&format!("{k} = {v}\n"));
    }
    fs::write(path, text)?;
    Ok(())
}

/// Reads `key = value` lines in file order.
pub fn read_key_values(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Format {
                    path: path.into(),
                    message: format!("expected `key = value`, got `{l}`"),
                })
        })
        .collect()
}
