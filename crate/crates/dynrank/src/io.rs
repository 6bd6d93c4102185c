//! Graph and batch file formats.
//!
//! Two graph formats are supported: MatrixMarket coordinate files
//! (1-based ids, `%` comments) and whitespace-separated edge lists
//! (`u v [timestamp]`, `%` or `#` comments). Batches round-trip through a
//! `op,u,v` CSV with `op` one of `D` (delete) or `I` (insert).

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::BatchUpdate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    MatrixMarket,
    EdgeList,
}

impl std::str::FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mtx" | "matrix-market" => Ok(GraphFormat::MatrixMarket),
            "edges" | "edge-list" => Ok(GraphFormat::EdgeList),
            other => Err(format!(
                "unknown graph format '{other}' (expected 'mtx' or 'edges')"
            )),
        }
    }
}

/// A parsed edge stream, before normalization into a snapshot.
/// `temporal` is set when the source file carried a timestamp column;
/// edges stay in file order so temporal streams replay correctly.
#[derive(Clone, Debug)]
pub struct LoadedEdges {
    pub edges: Vec<(u32, u32)>,
    pub num_vertices: usize,
    pub temporal: bool,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

/// Loads a graph file, picking the format from the extension (`.mtx` means
/// MatrixMarket) unless one is given explicitly.
pub fn load_edges(path: &Path, format: Option<GraphFormat>) -> Result<LoadedEdges, LoadError> {
    let format = format.unwrap_or_else(|| {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx") => GraphFormat::MatrixMarket,
            _ => GraphFormat::EdgeList,
        }
    });
    let name = path.display().to_string();
    let file = File::open(path).map_err(|source| LoadError::Io {
        path: name.clone(),
        source,
    })?;
    let reader = BufReader::new(file);
    match format {
        GraphFormat::MatrixMarket => parse_matrix_market(reader, &name),
        GraphFormat::EdgeList => parse_edge_list(reader, &name),
    }
}

/// Parses a MatrixMarket coordinate file. Symmetric (and skew/hermitian)
/// matrices contribute both edge directions; entry values are ignored.
pub fn parse_matrix_market<R: Read>(reader: R, path: &str) -> Result<LoadedEdges, LoadError> {
    let mut lines = BufReader::new(reader).lines().enumerate();

    let (_, banner) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let banner = banner.map_err(|source| LoadError::Io {
        path: path.to_string(),
        source,
    })?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_lowercase).collect();
    if fields.len() < 3 || fields[0] != "%%matrixmarket" {
        return Err(parse_err(path, 1, "expected '%%MatrixMarket' banner"));
    }
    if fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(parse_err(
            path,
            1,
            format!("unsupported MatrixMarket type '{} {}' (need 'matrix coordinate')", fields[1], fields[2]),
        ));
    }
    let symmetric = fields
        .get(4)
        .map(|s| s != "general")
        .unwrap_or(false);

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|source| LoadError::Io {
            path: path.to_string(),
            source,
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let mut it = line.split_whitespace();
        if dims.is_none() {
            let mut next_dim = |name: &str| -> Result<usize, LoadError> {
                it.next()
                    .ok_or_else(|| parse_err(path, lineno, format!("missing {name} in size line")))?
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("invalid {name} in size line")))
            };
            let rows = next_dim("row count")?;
            let cols = next_dim("column count")?;
            let nnz = next_dim("entry count")?;
            dims = Some((rows, cols, nnz));
            edges.reserve(if symmetric { nnz * 2 } else { nnz });
            continue;
        }
        let (rows, cols, _) = dims.unwrap();
        let mut next_id = |bound: usize, name: &str| -> Result<u32, LoadError> {
            let raw: usize = it
                .next()
                .ok_or_else(|| parse_err(path, lineno, format!("missing {name}")))?
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("invalid {name}")))?;
            if raw < 1 || raw > bound {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("{name} {raw} outside 1..={bound}"),
                ));
            }
            Ok((raw - 1) as u32)
        };
        let u = next_id(rows, "row index")?;
        let v = next_id(cols, "column index")?;
        edges.push((u, v));
        if symmetric && u != v {
            edges.push((v, u));
        }
    }
    let (rows, cols, _) = dims.ok_or_else(|| parse_err(path, 1, "missing size line"))?;
    Ok(LoadedEdges {
        edges,
        num_vertices: rows.max(cols),
        temporal: false,
    })
}

/// Parses a whitespace-separated edge list. A third column on the first
/// data line marks the stream as temporal; ids are 0-based and the vertex
/// count is the largest id plus one.
pub fn parse_edge_list<R: Read>(reader: R, path: &str) -> Result<LoadedEdges, LoadError> {
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut max_id: u32 = 0;
    let mut any = false;
    let mut temporal = false;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| LoadError::Io {
            path: path.to_string(),
            source,
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut next_id = |name: &str| -> Result<u32, LoadError> {
            it.next()
                .ok_or_else(|| parse_err(path, lineno, format!("missing {name}")))?
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("invalid {name}")))
        };
        let u = next_id("source vertex")?;
        let v = next_id("target vertex")?;
        if !any {
            temporal = it.next().is_some();
            any = true;
        }
        max_id = max_id.max(u).max(v);
        edges.push((u, v));
    }
    if !any {
        return Err(parse_err(path, 1, "no edges in file"));
    }
    Ok(LoadedEdges {
        edges,
        num_vertices: max_id as usize + 1,
        temporal,
    })
}

/// Writes a batch as `op,u,v` CSV with a header line.
pub fn write_batch_csv(path: &Path, batch: &BatchUpdate) -> Result<(), LoadError> {
    let mut file = std::fs::File::create(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_batch_csv_to(&mut file, batch).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// [`write_batch_csv`] into any writer.
pub fn write_batch_csv_to<W: Write>(writer: &mut W, batch: &BatchUpdate) -> std::io::Result<()> {
    writeln!(writer, "op,u,v")?;
    for &(u, v) in &batch.deletions {
        writeln!(writer, "D,{u},{v}")?;
    }
    for &(u, v) in &batch.insertions {
        writeln!(writer, "I,{u},{v}")?;
    }
    Ok(())
}

/// Reads a batch from `op,u,v` CSV. The header line is optional.
pub fn read_batch_csv(path: &Path) -> Result<BatchUpdate, LoadError> {
    let file = std::fs::File::open(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_batch_csv_from(file, &path.display().to_string())
}

/// [`read_batch_csv`] from any reader, with `path` used in diagnostics.
pub fn read_batch_csv_from<R: Read>(reader: R, path: &str) -> Result<BatchUpdate, LoadError> {
    let mut batch = BatchUpdate::default();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| LoadError::Io {
            path: path.to_string(),
            source,
        })?;
        let line = line.trim();
        if line.is_empty() || (lineno == 1 && line == "op,u,v") {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(parse_err(path, lineno, "expected 'op,u,v'"));
        }
        let parse_id = |s: &str, name: &str| -> Result<u32, LoadError> {
            s.parse()
                .map_err(|_| parse_err(path, lineno, format!("invalid {name} '{s}'")))
        };
        let u = parse_id(parts[1], "source vertex")?;
        let v = parse_id(parts[2], "target vertex")?;
        match parts[0] {
            "D" => batch.deletions.push((u, v)),
            "I" => batch.insertions.push((u, v)),
            other => {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("unknown op '{other}' (expected 'D' or 'I')"),
                ))
            }
        }
    }
    Ok(batch)
}
