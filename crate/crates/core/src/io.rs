//! Edge-list storage and atomic file writes.
//!
//! A stored graph is a pair of files sharing a prefix: `<prefix>.csv` with
//! header `i,j` and one `i < j` row per edge, and `<prefix>.json` carrying
//! `n`, `p`, `seed` and `rng_id`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphSample;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphMetadata {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub rng_id: String,
}

impl GraphMetadata {
    pub fn of(g: &GraphSample) -> Self {
        GraphMetadata {
            n: g.n(),
            p: g.p(),
            seed: g.seed(),
            rng_id: g.rng_id().to_string(),
        }
    }
}

/// `(csv, json)` paths for a storage prefix. A trailing `.csv` or `.json`
/// on the prefix is dropped, so either file can name the pair.
pub fn storage_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let base = match prefix.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("json") => prefix.with_extension(""),
        _ => prefix.to_path_buf(),
    };
    let mut csv = base.clone().into_os_string();
    csv.push(".csv");
    let mut json = base.into_os_string();
    json.push(".json");
    (csv.into(), json.into())
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json_pretty(value)?.as_bytes())
}

pub fn edge_list_csv(g: &GraphSample) -> String {
    let mut out = String::with_capacity(8 + 12 * g.edge_count());
    out.push_str("i,j\n");
    for (i, j) in g.edges() {
        let _ = writeln!(out, "{i},{j}");
    }
    out
}

/// Parses edge-list text for an `n`-vertex graph. Line numbers in errors
/// are 1-based and count the header.
pub fn parse_edge_list(text: &str, n: usize, path: &Path) -> Result<Vec<(usize, usize)>> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "i,j" => {}
        Some((_, h)) => return Err(err(1, format!("expected header `i,j`, found `{h}`"))),
        None => return Err(err(1, "missing header `i,j`".into())),
    }
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let (a, b) = row
            .split_once(',')
            .ok_or_else(|| err(line, format!("expected two fields, found `{row}`")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| err(line, format!("bad vertex `{s}`: {e}")))
        };
        let (i, j) = (parse(a)?, parse(b)?);
        if i >= j {
            return Err(err(line, format!("row {i},{j} is not ordered i < j")));
        }
        if j >= n {
            return Err(err(line, format!("vertex {j} out of range for n = {n}")));
        }
        if !seen.insert((i, j)) {
            return Err(err(line, format!("duplicate edge {i},{j}")));
        }
        edges.push((i, j));
    }
    Ok(edges)
}

pub fn parse_metadata(text: &str, path: &Path) -> Result<GraphMetadata> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Writes both files of the pair; returns `(csv, json)`.
pub fn write_graph(g: &GraphSample, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    let (csv, json) = storage_paths(prefix);
    write_atomic(&csv, edge_list_csv(g).as_bytes())?;
    write_json(&json, &GraphMetadata::of(g))?;
    Ok((csv, json))
}

pub fn read_graph(prefix: &Path) -> Result<GraphSample> {
    let (csv, json) = storage_paths(prefix);
    let meta = parse_metadata(&fs::read_to_string(&json)?, &json)?;
    if meta.n == 0 {
        return Err(Error::Parse {
            path: json,
            line: 1,
            msg: "n must be positive".into(),
        });
    }
    let edges = parse_edge_list(&fs::read_to_string(&csv)?, meta.n, &csv)?;
    GraphSample::from_edges(meta.n, &edges, meta.p, meta.seed, meta.rng_id)
}

/// Write-then-read through a scratch directory.
pub fn roundtrip(g: &GraphSample) -> Result<GraphSample> {
    let dir = tempfile::tempdir()?;
    let prefix = dir.path().join("graph");
    write_graph(g, &prefix)?;
    read_graph(&prefix)
}
