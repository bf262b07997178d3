//! Graph and mesh file formats: edge lists, Matrix Market coordinate files and OFF meshes.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFormat {
    EdgeList,
    MatrixMarket,
}

impl GraphFormat {
    /// `.mtx` means Matrix Market; anything else is an edge list.
    pub fn from_extension(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("mtx") => GraphFormat::MatrixMarket,
            _ => GraphFormat::EdgeList,
        }
    }
}

fn parse_err(origin: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: origin.to_string(), line, msg: msg.into() }
}

fn token<T: FromStr>(tok: Option<&str>, what: &str, origin: &str, line: usize) -> Result<T> {
    let t = tok.ok_or_else(|| parse_err(origin, line, format!("missing {what}")))?;
    t.parse().map_err(|_| parse_err(origin, line, format!("bad {what} `{t}`")))
}

pub fn parse_graph(path: &Path, format: GraphFormat) -> Result<WeightedGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    match format {
        GraphFormat::EdgeList => parse_edge_list_str(&text, &origin),
        GraphFormat::MatrixMarket => parse_matrix_market_str(&text, &origin),
    }
}

/// Rows `u v [w]` with 0-based indices (w defaults to 1). `#` starts a comment.
/// Directives `# vertices N` and `# directed` fix the vertex count and orientation.
pub fn parse_edge_list_str(text: &str, origin: &str) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut declared: Option<usize> = None;
    let mut directed = false;
    let mut max_index: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let (body, comment) = match raw.find('#') {
            Some(k) => (&raw[..k], Some(raw[k + 1..].trim())),
            None => (raw, None),
        };
        if let Some(c) = comment {
            let mut it = c.split_whitespace();
            match it.next() {
                Some("vertices") => declared = Some(token(it.next(), "vertex count", origin, line)?),
                Some("directed") => directed = true,
                _ => {}
            }
        }
        let mut it = body.split_whitespace();
        let Some(first) = it.next() else { continue };
        let u: usize = token(Some(first), "source index", origin, line)?;
        let v: usize = token(it.next(), "target index", origin, line)?;
        let w: f64 = match it.next() {
            Some(t) => token(Some(t), "weight", origin, line)?,
            None => 1.0,
        };
        if it.next().is_some() {
            return Err(parse_err(origin, line, "expected `u v w`"));
        }
        if !w.is_finite() {
            return Err(parse_err(origin, line, format!("non-finite weight {w}")));
        }
        if let Some(n) = declared {
            if u >= n || v >= n {
                return Err(parse_err(origin, line, format!("index out of range for {n} vertices")));
            }
        }
        max_index = Some(max_index.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v, w, line));
    }
    let n = match (declared, max_index) {
        (Some(n), Some(m)) if m >= n => return Err(parse_err(origin, 0, format!("index {m} out of range for {n} vertices"))),
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };
    WeightedGraph::new(n, edges.into_iter().map(|(u, v, w, _)| (u, v, w)).collect(), directed)
        .map_err(|e| parse_err(origin, 0, e.to_string()))
}

/// Matrix Market `coordinate` files (real, integer or pattern; symmetric or general).
/// Symmetric files give undirected graphs, general files directed ones; diagonal entries are self-loops.
pub fn parse_matrix_market_str(text: &str, origin: &str) -> Result<WeightedGraph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(origin, 1, "empty file"))?;
    let h: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(parse_err(origin, 1, "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    let pattern = match h[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        f => return Err(parse_err(origin, 1, format!("unsupported field `{f}`"))),
    };
    let symmetric = match h[4].as_str() {
        "symmetric" => true,
        "general" => false,
        s => return Err(parse_err(origin, 1, format!("unsupported symmetry `{s}`"))),
    };
    let mut size: Option<(usize, usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('%') {
            continue;
        }
        let mut it = body.split_whitespace();
        match size {
            None => {
                let r: usize = token(it.next(), "row count", origin, line)?;
                let c: usize = token(it.next(), "column count", origin, line)?;
                let nnz: usize = token(it.next(), "entry count", origin, line)?;
                if r != c {
                    return Err(parse_err(origin, line, format!("adjacency must be square, got {r}×{c}")));
                }
                size = Some((r, c, nnz));
            }
            Some((n, _, _)) => {
                let a: usize = token(it.next(), "row index", origin, line)?;
                let b: usize = token(it.next(), "column index", origin, line)?;
                let w: f64 = if pattern { 1.0 } else { token(it.next(), "value", origin, line)? };
                if it.next().is_some() {
                    return Err(parse_err(origin, line, "too many fields"));
                }
                if a == 0 || b == 0 || a > n || b > n {
                    return Err(parse_err(origin, line, format!("index ({a}, {b}) out of range 1..={n}")));
                }
                if !w.is_finite() {
                    return Err(parse_err(origin, line, format!("non-finite weight {w}")));
                }
                if symmetric && b > a {
                    return Err(parse_err(origin, line, "symmetric files store the lower triangle only"));
                }
                edges.push((a - 1, b - 1, w));
            }
        }
    }
    let (n, _, nnz) = size.ok_or_else(|| parse_err(origin, 0, "missing size line"))?;
    if edges.len() != nnz {
        return Err(parse_err(origin, 0, format!("declared {nnz} entries, found {}", edges.len())));
    }
    WeightedGraph::new(n, edges, !symmetric).map_err(|e| parse_err(origin, 0, e.to_string()))
}

/// Edge list text that `parse_edge_list_str` reads back to the same graph.
pub fn emit_edge_list(graph: &WeightedGraph) -> String {
    let mut s = format!("# vertices {}\n", graph.n_vertices());
    if graph.is_directed() {
        s.push_str("# directed\n");
    }
    for &(u, v, w) in graph.edges() {
        let _ = writeln!(s, "{u} {v} {w:?}");
    }
    s
}

/// Matrix Market text: symmetric (lower triangle) for undirected graphs, general otherwise.
pub fn emit_matrix_market(graph: &WeightedGraph) -> String {
    let sym = if graph.is_directed() { "general" } else { "symmetric" };
    let n = graph.n_vertices();
    let mut s = format!("%%MatrixMarket matrix coordinate real {sym}\n{n} {n} {}\n", graph.n_edges());
    for &(u, v, w) in graph.edges() {
        let (a, b) = if graph.is_directed() { (u, v) } else { (v, u) };
        let _ = writeln!(s, "{} {} {w:?}", a + 1, b + 1);
    }
    s
}

pub fn write_graph(graph: &WeightedGraph, path: &Path, format: GraphFormat) -> Result<()> {
    let text = match format {
        GraphFormat::EdgeList => emit_edge_list(graph),
        GraphFormat::MatrixMarket => emit_matrix_market(graph),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_mesh_off(path: &Path) -> Result<WeightedGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_off_str(&text, &path.display().to_string())
}

/// OFF mesh to graph: one unit-weight edge per polygon side, deduplicated.
pub fn parse_off_str(text: &str, origin: &str) -> Result<WeightedGraph> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = rows.next().ok_or_else(|| parse_err(origin, 1, "empty file"))?;
    let rest = header.strip_prefix("OFF").ok_or_else(|| parse_err(origin, hline, "missing OFF header"))?;
    let counts_line = if rest.trim().is_empty() {
        rows.next().ok_or_else(|| parse_err(origin, hline, "missing vertex/face counts"))?
    } else {
        (hline, rest)
    };
    let mut it = counts_line.1.split_whitespace();
    let nv: usize = token(it.next(), "vertex count", origin, counts_line.0)?;
    let nf: usize = token(it.next(), "face count", origin, counts_line.0)?;
    for _ in 0..nv {
        let (line, v) = rows.next().ok_or_else(|| parse_err(origin, 0, "file ends inside the vertex list"))?;
        let coords = v.split_whitespace().count();
        if coords < 3 {
            return Err(parse_err(origin, line, "vertex needs 3 coordinates"));
        }
    }
    let mut edges = BTreeSet::new();
    for _ in 0..nf {
        let (line, f) = rows.next().ok_or_else(|| parse_err(origin, 0, "file ends inside the face list"))?;
        let mut it = f.split_whitespace();
        let k: usize = token(it.next(), "face size", origin, line)?;
        let idx = (0..k).map(|_| token::<usize>(it.next(), "face index", origin, line)).collect::<Result<Vec<_>>>()?;
        if let Some(&bad) = idx.iter().find(|&&i| i >= nv) {
            return Err(parse_err(origin, line, format!("face index {bad} overflows {nv} vertices")));
        }
        for j in 0..k {
            let (a, b) = (idx[j], idx[(j + 1) % k]);
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    WeightedGraph::new(nv, edges.into_iter().map(|(a, b)| (a, b, 1.0)).collect(), false)
}
