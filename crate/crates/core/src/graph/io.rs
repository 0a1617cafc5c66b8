//! Text formats for graphs.
//!
//! * edge list: a `graph <n>` header, then one `u v` pair per line (0-based);
//! * bipartite edge list: a `bigraph <n_left> <n_right>` header, then `a b`
//!   pairs with `a < n_left`, `b < n_right`;
//! * dense matrix: rows of space-separated `0`/`1` entries. For a simple graph
//!   the matrix must be square, symmetric and zero on the diagonal; for a
//!   bipartite graph it is the biadjacency matrix with one row per left node.
//!
//! Blank lines and lines starting with `#` are ignored everywhere.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{BipartiteGraph, Graph};
use crate::error::{Error, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{tok}`")))
}

fn parse_pairs<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<Vec<(usize, usize, usize)>> {
    lines
        .map(|(ln, l)| {
            let mut toks = l.split_whitespace();
            let u = parse_usize(toks.next(), ln, "endpoint")?;
            let v = parse_usize(toks.next(), ln, "endpoint")?;
            if toks.next().is_some() {
                return Err(Error::parse(ln, "expected exactly two endpoints"));
            }
            Ok((ln, u, v))
        })
        .collect()
}

fn parse_dense(lines: impl Iterator<Item = (usize, String)>) -> Result<Vec<Vec<bool>>> {
    let mut rows: Vec<Vec<bool>> = Vec::new();
    for (ln, l) in lines {
        let row = l
            .split_whitespace()
            .map(|t| match t {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(Error::parse(ln, format!("matrix entry `{t}` is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(ln, "ragged matrix row"));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Parses an edge list (`graph <n>` header) or a dense adjacency matrix.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text).peekable();
    let Some(&(ln, first)) = lines.peek() else {
        return Ok(Graph::empty(0));
    };
    if first.starts_with("graph") {
        lines.next();
        let mut toks = first.split_whitespace().skip(1);
        let n = parse_usize(toks.next(), ln, "node count")?;
        let mut g = Graph::empty(n);
        for (ln, u, v) in parse_pairs(lines)? {
            if u >= n || v >= n {
                return Err(Error::parse(ln, format!("node out of range 0..{n}")));
            }
            if u == v {
                return Err(Error::parse(ln, "self-loop"));
            }
            g.adjacency[u].insert(v);
            g.adjacency[v].insert(u);
        }
        return Ok(g);
    }
    if first.starts_with("bigraph") {
        return Err(Error::parse(ln, "expected a graph, found a bipartite graph"));
    }
    let rows = parse_dense(lines.map(|(i, l)| (i, l.to_string())))?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::parse(ln, "adjacency matrix is not square"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row[i] {
            return Err(Error::parse(ln + i, "non-zero diagonal"));
        }
        if (0..n).any(|j| row[j] != rows[j][i]) {
            return Err(Error::parse(ln + i, "adjacency matrix is not symmetric"));
        }
    }
    Graph::from_edges(
        n,
        (0..n).flat_map(|u| {
            let row = &rows[u];
            (u + 1..n).filter(move |&v| row[v]).map(move |v| (u, v))
        }),
    )
}

/// Parses a bipartite edge list (`bigraph <n_left> <n_right>` header) or a
/// dense biadjacency matrix.
pub fn parse_bigraph(text: &str) -> Result<BipartiteGraph> {
    let mut lines = content_lines(text).peekable();
    let Some(&(ln, first)) = lines.peek() else {
        return Err(Error::parse(1, "empty input"));
    };
    if first.starts_with("bigraph") {
        lines.next();
        let mut toks = first.split_whitespace().skip(1);
        let nl = parse_usize(toks.next(), ln, "left part size")?;
        let nr = parse_usize(toks.next(), ln, "right part size")?;
        let mut edges = Vec::new();
        for (ln, a, b) in parse_pairs(lines)? {
            if a >= nl || b >= nr {
                return Err(Error::parse(ln, format!("edge ({a}, {b}) out of range")));
            }
            edges.push((a, b));
        }
        return BipartiteGraph::from_edges(nl, nr, edges);
    }
    if first.starts_with("graph") {
        return Err(Error::parse(ln, "expected a bipartite graph, found a graph"));
    }
    let rows = parse_dense(lines.map(|(i, l)| (i, l.to_string())))?;
    BipartiteGraph::from_matrix(&rows)
}

/// Edge-list text; node indices, not labels, are written.
pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("graph {}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn write_bigraph(g: &BipartiteGraph) -> String {
    let mut out = format!("bigraph {} {}\n", g.n_left(), g.n_right());
    for (a, b) in g.edges() {
        let _ = writeln!(out, "{a} {b}");
    }
    out
}

pub fn write_dense_graph(g: &Graph) -> String {
    let mut out = String::new();
    for u in 0..g.n() {
        let row: Vec<&str> = (0..g.n())
            .map(|v| if g.has_edge(u, v) { "1" } else { "0" })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_dense_bigraph(g: &BipartiteGraph) -> String {
    let mut out = String::new();
    for a in 0..g.n_left() {
        let row: Vec<&str> = (0..g.n_right())
            .map(|b| if g.has_edge(a, b) { "1" } else { "0" })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn read_bigraph(path: impl AsRef<Path>) -> Result<BipartiteGraph> {
    parse_bigraph(&fs::read_to_string(path)?)
}
