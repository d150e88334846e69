//! Plain-text graph and partition files.
//!
//! A graph file starts with `n m` followed by `m` lines `u v` (0-based ids).
//! A partition file has one line `u v j1,j2,...` per edge listing the players
//! that hold it. Blank lines and lines starting with `#` are ignored.

use std::io::{self, BufRead, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{Edge, EdgePartition, Graph, GraphError, PlayerId, Vertex};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn content_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String), FormatError>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| FormatError::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| FormatError::Parse { line, msg: format!("bad {what} `{tok}`") })
}

pub fn read_graph(reader: impl BufRead) -> Result<Graph, FormatError> {
    let mut lines = content_lines(reader);
    let (hline, header) = lines.next().ok_or(FormatError::Parse { line: 1, msg: "empty file".into() })??;
    let mut toks = header.split_whitespace();
    let n: usize = parse(toks.next(), hline, "vertex count")?;
    let m: usize = parse(toks.next(), hline, "edge count")?;
    let mut pairs = Vec::with_capacity(m);
    for item in lines {
        let (line, text) = item?;
        let mut toks = text.split_whitespace();
        let u: Vertex = parse(toks.next(), line, "vertex")?;
        let v: Vertex = parse(toks.next(), line, "vertex")?;
        pairs.push((u, v));
    }
    if pairs.len() != m {
        return Err(FormatError::Parse { line: hline, msg: format!("header declares {m} edges, found {}", pairs.len()) });
    }
    Ok(Graph::new(n, pairs)?)
}

pub fn write_graph(graph: &Graph, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{} {}", graph.n(), graph.m())?;
    for e in graph.edges() {
        writeln!(w, "{} {}", e.lo(), e.hi())?;
    }
    Ok(())
}

/// Reads a partition of `graph`. The player count is `k` when given and
/// otherwise one more than the largest id seen.
pub fn read_partition(graph: Arc<Graph>, reader: impl BufRead, k: Option<usize>) -> Result<EdgePartition, FormatError> {
    let mut parts: Vec<Vec<Edge>> = vec![Vec::new(); k.unwrap_or(0)];
    for item in content_lines(reader) {
        let (line, text) = item?;
        let mut toks = text.split_whitespace();
        let u: Vertex = parse(toks.next(), line, "vertex")?;
        let v: Vertex = parse(toks.next(), line, "vertex")?;
        let e = Edge::try_new(u, v)?;
        let list = toks.next().ok_or_else(|| FormatError::Parse { line, msg: "missing holder list".into() })?;
        for tok in list.split(',') {
            let j: PlayerId = parse(Some(tok), line, "player id")?;
            if let Some(k) = k {
                if j >= k {
                    return Err(FormatError::Parse { line, msg: format!("player {j} out of range for k = {k}") });
                }
            }
            if j >= parts.len() {
                parts.resize(j + 1, Vec::new());
            }
            parts[j].push(e);
        }
    }
    Ok(EdgePartition::from_parts(graph, parts)?)
}

pub fn write_partition(partition: &EdgePartition, mut w: impl Write) -> io::Result<()> {
    for (idx, e) in partition.graph().edges().iter().enumerate() {
        let holders: Vec<String> = partition.holders_of_index(idx).iter().map(|j| j.to_string()).collect();
        writeln!(w, "{} {} {}", e.lo(), e.hi(), holders.join(","))?;
    }
    Ok(())
}
