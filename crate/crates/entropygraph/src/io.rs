//! Plain-text file formats: degree sequences, edge lists (with an optional
//! bipartite header), and weighted bipartite graphs.
//!
//! All formats treat blank lines and lines starting with `#` as comments,
//! except the magic header `#bipartite n1 n2` which marks bipartite files.
//! Edge lists are 1-indexed on disk and 0-indexed in memory.

use std::path::Path;

use thiserror::Error;

use crate::degseq::{DegreeSequence, DegseqError};
use crate::graphs::{GraphError, SimpleGraph};
use crate::rounding::{RoundingError, WeightedBipartiteGraph};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: cannot parse {what}: {text:?}")]
    Parse {
        line: usize,
        what: &'static str,
        text: String,
    },
    #[error("line {line}: vertex index {idx} out of range (1..={n})")]
    IndexOutOfRange { line: usize, idx: usize, n: usize },
    #[error("missing '#bipartite n1 n2' header in weighted bipartite file")]
    MissingBipartiteHeader,
    #[error(transparent)]
    Degseq(#[from] DegseqError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses a degree file: one integer per line, or a single comma-separated
/// line; `#` comments and blank lines ignored.
pub fn parse_degree_sequence(text: &str) -> Result<DegreeSequence, IoError> {
    let mut degrees = Vec::new();
    for (line, l) in content_lines(text) {
        for tok in l.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            let d: u64 = tok.parse().map_err(|_| IoError::Parse {
                line,
                what: "degree",
                text: tok.to_string(),
            })?;
            degrees.push(d);
        }
    }
    Ok(DegreeSequence::new(degrees)?)
}

pub fn read_degree_sequence(path: &Path) -> Result<DegreeSequence, IoError> {
    parse_degree_sequence(&std::fs::read_to_string(path)?)
}

/// Parsed edge-list file: the graph plus bipartite part sizes if the
/// `#bipartite n1 n2` header was present.
#[derive(Debug, Clone)]
pub struct EdgeListFile {
    pub graph: SimpleGraph,
    pub bipartite: Option<(usize, usize)>,
}

fn parse_bipartite_header(text: &str) -> Result<Option<(usize, usize)>, IoError> {
    for (line, l) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if let Some(rest) = l.strip_prefix("#bipartite") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(IoError::Parse {
                    line,
                    what: "bipartite header",
                    text: l.to_string(),
                });
            }
            let n1 = parts[0].parse().map_err(|_| IoError::Parse {
                line,
                what: "n1",
                text: parts[0].to_string(),
            })?;
            let n2 = parts[1].parse().map_err(|_| IoError::Parse {
                line,
                what: "n2",
                text: parts[1].to_string(),
            })?;
            return Ok(Some((n1, n2)));
        }
    }
    Ok(None)
}

/// Parses a 1-indexed edge list `u v` per line. The vertex count is
/// `n1 + n2` for bipartite files, otherwise the largest index seen.
pub fn parse_edge_list(text: &str) -> Result<EdgeListFile, IoError> {
    let bipartite = parse_bipartite_header(text)?;
    let mut raw: Vec<(usize, usize, usize)> = Vec::new();
    let mut max_idx = 0usize;
    for (line, l) in content_lines(text) {
        let mut it = l.split_whitespace();
        let (u, v) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => {
                let u: usize = a.parse().map_err(|_| IoError::Parse {
                    line,
                    what: "vertex",
                    text: a.to_string(),
                })?;
                let v: usize = b.parse().map_err(|_| IoError::Parse {
                    line,
                    what: "vertex",
                    text: b.to_string(),
                })?;
                (u, v)
            }
            _ => {
                return Err(IoError::Parse {
                    line,
                    what: "edge",
                    text: l.to_string(),
                })
            }
        };
        if u == 0 || v == 0 {
            return Err(IoError::IndexOutOfRange {
                line,
                idx: 0,
                n: max_idx,
            });
        }
        max_idx = max_idx.max(u).max(v);
        raw.push((line, u, v));
    }
    let n = match bipartite {
        Some((n1, n2)) => n1 + n2,
        None => max_idx,
    };
    let mut graph = SimpleGraph::empty(n);
    for (line, u, v) in raw {
        if u > n || v > n {
            return Err(IoError::IndexOutOfRange {
                line,
                idx: u.max(v),
                n,
            });
        }
        graph.add_edge(u - 1, v - 1)?;
    }
    Ok(EdgeListFile { graph, bipartite })
}

pub fn read_edge_list(path: &Path) -> Result<EdgeListFile, IoError> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

/// Writes a 1-indexed edge list; emits the bipartite header when given.
pub fn format_edge_list(g: &SimpleGraph, bipartite: Option<(usize, usize)>) -> String {
    let mut out = String::new();
    if let Some((n1, n2)) = bipartite {
        out.push_str(&format!("#bipartite {n1} {n2}\n"));
    }
    out.push_str(&format!("# n = {}, edges = {}\n", g.n(), g.edge_count()));
    for (u, v) in g.edges() {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    out
}

pub fn write_edge_list(
    path: &Path,
    g: &SimpleGraph,
    bipartite: Option<(usize, usize)>,
) -> Result<(), IoError> {
    std::fs::write(path, format_edge_list(g, bipartite))?;
    Ok(())
}

/// Parses a weighted bipartite file: mandatory `#bipartite n1 n2` header,
/// then `i j w` lines with 1-indexed `i` (row) and `j` (global column index
/// `n1 + 1 ..= n1 + n2`).
pub fn parse_weighted_bipartite(text: &str) -> Result<WeightedBipartiteGraph, IoError> {
    let (n1, n2) = parse_bipartite_header(text)?.ok_or(IoError::MissingBipartiteHeader)?;
    let mut w = WeightedBipartiteGraph::new(n1, n2);
    for (line, l) in content_lines(text) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(IoError::Parse {
                line,
                what: "weighted edge",
                text: l.to_string(),
            });
        }
        let i: usize = toks[0].parse().map_err(|_| IoError::Parse {
            line,
            what: "row index",
            text: toks[0].to_string(),
        })?;
        let j: usize = toks[1].parse().map_err(|_| IoError::Parse {
            line,
            what: "column index",
            text: toks[1].to_string(),
        })?;
        let weight: f64 = toks[2].parse().map_err(|_| IoError::Parse {
            line,
            what: "weight",
            text: toks[2].to_string(),
        })?;
        if i == 0 || i > n1 {
            return Err(IoError::IndexOutOfRange {
                line,
                idx: i,
                n: n1,
            });
        }
        if j <= n1 || j > n1 + n2 {
            return Err(IoError::IndexOutOfRange {
                line,
                idx: j,
                n: n1 + n2,
            });
        }
        w.set(i - 1, j - n1 - 1, weight)?;
    }
    Ok(w)
}

pub fn read_weighted_bipartite(path: &Path) -> Result<WeightedBipartiteGraph, IoError> {
    parse_weighted_bipartite(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_file_per_line_and_comma() {
        let d = parse_degree_sequence("# comment\n2\n2\n\n2\n2\n").unwrap();
        assert_eq!(d.degrees(), &[2, 2, 2, 2]);
        let d = parse_degree_sequence("1, 2, 2,3\n").unwrap();
        assert_eq!(d.degrees(), &[1, 2, 2, 3]);
        assert!(parse_degree_sequence("2\nx\n").is_err());
        assert!(parse_degree_sequence("").is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = SimpleGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let text = format_edge_list(&g, None);
        let parsed = parse_edge_list(&text).unwrap();
        assert_eq!(parsed.graph, g);
        assert!(parsed.bipartite.is_none());
    }

    #[test]
    fn bipartite_header_round_trip() {
        let g = SimpleGraph::from_edges(4, &[(0, 2), (1, 3)]).unwrap();
        let text = format_edge_list(&g, Some((2, 2)));
        let parsed = parse_edge_list(&text).unwrap();
        assert_eq!(parsed.bipartite, Some((2, 2)));
        assert_eq!(parsed.graph, g);
        // isolated trailing vertices survive via the header's vertex count
        let text = "#bipartite 2 3\n1 3\n";
        assert_eq!(parse_edge_list(text).unwrap().graph.n(), 5);
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(
            parse_edge_list("0 1\n"),
            Err(IoError::IndexOutOfRange { .. })
        ));
        assert!(parse_edge_list("1 2 3\n").is_err());
        assert!(matches!(
            parse_edge_list("#bipartite 2 2\n1 5\n"),
            Err(IoError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn weighted_bipartite_parse() {
        let text = "#bipartite 2 2\n1 3 0.5\n2 4 0.25\n";
        let w = parse_weighted_bipartite(text).unwrap();
        assert_eq!(w.weight(0, 0), 0.5);
        assert_eq!(w.weight(1, 1), 0.25);
        assert_eq!(w.weight(0, 1), 0.0);
        assert!(matches!(
            parse_weighted_bipartite("1 3 0.5\n"),
            Err(IoError::MissingBipartiteHeader)
        ));
        assert!(parse_weighted_bipartite("#bipartite 2 2\n1 3 1.5\n").is_err());
    }
}
