//! Edge-list text format.
//!
//! One pair per line as `u v` or `u,v`. Lines starting with `#` are comments,
//! except a first line of the form `#N=<count>`, which fixes the node count.

use std::io::{BufRead, Write};

use super::{Graph, GraphError, Pair};

/// Ordered pair list as read from a file, with the optional `#N=` header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairList {
    pub node_count: Option<usize>,
    pub pairs: Vec<Pair>,
}

fn parse_header(line: &str) -> Option<Result<usize, String>> {
    let rest = line.strip_prefix('#')?.trim_start();
    let value = rest.strip_prefix("N=")?;
    Some(
        value
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid node-count header {line:?}")),
    )
}

fn parse_pair(line: &str) -> Result<Pair, String> {
    let tokens: Vec<&str> = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.len() != 2 {
        return Err(format!("expected 2 node ids, found {}", tokens.len()));
    }
    let parse = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| format!("invalid node id {t:?}"))
    };
    Ok((parse(tokens[0])?, parse(tokens[1])?))
}

/// Reads pairs in file order. Self-loops are rejected; duplicates are kept.
pub fn read_pairs<R: BufRead>(reader: R) -> Result<PairList, GraphError> {
    let mut node_count = None;
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if idx == 0 {
                if let Some(parsed) = parse_header(trimmed) {
                    node_count = Some(parsed.map_err(|message| GraphError::Parse {
                        line: line_no,
                        message,
                    })?);
                }
            }
            continue;
        }
        let (u, v) = parse_pair(trimmed).map_err(|message| GraphError::Parse {
            line: line_no,
            message,
        })?;
        if u == v {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("self-loop on node {u}"),
            });
        }
        pairs.push((u, v));
    }
    Ok(PairList { node_count, pairs })
}

/// Parses an edge list into a [`Graph`].
///
/// The node count is `1 + max id` unless a `#N=` header overrides it; a
/// header smaller than that is an error.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
    let list = read_pairs(reader)?;
    let implied = list
        .pairs
        .iter()
        .map(|&(u, v)| u.max(v) + 1)
        .max()
        .unwrap_or(0);
    let node_count = match list.node_count {
        Some(n) if n < implied => {
            return Err(GraphError::NodeOutOfRange {
                node: implied - 1,
                node_count: n,
            })
        }
        Some(n) => n,
        None => implied,
    };
    Graph::from_edges(node_count, list.pairs)
}

/// Writes `#N=<count>` followed by one tab-separated pair per line.
pub fn write_pairs<W: Write>(
    mut writer: W,
    node_count: usize,
    pairs: &[Pair],
) -> std::io::Result<()> {
    writeln!(writer, "#N={node_count}")?;
    for &(u, v) in pairs {
        writeln!(writer, "{u}\t{v}")?;
    }
    writer.flush()
}

pub fn write_edge_list<W: Write>(writer: W, graph: &Graph) -> std::io::Result<()> {
    write_pairs(writer, graph.node_count(), graph.edges())
}
