//! Line-oriented text format for boundary problems.
//!
//! ```text
//! graph <node_count> <edge_count> <m>
//! e <i> <j> <weight>          (edge_count lines, 0-based, i < j)
//! boundary <count>
//! b <i> <g_1> ... <g_m>       (count lines)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. An edge may also be
//! written as `e j i w`; if a pair appears in both directions the weights
//! must match.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{BoundaryProblem, VertexFunction, WeightedGraph};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-comment line split into tokens, with its line number.
    fn next_tokens(&mut self) -> Result<Option<(usize, Vec<String>)>> {
        for line in self.inner.by_ref() {
            self.number += 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let tokens = trimmed.split_whitespace().map(str::to_owned).collect();
            return Ok(Some((self.number, tokens)));
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<String>)> {
        self.next_tokens()?
            .ok_or_else(|| parse_err(self.number + 1, format!("unexpected end of input, expected {what}")))
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{token}`")))
}

fn parse_real(line: usize, token: &str, what: &str) -> Result<f64> {
    let v: f64 = parse_num(line, token, what)?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite {what} `{token}`")));
    }
    Ok(v)
}

/// Reads a boundary problem in the text format.
pub fn read_graph<R: BufRead>(source: R) -> Result<BoundaryProblem> {
    let mut lines = Lines {
        inner: source.lines(),
        number: 0,
    };
    let (ln, header) = lines.expect("`graph` header")?;
    if header.len() != 4 || header[0] != "graph" {
        return Err(parse_err(ln, "expected `graph <node_count> <edge_count> <m>`"));
    }
    let node_count: usize = parse_num(ln, &header[1], "node count")?;
    let edge_count: usize = parse_num(ln, &header[2], "edge count")?;
    let dim: usize = parse_num(ln, &header[3], "dimension")?;
    if node_count == 0 {
        return Err(parse_err(ln, "node count must be positive"));
    }
    if dim == 0 {
        return Err(parse_err(ln, "dimension must be positive"));
    }

    let mut seen: HashMap<(usize, usize), (bool, f64)> = HashMap::new();
    let mut edges = Vec::with_capacity(edge_count);
    for _ in 0..edge_count {
        let (ln, t) = lines.expect("edge line")?;
        if t.len() != 4 || t[0] != "e" {
            return Err(parse_err(ln, "expected `e <i> <j> <weight>`"));
        }
        let i: usize = parse_num(ln, &t[1], "node index")?;
        let j: usize = parse_num(ln, &t[2], "node index")?;
        let w = parse_real(ln, &t[3], "weight")?;
        for index in [i, j] {
            if index >= node_count {
                return Err(Error::NodeOutOfRange { index, node_count });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        let key = (i.min(j), i.max(j));
        let forward = i < j;
        match seen.get(&key) {
            Some(&(dir, prev)) if dir != forward => {
                if prev != w {
                    return Err(Error::AsymmetricWeight {
                        i: key.0,
                        j: key.1,
                        forward: if forward { w } else { prev },
                        backward: if forward { prev } else { w },
                    });
                }
                continue;
            }
            Some(_) => return Err(Error::DuplicateEdge(key.0, key.1)),
            None => {
                seen.insert(key, (forward, w));
                edges.push((key.0, key.1, w));
            }
        }
    }

    let (ln, t) = lines.expect("`boundary` line")?;
    if t.len() != 2 || t[0] != "boundary" {
        return Err(parse_err(ln, "expected `boundary <count>`"));
    }
    let count: usize = parse_num(ln, &t[1], "boundary count")?;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, t) = lines.expect("boundary value line")?;
        if t.len() != 2 + dim || t[0] != "b" {
            return Err(parse_err(
                ln,
                format!("expected `b <i>` followed by {dim} values"),
            ));
        }
        let i: usize = parse_num(ln, &t[1], "node index")?;
        let values = t[2..]
            .iter()
            .map(|tok| parse_real(ln, tok, "boundary value"))
            .collect::<Result<Vec<f64>>>()?;
        entries.push((i, values));
    }
    if let Some((ln, _)) = lines.next_tokens()? {
        return Err(parse_err(ln, "trailing content after boundary block"));
    }
    let graph = WeightedGraph::from_edges(node_count, &edges)?;
    BoundaryProblem::new(graph, &entries)
}

/// Reads a boundary problem from a string.
pub fn parse_graph(text: &str) -> Result<BoundaryProblem> {
    read_graph(text.as_bytes())
}

/// Writes the canonical form: edges sorted with `i < j`, boundary sorted.
/// Reals use Rust's shortest round-trip formatting.
pub fn write_graph<W: Write>(prob: &BoundaryProblem, mut out: W) -> Result<()> {
    out.write_all(graph_to_string(prob).as_bytes())?;
    Ok(())
}

pub fn graph_to_string(prob: &BoundaryProblem) -> String {
    let graph = prob.graph();
    let edges = graph.edges();
    let mut s = String::new();
    let _ = writeln!(s, "graph {} {} {}", graph.node_count(), edges.len(), prob.dim());
    for (i, j, w) in edges {
        let _ = writeln!(s, "e {i} {j} {w:?}");
    }
    let _ = writeln!(s, "boundary {}", prob.boundary().len());
    for &x in prob.boundary() {
        let _ = write!(s, "b {x}");
        for v in prob.boundary_value(x).unwrap() {
            let _ = write!(s, " {v:?}");
        }
        s.push('\n');
    }
    s
}

/// Writes an extension as `u <node> <val_1> ... <val_m>` lines.
pub fn write_function<W: Write>(u: &VertexFunction, mut out: W) -> Result<()> {
    let mut s = String::new();
    for x in 0..u.node_count() {
        let _ = write!(s, "u {x}");
        for v in u.get(x) {
            let _ = write!(s, " {v:?}");
        }
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Reads `u <node> <values...>` lines back into a function.
pub fn read_function<R: BufRead>(source: R) -> Result<VertexFunction> {
    let mut lines = Lines {
        inner: source.lines(),
        number: 0,
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    while let Some((ln, t)) = lines.next_tokens()? {
        if t.len() < 3 || t[0] != "u" {
            return Err(parse_err(ln, "expected `u <node> <values...>`"));
        }
        let x: usize = parse_num(ln, &t[1], "node index")?;
        if x != rows.len() {
            return Err(parse_err(ln, format!("expected node {}, found {x}", rows.len())));
        }
        rows.push(
            t[2..]
                .iter()
                .map(|tok| parse_real(ln, tok, "value"))
                .collect::<Result<_>>()?,
        );
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no `u` lines"));
    }
    VertexFunction::from_rows(&rows)
}
