//! Plain-text edge-list format.
//!
//! ```text
//! # comment
//! 4 4          <- n m
//! 0 1          <- m edge lines
//! 1 2
//! 2 3
//! 0 3
//! ports        <- optional: n lines, neighbors of vertex i in port order
//! 1 3
//! 2 0
//! 3 1
//! 0 2
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Serializes `g` including its port block.
pub fn to_edgelist(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", g.n(), g.m()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out.push_str("ports\n");
    for v in 0..g.n() {
        let line: Vec<String> = g.neighbors(v).iter().map(usize::to_string).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn parse_edgelist(text: &str) -> Result<Graph> {
    // Keep blank lines inside the port block: an isolated vertex has an
    // empty port line.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()));
    let (hline, header) = next_content(&mut lines).ok_or(Error::Parse {
        line: 0,
        msg: "missing `n m` header".into(),
    })?;
    let nums = parse_ints(hline, header)?;
    let [n, m] = nums[..] else {
        return Err(Error::Parse { line: hline, msg: "header must be `n m`".into() });
    };
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = next_content(&mut lines).ok_or(Error::Parse {
            line: hline,
            msg: format!("expected {m} edges"),
        })?;
        match parse_ints(ln, l)?[..] {
            [u, v] => edges.push((u, v)),
            _ => return Err(Error::Parse { line: ln, msg: "edge line must be `u v`".into() }),
        }
    }
    let g = Graph::from_edges(n, &edges)?;
    let Some((pline, marker)) = next_content(&mut lines) else {
        return Ok(g);
    };
    if marker != "ports" {
        return Err(Error::Parse { line: pline, msg: format!("unexpected `{marker}`") });
    }
    let mut lists = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, l) = lines.next().ok_or(Error::Parse {
            line: pline,
            msg: format!("port block needs {n} lines"),
        })?;
        lists.push(parse_ints(ln, l)?);
    }
    if let Some((ln, l)) = next_content(&mut lines) {
        return Err(Error::Parse { line: ln, msg: format!("trailing content `{l}`") });
    }
    let ported = Graph::from_port_lists(lists)?;
    if ported.edges() != g.edges() {
        return Err(Error::Parse { line: pline, msg: "port block disagrees with edge list".into() });
    }
    Ok(ported)
}

fn next_content<'a, I: Iterator<Item = (usize, &'a str)>>(lines: &mut I) -> Option<(usize, &'a str)> {
    lines.find(|(_, l)| !l.is_empty())
}

fn parse_ints(line: usize, text: &str) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|t| {
            t.parse().map_err(|_| Error::Parse { line, msg: format!("`{t}` is not an integer") })
        })
        .collect()
}
