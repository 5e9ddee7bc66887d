//! Undirected, unweighted graphs stored as a canonical edge set.
//!
//! Text format: one `u v` pair per line, `#` starts a comment, and an
//! optional first line `nodes N` fixes the node count (otherwise it is
//! `1 + max index`).

use std::collections::BTreeSet;

use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    /// Sorted, deduplicated, each stored once with `u <= v`.
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            let (a, b) = if u <= v { (u, v) } else { (v, u) };
            if b >= num_nodes {
                return Err(Error::IndexOverflow {
                    index: b,
                    num_nodes,
                    line: 0,
                });
            }
            set.insert((a, b));
        }
        Ok(Self {
            num_nodes,
            edges: set.into_iter().collect(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges with `u != v`.
    pub fn non_loop_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied().filter(|(u, v)| u != v)
    }

    pub fn num_non_loop_edges(&self) -> usize {
        self.non_loop_edges().count()
    }

    /// True when every node carries `(i, i)`.
    pub fn has_self_loops(&self) -> bool {
        self.first_missing_loop().is_none()
    }

    pub(crate) fn first_missing_loop(&self) -> Option<usize> {
        let mut has = vec![false; self.num_nodes];
        for &(u, v) in &self.edges {
            if u == v {
                has[u] = true;
            }
        }
        has.iter().position(|h| !h)
    }

    /// Serialises back to the edge-list text format, including the node header.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("nodes {}\n", self.num_nodes);
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut header: Option<usize> = None;
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    let mut seen_content = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let first = fields.next().unwrap_or("");
        if first == "nodes" {
            if seen_content {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "`nodes` header must come before any edge".to_string(),
                });
            }
            let n = fields
                .next()
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: "`nodes` header needs a count".to_string(),
                })
                .and_then(|s| parse_index(s, line_no))?;
            if fields.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "trailing tokens after node count".to_string(),
                });
            }
            header = Some(n);
            seen_content = true;
            continue;
        }
        seen_content = true;
        let second = fields.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("expected two node indices, got `{line}`"),
        })?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected two node indices, got `{line}`"),
            });
        }
        let u = parse_index(first, line_no)?;
        let v = parse_index(second, line_no)?;
        pairs.push((u, v, line_no));
    }

    let max_index = pairs.iter().map(|&(u, v, _)| u.max(v)).max();
    let num_nodes = match (header, max_index) {
        (Some(n), _) => n,
        (None, Some(m)) => m.checked_add(1).ok_or(Error::IndexOverflow {
            index: m,
            num_nodes: usize::MAX,
            line: 0,
        })?,
        (None, None) => return Err(Error::EmptyGraph),
    };
    for &(u, v, line) in &pairs {
        let m = u.max(v);
        if m >= num_nodes {
            return Err(Error::IndexOverflow {
                index: m,
                num_nodes,
                line,
            });
        }
    }
    Graph::new(num_nodes, pairs.into_iter().map(|(u, v, _)| (u, v)))
}

fn parse_index(token: &str, line: usize) -> Result<usize> {
    token.parse::<usize>().map_err(|e| Error::Parse {
        line,
        msg: format!("bad node index `{token}`: {e}"),
    })
}

/// Adds `(i, i)` for every node. Idempotent.
pub fn add_self_loops(g: &Graph) -> Graph {
    let mut set: BTreeSet<(usize, usize)> = g.edges.iter().copied().collect();
    for i in 0..g.num_nodes {
        set.insert((i, i));
    }
    Graph {
        num_nodes: g.num_nodes,
        edges: set.into_iter().collect(),
    }
}

/// Erdős–Rényi `G(n, p)` without self-loops; pairs are visited in
/// lexicographic order so a seeded RNG gives a fixed graph.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_path() {
        let g = load_edge_list("0 1\n1 2").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert!(!g.has_self_loops());
    }

    #[test]
    fn dedups_and_canonicalises() {
        let g = load_edge_list("1 0\n0 1").unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn reports_line_of_malformed_entry() {
        match load_edge_list("0 x") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        match load_edge_list("# header\n0 1\n\n2") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn negative_index_is_malformed() {
        assert!(matches!(load_edge_list("0 -1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn header_overrides_node_count() {
        let g = load_edge_list("nodes 5\n0 1 # trailing comment\n").unwrap();
        assert_eq!(g.num_nodes(), 5);
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn header_smaller_than_index_overflows() {
        match load_edge_list("nodes 2\n0 1\n1 2") {
            Err(Error::IndexOverflow {
                index, num_nodes, line,
            }) => {
                assert_eq!((index, num_nodes, line), (2, 2, 3));
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn huge_index_is_reported() {
        let text = format!("0 {}", u128::MAX);
        assert!(matches!(load_edge_list(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_text_is_empty_graph() {
        assert!(matches!(load_edge_list("# nothing\n"), Err(Error::EmptyGraph)));
    }

    #[test]
    fn self_loops_on_two_node_path() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let s = add_self_loops(&g);
        assert_eq!(s.edges(), &[(0, 0), (0, 1), (1, 1)]);
        assert!(s.has_self_loops());
        assert_eq!(add_self_loops(&s), s);
    }

    #[test]
    fn self_loops_on_edgeless_graph() {
        let g = Graph::new(3, []).unwrap();
        assert_eq!(add_self_loops(&g).edges(), &[(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn edge_list_text_round_trips() {
        let g = add_self_loops(&Graph::new(4, [(2, 0), (3, 1)]).unwrap());
        assert_eq!(load_edge_list(&g.to_edge_list()).unwrap(), g);
    }
}
