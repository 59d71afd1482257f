use std::collections::HashMap;
use std::fmt::Write as _;

use super::{DiGraph, GraphError, NodeId, TargetSet};

/// Original integer labels of a parsed graph, indexed by internal id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelMap {
    labels: Vec<u64>,
    index: HashMap<u64, NodeId>,
}

impl LabelMap {
    /// Labels equal to the internal ids.
    pub fn identity(n: usize) -> Self {
        let labels: Vec<u64> = (0..n as u64).collect();
        let index = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        Self { labels, index }
    }

    fn intern(&mut self, label: u64) -> NodeId {
        *self.index.entry(label).or_insert_with(|| {
            self.labels.push(label);
            self.labels.len() - 1
        })
    }

    pub fn label(&self, id: NodeId) -> u64 {
        self.labels[id]
    }

    pub fn id(&self, label: u64) -> Option<NodeId> {
        self.index.get(&label).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Yields `(1-based line number, tokens)` for every non-blank, non-comment line.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn parse_label(token: &str, line: usize) -> Result<u64, GraphError> {
    token.parse().map_err(|_| GraphError::Parse {
        line,
        reason: format!("'{token}' is not a non-negative integer"),
    })
}

/// Parses a "tail head" edge list. Labels are compacted to dense ids in order
/// of first appearance; repeated edges collapse to one.
pub fn parse_edge_list(text: &str) -> Result<(DiGraph, LabelMap), GraphError> {
    let mut labels = LabelMap::default();
    let mut edges = Vec::new();
    for (line, tokens) in content_lines(text) {
        if tokens.len() != 2 {
            return Err(GraphError::Parse {
                line,
                reason: format!("expected 2 tokens, found {}", tokens.len()),
            });
        }
        let tail = parse_label(tokens[0], line)?;
        let head = parse_label(tokens[1], line)?;
        edges.push((labels.intern(tail), labels.intern(head)));
    }
    let graph = DiGraph::new(labels.len(), edges)?;
    Ok((graph, labels))
}

/// Parses one label per line against the label space of an edge list.
pub fn parse_target_set(text: &str, labels: &LabelMap) -> Result<TargetSet, GraphError> {
    let mut members = Vec::new();
    for (line, tokens) in content_lines(text) {
        if tokens.len() != 1 {
            return Err(GraphError::Parse {
                line,
                reason: format!("expected 1 token, found {}", tokens.len()),
            });
        }
        let label = parse_label(tokens[0], line)?;
        let id = labels
            .id(label)
            .ok_or(GraphError::UnknownLabel { label, line })?;
        members.push(id);
    }
    TargetSet::new(labels.len(), members)
}

/// Serializes edges as "tail head" lines, using `labels` when given.
pub fn write_edge_list(g: &DiGraph, labels: Option<&LabelMap>) -> String {
    let name = |v: NodeId| labels.map_or(v as u64, |m| m.label(v));
    let mut out = String::with_capacity(g.edge_count() * 12);
    for &(tail, head) in g.edges() {
        let _ = writeln!(out, "{} {}", name(tail), name(head));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn labels_compact_by_first_appearance() {
        let (g, labels) = parse_edge_list("1 2\n2 3\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(labels.label(2), 3);
        assert_eq!(labels.id(1), Some(0));
    }

    #[test]
    fn comment_and_self_loop() {
        let (g, _) = parse_edge_list("# c\n5 5\n").unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edges(), &[(0, 0)]);
    }

    #[test]
    fn blank_lines_and_duplicates() {
        let (g, _) = parse_edge_list("\n4 7\n\n4 7\n7 4\n").unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn malformed_lines_report_line_number() {
        assert_eq!(
            parse_edge_list("1 2\n3\n").unwrap_err(),
            GraphError::Parse {
                line: 2,
                reason: "expected 2 tokens, found 1".into()
            }
        );
        assert!(matches!(
            parse_edge_list("# x\n1 -2\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_edge_list("1 2 3\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn target_labels_resolve() {
        let (_, labels) = parse_edge_list("10 20\n20 30\n").unwrap();
        let s = parse_target_set("30\n# x\n10\n", &labels).unwrap();
        assert_eq!(s.members(), &[0, 2]);
        assert_eq!(
            parse_target_set("40\n", &labels).unwrap_err(),
            GraphError::UnknownLabel { label: 40, line: 1 }
        );
        assert_eq!(
            parse_target_set("# none\n", &labels).unwrap_err(),
            GraphError::EmptyTargetSet
        );
    }

    proptest! {
        #[test]
        fn serialize_reparse_is_identity(
            edges in proptest::collection::vec((0u64..30, 0u64..30), 1..60)
        ) {
            let text: String = edges.iter().map(|(a, b)| format!("{a} {b}\n")).collect();
            let (g, labels) = parse_edge_list(&text).unwrap();
            let (g2, labels2) = parse_edge_list(&write_edge_list(&g, Some(&labels))).unwrap();
            prop_assert_eq!(&g, &g2);
            prop_assert_eq!(labels, labels2);
        }
    }
}
