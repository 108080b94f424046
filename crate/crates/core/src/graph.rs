//! Cycles, tadpoles and n-tadpoles with exact edge weights.
//!
//! Node ids are dense: cycle nodes `0..m` in cycle order, then tail nodes
//! tail by tail from the attachment outwards. Edge ids follow the same
//! scheme: cycle edge `k` joins `c_k` and `c_{k+1 mod m}`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use crate::rational::{ParseRationalError, Rational};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("a cycle needs at least 3 edges, got {0}")]
    EmptyOrTooShort(usize),
    #[error("edge weight {weight} is not positive")]
    NonpositiveWeight { weight: Rational },
    #[error("tail must contain at least one edge")]
    EmptyTail,
    #[error("attach index {index} out of range for a cycle of {cycle_len} nodes")]
    BadAttachIndex { index: usize, cycle_len: usize },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl GraphError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        GraphError::Parse {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub weight: Rational,
}

impl Edge {
    pub fn other(&self, v: NodeId) -> NodeId {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tail {
    /// Cycle index of the attachment node.
    pub attach: usize,
    /// Tail nodes from the attachment outwards; the last one is the tail end.
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Cycle,
    Tadpole { attach: NodeId, tail_end: NodeId },
    NTadpole { tails: usize },
}

#[derive(Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<Edge>,
    adj: Vec<Vec<(NodeId, EdgeId)>>,
    cycle_len: usize,
    tails: Vec<Tail>,
    start: NodeId,
}

fn check_weights(weights: &[Rational]) -> Result<(), GraphError> {
    match weights.iter().find(|w| !w.is_positive()) {
        Some(w) => Err(GraphError::NonpositiveWeight { weight: *w }),
        None => Ok(()),
    }
}

pub fn build_cycle(weights: &[Rational]) -> Result<WeightedGraph, GraphError> {
    build_n_tadpole(weights, &[], "c0")
}

pub fn build_tadpole(
    cycle_weights: &[Rational],
    attach_index: usize,
    tail_weights: &[Rational],
    start: &str,
) -> Result<WeightedGraph, GraphError> {
    build_n_tadpole(cycle_weights, &[(attach_index, tail_weights.to_vec())], start)
}

pub fn build_n_tadpole(
    cycle_weights: &[Rational],
    tails: &[(usize, Vec<Rational>)],
    start: &str,
) -> Result<WeightedGraph, GraphError> {
    let m = cycle_weights.len();
    if m < 3 {
        return Err(GraphError::EmptyOrTooShort(m));
    }
    check_weights(cycle_weights)?;
    for (attach, weights) in tails {
        if weights.is_empty() {
            return Err(GraphError::EmptyTail);
        }
        if *attach >= m {
            return Err(GraphError::BadAttachIndex {
                index: *attach,
                cycle_len: m,
            });
        }
        check_weights(weights)?;
    }

    let mut edges = Vec::new();
    let mut node_count = m;
    for (k, w) in cycle_weights.iter().enumerate() {
        edges.push(Edge {
            a: k,
            b: (k + 1) % m,
            weight: *w,
        });
    }
    let mut tail_records = Vec::new();
    for (attach, weights) in tails {
        let mut prev = *attach;
        let mut nodes = Vec::new();
        let mut tail_edges = Vec::new();
        for w in weights {
            let v = node_count;
            node_count += 1;
            tail_edges.push(edges.len());
            edges.push(Edge {
                a: prev,
                b: v,
                weight: *w,
            });
            nodes.push(v);
            prev = v;
        }
        tail_records.push(Tail {
            attach: *attach,
            nodes,
            edges: tail_edges,
        });
    }

    let mut adj = vec![Vec::new(); node_count];
    // Cycle nodes list the forward edge first, then the backward edge, then tails.
    for k in 0..m {
        adj[k].push(((k + 1) % m, k));
        adj[(k + 1) % m].push((k, k));
    }
    for k in 0..m {
        // node k currently holds [(k+1, k) from its own edge, (k-1, k-1)] in some order
        adj[k].sort_by_key(|&(_, e)| if e == k { 0 } else { 1 });
    }
    for (e, edge) in edges.iter().enumerate().skip(m) {
        adj[edge.a].push((edge.b, e));
        adj[edge.b].push((edge.a, e));
    }

    let mut g = WeightedGraph {
        labels: Vec::new(),
        index: HashMap::new(),
        edges,
        adj,
        cycle_len: m,
        tails: tail_records,
        start: 0,
    };
    let labels: Vec<String> = (0..node_count).map(|v| g.canonical_label(v)).collect();
    g.set_labels(labels)?;
    g.start = g.node(start)?;
    Ok(g)
}

impl WeightedGraph {
    fn set_labels(&mut self, labels: Vec<String>) -> Result<(), GraphError> {
        let mut index = HashMap::with_capacity(labels.len());
        for (v, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), v).is_some() {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        self.labels = labels;
        self.index = index;
        Ok(())
    }

    /// Label the node would carry in a freshly built graph.
    pub fn canonical_label(&self, v: NodeId) -> String {
        if v < self.cycle_len {
            return format!("c{v}");
        }
        let (t, pos) = self.tail_position(v).expect("node id out of range");
        if self.tails.len() == 1 {
            format!("t{}", pos + 1)
        } else {
            format!("t{}_{}", t + 1, pos + 1)
        }
    }

    /// Returns a copy with the start moved to `label`.
    pub fn with_start(&self, label: &str) -> Result<WeightedGraph, GraphError> {
        let mut g = self.clone();
        g.start = g.node(label)?;
        Ok(g)
    }

    /// Returns a structurally identical graph whose node `v` is called `labels[v]`.
    pub fn relabel(&self, labels: Vec<String>) -> Result<WeightedGraph, GraphError> {
        if labels.len() != self.labels.len() {
            return Err(GraphError::parse(
                0,
                format!("expected {} labels, got {}", self.labels.len(), labels.len()),
            ));
        }
        let mut g = self.clone();
        g.set_labels(labels)?;
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node(&self, label: &str) -> Result<NodeId, GraphError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(label.to_string()))
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn start_label(&self) -> &str {
        &self.labels[self.start]
    }

    pub fn shape(&self) -> Shape {
        match self.tails.len() {
            0 => Shape::Cycle,
            1 => Shape::Tadpole {
                attach: self.tails[0].attach,
                tail_end: *self.tails[0].nodes.last().unwrap(),
            },
            n => Shape::NTadpole { tails: n },
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    /// Incident `(neighbor, edge)` pairs in reveal order.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn cycle_len(&self) -> usize {
        self.cycle_len
    }

    pub fn is_cycle_node(&self, v: NodeId) -> bool {
        v < self.cycle_len
    }

    pub fn is_cycle_edge(&self, e: EdgeId) -> bool {
        e < self.cycle_len
    }

    pub fn cycle_weights(&self) -> Vec<Rational> {
        self.edges[..self.cycle_len].iter().map(|e| e.weight).collect()
    }

    pub fn cycle_length(&self) -> Rational {
        self.edges[..self.cycle_len].iter().map(|e| e.weight).sum()
    }

    pub fn tails(&self) -> &[Tail] {
        &self.tails
    }

    pub fn tail_length(&self, t: usize) -> Rational {
        self.tails[t].edges.iter().map(|&e| self.edges[e].weight).sum()
    }

    pub fn tails_length(&self) -> Rational {
        (0..self.tails.len()).map(|t| self.tail_length(t)).sum()
    }

    pub fn total_weight(&self) -> Rational {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// `(tail index, position)` of a tail node, position 0 being next to the cycle.
    pub fn tail_position(&self, v: NodeId) -> Option<(usize, usize)> {
        if v < self.cycle_len {
            return None;
        }
        let mut offset = self.cycle_len;
        for (t, tail) in self.tails.iter().enumerate() {
            if v < offset + tail.nodes.len() {
                return Some((t, v - offset));
            }
            offset += tail.nodes.len();
        }
        None
    }

    /// Cycle node through which `v` reaches the cycle.
    pub fn entry_node(&self, v: NodeId) -> NodeId {
        match self.tail_position(v) {
            None => v,
            Some((t, _)) => self.tails[t].attach,
        }
    }

    /// Exact single-source shortest distances (Dijkstra).
    pub fn distances_from(&self, source: NodeId) -> Vec<Rational> {
        self.dijkstra(source).0
    }

    fn dijkstra(&self, source: NodeId) -> (Vec<Rational>, Vec<Option<NodeId>>) {
        let n = self.node_count();
        let mut dist: Vec<Option<Rational>> = vec![None; n];
        let mut parent = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[source] = Some(Rational::ZERO);
        heap.push(Reverse((Rational::ZERO, source)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if dist[v].is_some_and(|best| d > best) {
                continue;
            }
            for &(u, e) in &self.adj[v] {
                let nd = d + self.edges[e].weight;
                if dist[u].is_none_or(|best| nd < best) {
                    dist[u] = Some(nd);
                    parent[u] = Some(v);
                    heap.push(Reverse((nd, u)));
                }
            }
        }
        (dist.into_iter().map(|d| d.expect("graph is connected")).collect(), parent)
    }

    pub fn shortest_distance(&self, u: &str, v: &str) -> Result<Rational, GraphError> {
        let u = self.node(u)?;
        let v = self.node(v)?;
        Ok(self.distances_from(u)[v])
    }

    /// Node sequence of one shortest path from `u` to `v`, both included.
    pub fn shortest_path(&self, u: NodeId, v: NodeId) -> Vec<NodeId> {
        let (_, parent) = self.dijkstra(v);
        let mut path = vec![u];
        let mut cur = u;
        while cur != v {
            cur = parent[cur].expect("graph is connected");
            path.push(cur);
        }
        path
    }

    /// Edge joining two adjacent nodes, if any.
    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.adj[u].iter().find(|&&(w, _)| w == v).map(|&(_, e)| e)
    }

    /// Serializes into the line-oriented graph format.
    pub fn to_text(&self) -> String {
        let mut out = String::from("cycle");
        for w in self.cycle_weights() {
            out.push_str(&format!(" {w}"));
        }
        out.push('\n');
        for tail in &self.tails {
            out.push_str(&format!("tail {}", tail.attach));
            for &e in &tail.edges {
                out.push_str(&format!(" {}", self.edges[e].weight));
            }
            out.push('\n');
        }
        out.push_str(&format!("start {}\n", self.canonical_label(self.start)));
        out
    }

    /// The text format on a single line, statements separated by `;`.
    pub fn to_line(&self) -> String {
        self.to_text().trim_end().replace('\n', "; ")
    }

    /// Parses the format written by [`WeightedGraph::to_text`]; `;` may stand
    /// in for a line break.
    pub fn parse(text: &str) -> Result<WeightedGraph, GraphError> {
        let mut cycle: Option<Vec<Rational>> = None;
        let mut tails = Vec::new();
        let mut start: Option<String> = None;
        for (i, raw) in text.split(['\n', ';']).enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let keyword = words.next().unwrap();
            let weights = |words: std::str::SplitWhitespace<'_>| {
                words
                    .map(|w| w.parse::<Rational>())
                    .collect::<Result<Vec<_>, ParseRationalError>>()
                    .map_err(|e| GraphError::parse(line_no, e.to_string()))
            };
            match keyword {
                "cycle" => {
                    if cycle.is_some() {
                        return Err(GraphError::parse(line_no, "duplicate cycle line"));
                    }
                    cycle = Some(weights(words)?);
                }
                "tail" => {
                    let idx = words
                        .next()
                        .ok_or_else(|| GraphError::parse(line_no, "missing attach index"))?;
                    let idx = idx
                        .parse::<usize>()
                        .map_err(|_| GraphError::parse(line_no, format!("bad attach index `{idx}`")))?;
                    tails.push((idx, weights(words)?));
                }
                "start" => {
                    let label = words
                        .next()
                        .ok_or_else(|| GraphError::parse(line_no, "missing start label"))?;
                    if words.next().is_some() {
                        return Err(GraphError::parse(line_no, "trailing tokens after start label"));
                    }
                    start = Some(label.to_string());
                }
                other => {
                    return Err(GraphError::parse(line_no, format!("unknown keyword `{other}`")))
                }
            }
        }
        let cycle = cycle.ok_or_else(|| GraphError::parse(0, "missing cycle line"))?;
        build_n_tadpole(&cycle, &tails, start.as_deref().unwrap_or("c0"))
    }
}

impl fmt::Debug for WeightedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for WeightedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn ints(ws: &[i128]) -> Vec<Rational> {
        ws.iter().map(|&w| Rational::integer(w)).collect()
    }

    #[test]
    fn cycle_construction() {
        let g = build_cycle(&ints(&[1, 1, 2])).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.cycle_length(), q(4, 1));
        assert_eq!(g.shape(), Shape::Cycle);
        assert_eq!(g.start_label(), "c0");
        assert_eq!(g.edge(2).weight, q(2, 1));
        assert_eq!((g.edge(2).a, g.edge(2).b), (2, 0));
        assert_eq!(g.neighbors(0), &[(1, 0), (2, 2)]);
    }

    #[test]
    fn cycle_errors() {
        assert_eq!(build_cycle(&ints(&[1, 1])), Err(GraphError::EmptyOrTooShort(2)));
        assert!(matches!(
            build_cycle(&ints(&[1, 0, 1])),
            Err(GraphError::NonpositiveWeight { .. })
        ));
    }

    #[test]
    fn tadpole_construction() {
        let g = build_tadpole(&ints(&[1, 1, 1]), 1, &ints(&[1]), "c0").unwrap();
        assert_eq!(g.shape(), Shape::Tadpole { attach: 1, tail_end: 3 });
        assert_eq!(g.label(3), "t1");
        assert_eq!(g.degree(1), 3);
        assert_eq!(g.tail_length(0), q(1, 1));
        assert_eq!(
            build_tadpole(&ints(&[1, 1, 1]), 99, &ints(&[1]), "c0"),
            Err(GraphError::BadAttachIndex { index: 99, cycle_len: 3 })
        );
        assert_eq!(
            build_tadpole(&ints(&[1, 1, 1]), 0, &[], "c0"),
            Err(GraphError::EmptyTail)
        );
    }

    #[test]
    fn n_tadpole_labels_and_degrees() {
        let g = build_n_tadpole(
            &ints(&[1, 1, 1]),
            &[(0, ints(&[1, 2])), (0, ints(&[1]))],
            "t1_2",
        )
        .unwrap();
        assert_eq!(g.degree(0), 4);
        assert_eq!(g.labels()[3..], ["t1_1", "t1_2", "t2_1"]);
        assert_eq!(g.start_label(), "t1_2");
        assert_eq!(g.shape(), Shape::NTadpole { tails: 2 });
        let plain = build_n_tadpole(&ints(&[2, 3, 4]), &[], "c0").unwrap();
        assert_eq!(plain, build_cycle(&ints(&[2, 3, 4])).unwrap());
    }

    #[test]
    fn distances() {
        let g = build_cycle(&ints(&[1, 1, 2])).unwrap();
        assert_eq!(g.shortest_distance("c0", "c0").unwrap(), Rational::ZERO);
        assert_eq!(g.shortest_distance("c0", "c2").unwrap(), q(2, 1));
        assert!(g.shortest_distance("c0", "zz").is_err());
        let path = g.shortest_path(1, 0);
        assert_eq!(path, vec![1, 0]);
    }

    #[test]
    fn text_round_trip() {
        let text = "# sample\ncycle 1 5/4 0.75\ntail 2 1 1/3\nstart t2\n";
        let g = WeightedGraph::parse(text).unwrap();
        assert_eq!(g.cycle_weights(), vec![q(1, 1), q(5, 4), q(3, 4)]);
        assert_eq!(g.start_label(), "t2");
        assert_eq!(WeightedGraph::parse(&g.to_text()).unwrap(), g);
        assert_eq!(g.to_line(), "cycle 1 5/4 3/4; tail 2 1 1/3; start t2");
        assert_eq!(WeightedGraph::parse(&g.to_line()).unwrap(), g);
        assert!(WeightedGraph::parse("cycle 1 1\n").is_err());
        assert!(WeightedGraph::parse("tail 0 1\n").is_err());
        assert!(WeightedGraph::parse("cycle 1 1 x\n").is_err());
    }

    #[test]
    fn relabel_keeps_structure() {
        let g = build_cycle(&ints(&[1, 2, 3])).unwrap();
        let h = g
            .relabel(vec!["s".into(), "x".into(), "y".into()])
            .unwrap();
        assert_eq!(h.start_label(), "s");
        assert_eq!(h.shortest_distance("s", "y").unwrap(), q(3, 1));
        assert_eq!(h.to_text(), g.to_text());
        assert!(g.relabel(vec!["a".into(), "a".into(), "b".into()]).is_err());
    }
}
