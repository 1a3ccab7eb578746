//! In-memory property graph with a label-indexed adjacency list.
//!
//! Elements are addressed by dense indices assigned in declaration order;
//! that order is also the canonical enumeration order used by the engine.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementId {
    Node(NodeId),
    Edge(EdgeId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate element id `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}` refers to missing node `{node}`")]
    DanglingEndpoint { edge: String, node: String },
    #[error("element index out of range")]
    OutOfRange,
}

#[derive(Clone, Debug, Default)]
struct Element {
    name: String,
    labels: BTreeSet<String>,
    props: BTreeMap<String, Value>,
}

/// A directed labeled multigraph whose nodes and edges carry property maps.
#[derive(Clone, Debug, Default)]
pub struct PropertyGraph {
    nodes: Vec<Element>,
    edges: Vec<Element>,
    src: Vec<NodeId>,
    tgt: Vec<NodeId>,
    out: Vec<Vec<EdgeId>>,
    inc: Vec<Vec<EdgeId>>,
    names: HashMap<String, ElementId>,
    by_label: HashMap<String, BTreeSet<ElementId>>,
}

/// A nonempty path: a source node, a chain of edges and a target node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphPath {
    pub source: NodeId,
    pub edges: Vec<EdgeId>,
    pub target: NodeId,
}

impl GraphPath {
    pub fn new(source: NodeId, edges: Vec<EdgeId>, target: NodeId) -> Self {
        GraphPath {
            source,
            edges,
            target,
        }
    }

    /// Builds the path spanned by `edges`, taking endpoints from the graph.
    pub fn from_edges(g: &PropertyGraph, edges: Vec<EdgeId>) -> Option<Self> {
        let first = *edges.first()?;
        let last = *edges.last()?;
        Some(GraphPath {
            source: g.src(first),
            target: g.tgt(last),
            edges,
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// The suffix starting after the first `k` edges.
    pub fn suffix(&self, g: &PropertyGraph, k: usize) -> Option<GraphPath> {
        if k >= self.edges.len() {
            return None;
        }
        Some(GraphPath {
            source: g.src(self.edges[k]),
            edges: self.edges[k..].to_vec(),
            target: self.target,
        })
    }

    /// Nodes visited by the path, source first.
    pub fn nodes(&self, g: &PropertyGraph) -> Vec<NodeId> {
        let mut v = Vec::with_capacity(self.edges.len() + 1);
        v.push(self.source);
        v.extend(self.edges.iter().map(|e| g.tgt(*e)));
        v
    }

    /// Stable textual key, used to name the path inside constraints.
    pub fn key(&self, g: &PropertyGraph) -> String {
        let edges: Vec<&str> = self.edges.iter().map(|e| g.edge_name(*e)).collect();
        format!(
            "{}:{}:{}",
            g.node_name(self.source),
            edges.join("."),
            g.node_name(self.target)
        )
    }
}

impl PropertyGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.nodes[n.0 as usize].name
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0 as usize].name
    }

    pub fn element_name(&self, id: ElementId) -> &str {
        match id {
            ElementId::Node(n) => self.node_name(n),
            ElementId::Edge(e) => self.edge_name(e),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<ElementId> {
        self.names.get(name).copied()
    }

    pub fn node(&self, name: &str) -> Result<NodeId, GraphError> {
        match self.lookup(name) {
            Some(ElementId::Node(n)) => Ok(n),
            _ => Err(GraphError::UnknownNode(name.to_string())),
        }
    }

    pub fn edge(&self, name: &str) -> Result<EdgeId, GraphError> {
        match self.lookup(name) {
            Some(ElementId::Edge(e)) => Ok(e),
            _ => Err(GraphError::UnknownElement(name.to_string())),
        }
    }

    pub fn src(&self, e: EdgeId) -> NodeId {
        self.src[e.0 as usize]
    }

    pub fn tgt(&self, e: EdgeId) -> NodeId {
        self.tgt[e.0 as usize]
    }

    fn element(&self, id: ElementId) -> Result<&Element, GraphError> {
        match id {
            ElementId::Node(n) => self.nodes.get(n.0 as usize),
            ElementId::Edge(e) => self.edges.get(e.0 as usize),
        }
        .ok_or(GraphError::OutOfRange)
    }

    pub fn labels(&self, id: ElementId) -> &BTreeSet<String> {
        &self.element(id).expect("element in range").labels
    }

    pub fn node_labels(&self, n: NodeId) -> &BTreeSet<String> {
        &self.nodes[n.0 as usize].labels
    }

    pub fn edge_labels(&self, e: EdgeId) -> &BTreeSet<String> {
        &self.edges[e.0 as usize].labels
    }

    pub fn properties(&self, id: ElementId) -> &BTreeMap<String, Value> {
        &self.element(id).expect("element in range").props
    }

    /// Property lookup; `Ok(None)` when the element lacks the key.
    pub fn get_property(&self, id: ElementId, key: &str) -> Result<Option<&Value>, GraphError> {
        Ok(self.element(id)?.props.get(key))
    }

    /// Same as [`get_property`](Self::get_property) but addressed by name.
    pub fn property_of(&self, name: &str, key: &str) -> Result<Option<&Value>, GraphError> {
        let id = self
            .lookup(name)
            .ok_or_else(|| GraphError::UnknownElement(name.to_string()))?;
        self.get_property(id, key)
    }

    /// All nodes and edges carrying `label`, in identifier order.
    pub fn elements_by_label(&self, label: &str) -> BTreeSet<ElementId> {
        self.by_label.get(label).cloned().unwrap_or_default()
    }

    /// Outgoing edges of `n`, optionally restricted to edges carrying `label`.
    pub fn out_edges(&self, n: NodeId, label: Option<&str>) -> Result<Vec<EdgeId>, GraphError> {
        let adj = self.out.get(n.0 as usize).ok_or(GraphError::OutOfRange)?;
        Ok(match label {
            None => adj.clone(),
            Some(l) => adj
                .iter()
                .copied()
                .filter(|e| self.edge_labels(*e).contains(l))
                .collect(),
        })
    }

    /// Incoming edges of `n`, in identifier order.
    pub fn in_edges(&self, n: NodeId) -> Result<&[EdgeId], GraphError> {
        self.inc
            .get(n.0 as usize)
            .map(Vec::as_slice)
            .ok_or(GraphError::OutOfRange)
    }

    pub(crate) fn out_slice(&self, n: NodeId) -> &[EdgeId] {
        &self.out[n.0 as usize]
    }

    /// Whether the edges chain up from `source` to `target`.
    pub fn validate_path(&self, p: &GraphPath) -> Result<bool, GraphError> {
        if p.source.0 as usize >= self.nodes.len() || p.target.0 as usize >= self.nodes.len() {
            return Err(GraphError::OutOfRange);
        }
        if p.edges.iter().any(|e| e.0 as usize >= self.edges.len()) {
            return Err(GraphError::OutOfRange);
        }
        if p.edges.is_empty() {
            return Ok(false);
        }
        let mut at = p.source;
        for e in &p.edges {
            if self.src(*e) != at {
                return Ok(false);
            }
            at = self.tgt(*e);
        }
        Ok(at == p.target)
    }

    /// Every edge label occurring in the graph.
    pub fn edge_alphabet(&self) -> BTreeSet<String> {
        self.edges
            .iter()
            .flat_map(|e| e.labels.iter().cloned())
            .collect()
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementId::Node(n) => write!(f, "node#{}", n.0),
            ElementId::Edge(e) => write!(f, "edge#{}", e.0),
        }
    }
}

/// Incremental graph construction; edges may be added before their endpoints.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<Element>,
    edges: Vec<(Element, String, String)>,
}

impl GraphBuilder {
    pub fn node<L, S>(mut self, name: &str, labels: L, props: Vec<(&str, Value)>) -> Self
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.add_node(
            name,
            labels,
            props.into_iter().map(|(k, v)| (k.to_string(), v)),
        );
        self
    }

    pub fn edge<L, S>(
        mut self,
        name: &str,
        src: &str,
        tgt: &str,
        labels: L,
        props: Vec<(&str, Value)>,
    ) -> Self
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.add_edge(
            name,
            src,
            tgt,
            labels,
            props.into_iter().map(|(k, v)| (k.to_string(), v)),
        );
        self
    }

    pub fn add_node<L, S, P>(&mut self, name: &str, labels: L, props: P)
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = (String, Value)>,
    {
        self.nodes.push(Element {
            name: name.to_string(),
            labels: labels.into_iter().map(Into::into).collect(),
            props: props.into_iter().collect(),
        });
    }

    pub fn add_edge<L, S, P>(&mut self, name: &str, src: &str, tgt: &str, labels: L, props: P)
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = (String, Value)>,
    {
        let el = Element {
            name: name.to_string(),
            labels: labels.into_iter().map(Into::into).collect(),
            props: props.into_iter().collect(),
        };
        self.edges.push((el, src.to_string(), tgt.to_string()));
    }

    /// Finishes the graph, reporting every structural problem found.
    pub fn build(self) -> Result<PropertyGraph, Vec<GraphError>> {
        let mut errors = Vec::new();
        let mut g = PropertyGraph::default();
        for (i, n) in self.nodes.into_iter().enumerate() {
            let id = ElementId::Node(NodeId(i as u32));
            if g.names.insert(n.name.clone(), id).is_some() {
                errors.push(GraphError::DuplicateId(n.name.clone()));
            }
            for l in &n.labels {
                g.by_label.entry(l.clone()).or_default().insert(id);
            }
            g.nodes.push(n);
        }
        g.out = vec![Vec::new(); g.nodes.len()];
        g.inc = vec![Vec::new(); g.nodes.len()];
        for (i, (e, s, t)) in self.edges.into_iter().enumerate() {
            let id = EdgeId(i as u32);
            if g.names
                .insert(e.name.clone(), ElementId::Edge(id))
                .is_some()
            {
                errors.push(GraphError::DuplicateId(e.name.clone()));
            }
            let mut endpoint = |name: &str| match g.names.get(name) {
                Some(ElementId::Node(n)) => *n,
                _ => {
                    errors.push(GraphError::DanglingEndpoint {
                        edge: e.name.clone(),
                        node: name.to_string(),
                    });
                    NodeId(0)
                }
            };
            let (s, t) = (endpoint(&s), endpoint(&t));
            for l in &e.labels {
                g.by_label
                    .entry(l.clone())
                    .or_default()
                    .insert(ElementId::Edge(id));
            }
            g.src.push(s);
            g.tgt.push(t);
            if errors.is_empty() {
                g.out[s.0 as usize].push(id);
                g.inc[t.0 as usize].push(id);
            }
            g.edges.push(e);
        }
        if errors.is_empty() {
            Ok(g)
        } else {
            Err(errors)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> PropertyGraph {
        PropertyGraph::builder()
            .node("a", ["A"], vec![("k", Value::Int(1))])
            .node("b", ["A", "B"], vec![])
            .edge("e", "a", "b", ["r"], vec![])
            .edge("f", "b", "a", ["s", "r"], vec![])
            .build()
            .unwrap()
    }

    #[test]
    fn lookups() {
        let g = tiny();
        let a = g.node("a").unwrap();
        assert_eq!(
            g.get_property(ElementId::Node(a), "k").unwrap(),
            Some(&Value::Int(1))
        );
        assert_eq!(g.get_property(ElementId::Node(a), "zz").unwrap(), None);
        assert_eq!(g.elements_by_label("B").len(), 1);
        assert_eq!(g.elements_by_label("r").len(), 2);
        assert!(g.elements_by_label("nope").is_empty());
        assert_eq!(g.out_edges(a, Some("s")).unwrap(), vec![]);
        assert_eq!(g.out_edges(a, Some("r")).unwrap().len(), 1);
    }

    #[test]
    fn path_validation() {
        let g = tiny();
        let (a, b) = (g.node("a").unwrap(), g.node("b").unwrap());
        let (e, f) = (g.edge("e").unwrap(), g.edge("f").unwrap());
        assert!(g.validate_path(&GraphPath::new(a, vec![e, f], a)).unwrap());
        assert!(!g.validate_path(&GraphPath::new(a, vec![f], b)).unwrap());
        assert!(g
            .validate_path(&GraphPath::new(NodeId(9), vec![e], b))
            .is_err());
    }

    #[test]
    fn builder_reports_all_problems() {
        let errs = PropertyGraph::builder()
            .node("a", ["A"], vec![])
            .node("a", ["A"], vec![])
            .edge("e", "a", "zz", ["r"], vec![])
            .build()
            .unwrap_err();
        assert_eq!(errs.len(), 2);
    }
}
