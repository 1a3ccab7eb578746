//! JSON encoding of property graphs.
//!
//! ```json
//! {
//!   "nodes": [{"id": "n1", "labels": ["Airport"], "props": {"code": "LAX"}}],
//!   "edges": [{"id": "e1", "src": "n1", "tgt": "n1", "labels": ["Flight"],
//!              "props": {"price": 300, "dep": {"time": 1020}}}]
//! }
//! ```
//!
//! Property values are JSON integers, strings and booleans, or the tagged
//! objects `{"time": minutes}` and `{"rational": "a/b"}`. An element may list
//! property keys under `synthetic` to mark values invented for a fixture;
//! the list is informational and ignored on load.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::graph::{ElementId, GraphError, PropertyGraph};
use crate::value::{Rational, Value};

#[derive(Debug, Error)]
pub enum GraphJsonError {
    #[error("cannot read graph file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed graph document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid graph document:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: String,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    props: Map<String, Json>,
    #[serde(default, skip_serializing)]
    #[allow(dead_code)]
    synthetic: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: String,
    src: String,
    tgt: String,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    props: Map<String, Json>,
    #[serde(default, skip_serializing)]
    #[allow(dead_code)]
    synthetic: Vec<String>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    #[serde(default)]
    nodes: Vec<NodeDoc>,
    #[serde(default)]
    edges: Vec<EdgeDoc>,
}

fn decode_value(owner: &str, key: &str, v: &Json) -> Result<Value, String> {
    let bad = |what: &str| format!("`{owner}`.{key}: {what}");
    match v {
        Json::Bool(b) => Ok(Value::Bool(*b)),
        Json::String(s) => Ok(Value::Text(s.clone())),
        Json::Number(n) => n.as_i64().map(Value::Int).ok_or_else(|| bad("numbers must be integers")),
        Json::Object(o) if o.len() == 1 => {
            if let Some(t) = o.get("time") {
                let t = t.as_u64().and_then(|t| u32::try_from(t).ok());
                return t
                    .map(Value::Time)
                    .ok_or_else(|| bad("time must be a nonnegative integer number of minutes"));
            }
            if let Some(r) = o.get("rational") {
                return r
                    .as_str()
                    .and_then(parse_rational)
                    .map(Value::from_number)
                    .ok_or_else(|| bad("rational must be a string `a/b` with b nonzero"));
            }
            Err(bad("unknown tagged value"))
        }
        _ => Err(bad("unsupported value")),
    }
}

fn parse_rational(s: &str) -> Option<Rational> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: i128 = n.trim().parse().ok()?;
    let d: i128 = d.trim().parse().ok()?;
    (!d.is_zero()).then(|| Rational::new(n, d))
}

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Int(i) => json!(i),
        Value::Text(s) => json!(s),
        Value::Bool(b) => json!(b),
        Value::Time(t) => json!({ "time": t }),
        Value::Rational(r) => json!({ "rational": format!("{}/{}", r.numer(), r.denom()) }),
    }
}

fn decode_props(
    owner: &str,
    props: &Map<String, Json>,
    errors: &mut Vec<String>,
) -> Vec<(String, Value)> {
    let mut out = Vec::new();
    for (k, v) in props {
        match decode_value(owner, k, v) {
            Ok(v) => out.push((k.clone(), v)),
            Err(e) => errors.push(e),
        }
    }
    out
}

pub fn graph_from_json(text: &str) -> Result<PropertyGraph, GraphJsonError> {
    let doc: GraphDoc = serde_json::from_str(text)?;
    let mut errors = Vec::new();
    let mut b = PropertyGraph::builder();
    for n in &doc.nodes {
        let props = decode_props(&n.id, &n.props, &mut errors);
        b.add_node(&n.id, n.labels.iter().cloned(), props);
    }
    for e in &doc.edges {
        let props = decode_props(&e.id, &e.props, &mut errors);
        b.add_edge(&e.id, &e.src, &e.tgt, e.labels.iter().cloned(), props);
    }
    match b.build() {
        Ok(g) if errors.is_empty() => Ok(g),
        Ok(_) => Err(GraphJsonError::Invalid(errors)),
        Err(es) => {
            errors.extend(es.iter().map(GraphError::to_string));
            Err(GraphJsonError::Invalid(errors))
        }
    }
}

fn encode_props(g: &PropertyGraph, id: ElementId) -> Map<String, Json> {
    g.properties(id).iter().map(|(k, v)| (k.clone(), value_to_json(v))).collect()
}

pub fn graph_to_json(g: &PropertyGraph) -> String {
    let doc = GraphDoc {
        nodes: g
            .nodes()
            .map(|n| NodeDoc {
                id: g.node_name(n).to_string(),
                labels: g.node_labels(n).iter().cloned().collect(),
                props: encode_props(g, ElementId::Node(n)),
                synthetic: Vec::new(),
            })
            .collect(),
        edges: g
            .edges()
            .map(|e| EdgeDoc {
                id: g.edge_name(e).to_string(),
                src: g.node_name(g.src(e)).to_string(),
                tgt: g.node_name(g.tgt(e)).to_string(),
                labels: g.edge_labels(e).iter().cloned().collect(),
                props: encode_props(g, ElementId::Edge(e)),
                synthetic: Vec::new(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph documents serialize");
    s.push('\n');
    s
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<PropertyGraph, GraphJsonError> {
    graph_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_graph(g: &PropertyGraph, path: impl AsRef<Path>) -> Result<(), GraphJsonError> {
    std::fs::write(path, graph_to_json(g))?;
    Ok(())
}

/// Structural equality: same names, labels, endpoints and properties in
/// the same declaration order.
pub fn same_graph(a: &PropertyGraph, b: &PropertyGraph) -> bool {
    let shape = |g: &PropertyGraph| {
        let nodes: Vec<_> = g
            .nodes()
            .map(|n| {
                (
                    g.node_name(n).to_string(),
                    g.node_labels(n).clone(),
                    g.properties(ElementId::Node(n)).clone(),
                )
            })
            .collect();
        let edges: Vec<_> = g
            .edges()
            .map(|e| {
                (
                    g.edge_name(e).to_string(),
                    g.src(e),
                    g.tgt(e),
                    g.edge_labels(e).clone(),
                    g.properties(ElementId::Edge(e)).clone(),
                )
            })
            .collect();
        (nodes, edges)
    };
    shape(a) == shape(b)
}

/// Property maps keyed by element name, for diagnostics.
pub fn property_table(g: &PropertyGraph) -> BTreeMap<String, BTreeMap<String, Value>> {
    g.nodes()
        .map(ElementId::Node)
        .chain(g.edges().map(ElementId::Edge))
        .map(|id| (g.element_name(id).to_string(), g.properties(id).clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document() {
        let g = graph_from_json("{}").unwrap();
        assert_eq!(g.node_count() + g.edge_count(), 0);
    }

    #[test]
    fn dangling_edge_names_both_ids() {
        let err = graph_from_json(
            r#"{"nodes":[{"id":"n1"}],"edges":[{"id":"e","src":"nX","tgt":"n1"}]}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`e`") && msg.contains("`nX`"), "{msg}");
    }

    #[test]
    fn offenders_are_all_listed() {
        let err = graph_from_json(
            r#"{"nodes":[{"id":"a","props":{"t":{"time":1.5}}},{"id":"a"}],"edges":[]}"#,
        )
        .unwrap_err();
        let GraphJsonError::Invalid(list) = err else { panic!() };
        assert_eq!(list.len(), 2, "{list:?}");
    }

    #[test]
    fn round_trip_is_stable() {
        let text = r#"{"nodes":[{"id":"a","labels":["L"],"props":{"r":{"rational":"-3/4"},"t":{"time":65},"s":"x","b":true,"i":-2}}],
            "edges":[{"id":"e","src":"a","tgt":"a","labels":["K"],"props":{}}]}"#;
        let g = graph_from_json(text).unwrap();
        let once = graph_to_json(&g);
        let g2 = graph_from_json(&once).unwrap();
        assert!(same_graph(&g, &g2));
        assert_eq!(graph_to_json(&g2), once);
    }
}
