//! `graph.jsonl`: one header record, then node records, then edge records.
//!
//! The header carries the format version and the node/edge counts, so a
//! truncated file is rejected instead of partially loaded.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Edge, Graph, GraphError, GraphHeader, Node, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum LineOut<'a> {
    Header {
        format_version: u32,
        node_count: usize,
        edge_count: usize,
        #[serde(flatten)]
        header: &'a GraphHeader,
    },
    Node(&'a Node),
    Edge(&'a Edge),
}

#[derive(Deserialize)]
struct HeaderIn {
    node_count: usize,
    edge_count: usize,
    #[serde(flatten)]
    header: GraphHeader,
}

#[derive(Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum LineIn {
    Node(Node),
    Edge(Edge),
}

pub fn write_to<W: Write>(graph: &Graph, mut out: W) -> Result<()> {
    let ser = |v: &LineOut| serde_json::to_string(v).map_err(|e| GraphError::Serialization(e.to_string()));
    writeln!(
        out,
        "{}",
        ser(&LineOut::Header {
            format_version: FORMAT_VERSION,
            node_count: graph.node_count(),
            edge_count: graph.edge_count(),
            header: &graph.header,
        })?
    )?;
    for n in graph.nodes() {
        writeln!(out, "{}", ser(&LineOut::Node(n))?)?;
    }
    for e in graph.edges() {
        writeln!(out, "{}", ser(&LineOut::Edge(e))?)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save(graph: &Graph, path: &Path) -> Result<()> {
    write_to(graph, BufWriter::new(File::create(path)?))
}

pub fn read_from<R: BufRead>(input: R) -> Result<Graph> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| GraphError::SchemaVersionMismatch {
            found: "empty file".into(),
            expected: FORMAT_VERSION,
        })??;
    let head: Value = serde_json::from_str(&first).map_err(|e| GraphError::Serialization(e.to_string()))?;
    let version = head.get("format_version").cloned();
    if head.get("record").and_then(Value::as_str) != Some("header")
        || version.as_ref().and_then(Value::as_u64) != Some(FORMAT_VERSION as u64)
    {
        return Err(GraphError::SchemaVersionMismatch {
            found: version.map(|v| v.to_string()).unwrap_or_else(|| "missing".into()),
            expected: FORMAT_VERSION,
        });
    }
    let head: HeaderIn = serde_json::from_value(head).map_err(|e| GraphError::Serialization(e.to_string()))?;

    let mut graph = Graph::new();
    graph.header = head.header;
    let mut pending_edges = Vec::with_capacity(head.edge_count);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LineIn = serde_json::from_str(&line)
            .map_err(|e| GraphError::Serialization(format!("line {}: {e}", i + 2)))?;
        match rec {
            LineIn::Node(n) => graph.insert_node(n)?,
            LineIn::Edge(e) => pending_edges.push(e),
        }
    }
    if graph.node_count() != head.node_count || pending_edges.len() != head.edge_count {
        return Err(GraphError::Serialization(format!(
            "truncated graph: header declares {} nodes / {} edges, found {} / {}",
            head.node_count,
            head.edge_count,
            graph.node_count(),
            pending_edges.len()
        )));
    }
    for e in pending_edges {
        graph.add_edge(e)?;
    }
    Ok(graph)
}

pub fn load(path: &Path) -> Result<Graph> {
    read_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Attrs, Edge};
    use crate::ontology::{EntityClass, RelationType};

    fn small() -> Graph {
        let mut g = Graph::new();
        g.header.corpus_hash = "abc".into();
        let mut attrs = Attrs::new();
        attrs.insert("vector".into(), serde_json::json!([0.1, 0.7000000000000001, -1e-17]));
        g.add_node("EMBEDDING:a", EntityClass::Embedding, attrs).unwrap();
        g.add_node("EMBEDDING:b", EntityClass::Embedding, Attrs::new()).unwrap();
        g.add_edge(Edge::new("EMBEDDING:a", "EMBEDDING:b", RelationType::SimilarTo).weighted(0.123456789012345))
            .unwrap();
        g
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let g = small();
        let mut a = Vec::new();
        write_to(&g, &mut a).unwrap();
        let back = read_from(a.as_slice()).unwrap();
        let mut b = Vec::new();
        write_to(&back, &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(back.nodes(), g.nodes());
        assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn truncated_file_rejected() {
        let mut buf = Vec::new();
        write_to(&small(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: Vec<&str> = text.lines().take(2).collect();
        let err = read_from(cut.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, GraphError::Serialization(_)));
        let half = &text[..text.len() / 2];
        assert!(read_from(half.as_bytes()).is_err());
        assert!(matches!(read_from(&b""[..]), Err(GraphError::SchemaVersionMismatch { .. })));
    }

    #[test]
    fn version_checked() {
        let line = r#"{"record":"header","format_version":99,"node_count":0,"edge_count":0,"corpus_hash":"","embedder_id":"","seeds":{}}"#;
        assert!(matches!(read_from(line.as_bytes()), Err(GraphError::SchemaVersionMismatch { .. })));
    }
}
