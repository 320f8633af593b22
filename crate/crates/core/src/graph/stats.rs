use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, Result};
use crate::ontology::{is_cross_layer, EntityClass, Layer, RelationType};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationShare {
    pub count: usize,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: f64,
    pub per_class: BTreeMap<EntityClass, usize>,
    pub per_relation: BTreeMap<RelationType, RelationShare>,
    /// Intra-layer density of the subgraph induced by each layer's classes.
    /// Layers with fewer than two nodes are omitted.
    pub per_layer_density: BTreeMap<Layer, f64>,
    pub cross_layer_edges: usize,
    pub cross_layer_ratio: f64,
}

/// Directed density `E / (N (N - 1))`.
pub fn density(nodes: usize, edges: usize) -> Result<f64> {
    if nodes < 2 {
        return Err(GraphError::EmptyGraph(nodes));
    }
    Ok(edges as f64 / (nodes as f64 * (nodes as f64 - 1.0)))
}

pub fn stats(graph: &Graph) -> Result<GraphStats> {
    let n = graph.node_count();
    let e = graph.edge_count();
    let density = density(n, e)?;

    let mut per_class = BTreeMap::new();
    let mut layer_nodes: BTreeMap<Layer, usize> = BTreeMap::new();
    for node in graph.nodes() {
        *per_class.entry(node.entity_class).or_insert(0) += 1;
        *layer_nodes.entry(node.layer).or_insert(0) += 1;
    }

    let mut rel_counts: BTreeMap<RelationType, usize> = BTreeMap::new();
    let mut layer_edges: BTreeMap<Layer, usize> = BTreeMap::new();
    let mut cross = 0;
    for edge in graph.edges() {
        *rel_counts.entry(edge.relation).or_insert(0) += 1;
        let sc = graph.class_of(&edge.src).expect("edge endpoints exist");
        let dc = graph.class_of(&edge.dst).expect("edge endpoints exist");
        if is_cross_layer(edge.relation, sc, dc) {
            cross += 1;
        } else {
            *layer_edges.entry(sc.layer()).or_insert(0) += 1;
        }
    }

    let per_relation = rel_counts
        .into_iter()
        .map(|(r, count)| (r, RelationShare { count, share: count as f64 / e as f64 }))
        .collect();
    let per_layer_density = layer_nodes
        .iter()
        .filter(|(_, &ln)| ln >= 2)
        .map(|(&layer, &ln)| {
            let le = layer_edges.get(&layer).copied().unwrap_or(0);
            (layer, le as f64 / (ln as f64 * (ln as f64 - 1.0)))
        })
        .collect();

    Ok(GraphStats {
        node_count: n,
        edge_count: e,
        density,
        per_class,
        per_relation,
        per_layer_density,
        cross_layer_edges: cross,
        cross_layer_ratio: if e == 0 { 0.0 } else { cross as f64 / e as f64 },
    })
}

impl GraphStats {
    /// Plain-text table for terminals.
    pub fn render_table(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "nodes              {}", self.node_count);
        let _ = writeln!(s, "edges              {}", self.edge_count);
        let _ = writeln!(s, "density            {:.6e}", self.density);
        let _ = writeln!(
            s,
            "cross-layer edges  {} ({:.1}%)",
            self.cross_layer_edges,
            self.cross_layer_ratio * 100.0
        );
        let _ = writeln!(s, "\n{:<28} {:>8}", "class", "nodes");
        for (c, n) in &self.per_class {
            let _ = writeln!(s, "{:<28} {:>8}", c.as_str(), n);
        }
        let _ = writeln!(s, "\n{:<28} {:>8} {:>8}", "relation", "edges", "share");
        for (r, share) in &self.per_relation {
            let _ = writeln!(s, "{:<28} {:>8} {:>7.1}%", r.as_str(), share.count, share.share * 100.0);
        }
        let _ = writeln!(s, "\n{:<28} {:>12}", "layer", "density");
        for (l, d) in &self.per_layer_density {
            let _ = writeln!(s, "{:<28} {:>12.6}", l.as_str(), d);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Attrs, Edge};

    #[test]
    fn density_formula() {
        assert!((density(16_468, 71_249).unwrap() - 0.000263).abs() < 5e-7);
        assert!(matches!(density(1, 0), Err(GraphError::EmptyGraph(1))));
    }

    #[test]
    fn complete_directed_triangle() {
        let mut g = Graph::new();
        for i in 0..3 {
            g.add_node(format!("EMBEDDING:{i}"), EntityClass::Embedding, Attrs::new()).unwrap();
        }
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    g.add_edge(
                        Edge::new(format!("EMBEDDING:{i}"), format!("EMBEDDING:{j}"), RelationType::SimilarTo)
                            .weighted(0.9),
                    )
                    .unwrap();
                }
            }
        }
        let s = stats(&g).unwrap();
        assert_eq!(s.density, 1.0);
        assert_eq!(s.per_layer_density[&Layer::Semantic], 1.0);
        assert_eq!(s.cross_layer_ratio, 0.0);
        assert_eq!(s.per_relation[&RelationType::SimilarTo].share, 1.0);
    }
}
