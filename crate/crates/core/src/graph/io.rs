//! Causal network serialization: a TSV edge list (`src<TAB>dst<TAB>weight`)
//! plus a JSON sidecar carrying node payloads and scene context. Used
//! between pipeline stages.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ingest::{EventNode, SceneObject};

use super::{CausalNetwork, EdgeMap};

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    cn_id: String,
    scene_id: String,
    nodes: Vec<EventNode>,
    objects: Vec<SceneObject>,
}

/// Render the edge set as TSV, one `src\tdst\tweight` line per edge in
/// (src, dst) order.
pub fn network_to_tsv(edges: &EdgeMap) -> String {
    let mut out = String::new();
    for ((src, dst), w) in edges {
        out.push_str(&format!("{src}\t{dst}\t{w}\n"));
    }
    out
}

/// Parse a TSV edge list produced by [`network_to_tsv`].
pub fn network_from_tsv(text: &str) -> io::Result<EdgeMap> {
    let mut edges: EdgeMap = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (src, dst, w) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(d), Some(w), None) => (s, d, w),
            _ => {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("line {}: expected src\\tdst\\tweight", lineno + 1),
                ))
            }
        };
        let weight: f64 = w.parse().map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: bad weight: {e}", lineno + 1))
        })?;
        edges.insert((src.to_string(), dst.to_string()), weight);
    }
    Ok(edges)
}

/// Write `<stem>.edges.tsv` and `<stem>.nodes.json` under `dir`.
pub fn write_network(dir: &Path, cn: &CausalNetwork) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{}.edges.tsv", cn.cn_id)), network_to_tsv(&cn.edges))?;
    let sidecar = Sidecar {
        cn_id: cn.cn_id.clone(),
        scene_id: cn.scene_id.clone(),
        nodes: cn.nodes.values().cloned().collect(),
        objects: cn.objects.clone(),
    };
    let mut json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    json.push('\n');
    std::fs::write(dir.join(format!("{}.nodes.json", cn.cn_id)), json)
}

/// Read a network written by [`write_network`].
pub fn read_network(dir: &Path, cn_id: &str) -> io::Result<CausalNetwork> {
    let edges = network_from_tsv(&std::fs::read_to_string(dir.join(format!("{cn_id}.edges.tsv")))?)?;
    let sidecar: Sidecar =
        serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{cn_id}.nodes.json")))?)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    Ok(CausalNetwork {
        cn_id: sidecar.cn_id,
        scene_id: sidecar.scene_id,
        nodes: sidecar.nodes.into_iter().map(|n| (n.node_id.clone(), n)).collect(),
        edges,
        objects: sidecar.objects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::network_from_edges;

    #[test]
    fn tsv_round_trip_is_exact() {
        let cn = network_from_edges("x", &[("a", "b", 0.75), ("b", "c", 0.25), ("a", "c", 1.0)]);
        let text = network_to_tsv(&cn.edges);
        assert_eq!(text, "a\tb\t0.75\na\tc\t1\nb\tc\t0.25\n");
        let parsed = network_from_tsv(&text).unwrap();
        assert_eq!(parsed, cn.edges);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cn = network_from_edges("net1", &[("a", "b", 0.5), ("b", "c", 0.75)]);
        write_network(dir.path(), &cn).unwrap();
        let back = read_network(dir.path(), "net1").unwrap();
        assert_eq!(back, cn);
    }
}
