//! Causal networks: weighted DAGs repaired from causal event graphs, plus
//! the backdoor-path machinery used to de-confound link prediction.

mod backdoor;
mod io;

pub use backdoor::{
    enumerate_backdoor_paths, enumerate_backdoor_paths_with, maximum_backdoor_set,
    remove_backdoor_edges, sufficient_backdoor_set, BackdoorPath, BackdoorSet, BackdoorVariant,
    EndpointRule,
};
pub use io::{network_from_tsv, network_to_tsv, read_network, write_network};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{CausalEventGraph, EventNode, SceneObject};

/// Directed edge key: (source node, destination node).
pub type EdgeKey = (String, String);

/// Weighted edge set keyed by (src, dst); deterministic iteration order.
pub type EdgeMap = BTreeMap<EdgeKey, f64>;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node `{0}` not found in network")]
    NodeNotFound(String),
    #[error("max_len {0} too small, backdoor paths have at least 2 edges")]
    InvalidMaxLen(usize),
}

/// Why a causal event graph failed DAG repair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// No nodes or no edges survive score filtering and cycle breaking.
    EmptyAfterFiltering,
    /// Longest root-to-leaf path is shorter than two levels.
    DepthTooShallow,
}

/// Rejection outcome for graphs that cannot become causal networks.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("degenerate network {ceg_id}: {reason:?}")]
pub struct Degenerate {
    pub ceg_id: String,
    pub reason: RejectReason,
}

impl Degenerate {
    /// The tag used when rejections are reported.
    pub fn tag(&self) -> &'static str {
        "degenerate"
    }
}

/// A validated causal network: a weighted DAG over event nodes, carrying
/// the scene context needed later for knowledge-graph compilation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalNetwork {
    pub cn_id: String,
    pub scene_id: String,
    /// Node payloads keyed by node id.
    pub nodes: BTreeMap<String, EventNode>,
    /// Directed weighted edges; weights lie in (0, 1].
    pub edges: EdgeMap,
    /// Scene objects referenced by node participants.
    pub objects: Vec<SceneObject>,
}

impl CausalNetwork {
    pub fn contains_node(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// Direct parents of `node`, sorted.
    pub fn parents(&self, node: &str) -> Vec<&str> {
        self.edges
            .keys()
            .filter(|(_, dst)| dst == node)
            .map(|(src, _)| src.as_str())
            .collect()
    }

    /// Direct children of `node`, sorted.
    pub fn children(&self, node: &str) -> Vec<&str> {
        self.edges
            .keys()
            .filter(|(src, _)| src == node)
            .map(|(_, dst)| dst.as_str())
            .collect()
    }

    /// True when `from` reaches `to` along directed edges (including
    /// `from == to`).
    pub fn reaches(&self, from: &str, to: &str) -> bool {
        if from == to {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([from.to_string()]);
        while let Some(u) = queue.pop_front() {
            for child in self.children(&u) {
                if child == to {
                    return true;
                }
                if seen.insert(child.to_string()) {
                    queue.push_back(child.to_string());
                }
            }
        }
        false
    }

    /// Length in edges of the longest directed path.
    pub fn depth(&self) -> usize {
        longest_path_len(&self.edges)
    }

    /// A copy with the given edges removed; nodes and context are kept.
    pub fn without_edges(&self, removed: &BTreeSet<EdgeKey>) -> CausalNetwork {
        let mut out = self.clone();
        out.edges.retain(|key, _| !removed.contains(key));
        out
    }
}

/// Map an annotator score in [1,5] onto a causal weight. Score 1 means no
/// causal connection and maps to 0 (the edge is dropped before network
/// construction); 2..5 map to 0.25..1.0.
pub fn score_to_weight(score: u8) -> f64 {
    f64::from(score.saturating_sub(1)) / 4.0
}

/// Repair a composite-filtered causal event graph into a causal network:
/// drop score-1 edges, map scores to weights, break cycles, and reject
/// graphs that end up empty or shallower than two levels.
///
/// Duplicate scored edges for the same (src, dst) keep the highest weight.
pub fn build_network(ceg: &CausalEventGraph) -> Result<CausalNetwork, Degenerate> {
    let mut weighted: EdgeMap = BTreeMap::new();
    for e in &ceg.edges {
        if e.score <= 1 {
            continue;
        }
        let w = score_to_weight(e.score);
        let entry = weighted.entry((e.src.clone(), e.dst.clone())).or_insert(0.0);
        if w > *entry {
            *entry = w;
        }
    }

    let edges = break_cycles(&weighted);
    if ceg.nodes.is_empty() || edges.is_empty() {
        return Err(Degenerate { ceg_id: ceg.ceg_id.clone(), reason: RejectReason::EmptyAfterFiltering });
    }
    if longest_path_len(&edges) < 2 {
        return Err(Degenerate { ceg_id: ceg.ceg_id.clone(), reason: RejectReason::DepthTooShallow });
    }

    Ok(CausalNetwork {
        cn_id: ceg.ceg_id.clone(),
        scene_id: ceg.scene_id.clone(),
        nodes: ceg.nodes.iter().map(|n| (n.node_id.clone(), n.clone())).collect(),
        edges,
        objects: ceg.objects.clone(),
    })
}

/// Deterministic cycle breaking: edges are inserted in (descending weight,
/// then lexicographic (src, dst)) order, skipping any edge that would close
/// a cycle. Acyclic inputs come back unchanged.
pub fn break_cycles(edges: &EdgeMap) -> EdgeMap {
    let mut order: Vec<(&EdgeKey, &f64)> = edges.iter().collect();
    order.sort_by(|(ka, wa), (kb, wb)| {
        wb.total_cmp(wa).then_with(|| ka.cmp(kb))
    });

    let mut kept: EdgeMap = BTreeMap::new();
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for ((src, dst), w) in order {
        if reaches_in(&adjacency, dst, src) {
            continue; // would close a cycle
        }
        adjacency.entry(src.as_str()).or_default().push(dst.as_str());
        kept.insert((src.clone(), dst.clone()), *w);
    }
    kept
}

fn reaches_in(adjacency: &BTreeMap<&str, Vec<&str>>, from: &str, to: &str) -> bool {
    if from == to {
        return true;
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        if let Some(next) = adjacency.get(u) {
            for &v in next {
                if v == to {
                    return true;
                }
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
    }
    false
}

/// Longest directed path length (in edges) of an acyclic edge set.
fn longest_path_len(edges: &EdgeMap) -> usize {
    let mut indegree: BTreeMap<&str, usize> = BTreeMap::new();
    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (src, dst) in edges.keys() {
        indegree.entry(src).or_insert(0);
        *indegree.entry(dst).or_insert(0) += 1;
        out.entry(src).or_default().push(dst);
        out.entry(dst).or_default();
    }
    let mut depth: BTreeMap<&str, usize> = BTreeMap::new();
    let mut queue: VecDeque<&str> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut best = 0;
    while let Some(u) = queue.pop_front() {
        let du = *depth.get(u).unwrap_or(&0);
        for &v in &out[u] {
            let dv = depth.entry(v).or_insert(0);
            if du + 1 > *dv {
                *dv = du + 1;
                best = best.max(*dv);
            }
            let deg = indegree.get_mut(v).unwrap();
            *deg -= 1;
            if *deg == 0 {
                queue.push_back(v);
            }
        }
    }
    best
}

#[cfg(test)]
pub(crate) fn network_from_edges(id: &str, edges: &[(&str, &str, f64)]) -> CausalNetwork {
    use crate::ingest::EventNode;
    let mut nodes = BTreeMap::new();
    let mut map: EdgeMap = BTreeMap::new();
    for (src, dst, w) in edges {
        for id in [src, dst] {
            nodes.entry(id.to_string()).or_insert_with(|| EventNode {
                node_id: id.to_string(),
                event_label: "move".to_string(),
                participants: vec![],
                raw_description: None,
            });
        }
        map.insert((src.to_string(), dst.to_string()), *w);
    }
    CausalNetwork {
        cn_id: id.to_string(),
        scene_id: format!("scene-{id}"),
        nodes,
        edges: map,
        objects: vec![],
    }
}
