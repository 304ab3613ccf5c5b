//! Backdoor paths and adjustment sets.
//!
//! A backdoor path for an ordered pair (cause, effect) is a simple path in
//! the undirected skeleton whose first traversed edge points into the cause
//! and whose last points into the effect. It carries confounding (non-causal)
//! association between the endpoints. No collider blocking is applied: the
//! criterion here is purely structural.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CausalNetwork, EdgeKey, GraphError};

/// Endpoint orientation rule for path enumeration.
///
/// `BothEnds` requires an incoming edge at the cause and at the effect.
/// `CauseOnly` is the classical variant that constrains only the cause end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointRule {
    BothEnds,
    CauseOnly,
}

/// Which adjustment set to use when eliminating backdoor influence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackdoorVariant {
    /// Backdoor parents of the cause: the minimal entry points.
    Sufficient,
    /// All interior nodes of all backdoor paths (children of the cause
    /// excluded).
    Maximum,
}

/// One backdoor path, recorded as its node sequence plus the graph edges
/// traversed (in graph orientation, not traversal orientation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackdoorPath {
    pub cause: String,
    pub effect: String,
    /// cause, interior..., effect
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeKey>,
}

impl BackdoorPath {
    /// Nodes strictly between the endpoints.
    pub fn interior(&self) -> &[String] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// A blocking node set for one (cause, effect) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackdoorSet {
    pub cause: String,
    pub effect: String,
    pub members: BTreeSet<String>,
    pub variant: BackdoorVariant,
}

/// Enumerate every backdoor path of length at most `max_len` edges for the
/// pair, under the both-ends rule. Paths are emitted in lexicographic order
/// of their node sequence.
pub fn enumerate_backdoor_paths(
    cn: &CausalNetwork,
    cause: &str,
    effect: &str,
    max_len: usize,
) -> Result<Vec<BackdoorPath>, GraphError> {
    enumerate_backdoor_paths_with(cn, cause, effect, max_len, EndpointRule::BothEnds)
}

/// [`enumerate_backdoor_paths`] with an explicit endpoint rule.
pub fn enumerate_backdoor_paths_with(
    cn: &CausalNetwork,
    cause: &str,
    effect: &str,
    max_len: usize,
    rule: EndpointRule,
) -> Result<Vec<BackdoorPath>, GraphError> {
    for node in [cause, effect] {
        if !cn.contains_node(node) {
            return Err(GraphError::NodeNotFound(node.to_string()));
        }
    }
    if max_len < 2 {
        return Err(GraphError::InvalidMaxLen(max_len));
    }

    let mut found = Vec::new();
    let mut nodes = vec![cause.to_string()];
    let mut edges: Vec<EdgeKey> = Vec::new();
    let mut visited: BTreeSet<String> = BTreeSet::from([cause.to_string()]);
    walk(cn, cause, effect, max_len, rule, &mut nodes, &mut edges, &mut visited, &mut found);
    Ok(found)
}

// Sorted undirected neighbors of `node`; `inbound` says the connecting
// edge points into `node`.
fn neighbors(cn: &CausalNetwork, node: &str) -> Vec<(String, bool)> {
    let mut out: Vec<(String, bool)> = Vec::new();
    for (src, dst) in cn.edges.keys() {
        if src == node {
            out.push((dst.clone(), false));
        } else if dst == node {
            out.push((src.clone(), true));
        }
    }
    out.sort();
    out
}

#[allow(clippy::too_many_arguments)]
fn walk(
    cn: &CausalNetwork,
    current: &str,
    effect: &str,
    max_len: usize,
    rule: EndpointRule,
    nodes: &mut Vec<String>,
    edges: &mut Vec<EdgeKey>,
    visited: &mut BTreeSet<String>,
    found: &mut Vec<BackdoorPath>,
) {
    if edges.len() == max_len {
        return;
    }
    let first_step = edges.is_empty();
    for (next, inbound_at_current) in neighbors(cn, current) {
        // the first traversed edge must point into the cause
        if first_step && !inbound_at_current {
            continue;
        }
        if visited.contains(&next) {
            continue;
        }
        // edge in graph orientation
        let edge: EdgeKey = if inbound_at_current {
            (next.clone(), current.to_string())
        } else {
            (current.to_string(), next.clone())
        };
        if next == effect {
            // the last traversed edge must point into the effect; the edge
            // enters `next` exactly when it leaves `current`
            let enters_effect = !inbound_at_current;
            if enters_effect || rule == EndpointRule::CauseOnly {
                let mut path_nodes = nodes.clone();
                path_nodes.push(next.clone());
                let mut path_edges = edges.clone();
                path_edges.push(edge);
                found.push(BackdoorPath {
                    cause: nodes[0].clone(),
                    effect: effect.to_string(),
                    nodes: path_nodes,
                    edges: path_edges,
                });
            }
            continue;
        }
        nodes.push(next.clone());
        edges.push(edge);
        visited.insert(next.clone());
        walk(cn, &next, effect, max_len, rule, nodes, edges, visited, found);
        visited.remove(&next);
        edges.pop();
        nodes.pop();
    }
}

fn default_max_len(cn: &CausalNetwork) -> usize {
    cn.nodes.len().max(2)
}

/// The sufficient backdoor set: direct parents of the cause that lie on
/// some backdoor path of the pair. Deleting their entry edges into the
/// cause closes every backdoor path.
pub fn sufficient_backdoor_set(
    cn: &CausalNetwork,
    cause: &str,
    effect: &str,
) -> Result<BackdoorSet, GraphError> {
    let paths = enumerate_backdoor_paths(cn, cause, effect, default_max_len(cn))?;
    let parents: BTreeSet<&str> = cn.parents(cause).into_iter().collect();
    let mut members = BTreeSet::new();
    for p in &paths {
        for node in p.interior() {
            if parents.contains(node.as_str()) {
                members.insert(node.clone());
            }
        }
    }
    Ok(BackdoorSet {
        cause: cause.to_string(),
        effect: effect.to_string(),
        members,
        variant: BackdoorVariant::Sufficient,
    })
}

/// The maximum backdoor set: every interior node of every backdoor path,
/// excluding children of the cause. Always a superset of the sufficient set.
pub fn maximum_backdoor_set(
    cn: &CausalNetwork,
    cause: &str,
    effect: &str,
) -> Result<BackdoorSet, GraphError> {
    let paths = enumerate_backdoor_paths(cn, cause, effect, default_max_len(cn))?;
    let children: BTreeSet<&str> = cn.children(cause).into_iter().collect();
    let mut members = BTreeSet::new();
    for p in &paths {
        for node in p.interior() {
            if !children.contains(node.as_str()) {
                members.insert(node.clone());
            }
        }
    }
    Ok(BackdoorSet {
        cause: cause.to_string(),
        effect: effect.to_string(),
        members,
        variant: BackdoorVariant::Maximum,
    })
}

/// Edges that would be deleted by [`remove_backdoor_edges`], computed
/// against the original network for every pair at once.
pub fn backdoor_removal_edges(
    cn: &CausalNetwork,
    pairs: &[(String, String)],
    variant: BackdoorVariant,
) -> Result<BTreeSet<EdgeKey>, GraphError> {
    let mut removal: BTreeSet<EdgeKey> = BTreeSet::new();
    for (cause, effect) in pairs {
        match variant {
            BackdoorVariant::Sufficient => {
                let set = sufficient_backdoor_set(cn, cause, effect)?;
                for p in set.members {
                    removal.insert((p, cause.clone()));
                }
            }
            BackdoorVariant::Maximum => {
                let paths = enumerate_backdoor_paths(cn, cause, effect, default_max_len(cn))?;
                for path in paths {
                    for (src, dst) in path.edges {
                        // edges shared with a directed causal path from the
                        // cause to the effect are preserved
                        let on_causal_path = cn.reaches(cause, &src) && cn.reaches(&dst, effect);
                        if !on_causal_path {
                            removal.insert((src, dst));
                        }
                    }
                }
            }
        }
    }
    Ok(removal)
}

/// Delete backdoor-carrying edges for all pairs. Deletions are computed
/// against the original network and applied once, so the outcome does not
/// depend on pair order. The result stays a DAG.
pub fn remove_backdoor_edges(
    cn: &CausalNetwork,
    pairs: &[(String, String)],
    variant: BackdoorVariant,
) -> Result<CausalNetwork, GraphError> {
    let removal = backdoor_removal_edges(cn, pairs, variant)?;
    Ok(cn.without_edges(&removal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::network_from_edges;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn confounder_triple() -> CausalNetwork {
        network_from_edges("t", &[("g", "a", 1.0), ("g", "h", 1.0), ("a", "h", 1.0)])
    }

    #[test]
    fn confounder_triple_has_single_backdoor_path() {
        let cn = confounder_triple();
        let paths = enumerate_backdoor_paths(&cn, "a", "h", 10).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].nodes, vec!["a", "g", "h"]);
        assert_eq!(paths[0].edges, vec![("g".into(), "a".into()), ("g".into(), "h".into())]);
    }

    #[test]
    fn chain_has_no_backdoor_paths() {
        let cn = network_from_edges("c", &[("a", "b", 1.0), ("b", "c", 1.0)]);
        assert!(enumerate_backdoor_paths(&cn, "a", "c", 10).unwrap().is_empty());
    }

    #[test]
    fn missing_endpoint_is_lookup_error() {
        let cn = confounder_triple();
        assert!(matches!(
            enumerate_backdoor_paths(&cn, "a", "zz", 10),
            Err(GraphError::NodeNotFound(_))
        ));
        assert!(matches!(
            enumerate_backdoor_paths(&cn, "a", "h", 1),
            Err(GraphError::InvalidMaxLen(1))
        ));
    }

    #[test]
    fn sufficient_set_confounder_triple() {
        let cn = confounder_triple();
        let set = sufficient_backdoor_set(&cn, "a", "h").unwrap();
        assert_eq!(set.members, BTreeSet::from(["g".to_string()]));
        assert_eq!(set.variant, BackdoorVariant::Sufficient);
    }

    #[test]
    fn sufficient_set_empty_on_chain() {
        let cn = network_from_edges("c", &[("a", "b", 1.0), ("b", "c", 1.0)]);
        assert!(sufficient_backdoor_set(&cn, "a", "c").unwrap().members.is_empty());
    }

    #[test]
    fn sufficient_set_mediated_confounder() {
        // backdoor parent p mediates the root confounder g
        let cn = network_from_edges("m", &[("g", "p", 1.0), ("p", "a", 1.0), ("g", "h", 1.0), ("a", "h", 1.0)]);
        let set = sufficient_backdoor_set(&cn, "a", "h").unwrap();
        assert_eq!(set.members, BTreeSet::from(["p".to_string()]));
        // blocking oracle: every backdoor path contains a member
        let paths = enumerate_backdoor_paths(&cn, "a", "h", 10).unwrap();
        assert!(!paths.is_empty());
        for path in &paths {
            assert!(path.interior().iter().any(|n| set.members.contains(n)));
        }
    }

    #[test]
    fn maximum_set_confounder_triple() {
        let cn = confounder_triple();
        let set = maximum_backdoor_set(&cn, "a", "h").unwrap();
        assert_eq!(set.members, BTreeSet::from(["g".to_string()]));
    }

    #[test]
    fn maximum_set_mediated_confounder() {
        let cn = network_from_edges("m", &[("g", "p", 1.0), ("p", "a", 1.0), ("g", "h", 1.0), ("a", "h", 1.0)]);
        let set = maximum_backdoor_set(&cn, "a", "h").unwrap();
        // interior nodes of a<-p<-g->h
        assert_eq!(set.members, BTreeSet::from(["g".to_string(), "p".to_string()]));
    }

    #[test]
    fn maximum_set_empty_without_backdoor_paths() {
        let cn = network_from_edges("c", &[("a", "b", 1.0), ("b", "c", 1.0)]);
        assert!(maximum_backdoor_set(&cn, "a", "c").unwrap().members.is_empty());
    }

    #[test]
    fn removal_sufficient_deletes_entry_edge_only() {
        let cn = confounder_triple();
        let pairs = vec![("a".to_string(), "h".to_string())];
        let out = remove_backdoor_edges(&cn, &pairs, BackdoorVariant::Sufficient).unwrap();
        // sufficient set {g}; its single incoming edge into the cause goes
        assert!(!out.edges.contains_key(&("g".into(), "a".into())));
        assert!(out.edges.contains_key(&("g".into(), "h".into())));
        assert!(out.edges.contains_key(&("a".into(), "h".into())));
    }

    #[test]
    fn removal_maximum_deletes_path_edges_keeps_causal_edge() {
        let cn = confounder_triple();
        let pairs = vec![("a".to_string(), "h".to_string())];
        let out = remove_backdoor_edges(&cn, &pairs, BackdoorVariant::Maximum).unwrap();
        assert!(!out.edges.contains_key(&("g".into(), "a".into())));
        assert!(!out.edges.contains_key(&("g".into(), "h".into())));
        assert!(out.edges.contains_key(&("a".into(), "h".into())));
    }

    #[test]
    fn removal_without_pairs_is_identity() {
        let cn = confounder_triple();
        let out = remove_backdoor_edges(&cn, &[], BackdoorVariant::Maximum).unwrap();
        assert_eq!(out.edges, cn.edges);
    }

    #[test]
    fn removal_closes_all_paths_for_both_variants() {
        let cn = network_from_edges(
            "m",
            &[("g", "p", 1.0), ("p", "a", 1.0), ("g", "h", 1.0), ("a", "h", 1.0), ("a", "q", 1.0), ("q", "h", 1.0)],
        );
        let pairs = vec![("a".to_string(), "h".to_string())];
        for variant in [BackdoorVariant::Sufficient, BackdoorVariant::Maximum] {
            let out = remove_backdoor_edges(&cn, &pairs, variant).unwrap();
            assert!(enumerate_backdoor_paths(&out, "a", "h", 10).unwrap().is_empty(), "{variant:?}");
            // causal mediation a->q->h survives
            assert!(out.edges.contains_key(&("a".into(), "q".into())), "{variant:?}");
            assert!(out.edges.contains_key(&("q".into(), "h".into())), "{variant:?}");
        }
    }

    #[test]
    fn cause_only_rule_admits_more_paths() {
        // a <- g -> m <- h : under both-ends the last edge h->m leaves h,
        // so the path is rejected; cause-only accepts it.
        let cn = network_from_edges("r", &[("g", "a", 1.0), ("g", "m", 1.0), ("h", "m", 1.0), ("a", "h", 1.0)]);
        let strict = enumerate_backdoor_paths(&cn, "a", "h", 10).unwrap();
        let loose = enumerate_backdoor_paths_with(&cn, "a", "h", 10, EndpointRule::CauseOnly).unwrap();
        assert!(strict.is_empty());
        assert_eq!(loose.len(), 1);
        assert_eq!(loose[0].nodes, vec!["a", "g", "m", "h"]);
    }

    // Brute-force oracle: enumerate every simple path in the undirected
    // skeleton, then keep those whose first edge enters the cause and whose
    // last enters the effect.
    pub(crate) fn oracle_paths(cn: &CausalNetwork, cause: &str, effect: &str, max_len: usize) -> Vec<Vec<String>> {
        fn extend(
            cn: &CausalNetwork,
            effect: &str,
            max_len: usize,
            path: &mut Vec<String>,
            acc: &mut Vec<Vec<String>>,
        ) {
            let current = path.last().unwrap().clone();
            if current == effect {
                acc.push(path.clone());
                return;
            }
            if path.len() - 1 == max_len {
                return;
            }
            let mut nbrs: Vec<String> = cn
                .edges
                .keys()
                .filter_map(|(s, d)| {
                    if s == &current {
                        Some(d.clone())
                    } else if d == &current {
                        Some(s.clone())
                    } else {
                        None
                    }
                })
                .collect();
            nbrs.sort();
            nbrs.dedup();
            for n in nbrs {
                if path.contains(&n) {
                    continue;
                }
                path.push(n);
                extend(cn, effect, max_len, path, acc);
                path.pop();
            }
        }

        let mut all = Vec::new();
        let mut path = vec![cause.to_string()];
        extend(cn, effect, max_len, &mut path, &mut all);
        all.retain(|p| {
            if p.len() < 3 {
                return false;
            }
            let first_in = cn.edges.contains_key(&(p[1].clone(), p[0].clone()));
            let last = p.len() - 1;
            let last_in = cn.edges.contains_key(&(p[last - 1].clone(), p[last].clone()));
            first_in && last_in
        });
        all
    }

    pub(crate) fn random_dag(rng: &mut ChaCha12Rng, n: usize, p: f64) -> CausalNetwork {
        let names: Vec<String> = (0..n).map(|i| format!("n{i:02}")).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(p) {
                    edges.push((names[i].as_str(), names[j].as_str(), 1.0));
                }
            }
        }
        if edges.is_empty() {
            edges.push((names[0].as_str(), names[1].as_str(), 1.0));
        }
        let owned: Vec<(String, String, f64)> =
            edges.iter().map(|(a, b, w)| (a.to_string(), b.to_string(), *w)).collect();
        let borrowed: Vec<(&str, &str, f64)> =
            owned.iter().map(|(a, b, w)| (a.as_str(), b.as_str(), *w)).collect();
        network_from_edges("rand", &borrowed)
    }

    #[test]
    fn enumeration_matches_oracle_on_random_dags() {
        let mut rng = ChaCha12Rng::seed_from_u64(0x0bac_4d00);
        for round in 0..40 {
            let n = rng.gen_range(4..=10);
            let cn = random_dag(&mut rng, n, 0.35);
            let ids: Vec<&String> = cn.nodes.keys().collect();
            for cause in &ids {
                for effect in &ids {
                    if cause == effect {
                        continue;
                    }
                    let got: Vec<Vec<String>> = enumerate_backdoor_paths(&cn, cause, effect, n)
                        .unwrap()
                        .into_iter()
                        .map(|p| p.nodes)
                        .collect();
                    let mut want = oracle_paths(&cn, cause, effect, n);
                    want.sort();
                    let mut got_sorted = got.clone();
                    got_sorted.sort();
                    assert_eq!(got_sorted, want, "round {round}, pair ({cause}, {effect})");
                    // emission order is lexicographic by node sequence
                    assert_eq!(got, got_sorted, "round {round} ordering");
                }
            }
        }
    }

    #[test]
    fn sufficient_subset_of_maximum_on_random_dags() {
        let mut rng = ChaCha12Rng::seed_from_u64(0x5ef5);
        for _ in 0..30 {
            let n = rng.gen_range(4..=10);
            let cn = random_dag(&mut rng, n, 0.4);
            let ids: Vec<String> = cn.nodes.keys().cloned().collect();
            for cause in &ids {
                for effect in &ids {
                    if cause == effect {
                        continue;
                    }
                    let s = sufficient_backdoor_set(&cn, cause, effect).unwrap();
                    let m = maximum_backdoor_set(&cn, cause, effect).unwrap();
                    assert!(s.members.is_subset(&m.members));
                    let children: BTreeSet<&str> = cn.children(cause).into_iter().collect();
                    for member in s.members.iter().chain(m.members.iter()) {
                        assert!(!children.contains(member.as_str()), "member {member} is a child of {cause}");
                    }
                }
            }
        }
    }
}
