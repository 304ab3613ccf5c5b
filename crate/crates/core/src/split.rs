//! Train/test splitting under the local Markov property, and backdoor
//! removal across the split boundary.
//!
//! The corpus splits 80/20 into train and test graphs. Each test graph is
//! further divided: a seeded selection of edges whose head has at least one
//! parent becomes the held-out Markov-test links, and everything else —
//! including every direct-cause edge of each held-out head — stays in the
//! Markov-train set, so a test link's direct causes are always observable
//! in training.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{backdoor_removal_edges, BackdoorVariant, CausalNetwork, EdgeKey, EdgeMap, GraphError};
use crate::util::derive_seed;

/// Default fraction of candidate edges held out per test graph; mirrors the
/// corpus-level 80/20 ratio.
pub const DEFAULT_TEST_LINK_FRACTION: f64 = 0.2;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("ratio {0} outside (0, 1)")]
    InvalidRatio(f64),
    #[error("regimes must be derived from a with_backdoor manifest, got {0:?}")]
    BaseManifestRequired(Regime),
    #[error("manifest references unknown network `{0}`")]
    UnknownNetwork(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("manifest invariant violated: {0}")]
    Invariant(String),
}

/// Backdoor-handling regime of a trained model / manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    WithBackdoor,
    NoSufficient,
    NoMaximum,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::WithBackdoor, Regime::NoSufficient, Regime::NoMaximum];

    /// The adjustment-set variant this regime removes, if any.
    pub fn variant(self) -> Option<BackdoorVariant> {
        match self {
            Regime::WithBackdoor => None,
            Regime::NoSufficient => Some(BackdoorVariant::Sufficient),
            Regime::NoMaximum => Some(BackdoorVariant::Maximum),
        }
    }

    /// Model-name fragment used in output files.
    pub fn model_tag(self) -> &'static str {
        match self {
            Regime::WithBackdoor => "WithBackdoor",
            Regime::NoSufficient => "WithoutSufficientBackdoor",
            Regime::NoMaximum => "WithoutMaximumBackdoor",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::WithBackdoor => "with_backdoor",
            Regime::NoSufficient => "no_sufficient",
            Regime::NoMaximum => "no_maximum",
        }
    }
}

/// Per-test-graph Markov split: training edges and held-out test links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarkovSplitRepr", into = "MarkovSplitRepr")]
pub struct MarkovSplit {
    pub markov_train_edges: EdgeMap,
    pub markov_test_links: Vec<(String, String, f64)>,
}

// Edge sets are serialized as the TSV lines used in the network files.
#[derive(Serialize, Deserialize)]
struct MarkovSplitRepr {
    markov_train_edges: Vec<String>,
    markov_test_links: Vec<String>,
}

fn edge_line(src: &str, dst: &str, w: f64) -> String {
    format!("{src}\t{dst}\t{w}")
}

fn parse_edge_line(line: &str) -> Result<(String, String, f64), String> {
    let mut parts = line.split('\t');
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(s), Some(d), Some(w), None) => {
            let weight: f64 = w.parse().map_err(|e| format!("bad weight in `{line}`: {e}"))?;
            Ok((s.to_string(), d.to_string(), weight))
        }
        _ => Err(format!("expected src\\tdst\\tweight, got `{line}`")),
    }
}

impl From<MarkovSplit> for MarkovSplitRepr {
    fn from(m: MarkovSplit) -> Self {
        MarkovSplitRepr {
            markov_train_edges: m
                .markov_train_edges
                .iter()
                .map(|((s, d), w)| edge_line(s, d, *w))
                .collect(),
            markov_test_links: m
                .markov_test_links
                .iter()
                .map(|(s, d, w)| edge_line(s, d, *w))
                .collect(),
        }
    }
}

impl TryFrom<MarkovSplitRepr> for MarkovSplit {
    type Error = String;

    fn try_from(r: MarkovSplitRepr) -> Result<Self, String> {
        let mut markov_train_edges: EdgeMap = BTreeMap::new();
        for line in &r.markov_train_edges {
            let (s, d, w) = parse_edge_line(line)?;
            markov_train_edges.insert((s, d), w);
        }
        let markov_test_links = r
            .markov_test_links
            .iter()
            .map(|l| parse_edge_line(l))
            .collect::<Result<_, _>>()?;
        Ok(MarkovSplit { markov_train_edges, markov_test_links })
    }
}

/// The complete split of a corpus under one backdoor regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub ratio: f64,
    pub variant: Regime,
    pub train_cegs: Vec<String>,
    pub test_cegs: Vec<String>,
    /// Markov split per test graph, keyed by network id.
    pub markov: BTreeMap<String, MarkovSplit>,
}

impl SplitManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<SplitManifest, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Seeded 80/20-style corpus split: uniform shuffle, first `ceil(ratio * n)`
/// graphs to train. Deterministic for a fixed seed.
pub fn split_corpus(
    networks: &[CausalNetwork],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<String>, Vec<String>), SplitError> {
    if networks.is_empty() {
        return Err(SplitError::EmptyCorpus);
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(SplitError::InvalidRatio(ratio));
    }
    let mut ids: Vec<String> = networks.iter().map(|n| n.cn_id.clone()).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let cut = (ratio * ids.len() as f64).ceil() as usize;
    let test = ids.split_off(cut.min(ids.len()));
    Ok((ids, test))
}

/// Markov split of one network with the default held-out fraction.
pub fn markov_split(cn: &CausalNetwork, seed: u64) -> MarkovSplit {
    markov_split_with(cn, seed, DEFAULT_TEST_LINK_FRACTION)
}

/// Split one network's edges into Markov-train and Markov-test.
///
/// Candidates are edges whose head has at least one parent. A seeded
/// selection of up to `fraction` of the candidates is held out, greedily
/// skipping any edge adjacent head-to-tail with an already selected one so
/// that every held-out head keeps all its direct-cause edges in training.
pub fn markov_split_with(cn: &CausalNetwork, seed: u64, fraction: f64) -> MarkovSplit {
    let heads_with_parents: BTreeSet<&String> = cn.edges.keys().map(|(_, dst)| dst).collect();
    let mut candidates: Vec<EdgeKey> = cn
        .edges
        .keys()
        .filter(|(src, _)| heads_with_parents.contains(src))
        .cloned()
        .collect();

    let cap = (fraction * candidates.len() as f64).ceil() as usize;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    candidates.shuffle(&mut rng);

    let mut selected: BTreeSet<EdgeKey> = BTreeSet::new();
    let mut blocked_heads: BTreeSet<&str> = BTreeSet::new();
    let mut blocked_tails: BTreeSet<&str> = BTreeSet::new();
    for (src, dst) in &candidates {
        if selected.len() == cap {
            break;
        }
        // (p -> src) selected would lose a direct cause of src; (dst -> w)
        // selected would make this edge a missing direct cause of w
        if blocked_tails.contains(src.as_str()) || blocked_heads.contains(dst.as_str()) {
            continue;
        }
        selected.insert((src.clone(), dst.clone()));
        blocked_heads.insert(src);
        blocked_tails.insert(dst);
    }

    let markov_train_edges: EdgeMap = cn
        .edges
        .iter()
        .filter(|(key, _)| !selected.contains(key))
        .map(|(k, w)| (k.clone(), *w))
        .collect();
    let markov_test_links = selected
        .into_iter()
        .map(|(s, d)| {
            let w = cn.edges[&(s.clone(), d.clone())];
            (s, d, w)
        })
        .collect();
    MarkovSplit { markov_train_edges, markov_test_links }
}

/// Build the base (with-backdoor) manifest for a corpus.
pub fn make_manifest(
    networks: &[CausalNetwork],
    ratio: f64,
    seed: u64,
    fraction: f64,
) -> Result<SplitManifest, SplitError> {
    let (train_cegs, test_cegs) = split_corpus(networks, ratio, seed)?;
    let by_id: BTreeMap<&str, &CausalNetwork> =
        networks.iter().map(|n| (n.cn_id.as_str(), n)).collect();
    let mut markov = BTreeMap::new();
    for id in &test_cegs {
        let cn = by_id[id.as_str()];
        markov.insert(id.clone(), markov_split_with(cn, derive_seed(seed, &format!("markov/{id}")), fraction));
    }
    let manifest = SplitManifest {
        seed,
        ratio,
        variant: Regime::WithBackdoor,
        train_cegs,
        test_cegs,
        markov,
    };
    validate_manifest(&manifest, networks)?;
    Ok(manifest)
}

/// Derive a regime manifest from the base one: for every held-out link,
/// remove the chosen backdoor adjustment edges from that graph's
/// Markov-train set. Test links are never deleted. The with-backdoor
/// regime is the identity.
pub fn apply_backdoor_regime(
    manifest: &SplitManifest,
    networks: &[CausalNetwork],
    regime: Regime,
) -> Result<SplitManifest, SplitError> {
    if manifest.variant != Regime::WithBackdoor {
        return Err(SplitError::BaseManifestRequired(manifest.variant));
    }
    let mut out = manifest.clone();
    out.variant = regime;
    let Some(variant) = regime.variant() else {
        return Ok(out);
    };

    let by_id: BTreeMap<&str, &CausalNetwork> =
        networks.iter().map(|n| (n.cn_id.as_str(), n)).collect();
    for (id, split) in &mut out.markov {
        let cn = by_id
            .get(id.as_str())
            .ok_or_else(|| SplitError::UnknownNetwork(id.clone()))?;
        let pairs: Vec<(String, String)> = split
            .markov_test_links
            .iter()
            .map(|(s, d, _)| (s.clone(), d.clone()))
            .collect();
        let removal = backdoor_removal_edges(cn, &pairs, variant)?;
        split.markov_train_edges.retain(|key, _| !removal.contains(key));
    }
    validate_manifest(&out, networks)?;
    Ok(out)
}

/// Check every manifest invariant against the corpus it was built from.
pub fn validate_manifest(manifest: &SplitManifest, networks: &[CausalNetwork]) -> Result<(), SplitError> {
    let train: BTreeSet<&String> = manifest.train_cegs.iter().collect();
    let test: BTreeSet<&String> = manifest.test_cegs.iter().collect();
    if train.intersection(&test).next().is_some() {
        return Err(SplitError::Invariant("train and test graphs overlap".into()));
    }
    let total = train.len() + test.len();
    let want_train = (manifest.ratio * total as f64).ceil() as usize;
    if train.len() != want_train {
        return Err(SplitError::Invariant(format!(
            "train size {} differs from ceil({} * {total}) = {want_train}",
            train.len(),
            manifest.ratio
        )));
    }

    let by_id: BTreeMap<&str, &CausalNetwork> =
        networks.iter().map(|n| (n.cn_id.as_str(), n)).collect();
    for (id, split) in &manifest.markov {
        let cn = by_id
            .get(id.as_str())
            .ok_or_else(|| SplitError::UnknownNetwork(id.clone()))?;
        let pairs: Vec<(String, String)> = split
            .markov_test_links
            .iter()
            .map(|(s, d, _)| (s.clone(), d.clone()))
            .collect();
        let removed = match manifest.variant.variant() {
            Some(v) => backdoor_removal_edges(cn, &pairs, v)?,
            None => BTreeSet::new(),
        };
        for (src, dst, _) in &split.markov_test_links {
            let key = (src.clone(), dst.clone());
            if split.markov_train_edges.contains_key(&key) {
                return Err(SplitError::Invariant(format!("{id}: test link {src}->{dst} leaks into train")));
            }
            // every direct cause of the head still present post-removal
            // must be observable in training
            for (edge, _) in cn.edges.iter().filter(|((_, d), _)| d == src) {
                if removed.contains(edge) {
                    continue;
                }
                if !split.markov_train_edges.contains_key(edge) {
                    return Err(SplitError::Invariant(format!(
                        "{id}: direct cause {}->{} of test head {src} missing from train",
                        edge.0, edge.1
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::network_from_edges;

    fn chain(id: &str) -> CausalNetwork {
        network_from_edges(id, &[("a", "b", 0.75), ("b", "c", 1.0)])
    }

    #[test]
    fn corpus_split_764_at_080_gives_612_152() {
        let networks: Vec<CausalNetwork> = (0..764).map(|i| chain(&format!("g{i:03}"))).collect();
        let (train, test) = split_corpus(&networks, 0.8, 13).unwrap();
        assert_eq!(train.len(), 612);
        assert_eq!(test.len(), 152);
    }

    #[test]
    fn corpus_split_single_network_ceiling() {
        let networks = vec![chain("only")];
        let (train, test) = split_corpus(&networks, 0.8, 1).unwrap();
        assert_eq!(train.len(), 1);
        assert!(test.is_empty());
    }

    #[test]
    fn corpus_split_is_deterministic() {
        let networks: Vec<CausalNetwork> = (0..50).map(|i| chain(&format!("g{i}"))).collect();
        assert_eq!(split_corpus(&networks, 0.8, 42).unwrap(), split_corpus(&networks, 0.8, 42).unwrap());
        assert!(split_corpus(&[], 0.8, 0).is_err());
        assert!(split_corpus(&networks, 1.0, 0).is_err());
    }

    #[test]
    fn markov_split_chain_holds_out_only_parented_head() {
        // only b has a parent, so b->c is the single candidate
        let split = markov_split(&chain("c"), 0);
        assert_eq!(split.markov_test_links, vec![("b".to_string(), "c".to_string(), 1.0)]);
        assert_eq!(split.markov_train_edges.len(), 1);
        assert!(split.markov_train_edges.contains_key(&("a".into(), "b".into())));
    }

    #[test]
    fn markov_split_star_has_no_candidates() {
        let cn = network_from_edges("s", &[("a", "b", 1.0), ("a", "c", 1.0), ("a", "d", 1.0)]);
        let split = markov_split(&cn, 0);
        assert!(split.markov_test_links.is_empty());
        assert_eq!(split.markov_train_edges.len(), 3);
    }

    #[test]
    fn markov_split_diamond_never_selects_root_edges() {
        let cn = network_from_edges(
            "d",
            &[("a", "b", 1.0), ("a", "c", 1.0), ("b", "d", 1.0), ("c", "d", 1.0)],
        );
        for seed in 0..20 {
            let split = markov_split(&cn, seed);
            for (s, d, _) in &split.markov_test_links {
                assert!(s != "a", "root edge {s}->{d} selected");
            }
            assert!(!split.markov_test_links.is_empty());
        }
    }

    #[test]
    fn markov_split_never_selects_adjacent_edges() {
        let cn = network_from_edges(
            "l",
            &[("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0), ("d", "e", 1.0)],
        );
        for seed in 0..50 {
            let split = markov_split_with(&cn, seed, 0.9);
            for (s, _, _) in &split.markov_test_links {
                for (edge, _) in cn.edges.iter().filter(|((_, d), _)| d == s) {
                    assert!(
                        split.markov_train_edges.contains_key(edge),
                        "seed {seed}: direct cause {edge:?} of {s} missing"
                    );
                }
            }
        }
    }

    fn confounder_corpus() -> Vec<CausalNetwork> {
        // 5 graphs so one lands in test deterministically; each is the
        // confounder triple plus padding depth
        (0..5)
            .map(|i| {
                network_from_edges(
                    &format!("g{i}"),
                    &[("g", "a", 1.0), ("g", "h", 1.0), ("a", "h", 0.75), ("h", "z", 0.5)],
                )
            })
            .collect()
    }

    fn manifest_with_test_link(networks: &[CausalNetwork]) -> SplitManifest {
        for seed in 0.. {
            let m = make_manifest(networks, 0.8, seed, 0.5).unwrap();
            let has_ah = m.markov.values().any(|s| {
                s.markov_test_links.iter().any(|(s_, d, _)| s_ == "a" && d == "h")
            });
            if has_ah {
                return m;
            }
        }
        unreachable!()
    }

    #[test]
    fn regime_with_backdoor_is_identity() {
        let networks = confounder_corpus();
        let m = make_manifest(&networks, 0.8, 3, 0.5).unwrap();
        let same = apply_backdoor_regime(&m, &networks, Regime::WithBackdoor).unwrap();
        assert_eq!(m.markov, same.markov);
        assert_eq!(same.variant, Regime::WithBackdoor);
    }

    #[test]
    fn regime_sufficient_removes_confounder_entry_edge() {
        let networks = confounder_corpus();
        let m = manifest_with_test_link(&networks);
        let out = apply_backdoor_regime(&m, &networks, Regime::NoSufficient).unwrap();
        assert_eq!(out.variant, Regime::NoSufficient);
        for (id, split) in &out.markov {
            if split.markov_test_links.iter().any(|(s, d, _)| s == "a" && d == "h") {
                assert!(!split.markov_train_edges.contains_key(&("g".into(), "a".into())), "{id}");
                assert!(split.markov_train_edges.contains_key(&("g".into(), "h".into())), "{id}");
            }
        }
    }

    #[test]
    fn regime_maximum_removes_both_confounder_edges() {
        let networks = confounder_corpus();
        let m = manifest_with_test_link(&networks);
        let out = apply_backdoor_regime(&m, &networks, Regime::NoMaximum).unwrap();
        for (id, split) in &out.markov {
            if split.markov_test_links.iter().any(|(s, d, _)| s == "a" && d == "h") {
                assert!(!split.markov_train_edges.contains_key(&("g".into(), "a".into())), "{id}");
                assert!(!split.markov_train_edges.contains_key(&("g".into(), "h".into())), "{id}");
            }
        }
    }

    #[test]
    fn maximum_removes_superset_of_sufficient() {
        let networks = confounder_corpus();
        let m = manifest_with_test_link(&networks);
        let suff = apply_backdoor_regime(&m, &networks, Regime::NoSufficient).unwrap();
        let max = apply_backdoor_regime(&m, &networks, Regime::NoMaximum).unwrap();
        for id in m.markov.keys() {
            let base: BTreeSet<_> = m.markov[id].markov_train_edges.keys().cloned().collect();
            let s: BTreeSet<_> = suff.markov[id].markov_train_edges.keys().cloned().collect();
            let x: BTreeSet<_> = max.markov[id].markov_train_edges.keys().cloned().collect();
            let removed_s: BTreeSet<_> = base.difference(&s).cloned().collect();
            let removed_x: BTreeSet<_> = base.difference(&x).cloned().collect();
            assert!(removed_s.is_subset(&removed_x), "{id}");
        }
    }

    #[test]
    fn regimes_require_base_manifest() {
        let networks = confounder_corpus();
        let m = make_manifest(&networks, 0.8, 3, 0.5).unwrap();
        let derived = apply_backdoor_regime(&m, &networks, Regime::NoSufficient).unwrap();
        assert!(matches!(
            apply_backdoor_regime(&derived, &networks, Regime::NoMaximum),
            Err(SplitError::BaseManifestRequired(Regime::NoSufficient))
        ));
    }

    #[test]
    fn no_leakage_across_seeds() {
        let networks = confounder_corpus();
        for seed in 0..25 {
            let m = make_manifest(&networks, 0.8, seed, 0.5).unwrap();
            for regime in Regime::ALL {
                let derived = apply_backdoor_regime(&m, &networks, regime).unwrap();
                for split in derived.markov.values() {
                    for (s, d, _) in &split.markov_test_links {
                        assert!(!split.markov_train_edges.contains_key(&(s.clone(), d.clone())));
                    }
                }
            }
        }
    }

    #[test]
    fn manifest_is_pure_function_of_inputs() {
        let networks = confounder_corpus();
        let a = make_manifest(&networks, 0.8, 11, 0.2).unwrap();
        let b = make_manifest(&networks, 0.8, 11, 0.2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
        let reparsed = SplitManifest::from_json(&a.to_json()).unwrap();
        assert_eq!(reparsed, a);
    }
}
