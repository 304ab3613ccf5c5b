//! Knowledge-graph compilation: causal networks plus scene context become a
//! quad set with reified causal relations, under one of three subgraph
//! structures of increasing expressivity:
//!
//! - `C`   — causal quads only (causes / causedBy / causesType / causedByType)
//! - `CT`  — C plus `rdf:type` quads for every causal entity
//! - `CTP` — CT plus scene membership, participants, and object properties

mod io;

pub use io::{entity_classes_to_tsv, quads_from_tsv, quads_to_tsv, read_kg, write_kg};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{CausalNetwork, EdgeMap};
use crate::ingest::Lexicon;

/// Subgraph structure of a compiled knowledge graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubgraphTag {
    C,
    CT,
    CTP,
}

impl SubgraphTag {
    pub const ALL: [SubgraphTag; 3] = [SubgraphTag::C, SubgraphTag::CT, SubgraphTag::CTP];

    pub fn as_str(self) -> &'static str {
        match self {
            SubgraphTag::C => "C",
            SubgraphTag::CT => "CT",
            SubgraphTag::CTP => "CTP",
        }
    }

    fn includes_types(self) -> bool {
        matches!(self, SubgraphTag::CT | SubgraphTag::CTP)
    }

    fn includes_context(self) -> bool {
        matches!(self, SubgraphTag::CTP)
    }
}

impl fmt::Display for SubgraphTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The closed relation vocabulary: four causal relations, four named
/// contextual relations, and two reserved configurable slots — ten total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationVocabulary {
    pub reserved: [String; 2],
}

impl RelationVocabulary {
    pub const CAUSES: &'static str = "causes";
    pub const CAUSED_BY: &'static str = "causedBy";
    pub const CAUSES_TYPE: &'static str = "causesType";
    pub const CAUSED_BY_TYPE: &'static str = "causedByType";
    pub const RDF_TYPE: &'static str = "rdf:type";
    pub const INCLUDES: &'static str = "so:includes";
    pub const HAS_PARTICIPANT: &'static str = "so:hasParticipant";
    pub const HAS_PROPERTY: &'static str = "ssn:hasProperty";

    pub fn causal(&self) -> [&str; 4] {
        [Self::CAUSES, Self::CAUSED_BY, Self::CAUSES_TYPE, Self::CAUSED_BY_TYPE]
    }

    pub fn contextual(&self) -> [&str; 6] {
        [
            Self::RDF_TYPE,
            Self::INCLUDES,
            Self::HAS_PARTICIPANT,
            Self::HAS_PROPERTY,
            self.reserved[0].as_str(),
            self.reserved[1].as_str(),
        ]
    }

    /// All ten relation labels.
    pub fn all(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.causal().to_vec();
        v.extend(self.contextual());
        v
    }
}

impl Default for RelationVocabulary {
    fn default() -> Self {
        RelationVocabulary {
            reserved: ["reserved:1".to_string(), "reserved:2".to_string()],
        }
    }
}

/// One knowledge-graph statement: head, relation, tail, and a causal weight.
/// Contextual quads always carry weight 1.0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Quad {
    pub head: String,
    pub relation: String,
    pub tail: String,
    pub weight: f64,
}

impl Quad {
    pub fn new(head: impl Into<String>, relation: impl Into<String>, tail: impl Into<String>, weight: f64) -> Quad {
        Quad { head: head.into(), relation: relation.into(), tail: tail.into(), weight }
    }

    pub fn triple(&self) -> (String, String, String) {
        (self.head.clone(), self.relation.clone(), self.tail.clone())
    }
}

impl PartialEq for Quad {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for Quad {}

impl PartialOrd for Quad {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quad {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.head
            .cmp(&other.head)
            .then_with(|| self.relation.cmp(&other.relation))
            .then_with(|| self.tail.cmp(&other.tail))
            .then_with(|| self.weight.total_cmp(&other.weight))
    }
}

/// A compiled causal knowledge graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalKg {
    pub subgraph: SubgraphTag,
    pub quads: BTreeSet<Quad>,
    /// Class label per classed entity (event instances, objects, scenes).
    /// Type entities themselves are unclassed and absent here.
    pub entity_classes: BTreeMap<String, String>,
}

/// Nodes skipped during compilation, with the offending label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompileLog {
    pub skipped_nodes: Vec<(String, String)>,
}

/// Aggregate counts reported for a knowledge graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgStats {
    pub links: usize,
    pub entities: usize,
    pub entity_types: usize,
    pub relations: usize,
}

/// One network to compile, with an optional edge subset override (used to
/// compile only the Markov-train slice of a test graph).
#[derive(Debug, Clone, Copy)]
pub struct CompileUnit<'a> {
    pub network: &'a CausalNetwork,
    pub edges: Option<&'a EdgeMap>,
}

impl<'a> CompileUnit<'a> {
    pub fn whole(network: &'a CausalNetwork) -> CompileUnit<'a> {
        CompileUnit { network, edges: None }
    }

    pub fn subset(network: &'a CausalNetwork, edges: &'a EdgeMap) -> CompileUnit<'a> {
        CompileUnit { network, edges: Some(edges) }
    }

    fn edge_iter(&self) -> impl Iterator<Item = (&String, &String, f64)> {
        let map = self.edges.unwrap_or(&self.network.edges);
        map.iter().map(|((s, d), w)| (s, d, *w))
    }
}

/// Global entity id of an event node.
pub fn event_entity(cn_id: &str, node_id: &str) -> String {
    format!("{cn_id}:{node_id}")
}

/// Global entity id of a scene object.
pub fn object_entity(scene_id: &str, object_id: &str) -> String {
    format!("{scene_id}:{object_id}")
}

/// Compile one or more networks (or edge subsets) into a causal knowledge
/// graph with the requested subgraph structure.
///
/// Every causal edge (a -> b, w) emits four quads at weight w: causes,
/// causedBy, and the two reified type relations. Nodes whose event label is
/// not in the lexicon are skipped and logged. Compilation is deterministic
/// and subgraph-monotone: quads(C) ⊆ quads(CT) ⊆ quads(CTP).
pub fn compile(units: &[CompileUnit<'_>], tag: SubgraphTag, lexicon: &Lexicon) -> (CausalKg, CompileLog) {
    let mut quads: BTreeSet<Quad> = BTreeSet::new();
    let mut entity_classes: BTreeMap<String, String> = BTreeMap::new();
    let mut log = CompileLog::default();

    for unit in units {
        let cn = unit.network;
        let known = |node_id: &String| -> Option<&str> {
            let label = cn.nodes.get(node_id).map(|n| n.event_label.as_str())?;
            lexicon.contains(label).then_some(label)
        };

        // nodes that survive the unknown-label filter
        let mut kept: BTreeMap<&String, &str> = BTreeMap::new();
        for node_id in cn.nodes.keys() {
            match known(node_id) {
                Some(label) => {
                    kept.insert(node_id, label);
                }
                None => {
                    let label = cn.nodes[node_id].event_label.clone();
                    log::warn!("kg: skipping node {}:{node_id} with unknown label `{label}`", cn.cn_id);
                    log.skipped_nodes.push((event_entity(&cn.cn_id, node_id), label));
                }
            }
        }

        for (src, dst, w) in unit.edge_iter() {
            let (Some(src_label), Some(dst_label)) = (kept.get(src), kept.get(dst)) else {
                continue;
            };
            let head = event_entity(&cn.cn_id, src);
            let tail = event_entity(&cn.cn_id, dst);
            quads.insert(Quad::new(&head, RelationVocabulary::CAUSES, &tail, w));
            quads.insert(Quad::new(&tail, RelationVocabulary::CAUSED_BY, &head, w));
            quads.insert(Quad::new(&head, RelationVocabulary::CAUSES_TYPE, *dst_label, w));
            quads.insert(Quad::new(&tail, RelationVocabulary::CAUSED_BY_TYPE, *src_label, w));
            entity_classes.insert(head, (*src_label).to_string());
            entity_classes.insert(tail, (*dst_label).to_string());
        }

        if tag.includes_types() {
            for (node_id, label) in &kept {
                let entity = event_entity(&cn.cn_id, node_id);
                quads.insert(Quad::new(&entity, RelationVocabulary::RDF_TYPE, *label, 1.0));
                entity_classes.insert(entity, (*label).to_string());
            }
        }

        if tag.includes_context() {
            let scene = cn.scene_id.clone();
            entity_classes.insert(scene.clone(), "so:Scene".to_string());
            quads.insert(Quad::new(&scene, RelationVocabulary::RDF_TYPE, "so:Scene", 1.0));
            for (node_id, _) in &kept {
                let entity = event_entity(&cn.cn_id, node_id);
                quads.insert(Quad::new(&scene, RelationVocabulary::INCLUDES, &entity, 1.0));
                for participant in &cn.nodes[*node_id].participants {
                    let obj = object_entity(&cn.scene_id, participant);
                    quads.insert(Quad::new(&entity, RelationVocabulary::HAS_PARTICIPANT, &obj, 1.0));
                }
            }
            for o in &cn.objects {
                let obj = object_entity(&cn.scene_id, &o.object_id);
                quads.insert(Quad::new(&obj, RelationVocabulary::RDF_TYPE, o.shape.class_label(), 1.0));
                quads.insert(Quad::new(&obj, RelationVocabulary::HAS_PROPERTY, format!("color:{}", o.color), 1.0));
                quads.insert(Quad::new(
                    &obj,
                    RelationVocabulary::HAS_PROPERTY,
                    format!("material:{}", o.material),
                    1.0,
                ));
                entity_classes.insert(obj, o.shape.class_label().to_string());
            }
        }
    }

    // classes only matter for entities that actually appear in the graph
    let present = entities_of(&quads);
    entity_classes.retain(|entity, _| present.contains(entity));

    (CausalKg { subgraph: tag, quads, entity_classes }, log)
}

fn entities_of(quads: &BTreeSet<Quad>) -> BTreeSet<&String> {
    quads.iter().flat_map(|q| [&q.head, &q.tail]).collect()
}

impl CausalKg {
    /// Every entity mentioned by any quad, sorted.
    pub fn entities(&self) -> BTreeSet<&String> {
        entities_of(&self.quads)
    }

    /// Relations in use, sorted.
    pub fn relations(&self) -> BTreeSet<&String> {
        self.quads.iter().map(|q| &q.relation).collect()
    }

    /// Quads using one of the four causal relations.
    pub fn causal_quads(&self) -> impl Iterator<Item = &Quad> {
        self.quads.iter().filter(|q| {
            matches!(
                q.relation.as_str(),
                RelationVocabulary::CAUSES
                    | RelationVocabulary::CAUSED_BY
                    | RelationVocabulary::CAUSES_TYPE
                    | RelationVocabulary::CAUSED_BY_TYPE
            )
        })
    }

    /// Exact counts of distinct quads, entities, entity classes in use, and
    /// relations in use.
    pub fn stats(&self) -> KgStats {
        let classes: BTreeSet<&String> = self
            .entity_classes
            .values()
            .collect();
        KgStats {
            links: self.quads.len(),
            entities: self.entities().len(),
            entity_types: classes.len(),
            relations: self.relations().len(),
        }
    }

    /// Scan the inverse-closure invariant: every causes quad has its
    /// causedBy mirror at the same weight, and vice versa. Returns the
    /// violations.
    pub fn inverse_closure_violations(&self) -> Vec<&Quad> {
        self.quads
            .iter()
            .filter(|q| {
                let mirror = match q.relation.as_str() {
                    RelationVocabulary::CAUSES => {
                        Quad::new(&q.tail, RelationVocabulary::CAUSED_BY, &q.head, q.weight)
                    }
                    RelationVocabulary::CAUSED_BY => {
                        Quad::new(&q.tail, RelationVocabulary::CAUSES, &q.head, q.weight)
                    }
                    _ => return false,
                };
                !self.quads.contains(&mirror)
            })
            .collect()
    }

    /// Scan the reification-closure invariant: every (a, causes, b, w) has
    /// (a, causesType, class(b), w) and (b, causedByType, class(a), w).
    pub fn reification_closure_violations(&self) -> Vec<&Quad> {
        self.quads
            .iter()
            .filter(|q| q.relation == RelationVocabulary::CAUSES)
            .filter(|q| {
                let (Some(head_class), Some(tail_class)) =
                    (self.entity_classes.get(&q.head), self.entity_classes.get(&q.tail))
                else {
                    return true;
                };
                let reified_cause =
                    Quad::new(&q.head, RelationVocabulary::CAUSES_TYPE, tail_class, q.weight);
                let reified_effect =
                    Quad::new(&q.tail, RelationVocabulary::CAUSED_BY_TYPE, head_class, q.weight);
                !(self.quads.contains(&reified_cause) && self.quads.contains(&reified_effect))
            })
            .collect()
    }
}
