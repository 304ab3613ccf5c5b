//! Corpus ingestion: parsing, validation, label normalization, and the
//! pre-processing filters applied to causal event graphs before DAG repair.

mod lexicon;

pub use lexicon::{Lexicon, LexiconEntry};

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while reading or validating a corpus file.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON{}: {source}", record_context(*.record))]
    Json {
        record: Option<usize>,
        #[source]
        source: serde_json::Error,
    },
    #[error("record {record} ({id}): field `{field}`: {message}")]
    Validation {
        record: usize,
        id: String,
        field: String,
        message: String,
    },
    #[error("lexicon: {0}")]
    Lexicon(String),
}

fn record_context(record: Option<usize>) -> String {
    match record {
        Some(i) => format!(" in record {i}"),
        None => String::new(),
    }
}

/// Object shape, one of the three simulated solids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    Cube,
    Cylinder,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Sphere, Shape::Cube, Shape::Cylinder];

    /// Class label used when the object is typed in the knowledge graph.
    pub fn class_label(self) -> &'static str {
        match self {
            Shape::Sphere => "so:Sphere",
            Shape::Cube => "so:Cube",
            Shape::Cylinder => "so:Cylinder",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Shape::Sphere => "sphere",
            Shape::Cube => "cube",
            Shape::Cylinder => "cylinder",
        };
        f.write_str(s)
    }
}

/// Object color, a closed eight-value vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Blue,
    Red,
    Yellow,
    Green,
    Purple,
    Gray,
    Cyan,
    Brown,
}

impl Color {
    pub const ALL: [Color; 8] = [
        Color::Blue,
        Color::Red,
        Color::Yellow,
        Color::Green,
        Color::Purple,
        Color::Gray,
        Color::Cyan,
        Color::Brown,
    ];
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Color::Blue => "blue",
            Color::Red => "red",
            Color::Yellow => "yellow",
            Color::Green => "green",
            Color::Purple => "purple",
            Color::Gray => "gray",
            Color::Cyan => "cyan",
            Color::Brown => "brown",
        };
        f.write_str(s)
    }
}

/// Object material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    Metal,
    Rubber,
}

impl Material {
    pub const ALL: [Material; 2] = [Material::Metal, Material::Rubber];
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Material::Metal => "metal",
            Material::Rubber => "rubber",
        };
        f.write_str(s)
    }
}

/// A participating object in a scene.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneObject {
    pub object_id: String,
    pub shape: Shape,
    pub color: Color,
    pub material: Material,
}

/// An event node of a causal event graph.
///
/// `event_label` is a single token; binary events carry two participants,
/// singular events one. `raw_description` is carried verbatim and never
/// parsed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventNode {
    pub node_id: String,
    pub event_label: String,
    #[serde(default)]
    pub participants: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_description: Option<String>,
}

impl EventNode {
    /// A node is composite when its label names more than one event token
    /// (e.g. "collide_and_exit"). Such nodes are excluded before DAG repair.
    pub fn is_composite(&self) -> bool {
        self.event_label
            .split(|c: char| !c.is_ascii_alphabetic())
            .filter(|t| !t.is_empty())
            .filter(|t| *t != "and")
            .count()
            > 1
    }
}

/// An annotator-scored directed edge between two event nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredEdge {
    pub src: String,
    pub dst: String,
    pub score: u8,
}

/// A weighted causal event graph for one scene, pre DAG repair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalEventGraph {
    pub ceg_id: String,
    pub scene_id: String,
    pub objects: Vec<SceneObject>,
    pub nodes: Vec<EventNode>,
    pub edges: Vec<ScoredEdge>,
}

impl CausalEventGraph {
    pub fn node(&self, id: &str) -> Option<&EventNode> {
        self.nodes.iter().find(|n| n.node_id == id)
    }
}

/// Result of normalizing an event label against the lexicon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalizedLabel {
    /// Root form present in the lexicon.
    Known(String),
    /// Suffix-stripped form absent from the lexicon; retained but excluded
    /// from KG compilation.
    Unknown(String),
}

impl NormalizedLabel {
    pub fn as_str(&self) -> &str {
        match self {
            NormalizedLabel::Known(s) | NormalizedLabel::Unknown(s) => s,
        }
    }

    pub fn is_known(&self) -> bool {
        matches!(self, NormalizedLabel::Known(_))
    }
}

/// Reduce a raw event token to its lexicon root form.
///
/// Lowercases, then tries the token and its -ed / -ing / -s strippings
/// (with undoubled-consonant and restored-e variants) against the lexicon.
/// Tokens that match nothing come back as [`NormalizedLabel::Unknown`]
/// carrying the plain suffix-stripped form.
pub fn normalize_event_label(raw: &str, lexicon: &Lexicon) -> NormalizedLabel {
    let token = raw.trim().to_ascii_lowercase();
    for candidate in stem_candidates(&token) {
        if lexicon.contains(&candidate) {
            return NormalizedLabel::Known(candidate);
        }
    }
    NormalizedLabel::Unknown(plain_strip(&token))
}

/// Candidate root forms in match-priority order: the token itself, then
/// progressively stripped variants.
fn stem_candidates(token: &str) -> Vec<String> {
    let mut out = vec![token.to_string()];
    if let Some(base) = token.strip_suffix("ed") {
        // collided -> collide (keep the e), entered -> enter, stopped -> stop
        out.push(format!("{base}e"));
        out.push(base.to_string());
        if let Some(undoubled) = undouble(base) {
            out.push(undoubled);
        }
    }
    if let Some(base) = token.strip_suffix("ing") {
        // exiting -> exit, colliding -> collide, hitting -> hit
        out.push(base.to_string());
        out.push(format!("{base}e"));
        if let Some(undoubled) = undouble(base) {
            out.push(undoubled);
        }
    }
    if let Some(base) = token.strip_suffix("es") {
        out.push(base.to_string());
    }
    if let Some(base) = token.strip_suffix('s') {
        out.push(base.to_string());
    }
    out
}

fn undouble(base: &str) -> Option<String> {
    let mut chars = base.chars().rev();
    let last = chars.next()?;
    let prev = chars.next()?;
    (last == prev).then(|| base[..base.len() - last.len_utf8()].to_string())
}

/// The stripped form reported for unknown tokens: first plain suffix rule
/// that applies, in -ed, -ing, -s order.
fn plain_strip(token: &str) -> String {
    if token.len() > 3 {
        if let Some(base) = token.strip_suffix("ed") {
            return base.to_string();
        }
    }
    if token.len() > 4 {
        if let Some(base) = token.strip_suffix("ing") {
            return base.to_string();
        }
    }
    if token.len() > 2 {
        if let Some(base) = token.strip_suffix('s') {
            return base.to_string();
        }
    }
    token.to_string()
}

/// Parsing behaviour switches.
#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Apply the rule-based normalizer: event labels reduced to lexicon
    /// root forms, known color synonyms (e.g. "gold") mapped to the closed
    /// vocabulary. When off, drifted color names are validation errors and
    /// labels are kept verbatim (lowercased).
    pub normalize: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { normalize: true }
    }
}

// Raw mirror of the corpus schema; colors arrive as free strings so the
// normalizer can repair drifted names before enum validation.
#[derive(Deserialize)]
struct RawObject {
    object_id: String,
    shape: String,
    color: String,
    material: String,
}

#[derive(Deserialize)]
struct RawRecord {
    ceg_id: String,
    scene_id: String,
    #[serde(default)]
    objects: Vec<RawObject>,
    #[serde(default)]
    nodes: Vec<EventNode>,
    #[serde(default)]
    edges: Vec<ScoredEdge>,
}

const COLOR_SYNONYMS: &[(&str, &str)] = &[("gold", "yellow"), ("grey", "gray")];

fn parse_enum_field<T: serde::de::DeserializeOwned>(
    value: &str,
    normalize: bool,
    synonyms: &[(&str, &str)],
) -> Option<T> {
    let mut v = value.trim().to_ascii_lowercase();
    if normalize {
        if let Some((_, canon)) = synonyms.iter().find(|(alias, _)| *alias == v) {
            v = (*canon).to_string();
        }
    }
    serde_json::from_value(serde_json::Value::String(v)).ok()
}

/// Parse a corpus file: a JSON array of causal event graph records.
///
/// Every record is field-validated; the first violation aborts with the
/// record index and field name. Parse order is preserved.
pub fn parse_corpus(path: &Path, lexicon: &Lexicon, opts: ParseOptions) -> Result<Vec<CausalEventGraph>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus_str(&text, lexicon, opts)
}

/// Same as [`parse_corpus`] but over an in-memory JSON string.
pub fn parse_corpus_str(
    text: &str,
    lexicon: &Lexicon,
    opts: ParseOptions,
) -> Result<Vec<CausalEventGraph>, IngestError> {
    let raw: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|source| IngestError::Json { record: None, source })?;

    let mut out = Vec::with_capacity(raw.len());
    for (index, value) in raw.into_iter().enumerate() {
        let record: RawRecord = serde_json::from_value(value)
            .map_err(|source| IngestError::Json { record: Some(index), source })?;
        out.push(validate_record(record, index, lexicon, opts)?);
    }
    Ok(out)
}

fn validate_record(
    raw: RawRecord,
    index: usize,
    lexicon: &Lexicon,
    opts: ParseOptions,
) -> Result<CausalEventGraph, IngestError> {
    let err = |field: &str, message: String| IngestError::Validation {
        record: index,
        id: raw.ceg_id.clone(),
        field: field.to_string(),
        message,
    };

    let mut objects = Vec::with_capacity(raw.objects.len());
    let mut object_ids = BTreeSet::new();
    for o in &raw.objects {
        let shape: Shape = parse_enum_field(&o.shape, opts.normalize, &[])
            .ok_or_else(|| err("shape", format!("unknown shape `{}`", o.shape)))?;
        let color: Color = parse_enum_field(&o.color, opts.normalize, COLOR_SYNONYMS)
            .ok_or_else(|| err("color", format!("unknown color `{}`", o.color)))?;
        let material: Material = parse_enum_field(&o.material, opts.normalize, &[])
            .ok_or_else(|| err("material", format!("unknown material `{}`", o.material)))?;
        if !object_ids.insert(o.object_id.clone()) {
            return Err(err("object_id", format!("duplicate object id `{}`", o.object_id)));
        }
        objects.push(SceneObject { object_id: o.object_id.clone(), shape, color, material });
    }

    let mut nodes = Vec::with_capacity(raw.nodes.len());
    let mut node_ids = BTreeSet::new();
    for n in raw.nodes {
        if !node_ids.insert(n.node_id.clone()) {
            return Err(err("node_id", format!("duplicate node id `{}`", n.node_id)));
        }
        let label = if opts.normalize {
            normalize_event_label(&n.event_label, lexicon).as_str().to_string()
        } else {
            n.event_label.trim().to_ascii_lowercase()
        };
        if n.participants.len() > 2 {
            return Err(err(
                "participants",
                format!("node `{}` has {} participants, at most 2 allowed", n.node_id, n.participants.len()),
            ));
        }
        for p in &n.participants {
            if !object_ids.contains(p) {
                return Err(err(
                    "participants",
                    format!("node `{}` references unknown object `{p}`", n.node_id),
                ));
            }
        }
        if let Some(arity) = lexicon.arity(&label) {
            if !composite_label(&label) && n.participants.len() != arity as usize {
                return Err(err(
                    "participants",
                    format!(
                        "event `{label}` expects {arity} participant(s), node `{}` has {}",
                        n.node_id,
                        n.participants.len()
                    ),
                ));
            }
        } else {
            log::warn!("record {index}: node `{}` keeps unknown event label `{label}`", n.node_id);
        }
        nodes.push(EventNode {
            node_id: n.node_id,
            event_label: label,
            participants: n.participants,
            raw_description: n.raw_description,
        });
    }

    let mut edges = Vec::with_capacity(raw.edges.len());
    for e in raw.edges {
        if !(1..=5).contains(&e.score) {
            return Err(err("score", format!("edge {}->{} score {} outside [1,5]", e.src, e.dst, e.score)));
        }
        if e.src == e.dst {
            return Err(err("edge", format!("self loop on `{}`", e.src)));
        }
        for endpoint in [&e.src, &e.dst] {
            if !node_ids.contains(endpoint) {
                return Err(err("edge", format!("edge references unknown node `{endpoint}`")));
            }
        }
        edges.push(e);
    }

    Ok(CausalEventGraph {
        ceg_id: raw.ceg_id,
        scene_id: raw.scene_id,
        objects,
        nodes,
        edges,
    })
}

fn composite_label(label: &str) -> bool {
    label
        .split(|c: char| !c.is_ascii_alphabetic())
        .filter(|t| !t.is_empty() && *t != "and")
        .count()
        > 1
}

/// Serialize a corpus back to the JSON interchange form.
pub fn write_corpus(path: &Path, cegs: &[CausalEventGraph]) -> Result<(), IngestError> {
    let text = corpus_to_string(cegs);
    std::fs::write(path, text).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn corpus_to_string(cegs: &[CausalEventGraph]) -> String {
    let mut s = serde_json::to_string_pretty(cegs).expect("corpus serialization cannot fail");
    s.push('\n');
    s
}

/// Drop every composite (multi-event) node along with its incident edges.
/// Single-event nodes and their edges are untouched. Idempotent.
pub fn filter_composite_nodes(ceg: &CausalEventGraph) -> CausalEventGraph {
    let removed: BTreeSet<&str> = ceg
        .nodes
        .iter()
        .filter(|n| n.is_composite())
        .map(|n| n.node_id.as_str())
        .collect();
    if removed.is_empty() {
        return ceg.clone();
    }
    CausalEventGraph {
        ceg_id: ceg.ceg_id.clone(),
        scene_id: ceg.scene_id.clone(),
        objects: ceg.objects.clone(),
        nodes: ceg.nodes.iter().filter(|n| !removed.contains(n.node_id.as_str())).cloned().collect(),
        edges: ceg
            .edges
            .iter()
            .filter(|e| !removed.contains(e.src.as_str()) && !removed.contains(e.dst.as_str()))
            .cloned()
            .collect(),
    }
}
