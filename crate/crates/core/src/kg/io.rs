//! Knowledge-graph files: a quad TSV (`head<TAB>relation<TAB>tail<TAB>weight`,
//! UTF-8, one quad per line) and an entity-class TSV (`entity<TAB>class`).

use std::collections::BTreeSet;
use std::io;
use std::path::Path;

use super::{CausalKg, Quad, SubgraphTag};

pub fn quads_to_tsv(quads: &BTreeSet<Quad>) -> String {
    let mut out = String::new();
    for q in quads {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", q.head, q.relation, q.tail, q.weight));
    }
    out
}

pub fn quads_from_tsv(text: &str) -> io::Result<BTreeSet<Quad>> {
    let mut quads = BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("line {}: expected 4 tab-separated fields", lineno + 1),
            ));
        }
        let weight: f64 = fields[3].parse().map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: bad weight: {e}", lineno + 1))
        })?;
        quads.insert(Quad::new(fields[0], fields[1], fields[2], weight));
    }
    Ok(quads)
}

pub fn entity_classes_to_tsv(kg: &CausalKg) -> String {
    let mut out = String::new();
    for entity in kg.entities() {
        let class = kg.entity_classes.get(entity.as_str()).map(String::as_str).unwrap_or("");
        out.push_str(&format!("{entity}\t{class}\n"));
    }
    out
}

/// Write `<stem>.quads.tsv` and `<stem>.entities.tsv`.
pub fn write_kg(dir: &Path, stem: &str, kg: &CausalKg) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}.quads.tsv")), quads_to_tsv(&kg.quads))?;
    std::fs::write(dir.join(format!("{stem}.entities.tsv")), entity_classes_to_tsv(kg))
}

/// Read a KG written by [`write_kg`]; the subgraph tag is supplied by the
/// caller since the files carry content only.
pub fn read_kg(dir: &Path, stem: &str, tag: SubgraphTag) -> io::Result<CausalKg> {
    let quads = quads_from_tsv(&std::fs::read_to_string(dir.join(format!("{stem}.quads.tsv")))?)?;
    let classes_text = std::fs::read_to_string(dir.join(format!("{stem}.entities.tsv")))?;
    let mut entity_classes = std::collections::BTreeMap::new();
    for line in classes_text.lines().filter(|l| !l.is_empty()) {
        let mut parts = line.split('\t');
        if let (Some(entity), Some(class)) = (parts.next(), parts.next()) {
            if !class.is_empty() {
                entity_classes.insert(entity.to_string(), class.to_string());
            }
        }
    }
    Ok(CausalKg { subgraph: tag, quads, entity_classes })
}
