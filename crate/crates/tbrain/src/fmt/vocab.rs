//! Vocabulary files: `concepts.tsv` holds `name<TAB>kind` per line, and
//! `predicates.tsv` one predicate name per line. Line order defines the
//! index order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::kg::{ConceptKind, Vocabulary};

use super::{read_text, tsv_lines, write_text};

pub fn parse_concepts(text: &str, file: &str) -> Result<Vec<(String, ConceptKind)>> {
    let mut out = Vec::new();
    for (line, raw) in tsv_lines(text) {
        let mut fields = raw.split('\t');
        let name = fields
            .next()
            .filter(|n| !n.is_empty())
            .ok_or_else(|| Error::parse(file, line, "name", "missing concept name"))?;
        let kind_str = fields
            .next()
            .ok_or_else(|| Error::parse(file, line, "kind", "missing concept kind"))?;
        if fields.next().is_some() {
            return Err(Error::parse(file, line, "kind", "too many columns"));
        }
        let kind = ConceptKind::parse(kind_str).ok_or_else(|| {
            Error::parse(file, line, "kind", format!("unknown kind {kind_str:?}"))
        })?;
        out.push((name.to_string(), kind));
    }
    Ok(out)
}

pub fn parse_predicates(text: &str, file: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (line, raw) in tsv_lines(text) {
        if raw.contains('\t') {
            return Err(Error::parse(file, line, "name", "too many columns"));
        }
        out.push(raw.to_string());
    }
    Ok(out)
}

pub fn concepts_to_string(vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for (name, kind) in vocab.concepts() {
        out.push_str(name);
        out.push('\t');
        out.push_str(kind.as_str());
        out.push('\n');
    }
    out
}

pub fn predicates_to_string(vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for name in vocab.predicates() {
        out.push_str(name);
        out.push('\n');
    }
    out
}

pub fn load(concepts_path: &Path, predicates_path: &Path) -> Result<Vocabulary> {
    let concepts = parse_concepts(
        &read_text(concepts_path)?,
        &concepts_path.display().to_string(),
    )?;
    let predicates = parse_predicates(
        &read_text(predicates_path)?,
        &predicates_path.display().to_string(),
    )?;
    Vocabulary::new(concepts, predicates)
}

pub fn save(vocab: &Vocabulary, concepts_path: &Path, predicates_path: &Path) -> Result<()> {
    write_text(concepts_path, &concepts_to_string(vocab))?;
    write_text(predicates_path, &predicates_to_string(vocab))
}
