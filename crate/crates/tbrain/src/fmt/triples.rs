//! Triple lists in TSV. Plain lists hold `s<TAB>p<TAB>o` using vocabulary
//! names so files survive index reordering; temporal lists append a time
//! column. Writers sort canonically by index (and time) so round-trips are
//! byte-identical.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kg::{TemporalKG, Triple, Vocabulary};

use super::{parse_u32, read_text, tsv_lines, write_text};

fn parse_line(
    raw: &str,
    file: &str,
    line: usize,
    vocab: &Vocabulary,
    with_time: bool,
) -> Result<(Triple, Option<u32>)> {
    let fields: Vec<&str> = raw.split('\t').collect();
    let expected = if with_time { 4 } else { 3 };
    if fields.len() != expected {
        return Err(Error::parse(
            file,
            line,
            "columns",
            format!("expected {expected} columns, found {}", fields.len()),
        ));
    }
    let s = vocab
        .concept_index(fields[0])
        .map_err(|e| Error::parse(file, line, "subject", e.to_string()))?;
    let p = vocab
        .predicate_index(fields[1])
        .map_err(|e| Error::parse(file, line, "predicate", e.to_string()))?;
    let o = vocab
        .concept_index(fields[2])
        .map_err(|e| Error::parse(file, line, "object", e.to_string()))?;
    let t = if with_time {
        Some(parse_u32(file, line, "time", fields[3])?)
    } else {
        None
    };
    Ok((Triple::new(s, p, o), t))
}

pub fn parse_triples(text: &str, file: &str, vocab: &Vocabulary) -> Result<Vec<Triple>> {
    let mut out = Vec::new();
    for (line, raw) in tsv_lines(text) {
        out.push(parse_line(raw, file, line, vocab, false)?.0);
    }
    Ok(out)
}

pub fn parse_temporal(text: &str, file: &str, vocab: &Vocabulary) -> Result<Vec<(u32, Triple)>> {
    let mut out = Vec::new();
    for (line, raw) in tsv_lines(text) {
        let (triple, t) = parse_line(raw, file, line, vocab, true)?;
        out.push((t.expect("time column parsed"), triple));
    }
    Ok(out)
}

fn push_names(out: &mut String, vocab: &Vocabulary, t: Triple) -> Result<()> {
    out.push_str(vocab.concept_name(t.s)?);
    out.push('\t');
    out.push_str(vocab.predicate_name(t.p)?);
    out.push('\t');
    out.push_str(vocab.concept_name(t.o)?);
    Ok(())
}

pub fn triples_to_string(
    triples: &BTreeSet<Triple>,
    vocab: &Vocabulary,
) -> Result<String> {
    let mut out = String::new();
    for t in triples {
        push_names(&mut out, vocab, *t)?;
        out.push('\n');
    }
    Ok(out)
}

pub fn temporal_to_string(tkg: &TemporalKG, vocab: &Vocabulary) -> Result<String> {
    let mut out = String::new();
    for (t, triple) in tkg.iter() {
        push_names(&mut out, vocab, triple)?;
        out.push('\t');
        out.push_str(&t.to_string());
        out.push('\n');
    }
    Ok(out)
}

pub fn load_triples(path: &Path, vocab: &Vocabulary) -> Result<Vec<Triple>> {
    parse_triples(&read_text(path)?, &path.display().to_string(), vocab)
}

pub fn load_temporal(path: &Path, vocab: &Vocabulary, n_times: u32) -> Result<TemporalKG> {
    let entries = parse_temporal(&read_text(path)?, &path.display().to_string(), vocab)?;
    let mut tkg = TemporalKG::new(vocab.shape(), n_times);
    for (t, triple) in entries {
        tkg.insert(t, triple)?;
    }
    Ok(tkg)
}

pub fn save_triples(path: &Path, triples: &BTreeSet<Triple>, vocab: &Vocabulary) -> Result<()> {
    write_text(path, &triples_to_string(triples, vocab)?)
}

pub fn save_temporal(path: &Path, tkg: &TemporalKG, vocab: &Vocabulary) -> Result<()> {
    write_text(path, &temporal_to_string(tkg, vocab)?)
}
