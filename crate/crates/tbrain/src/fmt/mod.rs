//! On-disk formats.
//!
//! Text formats are UTF-8 TSV with LF line endings; every writer emits a
//! canonical ordering so that write, read and write again is byte-identical.
//! Parsers never panic on malformed input: every violation surfaces as a
//! parse error naming the file, line and field.
//!
//! - [`vocab`]: `concepts.tsv` (`name<TAB>kind`) and `predicates.tsv`.
//! - [`triples`]: triple lists (`s<TAB>p<TAB>o`, names) and temporal lists
//!   with a trailing time column.
//! - [`feat`]: the TB-FEAT box-feature exchange format.
//! - [`model`]: the TBRAIN1 binary model format.
//! - [`config`]: strict JSON configs; unknown keys are rejected.
//! - [`world`]: a world directory bundling all of the above.
//! - [`results`]: result tables, run manifests and training logs.

pub mod config;
pub mod feat;
pub mod model;
pub mod results;
pub mod triples;
pub mod vocab;
pub mod world;

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Non-empty lines of a TSV document with their 1-based numbers.
pub(crate) fn tsv_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.is_empty())
}

/// Shortest round-trip decimal for an `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub(crate) fn parse_f64(file: &str, line: usize, field: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(file, line, field, format!("not a decimal float: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(file, line, field, "float must be finite"));
    }
    Ok(v)
}

pub(crate) fn parse_u32(file: &str, line: usize, field: &str, s: &str) -> Result<u32> {
    s.parse()
        .map_err(|_| Error::parse(file, line, field, format!("not an unsigned integer: {s:?}")))
}
