//! TB-FEAT: box-feature exchange format.
//!
//! A UTF-8 text file with the header line `TB-FEAT 1 <d_g>`, then one line
//! per box: `<scene_id><TAB><role><TAB><v1>...<TAB><v_dg>` with role one of
//! `sub`, `pred`, `obj` and decimal float components. Externally computed
//! features (a real vision backbone, for instance) can be plugged in through
//! this format without code changes.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sensory::FeatureVector;

use super::{fmt_f64, parse_f64, parse_u32, read_text, write_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoxRole {
    Sub,
    Pred,
    Obj,
}

impl BoxRole {
    pub fn as_str(self) -> &'static str {
        match self {
            BoxRole::Sub => "sub",
            BoxRole::Pred => "pred",
            BoxRole::Obj => "obj",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "sub" => Some(BoxRole::Sub),
            "pred" => Some(BoxRole::Pred),
            "obj" => Some(BoxRole::Obj),
            _ => None,
        }
    }
}

/// Parsed feature table: per scene, per role, one vector of length `d_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatTable {
    pub d_g: usize,
    pub boxes: BTreeMap<(u32, BoxRole), FeatureVector>,
}

impl FeatTable {
    /// The three role vectors of a scene, if all are present.
    pub fn scene_features(
        &self,
        t: u32,
    ) -> Option<(&FeatureVector, &FeatureVector, &FeatureVector)> {
        Some((
            self.boxes.get(&(t, BoxRole::Sub))?,
            self.boxes.get(&(t, BoxRole::Pred))?,
            self.boxes.get(&(t, BoxRole::Obj))?,
        ))
    }

    pub fn scene_ids(&self) -> impl Iterator<Item = u32> + '_ {
        let mut last = None;
        self.boxes.keys().filter_map(move |(t, _)| {
            if last == Some(*t) {
                None
            } else {
                last = Some(*t);
                Some(*t)
            }
        })
    }
}

pub fn parse(text: &str, file: &str) -> Result<FeatTable> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(file, 1, "header", "empty file"))?;
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 3 || parts[0] != "TB-FEAT" {
        return Err(Error::parse(
            file,
            1,
            "header",
            "expected `TB-FEAT 1 <d_g>`",
        ));
    }
    if parts[1] != "1" {
        return Err(Error::parse(
            file,
            1,
            "version",
            format!("unsupported version {:?}", parts[1]),
        ));
    }
    let d_g = parse_u32(file, 1, "d_g", parts[2])? as usize;
    if d_g == 0 {
        return Err(Error::parse(file, 1, "d_g", "dimension must be positive"));
    }

    let mut boxes = BTreeMap::new();
    for (line, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 2 + d_g {
            return Err(Error::parse(
                file,
                line,
                "columns",
                format!("expected {} columns, found {}", 2 + d_g, fields.len()),
            ));
        }
        let scene = parse_u32(file, line, "scene_id", fields[0])?;
        let role = BoxRole::parse(fields[1]).ok_or_else(|| {
            Error::parse(file, line, "role", format!("unknown role {:?}", fields[1]))
        })?;
        let mut v = Vec::with_capacity(d_g);
        for (i, field) in fields[2..].iter().enumerate() {
            v.push(parse_f64(file, line, &format!("v{}", i + 1), field)?);
        }
        if boxes.insert((scene, role), v).is_some() {
            return Err(Error::parse(
                file,
                line,
                "role",
                format!("duplicate box ({scene}, {})", role.as_str()),
            ));
        }
    }
    Ok(FeatTable { d_g, boxes })
}

pub fn to_string(table: &FeatTable) -> String {
    let mut out = format!("TB-FEAT 1 {}\n", table.d_g);
    for ((scene, role), v) in &table.boxes {
        out.push_str(&scene.to_string());
        out.push('\t');
        out.push_str(role.as_str());
        for x in v {
            out.push('\t');
            out.push_str(&fmt_f64(*x));
        }
        out.push('\n');
    }
    out
}

pub fn load(path: &Path) -> Result<FeatTable> {
    parse(&read_text(path)?, &path.display().to_string())
}

pub fn save(path: &Path, table: &FeatTable) -> Result<()> {
    write_text(path, &to_string(table))
}
