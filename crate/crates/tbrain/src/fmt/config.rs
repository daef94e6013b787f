//! Strict JSON configuration loading. One document per run; unknown keys
//! are rejected so typos fail fast instead of silently defaulting.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sensory::WorldConfig;
use crate::training::TrainConfig;

use super::{read_text, write_text};

pub fn parse_json<T: DeserializeOwned>(text: &str, file: &str) -> Result<T> {
    serde_json::from_str(text)
        .map_err(|e| Error::parse(file, e.line(), "json", e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("config serializes");
    s.push('\n');
    s
}

pub fn parse_world_config(text: &str, file: &str) -> Result<WorldConfig> {
    let cfg: WorldConfig = parse_json(text, file)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_train_config(text: &str, file: &str) -> Result<TrainConfig> {
    let cfg: TrainConfig = parse_json(text, file)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_world_config(path: &Path) -> Result<WorldConfig> {
    parse_world_config(&read_text(path)?, &path.display().to_string())
}

pub fn load_train_config(path: &Path) -> Result<TrainConfig> {
    parse_train_config(&read_text(path)?, &path.display().to_string())
}

pub fn save_world_config(path: &Path, cfg: &WorldConfig) -> Result<()> {
    write_text(path, &to_json(cfg))
}

pub fn world_config_to_string(cfg: &WorldConfig) -> String {
    to_json(cfg)
}
