//! World directories.
//!
//! ```text
//! world.json       generator configuration, seed included
//! concepts.tsv     concept names and kinds, index order
//! predicates.tsv   predicate names, index order
//! temporal.tsv     ground-truth statements per time index
//! zero_shot.tsv    statements reserved for test scenes
//! train.feat       TB-FEAT box features of the training scenes
//! test.feat        TB-FEAT box features of the test scenes
//! ```
//!
//! Scene ground truth is not duplicated: a scene's label sets are
//! reconstructed from the temporal graph at its time index, whose statements
//! are exactly the label combinations of the boxes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kg::Triple;
use crate::sensory::{Scene, World};

use super::feat::{self, BoxRole, FeatTable};
use super::{config, triples, vocab};

pub fn save(dir: &Path, world: &World) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    config::save_world_config(&dir.join("world.json"), &world.config)?;
    vocab::save(
        &world.vocabulary,
        &dir.join("concepts.tsv"),
        &dir.join("predicates.tsv"),
    )?;
    triples::save_temporal(&dir.join("temporal.tsv"), &world.temporal, &world.vocabulary)?;
    triples::save_triples(&dir.join("zero_shot.tsv"), &world.zero_shot, &world.vocabulary)?;
    feat::save(&dir.join("train.feat"), &scenes_to_table(&world.train))?;
    feat::save(&dir.join("test.feat"), &scenes_to_table(&world.test))?;
    Ok(())
}

fn scenes_to_table(scenes: &[Scene]) -> FeatTable {
    let mut boxes = BTreeMap::new();
    let mut d_g = 0;
    for scene in scenes {
        d_g = scene.g_sub.len();
        boxes.insert((scene.t, BoxRole::Sub), scene.g_sub.clone());
        boxes.insert((scene.t, BoxRole::Pred), scene.g_pred.clone());
        boxes.insert((scene.t, BoxRole::Obj), scene.g_obj.clone());
    }
    FeatTable { d_g, boxes }
}

fn scenes_from_table(
    table: &FeatTable,
    truth_at: &dyn Fn(u32) -> BTreeSet<Triple>,
    file: &str,
) -> Result<Vec<Scene>> {
    let mut scenes = Vec::new();
    for t in table.scene_ids() {
        let (g_sub, g_pred, g_obj) = table.scene_features(t).ok_or_else(|| {
            Error::parse(file, 0, "role", format!("scene {t} is missing a box role"))
        })?;
        let truth = truth_at(t);
        if truth.is_empty() {
            return Err(Error::parse(
                file,
                0,
                "scene_id",
                format!("scene {t} has no statements in temporal.tsv"),
            ));
        }
        let scene = Scene {
            t,
            subject_labels: truth.iter().map(|tr| tr.s).collect(),
            object_labels: truth.iter().map(|tr| tr.o).collect(),
            predicates: truth.iter().map(|tr| tr.p).collect(),
            g_sub: g_sub.clone(),
            g_pred: g_pred.clone(),
            g_obj: g_obj.clone(),
        };
        scenes.push(scene);
    }
    Ok(scenes)
}

pub fn load(dir: &Path) -> Result<World> {
    let cfg = config::load_world_config(&dir.join("world.json"))?;
    let vocabulary = vocab::load(&dir.join("concepts.tsv"), &dir.join("predicates.tsv"))?;
    let n_times = (cfg.train_scenes + cfg.test_scenes) as u32;
    let temporal = triples::load_temporal(&dir.join("temporal.tsv"), &vocabulary, n_times)?;
    let zero_shot: BTreeSet<Triple> =
        triples::load_triples(&dir.join("zero_shot.tsv"), &vocabulary)?
            .into_iter()
            .collect();

    let load_scenes = |name: &str| -> Result<Vec<Scene>> {
        let path = dir.join(name);
        let table = feat::load(&path)?;
        if table.d_g != cfg.d_g && !table.boxes.is_empty() {
            return Err(Error::parse(
                path.display().to_string(),
                1,
                "d_g",
                format!("feature dimension {} does not match world d_g {}", table.d_g, cfg.d_g),
            ));
        }
        scenes_from_table(
            &table,
            &|t| temporal.at(t).collect(),
            &path.display().to_string(),
        )
    };
    let train = load_scenes("train.feat")?;
    let test = load_scenes("test.feat")?;

    Ok(World {
        config: cfg,
        vocabulary,
        temporal,
        train,
        test,
        zero_shot,
    })
}
