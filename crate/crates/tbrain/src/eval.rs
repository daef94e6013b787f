//! Recall@K evaluation tasks.
//!
//! Predictions are ranked by the product of the three chain probabilities,
//! which is the model's joint probability of the triple; ties break in
//! canonical index order so every run is deterministic. Ground-truth sets
//! are deduplicated, and scenes with empty truth are excluded and counted.
//!
//! Tasks:
//!
//! - predicate detection: true subject and object committed, rank predicates;
//! - phrase detection: rank whole triples over a beam of subject-object pairs;
//! - zero-shot variants of both, restricted to triples unseen in training;
//! - the working-memory ablation, which re-runs a task with the memory
//!   readout zeroed;
//! - semantic recall: per-subject ranking of continuations under the
//!   semantic memory embedding, without any sensory input.

use std::collections::BTreeSet;

use crate::decoder::{MemorySource, ModelParams, Segments};
use crate::error::{Error, Result};
use crate::kg::{ConceptId, Triple};
use crate::linalg::softmax;
use crate::sensory::Scene;

/// Ranked triple predictions for one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPredictions {
    /// `(triple, score)` sorted by descending score, deduplicated.
    pub items: Vec<(Triple, f64)>,
}

impl RankedPredictions {
    pub fn from_scored(mut items: Vec<(Triple, f64)>) -> Self {
        items.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        items.dedup_by_key(|(t, _)| *t);
        RankedPredictions { items }
    }

    pub fn top_k(&self, k: usize) -> impl Iterator<Item = Triple> + '_ {
        self.items.iter().take(k).map(|(t, _)| *t)
    }
}

/// Outcome of a recall computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecallResult {
    pub recall: f64,
    pub scenes_used: usize,
    pub scenes_skipped: usize,
}

/// Mean over scenes of `|truth ∩ topK| / |truth|`. Scenes with empty truth
/// are excluded and reported in `scenes_skipped`.
pub fn recall_at_k(
    predictions: &[RankedPredictions],
    truths: &[BTreeSet<Triple>],
    k: usize,
) -> Result<RecallResult> {
    if k == 0 {
        return Err(Error::Config("recall needs k >= 1".into()));
    }
    if predictions.len() != truths.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} prediction lists for {} truth sets",
            predictions.len(),
            truths.len()
        )));
    }
    let mut total = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for (preds, truth) in predictions.iter().zip(truths) {
        if truth.is_empty() {
            skipped += 1;
            continue;
        }
        let top: BTreeSet<Triple> = preds.top_k(k).collect();
        let hit = truth.iter().filter(|t| top.contains(t)).count();
        total += hit as f64 / truth.len() as f64;
        used += 1;
    }
    if used == 0 {
        return Err(Error::NotApplicable(
            "no scene with nonempty ground truth".into(),
        ));
    }
    Ok(RecallResult {
        recall: total / used as f64,
        scenes_used: used,
        scenes_skipped: skipped,
    })
}

/// Restriction applied to ground truth before scoring.
#[derive(Debug, Clone, Copy)]
pub enum TruthFilter<'a> {
    All,
    /// Keep only triples in the given set.
    Within(&'a BTreeSet<Triple>),
}

impl TruthFilter<'_> {
    fn apply(&self, truth: BTreeSet<Triple>) -> BTreeSet<Triple> {
        match self {
            TruthFilter::All => truth,
            TruthFilter::Within(set) => truth.intersection(set).copied().collect(),
        }
    }
}

fn predicate_probs_for_pair(
    params: &ModelParams,
    drive: &Segments,
    s: ConceptId,
    o: ConceptId,
) -> Result<Vec<f64>> {
    let h_s = params.wm_after_subject_drive(s, &drive.sub)?;
    let h_so = params.wm_after_object_drive(o, &drive.obj, &h_s)?;
    Ok(softmax(&params.predicate_logits_drive(&drive.pred, &h_so)?))
}

/// Predicate detection: for every true triple the subject and object are
/// committed and the predicates ranked. A triple counts as recalled when its
/// predicate is in the top `k` of its own pair ranking.
pub fn predicate_detection(
    params: &ModelParams,
    scenes: &[Scene],
    k: usize,
    filter: TruthFilter<'_>,
) -> Result<RecallResult> {
    if k == 0 {
        return Err(Error::Config("recall needs k >= 1".into()));
    }
    let mut total = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for scene in scenes {
        let truth = filter.apply(scene.truth_triples());
        if truth.is_empty() {
            skipped += 1;
            continue;
        }
        let drive = params.drive_from_scene(scene)?;
        let mut hit = 0usize;
        for triple in &truth {
            let probs = predicate_probs_for_pair(params, &drive, triple.s, triple.o)?;
            let mut order: Vec<usize> = (0..probs.len()).collect();
            order.sort_by(|&a, &b| {
                probs[b]
                    .partial_cmp(&probs[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            if order.iter().take(k).any(|&p| p == triple.p) {
                hit += 1;
            }
        }
        total += hit as f64 / truth.len() as f64;
        used += 1;
    }
    if used == 0 {
        return Err(Error::NotApplicable(
            "no scene with ground truth after filtering".into(),
        ));
    }
    Ok(RecallResult {
        recall: total / used as f64,
        scenes_used: used,
        scenes_skipped: skipped,
    })
}

/// Full-triple predictions for one scene: subject-object pairs are beamed by
/// `P(s) P(o|s)`, then every predicate is scored, and triples are ranked by
/// the chain product.
pub fn phrase_predictions(
    params: &ModelParams,
    scene: &Scene,
    beam: usize,
) -> Result<RankedPredictions> {
    let drive = params.drive_from_scene(scene)?;
    let n_c = params.dims.n_concepts;
    let p_subject = softmax(&params.subject_logits_drive(&drive.sub));

    let mut pairs: Vec<(ConceptId, ConceptId, f64, Vec<f64>)> = Vec::new();
    for s in 0..n_c {
        let h_s = params.wm_after_subject_drive(s, &drive.sub)?;
        let p_object = softmax(&params.object_logits_drive(&drive.obj, &h_s)?);
        for (o, po) in p_object.iter().enumerate() {
            pairs.push((s, o, p_subject[s] * po, h_s.clone()));
        }
    }
    pairs.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| (a.0, a.1).cmp(&(b.0, b.1)))
    });
    pairs.truncate(beam.max(1));

    let mut scored = Vec::new();
    for (s, o, pair_score, h_s) in &pairs {
        let h_so = params.wm_after_object_drive(*o, &drive.obj, h_s)?;
        let p_pred = softmax(&params.predicate_logits_drive(&drive.pred, &h_so)?);
        for (p, pp) in p_pred.iter().enumerate() {
            scored.push((Triple::new(*s, p, *o), pair_score * pp));
        }
    }
    Ok(RankedPredictions::from_scored(scored))
}

/// Phrase detection over a scene list.
pub fn phrase_detection(
    params: &ModelParams,
    scenes: &[Scene],
    k: usize,
    beam: usize,
    filter: TruthFilter<'_>,
) -> Result<RecallResult> {
    let mut predictions = Vec::with_capacity(scenes.len());
    let mut truths = Vec::with_capacity(scenes.len());
    for scene in scenes {
        predictions.push(phrase_predictions(params, scene, beam)?);
        truths.push(filter.apply(scene.truth_triples()));
    }
    recall_at_k(&predictions, &truths, k)
}

/// Evaluation task selector for zero-shot and ablation wrappers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Predicate,
    Phrase,
}

/// Default beam width for phrase detection.
pub const DEFAULT_BEAM: usize = 50;

/// Recall restricted to ground-truth triples from the zero-shot set.
pub fn zero_shot_eval(
    params: &ModelParams,
    scenes: &[Scene],
    zero_shot: &BTreeSet<Triple>,
    k: usize,
    task: Task,
) -> Result<RecallResult> {
    if zero_shot.is_empty() {
        return Err(Error::NotApplicable(
            "this world has no zero-shot triples".into(),
        ));
    }
    let filter = TruthFilter::Within(zero_shot);
    match task {
        Task::Predicate => predicate_detection(params, scenes, k, filter),
        Task::Phrase => phrase_detection(params, scenes, k, DEFAULT_BEAM, filter),
    }
}

/// Re-run a task with the working-memory readout zeroed (the simple-decoder
/// ablation).
pub fn ablation_dir(
    params: &ModelParams,
    scenes: &[Scene],
    k: usize,
    task: Task,
) -> Result<RecallResult> {
    let ablated = params.with_memory_disabled();
    match task {
        Task::Predicate => predicate_detection(&ablated, scenes, k, TruthFilter::All),
        Task::Phrase => phrase_detection(&ablated, scenes, k, DEFAULT_BEAM, TruthFilter::All),
    }
}

/// Subject-step recall under an ablation: fraction of scenes whose top-1
/// subject prediction is a true subject label. The subject step never reads
/// working memory, so this must agree exactly between the full and ablated
/// models.
pub fn subject_recall_at_1(params: &ModelParams, scenes: &[Scene]) -> Result<f64> {
    if scenes.is_empty() {
        return Err(Error::NotApplicable("no scenes".into()));
    }
    let mut hits = 0usize;
    for scene in scenes {
        let logits = params.subject_logits(&scene.g_sub)?;
        let best = crate::linalg::argmax(&logits);
        if scene.subject_labels.contains(&best) {
            hits += 1;
        }
    }
    Ok(hits as f64 / scenes.len() as f64)
}

/// Semantic-memory recall: group the triple stream by subject, rank all
/// `(o, p)` continuations of each subject by `P(o|s) P(p|s,o)` under the
/// memory drive, and average per-subject recall of the true continuations.
pub fn semantic_recall(
    params: &ModelParams,
    triples: &BTreeSet<Triple>,
    k: usize,
    source: MemorySource,
) -> Result<f64> {
    if triples.is_empty() {
        return Err(Error::NotApplicable("no triples to recall".into()));
    }
    if k == 0 {
        return Err(Error::Config("recall needs k >= 1".into()));
    }
    let drive = params.drive_semantic(source);
    let n_c = params.dims.n_concepts;
    let subjects: BTreeSet<ConceptId> = triples.iter().map(|t| t.s).collect();

    let mut total = 0.0;
    for s in &subjects {
        let h_s = params.wm_after_subject_drive(*s, &drive.sub)?;
        let p_object = softmax(&params.object_logits_drive(&drive.obj, &h_s)?);
        let mut scored: Vec<(Triple, f64)> = Vec::with_capacity(n_c * params.dims.n_predicates);
        for o in 0..n_c {
            let h_so = params.wm_after_object_drive(o, &drive.obj, &h_s)?;
            let p_pred = softmax(&params.predicate_logits_drive(&drive.pred, &h_so)?);
            for (p, pp) in p_pred.iter().enumerate() {
                scored.push((Triple::new(*s, p, o), p_object[o] * pp));
            }
        }
        let ranked = RankedPredictions::from_scored(scored);
        let top: BTreeSet<Triple> = ranked.top_k(k).collect();
        let truth: Vec<&Triple> = triples.iter().filter(|t| t.s == *s).collect();
        let hit = truth.iter().filter(|t| top.contains(t)).count();
        total += hit as f64 / truth.len() as f64;
    }
    Ok(total / subjects.len() as f64)
}
