//! The four-layer semantic decoder.
//!
//! Information flows through four layers: a sensory buffer `g`, a memoryless
//! representation layer `q` that every other layer communicates through, an
//! index layer holding one unit per concept and predicate, and a recurrent
//! working-memory layer `h`. A triple is decoded in three steps, subject
//! first, then object, then predicate. Each step drives `q` from the current
//! box (plus the working-memory readout after the first step), activates the
//! index layer through the embedding columns, commits a sampled index back
//! into `q`, and folds the step into `h`.
//!
//! The same chain serves three sources of drive:
//!
//! - perception: the `q` input is `D g(box)` per role;
//! - semantic memory: the per-role segments of the time-invariant vector
//!   `a_bar` (or its background counterpart) replace the sensory input;
//! - episodic recall: the segments stored for a past time index replace it.
//!
//! There is also a simple, memoryless decoder that repeatedly samples labels
//! for one box and emits `hasProperty` statements for co-occurring labels.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kg::{ConceptId, PredicateId, Triple, Vocabulary};
use crate::linalg::{add, argmax, axpy, sigmoid_vec, softmax, Mat};
use crate::rng::{categorical, standard_normal};
use crate::sensory::Scene;

/// Layer widths and index ranges of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub n_concepts: usize,
    pub n_predicates: usize,
    pub d_g: usize,
    pub d_q: usize,
    pub d_h: usize,
}

impl ModelDims {
    pub fn n_indices(&self) -> usize {
        self.n_concepts + self.n_predicates
    }
}

/// Per-role representation-layer vectors, each of length `d_q`.
///
/// Used both for the semantic memory embedding and for episodic engrams,
/// which store the concatenated representation split into its subject,
/// predicate and object segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Segments {
    pub sub: Vec<f64>,
    pub pred: Vec<f64>,
    pub obj: Vec<f64>,
}

impl Segments {
    pub fn zeros(d_q: usize) -> Self {
        Segments {
            sub: vec![0.0; d_q],
            pred: vec![0.0; d_q],
            obj: vec![0.0; d_q],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.sub
            .iter()
            .chain(&self.pred)
            .chain(&self.obj)
            .all(|x| x.is_finite())
    }
}

/// Which memory embedding drives a semantic sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemorySource {
    /// The perceptual semantic memory `a_bar`.
    Perceptual,
    /// The background categorical model `a_bar_bg`.
    Background,
}

/// All trainable state of the decoder.
///
/// `embeddings` holds one column per index: concepts `0..n_concepts`, then
/// predicates. With tied weights the same columns serve both directions
/// between the index and representation layers; `untied_commit`, when
/// present, replaces them for the commit (index to representation) direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dims: ModelDims,
    /// `d_q x (n_concepts + n_predicates)`; column `e` is the embedding of index `e`.
    pub embeddings: Mat,
    /// Commit-direction embeddings when the symmetry is relaxed.
    pub untied_commit: Option<Mat>,
    /// Sensory to representation map, `d_q x d_g`.
    pub sensory_map: Mat,
    /// Representation to working memory, `d_h x d_q`.
    pub wm_in: Mat,
    /// Working memory to representation, `d_q x d_h`.
    pub wm_out: Mat,
    /// Working-memory recurrence, `d_h x d_h`.
    pub wm_recur: Mat,
    /// Semantic memory embedding, one segment per role.
    pub semantic: Segments,
    /// Background semantic memory embedding.
    pub background: Segments,
    /// Episodic engrams: time index to stored representation segments.
    pub episodes: BTreeMap<u32, Segments>,
    /// Adds the optional direct recurrence term to working-memory updates.
    pub use_skip: bool,
}

fn gaussian_mat(rows: usize, cols: usize, fan_in: usize, rng: &mut ChaCha8Rng) -> Mat {
    let std = 0.1 / (fan_in as f64).sqrt();
    Mat::from_fn(rows, cols, |_, _| std * standard_normal(rng))
}

impl ModelParams {
    /// Seeded Gaussian initialization, standard deviation `0.1 / sqrt(fan_in)`
    /// per matrix; both memory embeddings start at zero (a uniform prior).
    pub fn init(dims: ModelDims, tie_weights: bool, use_skip: bool, rng: &mut ChaCha8Rng) -> Self {
        let embeddings = gaussian_mat(dims.d_q, dims.n_indices(), dims.d_q, rng);
        let untied_commit = if tie_weights {
            None
        } else {
            Some(gaussian_mat(dims.d_q, dims.n_indices(), dims.d_q, rng))
        };
        ModelParams {
            dims,
            embeddings,
            untied_commit,
            sensory_map: gaussian_mat(dims.d_q, dims.d_g, dims.d_g, rng),
            wm_in: gaussian_mat(dims.d_h, dims.d_q, dims.d_q, rng),
            wm_out: gaussian_mat(dims.d_q, dims.d_h, dims.d_h, rng),
            wm_recur: gaussian_mat(dims.d_h, dims.d_h, dims.d_h, rng),
            semantic: Segments::zeros(dims.d_q),
            background: Segments::zeros(dims.d_q),
            episodes: BTreeMap::new(),
            use_skip,
        }
    }

    pub fn tied(&self) -> bool {
        self.untied_commit.is_none()
    }

    /// Index of predicate `p` in the embedding columns.
    pub fn predicate_column(&self, p: PredicateId) -> usize {
        self.dims.n_concepts + p
    }

    pub(crate) fn check_concept(&self, c: ConceptId) -> Result<()> {
        if c >= self.dims.n_concepts {
            return Err(Error::InvalidIndex(format!(
                "concept {c} outside 0..{}",
                self.dims.n_concepts
            )));
        }
        Ok(())
    }

    pub(crate) fn check_predicate(&self, p: PredicateId) -> Result<()> {
        if p >= self.dims.n_predicates {
            return Err(Error::InvalidIndex(format!(
                "predicate {p} outside 0..{}",
                self.dims.n_predicates
            )));
        }
        Ok(())
    }

    /// Embedding column used when committing index `col` into `q`.
    pub fn commit_embedding(&self, col: usize) -> Vec<f64> {
        match &self.untied_commit {
            Some(m) => m.col(col),
            None => self.embeddings.col(col),
        }
    }

    /// Sensory drive: `x = D g`.
    pub fn rep_from_feature(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.dims.d_g {
            return Err(Error::ShapeMismatch(format!(
                "feature of length {} for d_g {}",
                g.len(),
                self.dims.d_g
            )));
        }
        Ok(self.sensory_map.matvec(g))
    }

    fn check_h(&self, h: &[f64]) -> Result<()> {
        if h.len() != self.dims.d_h {
            return Err(Error::ShapeMismatch(format!(
                "working-memory state of length {} for d_h {}",
                h.len(),
                self.dims.d_h
            )));
        }
        Ok(())
    }

    // --- drive-level steps, shared by perception, semantic and episodic paths ---

    /// Subject step on a representation drive: logits over concepts.
    pub fn subject_logits_drive(&self, x_sub: &[f64]) -> Vec<f64> {
        self.embeddings
            .matvec_t_range(x_sub, 0, self.dims.n_concepts)
    }

    /// Working memory after committing the subject: `sig(V (a_s + x))`.
    pub fn wm_after_subject_drive(&self, s_star: ConceptId, x_sub: &[f64]) -> Result<Vec<f64>> {
        self.check_concept(s_star)?;
        let u = add(&self.commit_embedding(s_star), x_sub);
        Ok(sigmoid_vec(&self.wm_in.matvec(&u)))
    }

    /// Working-memory readout into the representation layer: `W sig(B h)`.
    pub fn memory_readout(&self, h: &[f64]) -> Vec<f64> {
        self.wm_out.matvec(&sigmoid_vec(&self.wm_recur.matvec(h)))
    }

    /// Object step: logits over concepts from `x_obj + W sig(B h_s)`.
    pub fn object_logits_drive(&self, x_obj: &[f64], h_s: &[f64]) -> Result<Vec<f64>> {
        self.check_h(h_s)?;
        let q = add(x_obj, &self.memory_readout(h_s));
        Ok(self.embeddings.matvec_t_range(&q, 0, self.dims.n_concepts))
    }

    /// Working memory after committing the object.
    pub fn wm_after_object_drive(
        &self,
        o_star: ConceptId,
        x_obj: &[f64],
        h_s: &[f64],
    ) -> Result<Vec<f64>> {
        self.check_concept(o_star)?;
        self.check_h(h_s)?;
        let mut u = add(&self.commit_embedding(o_star), &self.memory_readout(h_s));
        axpy(&mut u, 1.0, x_obj);
        let mut z = self.wm_in.matvec(&u);
        if self.use_skip {
            axpy(&mut z, 1.0, &self.wm_recur.matvec(h_s));
        }
        Ok(sigmoid_vec(&z))
    }

    /// Predicate step: logits over predicates from `x_pred + W sig(B h_so)`.
    pub fn predicate_logits_drive(&self, x_pred: &[f64], h_so: &[f64]) -> Result<Vec<f64>> {
        self.check_h(h_so)?;
        let q = add(x_pred, &self.memory_readout(h_so));
        Ok(self
            .embeddings
            .matvec_t_range(&q, self.dims.n_concepts, self.dims.n_indices()))
    }

    /// Final pass after committing the predicate: the integrated triple state
    /// `h_spo` and the representation `q_final` it projects back.
    pub fn integrate_triple_drive(
        &self,
        p_star: PredicateId,
        x_pred: &[f64],
        h_so: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_predicate(p_star)?;
        self.check_h(h_so)?;
        let col = self.predicate_column(p_star);
        let mut u = add(&self.commit_embedding(col), &self.memory_readout(h_so));
        axpy(&mut u, 1.0, x_pred);
        let mut z = self.wm_in.matvec(&u);
        if self.use_skip {
            axpy(&mut z, 1.0, &self.wm_recur.matvec(h_so));
        }
        let h_spo = sigmoid_vec(&z);
        let q_final = self.memory_readout(&h_spo);
        Ok((h_spo, q_final))
    }

    // --- feature-level steps, the perception surface ---

    /// Subject logits from the subject box features.
    pub fn subject_logits(&self, g_sub: &[f64]) -> Result<Vec<f64>> {
        Ok(self.subject_logits_drive(&self.rep_from_feature(g_sub)?))
    }

    pub fn wm_after_subject(&self, s_star: ConceptId, g_sub: &[f64]) -> Result<Vec<f64>> {
        self.wm_after_subject_drive(s_star, &self.rep_from_feature(g_sub)?)
    }

    pub fn object_logits(&self, g_obj: &[f64], h_s: &[f64]) -> Result<Vec<f64>> {
        self.object_logits_drive(&self.rep_from_feature(g_obj)?, h_s)
    }

    pub fn wm_after_object(
        &self,
        o_star: ConceptId,
        g_obj: &[f64],
        h_s: &[f64],
    ) -> Result<Vec<f64>> {
        self.wm_after_object_drive(o_star, &self.rep_from_feature(g_obj)?, h_s)
    }

    pub fn predicate_logits(&self, g_pred: &[f64], h_so: &[f64]) -> Result<Vec<f64>> {
        self.predicate_logits_drive(&self.rep_from_feature(g_pred)?, h_so)
    }

    pub fn integrate_triple(
        &self,
        p_star: PredicateId,
        g_pred: &[f64],
        h_so: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.integrate_triple_drive(p_star, &self.rep_from_feature(g_pred)?, h_so)
    }

    // --- drive construction per source ---

    pub fn drive_from_scene(&self, scene: &Scene) -> Result<Segments> {
        Ok(Segments {
            sub: self.rep_from_feature(&scene.g_sub)?,
            pred: self.rep_from_feature(&scene.g_pred)?,
            obj: self.rep_from_feature(&scene.g_obj)?,
        })
    }

    pub fn drive_semantic(&self, source: MemorySource) -> Segments {
        match source {
            MemorySource::Perceptual => self.semantic.clone(),
            MemorySource::Background => self.background.clone(),
        }
    }

    pub fn drive_episode(&self, t: u32) -> Result<Segments> {
        self.episodes
            .get(&t)
            .cloned()
            .ok_or_else(|| Error::MissingEngram(format!("no episode stored for time {t}")))
    }

    // --- episodic store ---

    /// Store the engram for a scene: the three sensory drives at its time
    /// index. Refuses to overwrite an existing episode.
    pub fn store_episode(&mut self, scene: &Scene) -> Result<u32> {
        if self.episodes.contains_key(&scene.t) {
            return Err(Error::DuplicateEpisode(scene.t));
        }
        let drive = self.drive_from_scene(scene)?;
        self.episodes.insert(scene.t, drive);
        Ok(scene.t)
    }

    /// Store only if the scene is surprising: the greedy triple's negative
    /// log-likelihood must exceed `threshold`.
    pub fn store_episode_if_surprising(
        &mut self,
        scene: &Scene,
        threshold: f64,
    ) -> Result<Option<u32>> {
        let drive = self.drive_from_scene(scene)?;
        let (_, trace) = decode_with_drive(self, &drive, DecodeMode::Greedy, None, None)?;
        if trace.nll() > threshold {
            Ok(Some(self.store_episode(scene)?))
        } else {
            Ok(None)
        }
    }

    /// Copy with the working-memory readout disabled (`W = 0`), which makes
    /// the object and predicate steps exactly box-local.
    pub fn with_memory_disabled(&self) -> ModelParams {
        let mut out = self.clone();
        out.wm_out.fill(0.0);
        out
    }
}

/// How indices are committed at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    /// Draw from each step's categorical distribution.
    Sample,
    /// Take the argmax at each step; deterministic given the parameters.
    Greedy,
}

/// Record of one triple decoding: committed indices, per-step logits and
/// probabilities, the representation before each commitment, the
/// working-memory states, and the integrated triple representation.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderTrace {
    pub triple: Triple,
    pub logits: [Vec<f64>; 3],
    pub probs: [Vec<f64>; 3],
    pub q_steps: [Vec<f64>; 3],
    pub h_states: [Vec<f64>; 3],
    pub q_final: Vec<f64>,
}

impl DecoderTrace {
    /// Negative log-likelihood of the decoded triple under its own chain.
    pub fn nll(&self) -> f64 {
        -(self.probs[0][self.triple.s].ln()
            + self.probs[1][self.triple.o].ln()
            + self.probs[2][self.triple.p].ln())
    }
}

fn commit(mode: DecodeMode, probs: &[f64], rng: Option<&mut ChaCha8Rng>) -> Result<usize> {
    match mode {
        DecodeMode::Greedy => Ok(argmax(probs)),
        DecodeMode::Sample => {
            let rng =
                rng.ok_or_else(|| Error::Config("sampling decode needs a seeded generator".into()))?;
            Ok(categorical(rng, probs))
        }
    }
}

/// Run the three-step chain on a per-role drive.
///
/// `fixed_subject` skips the subject draw and commits the given concept.
pub fn decode_with_drive(
    params: &ModelParams,
    drive: &Segments,
    mode: DecodeMode,
    fixed_subject: Option<ConceptId>,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<(Triple, DecoderTrace)> {
    let logits_s = params.subject_logits_drive(&drive.sub);
    let probs_s = softmax(&logits_s);
    let s = match fixed_subject {
        Some(s) => {
            params.check_concept(s)?;
            s
        }
        None => commit(mode, &probs_s, rng.as_deref_mut())?,
    };
    let h_s = params.wm_after_subject_drive(s, &drive.sub)?;

    let logits_o = params.object_logits_drive(&drive.obj, &h_s)?;
    let probs_o = softmax(&logits_o);
    let o = commit(mode, &probs_o, rng.as_deref_mut())?;
    let h_so = params.wm_after_object_drive(o, &drive.obj, &h_s)?;

    let logits_p = params.predicate_logits_drive(&drive.pred, &h_so)?;
    let probs_p = softmax(&logits_p);
    let p = commit(mode, &probs_p, rng.as_deref_mut())?;
    let (h_spo, q_final) = params.integrate_triple_drive(p, &drive.pred, &h_so)?;

    let triple = Triple::new(s, p, o);
    let q_obj_step = add(&drive.obj, &params.memory_readout(&h_s));
    let q_pred_step = add(&drive.pred, &params.memory_readout(&h_so));
    Ok((
        triple,
        DecoderTrace {
            triple,
            logits: [logits_s, logits_o, logits_p],
            probs: [probs_s, probs_o, probs_p],
            q_steps: [drive.sub.clone(), q_obj_step, q_pred_step],
            h_states: [h_s, h_so, h_spo],
            q_final,
        },
    ))
}

/// Recompute the trace of an already committed triple. Together with
/// [`decode_with_drive`] this shows that every recorded activation is a
/// function of the parameters, the drive and the committed indices alone.
pub fn replay_trace(params: &ModelParams, drive: &Segments, triple: Triple) -> Result<DecoderTrace> {
    params.check_concept(triple.s)?;
    params.check_concept(triple.o)?;
    params.check_predicate(triple.p)?;
    let logits_s = params.subject_logits_drive(&drive.sub);
    let h_s = params.wm_after_subject_drive(triple.s, &drive.sub)?;
    let logits_o = params.object_logits_drive(&drive.obj, &h_s)?;
    let h_so = params.wm_after_object_drive(triple.o, &drive.obj, &h_s)?;
    let logits_p = params.predicate_logits_drive(&drive.pred, &h_so)?;
    let (h_spo, q_final) = params.integrate_triple_drive(triple.p, &drive.pred, &h_so)?;
    let q_obj_step = add(&drive.obj, &params.memory_readout(&h_s));
    let q_pred_step = add(&drive.pred, &params.memory_readout(&h_so));
    Ok(DecoderTrace {
        triple,
        probs: [softmax(&logits_s), softmax(&logits_o), softmax(&logits_p)],
        logits: [logits_s, logits_o, logits_p],
        q_steps: [drive.sub.clone(), q_obj_step, q_pred_step],
        h_states: [h_s, h_so, h_spo],
        q_final,
    })
}

/// Chatterbox decoding of a scene: a bag of sampled triples reduced to a
/// deduplicated set. Greedy mode yields exactly one triple.
pub fn decode_scene(
    params: &ModelParams,
    scene: &Scene,
    n_samples: usize,
    mode: DecodeMode,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<BTreeSet<Triple>> {
    if n_samples == 0 {
        return Err(Error::Config("decode needs n_samples >= 1".into()));
    }
    let drive = params.drive_from_scene(scene)?;
    let mut out = BTreeSet::new();
    let rounds = match mode {
        DecodeMode::Greedy => 1,
        DecodeMode::Sample => n_samples,
    };
    for _ in 0..rounds {
        let (triple, _) = decode_with_drive(params, &drive, mode, None, rng.as_deref_mut())?;
        out.insert(triple);
    }
    Ok(out)
}

/// One semantic-memory sample through the same chain, with the sensory drive
/// replaced segment-wise by the chosen memory embedding.
pub fn sample_semantic(
    params: &ModelParams,
    source: MemorySource,
    fixed_subject: Option<ConceptId>,
    rng: &mut ChaCha8Rng,
) -> Result<Triple> {
    let drive = params.drive_semantic(source);
    let (triple, _) =
        decode_with_drive(params, &drive, DecodeMode::Sample, fixed_subject, Some(rng))?;
    Ok(triple)
}

/// Replay the engram stored at time `t` through the decoding chain.
pub fn recall_episodic(
    params: &ModelParams,
    t: u32,
    n_samples: usize,
    mode: DecodeMode,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<BTreeSet<Triple>> {
    if n_samples == 0 {
        return Err(Error::Config("recall needs n_samples >= 1".into()));
    }
    let drive = params.drive_episode(t)?;
    let mut out = BTreeSet::new();
    let rounds = match mode {
        DecodeMode::Greedy => 1,
        DecodeMode::Sample => n_samples,
    };
    for _ in 0..rounds {
        let (triple, _) = decode_with_drive(params, &drive, mode, None, rng.as_deref_mut())?;
        out.insert(triple);
    }
    Ok(out)
}

/// The simple decoder: repeatedly sample concept labels from the subject
/// step on one box and state `(s1, hasProperty, s2)` for every ordered pair
/// of distinct labels seen. Never touches working memory.
pub fn simple_decode(
    params: &ModelParams,
    vocab: &Vocabulary,
    g_box: &[f64],
    n_samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BTreeSet<Triple>> {
    let has_property = vocab
        .has_property()
        .ok_or_else(|| Error::Config("vocabulary has no hasProperty predicate".into()))?;
    if n_samples == 0 {
        return Err(Error::Config("simple decode needs n_samples >= 1".into()));
    }
    let probs = softmax(&params.subject_logits(g_box)?);
    let mut seen: BTreeSet<ConceptId> = BTreeSet::new();
    for _ in 0..n_samples {
        seen.insert(categorical(rng, &probs));
    }
    let mut out = BTreeSet::new();
    for &a in &seen {
        for &b in &seen {
            if a != b {
                out.insert(Triple::new(a, has_property, b));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::ConceptKind;
    use crate::rng::rng_from;

    fn small_dims() -> ModelDims {
        ModelDims {
            n_concepts: 5,
            n_predicates: 3,
            d_g: 4,
            d_q: 6,
            d_h: 7,
        }
    }

    fn seeded_params(seed: u64) -> ModelParams {
        ModelParams::init(small_dims(), true, false, &mut rng_from(seed))
    }

    fn seeded_drive(params: &ModelParams, seed: u64) -> Segments {
        let mut rng = rng_from(seed);
        let mut mk = || {
            (0..params.dims.d_q)
                .map(|_| standard_normal(&mut rng))
                .collect::<Vec<f64>>()
        };
        Segments {
            sub: mk(),
            pred: mk(),
            obj: mk(),
        }
    }

    #[test]
    fn zero_input_gives_uniform_subject_distribution() {
        let params = seeded_params(1);
        let logits = params.subject_logits(&vec![0.0; 4]).unwrap();
        assert!(logits.iter().all(|&l| l == 0.0));
        let probs = softmax(&logits);
        for p in &probs {
            assert!((p - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn self_matching_embedding_wins_the_subject_step() {
        // Orthonormal embedding columns: drive equal to column k makes k the
        // argmax.
        let mut params = seeded_params(2);
        params.embeddings.fill(0.0);
        for i in 0..5 {
            params.embeddings.set(i, i, 1.0);
        }
        let x = params.embeddings.col(3);
        let logits = params.subject_logits_drive(&x);
        assert_eq!(argmax(&logits), 3);
    }

    #[test]
    fn softmax_outputs_normalize_on_seeded_params() {
        let params = seeded_params(3);
        let drive = seeded_drive(&params, 30);
        let (_, trace) = decode_with_drive(&params, &drive, DecodeMode::Greedy, None, None).unwrap();
        for probs in &trace.probs {
            let sum: f64 = probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn zero_wm_in_pins_working_memory_at_half() {
        let mut params = seeded_params(4);
        params.wm_in.fill(0.0);
        params.use_skip = false;
        let g = vec![0.3, -0.2, 0.1, 0.9];
        let h = params.wm_after_subject(2, &g).unwrap();
        assert!(h.iter().all(|&v| v == 0.5));
        let h2 = params.wm_after_object(1, &g, &h).unwrap();
        assert!(h2.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn working_memory_stays_in_the_open_unit_interval() {
        let params = seeded_params(5);
        let g = vec![1.5, -2.0, 0.7, 0.2];
        let h = params.wm_after_subject(0, &g).unwrap();
        assert!(h.iter().all(|&v| v > 0.0 && v < 1.0));
        let h2 = params.wm_after_object(4, &g, &h).unwrap();
        assert!(h2.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn zero_readout_reduces_object_step_to_subject_step() {
        let mut params = seeded_params(6);
        params.wm_out.fill(0.0);
        let g = vec![0.4, 0.1, -0.3, 0.8];
        let h = params.wm_after_subject(1, &g).unwrap();
        let object = params.object_logits(&g, &h).unwrap();
        let subject = params.subject_logits(&g).unwrap();
        assert_eq!(object, subject);
    }

    #[test]
    fn object_step_closed_form_with_zero_recurrence() {
        // g_obj = 0 and B = 0 leave q = 0.5 * (W 1).
        let mut params = seeded_params(7);
        params.wm_recur.fill(0.0);
        let h = vec![0.3; 7];
        let logits = params.object_logits(&vec![0.0; 4], &h).unwrap();
        let q: Vec<f64> = params.wm_out.matvec(&vec![0.5; 7]);
        let expected = params.embeddings.matvec_t_range(&q, 0, 5);
        for (a, b) in logits.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn predicate_logits_depend_only_on_the_box_without_memory() {
        let mut params = seeded_params(8);
        params.wm_out.fill(0.0);
        let g = vec![0.2, -0.5, 0.3, 0.1];
        let h_a = vec![0.9; 7];
        let h_b = vec![0.1; 7];
        let a = params.predicate_logits(&g, &h_a).unwrap();
        let b = params.predicate_logits(&g, &h_b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn swapping_subject_and_object_changes_predicate_logits() {
        let params = seeded_params(9);
        let drive = seeded_drive(&params, 90);
        let forward = replay_trace(&params, &drive, Triple::new(0, 1, 3)).unwrap();
        let swapped = replay_trace(&params, &drive, Triple::new(3, 1, 0)).unwrap();
        assert_ne!(forward.logits[2], swapped.logits[2]);
    }

    #[test]
    fn greedy_decode_is_deterministic_and_single() {
        let params = seeded_params(10);
        let drive = seeded_drive(&params, 100);
        let (a, _) = decode_with_drive(&params, &drive, DecodeMode::Greedy, None, None).unwrap();
        let (b, _) = decode_with_drive(&params, &drive, DecodeMode::Greedy, None, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fixed_subject_is_honored_in_every_sample() {
        let params = seeded_params(11);
        let drive = seeded_drive(&params, 110);
        let mut rng = rng_from(7);
        for _ in 0..50 {
            let (t, _) =
                decode_with_drive(&params, &drive, DecodeMode::Sample, Some(2), Some(&mut rng))
                    .unwrap();
            assert_eq!(t.s, 2);
        }
    }

    #[test]
    fn dominant_semantic_segment_forces_the_subject() {
        let mut params = seeded_params(12);
        let target = params.embeddings.col(4);
        params.semantic.sub = target.iter().map(|v| v * 1e4).collect();
        let mut rng = rng_from(1);
        for _ in 0..20 {
            let t = sample_semantic(&params, MemorySource::Perceptual, None, &mut rng).unwrap();
            assert_eq!(t.s, 4);
        }
    }

    #[test]
    fn traces_replay_exactly() {
        let params = seeded_params(13);
        let drive = seeded_drive(&params, 130);
        let mut rng = rng_from(5);
        let (triple, trace) =
            decode_with_drive(&params, &drive, DecodeMode::Sample, None, Some(&mut rng)).unwrap();
        let replayed = replay_trace(&params, &drive, triple).unwrap();
        for step in 0..3 {
            for (a, b) in trace.q_steps[step].iter().zip(&replayed.q_steps[step]) {
                assert!((a - b).abs() <= 1e-12);
            }
            for (a, b) in trace.h_states[step].iter().zip(&replayed.h_states[step]) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
        assert_eq!(trace.q_final, replayed.q_final);
    }

    #[test]
    fn episodes_store_once_and_recall_greedily() {
        let mut params = seeded_params(14);
        let mut rng = rng_from(3);
        let g: Vec<f64> = (0..4).map(|_| standard_normal(&mut rng)).collect();
        let scene = Scene {
            t: 9,
            subject_labels: BTreeSet::from([0]),
            object_labels: BTreeSet::from([1]),
            predicates: BTreeSet::from([0]),
            g_sub: g.clone(),
            g_pred: g.clone(),
            g_obj: g,
        };
        let t = params.store_episode(&scene).unwrap();
        assert_eq!(t, 9);
        // Stored segments are exactly the sensory drives.
        let drive = params.drive_from_scene(&scene).unwrap();
        assert_eq!(params.episodes[&9], drive);
        assert!(matches!(
            params.store_episode(&scene),
            Err(Error::DuplicateEpisode(9))
        ));

        let at_storage = decode_scene(&params, &scene, 1, DecodeMode::Greedy, None).unwrap();
        let recalled = recall_episodic(&params, 9, 1, DecodeMode::Greedy, None).unwrap();
        assert_eq!(at_storage, recalled);
        assert!(matches!(
            recall_episodic(&params, 10, 1, DecodeMode::Greedy, None),
            Err(Error::MissingEngram(_))
        ));
    }

    #[test]
    fn simple_decode_pairs_cooccurring_labels() {
        let vocab = Vocabulary::new(
            vec![
                ("jack".into(), ConceptKind::Entity),
                ("happy".into(), ConceptKind::Attribute),
                ("mary".into(), ConceptKind::Entity),
            ],
            vec!["knows".into(), "hasProperty".into()],
        )
        .unwrap();
        let dims = ModelDims {
            n_concepts: 3,
            n_predicates: 2,
            d_g: 4,
            d_q: 4,
            d_h: 4,
        };
        let mut params = ModelParams::init(dims, true, false, &mut rng_from(0));
        // Two strong labels on the same box.
        params.embeddings.fill(0.0);
        params.embeddings.set(0, 0, 10.0);
        params.embeddings.set(1, 1, 10.0);
        params.sensory_map.fill(0.0);
        params.sensory_map.set(0, 0, 1.0);
        params.sensory_map.set(1, 1, 1.0);
        let g = vec![1.0, 1.0, 0.0, 0.0];
        let mut rng = rng_from(2);
        let facts = simple_decode(&params, &vocab, &g, 200, &mut rng).unwrap();
        assert!(facts.contains(&Triple::new(0, 1, 1)));
        assert!(facts.contains(&Triple::new(1, 1, 0)));
        // Perturbing the memory path cannot change the outcome.
        let mut perturbed = params.clone();
        perturbed.wm_in.fill(3.0);
        perturbed.wm_out.fill(-2.0);
        perturbed.wm_recur.fill(1.0);
        let mut rng = rng_from(2);
        assert_eq!(
            simple_decode(&perturbed, &vocab, &g, 200, &mut rng).unwrap(),
            facts
        );
    }

    #[test]
    fn simple_decode_on_a_dominant_label_is_empty() {
        let vocab = Vocabulary::new(
            vec![
                ("a".into(), ConceptKind::Entity),
                ("b".into(), ConceptKind::Entity),
            ],
            vec!["hasProperty".into()],
        )
        .unwrap();
        let dims = ModelDims {
            n_concepts: 2,
            n_predicates: 1,
            d_g: 2,
            d_q: 2,
            d_h: 2,
        };
        let mut params = ModelParams::init(dims, true, false, &mut rng_from(0));
        params.embeddings.fill(0.0);
        params.embeddings.set(0, 0, 100.0);
        params.sensory_map.fill(0.0);
        params.sensory_map.set(0, 0, 1.0);
        let mut rng = rng_from(4);
        let facts = simple_decode(&params, &vocab, &[1.0, 0.0], 100, &mut rng).unwrap();
        assert!(facts.is_empty());
    }

    #[test]
    fn tied_weights_share_the_embedding_storage() {
        let params = seeded_params(15);
        assert!(params.tied());
        for col in 0..params.dims.n_indices() {
            assert_eq!(params.commit_embedding(col), params.embeddings.col(col));
        }
        let untied = ModelParams::init(small_dims(), false, false, &mut rng_from(16));
        assert!(!untied.tied());
        assert_ne!(untied.commit_embedding(0), untied.embeddings.col(0));
    }
}
