//! Cross-entropy objectives, analytic gradients and the training loops.
//!
//! The teacher-forced cost of a triple is the sum of three negative
//! log-softmax terms, one per decoding step, with the true subject and object
//! committed along the chain. Gradients are backpropagated analytically
//! through the softmax, logistic and linear pieces; the finite-difference
//! oracle in the test suite checks every parameter.
//!
//! Four training modes are provided: supervised perception, self-supervised
//! perception (a Monte Carlo EM loop over the model's own deduplicated
//! samples), semantic-memory adaptation on a triple stream, and semantic
//! adaptation with replay, where samples drawn from the semantic memory
//! itself are interleaved with the new data to counter forgetting.
//!
//! Training is plain stochastic gradient descent with per-batch updates and a
//! fixed reduction order; identical seeds, configs and data give bit-identical
//! parameters.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decoder::{
    decode_scene, decode_with_drive, sample_semantic, DecodeMode, MemorySource, ModelParams,
    Segments,
};
use crate::error::{Error, Result};
use crate::kg::Triple;
use crate::linalg::{axpy, log_sum_exp, sigmoid_vec, softmax, Mat};
use crate::rng::{derive_seed, rng_from, shuffle};
use crate::sensory::Scene;

/// Where the gradient of the per-role drive flows.
#[derive(Debug, Clone, Copy)]
pub enum DriveKind<'a> {
    /// Sensory drive `D g`; gradients flow into the sensory map.
    Perception {
        g_sub: &'a [f64],
        g_pred: &'a [f64],
        g_obj: &'a [f64],
    },
    /// Drive is the semantic memory embedding itself.
    Semantic,
    /// Drive is the background memory embedding.
    Background,
}

/// Parameters that can be excluded from updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamTag {
    Embeddings,
    SensoryMap,
    WmIn,
    WmOut,
    WmRecur,
    Semantic,
    Background,
}

/// Set of frozen parameters. Frozen entries receive zero gradient and are
/// never stepped. The untied commit matrix follows the embeddings tag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FreezeSet {
    pub embeddings: bool,
    pub sensory_map: bool,
    pub wm_in: bool,
    pub wm_out: bool,
    pub wm_recur: bool,
    pub semantic: bool,
    pub background: bool,
}

impl FreezeSet {
    pub fn none() -> Self {
        FreezeSet::default()
    }

    /// Everything frozen except the chosen memory embedding.
    pub fn all_but_memory(source: MemorySource) -> Self {
        FreezeSet {
            embeddings: true,
            sensory_map: true,
            wm_in: true,
            wm_out: true,
            wm_recur: true,
            semantic: source != MemorySource::Perceptual,
            background: source != MemorySource::Background,
        }
    }

    pub fn from_tags(tags: &[ParamTag]) -> Self {
        let mut set = FreezeSet::none();
        for tag in tags {
            match tag {
                ParamTag::Embeddings => set.embeddings = true,
                ParamTag::SensoryMap => set.sensory_map = true,
                ParamTag::WmIn => set.wm_in = true,
                ParamTag::WmOut => set.wm_out = true,
                ParamTag::WmRecur => set.wm_recur = true,
                ParamTag::Semantic => set.semantic = true,
                ParamTag::Background => set.background = true,
            }
        }
        set
    }
}

/// Gradient accumulator shaped like the trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embeddings: Mat,
    pub untied_commit: Option<Mat>,
    pub sensory_map: Mat,
    pub wm_in: Mat,
    pub wm_out: Mat,
    pub wm_recur: Mat,
    pub semantic: Segments,
    pub background: Segments,
}

impl Gradients {
    pub fn zeroed(params: &ModelParams) -> Self {
        let d = params.dims;
        Gradients {
            embeddings: Mat::zeros(d.d_q, d.n_indices()),
            untied_commit: params
                .untied_commit
                .as_ref()
                .map(|_| Mat::zeros(d.d_q, d.n_indices())),
            sensory_map: Mat::zeros(d.d_q, d.d_g),
            wm_in: Mat::zeros(d.d_h, d.d_q),
            wm_out: Mat::zeros(d.d_q, d.d_h),
            wm_recur: Mat::zeros(d.d_h, d.d_h),
            semantic: Segments::zeros(d.d_q),
            background: Segments::zeros(d.d_q),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for m in [
            &mut self.embeddings,
            &mut self.sensory_map,
            &mut self.wm_in,
            &mut self.wm_out,
            &mut self.wm_recur,
        ] {
            for v in m.as_mut_slice() {
                *v *= factor;
            }
        }
        if let Some(u) = &mut self.untied_commit {
            for v in u.as_mut_slice() {
                *v *= factor;
            }
        }
        for seg in [&mut self.semantic, &mut self.background] {
            for v in seg.sub.iter_mut().chain(&mut seg.pred).chain(&mut seg.obj) {
                *v *= factor;
            }
        }
    }

    /// Zero out the gradients of frozen parameters.
    pub fn apply_freeze(&mut self, freeze: FreezeSet) {
        if freeze.embeddings {
            self.embeddings.fill(0.0);
            if let Some(u) = &mut self.untied_commit {
                u.fill(0.0);
            }
        }
        if freeze.sensory_map {
            self.sensory_map.fill(0.0);
        }
        if freeze.wm_in {
            self.wm_in.fill(0.0);
        }
        if freeze.wm_out {
            self.wm_out.fill(0.0);
        }
        if freeze.wm_recur {
            self.wm_recur.fill(0.0);
        }
        if freeze.semantic {
            self.semantic = Segments::zeros(self.semantic.sub.len());
        }
        if freeze.background {
            self.background = Segments::zeros(self.background.sub.len());
        }
    }

    pub fn is_finite(&self) -> bool {
        let mats_ok = [
            &self.embeddings,
            &self.sensory_map,
            &self.wm_in,
            &self.wm_out,
            &self.wm_recur,
        ]
        .iter()
        .all(|m| m.is_finite())
            && self.untied_commit.as_ref().is_none_or(Mat::is_finite);
        mats_ok && self.semantic.is_finite() && self.background.is_finite()
    }
}

fn nll_term(logits: &[f64], target: usize) -> Result<f64> {
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(Error::NumericOverflow("non-finite logits".into()));
    }
    Ok(log_sum_exp(logits) - logits[target])
}

/// Teacher-forced cross-entropy of `triple` on an arbitrary drive.
pub fn cost_with_drive(params: &ModelParams, drive: &Segments, triple: Triple) -> Result<f64> {
    params.check_concept(triple.s)?;
    params.check_concept(triple.o)?;
    params.check_predicate(triple.p)?;
    let logits_s = params.subject_logits_drive(&drive.sub);
    let h_s = params.wm_after_subject_drive(triple.s, &drive.sub)?;
    let logits_o = params.object_logits_drive(&drive.obj, &h_s)?;
    let h_so = params.wm_after_object_drive(triple.o, &drive.obj, &h_s)?;
    let logits_p = params.predicate_logits_drive(&drive.pred, &h_so)?;
    Ok(nll_term(&logits_s, triple.s)?
        + nll_term(&logits_o, triple.o)?
        + nll_term(&logits_p, triple.p)?)
}

/// Perception cost of a true triple in a scene.
pub fn cost_perception(params: &ModelParams, scene: &Scene, triple: Triple) -> Result<f64> {
    cost_with_drive(params, &params.drive_from_scene(scene)?, triple)
}

/// Semantic-memory cost of a triple under the chosen memory embedding.
pub fn cost_prob(params: &ModelParams, triple: Triple, source: MemorySource) -> Result<f64> {
    cost_with_drive(params, &params.drive_semantic(source), triple)
}

/// `M[:, offset + j] += x * coefs[j]` for every `j`.
fn add_outer_cols(m: &mut Mat, x: &[f64], coefs: &[f64], offset: usize) {
    for (j, c) in coefs.iter().enumerate() {
        if *c != 0.0 {
            m.add_col(offset + j, x, *c);
        }
    }
}

fn sigmoid_backward(upstream: &[f64], activated: &[f64]) -> Vec<f64> {
    upstream
        .iter()
        .zip(activated)
        .map(|(u, a)| u * a * (1.0 - a))
        .collect()
}

/// Accumulate the analytic gradient of the teacher-forced cost into `grads`
/// and return the cost. `kind` routes the drive gradient into the sensory
/// map or the memory embeddings.
pub fn grad_teacher_forced(
    params: &ModelParams,
    drive: &Segments,
    kind: DriveKind<'_>,
    triple: Triple,
    grads: &mut Gradients,
) -> Result<f64> {
    params.check_concept(triple.s)?;
    params.check_concept(triple.o)?;
    params.check_predicate(triple.p)?;
    let dims = params.dims;
    let n_c = dims.n_concepts;

    // Forward pass, keeping every intermediate the backward pass needs.
    let x_s = &drive.sub;
    let x_o = &drive.obj;
    let x_p = &drive.pred;

    let q1 = x_s.clone();
    let logits1 = params.subject_logits_drive(x_s);
    let a_s = params.commit_embedding(triple.s);
    let u1: Vec<f64> = a_s.iter().zip(x_s).map(|(a, x)| a + x).collect();
    let z1 = params.wm_in.matvec(&u1);
    let h1 = sigmoid_vec(&z1);
    let m1 = params.wm_recur.matvec(&h1);
    let r1 = sigmoid_vec(&m1);
    let c1 = params.wm_out.matvec(&r1);

    let q2: Vec<f64> = x_o.iter().zip(&c1).map(|(x, c)| x + c).collect();
    let logits2 = params.embeddings.matvec_t_range(&q2, 0, n_c);
    let a_o = params.commit_embedding(triple.o);
    let mut u2: Vec<f64> = a_o.iter().zip(&c1).map(|(a, c)| a + c).collect();
    axpy(&mut u2, 1.0, x_o);
    let mut z2 = params.wm_in.matvec(&u2);
    if params.use_skip {
        axpy(&mut z2, 1.0, &params.wm_recur.matvec(&h1));
    }
    let h2 = sigmoid_vec(&z2);
    let m2 = params.wm_recur.matvec(&h2);
    let r2 = sigmoid_vec(&m2);
    let c2 = params.wm_out.matvec(&r2);

    let q3: Vec<f64> = x_p.iter().zip(&c2).map(|(x, c)| x + c).collect();
    let logits3 = params
        .embeddings
        .matvec_t_range(&q3, n_c, dims.n_indices());

    let cost = nll_term(&logits1, triple.s)?
        + nll_term(&logits2, triple.o)?
        + nll_term(&logits3, triple.p)?;

    // Backward pass. Softmax with negative log-likelihood gives
    // d cost / d logits = probs - onehot(target).
    let mut dx_s = vec![0.0; dims.d_q];
    let mut dx_o = vec![0.0; dims.d_q];
    let mut dx_p = vec![0.0; dims.d_q];

    let mut g3 = softmax(&logits3);
    g3[triple.p] -= 1.0;
    add_outer_cols(&mut grads.embeddings, &q3, &g3, n_c);
    let dq3 = params.embeddings.matvec_cols(&g3, n_c, dims.n_indices());
    axpy(&mut dx_p, 1.0, &dq3);
    let dc2 = dq3;

    grads.wm_out.add_outer(&dc2, &r2, 1.0);
    let dr2 = params.wm_out.matvec_t(&dc2);
    let dm2 = sigmoid_backward(&dr2, &r2);
    grads.wm_recur.add_outer(&dm2, &h2, 1.0);
    let dh2 = params.wm_recur.matvec_t(&dm2);
    let dz2 = sigmoid_backward(&dh2, &h2);
    grads.wm_in.add_outer(&dz2, &u2, 1.0);
    let du2 = params.wm_in.matvec_t(&dz2);
    let mut dh1_skip = vec![0.0; dims.d_h];
    if params.use_skip {
        grads.wm_recur.add_outer(&dz2, &h1, 1.0);
        dh1_skip = params.wm_recur.matvec_t(&dz2);
    }

    let commit_grads = grads.untied_commit.as_mut().unwrap_or(&mut grads.embeddings);
    commit_grads.add_col(triple.o, &du2, 1.0);
    let mut dc1 = du2.clone();
    axpy(&mut dx_o, 1.0, &du2);

    let mut g2 = softmax(&logits2);
    g2[triple.o] -= 1.0;
    add_outer_cols(&mut grads.embeddings, &q2, &g2, 0);
    let dq2 = params.embeddings.matvec_cols(&g2, 0, n_c);
    axpy(&mut dx_o, 1.0, &dq2);
    axpy(&mut dc1, 1.0, &dq2);

    grads.wm_out.add_outer(&dc1, &r1, 1.0);
    let dr1 = params.wm_out.matvec_t(&dc1);
    let dm1 = sigmoid_backward(&dr1, &r1);
    grads.wm_recur.add_outer(&dm1, &h1, 1.0);
    let mut dh1 = params.wm_recur.matvec_t(&dm1);
    axpy(&mut dh1, 1.0, &dh1_skip);
    let dz1 = sigmoid_backward(&dh1, &h1);
    grads.wm_in.add_outer(&dz1, &u1, 1.0);
    let du1 = params.wm_in.matvec_t(&dz1);

    let commit_grads = grads.untied_commit.as_mut().unwrap_or(&mut grads.embeddings);
    commit_grads.add_col(triple.s, &du1, 1.0);
    axpy(&mut dx_s, 1.0, &du1);

    let mut g1 = softmax(&logits1);
    g1[triple.s] -= 1.0;
    add_outer_cols(&mut grads.embeddings, &q1, &g1, 0);
    let dq1 = params.embeddings.matvec_cols(&g1, 0, n_c);
    axpy(&mut dx_s, 1.0, &dq1);

    match kind {
        DriveKind::Perception { g_sub, g_pred, g_obj } => {
            grads.sensory_map.add_outer(&dx_s, g_sub, 1.0);
            grads.sensory_map.add_outer(&dx_o, g_obj, 1.0);
            grads.sensory_map.add_outer(&dx_p, g_pred, 1.0);
        }
        DriveKind::Semantic => {
            axpy(&mut grads.semantic.sub, 1.0, &dx_s);
            axpy(&mut grads.semantic.obj, 1.0, &dx_o);
            axpy(&mut grads.semantic.pred, 1.0, &dx_p);
        }
        DriveKind::Background => {
            axpy(&mut grads.background.sub, 1.0, &dx_s);
            axpy(&mut grads.background.obj, 1.0, &dx_o);
            axpy(&mut grads.background.pred, 1.0, &dx_p);
        }
    }

    Ok(cost)
}

/// Gradient of the perception cost for one scene triple, with frozen entries
/// zeroed.
pub fn grad_perception(
    params: &ModelParams,
    scene: &Scene,
    triple: Triple,
    freeze: FreezeSet,
) -> Result<(f64, Gradients)> {
    let drive = params.drive_from_scene(scene)?;
    let mut grads = Gradients::zeroed(params);
    let cost = grad_teacher_forced(
        params,
        &drive,
        DriveKind::Perception {
            g_sub: &scene.g_sub,
            g_pred: &scene.g_pred,
            g_obj: &scene.g_obj,
        },
        triple,
        &mut grads,
    )?;
    grads.apply_freeze(freeze);
    Ok((cost, grads))
}

/// Gradient of the semantic cost for one triple, with frozen entries zeroed.
pub fn grad_prob(
    params: &ModelParams,
    triple: Triple,
    source: MemorySource,
    freeze: FreezeSet,
) -> Result<(f64, Gradients)> {
    let drive = params.drive_semantic(source);
    let kind = match source {
        MemorySource::Perceptual => DriveKind::Semantic,
        MemorySource::Background => DriveKind::Background,
    };
    let mut grads = Gradients::zeroed(params);
    let cost = grad_teacher_forced(params, &drive, kind, triple, &mut grads)?;
    grads.apply_freeze(freeze);
    Ok((cost, grads))
}

/// One stochastic gradient step: `params -= lr * grads` on everything not
/// frozen. A zero learning rate leaves the parameters bit-identical.
pub fn apply_sgd(params: &mut ModelParams, grads: &Gradients, lr: f64, freeze: FreezeSet) {
    if lr == 0.0 {
        return;
    }
    if !freeze.embeddings {
        params.embeddings.axpy(-lr, &grads.embeddings);
        if let (Some(u), Some(gu)) = (&mut params.untied_commit, &grads.untied_commit) {
            u.axpy(-lr, gu);
        }
    }
    if !freeze.sensory_map {
        params.sensory_map.axpy(-lr, &grads.sensory_map);
    }
    if !freeze.wm_in {
        params.wm_in.axpy(-lr, &grads.wm_in);
    }
    if !freeze.wm_out {
        params.wm_out.axpy(-lr, &grads.wm_out);
    }
    if !freeze.wm_recur {
        params.wm_recur.axpy(-lr, &grads.wm_recur);
    }
    if !freeze.semantic {
        axpy(&mut params.semantic.sub, -lr, &grads.semantic.sub);
        axpy(&mut params.semantic.pred, -lr, &grads.semantic.pred);
        axpy(&mut params.semantic.obj, -lr, &grads.semantic.obj);
    }
    if !freeze.background {
        axpy(&mut params.background.sub, -lr, &grads.background.sub);
        axpy(&mut params.background.pred, -lr, &grads.background.pred);
        axpy(&mut params.background.obj, -lr, &grads.background.obj);
    }
}

/// Training mode selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    Supervised,
    SelfSupervised,
    Semantic,
    SemanticReplay,
}

impl TrainMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainMode::Supervised => "supervised",
            TrainMode::SelfSupervised => "self_supervised",
            TrainMode::Semantic => "semantic",
            TrainMode::SemanticReplay => "semantic_replay",
        }
    }
}

/// Training configuration. Unknown JSON keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    pub mode: TrainMode,
    /// Samples per scene in the self-supervised E-step; also the number of
    /// replay draws per update in replay mode.
    #[serde(default = "default_samples")]
    pub samples_per_scene: usize,
    pub seed: Option<u64>,
    /// Frozen parameters. When empty, semantic modes freeze everything
    /// except the trained memory embedding.
    #[serde(default)]
    pub freeze: Vec<ParamTag>,
    #[serde(default = "default_d_q")]
    pub d_q: usize,
    #[serde(default = "default_d_h")]
    pub d_h: usize,
    #[serde(default)]
    pub use_skip: bool,
    #[serde(default = "default_tie")]
    pub tie_weights: bool,
    /// Store an episodic engram per training scene once training finishes.
    #[serde(default)]
    pub store_episodes: bool,
    /// Only store episodes whose greedy triple is this surprising (negative
    /// log-likelihood above the threshold). `None` stores unconditionally.
    #[serde(default)]
    pub surprise_threshold: Option<f64>,
    #[serde(default = "default_source")]
    pub semantic_source: MemorySource,
    /// Let semantic training update the shared weights too, instead of only
    /// the memory embedding. The inactive memory embedding stays frozen.
    #[serde(default)]
    pub unfreeze_shared: bool,
    /// Stop once the held-out cost has not improved for `patience` epochs
    /// and revert to the best parameters seen.
    #[serde(default = "default_true")]
    pub early_stop: bool,
    #[serde(default = "default_patience")]
    pub patience: usize,
}

fn default_batch() -> usize {
    1
}

fn default_samples() -> usize {
    30
}

fn default_d_q() -> usize {
    32
}

fn default_d_h() -> usize {
    64
}

fn default_tie() -> bool {
    true
}

fn default_source() -> MemorySource {
    MemorySource::Perceptual
}

fn default_true() -> bool {
    true
}

fn default_patience() -> usize {
    5
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) {
            return Err(Error::Config("learning_rate must be nonnegative".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.samples_per_scene == 0 {
            return Err(Error::Config("samples_per_scene must be at least 1".into()));
        }
        if self.d_q == 0 || self.d_h == 0 {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        Ok(())
    }

    pub fn resolved_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("training needs a seed".into()))
    }

    /// Effective freeze set: explicit tags win; otherwise semantic modes
    /// freeze the shared weights unless `unfreeze_shared` is set.
    pub fn effective_freeze(&self) -> FreezeSet {
        if !self.freeze.is_empty() {
            return FreezeSet::from_tags(&self.freeze);
        }
        match self.mode {
            TrainMode::Supervised | TrainMode::SelfSupervised => FreezeSet::none(),
            TrainMode::Semantic | TrainMode::SemanticReplay => {
                if self.unfreeze_shared {
                    FreezeSet {
                        semantic: self.semantic_source != MemorySource::Perceptual,
                        background: self.semantic_source != MemorySource::Background,
                        ..FreezeSet::none()
                    }
                } else {
                    FreezeSet::all_but_memory(self.semantic_source)
                }
            }
        }
    }
}

/// One line per epoch of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    pub mode: TrainMode,
    pub mean_cost: f64,
    pub heldout_cost: f64,
}

/// Log of a whole run, writable as TSV through [`crate::fmt::results`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub rows: Vec<EpochRow>,
}

/// Mean perception cost over all true triples of the given scenes.
pub fn mean_cost_perception(params: &ModelParams, scenes: &[Scene]) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for scene in scenes {
        let drive = params.drive_from_scene(scene)?;
        for triple in scene.truth_triples() {
            total += cost_with_drive(params, &drive, triple)?;
            count += 1;
        }
    }
    if count == 0 {
        return Ok(f64::NAN);
    }
    Ok(total / count as f64)
}

/// Mean semantic cost over a triple stream.
pub fn mean_cost_prob(
    params: &ModelParams,
    triples: &[Triple],
    source: MemorySource,
) -> Result<f64> {
    if triples.is_empty() {
        return Ok(f64::NAN);
    }
    let drive = params.drive_semantic(source);
    let mut total = 0.0;
    for t in triples {
        total += cost_with_drive(params, &drive, *t)?;
    }
    Ok(total / triples.len() as f64)
}

const STREAM_TRAIN: u64 = 7_000;

fn overflow(epoch: usize, what: &str) -> Error {
    Error::NumericOverflow(format!("{what} diverged at epoch {epoch}"))
}

/// Scene-level epoch step shared by the supervised and self-supervised
/// loops. `targets` picks the triples trained on for a scene.
fn run_scene_epochs(
    params: &mut ModelParams,
    scenes: &[Scene],
    heldout: &[Scene],
    cfg: &TrainConfig,
    mut targets: impl FnMut(&ModelParams, &Scene, &mut ChaCha8Rng) -> Result<Vec<Triple>>,
) -> Result<TrainLog> {
    cfg.validate()?;
    let freeze = cfg.effective_freeze();
    let mut rng = rng_from(derive_seed(cfg.resolved_seed()?, STREAM_TRAIN));
    let mut log = TrainLog::default();
    let mut best_heldout = f64::INFINITY;
    let mut best: Option<ModelParams> = None;
    let mut stale = 0usize;

    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..scenes.len()).collect();
        shuffle(&mut rng, &mut order);

        let mut epoch_cost = 0.0;
        let mut epoch_count = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = Gradients::zeroed(params);
            let mut batch_count = 0usize;
            for &idx in batch {
                let scene = &scenes[idx];
                let drive = params.drive_from_scene(scene)?;
                let kind = DriveKind::Perception {
                    g_sub: &scene.g_sub,
                    g_pred: &scene.g_pred,
                    g_obj: &scene.g_obj,
                };
                for triple in targets(params, scene, &mut rng)? {
                    let cost = grad_teacher_forced(params, &drive, kind, triple, &mut grads)?;
                    if !cost.is_finite() {
                        return Err(overflow(epoch, "training cost"));
                    }
                    epoch_cost += cost;
                    batch_count += 1;
                }
            }
            if batch_count == 0 {
                continue;
            }
            epoch_count += batch_count;
            grads.scale(1.0 / batch_count as f64);
            grads.apply_freeze(freeze);
            if !grads.is_finite() {
                return Err(overflow(epoch, "gradient"));
            }
            apply_sgd(params, &grads, cfg.learning_rate, freeze);
        }

        let mean_cost = if epoch_count > 0 {
            epoch_cost / epoch_count as f64
        } else {
            f64::NAN
        };
        if !mean_cost.is_finite() && epoch_count > 0 {
            return Err(overflow(epoch, "epoch cost"));
        }
        let heldout_cost = mean_cost_perception(params, heldout)?;
        log.rows.push(EpochRow {
            epoch,
            mode: cfg.mode,
            mean_cost,
            heldout_cost,
        });

        if cfg.early_stop {
            if heldout_cost < best_heldout {
                best_heldout = heldout_cost;
                best = Some(params.clone());
                stale = 0;
            } else {
                stale += 1;
                if stale > cfg.patience {
                    break;
                }
            }
        }
    }
    if cfg.early_stop {
        if let Some(best) = best {
            *params = best;
        }
    }
    Ok(log)
}

/// Supervised perception training on labeled scenes.
///
/// The held-out cost is logged per epoch. With `early_stop` the run halts
/// once the cost has not improved for `patience` epochs and the returned
/// parameters are the ones with the best held-out cost seen, so the final
/// model never sits above any logged epoch. When configured, episodic
/// engrams for the training scenes are stored after the final epoch.
pub fn train_supervised(
    params: &mut ModelParams,
    scenes: &[Scene],
    heldout: &[Scene],
    cfg: &TrainConfig,
) -> Result<TrainLog> {
    let log = run_scene_epochs(params, scenes, heldout, cfg, |_, scene, _| {
        Ok(scene.truth_triples().into_iter().collect())
    })?;
    store_training_episodes(params, scenes, cfg)?;
    Ok(log)
}

/// Self-supervised perception training: sample a deduplicated triple set per
/// scene from the current model and take a gradient step on it as if it were
/// labeled data.
pub fn train_self_supervised(
    params: &mut ModelParams,
    scenes: &[Scene],
    heldout: &[Scene],
    cfg: &TrainConfig,
) -> Result<TrainLog> {
    let n = cfg.samples_per_scene;
    let log = run_scene_epochs(params, scenes, heldout, cfg, move |model, scene, rng| {
        let set = decode_scene(model, scene, n, DecodeMode::Sample, Some(rng))?;
        Ok(set.into_iter().collect())
    })?;
    store_training_episodes(params, scenes, cfg)?;
    Ok(log)
}

fn store_training_episodes(
    params: &mut ModelParams,
    scenes: &[Scene],
    cfg: &TrainConfig,
) -> Result<()> {
    if !cfg.store_episodes {
        return Ok(());
    }
    for scene in scenes {
        match cfg.surprise_threshold {
            Some(threshold) => {
                params.store_episode_if_surprising(scene, threshold)?;
            }
            None => {
                params.store_episode(scene)?;
            }
        }
    }
    Ok(())
}

/// Semantic-memory adaptation on a triple stream.
///
/// In replay mode, every update additionally trains on `samples_per_scene`
/// triples drawn from the semantic memory itself, folded into the same
/// batch mean.
pub fn train_semantic(
    params: &mut ModelParams,
    triples: &[Triple],
    heldout: &[Triple],
    cfg: &TrainConfig,
) -> Result<TrainLog> {
    cfg.validate()?;
    if triples.is_empty() {
        return Err(Error::EmptySupport("semantic training needs triples".into()));
    }
    let source = cfg.semantic_source;
    let kind = match source {
        MemorySource::Perceptual => DriveKind::Semantic,
        MemorySource::Background => DriveKind::Background,
    };
    let replay = cfg.mode == TrainMode::SemanticReplay;
    let freeze = cfg.effective_freeze();
    let mut rng = rng_from(derive_seed(cfg.resolved_seed()?, STREAM_TRAIN));
    let mut log = TrainLog::default();

    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..triples.len()).collect();
        shuffle(&mut rng, &mut order);

        let mut epoch_cost = 0.0;
        let mut epoch_count = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let mut batch_triples: Vec<Triple> = batch.iter().map(|&i| triples[i]).collect();
            if replay {
                for _ in 0..cfg.samples_per_scene {
                    batch_triples.push(sample_semantic(params, source, None, &mut rng)?);
                }
            }
            let drive = params.drive_semantic(source);
            let mut grads = Gradients::zeroed(params);
            for triple in &batch_triples {
                let cost = grad_teacher_forced(params, &drive, kind, *triple, &mut grads)?;
                if !cost.is_finite() {
                    return Err(overflow(epoch, "semantic cost"));
                }
                epoch_cost += cost;
            }
            epoch_count += batch_triples.len();
            grads.scale(1.0 / batch_triples.len() as f64);
            grads.apply_freeze(freeze);
            if !grads.is_finite() {
                return Err(overflow(epoch, "semantic gradient"));
            }
            apply_sgd(params, &grads, cfg.learning_rate, freeze);
        }

        let mean_cost = epoch_cost / epoch_count.max(1) as f64;
        let heldout_cost = mean_cost_prob(params, heldout, source)?;
        log.rows.push(EpochRow {
            epoch,
            mode: cfg.mode,
            mean_cost,
            heldout_cost,
        });
    }
    Ok(log)
}

/// Set the semantic memory to the mean of the stored episodic segments.
pub fn consolidate_semantic(params: &mut ModelParams) -> Result<()> {
    if params.episodes.is_empty() {
        return Err(Error::MissingEngram(
            "episodic store is empty; nothing to consolidate".into(),
        ));
    }
    let d_q = params.dims.d_q;
    let mut mean = Segments::zeros(d_q);
    for seg in params.episodes.values() {
        axpy(&mut mean.sub, 1.0, &seg.sub);
        axpy(&mut mean.pred, 1.0, &seg.pred);
        axpy(&mut mean.obj, 1.0, &seg.obj);
    }
    let inv = 1.0 / params.episodes.len() as f64;
    for v in mean
        .sub
        .iter_mut()
        .chain(&mut mean.pred)
        .chain(&mut mean.obj)
    {
        *v *= inv;
    }
    params.semantic = mean;
    Ok(())
}

/// Greedy self-training fixed point: the gradient of a scene's own greedy
/// decode, used to show saturated models stop moving.
pub fn greedy_self_gradient(params: &ModelParams, scene: &Scene) -> Result<Gradients> {
    let drive = params.drive_from_scene(scene)?;
    let (triple, _) = decode_with_drive(params, &drive, DecodeMode::Greedy, None, None)?;
    let mut grads = Gradients::zeroed(params);
    grad_teacher_forced(
        params,
        &drive,
        DriveKind::Perception {
            g_sub: &scene.g_sub,
            g_pred: &scene.g_pred,
            g_obj: &scene.g_obj,
        },
        triple,
        &mut grads,
    )?;
    Ok(grads)
}
