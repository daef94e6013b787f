//! Synthetic sensory worlds: ground-truth graphs, scenes of bounding-box
//! triples, and noisy feature vectors.
//!
//! The generator replaces a vision backbone with prototype features: every
//! concept and predicate gets a random unit vector, and a box encoding is the
//! normalized mean of its label prototypes plus Gaussian noise. Externally
//! computed features can be imported instead through the TB-FEAT format in
//! [`crate::fmt::feat`].
//!
//! A world is relational by default: predicates come in pairs that share a
//! prototype, so the predicate box alone only narrows the choice down to a
//! pair and the true member is determined by the subject and object
//! entities. Worlds with `relational_predicates = false` give every predicate
//! its own prototype, which makes the predicate box fully informative.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{ConceptId, ConceptKind, PredicateId, TemporalKG, Triple, Vocabulary, HAS_PROPERTY};
use crate::rng::{derive_seed, rng_from, shuffle, standard_normal, uniform_index};

pub type FeatureVector = Vec<f64>;

/// One bounding-box triple with its ground truth and sensory encodings.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub t: u32,
    pub subject_labels: BTreeSet<ConceptId>,
    pub object_labels: BTreeSet<ConceptId>,
    pub predicates: BTreeSet<PredicateId>,
    pub g_sub: FeatureVector,
    pub g_pred: FeatureVector,
    pub g_obj: FeatureVector,
}

impl Scene {
    /// Every label combination of the boxes is a true statement.
    pub fn truth_triples(&self) -> BTreeSet<Triple> {
        let mut out = BTreeSet::new();
        for &s in &self.subject_labels {
            for &p in &self.predicates {
                for &o in &self.object_labels {
                    out.insert(Triple::new(s, p, o));
                }
            }
        }
        out
    }
}

/// Unit-norm prototype vectors for every concept and predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeBank {
    concept_protos: Vec<Vec<f64>>,
    predicate_protos: Vec<Vec<f64>>,
    pub noise_sigma: f64,
    pub d_g: usize,
}

fn random_unit_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

impl PrototypeBank {
    /// Seeded random prototypes. `predicate_alias[p]` names the predicate
    /// whose prototype `p` borrows; identity aliasing gives every predicate
    /// its own vector.
    pub fn generate(
        vocab: &Vocabulary,
        d_g: usize,
        noise_sigma: f64,
        predicate_alias: &[PredicateId],
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if predicate_alias.len() != vocab.n_predicates() {
            return Err(Error::ShapeMismatch(format!(
                "alias table has {} entries for {} predicates",
                predicate_alias.len(),
                vocab.n_predicates()
            )));
        }
        let concept_protos: Vec<Vec<f64>> = (0..vocab.n_concepts())
            .map(|_| random_unit_vector(d_g, rng))
            .collect();
        let base: Vec<Vec<f64>> = (0..vocab.n_predicates())
            .map(|_| random_unit_vector(d_g, rng))
            .collect();
        let mut predicate_protos = Vec::with_capacity(vocab.n_predicates());
        for (p, alias) in predicate_alias.iter().enumerate() {
            if *alias >= base.len() {
                return Err(Error::InvalidIndex(format!(
                    "alias {alias} for predicate {p}"
                )));
            }
            predicate_protos.push(base[*alias].clone());
        }
        Ok(PrototypeBank {
            concept_protos,
            predicate_protos,
            noise_sigma,
            d_g,
        })
    }

    pub fn concept_prototype(&self, c: ConceptId) -> Result<&[f64]> {
        self.concept_protos
            .get(c)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidIndex(format!("concept {c}")))
    }

    pub fn predicate_prototype(&self, p: PredicateId) -> Result<&[f64]> {
        self.predicate_protos
            .get(p)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidIndex(format!("predicate {p}")))
    }

    /// Box encoding: normalized mean of the label prototypes plus
    /// `N(0, noise_sigma^2)` per component, renormalized to unit length.
    pub fn encode_concepts(
        &self,
        labels: &BTreeSet<ConceptId>,
        rng: &mut ChaCha8Rng,
    ) -> Result<FeatureVector> {
        self.encode(labels, rng, |id| self.concept_prototype(id))
    }

    /// Predicate box encoding via the (possibly aliased) predicate prototypes.
    pub fn encode_predicates(
        &self,
        labels: &BTreeSet<PredicateId>,
        rng: &mut ChaCha8Rng,
    ) -> Result<FeatureVector> {
        self.encode(labels, rng, |id| self.predicate_prototype(id))
    }

    fn encode<'a>(
        &'a self,
        labels: &BTreeSet<usize>,
        rng: &mut ChaCha8Rng,
        proto: impl Fn(usize) -> Result<&'a [f64]>,
    ) -> Result<FeatureVector> {
        if labels.is_empty() {
            return Err(Error::Config("box needs at least one label".into()));
        }
        let mut mean = vec![0.0; self.d_g];
        for &label in labels {
            let p = proto(label)?;
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
        }
        let inv = 1.0 / labels.len() as f64;
        for m in mean.iter_mut() {
            *m *= inv;
        }
        if self.noise_sigma == 0.0 && labels.len() == 1 {
            // Already a unit prototype; skip the redundant rounding steps so
            // the encoding is bit-identical to the stored vector.
            return Ok(mean);
        }
        if self.noise_sigma != 0.0 {
            for m in mean.iter_mut() {
                *m += self.noise_sigma * standard_normal(rng);
            }
        }
        Ok(normalize(mean))
    }
}

/// Convenience wrapper matching the scene layout: encodes the predicate box
/// of `scene` from its true predicate set.
pub fn predicate_box_features(
    scene: &Scene,
    bank: &PrototypeBank,
    rng: &mut ChaCha8Rng,
) -> Result<FeatureVector> {
    bank.encode_predicates(&scene.predicates, rng)
}

/// Generator configuration. Unknown JSON keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub n_concepts: usize,
    pub n_predicates: usize,
    #[serde(default = "default_d_g")]
    pub d_g: usize,
    pub train_scenes: usize,
    pub test_scenes: usize,
    /// Inclusive bounds on how many labels a box carries.
    #[serde(default = "default_labels")]
    pub labels_per_box: [usize; 2],
    #[serde(default)]
    pub zero_shot_fraction: f64,
    #[serde(default = "default_sigma")]
    pub noise_sigma: f64,
    /// Shared predicate prototypes within pairs; the true member is a
    /// function of the subject and object entities.
    #[serde(default = "default_true")]
    pub relational_predicates: bool,
    pub seed: u64,
}

fn default_d_g() -> usize {
    64
}

fn default_labels() -> [usize; 2] {
    [1, 3]
}

fn default_sigma() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_concepts == 0
            || self.n_predicates == 0
            || self.d_g == 0
            || self.train_scenes == 0
            || self.test_scenes == 0
        {
            return Err(Error::Config("all world counts must be positive".into()));
        }
        let [lo, hi] = self.labels_per_box;
        if lo < 1 || hi < lo || hi > 3 {
            return Err(Error::Config(format!(
                "labels_per_box [{lo}, {hi}] must satisfy 1 <= lo <= hi <= 3"
            )));
        }
        if !(0.0..1.0).contains(&self.zero_shot_fraction) {
            return Err(Error::Config(format!(
                "zero_shot_fraction {} must lie in [0, 1)",
                self.zero_shot_fraction
            )));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::Config("noise_sigma must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A generated world: vocabulary, scene splits, history and zero-shot list.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub config: WorldConfig,
    pub vocabulary: Vocabulary,
    pub temporal: TemporalKG,
    pub train: Vec<Scene>,
    pub test: Vec<Scene>,
    pub zero_shot: BTreeSet<Triple>,
}

// Seed streams used by the generator.
const STREAM_LABELS: u64 = 0;
const STREAM_FACTS: u64 = 1;
const STREAM_PROTOS: u64 = 2;
const STREAM_PICKS: u64 = 3;
const STREAM_SCENE_BASE: u64 = 1_000;

struct Grounding {
    /// Entity concept id -> full label set (entity plus class/extra labels).
    labels: BTreeMap<ConceptId, BTreeSet<ConceptId>>,
    /// Ordered entity pair -> true predicate.
    facts: Vec<((ConceptId, ConceptId), PredicateId)>,
    n_train_facts: usize,
}

fn build_vocabulary(cfg: &WorldConfig) -> Result<(Vocabulary, Vec<ConceptId>)> {
    let n = cfg.n_concepts;
    let n_loc = n / 10;
    let n_attr = n / 10;
    let n_cls = n / 5;
    let n_ent = n - n_loc - n_attr - n_cls;
    if n_ent < 2 {
        return Err(Error::Config(format!(
            "n_concepts {n} leaves fewer than two entities"
        )));
    }
    let mut concepts = Vec::with_capacity(n);
    for i in 0..n_ent {
        concepts.push((format!("ent{i:02}"), ConceptKind::Entity));
    }
    for i in 0..n_cls {
        concepts.push((format!("cls{i:02}"), ConceptKind::Class));
    }
    for i in 0..n_attr {
        concepts.push((format!("att{i:02}"), ConceptKind::Attribute));
    }
    for i in 0..n_loc {
        concepts.push((format!("loc{i:02}"), ConceptKind::Location));
    }
    let mut predicates: Vec<String> = (0..cfg.n_predicates).map(|i| format!("rel{i:02}")).collect();
    predicates.push(HAS_PROPERTY.to_string());
    let entities: Vec<ConceptId> = (0..n_ent).collect();
    Ok((Vocabulary::new(concepts, predicates)?, entities))
}

fn build_grounding(
    cfg: &WorldConfig,
    vocab: &Vocabulary,
    entities: &[ConceptId],
) -> Result<Grounding> {
    let classes: Vec<ConceptId> = (0..vocab.n_concepts())
        .filter(|&c| vocab.concept_kind(c).unwrap() == ConceptKind::Class)
        .collect();
    let extras: Vec<ConceptId> = (0..vocab.n_concepts())
        .filter(|&c| {
            matches!(
                vocab.concept_kind(c).unwrap(),
                ConceptKind::Attribute | ConceptKind::Location
            )
        })
        .collect();

    let mut label_rng = rng_from(derive_seed(cfg.seed, STREAM_LABELS));
    let [lo, hi] = cfg.labels_per_box;
    let mut labels = BTreeMap::new();
    for (i, &e) in entities.iter().enumerate() {
        let want = lo + uniform_index(&mut label_rng, hi - lo + 1);
        let mut set = BTreeSet::from([e]);
        if want >= 2 && !classes.is_empty() {
            set.insert(classes[i % classes.len()]);
        }
        if want >= 3 && !extras.is_empty() {
            set.insert(extras[i % extras.len()]);
        }
        labels.insert(e, set);
    }

    let mut fact_rng = rng_from(derive_seed(cfg.seed, STREAM_FACTS));
    let mut pairs: Vec<(ConceptId, ConceptId)> = Vec::new();
    for &s in entities {
        for &o in entities {
            if s != o {
                pairs.push((s, o));
            }
        }
    }
    shuffle(&mut fact_rng, &mut pairs);
    pairs.truncate((3 * cfg.n_concepts).min(pairs.len()));

    let n_p = cfg.n_predicates;
    let facts: Vec<((ConceptId, ConceptId), PredicateId)> = pairs
        .iter()
        .map(|pair| {
            let p = if cfg.relational_predicates {
                let group = uniform_index(&mut fact_rng, n_p.div_ceil(2));
                let member = uniform_index(&mut fact_rng, 2);
                (2 * group + member).min(n_p - 1)
            } else {
                uniform_index(&mut fact_rng, n_p)
            };
            (*pair, p)
        })
        .collect();

    let n_zero_shot = if cfg.zero_shot_fraction > 0.0 {
        ((cfg.zero_shot_fraction * facts.len() as f64).ceil() as usize).max(1)
    } else {
        0
    };
    if n_zero_shot >= facts.len() {
        return Err(Error::InfeasibleSplit(format!(
            "zero_shot_fraction {} leaves no training facts (pool of {})",
            cfg.zero_shot_fraction,
            facts.len()
        )));
    }
    if n_zero_shot > cfg.test_scenes {
        return Err(Error::InfeasibleSplit(format!(
            "{} zero-shot facts cannot all appear in {} test scenes",
            n_zero_shot, cfg.test_scenes
        )));
    }

    Ok(Grounding {
        labels,
        n_train_facts: facts.len() - n_zero_shot,
        facts,
    })
}

/// Prototype alias table: in relational worlds predicates `2g` and `2g + 1`
/// share a prototype; `hasProperty` always keeps its own.
fn predicate_aliases(cfg: &WorldConfig, n_predicates_total: usize) -> Vec<PredicateId> {
    (0..n_predicates_total)
        .map(|p| {
            if cfg.relational_predicates && p < cfg.n_predicates {
                2 * (p / 2)
            } else {
                p
            }
        })
        .collect()
}

fn make_scene(
    t: u32,
    pair: (ConceptId, ConceptId),
    predicate: PredicateId,
    grounding: &Grounding,
    bank: &PrototypeBank,
    seed: u64,
) -> Result<Scene> {
    let mut rng = rng_from(derive_seed(seed, STREAM_SCENE_BASE + t as u64));
    let subject_labels = grounding.labels[&pair.0].clone();
    let object_labels = grounding.labels[&pair.1].clone();
    let predicates = BTreeSet::from([predicate]);
    let g_sub = bank.encode_concepts(&subject_labels, &mut rng)?;
    let g_pred = bank.encode_predicates(&predicates, &mut rng)?;
    let g_obj = bank.encode_concepts(&object_labels, &mut rng)?;
    Ok(Scene {
        t,
        subject_labels,
        object_labels,
        predicates,
        g_sub,
        g_pred,
        g_obj,
    })
}

/// Generate a world from its configuration. Identical configurations give
/// byte-identical worlds.
///
/// Returns the world together with the prototype bank that grounded it.
pub fn generate_world(cfg: &WorldConfig) -> Result<(World, PrototypeBank)> {
    cfg.validate()?;
    let (vocabulary, entities) = build_vocabulary(cfg)?;
    let grounding = build_grounding(cfg, &vocabulary, &entities)?;

    let mut proto_rng = rng_from(derive_seed(cfg.seed, STREAM_PROTOS));
    let aliases = predicate_aliases(cfg, vocabulary.n_predicates());
    let bank = PrototypeBank::generate(
        &vocabulary,
        cfg.d_g,
        cfg.noise_sigma,
        &aliases,
        &mut proto_rng,
    )?;

    let train_facts = &grounding.facts[..grounding.n_train_facts];
    let zero_shot_facts = &grounding.facts[grounding.n_train_facts..];

    let mut pick_rng = rng_from(derive_seed(cfg.seed, STREAM_PICKS));
    let mut train = Vec::with_capacity(cfg.train_scenes);
    for i in 0..cfg.train_scenes {
        let (pair, p) = if i < train_facts.len() {
            train_facts[i]
        } else {
            train_facts[uniform_index(&mut pick_rng, train_facts.len())]
        };
        train.push(make_scene(i as u32, pair, p, &grounding, &bank, cfg.seed)?);
    }

    // Pairs that actually occur in training; test scenes beyond the
    // zero-shot coverage are drawn from these.
    let seen_facts: Vec<((ConceptId, ConceptId), PredicateId)> = {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &(pair, p) in train_facts.iter().take(cfg.train_scenes) {
            if seen.insert(pair) {
                out.push((pair, p));
            }
        }
        if out.is_empty() {
            return Err(Error::InfeasibleSplit("no training facts in use".into()));
        }
        out
    };

    let mut test = Vec::with_capacity(cfg.test_scenes);
    for i in 0..cfg.test_scenes {
        let t = (cfg.train_scenes + i) as u32;
        let (pair, p) = if i < zero_shot_facts.len() {
            zero_shot_facts[i]
        } else {
            seen_facts[uniform_index(&mut pick_rng, seen_facts.len())]
        };
        test.push(make_scene(t, pair, p, &grounding, &bank, cfg.seed)?);
    }

    let n_times = (cfg.train_scenes + cfg.test_scenes) as u32;
    let mut temporal = TemporalKG::new(vocabulary.shape(), n_times);
    for scene in train.iter().chain(test.iter()) {
        for triple in scene.truth_triples() {
            temporal.insert(scene.t, triple)?;
        }
    }

    // Zero-shot statements are exactly the held-out facts' label
    // combinations that never occur in a training scene.
    let mut train_truth = BTreeSet::new();
    for scene in &train {
        train_truth.extend(scene.truth_triples());
    }
    let mut zero_shot = BTreeSet::new();
    for &((s, o), p) in zero_shot_facts {
        for &sl in &grounding.labels[&s] {
            for &ol in &grounding.labels[&o] {
                let t = Triple::new(sl, p, ol);
                if !train_truth.contains(&t) {
                    zero_shot.insert(t);
                }
            }
        }
    }

    Ok((
        World {
            config: cfg.clone(),
            vocabulary,
            temporal,
            train,
            test,
            zero_shot,
        },
        bank,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    fn toy_cfg() -> WorldConfig {
        WorldConfig {
            n_concepts: 20,
            n_predicates: 8,
            d_g: 64,
            train_scenes: 120,
            test_scenes: 40,
            labels_per_box: [1, 3],
            zero_shot_fraction: 0.1,
            noise_sigma: 0.1,
            relational_predicates: true,
            seed: 7,
        }
    }

    #[test]
    fn identical_seeds_give_identical_worlds() {
        let (a, bank_a) = generate_world(&toy_cfg()).unwrap();
        let (b, bank_b) = generate_world(&toy_cfg()).unwrap();
        assert_eq!(a, b);
        assert_eq!(bank_a, bank_b);
        let mut other = toy_cfg();
        other.seed = 8;
        let (c, _) = generate_world(&other).unwrap();
        assert_ne!(a.train[0].g_sub, c.train[0].g_sub);
    }

    #[test]
    fn zero_fraction_gives_empty_zero_shot_set() {
        let mut cfg = toy_cfg();
        cfg.zero_shot_fraction = 0.0;
        let (world, _) = generate_world(&cfg).unwrap();
        assert!(world.zero_shot.is_empty());
    }

    #[test]
    fn zero_shot_triples_never_occur_in_training() {
        // Exhaustive scan over all generated training scenes.
        let mut cfg = toy_cfg();
        cfg.train_scenes = 500;
        let (world, _) = generate_world(&cfg).unwrap();
        assert!(!world.zero_shot.is_empty());
        for scene in &world.train {
            for t in scene.truth_triples() {
                assert!(!world.zero_shot.contains(&t), "{t:?} leaked into training");
            }
        }
        // ... and each zero-shot statement is reachable from some test scene.
        let mut test_truth = BTreeSet::new();
        for scene in &world.test {
            test_truth.extend(scene.truth_triples());
        }
        for t in &world.zero_shot {
            assert!(test_truth.contains(t), "{t:?} missing from test scenes");
        }
    }

    #[test]
    fn scene_truth_is_recorded_in_the_temporal_graph() {
        let (world, _) = generate_world(&toy_cfg()).unwrap();
        for scene in world.train.iter().chain(world.test.iter()) {
            for triple in scene.truth_triples() {
                assert!(world.temporal.contains(scene.t, triple).unwrap());
            }
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = toy_cfg();
        cfg.zero_shot_fraction = 1.0;
        assert!(matches!(generate_world(&cfg), Err(Error::Config(_))));
        let mut cfg = toy_cfg();
        cfg.zero_shot_fraction = 0.999;
        assert!(matches!(
            generate_world(&cfg),
            Err(Error::InfeasibleSplit(_))
        ));
        let mut cfg = toy_cfg();
        cfg.labels_per_box = [0, 2];
        assert!(generate_world(&cfg).is_err());
    }

    #[test]
    fn vrd_sized_vocabulary_is_accepted() {
        let cfg = WorldConfig {
            n_concepts: 100,
            n_predicates: 70,
            d_g: 32,
            train_scenes: 50,
            test_scenes: 20,
            labels_per_box: [1, 3],
            zero_shot_fraction: 0.05,
            noise_sigma: 0.1,
            relational_predicates: true,
            seed: 1,
        };
        let (world, _) = generate_world(&cfg).unwrap();
        assert_eq!(world.vocabulary.n_concepts(), 100);
        // hasProperty rides along as an extra reserved predicate.
        assert_eq!(world.vocabulary.n_predicates(), 71);
        assert!(world.vocabulary.has_property().is_some());
    }

    #[test]
    fn noiseless_encoding_is_the_normalized_prototype_mean() {
        let mut cfg = toy_cfg();
        cfg.noise_sigma = 0.0;
        let (_, bank) = generate_world(&cfg).unwrap();
        let labels = BTreeSet::from([0usize, 12]);
        let mut rng = rng_from(99);
        let enc = bank.encode_concepts(&labels, &mut rng).unwrap();
        let a = bank.concept_prototype(0).unwrap();
        let b = bank.concept_prototype(12).unwrap();
        let mean: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).collect();
        let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (e, m) in enc.iter().zip(&mean) {
            assert!((e - m / norm).abs() < 1e-12);
        }
        // Single label with zero noise is exactly the prototype.
        let single = BTreeSet::from([3usize]);
        let enc = bank.encode_concepts(&single, &mut rng).unwrap();
        let proto = bank.concept_prototype(3).unwrap();
        assert_eq!(enc, proto.to_vec());
    }

    #[test]
    fn noisy_encoding_concentrates_on_the_noiseless_mean() {
        // Monte Carlo check at d_g = 4 where the normalization bias stays
        // inside the bound.
        let mut cfg = toy_cfg();
        cfg.d_g = 4;
        cfg.noise_sigma = 0.1;
        let (_, bank) = generate_world(&cfg).unwrap();
        let labels = BTreeSet::from([1usize]);
        let noiseless = bank.concept_prototype(1).unwrap().to_vec();
        let mut rng = rng_from(4);
        let n = 1000;
        let mut mean = vec![0.0; cfg.d_g];
        for _ in 0..n {
            let enc = bank.encode_concepts(&labels, &mut rng).unwrap();
            for (m, e) in mean.iter_mut().zip(&enc) {
                *m += e / n as f64;
            }
        }
        for (m, e) in mean.iter().zip(&noiseless) {
            assert!((m - e).abs() <= 0.02, "component off by {}", (m - e).abs());
        }
    }

    #[test]
    fn noiseless_features_are_nearest_to_their_own_prototypes() {
        // Separability precondition: with distinct prototypes and no noise,
        // the nearest prototype of a single-label box is that label.
        let mut cfg = toy_cfg();
        cfg.noise_sigma = 0.0;
        cfg.relational_predicates = false;
        let (world, bank) = generate_world(&cfg).unwrap();
        let n = world.vocabulary.n_concepts();
        let mut rng = rng_from(0);
        for c in 0..n {
            let enc = bank
                .encode_concepts(&BTreeSet::from([c]), &mut rng)
                .unwrap();
            let best = (0..n)
                .max_by(|&a, &b| {
                    let da = dot(&enc, bank.concept_prototype(a).unwrap());
                    let db = dot(&enc, bank.concept_prototype(b).unwrap());
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            assert_eq!(best, c);
        }
    }

    #[test]
    fn relational_worlds_alias_predicate_prototypes() {
        let (world, bank) = generate_world(&toy_cfg()).unwrap();
        assert_eq!(
            bank.predicate_prototype(0).unwrap(),
            bank.predicate_prototype(1).unwrap()
        );
        assert_ne!(
            bank.predicate_prototype(0).unwrap(),
            bank.predicate_prototype(2).unwrap()
        );
        let hp = world.vocabulary.has_property().unwrap();
        assert_ne!(
            bank.predicate_prototype(hp).unwrap(),
            bank.predicate_prototype(0).unwrap()
        );
    }
}
