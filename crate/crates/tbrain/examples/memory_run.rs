//! Scratch driver for the semantic-memory, episodic and replay recipes.

use std::collections::BTreeMap;

use tbrain::decoder::{sample_semantic, MemorySource, ModelDims, ModelParams};
use tbrain::eval::semantic_recall;
use tbrain::kg::Triple;
use tbrain::rng::rng_from;
use tbrain::sensory::{generate_world, WorldConfig};
use tbrain::training::{
    consolidate_semantic, cost_prob, train_semantic, train_supervised, TrainConfig, TrainMode,
};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let sem_lr: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.5);
    let sem_epochs: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(10);
    let unfreeze: bool = args.get(3).map(|s| s == "unfreeze").unwrap_or(false);

    let wcfg = WorldConfig {
        n_concepts: 20,
        n_predicates: 8,
        d_g: 64,
        train_scenes: 500,
        test_scenes: 150,
        labels_per_box: [1, 3],
        zero_shot_fraction: 0.1,
        noise_sigma: 0.05,
        relational_predicates: true,
        seed: 7,
    };
    let (world, _) = generate_world(&wcfg).unwrap();
    let dims = ModelDims {
        n_concepts: 20,
        n_predicates: 9,
        d_g: 64,
        d_q: 32,
        d_h: 64,
    };
    let mut params = ModelParams::init(dims, true, false, &mut rng_from(7));

    let mut tcfg = TrainConfig {
        learning_rate: 0.15,
        epochs: 100,
        batch_size: 1,
        mode: TrainMode::Supervised,
        samples_per_scene: 30,
        seed: Some(7),
        freeze: vec![],
        d_q: 32,
        d_h: 64,
        use_skip: false,
        tie_weights: true,
        store_episodes: true,
        surprise_threshold: None,
        semantic_source: MemorySource::Perceptual,
        early_stop: false,
        patience: 5,
    };
    let t0 = std::time::Instant::now();
    train_supervised(&mut params, &world.train, &world.test, &tcfg).unwrap();
    eprintln!("supervised done in {:.1?}, episodes {}", t0.elapsed(), params.episodes.len());

    // Consolidate, then measure subject-slice recall of the training triples.
    consolidate_semantic(&mut params).unwrap();
    let train_stream: Vec<Triple> = world
        .train
        .iter()
        .flat_map(|s| s.truth_triples())
        .collect();
    let unique: std::collections::BTreeSet<Triple> = train_stream.iter().copied().collect();
    eprintln!("stream {} triples, {} unique", train_stream.len(), unique.len());

    let baseline10 = semantic_recall(&params, &unique, 10, MemorySource::Perceptual).unwrap();
    eprintln!("consolidated semantic recall@10 {baseline10:.4}");

    // One epoch of pure semantic training.
    tcfg.mode = TrainMode::Semantic;
    tcfg.learning_rate = sem_lr;
    tcfg.epochs = 1;
    tcfg.store_episodes = false;
    if unfreeze {
        tcfg.freeze = vec![];
    }
    let mut one_epoch = params.clone();
    train_semantic(&mut one_epoch, &train_stream, &[], &tcfg).unwrap();
    let after1 = semantic_recall(&one_epoch, &unique, 10, MemorySource::Perceptual).unwrap();
    eprintln!("after 1 semantic epoch  recall@10 {after1:.4} (delta {:+.4})", after1 - baseline10);

    // Longer semantic training, then total variation of 10^4 samples
    // against the training-stream frequencies.
    tcfg.epochs = sem_epochs;
    let mut adapted = params.clone();
    train_semantic(&mut adapted, &train_stream, &[], &tcfg).unwrap();
    let after_n = semantic_recall(&adapted, &unique, 10, MemorySource::Perceptual).unwrap();
    eprintln!("after {sem_epochs} semantic epochs recall@10 {after_n:.4}");

    let mut truth_freq: BTreeMap<Triple, f64> = BTreeMap::new();
    for t in &train_stream {
        *truth_freq.entry(*t).or_insert(0.0) += 1.0 / train_stream.len() as f64;
    }
    let n_draws = 10_000;
    let mut rng = rng_from(99);
    let mut model_freq: BTreeMap<Triple, f64> = BTreeMap::new();
    for _ in 0..n_draws {
        let t = sample_semantic(&adapted, MemorySource::Perceptual, None, &mut rng).unwrap();
        *model_freq.entry(t).or_insert(0.0) += 1.0 / n_draws as f64;
    }
    let keys: std::collections::BTreeSet<Triple> = truth_freq
        .keys()
        .chain(model_freq.keys())
        .copied()
        .collect();
    let tv: f64 = keys
        .iter()
        .map(|k| {
            (truth_freq.get(k).copied().unwrap_or(0.0)
                - model_freq.get(k).copied().unwrap_or(0.0))
            .abs()
        })
        .sum::<f64>()
        / 2.0;
    eprintln!("total variation after {sem_epochs} epochs: {tv:.4}");

    // Background replay: learn an old stream into the background memory,
    // then train on a new stream with replay and check retention.
    let old_stream: Vec<Triple> = train_stream.iter().take(200).copied().collect();
    let new_stream: Vec<Triple> = train_stream.iter().skip(600).take(200).copied().collect();
    let probe = old_stream[0];
    let mut bg = params.clone();
    tcfg.semantic_source = MemorySource::Background;
    tcfg.mode = TrainMode::Semantic;
    tcfg.epochs = 20;
    tcfg.freeze = vec![];
    train_semantic(&mut bg, &old_stream, &[], &tcfg).unwrap();
    let p_before = (-cost_prob(&bg, probe, MemorySource::Background).unwrap()).exp();

    let mut replayed = bg.clone();
    tcfg.mode = TrainMode::SemanticReplay;
    tcfg.epochs = 5;
    tcfg.samples_per_scene = 2;
    train_semantic(&mut replayed, &new_stream, &[], &tcfg).unwrap();
    let p_replay = (-cost_prob(&replayed, probe, MemorySource::Background).unwrap()).exp();

    let mut forgot = bg.clone();
    tcfg.mode = TrainMode::Semantic;
    train_semantic(&mut forgot, &new_stream, &[], &tcfg).unwrap();
    let p_forgot = (-cost_prob(&forgot, probe, MemorySource::Background).unwrap()).exp();

    eprintln!(
        "probe prob before {p_before:.5}, with replay {p_replay:.5} (ratio {:.3}), without {p_forgot:.5} (ratio {:.3})",
        p_replay / p_before,
        p_forgot / p_before
    );
}
