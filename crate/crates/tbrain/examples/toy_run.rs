//! Scratch driver for tuning the toy-world training recipe.
//!
//! Run with, e.g.:
//! `cargo run --release -p tbrain --example toy_run -- 0.08 60`

use tbrain::decoder::{ModelDims, ModelParams};
use tbrain::eval::{
    ablation_dir, phrase_detection, predicate_detection, subject_recall_at_1, zero_shot_eval,
    Task, TruthFilter, DEFAULT_BEAM,
};
use tbrain::rng::rng_from;
use tbrain::sensory::{generate_world, WorldConfig};
use tbrain::training::{train_supervised, TrainConfig, TrainMode};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.08);
    let epochs: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(60);
    let d_q: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(32);
    let d_h: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(64);
    let noise: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(0.1);

    let wcfg = WorldConfig {
        n_concepts: 20,
        n_predicates: 8,
        d_g: 64,
        train_scenes: 500,
        test_scenes: 150,
        labels_per_box: [1, 3],
        zero_shot_fraction: 0.1,
        noise_sigma: noise,
        relational_predicates: true,
        seed: 7,
    };
    let (world, _) = generate_world(&wcfg).unwrap();
    eprintln!(
        "world: {} train scenes, {} test scenes, {} zero-shot statements, vocab {}x{}",
        world.train.len(),
        world.test.len(),
        world.zero_shot.len(),
        world.vocabulary.n_concepts(),
        world.vocabulary.n_predicates()
    );

    let dims = ModelDims {
        n_concepts: world.vocabulary.n_concepts(),
        n_predicates: world.vocabulary.n_predicates(),
        d_g: wcfg.d_g,
        d_q,
        d_h,
    };
    let mut params = ModelParams::init(dims, true, false, &mut rng_from(7));
    let untrained = params.clone();

    let tcfg = TrainConfig {
        learning_rate: lr,
        epochs,
        batch_size: 1,
        mode: TrainMode::Supervised,
        samples_per_scene: 30,
        seed: Some(7),
        freeze: vec![],
        d_q,
        d_h,
        use_skip: false,
        tie_weights: true,
        store_episodes: false,
        surprise_threshold: None,
        semantic_source: tbrain::decoder::MemorySource::Perceptual,
        early_stop: std::env::var("EARLY_STOP").is_ok(),
        patience: 5,
    };
    let start = std::time::Instant::now();
    let log = train_supervised(&mut params, &world.train, &world.test, &tcfg).unwrap();
    eprintln!("trained {} epochs in {:.1?}", log.rows.len(), start.elapsed());
    for row in &log.rows {
        eprintln!(
            "  epoch {:>3}  train {:.4}  heldout {:.4}",
            row.epoch, row.mean_cost, row.heldout_cost
        );
    }

    let pr1 = predicate_detection(&params, &world.test, 1, TruthFilter::All).unwrap();
    let ph10 = phrase_detection(&params, &world.test, 10, DEFAULT_BEAM, TruthFilter::All).unwrap();
    let dir1 = ablation_dir(&params, &world.test, 1, Task::Predicate).unwrap();
    let subj_full = subject_recall_at_1(&params, &world.test).unwrap();
    let subj_dir = subject_recall_at_1(&params.with_memory_disabled(), &world.test).unwrap();
    let zs_trained = zero_shot_eval(&params, &world.test, &world.zero_shot, 1, Task::Predicate).unwrap();
    let zs_untrained =
        zero_shot_eval(&untrained, &world.test, &world.zero_shot, 1, Task::Predicate).unwrap();
    let pr1_untrained = predicate_detection(&untrained, &world.test, 1, TruthFilter::All).unwrap();

    println!("predicate recall@1        {:.4}", pr1.recall);
    println!("phrase recall@10          {:.4}", ph10.recall);
    println!("dir predicate recall@1    {:.4}", dir1.recall);
    println!("subject@1 full/dir        {:.4} / {:.4}", subj_full, subj_dir);
    println!("zero-shot pred@1 trained  {:.4}", zs_trained.recall);
    println!("zero-shot pred@1 untrained{:.4}", zs_untrained.recall);
    println!("untrained predicate@1     {:.4}", pr1_untrained.recall);
}
