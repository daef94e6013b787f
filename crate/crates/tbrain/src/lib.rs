//! Knowledge-graph tensor models with a four-layer semantic decoder.
//!
//! The crate covers the full pipeline from symbolic knowledge to sampled
//! triple statements and back:
//!
//! - [`kg`]: symbol tables and static, temporal and probabilistic graphs
//!   viewed as sparse adjacency tensors.
//! - [`sampler`]: exact serialization of graphs into categorical joints,
//!   chain-rule factors and seeded ancestral sampling.
//! - [`sensory`]: a synthetic feature generator standing in for a vision
//!   backbone, plus an import format for externally computed features.
//! - [`decoder`]: the four-layer architecture (sensory buffer, shared
//!   representation, concept indices, working memory) that decodes triples
//!   from perception, semantic memory or episodic recall.
//! - [`training`]: cross-entropy costs, analytic gradients, supervised and
//!   self-supervised training, semantic adaptation, replay, consolidation.
//! - [`eval`]: Recall@K tasks with zero-shot splits and ablations.
//! - [`fmt`]: the on-disk formats (TSV graphs, TB-FEAT features, TBRAIN1
//!   models, strict JSON configs, result tables).
//!
//! All randomness flows through 64-bit seeds (see [`rng`]); identical seeds
//! reproduce worlds, training runs and sample streams byte for byte.

pub mod decoder;
pub mod error;
pub mod eval;
pub mod fmt;
pub mod kg;
pub mod linalg;
pub mod rng;
pub mod sampler;
pub mod sensory;
pub mod training;

pub use error::{Error, Result};
