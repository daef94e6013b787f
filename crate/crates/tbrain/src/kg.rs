//! Symbol tables and the three knowledge-graph variants.
//!
//! A knowledge graph is a set of subject-predicate-object triples over a
//! fixed vocabulary of concepts and predicates. Three views are provided:
//!
//! - [`StaticKG`]: Boolean facts, true independent of time.
//! - [`TemporalKG`]: Boolean facts per time instance.
//! - [`ProbabilisticKG`]: per-triple Bernoulli rates in `[0, 1]`.
//!
//! All tensors are stored sparsely; absent entries are exact zeros. The
//! structures are immutable once built and safe to read concurrently.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::bernoulli;

pub type ConceptId = usize;
pub type PredicateId = usize;

/// Reserved predicate for unary facts extracted by the simple decoder.
pub const HAS_PROPERTY: &str = "hasProperty";

/// What kind of thing a concept names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptKind {
    Entity,
    Class,
    Attribute,
    Location,
}

impl ConceptKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConceptKind::Entity => "entity",
            ConceptKind::Class => "class",
            ConceptKind::Attribute => "attribute",
            ConceptKind::Location => "location",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "entity" => Some(ConceptKind::Entity),
            "class" => Some(ConceptKind::Class),
            "attribute" => Some(ConceptKind::Attribute),
            "location" => Some(ConceptKind::Location),
            _ => None,
        }
    }
}

/// Ordered symbol tables for concepts and predicates.
///
/// Concepts and predicates live in two disjoint index spaces; indices are
/// stable zero-based positions in their respective lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    concepts: Vec<String>,
    kinds: Vec<ConceptKind>,
    predicates: Vec<String>,
    concept_by_name: BTreeMap<String, ConceptId>,
    predicate_by_name: BTreeMap<String, PredicateId>,
}

impl Vocabulary {
    pub fn new(concepts: Vec<(String, ConceptKind)>, predicates: Vec<String>) -> Result<Self> {
        if concepts.is_empty() {
            return Err(Error::Config("vocabulary needs at least one concept".into()));
        }
        if predicates.is_empty() {
            return Err(Error::Config(
                "vocabulary needs at least one predicate".into(),
            ));
        }
        let mut concept_by_name = BTreeMap::new();
        let mut names = Vec::with_capacity(concepts.len());
        let mut kinds = Vec::with_capacity(concepts.len());
        for (i, (name, kind)) in concepts.into_iter().enumerate() {
            if concept_by_name.insert(name.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate concept name {name:?}")));
            }
            names.push(name);
            kinds.push(kind);
        }
        let mut predicate_by_name = BTreeMap::new();
        for (i, name) in predicates.iter().enumerate() {
            if predicate_by_name.insert(name.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate predicate name {name:?}")));
            }
        }
        Ok(Vocabulary {
            concepts: names,
            kinds,
            predicates,
            concept_by_name,
            predicate_by_name,
        })
    }

    pub fn n_concepts(&self) -> usize {
        self.concepts.len()
    }

    pub fn n_predicates(&self) -> usize {
        self.predicates.len()
    }

    pub fn shape(&self) -> TensorShape {
        TensorShape {
            n_concepts: self.n_concepts(),
            n_predicates: self.n_predicates(),
        }
    }

    pub fn concept_name(&self, id: ConceptId) -> Result<&str> {
        self.concepts
            .get(id)
            .map(String::as_str)
            .ok_or_else(|| Error::InvalidIndex(format!("concept {id}")))
    }

    pub fn predicate_name(&self, id: PredicateId) -> Result<&str> {
        self.predicates
            .get(id)
            .map(String::as_str)
            .ok_or_else(|| Error::InvalidIndex(format!("predicate {id}")))
    }

    pub fn concept_kind(&self, id: ConceptId) -> Result<ConceptKind> {
        self.kinds
            .get(id)
            .copied()
            .ok_or_else(|| Error::InvalidIndex(format!("concept {id}")))
    }

    pub fn concept_index(&self, name: &str) -> Result<ConceptId> {
        self.concept_by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidIndex(format!("unknown concept {name:?}")))
    }

    pub fn predicate_index(&self, name: &str) -> Result<PredicateId> {
        self.predicate_by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidIndex(format!("unknown predicate {name:?}")))
    }

    /// Index of the reserved `hasProperty` predicate, if present.
    pub fn has_property(&self) -> Option<PredicateId> {
        self.predicate_by_name.get(HAS_PROPERTY).copied()
    }

    pub fn concepts(&self) -> impl Iterator<Item = (&str, ConceptKind)> {
        self.concepts
            .iter()
            .map(String::as_str)
            .zip(self.kinds.iter().copied())
    }

    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.predicates.iter().map(String::as_str)
    }
}

/// A subject-predicate-object statement by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub s: ConceptId,
    pub p: PredicateId,
    pub o: ConceptId,
}

impl Triple {
    pub fn new(s: ConceptId, p: PredicateId, o: ConceptId) -> Self {
        Triple { s, p, o }
    }
}

/// Index bounds of an adjacency tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorShape {
    pub n_concepts: usize,
    pub n_predicates: usize,
}

impl TensorShape {
    pub fn check(&self, t: Triple) -> Result<()> {
        if t.s >= self.n_concepts || t.o >= self.n_concepts {
            return Err(Error::InvalidIndex(format!(
                "triple ({}, {}, {}) outside concept range 0..{}",
                t.s, t.p, t.o, self.n_concepts
            )));
        }
        if t.p >= self.n_predicates {
            return Err(Error::InvalidIndex(format!(
                "triple ({}, {}, {}) outside predicate range 0..{}",
                t.s, t.p, t.o, self.n_predicates
            )));
        }
        Ok(())
    }
}

/// Boolean adjacency tensor: a deduplicated set of triples.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticKG {
    shape: TensorShape,
    triples: BTreeSet<Triple>,
}

impl StaticKG {
    pub fn new(shape: TensorShape) -> Self {
        StaticKG {
            shape,
            triples: BTreeSet::new(),
        }
    }

    pub fn from_triples(
        shape: TensorShape,
        triples: impl IntoIterator<Item = Triple>,
    ) -> Result<Self> {
        let mut kg = StaticKG::new(shape);
        for t in triples {
            kg.insert(t)?;
        }
        Ok(kg)
    }

    pub fn shape(&self) -> TensorShape {
        self.shape
    }

    pub fn insert(&mut self, t: Triple) -> Result<bool> {
        self.shape.check(t)?;
        Ok(self.triples.insert(t))
    }

    /// The tensor entry: 1 iff the triple is a member.
    pub fn contains(&self, t: Triple) -> Result<bool> {
        self.shape.check(t)?;
        Ok(self.triples.contains(&t))
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.triples.iter().copied()
    }
}

/// Boolean adjacency tensor with a time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalKG {
    shape: TensorShape,
    n_times: u32,
    by_time: BTreeMap<u32, BTreeSet<Triple>>,
}

impl TemporalKG {
    pub fn new(shape: TensorShape, n_times: u32) -> Self {
        TemporalKG {
            shape,
            n_times,
            by_time: BTreeMap::new(),
        }
    }

    pub fn shape(&self) -> TensorShape {
        self.shape
    }

    pub fn n_times(&self) -> u32 {
        self.n_times
    }

    pub fn insert(&mut self, t: u32, triple: Triple) -> Result<bool> {
        if t >= self.n_times {
            return Err(Error::InvalidIndex(format!(
                "time {t} outside range 0..{}",
                self.n_times
            )));
        }
        self.shape.check(triple)?;
        Ok(self.by_time.entry(t).or_default().insert(triple))
    }

    pub fn contains(&self, t: u32, triple: Triple) -> Result<bool> {
        if t >= self.n_times {
            return Err(Error::InvalidIndex(format!(
                "time {t} outside range 0..{}",
                self.n_times
            )));
        }
        self.shape.check(triple)?;
        Ok(self
            .by_time
            .get(&t)
            .map(|set| set.contains(&triple))
            .unwrap_or(false))
    }

    /// Triples true at time `t`; empty if nothing was recorded there.
    pub fn at(&self, t: u32) -> impl Iterator<Item = Triple> + '_ {
        self.by_time
            .get(&t)
            .into_iter()
            .flat_map(|set| set.iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Triple)> + '_ {
        self.by_time
            .iter()
            .flat_map(|(t, set)| set.iter().map(move |tr| (*t, *tr)))
    }

    pub fn total_entries(&self) -> usize {
        self.by_time.values().map(BTreeSet::len).sum()
    }

    /// Rate estimate per triple: the fraction of time instances where the
    /// triple is true. Triples never observed stay absent.
    pub fn estimate_gamma(&self) -> Result<ProbabilisticKG> {
        if self.n_times == 0 {
            return Err(Error::EmptyHistory);
        }
        let mut counts: BTreeMap<Triple, u32> = BTreeMap::new();
        for (_, triple) in self.iter() {
            *counts.entry(triple).or_insert(0) += 1;
        }
        let mut pkg = ProbabilisticKG::new(self.shape);
        for (triple, count) in counts {
            pkg.set(triple, count as f64 / self.n_times as f64)?;
        }
        Ok(pkg)
    }
}

/// Weighted adjacency tensor with Bernoulli rates.
///
/// Absent entries are exact zeros and no explicit zero is ever stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticKG {
    shape: TensorShape,
    gamma: BTreeMap<Triple, f64>,
}

impl ProbabilisticKG {
    pub fn new(shape: TensorShape) -> Self {
        ProbabilisticKG {
            shape,
            gamma: BTreeMap::new(),
        }
    }

    pub fn shape(&self) -> TensorShape {
        self.shape
    }

    pub fn set(&mut self, t: Triple, weight: f64) -> Result<()> {
        self.shape.check(t)?;
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Config(format!(
                "gamma weight {weight} outside [0, 1]"
            )));
        }
        if weight == 0.0 {
            self.gamma.remove(&t);
        } else {
            self.gamma.insert(t, weight);
        }
        Ok(())
    }

    pub fn gamma(&self, t: Triple) -> Result<f64> {
        self.shape.check(t)?;
        Ok(self.gamma.get(&t).copied().unwrap_or(0.0))
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Triple, f64)> + '_ {
        self.gamma.iter().map(|(t, g)| (*t, *g))
    }

    /// Draw a temporal history: each stored triple appears at each time
    /// instance independently with its rate.
    ///
    /// Draws are consumed triple-by-triple in canonical order, each triple
    /// covering times `0..n_t` in order, so a fixed seed yields the same
    /// history everywhere.
    pub fn sample_temporal(&self, n_t: u32, rng: &mut ChaCha8Rng) -> Result<TemporalKG> {
        if n_t == 0 {
            return Err(Error::Config("sample_temporal needs n_t >= 1".into()));
        }
        let mut tkg = TemporalKG::new(self.shape, n_t);
        for (triple, gamma) in self.iter() {
            for t in 0..n_t {
                if bernoulli(rng, gamma) {
                    tkg.insert(t, triple)?;
                }
            }
        }
        Ok(tkg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    fn shape() -> TensorShape {
        TensorShape {
            n_concepts: 4,
            n_predicates: 2,
        }
    }

    #[test]
    fn static_membership() {
        let kg = StaticKG::from_triples(shape(), [Triple::new(0, 0, 1)]).unwrap();
        assert!(kg.contains(Triple::new(0, 0, 1)).unwrap());
        assert!(!kg.contains(Triple::new(1, 0, 0)).unwrap());
        let empty = StaticKG::new(shape());
        assert!(!empty.contains(Triple::new(0, 0, 1)).unwrap());
    }

    #[test]
    fn static_rejects_out_of_range() {
        let kg = StaticKG::new(shape());
        assert!(matches!(
            kg.contains(Triple::new(4, 0, 0)),
            Err(Error::InvalidIndex(_))
        ));
        assert!(matches!(
            kg.contains(Triple::new(0, 2, 0)),
            Err(Error::InvalidIndex(_))
        ));
    }

    #[test]
    fn contains_is_pure() {
        let kg = StaticKG::from_triples(shape(), [Triple::new(1, 1, 2)]).unwrap();
        let t = Triple::new(1, 1, 2);
        let first = kg.contains(t).unwrap();
        for _ in 0..10 {
            assert_eq!(kg.contains(t).unwrap(), first);
        }
    }

    #[test]
    fn gamma_estimate_is_direct_average() {
        let mut tkg = TemporalKG::new(shape(), 4);
        let always = Triple::new(0, 0, 1);
        let once = Triple::new(1, 0, 2);
        for t in 0..4 {
            tkg.insert(t, always).unwrap();
        }
        tkg.insert(2, once).unwrap();
        let pkg = tkg.estimate_gamma().unwrap();
        assert_eq!(pkg.gamma(always).unwrap(), 1.0);
        assert_eq!(pkg.gamma(once).unwrap(), 0.25);
        assert_eq!(pkg.gamma(Triple::new(3, 1, 3)).unwrap(), 0.0);
    }

    #[test]
    fn gamma_estimate_rejects_empty_history() {
        let tkg = TemporalKG::new(shape(), 0);
        assert!(matches!(tkg.estimate_gamma(), Err(Error::EmptyHistory)));
    }

    #[test]
    fn temporal_sampling_respects_degenerate_rates() {
        let mut pkg = ProbabilisticKG::new(shape());
        let sure = Triple::new(0, 0, 1);
        pkg.set(sure, 1.0).unwrap();
        pkg.set(Triple::new(1, 0, 2), 0.0).unwrap();
        let tkg = pkg.sample_temporal(64, &mut rng_from(5)).unwrap();
        for t in 0..64 {
            assert!(tkg.contains(t, sure).unwrap());
            assert!(!tkg.contains(t, Triple::new(1, 0, 2)).unwrap());
        }
    }

    #[test]
    fn temporal_sampling_matches_rate_within_binomial_noise() {
        // Monte Carlo oracle: with n_t = 10^4 and gamma = 0.5 the empirical
        // frequency lies within 3 sigma = 3 * 0.5 / 100 = 0.015 < 0.02.
        let mut pkg = ProbabilisticKG::new(shape());
        let t = Triple::new(2, 1, 3);
        pkg.set(t, 0.5).unwrap();
        let n_t = 10_000u32;
        let tkg = pkg.sample_temporal(n_t, &mut rng_from(11)).unwrap();
        let count = (0..n_t).filter(|i| tkg.contains(*i, t).unwrap()).count();
        let freq = count as f64 / n_t as f64;
        assert!((freq - 0.5).abs() <= 0.02, "freq {freq}");
    }

    #[test]
    fn zero_weight_entries_are_not_stored() {
        let mut pkg = ProbabilisticKG::new(shape());
        pkg.set(Triple::new(0, 0, 1), 0.4).unwrap();
        pkg.set(Triple::new(0, 0, 1), 0.0).unwrap();
        assert!(pkg.is_empty());
        assert!(pkg.set(Triple::new(0, 0, 1), 1.5).is_err());
    }

    #[test]
    fn vocabulary_round_trips_names_and_rejects_duplicates() {
        let vocab = Vocabulary::new(
            vec![
                ("jack".into(), ConceptKind::Entity),
                ("person".into(), ConceptKind::Class),
            ],
            vec!["knows".into(), HAS_PROPERTY.into()],
        )
        .unwrap();
        assert_eq!(vocab.concept_index("jack").unwrap(), 0);
        assert_eq!(vocab.concept_name(1).unwrap(), "person");
        assert_eq!(vocab.has_property(), Some(1));
        assert!(Vocabulary::new(
            vec![
                ("a".into(), ConceptKind::Entity),
                ("a".into(), ConceptKind::Entity)
            ],
            vec!["p".into()]
        )
        .is_err());
    }
}
