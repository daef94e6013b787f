//! Exact tabular serialization of knowledge graphs into triple streams.
//!
//! A graph becomes a categorical joint over its triples, the joint is
//! factored by the chain rule into subject, object-given-subject and
//! predicate-given-pair tables, and triples are drawn by ancestral sampling.
//! The decomposition order is fixed to S, then O, then P.
//!
//! Every table is renormalized after construction; supports are kept in
//! canonical `(s, p, o)` order so a fixed seed yields identical streams
//! across platforms.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kg::{ConceptId, PredicateId, ProbabilisticKG, StaticKG, Triple};
use crate::rng::uniform_f64;

/// A categorical distribution over triples with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTripleDist {
    support: Vec<(Triple, f64)>,
}

impl JointTripleDist {
    /// Uniform distribution over the members of a static graph.
    pub fn from_static(kg: &StaticKG) -> Result<Self> {
        if kg.is_empty() {
            return Err(Error::EmptySupport(
                "static graph has no triples to serialize".into(),
            ));
        }
        let w = 1.0 / kg.len() as f64;
        Ok(JointTripleDist {
            support: kg.iter().map(|t| (t, w)).collect(),
        })
    }

    /// Rates of a probabilistic graph normalized to a distribution.
    pub fn from_prob(pkg: &ProbabilisticKG) -> Result<Self> {
        let total: f64 = pkg.iter().map(|(_, g)| g).sum();
        if total <= 0.0 {
            return Err(Error::EmptySupport(
                "probabilistic graph has zero total mass".into(),
            ));
        }
        Ok(JointTripleDist {
            support: pkg.iter().map(|(t, g)| (t, g / total)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Triple, f64)> + '_ {
        self.support.iter().copied()
    }

    /// Probability of a triple; zero off support.
    pub fn prob(&self, t: Triple) -> f64 {
        self.support
            .binary_search_by(|(s, _)| s.cmp(&t))
            .map(|i| self.support[i].1)
            .unwrap_or(0.0)
    }
}

/// Chain-rule factorization of a triple joint.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainFactors {
    subject: Vec<(ConceptId, f64)>,
    object_given_subject: BTreeMap<ConceptId, Vec<(ConceptId, f64)>>,
    predicate_given_pair: BTreeMap<(ConceptId, ConceptId), Vec<(PredicateId, f64)>>,
}

fn renormalize<K>(table: &mut [(K, f64)]) {
    let total: f64 = table.iter().map(|(_, w)| w).sum();
    for (_, w) in table.iter_mut() {
        *w /= total;
    }
}

impl ChainFactors {
    /// Factor the joint into marginal and conditional tables.
    pub fn decompose(joint: &JointTripleDist) -> Self {
        let mut subject_mass: BTreeMap<ConceptId, f64> = BTreeMap::new();
        let mut pair_mass: BTreeMap<(ConceptId, ConceptId), f64> = BTreeMap::new();
        for (t, w) in joint.iter() {
            *subject_mass.entry(t.s).or_insert(0.0) += w;
            *pair_mass.entry((t.s, t.o)).or_insert(0.0) += w;
        }

        let mut subject: Vec<(ConceptId, f64)> = subject_mass.iter().map(|(s, w)| (*s, *w)).collect();
        renormalize(&mut subject);

        let mut object_given_subject: BTreeMap<ConceptId, Vec<(ConceptId, f64)>> = BTreeMap::new();
        for ((s, o), w) in &pair_mass {
            object_given_subject
                .entry(*s)
                .or_default()
                .push((*o, w / subject_mass[s]));
        }
        for table in object_given_subject.values_mut() {
            renormalize(table);
        }

        let mut predicate_given_pair: BTreeMap<(ConceptId, ConceptId), Vec<(PredicateId, f64)>> =
            BTreeMap::new();
        for (t, w) in joint.iter() {
            predicate_given_pair
                .entry((t.s, t.o))
                .or_default()
                .push((t.p, w / pair_mass[&(t.s, t.o)]));
        }
        for table in predicate_given_pair.values_mut() {
            table.sort_by_key(|(p, _)| *p);
            renormalize(table);
        }

        ChainFactors {
            subject,
            object_given_subject,
            predicate_given_pair,
        }
    }

    pub fn subject_marginal(&self) -> &[(ConceptId, f64)] {
        &self.subject
    }

    pub fn object_table(&self, s: ConceptId) -> Option<&[(ConceptId, f64)]> {
        self.object_given_subject.get(&s).map(Vec::as_slice)
    }

    pub fn predicate_table(&self, s: ConceptId, o: ConceptId) -> Option<&[(PredicateId, f64)]> {
        self.predicate_given_pair.get(&(s, o)).map(Vec::as_slice)
    }

    /// Product of the three factors; zero off support.
    pub fn reconstruct(&self, t: Triple) -> f64 {
        let ps = match self.subject.iter().find(|(s, _)| *s == t.s) {
            Some((_, w)) => *w,
            None => return 0.0,
        };
        let po = match self
            .object_given_subject
            .get(&t.s)
            .and_then(|table| table.iter().find(|(o, _)| *o == t.o))
        {
            Some((_, w)) => *w,
            None => return 0.0,
        };
        let pp = match self
            .predicate_given_pair
            .get(&(t.s, t.o))
            .and_then(|table| table.iter().find(|(p, _)| *p == t.p))
        {
            Some((_, w)) => *w,
            None => return 0.0,
        };
        ps * po * pp
    }

    /// Ancestral draw: subject, then object, then predicate.
    ///
    /// With `fixed_subject` the subject step is skipped and the given concept
    /// is committed instead; it must carry nonzero marginal mass.
    pub fn sample(&self, rng: &mut ChaCha8Rng, fixed_subject: Option<ConceptId>) -> Result<Triple> {
        let s = match fixed_subject {
            Some(s) => {
                let supported = self
                    .subject
                    .iter()
                    .any(|(cand, w)| *cand == s && *w > 0.0);
                if !supported {
                    return Err(Error::UnsupportedCondition(format!(
                        "subject {s} has zero marginal probability"
                    )));
                }
                s
            }
            None => draw(rng, &self.subject),
        };
        let o = draw(
            rng,
            self.object_given_subject
                .get(&s)
                .expect("subject with mass has an object table"),
        );
        let p = draw(
            rng,
            self.predicate_given_pair
                .get(&(s, o))
                .expect("pair with mass has a predicate table"),
        );
        Ok(Triple::new(s, p, o))
    }
}

/// Inverse-CDF walk over a table in its stored (canonical) order.
fn draw<K: Copy>(rng: &mut ChaCha8Rng, table: &[(K, f64)]) -> K {
    let u = uniform_f64(rng);
    let mut cum = 0.0;
    let mut last = table[0].0;
    for (k, w) in table {
        if *w > 0.0 {
            last = *k;
        }
        cum += w;
        if u < cum {
            return *k;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::TensorShape;
    use crate::rng::rng_from;

    fn shape() -> TensorShape {
        TensorShape {
            n_concepts: 6,
            n_predicates: 3,
        }
    }

    #[test]
    fn uniform_over_static_members() {
        let kg = StaticKG::from_triples(
            shape(),
            [
                Triple::new(0, 0, 1),
                Triple::new(0, 1, 1),
                Triple::new(2, 0, 3),
                Triple::new(4, 2, 5),
            ],
        )
        .unwrap();
        let joint = JointTripleDist::from_static(&kg).unwrap();
        assert_eq!(joint.len(), 4);
        for (_, w) in joint.iter() {
            assert_eq!(w, 0.25);
        }
        let single =
            StaticKG::from_triples(shape(), [Triple::new(1, 1, 2)]).unwrap();
        let joint = JointTripleDist::from_static(&single).unwrap();
        assert_eq!(joint.prob(Triple::new(1, 1, 2)), 1.0);
    }

    #[test]
    fn empty_supports_are_rejected() {
        assert!(matches!(
            JointTripleDist::from_static(&StaticKG::new(shape())),
            Err(Error::EmptySupport(_))
        ));
        assert!(matches!(
            JointTripleDist::from_prob(&ProbabilisticKG::new(shape())),
            Err(Error::EmptySupport(_))
        ));
    }

    #[test]
    fn prob_graph_weights_normalize() {
        let mut pkg = ProbabilisticKG::new(shape());
        pkg.set(Triple::new(0, 0, 1), 0.8).unwrap();
        pkg.set(Triple::new(1, 0, 2), 0.2).unwrap();
        let joint = JointTripleDist::from_prob(&pkg).unwrap();
        assert!((joint.prob(Triple::new(0, 0, 1)) - 0.8).abs() < 1e-15);
        assert!((joint.prob(Triple::new(1, 0, 2)) - 0.2).abs() < 1e-15);

        let mut single = ProbabilisticKG::new(shape());
        single.set(Triple::new(2, 1, 3), 0.3).unwrap();
        let joint = JointTripleDist::from_prob(&single).unwrap();
        assert_eq!(joint.prob(Triple::new(2, 1, 3)), 1.0);

        let mut three = ProbabilisticKG::new(shape());
        three.set(Triple::new(0, 0, 1), 0.5).unwrap();
        three.set(Triple::new(1, 1, 2), 0.3).unwrap();
        three.set(Triple::new(2, 2, 3), 0.2).unwrap();
        let joint = JointTripleDist::from_prob(&three).unwrap();
        let total: f64 = joint.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forced_marginals_decompose_exactly() {
        let kg = StaticKG::from_triples(
            shape(),
            [Triple::new(0, 0, 1), Triple::new(0, 1, 1)],
        )
        .unwrap();
        let factors = ChainFactors::decompose(&JointTripleDist::from_static(&kg).unwrap());
        assert_eq!(factors.subject_marginal(), &[(0, 1.0)]);
        assert_eq!(factors.object_table(0).unwrap(), &[(1, 1.0)]);
        let preds = factors.predicate_table(0, 1).unwrap();
        assert_eq!(preds.len(), 2);
        for (_, w) in preds {
            assert!((w - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn single_triple_factors_are_unit() {
        let kg = StaticKG::from_triples(shape(), [Triple::new(3, 2, 4)]).unwrap();
        let joint = JointTripleDist::from_static(&kg).unwrap();
        let factors = ChainFactors::decompose(&joint);
        assert_eq!(factors.reconstruct(Triple::new(3, 2, 4)), 1.0);
        let mut rng = rng_from(0);
        for _ in 0..20 {
            assert_eq!(
                factors.sample(&mut rng, None).unwrap(),
                Triple::new(3, 2, 4)
            );
        }
    }

    #[test]
    fn reconstruction_matches_joint_on_random_instances() {
        // Brute-force oracle: the factor product must reproduce every joint
        // probability on randomly weighted supports.
        let mut rng = rng_from(17);
        for round in 0..20 {
            let mut pkg = ProbabilisticKG::new(shape());
            for s in 0..6 {
                for p in 0..3 {
                    for o in 0..6 {
                        if uniform_f64(&mut rng) < 0.3 {
                            pkg.set(Triple::new(s, p, o), uniform_f64(&mut rng).max(1e-6))
                                .unwrap();
                        }
                    }
                }
            }
            if pkg.is_empty() {
                continue;
            }
            let joint = JointTripleDist::from_prob(&pkg).unwrap();
            let factors = ChainFactors::decompose(&joint);
            for (t, w) in joint.iter() {
                let r = factors.reconstruct(t);
                assert!(
                    (r - w).abs() <= 1e-12,
                    "round {round}: triple {t:?} joint {w} reconstructed {r}"
                );
            }
        }
    }

    #[test]
    fn fixed_subject_is_honored_and_validated() {
        let kg = StaticKG::from_triples(
            shape(),
            [
                Triple::new(0, 0, 1),
                Triple::new(2, 1, 3),
                Triple::new(2, 2, 4),
            ],
        )
        .unwrap();
        let factors = ChainFactors::decompose(&JointTripleDist::from_static(&kg).unwrap());
        let mut rng = rng_from(2);
        for _ in 0..50 {
            let t = factors.sample(&mut rng, Some(2)).unwrap();
            assert_eq!(t.s, 2);
        }
        assert!(matches!(
            factors.sample(&mut rng, Some(5)),
            Err(Error::UnsupportedCondition(_))
        ));
    }

    #[test]
    fn conditional_sampler_matches_renormalized_slice() {
        // Brute-force conditioning oracle: empirical (o, p) frequencies under
        // a fixed subject track the renormalized joint slice.
        let mut pkg = ProbabilisticKG::new(shape());
        pkg.set(Triple::new(1, 0, 2), 0.4).unwrap();
        pkg.set(Triple::new(1, 1, 2), 0.2).unwrap();
        pkg.set(Triple::new(1, 2, 3), 0.2).unwrap();
        pkg.set(Triple::new(4, 0, 5), 0.9).unwrap();
        let joint = JointTripleDist::from_prob(&pkg).unwrap();
        let factors = ChainFactors::decompose(&joint);

        let slice_total: f64 = joint.iter().filter(|(t, _)| t.s == 1).map(|(_, w)| w).sum();
        let mut rng = rng_from(23);
        let n = 100_000;
        let mut counts: BTreeMap<Triple, usize> = BTreeMap::new();
        for _ in 0..n {
            let t = factors.sample(&mut rng, Some(1)).unwrap();
            *counts.entry(t).or_insert(0) += 1;
        }
        for (t, w) in joint.iter().filter(|(t, _)| t.s == 1) {
            let expected = w / slice_total;
            let freq = counts.get(&t).copied().unwrap_or(0) as f64 / n as f64;
            assert!(
                (freq - expected).abs() < 0.01,
                "triple {t:?} freq {freq} expected {expected}"
            );
        }
    }
}
