//! Support-based behavioral distance between models and sampled behaviors.
//!
//! For two behaviors over words of `h` letters, the distance is the mass the
//! first puts on words the second cannot produce plus the converse. Only
//! supports decide which words count; masses decide how much they weigh.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::alphabet::{Alphabet, Letter};
use crate::distribution::{one_sided_gaps, CategoricalDistribution};
use crate::error::{Error, Result};
use crate::model::{build_model, unroll, MemoryMarkovModel, ModelSampler};
use crate::rng::{RandomStream, StreamDomain};
use crate::sampler::SampleSet;
use crate::trie::WordTrie;
use crate::DEFAULT_SUPPORT_CAP;

/// Something with a behavior over words of a given horizon.
#[derive(Clone, Copy, Debug)]
pub enum BehaviorSource<'a> {
    Model(&'a MemoryMarkovModel),
    /// The empirical distribution of the samples' `h`-prefixes.
    Samples(&'a SampleSet),
    /// A known distribution, e.g. the exact behavior of a concrete system.
    Distribution(&'a CategoricalDistribution),
}

impl BehaviorSource<'_> {
    pub fn memory(&self) -> Option<usize> {
        match self {
            BehaviorSource::Model(m) => Some(m.memory()),
            _ => None,
        }
    }

    fn alphabet(&self) -> Option<&Alphabet> {
        match self {
            BehaviorSource::Model(m) => Some(m.alphabet()),
            BehaviorSource::Samples(s) => Some(s.alphabet()),
            BehaviorSource::Distribution(_) => None,
        }
    }

    fn check_horizon(&self, h: usize) -> Result<()> {
        match self {
            BehaviorSource::Model(m) if h < m.memory() => Err(Error::invalid(format!(
                "horizon {h} is below the model memory {}",
                m.memory()
            ))),
            BehaviorSource::Samples(s) if h == 0 || h > s.word_len() => {
                Err(Error::invalid(format!(
                    "horizon {h} must be in 1..={} for these samples",
                    s.word_len()
                )))
            }
            BehaviorSource::Distribution(d) if d.word_len() != h => Err(Error::invalid(format!(
                "distribution is over {} letters, horizon is {h}",
                d.word_len()
            ))),
            _ => Ok(()),
        }
    }
}

/// How to evaluate the distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Enumerate both behaviors, failing beyond `cap` words.
    Exact { cap: usize },
    /// Estimate each one-sided term from `samples` words drawn from the side
    /// it weighs, tested for membership in the other side's support.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Method {
    pub fn exact() -> Self {
        Method::Exact {
            cap: DEFAULT_SUPPORT_CAP,
        }
    }

    pub fn tag(&self) -> MethodTag {
        match *self {
            Method::Exact { .. } => MethodTag::Exact,
            Method::MonteCarlo { samples, .. } => MethodTag::MonteCarlo(samples),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodTag {
    Exact,
    MonteCarlo(usize),
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodTag::Exact => f.write_str("exact"),
            MethodTag::MonteCarlo(n) => write!(f, "monte-carlo({n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceReport {
    /// Horizon in letters.
    pub horizon: usize,
    pub memory1: Option<usize>,
    pub memory2: Option<usize>,
    pub distance: f64,
    /// Mass of the first behavior outside the second's support.
    pub left: f64,
    /// Mass of the second behavior outside the first's support.
    pub right: f64,
    pub method: MethodTag,
    /// Exact support sizes, or distinct words seen when sampling.
    pub support1: usize,
    pub support2: usize,
    pub absorbed1: f64,
    pub absorbed2: f64,
}

impl DistanceReport {
    /// The same report with the two sides exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            memory1: self.memory2,
            memory2: self.memory1,
            left: self.right,
            right: self.left,
            support1: self.support2,
            support2: self.support1,
            absorbed1: self.absorbed2,
            absorbed2: self.absorbed1,
            ..self.clone()
        }
    }

    /// Both behaviors have words the other lacks. A refinement compared to a
    /// coarser model with ample data usually only has a left term.
    pub fn both_sides_nonzero(&self) -> bool {
        self.left > 0.0 && self.right > 0.0
    }
}

/// An enumerated behavior at a fixed horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactBehavior {
    pub memory: Option<usize>,
    pub distribution: CategoricalDistribution,
    pub absorbed: f64,
}

impl ExactBehavior {
    pub fn of(source: BehaviorSource<'_>, h: usize, cap: usize) -> Result<Self> {
        source.check_horizon(h)?;
        match source {
            BehaviorSource::Model(m) => {
                let u = unroll(m, h, cap)?;
                Ok(Self {
                    memory: Some(m.memory()),
                    distribution: u.distribution,
                    absorbed: u.absorbed,
                })
            }
            BehaviorSource::Samples(s) => Ok(Self {
                memory: None,
                distribution: s.prefix_distribution(h)?,
                absorbed: 0.0,
            }),
            BehaviorSource::Distribution(d) => Ok(Self {
                memory: None,
                distribution: d.clone(),
                absorbed: 0.0,
            }),
        }
    }

    pub fn horizon(&self) -> usize {
        self.distribution.word_len()
    }

    /// Distance between two already enumerated behaviors.
    pub fn distance_to(&self, other: &ExactBehavior) -> Result<DistanceReport> {
        let (left, right) = one_sided_gaps(&self.distribution, &other.distribution)?;
        Ok(DistanceReport {
            horizon: self.horizon(),
            memory1: self.memory,
            memory2: other.memory,
            distance: left + right,
            left,
            right,
            method: MethodTag::Exact,
            support1: self.distribution.support_size(),
            support2: other.distribution.support_size(),
            absorbed1: self.absorbed,
            absorbed2: other.absorbed,
        })
    }
}

fn check_pair(s1: &BehaviorSource<'_>, s2: &BehaviorSource<'_>, h: usize) -> Result<()> {
    s1.check_horizon(h)?;
    s2.check_horizon(h)?;
    if let (Some(a), Some(b)) = (s1.alphabet(), s2.alphabet()) {
        if a != b {
            return Err(Error::invalid(format!(
                "alphabets differ: {:?} vs {:?}",
                a.labels(),
                b.labels()
            )));
        }
    }
    Ok(())
}

/// Exact support-membership test at a fixed horizon.
enum Membership<'a> {
    Model(&'a MemoryMarkovModel),
    Trie(WordTrie),
    Distribution(&'a CategoricalDistribution),
}

impl<'a> Membership<'a> {
    fn new(source: BehaviorSource<'a>, h: usize) -> Self {
        match source {
            BehaviorSource::Model(m) => Membership::Model(m),
            BehaviorSource::Samples(s) => Membership::Trie(s.words().map(|w| &w[..h]).collect()),
            BehaviorSource::Distribution(d) => Membership::Distribution(d),
        }
    }

    fn contains(&self, word: &[Letter]) -> bool {
        match self {
            Membership::Model(m) => m.produces(word),
            Membership::Trie(t) => t.contains(word),
            Membership::Distribution(d) => d.contains(word),
        }
    }
}

struct Term {
    mass: f64,
    support: usize,
    absorbed: f64,
}

fn monte_carlo_term(
    source: BehaviorSource<'_>,
    other: &Membership<'_>,
    h: usize,
    samples: usize,
    seed: u64,
    domain: StreamDomain,
) -> Result<Term> {
    let BehaviorSource::Model(model) = source else {
        // Finite empirical or explicit behaviors are summed exactly.
        let b = ExactBehavior::of(source, h, usize::MAX)?;
        let mass = b
            .distribution
            .iter()
            .filter(|(w, _)| !other.contains(w))
            .map(|(_, p)| p)
            .sum::<f64>();
        return Ok(Term {
            mass: mass.min(1.0),
            support: b.distribution.support_size(),
            absorbed: 0.0,
        });
    };
    if samples == 0 {
        return Err(Error::invalid(
            "Monte-Carlo estimation needs at least one sample",
        ));
    }
    let sampler = ModelSampler::new(model);
    let mut seen = WordTrie::new();
    let mut word = Vec::with_capacity(h);
    let (mut outside, mut rejected) = (0usize, 0usize);
    for i in 0..samples {
        let mut rng = RandomStream::new(seed, domain, i as u64);
        rejected += sampler.draw(&mut rng, h, &mut word)?;
        if !other.contains(&word) {
            outside += 1;
        }
        seen.insert(&word);
    }
    Ok(Term {
        mass: outside as f64 / samples as f64,
        support: seen.len(),
        absorbed: rejected as f64 / (rejected + samples) as f64,
    })
}

/// Behavioral distance at horizon `h` (letters).
pub fn distance(
    s1: BehaviorSource<'_>,
    s2: BehaviorSource<'_>,
    h: usize,
    method: &Method,
) -> Result<DistanceReport> {
    check_pair(&s1, &s2, h)?;
    match *method {
        Method::Exact { cap } => {
            ExactBehavior::of(s1, h, cap)?.distance_to(&ExactBehavior::of(s2, h, cap)?)
        }
        Method::MonteCarlo { samples, seed } => {
            let (m1, m2) = (Membership::new(s1, h), Membership::new(s2, h));
            let l = monte_carlo_term(s1, &m2, h, samples, seed, StreamDomain::DistanceLeft)?;
            let r = monte_carlo_term(s2, &m1, h, samples, seed, StreamDomain::DistanceRight)?;
            Ok(DistanceReport {
                horizon: h,
                memory1: s1.memory(),
                memory2: s2.memory(),
                distance: l.mass + r.mass,
                left: l.mass,
                right: r.mass,
                method: method.tag(),
                support1: l.support,
                support2: r.support,
                absorbed1: l.absorbed,
                absorbed2: r.absorbed,
            })
        }
    }
}

/// Mass of the model's behavior on words the reference cannot produce.
pub fn spurious_mass(
    model: &MemoryMarkovModel,
    reference: BehaviorSource<'_>,
    h: usize,
    method: &Method,
) -> Result<f64> {
    let model = BehaviorSource::Model(model);
    check_pair(&model, &reference, h)?;
    match *method {
        Method::Exact { cap } => {
            let (left, _) = one_sided_gaps(
                &ExactBehavior::of(model, h, cap)?.distribution,
                &ExactBehavior::of(reference, h, cap)?.distribution,
            )?;
            Ok(left)
        }
        Method::MonteCarlo { samples, seed } => {
            let other = Membership::new(reference, h);
            Ok(monte_carlo_term(model, &other, h, samples, seed, StreamDomain::DistanceLeft)?.mass)
        }
    }
}

/// Builds the memory-`h` model from `samples` and compares its `h`-letter
/// behavior with the samples' own `h`-prefixes. Both support terms are zero.
pub fn proposition1_check(samples: &SampleSet, h: usize) -> Result<DistanceReport> {
    let model = build_model(samples, h)?;
    distance(
        BehaviorSource::Model(&model),
        BehaviorSource::Samples(samples),
        h,
        &Method::exact(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Word;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn samples(words: &[&str]) -> SampleSet {
        let ab = ab();
        SampleSet::from_words(ab.clone(), words.iter().map(|w| ab.parse(w).unwrap())).unwrap()
    }

    #[test]
    fn identity_is_zero() {
        let m = build_model(&samples(&["aabab", "babba"]), 2).unwrap();
        for h in 2..6 {
            let r = distance(
                BehaviorSource::Model(&m),
                BehaviorSource::Model(&m),
                h,
                &Method::exact(),
            )
            .unwrap();
            assert_eq!((r.distance, r.left, r.right), (0.0, 0.0, 0.0));
            let mc = Method::MonteCarlo {
                samples: 500,
                seed: 3,
            };
            let r = distance(BehaviorSource::Model(&m), BehaviorSource::Model(&m), h, &mc).unwrap();
            assert_eq!(r.distance, 0.0);
            assert_eq!(
                spurious_mass(&m, BehaviorSource::Model(&m), h, &Method::exact()).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn one_sided_example() {
        let m1 = build_model(&samples(&["aaab"]), 1).unwrap();
        let m2 = build_model(&samples(&["aaaa"]), 1).unwrap();
        let r = distance(
            BehaviorSource::Model(&m1),
            BehaviorSource::Model(&m2),
            2,
            &Method::exact(),
        )
        .unwrap();
        assert!((r.left - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.right, 0.0);
        assert!((r.distance - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!((r.support1, r.support2), (2, 1));
        let back = distance(
            BehaviorSource::Model(&m2),
            BehaviorSource::Model(&m1),
            2,
            &Method::exact(),
        )
        .unwrap();
        assert_eq!(back, r.swapped());
    }

    #[test]
    fn horizon_and_alphabet_errors() {
        let m2 = build_model(&samples(&["aabab"]), 2).unwrap();
        let m1 = build_model(&samples(&["aabab"]), 1).unwrap();
        assert!(distance(
            BehaviorSource::Model(&m1),
            BehaviorSource::Model(&m2),
            1,
            &Method::exact()
        )
        .is_err());
        let other =
            SampleSet::from_words(Alphabet::new(["x", "y"]).unwrap(), [Word::from([0, 1, 0])])
                .unwrap();
        let m3 = build_model(&other, 1).unwrap();
        assert!(distance(
            BehaviorSource::Model(&m1),
            BehaviorSource::Model(&m3),
            2,
            &Method::exact()
        )
        .is_err());
    }

    #[test]
    fn proposition1_examples() {
        let r = proposition1_check(&samples(&["abab", "abaa"]), 2).unwrap();
        assert_eq!((r.left, r.right, r.distance), (0.0, 0.0, 0.0));
        assert_eq!((r.support1, r.support2), (1, 1));
        let r = proposition1_check(&samples(&["aa"]), 1).unwrap();
        assert_eq!(r.distance, 0.0);
        assert!(proposition1_check(&samples(&["aa"]), 2).is_err());
    }

    #[test]
    fn monte_carlo_close_to_exact() {
        let m1 = build_model(&samples(&["aabab", "babba", "bbbba"]), 1).unwrap();
        let m2 = build_model(&samples(&["aabab", "babba", "bbbba"]), 2).unwrap();
        let exact = distance(
            BehaviorSource::Model(&m1),
            BehaviorSource::Model(&m2),
            5,
            &Method::exact(),
        )
        .unwrap();
        let mc = distance(
            BehaviorSource::Model(&m1),
            BehaviorSource::Model(&m2),
            5,
            &Method::MonteCarlo {
                samples: 100_000,
                seed: 5,
            },
        )
        .unwrap();
        assert!(exact.distance > 0.05, "{exact:?}");
        assert!(
            (mc.distance - exact.distance).abs() < 0.02,
            "{mc:?} vs {exact:?}"
        );
        assert_eq!(mc.method, MethodTag::MonteCarlo(100_000));
    }
}
