//! Finitely supported distributions over words of one fixed length.

use alloc::collections::BTreeMap;
use alloc::format;

use crate::alphabet::{Letter, Word};
use crate::error::{Error, Result};
use crate::{NORMALIZATION_TOLERANCE, PRUNE_THRESHOLD};

/// Probability distribution over words that all share one length.
///
/// Every stored probability is at least [`PRUNE_THRESHOLD`] and the masses
/// sum to one within [`NORMALIZATION_TOLERANCE`].
#[derive(Clone, Debug, PartialEq)]
pub struct CategoricalDistribution {
    word_len: usize,
    masses: BTreeMap<Word, f64>,
}

impl CategoricalDistribution {
    /// Normalizes nonnegative weights into a distribution.
    ///
    /// Repeated words accumulate. Entries whose normalized mass falls below
    /// the prune threshold are dropped and the rest renormalized.
    pub fn from_weights<I>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, f64)>,
    {
        let mut masses: BTreeMap<Word, f64> = BTreeMap::new();
        let mut word_len = None;
        for (word, weight) in weights {
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::invalid(format!(
                    "weight {weight} for word [{word}] is not a finite nonnegative number"
                )));
            }
            check_len(&mut word_len, &word)?;
            if weight > 0.0 {
                *masses.entry(word).or_insert(0.0) += weight;
            }
        }
        let total: f64 = masses.values().sum();
        if masses.is_empty() || total <= 0.0 {
            return Err(Error::invalid("distribution has no positive mass"));
        }
        masses.retain(|_, m| {
            *m /= total;
            *m >= PRUNE_THRESHOLD
        });
        let kept: f64 = masses.values().sum();
        if kept != 1.0 {
            masses.values_mut().for_each(|m| *m /= kept);
        }
        Ok(Self {
            word_len: word_len.unwrap_or(0),
            masses,
        })
    }

    /// Builds a distribution from probabilities that already sum to one.
    pub fn from_probabilities<I>(probabilities: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, f64)>,
    {
        let mut masses: BTreeMap<Word, f64> = BTreeMap::new();
        let mut word_len = None;
        for (word, p) in probabilities {
            if !p.is_finite() || !(0.0..=1.0 + NORMALIZATION_TOLERANCE).contains(&p) {
                return Err(Error::invalid(format!(
                    "probability {p} for word [{word}] is outside [0, 1]"
                )));
            }
            check_len(&mut word_len, &word)?;
            *masses.entry(word).or_insert(0.0) += p;
        }
        let total: f64 = masses.values().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        masses.retain(|_, m| *m >= PRUNE_THRESHOLD);
        if masses.is_empty() {
            return Err(Error::invalid("distribution has no positive mass"));
        }
        Ok(Self {
            word_len: word_len.unwrap_or(0),
            masses,
        })
    }

    pub fn point(word: Word) -> Self {
        let word_len = word.len();
        let mut masses = BTreeMap::new();
        masses.insert(word, 1.0);
        Self { word_len, masses }
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    /// Number of words with positive probability.
    pub fn support_size(&self) -> usize {
        self.masses.len()
    }

    pub fn probability(&self, word: &[Letter]) -> f64 {
        self.masses.get(word).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, word: &[Letter]) -> bool {
        self.masses.contains_key(word)
    }

    /// Entries in lexicographic word order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&Word, f64)> + '_ {
        self.masses.iter().map(|(w, &m)| (w, m))
    }

    pub fn support(&self) -> impl ExactSizeIterator<Item = &Word> + '_ {
        self.masses.keys()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum()
    }
}

fn check_len(expected: &mut Option<usize>, word: &Word) -> Result<()> {
    match *expected {
        None => {
            *expected = Some(word.len());
            Ok(())
        }
        Some(n) if n == word.len() => Ok(()),
        Some(n) => Err(Error::invalid(format!(
            "word [{word}] has length {}, distribution words have length {n}",
            word.len()
        ))),
    }
}

/// Counts overlapping occurrences of every length-`k` subword of `word`.
pub fn count_subwords(word: &[Letter], k: usize) -> Result<BTreeMap<Word, usize>> {
    if k == 0 || k > word.len() {
        return Err(Error::invalid(format!(
            "subword length {k} must be in 1..={}",
            word.len()
        )));
    }
    let mut counts = BTreeMap::new();
    for window in word.windows(k) {
        match counts.get_mut(window) {
            Some(c) => *c += 1,
            None => {
                counts.insert(Word::from(window), 1);
            }
        }
    }
    Ok(counts)
}

/// Mass of `p` outside the support of `q`, and mass of `q` outside the
/// support of `p`.
pub fn one_sided_gaps(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
) -> Result<(f64, f64)> {
    if p.word_len != q.word_len {
        return Err(Error::invalid(format!(
            "cannot compare words of length {} with words of length {}",
            p.word_len, q.word_len
        )));
    }
    // Both maps are sorted, so one merge pass finds the symmetric difference.
    let (mut left, mut right) = (0.0, 0.0);
    let mut a = p.masses.iter().peekable();
    let mut b = q.masses.iter().peekable();
    loop {
        match (a.peek(), b.peek()) {
            (Some((wa, &ma)), Some((wb, &mb))) => match wa.cmp(wb) {
                core::cmp::Ordering::Less => {
                    left += ma;
                    a.next();
                }
                core::cmp::Ordering::Greater => {
                    right += mb;
                    b.next();
                }
                core::cmp::Ordering::Equal => {
                    a.next();
                    b.next();
                }
            },
            (Some((_, &ma)), None) => {
                left += ma;
                a.next();
            }
            (None, Some((_, &mb))) => {
                right += mb;
                b.next();
            }
            (None, None) => break,
        }
    }
    Ok((left.min(1.0), right.min(1.0)))
}

/// `p(supp p \ supp q) + q(supp q \ supp p)`, a number in `[0, 2]`.
pub fn total_variation_like_gap(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
) -> Result<f64> {
    let (left, right) = one_sided_gaps(p, q)?;
    Ok(left + right)
}
