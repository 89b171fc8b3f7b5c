//! Memory-ℓ Markov models: estimation from samples, lifting to longer
//! memory, exact unrolling into word distributions, and sampling.
//!
//! A model's states are words of length `ℓ`. From state `y` the chain emits a
//! letter `c` and moves to `y` shifted left with `c` appended, so a path of
//! states spells out a word whose letters are the states' last coordinates.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::alphabet::{shift_window, Alphabet, Letter, Word};
use crate::distribution::CategoricalDistribution;
use crate::error::{Error, Result};
use crate::rng::{RandomStream, StreamDomain};
use crate::sampler::SampleSet;
use crate::{DEFAULT_SUPPORT_CAP, NORMALIZATION_TOLERANCE, PRUNE_THRESHOLD};

/// Outgoing `(letter, probability)` pairs of one state, sorted by letter.
pub type Row = Vec<(Letter, f64)>;

/// Where a model's estimates came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub source: String,
    pub seed: u64,
    pub trajectories: usize,
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoryMarkovModel {
    alphabet: Alphabet,
    memory: usize,
    // Every state has an entry; an empty row marks a dead end.
    rows: BTreeMap<Word, Row>,
    initial: CategoricalDistribution,
    provenance: Option<Provenance>,
}

impl MemoryMarkovModel {
    /// Assembles a model, checking row-stochasticity, that every transition
    /// target is a state, and that the initial support is made of states.
    pub fn from_parts(
        alphabet: Alphabet,
        memory: usize,
        rows: BTreeMap<Word, Row>,
        initial: CategoricalDistribution,
    ) -> Result<Self> {
        if memory == 0 {
            return Err(Error::invalid("memory must be at least 1"));
        }
        for (state, row) in &rows {
            if state.len() != memory {
                return Err(Error::invalid(format!(
                    "state [{state}] does not have length {memory}"
                )));
            }
            if let Some(&bad) = state.iter().find(|&&c| !alphabet.contains_letter(c)) {
                return Err(Error::invalid(format!(
                    "state [{state}] uses letter {bad} outside the alphabet"
                )));
            }
            if row.windows(2).any(|p| p[0].0 >= p[1].0) {
                return Err(Error::invalid(format!(
                    "row of [{state}] is not sorted by letter"
                )));
            }
            let mut total = 0.0;
            for &(c, p) in row {
                if !(p > 0.0 && p <= 1.0 + NORMALIZATION_TOLERANCE) {
                    return Err(Error::invalid(format!(
                        "transition [{state}] -> {c} has probability {p}"
                    )));
                }
                if !rows.contains_key(shift_window(state, c).letters()) {
                    return Err(Error::invalid(format!(
                        "transition [{state}] -> {c} targets [{}], which is not a state",
                        shift_window(state, c)
                    )));
                }
                total += p;
            }
            if !row.is_empty() && (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(Error::invalid(format!("row of [{state}] sums to {total}")));
            }
        }
        if initial.word_len() != memory {
            return Err(Error::invalid(format!(
                "initial distribution is over words of length {}, expected {memory}",
                initial.word_len()
            )));
        }
        if let Some(w) = initial.support().find(|w| !rows.contains_key(w.letters())) {
            return Err(Error::invalid(format!("initial word [{w}] is not a state")));
        }
        Ok(Self {
            alphabet,
            memory,
            rows,
            initial,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn initial(&self) -> &CategoricalDistribution {
        &self.initial
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    pub fn transition_count(&self) -> usize {
        self.rows.values().map(Vec::len).sum()
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &Word> + '_ {
        self.rows.keys()
    }

    pub fn is_state(&self, word: &[Letter]) -> bool {
        self.rows.contains_key(word)
    }

    /// Outgoing transitions of `state`, `None` if it is not a state.
    pub fn row(&self, state: &[Letter]) -> Option<&[(Letter, f64)]> {
        self.rows.get(state).map(Vec::as_slice)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Word, &[(Letter, f64)])> + '_ {
        self.rows.iter().map(|(w, r)| (w, r.as_slice()))
    }

    /// States that were never seen with a successor.
    pub fn dead_ends(&self) -> impl Iterator<Item = &Word> + '_ {
        self.rows
            .iter()
            .filter(|(_, r)| r.is_empty())
            .map(|(w, _)| w)
    }

    pub fn transition(&self, state: &[Letter], letter: Letter) -> f64 {
        self.rows
            .get(state)
            .and_then(|r| {
                r.binary_search_by_key(&letter, |&(c, _)| c)
                    .ok()
                    .map(|i| r[i].1)
            })
            .unwrap_or(0.0)
    }

    /// Unnormalized probability that the model emits `word` as its first
    /// `word.len()` letters.
    pub fn path_mass(&self, word: &[Letter]) -> f64 {
        if word.len() < self.memory {
            return 0.0;
        }
        let mut mass = self.initial.probability(&word[..self.memory]);
        for k in self.memory..word.len() {
            if mass == 0.0 {
                break;
            }
            mass *= self.transition(&word[k - self.memory..k], word[k]);
        }
        mass
    }

    /// Whether `word` is in the unrolled behavior at its own length.
    pub fn produces(&self, word: &[Letter]) -> bool {
        self.path_mass(word) >= PRUNE_THRESHOLD
    }
}

/// Estimates the memory-`ℓ` model from pooled subword counts.
///
/// The transition `y → c` gets `N(yc) / N(y)`, where `N(y)` only counts
/// occurrences of `y` that have a successor letter. The initial distribution
/// is the empirical distribution of `ℓ`-prefixes. States are all `ℓ`-words
/// seen anywhere, including ones only seen at the end of a word.
pub fn build_model(samples: &SampleSet, memory: usize) -> Result<MemoryMarkovModel> {
    let length = samples.word_len();
    if samples.is_empty() {
        return Err(Error::invalid(
            "cannot build a model from an empty sample set",
        ));
    }
    if memory == 0 || memory >= length {
        return Err(Error::invalid(format!(
            "memory {memory} must satisfy 1 <= memory < sample length {length}"
        )));
    }
    let mut counts: BTreeMap<Word, Vec<(Letter, u64)>> = BTreeMap::new();
    for word in samples.words() {
        for start in 0..=length - memory {
            let state = &word[start..start + memory];
            if !counts.contains_key(state) {
                counts.insert(Word::from(state), Vec::new());
            }
            let Some(&next) = word.get(start + memory) else {
                continue;
            };
            let row = counts.get_mut(state).expect("inserted above");
            match row.binary_search_by_key(&next, |&(c, _)| c) {
                Ok(i) => row[i].1 += 1,
                Err(i) => row.insert(i, (next, 1)),
            }
        }
    }
    let rows = counts
        .into_iter()
        .map(|(state, row)| {
            let total: u64 = row.iter().map(|&(_, n)| n).sum();
            let row = row
                .into_iter()
                .map(|(c, n)| (c, n as f64 / total as f64))
                .collect();
            (state, row)
        })
        .collect();
    let initial = CategoricalDistribution::from_weights(
        samples.words().map(|w| (Word::from(&w[..memory]), 1.0)),
    )?;
    let model = MemoryMarkovModel::from_parts(samples.alphabet().clone(), memory, rows, initial)?;
    Ok(model.with_provenance(Provenance {
        source: samples.source().into(),
        seed: samples.seed(),
        trajectories: samples.len(),
        length,
    }))
}

/// Distribution of the first `n` letters emitted by a model.
#[derive(Clone, Debug, PartialEq)]
pub struct UnrolledBehavior {
    /// Conditioned on not reaching a dead end before `n` letters.
    pub distribution: CategoricalDistribution,
    /// Probability of reaching a dead end before `n` letters.
    pub absorbed: f64,
    /// Probability carried by words dropped under the prune threshold.
    pub pruned: f64,
}

/// Enumerates the exact distribution of the first `n` letters.
///
/// The frontier is expanded breadth-first in lexicographic order. Paths whose
/// mass falls below the prune threshold are dropped. Fails with a capacity
/// error once the frontier holds more than `cap` words.
pub fn unroll(model: &MemoryMarkovModel, n: usize, cap: usize) -> Result<UnrolledBehavior> {
    let ell = model.memory;
    if n < ell {
        return Err(Error::invalid(format!(
            "horizon {n} is shorter than the memory {ell}"
        )));
    }
    if model.initial.support_size() > cap {
        return Err(capacity_error(n, cap));
    }
    let mut letters: Vec<Letter> = Vec::with_capacity(model.initial.support_size() * n);
    let mut masses: Vec<f64> = Vec::with_capacity(model.initial.support_size());
    for (w, p) in model.initial.iter() {
        letters.extend_from_slice(w);
        masses.push(p);
    }
    let (mut absorbed, mut pruned) = (0.0, 0.0);
    for len in ell..n {
        let mut next_letters = Vec::with_capacity(letters.len() + masses.len());
        let mut next_masses = Vec::with_capacity(masses.len());
        for (prefix, &mass) in letters.chunks_exact(len).zip(&masses) {
            let row = &model.rows[&prefix[len - ell..]];
            if row.is_empty() {
                absorbed += mass;
                continue;
            }
            for &(c, p) in row {
                let m = mass * p;
                if m < PRUNE_THRESHOLD {
                    pruned += m;
                    continue;
                }
                next_letters.extend_from_slice(prefix);
                next_letters.push(c);
                next_masses.push(m);
            }
            if next_masses.len() > cap {
                return Err(capacity_error(n, cap));
            }
        }
        letters = next_letters;
        masses = next_masses;
    }
    if masses.is_empty() {
        return Err(Error::invalid(format!(
            "every path of the memory-{ell} model dies before {n} letters"
        )));
    }
    let distribution = CategoricalDistribution::from_weights(
        letters
            .chunks_exact(n)
            .zip(masses)
            .map(|(w, m)| (Word::from(w), m)),
    )?;
    Ok(UnrolledBehavior {
        distribution,
        absorbed,
        pruned,
    })
}

fn capacity_error(n: usize, cap: usize) -> Error {
    Error::Capacity {
        what: format!("exact behavior over {n} letters"),
        limit: cap,
        hint: "; use the Monte-Carlo method instead",
    }
}

/// Re-expresses a memory-`ℓ` model with memory `target ≥ ℓ` without changing
/// its behavior at horizons of at least `target` letters.
///
/// States are the `target`-words reachable from the unrolled initial
/// distribution; each state moves according to its `ℓ`-suffix.
pub fn lift(model: &MemoryMarkovModel, target: usize) -> Result<MemoryMarkovModel> {
    lift_capped(model, target, DEFAULT_SUPPORT_CAP)
}

pub fn lift_capped(
    model: &MemoryMarkovModel,
    target: usize,
    cap: usize,
) -> Result<MemoryMarkovModel> {
    let ell = model.memory;
    if target < ell {
        return Err(Error::invalid(format!(
            "cannot lift memory {ell} down to {target}"
        )));
    }
    if target == ell {
        return Ok(model.clone());
    }
    let initial = unroll(model, target, cap)?.distribution;
    let mut rows: BTreeMap<Word, Row> = BTreeMap::new();
    let mut queue: VecDeque<Word> = initial.support().cloned().collect();
    while let Some(state) = queue.pop_front() {
        if rows.contains_key(state.letters()) {
            continue;
        }
        let row = model.rows[&state[target - ell..]].clone();
        for &(c, _) in &row {
            let next = state.shifted(c);
            if !rows.contains_key(next.letters()) {
                queue.push_back(next);
            }
        }
        rows.insert(state, row);
        if rows.len() > cap {
            return Err(Error::Capacity {
                what: format!("memory-{target} lift"),
                limit: cap,
                hint: "",
            });
        }
    }
    let lifted = MemoryMarkovModel::from_parts(model.alphabet.clone(), target, rows, initial)?;
    Ok(match &model.provenance {
        Some(p) => lifted.with_provenance(p.clone()),
        None => lifted,
    })
}

/// Draws words from a model by rejection on dead ends.
pub(crate) struct ModelSampler<'a> {
    model: &'a MemoryMarkovModel,
    initial: Vec<(&'a Word, f64)>,
}

impl<'a> ModelSampler<'a> {
    const MAX_REJECTIONS: usize = 10_000;

    pub(crate) fn new(model: &'a MemoryMarkovModel) -> Self {
        Self {
            model,
            initial: model.initial.iter().collect(),
        }
    }

    /// Fills `out` with one word of `n` letters and returns how many attempts
    /// ended in a dead end first.
    pub(crate) fn draw(
        &self,
        rng: &mut RandomStream,
        n: usize,
        out: &mut Vec<Letter>,
    ) -> Result<usize> {
        let ell = self.model.memory;
        'attempt: for rejected in 0..Self::MAX_REJECTIONS {
            out.clear();
            let i = rng.categorical(self.initial.iter().map(|&(_, p)| p));
            out.extend_from_slice(self.initial[i].0);
            while out.len() < n {
                let row = &self.model.rows[&out[out.len() - ell..]];
                if row.is_empty() {
                    continue 'attempt;
                }
                let j = rng.categorical(row.iter().map(|&(_, p)| p));
                out.push(row[j].0);
            }
            return Ok(rejected);
        }
        Err(Error::invalid(format!(
            "memory-{ell} model hit a dead end {} times in a row before {n} letters",
            Self::MAX_REJECTIONS
        )))
    }
}

/// Draws `n_words` independent words of `n` letters from the model,
/// conditioned on not reaching a dead end.
pub fn sample_model(
    model: &MemoryMarkovModel,
    n_words: usize,
    n: usize,
    seed: u64,
) -> Result<SampleSet> {
    if n < model.memory {
        return Err(Error::invalid(format!(
            "horizon {n} is shorter than the memory {}",
            model.memory
        )));
    }
    if n_words == 0 {
        return Err(Error::invalid("need at least one word"));
    }
    let sampler = ModelSampler::new(model);
    let mut letters = Vec::with_capacity(n_words * n);
    let mut word = Vec::with_capacity(n);
    for i in 0..n_words {
        let mut rng = RandomStream::new(seed, StreamDomain::ModelSampling, i as u64);
        sampler.draw(&mut rng, n, &mut word)?;
        letters.extend_from_slice(&word);
    }
    SampleSet::from_raw(
        model.alphabet.clone(),
        format!("memory-{}-model", model.memory),
        seed,
        n,
        letters,
        None,
    )
}
