//! Batches of labelled trajectories.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::alphabet::{Alphabet, Letter, Word};
use crate::distribution::CategoricalDistribution;
use crate::error::{Error, Result};
use crate::rng::{RandomStream, StreamDomain};
use crate::systems::{DynamicalSystem, SystemSpec, SystemVisitor};

/// Parameters of one [`simulate`] call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationRequest {
    pub trajectories: usize,
    /// Letters per trajectory (one more than the number of steps).
    pub length: usize,
    pub seed: u64,
    pub keep_states: bool,
    /// Upper bound on `trajectories * length`.
    pub max_letters: usize,
}

impl SimulationRequest {
    pub const DEFAULT_MAX_LETTERS: usize = 200_000_000;

    pub fn new(trajectories: usize, length: usize, seed: u64) -> Self {
        Self {
            trajectories,
            length,
            seed,
            keep_states: false,
            max_letters: Self::DEFAULT_MAX_LETTERS,
        }
    }

    pub fn keep_states(mut self, keep: bool) -> Self {
        self.keep_states = keep;
        self
    }

    /// Checks the request and returns the total number of letters.
    pub fn validate(&self) -> Result<usize> {
        if self.trajectories == 0 || self.length == 0 {
            return Err(Error::invalid(format!(
                "need at least one trajectory of at least one letter, got {} x {}",
                self.trajectories, self.length
            )));
        }
        match self.trajectories.checked_mul(self.length) {
            Some(total) if total <= self.max_letters => Ok(total),
            _ => Err(Error::Capacity {
                what: format!(
                    "{} trajectories of {} letters",
                    self.trajectories, self.length
                ),
                limit: self.max_letters,
                hint: "; lower the trajectory count or length",
            }),
        }
    }
}

/// Visited states stored row-major: trajectory, step, coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct StateTable {
    pub dimension: usize,
    pub coords: Vec<f64>,
}

/// `N'` words of common length `L`, optionally with the states behind them.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    alphabet: Alphabet,
    source: String,
    seed: u64,
    length: usize,
    letters: Vec<Letter>,
    states: Option<StateTable>,
}

impl SampleSet {
    /// Assembles a sample set from flat buffers, checking their shapes.
    pub fn from_raw(
        alphabet: Alphabet,
        source: impl Into<String>,
        seed: u64,
        length: usize,
        letters: Vec<Letter>,
        states: Option<StateTable>,
    ) -> Result<Self> {
        if length == 0 || letters.is_empty() || !letters.len().is_multiple_of(length) {
            return Err(Error::invalid(format!(
                "{} letters cannot be split into nonempty words of length {length}",
                letters.len()
            )));
        }
        if let Some(&bad) = letters.iter().find(|&&c| !alphabet.contains_letter(c)) {
            return Err(Error::invalid(format!(
                "letter {bad} is outside the alphabet"
            )));
        }
        if let Some(table) = &states {
            if table.dimension == 0 || table.coords.len() != letters.len() * table.dimension {
                return Err(Error::invalid("state table does not match the letters"));
            }
        }
        Ok(Self {
            alphabet,
            source: source.into(),
            seed,
            length,
            letters,
            states,
        })
    }

    /// Sample set from explicit words, all of the same length.
    pub fn from_words<I>(alphabet: Alphabet, words: I) -> Result<Self>
    where
        I: IntoIterator<Item = Word>,
    {
        let mut letters = Vec::new();
        let mut length = None;
        for word in words {
            match length {
                None => length = Some(word.len()),
                Some(n) if n != word.len() => {
                    return Err(Error::invalid(format!(
                        "sample words must share one length, found {n} and {}",
                        word.len()
                    )))
                }
                Some(_) => {}
            }
            letters.extend_from_slice(&word);
        }
        let length = length.ok_or_else(|| Error::invalid("sample set needs at least one word"))?;
        Self::from_raw(alphabet, "words", 0, length, letters, None)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Name of whatever produced the samples.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn word_len(&self) -> usize {
        self.length
    }

    pub fn len(&self) -> usize {
        self.letters.len() / self.length
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn word(&self, i: usize) -> &[Letter] {
        &self.letters[i * self.length..(i + 1) * self.length]
    }

    pub fn words(&self) -> impl ExactSizeIterator<Item = &[Letter]> + '_ {
        self.letters.chunks_exact(self.length)
    }

    pub fn states(&self) -> Option<&StateTable> {
        self.states.as_ref()
    }

    /// States visited by trajectory `i`, `length * dimension` values.
    pub fn trajectory_states(&self, i: usize) -> Option<&[f64]> {
        let table = self.states.as_ref()?;
        let stride = self.length * table.dimension;
        Some(&table.coords[i * stride..(i + 1) * stride])
    }

    /// Empirical distribution of the length-`h` prefixes.
    pub fn prefix_distribution(&self, h: usize) -> Result<CategoricalDistribution> {
        if h == 0 || h > self.length {
            return Err(Error::invalid(format!(
                "prefix length {h} must be in 1..={}",
                self.length
            )));
        }
        CategoricalDistribution::from_weights(self.words().map(|w| (Word::from(&w[..h]), 1.0)))
    }
}

/// Runs trajectory `index` of a batch into `letters`, and into `coords` when
/// given (`letters.len() * dimension` slots).
pub fn simulate_trajectory<S: DynamicalSystem + ?Sized>(
    system: &S,
    seed: u64,
    index: u64,
    letters: &mut [Letter],
    mut coords: Option<&mut [f64]>,
) {
    let dim = system.dimension();
    let mut rng = RandomStream::new(seed, StreamDomain::Trajectory, index);
    let mut x = system.sample_initial(&mut rng);
    for (k, slot) in letters.iter_mut().enumerate() {
        if k > 0 {
            x = system.step(&x, &mut rng);
        }
        *slot = system.output(&x);
        if let Some(c) = coords.as_deref_mut() {
            system.coordinates(&x, &mut c[k * dim..(k + 1) * dim]);
        }
    }
}

struct Simulate<'a>(&'a SimulationRequest, &'a str);

impl SystemVisitor for Simulate<'_> {
    type Output = Result<SampleSet>;

    fn visit<S: DynamicalSystem + Sync>(self, system: &S) -> Result<SampleSet> {
        let (req, name) = (self.0, self.1);
        let total = req.validate()?;
        let dim = system.dimension();
        let mut letters = vec![0; total];
        let mut coords = if req.keep_states {
            vec![0.0; total * dim]
        } else {
            Vec::new()
        };
        for (i, word) in letters.chunks_exact_mut(req.length).enumerate() {
            let c = req
                .keep_states
                .then(|| &mut coords[i * req.length * dim..(i + 1) * req.length * dim]);
            simulate_trajectory(system, req.seed, i as u64, word, c);
        }
        let states = req.keep_states.then_some(StateTable {
            dimension: dim,
            coords,
        });
        SampleSet::from_raw(
            system.alphabet().clone(),
            name,
            req.seed,
            req.length,
            letters,
            states,
        )
    }
}

/// Simulates `N'` independent trajectories of `L` letters.
///
/// Trajectory `i` uses its own random stream, so the first `k` words do not
/// depend on how many trajectories are requested.
pub fn simulate(system: &SystemSpec, request: &SimulationRequest) -> Result<SampleSet> {
    system.accept(Simulate(request, system.name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{PiecewiseDemo, ScalarInitial, Sturmian, TableDriven};

    fn two_cycle() -> SystemSpec {
        SystemSpec::TableDriven(
            TableDriven::new(
                Alphabet::new(["a", "b"]).unwrap(),
                vec![0, 1],
                vec![vec![0.0, 1.0], vec![1.0, 0.0]],
                vec![1.0, 0.0],
            )
            .unwrap(),
        )
    }

    #[test]
    fn dirac_two_cycle() {
        let s = simulate(&two_cycle(), &SimulationRequest::new(1, 4, 9)).unwrap();
        assert_eq!(s.alphabet().render(s.word(0)), "abab");
    }

    #[test]
    fn sturmian_from_zero() {
        let sys = SystemSpec::Sturmian(
            Sturmian::new(Sturmian::DEFAULT_THETA, ScalarInitial::Point(0.0)).unwrap(),
        );
        let s = simulate(&sys, &SimulationRequest::new(1, 3, 0)).unwrap();
        assert_eq!(s.alphabet().render(s.word(0)), "011");
    }

    #[test]
    fn reproducible_and_prefix_stable() {
        let sys = SystemSpec::Sturmian(Sturmian::default());
        let a = simulate(&sys, &SimulationRequest::new(50, 20, 3)).unwrap();
        let b = simulate(&sys, &SimulationRequest::new(50, 20, 3)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&sys, &SimulationRequest::new(80, 20, 3)).unwrap();
        for i in 0..50 {
            assert_eq!(a.word(i), c.word(i));
        }
        let d = simulate(&sys, &SimulationRequest::new(50, 20, 4)).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn kept_states_reproduce_labels() {
        let sys = SystemSpec::PiecewiseDemo(PiecewiseDemo::default());
        let s = simulate(&sys, &SimulationRequest::new(200, 10, 5).keep_states(true)).unwrap();
        let SystemSpec::PiecewiseDemo(p) = &sys else {
            unreachable!()
        };
        for i in 0..s.len() {
            let states = s.trajectory_states(i).unwrap();
            for (k, &c) in s.word(i).iter().enumerate() {
                assert_eq!(p.output(&states[k]), c);
            }
        }
    }

    #[test]
    fn capacity_and_argument_errors() {
        let sys = two_cycle();
        let mut req = SimulationRequest::new(10, 10, 0);
        req.max_letters = 99;
        assert!(matches!(simulate(&sys, &req), Err(Error::Capacity { .. })));
        assert!(matches!(
            simulate(&sys, &SimulationRequest::new(0, 10, 0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            simulate(&sys, &SimulationRequest::new(1, 0, 0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn prefix_distribution_counts() {
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let s = SampleSet::from_words(
            ab.clone(),
            ["abab", "abaa", "bbbb", "abbb"].map(|t| ab.parse(t).unwrap()),
        )
        .unwrap();
        let d = s.prefix_distribution(2).unwrap();
        assert_eq!(d.probability(&ab.parse("ab").unwrap()), 0.75);
        assert_eq!(d.probability(&ab.parse("bb").unwrap()), 0.25);
        assert!(s.prefix_distribution(5).is_err());
    }
}
