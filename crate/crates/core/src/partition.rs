//! State-space partition induced by the trailing `ℓ` letters of trajectories.

use alloc::format;
use alloc::vec::Vec;

use crate::alphabet::Word;
use crate::error::{Error, Result};
use crate::sampler::SampleSet;

/// Sampled states tagged with the `ℓ`-word that ends at them.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionExport {
    pub memory: usize,
    pub dimension: usize,
    /// Row-major coordinates, `dimension` values per point.
    pub points: Vec<f64>,
    pub labels: Vec<Word>,
}

impl PartitionExport {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], &Word)> + '_ {
        self.points.chunks_exact(self.dimension).zip(&self.labels)
    }
}

/// Emits `(x_k, y_{k-ℓ+1} … y_k)` for every trajectory and every `k ≥ ℓ - 1`.
pub fn export_partition(samples: &SampleSet, memory: usize) -> Result<PartitionExport> {
    let table = samples
        .states()
        .ok_or_else(|| Error::invalid("sample set was simulated without keeping states"))?;
    let length = samples.word_len();
    if memory == 0 || memory > length {
        return Err(Error::invalid(format!(
            "memory {memory} must be in 1..={length}"
        )));
    }
    let dim = table.dimension;
    let per_word = length - memory + 1;
    let mut points = Vec::with_capacity(samples.len() * per_word * dim);
    let mut labels = Vec::with_capacity(samples.len() * per_word);
    for i in 0..samples.len() {
        let word = samples.word(i);
        let states = samples.trajectory_states(i).expect("states checked above");
        for k in memory - 1..length {
            points.extend_from_slice(&states[k * dim..(k + 1) * dim]);
            labels.push(Word::from(&word[k + 1 - memory..=k]));
        }
    }
    Ok(PartitionExport {
        memory,
        dimension: dim,
        points,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::sampler::{simulate, SimulationRequest};
    use crate::systems::{PiecewiseDemo, ScalarInitial, SystemSpec};
    use alloc::vec;

    #[test]
    fn requires_states() {
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let s = SampleSet::from_words(ab.clone(), [ab.parse("ab").unwrap()]).unwrap();
        assert!(export_partition(&s, 1).is_err());
    }

    #[test]
    fn segment_return_point_carries_ba() {
        // Start on the collapsing part of `a`: 0.7 -> 1.5 -> 0.25.
        let sys = SystemSpec::PiecewiseDemo(PiecewiseDemo::new(ScalarInitial::Point(0.7)).unwrap());
        let s = simulate(&sys, &SimulationRequest::new(1, 4, 0).keep_states(true)).unwrap();
        let p = export_partition(&s, 2).unwrap();
        let ab = s.alphabet();
        let rendered: Vec<_> = p.iter().map(|(x, w)| (x[0], ab.render(w))).collect();
        assert_eq!(
            rendered,
            vec![(1.5, "ab".into()), (0.25, "ba".into()), (0.25, "aa".into())]
        );
    }
}
