//! Multi-threaded trajectory simulation.

use memchain_core::{
    simulate_trajectory, DynamicalSystem, SampleSet, SimulationRequest, StateTable, SystemSpec,
    SystemVisitor,
};
use rayon::prelude::*;

use crate::error::{Error, Result};

struct ParallelSimulate<'a>(&'a SimulationRequest, &'a str);

impl SystemVisitor for ParallelSimulate<'_> {
    type Output = Result<SampleSet>;

    fn visit<S: DynamicalSystem + Sync>(self, system: &S) -> Result<SampleSet> {
        let (req, name) = (self.0, self.1);
        let total = req.validate()?;
        let dim = system.dimension();
        let mut letters = vec![0; total];
        let states = if req.keep_states {
            let mut coords = vec![0.0; total * dim];
            letters
                .par_chunks_mut(req.length)
                .zip(coords.par_chunks_mut(req.length * dim))
                .enumerate()
                .for_each(|(i, (word, c))| {
                    simulate_trajectory(system, req.seed, i as u64, word, Some(c))
                });
            Some(StateTable {
                dimension: dim,
                coords,
            })
        } else {
            letters
                .par_chunks_mut(req.length)
                .enumerate()
                .for_each(|(i, word)| simulate_trajectory(system, req.seed, i as u64, word, None));
            None
        };
        Ok(SampleSet::from_raw(
            system.alphabet().clone(),
            name,
            req.seed,
            req.length,
            letters,
            states,
        )?)
    }
}

/// Same result as [`memchain_core::simulate`], spread over `threads` workers
/// (0 = one per core).
pub fn simulate(
    system: &SystemSpec,
    request: &SimulationRequest,
    threads: usize,
) -> Result<SampleSet> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| system.accept(ParallelSimulate(request, system.name())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use memchain_core::SwitchedLinear;

    #[test]
    fn matches_sequential_simulation() {
        let system = SystemSpec::SwitchedLinear(SwitchedLinear::default());
        let req = SimulationRequest::new(257, 13, 5).keep_states(true);
        let expected = memchain_core::simulate(&system, &req).unwrap();
        for threads in [1, 3, 0] {
            assert_eq!(simulate(&system, &req, threads).unwrap(), expected);
        }
        let req = req.keep_states(false);
        assert_eq!(
            simulate(&system, &req, 2).unwrap(),
            memchain_core::simulate(&system, &req).unwrap()
        );
    }
}
