use memchain::formats::report_csv;
use memchain::{run_refinement, RefinementConfig, Termination};
use memchain_core::{
    build_model, distance, Alphabet, BehaviorSource, Method, PiecewiseDemo, SimulationRequest,
    Sturmian, SystemSpec, TableDriven,
};

fn markov_chain() -> SystemSpec {
    let alphabet = Alphabet::new(["a", "b", "c"]).unwrap();
    let rows = vec![
        vec![0.2, 0.5, 0.3],
        vec![0.6, 0.0, 0.4],
        vec![0.0, 0.7, 0.3],
    ];
    SystemSpec::TableDriven(
        TableDriven::new(alphabet, vec![0, 1, 2], rows, vec![0.5, 0.5, 0.0]).unwrap(),
    )
}

fn piecewise() -> SystemSpec {
    SystemSpec::PiecewiseDemo(PiecewiseDemo::default())
}

#[test]
fn markov_chain_stops_at_memory_two() {
    let run = run_refinement(&RefinementConfig::new(
        markov_chain(),
        1_000,
        50,
        8,
        1e-6,
        4,
    ))
    .unwrap();
    let report = &run.report;
    assert_eq!(report.termination, Termination::Threshold);
    assert_eq!(report.final_memory, Some(2));
    let first = report.record(1).unwrap().to_next.as_ref().unwrap();
    assert_eq!(first.distance, 0.0);
    assert_eq!(run.final_model.unwrap().memory(), 2);
}

#[test]
fn piecewise_needs_more_than_one_letter_of_memory() {
    let run = run_refinement(&RefinementConfig::new(piecewise(), 10_000, 20, 6, 1e-6, 4)).unwrap();
    let report = &run.report;
    let first = report.record(1).unwrap().to_next.as_ref().unwrap();
    assert!(first.distance > 1e-6);
    assert!(
        first.left > 0.0,
        "memory 1 produces words memory 2 rules out"
    );
    assert!(matches!(report.final_memory, Some(2) | Some(3)));
    assert_eq!(report.termination, Termination::Threshold);
}

#[test]
fn records_are_contiguous_and_stop_at_the_first_hit() {
    for (system, horizon, threshold) in [(piecewise(), 6, 1e-6), (markov_chain(), 8, 1e-6)] {
        let run = run_refinement(&RefinementConfig::new(
            system, 2_000, 20, horizon, threshold, 5,
        ))
        .unwrap();
        let report = run.report;
        let last = report.final_memory.unwrap();
        let memories: Vec<usize> = report.records.iter().map(|r| r.memory).collect();
        assert_eq!(memories, (1..=last).collect::<Vec<_>>());
        for r in &report.records[..report.records.len() - 1] {
            let d = r.to_next.as_ref().unwrap().distance;
            assert!(r.memory + 1 == last || d > threshold);
        }
        assert!(report.records.last().unwrap().to_next.is_none());
        for r in &report.records {
            assert_eq!(r.from_earlier.len(), r.memory - 1);
        }
    }
}

#[test]
fn sturmian_stops_within_threshold() {
    let config = RefinementConfig::new(
        SystemSpec::Sturmian(Sturmian::default()),
        10_000,
        60,
        15,
        0.01,
        12,
    );
    let report = run_refinement(&config).unwrap().report;
    let last = report.final_memory.unwrap();
    assert!(last <= 12);
    if report.termination == Termination::Threshold {
        let adjacent = report.record(last - 1).unwrap().to_next.as_ref().unwrap();
        assert!(adjacent.distance <= 0.01);
    }
}

#[test]
fn sample_curve_equals_the_memory_h_model_route() {
    let config = RefinementConfig::new(piecewise(), 3_000, 20, 6, 1e-9, 5);
    let run = run_refinement(&config).unwrap();
    let samples = memchain_core::simulate(
        &config.system,
        &SimulationRequest::new(3_000, 20, config.seed),
    )
    .unwrap();
    let top = build_model(&samples, config.horizon).unwrap();
    for r in &run.report.records {
        let model = build_model(&samples, r.memory).unwrap();
        let via_top = distance(
            BehaviorSource::Model(&model),
            BehaviorSource::Model(&top),
            config.horizon,
            &Method::exact(),
        )
        .unwrap();
        assert_eq!(
            r.to_samples.distance, via_top.distance,
            "memory {}",
            r.memory
        );
    }
}

#[test]
fn reports_are_reproducible() {
    let config = RefinementConfig::new(piecewise(), 2_000, 20, 6, 1e-6, 4);
    let a = report_csv(&run_refinement(&config).unwrap().report);
    let b = report_csv(
        &run_refinement(&RefinementConfig {
            threads: 3,
            ..config.clone()
        })
        .unwrap()
        .report,
    );
    assert_eq!(a, b);
}

#[test]
fn partition_labels_are_final_states() {
    let config = RefinementConfig {
        export_partition: true,
        ..RefinementConfig::new(piecewise(), 500, 20, 6, 1e-6, 4)
    };
    let run = run_refinement(&config).unwrap();
    let model = run.final_model.unwrap();
    let partition = run.partition.unwrap();
    assert_eq!(partition.memory, model.memory());
    for (x, label) in partition.iter() {
        assert!(model.is_state(label));
        assert_eq!(label.last(), Some(PiecewiseDemo::label(x[0])));
    }
}

#[test]
fn resampling_per_memory_draws_fresh_sets() {
    let shared = RefinementConfig::new(markov_chain(), 300, 30, 6, 1e-9, 3);
    let fresh = RefinementConfig {
        resample_per_memory: true,
        ..shared.clone()
    };
    let a = run_refinement(&shared).unwrap();
    let b = run_refinement(&fresh).unwrap();
    let (first_a, first_b) = (&a.report.records[0], &b.report.records[0]);
    assert_eq!(
        (first_a.states, &first_a.to_samples),
        (first_b.states, &first_b.to_samples)
    );
    assert_ne!(a.samples, b.samples);
    assert_eq!(b.samples.len(), 300);
}

#[test]
fn capacity_ends_the_loop_with_a_partial_report() {
    let config = RefinementConfig {
        method: Method::Exact { cap: 30 },
        ..RefinementConfig::new(piecewise(), 2_000, 20, 6, 1e-6, 4)
    };
    let report = run_refinement(&config).unwrap().report;
    assert!(matches!(
        report.termination,
        Termination::Capacity { memory: 1, .. }
    ));
    assert!(report.records.is_empty());
    assert_eq!(report.final_memory, None);
}

#[test]
fn monte_carlo_method_tracks_exact() {
    let exact = run_refinement(&RefinementConfig::new(piecewise(), 2_000, 20, 6, 1e-6, 3))
        .unwrap()
        .report;
    let mc = RefinementConfig {
        method: Method::MonteCarlo {
            samples: 20_000,
            seed: 5,
        },
        ..RefinementConfig::new(piecewise(), 2_000, 20, 6, 1e-6, 3)
    };
    let mc = run_refinement(&mc).unwrap().report;
    assert_eq!(mc.final_memory, exact.final_memory);
    for (a, b) in exact.records.iter().zip(&mc.records) {
        assert!((a.to_samples.distance - b.to_samples.distance).abs() < 0.02);
    }
}
