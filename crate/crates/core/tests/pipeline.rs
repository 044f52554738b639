use std::collections::HashSet;

use adl_core::dsp::{detect_peaks, lowpass, magnitude};
use adl_core::experiment::{
    evaluate, project_rows, run_cell, run_grid, split_seed, stratified_split, train, CellKey, EvalResult,
    GridConfig, Normalization, TrainingBudget,
};
use adl_core::features::{featurize, DatasetVariant, FeatureSettings};
use adl_core::ingest::{serialize_capture, validate_capture, AdlLabel};
use adl_core::nn::{NetworkSpec, Preset};
use adl_core::rng::seeded;
use adl_core::synth::{generate_capture, generate_corpus, SynthParams};
use adl_core::{Example, FeatureVector, ScalarSeries};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn corpus(per_class: usize, seed: u64) -> Vec<FeatureVector> {
    generate_corpus(per_class, &SynthParams::default(), seed)
        .unwrap()
        .iter()
        .map(|c| featurize(c, &FeatureSettings::default()).unwrap())
        .collect()
}

#[test]
fn standing_is_quiet() {
    let p = SynthParams::default();
    for i in 0..20 {
        let c = generate_capture(AdlLabel::Standing, &p, 900 + i).unwrap();
        let f: FeatureVector = featurize(&c, &FeatureSettings::default()).unwrap();
        assert!(f.raw_std < 0.5, "standing raw_std {}", f.raw_std);
    }
}

#[test]
fn walking_has_a_plausible_step_count() {
    let p = SynthParams::default();
    for i in 0..50 {
        let c = generate_capture(AdlLabel::Walking, &p, 100 + i).unwrap();
        let s: ScalarSeries = lowpass(&magnitude(&c), 0.1).unwrap();
        let n = detect_peaks(&s, 250.0, 0.0).unwrap().len();
        assert!((7..=12).contains(&n), "capture {i}: {n} peaks");
    }
}

#[test]
fn mean_magnitude_orders_by_intensity() {
    let rows = corpus(30, 5);
    let avg = |l: AdlLabel| {
        let v: Vec<f64> = rows.iter().filter(|r| r.label == l).map(|r| r.raw_avg).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(avg(AdlLabel::Running) > avg(AdlLabel::Walking));
    assert!(avg(AdlLabel::Walking) > avg(AdlLabel::Standing));
}

#[test]
fn disjoint_seeds_give_distinct_captures() {
    let a = generate_corpus(40, &SynthParams::default(), 1).unwrap();
    let b = generate_corpus(40, &SynthParams::default(), 2).unwrap();
    let seen: HashSet<Vec<u8>> = a.iter().map(serialize_capture).collect();
    assert_eq!(seen.len(), a.len());
    assert!(b.iter().all(|c| !seen.contains(&serialize_capture(c))));
}

#[test]
fn full_scale_corpus_is_valid() {
    let all = generate_corpus(2000, &SynthParams::default(), 3).unwrap();
    assert_eq!(all.len(), 10_000);
    for l in AdlLabel::ALL {
        assert_eq!(all.iter().filter(|c| c.label == l).count(), 2000);
    }
    for c in all.iter().step_by(97) {
        validate_capture(c.clone()).unwrap();
    }
}

#[test]
fn uniform_random_predictor_scores_chance() {
    let rows: Vec<Example> =
        (0..10_000).map(|i| Example { x: vec![0.0], label: AdlLabel::from_code(i % 5).unwrap() }).collect();
    let rng = std::cell::RefCell::new(seeded(77));
    let guess = |_: &[f64]| AdlLabel::from_code(rng.borrow_mut().random_range(0..5)).unwrap();
    let r = evaluate(&guess, &rows).unwrap();
    assert_eq!(r.total(), 10_000);
    assert!((r.accuracy - 0.2).abs() <= 0.02, "accuracy {}", r.accuracy);
}

#[test]
fn perfect_stub_gives_diagonal_confusion() {
    let rows: Vec<Example> = (0..500)
        .map(|i| Example { x: vec![(i % 5) as f64], label: AdlLabel::from_code(i % 5).unwrap() })
        .collect();
    let oracle = |x: &[f64]| AdlLabel::from_code(x[0] as usize).unwrap();
    let r = evaluate(&oracle, &rows).unwrap();
    assert_eq!(r.accuracy, 1.0);
    let mut want = [[0u64; 5]; 5];
    for (k, row) in want.iter_mut().enumerate() {
        row[k] = 100;
    }
    assert_eq!(r, EvalResult::from_confusion(want));
}

#[test]
fn deep_net_separates_gaussian_blobs() {
    let mut rng = seeded(21);
    let centers: Vec<Vec<f64>> = (0..5).map(|_| (0..15).map(|_| rng.random_range(-4.0..4.0)).collect()).collect();
    let rows: Vec<Example> = (0..1000)
        .map(|i| {
            let k = i % 5;
            let x = centers[k]
                .iter()
                .map(|c| c + 0.5 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            Example { x, label: AdlLabel::from_code(k).unwrap() }
        })
        .collect();
    let spec = NetworkSpec::from_preset(Preset::Deep, 15, 4);
    let out = train(spec, DatasetVariant::D1, Normalization::Normalized, &rows, TrainingBudget::new(10_000).unwrap())
        .unwrap();
    let r = evaluate(&out.model, &rows).unwrap();
    assert!(r.accuracy >= 0.95, "training accuracy {}", r.accuracy);
    assert_eq!(out.loss_history.len(), 1000);
    let early: f64 = out.loss_history[..50].iter().map(|p| p.1).sum::<f64>() / 50.0;
    let late: f64 = out.loss_history[950..].iter().map(|p| p.1).sum::<f64>() / 50.0;
    assert!(late < early);
}

#[test]
fn single_cell_matches_its_grid_entry() {
    let rows = corpus(40, 9);
    let config = GridConfig {
        presets: vec![Preset::MlpBp, Preset::Deep],
        variants: vec![DatasetVariant::D3, DatasetVariant::D5],
        budgets: vec![2000],
        master_seed: 9,
        ..GridConfig::default()
    };
    let grid = run_grid(&config, &rows).unwrap();
    assert_eq!(grid.cells.len(), 8);
    let (train_rows, test_rows) = stratified_split(&rows, config.test_fraction, split_seed(9)).unwrap();
    for key in config.cells() {
        let alone = run_cell(key, 9, &train_rows, &test_rows);
        assert_eq!(Some(&alone), grid.get(&key), "{key}");
    }
}

#[test]
fn larger_budget_does_not_hurt_deep_normalized() {
    let rows = corpus(100, 2024);
    let (train_rows, test_rows) = stratified_split(&rows, 0.3, split_seed(2024)).unwrap();
    let acc = |budget| {
        let key = CellKey {
            preset: Preset::Deep,
            variant: DatasetVariant::D1,
            normalization: Normalization::Normalized,
            budget,
        };
        run_cell(key, 2024, &train_rows, &test_rows).outcome.unwrap().accuracy
    };
    let (lo, hi) = (acc(10_000), acc(40_000));
    assert!(hi >= lo - 0.05, "10k: {lo}, 40k: {hi}");
}

#[test]
fn f32_pipeline_trains() {
    let caps = generate_corpus(20, &SynthParams::default(), 6).unwrap();
    let rows: Vec<adl_core::FeatureVector32> =
        caps.iter().map(|c| featurize(c, &FeatureSettings::default()).unwrap()).collect();
    let (tr, te) = stratified_split(&rows, 0.3, 1).unwrap();
    let spec = NetworkSpec::<f32>::from_preset(Preset::Deep, 15, 1);
    let out = train(spec, DatasetVariant::D1, Normalization::Normalized, &project_rows(&tr, DatasetVariant::D1),
        TrainingBudget::new(3000).unwrap())
    .unwrap();
    let r = evaluate(&out.model, &project_rows(&te, DatasetVariant::D1)).unwrap();
    assert!(r.accuracy > 0.5, "f32 accuracy {}", r.accuracy);
}
