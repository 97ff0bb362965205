mod common;

use kec::eval::{cross_validate_sim, EvalConfig, Method};
use kec::selection::{fit_detailed, select_index};
use kec::simgen::generate;
use kec::{fit, validate, Error, FitOptions, KernelId, SimParams, SimSetting};
use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_dataset;

#[test]
fn selection_rule_examples() {
    assert_eq!(select_index(&[10.0, 6.0, 9.0], 0, 0.7), 1);
    assert_eq!(select_index(&[10.0, 8.0, 9.0], 0, 0.7), 0);
    assert_eq!(select_index(&[5.0], 0, 0.7), 0);
    assert_eq!(select_index(&[10.0, 7.0, 7.0], 0, 0.7), 1);
}

#[test]
fn linear_encoder_on_normal_hd_reaches_zero_error() {
    let params = SimParams::new(SimSetting::NormalHD, 500, 1).with_dims(100, 5);
    let config = EvalConfig {
        replicates: 1,
        methods: vec![Method::FastLinear],
        timing: false,
        kernels: vec![KernelId::InnerProduct],
        ..EvalConfig::default()
    };
    let report = cross_validate_sim(&params, &config).unwrap();
    let error = report.summary(Method::FastLinear).unwrap().mean_error;
    assert!(error <= 0.01, "error {error}");
}

#[test]
fn missing_baseline_kernel_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data = random_dataset(&mut rng, 30, 4, 2);
    let options = FitOptions::with_kernels(vec![KernelId::DistanceInduced, KernelId::SpearmanRank]);
    assert_eq!(fit(&data, &options).unwrap_err(), Error::NoBaselineKernel);
}

#[test]
fn threshold_one_is_pure_argmin() {
    let data = common::rescaled_patterns(150, 20, 3, 4);
    let options = FitOptions {
        switch_threshold: 1.0,
        ..FitOptions::default()
    };
    let model = fit(&data, &options).unwrap();
    let ces = &model.cross_entropies;
    let argmin = (0..ces.len()).fold(0, |best, i| if ces[i] < ces[best] { i } else { best });
    assert_eq!(model.selected, argmin);
}

#[test]
fn fit_records_every_candidate() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data = random_dataset(&mut rng, 90, 6, 3);
    let (model, scores) = fit_detailed(&data, &FitOptions::default()).unwrap();
    assert_eq!(model.kernel_ids.len(), 3);
    assert_eq!(model.candidates.len(), 3);
    assert_eq!(scores.len(), 3);
    for (s, &c) in scores.iter().zip(&model.cross_entropies) {
        assert_eq!(s.cross_entropy, c);
        assert_eq!(s.embedding.dim(), (90, 3));
    }
}

#[test]
fn class_representative_predicts_its_class() {
    let params = SimParams::new(SimSetting::NormalHD, 300, 3).with_dims(60, 4);
    let data = generate(&params).unwrap().dataset;
    let model = fit(&data, &FitOptions::default()).unwrap();
    let pred = model.predict_new(model.u.view()).unwrap();
    assert_eq!(pred.labels, vec![1, 2, 3, 4]);
}

#[test]
fn empty_input_gives_empty_prediction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = random_dataset(&mut rng, 40, 5, 2);
    let model = fit(&data, &FitOptions::default()).unwrap();
    let pred = model.predict_new(Array2::<f64>::zeros((0, 5)).view()).unwrap();
    assert!(pred.labels.is_empty());
    assert_eq!(pred.posteriors.dim(), (0, 2));
}

#[test]
fn wrong_width_is_a_dimension_mismatch() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = random_dataset(&mut rng, 40, 5, 2);
    let model = fit(&data, &FitOptions::default()).unwrap();
    let err = model.predict_new(Array2::<f64>::zeros((3, 4)).view()).unwrap_err();
    assert_eq!(err, Error::DimensionMismatch { expected: 5, found: 4 });
}

#[test]
fn training_rows_match_in_sample_predictions() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let data = random_dataset(&mut rng, 70, 5, 3);
    let (model, scores) = fit_detailed(&data, &FitOptions::default()).unwrap();
    let stats = validate(&data).unwrap();
    let x_trn = data.features().select(Axis(0), &stats.trn);
    let z_trn = scores[model.selected].embedding.select(Axis(0), &stats.trn);
    let in_sample = model.lda().predict(z_trn.view()).unwrap();
    assert_eq!(model.predict_new(x_trn.view()).unwrap().labels, in_sample);
}

#[test]
fn fitting_is_deterministic() {
    let params = SimParams::new(SimSetting::UniformNoise, 200, 5).with_dims(40, 3);
    let data = generate(&params).unwrap().dataset;
    let a = fit(&data, &FitOptions::default()).unwrap();
    let b = fit(&data, &FitOptions::default()).unwrap();
    assert_eq!(a, b);
}
