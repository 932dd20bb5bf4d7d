mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use varivery::diagnostics::{estimate_vanishing_similarity, Distribution};
use varivery::hardfn::{dlp_msb, DlpInstance};
use varivery::kernel::{
    classify, fit, gram, predict, predict_many, DlpFeatureMap, FeatureMap, KernelModel,
};
use varivery::rng::stream_rng;
use varivery::train::Dataset;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_matrices_are_psd(n in 1usize..4, size in 1usize..8, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0, &[]);
        let fm = common::random_feature_map(n, 6, &mut rng);
        let inputs: Vec<u64> = (0..size).map(|_| rng.gen_range(0..6)).collect();
        let k = gram(&fm, &inputs).unwrap();
        prop_assert!(k.symmetry_defect() < 1e-12);
        prop_assert!(k.max_diagonal_defect() < 1e-12);
        prop_assert!(k.min_eigenvalue() >= -1e-8);
        prop_assert!(k.entries.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
    }

    #[test]
    fn fitted_model_satisfies_ridge_equations(size in 1usize..10, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0, &[]);
        let fm = common::random_feature_map(2, 8, &mut rng);
        let inputs: Vec<u64> = (0..size).map(|_| rng.gen_range(0..8)).collect();
        let labels: Vec<f64> = inputs.iter().map(|x| if x % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let k = gram(&fm, &inputs).unwrap();
        let model = fit(&k, &labels, 1e-3, &fm.id()).unwrap();
        prop_assert!(model.residual(&k, &labels) <= 1e-8);
        let many = predict_many(&model, &fm, &inputs).unwrap();
        for (x, v) in inputs.iter().zip(&many) {
            prop_assert!((predict(&model, &fm, *x).unwrap() - v).abs() < 1e-12);
        }
    }
}

#[test]
fn dlp_pipeline_separates_the_training_set() {
    let inst = Arc::new(DlpInstance::new(23, 5).unwrap());
    let data = Dataset::planted(&dlp_msb(&inst), 32, 0, 5).unwrap();
    let fm = DlpFeatureMap {
        instance: inst,
        k_window: 2,
    };
    let k = gram(&fm, &data.inputs()).unwrap();
    assert!(k.min_eigenvalue() >= -1e-8);
    let model = fit(&k, &data.labels(), 1e-3, &fm.id()).unwrap();
    assert!(model.residual(&k, &data.labels()) <= 1e-8);
    let scores = predict_many(&model, &fm, &data.inputs()).unwrap();
    assert!(scores.iter().zip(data.labels()).all(|(s, y)| classify(*s) == y));
    let json = model.to_json().unwrap();
    let back: KernelModel = serde_json::from_str(&json).unwrap();
    assert_eq!(back, model);
    assert!(k.to_csv().lines().count() >= 32);
}

#[test]
fn dlp_similarity_does_not_vanish_at_toy_size() {
    let fm = DlpFeatureMap {
        instance: Arc::new(DlpInstance::new(23, 5).unwrap()),
        k_window: 2,
    };
    let est = estimate_vanishing_similarity(&fm, &Distribution::GroupElements { p: 23, g: 5 }, 1000, 0).unwrap();
    assert!(est.positive_by(3.0));
}
