mod support;

use support::props;

const CASES: u32 = 256;

macro_rules! property {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = props::$name(CASES) {
                    panic!("{e}");
                }
            }
        )*
    };
}

property!(
    log_round_trip,
    segmentation_partition,
    run_length_reconstruction,
    polarity_kernel,
    triangular_smoothing,
    alignment_conservation,
    fusion_monotonicity,
    transition_oracle_equivalence,
    appending_lowers_probability,
    permutation_sensitivity,
    pca_pythagoras_and_full_rank,
    threshold_semantics,
    weight_linearity,
    duration_negation_consistency,
    emotion_monotonicity,
    corpus_standardization,
    anchor_affine_invariance,
    simulator_determinism,
    label_consistency,
    guideline_conformance,
);

#[test]
fn registry_lists_every_property() {
    assert_eq!(props::ALL.len(), 20);
}
