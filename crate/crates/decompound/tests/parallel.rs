use decompound::parallel;
use decompound_core::experiments::{self, PsiSource};
use decompound_core::{EstimatorConfig, JumpLaw, ModelSpec};

#[test]
fn parallel_normality_matches_serial() {
    let spec = ModelSpec::new(1.0, JumpLaw::Laplace, 400).unwrap();
    let config = EstimatorConfig::new(400, 0.6).unwrap();
    let serial = experiments::mc_normality(&spec, &config, 0.5, 60, 13).unwrap();
    for jobs in [1, 3] {
        let par = parallel::mc_normality(&spec, &config, 0.5, 60, 13, jobs).unwrap();
        assert_eq!(par.stats.len(), serial.stats.len());
        assert!(par.stats.iter().zip(&serial.stats).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(par.sample_variance.to_bits(), serial.sample_variance.to_bits());
    }
}

#[test]
fn parallel_vanishing_matches_serial() {
    let config = EstimatorConfig::new(200, 0.35).unwrap();
    let ns = [30, 200];
    for source in [PsiSource::Empirical, PsiSource::Oracle] {
        let serial =
            experiments::vanishing_frequency(1.5, &JumpLaw::StandardNormal, &ns, &config, 100, 2, source).unwrap();
        let par =
            parallel::vanishing_frequency(1.5, &JumpLaw::StandardNormal, &ns, &config, 100, 2, source, 4).unwrap();
        assert_eq!(par, serial);
    }
}

#[test]
fn too_few_replicates_are_rejected() {
    let spec = ModelSpec::new(1.0, JumpLaw::Laplace, 400).unwrap();
    let config = EstimatorConfig::new(400, 0.6).unwrap();
    assert!(parallel::mc_normality(&spec, &config, 0.0, 49, 1, 2).is_err());
    assert!(parallel::vanishing_frequency(1.0, &JumpLaw::Laplace, &[50], &config, 99, 1, PsiSource::Empirical, 2).is_err());
}
