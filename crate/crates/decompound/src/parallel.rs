//! Replicate-parallel runners.
//!
//! Each replicate derives its seed from the master seed and its index and
//! results are reduced in index order, so output does not depend on the
//! number of worker threads.

use rayon::prelude::*;

use decompound_core::experiments::{
    check_reps, normality_replicate, vanishing_probe, vanishing_seed, NormalityReport, PsiSource,
    VanishingRow, VanishingTable, MIN_NORMALITY_REPS, MIN_VANISHING_REPS,
};
use decompound_core::{EstimatorConfig, JumpLaw, ModelSpec, Result};

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool")
}

/// Parallel [`decompound_core::experiments::mc_normality`]; `jobs = 0` uses all cores.
pub fn mc_normality(
    spec: &ModelSpec,
    config: &EstimatorConfig,
    x: f64,
    reps: usize,
    seed: u64,
    jobs: usize,
) -> Result<NormalityReport> {
    check_reps(reps, MIN_NORMALITY_REPS)?;
    let replicates = pool(jobs).install(|| {
        (0..reps)
            .into_par_iter()
            .map(|i| normality_replicate(spec, config, x, seed, i))
            .collect::<Result<Vec<_>>>()
    })?;
    NormalityReport::from_replicates(spec, config, x, replicates)
}

/// Parallel [`decompound_core::experiments::vanishing_frequency`].
#[allow(clippy::too_many_arguments)]
pub fn vanishing_frequency(
    lambda: f64,
    jump_law: &JumpLaw,
    ns: &[usize],
    config: &EstimatorConfig,
    reps: usize,
    seed: u64,
    source: PsiSource,
    jobs: usize,
) -> Result<VanishingTable> {
    check_reps(reps, MIN_VANISHING_REPS)?;
    config.validate()?;
    let pool = pool(jobs);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let probes = pool.install(|| {
            (0..reps)
                .into_par_iter()
                .map(|r| vanishing_probe(lambda, jump_law, n, config, source, vanishing_seed(seed, n, r)))
                .collect::<Result<Vec<_>>>()
        })?;
        rows.push(VanishingRow::from_probes(n, &probes));
    }
    Ok(VanishingTable {
        lambda,
        h: config.h,
        source,
        rows,
    })
}
