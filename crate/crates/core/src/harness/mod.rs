//! Monte Carlo experiments on synthetic data.
//!
//! [`run_experiment`] expands a configuration into independent trials. Trial
//! `t` at sweep position `s` draws everything from a stream keyed by
//! `derive_seed(seed, s, t)`, so results do not depend on thread scheduling.
//! Trials run on the rayon pool and are collected back in order.

mod config;
mod emit;
mod summary;

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

pub use config::{ExperimentConfig, Scenario};
pub use emit::{emit, render_svg, OutputFormat};
pub use summary::{aggregate, RealizedSeparation, Summary, SummaryRow};

use crate::error::Result;
use crate::estimators::estimate;
use crate::metrics::{loss_01, loss_hamming, separation};
use crate::model::{
    generate_instance, least_favorable_theta, scaled_identity_theta, theorem5_instance, uniform_box_theta,
    FeatureSet, MatchInstance, NoiseSpec,
};
use crate::permutation::Permutation;
use crate::rng::{derive_seed, seeded};

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub sweep_value: f64,
    pub estimator: String,
    /// Seed of the trial's random stream.
    pub seed: u64,
    pub loss_01: u8,
    pub loss_hamming: f64,
    /// Realized separation of the true features.
    pub kappa: f64,
    pub kappa_bar: f64,
    /// Estimator wall time in seconds; zero unless timing is enabled.
    pub wall_time: f64,
}

struct Trial {
    instance: MatchInstance,
    theta: FeatureSet,
    noise: NoiseSpec,
}

fn build_trial(cfg: &ExperimentConfig, value: f64, trial_seed: u64) -> Result<Trial> {
    let n = cfg.n;
    let mut rng = seeded(trial_seed);
    if cfg.scenario == Scenario::Theorem5Check {
        let t5 = theorem5_instance(cfg.d, value, rng.random())?;
        let mut data = vec![0.0; 2 * cfg.d];
        data[cfg.d] = 2.0 * value;
        return Ok(Trial {
            instance: t5.instance,
            theta: FeatureSet::new(2, cfg.d, data)?,
            noise: NoiseSpec::heteroscedastic(vec![3f64.sqrt(), 1.0])?,
        });
    }

    let truth = Permutation::random(n, &mut rng);
    let theta_seed: u64 = rng.random();
    let noise_seed: u64 = rng.random();
    let hetero = match cfg.scenario {
        Scenario::Fig2Heteroscedastic => true,
        Scenario::Custom => cfg.sigma_high.is_some(),
        _ => false,
    };
    let noise = if hetero {
        let high = cfg.sigma_high.unwrap_or(cfg.sigma);
        let mut levels = vec![cfg.sigma; n];
        for i in rand::seq::index::sample(&mut rng, n, cfg.effective_high_count()) {
            levels[i] = high;
        }
        NoiseSpec::heteroscedastic(levels)?
    } else {
        NoiseSpec::homoscedastic(cfg.sigma)?
    };
    let theta = match cfg.scenario {
        Scenario::Fig2Heteroscedastic => scaled_identity_theta(n, value)?,
        Scenario::Theorem1Check => least_favorable_theta(&vec![cfg.sigma; n], value, cfg.d)?,
        _ => uniform_box_theta(n, cfg.d, value, theta_seed)?,
    };
    let instance = generate_instance(&theta, &noise, &truth, noise_seed)?;
    Ok(Trial { instance, theta, noise })
}

fn run_trial(cfg: &ExperimentConfig, value: f64, trial_seed: u64) -> Result<Vec<TrialRecord>> {
    let trial = build_trial(cfg, value, trial_seed)?;
    let sep = separation(&trial.theta, &trial.noise)?;
    let truth = trial.instance.truth().expect("synthetic instances carry their truth");
    cfg.estimators
        .iter()
        .map(|kind| {
            let start = cfg.record_timing.then(Instant::now);
            let est = estimate(&trial.instance, kind)?;
            let wall_time = start.map_or(0.0, |s| s.elapsed().as_secs_f64());
            Ok(TrialRecord {
                sweep_value: value,
                estimator: kind.tag().to_string(),
                seed: trial_seed,
                loss_01: loss_01(&est, truth)?,
                loss_hamming: loss_hamming(&est, truth)?,
                kappa: sep.kappa,
                kappa_bar: sep.kappa_bar,
                wall_time,
            })
        })
        .collect()
}

/// Runs every (sweep value, trial, estimator) combination. Records are
/// ordered by sweep position, then trial, then estimator as listed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let jobs: Vec<(f64, u64)> = cfg
        .sweep
        .iter()
        .enumerate()
        .flat_map(|(s, &v)| (0..cfg.trials).map(move |t| (v, derive_seed(cfg.seed, s as u64, t as u64))))
        .collect();
    let per_trial: Vec<Vec<TrialRecord>> =
        jobs.par_iter().map(|&(v, seed)| run_trial(cfg, v, seed)).collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}
