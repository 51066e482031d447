//! Matching two noisy feature sets by permutation estimation.
//!
//! Given `X_1, …, X_n` and `X#_1, …, X#_m` observed as noisy copies of
//! common true features `θ`, the goal is the injection `π*` such that
//! `X#_i` is a noisy copy of `θ_{π*(i)}`.
//!
//! * [`model`] builds feature sets, noise levels and synthetic instances.
//! * [`assignment`] solves minimum-cost assignment problems.
//! * [`estimators`] turns an instance into a cost matrix and an estimate.
//! * [`metrics`] has the losses and the separation-rate formulas.
//! * [`permgroup`] counts and packs permutations.
//! * [`harness`] runs seeded Monte Carlo experiments.
//!
//! ```
//! use permatch::{estimate, generate_instance, uniform_box_theta, EstimatorKind, NoiseSpec, Permutation};
//! use permatch::rng::seeded;
//!
//! let theta = uniform_box_theta(20, 10, 8.0, 1)?;
//! let truth = Permutation::random(20, &mut seeded(2));
//! let inst = generate_instance(&theta, &NoiseSpec::homoscedastic(0.2)?, &truth, 3)?;
//! let est = estimate(&inst, &EstimatorKind::Lsl)?;
//! assert_eq!(est, truth);
//! # Ok::<(), permatch::Error>(())
//! ```

pub mod assignment;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod model;
pub mod permgroup;
pub mod permutation;
pub mod rng;

pub use assignment::{solve_bruteforce, solve_hungarian, solve_rectangular, AssignmentSolution, CostMatrix};
pub use error::{Error, Result};
pub use estimators::{estimate, EstimatorKind};
pub use harness::{aggregate, run_experiment, ExperimentConfig, Scenario, Summary, TrialRecord};
pub use metrics::{kappa_star, loss_01, loss_hamming, separation, theorem1_threshold};
pub use model::{generate_instance, uniform_box_theta, FeatureSet, MatchInstance, NoiseSpec};
pub use permutation::Permutation;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/assignment.md")]
    mod assignment {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/permutations.md")]
    mod permutations {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
