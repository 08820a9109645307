//! Monte Carlo experiments: each produces an [`ExperimentReport`] whose
//! pass/fail items carry explicit tolerances (3 standard errors for Monte
//! Carlo frequencies, 1e-10 for algebraic identities).

pub mod ciesielski_eq;
pub mod concentration;
pub mod fernique;
pub mod key_inequality;
pub mod kfunctional;
pub mod tightness;
pub mod variance_profile;
pub mod zn;

use crate::blocks::BlockSchedule;
use crate::error::{Error, Result};
use crate::models::BasisModel;
use crate::paths::DyadicPath;
use crate::report::ExperimentReport;
use crate::rng::NoiseSource;
use serde::{Deserialize, Serialize};

pub use ciesielski_eq::ciesielski_equivalence_check;
pub use concentration::{concentration_check, Body, Subspace};
pub use fernique::estimate_fernique;
pub use key_inequality::verify_key_inequality;
pub use kfunctional::{k_functional, k_functional_report, theta_norm};
pub use tightness::tightness_experiment;
pub use variance_profile::block_variance_profile;
pub use zn::zn_convergence;

/// Common Monte Carlo knobs. Workers only affect wall time, never results.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McParams {
    pub replicates: u64,
    pub level: u32,
    pub seed: u64,
    pub workers: usize,
}

/// Which functional of the sampled path an experiment measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormSpec {
    Sup,
    RunningMax,
    SumBlock,
    SupBlock,
}

impl NormSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sup" => Ok(Self::Sup),
            "running-max" => Ok(Self::RunningMax),
            "sum-block" => Ok(Self::SumBlock),
            "sup-block" => Ok(Self::SupBlock),
            other => Err(Error::Config(format!("unknown norm {other:?}"))),
        }
    }

    pub fn needs_schedule(&self) -> bool {
        matches!(self, Self::SumBlock | Self::SupBlock)
    }
}

/// 2^{ka}·sup|W_k| for each block of the schedule, one replicate.
/// Coefficient index doubles as the noise counter, so distinct blocks use
/// disjoint, independent gaussians.
pub(crate) fn weighted_block_sups(
    model: &BasisModel,
    schedule: &BlockSchedule,
    level: u32,
    noise: &dyn NoiseSource,
    rep: u64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(schedule.num_blocks());
    for k in 0..schedule.num_blocks() {
        let range = schedule.block_range(k).expect("k < num_blocks");
        let mut acc = DyadicPath::zero(level);
        for j in range {
            let g = noise.gauss(rep, j as u64);
            model
                .add_basis_scaled(&mut acc, j, g)
                .expect("basis accumulate");
        }
        out.push(2f64.powf(k as f64 * schedule.alpha) * acc.sup_norm());
    }
    out
}

/// One replicate of the functional `spec` applied to the truncated series.
/// `n_trunc` bounds the expansion for the path functionals; block
/// functionals draw exactly the schedule's covered coefficients.
pub(crate) fn norm_sample(
    model: &BasisModel,
    schedule: Option<&BlockSchedule>,
    spec: NormSpec,
    n_trunc: usize,
    level: u32,
    noise: &dyn NoiseSource,
    rep: u64,
) -> f64 {
    match spec {
        NormSpec::Sup | NormSpec::RunningMax => {
            let mut acc = DyadicPath::zero(level);
            for j in 1..=n_trunc {
                let g = noise.gauss(rep, j as u64);
                model
                    .add_basis_scaled(&mut acc, j, g)
                    .expect("basis accumulate");
            }
            if spec == NormSpec::Sup {
                acc.sup_norm()
            } else {
                acc.running_max()
            }
        }
        NormSpec::SumBlock | NormSpec::SupBlock => {
            let sched = schedule.expect("block norm requires a schedule");
            let sups = weighted_block_sups(model, sched, level, noise, rep);
            if spec == NormSpec::SumBlock {
                sups.iter().sum()
            } else {
                sups.iter().fold(0.0, |a, &b| a.max(b))
            }
        }
    }
}

/// Default truncation for path functionals: the model's exact dimension at
/// this level when it has one, otherwise 2^level terms.
pub(crate) fn default_trunc(model: &BasisModel, level: u32) -> usize {
    model.effective_dim(level).unwrap_or(1usize << level)
}

/// Frequency and its binomial standard error.
pub(crate) fn freq_se(hits: u64, n: u64) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

pub(crate) fn finish(mut report: ExperimentReport, started: std::time::Instant) -> ExperimentReport {
    report.wall_time_s = started.elapsed().as_secs_f64();
    report
}
