//! The key block-norm inequality: P(2^{ka} sup|W_k| >= 2^{-k}) <= 2^{-k},
//! a Markov bound on the Gaussian block sums that drives summability of the
//! intermediate norm. Verified as an empirical frequency per block.

use super::{finish, freq_se, weighted_block_sups, McParams};
use crate::blocks::{BlockSchedule, Variant};
use crate::error::{Error, Result};
use crate::models::BasisModel;
use crate::report::{CheckItem, ExperimentReport, Table};
use crate::rng::{replicate_map, NoiseSource};

pub fn verify_key_inequality(
    model: &BasisModel,
    schedule: &BlockSchedule,
    params: &McParams,
    noise: &dyn NoiseSource,
) -> Result<ExperimentReport> {
    if schedule.variant != Variant::Sum {
        return Err(Error::Config(
            "key inequality is stated for the sum-variant schedule".into(),
        ));
    }
    let started = std::time::Instant::now();
    let kk = schedule.num_blocks();
    let hits_per_rep = replicate_map(params.replicates, params.workers, |rep| {
        let sups = weighted_block_sups(model, schedule, params.level, noise, rep);
        sups.iter()
            .enumerate()
            .map(|(k, &s)| s >= 2f64.powi(-(k as i32)))
            .collect::<Vec<bool>>()
    });
    let mut hits = vec![0u64; kk];
    for rep in &hits_per_rep {
        for (k, &h) in rep.iter().enumerate() {
            hits[k] += h as u64;
        }
    }
    let mut report = ExperimentReport::new(
        "key-inequality",
        serde_json::json!({
            "model": model.kind(),
            "alpha": schedule.alpha,
            "level": params.level,
            "cuts": schedule.cuts,
        }),
        params.seed,
        params.replicates,
    );
    let mut table = Table::new("key_inequality", &["k", "frequency", "std_error", "bound"]);
    for k in 0..kk {
        let (p, se) = freq_se(hits[k], params.replicates);
        let bound = 2f64.powi(-(k as i32));
        table.push(vec![k as f64, p, se, bound]);
        report.push(CheckItem::mc(
            format!("freq(2^{{k a}} sup|W_{k}| >= 2^-{k})"),
            p,
            se,
            bound,
            p <= bound + 3.0 * se,
        ));
    }
    report.tables.push(table);
    Ok(finish(report, started))
}
