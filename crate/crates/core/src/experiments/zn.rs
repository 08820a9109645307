//! Convergence of the partial norms Z_n: the running sums (or sups) of the
//! weighted block norms 2^{ka} sup|W_k|. Checks monotonicity, the Cauchy
//! tail-jump bound P(Z_K - Z_n > 2·2^{-n}) <= 2^{-n}, finiteness of Z_K,
//! and that P(Z < eps) stays positive down to small eps.

use super::{finish, freq_se, weighted_block_sups, McParams};
use crate::blocks::{BlockSchedule, Variant};
use crate::error::Result;
use crate::models::BasisModel;
use crate::report::{CheckItem, ExperimentReport, Table};
use crate::rng::{replicate_map, NoiseSource};

/// Epsilon grid for the P(Z < eps) check: explicit values, or (when empty)
/// empirical quantiles of Z_K at these levels.
const QUANTILES: [f64; 4] = [0.01, 0.05, 0.25, 0.5];

pub fn zn_convergence(
    model: &BasisModel,
    schedule: &BlockSchedule,
    params: &McParams,
    eps_grid: &[f64],
    noise: &dyn NoiseSource,
) -> Result<ExperimentReport> {
    let started = std::time::Instant::now();
    let kk = schedule.num_blocks();
    let trajectories = replicate_map(params.replicates, params.workers, |rep| {
        let sups = weighted_block_sups(model, schedule, params.level, noise, rep);
        let mut z = Vec::with_capacity(kk);
        let mut acc = 0.0;
        for s in sups {
            match schedule.variant {
                Variant::Sum => acc += s,
                Variant::Sup => acc = acc.max(s),
            }
            z.push(acc);
        }
        z
    });
    let r = params.replicates;
    let mut report = ExperimentReport::new(
        "zn-convergence",
        serde_json::json!({
            "model": model.kind(),
            "alpha": schedule.alpha,
            "variant": schedule.variant,
            "eta": schedule.eta,
            "level": params.level,
            "cuts": schedule.cuts,
            "eps_grid": eps_grid,
        }),
        params.seed,
        r,
    );

    // (i) Z_n is nondecreasing in n, replicate by replicate
    let monotone = trajectories
        .iter()
        .all(|z| z.windows(2).all(|w| w[0] <= w[1]));
    report.push(CheckItem::exact(
        "monotone trajectories fraction",
        if monotone { 1.0 } else { 0.0 },
        1.0,
        monotone,
    ));

    // (ii) sum variant: Cauchy tail jumps P(Z_K - Z_n > 2·2^{-n}) <= 2^{-n}
    if schedule.variant == Variant::Sum {
        let mut table = Table::new("zn_tail_jump", &["n", "frequency", "std_error", "bound"]);
        for n in 1..kk {
            let gap = 2.0 * 2f64.powi(-(n as i32));
            let hits = trajectories
                .iter()
                .filter(|z| z[kk - 1] - z[n - 1] > gap)
                .count() as u64;
            let (p, se) = freq_se(hits, r);
            let bound = 2f64.powi(-(n as i32));
            table.push(vec![n as f64, p, se, bound]);
            report.push(CheckItem::mc(
                format!("freq(Z_K - Z_{n} > 2*2^-{n})"),
                p,
                se,
                bound,
                p <= bound + 3.0 * se,
            ));
        }
        report.tables.push(table);
    }

    // (iii) Z_K finite in every replicate
    let finite = trajectories.iter().filter(|z| z[kk - 1].is_finite()).count() as u64;
    report.push(CheckItem::exact(
        "finite Z_K fraction",
        finite as f64 / r as f64,
        1.0,
        finite == r,
    ));

    // (iv) P(Z < eps) > 0 on the grid (empirical quantiles when no grid given)
    let mut zk: Vec<f64> = trajectories.iter().map(|z| z[kk - 1]).collect();
    zk.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let grid: Vec<f64> = if eps_grid.is_empty() {
        QUANTILES
            .iter()
            .map(|q| {
                let idx = ((r as f64 * q) as usize).min(zk.len() - 1);
                // nudge above the order statistic so the strict count is positive
                zk[idx] * (1.0 + 1e-12) + f64::MIN_POSITIVE
            })
            .collect()
    } else {
        eps_grid.to_vec()
    };
    for eps in grid {
        let hits = zk.iter().filter(|&&z| z < eps).count() as u64;
        let (p, se) = freq_se(hits, r);
        report.push(CheckItem::mc(
            format!("freq(Z < {eps:.6})"),
            p,
            se,
            0.0,
            p > 0.0,
        ));
    }
    Ok(finish(report, started))
}
