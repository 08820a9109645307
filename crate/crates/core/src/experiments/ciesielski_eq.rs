//! Equivalence of the sup block norm with the weighted coefficient norm on
//! the dyadic schedule. Level-k tents have disjoint supports and peak
//! 2^{-1-k/2}, so each block value has the closed form
//! 2^{ka}·2^{-1-k/2}·max_j|xi_j|; on a pure block the ratio to the weighted
//! sequence norm is the constant 2^{a-2}.

use super::finish;
use crate::blocks::{dyadic_schedule, BlockSchedule};
use crate::error::{Error, Result};
use crate::haar::{self, CoeffSeq};
use crate::models::BasisModel;
use crate::norms::{block_sup_norms, sup_block_norm};
use crate::report::{CheckItem, ExperimentReport, Table};

const TOL: f64 = 1e-10;

/// Closed-form sup of the block-k path without synthesizing it. Block 0 is
/// xi_1·t + xi_2·phi_2(t), piecewise linear with nodes at 0, 1/2, 1.
fn closed_form_block(xi: &CoeffSeq, schedule: &BlockSchedule, k: usize) -> f64 {
    if k == 0 {
        let a = xi.get(1);
        let b = xi.get(2);
        return (0.5 * a + 0.5 * b).abs().max(a.abs());
    }
    let range = schedule.block_range(k).expect("k in range");
    let peak = haar::schauder_peak(range.start);
    let maxc = range
        .filter(|&n| n <= xi.len())
        .map(|n| xi.get(n).abs())
        .fold(0.0, f64::max);
    2f64.powf(k as f64 * schedule.alpha) * peak * maxc
}

/// Smallest dyadic schedule covering `len` coefficients.
fn covering_schedule(alpha: f64, len: usize) -> Result<BlockSchedule> {
    let mut blocks = 1;
    while (1usize << blocks) < len.max(2) {
        blocks += 1;
    }
    dyadic_schedule(alpha, blocks)
}

pub fn ciesielski_equivalence_check(xi: &CoeffSeq, alpha: f64) -> Result<ExperimentReport> {
    if xi.is_empty() {
        return Err(Error::Config("empty coefficient vector".into()));
    }
    let started = std::time::Instant::now();
    let schedule = covering_schedule(alpha, xi.len())?;
    let level = (schedule.num_blocks()) as u32;
    let model = BasisModel::SchauderBm;

    let mut report = ExperimentReport::new(
        "ciesielski",
        serde_json::json!({
            "alpha": alpha,
            "coeffs": xi.len(),
            "cuts": schedule.cuts,
            "level": level,
        }),
        0,
        1,
    );

    // path-computed vs closed-form, per block and overall
    let sups = block_sup_norms(xi, &schedule, &model, level)?;
    let path_norm = sup_block_norm(xi, &schedule, &model, level)?;
    let mut closed_norm = 0.0f64;
    let mut table = Table::new(
        "ciesielski_blocks",
        &["k", "path_value", "closed_form", "abs_diff"],
    );
    for k in 0..schedule.num_blocks() {
        let path_val = 2f64.powf(k as f64 * alpha) * sups[k];
        let closed = closed_form_block(xi, &schedule, k);
        closed_norm = closed_norm.max(closed);
        table.push(vec![k as f64, path_val, closed, (path_val - closed).abs()]);
        report.push(CheckItem::exact(
            format!("block {k} closed form"),
            path_val,
            closed,
            (path_val - closed).abs() <= TOL,
        ));
    }
    report.tables.push(table);
    report.push(CheckItem::exact(
        "sup block norm closed form",
        path_norm,
        closed_norm,
        (path_norm - closed_norm).abs() <= TOL,
    ));

    // sequence norm and the pure-block ratio 2^{a-2}
    let (seq_norm, _) = haar::ciesielski_seq_norm(xi, alpha)?;
    report.push(CheckItem::info("ciesielski sequence norm", seq_norm));
    let want = 2f64.powf(alpha - 2.0);
    for k in 1..schedule.num_blocks() {
        let range = schedule.block_range(k)?;
        let n = range.start; // representative pure-block vector
        let mut pure = CoeffSeq::zeros(n);
        pure.as_mut_slice()[n - 1] = 1.0;
        let num = {
            let sched = covering_schedule(alpha, n)?;
            sup_block_norm(&pure, &sched, &model, sched.num_blocks() as u32)?
        };
        let (den, _) = haar::ciesielski_seq_norm(&pure, alpha)?;
        let ratio = num / den;
        report.push(CheckItem::exact(
            format!("pure block k = {k} ratio"),
            ratio,
            want,
            (ratio - want).abs() <= TOL,
        ));
    }
    Ok(finish(report, started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{CounterNoise, NoiseSource};

    #[test]
    fn zero_coefficients_give_zero_norms() {
        let xi = CoeffSeq::zeros(16);
        let r = ciesielski_equivalence_check(&xi, 0.3).unwrap();
        assert!(r.passed, "\n{}", r.summary());
        let total = r
            .items
            .iter()
            .find(|i| i.label.starts_with("sup block norm"))
            .unwrap();
        assert_eq!(total.estimate, 0.0);
    }

    #[test]
    fn random_vectors_match_closed_form() {
        let noise = CounterNoise::new(77);
        for alpha in [0.2, 0.3, 0.4] {
            for rep in 0..50u64 {
                let xi =
                    CoeffSeq::new((1..=64).map(|n| noise.gauss(rep, n)).collect());
                let r = ciesielski_equivalence_check(&xi, alpha).unwrap();
                assert!(r.passed, "alpha {alpha} rep {rep}\n{}", r.summary());
            }
        }
    }

    #[test]
    fn single_coefficient_ratio_is_exact() {
        for (n, alpha) in [(5usize, 0.2), (11, 0.35), (19, 0.45)] {
            let mut xi = CoeffSeq::zeros(n);
            xi.as_mut_slice()[n - 1] = 1.7;
            let r = ciesielski_equivalence_check(&xi, alpha).unwrap();
            assert!(r.passed, "n {n}\n{}", r.summary());
        }
    }
}
