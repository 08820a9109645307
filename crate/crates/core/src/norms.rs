//! Intermediate norms on finite expansions: the summed block norm
//! Σ_k 2^{ka} sup|Q_k x|, its sup-over-k companion, the RKHS norm, and the
//! tail-block bound that quantifies compactness of the embedding.
//!
//! Block weights start at k = 0 (weight 1); the preliminary block under a
//! dyadic schedule holds indices 1 and 2.

use crate::blocks::{block_project, BlockSchedule};
use crate::error::{Error, Result};
use crate::haar::CoeffSeq;
use crate::models::BasisModel;
use crate::paths::DyadicPath;

fn check_support(xi: &CoeffSeq, schedule: &BlockSchedule) -> Result<()> {
    let last = schedule.last_cut();
    for n in (last + 1)..=xi.len() {
        if xi.get(n) != 0.0 {
            return Err(Error::CoeffsBeyondSchedule { last_cut: last });
        }
    }
    Ok(())
}

/// Sup norms of the per-block paths Q_k x, k = 0..K-1.
pub fn block_sup_norms(
    xi: &CoeffSeq,
    schedule: &BlockSchedule,
    model: &BasisModel,
    level: u32,
) -> Result<Vec<f64>> {
    check_support(xi, schedule)?;
    let mut out = Vec::with_capacity(schedule.num_blocks());
    for k in 0..schedule.num_blocks() {
        let q = block_project(xi, schedule, k)?;
        let path = model.combine(&q, level)?;
        out.push(path.sup_norm());
    }
    Ok(out)
}

/// Σ_k 2^{ka} ‖Q_k x‖_sup over the schedule's blocks.
pub fn sum_block_norm(
    xi: &CoeffSeq,
    schedule: &BlockSchedule,
    model: &BasisModel,
    level: u32,
) -> Result<f64> {
    let sups = block_sup_norms(xi, schedule, model, level)?;
    Ok(sups
        .iter()
        .enumerate()
        .map(|(k, s)| 2f64.powf(k as f64 * schedule.alpha) * s)
        .sum())
}

/// sup_k 2^{ka} ‖Q_k x‖_sup over the schedule's blocks.
pub fn sup_block_norm(
    xi: &CoeffSeq,
    schedule: &BlockSchedule,
    model: &BasisModel,
    level: u32,
) -> Result<f64> {
    let sups = block_sup_norms(xi, schedule, model, level)?;
    Ok(sups
        .iter()
        .enumerate()
        .map(|(k, s)| 2f64.powf(k as f64 * schedule.alpha) * s)
        .fold(0.0, f64::max))
}

/// ℓ² norm of the coefficients — the RKHS norm of the expansion.
pub fn rkhs_norm(xi: &CoeffSeq) -> f64 {
    xi.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Tail past block k0 and its bound 2^{-a k0} · (summed block norm).
/// The inequality tail <= bound is pure algebra and holds with zero
/// tolerance.
pub fn block_tail_bound(
    xi: &CoeffSeq,
    schedule: &BlockSchedule,
    model: &BasisModel,
    level: u32,
    k0: usize,
) -> Result<(f64, f64)> {
    if k0 >= schedule.num_blocks() {
        return Err(Error::BlockOutOfRange {
            k: k0,
            blocks: schedule.num_blocks(),
        });
    }
    let sups = block_sup_norms(xi, schedule, model, level)?;
    let tail: f64 = sups.iter().skip(k0 + 1).sum();
    let total: f64 = sups
        .iter()
        .enumerate()
        .map(|(k, s)| 2f64.powf(k as f64 * schedule.alpha) * s)
        .sum();
    Ok((tail, 2f64.powf(-schedule.alpha * k0 as f64) * total))
}

/// All five norms of a path, given its expansion in the model's basis.
/// The Hölder field reports the profile maximum over dyadic scales.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NormReport {
    pub sup: f64,
    pub h1: f64,
    pub holder: f64,
    pub sum_block: f64,
    pub sup_block: f64,
}

pub fn norm_report(
    path: &DyadicPath,
    xi: &CoeffSeq,
    schedule: &BlockSchedule,
    model: &BasisModel,
    alpha: f64,
) -> Result<NormReport> {
    let (holder, _) = path.holder_quotient(alpha)?;
    Ok(NormReport {
        sup: path.sup_norm(),
        h1: path.h1_seminorm(),
        holder,
        sum_block: sum_block_norm(xi, schedule, model, path.level())?,
        sup_block: sup_block_norm(xi, schedule, model, path.level())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{build_schedule, Variant};
    use crate::haar;
    use crate::models::TailParams;
    use crate::rng::CounterNoise;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const LEVEL: u32 = 8;

    fn schedule() -> BlockSchedule {
        build_schedule(
            &BasisModel::SchauderBm,
            0.4,
            Variant::Sum,
            None,
            5,
            &TailParams {
                replicates: 48,
                j_max: (1 << LEVEL) + 5,
                level: LEVEL,
                seed: 9,
                workers: 1,
            },
        )
        .unwrap()
    }

    fn dyadic_schedule(alpha: f64, blocks: usize) -> BlockSchedule {
        // Remark-4 style cuts n_k = 2^k with a preliminary block {1, 2}
        let mut cuts = vec![0usize];
        cuts.extend((1..=blocks).map(|k| 1usize << k));
        BlockSchedule {
            alpha,
            variant: Variant::Sum,
            eta: None,
            cuts,
            certificates: vec![],
            seed: 0,
        }
    }

    fn random_xi(len: usize, seed: u64) -> CoeffSeq {
        use crate::rng::NoiseSource;
        let noise = CounterNoise::new(seed);
        CoeffSeq::new((0..len).map(|i| noise.gauss(0, i as u64)).collect())
    }

    #[test]
    fn zero_input_gives_zero_norms() {
        let sched = schedule();
        let xi = CoeffSeq::zeros(sched.last_cut());
        let model = BasisModel::SchauderBm;
        assert_eq!(sum_block_norm(&xi, &sched, &model, LEVEL).unwrap(), 0.0);
        assert_eq!(sup_block_norm(&xi, &sched, &model, LEVEL).unwrap(), 0.0);
        assert_eq!(rkhs_norm(&xi), 0.0);
        let (t, b) = block_tail_bound(&xi, &sched, &model, LEVEL, 1).unwrap();
        assert_eq!((t, b), (0.0, 0.0));
    }

    #[test]
    fn block_zero_support_equals_plain_sup() {
        let sched = schedule();
        let model = BasisModel::SchauderBm;
        let n1 = sched.cuts[1];
        let mut xi = CoeffSeq::zeros(n1);
        for n in 1..=n1 {
            xi.as_mut_slice()[n - 1] = (n as f64 * 0.37).sin();
        }
        let path = model.combine(&xi, LEVEL).unwrap();
        assert_relative_eq!(
            sum_block_norm(&xi, &sched, &model, LEVEL).unwrap(),
            path.sup_norm(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn support_past_last_cut_rejected() {
        let sched = schedule();
        let model = BasisModel::SchauderBm;
        let mut xi = CoeffSeq::zeros(sched.last_cut() + 3);
        xi.as_mut_slice()[sched.last_cut() + 2] = 1.0;
        assert!(matches!(
            sum_block_norm(&xi, &sched, &model, LEVEL),
            Err(Error::CoeffsBeyondSchedule { .. })
        ));
    }

    #[test]
    fn rkhs_norm_matches_h1_of_synthesis() {
        for seed in 0..20u64 {
            let xi = random_xi(64, seed);
            let path = haar::synthesize(&xi, LEVEL).unwrap();
            assert_relative_eq!(rkhs_norm(&xi), path.h1_seminorm(), epsilon = 1e-10);
        }
    }

    #[test]
    fn rkhs_pythagoras_across_blocks() {
        let sched = dyadic_schedule(0.4, 6);
        for seed in 0..10u64 {
            let xi = random_xi(64, seed);
            let sq: f64 = (0..sched.num_blocks())
                .map(|k| {
                    let q = block_project(&xi, &sched, k).unwrap();
                    rkhs_norm(&q).powi(2)
                })
                .sum();
            assert_relative_eq!(sq.sqrt(), rkhs_norm(&xi), epsilon = 1e-10);
        }
    }

    #[test]
    fn dyadic_block_value_closed_form() {
        // indices (2^k, 2^{k+1}] have disjoint tent supports with common
        // peak height, so the block sup is the peak times the largest |xi|
        let sched = dyadic_schedule(0.35, 6);
        let model = BasisModel::SchauderBm;
        for seed in 0..10u64 {
            let xi = random_xi(64, seed);
            let sups = block_sup_norms(&xi, &sched, &model, LEVEL).unwrap();
            for k in 1..sched.num_blocks() {
                let lo = sched.cuts[k];
                let hi = sched.cuts[k + 1];
                let peak = haar::schauder_peak(lo + 1);
                let maxc = (lo + 1..=hi).map(|n| xi.get(n).abs()).fold(0.0, f64::max);
                assert_relative_eq!(sups[k], peak * maxc, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn sup_of_path_below_sum_block_norm() {
        let sched = schedule();
        let model = BasisModel::SchauderBm;
        for seed in 0..200u64 {
            let xi = random_xi(sched.last_cut().min(1 << LEVEL), seed);
            let path = model.combine(&xi, LEVEL).unwrap();
            let sum = sum_block_norm(&xi, &sched, &model, LEVEL).unwrap();
            let sup = sup_block_norm(&xi, &sched, &model, LEVEL).unwrap();
            assert!(path.sup_norm() <= sum + 1e-12);
            assert!(sup <= sum + 1e-12);
        }
    }

    #[test]
    fn tail_bound_is_algebra() {
        let sched = schedule();
        let model = BasisModel::SchauderBm;
        for seed in 0..300u64 {
            let xi = random_xi(sched.last_cut().min(1 << LEVEL), seed);
            for k0 in 0..sched.num_blocks() {
                let (tail, bound) =
                    block_tail_bound(&xi, &sched, &model, LEVEL, k0).unwrap();
                assert!(tail <= bound, "seed {seed} k0 {k0}: {tail} > {bound}");
            }
        }
        assert!(block_tail_bound(
            &random_xi(8, 0),
            &sched,
            &model,
            LEVEL,
            sched.num_blocks()
        )
        .is_err());
    }

    #[test]
    fn tail_vanishes_when_support_is_low() {
        let sched = dyadic_schedule(0.4, 6);
        let model = BasisModel::SchauderBm;
        let mut xi = CoeffSeq::zeros(64);
        xi.as_mut_slice()[2] = 1.3; // n = 3, block 1 = (2, 4]
        let (tail, bound) = block_tail_bound(&xi, &sched, &model, LEVEL, 1).unwrap();
        assert_eq!(tail, 0.0);
        assert!(bound >= 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn homogeneity_exact(seed in 0u64..1000, c in -8f64..8.0) {
            let sched = dyadic_schedule(0.4, 5);
            let model = BasisModel::SchauderBm;
            let xi = random_xi(32, seed);
            let scaled = xi.scale(c);
            let base = sum_block_norm(&xi, &sched, &model, LEVEL).unwrap();
            let got = sum_block_norm(&scaled, &sched, &model, LEVEL).unwrap();
            prop_assert!((got - c.abs() * base).abs() <= 1e-10 * (1.0 + base));
            let base_s = sup_block_norm(&xi, &sched, &model, LEVEL).unwrap();
            let got_s = sup_block_norm(&scaled, &sched, &model, LEVEL).unwrap();
            prop_assert!((got_s - c.abs() * base_s).abs() <= 1e-10 * (1.0 + base_s));
        }

        #[test]
        fn triangle_inequality(sa in 0u64..500, sb in 500u64..1000) {
            let sched = dyadic_schedule(0.3, 5);
            let model = BasisModel::SchauderBm;
            let a = random_xi(32, sa);
            let b = random_xi(32, sb);
            let mut ab = a.clone();
            for (x, y) in ab.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += y;
            }
            for f in [sum_block_norm, sup_block_norm] {
                let na = f(&a, &sched, &model, LEVEL).unwrap();
                let nb = f(&b, &sched, &model, LEVEL).unwrap();
                let nab = f(&ab, &sched, &model, LEVEL).unwrap();
                prop_assert!(nab <= na + nb + 1e-10);
            }
        }
    }
}
