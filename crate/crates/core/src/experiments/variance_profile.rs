//! Variance profile of the dyadic blocks of the Schauder expansion. The
//! level-k tents have disjoint supports and common peak 2^{-1-k/2}, so
//! E sup|W_k|^2 factors as 2^{-2-k}·E max of 2^k iid squared normals. The
//! factorization is checked against an independent max-chi-square Monte
//! Carlo, and the profile is compared with the envelope 2^{-k lambda}.

use super::{finish, McParams};
use crate::error::{Error, Result};
use crate::models::BasisModel;
use crate::paths::DyadicPath;
use crate::report::{CheckItem, ExperimentReport, Table};
use crate::rng::{replicate_map, NoiseSource};

/// Counter offset separating the max-chi-square draws from the path draws.
const INDEP_BASE: u64 = 1 << 40;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn block_variance_profile(
    k_lo: usize,
    k_hi: usize,
    lambda: f64,
    params: &McParams,
    noise: &dyn NoiseSource,
) -> Result<ExperimentReport> {
    if k_lo < 1 || k_lo > k_hi {
        return Err(Error::Config("need 1 <= k_lo <= k_hi".into()));
    }
    if !(0.0..1.0).contains(&lambda) || lambda <= 0.0 {
        return Err(Error::Config("lambda must lie in (0, 1)".into()));
    }
    if params.level < (k_hi + 1) as u32 {
        return Err(Error::LevelTooShallow {
            index: 1 << (k_hi + 1),
            level: params.level,
            need: (k_hi + 1) as u32,
        });
    }
    let started = std::time::Instant::now();
    let model = BasisModel::SchauderBm;
    let mut report = ExperimentReport::new(
        "block-variance",
        serde_json::json!({
            "model": model.kind(),
            "k_lo": k_lo,
            "k_hi": k_hi,
            "lambda": lambda,
            "level": params.level,
        }),
        params.seed,
        params.replicates,
    );

    // preliminary block {1, 2}: overlapping supports, outside the dyadic
    // pattern — reported, not checked against the envelope
    let pre: Vec<f64> = replicate_map(params.replicates, params.workers, |rep| {
        let mut acc = DyadicPath::zero(params.level);
        for j in 1..=2u64 {
            model
                .add_basis_scaled(&mut acc, j as usize, noise.gauss(rep, j))
                .expect("basis accumulate");
        }
        let s = acc.sup_norm();
        s * s
    });
    let (pre_mean, _) = mean_se(&pre);
    report.push(CheckItem::info("E sup|W_0|^2 (preliminary block)", pre_mean));

    let mut table = Table::new(
        "block_variance",
        &[
            "k",
            "e_sup_w2",
            "std_error",
            "factored",
            "max_chi2",
            "max_chi2_se",
            "envelope",
        ],
    );
    for k in k_lo..=k_hi {
        let lo = 1u64 << k;
        let peak_sq = 2f64.powi(-2 - k as i32);
        let pairs = replicate_map(params.replicates, params.workers, |rep| {
            let mut acc = DyadicPath::zero(params.level);
            for j in lo + 1..=2 * lo {
                model
                    .add_basis_scaled(&mut acc, j as usize, noise.gauss(rep, j))
                    .expect("basis accumulate");
            }
            let s = acc.sup_norm();
            let m = (0..lo)
                .map(|i| {
                    let g = noise.gauss(rep, INDEP_BASE + lo + i);
                    g * g
                })
                .fold(0.0f64, f64::max);
            (s * s, m)
        });
        let w2: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let chi: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (m_w2, se_w2) = mean_se(&w2);
        let (m_chi, se_chi) = mean_se(&chi);
        let factored = m_w2 / peak_sq;
        let se_f = se_w2 / peak_sq;
        let comb = (se_f * se_f + se_chi * se_chi).sqrt();
        report.push(CheckItem::mc(
            format!("factorization k = {k}: E sup^2 / 2^-(2+k) vs E max chi^2"),
            factored,
            comb,
            m_chi,
            (factored - m_chi).abs() <= 3.0 * comb,
        ));
        let env = 2f64.powf(-lambda * k as f64);
        report.push(CheckItem::mc(
            format!("envelope k = {k}: E sup|W_k|^2 <= 2^(-{lambda} k)"),
            m_w2,
            se_w2,
            env,
            m_w2 <= env + 3.0 * se_w2,
        ));
        table.push(vec![k as f64, m_w2, se_w2, factored, m_chi, se_chi, env]);
    }
    report.tables.push(table);
    Ok(finish(report, started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterNoise;

    #[test]
    fn factorization_holds_at_small_k() {
        let params = McParams {
            replicates: 20_000,
            level: 6,
            seed: 31,
            workers: 1,
        };
        let noise = CounterNoise::new(params.seed);
        let r = block_variance_profile(1, 4, 0.9, &params, &noise).unwrap();
        for item in r.items.iter().filter(|i| i.label.starts_with("factor")) {
            assert!(item.passed, "\n{}", r.summary());
        }
    }

    #[test]
    fn envelope_holds_for_small_k_at_09() {
        // E max chi^2 over 2^k draws grows like 2 ln 2 · k, so
        // 2^{-2-k}·E max <= 2^{-0.9k} holds comfortably for k <= 4
        let params = McParams {
            replicates: 30_000,
            level: 6,
            seed: 8,
            workers: 1,
        };
        let noise = CounterNoise::new(params.seed);
        let r = block_variance_profile(1, 4, 0.9, &params, &noise).unwrap();
        for item in r.items.iter().filter(|i| i.label.starts_with("envelope")) {
            assert!(item.passed, "\n{}", r.summary());
        }
    }

    #[test]
    fn preliminary_block_reported_separately() {
        let params = McParams {
            replicates: 5_000,
            level: 5,
            seed: 1,
            workers: 1,
        };
        let noise = CounterNoise::new(params.seed);
        let r = block_variance_profile(1, 2, 0.9, &params, &noise).unwrap();
        let pre = r
            .items
            .iter()
            .find(|i| i.label.contains("preliminary"))
            .unwrap();
        // sup of xi_1 t + xi_2 phi_2(t): between E xi_1^2 sup-squared alone
        // and the crude triangle bound
        assert!(pre.estimate > 0.5 && pre.estimate < 3.0, "{}", pre.estimate);
        assert!(pre.bound.is_none());
    }

    #[test]
    fn shallow_level_rejected() {
        let params = McParams {
            replicates: 10,
            level: 4,
            seed: 0,
            workers: 1,
        };
        let noise = CounterNoise::new(0);
        assert!(matches!(
            block_variance_profile(1, 6, 0.9, &params, &noise),
            Err(Error::LevelTooShallow { .. })
        ));
    }
}
