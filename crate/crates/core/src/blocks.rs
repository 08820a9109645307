//! Block schedules: increasing cut indices n_0 = 0 < n_1 < ... < n_K chosen
//! so the tail variance past each cut is geometrically small, and the block
//! projectors Q_k onto the coefficient ranges (n_k, n_{k+1}].
//!
//! Cuts are greedy minimal: n_k is the least index past n_{k-1} whose
//! certified tail bound (99% upper confidence, analytic remainder folded in)
//! meets the threshold for block k. Certification uses the upper confidence
//! bound rather than the point estimate, since the downstream inequalities
//! rely on the tail bound actually holding.

use crate::error::{Error, Result};
use crate::haar::CoeffSeq;
use crate::models::{tail_curve, BasisModel, TailParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Thresholds 2^{-k(3+2a)}, paired with the summed block norm.
    Sum,
    /// Thresholds 2^{-2k(a+eta)}, paired with the sup block norm.
    Sup,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Self::Sum),
            "sup" => Ok(Self::Sup),
            other => Err(Error::Config(format!("unknown variant {other:?}"))),
        }
    }
}

/// Stored evidence that a cut met its threshold.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub cut: usize,
    pub threshold: f64,
    pub estimate: f64,
    pub upper_conf: f64,
    /// Certified bound at cut - 1 (regularized), recorded so greedy
    /// minimality stays checkable after the fact. None when the previous
    /// index is the preceding cut.
    pub upper_conf_before: Option<f64>,
}

/// A block schedule together with its certification data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSchedule {
    pub alpha: f64,
    pub variant: Variant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// n_0 = 0 < n_1 < ... < n_K.
    pub cuts: Vec<usize>,
    pub certificates: Vec<Certificate>,
    pub seed: u64,
}

impl BlockSchedule {
    /// Number of blocks K (blocks are indexed k = 0..K-1).
    pub fn num_blocks(&self) -> usize {
        self.cuts.len() - 1
    }

    /// Coefficient range (n_k, n_{k+1}] of block k, as a half-open
    /// 1-based range [n_k + 1, n_{k+1} + 1).
    pub fn block_range(&self, k: usize) -> Result<std::ops::Range<usize>> {
        if k + 1 >= self.cuts.len() {
            return Err(Error::BlockOutOfRange {
                k,
                blocks: self.num_blocks(),
            });
        }
        Ok((self.cuts[k] + 1)..(self.cuts[k + 1] + 1))
    }

    /// Threshold for the tail variance at cut n_k.
    pub fn threshold(&self, k: usize) -> f64 {
        threshold(self.variant, self.alpha, self.eta, k)
    }

    /// Last covered coefficient index n_K.
    pub fn last_cut(&self) -> usize {
        *self.cuts.last().expect("nonempty cuts")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializing schedule")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn threshold(variant: Variant, alpha: f64, eta: Option<f64>, k: usize) -> f64 {
    match variant {
        Variant::Sum => 2f64.powf(-(k as f64) * (3.0 + 2.0 * alpha)),
        Variant::Sup => {
            let eta = eta.expect("sup variant requires eta");
            2f64.powf(-2.0 * k as f64 * (alpha + eta))
        }
    }
}

/// Builds the greedy minimal schedule for `blocks` blocks (cuts n_1..n_K).
///
/// The certified tail curve is regularized by a running minimum before the
/// search: true tail variances are monotone in the cut, Monte Carlo
/// estimates are not.
pub fn build_schedule(
    model: &BasisModel,
    alpha: f64,
    variant: Variant,
    eta: Option<f64>,
    blocks: usize,
    tail: &TailParams,
) -> Result<BlockSchedule> {
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if variant == Variant::Sup {
        match eta {
            Some(e) if e > 0.0 => {}
            Some(e) => return Err(Error::EtaOutOfRange(e)),
            None => return Err(Error::Config("sup variant requires eta".into())),
        }
    }
    if blocks < 1 {
        return Err(Error::Config("block count must be >= 1".into()));
    }
    let curve = tail_curve(model, tail)?;
    // regularized certified bound: running minimum over n
    let mut certified: Vec<f64> = Vec::with_capacity(curve.len());
    let mut run = f64::INFINITY;
    for est in &curve {
        run = run.min(est.upper_conf);
        certified.push(run);
    }
    let mut cuts = vec![0usize];
    let mut certificates = Vec::with_capacity(blocks);
    for k in 1..=blocks {
        let thr = threshold(variant, alpha, eta, k);
        let start = cuts[k - 1] + 1;
        // certified[n] bounds the tail past cut n; certified beyond the
        // curve is only available when the estimate at j_max itself is 0
        let mut found = None;
        for n in start..=tail.j_max {
            let ok = if n < certified.len() {
                certified[n] <= thr
            } else {
                // n == j_max: the window is empty; certified only if the
                // analytic remainder past j_max already meets the threshold
                model.remainder_sup_sq_bound(tail.j_max, tail.level) <= thr
            };
            if ok {
                found = Some(n);
                break;
            }
        }
        let n_k = found.ok_or(Error::ScheduleExhausted {
            k,
            threshold: thr,
            j_max: tail.j_max,
        })?;
        let (est, ucb) = if n_k < curve.len() {
            (curve[n_k].estimate, certified[n_k])
        } else {
            (0.0, model.remainder_sup_sq_bound(tail.j_max, tail.level))
        };
        let before = if n_k > start {
            Some(certified[n_k - 1])
        } else {
            None
        };
        certificates.push(Certificate {
            k,
            cut: n_k,
            threshold: thr,
            estimate: est,
            upper_conf: ucb,
            upper_conf_before: before,
        });
        cuts.push(n_k);
    }
    Ok(BlockSchedule {
        alpha,
        variant,
        eta,
        cuts,
        certificates,
        seed: tail.seed,
    })
}

/// The classical dyadic schedule: cuts n_k = 2^k for k >= 1, so block 0 is
/// the preliminary pair {1, 2} and block k >= 1 holds the level-k tents
/// (2^k, 2^{k+1}]. No certification — the cuts are fixed, not searched.
pub fn dyadic_schedule(alpha: f64, blocks: usize) -> Result<BlockSchedule> {
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if blocks < 1 {
        return Err(Error::Config("block count must be >= 1".into()));
    }
    let mut cuts = vec![0usize];
    cuts.extend((1..=blocks).map(|k| 1usize << k));
    Ok(BlockSchedule {
        alpha,
        variant: Variant::Sum,
        eta: None,
        cuts,
        certificates: Vec::new(),
        seed: 0,
    })
}

/// Restriction of xi to block k: coefficients in (n_k, n_{k+1}], zeros
/// elsewhere. The output has the same length as the input.
pub fn block_project(xi: &CoeffSeq, schedule: &BlockSchedule, k: usize) -> Result<CoeffSeq> {
    let range = schedule.block_range(k)?;
    let mut out = CoeffSeq::zeros(xi.len());
    for n in range {
        if n > xi.len() {
            break;
        }
        out.as_mut_slice()[n - 1] = xi.get(n);
    }
    Ok(out)
}
