//! Exponential tightness: under the scaling X_eps = eps·X, the mass outside
//! a norm ball of radius r satisfies eps^2 log P(||X_eps|| > r) <= -rho r^2
//! for any rho with a finite Fernique moment. Equivalently
//! P(||X|| > r/eps) decays like exp(-rho r^2 / eps^2), so the slope of
//! log p against eps^{-2} is at most -rho r^2.
//!
//! Naive Monte Carlo cannot see the deep tail, so the eps grid is clipped
//! to points with at least 30 observed exceedances and the slope is fitted
//! on the survivors.

use super::{default_trunc, finish, freq_se, norm_sample, McParams, NormSpec};
use crate::blocks::BlockSchedule;
use crate::error::{Error, Result};
use crate::models::BasisModel;
use crate::report::{CheckItem, ExperimentReport, Table};
use crate::rng::{replicate_map, NoiseSource};

pub const MIN_HITS: u64 = 30;

/// Least-squares slope of y against x with intercept.
fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone)]
pub struct TightnessOutcome {
    pub slope: f64,
    pub used_eps: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn tightness_experiment(
    model: &BasisModel,
    schedule: Option<&BlockSchedule>,
    spec: NormSpec,
    radius: f64,
    eps_grid: &[f64],
    params: &McParams,
    rho_hat: Option<f64>,
    noise: &dyn NoiseSource,
) -> Result<(ExperimentReport, TightnessOutcome)> {
    if radius <= 0.0 {
        return Err(Error::Config("radius must be positive".into()));
    }
    if eps_grid.iter().any(|&e| e <= 0.0) {
        return Err(Error::Config("eps grid must be positive".into()));
    }
    let started = std::time::Instant::now();
    let trunc = default_trunc(model, params.level);
    let values = replicate_map(params.replicates, params.workers, |rep| {
        norm_sample(model, schedule, spec, trunc, params.level, noise, rep)
    });
    let r = params.replicates;
    let mut eps_sorted: Vec<f64> = eps_grid.to_vec();
    eps_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap()); // decreasing eps

    let mut report = ExperimentReport::new(
        "tightness",
        serde_json::json!({
            "model": model.kind(),
            "norm": spec,
            "level": params.level,
            "radius": radius,
            "eps_grid": eps_sorted,
            "rho_hat": rho_hat,
        }),
        params.seed,
        r,
    );
    let mut table = Table::new(
        "tightness",
        &["eps", "p_hat", "std_error", "eps2_log_p", "used"],
    );
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut used_eps = Vec::new();
    let mut prev_p = f64::INFINITY;
    let mut monotone = true;
    for &eps in &eps_sorted {
        let hits = values.iter().filter(|&&v| v > radius / eps).count() as u64;
        let (p, se) = freq_se(hits, r);
        if p > prev_p {
            monotone = false;
        }
        prev_p = p;
        let used = hits >= MIN_HITS;
        let e2lp = if p > 0.0 { eps * eps * p.ln() } else { f64::NAN };
        table.push(vec![eps, p, se, e2lp, used as u8 as f64]);
        if used {
            xs.push(1.0 / (eps * eps));
            ys.push(p.ln());
            used_eps.push(eps);
        }
    }
    report.tables.push(table);
    report.push(CheckItem::exact(
        "p_hat nonincreasing in shrinking eps",
        if monotone { 1.0 } else { 0.0 },
        1.0,
        monotone,
    ));
    if xs.len() < 2 {
        return Err(Error::AllBelowResolution);
    }
    let slope = ls_slope(&xs, &ys);
    report.push(CheckItem::info("fitted slope of log p vs eps^-2", slope));
    if let Some(rho) = rho_hat {
        let bound = -rho * radius * radius;
        // asymptotic claim: allow 10% slack at finite eps
        report.push(CheckItem::exact(
            "slope <= -rho_hat r^2 (10% slack)",
            slope,
            bound,
            slope <= bound + 0.1 * bound.abs(),
        ));
    }
    Ok((
        finish(report, started),
        TightnessOutcome { slope, used_eps },
    ))
}
