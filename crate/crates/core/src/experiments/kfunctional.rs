//! The K-functional K(t, x) = inf over splittings x = a + b of
//! sup|a| + t·|b|_H1, restricted to b on the same dyadic grid as x.
//!
//! For fixed sup budget s, the inner problem — minimize the H1 energy of b
//! subject to |x - b| <= s and b(0) = 0 — is solved exactly by the taut
//! string through the tube [x - s, x + s] (pinned at 0 on the left, free on
//! the right). The outer objective g(s) = s + t·h1(s) is convex, so a
//! ternary search over s finishes the job.

use super::finish;
use crate::error::{Error, Result};
use crate::paths::DyadicPath;
use crate::report::{CheckItem, ExperimentReport, Table};

const MAX_OUTER_ITERS: usize = 500;

/// Fills `out[a..=b]` with the straight line from (a, va) to (b, vb).
fn draw(out: &mut [f64], a: usize, va: f64, b: usize, vb: f64) {
    let d = (b - a) as f64;
    for i in a..=b {
        let w = (i - a) as f64 / d;
        out[i] = va + w * (vb - va);
    }
}

/// The taut string through the tube [lo, hi], pinned at lo[0] = hi[0] on
/// the left, free on the right: the minimizer of the discrete H1 energy
/// among paths confined to the tube.
fn taut_string(lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let n = lo.len() - 1;
    let mut out = vec![0.0; n + 1];
    out[0] = lo[0];
    let mut ai = 0usize;
    let mut av = lo[0];
    while ai < n {
        let mut s_hi_min = f64::INFINITY;
        let mut arg_hi = ai;
        let mut s_lo_max = f64::NEG_INFINITY;
        let mut arg_lo = ai;
        let mut bent = false;
        let mut j = ai + 1;
        while j <= n {
            let d = (j - ai) as f64;
            let s_hi = (hi[j] - av) / d;
            let s_lo = (lo[j] - av) / d;
            if s_lo > s_hi_min {
                // string presses against the upper tube: bend there
                draw(&mut out, ai, av, arg_hi, hi[arg_hi]);
                ai = arg_hi;
                av = hi[arg_hi];
                bent = true;
                break;
            }
            if s_hi < s_lo_max {
                draw(&mut out, ai, av, arg_lo, lo[arg_lo]);
                ai = arg_lo;
                av = lo[arg_lo];
                bent = true;
                break;
            }
            if s_hi < s_hi_min {
                s_hi_min = s_hi;
                arg_hi = j;
            }
            if s_lo > s_lo_max {
                s_lo_max = s_lo;
                arg_lo = j;
            }
            j += 1;
        }
        if bent {
            continue;
        }
        // reached the free right end: go straight at the feasible slope
        // closest to zero, bending at the binding contact if zero is out
        if s_lo_max <= 0.0 && 0.0 <= s_hi_min {
            draw(&mut out, ai, av, n, av);
            break;
        } else if s_lo_max > 0.0 {
            draw(&mut out, ai, av, arg_lo, lo[arg_lo]);
            ai = arg_lo;
            av = lo[arg_lo];
        } else {
            draw(&mut out, ai, av, arg_hi, hi[arg_hi]);
            ai = arg_hi;
            av = hi[arg_hi];
        }
    }
    out
}

/// Minimum H1 seminorm over the tube of half-width s around p, with the
/// minimizing path.
pub fn min_h1_in_tube(p: &DyadicPath, s: f64) -> (f64, DyadicPath) {
    let lo: Vec<f64> = p.samples().iter().map(|&v| v - s).collect();
    let mut hi: Vec<f64> = p.samples().iter().map(|&v| v + s).collect();
    let mut lo = lo;
    lo[0] = 0.0;
    hi[0] = 0.0;
    let b = DyadicPath::new(taut_string(&lo, &hi)).expect("taut string stays on grid");
    (b.h1_seminorm(), b)
}

/// K(t, p) to absolute tolerance `tol`, with the optimal splitting budget s.
pub fn k_functional(p: &DyadicPath, t: f64, tol: f64) -> Result<(f64, f64)> {
    if t <= 0.0 {
        return Err(Error::TOutOfRange(t));
    }
    if tol <= 0.0 {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let g = |s: f64| s + t * min_h1_in_tube(p, s).0;
    let mut lo = 0.0f64;
    let mut hi = p.sup_norm();
    if hi == 0.0 {
        return Ok((0.0, 0.0));
    }
    let mut best = (g(hi), hi);
    let g_lo = g(lo);
    if g_lo < best.0 {
        best = (g_lo, lo);
    }
    let mut iters = 0;
    while hi - lo > tol * 0.5 {
        iters += 1;
        if iters > MAX_OUTER_ITERS {
            return Err(Error::SolverBudget {
                tol,
                budget: MAX_OUTER_ITERS,
            });
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let g1 = g(m1);
        let g2 = g(m2);
        if g1 < best.0 {
            best = (g1, m1);
        }
        if g2 < best.0 {
            best = (g2, m2);
        }
        if g1 <= g2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Ok(best)
}

/// 40 log-spaced points covering both asymptotic regimes of K.
pub fn default_t_grid() -> Vec<f64> {
    let (lo, hi) = (-20.0f64, 20.0f64);
    (0..40)
        .map(|i| 2f64.powf(lo + (hi - lo) * i as f64 / 39.0))
        .collect()
}

/// sup over the grid of t^{-theta} K(t, p).
pub fn theta_norm(p: &DyadicPath, theta: f64, t_grid: &[f64], tol: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&theta) || theta == 0.0 {
        return Err(Error::Config("theta must lie in (0, 1)".into()));
    }
    let mut best = 0.0f64;
    for &t in t_grid {
        let (k, _) = k_functional(p, t, tol)?;
        best = best.max(t.powf(-theta) * k);
    }
    Ok(best)
}

/// K over a t grid with sanity checks: the feasible-point upper bounds,
/// monotonicity, and concavity in t (all up to tol).
pub fn k_functional_report(
    p: &DyadicPath,
    theta: f64,
    t_grid: &[f64],
    tol: f64,
) -> Result<ExperimentReport> {
    let started = std::time::Instant::now();
    let mut report = ExperimentReport::new(
        "kfunctional",
        serde_json::json!({
            "level": p.level(),
            "theta": theta,
            "t_grid_len": t_grid.len(),
            "tol": tol,
        }),
        0,
        1,
    );
    let sup = p.sup_norm();
    let h1 = p.h1_seminorm();
    let mut table = Table::new("kfunctional", &["t", "k", "upper_bound", "t_theta_k"]);
    let mut ks = Vec::with_capacity(t_grid.len());
    let mut bounds_ok = true;
    for &t in t_grid {
        let (k, _) = k_functional(p, t, tol)?;
        let ub = sup.min(t * h1);
        bounds_ok &= k <= ub + tol;
        table.push(vec![t, k, ub, t.powf(-theta) * k]);
        ks.push(k);
    }
    report.tables.push(table);
    report.push(CheckItem::exact(
        "K <= min(sup, t h1) on grid",
        if bounds_ok { 1.0 } else { 0.0 },
        1.0,
        bounds_ok,
    ));
    let monotone = ks.windows(2).all(|w| w[1] >= w[0] - tol);
    report.push(CheckItem::exact(
        "K nondecreasing in t",
        if monotone { 1.0 } else { 0.0 },
        1.0,
        monotone,
    ));
    let mut concave = true;
    for i in 1..ks.len().saturating_sub(1) {
        let (t0, t1, t2) = (t_grid[i - 1], t_grid[i], t_grid[i + 1]);
        let w = (t1 - t0) / (t2 - t0);
        let chord = ks[i - 1] + w * (ks[i + 1] - ks[i - 1]);
        if ks[i] < chord - tol * (1.0 + chord.abs()) {
            concave = false;
        }
    }
    report.push(CheckItem::exact(
        "K concave in t",
        if concave { 1.0 } else { 0.0 },
        1.0,
        concave,
    ));
    report.push(CheckItem::info(
        "theta norm on grid",
        theta_norm(p, theta, t_grid, tol)?,
    ));
    Ok(finish(report, started))
}
