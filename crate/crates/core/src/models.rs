//! Gaussian measures presented as series X = sum_n g_n e_n over an
//! orthonormal basis (e_n) of the RKHS, with reproducible counter-based
//! sampling and Monte Carlo tail-variance estimation.
//!
//! Shipped bases: the Schauder system (Lévy construction of Brownian
//! motion), the Karhunen-Loève sine basis for Brownian motion, the
//! Karhunen-Loève basis of the Brownian bridge, and custom bases loaded
//! from a JSON file.
//!
//! A model is always evaluated at a grid level L, so the carrier space is
//! the finite-dimensional space of level-L dyadic paths. For the Schauder
//! basis this truncation is exact: every phi_n with n > 2^L vanishes at all
//! level-L grid points, so on the grid the expansion has exactly 2^L terms
//! and the tail beyond 2^L is identically zero.

use crate::error::{Error, Result};
use crate::haar::{self, CoeffSeq};
use crate::paths::{grid_len, DyadicPath};
use crate::rng::{replicate_map, CounterNoise, NoiseSource};
use serde::{Deserialize, Serialize};

/// 99% one-sided normal quantile, used for upper confidence bounds.
const Z99: f64 = 2.326_347_874_040_841;

/// A basis loaded from JSON: `{"version": 1, "level": L, "basis": [[...],...]}`.
#[derive(Debug, Clone)]
pub struct CustomBasis {
    level: u32,
    paths: Vec<DyadicPath>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomBasisFile {
    version: u32,
    level: u32,
    basis: Vec<Vec<f64>>,
}

impl CustomBasis {
    pub fn new(level: u32, paths: Vec<DyadicPath>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::BadModel("custom basis must be nonempty".into()));
        }
        for p in &paths {
            if p.level() != level {
                return Err(Error::BadModel(format!(
                    "basis path at level {} but model level is {level}",
                    p.level()
                )));
            }
        }
        Ok(Self { level, paths })
    }

    /// The one-dimensional model: a single basis path t -> t, so the
    /// coefficient xi_1 is a standard normal and sup norm = |xi_1|.
    pub fn identity(level: u32) -> Self {
        let n = grid_len(level);
        let samples = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        Self {
            level,
            paths: vec![DyadicPath::new(samples).expect("identity path")],
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: CustomBasisFile = serde_json::from_str(s)?;
        if f.version != 1 {
            return Err(Error::BadModel(format!(
                "unsupported custom basis version {}",
                f.version
            )));
        }
        let paths = f
            .basis
            .into_iter()
            .map(DyadicPath::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(f.level, paths)
    }

    pub fn to_json(&self) -> String {
        let f = CustomBasisFile {
            version: 1,
            level: self.level,
            basis: self.paths.iter().map(|p| p.samples().to_vec()).collect(),
        };
        serde_json::to_string(&f).expect("serializing custom basis")
    }

    pub fn dim(&self) -> usize {
        self.paths.len()
    }
}

/// A Gaussian measure given by a series expansion over an RKHS basis.
#[derive(Debug, Clone)]
pub enum BasisModel {
    /// Brownian motion over the Schauder system phi_n (Lévy construction).
    SchauderBm,
    /// Brownian motion over its Karhunen-Loève basis
    /// e_n(t) = sqrt(2)·sin((n-1/2)·pi·t)/((n-1/2)·pi).
    KlSineBm,
    /// Brownian bridge basis e_n(t) = sqrt(2)·sin(n·pi·t)/(n·pi).
    KlBridge,
    /// Basis paths supplied by a file or built in code.
    Custom(CustomBasis),
}

impl BasisModel {
    pub fn parse_kind(kind: &str, custom: Option<CustomBasis>) -> Result<Self> {
        match kind {
            "schauder-bm" => Ok(Self::SchauderBm),
            "kl-sine-bm" => Ok(Self::KlSineBm),
            "kl-bridge" => Ok(Self::KlBridge),
            "one-d" => Ok(Self::Custom(CustomBasis::identity(4))),
            "custom" => custom
                .map(Self::Custom)
                .ok_or_else(|| Error::BadModel("custom model requires a basis file".into())),
            other => Err(Error::BadModel(other.into())),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::SchauderBm => "schauder-bm",
            Self::KlSineBm => "kl-sine-bm",
            Self::KlBridge => "kl-bridge",
            Self::Custom(_) => "custom",
        }
    }

    /// Number of basis elements that are nonzero at grid level `level`,
    /// or None when the series is genuinely infinite at every level.
    pub fn effective_dim(&self, level: u32) -> Option<usize> {
        match self {
            Self::SchauderBm => Some(1usize << level),
            Self::KlSineBm | Self::KlBridge => None,
            Self::Custom(c) => Some(c.dim()),
        }
    }

    /// e_n sampled at grid level `level`.
    ///
    /// For the Schauder basis with n > 2^L this is the zero path: phi_n then
    /// vanishes at every level-L grid node, so the zero path is its exact
    /// level-L sampling. Custom bases likewise return zero beyond their
    /// stored dimension.
    pub fn basis_path(&self, n: usize, level: u32) -> Result<DyadicPath> {
        if n < 1 {
            return Err(Error::BadBasisIndex);
        }
        match self {
            Self::SchauderBm => {
                if n > (1usize << level) {
                    return Ok(DyadicPath::zero(level));
                }
                let mut xi = CoeffSeq::zeros(n);
                xi.as_mut_slice()[n - 1] = 1.0;
                haar::synthesize(&xi, level)
            }
            Self::KlSineBm => {
                let freq = (n as f64 - 0.5) * std::f64::consts::PI;
                Ok(sampled(level, |t| 2f64.sqrt() * (freq * t).sin() / freq))
            }
            Self::KlBridge => {
                let freq = n as f64 * std::f64::consts::PI;
                Ok(sampled(level, |t| 2f64.sqrt() * (freq * t).sin() / freq))
            }
            Self::Custom(c) => {
                if n > c.paths.len() {
                    return Ok(DyadicPath::zero(level));
                }
                downsample(&c.paths[n - 1], level)
            }
        }
    }

    /// Partial sum X_N = sum_{j<=N} g_j e_j on the level-L grid together
    /// with the coefficient draw. Deterministic in (seed, rep).
    pub fn sample_partial_sum(
        &self,
        n_trunc: usize,
        level: u32,
        seed: u64,
    ) -> Result<(DyadicPath, CoeffSeq)> {
        self.sample_with(&CounterNoise::new(seed), 0, n_trunc, level)
    }

    /// As [`sample_partial_sum`](Self::sample_partial_sum) with an explicit
    /// noise source and replicate stream.
    pub fn sample_with(
        &self,
        noise: &dyn NoiseSource,
        rep: u64,
        n_trunc: usize,
        level: u32,
    ) -> Result<(DyadicPath, CoeffSeq)> {
        if n_trunc < 1 {
            return Err(Error::BadBasisIndex);
        }
        let coeffs: Vec<f64> = (1..=n_trunc).map(|j| noise.gauss(rep, j as u64)).collect();
        let xi = CoeffSeq::new(coeffs);
        let path = self.combine(&xi, level)?;
        Ok((path, xi))
    }

    /// sum_j xi_j e_j at grid level `level`.
    pub fn combine(&self, xi: &CoeffSeq, level: u32) -> Result<DyadicPath> {
        match self {
            Self::SchauderBm => {
                // indices beyond 2^L sample to zero; drop them
                let keep = xi.len().min(1usize << level);
                let xi = CoeffSeq::new(xi.as_slice()[..keep].to_vec());
                haar::synthesize(&xi, level)
            }
            _ => {
                let mut acc = DyadicPath::zero(level);
                for (j, &c) in xi.as_slice().iter().enumerate() {
                    if c != 0.0 {
                        acc.add_scaled(&self.basis_path(j + 1, level)?, c);
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Adds c·e_n into `acc` in place. For the Schauder basis this writes
    /// the tent directly over its support instead of materializing a path.
    pub fn add_basis_scaled(&self, acc: &mut DyadicPath, n: usize, c: f64) -> Result<()> {
        if n < 1 {
            return Err(Error::BadBasisIndex);
        }
        if c == 0.0 {
            return Ok(());
        }
        let level = acc.level();
        match self {
            Self::SchauderBm => {
                if n > (1usize << level) {
                    return Ok(());
                }
                let samples = acc.samples_mut();
                if n == 1 {
                    let g = (1u64 << level) as f64;
                    for (i, v) in samples.iter_mut().enumerate() {
                        *v += c * i as f64 / g;
                    }
                } else {
                    let (k, j) = haar::split_index(n);
                    let step = 1usize << (level - k);
                    let lo = (j - 1) * step;
                    let unit = ((1u64 << k) as f64).sqrt() / (1u64 << level) as f64;
                    for o in 1..step {
                        samples[lo + o] += c * unit * o.min(step - o) as f64;
                    }
                }
                Ok(())
            }
            _ => {
                acc.add_scaled(&self.basis_path(n, level)?, c);
                Ok(())
            }
        }
    }

    /// Upper bound on the pointwise variance sum_{j>j_max} e_j(t)^2 of the
    /// neglected remainder at level-L grid points. Zero for finite models
    /// once j_max covers the effective dimension.
    pub fn remainder_pointwise_var(&self, j_max: usize, level: u32) -> f64 {
        match self {
            Self::SchauderBm => {
                if j_max >= (1usize << level) {
                    0.0
                } else {
                    // levels from the one containing index j_max+1 onward;
                    // pointwise variance of a full Haar level k is <= 2^{-2-k}
                    let k0 = haar::depth(j_max + 1).saturating_sub(1);
                    2f64.powi(-1 - k0 as i32)
                }
            }
            Self::KlSineBm => 2.0 / (std::f64::consts::PI.powi(2) * (j_max as f64 - 0.5).max(0.5)),
            Self::KlBridge => 2.0 / (std::f64::consts::PI.powi(2) * (j_max as f64).max(1.0)),
            Self::Custom(c) => {
                if j_max >= c.paths.len() {
                    return 0.0;
                }
                let mut acc = vec![0.0f64; grid_len(c.level)];
                for p in &c.paths[j_max..] {
                    for (a, v) in acc.iter_mut().zip(p.samples()) {
                        *a += v * v;
                    }
                }
                acc.into_iter().fold(0.0, f64::max)
            }
        }
    }

    /// Upper bound on E sup_grid |remainder|^2 beyond j_max, from the
    /// pointwise-variance bound and a Chernoff union bound over the m grid
    /// points: E max Y_i^2 <= sigma^2·(4 ln m + 2 ln 2).
    pub fn remainder_sup_sq_bound(&self, j_max: usize, level: u32) -> f64 {
        let sigma_sq = self.remainder_pointwise_var(j_max, level);
        if sigma_sq == 0.0 {
            return 0.0;
        }
        let m = grid_len(level) as f64;
        sigma_sq * (4.0 * m.ln() + 2.0 * 2f64.ln())
    }
}

fn sampled(level: u32, f: impl Fn(f64) -> f64) -> DyadicPath {
    let n = grid_len(level);
    let mut samples: Vec<f64> = (0..n).map(|i| f(i as f64 / (n - 1) as f64)).collect();
    samples[0] = 0.0;
    DyadicPath::new(samples).expect("sampled path")
}

fn downsample(p: &DyadicPath, level: u32) -> Result<DyadicPath> {
    if level > p.level() {
        return Err(Error::BadModel(format!(
            "custom basis stored at level {} cannot be evaluated at finer level {level}",
            p.level()
        )));
    }
    let stride = 1usize << (p.level() - level);
    DyadicPath::new(p.samples().iter().step_by(stride).copied().collect())
}

/// Parameters for Monte Carlo tail-variance estimation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailParams {
    pub replicates: u64,
    pub j_max: usize,
    pub level: u32,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

/// A tail-variance estimate with its certification bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailEstimate {
    /// Monte Carlo mean of sup|tail|^2 over the window (n, j_max].
    pub estimate: f64,
    /// Monte Carlo standard error.
    pub std_error: f64,
    /// 99% upper confidence bound with the analytic remainder beyond j_max
    /// folded in: (sqrt(mean + z·SE) + sqrt(remainder bound))^2.
    pub upper_conf: f64,
}

fn certify(mean: f64, se: f64, rem: f64) -> f64 {
    let ucb = (mean + Z99 * se).max(0.0);
    if rem == 0.0 {
        ucb
    } else {
        (ucb.sqrt() + rem.sqrt()).powi(2)
    }
}

/// Monte Carlo estimate of E‖sum_{n < j <= j_max} g_j e_j‖² (sup norm) with
/// a certified 99% upper confidence bound.
pub fn tail_variance(model: &BasisModel, n_cut: usize, params: &TailParams) -> Result<TailEstimate> {
    if params.j_max <= n_cut {
        return Err(Error::EmptyTailWindow {
            n: n_cut,
            j_max: params.j_max,
        });
    }
    let noise = CounterNoise::new(params.seed);
    // indices past the effective dimension contribute nothing
    let dim = model.effective_dim(params.level).unwrap_or(usize::MAX);
    let hi = params.j_max.min(dim);
    let rem = model.remainder_sup_sq_bound(params.j_max, params.level);
    if n_cut >= hi {
        return Ok(TailEstimate {
            estimate: 0.0,
            std_error: 0.0,
            upper_conf: certify(0.0, 0.0, rem),
        });
    }
    let sups = replicate_map(params.replicates, params.workers, |rep| {
        let mut acc = DyadicPath::zero(params.level);
        for j in (n_cut + 1)..=hi {
            let g = noise.gauss(rep, j as u64);
            model
                .add_basis_scaled(&mut acc, j, g)
                .expect("basis accumulate");
        }
        acc.sup_norm().powi(2)
    });
    let (mean, se) = mean_se(&sups);
    Ok(TailEstimate {
        estimate: mean,
        std_error: se,
        upper_conf: certify(mean, se, rem),
    })
}

/// Tail-variance estimates for every cut n = 0..j_max in one backward pass
/// per replicate (tail paths are accumulated from the deepest index down).
/// Entry `n` is the estimate for the window (n, j_max].
pub fn tail_curve(model: &BasisModel, params: &TailParams) -> Result<Vec<TailEstimate>> {
    let noise = CounterNoise::new(params.seed);
    let j_max = params.j_max;
    let dim = model.effective_dim(params.level).unwrap_or(usize::MAX);
    let hi = j_max.min(dim);
    // per-replicate vectors of sup^2 by cut, reduced in replicate order
    let per_rep = replicate_map(params.replicates, params.workers, |rep| {
        let mut acc = DyadicPath::zero(params.level);
        let mut sup_sq = vec![0.0f64; j_max];
        let mut current = 0.0;
        for n in (0..j_max).rev() {
            let j = n + 1;
            if j <= hi {
                let g = noise.gauss(rep, j as u64);
                model
                    .add_basis_scaled(&mut acc, j, g)
                    .expect("basis accumulate");
                current = acc.sup_norm().powi(2);
            }
            sup_sq[n] = current;
        }
        sup_sq
    });
    let r = params.replicates as f64;
    let mut out = Vec::with_capacity(j_max);
    for n in 0..j_max {
        let mut sum = 0.0;
        let mut sq = 0.0;
        for rep in &per_rep {
            sum += rep[n];
            sq += rep[n] * rep[n];
        }
        let mean = sum / r;
        let var = (sq / r - mean * mean).max(0.0);
        let se = if params.replicates > 1 {
            (var / (r - 1.0)).sqrt()
        } else {
            0.0
        };
        let rem = model.remainder_sup_sq_bound(j_max, params.level);
        out.push(TailEstimate {
            estimate: mean,
            std_error: se,
            upper_conf: certify(mean, se, rem),
        });
    }
    Ok(out)
}

pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
