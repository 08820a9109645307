//! Piecewise-linear paths on a dyadic grid and the classical path norms:
//! sup norm, modulus of continuity, Hölder quotient and the H¹₀ seminorm.
//!
//! A path at level L carries its values at t = i·2^{-L}, i = 0..2^L, and is
//! understood as the piecewise-linear interpolant between them. Sup-type
//! norms are then exact, since extrema of a piecewise-linear function occur
//! at the breakpoints, and the modulus of continuity is exact whenever delta
//! is a grid multiple.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

/// A continuous path on [0,1] starting at 0, sampled on the level-L dyadic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPath {
    level: u32,
    samples: Vec<f64>,
}

/// Number of grid points at level `level`, i.e. 2^level + 1.
pub fn grid_len(level: u32) -> usize {
    (1usize << level) + 1
}

impl DyadicPath {
    /// Builds a path from samples at t = i·2^{-L}. The length must be
    /// 2^L + 1 for some L >= 0 and the first sample must be 0.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let n = samples.len();
        if n < 2 || !(n - 1).is_power_of_two() {
            return Err(Error::BadSampleCount(n));
        }
        if samples[0] != 0.0 {
            return Err(Error::NonzeroStart(samples[0]));
        }
        let level = (n - 1).trailing_zeros();
        Ok(Self { level, samples })
    }

    pub fn zero(level: u32) -> Self {
        Self {
            level,
            samples: vec![0.0; grid_len(level)],
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    /// Value at arbitrary t in [0,1] by linear interpolation.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TOutOfRange(t));
        }
        let x = t * (1u64 << self.level) as f64;
        let i = (x.floor() as usize).min(self.samples.len() - 2);
        let frac = x - i as f64;
        Ok(self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac)
    }

    /// max_t |x(t)|, exact for the piecewise-linear interpolant.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max_t x(t) without the absolute value (running-max functional).
    pub fn running_max(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// omega(delta) = max |x(t) - x(s)| over |t - s| <= delta, for delta a
    /// positive grid multiple m·2^{-L}.
    pub fn modulus_of_continuity(&self, delta: f64) -> Result<f64> {
        let steps = delta * (1u64 << self.level) as f64;
        let m = steps.round();
        if !(1.0..=(1u64 << self.level) as f64).contains(&m) || (steps - m).abs() > 1e-9 {
            return Err(Error::BadDelta(delta));
        }
        Ok(self.modulus_steps(m as usize))
    }

    /// omega(m·2^{-L}) via sliding-window max/min with monotone deques.
    fn modulus_steps(&self, m: usize) -> f64 {
        let n = self.samples.len();
        let w = m + 1; // window of indices [i, i+m]
        let mut maxq: std::collections::VecDeque<usize> = Default::default();
        let mut minq: std::collections::VecDeque<usize> = Default::default();
        let mut best = 0.0f64;
        for i in 0..n {
            let v = self.samples[i];
            while maxq.back().is_some_and(|&j| self.samples[j] <= v) {
                maxq.pop_back();
            }
            maxq.push_back(i);
            while minq.back().is_some_and(|&j| self.samples[j] >= v) {
                minq.pop_back();
            }
            minq.push_back(i);
            if i + 1 >= w {
                let lo = i + 1 - w;
                while *maxq.front().unwrap() < lo {
                    maxq.pop_front();
                }
                while *minq.front().unwrap() < lo {
                    minq.pop_front();
                }
                best = best.max(self.samples[*maxq.front().unwrap()] - self.samples[*minq.front().unwrap()]);
            }
        }
        best
    }

    /// Hölder quotient: value = max_l omega(2^{-l}) / 2^{-l·alpha} together
    /// with the per-scale profile for l = 1..L. A profile decaying toward 0
    /// at fine scales is the small-Hölder membership diagnostic.
    pub fn holder_quotient(&self, alpha: f64) -> Result<(f64, Vec<f64>)> {
        if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let mut profile = Vec::with_capacity(self.level as usize);
        for l in 1..=self.level {
            let m = 1usize << (self.level - l);
            let omega = self.modulus_steps(m);
            let delta = (m as f64) / (1u64 << self.level) as f64;
            profile.push(omega / delta.powf(alpha));
        }
        let value = profile.iter().fold(0.0f64, |m, &v| m.max(v));
        Ok((value, profile))
    }

    /// H¹₀ seminorm of the piecewise-linear interpolant:
    /// sqrt( sum_i (x_{i+1} - x_i)^2 · 2^L ), the exact L² norm of the derivative.
    pub fn h1_seminorm(&self) -> f64 {
        let scale = (1u64 << self.level) as f64;
        let sum: f64 = self
            .samples
            .windows(2)
            .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
            .sum();
        (sum * scale).sqrt()
    }

    /// H¹₀ inner product with another path of the same level:
    /// sum_i (a_{i+1}-a_i)(b_{i+1}-b_i) · 2^L.
    pub fn h1_inner(&self, other: &DyadicPath) -> f64 {
        assert_eq!(self.level, other.level, "level mismatch");
        let scale = (1u64 << self.level) as f64;
        self.samples
            .windows(2)
            .zip(other.samples.windows(2))
            .map(|(a, b)| (a[1] - a[0]) * (b[1] - b[0]))
            .sum::<f64>()
            * scale
    }

    /// Pointwise sum with another path of the same level.
    pub fn add_scaled(&mut self, other: &DyadicPath, c: f64) {
        assert_eq!(self.level, other.level, "level mismatch");
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += c * b;
        }
    }

    /// Writes the path as CSV with header `t,x`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x")?;
        let n = (1u64 << self.level) as f64;
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", i as f64 / n, v)?;
        }
        Ok(())
    }

    /// Reads a path from `t,x` CSV as written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut samples = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('t')) {
                continue;
            }
            let x = line
                .split(',')
                .nth(1)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("bad CSV line: {line}")))?;
            samples.push(x);
        }
        Self::new(samples)
    }

    /// The samples as a JSON array.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.samples).expect("serializing f64 vec")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let samples: Vec<f64> = serde_json::from_str(s)?;
        Self::new(samples)
    }
}
