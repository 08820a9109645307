//! The Haar system, its Schauder primitives, the analysis/synthesis
//! transforms between paths and coefficient sequences, and the Ciesielski
//! weights that turn the coefficient space into a Hölder sequence norm.
//!
//! Indexing: n = 1 is the constant Haar function / identity Schauder
//! function; for n >= 2 we write n = 2^k + j with k >= 0 and 1 <= j <= 2^k.
//! Note k = 0 gives the first genuine Haar step (+1 on [0,1/2), -1 on
//! [1/2,1)); it is included so that the system is complete in L²[0,1].
//! Support intervals are half-open at dyadic breakpoints and closed at t = 1.

use crate::error::{Error, Result};
use crate::paths::{grid_len, DyadicPath};
use std::io::{BufRead, Write};

/// Coefficients xi_1..xi_N of a path in the Schauder basis (index n >= 1, dense).
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq {
    coeffs: Vec<f64>,
}

impl CoeffSeq {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "coefficient sequence must be nonempty");
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// xi_n for n >= 1; zero beyond the stored range.
    pub fn get(&self, n: usize) -> f64 {
        if n >= 1 && n <= self.coeffs.len() {
            self.coeffs[n - 1]
        } else {
            0.0
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.coeffs.iter().map(|x| c * x).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,xi")?;
        for (i, x) in self.coeffs.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, x)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut coeffs = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('n')) {
                continue;
            }
            let x = line
                .split(',')
                .nth(1)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("bad CSV line: {line}")))?;
            coeffs.push(x);
        }
        if coeffs.is_empty() {
            return Err(Error::Config("empty coefficient file".into()));
        }
        Ok(Self::new(coeffs))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.coeffs).expect("serializing f64 vec")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let coeffs: Vec<f64> = serde_json::from_str(s)?;
        if coeffs.is_empty() {
            return Err(Error::Config("empty coefficient array".into()));
        }
        Ok(Self::new(coeffs))
    }
}

/// Splits n >= 2 into (k, j) with n = 2^k + j, 1 <= j <= 2^k.
pub fn split_index(n: usize) -> (u32, usize) {
    debug_assert!(n >= 2);
    let k = usize::BITS - 1 - (n - 1).leading_zeros();
    (k, n - (1usize << k))
}

/// Depth of basis index n: the grid level needed to represent phi_n exactly.
/// phi_1 needs level 0, phi_{2^k+j} needs level k + 1.
pub fn depth(n: usize) -> u32 {
    if n == 1 {
        0
    } else {
        split_index(n).0 + 1
    }
}

/// chi_n(t), the Haar system on [0,1].
pub fn haar_eval(n: usize, t: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::BadBasisIndex);
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TOutOfRange(t));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let (k, j) = split_index(n);
    let scale = (1u64 << (k + 1)) as f64;
    let lo = (2 * j - 2) as f64 / scale;
    let mid = (2 * j - 1) as f64 / scale;
    let hi = (2 * j) as f64 / scale;
    let h = ((1u64 << k) as f64).sqrt();
    // half-open at breakpoints; t = 1 belongs to the last interval
    if (lo..mid).contains(&t) {
        Ok(h)
    } else if (mid..hi).contains(&t) || (t == 1.0 && hi == 1.0) {
        Ok(-h)
    } else {
        Ok(0.0)
    }
}

/// phi_n(t) = integral of chi_n over [0,t]: the identity for n = 1, and for
/// n = 2^k + j the tent of height 2^{-1-k/2} on [(j-1)·2^{-k}, j·2^{-k}].
pub fn schauder_eval(n: usize, t: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::BadBasisIndex);
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TOutOfRange(t));
    }
    if n == 1 {
        return Ok(t);
    }
    let (k, j) = split_index(n);
    let scale = (1u64 << k) as f64;
    let lo = (j - 1) as f64 / scale;
    let hi = j as f64 / scale;
    let mid = 0.5 * (lo + hi);
    let slope = scale.sqrt();
    if t <= lo || t >= hi {
        Ok(0.0)
    } else if t <= mid {
        Ok(slope * (t - lo))
    } else {
        Ok(slope * (hi - t))
    }
}

/// Peak value of phi_n: 1 for n = 1, otherwise 2^{-1-k/2}.
pub fn schauder_peak(n: usize) -> f64 {
    if n == 1 {
        1.0
    } else {
        let (k, _) = split_index(n);
        2f64.powf(-1.0 - k as f64 / 2.0)
    }
}

/// Schauder coefficients xi_n = ∫ chi_n dx for n = 1..2^L. Exact, since
/// chi_n is piecewise constant and x piecewise linear:
/// xi_1 = x(1) and xi_{2^k+j} = 2^{k/2}·(2·x(mid) - x(lo) - x(hi)).
pub fn analyze(p: &DyadicPath) -> CoeffSeq {
    let level = p.level();
    let s = p.samples();
    let count = 1usize << level;
    let mut coeffs = Vec::with_capacity(count);
    coeffs.push(s[s.len() - 1]);
    for k in 0..level {
        let step = 1usize << (level - k); // grid points per support
        let half = step / 2;
        let scale = ((1u64 << k) as f64).sqrt();
        for j in 1..=(1usize << k) {
            let lo = (j - 1) * step;
            coeffs.push(scale * (2.0 * s[lo + half] - s[lo] - s[lo + step]));
        }
    }
    CoeffSeq::new(coeffs)
}

/// x = sum_n xi_n·phi_n sampled on the level-L grid. Errors if the deepest
/// index needs a finer grid than L. Cost is linear in the total support size.
pub fn synthesize(xi: &CoeffSeq, level: u32) -> Result<DyadicPath> {
    let n_max = xi.len();
    if n_max > (1usize << level) {
        return Err(Error::LevelTooShallow {
            index: n_max,
            level,
            need: depth(n_max),
        });
    }
    let mut samples = vec![0.0; grid_len(level)];
    let c1 = xi.get(1);
    if c1 != 0.0 {
        let n = (1u64 << level) as f64;
        for (i, v) in samples.iter_mut().enumerate() {
            *v += c1 * i as f64 / n;
        }
    }
    for n in 2..=n_max {
        let c = xi.get(n);
        if c == 0.0 {
            continue;
        }
        let (k, j) = split_index(n);
        let step = 1usize << (level - k);
        let lo = (j - 1) * step;
        let unit = ((1u64 << k) as f64).sqrt() / (1u64 << level) as f64;
        for o in 1..step {
            samples[lo + o] += c * unit * o.min(step - o) as f64;
        }
    }
    DyadicPath::new(samples)
}

/// Ciesielski weight w_n(alpha): 2^{k(alpha-1/2)+(1-alpha)} for n = 2^k+j,
/// and 1 for n = 1 (phi_1 contributes a Lipschitz term; any positive
/// constant gives an equivalent norm).
pub fn ciesielski_weight(n: usize, alpha: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::BadBasisIndex);
    }
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let (k, _) = split_index(n);
    Ok(2f64.powf(k as f64 * (alpha - 0.5) + (1.0 - alpha)))
}

/// Weighted sequence norm sup_n w_n(alpha)·|xi_n| together with the
/// per-level profile: entry 0 is the n = 1 term, entry k+1 the maximum over
/// Haar level k. Profile decay is the c₀ (small-Hölder) diagnostic.
pub fn ciesielski_seq_norm(xi: &CoeffSeq, alpha: f64) -> Result<(f64, Vec<f64>)> {
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let mut profile = vec![xi.get(1).abs()];
    for n in 2..=xi.len() {
        let (k, _) = split_index(n);
        let idx = k as usize + 1;
        if profile.len() <= idx {
            profile.resize(idx + 1, 0.0);
        }
        let w = ciesielski_weight(n, alpha)?;
        profile[idx] = profile[idx].max(w * xi.get(n).abs());
    }
    let value = profile.iter().fold(0.0f64, |m, &v| m.max(v));
    Ok((value, profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn index_split() {
        assert_eq!(split_index(2), (0, 1));
        assert_eq!(split_index(3), (1, 1));
        assert_eq!(split_index(4), (1, 2));
        assert_eq!(split_index(5), (2, 1));
        assert_eq!(split_index(8), (2, 4));
        assert_eq!(split_index(9), (3, 1));
    }

    #[test]
    fn haar_values() {
        assert_eq!(haar_eval(1, 0.3).unwrap(), 1.0);
        assert_relative_eq!(haar_eval(3, 0.1).unwrap(), 2f64.sqrt());
        assert_eq!(haar_eval(3, 0.6).unwrap(), 0.0);
        assert_relative_eq!(haar_eval(2, 0.0).unwrap(), 1.0);
        assert_relative_eq!(haar_eval(2, 0.5).unwrap(), -1.0);
        // closed at t = 1
        assert_relative_eq!(haar_eval(2, 1.0).unwrap(), -1.0);
        assert!(haar_eval(0, 0.5).is_err());
        assert!(haar_eval(3, 1.5).is_err());
    }

    #[test]
    fn haar_orthonormal_in_l2() {
        // exact quadrature on the level-6 grid (all integrands are constant
        // on level-6 dyadic intervals for n <= 64)
        let m = 64usize;
        let pts = 64usize;
        for a in 1..=m {
            for b in a..=m {
                let mut acc = 0.0;
                for i in 0..pts {
                    let t = (i as f64 + 0.5) / pts as f64;
                    acc += haar_eval(a, t).unwrap() * haar_eval(b, t).unwrap();
                }
                acc /= pts as f64;
                let want = if a == b { 1.0 } else { 0.0 };
                assert_relative_eq!(acc, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn schauder_values() {
        assert_relative_eq!(schauder_eval(1, 0.7).unwrap(), 0.7);
        // peak at the midpoint
        for n in [2usize, 3, 5, 8, 13] {
            let (k, j) = split_index(n);
            let mid = (2 * j - 1) as f64 / (1u64 << (k + 1)) as f64;
            assert_relative_eq!(schauder_eval(n, mid).unwrap(), schauder_peak(n));
        }
        // support endpoint
        assert_eq!(schauder_eval(5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn schauder_is_primitive_of_haar() {
        // phi_n(t) = ∫_0^t chi_n, checked by midpoint quadrature at fine step
        let steps = 4096usize;
        for n in [1usize, 2, 3, 4, 7, 11] {
            let mut acc = 0.0;
            for i in 0..steps {
                let t = (i as f64 + 0.5) / steps as f64;
                acc += haar_eval(n, t).unwrap() / steps as f64;
                let t_right = (i + 1) as f64 / steps as f64;
                let phi = schauder_eval(n, t_right).unwrap();
                assert!((acc - phi).abs() < 1e-9, "n={n} t={t_right}");
            }
        }
    }

    #[test]
    fn analyze_linear_path() {
        let n = grid_len(5);
        let p = DyadicPath::new((0..n).map(|i| i as f64 / (n - 1) as f64).collect()).unwrap();
        let xi = analyze(&p);
        assert_relative_eq!(xi.get(1), 1.0);
        for m in 2..=xi.len() {
            assert_relative_eq!(xi.get(m), 0.0);
        }
    }

    #[test]
    fn analyze_zero_path() {
        let xi = analyze(&DyadicPath::zero(4));
        assert!(xi.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn biorthogonality() {
        // analyze(synthesize(e_n)) = e_n; oracle: xi_m = ∫ chi_m d(phi_n),
        // computed by direct quadrature over the piecewise-linear derivative
        let level = 6;
        for n in [1usize, 2, 3, 4, 5, 12, 33] {
            let mut xi = CoeffSeq::zeros(1usize << level);
            xi.as_mut_slice()[n - 1] = 1.0;
            let p = synthesize(&xi, level).unwrap();
            let back = analyze(&p);
            for m in 1..=back.len() {
                let want = if m == n { 1.0 } else { 0.0 };
                assert_relative_eq!(back.get(m), want, epsilon = 1e-12);
            }
            // independent oracle for a couple of m: quadrature of chi_m·x'
            let steps = 1usize << level;
            for m in [1usize, n] {
                let mut acc = 0.0;
                for i in 0..steps {
                    let t = (i as f64 + 0.5) / steps as f64;
                    let dx = (p.samples()[i + 1] - p.samples()[i]) * steps as f64;
                    acc += haar_eval(m, t).unwrap() * dx / steps as f64;
                }
                let want = if m == n { 1.0 } else { 0.0 };
                assert_relative_eq!(acc, want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn synthesize_rejects_shallow_level() {
        let xi = CoeffSeq::zeros(32);
        assert!(synthesize(&xi, 4).is_err());
        assert!(synthesize(&xi, 5).is_ok());
    }

    #[test]
    fn round_trip_random() {
        let level = 8;
        for r in 0..20u64 {
            let coeffs: Vec<f64> = (0..(1usize << level))
                .map(|i| crate::rng::normal(100, r, i as u64))
                .collect();
            let xi = CoeffSeq::new(coeffs);
            let p = synthesize(&xi, level).unwrap();
            let back = analyze(&p);
            for m in 1..=xi.len() {
                assert!(
                    (back.get(m) - xi.get(m)).abs() <= 1e-12 * xi.get(m).abs().max(1.0),
                    "m={m}"
                );
            }
            let p2 = synthesize(&back, level).unwrap();
            for (a, b) in p.samples().iter().zip(p2.samples()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn parseval_at_dyadic_times() {
        // sum_{n <= 2^k} phi_n(t)^2 = t for t = m·2^{-k}
        for k in 1..=8u32 {
            let nmax = 1usize << k;
            for m in 0..=(1usize << k) {
                let t = m as f64 / (1u64 << k) as f64;
                let s: f64 = (1..=nmax)
                    .map(|n| schauder_eval(n, t).unwrap().powi(2))
                    .sum();
                assert!((s - t).abs() <= 1e-12, "k={k} t={t} s={s}");
            }
        }
    }

    #[test]
    fn disjoint_supports_within_level() {
        // sup norm of a single-level combination is the max scaled coefficient
        let level = 7;
        let k = 4u32;
        let mut xi = CoeffSeq::zeros(1usize << (k + 1));
        let mut cmax = 0.0f64;
        for j in 1..=(1usize << k) {
            let c = crate::rng::normal(5, 0, j as u64);
            xi.as_mut_slice()[(1usize << k) + j - 1] = c;
            cmax = cmax.max(c.abs());
        }
        let p = synthesize(&xi, level).unwrap();
        let peak = 2f64.powf(-1.0 - k as f64 / 2.0);
        assert_relative_eq!(p.sup_norm(), peak * cmax, epsilon = 1e-12);
    }

    #[test]
    fn h1_equals_l2_of_coefficients() {
        // the phi_n are orthonormal in H¹₀
        let level = 7;
        for r in 0..10u64 {
            let coeffs: Vec<f64> = (0..100).map(|i| crate::rng::normal(6, r, i)).collect();
            let xi = CoeffSeq::new(coeffs);
            let p = synthesize(&xi, level).unwrap();
            let l2: f64 = xi.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
            assert_relative_eq!(p.h1_seminorm(), l2, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_schauder_sup_norm() {
        // |phi_{2^k+j}|_sup = 2^{-1-k/2}, h1 seminorm = 1
        for n in [2usize, 3, 6, 9, 20] {
            let mut xi = CoeffSeq::zeros(n);
            xi.as_mut_slice()[n - 1] = 1.0;
            let p = synthesize(&xi, depth(n) + 2).unwrap();
            assert_relative_eq!(p.sup_norm(), schauder_peak(n), epsilon = 1e-12);
            assert_relative_eq!(p.h1_seminorm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn modulus_of_single_tent() {
        // phi_3 (k=1, j=1) at level 3, delta = 0.25: brute-force value sqrt(2)/4
        let mut xi = CoeffSeq::zeros(3);
        xi.as_mut_slice()[2] = 1.0;
        let p = synthesize(&xi, 3).unwrap();
        let w = p.modulus_of_continuity(0.25).unwrap();
        assert_relative_eq!(w, 2f64.sqrt() * 0.25, epsilon = 1e-12);
    }

    #[test]
    fn weights() {
        for k in 0..12u32 {
            let n = (1usize << k) + 1;
            assert_relative_eq!(ciesielski_weight(n, 0.5).unwrap(), 2f64.sqrt());
        }
        assert_relative_eq!(ciesielski_weight(3, 0.5).unwrap(), 2f64.sqrt());
        // weight depends on k only
        let a = 0.3;
        assert_eq!(
            ciesielski_weight((1 << 10) + 1, a).unwrap(),
            ciesielski_weight((1 << 10) + 7, a).unwrap()
        );
        assert!(ciesielski_weight(3, 0.0).is_err());
        assert!(ciesielski_weight(3, 1.0).is_err());
    }

    #[test]
    fn seq_norm_basics() {
        let alpha = 0.4;
        assert_eq!(ciesielski_seq_norm(&CoeffSeq::zeros(16), alpha).unwrap().0, 0.0);
        // single entry at 2^k+j
        let k = 3u32;
        let n = (1usize << k) + 2;
        let mut xi = CoeffSeq::zeros(n);
        xi.as_mut_slice()[n - 1] = 1.0;
        let (v, _) = ciesielski_seq_norm(&xi, alpha).unwrap();
        assert_relative_eq!(v, 2f64.powf(k as f64 * (alpha - 0.5) + (1.0 - alpha)));
        // homogeneity
        let (v2, _) = ciesielski_seq_norm(&xi.scale(-3.0), alpha).unwrap();
        assert_relative_eq!(v2, 3.0 * v);
    }
}
