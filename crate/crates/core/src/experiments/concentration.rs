//! Gaussian concentration on subspaces: for a centrally symmetric convex
//! body B and a linear subspace F, the standard normal mass of B on the
//! full space is at most the mass that the standard normal of F gives to
//! F ∩ B. Checked in low dimension by direct Monte Carlo on both sides.

use super::{finish, freq_se, McParams};
use crate::error::{Error, Result};
use crate::report::{CheckItem, ExperimentReport};
use crate::rng::{replicate_map, NoiseSource};
use serde::{Deserialize, Serialize};

/// A centrally symmetric convex body, symmetric by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Body {
    /// {x : |x_i| <= half_sides_i}
    Box { half_sides: Vec<f64> },
    /// {x : sum (x_i / semi_axes_i)^2 <= 1}
    Ellipsoid { semi_axes: Vec<f64> },
    /// {x : |<normals_m, x>| <= offsets_m for all m}
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
}

impl Body {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::BadBody(msg.into()));
        match self {
            Body::Box { half_sides } => {
                if half_sides.len() != dim {
                    return bad("half_sides dimension mismatch");
                }
                if half_sides.iter().any(|&h| h <= 0.0) {
                    return bad("half sides must be positive");
                }
            }
            Body::Ellipsoid { semi_axes } => {
                if semi_axes.len() != dim {
                    return bad("semi_axes dimension mismatch");
                }
                if semi_axes.iter().any(|&a| a <= 0.0) {
                    return bad("semi axes must be positive");
                }
            }
            Body::Polytope { normals, offsets } => {
                if normals.len() != offsets.len() || normals.is_empty() {
                    return bad("normals/offsets length mismatch");
                }
                if normals.iter().any(|n| n.len() != dim) {
                    return bad("normal dimension mismatch");
                }
                if offsets.iter().any(|&b| b <= 0.0) {
                    return bad("offsets must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Body::Box { half_sides } => x
                .iter()
                .zip(half_sides)
                .all(|(&xi, &h)| xi.abs() <= h),
            Body::Ellipsoid { semi_axes } => {
                x.iter()
                    .zip(semi_axes)
                    .map(|(&xi, &a)| (xi / a) * (xi / a))
                    .sum::<f64>()
                    <= 1.0
            }
            Body::Polytope { normals, offsets } => normals.iter().zip(offsets).all(|(n, &b)| {
                n.iter().zip(x).map(|(&ni, &xi)| ni * xi).sum::<f64>().abs() <= b
            }),
        }
    }
}

/// A subspace of R^dim spanned by orthonormal vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Subspace {
    pub basis: Vec<Vec<f64>>,
}

impl Subspace {
    /// Span of the first `k` coordinate axes.
    pub fn axes(dim: usize, k: usize) -> Self {
        let basis = (0..k)
            .map(|i| {
                let mut v = vec![0.0; dim];
                v[i] = 1.0;
                v
            })
            .collect();
        Self { basis }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.basis.is_empty() || self.basis.len() > dim {
            return Err(Error::Config("subspace dimension out of range".into()));
        }
        for v in &self.basis {
            if v.len() != dim {
                return Err(Error::Config("subspace vector dimension mismatch".into()));
            }
        }
        for (i, u) in self.basis.iter().enumerate() {
            for (j, v) in self.basis.iter().enumerate() {
                let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-9 {
                    return Err(Error::Config("subspace basis not orthonormal".into()));
                }
            }
        }
        Ok(())
    }
}

pub fn concentration_check(
    dim: usize,
    subspace: &Subspace,
    body: &Body,
    params: &McParams,
    noise: &dyn NoiseSource,
) -> Result<ExperimentReport> {
    if !(2..=4).contains(&dim) {
        return Err(Error::Config("dimension must be 2..4".into()));
    }
    body.validate(dim)?;
    subspace.validate(dim)?;
    let started = std::time::Instant::now();
    let sub_dim = subspace.basis.len();
    let counts = replicate_map(params.replicates, params.workers, |rep| {
        // full-space draw on counters 1..dim, subspace draw on a disjoint
        // counter range so the two estimates are independent
        let x: Vec<f64> = (0..dim).map(|i| noise.gauss(rep, 1 + i as u64)).collect();
        let mut y = vec![0.0; dim];
        for (j, v) in subspace.basis.iter().enumerate() {
            let z = noise.gauss(rep, 1 + (dim + j) as u64);
            for (yi, &vi) in y.iter_mut().zip(v) {
                *yi += z * vi;
            }
        }
        (body.contains(&x) as u64, body.contains(&y) as u64)
    });
    let full_hits: u64 = counts.iter().map(|c| c.0).sum();
    let sub_hits: u64 = counts.iter().map(|c| c.1).sum();
    let (p_full, se_full) = freq_se(full_hits, params.replicates);
    let (p_sub, se_sub) = freq_se(sub_hits, params.replicates);
    let se = (se_full * se_full + se_sub * se_sub).sqrt();
    let mut report = ExperimentReport::new(
        "concentration",
        serde_json::json!({
            "dim": dim,
            "sub_dim": sub_dim,
            "body": body,
        }),
        params.seed,
        params.replicates,
    );
    report.push(CheckItem::mc("nu(B) full space", p_full, se_full, 1.0, true));
    report.push(CheckItem::mc("nu'(F cap B) subspace", p_sub, se_sub, 1.0, true));
    report.push(CheckItem::mc(
        "nu(B) <= nu'(F cap B) + 3 se",
        p_full,
        se,
        p_sub,
        p_full <= p_sub + 3.0 * se,
    ));
    Ok(finish(report, started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterNoise;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn params(replicates: u64, seed: u64) -> McParams {
        McParams {
            replicates,
            level: 0,
            seed,
            workers: 1,
        }
    }

    #[test]
    fn box_case_matches_product_formula() {
        let n = Normal::new(0.0, 1.0).unwrap();
        let noise = CounterNoise::new(41);
        for a in [0.5, 1.0, 2.0] {
            let body = Body::Box {
                half_sides: vec![a, a],
            };
            let sub = Subspace::axes(2, 1);
            let r = concentration_check(2, &sub, &body, &params(200_000, 41), &noise).unwrap();
            assert!(r.passed, "a = {a}\n{}", r.summary());
            let phi = 2.0 * n.cdf(a) - 1.0;
            let full = r.items[0].estimate;
            let subm = r.items[1].estimate;
            assert!((full - phi * phi).abs() < 5e-3, "full {full} vs {}", phi * phi);
            assert!((subm - phi).abs() < 5e-3, "sub {subm} vs {phi}");
        }
    }

    #[test]
    fn full_space_subspace_agrees_within_noise() {
        let noise = CounterNoise::new(9);
        let body = Body::Ellipsoid {
            semi_axes: vec![1.0, 2.0, 0.7],
        };
        let sub = Subspace::axes(3, 3);
        let r = concentration_check(3, &sub, &body, &params(100_000, 9), &noise).unwrap();
        let (full, subm) = (r.items[0].estimate, r.items[1].estimate);
        assert!((full - subm).abs() < 0.01, "{full} vs {subm}");
    }

    #[test]
    fn huge_body_has_mass_one() {
        let noise = CounterNoise::new(2);
        let body = Body::Box {
            half_sides: vec![50.0, 50.0],
        };
        let sub = Subspace::axes(2, 1);
        let r = concentration_check(2, &sub, &body, &params(5_000, 2), &noise).unwrap();
        assert_eq!(r.items[0].estimate, 1.0);
        assert_eq!(r.items[1].estimate, 1.0);
    }

    #[test]
    fn rotated_subspace_and_polytope() {
        let noise = CounterNoise::new(23);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sub = Subspace {
            basis: vec![vec![s, s]],
        };
        let body = Body::Polytope {
            normals: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![s, s]],
            offsets: vec![1.0, 1.0, 0.8],
        };
        let r = concentration_check(2, &sub, &body, &params(150_000, 23), &noise).unwrap();
        assert!(r.passed, "\n{}", r.summary());
    }

    #[test]
    fn invalid_inputs_rejected() {
        let noise = CounterNoise::new(0);
        let p = params(10, 0);
        let sub = Subspace::axes(2, 1);
        let bad_body = Body::Box {
            half_sides: vec![1.0, -1.0],
        };
        assert!(matches!(
            concentration_check(2, &sub, &bad_body, &p, &noise),
            Err(Error::BadBody(_))
        ));
        let body = Body::Box {
            half_sides: vec![1.0, 1.0],
        };
        let skew = Subspace {
            basis: vec![vec![1.0, 1.0]],
        };
        assert!(concentration_check(2, &skew, &body, &p, &noise).is_err());
        assert!(concentration_check(5, &sub, &body, &p, &noise).is_err());
    }
}
