//! Correlation analysis and interaction-count distribution summaries.

use crate::error::{Error, Result};
use crate::plif::{Fingerprint, InteractionType};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Correlation {
    pub pearson_r: f64,
    pub pearson_p: f64,
    pub spearman_rho: f64,
    pub spearman_p: f64,
    pub n: usize,
}

fn validate_inputs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("correlate length mismatch".into()));
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput(
            "correlate needs at least 3 observations".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("correlate inputs must be finite".into()));
    }
    Ok(())
}

fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate(
            "zero variance: correlation undefined".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Average ranks (1-based), ties share the mean of their rank span.
fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average 1-based rank.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided p from t = r sqrt((n-2)/(1-r^2)) with n-2 degrees of
/// freedom; a documented approximation for both coefficients.
fn t_test_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    if denom <= f64::EPSILON {
        return 0.0;
    }
    let t = r.abs() * (df / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid dof");
    2.0 * (1.0 - dist.cdf(t))
}

/// Pearson r and Spearman rho (Pearson on average ranks) with two-sided
/// t-approximation p-values.
pub fn correlate(x: &[f64], y: &[f64]) -> Result<Correlation> {
    validate_inputs(x, y)?;
    let r = pearson_r(x, y)?;
    let rho = pearson_r(&average_ranks(x), &average_ranks(y))?;
    Ok(Correlation {
        pearson_r: r,
        pearson_p: t_test_p(r, x.len()),
        spearman_rho: rho,
        spearman_p: t_test_p(rho, x.len()),
        n: x.len(),
    })
}

/// Same coefficients, but p-values from a seeded permutation test:
/// p = (#{|r_perm| >= |r_obs|} + 1) / (shuffles + 1).
pub fn correlate_permutation(
    x: &[f64],
    y: &[f64],
    shuffles: usize,
    seed: u64,
) -> Result<Correlation> {
    validate_inputs(x, y)?;
    let r = pearson_r(x, y)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let rho = pearson_r(&rx, &ry)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = y.to_vec();
    let mut hits_r = 0usize;
    let mut hits_rho = 0usize;
    for _ in 0..shuffles {
        shuffled.shuffle(&mut rng);
        if let Ok(rp) = pearson_r(x, &shuffled) {
            if rp.abs() >= r.abs() {
                hits_r += 1;
            }
        }
        if let Ok(rhop) = pearson_r(&rx, &average_ranks(&shuffled)) {
            if rhop.abs() >= rho.abs() {
                hits_rho += 1;
            }
        }
    }
    Ok(Correlation {
        pearson_r: r,
        pearson_p: (hits_r + 1) as f64 / (shuffles + 1) as f64,
        spearman_rho: rho,
        spearman_p: (hits_rho + 1) as f64 / (shuffles + 1) as f64,
        n: x.len(),
    })
}

/// Five-number-plus-mean summary of one interaction type's counts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Quantile by linear interpolation on the sorted sample.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-interaction-type distribution of counts per complex; every type
/// is reported even when absent everywhere (all-zero distribution).
pub fn interaction_distribution(
    fingerprints: &[Fingerprint],
) -> BTreeMap<InteractionType, DistributionSummary> {
    let mut out = BTreeMap::new();
    for ty in InteractionType::ALL {
        let mut counts: Vec<f64> = fingerprints
            .iter()
            .map(|fp| {
                fp.counts
                    .iter()
                    .filter(|(k, _)| k.interaction_type == ty)
                    .map(|(_, &c)| c as f64)
                    .sum()
            })
            .collect();
        if counts.is_empty() {
            counts.push(0.0);
        }
        counts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        out.insert(
            ty,
            DistributionSummary {
                mean,
                min: counts[0],
                q1: quantile(&counts, 0.25),
                median: quantile(&counts, 0.5),
                q3: quantile(&counts, 0.75),
                max: *counts.last().unwrap(),
            },
        );
    }
    out
}

/// Plot-ready CSV of the distribution table.
pub fn distribution_csv(dist: &BTreeMap<InteractionType, DistributionSummary>) -> String {
    let mut out = String::from("interaction_type,mean,min,q1,median,q3,max\n");
    for (ty, s) in dist {
        out.push_str(&format!(
            "{ty},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            s.mean, s.min, s.q1, s.median, s.q3, s.max
        ));
    }
    out
}
