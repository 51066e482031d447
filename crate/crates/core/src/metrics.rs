//! Losses, separation distances and the rate formulas.
//!
//! All logarithms are natural.

use crate::error::{Error, Result};
use crate::model::{squared_distance, FeatureSet, NoiseSpec};
use crate::permutation::Permutation;

/// 0-1 loss: 1 if the maps differ anywhere.
pub fn loss_01(a: &Permutation, b: &Permutation) -> Result<u8> {
    Ok(u8::from(a.mismatches(b)? > 0))
}

/// Fraction of positions where the maps differ.
pub fn loss_hamming(a: &Permutation, b: &Permutation) -> Result<f64> {
    let n = a.len();
    let k = a.mismatches(b)?;
    Ok(if n == 0 { 0.0 } else { k as f64 / n as f64 })
}

/// Normalized ℓ² distance `((1/n) Σ (a(k) − b(k))²)^{1/2}`.
pub fn delta2(a: &Permutation, b: &Permutation) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let s: u64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| {
            let d = x.abs_diff(y) as u64;
            d * d
        })
        .sum();
    Ok((s as f64 / a.len() as f64).sqrt())
}

/// Minimal pairwise distance between true features, raw and normalized by
/// the pooled noise `(σ_i² + σ_j²)^{1/2}`, with the pairs achieving them.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub kappa: f64,
    pub kappa_bar: f64,
    pub kappa_pair: (usize, usize),
    pub kappa_bar_pair: (usize, usize),
}

pub fn separation(theta: &FeatureSet, noise: &NoiseSpec) -> Result<SeparationReport> {
    let n = theta.len();
    if n < 2 {
        return Err(Error::invalid("separation needs at least two features"));
    }
    let levels = noise.levels(n)?;
    let mut best = (f64::INFINITY, (0, 1));
    let mut best_bar = (f64::INFINITY, (0, 1));
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = squared_distance(theta.row(i), theta.row(j)).sqrt();
            if dist < best.0 {
                best = (dist, (i, j));
            }
            let ratio = dist / (levels[i] * levels[i] + levels[j] * levels[j]).sqrt();
            if ratio < best_bar.0 {
                best_bar = (ratio, (i, j));
            }
        }
    }
    Ok(SeparationReport { kappa: best.0, kappa_bar: best_bar.0, kappa_pair: best.1, kappa_bar_pair: best_bar.1 })
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::invalid(format!("need n >= 2, got {n}")))
    } else {
        Ok(())
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Minimax separation rate `σ max((log n)^{1/2}, (d log n)^{1/4})`.
pub fn kappa_star(sigma: f64, n: usize, d: usize) -> Result<f64> {
    kappa_star_real(sigma, n, d as f64)
}

/// [`kappa_star`] for a real dimension, evaluated as
/// `σ (log n)^{1/2} max(1, (d / log n)^{1/4})` so that the two regimes meet
/// exactly at `d = log n`.
pub fn kappa_star_real(sigma: f64, n: usize, d: f64) -> Result<f64> {
    check_n(n)?;
    check_positive("sigma", sigma)?;
    check_positive("d", d)?;
    let ln = (n as f64).ln();
    Ok(sigma * ln.sqrt() * (d / ln).sqrt().sqrt().max(1.0))
}

/// Separation (in absolute units) above which every estimator errs with
/// probability at most `alpha` in the homoscedastic model:
/// `4σ max{(2 log(8n²/α))^{1/2}, (d log(4n²/α))^{1/4}}`.
pub fn theorem1_threshold(alpha: f64, n: usize, d: usize, sigma: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_n(n)?;
    check_positive("sigma", sigma)?;
    let n2 = (n * n) as f64;
    let a = (2.0 * (8.0 * n2 / alpha).ln()).sqrt();
    let b = (d as f64 * (4.0 * n2 / alpha).ln()).powf(0.25);
    Ok(4.0 * sigma * a.max(b))
}

/// The alternative statement of the same guarantee with larger constants:
/// `4σ max{(4 log(8n²/α))^{1/2}, (4d log(4n²/α))^{1/4}}`.
pub fn theorem1_threshold_restated(alpha: f64, n: usize, d: usize, sigma: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_n(n)?;
    check_positive("sigma", sigma)?;
    let n2 = (n * n) as f64;
    let a = (4.0 * (8.0 * n2 / alpha).ln()).sqrt();
    let b = (4.0 * d as f64 * (4.0 * n2 / alpha).ln()).powf(0.25);
    Ok(4.0 * sigma * a.max(b))
}

/// Uncapped `max{8n² exp(−κ²/(2⁶σ²)), 4n² exp(−κ⁴/(2¹⁰ d σ⁴))}`.
pub fn risk_bound_eq14_raw(kappa: f64, sigma: f64, n: usize, d: usize) -> Result<f64> {
    check_positive("kappa", kappa)?;
    check_positive("sigma", sigma)?;
    if n == 0 || d == 0 {
        return Err(Error::invalid("n and d must be positive"));
    }
    let n2 = (n * n) as f64;
    let first = 8.0 * n2 * (-(kappa * kappa) / (64.0 * sigma * sigma)).exp();
    let second = 4.0 * n2 * (-kappa.powi(4) / (1024.0 * d as f64 * sigma.powi(4))).exp();
    Ok(first.max(second))
}

/// Upper bound on the worst-case error probability at separation `kappa`,
/// capped at 1.
pub fn risk_bound_eq14(kappa: f64, sigma: f64, n: usize, d: usize) -> Result<f64> {
    Ok(risk_bound_eq14_raw(kappa, sigma, n, d)?.min(1.0))
}

/// Laurent–Massart deviation bounds for `Y ~ χ²(D)`.
///
/// `P(Y − D ≤ −2√(Dx)) ≤ e^{−x}` and `P(Y − D ≥ 2√(Dx) + 2x) ≤ e^{−x}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chi2TailBound {
    /// `Y` values at or below this are the lower tail event.
    pub lower_cutoff: f64,
    /// `Y` values at or above this are the upper tail event.
    pub upper_cutoff: f64,
    pub lower_prob_bound: f64,
    pub upper_prob_bound: f64,
}

pub fn chi2_tail_bound(dof: usize, x: f64) -> Result<Chi2TailBound> {
    if dof == 0 {
        return Err(Error::invalid("degrees of freedom must be at least 1"));
    }
    check_positive("x", x)?;
    let d = dof as f64;
    let spread = 2.0 * (d * x).sqrt();
    let p = (-x).exp();
    Ok(Chi2TailBound {
        lower_cutoff: d - spread,
        upper_cutoff: d + spread + 2.0 * x,
        lower_prob_bound: p,
        upper_prob_bound: p,
    })
}
