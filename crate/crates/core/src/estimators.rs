//! Permutation estimators.
//!
//! Every cost matrix built here has **rows indexed by the second set** and
//! **columns indexed by the first set**: entry `(i, j)` scores matching
//! `X#_i` with `X_j`. An assignment `π` over such a matrix therefore reads
//! `π(i) = j` and is directly comparable with the instance's truth.
//!
//! | estimator        | entry `(i, j)`                                  |
//! |------------------|-------------------------------------------------|
//! | LSS              | `‖X_j − X#_i‖²`                                 |
//! | LSNS             | `‖X_j − X#_i‖² / (σ_j² + σ#_i²)`                |
//! | LSL              | `log max(‖X_j − X#_i‖², floor)`                 |
//! | generalized LSL  | `log max(‖M⁺(X̄_j − B X̄#_i)‖², floor)`           |
//!
//! The greedy and variance-greedy procedures are sequential and do not go
//! through the assignment solver.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::assignment::{solve_hungarian, CostMatrix};
use crate::error::{Error, Result};
use crate::model::{squared_distance, FeatureSet, MatchInstance};
use crate::permutation::Permutation;

/// Default floor on squared distances before taking logarithms.
pub const LSL_FLOOR: f64 = 1e-30;

/// Relative cutoff for treating a singular value as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum EstimatorKind {
    Greedy,
    Lss,
    Lsns,
    Lsl,
    VarianceGreedy,
    GeneralLsl(Box<CriterionReduction>),
}

impl EstimatorKind {
    /// The four estimators compared in the experiments.
    pub fn standard() -> Vec<EstimatorKind> {
        vec![EstimatorKind::Greedy, EstimatorKind::Lss, EstimatorKind::Lsns, EstimatorKind::Lsl]
    }

    pub fn tag(&self) -> &'static str {
        match self {
            EstimatorKind::Greedy => "greedy",
            EstimatorKind::Lss => "lss",
            EstimatorKind::Lsns => "lsns",
            EstimatorKind::Lsl => "lsl",
            EstimatorKind::VarianceGreedy => "variance-greedy",
            EstimatorKind::GeneralLsl(_) => "general-lsl",
        }
    }

    pub fn needs_noise_levels(&self) -> bool {
        matches!(self, EstimatorKind::Lsns | EstimatorKind::VarianceGreedy)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" | "gr" => Ok(EstimatorKind::Greedy),
            "lss" => Ok(EstimatorKind::Lss),
            "lsns" => Ok(EstimatorKind::Lsns),
            "lsl" => Ok(EstimatorKind::Lsl),
            "variance-greedy" | "variance_greedy" | "vargreedy" => Ok(EstimatorKind::VarianceGreedy),
            other => Err(Error::invalid(format!("unknown estimator {other:?}"))),
        }
    }
}

fn pairwise(instance: &MatchInstance, mut f: impl FnMut(usize, usize, f64) -> f64) -> Result<CostMatrix> {
    let (x, xs) = (instance.first(), instance.second());
    CostMatrix::from_fn(xs.len(), x.len(), |i, j| f(i, j, squared_distance(x.row(j), xs.row(i))))
}

/// Squared-distance costs.
pub fn cost_lss(instance: &MatchInstance) -> Result<CostMatrix> {
    pairwise(instance, |_, _, d2| d2)
}

/// Squared distances normalized by the pooled noise variance.
pub fn cost_lsns(instance: &MatchInstance) -> Result<CostMatrix> {
    let s1 = instance.first_noise().ok_or(Error::MissingNoise("first"))?;
    let s2 = instance.second_noise().ok_or(Error::MissingNoise("second"))?;
    pairwise(instance, |i, j, d2| d2 / (s1[j] * s1[j] + s2[i] * s2[i]))
}

/// Log squared-distance costs, floored at `floor`.
pub fn cost_lsl(instance: &MatchInstance, floor: f64) -> Result<CostMatrix> {
    check_floor(floor)?;
    pairwise(instance, |_, _, d2| d2.max(floor).ln())
}

fn check_floor(floor: f64) -> Result<()> {
    if floor.is_finite() && floor > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("log floor must be positive, got {floor}")))
    }
}

/// Runs the estimator. Assignment-based estimators use the default LSL floor.
pub fn estimate(instance: &MatchInstance, kind: &EstimatorKind) -> Result<Permutation> {
    let cost = match kind {
        EstimatorKind::Greedy => return estimate_greedy(instance),
        EstimatorKind::VarianceGreedy => return estimate_variance_greedy(instance),
        EstimatorKind::Lss => cost_lss(instance)?,
        EstimatorKind::Lsns => cost_lsns(instance)?,
        EstimatorKind::Lsl => cost_lsl(instance, LSL_FLOOR)?,
        EstimatorKind::GeneralLsl(red) => cost_general_lsl(instance, red, LSL_FLOOR)?,
    };
    Ok(solve_hungarian(&cost)?.assignment)
}

/// Sequential nearest neighbour without replacement: second-set features
/// are taken in index order, each grabbing the closest unused first-set
/// feature (ties to the smallest index).
pub fn estimate_greedy(instance: &MatchInstance) -> Result<Permutation> {
    let (x, xs) = (instance.first(), instance.second());
    sequential(x.len(), xs.len(), |i, j| squared_distance(x.row(j), xs.row(i)))
}

/// Matches on noise levels alone: each second-set feature `j`, in order,
/// takes the unused first-set `i` minimizing
/// `|‖X_i − X#_j‖² / (2d) − σ_i²|`.
pub fn estimate_variance_greedy(instance: &MatchInstance) -> Result<Permutation> {
    let levels = instance.first_noise().ok_or(Error::MissingNoise("first"))?;
    let (x, xs) = (instance.first(), instance.second());
    let two_d = 2.0 * instance.dim() as f64;
    sequential(x.len(), xs.len(), |j, i| {
        (squared_distance(x.row(i), xs.row(j)) / two_d - levels[i] * levels[i]).abs()
    })
}

fn sequential(
    n_first: usize,
    n_second: usize,
    score: impl Fn(usize, usize) -> f64,
) -> Result<Permutation> {
    let mut used = vec![false; n_first];
    let mut map = Vec::with_capacity(n_second);
    for i in 0..n_second {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n_first).filter(|&j| !used[j]) {
            let s = score(i, j);
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((j, s));
            }
        }
        let (j, _) = best.expect("second set is not larger than the first");
        used[j] = true;
        map.push(j);
    }
    Permutation::injection(map, n_first)
}

/// Reduction of the affine criterion `A(θ − b) = A#(θ# − b#)` to
/// `θ̄ = B θ̄#` with `θ̄ = V(θ − b)` and `θ̄# = Ṽ(θ# − b#)`.
///
/// `V` (`d₁ × d`) and `Ṽ` (`d₂ × d`) have orthonormal rows, so white noise
/// stays white after the transform.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReduction {
    pub v: DMatrix<f64>,
    pub v_sharp: DMatrix<f64>,
    pub b: DVector<f64>,
    pub b_sharp: DVector<f64>,
    pub link: DMatrix<f64>,
}

/// Thin SVD truncated to the numerical rank: returns `(U, Λ, V)` with
/// `A = Uᵀ diag(Λ) V`, `U` being `r × p` and `V` being `r × d`.
fn truncated_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left vectors requested");
    let vt = svd.v_t.expect("right vectors requested");
    let s = &svd.singular_values;
    let top = s.iter().cloned().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..s.len()).filter(|&k| top > 0.0 && s[k] > RANK_TOLERANCE * top).collect();
    if keep.is_empty() {
        return Err(Error::invalid("criterion matrix has rank 0"));
    }
    let r = keep.len();
    let ut = DMatrix::from_fn(r, a.nrows(), |k, c| u[(c, keep[k])]);
    let lam = DVector::from_fn(r, |k, _| s[keep[k]]);
    let v = DMatrix::from_fn(r, a.ncols(), |k, c| vt[(keep[k], c)]);
    Ok((ut, lam, v))
}

fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let top = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    svd.pseudo_inverse(RANK_TOLERANCE * top.max(f64::MIN_POSITIVE))
        .expect("tolerance is nonnegative")
}

pub fn reduce_criterion(
    a: &DMatrix<f64>,
    a_sharp: &DMatrix<f64>,
    b: &[f64],
    b_sharp: &[f64],
) -> Result<CriterionReduction> {
    if a.nrows() != a_sharp.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a_sharp.nrows() });
    }
    if b.len() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), found: b.len() });
    }
    if b_sharp.len() != a_sharp.ncols() {
        return Err(Error::DimensionMismatch { expected: a_sharp.ncols(), found: b_sharp.len() });
    }
    if a.iter().chain(a_sharp.iter()).chain(b).chain(b_sharp).any(|v| !v.is_finite()) {
        return Err(Error::invalid("criterion contains non-finite entries"));
    }
    let (u, lam, v) = truncated_svd(a)?;
    let (u_s, lam_s, v_s) = truncated_svd(a_sharp)?;
    let lam_inv = DMatrix::from_diagonal(&lam.map(|x| 1.0 / x));
    let link = lam_inv * &u * u_s.transpose() * DMatrix::from_diagonal(&lam_s);
    Ok(CriterionReduction {
        v,
        v_sharp: v_s,
        b: DVector::from_column_slice(b),
        b_sharp: DVector::from_column_slice(b_sharp),
        link,
    })
}

impl CriterionReduction {
    /// `A = A# = I_d`, `b = b# = 0`: plain equality.
    pub fn identity(d: usize) -> Self {
        CriterionReduction {
            v: DMatrix::identity(d, d),
            v_sharp: DMatrix::identity(d, d),
            b: DVector::zeros(d),
            b_sharp: DVector::zeros(d),
            link: DMatrix::identity(d, d),
        }
    }

    /// Mean-removal criterion `A = I − (1/d) 𝟙𝟙ᵀ`, blind to a constant shift
    /// of all coordinates (a change of illumination for image patches).
    pub fn illumination(d: usize) -> Result<Self> {
        let a = DMatrix::identity(d, d) - DMatrix::from_element(d, d, 1.0 / d as f64);
        reduce_criterion(&a, &a, &vec![0.0; d], &vec![0.0; d])
    }

    /// Matrix `M = B(BᵀB)⁺Bᵀ + BBᵀ` of the generalized LSL cost.
    pub fn mixing_matrix(&self) -> DMatrix<f64> {
        let b = &self.link;
        let btb = b.transpose() * b;
        b * pinv(&btb) * b.transpose() + b * b.transpose()
    }

    fn transform(&self, set: &FeatureSet, v: &DMatrix<f64>, offset: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        if set.dim() != v.ncols() {
            return Err(Error::DimensionMismatch { expected: v.ncols(), found: set.dim() });
        }
        Ok(set
            .rows()
            .map(|r| v * (DVector::from_column_slice(r) - offset))
            .collect())
    }
}

/// Generalized LSL cost under an affine matching criterion.
pub fn cost_general_lsl(
    instance: &MatchInstance,
    red: &CriterionReduction,
    floor: f64,
) -> Result<CostMatrix> {
    check_floor(floor)?;
    let first = red.transform(instance.first(), &red.v, &red.b)?;
    let second = red.transform(instance.second(), &red.v_sharp, &red.b_sharp)?;
    let m_pinv = pinv(&red.mixing_matrix());
    let mapped: Vec<DVector<f64>> = second.iter().map(|s| &red.link * s).collect();
    CostMatrix::from_fn(second.len(), first.len(), |i, j| {
        let r = &m_pinv * (&first[j] - &mapped[i]);
        r.norm_squared().max(floor).ln()
    })
}
