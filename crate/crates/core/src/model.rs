//! Feature sets, noise models and the synthetic generators.
//!
//! Observations follow the additive Gaussian model: the first set is
//! `X_i = θ_i + σ_i ξ_i` and the second set is a relabelled noisy copy,
//! `X#_i = θ_{π*(i)} + σ_{π*(i)} ξ#_i`, where every ξ is a standard Gaussian
//! vector. The noise level attached to a second-set feature is always the
//! level of the first-set feature it comes from.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::rng::seeded;

/// `n` feature vectors of dimension `d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl FeatureSet {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!("feature set must be non-empty, got {n}x{d}")));
        }
        if data.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, found: data.len() });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / d, col: pos % d });
        }
        Ok(FeatureSet { data, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(n, d, data)
    }

    pub fn zeros(n: usize, d: usize) -> Result<Self> {
        Self::new(n, d, vec![0.0; n * d])
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Applies `f` to every row, producing a set of dimension `out_dim`.
    pub fn map_rows(&self, out_dim: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> Result<Self> {
        let mut data = vec![0.0; self.n * out_dim];
        for (src, dst) in self.rows().zip(data.chunks_exact_mut(out_dim)) {
            f(src, dst);
        }
        Self::new(self.n, out_dim, data)
    }

    /// Reorders rows: row `i` of the result is row `order(i)` of `self`.
    pub fn permute_rows(&self, order: &Permutation) -> Result<Self> {
        if order.len() != self.n || !order.is_square() {
            return Err(Error::SizeMismatch { left: order.len(), right: self.n });
        }
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.n {
            data.extend_from_slice(self.row(order.apply(i)));
        }
        Self::new(self.n, self.d, data)
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Noise levels of the first feature set.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    Homoscedastic(f64),
    Heteroscedastic(Vec<f64>),
}

fn check_level(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("noise level must be positive and finite, got {s}")))
    }
}

impl NoiseSpec {
    pub fn homoscedastic(sigma: f64) -> Result<Self> {
        check_level(sigma)?;
        Ok(NoiseSpec::Homoscedastic(sigma))
    }

    pub fn heteroscedastic(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("empty noise level vector"));
        }
        levels.iter().try_for_each(|&s| check_level(s))?;
        Ok(NoiseSpec::Heteroscedastic(levels))
    }

    /// Per-feature levels for a set of size `n`.
    pub fn levels(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            NoiseSpec::Homoscedastic(s) => {
                check_level(*s)?;
                Ok(vec![*s; n])
            }
            NoiseSpec::Heteroscedastic(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: v.len() });
                }
                v.iter().try_for_each(|&s| check_level(s))?;
                Ok(v.clone())
            }
        }
    }

    /// Levels of the second set under the pairing rule `σ#_i = σ_{π*(i)}`.
    pub fn paired_levels(&self, truth: &Permutation) -> Result<Vec<f64>> {
        let first = self.levels(truth.codomain())?;
        Ok(truth.as_slice().iter().map(|&j| first[j]).collect())
    }
}

/// Two observed feature sets, optionally with known noise levels and the
/// true matching.
///
/// `truth(i)` is the first-set index whose noisy copy is `second[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchInstance {
    first: FeatureSet,
    second: FeatureSet,
    first_noise: Option<Vec<f64>>,
    second_noise: Option<Vec<f64>>,
    truth: Option<Permutation>,
}

impl MatchInstance {
    /// Pairs two sets. The second set may be smaller than the first (an
    /// arrangement); it may not be larger.
    pub fn new(first: FeatureSet, second: FeatureSet) -> Result<Self> {
        if first.dim() != second.dim() {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: second.dim() });
        }
        if second.len() > first.len() {
            return Err(Error::invalid(format!(
                "second set ({}) must not be larger than the first ({}); swap the inputs",
                second.len(),
                first.len()
            )));
        }
        Ok(MatchInstance { first, second, first_noise: None, second_noise: None, truth: None })
    }

    pub fn with_noise(mut self, first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if first.len() != self.first.len() {
            return Err(Error::DimensionMismatch { expected: self.first.len(), found: first.len() });
        }
        if second.len() != self.second.len() {
            return Err(Error::DimensionMismatch {
                expected: self.second.len(),
                found: second.len(),
            });
        }
        first.iter().chain(&second).try_for_each(|&s| check_level(s))?;
        self.first_noise = Some(first);
        self.second_noise = Some(second);
        Ok(self)
    }

    pub fn with_truth(mut self, truth: Permutation) -> Result<Self> {
        if truth.len() != self.second.len() || truth.codomain() != self.first.len() {
            return Err(Error::SizeMismatch { left: truth.len(), right: self.second.len() });
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn first(&self) -> &FeatureSet {
        &self.first
    }

    pub fn second(&self) -> &FeatureSet {
        &self.second
    }

    pub fn first_noise(&self) -> Option<&[f64]> {
        self.first_noise.as_deref()
    }

    pub fn second_noise(&self) -> Option<&[f64]> {
        self.second_noise.as_deref()
    }

    pub fn truth(&self) -> Option<&Permutation> {
        self.truth.as_ref()
    }

    pub fn is_square(&self) -> bool {
        self.first.len() == self.second.len()
    }

    pub fn dim(&self) -> usize {
        self.first.dim()
    }

    /// Relabels the first set: new first row `k` is old row `relabel(k)`.
    /// Truth is updated so that it still describes the same pairing.
    pub fn relabel_first(&self, relabel: &Permutation) -> Result<Self> {
        let first = self.first.permute_rows(relabel)?;
        let inv = relabel.inverse()?;
        let first_noise =
            self.first_noise.as_ref().map(|v| (0..v.len()).map(|k| v[relabel.apply(k)]).collect());
        let truth = match &self.truth {
            Some(t) => Some(inv.compose(t)?),
            None => None,
        };
        Ok(MatchInstance {
            first,
            second: self.second.clone(),
            first_noise,
            second_noise: self.second_noise.clone(),
            truth,
        })
    }
}

fn gaussian_row<R: Rng>(rng: &mut R, center: &[f64], sigma: f64, out: &mut Vec<f64>) {
    for &c in center {
        let z: f64 = rng.sample(StandardNormal);
        out.push(c + sigma * z);
    }
}

/// Draws a noisy pair of feature sets around `theta`.
///
/// `truth` must be a permutation of `0..theta.len()`. All first-set noise
/// vectors are drawn before the second-set ones from a single ChaCha8 stream
/// keyed by `seed`.
pub fn generate_instance(
    theta: &FeatureSet,
    noise: &NoiseSpec,
    truth: &Permutation,
    seed: u64,
) -> Result<MatchInstance> {
    let n = theta.len();
    if truth.len() != n || !truth.is_square() {
        return Err(Error::SizeMismatch { left: truth.len(), right: n });
    }
    let levels = noise.levels(n)?;
    let paired = noise.paired_levels(truth)?;
    let d = theta.dim();
    let mut rng = seeded(seed);

    let mut first = Vec::with_capacity(n * d);
    for (i, row) in theta.rows().enumerate() {
        gaussian_row(&mut rng, row, levels[i], &mut first);
    }
    let mut second = Vec::with_capacity(n * d);
    for (i, &s) in paired.iter().enumerate() {
        gaussian_row(&mut rng, theta.row(truth.apply(i)), s, &mut second);
    }

    MatchInstance::new(FeatureSet::new(n, d, first)?, FeatureSet::new(n, d, second)?)?
        .with_noise(levels, paired)?
        .with_truth(truth.clone())
}

/// `n × d` matrix with i.i.d. Uniform[0, τ] entries.
pub fn uniform_box_theta(n: usize, d: usize, tau: f64, seed: u64) -> Result<FeatureSet> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::invalid(format!("box width must be nonnegative, got {tau}")));
    }
    let mut rng = seeded(seed);
    let data = (0..n * d).map(|_| rng.random::<f64>() * tau).collect();
    FeatureSet::new(n, d, data)
}

/// `θ_i = τ e_i` in dimension `n`.
pub fn scaled_identity_theta(n: usize, tau: f64) -> Result<FeatureSet> {
    if !tau.is_finite() {
        return Err(Error::invalid("non-finite scale"));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = tau;
    }
    FeatureSet::new(n, n, data)
}

/// Hardest configuration for a given separation: consecutive features
/// `(0,1), (2,3), …` sit at relative distance exactly `kappa`, all other
/// pairs at relative distance strictly above `kappa (1 + r_σ)` where
/// `r_σ = max σ / min σ`. Everything lies on the first coordinate axis.
///
/// Pairs are spaced by `2 σ_max κ (1 + r_σ)`; since `(σ_i² + σ_j²)^{1/2} ≤
/// √2 σ_max`, this keeps every unpaired ratio above the bound. With odd `n`
/// the last feature is placed one spacing beyond its predecessor.
pub fn least_favorable_theta(levels: &[f64], kappa: f64, d: usize) -> Result<FeatureSet> {
    let n = levels.len();
    if n < 2 {
        return Err(Error::invalid("need at least two features"));
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    levels.iter().try_for_each(|&s| check_level(s))?;
    if levels.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("noise levels must be sorted ascending"));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    let s_min = levels[0];
    let s_max = levels[n - 1];
    let r = s_max / s_min;
    let gap = 2.0 * s_max * kappa * (1.0 + r);

    let mut x = vec![0.0; n];
    for i in 1..n {
        x[i] = if i % 2 == 1 {
            let pooled = (levels[i - 1].powi(2) + levels[i].powi(2)).sqrt();
            x[i - 1] + kappa * pooled
        } else {
            x[i - 1] + gap
        };
    }
    let mut data = vec![0.0; n * d];
    for (i, xi) in x.into_iter().enumerate() {
        data[i * d] = xi;
    }
    FeatureSet::new(n, d, data)
}

/// Smallest dimension allowed by the two-feature greedy counterexample.
pub fn theorem5_min_dim() -> usize {
    (225.0 * 6f64.ln()).ceil() as usize
}

/// Largest separation (exclusive) covered by the counterexample at `d`.
pub fn theorem5_kappa_limit(d: usize) -> f64 {
    0.1 * (2.0 * d as f64).sqrt()
}

#[derive(Clone, Debug)]
pub struct Theorem5Instance {
    pub instance: MatchInstance,
    /// Hypotheses of the counterexample that the parameters violate.
    pub warnings: Vec<String>,
}

impl Theorem5Instance {
    pub fn within_hypotheses(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Two features with `σ₁² = 3`, `σ₂² = 1` at distance `2κ` and identity
/// truth: the configuration where greedy matching fails with probability
/// at least one half.
///
/// Parameters outside `d ≥ 225 ln 6`, `κ < 0.1 (2d)^{1/2}` still produce an
/// instance, with a warning attached.
pub fn theorem5_instance(d: usize, kappa: f64, seed: u64) -> Result<Theorem5Instance> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::invalid(format!("kappa must be nonnegative, got {kappa}")));
    }
    let mut warnings = Vec::new();
    if d < theorem5_min_dim() {
        warnings.push(format!("d = {d} is below 225 ln 6 ≈ 403.15"));
    }
    let limit = theorem5_kappa_limit(d);
    if kappa >= limit {
        warnings.push(format!("kappa = {kappa} is not below 0.1 (2d)^(1/2) = {limit:.4}"));
    }
    let mut theta = vec![0.0; 2 * d];
    theta[d] = 2.0 * kappa;
    let theta = FeatureSet::new(2, d, theta)?;
    let noise = NoiseSpec::heteroscedastic(vec![3f64.sqrt(), 1.0])?;
    let instance = generate_instance(&theta, &noise, &Permutation::identity(2), seed)?;
    Ok(Theorem5Instance { instance, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pooled(levels: &[f64], i: usize, j: usize) -> f64 {
        (levels[i].powi(2) + levels[j].powi(2)).sqrt()
    }

    #[test]
    fn vanishing_noise_reproduces_theta() {
        let theta = uniform_box_theta(6, 3, 5.0, 1).unwrap();
        let truth = Permutation::new(vec![3, 0, 5, 1, 2, 4]).unwrap();
        let noise = NoiseSpec::homoscedastic(1e-12).unwrap();
        let inst = generate_instance(&theta, &noise, &truth, 9).unwrap();
        for i in 0..6 {
            for (a, b) in inst.second().row(i).iter().zip(theta.row(truth.apply(i))) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let theta = uniform_box_theta(5, 4, 2.0, 3).unwrap();
        let truth = Permutation::random(5, &mut seeded(4));
        let noise = NoiseSpec::homoscedastic(1.0).unwrap();
        let a = generate_instance(&theta, &noise, &truth, 42).unwrap();
        let b = generate_instance(&theta, &noise, &truth, 42).unwrap();
        let bits = |s: &FeatureSet| s.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a.first()), bits(b.first()));
        assert_eq!(bits(a.second()), bits(b.second()));
        let c = generate_instance(&theta, &noise, &truth, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generator_moments() {
        let theta = FeatureSet::zeros(1000, 1).unwrap();
        let noise = NoiseSpec::homoscedastic(1.0).unwrap();
        let inst = generate_instance(&theta, &noise, &Permutation::identity(1000), 5).unwrap();
        let xs = inst.first().as_slice();
        let mean = xs.iter().sum::<f64>() / 1000.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 999.0;
        assert!(mean.abs() < 4.0 / 1000f64.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.2, "var {var}");
    }

    #[test]
    fn heteroscedastic_pairing_rule() {
        let theta = FeatureSet::zeros(4, 2).unwrap();
        let levels = vec![0.5, 1.0, 2.0, 4.0];
        let truth = Permutation::new(vec![2, 3, 1, 0]).unwrap();
        let noise = NoiseSpec::heteroscedastic(levels.clone()).unwrap();
        let inst = generate_instance(&theta, &noise, &truth, 0).unwrap();
        let second = inst.second_noise().unwrap();
        for i in 0..4 {
            assert_eq!(second[i], levels[truth.apply(i)]);
        }
    }

    #[test]
    fn generation_errors() {
        assert!(NoiseSpec::homoscedastic(0.0).is_err());
        assert!(NoiseSpec::heteroscedastic(vec![1.0, -1.0]).is_err());
        let theta = FeatureSet::zeros(3, 2).unwrap();
        let bad = NoiseSpec::Heteroscedastic(vec![1.0, 1.0]);
        assert!(generate_instance(&theta, &bad, &Permutation::identity(3), 0).is_err());
        let zero = NoiseSpec::Homoscedastic(0.0);
        assert!(generate_instance(&theta, &zero, &Permutation::identity(3), 0).is_err());
        assert!(generate_instance(
            &theta,
            &NoiseSpec::Homoscedastic(1.0),
            &Permutation::identity(2),
            0
        )
        .is_err());
        let other_dim = FeatureSet::zeros(3, 3).unwrap();
        assert!(MatchInstance::new(theta, other_dim).is_err());
    }

    #[test]
    fn uniform_box() {
        let t = uniform_box_theta(200, 200, 1.4, 1).unwrap();
        assert!(t.as_slice().iter().all(|&v| (0.0..=1.4).contains(&v)));
        let z = uniform_box_theta(3, 2, 0.0, 1).unwrap();
        assert!(z.as_slice().iter().all(|&v| v == 0.0));
        let big = uniform_box_theta(10_000, 1, 2.0, 2).unwrap();
        let mean = big.as_slice().iter().sum::<f64>() / 10_000.0;
        assert!((mean - 1.0).abs() < 0.05);
    }

    #[test]
    fn scaled_identity_geometry() {
        let t = scaled_identity_theta(3, 4.0).unwrap();
        assert_eq!(t.row(0), &[4.0, 0.0, 0.0]);
        assert_eq!(t.row(2), &[0.0, 0.0, 4.0]);
        let t = scaled_identity_theta(5, 7.0).unwrap();
        for i in 0..5 {
            for j in 0..i {
                let dist = squared_distance(t.row(i), t.row(j)).sqrt();
                assert!((dist - 7.0 * 2f64.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn least_favorable_two_features() {
        let t = least_favorable_theta(&[1.0, 1.0], 3.0, 4).unwrap();
        assert_eq!(t.row(0), &[0.0; 4]);
        assert!((t.row(1)[0] - 3.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(&t.row(1)[1..], &[0.0; 3]);
    }

    fn check_least_favorable(levels: &[f64], kappa: f64) {
        let t = least_favorable_theta(levels, kappa, 3).unwrap();
        let n = levels.len();
        let r = levels[n - 1] / levels[0];
        let mut paired = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let ratio = squared_distance(t.row(i), t.row(j)).sqrt() / pooled(levels, i, j);
                if i % 2 == 0 && j == i + 1 {
                    assert!((ratio - kappa).abs() <= 1e-9 * kappa);
                    paired += 1;
                } else {
                    assert!(ratio > kappa * (1.0 + r), "pair ({i},{j}) ratio {ratio}");
                }
            }
        }
        assert_eq!(paired, n / 2);
    }

    #[test]
    fn least_favorable_conditions_hold() {
        check_least_favorable(&[1.0; 4], 2.0);
        check_least_favorable(&[1.0; 5], 0.7);
        check_least_favorable(&[0.5, 0.6, 1.0, 1.1, 3.0], 1.3);
        check_least_favorable(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 9.0], 4.0);
        assert!(least_favorable_theta(&[2.0, 1.0], 1.0, 1).is_err());
        assert!(least_favorable_theta(&[1.0], 1.0, 1).is_err());
    }

    #[test]
    fn greedy_counterexample_construction() {
        let t = theorem5_instance(404, 2.5, 1).unwrap();
        assert!(t.within_hypotheses());
        let lv = t.instance.first_noise().unwrap();
        assert!((lv[0] * lv[0] - 3.0).abs() < 1e-12 && lv[1] == 1.0);
        let flagged = theorem5_instance(404, 3.0, 1).unwrap();
        assert_eq!(flagged.warnings.len(), 1);
        assert!((theorem5_kappa_limit(404) - 2.8425).abs() < 1e-4);
        assert_eq!(theorem5_min_dim(), 404);
        let again = theorem5_instance(404, 2.5, 1).unwrap();
        assert_eq!(t.instance, again.instance);
        assert!(!theorem5_instance(100, 0.5, 0).unwrap().within_hypotheses());
    }
}
