use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// An injective map `{0..n} -> {0..m}` with `n <= m`; a bijection when
/// `n == m`.
///
/// Indices are zero-based in memory. Text formats (CSV, `Display`) are
/// one-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
    codomain: usize,
}

impl Permutation {
    /// Builds a bijection of `{0..map.len()}`.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let m = map.len();
        Self::injection(map, m)
    }

    /// Builds an injection into `{0..codomain}`.
    pub fn injection(map: Vec<usize>, codomain: usize) -> Result<Self> {
        if map.len() > codomain {
            return Err(Error::InvalidPermutation(format!(
                "{} images cannot be distinct in a codomain of size {codomain}",
                map.len()
            )));
        }
        let mut seen = vec![false; codomain];
        for (k, &img) in map.iter().enumerate() {
            if img >= codomain {
                return Err(Error::InvalidPermutation(format!(
                    "image {img} at position {k} is outside 0..{codomain}"
                )));
            }
            if std::mem::replace(&mut seen[img], true) {
                return Err(Error::InvalidPermutation(format!("image {img} repeated")));
            }
        }
        Ok(Permutation { map, codomain })
    }

    /// Builds from one-based images, as read from text formats.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let map = images
            .iter()
            .map(|&v| {
                v.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("one-based image 0".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(map)
    }

    pub(crate) fn from_vec_unchecked(map: Vec<usize>, codomain: usize) -> Self {
        debug_assert!(Self::injection(map.clone(), codomain).is_ok());
        Permutation { map, codomain }
    }

    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect(), codomain: n }
    }

    /// Uniform draw from the symmetric group by Fisher–Yates.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map, codomain: n }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn is_square(&self) -> bool {
        self.map.len() == self.codomain
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|&v| v + 1).collect()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    /// Inverse of a bijection.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::InvalidPermutation("only bijections have inverses".into()));
        }
        let mut inv = vec![0; self.map.len()];
        for (k, &v) in self.map.iter().enumerate() {
            inv[v] = k;
        }
        Ok(Permutation { map: inv, codomain: self.codomain })
    }

    /// `self ∘ other`, i.e. `k ↦ self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if other.codomain != self.map.len() {
            return Err(Error::SizeMismatch { left: self.map.len(), right: other.codomain });
        }
        let map = other.map.iter().map(|&k| self.map[k]).collect();
        Ok(Permutation { map, codomain: self.codomain })
    }

    /// Number of positions where `self` and `other` disagree.
    pub fn mismatches(&self, other: &Permutation) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch { left: self.len(), right: other.len() });
        }
        Ok(self.map.iter().zip(&other.map).filter(|(a, b)| a != b).count())
    }

    pub fn fixed_points(&self) -> usize {
        self.map.iter().enumerate().filter(|&(k, &v)| k == v).count()
    }

    /// Squared displacement `Σ (π(k) − k)²`.
    pub fn squared_displacement(&self) -> u64 {
        self.map
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let d = k.abs_diff(v) as u64;
                d * d
            })
            .sum()
    }

    /// Disjoint cycles of length ≥ 2, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        assert!(self.is_square(), "cycle decomposition needs a bijection");
        let n = self.map.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.map[start] == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut k = self.map[start];
            while k != start {
                seen[k] = true;
                cycle.push(k);
                k = self.map[k];
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.map.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, ")")
    }
}

/// Visits every injection `{0..n} -> {0..m}` in lexicographic order of the
/// image vector. The callback may stop the walk by returning `false`.
pub fn for_each_injection(n: usize, m: usize, mut f: impl FnMut(&[usize]) -> bool) {
    fn rec(
        pos: usize,
        n: usize,
        m: usize,
        used: &mut [bool],
        cur: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if pos == n {
            return f(cur);
        }
        for v in 0..m {
            if used[v] {
                continue;
            }
            used[v] = true;
            cur.push(v);
            let go_on = rec(pos + 1, n, m, used, cur, f);
            cur.pop();
            used[v] = false;
            if !go_on {
                return false;
            }
        }
        true
    }
    if n > m {
        return;
    }
    let mut used = vec![false; m];
    let mut cur = Vec::with_capacity(n);
    rec(0, n, m, &mut used, &mut cur, &mut f);
}

/// Visits every permutation of `{0..n}` in lexicographic order.
pub fn for_each_permutation(n: usize, f: impl FnMut(&[usize]) -> bool) {
    for_each_injection(n, n, f)
}
