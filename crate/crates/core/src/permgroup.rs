//! Combinatorics on the symmetric group: ℓ²-balls, Hamming packings,
//! separated families built from disjoint transpositions, and derangements.
//!
//! Ball membership is decided in integer arithmetic on the squared
//! displacement `Σ (π(k) − k)²`, compared against `R² n`.
//!
//! [`ball_cardinality`] and [`pack_greedy`] work on the **open** ball
//! `Σ (π(k) − k)² < R² n`; [`closed_ball_cardinality`] counts the closed one.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{delta2, loss_hamming};
use crate::permutation::{for_each_permutation, Permutation};
use crate::rng::{derive_seed, seeded};

pub const BALL_MAX_N: usize = 10;
pub const PACKING_MAX_N: usize = 12;
const PACKING_MAX_MEMBERS: usize = 5_000_000;
pub const DERANGEMENT_MAX_N: usize = 20;
pub const LEMMA18_MAX_N: usize = 8;

/// Largest admissible squared displacement, or `None` for an empty ball.
fn displacement_limit(n: usize, radius: f64, closed: bool) -> Result<Option<u64>> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::invalid(format!("radius must be nonnegative, got {radius}")));
    }
    let t = radius * radius * n as f64;
    let k = t.round();
    let integral = (t - k).abs() <= 1e-9 * t.max(1.0);
    Ok(match (integral, closed) {
        (true, true) => Some(k as u64),
        (true, false) if k >= 1.0 => Some(k as u64 - 1),
        (true, false) => None,
        (false, _) => Some(t.floor() as u64),
    })
}

/// Depth-first walk over permutations with `Σ (π(k) − k)² ≤ limit`, in
/// lexicographic order.
fn walk_ball(n: usize, limit: u64, mut f: impl FnMut(&[usize])) {
    fn rec(pos: usize, n: usize, acc: u64, limit: u64, used: &mut [bool], cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if pos == n {
            f(cur);
            return;
        }
        for v in 0..n {
            if used[v] {
                continue;
            }
            let d = pos.abs_diff(v) as u64;
            let next = acc + d * d;
            if next > limit {
                continue;
            }
            used[v] = true;
            cur.push(v);
            rec(pos + 1, n, next, limit, used, cur, f);
            cur.pop();
            used[v] = false;
        }
    }
    let mut used = vec![false; n];
    let mut cur = Vec::with_capacity(n);
    rec(0, n, 0, limit, &mut used, &mut cur, &mut f);
}

fn count_ball(n: usize, radius: f64, closed: bool) -> Result<u64> {
    if n > BALL_MAX_N {
        return Err(Error::TooLarge { what: "ball enumeration", n, max: BALL_MAX_N });
    }
    let Some(limit) = displacement_limit(n, radius, closed)? else {
        return Ok(0);
    };
    let mut count = 0u64;
    walk_ball(n, limit, |_| count += 1);
    Ok(count)
}

/// Number of permutations with `δ₂(π, id) < R`.
pub fn ball_cardinality(n: usize, radius: f64) -> Result<u64> {
    count_ball(n, radius, false)
}

/// Number of permutations with `δ₂(π, id) ≤ R`.
pub fn closed_ball_cardinality(n: usize, radius: f64) -> Result<u64> {
    count_ball(n, radius, true)
}

/// Members of the open ball `δ₂(π, id) < R` in lexicographic order.
pub fn ball_members(n: usize, radius: f64) -> Result<Vec<Permutation>> {
    if n > PACKING_MAX_N {
        return Err(Error::TooLarge { what: "ball enumeration", n, max: PACKING_MAX_N });
    }
    let Some(limit) = displacement_limit(n, radius, false)? else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    let mut overflow = false;
    walk_ball(n, limit, |p| {
        if out.len() < PACKING_MAX_MEMBERS {
            out.push(Permutation::from_vec_unchecked(p.to_vec(), n));
        } else {
            overflow = true;
        }
    });
    if overflow {
        return Err(Error::invalid(format!(
            "ball of radius {radius} in S_{n} has more than {PACKING_MAX_MEMBERS} members"
        )));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingResult {
    pub permutations: Vec<Permutation>,
    pub radius_l2: f64,
    pub min_pairwise_hamming: f64,
    pub is_exhaustive: bool,
}

impl PackingResult {
    pub fn len(&self) -> usize {
        self.permutations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutations.is_empty()
    }

    /// `log M / (n log n)`, the normalization used to compare packing sizes
    /// across `n`.
    pub fn log_ratio(&self) -> Option<f64> {
        let n = self.permutations.first()?.len() as f64;
        (n > 1.0).then(|| (self.len() as f64).ln() / (n * n.ln()))
    }

    /// One permutation per line, one-based, comma-separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.permutations {
            let row: Vec<String> = p.to_one_based().iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<Permutation>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let v = l
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                Permutation::from_one_based(&v)
            })
            .collect()
    }
}

/// Checks, pair by pair, that every member lies in the open `δ₂`-ball of
/// radius `radius_l2` around the identity (skipped when `radius_l2` is
/// infinite) and that all distinct members are at Hamming distance at least
/// `min_pairwise_hamming`.
pub fn verify_packing(p: &PackingResult) -> bool {
    let Some(first) = p.permutations.first() else {
        return true;
    };
    let id = Permutation::identity(first.len());
    let in_ball = p.radius_l2.is_infinite()
        || p.permutations.iter().all(|q| delta2(q, &id).is_ok_and(|d| d < p.radius_l2));
    in_ball
        && p.permutations.iter().enumerate().all(|(i, a)| {
            p.permutations[..i]
                .iter()
                .all(|b| loss_hamming(a, b).is_ok_and(|h| h >= p.min_pairwise_hamming - 1e-12))
        })
}

/// Minimum number of differing positions that realizes `δ_H ≥ eps`.
fn required_mismatches(n: usize, eps: f64) -> usize {
    (eps * n as f64 - 1e-9).ceil().max(0.0) as usize
}

fn greedy_select(candidates: &[&[u8]], n: usize, need: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    'cand: for (idx, c) in candidates.iter().enumerate() {
        for &k in &chosen {
            let other = candidates[k];
            let diff = (0..n).filter(|&t| c[t] != other[t]).count();
            if diff < need {
                continue 'cand;
            }
        }
        chosen.push(idx);
    }
    chosen
}

/// Greedy `eps`-packing of the open `δ₂`-ball of radius `radius` in `δ_H`.
///
/// Ball members are scanned in lexicographic order and in `restarts`
/// additional seeded shuffles; each scan keeps every member at Hamming
/// distance `≥ eps` from those already kept. The largest packing found is
/// returned.
pub fn pack_greedy(n: usize, radius: f64, eps: f64, restarts: usize, seed: u64) -> Result<PackingResult> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if n > PACKING_MAX_N {
        return Err(Error::TooLarge { what: "packing search", n, max: PACKING_MAX_N });
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    let members = ball_members(n, radius)?;
    let is_exhaustive = n <= 8 && eps <= 2.0 / n as f64;
    let need = required_mismatches(n, eps);

    let best = if need <= 2 {
        // Distinct permutations always differ in at least two positions.
        members
    } else {
        let packed: Vec<Vec<u8>> =
            members.iter().map(|p| p.as_slice().iter().map(|&v| v as u8).collect()).collect();
        let best_idx = (0..=restarts)
            .into_par_iter()
            .map(|run| {
                let mut order: Vec<usize> = (0..packed.len()).collect();
                if run > 0 {
                    order.shuffle(&mut seeded(derive_seed(seed, 0, run as u64)));
                }
                let view: Vec<&[u8]> = order.iter().map(|&k| packed[k].as_slice()).collect();
                let chosen = greedy_select(&view, n, need);
                (chosen.len(), run, chosen.into_iter().map(|c| order[c]).collect::<Vec<_>>())
            })
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
            .map(|(_, _, idx)| idx)
            .unwrap_or_default();
        best_idx.into_iter().map(|k| members[k].clone()).collect()
    };

    Ok(PackingResult { permutations: best, radius_l2: radius, min_pairwise_hamming: eps, is_exhaustive })
}

/// Family in `S_m` with pairwise Hamming distance at least 1/2, grown
/// greedily from the identity. All of `S_m` is scanned (in seeded order)
/// when `m ≤ 8`; above that a seeded sample of candidates is used.
pub fn separated_inner_family(m: usize, seed: u64) -> Result<Vec<Permutation>> {
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    const SAMPLE: usize = 4000;
    let mut rng = seeded(seed);
    let mut candidates: Vec<Vec<u8>> = Vec::new();
    candidates.push((0..m as u8).collect());
    if m <= 8 {
        let mut all = Vec::new();
        for_each_permutation(m, |p| {
            if p.iter().enumerate().any(|(k, &v)| k != v) {
                all.push(p.iter().map(|&v| v as u8).collect::<Vec<u8>>());
            }
            true
        });
        all.shuffle(&mut rng);
        candidates.extend(all);
    } else {
        for _ in 0..SAMPLE {
            let p = Permutation::random(m, &mut rng);
            candidates.push(p.as_slice().iter().map(|&v| v as u8).collect());
        }
    }
    let view: Vec<&[u8]> = candidates.iter().map(Vec::as_slice).collect();
    let chosen = greedy_select(&view, m, m.div_ceil(2));
    let mut out: Vec<Permutation> = chosen
        .into_iter()
        .map(|k| Permutation::from_vec_unchecked(candidates[k].iter().map(|&v| v as usize).collect(), m))
        .collect();
    out.dedup();
    Ok(out)
}

/// Lifts `inner ∈ S_m` to `S_n` (`2m ≤ n`) as the product of the disjoint
/// transpositions `(2k−1  2·inner(k))`, `k = 1..m` (one-based). With odd `n`
/// the last point stays fixed.
pub fn lift_separated(inner: &Permutation, n: usize) -> Result<Permutation> {
    let m = inner.len();
    if 2 * m > n || !inner.is_square() {
        return Err(Error::invalid(format!("cannot lift S_{m} into S_{n}")));
    }
    let mut map: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let odd = 2 * k;
        let even = 2 * inner.apply(k) + 1;
        map[odd] = even;
        map[even] = odd;
    }
    Permutation::new(map)
}

pub const SEPARATED_SEED: u64 = 0x5EED_1E16;

/// Family of permutations of `S_n` with pairwise Hamming distance at least
/// 3/8, each a product of at most `n/2` disjoint transpositions. Contains
/// the identity plus the lift of every member of
/// [`separated_inner_family`]`(⌊n/2⌋)`.
pub fn construct_separated(n: usize) -> Result<PackingResult> {
    construct_separated_seeded(n, SEPARATED_SEED)
}

pub fn construct_separated_seeded(n: usize, seed: u64) -> Result<PackingResult> {
    if n < 4 {
        return Err(Error::invalid(format!("separated family needs n >= 4, got {n}")));
    }
    let m = n / 2;
    let inner = separated_inner_family(m, seed)?;
    let mut permutations = vec![Permutation::identity(n)];
    for p in &inner {
        permutations.push(lift_separated(p, n)?);
    }
    Ok(PackingResult {
        permutations,
        radius_l2: f64::INFINITY,
        min_pairwise_hamming: 3.0 / 8.0,
        is_exhaustive: false,
    })
}

/// Number of fixed-point-free permutations of `n` points, by
/// `!n = (n − 1)(!(n − 1) + !(n − 2))`.
pub fn derangement_count(n: usize) -> Result<u64> {
    if n > DERANGEMENT_MAX_N {
        return Err(Error::TooLarge { what: "derangement count", n, max: DERANGEMENT_MAX_N });
    }
    let (mut prev, mut cur) = (1u64, 0u64); // !0, !1
    if n == 0 {
        return Ok(1);
    }
    for k in 2..=n as u64 {
        let next = (k - 1)
            .checked_mul(cur + prev)
            .ok_or(Error::TooLarge { what: "derangement count", n, max: DERANGEMENT_MAX_N })?;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Counts permutations with `δ_H(π, id) < 1/2` exhaustively and returns
/// `(count, bound)` where `bound = 4 n! / m!`, `m = ⌈n/2⌉`.
pub fn lemma18_counts(n: usize) -> Result<(u64, u64)> {
    if !(2..=LEMMA18_MAX_N).contains(&n) {
        return Err(Error::TooLarge { what: "near-identity count", n, max: LEMMA18_MAX_N });
    }
    let mut count = 0u64;
    for_each_permutation(n, |p| {
        let moved = p.iter().enumerate().filter(|&(k, &v)| k != v).count();
        if 2 * moved < n {
            count += 1;
        }
        true
    });
    let m = n.div_ceil(2);
    Ok((count, 4 * factorial(n) / factorial(m)))
}

/// Whether the number of permutations within Hamming distance 1/2 of the
/// identity is at most `4 n! / ⌈n/2⌉!`.
pub fn verify_lemma18(n: usize) -> Result<bool> {
    let (count, bound) = lemma18_counts(n)?;
    Ok(count <= bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_ball_sizes() {
        assert_eq!(ball_cardinality(4, 2.0).unwrap(), 19);
        assert_eq!(ball_cardinality(5, 2.0).unwrap(), 57);
        assert_eq!(closed_ball_cardinality(4, 2.0).unwrap(), 20);
        assert_eq!(closed_ball_cardinality(2, 0.0).unwrap(), 1);
        assert_eq!(ball_cardinality(2, 0.0).unwrap(), 0);
        assert!(ball_cardinality(11, 2.0).is_err());
    }

    fn brute_ball(n: usize, limit_sq: f64, closed: bool, center: &[usize]) -> u64 {
        let mut c = 0;
        for_each_permutation(n, |p| {
            let s: f64 = p.iter().zip(center).map(|(&a, &b)| (a as f64 - b as f64).powi(2)).sum();
            if (closed && s <= limit_sq) || (!closed && s < limit_sq) {
                c += 1;
            }
            true
        });
        c
    }

    #[test]
    fn ball_matches_brute_force_for_fractional_radii() {
        let id: Vec<usize> = (0..6).collect();
        for r in [0.0, 0.5, 0.9, 1.0, 1.3, 2.0, 2.7, 3.0] {
            let lim = r * r * 6.0;
            assert_eq!(ball_cardinality(6, r).unwrap(), brute_ball(6, lim, false, &id), "r = {r}");
            assert_eq!(closed_ball_cardinality(6, r).unwrap(), brute_ball(6, lim, true, &id), "r = {r}");
        }
    }

    #[test]
    fn ball_is_monotone_and_saturates() {
        for n in 2..=6 {
            let reversal = Permutation::new((0..n).rev().collect()).unwrap();
            let full = delta2(&reversal, &Permutation::identity(n)).unwrap();
            let mut prev = 0;
            for k in 0..=40 {
                let c = closed_ball_cardinality(n, full * k as f64 / 40.0).unwrap();
                assert!(c >= prev);
                prev = c;
            }
            assert_eq!(prev, factorial(n));
            assert_eq!(ball_cardinality(n, full * 1.0001).unwrap(), factorial(n));
        }
    }

    #[test]
    fn ball_is_translation_invariant() {
        for n in 2..=6 {
            let want = ball_cardinality(n, 1.5).unwrap();
            for_each_permutation(n, |center| {
                assert_eq!(brute_ball(n, 1.5 * 1.5 * n as f64, false, center), want);
                true
            });
        }
    }

    #[test]
    fn small_packings_are_whole_ball() {
        let p = pack_greedy(4, 2.0, 0.25, 0, 0).unwrap();
        assert_eq!(p.len(), 19);
        assert!(p.is_exhaustive);
        assert!(verify_packing(&p));
    }

    #[test]
    fn packing_for_n9_is_valid() {
        let p = pack_greedy(9, 2.0, 0.25, 2, 7).unwrap();
        assert!(!p.is_exhaustive);
        assert!(verify_packing(&p));
        assert!(p.len() > 1000 && p.len() < 6689, "{}", p.len());
    }

    #[test]
    fn packing_csv_round_trip() {
        let p = pack_greedy(5, 2.0, 0.25, 0, 0).unwrap();
        assert_eq!(PackingResult::from_csv(&p.to_csv()).unwrap(), p.permutations);
    }

    #[test]
    fn packing_guards() {
        assert!(pack_greedy(13, 2.0, 0.25, 0, 0).is_err());
        assert!(pack_greedy(5, 2.0, 0.0, 0, 0).is_err());
        assert!(pack_greedy(5, 2.0, 1.5, 0, 0).is_err());
    }

    #[test]
    fn verify_packing_detects_violations() {
        let bad = PackingResult {
            permutations: vec![Permutation::identity(8), Permutation::from_one_based(&[2, 1, 3, 4, 5, 6, 7, 8]).unwrap()],
            radius_l2: 2.0,
            min_pairwise_hamming: 0.5,
            is_exhaustive: false,
        };
        assert!(!verify_packing(&bad));
    }

    #[test]
    fn separated_family_n4() {
        let fam = construct_separated(4).unwrap();
        assert!(fam.len() >= 2);
        assert!(verify_packing(&fam));
        for p in &fam.permutations {
            let cycles = p.cycles();
            assert!(cycles.len() <= 2 && cycles.iter().all(|c| c.len() == 2));
        }
    }

    #[test]
    fn lift_doubles_mismatches_and_maps_odd_to_even() {
        let inner = separated_inner_family(5, 3).unwrap();
        assert!(inner.len() >= 2);
        for (i, a) in inner.iter().enumerate() {
            let la = lift_separated(a, 11).unwrap();
            for k in 0..5 {
                // one-based: 2k−1 ↦ 2·a(k)
                assert_eq!(la.apply(2 * k) + 1, 2 * (a.apply(k) + 1));
            }
            assert_eq!(la.apply(10), 10);
            for b in &inner[..i] {
                let lb = lift_separated(b, 11).unwrap();
                assert_eq!(la.mismatches(&lb).unwrap(), 2 * a.mismatches(b).unwrap());
            }
        }
    }

    #[test]
    fn derangements() {
        assert_eq!(derangement_count(0).unwrap(), 1);
        assert_eq!(derangement_count(1).unwrap(), 0);
        assert_eq!(derangement_count(4).unwrap(), 9);
        assert_eq!(derangement_count(7).unwrap(), 1854);
        assert_eq!(derangement_count(20).unwrap(), 895_014_631_192_902_121);
        assert!(derangement_count(21).is_err());
        for n in 0..=8 {
            let mut c = 0u64;
            for_each_permutation(n, |p| {
                if p.iter().enumerate().all(|(k, &v)| k != v) {
                    c += 1;
                }
                true
            });
            assert_eq!(derangement_count(n).unwrap(), c, "n = {n}");
        }
    }

    #[test]
    fn derangement_ball_bound() {
        assert!(verify_lemma18(2).unwrap());
        assert_eq!(lemma18_counts(4).unwrap(), (1, 48));
        assert!(verify_lemma18(7).unwrap());
        assert!(verify_lemma18(9).is_err());
        // Cross-check the count with the derangement decomposition.
        for n in 2..=8usize {
            let binom = |n: usize, k: usize| factorial(n) / (factorial(k) * factorial(n - k));
            let near: u64 = (0..=n)
                .filter(|&l| 2 * l < n)
                .map(|l| binom(n, l) * derangement_count(l).unwrap())
                .sum();
            assert_eq!(lemma18_counts(n).unwrap().0, near);
        }
    }
}
