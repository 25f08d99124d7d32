//! The two index families of the Vandermonde-type construction.
//!
//! `Λ_{m,N}` holds exponent tuples `K = (k₁,…,k_m)` with `|K| ≤ N`; `Γ_{m,N}`
//! holds non-decreasing tuples `0 ≤ j₁ ≤ … ≤ j_m ≤ N`. Both have
//! `binom(N+m, m)` elements and are listed in ascending lexicographic order so
//! matrix rows and columns are reproducible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest degree accepted by the enumerators.
pub const MAX_DEGREE: u64 = 1 << 31;

/// An exponent tuple `K`, element of `Λ_{m,N}` when `|K| ≤ N`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u64>);

/// A non-decreasing tuple `J`, element of `Γ_{m,N}` when `j_m ≤ N`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrderedIndex(Vec<u64>);

impl MultiIndex {
    pub fn new(entries: Vec<u64>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|K| = Σ kᵢ`.
    pub fn weight(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }
}

impl OrderedIndex {
    /// Rejects tuples that are not non-decreasing.
    pub fn new(entries: Vec<u64>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid(format!(
                "ordered index must be non-decreasing, got {entries:?}"
            )));
        }
        Ok(OrderedIndex(entries))
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

impl fmt::Display for OrderedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, v: &[u64]) -> fmt::Result {
    write!(f, "(")?;
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, ")")
}

fn check_shape(m: usize, n: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("dimension m must be positive"));
    }
    if n > MAX_DEGREE {
        return Err(Error::invalid(format!("degree {n} exceeds 2^31")));
    }
    Ok(())
}

/// `binom(n, k)` as `u128`, panicking on overflow. Sizes used here are small.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc
            .checked_mul(u128::from(n - i))
            .expect("binomial overflow")
            / u128::from(i + 1);
    }
    acc
}

/// Number of elements of `Λ_{m,N}` (and of `Γ_{m,N}`).
pub fn simplex_count(m: usize, n: u64) -> u128 {
    binomial(n + m as u64, m as u64)
}

/// All `K ∈ Λ_{m,N}` in ascending lexicographic order.
pub fn enumerate_lambda(m: usize, n: u64) -> Result<Vec<MultiIndex>> {
    check_shape(m, n)?;
    let mut out = Vec::with_capacity(simplex_count(m, n) as usize);
    let mut cur = vec![0u64; m];
    fill_lambda(&mut cur, 0, n, &mut out);
    Ok(out)
}

fn fill_lambda(cur: &mut Vec<u64>, pos: usize, budget: u64, out: &mut Vec<MultiIndex>) {
    if pos == cur.len() {
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for k in 0..=budget {
        cur[pos] = k;
        fill_lambda(cur, pos + 1, budget - k, out);
    }
    cur[pos] = 0;
}

/// All `J ∈ Γ_{m,N}` in ascending lexicographic order.
pub fn enumerate_gamma(m: usize, n: u64) -> Result<Vec<OrderedIndex>> {
    check_shape(m, n)?;
    let mut out = Vec::with_capacity(simplex_count(m, n) as usize);
    let mut cur = vec![0u64; m];
    fill_gamma(&mut cur, 0, 0, n, &mut out);
    Ok(out)
}

fn fill_gamma(cur: &mut Vec<u64>, pos: usize, lo: u64, n: u64, out: &mut Vec<OrderedIndex>) {
    if pos == cur.len() {
        out.push(OrderedIndex(cur.clone()));
        return;
    }
    for j in lo..=n {
        cur[pos] = j;
        fill_gamma(cur, pos + 1, j, n, out);
    }
}

/// `|{J ∈ Γ_{m,N} : jᵢ = k}| = C(k+i−1, i−1)·C(N−k+m−i, m−i)`, with `axis = i` 1-based.
pub fn gamma_slice_count(m: usize, n: u64, axis: usize, k: u64) -> Result<u128> {
    check_shape(m, n)?;
    if axis == 0 || axis > m {
        return Err(Error::invalid(format!("axis {axis} outside 1..={m}")));
    }
    if k > n {
        return Err(Error::invalid(format!(
            "slice value {k} exceeds degree {n}"
        )));
    }
    let i = axis as u64;
    let m = m as u64;
    Ok(binomial(k + i - 1, i - 1) * binomial(n - k + m - i, m - i))
}

/// The order-preserving bijection `Γ_{m,N} → Λ_{m,N}`,
/// `(j₁,…,j_m) ↦ (j₁, j₂−j₁, …, j_m−j_{m−1})`.
pub fn sigma_bijection(j: &OrderedIndex) -> MultiIndex {
    let e = j.entries();
    let mut prev = 0;
    let out = e
        .iter()
        .map(|&x| {
            // OrderedIndex guarantees x >= prev.
            let d = x - prev;
            prev = x;
            d
        })
        .collect();
    MultiIndex(out)
}

/// Points on a circle assigned so consecutive picks differ in angle by about `2π/p`.
///
/// `{0,…,N}` is cut into `p` consecutive blocks `I_t` starting at
/// `a_t = tq + min(t, l)` where `N+1 = qp + l`; the first `l` blocks hold `q+1`
/// elements and the rest `q`. Within block `t`, `τ(j) = (j − a_t)p + t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleavedAssignment {
    pub degree: u64,
    pub blocks: u64,
    pub q: u64,
    pub l: u64,
    pub anchors: Vec<u64>,
    pub tau: Vec<u64>,
}

impl InterleavedAssignment {
    /// Block index `t` with `j ∈ I_t`.
    pub fn block_of(&self, j: u64) -> u64 {
        // anchors are increasing; last anchor <= j
        match self.anchors.binary_search(&j) {
            Ok(t) => t as u64,
            Err(t) => t as u64 - 1,
        }
    }

    /// Members of block `I_t`.
    pub fn block(&self, t: u64) -> std::ops::Range<u64> {
        let start = self.anchors[t as usize];
        let end = self
            .anchors
            .get(t as usize + 1)
            .copied()
            .unwrap_or(self.degree + 1);
        start..end
    }

    /// `|τ(j) − p·j + t(N+1)|` for `j ∈ I_t`.
    pub fn deviation(&self, j: u64) -> u64 {
        let t = self.block_of(j) as i128;
        let v = self.tau[j as usize] as i128 - self.blocks as i128 * j as i128
            + t * (self.degree as i128 + 1);
        v.unsigned_abs() as u64
    }
}

pub fn interleaved_assignment(n: u64, p: u64) -> Result<InterleavedAssignment> {
    if n > MAX_DEGREE {
        return Err(Error::invalid(format!("degree {n} exceeds 2^31")));
    }
    if p == 0 || p > n + 1 {
        return Err(Error::invalid(format!(
            "block count p = {p} must lie in 1..={} (no empty blocks)",
            n + 1
        )));
    }
    let q = (n + 1) / p;
    let l = (n + 1) % p;
    let anchors: Vec<u64> = (0..p).map(|t| t * q + t.min(l)).collect();
    let mut tau = vec![0u64; (n + 1) as usize];
    for t in 0..p {
        let start = anchors[t as usize];
        let len = if t < l { q + 1 } else { q };
        for j in start..start + len {
            tau[j as usize] = (j - start) * p + t;
        }
    }
    Ok(InterleavedAssignment {
        degree: n,
        blocks: p,
        q,
        l,
        anchors,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(m: usize, n: u64) -> Vec<Vec<u64>> {
        enumerate_lambda(m, n)
            .unwrap()
            .into_iter()
            .map(|k| k.0)
            .collect()
    }

    fn gam(m: usize, n: u64) -> Vec<Vec<u64>> {
        enumerate_gamma(m, n)
            .unwrap()
            .into_iter()
            .map(|k| k.0)
            .collect()
    }

    #[test]
    fn lambda_listings() {
        assert_eq!(lam(1, 2), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(lam(2, 1), vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(lam(2, 2).len(), 6);
    }

    #[test]
    fn gamma_listings() {
        assert_eq!(gam(2, 1), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(gam(1, 4), (0..=4).map(|j| vec![j]).collect::<Vec<_>>());
        assert_eq!(gam(3, 2).len(), 10);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(enumerate_lambda(0, 3).is_err());
        assert!(enumerate_gamma(0, 3).is_err());
        assert!(gamma_slice_count(0, 3, 1, 0).is_err());
    }

    #[test]
    fn enumeration_is_sorted_and_sized() {
        for m in 1..=4 {
            for n in 0..=12 {
                let l = enumerate_lambda(m, n).unwrap();
                let g = enumerate_gamma(m, n).unwrap();
                let c = simplex_count(m, n) as usize;
                assert_eq!(l.len(), c);
                assert_eq!(g.len(), c);
                assert!(l.windows(2).all(|w| w[0] < w[1]));
                assert!(g.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn slice_counts() {
        assert_eq!(gamma_slice_count(2, 2, 1, 0).unwrap(), 3);
        for k in 0..=7 {
            assert_eq!(gamma_slice_count(1, 7, 1, k).unwrap(), 1);
        }
        let s: u128 = (0..=2)
            .map(|k| gamma_slice_count(2, 2, 1, k).unwrap())
            .sum();
        assert_eq!(s, 6);
        assert!(gamma_slice_count(2, 2, 3, 0).is_err());
        assert!(gamma_slice_count(2, 2, 0, 0).is_err());
    }

    #[test]
    fn slice_count_matches_enumeration() {
        for m in 1..=4 {
            for n in 0..=6 {
                let g = enumerate_gamma(m, n).unwrap();
                for i in 1..=m {
                    for k in 0..=n {
                        let brute = g.iter().filter(|j| j.0[i - 1] == k).count() as u128;
                        assert_eq!(gamma_slice_count(m, n, i, k).unwrap(), brute);
                    }
                }
            }
        }
    }

    #[test]
    fn sigma_examples() {
        let z = OrderedIndex::new(vec![0, 0, 0]).unwrap();
        assert_eq!(sigma_bijection(&z).0, vec![0, 0, 0]);
        let j = OrderedIndex::new(vec![1, 1]).unwrap();
        assert_eq!(sigma_bijection(&j).0, vec![1, 0]);
        assert!(OrderedIndex::new(vec![2, 1]).is_err());
    }

    #[test]
    fn sigma_is_bijective() {
        for m in 1..=3 {
            for n in 0..=8 {
                let mut img: Vec<MultiIndex> = enumerate_gamma(m, n)
                    .unwrap()
                    .iter()
                    .map(sigma_bijection)
                    .collect();
                img.sort();
                img.dedup();
                assert_eq!(img, enumerate_lambda(m, n).unwrap(), "m={m} N={n}");
            }
        }
    }

    #[test]
    fn assignment_examples() {
        let a = interleaved_assignment(6, 1).unwrap();
        assert_eq!(a.tau, (0..=6).collect::<Vec<_>>());
        assert_eq!(a.block(0), 0..7);

        let a = interleaved_assignment(4, 2).unwrap();
        assert_eq!((a.q, a.l), (2, 1));
        assert_eq!(a.block(0), 0..3);
        assert_eq!(a.block(1), 3..5);
        assert_eq!(a.tau, vec![0, 2, 4, 1, 3]);

        assert!(interleaved_assignment(4, 6).is_err());
        assert!(interleaved_assignment(4, 0).is_err());
    }

    #[test]
    fn assignment_bound_and_permutation() {
        for p in 1..=8u64 {
            for n in (p - 1)..=200 {
                let a = interleaved_assignment(n, p).unwrap();
                let mut seen = vec![false; (n + 1) as usize];
                for &t in &a.tau {
                    assert!(!seen[t as usize]);
                    seen[t as usize] = true;
                }
                for j in 0..=n {
                    assert!(a.deviation(j) <= 2 * p * p, "N={n} p={p} j={j}");
                }
            }
        }
    }
}
