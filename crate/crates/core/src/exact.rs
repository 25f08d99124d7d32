//! Exact integer arithmetic for the Vandermonde-type matrix `W_{m,N}(ξ)`:
//! its determinant, the product formula over pairwise differences, and the
//! leading-monomial coefficient.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::indices::{
    binomial, enumerate_gamma, enumerate_lambda, sigma_bijection, simplex_count, MultiIndex,
};

/// Default bound on the side length of `W_{m,N}` for exact determinants.
pub const DEFAULT_DET_LIMIT: u64 = 2000;

/// Largest side length for which the full permutation expansion is attempted.
pub const EXPANSION_LIMIT: u64 = 8;

/// Square matrix of exact integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl BigMatrix {
    pub fn zeros(dim: usize) -> Self {
        BigMatrix {
            dim,
            entries: vec![BigInt::zero(); dim * dim],
        }
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("matrix must be square"));
        }
        Ok(BigMatrix {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.dim {
            self.entries.swap(a * self.dim + j, b * self.dim + j);
        }
    }

    /// Fraction-free (Bareiss) elimination. Every intermediate value is an
    /// exact integer: each update is divided by the previous pivot, which
    /// divides it exactly.
    pub fn determinant(&self) -> BigInt {
        let n = self.dim;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            let pivot = a.get(k, k).clone();
            for i in k + 1..n {
                let lead = a.get(i, k).clone();
                for j in k + 1..n {
                    let v = (&pivot * a.get(i, j) - &lead * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
                a.set(i, k, BigInt::zero());
            }
            prev = pivot;
        }
        let d = a.get(n - 1, n - 1).clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }
}

/// Integer values `ξ_{i,j}`, one row of `N+1` values per axis `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct XiAssignment {
    values: Vec<Vec<i64>>,
}

impl XiAssignment {
    pub fn new(values: Vec<Vec<i64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("ξ needs at least one axis"));
        }
        let len = values[0].len();
        if len == 0 || values.iter().any(|v| v.len() != len) {
            return Err(Error::invalid(
                "every ξ axis needs the same number N+1 of values",
            ));
        }
        Ok(XiAssignment { values })
    }

    /// Per-axis distinct integers drawn from `-bound..=bound`.
    pub fn random_distinct<R: Rng + ?Sized>(
        m: usize,
        n: u64,
        bound: i64,
        rng: &mut R,
    ) -> Result<Self> {
        let pool: Vec<i64> = (-bound..=bound).collect();
        if (pool.len() as u64) < n + 1 {
            return Err(Error::invalid(format!(
                "cannot draw {} distinct values from [-{bound}, {bound}]",
                n + 1
            )));
        }
        let values = (0..m)
            .map(|_| {
                pool.choose_multiple(rng, (n + 1) as usize)
                    .copied()
                    .collect()
            })
            .collect();
        XiAssignment::new(values)
    }

    pub fn axes(&self) -> usize {
        self.values.len()
    }

    pub fn degree(&self) -> u64 {
        self.values[0].len() as u64 - 1
    }

    pub fn value(&self, axis: usize, j: usize) -> i64 {
        self.values[axis][j]
    }

    pub fn values(&self) -> &[Vec<i64>] {
        &self.values
    }

    fn check_shape(&self, m: usize, n: u64) -> Result<()> {
        if self.axes() != m || self.degree() != n {
            return Err(Error::invalid(format!(
                "ξ has shape ({}, {}), expected ({m}, {n})",
                self.axes(),
                self.degree()
            )));
        }
        Ok(())
    }
}

/// `N! / ((N−|K|)! k₁! ⋯ k_m!)`.
pub fn multinomial(n: u64, k: &MultiIndex) -> Result<BigInt> {
    let w = k.weight();
    if w > n {
        return Err(Error::invalid(format!("|K| = {w} exceeds N = {n}")));
    }
    // Product of binomials: C(N, k₁)·C(N−k₁, k₂)⋯
    let mut acc = BigInt::one();
    let mut rest = n;
    for &ki in k.entries() {
        acc *= big_binomial(rest, ki);
        rest -= ki;
    }
    Ok(acc)
}

pub(crate) fn big_binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn check_capacity(m: usize, n: u64, limit: u64, what: &'static str) -> Result<u64> {
    if m == 0 {
        return Err(Error::invalid("dimension m must be positive"));
    }
    // Guard against u128 overflow in simplex_count for absurd inputs.
    let dim = if n > 1 << 20 || m > 64 {
        u128::MAX
    } else {
        simplex_count(m, n)
    };
    if dim > limit as u128 {
        return Err(Error::Capacity {
            what,
            requested: dim.min(u64::MAX as u128) as u64,
            limit,
        });
    }
    Ok(dim as u64)
}

/// Builds `W_{m,N}(ξ)`: rows in `Γ_{m,N}` order, columns in `Λ_{m,N}` order,
/// entry `(J, K) = Π ξ_{i,jᵢ}^{kᵢ}`.
pub fn build_w(m: usize, n: u64, xi: &XiAssignment) -> Result<BigMatrix> {
    xi.check_shape(m, n)?;
    let rows = enumerate_gamma(m, n)?;
    let cols = enumerate_lambda(m, n)?;
    // powers[i][j][e] = ξ_{i,j}^e
    let powers: Vec<Vec<Vec<BigInt>>> = (0..m)
        .map(|i| {
            (0..=n as usize)
                .map(|j| {
                    let base = BigInt::from(xi.value(i, j));
                    let mut v = Vec::with_capacity(n as usize + 1);
                    let mut p = BigInt::one();
                    for _ in 0..=n {
                        v.push(p.clone());
                        p *= &base;
                    }
                    v
                })
                .collect()
        })
        .collect();
    let dim = rows.len();
    let mut w = BigMatrix::zeros(dim);
    for (r, jj) in rows.iter().enumerate() {
        for (c, kk) in cols.iter().enumerate() {
            let mut e = BigInt::one();
            for ((table, &j), &k) in powers.iter().zip(jj.entries()).zip(kk.entries()) {
                e *= &table[j as usize][k as usize];
            }
            w.set(r, c, e);
        }
    }
    Ok(w)
}

pub fn det_w(m: usize, n: u64, xi: &XiAssignment) -> Result<BigInt> {
    det_w_with_limit(m, n, xi, DEFAULT_DET_LIMIT)
}

pub fn det_w_with_limit(m: usize, n: u64, xi: &XiAssignment, limit: u64) -> Result<BigInt> {
    check_capacity(m, n, limit, "det W_{m,N}")?;
    Ok(build_w(m, n, xi)?.determinant())
}

/// Exponent of `(ξ_{i,j} − ξ_{i,k})` in the product formula, `axis = i` 1-based.
pub fn difference_exponent(m: usize, n: u64, axis: usize, j: u64, k: u64) -> u128 {
    let i = axis as u64;
    let m = m as u64;
    binomial(j + i - 1, i - 1) * binomial(n - k + m - i, m - i)
}

fn ser_big<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisDegree {
    pub axis: usize,
    /// `Σ_{j<k} e(i,j,k)`.
    pub product_degree: u128,
    /// `Σ_k k·C(N−k+m−1, m−1)`, the degree of `det W` in `ξ_i`.
    pub determinant_degree: u128,
    /// `binom(N+m, m+1)`.
    pub expected: u128,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetwReport {
    pub m: usize,
    pub n: u64,
    pub xi: XiAssignment,
    #[serde(serialize_with = "ser_big")]
    pub lhs: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub rhs: BigInt,
    /// `lhs / rhs` when that ratio is ±1, `0` when both vanish.
    pub sign: i8,
    pub equal: bool,
    pub degrees: Vec<AxisDegree>,
}

impl DetwReport {
    pub fn passed(&self) -> bool {
        self.equal && self.degrees.iter().all(|d| d.holds)
    }
}

/// Per-axis degree identity: both the product formula and the determinant
/// have degree `binom(N+m, m+1)` in each `ξ_i`.
pub fn axis_degrees(m: usize, n: u64) -> Vec<AxisDegree> {
    let expected = binomial(n + m as u64, m as u64 + 1);
    let determinant_degree: u128 = (1..=n)
        .map(|k| u128::from(k) * binomial(n - k + m as u64 - 1, m as u64 - 1))
        .sum();
    (1..=m)
        .map(|axis| {
            let mut product_degree = 0u128;
            for k in 1..=n {
                for j in 0..k {
                    product_degree += difference_exponent(m, n, axis, j, k);
                }
            }
            AxisDegree {
                axis,
                product_degree,
                determinant_degree,
                expected,
                holds: product_degree == expected && determinant_degree == expected,
            }
        })
        .collect()
}

/// Compares the exact determinant with the exact product
/// `Π_i Π_{j<k} (ξ_{i,j} − ξ_{i,k})^{e(i,j,k)}`.
pub fn verify_detw_product(m: usize, n: u64, xi: &XiAssignment) -> Result<DetwReport> {
    verify_detw_product_with_limit(m, n, xi, DEFAULT_DET_LIMIT)
}

pub fn verify_detw_product_with_limit(
    m: usize,
    n: u64,
    xi: &XiAssignment,
    limit: u64,
) -> Result<DetwReport> {
    let lhs = det_w_with_limit(m, n, xi, limit)?;
    let mut rhs = BigInt::one();
    for axis in 1..=m {
        for k in 1..=n {
            for j in 0..k {
                let e = difference_exponent(m, n, axis, j, k);
                let d =
                    BigInt::from(xi.value(axis - 1, j as usize) - xi.value(axis - 1, k as usize));
                let e = u32::try_from(e).map_err(|_| Error::Capacity {
                    what: "difference exponent",
                    requested: e.min(u64::MAX as u128) as u64,
                    limit: u32::MAX as u64,
                })?;
                rhs *= num_traits::pow::Pow::pow(&d, e);
            }
        }
    }
    let (sign, equal) = if lhs.is_zero() && rhs.is_zero() {
        (0, true)
    } else if lhs == rhs {
        (1, true)
    } else if lhs == -&rhs {
        (-1, true)
    } else {
        (0, false)
    };
    debug_assert!(!equal || lhs.abs() == rhs.abs());
    Ok(DetwReport {
        m,
        n,
        xi: xi.clone(),
        lhs,
        rhs,
        sign,
        equal,
        degrees: axis_degrees(m, n),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoefficientReport {
    pub m: usize,
    pub n: u64,
    /// Coefficient of `g_{m,N}` in the full expansion of `det W`.
    pub coefficient: i64,
    /// Number of bijections `Γ → Λ` whose monomial is `g_{m,N}`.
    pub contributing: usize,
    /// Whether the single contributing bijection is `J ↦ (j₁, j₂−j₁, …)`.
    pub matches_sigma: bool,
}

/// Exponent of `ξ_{i,k}` in the monomial `g_{m,N}`; zero for `k = 0`.
pub fn g_exponent(m: usize, n: u64, axis: usize, k: u64) -> u128 {
    if k == 0 {
        return 0;
    }
    let i = axis as u64;
    let m = m as u64;
    binomial(k + i - 1, i) * binomial(n - k + m - i, m - i)
}

/// Expands `det W_{m,N}` over all bijections `Γ_{m,N} → Λ_{m,N}` and extracts
/// the coefficient of `g_{m,N}`.
pub fn leading_coefficient_g(m: usize, n: u64) -> Result<CoefficientReport> {
    let dim = check_capacity(m, n, EXPANSION_LIMIT, "exhaustive det W expansion")? as usize;
    let rows = enumerate_gamma(m, n)?;
    let cols = enumerate_lambda(m, n)?;
    let width = n as usize + 1;

    let mut target = vec![0u64; m * width];
    for i in 0..m {
        for k in 0..=n {
            target[i * width + k as usize] = g_exponent(m, n, i + 1, k) as u64;
        }
    }
    let sigma: Vec<usize> = rows
        .iter()
        .map(|j| {
            let img = sigma_bijection(j);
            cols.iter().position(|k| *k == img).expect("σ lands in Λ")
        })
        .collect();

    let mut perm: Vec<usize> = (0..dim).collect();
    let mut coefficient = 0i64;
    let mut contributing = 0usize;
    let mut matches_sigma = true;
    let mut exps = vec![0u64; m * width];
    let mut visit = |perm: &[usize], sign: i64| {
        exps.iter_mut().for_each(|e| *e = 0);
        for (r, &c) in perm.iter().enumerate() {
            let jj = rows[r].entries();
            let kk = cols[c].entries();
            for i in 0..m {
                exps[i * width + jj[i] as usize] += kk[i];
            }
        }
        if exps == target {
            coefficient += sign;
            contributing += 1;
            if perm != sigma.as_slice() {
                matches_sigma = false;
            }
        }
    };
    heap_permutations(&mut perm, &mut visit);

    Ok(CoefficientReport {
        m,
        n,
        coefficient,
        contributing,
        matches_sigma: matches_sigma && contributing == 1,
    })
}

/// Heap's algorithm; successive permutations differ by one transposition,
/// so the sign alternates.
fn heap_permutations<F: FnMut(&[usize], i64)>(a: &mut [usize], visit: &mut F) {
    let n = a.len();
    let mut c = vec![0usize; n];
    let mut sign = 1i64;
    visit(a, sign);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            visit(a, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    /// Cofactor expansion along the first row; independent of Bareiss.
    fn cofactor_det(rows: &[Vec<BigInt>]) -> BigInt {
        let n = rows.len();
        if n == 1 {
            return rows[0][0].clone();
        }
        let mut acc = BigInt::zero();
        for c in 0..n {
            let minor: Vec<Vec<BigInt>> = rows[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != c)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let term = &rows[0][c] * cofactor_det(&minor);
            if c % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(
            multinomial(2, &MultiIndex::new(vec![1, 1])).unwrap(),
            big(2)
        );
        assert_eq!(multinomial(5, &MultiIndex::new(vec![2])).unwrap(), big(10));
        assert_eq!(multinomial(9, &MultiIndex::zero(3)).unwrap(), big(1));
        assert!(multinomial(2, &MultiIndex::new(vec![2, 1])).is_err());
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            for _ in 0..10 {
                let rows: Vec<Vec<BigInt>> = (0..n)
                    .map(|_| (0..n).map(|_| big(rng.gen_range(-5..=5))).collect())
                    .collect();
                let expected = cofactor_det(&rows);
                let m = BigMatrix::from_rows(rows).unwrap();
                assert_eq!(m.determinant(), expected);
            }
        }
    }

    #[test]
    fn one_dimensional_vandermonde() {
        let xi = XiAssignment::new(vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(det_w(1, 2, &xi).unwrap().abs(), big(2));
    }

    #[test]
    fn repeated_values_give_zero() {
        let xi = XiAssignment::new(vec![vec![3, -1, 4], vec![2, 5, 2]]).unwrap();
        assert!(det_w(2, 2, &xi).unwrap().is_zero());
        let r = verify_detw_product(2, 2, &xi).unwrap();
        assert!(r.equal);
        assert_eq!(r.sign, 0);
    }

    #[test]
    fn two_by_one_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a: Vec<i64> = (0..2).map(|_| rng.gen_range(-20..=20)).collect();
            let b: Vec<i64> = (0..2).map(|_| rng.gen_range(-20..=20)).collect();
            // rows (1, b_j2, a_j1) for J = (0,0), (0,1), (1,1)
            let rows = vec![
                vec![big(1), big(b[0]), big(a[0])],
                vec![big(1), big(b[1]), big(a[0])],
                vec![big(1), big(b[1]), big(a[1])],
            ];
            let direct = cofactor_det(&rows);
            let xi = XiAssignment::new(vec![a.clone(), b.clone()]).unwrap();
            let d = det_w(2, 1, &xi).unwrap();
            assert_eq!(d, direct);
            assert_eq!(d.abs(), big((a[0] - a[1]) * (b[0] - b[1])).abs());
        }
    }

    #[test]
    fn product_formula_small_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (m, n) in [(1, 4), (2, 3), (3, 2)] {
            for _ in 0..5 {
                let xi = XiAssignment::random_distinct(m, n, 9, &mut rng).unwrap();
                let r = verify_detw_product(m, n, &xi).unwrap();
                assert!(r.passed(), "m={m} N={n} {r:?}");
            }
        }
    }

    #[test]
    fn row_swap_flips_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let xi = XiAssignment::random_distinct(2, 3, 9, &mut rng).unwrap();
            let w = build_w(2, 3, &xi).unwrap();
            let d = w.determinant();
            let mut s = w.clone();
            let a = rng.gen_range(0..w.dim());
            let b = (a + 1 + rng.gen_range(0..w.dim() - 1)) % w.dim();
            s.swap_rows(a, b);
            assert_eq!(s.determinant(), -d);
        }
    }

    #[test]
    fn capacity_enforced() {
        let xi = XiAssignment::new(vec![vec![0; 4]; 9]).unwrap();
        assert!(matches!(
            det_w_with_limit(9, 3, &xi, 100),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            leading_coefficient_g(2, 3),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let xi = XiAssignment::new(vec![vec![0, 1, 2]]).unwrap();
        assert!(det_w(2, 2, &xi).is_err());
        assert!(det_w(1, 3, &xi).is_err());
    }

    #[test]
    fn leading_coefficient_examples() {
        let r = leading_coefficient_g(1, 2).unwrap();
        assert_eq!(r.coefficient, 1);
        let r = leading_coefficient_g(2, 1).unwrap();
        assert_eq!(r.coefficient, 1);
        assert!(r.matches_sigma);
        let r = leading_coefficient_g(2, 2).unwrap();
        assert_eq!(r.coefficient.abs(), 1);
        assert_eq!(r.contributing, 1);
        assert!(r.matches_sigma);
    }

    #[test]
    fn heap_visits_every_permutation_once() {
        let mut a: Vec<usize> = (0..5).collect();
        let mut seen = std::collections::HashSet::new();
        let mut sum = 0i64;
        heap_permutations(&mut a, &mut |p: &[usize], s| {
            // sign by inversion count
            let inv = (0..p.len())
                .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            assert_eq!(s, if inv % 2 == 0 { 1 } else { -1 });
            seen.insert(p.to_vec());
            sum += s;
        });
        assert_eq!(seen.len(), 120);
        assert_eq!(sum, 0);
    }
}
