use num_bigint::BigUint;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exact::multinomial;
use crate::indices::{binomial, enumerate_lambda, MAX_DEGREE};

/// Largest degree accepted by the exact big-integer mode.
pub const EXACT_MODE_MAX_DEGREE: u64 = 200;
/// Largest `|Λ_{m,N}|` walked term by term for the restricted sum `R`.
pub const ENUMERATION_LIMIT: u128 = 50_000_000;

/// A lattice sum on the natural-log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSumResult {
    pub value: f64,
    pub term_count: u64,
}

fn check(m: usize, n: u64, r: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("dimension m must be positive"));
    }
    if n > MAX_DEGREE {
        return Err(Error::Capacity {
            what: "degree",
            requested: n,
            limit: MAX_DEGREE,
        });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    Ok(())
}

/// `log k!` for `k = 0..=n`, exact zeros at `k ≤ 1`.
pub(crate) fn ln_factorials(n: u64) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            if k <= 1 {
                0.0
            } else {
                ln_gamma(k as f64 + 1.0)
            }
        })
        .collect()
}

/// `Σ_{K ∈ Λ_{m,⌊αN⌋}} log[C(N,K) r^{2|K|}]`; `α = 1` gives `Q_{r,m}(N)`.
///
/// Terms are grouped by weight `w = |K|`: the `C(w+m−1, m−1)` indices of
/// weight `w` contribute `log N! − log(N−w)! + 2w log r` each, and
/// `Σ_{|K|=w} Σᵢ log kᵢ! = m Σ_k log k!·C(w−k+m−2, m−2)`.
pub fn lattice_sum_q(m: usize, n: u64, r: f64, alpha: f64) -> Result<LatticeSumResult> {
    check(m, n, r)?;
    let top = top_weight(n, alpha)?;
    let lf = ln_factorials(n);
    let log_r = r.ln();
    let mf = m as u64;
    let mut value = 0.0;
    for w in 0..=top {
        let count = binomial(w + mf - 1, mf - 1) as f64;
        let head = lf[n as usize] - lf[(n - w) as usize] + 2.0 * w as f64 * log_r;
        let tails = if m == 1 {
            lf[w as usize]
        } else {
            let mut s = 0.0;
            for k in 0..=w {
                s += lf[k as usize] * binomial(w - k + mf - 2, mf - 2) as f64;
            }
            mf as f64 * s
        };
        value += count * head - tails;
    }
    let term_count = binomial(top + mf, mf);
    Ok(LatticeSumResult {
        value,
        term_count: u64::try_from(term_count).unwrap_or(u64::MAX),
    })
}

fn top_weight(n: u64, alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("α = {alpha} outside (0, 1]")));
    }
    Ok(((alpha * n as f64).floor() as u64).min(n))
}

/// `R_{r,m}(N)`: the sum over `Λ_{m,N}(r)`, the indices with
/// `log C(N,K) + 2|K| log r ≥ 0`.
pub fn lattice_sum_r(m: usize, n: u64, r: f64) -> Result<LatticeSumResult> {
    check(m, n, r)?;
    if r >= 1.0 {
        // every term is ≥ 0
        return lattice_sum_q(m, n, r, 1.0);
    }
    let size = binomial(n + m as u64, m as u64);
    if size > ENUMERATION_LIMIT {
        return Err(Error::Capacity {
            what: "restricted lattice sum terms",
            requested: u64::try_from(size).unwrap_or(u64::MAX),
            limit: ENUMERATION_LIMIT as u64,
        });
    }
    let lf = ln_factorials(n);
    let log_r = r.ln();
    let mut acc = RAcc::default();
    walk(&lf, log_r, n, m, 0, 0.0, &mut acc);
    Ok(LatticeSumResult {
        value: acc.value,
        term_count: acc.count,
    })
}

#[derive(Default)]
struct RAcc {
    value: f64,
    count: u64,
}

/// Depth-first walk over the remaining `left` coordinates with `w` already used.
fn walk(lf: &[f64], log_r: f64, n: u64, left: usize, w: u64, tails: f64, acc: &mut RAcc) {
    if left == 0 {
        let t = lf[n as usize] - lf[(n - w) as usize] - tails + 2.0 * w as f64 * log_r;
        if t >= 0.0 {
            acc.value += t;
            acc.count += 1;
        }
        return;
    }
    for k in 0..=(n - w) {
        walk(lf, log_r, n, left - 1, w + k, tails + lf[k as usize], acc);
    }
}

/// Natural log of a positive big integer.
pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x
            .to_string()
            .parse::<f64>()
            .map(f64::ln)
            .unwrap_or(f64::NAN);
    }
    let shift = bits - 60;
    let top: BigUint = x >> shift;
    let lead: u64 = top.try_into().unwrap_or(u64::MAX);
    (lead as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

fn exact_terms(m: usize, n: u64, r: f64, alpha: f64) -> Result<Vec<f64>> {
    check(m, n, r)?;
    if n > EXACT_MODE_MAX_DEGREE {
        return Err(Error::Capacity {
            what: "exact-mode degree",
            requested: n,
            limit: EXACT_MODE_MAX_DEGREE,
        });
    }
    let top = top_weight(n, alpha)?;
    let log_r = r.ln();
    enumerate_lambda(m, top)?
        .iter()
        .map(|k| {
            let c = multinomial(n, k)?;
            let c = c.to_biguint().expect("multinomials are positive");
            Ok(ln_big(&c) + 2.0 * k.weight() as f64 * log_r)
        })
        .collect()
}

/// [`lattice_sum_q`] with each multinomial evaluated exactly, for `N ≤ 200`.
pub fn lattice_sum_q_exact(m: usize, n: u64, r: f64, alpha: f64) -> Result<LatticeSumResult> {
    let terms = exact_terms(m, n, r, alpha)?;
    Ok(LatticeSumResult {
        value: terms.iter().sum(),
        term_count: terms.len() as u64,
    })
}

/// [`lattice_sum_r`] with each multinomial evaluated exactly, for `N ≤ 200`.
pub fn lattice_sum_r_exact(m: usize, n: u64, r: f64) -> Result<LatticeSumResult> {
    let terms = exact_terms(m, n, r, 1.0)?;
    let kept: Vec<f64> = terms.into_iter().filter(|&t| t >= 0.0).collect();
    Ok(LatticeSumResult {
        value: kept.iter().sum(),
        term_count: kept.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let q = lattice_sum_q(1, 1, 1.0, 1.0).unwrap();
        assert_eq!(q.value, 0.0);
        assert_eq!(q.term_count, 2);
        let q = lattice_sum_q(1, 2, 2.0, 1.0).unwrap();
        assert!((q.value - 128f64.ln()).abs() < 1e-12);
        let r = lattice_sum_r(1, 2, 0.1).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.term_count, 1);
    }

    #[test]
    fn grouped_sum_matches_enumeration() {
        for m in 1..=4 {
            for n in [0u64, 1, 5, 13] {
                for r in [0.3, 1.0, 2.5] {
                    for alpha in [0.4, 1.0] {
                        let fast = lattice_sum_q(m, n, r, alpha).unwrap();
                        let slow = lattice_sum_q_exact(m, n, r, alpha).unwrap();
                        assert_eq!(fast.term_count, slow.term_count);
                        let tol = 1e-11 * (1.0 + slow.value.abs());
                        assert!((fast.value - slow.value).abs() < tol, "m={m} n={n} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn restricted_matches_exact_mode() {
        for m in 1..=3 {
            for n in [3u64, 10, 25] {
                for r in [0.2, 0.5, 0.9] {
                    let fast = lattice_sum_r(m, n, r).unwrap();
                    let slow = lattice_sum_r_exact(m, n, r).unwrap();
                    assert_eq!(fast.term_count, slow.term_count, "m={m} n={n} r={r}");
                    assert!((fast.value - slow.value).abs() < 1e-9 * (1.0 + slow.value));
                }
            }
        }
    }

    #[test]
    fn restricted_sum_dominates_full_sum() {
        for m in 1..=2 {
            for n in [5u64, 20, 60] {
                for r in [0.3, 0.7, 1.0, 1.5] {
                    let q = lattice_sum_q(m, n, r, 1.0).unwrap();
                    let rr = lattice_sum_r(m, n, r).unwrap();
                    if r >= 1.0 {
                        assert_eq!(rr, q);
                        assert_eq!(rr.term_count as u128, binomial(n + m as u64, m as u64));
                    } else {
                        assert!(rr.value > q.value, "m={m} n={n} r={r}");
                        assert!(rr.term_count < q.term_count);
                    }
                }
            }
        }
    }

    #[test]
    fn exact_mode_capacity() {
        assert!(matches!(
            lattice_sum_q_exact(1, 201, 1.0, 1.0),
            Err(Error::Capacity { .. })
        ));
        assert!(lattice_sum_q(0, 3, 1.0, 1.0).is_err());
        assert!(lattice_sum_q(1, 3, 0.0, 1.0).is_err());
        assert!(lattice_sum_q(1, 3, 1.0, 0.0).is_err());
    }

    #[test]
    fn ln_big_large_values() {
        let x = BigUint::from(3u32).pow(2000);
        assert!((ln_big(&x) - 2000.0 * 3f64.ln()).abs() < 1e-9);
    }
}
