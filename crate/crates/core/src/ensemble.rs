//! The SU(m+1) Gaussian ensemble `s̃_N(z) = Σ_{K ∈ Λ_{m,N}} c_K √C(N,K) z^K`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indices::{binomial, enumerate_lambda, simplex_count, MultiIndex, MAX_DEGREE};
use crate::rates::lattice::ln_factorials;
use crate::rng::CoefficientStream;

/// Largest number of coefficients a single draw may hold.
pub const MAX_COEFFICIENTS: u128 = 1 << 26;

/// One draw of the ensemble. `coeffs` stores `c_K` in `Λ_{m,N}` order; the
/// weights `√C(N,K)` are applied at evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianPolynomial {
    pub m: usize,
    pub n: u64,
    pub coeffs: Vec<Complex64>,
    /// `(master_seed, trial)` for sampled draws.
    pub seed: Option<(u64, u64)>,
}

fn check_shape(m: usize, n: u64) -> Result<usize> {
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
    let count = simplex_count(m, n);
    if count > MAX_COEFFICIENTS {
        return Err(Error::Capacity {
            what: "coefficient count",
            requested: u64::try_from(count).unwrap_or(u64::MAX),
            limit: MAX_COEFFICIENTS as u64,
        });
    }
    Ok(count as usize)
}

impl GaussianPolynomial {
    /// A polynomial with explicit (unweighted) coefficients in `Λ_{m,N}` order.
    pub fn from_coefficients(m: usize, n: u64, coeffs: Vec<Complex64>) -> Result<Self> {
        let count = check_shape(m, n)?;
        if coeffs.len() != count {
            return Err(Error::invalid(format!(
                "expected {count} coefficients for (m, N) = ({m}, {n}), got {}",
                coeffs.len()
            )));
        }
        Ok(GaussianPolynomial {
            m,
            n,
            coeffs,
            seed: None,
        })
    }

    /// Builds from monomial-basis coefficients `a_k` of a one-variable
    /// polynomial by dividing out the weights: `c_k = a_k/√C(N,k)`.
    pub fn from_monomial_1d(a: &[Complex64]) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("need at least one coefficient"));
        }
        let n = (a.len() - 1) as u64;
        let w = log_weights(1, n)?;
        let coeffs = a.iter().zip(&w).map(|(c, lw)| c * (-lw).exp()).collect();
        Self::from_coefficients(1, n, coeffs)
    }

    /// Monomial-basis coefficients `c_k √C(N,k)` of a one-variable draw.
    pub fn weighted_1d(&self) -> Result<Vec<Complex64>> {
        if self.m != 1 {
            return Err(Error::invalid("weighted_1d needs m = 1"));
        }
        let w = log_weights(1, self.n)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&w)
            .map(|(c, lw)| c * lw.exp())
            .collect())
    }

    /// Coefficient-wise `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.m != other.m || self.n != other.n {
            return Err(Error::invalid("shapes differ"));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::from_coefficients(self.m, self.n, coeffs)
    }
}

/// `log √C(N,K)` for every `K ∈ Λ_{m,N}`, in order.
pub fn log_weights(m: usize, n: u64) -> Result<Vec<f64>> {
    check_shape(m, n)?;
    if m == 1 {
        // incremental ratios √(C(N,k)/C(N,k−1)) = √((N−k+1)/k)
        let mut out = Vec::with_capacity(n as usize + 1);
        let mut lw = 0.0;
        out.push(0.0);
        for k in 1..=n {
            lw += 0.5 * (((n - k + 1) as f64).ln() - (k as f64).ln());
            out.push(lw);
        }
        // make the symmetric tail exact mirror of the head
        for k in 0..=(n / 2) {
            out[(n - k) as usize] = out[k as usize];
        }
        return Ok(out);
    }
    let lf = ln_factorials(n);
    Ok(enumerate_lambda(m, n)?
        .iter()
        .map(|k| {
            let e = k.entries();
            let w = k.weight();
            0.5 * (lf[n as usize]
                - lf[(n - w) as usize]
                - e.iter().map(|&x| lf[x as usize]).sum::<f64>())
        })
        .collect())
}

/// Draw `(master_seed, trial)`; coefficient rank `i` is the `i`-th element of
/// `Λ_{m,N}`.
pub fn sample(m: usize, n: u64, master_seed: u64, trial: u64) -> Result<GaussianPolynomial> {
    let count = check_shape(m, n)?;
    let mut coeffs = Vec::with_capacity(count);
    sample_into(master_seed, trial, count, &mut coeffs);
    Ok(GaussianPolynomial {
        m,
        n,
        coeffs,
        seed: Some((master_seed, trial)),
    })
}

/// Fills `out` with the first `count` coefficients of a draw (allocation-free
/// path for campaigns).
pub(crate) fn sample_into(master_seed: u64, trial: u64, count: usize, out: &mut Vec<Complex64>) {
    out.clear();
    let mut stream = CoefficientStream::new(master_seed, trial);
    out.extend((0..count).map(|_| stream.next_gaussian()));
}

fn check_point(p: &GaussianPolynomial, z: &[Complex64]) -> Result<()> {
    if z.len() != p.m {
        return Err(Error::invalid(format!(
            "point has {} coordinates, expected {}",
            z.len(),
            p.m
        )));
    }
    if z.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
        return Err(Error::invalid("evaluation point must be finite"));
    }
    Ok(())
}

/// `s̃_N(z)`. May overflow to infinity for very large `N·log|z|`; use
/// [`evaluate_log`] there.
pub fn evaluate(p: &GaussianPolynomial, z: &[Complex64]) -> Result<Complex64> {
    let (log_mag, phase) = evaluate_log(p, z)?;
    if log_mag == f64::NEG_INFINITY {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(Complex64::from_polar(log_mag.exp(), phase))
}

/// `(log|s̃_N(z)|, arg s̃_N(z))`, with every term rescaled by the largest term
/// magnitude so nothing overflows.
pub fn evaluate_log(p: &GaussianPolynomial, z: &[Complex64]) -> Result<(f64, f64)> {
    check_point(p, z)?;
    let lw = log_weights(p.m, p.n)?;
    let log_abs: Vec<f64> = z.iter().map(|w| w.norm().ln()).collect();
    let unit: Vec<Complex64> = z
        .iter()
        .map(|w| {
            let r = w.norm();
            if r == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                w / r
            }
        })
        .collect();
    let lambda = enumerate_lambda(p.m, p.n)?;
    let term_log = |k: &MultiIndex, i: usize| -> f64 {
        let mut l = lw[i];
        for (axis, &e) in k.entries().iter().enumerate() {
            if e > 0 {
                l += e as f64 * log_abs[axis];
            }
        }
        l
    };
    let mut top = f64::NEG_INFINITY;
    for (i, k) in lambda.iter().enumerate() {
        if p.coeffs[i] != Complex64::new(0.0, 0.0) {
            top = top.max(term_log(k, i) + p.coeffs[i].norm().ln());
        }
    }
    if top == f64::NEG_INFINITY {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, k) in lambda.iter().enumerate() {
        let c = p.coeffs[i];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let l = term_log(k, i);
        if l == f64::NEG_INFINITY {
            continue;
        }
        let mut phase = Complex64::new(1.0, 0.0);
        for (axis, &e) in k.entries().iter().enumerate() {
            if e > 0 {
                phase *= unit[axis].powu(e as u32);
            }
        }
        acc += c * phase * (l - top).exp();
    }
    let mag = acc.norm();
    if mag == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    Ok((top + mag.ln(), acc.arg()))
}

/// Thresholds of the event `Ω_{r,m,N}`: `|c₀| ≥ √N` and `|c_K| ≤ t_K` for
/// `K ≠ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaSpec {
    pub m: usize,
    pub n: u64,
    pub r: f64,
    pub head_threshold: f64,
    /// `t_K` for the nonzero `K ∈ Λ_{m,N}`, in order.
    pub thresholds: Vec<f64>,
    /// Whether each of those `K` lies in `Λ_{m,N}(r)`.
    pub in_lambda_r: Vec<bool>,
}

impl OmegaSpec {
    pub fn new(m: usize, n: u64, r: f64) -> Result<Self> {
        check_shape(m, n)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!(
                "radius must be positive and finite, got {r}"
            )));
        }
        let lw = log_weights(m, n)?;
        let log_r = r.ln();
        let sqrt_n = (n as f64).sqrt();
        let lambda = enumerate_lambda(m, n)?;
        let mut thresholds = Vec::with_capacity(lambda.len().saturating_sub(1));
        let mut in_lambda_r = Vec::with_capacity(thresholds.capacity());
        for (i, k) in lambda.iter().enumerate().skip(1) {
            let w = k.weight();
            let count = binomial(w + m as u64 - 1, m as u64 - 1) as f64;
            // log[C(N,K) r^{2|K|}] = 2(lw + |K| log r)
            let half_log_term = lw[i] + w as f64 * log_r;
            let inside = half_log_term >= 0.0;
            let denom_log = (2.0 * sqrt_n * count).ln() + if inside { half_log_term } else { 0.0 };
            thresholds.push((-denom_log).exp());
            in_lambda_r.push(inside);
        }
        Ok(OmegaSpec {
            m,
            n,
            r,
            head_threshold: sqrt_n,
            thresholds,
            in_lambda_r,
        })
    }

    /// Whether the draw lies in `Ω`.
    pub fn contains(&self, p: &GaussianPolynomial) -> bool {
        p.m == self.m
            && p.n == self.n
            && p.coeffs[0].norm() >= self.head_threshold
            && p.coeffs[1..]
                .iter()
                .zip(&self.thresholds)
                .all(|(c, &t)| c.norm() <= t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaProbability {
    pub value: f64,
    pub log_value: f64,
    /// Number of off-head factors, `binom(N+m, m) − 1`.
    pub factor_count: u64,
}

/// `γ_N(Ω) = e^{−N} Π_{K≠0} (1 − e^{−t_K²})`.
pub fn omega_probability(m: usize, n: u64, r: f64) -> Result<OmegaProbability> {
    let spec = OmegaSpec::new(m, n, r)?;
    let mut log_value = -(n as f64);
    for &t in &spec.thresholds {
        log_value += (-(-t * t).exp_m1()).ln();
    }
    Ok(OmegaProbability {
        value: log_value.exp(),
        log_value,
        factor_count: spec.thresholds.len() as u64,
    })
}
