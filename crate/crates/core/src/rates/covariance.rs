use std::f64::consts::PI;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use serde::Serialize;

use super::lattice::lattice_sum_q;
use crate::error::{Error, Result};

/// Largest degree for which the covariance matrix is factorized directly.
pub const MATRIX_ROUTE_MAX_DEGREE: u64 = 40;

/// Working precision (bits) of the matrix route. At `N = 40` the covariance
/// matrix has condition number around `1e27`, far beyond `f64`.
const PRECISION: usize = 384;
const RM: RoundingMode = RoundingMode::ToEven;

/// `log det Σ` for the degree-`N` one-variable ensemble sampled at the scaled
/// roots of unity `ξ_j = ρ e^{2πij/(N+1)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogDetSigma {
    pub n: u64,
    pub rho: f64,
    /// `Σ_k log C(N,k) + 2Σ_{j<k} log|ξ_j − ξ_k|`, summed pair by pair.
    pub via_product: f64,
    /// Log-determinant of `((1 + ξ_i ξ̄_j)^N)` by a high-precision `LDLᴴ`
    /// factorization, present only for `N ≤ 40`.
    pub via_matrix: Option<f64>,
    /// `Q_{ρ,1}(N)`.
    pub q_value: f64,
    /// `via_product − Q_{ρ,1}(N) − (N+1) log(N+1)`.
    pub identity_residual: f64,
    pub notice: Option<String>,
}

pub fn log_det_sigma_1d(n: u64, rho: f64) -> Result<LogDetSigma> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!(
            "radius must be positive and finite, got {rho}"
        )));
    }
    let q_value = lattice_sum_q(1, n, rho, 1.0)?.value;
    let via_product = product_route(n, rho, q_value)?;
    let (via_matrix, notice) = if n <= MATRIX_ROUTE_MAX_DEGREE {
        (Some(matrix_route(n, rho)?), None)
    } else {
        (
            None,
            Some(format!(
                "matrix route skipped: N = {n} exceeds {MATRIX_ROUTE_MAX_DEGREE}"
            )),
        )
    };
    let np1 = (n + 1) as f64;
    Ok(LogDetSigma {
        n,
        rho,
        via_product,
        via_matrix,
        q_value,
        identity_residual: via_product - q_value - np1 * np1.ln(),
        notice,
    })
}

fn product_route(n: u64, rho: f64, q_value: f64) -> Result<f64> {
    // Σ_k log C(N,k) = Q_{1,1}(N); the ρ-dependence enters through the pairs.
    let binomials = q_value - (n * (n + 1)) as f64 * rho.ln();
    let np1 = (n + 1) as f64;
    let log_rho = rho.ln();
    let mut pairs = 0.0;
    for j in 0..=n {
        for k in (j + 1)..=n {
            let d = (k - j) as f64 / np1;
            // |ξ_j − ξ_k| = 2ρ sin(π(k−j)/(N+1))
            pairs += log_rho + (2.0 * (PI * d).sin()).ln();
        }
    }
    Ok(binomials + 2.0 * pairs)
}

#[derive(Clone)]
struct Cx {
    re: BigFloat,
    im: BigFloat,
}

impl Cx {
    fn sub(&self, o: &Cx) -> Cx {
        Cx {
            re: self.re.sub(&o.re, PRECISION, RM),
            im: self.im.sub(&o.im, PRECISION, RM),
        }
    }

    fn mul(&self, o: &Cx) -> Cx {
        let re = self.re.mul(&o.re, PRECISION, RM).sub(
            &self.im.mul(&o.im, PRECISION, RM),
            PRECISION,
            RM,
        );
        let im = self.re.mul(&o.im, PRECISION, RM).add(
            &self.im.mul(&o.re, PRECISION, RM),
            PRECISION,
            RM,
        );
        Cx { re, im }
    }

    fn conj(&self) -> Cx {
        Cx {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    fn scale(&self, s: &BigFloat) -> Cx {
        Cx {
            re: self.re.mul(s, PRECISION, RM),
            im: self.im.mul(s, PRECISION, RM),
        }
    }

    fn powu(&self, mut e: u64) -> Cx {
        let one = BigFloat::from_u64(1, PRECISION);
        let mut acc = Cx {
            re: one,
            im: BigFloat::from_u64(0, PRECISION),
        };
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

fn to_f64(x: &BigFloat, cc: &mut Consts) -> Result<f64> {
    let s = x
        .format(Radix::Dec, RM, cc)
        .map_err(|e| Error::Verification(format!("high-precision formatting failed: {e:?}")))?;
    s.parse::<f64>()
        .map_err(|e| Error::Verification(format!("cannot parse {s:?}: {e}")))
}

fn matrix_route(n: u64, rho: f64) -> Result<f64> {
    let mut cc = Consts::new().map_err(|e| Error::Verification(format!("{e:?}")))?;
    let dim = (n + 1) as usize;
    let pi = cc.pi(PRECISION, RM);
    let rho2 = BigFloat::from_f64(rho, PRECISION).powi(2, PRECISION, RM);
    let one = BigFloat::from_u64(1, PRECISION);
    // Σ_{ij} = (1 + ρ² e^{2πi(i−j)/(N+1)})^N depends only on (i − j) mod (N+1).
    let mut circulant = Vec::with_capacity(dim);
    for d in 0..dim {
        let theta = pi
            .mul(&BigFloat::from_u64(2 * d as u64, PRECISION), PRECISION, RM)
            .div(&BigFloat::from_u64(dim as u64, PRECISION), PRECISION, RM);
        let w = Cx {
            re: one.add(
                &rho2.mul(&theta.cos(PRECISION, RM, &mut cc), PRECISION, RM),
                PRECISION,
                RM,
            ),
            im: rho2.mul(&theta.sin(PRECISION, RM, &mut cc), PRECISION, RM),
        };
        circulant.push(w.powu(n));
    }
    let mut a: Vec<Vec<Cx>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| circulant[(i + dim - j) % dim].clone())
                .collect()
        })
        .collect();

    // In-place LDLᴴ on the lower triangle; a[i][k] holds L_ik·D_k for i > k.
    let mut log_det = 0.0;
    for k in 0..dim {
        let dk = a[k][k].re.clone();
        if !dk.is_positive() {
            return Err(Error::Verification(format!(
                "covariance matrix not positive definite at pivot {k}"
            )));
        }
        log_det += to_f64(&dk.ln(PRECISION, RM, &mut cc), &mut cc)?;
        let inv = one.div(&dk, PRECISION, RM);
        for i in (k + 1)..dim {
            let lik = a[i][k].scale(&inv);
            #[allow(clippy::needless_range_loop)]
            for j in (k + 1)..=i {
                // a_ij −= L_ik · conj(a_jk)
                let upd = lik.mul(&a[j][k].conj());
                a[i][j] = a[i][j].sub(&upd);
            }
        }
    }
    Ok(log_det)
}
