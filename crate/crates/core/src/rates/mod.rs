//! Deterministic rate constants: the functional `E_r` on the simplex, its
//! integrals, the optimal mass fraction `α₀`, the function `Υ(α)`, lattice
//! sums, the log-sine moments `β_m`, and the covariance log-determinant.

mod covariance;
pub(crate) mod lattice;
mod singular;

pub use covariance::{log_det_sigma_1d, LogDetSigma, MATRIX_ROUTE_MAX_DEGREE};
pub use lattice::{
    lattice_sum_q, lattice_sum_q_exact, lattice_sum_r, lattice_sum_r_exact, LatticeSumResult,
    EXACT_MODE_MAX_DEGREE,
};
pub use singular::{beta_m, log_sine_moment, BetaReport, MomentScheme};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Quad, Tolerance};

/// Slack allowed when checking membership in the standard simplex.
pub const SIMPLEX_SLACK: f64 = 1e-12;

/// A point of the standard simplex `Σ_m = {x ≥ 0, Σxᵢ ≤ 1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid(
                "simplex point needs at least one coordinate",
            ));
        }
        let s: f64 = coords.iter().sum();
        if coords.iter().any(|&x| !x.is_finite() || x < -SIMPLEX_SLACK) || s > 1.0 + SIMPLEX_SLACK {
            return Err(Error::invalid(format!(
                "{coords:?} lies outside the simplex"
            )));
        }
        Ok(SimplexPoint { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// `x log x` with `0 log 0 = 0`; tiny negative slack is clamped to zero.
#[inline]
pub(crate) fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `Σ_{k=2}^{m} 1/k` (zero for `m = 1`).
pub fn harmonic_tail(m: usize) -> f64 {
    (2..=m).map(|k| 1.0 / k as f64).sum()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    Ok(())
}

fn check_dim(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("dimension m must be positive"));
    }
    Ok(())
}

/// `E_r(x) = 2Σxᵢ log r − [Σxᵢ log xᵢ + (1−Σxᵢ) log(1−Σxᵢ)]`.
pub fn energy(m: usize, r: f64, x: &SimplexPoint) -> Result<f64> {
    check_radius(r)?;
    if x.dim() != m {
        return Err(Error::invalid(format!(
            "point has {} coordinates, expected {m}",
            x.dim()
        )));
    }
    Ok(energy_raw(r.ln(), x.coords()))
}

#[inline]
pub(crate) fn energy_raw(log_r: f64, xs: &[f64]) -> f64 {
    let s: f64 = xs.iter().sum();
    let ent: f64 = xs.iter().map(|&x| xlogx(x)).sum::<f64>() + xlogx(1.0 - s);
    2.0 * s * log_r - ent
}

/// `∫_{Σ_m} E_r = 2m log r/(m+1)! + (1/m!) Σ_{k=2}^{m+1} 1/k`.
pub fn simplex_integral_closed(m: usize, r: f64) -> Result<f64> {
    check_dim(m)?;
    check_radius(r)?;
    let tail: f64 = (2..=m + 1).map(|k| 1.0 / k as f64).sum();
    Ok(2.0 * m as f64 * r.ln() / factorial(m + 1) + tail / factorial(m))
}

/// Largest dimension handled by the iterated quadratures.
pub const MAX_QUADRATURE_DIM: usize = 3;

/// Iterated adaptive quadrature of `E_r` over `Σ_m`, `m ≤ 3`.
///
/// Each nested level integrates `x_i` over `[0, 1 − Σ_{j<i} x_j]`; inner
/// levels run at a tighter tolerance than the requested one.
pub fn simplex_integral_quadrature(m: usize, r: f64, tol: f64) -> Result<Quad> {
    check_dim(m)?;
    check_radius(r)?;
    if m > MAX_QUADRATURE_DIM {
        return Err(Error::Capacity {
            what: "simplex quadrature dimension",
            requested: m as u64,
            limit: MAX_QUADRATURE_DIM as u64,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let log_r = r.ln();
    let mut failed: Option<f64> = None;
    let q = nested_energy(m, log_r, 0, 0.0, 0.0, tol, &mut failed)?;
    if let Some(err) = failed {
        return Err(Error::NonConvergence {
            what: "simplex quadrature (inner level)",
            estimate: q.value,
            error: err,
        });
    }
    Ok(q)
}

fn nested_energy(
    m: usize,
    log_r: f64,
    depth: usize,
    s: f64,
    ent: f64,
    tol: f64,
    failed: &mut Option<f64>,
) -> Result<Quad> {
    let upper = (1.0 - s).max(0.0);
    if depth + 1 == m {
        // innermost: the full energy along the last coordinate
        return integrate(
            |t| {
                let s1 = s + t;
                2.0 * s1 * log_r - ent - xlogx(t) - xlogx(1.0 - s1)
            },
            0.0,
            upper,
            &[],
            Tolerance::abs(tol),
            4000,
        );
    }
    let inner_tol = tol * 1e-2;
    let mut inner_failed = None;
    let q = integrate(
        |t| match nested_energy(
            m,
            log_r,
            depth + 1,
            s + t,
            ent + xlogx(t),
            inner_tol,
            &mut inner_failed,
        ) {
            Ok(q) => q.value,
            Err(Error::NonConvergence {
                estimate, error, ..
            }) => {
                inner_failed = Some(inner_failed.unwrap_or(0.0f64).max(error));
                estimate
            }
            Err(_) => f64::NAN,
        },
        0.0,
        upper,
        &[],
        Tolerance::abs(tol),
        4000,
    );
    if let Some(e) = inner_failed {
        *failed = Some(failed.unwrap_or(0.0f64).max(e));
    }
    q
}

/// The nonzero root `α₀ ∈ (0, 1]` of `cα = α log α + (1−α) log(1−α)` with
/// `c = 2 log r + Σ_{k=2}^m 1/k`, or `1` when `c ≥ 0`.
///
/// For `c < 0` the function `f(α) = cα − α log α − (1−α) log(1−α)` is
/// positive near `0⁺` (the `−α log α` term dominates) and equals `c < 0` at
/// `α = 1`, and it is concave, so bisection on `[ε, 1−ε]` brackets the unique
/// interior root.
pub fn alpha0(m: usize, r: f64) -> Result<f64> {
    check_dim(m)?;
    check_radius(r)?;
    let c = 2.0 * r.ln() + harmonic_tail(m);
    if c >= 0.0 {
        return Ok(1.0);
    }
    let f = |a: f64| c * a - xlogx(a) - xlogx(1.0 - a);
    let eps = 1e-15;
    let (mut lo, mut hi) = (eps, 1.0 - eps);
    if f(hi) >= 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint with the smaller residual
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

/// Residual `cα − α log α − (1−α) log(1−α)` of the `α₀` equation.
pub fn alpha0_residual(m: usize, r: f64, alpha: f64) -> f64 {
    let c = 2.0 * r.ln() + harmonic_tail(m);
    c * alpha - xlogx(alpha) - xlogx(1.0 - alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Upsilon {
    pub value: f64,
    pub derivative: f64,
}

/// `Υ(α) = ∫_{x ≥ 0, Σxᵢ ≤ α} E_r`, from its factorial-moment expansion plus
/// the one-dimensional integral `∫₀^α (1−x) x^{m−1} log(1−x) dx`.
pub fn upsilon(m: usize, r: f64, alpha: f64) -> Result<Upsilon> {
    check_dim(m)?;
    check_radius(r)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("α = {alpha} outside (0, 1]")));
    }
    let mf = m as f64;
    let log_r = r.ln();
    let h_full: f64 = (2..=m + 1).map(|k| 1.0 / k as f64).sum();
    let moment = alpha.powi(m as i32 + 1) / factorial(m + 1);
    let tail = integrate(
        |x: f64| (1.0 - x) * x.powi(m as i32 - 1) * (-x).ln_1p(),
        0.0,
        alpha,
        &[],
        Tolerance {
            abs: 1e-15,
            rel: 1e-14,
        },
        2000,
    )?
    .value;
    let value =
        2.0 * mf * log_r * moment - mf * moment * (alpha.ln() - h_full) - tail / factorial(m - 1);
    let c = 2.0 * log_r + harmonic_tail(m);
    let derivative = alpha.powi(m as i32 - 1) / factorial(m - 1)
        * (c * alpha - xlogx(alpha) - xlogx(1.0 - alpha));
    Ok(Upsilon { value, derivative })
}

/// `max_{(0,1]} Υ` in closed form. When `α₀ < 1` this is
/// `[(1−α₀^m) log(1−α₀) + Σ_{k=1}^m α₀^k/k]/(m+1)!`; when `α₀ = 1` the maximum
/// is `Υ(1) = ∫_{Σ_m} E_r`.
pub fn upsilon_max_closed(m: usize, r: f64) -> Result<f64> {
    let a = alpha0(m, r)?;
    if a >= 1.0 {
        return simplex_integral_closed(m, r);
    }
    let series: f64 = (1..=m).map(|k| a.powi(k as i32) / k as f64).sum();
    Ok(((1.0 - a.powi(m as i32)) * (-a).ln_1p() + series) / factorial(m + 1))
}

/// `½α₀(2 log r + 1 − log α₀)`, the disc (`m = 1`) decay constant.
pub fn one_d_rate(r: f64) -> Result<f64> {
    let a = alpha0(1, r)?;
    Ok(0.5 * a * (2.0 * r.ln() + 1.0 - a.ln()))
}

/// `log|φ′(0)| + ½`, the `N²` coefficient of the upper bound over a Jordan
/// domain with Riemann map `φ`.
pub fn general_domain_upper(phi_prime_abs: f64) -> Result<f64> {
    if !(phi_prime_abs > 0.0 && phi_prime_abs.is_finite()) {
        return Err(Error::invalid("|φ′(0)| must be positive and finite"));
    }
    Ok(phi_prime_abs.ln() + 0.5)
}

/// Every asymptotic constant for one `(m, r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub m: usize,
    pub r: f64,
    pub alpha0: f64,
    /// `∫_{Σ_m} E_r`.
    pub simplex_integral: f64,
    /// `∫_{E_r ≥ 0} E_r`, the lower-bound constant; absent for `m > 3`.
    pub restricted_integral: Option<f64>,
    /// `Υ(α₀)`, the upper-bound constant.
    pub upsilon_max: f64,
    /// `max Υ` from its closed form.
    pub upsilon_max_closed: f64,
    /// `½α₀(2 log r + 1 − log α₀)` when `m = 1`.
    pub one_d_rate: Option<f64>,
}

/// Agreement required between the quadrature and closed-form routes for `m = 1`.
pub const ONE_D_AGREEMENT: f64 = 1e-9;

pub fn hole_rate(m: usize, r: f64) -> Result<RateReport> {
    check_dim(m)?;
    check_radius(r)?;
    let a0 = alpha0(m, r)?;
    let simplex_integral = simplex_integral_closed(m, r)?;
    let upsilon_max = upsilon(m, r, a0)?.value;
    let upsilon_closed = upsilon_max_closed(m, r)?;
    let restricted_integral = match m {
        1 => Some(restricted_integral_1d(r, a0)?.value),
        2 | 3 => Some(restricted_integral_region(m, r, 1e-10)?.value),
        _ => None,
    };
    let one_d = if m == 1 {
        let v = one_d_rate(r)?;
        for (name, got) in [
            ("∫_{E≥0} E_r", restricted_integral.unwrap_or(v)),
            ("Υ(α₀)", upsilon_max),
        ] {
            if (got - v).abs() > ONE_D_AGREEMENT {
                return Err(Error::Verification(format!(
                    "{name} = {got} disagrees with ½α₀(2log r+1−log α₀) = {v} at r = {r}"
                )));
            }
        }
        Some(v)
    } else {
        None
    };
    Ok(RateReport {
        m,
        r,
        alpha0: a0,
        simplex_integral,
        restricted_integral,
        upsilon_max,
        upsilon_max_closed: upsilon_closed,
        one_d_rate: one_d,
    })
}

/// `∫₀^{α₀} E_r`: for `m = 1`, `E_r ≥ 0` exactly on `[0, α₀]`.
fn restricted_integral_1d(r: f64, a0: f64) -> Result<Quad> {
    let log_r = r.ln();
    integrate(
        |x| 2.0 * x * log_r - xlogx(x) - xlogx(1.0 - x),
        0.0,
        a0,
        &[],
        Tolerance::abs(1e-13),
        2000,
    )
}

/// `∫_{x ∈ Σ_m, E_r(x) ≥ 0} E_r` for `m ∈ {1, 2, 3}`.
///
/// `E_r` is concave, so along the innermost coordinate `{E_r ≥ 0}` is an
/// interval around the line maximiser `t* = L r²/(1 + r²)`; its ends are found
/// by bisection and `E_r` is integrated over that interval only.
pub fn restricted_integral_region(m: usize, r: f64, tol: f64) -> Result<Quad> {
    check_dim(m)?;
    check_radius(r)?;
    if m > MAX_QUADRATURE_DIM {
        return Err(Error::Capacity {
            what: "region quadrature dimension",
            requested: m as u64,
            limit: MAX_QUADRATURE_DIM as u64,
        });
    }
    let log_r = r.ln();
    let mut failed = None;
    let q = nested_positive(m, log_r, r * r, 0, 0.0, 0.0, tol, &mut failed)?;
    if let Some(err) = failed {
        return Err(Error::NonConvergence {
            what: "region quadrature (inner level)",
            estimate: q.value,
            error: err,
        });
    }
    Ok(q)
}

#[allow(clippy::too_many_arguments)]
fn nested_positive(
    m: usize,
    log_r: f64,
    r2: f64,
    depth: usize,
    s: f64,
    ent: f64,
    tol: f64,
    failed: &mut Option<f64>,
) -> Result<Quad> {
    let len = (1.0 - s).max(0.0);
    if depth + 1 == m {
        let g = |t: f64| {
            let s1 = s + t;
            2.0 * s1 * log_r - ent - xlogx(t) - xlogx(1.0 - s1)
        };
        let peak = len * r2 / (1.0 + r2);
        if g(peak) <= 0.0 || len == 0.0 {
            return Ok(Quad {
                value: 0.0,
                error: 0.0,
                evaluations: 1,
            });
        }
        let lo = if g(0.0) >= 0.0 {
            0.0
        } else {
            crossing(&g, 0.0, peak)
        };
        let hi = if g(len) >= 0.0 {
            len
        } else {
            crossing(&g, len, peak)
        };
        return integrate(g, lo, hi, &[], Tolerance::abs(tol), 4000);
    }
    let inner_tol = tol * 1e-2;
    let mut inner_failed = None;
    let q = integrate(
        |t| match nested_positive(
            m,
            log_r,
            r2,
            depth + 1,
            s + t,
            ent + xlogx(t),
            inner_tol,
            &mut inner_failed,
        ) {
            Ok(q) => q.value,
            Err(Error::NonConvergence {
                estimate, error, ..
            }) => {
                inner_failed = Some(inner_failed.unwrap_or(0.0f64).max(error));
                estimate
            }
            Err(_) => f64::NAN,
        },
        0.0,
        len,
        &[],
        Tolerance::abs(tol),
        4000,
    );
    if let Some(e) = inner_failed {
        *failed = Some(failed.unwrap_or(0.0f64).max(e));
    }
    q
}

/// Bisection for the sign change of `g` between `neg` (g < 0) and `pos` (g ≥ 0).
fn crossing<G: Fn(f64) -> f64>(g: &G, mut neg: f64, mut pos: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (neg + pos);
        if mid == neg || mid == pos {
            break;
        }
        if g(mid) >= 0.0 {
            pos = mid;
        } else {
            neg = mid;
        }
    }
    pos
}
