use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, tanh_sinh, Quad, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentScheme {
    /// Gauss–Kronrod on `[0,¼] ∪ [¼,¾] ∪ [¾,1]` with `x = u²` (resp. `1 − u²`)
    /// near the endpoints.
    GaussKronrod,
    /// Tanh-sinh on `[0, 1]` with endpoint distances passed exactly.
    TanhSinh,
}

/// `log(2 sin πd)` for a distance `d ∈ (0, ½]` to the nearer endpoint.
#[inline]
fn log_two_sin(d: f64) -> f64 {
    (2.0 * (PI * d).sin()).ln()
}

/// `∫₀¹ xⁿ log(2 sin πx) dx`.
pub fn log_sine_moment(n: u32, scheme: MomentScheme, tol: f64) -> Result<Quad> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let ni = n as i32;
    match scheme {
        MomentScheme::GaussKronrod => {
            let t = Tolerance::abs(tol / 6.0);
            // x = u², dx = 2u du on [0, ¼]
            let left = integrate(
                |u: f64| {
                    if u == 0.0 {
                        return 0.0;
                    }
                    let x = u * u;
                    2.0 * u * x.powi(ni) * log_two_sin(x)
                },
                0.0,
                0.5,
                &[],
                t,
                2000,
            )?;
            let mid = integrate(
                |x: f64| x.powi(ni) * (2.0 * (PI * x).sin()).ln(),
                0.25,
                0.75,
                &[0.5],
                t,
                2000,
            )?;
            // x = 1 − u² on [¾, 1]
            let right = integrate(
                |u: f64| {
                    if u == 0.0 {
                        return 0.0;
                    }
                    let d = u * u;
                    2.0 * u * (1.0 - d).powi(ni) * log_two_sin(d)
                },
                0.0,
                0.5,
                &[],
                t,
                2000,
            )?;
            Ok(Quad {
                value: left.value + mid.value + right.value,
                error: left.error + mid.error + right.error,
                evaluations: left.evaluations + mid.evaluations + right.evaluations,
            })
        }
        MomentScheme::TanhSinh => tanh_sinh(
            |_x, da, db| {
                let d = da.min(db);
                if d <= 0.0 {
                    return 0.0;
                }
                da.powi(ni) * log_two_sin(d)
            },
            0.0,
            1.0,
            tol / 4.0,
            12,
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaReport {
    pub m: usize,
    pub value: f64,
    pub gauss_kronrod: f64,
    pub tanh_sinh: f64,
    pub difference: f64,
}

/// `β_m = (1/(m−1)!) ∫₀¹ x^m log(2 sin πx) dx`, evaluated by both schemes,
/// which must agree within `tol`.
pub fn beta_m(m: usize, tol: f64) -> Result<BetaReport> {
    if m == 0 {
        return Err(Error::invalid("β_m needs m ≥ 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let fact: f64 = (1..m).map(|k| k as f64).product();
    let inner = tol * fact * 0.1;
    let gk = log_sine_moment(m as u32, MomentScheme::GaussKronrod, inner)?.value / fact;
    let ts = log_sine_moment(m as u32, MomentScheme::TanhSinh, inner)?.value / fact;
    let difference = (gk - ts).abs();
    if difference > tol {
        return Err(Error::Verification(format!(
            "β_{m}: Gauss–Kronrod {gk} and tanh-sinh {ts} differ by {difference:e} > {tol:e}"
        )));
    }
    Ok(BetaReport {
        m,
        value: gk,
        gauss_kronrod: gk,
        tanh_sinh: ts,
        difference,
    })
}
