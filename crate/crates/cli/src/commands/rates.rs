use clap::Args;
use hole_lab::rates::{
    beta_m, hole_rate, lattice_sum_q, lattice_sum_r, BetaReport, LatticeSumResult, RateReport,
};
use serde::Serialize;

use crate::config::{parse_f64, parse_u64, parse_usize, Echo, FileConfig};
use crate::record::ResultRecord;
use crate::{CliError, Common, Outcome};

/// Scheme agreement demanded of `β_m`.
pub const BETA_TOL: f64 = 1e-8;

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Truncation fraction for `Q_{r,m,α}(N)`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Degree at which to evaluate the lattice sums.
    #[arg(long = "lattice-n")]
    pub lattice_n: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeReport {
    pub n: u64,
    pub alpha: f64,
    pub q: LatticeSumResult,
    pub r: LatticeSumResult,
    /// `Q / N^{m+1}`.
    pub q_scaled: f64,
    /// `R / N^{m+1}`.
    pub r_scaled: f64,
    /// `Q_{r,m,α}(N)`, present when `α < 1`.
    pub q_alpha: Option<LatticeSumResult>,
    /// Asymptotic value of `R / N^{m+1}`.
    pub target: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatesResult {
    pub rates: RateReport,
    pub beta: BetaReport,
    pub lattice: Option<LatticeReport>,
}

pub fn run(args: &RatesArgs, file: &FileConfig) -> Result<Outcome, CliError> {
    let m = file.require(args.m, "m", parse_usize)?;
    let r = file.require(args.r, "r", parse_f64)?;
    let alpha = file.pick(args.alpha, "alpha", parse_f64)?.unwrap_or(1.0);
    let lattice_n = file.pick(args.lattice_n, "lattice_n", parse_u64)?;
    if m == 0 {
        return Err(CliError::Usage("dimension m must be positive".into()));
    }
    if !(r > 0.0) {
        return Err(CliError::Usage(format!("radius must be positive, got {r}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CliError::Usage(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }

    let rates = hole_rate(m, r)?;
    let beta = beta_m(m, BETA_TOL)?;
    let lattice = match lattice_n {
        Some(n) => {
            let q = lattice_sum_q(m, n, r, 1.0)?;
            let rr = lattice_sum_r(m, n, r)?;
            let npow = (n as f64).powi(m as i32 + 1);
            let q_alpha = if alpha < 1.0 {
                Some(lattice_sum_q(m, n, r, alpha)?)
            } else {
                None
            };
            Some(LatticeReport {
                n,
                alpha,
                q_scaled: q.value / npow,
                r_scaled: rr.value / npow,
                q,
                r: rr,
                q_alpha,
                target: rates.restricted_integral.unwrap_or(rates.upsilon_max),
            })
        }
        None => None,
    };

    let mut echo = Echo::new("rates");
    echo.set("m", m).set("r", r).set("alpha", alpha);
    if let Some(n) = lattice_n {
        echo.set("lattice_n", n);
    }
    let result = RatesResult {
        rates,
        beta,
        lattice,
    };
    let table = table(&result);
    let record = ResultRecord::new(
        echo.into_value(),
        serde_json::to_value(&result).expect("rates serialize"),
        None,
    );
    Ok(Outcome::ok(record, table))
}

fn table(res: &RatesResult) -> String {
    let r = &res.rates;
    let mut rows: Vec<(String, String)> = vec![
        ("m".into(), r.m.to_string()),
        ("r".into(), r.r.to_string()),
        ("alpha0".into(), format!("{:.12}", r.alpha0)),
        (
            "simplex integral".into(),
            format!("{:.12}", r.simplex_integral),
        ),
    ];
    if let Some(v) = r.restricted_integral {
        rows.push(("restricted integral".into(), format!("{v:.12}")));
    }
    rows.push(("upsilon max".into(), format!("{:.12}", r.upsilon_max)));
    rows.push((
        "upsilon max (closed)".into(),
        format!("{:.12}", r.upsilon_max_closed),
    ));
    if let Some(v) = r.one_d_rate {
        rows.push(("one-d rate".into(), format!("{v:.12}")));
    }
    rows.push((
        format!("beta_{}", res.beta.m),
        format!("{:.12}", res.beta.value),
    ));
    if let Some(l) = &res.lattice {
        rows.push((format!("Q({})", l.n), format!("{:.6}", l.q.value)));
        rows.push((format!("R({})", l.n), format!("{:.6}", l.r.value)));
        rows.push(("Q / N^(m+1)".into(), format!("{:.8}", l.q_scaled)));
        rows.push(("R / N^(m+1)".into(), format!("{:.8}", l.r_scaled)));
        rows.push(("R target".into(), format!("{:.8}", l.target)));
        if let Some(qa) = &l.q_alpha {
            rows.push((
                format!("Q_alpha({}), alpha={}", l.n, l.alpha),
                format!("{:.6}", qa.value),
            ));
        }
    }
    let width = rows
        .iter()
        .map(|(k, _)| k.chars().count())
        .max()
        .unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}
