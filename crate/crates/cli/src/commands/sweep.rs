use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use clap::Args;
use hole_lab::montecarlo::{
    estimate_p, fit_points, merge_estimates, sweep_fit_synthetic, McEstimate, McOptions, SweepFit,
    SweepPoint, DEFAULT_GRID_RES,
};
use serde::Serialize;

use crate::chart::{self, Series};
use crate::commands::simulate::workers;
use crate::config::{
    parse_count, parse_f64, parse_inject, parse_n_list, parse_string, parse_u64, parse_usize, Echo,
    FileConfig,
};
use crate::record::{read_rows, CampaignRow, OutDir, ResultRecord};
use crate::{CliError, Common, Outcome};

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub k: Option<u64>,
    /// Degrees, comma-separated (`2,3,4,5`) or as a range (`2..=6`).
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long = "grid-res")]
    pub grid_res: Option<usize>,
    /// Fit a planted law `exp(-C*N^P)` instead of simulating.
    #[arg(long)]
    pub inject: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    /// Campaign CSV files to merge.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Keep only rows with this m.
    #[arg(long)]
    pub m: Option<usize>,
    /// Keep only rows with this radius.
    #[arg(long)]
    pub r: Option<f64>,
    /// Keep only rows with this k.
    #[arg(long)]
    pub k: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub estimates: Vec<McEstimate>,
    /// Absent when the fit was refused.
    pub fit: Option<SweepFit>,
    pub points: Vec<SweepPoint>,
    pub refused: Option<String>,
}

pub fn run(args: &SweepArgs, file: &FileConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let m = file.require(args.m, "m", parse_usize)?;
    let r = file.require(args.r, "r", parse_f64)?;
    let k = file.pick(args.k, "k", parse_u64)?.unwrap_or(0);
    let n_text = file.require(args.n.clone(), "n", parse_string)?;
    let n_list = parse_n_list(&n_text).map_err(CliError::Usage)?;
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage("N list must be strictly increasing".into()));
    }
    let inject = file.pick(args.inject.clone(), "inject", parse_string)?;
    let mut echo = Echo::new("sweep");
    echo.set("m", m)
        .set("r", r)
        .set("k", k)
        .set("n", n_list.clone());

    if let Some(text) = inject {
        let (c, p) = parse_inject(&text).map_err(CliError::Usage)?;
        echo.set("inject", text);
        let fit = sweep_fit_synthetic(m, r, k, &n_list, |n| (-c * (n as f64).powi(p)).exp())?;
        let result = SweepResult {
            estimates: Vec::new(),
            points: fit.points.clone(),
            fit: Some(fit),
            refused: None,
        };
        return Ok(finish(result, echo, None, m, "sweep"));
    }

    let trials = file.require(args.trials, "trials", parse_count)?;
    let seed = file.seed(args.seed)?;
    let grid_res = file
        .pick(args.grid_res, "grid_res", parse_usize)?
        .unwrap_or(DEFAULT_GRID_RES);
    let workers = workers(args.workers, file)?;
    if trials == 0 {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    echo.set("trials", trials).set("seed", seed);
    if m == 2 {
        echo.set("grid_res", grid_res);
    }
    if let Some(w) = workers {
        echo.set("workers", w);
    }
    let opts = McOptions {
        workers,
        trial_start: 0,
        grid_res,
    };
    let mut estimates = Vec::with_capacity(n_list.len());
    for &n in &n_list {
        let e = estimate_p(m, n, r, k, trials, seed, opts)?;
        out.append_campaign(&[CampaignRow::from(&e)])?;
        estimates.push(e);
    }
    let result = fit_estimates(m, r, k, estimates)?;
    Ok(finish(result, echo, Some(seed), m, "sweep"))
}

fn fit_estimates(
    m: usize,
    r: f64,
    k: u64,
    estimates: Vec<McEstimate>,
) -> Result<SweepResult, CliError> {
    let points: Vec<SweepPoint> = estimates
        .iter()
        .map(|e| SweepPoint::from_estimate(m, e))
        .collect();
    match fit_points(m, r, k, points.clone()) {
        Ok(fit) => Ok(SweepResult {
            estimates,
            points,
            fit: Some(fit),
            refused: None,
        }),
        Err(e @ hole_lab::Error::FitRefused { .. }) => Ok(SweepResult {
            estimates,
            points,
            fit: None,
            refused: Some(e.to_string()),
        }),
        Err(e) => Err(e.into()),
    }
}

fn finish(result: SweepResult, echo: Echo, seed: Option<u64>, m: usize, stem: &str) -> Outcome {
    let table = table(&result);
    let files = vec![
        (format!("{stem}.dat"), plot_data(&result, m)),
        (format!("{stem}.svg"), svg(&result, m)),
    ];
    let failure = result.refused.clone();
    let record = ResultRecord::new(
        echo.into_value(),
        serde_json::to_value(&result).expect("sweep serializes"),
        seed,
    );
    Outcome {
        record,
        table,
        files,
        failure,
    }
}

pub fn report(args: &ReportArgs, file: &FileConfig) -> Result<Outcome, CliError> {
    let want_m = file.pick(args.m, "m", parse_usize)?;
    let want_r = file.pick(args.r, "r", parse_f64)?;
    let want_k = file.pick(args.k, "k", parse_u64)?;

    let mut rows: Vec<CampaignRow> = Vec::new();
    for path in &args.files {
        rows.extend(read_rows(path)?);
    }
    rows.retain(|row| {
        want_m.is_none_or(|m| row.m == m)
            && want_r.is_none_or(|r| row.r == r)
            && want_k.is_none_or(|k| row.k == k)
    });
    let mut series: BTreeSet<(usize, u64, u64)> = BTreeSet::new();
    // Keyed by (m, r bits, k) then N; each cell merges trial ranges of one seed.
    let mut cells: BTreeMap<(usize, u64, u64, u64), Vec<McEstimate>> = BTreeMap::new();
    for row in &rows {
        series.insert((row.m, row.r.to_bits(), row.k));
        cells
            .entry((row.m, row.r.to_bits(), row.k, row.n))
            .or_default()
            .push(row.to_estimate()?);
    }
    if series.is_empty() {
        return Err(CliError::Usage("no campaign rows to report".into()));
    }
    if series.len() > 1 {
        let list: Vec<String> = series
            .iter()
            .map(|(m, r, k)| format!("(m={m}, r={}, k={k})", f64::from_bits(*r)))
            .collect();
        return Err(CliError::Usage(format!(
            "rows span several series {}; select one with --m/--r/--k",
            list.join(", ")
        )));
    }
    let (m, r_bits, k) = *series.iter().next().expect("one series");
    let r = f64::from_bits(r_bits);
    let mut estimates = Vec::with_capacity(cells.len());
    for parts in cells.values() {
        estimates.push(merge_estimates(parts)?);
    }
    let result = fit_estimates(m, r, k, estimates)?;

    let mut echo = Echo::new("report");
    echo.set(
        "files",
        args.files
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>(),
    );
    echo.set("m", m).set("r", r).set("k", k);
    let seeds: Vec<u64> = result.estimates.iter().map(|e| e.seed).collect();
    let seed = seeds
        .first()
        .copied()
        .filter(|s| seeds.iter().all(|x| x == s));
    Ok(finish(result, echo, seed, m, "report"))
}

fn table(res: &SweepResult) -> String {
    let mut s = format!(
        "{:>4} {:>12} {:>10} {:>13} {:>13} {:>13}\n",
        "N", "trials", "hits", "p_hat", "ci_low", "ci_high"
    );
    for p in &res.points {
        s.push_str(&format!(
            "{:>4} {:>12} {:>10} {:>13.6e} {:>13.6e} {:>13.6e}\n",
            p.n, p.trials, p.hits, p.p_hat, p.ci_low, p.ci_high
        ));
    }
    match &res.fit {
        Some(f) => {
            s.push_str(&format!(
                "slope {:.6}  intercept {:.6}  ({})\n",
                f.slope, f.intercept, f.weighting
            ));
            if let (Some(t), Some(ratio)) = (f.theory, f.ratio) {
                s.push_str(&format!("asymptotic constant {t:.6}  ratio {ratio:.4}\n"));
            }
            for w in &f.warnings {
                s.push_str(&format!("warning: {w}\n"));
            }
        }
        None => s.push_str(&format!(
            "fit refused: {}\n",
            res.refused.as_deref().unwrap_or("not enough points")
        )),
    }
    s
}

/// Whitespace-separated columns `N x y y_low y_high`, with `x = N^{m+1}` and
/// `y = −log p̂`; points without hits are listed in a comment only.
fn plot_data(res: &SweepResult, m: usize) -> String {
    let mut s = format!(
        "# x = N^{}, y = -log p_hat, band from the 95% Clopper-Pearson interval\n",
        m + 1
    );
    s.push_str("# N x y y_low y_high\n");
    for p in &res.points {
        if p.hits == 0 {
            s.push_str(&format!("# N={} skipped: no hits\n", p.n));
            continue;
        }
        s.push_str(&format!(
            "{} {} {} {} {}\n",
            p.n, p.x, p.y, p.y_low, p.y_high
        ));
    }
    if let Some(f) = &res.fit {
        s.push_str(&format!("# fit: y = {} * x + {}\n", f.slope, f.intercept));
    }
    s
}

fn svg(res: &SweepResult, m: usize) -> String {
    let points: Vec<(f64, f64, f64, f64)> = res
        .points
        .iter()
        .filter(|p| p.hits > 0)
        .map(|p| (p.x, p.y, p.y_low, p.y_high))
        .collect();
    let series = Series {
        title: format!("-log p_hat against N^{}", m + 1),
        x_label: format!("N^{}", m + 1),
        y_label: "-log p_hat".into(),
        points,
        line: res.fit.as_ref().map(|f| (f.slope, f.intercept)),
    };
    chart::render(&series)
}
