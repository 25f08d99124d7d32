use clap::Args;
use hole_lab::ensemble::{omega_probability, OmegaProbability};
use hole_lab::montecarlo::{estimate_p, McEstimate, McOptions, DEFAULT_GRID_RES};
use serde::Serialize;

use crate::config::{parse_count, parse_f64, parse_u64, parse_usize, Echo, FileConfig};
use crate::record::{CampaignRow, OutDir, ResultRecord};
use crate::{CliError, Common, Outcome};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Largest zero count that still counts as a hit.
    #[arg(long)]
    pub k: Option<u64>,
    /// Number of trials; `1e6` style is accepted.
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// First trial index, for resuming or splitting a campaign.
    #[arg(long = "trial-start")]
    pub trial_start: Option<u64>,
    /// Grid resolution of the polydisc detector (m = 2).
    #[arg(long = "grid-res")]
    pub grid_res: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateResult {
    pub estimate: McEstimate,
    /// Lower bound on the hole probability, for `m = 1, k = 0`.
    pub omega: Option<OmegaProbability>,
}

pub fn workers(flag: Option<usize>, file: &FileConfig) -> Result<Option<usize>, CliError> {
    let w = file.pick(flag, "workers", parse_usize)?;
    if w == Some(0) {
        return Err(CliError::Usage("workers must be positive".into()));
    }
    Ok(w)
}

pub fn run(args: &SimulateArgs, file: &FileConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let m = file.require(args.m, "m", parse_usize)?;
    let n = file.require(args.n, "n", parse_u64)?;
    let r = file.require(args.r, "r", parse_f64)?;
    let k = file.pick(args.k, "k", parse_u64)?.unwrap_or(0);
    let trials = file.require(args.trials, "trials", parse_count)?;
    let seed = file.seed(args.seed)?;
    let trial_start = file
        .pick(args.trial_start, "trial_start", parse_u64)?
        .unwrap_or(0);
    let grid_res = file
        .pick(args.grid_res, "grid_res", parse_usize)?
        .unwrap_or(DEFAULT_GRID_RES);
    let workers = workers(args.workers, file)?;
    if trials == 0 {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    if trial_start.checked_add(trials).is_none() {
        return Err(CliError::Usage("trial range overflows".into()));
    }

    let opts = McOptions {
        workers,
        trial_start,
        grid_res,
    };
    let estimate = estimate_p(m, n, r, k, trials, seed, opts)?;
    let omega = if m == 1 && k == 0 {
        Some(omega_probability(1, n, r)?)
    } else {
        None
    };
    out.append_campaign(&[CampaignRow::from(&estimate)])?;

    let mut echo = Echo::new("simulate");
    echo.set("m", m)
        .set("n", n)
        .set("r", r)
        .set("k", k)
        .set("trials", trials)
        .set("seed", seed)
        .set("trial_start", trial_start);
    if m == 2 {
        echo.set("grid_res", grid_res);
    }
    if let Some(w) = workers {
        echo.set("workers", w);
    }
    let table = table(&estimate, omega.as_ref());
    let result = SimulateResult { estimate, omega };
    let record = ResultRecord::new(
        echo.into_value(),
        serde_json::to_value(&result).expect("estimate serializes"),
        Some(seed),
    );
    Ok(Outcome::ok(record, table))
}

fn table(e: &McEstimate, omega: Option<&OmegaProbability>) -> String {
    let mut s = format!(
        "m={} N={} r={} k={}  trials={} hits={}\np_hat={:.6e}  95% CI [{:.6e}, {:.6e}]  boundary flags {:.3e}\n",
        e.m, e.n, e.r, e.k, e.trials, e.hits, e.p_hat, e.ci_low, e.ci_high, e.boundary_flag_rate
    );
    if let Some(v) = e.neg_log_over_npow {
        s.push_str(&format!("-log p_hat / N^(m+1) = {v:.6}\n"));
    }
    if let Some(o) = omega {
        s.push_str(&format!("omega lower bound = {:.6e}\n", o.value));
    }
    if let Some(note) = &e.note {
        s.push_str(&format!("note: {note}\n"));
    }
    s
}
