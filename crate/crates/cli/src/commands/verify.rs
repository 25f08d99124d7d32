use clap::Args;
use hole_lab::exact::{
    leading_coefficient_g, verify_detw_product_with_limit, XiAssignment, DEFAULT_DET_LIMIT,
    EXPANSION_LIMIT,
};
use hole_lab::indices::{
    binomial, enumerate_gamma, enumerate_lambda, gamma_slice_count, sigma_bijection, simplex_count,
};
use hole_lab::rates::log_det_sigma_1d;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_f64_list, parse_string, parse_u64, parse_usize, Echo, FileConfig};
use crate::record::ResultRecord;
use crate::{CliError, Common, Outcome};

/// Random ξ assignments per `(m, N)` instance of the determinant check.
pub const DEFAULT_SAMPLES: u64 = 20;
/// Degree used when only `--m` is given.
pub const DEFAULT_DEGREE: u64 = 6;
/// Relative tolerance of both `log det Σ` checks.
pub const DETSIGMA_TOL: f64 = 1e-6;
/// Largest `binom(N+m, m)` for which Λ and Γ are enumerated in full.
const ENUMERATION_CAP: u128 = 200_000;

const PARTITION_MAX_M: usize = 5;
const PARTITION_MAX_N: u64 = 30;
const DETW_GRID: &[(usize, u64)] = &[(1, 6), (2, 4), (3, 3)];
const DETSIGMA_DEGREES: &[u64] = &[10, 20, 30, 40, 50, 100, 200];
const DETSIGMA_RADII: &[f64] = &[0.5, 0.9];

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// indices | detw | coefficient | detsigma | all
    #[arg(long)]
    pub scope: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Random ξ assignments per determinant instance.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Largest matrix dimension for exact determinants.
    #[arg(long)]
    pub limit: Option<u64>,
    /// Comma-separated radii for the covariance check.
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scope {
    Indices,
    Detw,
    Coefficient,
    Detsigma,
}

impl Scope {
    fn name(self) -> &'static str {
        match self {
            Scope::Indices => "indices",
            Scope::Detw => "detw",
            Scope::Coefficient => "coefficient",
            Scope::Detsigma => "detsigma",
        }
    }
}

fn parse_scope(s: &str) -> Result<Vec<Scope>, CliError> {
    Ok(match s {
        "indices" => vec![Scope::Indices],
        "detw" => vec![Scope::Detw],
        "coefficient" => vec![Scope::Coefficient],
        "detsigma" => vec![Scope::Detsigma],
        "all" => vec![
            Scope::Indices,
            Scope::Detw,
            Scope::Coefficient,
            Scope::Detsigma,
        ],
        other => {
            return Err(CliError::Usage(format!(
                "unknown scope `{other}` (indices|detw|coefficient|detsigma|all)"
            )))
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Instance {
    pub scope: &'static str,
    pub params: Value,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checked: usize,
    pub failed: usize,
    pub instances: Vec<Instance>,
}

struct Plan {
    scopes: Vec<Scope>,
    m: Option<usize>,
    n: Option<u64>,
    samples: u64,
    limit: u64,
    rho: Vec<f64>,
    seed: u64,
}

impl Plan {
    /// `(m, N)` pairs of the determinant suite, capacity-checked up front.
    fn detw_pairs(&self) -> Result<Vec<(usize, u64)>, CliError> {
        let pairs: Vec<(usize, u64)> = match (self.m, self.n) {
            (None, None) => DETW_GRID
                .iter()
                .flat_map(|&(m, top)| (1..=top).map(move |n| (m, n)))
                .collect(),
            (m, n) => vec![(m.unwrap_or(1), n.unwrap_or(DEFAULT_DEGREE))],
        };
        for &(m, n) in &pairs {
            check_dim(m)?;
            let dim = simplex_count(m, n);
            if dim > self.limit as u128 {
                return Err(CliError::Usage(format!(
                    "capacity exceeded for det W_{{{m},{n}}}: dimension {dim}, limit {}",
                    self.limit
                )));
            }
        }
        Ok(pairs)
    }

    fn coefficient_pairs(&self) -> Result<Vec<(usize, u64)>, CliError> {
        let pairs: Vec<(usize, u64)> = match (self.m, self.n) {
            (None, None) => {
                let mut v = Vec::new();
                let mut m = 1;
                while simplex_count(m, 1) <= EXPANSION_LIMIT as u128 {
                    let mut n = 1;
                    while simplex_count(m, n) <= EXPANSION_LIMIT as u128 {
                        v.push((m, n));
                        n += 1;
                    }
                    m += 1;
                }
                v
            }
            (m, n) => vec![(m.unwrap_or(1), n.unwrap_or(DEFAULT_DEGREE))],
        };
        for &(m, n) in &pairs {
            check_dim(m)?;
            let dim = simplex_count(m, n);
            if dim > EXPANSION_LIMIT as u128 {
                return Err(CliError::Usage(format!(
                    "capacity exceeded for exhaustive expansion of det W_{{{m},{n}}}: dimension {dim}, limit {EXPANSION_LIMIT}"
                )));
            }
        }
        Ok(pairs)
    }

    fn index_pairs(&self) -> Result<Vec<(usize, u64)>, CliError> {
        let ms: Vec<usize> = match self.m {
            Some(m) => vec![m],
            None => (1..=PARTITION_MAX_M).collect(),
        };
        let ns: Vec<u64> = match self.n {
            Some(n) => vec![n],
            None => (0..=PARTITION_MAX_N).collect(),
        };
        for &m in &ms {
            check_dim(m)?;
        }
        Ok(ms
            .iter()
            .flat_map(|&m| ns.iter().map(move |&n| (m, n)))
            .collect())
    }

    fn detsigma_pairs(&self) -> Vec<(u64, f64)> {
        let ns: Vec<u64> = match self.n {
            Some(n) => vec![n],
            None => DETSIGMA_DEGREES.to_vec(),
        };
        ns.iter()
            .flat_map(|&n| self.rho.iter().map(move |&r| (n, r)))
            .collect()
    }
}

fn check_dim(m: usize) -> Result<(), CliError> {
    if m == 0 {
        return Err(CliError::Usage("dimension m must be positive".into()));
    }
    Ok(())
}

pub fn run(args: &VerifyArgs, file: &FileConfig) -> Result<Outcome, CliError> {
    let scope_name = file
        .pick(args.scope.clone(), "scope", parse_string)?
        .unwrap_or_else(|| "all".to_string());
    let limit = file
        .pick(args.limit, "limit", parse_u64)?
        .unwrap_or(DEFAULT_DET_LIMIT);
    if limit == 0 || limit > DEFAULT_DET_LIMIT {
        return Err(CliError::Usage(format!(
            "determinant limit must lie in 1..={DEFAULT_DET_LIMIT}, got {limit}"
        )));
    }
    let samples = file
        .pick(args.samples, "samples", parse_u64)?
        .unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(CliError::Usage("samples must be positive".into()));
    }
    let rho = match file.pick(args.rho.clone(), "rho", parse_string)? {
        Some(s) => parse_f64_list(&s).map_err(CliError::Usage)?,
        None => DETSIGMA_RADII.to_vec(),
    };
    if rho.iter().any(|r| !(*r > 0.0)) {
        return Err(CliError::Usage("radii must be positive".into()));
    }
    let plan = Plan {
        scopes: parse_scope(&scope_name)?,
        m: file.pick(args.m, "m", parse_usize)?,
        n: file.pick(args.n, "n", parse_u64)?,
        samples,
        limit,
        rho,
        seed: file.seed(args.seed)?,
    };

    // Validate every scope before running any of them.
    let mut work: Vec<(Scope, Vec<(usize, u64)>)> = Vec::new();
    for &s in &plan.scopes {
        let pairs = match s {
            Scope::Indices => plan.index_pairs()?,
            Scope::Detw => plan.detw_pairs()?,
            Scope::Coefficient => plan.coefficient_pairs()?,
            Scope::Detsigma => Vec::new(),
        };
        work.push((s, pairs));
    }

    let mut instances = Vec::new();
    for (s, pairs) in work {
        match s {
            Scope::Indices => {
                for (m, n) in pairs {
                    instances.push(check_indices(m, n)?);
                }
            }
            Scope::Detw => {
                let mut rng = ChaCha20Rng::seed_from_u64(plan.seed);
                for (m, n) in pairs {
                    for sample in 0..plan.samples {
                        instances.push(check_detw(m, n, sample, plan.limit, &mut rng)?);
                    }
                }
            }
            Scope::Coefficient => {
                for (m, n) in pairs {
                    instances.push(check_coefficient(m, n)?);
                }
            }
            Scope::Detsigma => {
                for (n, r) in plan.detsigma_pairs() {
                    instances.push(check_detsigma(n, r)?);
                }
            }
        }
    }

    let failed = instances.iter().filter(|i| !i.passed).count();
    let report = VerifyReport {
        passed: failed == 0,
        checked: instances.len(),
        failed,
        instances,
    };

    let mut echo = Echo::new("verify");
    echo.set("scope", scope_name)
        .set("samples", plan.samples)
        .set("limit", plan.limit)
        .set("rho", plan.rho.clone())
        .set("seed", plan.seed);
    if let Some(m) = plan.m {
        echo.set("m", m);
    }
    if let Some(n) = plan.n {
        echo.set("n", n);
    }

    let table = table(&report);
    let failure = (!report.passed).then(|| {
        let first = report
            .instances
            .iter()
            .find(|i| !i.passed)
            .expect("a failure");
        format!(
            "{} of {} instances failed; first: {} {}",
            report.failed, report.checked, first.scope, first.params
        )
    });
    let record = ResultRecord::new(
        echo.into_value(),
        serde_json::to_value(&report).expect("report serializes"),
        Some(plan.seed),
    );
    Ok(Outcome {
        record,
        table,
        files: Vec::new(),
        failure,
    })
}

fn check_indices(m: usize, n: u64) -> Result<Instance, CliError> {
    let total = binomial(n + m as u64, m as u64);
    let mut slices = Vec::with_capacity(m);
    let mut passed = true;
    for axis in 1..=m {
        let mut sum = 0u128;
        for k in 0..=n {
            sum += gamma_slice_count(m, n, axis, k)?;
        }
        passed &= sum == total;
        slices.push(json!({ "axis": axis, "sum": sum.to_string() }));
    }
    let mut detail = json!({ "binom": total.to_string(), "slice_sums": slices });
    if total <= ENUMERATION_CAP {
        let lambda = enumerate_lambda(m, n)?;
        let gamma = enumerate_gamma(m, n)?;
        let image: Vec<_> = gamma.iter().map(sigma_bijection).collect();
        let sizes = lambda.len() as u128 == total && gamma.len() as u128 == total;
        // Both lists are sorted and σ preserves order, so a bijection maps one onto the other.
        let bijective = image == lambda;
        passed &= sizes && bijective;
        detail["enumerated"] = json!({ "sizes_match": sizes, "sigma_bijective": bijective });
    }
    Ok(Instance {
        scope: "indices",
        params: json!({ "m": m, "n": n }),
        passed,
        detail,
    })
}

fn check_detw(
    m: usize,
    n: u64,
    sample: u64,
    limit: u64,
    rng: &mut ChaCha20Rng,
) -> Result<Instance, CliError> {
    let bound = 4 * (n as i64 + 1);
    let xi = XiAssignment::random_distinct(m, n, bound, rng)?;
    let rep = verify_detw_product_with_limit(m, n, &xi, limit)?;
    let passed = rep.passed();
    let detail = if passed {
        json!({
            "xi": rep.xi,
            "sign": rep.sign,
            "digits": rep.lhs.to_string().trim_start_matches('-').len(),
            "degrees": rep.degrees,
        })
    } else {
        serde_json::to_value(&rep).expect("report serializes")
    };
    Ok(Instance {
        scope: "detw",
        params: json!({ "m": m, "n": n, "sample": sample }),
        passed,
        detail,
    })
}

fn check_coefficient(m: usize, n: u64) -> Result<Instance, CliError> {
    let rep = leading_coefficient_g(m, n)?;
    Ok(Instance {
        scope: "coefficient",
        params: json!({ "m": m, "n": n }),
        passed: rep.coefficient.abs() == 1,
        detail: serde_json::to_value(&rep).expect("report serializes"),
    })
}

fn check_detsigma(n: u64, rho: f64) -> Result<Instance, CliError> {
    let rep = log_det_sigma_1d(n, rho)?;
    let np1 = (n + 1) as f64;
    let target = np1 * np1.ln();
    let identity_ok = rep.identity_residual.abs() <= DETSIGMA_TOL * target.abs().max(1.0);
    let matrix_ok = rep
        .via_matrix
        .map(|v| (v - rep.via_product).abs() <= DETSIGMA_TOL * rep.via_product.abs().max(1.0))
        .unwrap_or(true);
    Ok(Instance {
        scope: "detsigma",
        params: json!({ "n": n, "rho": rho }),
        passed: identity_ok && matrix_ok,
        detail: serde_json::to_value(&rep).expect("report serializes"),
    })
}

fn table(report: &VerifyReport) -> String {
    let mut out = String::new();
    for scope in [
        Scope::Indices,
        Scope::Detw,
        Scope::Coefficient,
        Scope::Detsigma,
    ] {
        let of: Vec<&Instance> = report
            .instances
            .iter()
            .filter(|i| i.scope == scope.name())
            .collect();
        if of.is_empty() {
            continue;
        }
        let bad = of.iter().filter(|i| !i.passed).count();
        out.push_str(&format!(
            "{:<12} {:>6} checked {:>4} failed\n",
            scope.name(),
            of.len(),
            bad
        ));
        for i in of.iter().filter(|i| !i.passed) {
            out.push_str(&format!("  FAIL {}\n", i.params));
        }
    }
    out.push_str(if report.passed {
        "all identities hold\n"
    } else {
        "verification FAILED\n"
    });
    out
}
