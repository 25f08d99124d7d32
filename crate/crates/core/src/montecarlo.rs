//! Monte Carlo estimation of `P_{k,1}(r,N)` and `P_{0,2}(r,N)`, exact binomial
//! intervals, decay-rate fits and the analytic lower-bound check.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::ensemble::{log_weights, omega_probability, sample, OmegaProbability};
use crate::error::{Error, Result};
use crate::indices::simplex_count;
use crate::rates::{hole_rate, lattice_sum_q, lattice_sum_r};
use crate::rng::CoefficientStream;
use crate::zeros::{count_moduli, schur_cohn_band, Detector2, RootSolver, DEFAULT_BOUNDARY_TOL};

/// Trials handled by one unit of parallel work.
const CHUNK: u64 = 8192;
/// Default grid resolution of the two-variable detector.
pub const DEFAULT_GRID_RES: usize = 16;
/// Confidence level of every reported interval.
pub const CONFIDENCE: f64 = 0.95;

/// Knobs that never change results except through `trial_start`/`grid_res`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    /// Index of the first trial, for resumed or split campaigns.
    pub trial_start: u64,
    /// Grid resolution of the `m = 2` detector.
    pub grid_res: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            workers: None,
            trial_start: 0,
            grid_res: DEFAULT_GRID_RES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub m: usize,
    pub n: u64,
    pub r: f64,
    pub k: u64,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `−log p̂ / N^{m+1}` when `hits > 0`.
    pub neg_log_over_npow: Option<f64>,
    /// Fraction of trials with a root within the boundary tolerance of `|z| = r`.
    pub boundary_flag_rate: f64,
    pub seed: u64,
    pub trial_start: u64,
    /// Caveat attached to detector-based estimates.
    pub note: Option<String>,
}

impl McEstimate {
    pub fn from_counts(
        (m, n, r, k): (usize, u64, f64, u64),
        trials: u64,
        hits: u64,
        flagged: u64,
        seed: u64,
        trial_start: u64,
    ) -> Result<Self> {
        let (ci_low, ci_high) = clopper_pearson(hits, trials, CONFIDENCE)?;
        let p_hat = hits as f64 / trials as f64;
        let npow = (n as f64).powi(m as i32 + 1);
        Ok(McEstimate {
            m,
            n,
            r,
            k,
            trials,
            hits,
            p_hat,
            ci_low,
            ci_high,
            neg_log_over_npow: (hits > 0 && n > 0).then(|| -p_hat.ln() / npow),
            boundary_flag_rate: flagged as f64 / trials as f64,
            seed,
            trial_start,
            note: None,
        })
    }
}

/// Exact (Clopper–Pearson) two-sided interval for `hits` successes in
/// `trials`, by bisection on the regularized incomplete beta function.
pub fn clopper_pearson(hits: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    if hits > trials {
        return Err(Error::invalid(format!(
            "hits {hits} exceed trials {trials}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("confidence level must lie in (0, 1)"));
    }
    let tail = 0.5 * (1.0 - level);
    let (h, t) = (hits as f64, trials as f64);
    // lower: P(X ≥ h | p) = I_p(h, t−h+1) = tail
    let low = if hits == 0 {
        0.0
    } else {
        invert_increasing(|p| beta_reg(h, t - h + 1.0, p), tail)
    };
    // upper: P(X ≤ h | p) = 1 − I_p(h+1, t−h) = tail
    let high = if hits == trials {
        1.0
    } else {
        invert_increasing(|p| beta_reg(h + 1.0, t - h, p), 1.0 - tail)
    };
    Ok((low, high))
}

/// Solves `g(p) = target` for increasing `g` on `[0, 1]`, bisecting in a
/// log-spaced then linear bracket so tiny probabilities keep full precision.
fn invert_increasing<G: Fn(f64) -> f64>(g: G, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..2000 {
        let mid = if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else if lo == 0.0 && hi > 1e-300 {
            hi * 1e-3
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn check_campaign(m: usize, ks: &[u64], radii: &[f64], trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    if radii.is_empty() || ks.is_empty() {
        return Err(Error::invalid("need at least one radius and one k"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::invalid(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    match m {
        1 => Ok(()),
        2 if ks.iter().all(|&k| k == 0) => Ok(()),
        2 => Err(Error::invalid("m = 2 supports only k = 0 (hole detection)")),
        _ => Err(Error::invalid(format!(
            "Monte Carlo supports m ∈ {{1, 2}}, got {m}"
        ))),
    }
}

/// Per-chunk tallies: `hits[ri][ki]` and `flags[ri]`.
#[derive(Clone)]
struct Tally {
    hits: Vec<Vec<u64>>,
    flags: Vec<u64>,
}

impl Tally {
    fn new(nr: usize, nk: usize) -> Self {
        Tally {
            hits: vec![vec![0; nk]; nr],
            flags: vec![0; nr],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (x, y) in self.flags.iter_mut().zip(&other.flags) {
            *x += y;
        }
        self
    }
}

/// Runs one paired campaign: every trial's draw is scored against every
/// `(r, k)`, so comparisons across radii and zero allowances use common
/// random numbers. Results are listed radius-major.
#[allow(clippy::too_many_arguments)]
pub fn estimate_grid(
    m: usize,
    n: u64,
    radii: &[f64],
    ks: &[u64],
    trials: u64,
    master_seed: u64,
    opts: McOptions,
) -> Result<Vec<McEstimate>> {
    check_campaign(m, ks, radii, trials)?;
    let count = simplex_count(m, n) as usize;
    let weights: Vec<f64> = log_weights(m, n)?.iter().map(|l| l.exp()).collect();
    if m == 2 && opts.grid_res < 8 {
        return Err(Error::invalid("grid resolution must be ≥ 8"));
    }
    let start = opts.trial_start;
    let chunks: Vec<(u64, u64)> = (0..trials.div_ceil(CHUNK))
        .map(|c| {
            let lo = start + c * CHUNK;
            (lo, (lo + CHUNK).min(start + trials))
        })
        .collect();
    let run_chunk = |&(lo, hi): &(u64, u64)| -> Result<Tally> {
        let mut tally = Tally::new(radii.len(), ks.len());
        let mut solver = RootSolver::new();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); count];
        let mut moduli: Vec<f64> = Vec::with_capacity(count);
        for trial in lo..hi {
            let mut stream = CoefficientStream::new(master_seed, trial);
            for (c, w) in coeffs.iter_mut().zip(&weights) {
                *c = stream.next_gaussian() * *w;
            }
            if m == 1 {
                if coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                    continue;
                }
                let mut have_roots = false;
                for (ri, &r) in radii.iter().enumerate() {
                    let tol = DEFAULT_BOUNDARY_TOL * r;
                    let zc = match schur_cohn_band(&coeffs, r, tol) {
                        Some(zc) => zc,
                        None => {
                            if !have_roots {
                                moduli.clear();
                                if let Some(roots) = solver.solve(&coeffs) {
                                    moduli.extend(roots.iter().map(|z| z.norm()));
                                }
                                have_roots = true;
                            }
                            count_moduli(moduli.iter().copied(), r, tol)
                        }
                    };
                    tally.flags[ri] += (zc.boundary_flags > 0) as u64;
                    for (ki, &k) in ks.iter().enumerate() {
                        tally.hits[ri][ki] += (zc.inside <= k) as u64;
                    }
                }
            } else {
                let p = sample(2, n, master_seed, trial)?;
                let mut det = Detector2::new(&p)?;
                for (ri, &r) in radii.iter().enumerate() {
                    let found = det.detect(r, opts.grid_res);
                    tally.hits[ri][0] += (!found.has_zero) as u64;
                }
            }
        }
        Ok(tally)
    };
    let reduce = |parts: Vec<Result<Tally>>| -> Result<Tally> {
        let mut total = Tally::new(radii.len(), ks.len());
        for p in parts {
            total = total.merge(p?);
        }
        Ok(total)
    };
    let tally = match opts.workers {
        Some(1) => reduce(chunks.iter().map(run_chunk).collect())?,
        workers => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(w) = workers {
                if w == 0 {
                    return Err(Error::invalid("worker count must be positive"));
                }
                builder = builder.num_threads(w);
            }
            let pool = builder
                .build()
                .map_err(|e| Error::invalid(format!("cannot start workers: {e}")))?;
            // collect keeps chunk order, so the reduction order is fixed
            reduce(pool.install(|| chunks.par_iter().map(run_chunk).collect()))?
        }
    };
    let mut out = Vec::with_capacity(radii.len() * ks.len());
    for (ri, &r) in radii.iter().enumerate() {
        for (ki, &k) in ks.iter().enumerate() {
            let mut est = McEstimate::from_counts(
                (m, n, r, k),
                trials,
                tally.hits[ri][ki],
                tally.flags[ri],
                master_seed,
                start,
            )?;
            if m == 2 {
                est.note = Some(format!("upper-biased, resolution {}", opts.grid_res));
            }
            out.push(est);
        }
    }
    Ok(out)
}

/// `P̂{n(r,N) ≤ k}` (`m = 1`) or `P̂{no zero in D̄(0,r)²}` (`m = 2`, `k = 0`).
pub fn estimate_p(
    m: usize,
    n: u64,
    r: f64,
    k: u64,
    trials: u64,
    master_seed: u64,
    opts: McOptions,
) -> Result<McEstimate> {
    Ok(estimate_grid(m, n, &[r], &[k], trials, master_seed, opts)?.remove(0))
}

/// Pools estimates of the same `(m, N, r, k, seed)` over disjoint trial ranges.
pub fn merge_estimates(parts: &[McEstimate]) -> Result<McEstimate> {
    let first = parts
        .first()
        .ok_or_else(|| Error::invalid("nothing to merge"))?;
    let mut ranges: Vec<(u64, u64)> = Vec::with_capacity(parts.len());
    let (mut trials, mut hits, mut flagged) = (0u64, 0u64, 0.0f64);
    for p in parts {
        if (p.m, p.n, p.k, p.seed) != (first.m, first.n, first.k, first.seed) || p.r != first.r {
            return Err(Error::invalid(
                "merged estimates must share m, N, r, k and seed",
            ));
        }
        ranges.push((p.trial_start, p.trial_start + p.trials));
        trials += p.trials;
        hits += p.hits;
        flagged += p.boundary_flag_rate * p.trials as f64;
    }
    ranges.sort_unstable();
    if ranges.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(Error::invalid("trial ranges overlap"));
    }
    let mut est = McEstimate::from_counts(
        (first.m, first.n, first.r, first.k),
        trials,
        hits,
        flagged.round() as u64,
        first.seed,
        ranges[0].0,
    )?;
    est.note = first.note.clone();
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: u64,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `N^{m+1}`.
    pub x: f64,
    /// `−log p̂`.
    pub y: f64,
    /// `−log ci_high` and `−log ci_low`.
    pub y_low: f64,
    pub y_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub m: usize,
    pub r: f64,
    pub k: u64,
    pub points: Vec<SweepPoint>,
    /// `c` in `−log p̂ ≈ c·N^{m+1} + b`.
    pub slope: f64,
    pub intercept: f64,
    /// The asymptotic constant this slope estimates.
    pub theory: Option<f64>,
    pub ratio: Option<f64>,
    pub weighting: String,
    pub warnings: Vec<String>,
}

/// Minimum number of points with `hits > 0` needed for a fit.
pub const MIN_FIT_POINTS: usize = 3;

impl SweepPoint {
    pub fn from_estimate(m: usize, e: &McEstimate) -> Self {
        SweepPoint {
            n: e.n,
            trials: e.trials,
            hits: e.hits,
            p_hat: e.p_hat,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            x: (e.n as f64).powi(m as i32 + 1),
            y: -e.p_hat.ln(),
            y_low: -e.ci_high.ln(),
            y_high: -e.ci_low.ln(),
        }
    }
}

/// Weighted least squares of `y` on `x` with intercept. Returns `(slope, intercept)`.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    if x.len() < 2 || x.len() != y.len() || x.len() != w.len() {
        return Err(Error::invalid("line fit needs ≥ 2 matching points"));
    }
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - xm;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (y[i] - ym);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("line fit needs distinct x values"));
    }
    let slope = sxy / sxx;
    Ok((slope, ym - slope * xm))
}

fn theory_constant(m: usize, r: f64) -> Option<f64> {
    let rep = hole_rate(m, r).ok()?;
    Some(rep.one_d_rate.unwrap_or(rep.upsilon_max))
}

/// Fits `−log p̂ ≈ c·N^{m+1} + b` over the points with `hits > 0`, weighting
/// each by `1/σ²` with `σ` the half-width of its log-scale interval
/// (uniform weights when some interval is degenerate, as for exact inputs).
pub fn fit_points(m: usize, r: f64, k: u64, points: Vec<SweepPoint>) -> Result<SweepFit> {
    if points.windows(2).any(|w| w[1].n <= w[0].n) {
        return Err(Error::invalid("N list must be strictly increasing"));
    }
    let usable: Vec<&SweepPoint> = points.iter().filter(|p| p.hits > 0).collect();
    if usable.len() < MIN_FIT_POINTS {
        return Err(Error::FitRefused {
            usable: usable.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let x: Vec<f64> = usable.iter().map(|p| p.x).collect();
    let y: Vec<f64> = usable.iter().map(|p| p.y).collect();
    let sigmas: Vec<f64> = usable
        .iter()
        .map(|p| (p.y_high - p.y_low) / (2.0 * 1.959963984540054))
        .collect();
    let (w, weighting) = if sigmas.iter().all(|s| *s > 0.0 && s.is_finite()) {
        (
            sigmas.iter().map(|s| 1.0 / (s * s)).collect::<Vec<_>>(),
            "inverse log-CI variance",
        )
    } else {
        (vec![1.0; x.len()], "uniform")
    };
    let (slope, intercept) = weighted_line_fit(&x, &y, &w)?;
    let mut warnings = Vec::new();
    if let Some(last) = points.last() {
        if last.trials > 0 && last.hits < 10 {
            warnings.push(format!(
                "only {} hits at N = {}; raise trials for a stable fit",
                last.hits, last.n
            ));
        }
    }
    let theory = theory_constant(m, r);
    Ok(SweepFit {
        m,
        r,
        k,
        points,
        slope,
        intercept,
        theory,
        ratio: theory.map(|t| slope / t),
        weighting: weighting.to_string(),
        warnings,
    })
}

/// Monte Carlo sweep over `n_list` followed by [`fit_points`]. All degrees
/// share the master seed.
pub fn sweep_fit(
    m: usize,
    r: f64,
    k: u64,
    n_list: &[u64],
    trials: u64,
    master_seed: u64,
    opts: McOptions,
) -> Result<SweepFit> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("N list must be strictly increasing"));
    }
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let e = estimate_p(m, n, r, k, trials, master_seed, opts)?;
        points.push(SweepPoint::from_estimate(m, &e));
    }
    fit_points(m, r, k, points)
}

/// Fit on exact probabilities `p(N)` instead of simulated ones.
pub fn sweep_fit_synthetic<F: Fn(u64) -> f64>(
    m: usize,
    r: f64,
    k: u64,
    n_list: &[u64],
    p: F,
) -> Result<SweepFit> {
    let points = n_list
        .iter()
        .map(|&n| {
            let v = p(n);
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(format!(
                    "synthetic p({n}) = {v} outside (0, 1]"
                )));
            }
            Ok(SweepPoint {
                n,
                trials: 0,
                hits: 1,
                p_hat: v,
                ci_low: v,
                ci_high: v,
                x: (n as f64).powi(m as i32 + 1),
                y: -v.ln(),
                y_low: -v.ln(),
                y_high: -v.ln(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    fit_points(m, r, k, points)
}

/// Minimum trials for [`bound_check`].
pub const BOUND_CHECK_MIN_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub estimate: McEstimate,
    pub omega: OmegaProbability,
    /// `ci_high − p̂`.
    pub slack: f64,
    /// `p̂ + slack ≥ γ_N(Ω)`.
    pub passed: bool,
    pub neg_log_p_hat: Option<f64>,
    /// `R_{r,1}(N)` and `Q_{r,1}(N)`, the lattice sums behind the lower bound.
    pub lattice_r: f64,
    pub lattice_q: f64,
}

/// Checks the Monte Carlo hole probability against the analytic `Ω` bound.
pub fn bound_check(
    n: u64,
    r: f64,
    trials: u64,
    master_seed: u64,
    opts: McOptions,
) -> Result<BoundCheck> {
    if trials < BOUND_CHECK_MIN_TRIALS {
        return Err(Error::invalid(format!(
            "bound check needs at least {BOUND_CHECK_MIN_TRIALS} trials, got {trials}"
        )));
    }
    let estimate = estimate_p(1, n, r, 0, trials, master_seed, opts)?;
    bound_check_from(estimate)
}

/// [`bound_check`] for an estimate already at hand (`m = 1`, `k = 0`).
pub fn bound_check_from(estimate: McEstimate) -> Result<BoundCheck> {
    if estimate.m != 1 || estimate.k != 0 {
        return Err(Error::invalid("bound check applies to m = 1, k = 0"));
    }
    let omega = omega_probability(1, estimate.n, estimate.r)?;
    let slack = estimate.ci_high - estimate.p_hat;
    Ok(BoundCheck {
        passed: estimate.p_hat + slack >= omega.value,
        neg_log_p_hat: (estimate.hits > 0).then(|| -estimate.p_hat.ln()),
        lattice_r: lattice_sum_r(1, estimate.n, estimate.r)?.value,
        lattice_q: lattice_sum_q(1, estimate.n, estimate.r, 1.0)?.value,
        omega,
        slack,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn serial() -> McOptions {
        McOptions {
            workers: Some(1),
            ..McOptions::default()
        }
    }

    #[test]
    fn clopper_pearson_known_values() {
        // closed forms at the edges: h = 0 gives 1 − (α/2)^{1/T}
        let (lo, hi) = clopper_pearson(0, 10, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-12);
        let (lo, hi) = clopper_pearson(10, 10, 0.95).unwrap();
        assert!((lo - 0.025f64.powf(0.1)).abs() < 1e-12);
        assert_eq!(hi, 1.0);
        // 5 of 10: reference interval (0.187086, 0.812914)
        let (lo, hi) = clopper_pearson(5, 10, 0.95).unwrap();
        assert!((lo - 0.1870860).abs() < 1e-6 && (hi - 0.8129140).abs() < 1e-6);
        assert!(clopper_pearson(1, 0, 0.95).is_err());
        assert!(clopper_pearson(3, 2, 0.95).is_err());
    }

    #[test]
    fn clopper_pearson_rare_events() {
        let (lo, hi) = clopper_pearson(3, 10_000_000, 0.95).unwrap();
        // Poisson limits for 3 events: (0.6187, 8.7673) per 10⁷
        assert!((lo * 1e7 - 0.6187).abs() < 1e-3, "{lo}");
        assert!((hi * 1e7 - 8.7673).abs() < 1e-3, "{hi}");
    }

    #[test]
    fn coverage_on_synthetic_streams() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &p in &[0.02, 0.3] {
            let mut covered = 0;
            for _ in 0..100 {
                let t = 200u64;
                let h = (0..t).filter(|_| rng.gen::<f64>() < p).count() as u64;
                let (lo, hi) = clopper_pearson(h, t, 0.95).unwrap();
                covered += (lo <= p && p <= hi) as u32;
            }
            assert!(covered >= 93, "p = {p}: {covered}/100");
        }
    }

    #[test]
    fn estimate_invariants() {
        let e = estimate_p(1, 4, 0.8, 0, 20_000, 1, serial()).unwrap();
        assert!(e.ci_low <= e.p_hat && e.p_hat <= e.ci_high);
        assert!(e.hits <= e.trials);
        let all = estimate_p(1, 4, 0.8, 4, 10_000, 1, serial()).unwrap();
        assert_eq!(all.hits, all.trials);
        assert!(estimate_p(1, 4, 0.8, 0, 0, 1, serial()).is_err());
        assert!(estimate_p(3, 4, 0.8, 0, 10, 1, serial()).is_err());
        assert!(estimate_p(2, 4, 0.8, 1, 10, 1, serial()).is_err());
    }

    #[test]
    fn worker_count_does_not_change_hits() {
        let base = estimate_grid(1, 5, &[0.5, 1.0], &[0, 2], 30_000, 9, serial()).unwrap();
        for w in [2, 4, 16] {
            let opts = McOptions {
                workers: Some(w),
                ..McOptions::default()
            };
            assert_eq!(
                estimate_grid(1, 5, &[0.5, 1.0], &[0, 2], 30_000, 9, opts).unwrap(),
                base
            );
        }
    }

    #[test]
    fn split_ranges_merge_to_the_whole() {
        let whole = estimate_p(1, 3, 0.7, 0, 20_000, 4, serial()).unwrap();
        let a = estimate_p(1, 3, 0.7, 0, 12_000, 4, serial()).unwrap();
        let b = estimate_p(
            1,
            3,
            0.7,
            0,
            8_000,
            4,
            McOptions {
                trial_start: 12_000,
                ..serial()
            },
        )
        .unwrap();
        assert_eq!(merge_estimates(&[b.clone(), a.clone()]).unwrap(), whole);
        assert!(merge_estimates(&[a.clone(), a]).is_err());
    }

    #[test]
    fn matches_root_by_root_counting() {
        use crate::zeros::count_zeros_disc;
        let trials = 300;
        let e = estimate_p(1, 6, 0.9, 1, trials, 12, serial()).unwrap();
        let direct = (0..trials)
            .filter(|&t| {
                let p = sample(1, 6, 12, t).unwrap();
                count_zeros_disc(&p, 0.9, None).unwrap().inside <= 1
            })
            .count() as u64;
        assert_eq!(e.hits, direct);
    }

    #[test]
    fn two_variable_holes() {
        let e = estimate_p(2, 2, 0.3, 0, 400, 3, serial()).unwrap();
        assert!(e.note.as_deref().unwrap().contains("upper-biased"));
        let big = estimate_p(2, 2, 1.5, 0, 400, 3, serial()).unwrap();
        assert!(big.hits <= e.hits);
    }

    #[test]
    fn synthetic_slope_recovery() {
        let fit = sweep_fit_synthetic(1, 0.5, 0, &[2, 3, 4, 5, 6], |n| {
            (-0.37 * (n * n) as f64).exp()
        })
        .unwrap();
        assert!((fit.slope - 0.37).abs() < 1e-12, "{}", fit.slope);
        assert!(fit.intercept.abs() < 1e-10);
        assert_eq!(fit.weighting, "uniform");
        assert!(sweep_fit_synthetic(1, 0.5, 0, &[2, 3], |_| 0.5).is_err());
    }

    #[test]
    fn fit_refuses_without_enough_hits() {
        let pts: Vec<SweepPoint> = [2u64, 3, 4]
            .iter()
            .map(|&n| {
                let e = McEstimate::from_counts(
                    (1, n, 0.5, 0),
                    100,
                    if n == 2 { 5 } else { 0 },
                    0,
                    1,
                    0,
                )
                .unwrap();
                SweepPoint::from_estimate(1, &e)
            })
            .collect();
        assert!(matches!(
            fit_points(1, 0.5, 0, pts),
            Err(Error::FitRefused { usable: 1, .. })
        ));
    }

    #[test]
    fn bound_check_precondition() {
        assert!(bound_check(2, 1.0, 100, 1, serial()).is_err());
        let b = bound_check(2, 1.0, 20_000, 1, serial()).unwrap();
        assert!(b.passed);
    }
}
