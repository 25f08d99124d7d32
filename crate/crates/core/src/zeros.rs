//! Zeros of one-variable draws, disc counts, the Jensen identity, and a
//! polydisc zero detector for two variables.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::ensemble::{log_weights, GaussianPolynomial};
use crate::error::{Error, Result};
use crate::indices::enumerate_lambda;

/// Roots closer than this are merged into one root with multiplicity.
pub const CLUSTER_RADIUS: f64 = 1e-5;
/// Relative boundary tolerance used when none is given.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Roots of a one-variable polynomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    /// Distinct roots with multiplicities.
    pub roots: Vec<(Complex64, usize)>,
    /// Largest `k` with a nonzero coefficient.
    pub degree_effective: usize,
    /// Largest backward error `|p(ρ)| / Σ|a_k||ρ|^k` over the roots.
    pub residual: f64,
}

impl RootSet {
    /// Every root repeated by multiplicity.
    pub fn flat(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|&(z, k)| std::iter::repeat_n(z, k))
            .collect()
    }
}

/// `p(z)` and `p′(z)` by Horner, for monomial coefficients `a` (low to high).
#[inline]
fn horner2(a: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in a.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

#[inline]
fn horner(a: &[Complex64], z: Complex64) -> Complex64 {
    a.iter().rev().fold(ZERO, |p, &c| p * z + c)
}

/// `Σ |a_k| |z|^k`, the scale of `p(z)` for backward errors.
fn magnitude_scale(a: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    a.iter().rev().fold(0.0, |s, c| s * r + c.norm())
}

/// Reusable buffers for repeated root finding.
#[derive(Default)]
pub struct RootSolver {
    h: Vec<Complex64>,
    roots: Vec<Complex64>,
}

impl RootSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// All roots (with repetition) of `Σ a_k z^k`, `a` in ascending order.
    /// Returns `None` when every coefficient vanishes.
    pub fn solve(&mut self, a: &[Complex64]) -> Option<&[Complex64]> {
        let top = a.iter().rposition(|c| *c != ZERO)?;
        let low = a.iter().position(|c| *c != ZERO).unwrap_or(0);
        self.roots.clear();
        self.roots.extend(std::iter::repeat_n(ZERO, low));
        let core = &a[low..=top];
        let d = core.len() - 1;
        match d {
            0 => {}
            1 => self.roots.push(-core[0] / core[1]),
            _ => {
                let start = self.roots.len();
                companion_eigenvalues(core, &mut self.h, &mut self.roots);
                aberth_polish(core, &mut self.roots[start..]);
            }
        }
        Some(&self.roots)
    }
}

/// Eigenvalues of the balanced companion matrix of `core` (degree ≥ 2),
/// appended to `out`.
fn companion_eigenvalues(core: &[Complex64], h: &mut Vec<Complex64>, out: &mut Vec<Complex64>) {
    let n = core.len() - 1;
    let lead = core[n];
    h.clear();
    h.resize(n * n, ZERO);
    for j in 0..n {
        h[j] = -core[n - 1 - j] / lead;
    }
    for i in 1..n {
        h[i * n + i - 1] = ONE;
    }
    balance(h, n);
    hessenberg_qr(h, n, out);
}

/// Diagonal similarity by powers of two equalising row and column norms.
fn balance(h: &mut [Complex64], n: usize) {
    const RADIX: f64 = 2.0;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 50 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += h[j * n + i].l1_norm();
                    r += h[i * n + j].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / RADIX {
                f *= RADIX;
                cc *= RADIX;
                rr /= RADIX;
            }
            while cc >= rr * RADIX {
                f /= RADIX;
                cc /= RADIX;
                rr *= RADIX;
            }
            if (cc + rr) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    h[i * n + j] /= f;
                    h[j * n + i] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR with
/// Wilkinson shifts and exceptional shifts on stagnation.
fn hessenberg_qr(h: &mut [Complex64], n: usize, out: &mut Vec<Complex64>) {
    let at = |i: usize, j: usize| i * n + j;
    let mut eig = vec![ZERO; n];
    let mut rot: Vec<(f64, Complex64)> = vec![(0.0, ZERO); n];
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[at(0, 0)];
            break;
        }
        // deflation search
        let mut l = hi;
        while l > 0 {
            let sub = h[at(l, l - 1)].l1_norm();
            let diag = h[at(l, l)].l1_norm() + h[at(l - 1, l - 1)].l1_norm();
            if sub <= f64::EPSILON * diag || sub < f64::MIN_POSITIVE {
                h[at(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[at(hi, hi)];
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > 100 * n {
            // give up on this block: report its diagonal, polish repairs it
            for k in l..=hi {
                eig[k] = h[at(k, k)];
            }
            if l == 0 {
                break;
            }
            hi = l - 1;
            continue;
        }
        let a = h[at(hi - 1, hi - 1)];
        let b = h[at(hi - 1, hi)];
        let c = h[at(hi, hi - 1)];
        let d = h[at(hi, hi)];
        let mu = if its % 11 == 10 {
            d + Complex64::new(0.75 * c.norm(), 0.4 * c.norm())
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in l..=hi {
            h[at(k, k)] -= mu;
        }
        for k in l..hi {
            let x = h[at(k, k)];
            let y = h[at(k + 1, k)];
            let nu = x.norm().hypot(y.norm());
            let (cs, sn) = if nu == 0.0 {
                (1.0, ZERO)
            } else if x == ZERO {
                (0.0, ONE)
            } else {
                let ax = x.norm();
                (ax / nu, (x / ax) * y.conj() / nu)
            };
            rot[k] = (cs, sn);
            for j in k..=hi {
                let u = h[at(k, j)];
                let v = h[at(k + 1, j)];
                h[at(k, j)] = u * cs + sn * v;
                h[at(k + 1, j)] = -sn.conj() * u + v * cs;
            }
        }
        for k in l..hi {
            let (cs, sn) = rot[k];
            for i in l..=(k + 1).min(hi) {
                let u = h[at(i, k)];
                let v = h[at(i, k + 1)];
                h[at(i, k)] = u * cs + v * sn.conj();
                h[at(i, k + 1)] = -u * sn + v * cs;
            }
        }
        for k in l..=hi {
            h[at(k, k)] += mu;
        }
    }
    out.extend_from_slice(&eig);
}

/// Simultaneous Aberth–Ehrlich correction of all roots of `core`.
fn aberth_polish(core: &[Complex64], roots: &mut [Complex64]) {
    let d = roots.len();
    for _ in 0..8 {
        let mut biggest = 0.0f64;
        for i in 0..d {
            let z = roots[i];
            let (p, dp) = horner2(core, z);
            if p == ZERO {
                continue;
            }
            let ratio = p / dp;
            if !(ratio.re.is_finite() && ratio.im.is_finite()) {
                continue;
            }
            let mut s = ZERO;
            for (j, &w) in roots.iter().enumerate() {
                if j != i {
                    let diff = z - w;
                    if diff != ZERO {
                        s += diff.inv();
                    }
                }
            }
            let step = ratio / (ONE - ratio * s);
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            let cand = z - step;
            // accept only improving steps
            if horner(core, cand).norm() <= p.norm() {
                roots[i] = cand;
                biggest = biggest.max(step.norm() / z.norm().max(1.0));
            }
        }
        if biggest < 1e-15 {
            break;
        }
    }
}

/// Single-linkage clustering of roots within [`CLUSTER_RADIUS`].
fn cluster(roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (roots[i] - roots[j]).norm() < CLUSTER_RADIUS {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == root) {
            Some(g) => {
                g.1 += roots[i];
                g.2 += 1;
            }
            None => groups.push((root, roots[i], 1)),
        }
    }
    groups
        .into_iter()
        .map(|(_, sum, k)| (sum / k as f64, k))
        .collect()
}

fn require_1d(p: &GaussianPolynomial) -> Result<Vec<Complex64>> {
    if p.m != 1 {
        return Err(Error::invalid(format!("expected m = 1, got m = {}", p.m)));
    }
    p.weighted_1d()
}

/// Roots of a one-variable polynomial given by monomial coefficients.
pub fn roots_monomial(a: &[Complex64]) -> Result<RootSet> {
    let mut solver = RootSolver::new();
    let flat = solver
        .solve(a)
        .ok_or_else(|| Error::invalid("all coefficients vanish"))?
        .to_vec();
    let degree_effective = a.iter().rposition(|c| *c != ZERO).unwrap_or(0);
    let roots = cluster(&flat);
    let residual = roots
        .iter()
        .map(|&(z, _)| {
            let s = magnitude_scale(a, z);
            if s == 0.0 {
                0.0
            } else {
                horner(a, z).norm() / s
            }
        })
        .fold(0.0, f64::max);
    Ok(RootSet {
        roots,
        degree_effective,
        residual,
    })
}

/// Roots of `s̃_N(z) = Σ c_k √C(N,k) z^k` for an `m = 1` draw.
pub fn roots_1d(p: &GaussianPolynomial) -> Result<RootSet> {
    roots_monomial(&require_1d(p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ZeroCount {
    /// `n(r, N)`: zeros in the closed disc, counted with multiplicity.
    pub inside: u64,
    /// Zeros with `||ρ| − r| < tol`; counted inside as well.
    pub boundary_flags: u64,
}

/// Counts root moduli in `[0, r]`, treating the band `||ρ| − r| < tol` as
/// inside and flagging it.
pub fn count_moduli(moduli: impl IntoIterator<Item = f64>, r: f64, tol: f64) -> ZeroCount {
    let mut inside = 0;
    let mut boundary_flags = 0;
    for m in moduli {
        if (m - r).abs() < tol {
            inside += 1;
            boundary_flags += 1;
        } else if m <= r {
            inside += 1;
        }
    }
    ZeroCount {
        inside,
        boundary_flags,
    }
}

/// Zeros of `Σ a_k z^k` in the open disc `|z| < rho`, by the Schur–Cohn
/// recursion `Tp = ā₀ p − a_n p*` (`p*` the conjugate reversal), without
/// computing roots. Returns `None` when a step is too close to degenerate
/// (`|a₀| ≈ |a_n|`) to decide reliably.
pub fn schur_cohn_count(a: &[Complex64], rho: f64) -> Option<u64> {
    let mut buf = [ZERO; 64];
    let mut heap;
    let p: &mut [Complex64] = if a.len() <= buf.len() {
        &mut buf[..a.len()]
    } else {
        heap = vec![ZERO; a.len()];
        &mut heap
    };
    let mut scale = 1.0;
    for (dst, &c) in p.iter_mut().zip(a) {
        *dst = c * scale;
        scale *= rho;
    }
    let mut lo = 0;
    let mut hi = p.iter().rposition(|c| *c != ZERO)?;
    let mut count = 0u64;
    loop {
        // exact zeros at the origin
        while lo < hi && p[lo] == ZERO {
            lo += 1;
            count += 1;
        }
        let n = hi - lo;
        if n == 0 {
            return Some(count);
        }
        let a0 = p[lo];
        let an = p[hi];
        let gamma = a0.norm_sqr() - an.norm_sqr();
        let size = a0.norm_sqr() + an.norm_sqr();
        if !(gamma.abs() > 1e-12 * size) {
            return None;
        }
        // Tp_k = conj(a0)·p_k − a_n·conj(p_{n−k}), k = 0..n−1
        let ca0 = a0.conj();
        let mut top = 0.0f64;
        // pairs (k, n−k) are updated together since each reads the other
        for k in 0..=n / 2 {
            let (x, y) = (p[lo + k], p[hi - k]);
            let v = ca0 * x - an * y.conj();
            let w = ca0 * y - an * x.conj();
            p[lo + k] = v;
            top = top.max(v.l1_norm());
            if n - k != k && n - k < n {
                p[hi - k] = w;
                top = top.max(w.l1_norm());
            }
        }
        // rescale so magnitudes do not square away from one step to the next
        let unit = 1.0 / top;
        for v in &mut p[lo..lo + n] {
            *v *= unit;
        }
        // leading coefficients lost to rounding belong to roots near infinity
        let floor = 64.0 * f64::EPSILON;
        let mut new_hi = lo + n - 1;
        while new_hi > lo && p[new_hi].l1_norm() <= floor {
            new_hi -= 1;
        }
        if gamma < 0.0 {
            // p has as many zeros in the disc as Tp has outside it
            let base = count + n as u64;
            return schur_cohn_count(&p[lo..=new_hi], 1.0).map(|c| base - c);
        }
        hi = new_hi;
    }
}

/// [`ZeroCount`] semantics of [`count_moduli`] from two Schur–Cohn counts at
/// `r ± tol`; `None` defers to root finding.
pub fn schur_cohn_band(a: &[Complex64], r: f64, tol: f64) -> Option<ZeroCount> {
    let outer = schur_cohn_count(a, r + tol)?;
    let inner = schur_cohn_count(a, (r - tol).max(0.0))?;
    if inner > outer {
        return None;
    }
    Some(ZeroCount {
        inside: outer,
        boundary_flags: outer - inner,
    })
}

/// `n(r, N)` for an `m = 1` draw. `tol` defaults to `1e−9·r`.
pub fn count_zeros_disc(p: &GaussianPolynomial, r: f64, tol: Option<f64>) -> Result<ZeroCount> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    let tol = tol.unwrap_or(DEFAULT_BOUNDARY_TOL * r);
    let set = roots_1d(p)?;
    Ok(count_moduli(set.flat().iter().map(|z| z.norm()), r, tol))
}

/// Winding number of `s̃_N` around 0 along `|z| = r`, from adaptively refined
/// argument increments (every accepted step turns by less than `π/8`).
pub fn argument_principle_count(p: &GaussianPolynomial, r: f64) -> Result<u64> {
    let a = require_1d(p)?;
    argument_count_monomial(&a, r)
}

pub fn argument_count_monomial(a: &[Complex64], r: f64) -> Result<u64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    let f = |t: f64| horner(a, Complex64::from_polar(r, t));
    let start = 8 * a.len().max(4);
    let mut total = 0.0;
    let mut prev_t = 0.0;
    let mut prev = f(0.0);
    for i in 1..=start {
        let t = TAU * i as f64 / start as f64;
        let cur = f(t);
        total += winding_piece(&f, prev_t, t, prev, cur, 0)?;
        prev_t = t;
        prev = cur;
    }
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.1 || rounded < 0.0 {
        return Err(Error::NonConvergence {
            what: "argument principle",
            estimate: turns,
            error: (turns - rounded).abs(),
        });
    }
    Ok(rounded as u64)
}

fn winding_piece<F: Fn(f64) -> Complex64>(
    f: &F,
    t0: f64,
    t1: f64,
    v0: Complex64,
    v1: Complex64,
    depth: u32,
) -> Result<f64> {
    if v0 == ZERO || v1 == ZERO {
        return Err(Error::invalid("polynomial vanishes on the contour"));
    }
    let step = (v1 / v0).arg();
    if step.abs() < std::f64::consts::PI / 8.0 {
        return Ok(step);
    }
    if depth > 40 {
        return Err(Error::NonConvergence {
            what: "argument principle refinement",
            estimate: step,
            error: step.abs(),
        });
    }
    let tm = 0.5 * (t0 + t1);
    let vm = f(tm);
    Ok(winding_piece(f, t0, tm, v0, vm, depth + 1)? + winding_piece(f, tm, t1, vm, v1, depth + 1)?)
}

/// `|(1/M) Σ_j log|s̃(r e^{2πij/M})| − log|c₀| − Σ_{|ρ|≤r} log(r/|ρ|)|`.
pub fn jensen_residual(p: &GaussianPolynomial, r: f64, boundary_nodes: usize) -> Result<f64> {
    if boundary_nodes == 0 {
        return Err(Error::invalid("need at least one boundary node"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    let a = require_1d(p)?;
    if a[0] == ZERO {
        return Err(Error::invalid("Jensen's formula needs s̃(0) ≠ 0"));
    }
    let set = roots_monomial(&a)?;
    let tol = DEFAULT_BOUNDARY_TOL * r;
    let mut inner = 0.0;
    for &(z, k) in &set.roots {
        let m = z.norm();
        if (m - r).abs() < tol {
            return Err(Error::invalid("a root lies on the circle"));
        }
        if m <= r {
            inner += k as f64 * (r / m).ln();
        }
    }
    let mut mean = 0.0;
    for j in 0..boundary_nodes {
        let z = Complex64::from_polar(r, TAU * j as f64 / boundary_nodes as f64);
        mean += horner(&a, z).norm().ln();
    }
    mean /= boundary_nodes as f64;
    Ok((mean - a[0].norm().ln() - inner).abs())
}

/// Outcome of the polydisc zero search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolydiscDetection {
    pub has_zero: bool,
    /// A point of the closed polydisc where `s̃` vanishes to within the
    /// verification threshold.
    pub witness: Option<Vec<Complex64>>,
    /// `|s̃(witness)| / Σ|c_K|√C(N,K)|w^K|`.
    pub witness_residual: Option<f64>,
    /// `false` means exact (m = 1); `true` means a grid search that can miss
    /// zeros but never reports a false one.
    pub resolution_limited: bool,
}

/// Witnesses must satisfy `|s̃(w)| < WITNESS_THRESHOLD·scale`.
pub const WITNESS_THRESHOLD: f64 = 1e-12;

/// Radical inverse in base 2.
fn van_der_corput(mut i: u64) -> f64 {
    let mut x = 0.0;
    let mut base = 0.5;
    while i > 0 {
        if i & 1 == 1 {
            x += base;
        }
        i >>= 1;
        base *= 0.5;
    }
    x
}

/// Radii `r, 0, r·v₁, r·v₂, …` and angles `0, 2πv₁, 2πv₂, …` (`vᵢ` the van der
/// Corput sequence); the first `g` of each form nested grids.
pub fn polydisc_grid(r: f64, g: usize) -> (Vec<f64>, Vec<f64>) {
    let radii = (0..g)
        .map(|i| match i {
            0 => r,
            1 => 0.0,
            _ => r * van_der_corput(i as u64 - 1),
        })
        .collect();
    let angles = (0..g).map(|i| TAU * van_der_corput(i as u64)).collect();
    (radii, angles)
}

/// Zero search in the closed polydisc `D̄(0,r)^m`, `m ∈ {1, 2}`.
///
/// For `m = 2`, each grid point `z₂` yields the slice polynomial in `z₁`; a
/// slice root of modulus `≤ r` is re-verified on the full polynomial before it
/// is reported.
pub fn polydisc_zero_detect(
    p: &GaussianPolynomial,
    r: f64,
    grid_res: usize,
) -> Result<PolydiscDetection> {
    if grid_res < 8 {
        return Err(Error::invalid(format!(
            "grid resolution must be ≥ 8, got {grid_res}"
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    match p.m {
        1 => {
            let a = p.weighted_1d()?;
            let tol = DEFAULT_BOUNDARY_TOL * r;
            let set = roots_monomial(&a)?;
            let hit = set.roots.iter().find(|(z, _)| z.norm() <= r + tol);
            Ok(PolydiscDetection {
                has_zero: hit.is_some(),
                witness: hit.map(|&(z, _)| vec![z]),
                witness_residual: hit.map(|&(z, _)| {
                    let s = magnitude_scale(&a, z);
                    if s == 0.0 {
                        0.0
                    } else {
                        horner(&a, z).norm() / s
                    }
                }),
                resolution_limited: false,
            })
        }
        2 => {
            let mut det = Detector2::new(p)?;
            Ok(det.detect(r, grid_res))
        }
        m => Err(Error::invalid(format!(
            "polydisc detection supports m ≤ 2, got {m}"
        ))),
    }
}

/// Slice machinery for two variables, reusable across radii.
pub(crate) struct Detector2 {
    /// `weighted[k1][k2] = c_K √C(N,K)` for `k1 + k2 ≤ N`.
    weighted: Vec<Vec<Complex64>>,
    solver: RootSolver,
    slice: Vec<Complex64>,
}

impl Detector2 {
    pub(crate) fn new(p: &GaussianPolynomial) -> Result<Self> {
        let n = p.n as usize;
        let lw = log_weights(2, p.n)?;
        let mut weighted = vec![Vec::new(); n + 1];
        for (i, k) in enumerate_lambda(2, p.n)?.iter().enumerate() {
            let e = k.entries();
            let row = &mut weighted[e[0] as usize];
            debug_assert_eq!(row.len(), e[1] as usize);
            row.push(p.coeffs[i] * lw[i].exp());
        }
        Ok(Detector2 {
            weighted,
            solver: RootSolver::new(),
            slice: Vec::with_capacity(n + 1),
        })
    }

    fn scale(&self, z1: Complex64, z2: Complex64) -> (Complex64, f64) {
        let (m1, m2) = (z1.norm(), z2.norm());
        let mut value = ZERO;
        let mut scale = 0.0;
        for row in self.weighted.iter().rev() {
            value = value * z1 + horner(row, z2);
            scale = scale * m1 + magnitude_scale(row, Complex64::new(m2, 0.0));
        }
        (value, scale)
    }

    pub(crate) fn detect(&mut self, r: f64, g: usize) -> PolydiscDetection {
        let (radii, angles) = polydisc_grid(r, g);
        let tol = DEFAULT_BOUNDARY_TOL * r;
        for &rad in &radii {
            for (ai, &ang) in angles.iter().enumerate() {
                if rad == 0.0 && ai > 0 {
                    break;
                }
                let z2 = Complex64::from_polar(rad, ang);
                self.slice.clear();
                for row in &self.weighted {
                    self.slice.push(horner(row, z2));
                }
                let Some(roots) = self.solver.solve(&self.slice) else {
                    // s̃(·, z₂) ≡ 0: every z₁ is a zero
                    return self.witness(Complex64::new(0.0, 0.0), z2);
                };
                let mut best: Option<Complex64> = None;
                for &z1 in roots {
                    if z1.norm() <= r + tol {
                        best = Some(z1);
                        break;
                    }
                }
                if let Some(z1) = best {
                    let found = self.witness(z1, z2);
                    if found.has_zero {
                        return found;
                    }
                }
            }
        }
        PolydiscDetection {
            has_zero: false,
            witness: None,
            witness_residual: None,
            resolution_limited: true,
        }
    }

    fn witness(&self, z1: Complex64, z2: Complex64) -> PolydiscDetection {
        let (v, s) = self.scale(z1, z2);
        let res = if s == 0.0 { 0.0 } else { v.norm() / s };
        let ok = res < WITNESS_THRESHOLD;
        PolydiscDetection {
            has_zero: ok,
            witness: ok.then(|| vec![z1, z2]),
            witness_residual: ok.then_some(res),
            resolution_limited: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::sample;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn simple_roots() {
        let set = roots_monomial(&[c(-1.0), c(0.0), c(1.0)]).unwrap();
        let mut re: Vec<f64> = set.flat().iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 1.0).abs() < 1e-14 && (re[1] - 1.0).abs() < 1e-14);
        assert_eq!(set.degree_effective, 2);
    }

    #[test]
    fn triple_root_clusters() {
        // (z − ½)³ = z³ − 1.5z² + 0.75z − 0.125
        let set = roots_monomial(&[c(-0.125), c(0.75), c(-1.5), c(1.0)]).unwrap();
        assert_eq!(set.roots.len(), 1);
        assert_eq!(set.roots[0].1, 3);
        assert!((set.roots[0].0 - c(0.5)).norm() < 1e-5);
    }

    #[test]
    fn zero_roots_and_degree_drop() {
        let set = roots_monomial(&[c(0.0), c(0.0), c(2.0), c(1.0), c(0.0)]).unwrap();
        assert_eq!(set.degree_effective, 3);
        let flat = set.flat();
        assert_eq!(flat.len(), 3);
        assert_eq!(flat.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(roots_monomial(&[c(0.0); 3]).is_err());
    }

    #[test]
    fn vieta_on_random_draws() {
        for t in 0..20 {
            let p = sample(1, 50, 8, t).unwrap();
            let a = p.weighted_1d().unwrap();
            let set = roots_1d(&p).unwrap();
            let prod: f64 = set.flat().iter().map(|z| z.norm().ln()).sum();
            let want = (a[0].norm() / a[50].norm()).ln();
            assert!(
                (prod - want).abs() < 1e-8 * want.abs().max(1.0),
                "trial {t}"
            );
            assert!(set.residual < 1e-12, "residual {}", set.residual);
        }
    }

    #[test]
    fn disc_counts() {
        // roots 0.3 and 2.0
        let a = [c(0.6), c(-2.3), c(1.0)];
        let p = GaussianPolynomial::from_monomial_1d(&a).unwrap();
        assert_eq!(count_zeros_disc(&p, 1.0, None).unwrap().inside, 1);
        assert_eq!(count_zeros_disc(&p, 0.1, None).unwrap().inside, 0);
        let near = count_moduli([1.0 + 1e-12, 3.0], 1.0, 1e-9);
        assert_eq!(
            near,
            ZeroCount {
                inside: 1,
                boundary_flags: 1
            }
        );
    }

    #[test]
    fn schur_cohn_matches_roots() {
        let mut deferred = 0;
        for n in 1..=30u64 {
            for t in 0..200 {
                let p = sample(1, n, 31, t).unwrap();
                let a = p.weighted_1d().unwrap();
                for r in [0.3, 0.75, 1.0, 1.6] {
                    let by_roots = count_zeros_disc(&p, r, None).unwrap();
                    match schur_cohn_band(&a, r, DEFAULT_BOUNDARY_TOL * r) {
                        Some(c) => assert_eq!(c, by_roots, "n={n} t={t} r={r}"),
                        None => deferred += 1,
                    }
                }
            }
        }
        assert!(deferred < 10, "{deferred}");
        // exact zeros at the origin and a degree drop
        let a = [c(0.0), c(0.0), c(2.0), c(1.0), c(0.0)];
        assert_eq!(schur_cohn_count(&a, 1.0), Some(2));
        assert_eq!(schur_cohn_count(&a, 3.0), Some(3));
        // z² − 1 has both roots on the unit circle
        assert_eq!(schur_cohn_count(&[c(-1.0), c(0.0), c(1.0)], 1.0), None);
    }

    #[test]
    fn argument_principle_agrees() {
        for t in 0..100 {
            let p = sample(1, 30, 21, t).unwrap();
            let by_roots = count_zeros_disc(&p, 1.0, None).unwrap().inside;
            assert_eq!(
                argument_principle_count(&p, 1.0).unwrap(),
                by_roots,
                "trial {t}"
            );
        }
    }

    #[test]
    fn counts_grow_with_radius() {
        let p = sample(1, 25, 4, 4).unwrap();
        let counts: Vec<u64> = [0.2, 0.5, 0.9, 1.3, 3.0]
            .iter()
            .map(|&r| count_zeros_disc(&p, r, None).unwrap().inside)
            .collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn jensen_simple_cases() {
        let p = GaussianPolynomial::from_monomial_1d(&[c(2.5)]).unwrap();
        assert!(jensen_residual(&p, 1.0, 16).unwrap() < 1e-15);
        let p = GaussianPolynomial::from_monomial_1d(&[Complex64::new(-0.3, 0.2), c(1.0)]).unwrap();
        assert!(jensen_residual(&p, 1.0, 256).unwrap() < 1e-12);
        let p = GaussianPolynomial::from_monomial_1d(&[c(0.0), c(1.0)]).unwrap();
        assert!(jensen_residual(&p, 1.0, 64).is_err());
    }

    #[test]
    fn jensen_converges_with_nodes() {
        let p = sample(1, 10, 3, 9).unwrap();
        let rs: Vec<f64> = [512, 1024, 2048, 4096, 8192]
            .iter()
            .map(|&m| jensen_residual(&p, 1.0, m).unwrap())
            .collect();
        assert!(rs[3] < 1e-6, "{rs:?}");
    }

    #[test]
    fn polydisc_examples() {
        let p = GaussianPolynomial::from_monomial_1d(&[c(0.5), c(1.0)]).unwrap();
        let d = polydisc_zero_detect(&p, 1.0, 8).unwrap();
        assert!(d.has_zero && !d.resolution_limited);

        let mut coeffs = vec![c(0.0); 6];
        // Λ_{2,2} order: (0,0),(0,1),(0,2),(1,0),(1,1),(2,0)
        coeffs[3] = c(1.0);
        let p = GaussianPolynomial::from_coefficients(2, 2, coeffs).unwrap();
        let d = polydisc_zero_detect(&p, 0.5, 8).unwrap();
        assert!(d.has_zero);
        assert!(d.witness.unwrap()[0].norm() < 1e-12);

        let mut coeffs = vec![c(0.0); 6];
        coeffs[0] = c(1.0);
        let p = GaussianPolynomial::from_coefficients(2, 2, coeffs).unwrap();
        for g in [8, 16, 32] {
            assert!(!polydisc_zero_detect(&p, 2.0, g).unwrap().has_zero);
        }
        let p = sample(3, 2, 1, 1).unwrap();
        assert!(polydisc_zero_detect(&p, 1.0, 8).is_err());
    }

    #[test]
    fn polydisc_detection_is_monotone_in_resolution() {
        for t in 0..30 {
            let p = sample(2, 4, 77, t).unwrap();
            let mut seen = false;
            for g in [8, 12, 16, 24] {
                let d = polydisc_zero_detect(&p, 0.6, g).unwrap();
                if seen {
                    assert!(d.has_zero, "trial {t} lost detection at g = {g}");
                }
                if d.has_zero {
                    assert!(d.witness_residual.unwrap() < WITNESS_THRESHOLD);
                    let w = d.witness.unwrap();
                    assert!(w.iter().all(|z| z.norm() <= 0.6 * (1.0 + 1e-9)));
                }
                seen |= d.has_zero;
            }
        }
    }

    #[test]
    fn balanced_companion_handles_wide_scales() {
        let a: Vec<Complex64> = (0..=12).map(|k| c(10f64.powi(k - 6))).collect();
        let set = roots_monomial(&a).unwrap();
        assert_eq!(set.flat().len(), 12);
        assert!(set.residual < 1e-12, "{}", set.residual);
    }
}
