//! Continuous-time evolution `U(t) = exp(iAt)` on the single-excitation space
//! of `P_n`, evaluated spectrally in `O(n)` per eigenvalue.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decider::{decide_pgst_general, phase_offset_exponent, relation_lattice, Answer, PhaseOffset};
use crate::error::{Error, Result};
use crate::spectrum::{projection_coefficient, sin_pi_frac, theta};
use crate::state::{eigenvalue_support_exact, PureState};

/// Default number of candidate evaluations for [`find_transfer_time`].
pub const DEFAULT_BUDGET: u64 = 1_000_000;
/// Largest `r` tried for the phase offset `delta = pi / 2^r`.
pub const DEFAULT_MAX_DELTA_EXPONENT: u32 = 8;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn check_same_path(v: &PureState, w: &PureState) -> Result<()> {
    if v.n() != w.n() {
        return Err(Error::LengthMismatch {
            expected: v.n(),
            got: w.n(),
        });
    }
    Ok(())
}

/// `sum_j exp(i theta_j t) E_j v`.
pub fn evolve(v: &PureState, t: f64) -> PureState {
    let n = v.n();
    let m = v.m();
    let amps = v.to_complex();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..=n {
        let c = projection_coefficient(j, &amps);
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let scale = c * Complex64::from_polar(2.0 / m as f64, theta(m, j) * t);
        for (x, o) in out.iter_mut().enumerate() {
            *o += scale * sin_pi_frac(((x + 1) * j) as i64, m);
        }
    }
    PureState::numeric(out).expect("unitary evolution keeps the state nonzero")
}

/// `<w|U(t)|v> = sum_j a_j exp(i theta_j t)` with `a_j = <w|E_j|v>` for
/// normalized `v`, `w`. Only nonzero terms are kept.
#[derive(Clone, Debug)]
pub struct TransferAmplitude {
    pub theta: Vec<f64>,
    pub coeff: Vec<Complex64>,
}

impl TransferAmplitude {
    pub fn new(v: &PureState, w: &PureState) -> Result<Self> {
        check_same_path(v, w)?;
        let m = v.m();
        let vn = v.normalized();
        let wn = w.normalized();
        let mut theta_out = Vec::new();
        let mut coeff = Vec::new();
        for j in 1..=v.n() {
            let a = projection_coefficient(j, &wn).conj() * projection_coefficient(j, &vn) * (2.0 / m as f64);
            if a.norm() > 0.0 {
                theta_out.push(theta(m, j));
                coeff.push(a);
            }
        }
        Ok(Self {
            theta: theta_out,
            coeff,
        })
    }

    pub fn at(&self, t: f64) -> Complex64 {
        self.theta
            .iter()
            .zip(&self.coeff)
            .map(|(th, a)| a * Complex64::from_polar(1.0, th * t))
            .sum()
    }

    pub fn overlap(&self, t: f64) -> f64 {
        self.at(t).norm()
    }
}

/// `(|<w|U(t)|v>|, |<w|U(t)|v>|^2)` for the normalized states.
pub fn transfer_fidelity(v: &PureState, w: &PureState, t: f64) -> Result<(f64, f64)> {
    let overlap = TransferAmplitude::new(v, w)?.overlap(t);
    Ok((overlap, overlap * overlap))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelitySample {
    pub t: f64,
    pub overlap: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityTrace {
    pub samples: Vec<FidelitySample>,
}

impl FidelityTrace {
    /// Samples at `t = k dt` for `0 <= t <= t_max`.
    pub fn sample(v: &PureState, w: &PureState, t_max: f64, dt: f64) -> Result<Self> {
        check_grid(t_max, dt)?;
        let amp = TransferAmplitude::new(v, w)?;
        let count = grid_len(t_max, dt);
        let samples = (0..count)
            .into_par_iter()
            .map(|k| {
                let t = k as f64 * dt;
                let overlap = amp.overlap(t);
                FidelitySample {
                    t,
                    overlap,
                    fidelity: overlap * overlap,
                }
            })
            .collect();
        Ok(Self { samples })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,overlap,fidelity")?;
        for s in &self.samples {
            writeln!(out, "{},{},{}", s.t, s.overlap, s.fidelity)?;
        }
        Ok(())
    }
}

fn check_grid(horizon: f64, step: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be finite and >= 0, got {horizon}"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be finite and > 0, got {step}"
        )));
    }
    if horizon / step > 1e10 {
        return Err(Error::InvalidArgument("grid has more than 1e10 points".into()));
    }
    Ok(())
}

fn grid_len(horizon: f64, step: f64) -> usize {
    // Small tolerance so that e.g. horizon = 10, step = 0.1 includes t = 10.
    (horizon / step * (1.0 + 1e-12)).floor() as usize + 1
}

/// Golden-section maximisation of a unimodal-ish `f` on `[lo, hi]`.
///
/// Returns the best point seen (including the endpoints) and the number of
/// function evaluations used.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iterations: usize) -> (f64, f64, u64) {
    let mut a = lo;
    let mut b = hi;
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best =
        [(lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd)]
            .into_iter()
            .fold(
                (lo, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
    let mut evals = 4;
    for _ in 0..iterations {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
        evals += 1;
    }
    (best.0, best.1, evals)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub t_star: f64,
    pub overlap_star: f64,
}

/// Largest `|<w|U(t)|v>|` over `[0, horizon]`: a grid scan with spacing
/// `step`, then golden-section refinement within one step of the best grid
/// point. Ties go to the earliest time.
pub fn scan_max_fidelity(v: &PureState, w: &PureState, horizon: f64, step: f64) -> Result<ScanResult> {
    check_grid(horizon, step)?;
    let amp = TransferAmplitude::new(v, w)?;
    let count = grid_len(horizon, step);
    let best = (0..count)
        .into_par_iter()
        .map(|k| (k, amp.overlap(k as f64 * step)))
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    let t_grid = best.0 as f64 * step;
    let lo = (t_grid - step).max(0.0);
    let hi = (t_grid + step).min(horizon);
    let (t_ref, o_ref, _) = golden_max(|t| amp.overlap(t), lo, hi, 60);
    Ok(if o_ref > best.1 {
        ScanResult {
            t_star: t_ref,
            overlap_star: o_ref,
        }
    } else {
        ScanResult {
            t_star: t_grid,
            overlap_star: best.1,
        }
    })
}

/// Options for [`find_transfer_time`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub budget: u64,
    pub max_delta_exponent: u32,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            max_delta_exponent: DEFAULT_MAX_DELTA_EXPONENT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSearchResult {
    pub tau: f64,
    /// Phase offset `delta` for which `theta_j tau = delta + zeta_j pi (mod 2 pi)` is approximated.
    pub delta: f64,
    pub achieved_overlap: f64,
    /// `1 - sum_j w_j e_j^2 / 2`, a lower bound on the overlap from the residuals.
    pub overlap_lower_bound: f64,
    /// Wrapped residual `|theta_j tau - delta - zeta_j pi|` for each supported `j`.
    pub phase_errors: BTreeMap<usize, f64>,
    pub budget_used: u64,
    pub complete: bool,
}

/// `x` reduced to `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = x.rem_euclid(two_pi);
    if r > PI {
        r - two_pi
    } else {
        r
    }
}

/// Phase system over a support: `theta_j tau = delta + zeta_j pi (mod 2 pi)`.
struct PhaseSystem {
    indices: Vec<usize>,
    theta: Vec<f64>,
    target: Vec<f64>,
    weight: Vec<f64>,
}

impl PhaseSystem {
    fn residuals(&self, tau: f64) -> impl Iterator<Item = f64> + '_ {
        self.theta
            .iter()
            .zip(&self.target)
            .map(move |(th, tg)| wrap_phase(th * tau - tg))
    }

    /// `sum_j w_j e_j^2 / 2`
    fn deficit(&self, tau: f64) -> f64 {
        self.residuals(tau)
            .zip(&self.weight)
            .map(|(e, w)| w * e * e)
            .sum::<f64>()
            / 2.0
    }
}

/// Search for `tau` with `|<v^sigma|U(tau)|v>| >= 1 - epsilon`.
///
/// Refuses when `v` has no PGST to its mirror. The phase offset is the first
/// of `0, pi, pi/2, ..., pi/2^r_max` consistent with every eigenvalue relation,
/// so the target phases are attainable to any accuracy. Candidate times come
/// from lattice reduction of the simultaneous approximation problem, then from
/// a sweep over clock periods; a result is `complete` once the residual bound
/// certifies the requested overlap.
pub fn find_transfer_time(v: &PureState, epsilon: f64, options: SearchOptions) -> Result<TimeSearchResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let verdict = decide_pgst_general(v)?;
    if verdict.answer == Answer::No {
        return Err(Error::refused(
            "no_pgst",
            "the state has no pretty good state transfer to its mirror",
        ));
    }
    let support = eigenvalue_support_exact(v)?;
    let lattice = relation_lattice(&support)?;
    let delta = match phase_offset_exponent(&lattice, options.max_delta_exponent) {
        PhaseOffset::Zero => 0.0,
        PhaseOffset::PiOverPow2(r) => PI / f64::from(1u32 << r),
        PhaseOffset::BeyondCap => {
            return Err(Error::refused(
                "delta_cap",
                format!("no phase offset pi/2^r with r <= {}", options.max_delta_exponent),
            ))
        }
    };
    let m = v.m();
    let amps = v.normalized();
    let system = PhaseSystem {
        indices: support.indices.clone(),
        theta: support.indices.iter().map(|&j| theta(m, j)).collect(),
        target: support
            .indices
            .iter()
            .map(|&j| delta + if j % 2 == 0 { PI } else { 0.0 })
            .collect(),
        weight: support
            .indices
            .iter()
            .map(|&j| projection_coefficient(j, &amps).norm_sqr() * 2.0 / m as f64)
            .collect(),
    };
    let mirror = v.mirror();
    let amp = TransferAmplitude::new(v, &mirror)?;

    let search = TimeSearch::new(&system, epsilon, options.budget);
    let (tau, budget_used) = search.run();
    let deficit = system.deficit(tau);
    // Reflection symmetry: -tau solves the system for -delta with equal residuals.
    let (tau, delta) = if tau < 0.0 {
        (-tau, if delta == 0.0 { 0.0 } else { -delta })
    } else {
        (tau, delta)
    };
    let phase_errors = system
        .indices
        .iter()
        .map(|&j| {
            let tg = delta + if j % 2 == 0 { PI } else { 0.0 };
            (j, wrap_phase(theta(m, j) * tau - tg).abs())
        })
        .collect();
    Ok(TimeSearchResult {
        tau,
        delta,
        achieved_overlap: amp.overlap(tau),
        overlap_lower_bound: 1.0 - deficit,
        phase_errors,
        budget_used,
        complete: deficit <= epsilon,
    })
}

struct TimeSearch<'a> {
    system: &'a PhaseSystem,
    epsilon: f64,
    budget: u64,
    /// Reduced frequencies: one per mirror pair, zero eigenvalue dropped.
    freq: Vec<usize>,
    /// Combined eigenspace weight of each reduced frequency and its partner.
    pair_weight: Vec<f64>,
    clock: usize,
}

impl<'a> TimeSearch<'a> {
    fn new(system: &'a PhaseSystem, epsilon: f64, budget: u64) -> Self {
        // theta_{m-j} = -theta_j, and the relation e_j + e_{m-j} makes its
        // residual the negative of that for j, so one of each pair suffices.
        let mut freq: Vec<usize> = Vec::new();
        for (i, th) in system.theta.iter().enumerate() {
            if th.abs() < 1e-12 {
                continue;
            }
            let dup = freq
                .iter()
                .any(|&k| (system.theta[k] + th).abs() < 1e-12 || (system.theta[k] - th).abs() < 1e-12);
            if !dup {
                freq.push(i);
            }
        }
        let pair_weight = freq
            .iter()
            .map(|&k| {
                let th = system.theta[k].abs();
                system
                    .theta
                    .iter()
                    .zip(&system.weight)
                    .filter(|(t, _)| (t.abs() - th).abs() < 1e-12)
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect();
        let clock = freq
            .iter()
            .copied()
            .max_by(|&a, &b| system.theta[a].abs().total_cmp(&system.theta[b].abs()))
            .unwrap_or(0);
        Self {
            system,
            epsilon,
            budget,
            freq,
            pair_weight,
            clock,
        }
    }

    /// `tau` hitting the clock phase exactly after `q` extra periods.
    fn clock_time(&self, q: f64) -> f64 {
        let th = self.system.theta[self.clock];
        let phase = self.system.target[self.clock] / (2.0 * PI);
        2.0 * PI * (q + phase) / th
    }

    fn run(&self) -> (f64, u64) {
        if self.freq.is_empty() {
            return (0.0, 1);
        }
        let mut used = 0u64;
        let mut best: (f64, f64) = (f64::INFINITY, 0.0);
        let mut consider = |tau: f64, used: &mut u64| -> bool {
            *used += 1;
            let d = self.system.deficit(tau);
            if d < best.0 || (d == best.0 && tau.abs() < best.1.abs()) {
                best = (d, tau);
            }
            best.0 <= self.epsilon
        };

        // One effective frequency: the clock solves the system exactly.
        let base = self.clock_time(0.0);
        let period = 2.0 * PI / self.system.theta[self.clock].abs();
        let first = if base < 0.0 {
            base + period * (-base / period).ceil()
        } else {
            base
        };
        if consider(first, &mut used) || self.freq.len() == 1 {
            return (best.1, used);
        }

        for q in self.lattice_candidates() {
            if used >= self.budget {
                break;
            }
            let tau = self.clock_time(q as f64);
            if consider(tau, &mut used) {
                return (best.1, used);
            }
        }

        // Sweep clock periods, refining the best few as we go.
        let mut q = 0i64;
        while used < self.budget {
            let tau = self.clock_time(q as f64);
            if consider(tau, &mut used) {
                return (best.1, used);
            }
            q += 1;
        }

        let (tau, refined_used) = self.refine(best.1, (self.budget / 100).clamp(50, 200));
        used += refined_used;
        if self.system.deficit(tau) < best.0 {
            best = (self.system.deficit(tau), tau);
        }
        (best.1, used)
    }

    fn refine(&self, tau: f64, iterations: u64) -> (f64, u64) {
        let max_theta = self.system.theta.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        let h = 0.25 / max_theta;
        let (t, _, evals) = golden_max(|t| -self.system.deficit(t), tau - h, tau + h, iterations as usize);
        (t, evals)
    }

    /// Integers `q` from reduced simultaneous-approximation lattices for a
    /// sweep of scale parameters. Coordinates are scaled by the square root
    /// of their eigenspace weight, so the reduction favours times that are
    /// accurate where the overlap is sensitive. Each inhomogeneous solution is
    /// combined with small multiples of the shortest homogeneous vectors.
    fn lattice_candidates(&self) -> Vec<i64> {
        let sys = self.system;
        let a = self.clock;
        let th_a = sys.theta[a];
        let phi = |i: usize| sys.target[i] / (2.0 * PI);
        let (others, scale): (Vec<usize>, Vec<f64>) = {
            let w_max = self.pair_weight.iter().fold(0.0f64, |m, w| m.max(*w));
            self.freq
                .iter()
                .zip(&self.pair_weight)
                .filter(|(&i, _)| i != a)
                .map(|(&i, &w)| (i, (w / w_max).sqrt().max(1e-3)))
                .unzip()
        };
        let alpha: Vec<f64> = others.iter().map(|&i| sys.theta[i] / th_a).collect();
        let beta: Vec<f64> = others
            .iter()
            .zip(&alpha)
            .map(|(&i, al)| al * phi(a) - phi(i))
            .collect();
        let d = others.len();

        let mut out: Vec<i64> = Vec::new();
        let mut combos: Vec<i64> = Vec::new();
        for s in (2..=44).step_by(2) {
            let c = 2f64.powi(s);
            let mu = c.powf(d as f64 / (d as f64 + 1.0)).max(1.0);
            let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d + 2);
            let mut r0 = vec![0.0; d + 2];
            r0[0] = 1.0;
            for k in 0..d {
                r0[k + 1] = c * scale[k] * alpha[k];
            }
            basis.push(r0);
            for k in 0..d {
                let mut r = vec![0.0; d + 2];
                r[k + 1] = c * scale[k];
                basis.push(r);
            }
            let mut last = vec![0.0; d + 2];
            for k in 0..d {
                last[k + 1] = c * scale[k] * beta[k];
            }
            last[d + 1] = mu;
            basis.push(last);
            lll_reduce_f64(&mut basis);

            let mut homogeneous: Vec<(f64, i64)> = Vec::new();
            let mut inhomogeneous = Vec::new();
            for b in &basis {
                let q = b[0].round();
                let e = (b[d + 1] / mu).round();
                if !q.is_finite() || q.abs() > 9e15 {
                    continue;
                }
                let norm: f64 = b.iter().map(|x| x * x).sum();
                match e as i64 {
                    1 => inhomogeneous.push(q as i64),
                    -1 => inhomogeneous.push(-q as i64),
                    0 if q != 0.0 => homogeneous.push((norm, q as i64)),
                    _ => {}
                }
            }
            homogeneous.sort_by(|x, y| x.0.total_cmp(&y.0));
            let short: Vec<i64> = homogeneous.iter().take(ENUMERATION_DEPTH).map(|h| h.1).collect();
            for &q in &inhomogeneous {
                out.push(q);
                for &h in &short {
                    out.push(q + h);
                    out.push(q - h);
                }
                small_combinations(&short, q, &mut combos);
            }
        }
        out.extend(combos);
        let mut seen = std::collections::HashSet::new();
        out.retain(|q| q.abs() <= 9_000_000_000_000_000 && seen.insert(*q));
        out
    }
}

/// Homogeneous vectors combined with each inhomogeneous solution.
const ENUMERATION_DEPTH: usize = 8;

/// `base + sum c_i h_i` for every `c` in `{-1, 0, 1}^len(h)`.
fn small_combinations(h: &[i64], base: i64, out: &mut Vec<i64>) {
    let mut acc = vec![base];
    for &x in h {
        let mut next = Vec::with_capacity(acc.len() * 3);
        for &y in &acc {
            next.push(y);
            next.push(y.saturating_add(x));
            next.push(y.saturating_sub(x));
        }
        acc = next;
    }
    out.extend(acc);
}

/// Floating-point LLL (parameter 0.99) on row vectors, with exact
/// Gram-Schmidt recomputation after each change. Intended for small dimensions.
pub fn lll_reduce_f64(basis: &mut [Vec<f64>]) {
    let n = basis.len();
    if n < 2 {
        return;
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram_schmidt = |basis: &[Vec<f64>]| {
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut mu = vec![vec![0.0; n]; n];
        let mut norms = vec![0.0; n];
        for i in 0..n {
            let mut v = basis[i].clone();
            for j in 0..i {
                mu[i][j] = if norms[j] > 0.0 {
                    dot(&basis[i], &star[j]) / norms[j]
                } else {
                    0.0
                };
                for (x, s) in v.iter_mut().zip(&star[j]) {
                    *x -= mu[i][j] * s;
                }
            }
            norms[i] = dot(&v, &v);
            star.push(v);
        }
        (mu, norms)
    };
    let (mut mu, mut norms) = gram_schmidt(basis);
    let mut k = 1;
    let mut steps = 0usize;
    while k < n && steps < 100_000 {
        steps += 1;
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let (head, tail) = basis.split_at_mut(k);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= q * y;
                }
                let (upper, lower) = mu.split_at_mut(k);
                for (x, y) in lower[0][..j].iter_mut().zip(&upper[j][..j]) {
                    *x -= q * y;
                }
                lower[0][j] -= q;
            }
        }
        if norms[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            let fresh = gram_schmidt(basis);
            mu = fresh.0;
            norms = fresh.1;
            k = (k - 1).max(1);
        }
    }
}
