//! Linear search on the line with a distributional prediction of the target.
//!
//! Excursion `i` walks from the origin to `(-1)^{i + parity} x_i` and back.
//! A target at `h` is found on the first excursion that goes to its side and
//! reaches `|h|`, at cost `|h| + 2 (x_0 + ... + x_{i-1})`.
//!
//! Robustness `r` is the bidding condition with `rho = (r - 1) / 2` in place
//! of `r`: `x_0 <= rho` and `x_{i+1} <= rho x_i - (x_0 + ... + x_i)`. An
//! infinite `r`-robust strategy exists iff `rho >= 4`, that is `r >= 9`.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bidding::{extendability_ratio_ok, is_partially_robust, RobustnessReq, TightExtension, FEAS_TOL};
use crate::error::{Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpOutcome};
use crate::numeric::{bisect, golden_section};
use crate::pareto::slow_rate;
use crate::randomized::f_curve;

/// Smallest robustness that admits an infinite deterministic search strategy.
pub const MIN_SEARCH_R: f64 = 9.0;

/// Same cap as [`crate::BidSequence::iter`].
const MAX_TERMS: usize = 100_000;

pub fn rho(r: f64) -> f64 {
    (r - 1.0) / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStrategy")]
pub struct SearchStrategy {
    parity: u8,
    magnitudes: Vec<f64>,
    /// Robustness `r` of the tight continuation, if any.
    extension_r: Option<f64>,
}

#[derive(Deserialize)]
struct RawStrategy {
    parity: u8,
    magnitudes: Vec<f64>,
    #[serde(default)]
    extension_r: Option<f64>,
}

impl TryFrom<RawStrategy> for SearchStrategy {
    type Error = Error;
    fn try_from(raw: RawStrategy) -> Result<Self> {
        let s = SearchStrategy::new(raw.parity, raw.magnitudes)?;
        match raw.extension_r {
            Some(r) => s.with_tight_extension(r),
            None => Ok(s),
        }
    }
}

impl SearchStrategy {
    /// Validates positivity and `x_i <= x_{i+2}`.
    pub fn new(parity: u8, magnitudes: Vec<f64>) -> Result<Self> {
        if parity > 1 {
            return Err(Error::Invalid(format!("parity must be 0 or 1, got {parity}")));
        }
        if magnitudes.is_empty() || magnitudes.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Invalid("magnitudes must be a non-empty list of positive reals".into()));
        }
        if magnitudes.windows(3).any(|w| w[2] < w[0] * (1.0 - FEAS_TOL)) {
            return Err(Error::Invalid("magnitudes must not shrink on either side".into()));
        }
        Ok(SearchStrategy { parity, magnitudes, extension_r: None })
    }

    /// Continues the prefix by its tight `rho`-extension. Needs `r >= 9`.
    pub fn with_tight_extension(mut self, r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= MIN_SEARCH_R) {
            return Err(Error::RobustnessTooSmall(r, MIN_SEARCH_R));
        }
        self.extension_r = Some(r);
        Ok(self)
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn extension_r(&self) -> Option<f64> {
        self.extension_r
    }

    /// `+1.0` for the right half-line, `-1.0` for the left.
    pub fn side(&self, i: usize) -> f64 {
        if (i + self.parity as usize) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Prefix magnitudes followed by the extension, if any.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let total: f64 = self.magnitudes.iter().sum();
        let last = *self.magnitudes.last().expect("non-empty");
        let ext = self.extension_r.map(|r| TightExtension::new(rho(r), total, last));
        self.magnitudes.iter().copied().chain(ext.into_iter().flatten()).take(MAX_TERMS)
    }

    pub fn terms(&self, n: usize) -> Vec<f64> {
        self.iter().take(n).collect()
    }
}

fn validate_target(h: f64) -> Result<()> {
    if !(h.is_finite() && h.abs() >= 1.0) {
        return Err(Error::Invalid(format!("target must satisfy |h| >= 1, got {h}")));
    }
    Ok(())
}

/// Index of the excursion that finds `h`, and the cost of finding it.
pub fn search_discovery(s: &SearchStrategy, h: f64) -> Result<(usize, f64)> {
    validate_target(h)?;
    let mut walked = 0.0;
    for (i, x) in s.iter().enumerate() {
        if s.side(i) * h > 0.0 && x >= h.abs() {
            return Ok((i, h.abs() + 2.0 * walked));
        }
        walked += x;
    }
    Err(Error::Unreachable(h))
}

pub fn search_cost(s: &SearchStrategy, h: f64) -> Result<f64> {
    Ok(search_discovery(s, h)?.1)
}

/// Checks `x_0 <= rho` and the growth inequalities of the prefix. An extended
/// strategy must also be extendable at the end of its prefix, with its first
/// continuation term reaching the previous excursion on that side.
pub fn search_robust_check(s: &SearchStrategy, r: f64) -> bool {
    let rho = rho(r);
    let x = s.magnitudes();
    if !is_partially_robust(x, rho) {
        return false;
    }
    if s.extension_r().is_none() {
        return true;
    }
    if r < MIN_SEARCH_R || !extendability_ratio_ok(x, rho) {
        return false;
    }
    match x.len() {
        0 | 1 => true,
        n => {
            let next = rho * x[n - 1] - x.iter().sum::<f64>();
            next >= x[n - 2] * (1.0 - FEAS_TOL)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedPoint {
    pub position: f64,
    pub prob: f64,
}

/// Distribution over target positions on both half-lines, sorted by `|position|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSigned")]
pub struct SignedPrediction {
    points: Vec<SignedPoint>,
}

#[derive(Deserialize)]
struct RawSigned {
    points: Vec<SignedPoint>,
}

impl TryFrom<RawSigned> for SignedPrediction {
    type Error = Error;
    fn try_from(raw: RawSigned) -> Result<Self> {
        SignedPrediction::new(raw.points)
    }
}

impl SignedPrediction {
    pub fn new(mut points: Vec<SignedPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("prediction has no points".into()));
        }
        for p in &points {
            validate_target(p.position)?;
            if !p.prob.is_finite() || !(0.0..=1.0).contains(&p.prob) {
                return Err(Error::Invalid(format!("probability {} outside [0, 1]", p.prob)));
            }
        }
        points.sort_by(|a, b| a.position.abs().total_cmp(&b.position.abs()).then(a.position.total_cmp(&b.position)));
        if points.windows(2).any(|w| w[0].position == w[1].position) {
            return Err(Error::Invalid("prediction positions must be distinct".into()));
        }
        let total: f64 = points.iter().map(|p| p.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(SignedPrediction { points })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(position, prob)| SignedPoint { position, prob }).collect())
    }

    pub fn points(&self) -> &[SignedPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Expected distance of the target from the origin.
    pub fn mean_distance(&self) -> f64 {
        self.points.iter().map(|p| p.prob * p.position.abs()).sum()
    }

    pub fn max_distance(&self) -> f64 {
        self.points.iter().map(|p| p.position.abs()).fold(0.0, f64::max)
    }
}

pub fn expected_search_cost(s: &SearchStrategy, mu: &SignedPrediction) -> Result<f64> {
    mu.points().iter().try_fold(0.0, |acc, p| Ok(acc + p.prob * search_cost(s, p.position)?))
}

pub fn search_consistency(s: &SearchStrategy, mu: &SignedPrediction) -> Result<f64> {
    Ok(expected_search_cost(s, mu)? / mu.mean_distance())
}

/// Every order in which an alternating strategy can discover the points: the
/// next point is always the nearest undiscovered one on the left or on the
/// right. Entries index into `mu.points()`.
pub fn discovery_orderings(mu: &SignedPrediction) -> Vec<Vec<usize>> {
    let (right, left): (Vec<usize>, Vec<usize>) = (0..mu.len()).partition(|&i| mu.points()[i].position > 0.0);
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(mu.len());
    interleave(&right, &left, &mut current, &mut out);
    out
}

fn interleave(a: &[usize], b: &[usize], current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if a.is_empty() && b.is_empty() {
        out.push(current.clone());
        return;
    }
    for (head, rest_a, rest_b) in [(a.first(), &a[a.len().min(1)..], b), (b.first(), a, &b[b.len().min(1)..])] {
        if let Some(&h) = head {
            current.push(h);
            interleave(rest_a, rest_b, current, out);
            current.pop();
        }
    }
}

/// The LP for a fixed parity and discovery vector (`d[i]` is the excursion
/// that finds point `i`). Its objective omits the constant `sum p_i |mu_i|`.
///
/// Returns `None` when the bounds are contradictory.
pub fn build_search_lp(d: &[usize], mu: &SignedPrediction, r: f64) -> Option<LinearProgram> {
    let rho = rho(r);
    let zeta2 = RobustnessReq::new(rho).ok()?.roots().zeta2;
    let n = d.iter().copied().max()? + 1;
    let mut lp = LinearProgram::new(n);
    for (p, &di) in mu.points().iter().zip(d) {
        for c in &mut lp.objective_mut()[..di] {
            *c += 2.0 * p.prob;
        }
    }
    // Excursions shorter than one find nothing and can be dropped.
    let mut lower = vec![1.0f64; n];
    let mut upper: Vec<f64> = vec![f64::INFINITY; n];
    upper[0] = rho;
    for (p, &di) in mu.points().iter().zip(d) {
        let m = p.position.abs();
        lower[di] = lower[di].max(m);
        if di >= 2 {
            upper[di - 2] = upper[di - 2].min(m);
        }
    }
    for j in 0..n {
        if lower[j] > upper[j] {
            return None;
        }
        lp.set_lower(j, lower[j]);
        if upper[j].is_finite() {
            lp.set_upper(j, upper[j]);
        }
    }
    for i in 0..n - 1 {
        let mut row = vec![0.0; n];
        row[..=i].iter_mut().for_each(|c| *c = 1.0);
        row[i] -= rho;
        row[i + 1] = 1.0;
        lp.add_le(row, 0.0);
        if i + 2 < n {
            lp.add_le_sparse(&[(i, 1.0), (i + 2, -1.0)], 0.0);
        }
    }
    let mut ext = vec![1.0; n];
    ext[n - 1] -= zeta2;
    lp.add_le(ext, 0.0);
    if n >= 2 {
        // First continuation term rho x_n - S_n must reach x_{n-1}.
        let mut cont = vec![1.0; n];
        cont[n - 1] -= rho;
        cont[n - 2] += 1.0;
        lp.add_le(cont, 0.0);
    }
    Some(lp)
}

/// Largest excursion index considered by [`synthesize_search`].
pub fn search_excursion_cap(mu: &SignedPrediction, r: f64, escalation: u32) -> Result<usize> {
    let req = RobustnessReq::new(rho(r))?;
    let ln_rate = slow_rate(req).ln();
    let reach = (mu.max_distance().ln() / ln_rate).ceil().max(0.0) as usize;
    let margin = (req.value().ln() / ln_rate).ceil() as usize + 2;
    Ok(2 * (reach + (margin << escalation)) + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchSynthesis {
    pub strategy: SearchStrategy,
    /// Discovery excursion of each point, in `mu.points()` order.
    pub discovery: Vec<usize>,
    pub expected_cost: f64,
    pub consistency: f64,
    pub lp_value: f64,
    pub lp_solves: usize,
}

struct Best {
    parity: u8,
    d: Vec<usize>,
    point: Vec<f64>,
    /// Expected cost, constant term included.
    value: f64,
}

/// Depth-first enumeration of discovery vectors for one parity and ordering.
///
/// Every excursion has magnitude at least one, so point `i` costs at least
/// `|mu_i| + 2 d_i`. A partial vector whose bound reaches the incumbent is
/// cut, and so are all later indices for the same point.
struct Enumerator<'a> {
    mu: &'a SignedPrediction,
    r: f64,
    cap: usize,
    parity: u8,
    order: &'a [usize],
    d: Vec<usize>,
    best: Option<Best>,
    solves: usize,
}

impl Enumerator<'_> {
    fn incumbent(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.value - FEAS_TOL * b.value.abs().max(1.0))
    }

    fn run(&mut self, t: usize, partial: f64) -> Result<()> {
        if t == self.order.len() {
            return self.solve();
        }
        let point = self.order[t];
        let p = self.mu.points()[point];
        let right = p.position > 0.0;
        // Excursion i goes right iff i + parity is even.
        let want = if right { self.parity as usize % 2 } else { (self.parity as usize + 1) % 2 };
        let lo = match t {
            0 => 0,
            _ => {
                let prev_point = self.order[t - 1];
                let prev = self.d[prev_point];
                let same_side = (self.mu.points()[prev_point].position > 0.0) == right;
                if same_side { prev } else { prev + 1 }
            }
        };
        let mut i = lo + (lo + 2 - want) % 2;
        while i <= self.cap {
            let bound = partial + p.prob * (p.position.abs() + 2.0 * i as f64);
            if bound >= self.incumbent() {
                break;
            }
            self.d[point] = i;
            self.run(t + 1, bound)?;
            i += 2;
        }
        Ok(())
    }

    fn solve(&mut self) -> Result<()> {
        let Some(lp) = build_search_lp(&self.d, self.mu, self.r) else {
            return Ok(());
        };
        self.solves += 1;
        match lp_solve(&lp)? {
            LpOutcome::Optimal { point, value } => {
                let value = value + self.mu.points().iter().map(|p| p.prob * p.position.abs()).sum::<f64>();
                if value < self.incumbent() {
                    self.best = Some(Best { parity: self.parity, d: self.d.clone(), point, value });
                }
                Ok(())
            }
            LpOutcome::Infeasible => Ok(()),
            LpOutcome::Unbounded => Err(Error::Numerical("unbounded search LP".into())),
        }
    }
}

/// Pareto-optimal consistency among `r`-robust search strategies.
///
/// Enumerates the parity, the discovery ordering and the discovery excursion
/// of every point, solving one LP per surviving combination.
pub fn synthesize_search(mu: &SignedPrediction, r: f64) -> Result<SearchSynthesis> {
    if !(r.is_finite() && r >= MIN_SEARCH_R) {
        return Err(Error::RobustnessTooSmall(r, MIN_SEARCH_R));
    }
    let orderings = discovery_orderings(mu);
    let mut escalation = 0;
    loop {
        let cap = search_excursion_cap(mu, r, escalation)?;
        let mut best: Option<Best> = None;
        let mut solves = 0;
        for parity in 0..=1u8 {
            for order in &orderings {
                let mut e = Enumerator { mu, r, cap, parity, order, d: vec![0; mu.len()], best: best.take(), solves };
                e.run(0, 0.0)?;
                best = e.best;
                solves = e.solves;
            }
        }
        let best = best.ok_or(Error::NoFeasibleConfiguration)?;
        let deepest = best.d.iter().copied().max().unwrap_or(0);
        if deepest + 2 >= cap && escalation < 3 {
            warn!("search optimum reaches excursion {deepest} of cap {cap}; escalating");
            escalation += 1;
            continue;
        }
        return finish(mu, r, best, solves);
    }
}

fn finish(mu: &SignedPrediction, r: f64, best: Best, lp_solves: usize) -> Result<SearchSynthesis> {
    let mut x = best.point;
    for (p, &di) in mu.points().iter().zip(&best.d) {
        x[di] = x[di].max(p.position.abs());
    }
    let strategy = SearchStrategy::new(best.parity, x)?.with_tight_extension(r)?;
    let discovery = mu
        .points()
        .iter()
        .map(|p| search_discovery(&strategy, p.position).map(|(i, _)| i))
        .collect::<Result<Vec<_>>>()?;
    let expected_cost = expected_search_cost(&strategy, mu)?;
    Ok(SearchSynthesis {
        consistency: expected_cost / mu.mean_distance(),
        strategy,
        discovery,
        expected_cost,
        lp_value: best.value,
        lp_solves,
    })
}

/// Below this distance from two, `delta` is treated as its limit.
const DELTA_LIMIT: f64 = 1e-9;

/// Parameters of the randomized search strategy: excursion `i` has magnitude
/// `lambda a^{i+s}` with `s ~ U[delta, 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchRandParams {
    pub delta: f64,
    pub a: f64,
}

impl SearchRandParams {
    pub fn new(delta: f64, a: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&delta) {
            return Err(Error::Invalid(format!("delta must lie in [0, 2], got {delta}")));
        }
        if !(a.is_finite() && a > 1.0) {
            return Err(Error::Invalid(format!("base must exceed 1, got {a}")));
        }
        Ok(SearchRandParams { delta, a })
    }
}

/// `(a^2 - a^delta) / ((2 - delta) ln a)`, continuous at `delta = 2`.
fn spread(p: SearchRandParams) -> f64 {
    let gap = 2.0 - p.delta;
    if gap < DELTA_LIMIT {
        p.a * p.a
    } else {
        (p.a * p.a - p.a.powf(p.delta)) / (gap * p.a.ln())
    }
}

pub fn search_cons_bound(p: SearchRandParams) -> f64 {
    1.0 + 2.0 * spread(p) / (p.a.powf(p.delta) * (p.a - 1.0))
}

pub fn search_rob_bound(p: SearchRandParams) -> f64 {
    1.0 + 2.0 * spread(p) / (p.a - 1.0)
}

/// Minimizer and value of `1 + (1 + a) / ln a`, the optimal randomized
/// competitive ratio without predictions.
pub fn q_star() -> (f64, f64) {
    golden_section(|a| 1.0 + (1.0 + a) / a.ln(), 1.5, 10.0, 1e-12)
}

/// Monte Carlo estimate of `E[cost(h)] / |h|` for the bi-infinite strategy
/// built around prediction `u_hat`, with a 95% normal half-width.
///
/// The excursions before the discovering one form a geometric series, summed
/// in closed form.
pub fn mc_search_ratio<R: Rng + ?Sized>(
    u_hat: f64,
    p: SearchRandParams,
    h: f64,
    trials: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be positive".into()));
    }
    validate_target(u_hat)?;
    validate_target(h)?;
    let a = p.a;
    let j = ((u_hat.abs().ln() / a.ln()) - p.delta + 1e-9).floor();
    let lambda = u_hat.abs() / a.powf(j + p.delta);
    // Excursions with index of the same parity as j go to the predicted side.
    let want_odd = (j as i64).rem_euclid(2) == 1;
    let want_odd = if (h > 0.0) == (u_hat > 0.0) { want_odd } else { !want_odd };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let s = p.delta + (2.0 - p.delta) * rng.random::<f64>();
        let mut i = ((h.abs() / lambda).ln() / a.ln() - s).ceil();
        if ((i as i64).rem_euclid(2) == 1) != want_odd {
            i += 1.0;
        }
        while lambda * a.powf(i + s) < h.abs() {
            i += 2.0;
        }
        while lambda * a.powf(i - 2.0 + s) >= h.abs() {
            i -= 2.0;
        }
        let walked = lambda * a.powf(i + s) / (a - 1.0);
        let ratio = 1.0 + 2.0 * walked / h.abs();
        sum += ratio;
        sum_sq += ratio * ratio;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok((mean, 1.96 * (var / n).sqrt()))
}

/// Consistency no randomized `r`-robust search strategy can beat:
/// `1 + 2 / ((1 + xi) y F(y))` with `y = exp(F((r - 1) / e))`.
pub fn search_lower_bound(r: f64, xi: f64) -> Result<f64> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::Invalid(format!("xi must be positive, got {xi}")));
    }
    let y = f_curve((r - 1.0) / std::f64::consts::E)?.exp();
    Ok(1.0 + 2.0 / ((1.0 + xi) * y * f_curve(y)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchOptimum {
    pub delta: f64,
    pub a: f64,
    pub cons: f64,
    pub rob: f64,
}

/// Largest `delta` in `[0, 2]` with `rob <= r`, if any.
fn max_search_delta(a: f64, r: f64) -> Option<f64> {
    let rob = |delta: f64| search_rob_bound(SearchRandParams { delta, a });
    if rob(0.0) > r {
        return None;
    }
    if rob(2.0) <= r {
        return Some(2.0);
    }
    bisect(|d| rob(d) - r, 0.0, 2.0, 1e-14).map(|d| {
        // Stay on the feasible side of the root.
        let mut d = d;
        while d > 0.0 && rob(d) > r {
            d = (d - 1e-14).max(0.0);
        }
        d
    })
}

fn search_cons_at(a: f64, r: f64) -> f64 {
    max_search_delta(a, r).map_or(f64::INFINITY, |delta| search_cons_bound(SearchRandParams { delta, a }))
}

/// Best consistency bound among strategies whose robustness bound is at most `r`.
pub fn optimize_search(r: f64) -> Result<SearchOptimum> {
    let (a_star, q) = q_star();
    if !(r.is_finite() && r >= q) {
        return Err(Error::Invalid(format!("robustness {r} below the randomized optimum {q}")));
    }
    let g = |a: f64| 1.0 + (1.0 + a) / a.ln() - r;
    let a_lo = bisect(g, 1.0 + 1e-9, a_star, 1e-15).unwrap_or(a_star);
    let mut top = 2.0 * a_star;
    while g(top) < 0.0 {
        top *= 2.0;
    }
    let a_hi = bisect(g, a_star, top, 1e-15).unwrap_or(a_star);

    let steps = 600;
    let mut best = (f64::INFINITY, a_star);
    for i in 0..=steps {
        let a = a_lo + (a_hi - a_lo) * i as f64 / steps as f64;
        let c = search_cons_at(a, r);
        if c < best.0 {
            best = (c, a);
        }
    }
    let width = (a_hi - a_lo) / steps as f64;
    if width > 0.0 {
        let (a, c) = golden_section(|a| search_cons_at(a, r), (best.1 - width).max(a_lo), (best.1 + width).min(a_hi), 1e-12);
        if c < best.0 {
            best = (c, a);
        }
    }
    // Deterministic limit: largest a with 1 + 2a^2/(a-1) <= r.
    if r >= MIN_SEARCH_R {
        let disc = ((r - 1.0) * (r - 1.0) - 8.0 * (r - 1.0)).max(0.0).sqrt();
        let a = ((r - 1.0) + disc) / 4.0;
        let c = search_cons_at(a, r);
        if c < best.0 {
            best = (c, a);
        }
    }
    let a = best.1;
    let delta = max_search_delta(a, r).ok_or_else(|| Error::Numerical(format!("no feasible delta at a = {a}")))?;
    let p = SearchRandParams { delta, a };
    Ok(SearchOptimum { delta, a, cons: search_cons_bound(p), rob: search_rob_bound(p) })
}
