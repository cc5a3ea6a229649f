//! Pareto-optimal bidding against a discrete distributional prediction.
//!
//! A strategy's *configuration* records, for each predicted point `mu_i`, the
//! index `j_i` with `x_{j_i} < mu_i <= x_{j_i + 1}` (with `x_{-1} = 0`). For a
//! fixed configuration the cheapest robust, extendable prefix is a linear
//! program; the optimum over all configurations, continued by its tight
//! extension, is Pareto-optimal.
//!
//! [`synthesize`] searches configurations depth-first in lexicographic order,
//! fixing `j_1, j_2, ...` one at a time. Each partial node solves a relaxation
//! whose value bounds every completion from below, so a node is cut as soon as
//! its bound cannot beat the incumbent. The result is the same configuration a
//! lexicographic scan over all of them would pick.

use log::warn;
use serde::Serialize;

use crate::bidding::{
    bidding_cost, consistency, BidSequence, DiscretePrediction, RobustnessReq, FEAS_TOL,
};
use crate::error::{Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpOutcome};

/// Index vector `(j_1, ..., j_k)`, non-decreasing, entries `>= -1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Configuration(pub Vec<i64>);

impl Configuration {
    pub fn new(indices: Vec<i64>) -> Result<Self> {
        if indices.iter().any(|&j| j < -1) {
            return Err(Error::Invalid("configuration indices must be >= -1".into()));
        }
        if indices.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Invalid("configuration must be non-decreasing".into()));
        }
        Ok(Configuration(indices))
    }

    pub fn indices(&self) -> &[i64] {
        &self.0
    }

    /// Index of the last bid the configuration constrains, `j_k + 1`.
    pub fn last_index(&self) -> i64 {
        self.0.last().map_or(0, |j| j + 1)
    }
}

/// Configuration of `x` with respect to `mu`.
pub fn config_of(x: &BidSequence, mu: &DiscretePrediction) -> Result<Configuration> {
    let mut out = Vec::with_capacity(mu.len());
    let mut bids = x.iter().enumerate();
    let mut current: Option<(usize, f64)> = bids.next();
    for v in mu.values() {
        loop {
            match current {
                Some((i, b)) if b >= v => {
                    out.push(i as i64 - 1);
                    break;
                }
                Some(_) => current = bids.next(),
                None => return Err(Error::Unreachable(v)),
            }
        }
    }
    Ok(Configuration(out))
}

/// `max(zeta1, 1.05)`, the slowest growth rate assumed by the enumeration cap.
pub(crate) fn slow_rate(r: RobustnessReq) -> f64 {
    r.roots().zeta1.max(1.05)
}

/// Largest index `j` considered for any configuration entry.
///
/// `escalation` doubles the margin term `ceil(log r) + 2` that many times.
pub fn enumeration_cap(mu: &DiscretePrediction, r: RobustnessReq, escalation: u32) -> i64 {
    let ln_rate = slow_rate(r).ln();
    let reach = (mu.max_value().ln() / ln_rate).ceil().max(0.0) as i64;
    let margin = (r.value().ln() / ln_rate).ceil() as i64 + 2;
    reach + (margin << escalation)
}

/// Every non-decreasing vector of length `k` with entries in `[-1, cap]`, in
/// lexicographic order.
pub fn enumerate_configurations_with_cap(k: usize, cap: i64) -> impl Iterator<Item = Configuration> {
    let mut state: Option<Vec<i64>> = if cap >= -1 { Some(vec![-1; k]) } else { None };
    std::iter::from_fn(move || {
        let current = state.take()?;
        // Advance: bump the rightmost entry below cap, reset the tail to it.
        let mut next = current.clone();
        let mut pos = k;
        while pos > 0 && next[pos - 1] == cap {
            pos -= 1;
        }
        if pos > 0 {
            let v = next[pos - 1] + 1;
            next[pos - 1..].iter_mut().for_each(|j| *j = v);
            state = Some(next);
        }
        Some(Configuration(current))
    })
}

pub fn enumerate_configurations(mu: &DiscretePrediction, r: RobustnessReq) -> impl Iterator<Item = Configuration> {
    enumerate_configurations_with_cap(mu.len(), enumeration_cap(mu, r, 0))
}

/// Growth bounds shared by every node of one synthesis call.
struct Growth {
    r: f64,
    zeta2: f64,
    /// `q_min[n]`: smallest possible `S_n / x_n` for a robust prefix.
    q_min: Vec<f64>,
    /// `ln_max_bid[n]`: log of the largest reachable `x_n` given `x_0 <= r`.
    ln_max_bid: Vec<f64>,
}

impl Growth {
    fn new(r: RobustnessReq, cap: i64) -> Self {
        let len = (cap + 3).max(1) as usize;
        let rv = r.value();
        let mut q_min = Vec::with_capacity(len);
        let mut ln_max_bid = Vec::with_capacity(len);
        let mut q = 1.0;
        let mut ln_bid = rv.ln();
        for _ in 0..len {
            q_min.push(q);
            ln_max_bid.push(ln_bid);
            ln_bid += (rv - q).ln();
            q = rv / (rv - q);
        }
        Growth { r: rv, zeta2: r.roots().zeta2, q_min, ln_max_bid }
    }

    /// False when `x_{j+1} >= mu` is impossible for any robust prefix.
    fn reachable(&self, j: i64, mu: f64) -> bool {
        mu.ln() <= self.ln_max_bid[(j + 1) as usize] + FEAS_TOL
    }

    /// False when a bid at index `prev <= mu_prev` cannot grow to `mu` by
    /// index `j + 1`.
    fn bridgeable(&self, prev: i64, mu_prev: f64, j: i64, mu: f64) -> bool {
        if prev < 0 {
            return true;
        }
        let ln_gain: f64 = (prev..=j).map(|t| (self.r - self.q_min[t as usize]).ln()).sum();
        (mu / mu_prev).ln() <= ln_gain + FEAS_TOL
    }
}

/// Relaxation with the first `fixed.len()` configuration entries fixed.
///
/// Variables are `x_0 ..= x_n` with `n = j_t + 1`, followed by one epigraph
/// variable per unfixed point bounding its cost from below. With every entry
/// fixed and `ramp_cuts` off this is exactly the configuration LP.
///
/// With `ramp_cuts`, every bid that covers no fixed point must be necessary:
/// removing `x_i` keeps the prefix robust exactly when
/// `x_{i+1} <= r x_{i-1} - S_{i-1}` (or `x_1 <= r` for `i = 0`), and then
/// lowers the cost of every later target. The lexicographically first optimal
/// configuration therefore satisfies the reverse inequalities.
fn build_node_lp(fixed: &[i64], mu: &DiscretePrediction, growth: &Growth, ramp_cuts: bool) -> LinearProgram {
    let points = mu.points();
    let t = fixed.len();
    let j_t = *fixed.last().expect("at least one fixed entry");
    let n = (j_t + 1) as usize;
    let nx = n + 1;
    let free = points.len() - t;
    let mut lp = LinearProgram::new(nx + free);

    // x_0 in [1, r]: a first bid below every target can be dropped.
    lp.set_lower(0, 1.0);
    lp.set_upper(0, growth.r);

    // x_{i+1} <= r x_i - S_i
    for i in 0..n {
        let mut row = vec![0.0; nx + free];
        row[..i].iter_mut().for_each(|a| *a = 1.0);
        row[i] = 1.0 - growth.r;
        row[i + 1] = 1.0;
        lp.add_le(row, 0.0);
    }
    for i in 0..n {
        lp.add_le_sparse(&[(i, 1.0), (i + 1, -1.0)], 0.0);
    }
    // S_n <= zeta2 x_n
    {
        let mut row = vec![0.0; nx + free];
        row[..nx].iter_mut().for_each(|a| *a = 1.0);
        row[n] = 1.0 - growth.zeta2;
        lp.add_le(row, 0.0);
    }
    if ramp_cuts {
        let mut covering = vec![false; nx];
        fixed.iter().for_each(|&j| covering[(j + 1) as usize] = true);
        for i in (0..n).filter(|&i| !covering[i]) {
            if i == 0 {
                lp.add_ge_sparse(&[(1, 1.0)], growth.r);
            } else {
                // x_{i+1} - r x_{i-1} + S_{i-1} >= 0
                let mut row = vec![0.0; nx + free];
                row[..i - 1].iter_mut().for_each(|a| *a = 1.0);
                row[i - 1] = 1.0 - growth.r;
                row[i + 1] = 1.0;
                lp.add_ge(row, 0.0);
            }
        }
    }
    for (&j, p) in fixed.iter().zip(points) {
        lp.add_ge_sparse(&[((j + 1) as usize, 1.0)], p.value);
        if j >= 0 {
            lp.add_le_sparse(&[(j as usize, 1.0)], p.value);
        }
    }

    let mut objective = vec![0.0; nx + free];
    for (&j, p) in fixed.iter().zip(points) {
        objective[..=(j + 1) as usize].iter_mut().for_each(|c| *c += p.prob);
    }
    // An unfixed point i has j_i >= j_t, so its cost S_{j_i + 1} is at least
    // S_{j_t + 1}, at least S_{j_t} + mu_i, and at least q_min(j_t + 1) mu_i.
    for (f, p) in points[t..].iter().enumerate() {
        let c = nx + f;
        objective[c] = p.prob;
        lp.set_lower(c, growth.q_min[n] * p.value);
        let mut row = vec![0.0; nx + free];
        row[..nx].iter_mut().for_each(|a| *a = -1.0);
        row[c] = 1.0;
        lp.add_ge(row, 0.0);
        let mut row = vec![0.0; nx + free];
        row[..n].iter_mut().for_each(|a| *a = -1.0);
        row[c] = 1.0;
        lp.add_ge(row, p.value);
    }
    lp.set_objective(objective);
    lp
}

/// The LP for a complete configuration: expected prefix cost subject to
/// robustness, extendability at the last variable, the configuration bounds,
/// monotonicity and `1 <= x_0 <= r`.
pub fn build_lp(j: &Configuration, mu: &DiscretePrediction, r: RobustnessReq) -> Result<LinearProgram> {
    if j.indices().len() != mu.len() {
        return Err(Error::Invalid("configuration length differs from prediction size".into()));
    }
    let growth = Growth::new(r, j.last_index());
    Ok(build_node_lp(j.indices(), mu, &growth, false))
}

/// A synthesized strategy with the data that certifies it.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub strategy: BidSequence,
    pub configuration: Configuration,
    /// Consistency of `strategy` on the prediction, evaluated from its bids.
    pub consistency: f64,
    /// Optimal value of the winning configuration LP (expected cost).
    pub lp_value: f64,
    pub robustness: RobustnessReq,
    /// Cap on configuration indices used by the final search.
    pub cap: i64,
    /// LPs solved, over all escalations.
    pub lp_solves: usize,
}

/// JSON shape of a synthesized strategy.
#[derive(Clone, Debug, Serialize)]
pub struct StrategyReport {
    pub bids: Vec<f64>,
    pub configuration: Configuration,
    pub consistency: f64,
    pub robustness: f64,
}

impl Synthesis {
    pub fn report(&self) -> StrategyReport {
        StrategyReport {
            bids: self.strategy.bids().to_vec(),
            configuration: self.configuration.clone(),
            consistency: self.consistency,
            robustness: self.robustness.value(),
        }
    }
}

struct Incumbent {
    value: f64,
    point: Vec<f64>,
    config: Vec<i64>,
}

struct Search<'a> {
    mu: &'a DiscretePrediction,
    growth: Growth,
    cap: i64,
    best: Option<Incumbent>,
    solves: usize,
}

impl Search<'_> {
    fn threshold(&self) -> f64 {
        match &self.best {
            Some(b) => b.value - FEAS_TOL * b.value.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    fn solve(&mut self, fixed: &[i64]) -> Result<Option<(Vec<f64>, f64)>> {
        self.solves += 1;
        let lp = build_node_lp(fixed, self.mu, &self.growth, true);
        match lp_solve(&lp)? {
            LpOutcome::Optimal { point, value } => Ok(Some((point, value))),
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded => Err(Error::Numerical("configuration LP unbounded".into())),
        }
    }

    fn entry_allowed(&self, fixed: &[i64], j: i64) -> bool {
        let points = self.mu.points();
        let t = fixed.len();
        if !self.growth.reachable(j, points[t].value) {
            return false;
        }
        match fixed.last() {
            Some(&prev) => self.growth.bridgeable(prev, points[t - 1].value, j, points[t].value),
            None => true,
        }
    }

    /// False when the ramp cuts force some `x_{j_l}` above `mu_l`.
    ///
    /// Propagates `qbar_i >= S_i / x_i` and `lb_i <= x_i`. Robustness gives
    /// `x_i <= (r - q_{i-1}) x_{i-1}`, so a ramp index `i` yields
    /// `q_{i+1} <= 1 + r / (r - q_{i-1})` and `x_{i+1} >= (r - q_{i-1}) x_{i-1}`.
    fn ramp_feasible(&self, fixed: &[i64]) -> bool {
        let points = self.mu.points();
        let n = (fixed[fixed.len() - 1] + 1) as usize;
        let r = self.growth.r;
        let mut floor = vec![0.0f64; n + 1];
        let mut ceiling = vec![f64::INFINITY; n + 1];
        let mut covering = vec![false; n + 1];
        for (&j, p) in fixed.iter().zip(points) {
            let c = (j + 1) as usize;
            covering[c] = true;
            floor[c] = floor[c].max(p.value);
            if j >= 0 {
                ceiling[j as usize] = ceiling[j as usize].min(p.value);
            }
        }
        let mut lb = vec![0.0f64; n + 1];
        let mut qbar = vec![0.0f64; n + 1];
        lb[0] = floor[0].max(1.0);
        qbar[0] = 1.0;
        for i in 1..=n {
            let ramp_prev = !covering[i - 1];
            let mut low = floor[i].max(lb[i - 1]);
            let mut q = (1.0 + qbar[i - 1]).min(self.growth.zeta2);
            if ramp_prev {
                if i == 1 {
                    low = low.max(r);
                } else {
                    low = low.max((r - qbar[i - 2]) * lb[i - 2]);
                    q = q.min(1.0 + r / (r - qbar[i - 2]));
                }
            }
            lb[i] = low;
            qbar[i] = q;
        }
        (0..=n).all(|i| lb[i] <= ceiling[i] * (1.0 + FEAS_TOL))
    }

    fn dfs(&mut self, fixed: &mut Vec<i64>) -> Result<()> {
        let k = self.mu.len();
        let lo = fixed.last().copied().unwrap_or(-1);
        for j in lo..=self.cap {
            if !self.entry_allowed(fixed, j) {
                continue;
            }
            fixed.push(j);
            if !self.ramp_feasible(fixed) {
                fixed.pop();
                continue;
            }
            if let Some((point, value)) = self.solve(fixed)? {
                if value < self.threshold() {
                    if fixed.len() == k {
                        self.best = Some(Incumbent { value, point, config: fixed.clone() });
                    } else {
                        self.dfs(fixed)?;
                    }
                }
            }
            fixed.pop();
        }
        Ok(())
    }
}

fn finish(
    inc: Incumbent,
    mu: &DiscretePrediction,
    r: RobustnessReq,
    cap: i64,
    lp_solves: usize,
) -> Result<Synthesis> {
    let len = (inc.config[inc.config.len() - 1] + 2) as usize;
    let mut bids = inc.point[..len].to_vec();
    // Covering bids may sit a rounding error below their target.
    for (&j, v) in inc.config.iter().zip(mu.values()) {
        let b = &mut bids[(j + 1) as usize];
        *b = b.max(v);
    }
    let strategy = BidSequence::with_tight_extension(bids, r)
        .map_err(|e| Error::Numerical(format!("synthesized prefix rejected: {e}")))?;
    let configuration = config_of(&strategy, mu)?;
    let consistency = consistency(&strategy, mu)?;
    Ok(Synthesis { strategy, configuration, consistency, lp_value: inc.value, robustness: r, cap, lp_solves })
}

/// Pareto-optimal `r`-robust strategy for `mu`, by branch and bound.
///
/// The index cap is escalated (at most three times) while the winning
/// configuration touches it.
pub fn synthesize(mu: &DiscretePrediction, r: RobustnessReq) -> Result<Synthesis> {
    let mut solves = 0;
    for escalation in 0..=3 {
        let cap = enumeration_cap(mu, r, escalation);
        let mut search = Search { mu, growth: Growth::new(r, cap), cap, best: None, solves: 0 };
        search.dfs(&mut Vec::with_capacity(mu.len()))?;
        solves += search.solves;
        let inc = search.best.ok_or(Error::NoFeasibleConfiguration)?;
        let touches = inc.config[inc.config.len() - 1] == cap;
        if !touches || escalation == 3 {
            if touches {
                warn!("winning configuration still touches the index cap {cap}");
            }
            return finish(inc, mu, r, cap, solves);
        }
    }
    unreachable!("loop returns on its last escalation")
}

/// Reference implementation: solves the exact LP of every configuration up to
/// `cap` and keeps the first one (in lexicographic order) that improves on the
/// incumbent by more than the tolerance. Exponential in `mu.len()`.
pub fn synthesize_exhaustive(mu: &DiscretePrediction, r: RobustnessReq, cap: i64) -> Result<Synthesis> {
    let growth = Growth::new(r, cap);
    let mut best: Option<Incumbent> = None;
    let mut solves = 0;
    for config in enumerate_configurations_with_cap(mu.len(), cap) {
        solves += 1;
        let lp = build_node_lp(config.indices(), mu, &growth, false);
        if let LpOutcome::Optimal { point, value } = lp_solve(&lp)? {
            let threshold = best.as_ref().map_or(f64::INFINITY, |b| b.value - FEAS_TOL * b.value.abs().max(1.0));
            if value < threshold {
                best = Some(Incumbent { value, point, config: config.0 });
            }
        }
    }
    let inc = best.ok_or(Error::NoFeasibleConfiguration)?;
    finish(inc, mu, r, cap, solves)
}

/// Support `[m, M]` of a continuous prediction and the precision `c` of its
/// quantization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct QuantizationSpec {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub c: f64,
}

impl QuantizationSpec {
    pub fn new(m: f64, big_m: f64, c: f64) -> Result<Self> {
        if !(m.is_finite() && big_m.is_finite() && c.is_finite()) || m < 1.0 || big_m <= m || c < 1.0 {
            return Err(Error::Invalid(format!("quantization needs M > m >= 1 and c >= 1, got m={m}, M={big_m}, c={c}")));
        }
        Ok(QuantizationSpec { m, big_m, c })
    }

    /// Number of levels, `ceil(c ln(M/m))`.
    pub fn levels(&self) -> usize {
        // The guard keeps exact integers such as c ln(e^2) from rounding up.
        (self.c * (self.big_m / self.m).ln() - 1e-9).ceil().max(1.0) as usize
    }
}

/// Rounds a distribution with the given CDF up onto the levels `m e^{i/c}`.
pub fn quantize(cdf: impl Fn(f64) -> f64, spec: QuantizationSpec) -> Result<DiscretePrediction> {
    let invalid = |msg: String| Error::Invalid(format!("invalid cdf: {msg}"));
    let at_m = cdf(spec.m);
    let at_big = cdf(spec.big_m);
    if !(at_m.abs() <= 1e-12) || !((at_big - 1.0).abs() <= 1e-12) {
        return Err(invalid(format!("cdf(m) = {at_m}, cdf(M) = {at_big}")));
    }
    let k = spec.levels();
    let mut points = Vec::with_capacity(k);
    let mut prev = at_m;
    for i in 1..=k {
        let level = spec.m * (i as f64 / spec.c).exp();
        let now = cdf(level.min(spec.big_m));
        if !now.is_finite() || now < prev - 1e-12 {
            return Err(invalid(format!("decreases to {now} at {level}")));
        }
        let prob = (now - prev).max(0.0);
        if prob > 0.0 {
            points.push((level, prob));
        }
        prev = prev.max(now);
    }
    let total: f64 = points.iter().map(|p| p.1).sum();
    if (total - 1.0).abs() > 1e-12 {
        points.iter_mut().for_each(|p| p.1 /= total);
    }
    DiscretePrediction::from_pairs(&points)
}

/// Expected cost of `x` over `mu` (the numerator of consistency).
pub fn expected_cost(x: &BidSequence, mu: &DiscretePrediction) -> Result<f64> {
    mu.points().iter().map(|p| Ok(p.prob * bidding_cost(x, p.value)?)).sum()
}
