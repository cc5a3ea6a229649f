//! Online bidding: bid sequences, their cost, and the robustness and
//! extendability conditions that every synthesized strategy must satisfy.
//!
//! A bid sequence `X = (x_0, x_1, ...)` pays `x_0 + ... + x_i` for a target `u`
//! where `i` is the first index with `x_i >= u`. A sequence is `r`-robust when
//! `x_0 <= r` and `x_{i+1} <= r x_i - (x_0 + ... + x_i)` for every `i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for feasibility comparisons, scaled by the magnitude of
/// the quantities compared when they exceed one.
pub const FEAS_TOL: f64 = 1e-9;

/// Relative tolerance for recurrence equalities.
pub const REL_TOL: f64 = 1e-6;

/// Slack used when checking strict monotonicity and when separating ties.
pub const STRICT_SLACK: f64 = 1e-12;

/// Upper bound on the number of extension terms generated while looking for
/// a target. Reaching it means the extension degenerated.
const MAX_EXTENSION_TERMS: usize = 100_000;

/// Competitive ratio that a strategy must guarantee. Values below 4 admit no
/// robust bidding strategy and are rejected.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RobustnessReq(f64);

impl RobustnessReq {
    pub const MIN: f64 = 4.0;

    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::Invalid(format!("robustness must be finite, got {r}")));
        }
        if r < Self::MIN {
            return Err(Error::RobustnessTooSmall(r, Self::MIN));
        }
        Ok(RobustnessReq(r))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn roots(self) -> RootPair {
        RootPair::of(self.0)
    }
}

impl TryFrom<f64> for RobustnessReq {
    type Error = Error;
    fn try_from(r: f64) -> Result<Self> {
        RobustnessReq::new(r)
    }
}

impl From<RobustnessReq> for f64 {
    fn from(r: RobustnessReq) -> f64 {
        r.0
    }
}

/// Roots `zeta1 <= zeta2` of `t^2 - r t + r = 0`.
///
/// `zeta2` bounds the ratio `sum(Y) / last(Y)` of an extendable prefix, and
/// `[zeta1, zeta2]` is the range of bases for which a geometric strategy is
/// `r`-robust.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootPair {
    pub zeta1: f64,
    pub zeta2: f64,
}

impl RootPair {
    /// Caller guarantees `r >= 4`.
    fn of(r: f64) -> Self {
        let disc = (r * (r - 4.0)).max(0.0).sqrt();
        let zeta2 = 0.5 * (r + disc);
        // r / zeta2 is the stable form of (r - disc) / 2.
        let zeta1 = if zeta2 > 0.0 { r / zeta2 } else { 0.5 * (r - disc) };
        RootPair { zeta1, zeta2 }
    }
}

pub fn zeta_roots(r: f64) -> Result<RootPair> {
    Ok(RobustnessReq::new(r)?.roots())
}

/// One support point of a discrete prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionPoint {
    pub value: f64,
    pub prob: f64,
}

/// A finite distribution over target values, sorted by value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPrediction")]
pub struct DiscretePrediction {
    points: Vec<PredictionPoint>,
}

#[derive(Deserialize)]
struct RawPrediction {
    points: Vec<PredictionPoint>,
}

impl TryFrom<RawPrediction> for DiscretePrediction {
    type Error = Error;
    fn try_from(raw: RawPrediction) -> Result<Self> {
        DiscretePrediction::new(raw.points)
    }
}

impl DiscretePrediction {
    /// Sorts the points by value and validates them.
    pub fn new(mut points: Vec<PredictionPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("prediction has no points".into()));
        }
        for p in &points {
            if !p.value.is_finite() || p.value < 1.0 {
                return Err(Error::Invalid(format!("prediction value {} must be >= 1", p.value)));
            }
            if !p.prob.is_finite() || !(0.0..=1.0).contains(&p.prob) {
                return Err(Error::Invalid(format!("probability {} outside [0, 1]", p.prob)));
            }
        }
        points.sort_by(|a, b| a.value.total_cmp(&b.value));
        if points.windows(2).any(|w| w[1].value <= w[0].value) {
            return Err(Error::Invalid("prediction values must be distinct".into()));
        }
        let total: f64 = points.iter().map(|p| p.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(DiscretePrediction { points })
    }

    /// Builds a prediction from `(value, prob)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(value, prob)| PredictionPoint { value, prob }).collect())
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::from_pairs(&[(value, 1.0)])
    }

    pub fn points(&self) -> &[PredictionPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    pub fn max_value(&self) -> f64 {
        self.points[self.points.len() - 1].value
    }

    pub fn min_value(&self) -> f64 {
        self.points[0].value
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().map(|p| p.prob * p.value).sum()
    }

    /// `P(Z <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.points.iter().take_while(|p| p.value <= t).map(|p| p.prob).sum::<f64>().min(1.0)
    }
}

/// A strictly increasing sequence of positive bids, optionally continued
/// beyond its last element by the tight `r`-extension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BidSequence {
    bids: Vec<f64>,
    extension: Option<RobustnessReq>,
}

impl BidSequence {
    /// Validates a finite sequence. Consecutive bids tied within
    /// [`STRICT_SLACK`] are accepted and separated upward.
    pub fn new(bids: Vec<f64>) -> Result<Self> {
        let bids = normalize_increasing(bids)?;
        Ok(BidSequence { bids, extension: None })
    }

    /// A sequence continued past its last bid by the tight `r`-extension.
    /// Fails with [`Error::NotExtendable`] when no robust continuation exists.
    pub fn with_tight_extension(bids: Vec<f64>, r: RobustnessReq) -> Result<Self> {
        let seq = BidSequence::new(bids)?;
        if !is_extendable(&seq, r) {
            return Err(Error::NotExtendable);
        }
        Ok(BidSequence { bids: seq.bids, extension: Some(r) })
    }

    /// Finite bids, without the extension.
    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn is_extended(&self) -> bool {
        self.extension.is_some()
    }

    pub fn extension_req(&self) -> Option<RobustnessReq> {
        self.extension
    }

    pub fn last(&self) -> f64 {
        self.bids[self.bids.len() - 1]
    }

    pub fn total(&self) -> f64 {
        self.bids.iter().sum()
    }

    /// Bids in order: the finite prefix followed by extension terms, if any.
    /// The extension stops early if it degenerates numerically.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let tail = self
            .extension
            .map(|r| TightExtension::new(r.value(), self.total(), self.last()))
            .into_iter()
            .flatten()
            .take(MAX_EXTENSION_TERMS);
        self.bids.iter().copied().chain(tail)
    }

    /// The first `n` bids (fewer if the sequence is finite and shorter).
    pub fn terms(&self, n: usize) -> Vec<f64> {
        self.iter().take(n).collect()
    }

    /// Multiplies every bid by `c > 0`.
    pub fn scaled(&self, c: f64) -> BidSequence {
        BidSequence { bids: self.bids.iter().map(|x| x * c).collect(), extension: self.extension }
    }
}

fn normalize_increasing(mut bids: Vec<f64>) -> Result<Vec<f64>> {
    if bids.is_empty() {
        return Err(Error::Invalid("bid sequence is empty".into()));
    }
    if let Some(b) = bids.iter().find(|b| !b.is_finite() || **b <= 0.0) {
        return Err(Error::Invalid(format!("bids must be positive and finite, got {b}")));
    }
    for i in 1..bids.len() {
        let prev = bids[i - 1];
        if bids[i] < prev * (1.0 - STRICT_SLACK) {
            return Err(Error::Invalid(format!(
                "bids must be increasing: x_{} = {} < x_{} = {}",
                i,
                bids[i],
                i - 1,
                prev
            )));
        }
        bids[i] = bids[i].max(prev * (1.0 + STRICT_SLACK));
    }
    Ok(bids)
}

/// Generator of tight-extension terms `z = r * last - total`, where `total`
/// is the sum of every bid so far (including the offset of an earlier epoch
/// when used for contract schedules).
///
/// At the extendability boundary the exact recurrence sits on a repelling
/// fixed point, so rounding can push it over. A term that falls short of the
/// smallest admissible value by less than [`FEAS_TOL`] (relative) is lifted
/// to it. The generator ends when the sequence stops increasing.
#[derive(Clone, Debug)]
pub struct TightExtension {
    r: f64,
    zeta2: f64,
    total: f64,
    last: f64,
}

impl TightExtension {
    pub fn new(r: f64, total: f64, last: f64) -> Self {
        let zeta2 = RootPair::of(r.max(RobustnessReq::MIN)).zeta2;
        TightExtension { r, zeta2, total, last }
    }
}

impl Iterator for TightExtension {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let mut next = self.r * self.last - self.total;
        if self.zeta2 > 1.0 {
            let floor = self.total / (self.zeta2 - 1.0);
            if next < floor && floor - next <= FEAS_TOL * floor {
                next = floor;
            }
        }
        if !next.is_finite() || next <= self.last {
            return None;
        }
        self.total += next;
        self.last = next;
        Some(next)
    }
}

/// Cost of locating target `u` with `x`: the sum of all bids up to and
/// including the first bid `>= u`.
pub fn bidding_cost(x: &BidSequence, u: f64) -> Result<f64> {
    if !u.is_finite() || u <= 0.0 {
        return Err(Error::Invalid(format!("target must be positive, got {u}")));
    }
    let mut total = 0.0;
    for bid in x.iter() {
        total += bid;
        if bid >= u {
            return Ok(total);
        }
    }
    Err(Error::Unreachable(u))
}

/// Expected cost over `mu` divided by the expected target.
pub fn consistency(x: &BidSequence, mu: &DiscretePrediction) -> Result<f64> {
    let mut cost = 0.0;
    for p in mu.points() {
        cost += p.prob * bidding_cost(x, p.value)?;
    }
    Ok(cost / mu.mean())
}

fn scaled_tol(magnitude: f64) -> f64 {
    FEAS_TOL * magnitude.abs().max(1.0)
}

/// Checks the cap on the first bid and the growth inequality on every
/// consecutive pair of the finite prefix.
pub fn is_partially_robust(bids: &[f64], r: f64) -> bool {
    let Some(&first) = bids.first() else {
        return false;
    };
    if first > r + scaled_tol(r) {
        return false;
    }
    let mut total = 0.0;
    for w in bids.windows(2) {
        total += w[0];
        let bound = r * w[0] - total;
        if w[1] > bound + scaled_tol(r * w[0]) {
            return false;
        }
    }
    true
}

/// True when `sum(bids) / last(bids) <= zeta2(r)`, the condition under which
/// a robust prefix admits a robust infinite continuation.
pub fn extendability_ratio_ok(bids: &[f64], r: f64) -> bool {
    let Some(&last) = bids.last() else {
        return false;
    };
    let zeta2 = RootPair::of(r).zeta2;
    let total: f64 = bids.iter().sum();
    total / last <= zeta2 + FEAS_TOL
}

/// Robustness of `x` against every target. A finite sequence is judged on its
/// consecutive pairs; an extended one must in addition be extendable at the
/// end of its prefix.
pub fn robustness_check(x: &BidSequence, r: RobustnessReq) -> bool {
    if !is_partially_robust(x.bids(), r.value()) {
        return false;
    }
    match x.extension_req() {
        Some(_) => extendability_ratio_ok(x.bids(), r.value()),
        None => true,
    }
}

pub fn is_extendable(y: &BidSequence, r: RobustnessReq) -> bool {
    is_partially_robust(y.bids(), r.value()) && extendability_ratio_ok(y.bids(), r.value())
}

/// Appends `count` tight-extension terms to `y`.
pub fn tight_extension(y: &BidSequence, r: RobustnessReq, count: usize) -> Result<BidSequence> {
    if !is_extendable(y, r) {
        return Err(Error::NotExtendable);
    }
    let mut bids = y.bids().to_vec();
    let ext = TightExtension::new(r.value(), y.total(), y.last());
    let start = bids.len();
    bids.extend(ext.take(count));
    if bids.len() - start < count {
        return Err(Error::Numerical(format!(
            "tight extension degenerated after {} terms",
            bids.len() - start
        )));
    }
    Ok(BidSequence { bids, extension: Some(r) })
}

/// The unguarded recurrence `z_i = r (z_{i-1} - z_{i-2})`, started from
/// `z_{-2} = sum(Y) / r` and `z_{-1} = last(Y)`. Returns `steps` terms, even
/// if they stop increasing or turn negative.
pub fn raw_extension_recurrence(y: &[f64], r: f64, steps: usize) -> Vec<f64> {
    let total: f64 = y.iter().sum();
    let mut prev2 = total / r;
    let mut prev1 = y[y.len() - 1];
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let z = r * (prev1 - prev2);
        out.push(z);
        prev2 = prev1;
        prev1 = z;
    }
    out
}

/// Closed-form value of the tight-extension term `z_{n-2}` of `y` for `r > 4`
/// (so `n = 2` gives the first appended term).
///
/// With the prefix scaled so that its sum equals `r`, the recurrence solves to
/// `z_{n-2} = 2^{-(n+1)} / r' * (r' ((r+r')^n + (r-r')^n) - (r - 2 y_l) ((r+r')^n - (r-r')^n))`
/// where `r' = sqrt(r (r - 4))`. The result is scaled back to `y`'s units.
pub fn extension_closed_form(y: &BidSequence, r: f64, n: u32) -> Result<f64> {
    if !(r.is_finite() && r > 4.0) {
        return Err(Error::Invalid(format!(
            "closed form needs r > 4 (double root at r = 4), got {r}"
        )));
    }
    let scale = r / y.total();
    let last = y.last() * scale;
    let rp = (r * (r - 4.0)).sqrt();
    // (r +- r')^n / 2^n, kept in this form to avoid overflow.
    let hi = (0.5 * (r + rp)).powi(n as i32);
    let lo = (0.5 * (r - rp)).powi(n as i32);
    let value = (rp * (hi + lo) - (r - 2.0 * last) * (hi - lo)) / (2.0 * rp);
    Ok(value / scale)
}
