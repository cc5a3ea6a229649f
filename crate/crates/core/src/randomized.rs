//! Randomized bidding with a single predicted target.
//!
//! `R_{delta,a}` bids `x_i = lambda a^{i+s}` with `s ~ U[delta, 1)`, where
//! `lambda` is chosen so the prediction sits at offset `delta` inside a
//! geometric period. `delta = 0` is the classic randomized doubling strategy;
//! `delta -> 1` removes the randomness. This module also evaluates the
//! adversarial distribution that lower-bounds every randomized strategy.

use rand::Rng;
use serde::Serialize;

use crate::bidding::{zeta_roots, BidSequence};
use crate::error::{Error, Result};
use crate::numeric::{bisect, gauss_legendre_composite, golden_section};

/// Below this distance from one, `delta` is treated as its limit.
const DELTA_LIMIT: f64 = 1e-9;

/// The value used to represent `delta -> 1` as a valid parameter.
pub const DELTA_NEAR_ONE: f64 = 1.0 - 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RandParams {
    pub delta: f64,
    pub a: f64,
}

impl RandParams {
    pub fn new(delta: f64, a: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Invalid(format!("delta must lie in [0, 1), got {delta}")));
        }
        if !(a.is_finite() && a > 1.0) {
            return Err(Error::Invalid(format!("base must exceed 1, got {a}")));
        }
        Ok(RandParams { delta, a })
    }
}

/// One draw of `R_{delta,a}` for prediction `u_hat`.
///
/// Bids are indexed by integers (possibly negative); the strategy starts at
/// the first index whose bid is at least one, since every target is.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealizedStrategy {
    pub lambda: f64,
    /// Index whose bid covers `u_hat`; `-1` when `u_hat < a^delta`.
    pub j: i64,
    pub s: f64,
    pub a: f64,
    /// First bid index.
    pub start: i64,
}

impl RealizedStrategy {
    /// Builds the strategy for a given `s` in `[delta, 1)`.
    pub fn with_offset(u_hat: f64, p: RandParams, s: f64) -> Result<Self> {
        if !(u_hat.is_finite() && u_hat >= 1.0) {
            return Err(Error::Invalid(format!("prediction must be >= 1, got {u_hat}")));
        }
        let ln_a = p.a.ln();
        // Exact powers of `a` must not fall to the previous period by rounding.
        let j = (u_hat.ln() / ln_a - p.delta + 1e-9).floor() as i64;
        let lambda = (u_hat / p.a.powf(j as f64 + p.delta)).max(1.0);
        // Smallest i with lambda a^{i+s} >= 1.
        let mut start = (-(lambda.ln() / ln_a) - s).ceil() as i64;
        if lambda * p.a.powf(start as f64 - 1.0 + s) >= 1.0 {
            start -= 1;
        }
        Ok(RealizedStrategy { lambda, j, s, a: p.a, start })
    }

    pub fn bid(&self, i: i64) -> f64 {
        self.lambda * self.a.powf(i as f64 + self.s)
    }

    /// Sum of all bids up to and including the first one `>= u`.
    pub fn cost(&self, u: f64) -> f64 {
        let mut total = 0.0;
        let mut i = self.start;
        loop {
            let b = self.bid(i);
            total += b;
            if b >= u {
                return total;
            }
            i += 1;
        }
    }

    /// The first `n` bids as a finite sequence.
    pub fn bids(&self, n: usize) -> Vec<f64> {
        (0..n as i64).map(|k| self.bid(self.start + k)).collect()
    }
}

/// Draws `s ~ U[delta, 1)` and builds the realized strategy.
pub fn realize<R: Rng + ?Sized>(u_hat: f64, p: RandParams, rng: &mut R) -> Result<RealizedStrategy> {
    let s = if p.delta < 1.0 { rng.random_range(p.delta..1.0) } else { p.delta };
    RealizedStrategy::with_offset(u_hat, p, s)
}

/// `(a - a^delta) / (1 - delta)`, continued by `a ln a` at `delta = 1`.
fn spread(p: RandParams) -> f64 {
    if 1.0 - p.delta < DELTA_LIMIT {
        p.a * p.a.ln()
    } else {
        (p.a - p.a.powf(p.delta)) / (1.0 - p.delta)
    }
}

/// Upper bound on the consistency of `R_{delta,a}`.
pub fn cons_bound(p: RandParams) -> f64 {
    rob_bound(p) / p.a.powf(if 1.0 - p.delta < DELTA_LIMIT { 1.0 } else { p.delta })
}

/// Upper bound on the robustness of `R_{delta,a}`.
pub fn rob_bound(p: RandParams) -> f64 {
    p.a * spread(p) / ((p.a - 1.0) * p.a.ln())
}

/// Best parameters for a robustness budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RstarResult {
    pub delta_star: f64,
    pub a_star: f64,
    pub cons_star: f64,
    pub rob: f64,
}

/// Largest `delta` with `rob_bound(delta, a) <= r`, or `None` if even
/// `delta = 0` exceeds the budget.
fn max_delta(a: f64, r: f64) -> Option<f64> {
    let rob = |d: f64| rob_bound(RandParams { delta: d, a });
    if rob(0.0) > r {
        return None;
    }
    if rob(DELTA_NEAR_ONE) <= r * (1.0 + 1e-12) {
        return Some(DELTA_NEAR_ONE);
    }
    bisect(|d| rob(d) - r, 0.0, DELTA_NEAR_ONE, 1e-13).map(|d| {
        // Stay on the feasible side of the root.
        if rob(d) > r {
            (d - 1e-12).max(0.0)
        } else {
            d
        }
    })
}

fn cons_at(a: f64, r: f64) -> f64 {
    match max_delta(a, r) {
        Some(d) => cons_bound(RandParams { delta: d, a }),
        None => f64::INFINITY,
    }
}

/// Minimizes `cons_bound` over `(delta, a)` subject to `rob_bound <= r`.
///
/// For fixed `a` the robustness bound increases with `delta` and the
/// consistency bound decreases, so the inner problem is the largest feasible
/// `delta`. The outer problem is a scan over the feasible `a` interval
/// (`a / ln a <= r`) refined by golden-section search; the deterministic limit
/// `delta -> 1`, `a = zeta2(r)` is always a candidate when `r >= 4`.
pub fn optimize_rstar(r: f64) -> Result<RstarResult> {
    let e = std::f64::consts::E;
    if !(r.is_finite() && r >= e) {
        return Err(Error::Invalid(format!("robustness below e: {r}")));
    }
    let g = |a: f64| a / a.ln() - r;
    let (a_lo, a_hi) = if r - e < 1e-12 {
        (e, e)
    } else {
        let lo = bisect(g, 1.0 + 1e-12, e, 1e-15).unwrap_or(e);
        let mut top = 2.0 * e;
        while g(top) < 0.0 {
            top *= 2.0;
        }
        (lo, bisect(g, e, top, 1e-15).unwrap_or(e))
    };

    let mut best = (f64::INFINITY, e);
    let steps = 600;
    for i in 0..=steps {
        let a = a_lo + (a_hi - a_lo) * i as f64 / steps as f64;
        let c = cons_at(a, r);
        if c < best.0 {
            best = (c, a);
        }
    }
    let width = (a_hi - a_lo) / steps as f64;
    if width > 0.0 {
        let lo = (best.1 - width).max(a_lo);
        let hi = (best.1 + width).min(a_hi);
        let (a, c) = golden_section(|a| cons_at(a, r), lo, hi, 1e-12);
        if c < best.0 {
            best = (c, a);
        }
    }
    if r >= 4.0 {
        let a = zeta_roots(r)?.zeta2;
        let c = cons_bound(RandParams { delta: DELTA_NEAR_ONE, a });
        if c < best.0 && rob_bound(RandParams { delta: DELTA_NEAR_ONE, a }) <= r + 1e-9 {
            best = (c, a);
        }
    }
    let a_star = best.1;
    let delta_star = max_delta(a_star, r)
        .ok_or_else(|| Error::Numerical(format!("no feasible delta at a = {a_star}")))?;
    let p = RandParams { delta: delta_star, a: a_star };
    Ok(RstarResult { delta_star, a_star, cons_star: cons_bound(p), rob: rob_bound(p) })
}

/// Monte Carlo estimate of `E[cost(u)] / u` with a 95% normal half-width.
pub fn mc_ratio<R: Rng + ?Sized>(
    u_hat: f64,
    p: RandParams,
    u: f64,
    trials: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be positive".into()));
    }
    if !(u.is_finite() && u >= 1.0) {
        return Err(Error::Invalid(format!("target must be >= 1, got {u}")));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let ratio = realize(u_hat, p, rng)?.cost(u) / u;
        sum += ratio;
        sum_sq += ratio * ratio;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok((mean, 1.96 * (var / n).sqrt()))
}

/// Adversarial target distribution: density `epsilon / t` on `[1, R)` and
/// an atom of mass `epsilon` at `R = exp((1 - epsilon) / epsilon)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdversaryParams {
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
}

impl AdversaryParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        Ok(AdversaryParams { epsilon, big_r: ((1.0 - epsilon) / epsilon).exp() })
    }

    /// Draws a target by inverting the CDF `epsilon ln t` on `[1, R)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v: f64 = rng.random();
        if v >= 1.0 - self.epsilon {
            self.big_r
        } else {
            (v / self.epsilon).exp()
        }
    }
}

/// Bids of `x` truncated at the first bid `>= R`, which is replaced by `R`.
fn truncate_at(x: &BidSequence, big_r: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for b in x.iter() {
        if b >= big_r {
            out.push(big_r);
            return Ok(out);
        }
        out.push(b);
    }
    Err(Error::Invalid(format!("strategy does not reach R = {big_r}")))
}

/// Expected ratio `E[cost(T) / T]` for `T` drawn from the adversary, which
/// telescopes to `epsilon * sum_i x_i / max(1, x_{i-1})` with `x_{-1} = 1`.
pub fn adversary_expected_ratio(x: &BidSequence, adv: AdversaryParams) -> Result<f64> {
    let bids = truncate_at(x, adv.big_r)?;
    let mut prev = 1.0f64;
    let mut sum = 0.0;
    for b in bids {
        sum += b / prev.max(1.0);
        prev = b;
    }
    Ok(adv.epsilon * sum)
}

/// The same expectation by quadrature over `y = ln t` on every piece where
/// the cost is constant, plus the atom at `R`.
pub fn adversary_expected_ratio_quadrature(x: &BidSequence, adv: AdversaryParams) -> Result<f64> {
    let bids = truncate_at(x, adv.big_r)?;
    let mut total = 0.0;
    let mut paid = 0.0;
    let mut lo = 0.0f64;
    for &b in &bids {
        paid += b;
        let hi = b.ln();
        if hi > lo {
            // Cost is `paid` on (e^lo, e^hi]; (epsilon / t) dt / t = epsilon e^{-y} dy.
            let panels = (hi - lo).ceil() as usize + 1;
            total += gauss_legendre_composite(|y| paid * adv.epsilon * (-y).exp(), lo, hi, panels);
            lo = hi;
        }
    }
    Ok(total + adv.epsilon * paid / adv.big_r)
}

/// Geometric strategy whose consecutive ratios are all equal and whose last
/// bid is `R`, the equality case of the adversary bound.
pub fn equal_ratio_strategy(adv: AdversaryParams) -> Result<BidSequence> {
    let ln_r = adv.big_r.ln();
    let m = ln_r.round().max(1.0) as i32;
    let step = ln_r / m as f64;
    BidSequence::new((1..=m).map(|i| (step * i as f64).exp()).collect())
}

/// Slack of the lower-bound curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBoundParams {
    pub xi: f64,
}

impl LowerBoundParams {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::Invalid(format!("xi must be positive, got {xi}")));
        }
        Ok(LowerBoundParams { xi })
    }
}

/// `F(T) = ln(T (ln T + ln ln T))`, defined for `T > e`.
pub fn f_curve(t: f64) -> Result<f64> {
    let ll = t.ln().ln();
    if !(ll > 0.0) {
        return Err(Error::Invalid(format!("r too small: ln ln {t} <= 0")));
    }
    Ok((t * (t.ln() + ll)).ln())
}

/// Consistency that no `r`-robust randomized strategy can beat:
/// `1 + 1 / ((1 + xi) r F(r))`.
pub fn lower_bound_curve(r: f64, lb: LowerBoundParams) -> Result<f64> {
    Ok(1.0 + 1.0 / ((1.0 + lb.xi) * r * f_curve(r)?))
}

/// Best deterministic consistency at robustness `r`: `zeta2 / (zeta2 - 1)`.
pub fn det_pareto_cons(r: f64) -> Result<f64> {
    let z = zeta_roots(r)?.zeta2;
    Ok(z / (z - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn realize_examples() {
        let p = RandParams::new(0.3, 2.5).unwrap();
        let u_hat = 2.5f64.powf(2.3);
        let st = RealizedStrategy::with_offset(u_hat, p, 0.3).unwrap();
        assert_eq!(st.j, 2);
        assert_relative_eq!(st.lambda, 1.0, epsilon = 1e-12);
        assert!(st.bid(2) >= u_hat * (1.0 - 1e-12));

        let p = RandParams::new(0.0, E).unwrap();
        let st = RealizedStrategy::with_offset(E.powi(3), p, 0.5).unwrap();
        assert_eq!(st.j, 3);
        assert_relative_eq!(st.lambda, 1.0, epsilon = 1e-12);

        let p = RandParams::new(0.5, 2.0).unwrap();
        let st = RealizedStrategy::with_offset(10.0, p, 0.7).unwrap();
        assert_eq!(st.j, 2);
        assert_relative_eq!(st.lambda, 10.0 / 2f64.powf(2.5), epsilon = 1e-12);
        assert!(st.bid(st.start) >= 1.0 && st.bid(st.start - 1) < 1.0);
    }

    #[test]
    fn bound_examples() {
        let p = RandParams::new(0.0, E).unwrap();
        assert_relative_eq!(cons_bound(p), E, epsilon = 1e-12);
        assert_relative_eq!(rob_bound(p), E, epsilon = 1e-12);
        let p = RandParams::new(DELTA_NEAR_ONE, 2.0).unwrap();
        assert_relative_eq!(rob_bound(p), 4.0, epsilon = 1e-12);
        assert_relative_eq!(cons_bound(p), 2.0, epsilon = 1e-12);
        let p = RandParams::new(0.5, E).unwrap();
        let expected = E * (E - E.sqrt()) / (E.sqrt() * (E - 1.0) * 0.5);
        assert_relative_eq!(cons_bound(p), expected, epsilon = 1e-12);
        assert!((cons_bound(p) - 2.052524).abs() < 1e-6);
    }

    #[test]
    fn bounds_approach_their_limit_continuously() {
        let near = RandParams::new(1.0 - 1e-7, 3.0).unwrap();
        let at = RandParams::new(DELTA_NEAR_ONE, 3.0).unwrap();
        assert_relative_eq!(rob_bound(near), rob_bound(at), max_relative = 1e-6);
        assert_relative_eq!(cons_bound(near), cons_bound(at), max_relative = 1e-6);
    }

    #[test]
    fn rstar_meets_budget_and_beats_deterministic() {
        for r in [3.0, 4.0, 4.5, 5.0, 8.0, 12.0] {
            let res = optimize_rstar(r).unwrap();
            assert!(res.rob <= r + 1e-6, "r={r}: {res:?}");
            if r >= 4.0 {
                assert!(res.cons_star <= det_pareto_cons(r).unwrap() + 1e-6);
            }
        }
        let res = optimize_rstar(4.0).unwrap();
        assert!((res.cons_star - 1.69483).abs() < 1e-4, "{res:?}");
        assert!((res.delta_star - 0.801).abs() < 0.01, "{res:?}");
        assert!(optimize_rstar(2.5).is_err());
    }

    #[test]
    fn rstar_at_e_is_randomized_doubling() {
        let res = optimize_rstar(E).unwrap();
        assert_relative_eq!(res.a_star, E, epsilon = 1e-6);
        assert!(res.delta_star < 1e-6);
        assert_relative_eq!(res.cons_star, E, epsilon = 1e-9);
    }

    #[test]
    fn single_trial_is_reproducible() {
        let p = RandParams::new(0.2, 2.0).unwrap();
        let a = mc_ratio(50.0, p, 50.0, 1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = mc_ratio(50.0, p, 50.0, 1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1, 0.0);
    }

    #[test]
    fn adversary_examples() {
        let adv = AdversaryParams::new(0.5).unwrap();
        assert_relative_eq!(adv.big_r, E, epsilon = 1e-15);
        let x = BidSequence::new(vec![E]).unwrap();
        let v = adversary_expected_ratio(&x, adv).unwrap();
        assert_relative_eq!(v, 0.5 * E, epsilon = 1e-15);
        assert_relative_eq!(adversary_expected_ratio_quadrature(&x, adv).unwrap(), v, max_relative = 1e-12);

        let adv = AdversaryParams::new(0.1).unwrap();
        let eq = equal_ratio_strategy(adv).unwrap();
        assert_eq!(eq.bids().len(), 9);
        assert_relative_eq!(adversary_expected_ratio(&eq, adv).unwrap(), 0.9 * E, max_relative = 1e-12);
        let short = BidSequence::new(vec![2.0, 3.0]).unwrap();
        assert!(adversary_expected_ratio(&short, adv).is_err());
    }

    #[test]
    fn adversary_sampling_matches_its_mass() {
        let adv = AdversaryParams::new(0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| adv.sample(&mut rng)).collect();
        let atoms = draws.iter().filter(|&&t| t == adv.big_r).count();
        assert!((atoms as f64 / n as f64 - 0.3).abs() < 0.01);
        // The sample mean of cost/T for X = (R) is the exact ratio.
        let x = BidSequence::new(vec![adv.big_r]).unwrap();
        let mc = draws.iter().map(|t| adv.big_r / t).sum::<f64>() / n as f64;
        assert!((mc - adversary_expected_ratio(&x, adv).unwrap()).abs() < 0.02);
    }

    #[test]
    fn lower_bound_examples() {
        let lb = LowerBoundParams::new(1e-6).unwrap();
        let v = lower_bound_curve(4.0, lb).unwrap();
        assert!((v - 1.12990).abs() < 1e-4, "{v}");
        assert!(lower_bound_curve(1e9, lb).unwrap() < 1.0 + 1e-9);
        assert!(lower_bound_curve(E + 0.01, lb).unwrap() > 1.0);
        assert!(lower_bound_curve(E, lb).is_err());
    }

    #[test]
    fn deterministic_examples() {
        assert_eq!(det_pareto_cons(4.0).unwrap(), 2.0);
        assert_relative_eq!(det_pareto_cons(4.5).unwrap(), 1.5, epsilon = 1e-12);
        assert!(det_pareto_cons(1e12).unwrap() < 1.0 + 1e-5);
        assert!(det_pareto_cons(3.9).is_err());
    }
}
