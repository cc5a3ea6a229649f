//! Geometric bidding heuristics `x_i = lambda rho^i` and the adversarial
//! predictions they are benchmarked on.

use bidsynth::pareto::expected_cost;
use bidsynth::{BidSequence, DiscretePrediction, Error, Result, RobustnessReq};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HeuristicKind {
    Zeta1,
    HalfR,
    Zeta2,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 3] = [HeuristicKind::Zeta1, HeuristicKind::HalfR, HeuristicKind::Zeta2];

    pub fn base(self, r: RobustnessReq) -> f64 {
        match self {
            HeuristicKind::Zeta1 => r.roots().zeta1,
            HeuristicKind::HalfR => 0.5 * r.value(),
            HeuristicKind::Zeta2 => r.roots().zeta2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::Zeta1 => "zeta1",
            HeuristicKind::HalfR => "half-r",
            HeuristicKind::Zeta2 => "zeta2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeuristicStrategy {
    pub kind: HeuristicKind,
    pub base: f64,
    pub lambda: f64,
    pub bids: BidSequence,
    pub expected_cost: f64,
    pub consistency: f64,
}

/// `anchor * base^(t - shift)` for `t = 0, 1, ...` up to the first bid `>= top`.
/// The anchor itself is hit exactly when `shift >= 0`.
fn geometric(anchor: f64, shift: i32, base: f64, top: f64) -> Vec<f64> {
    let mut bids = Vec::new();
    let mut t = 0;
    loop {
        let x = anchor * base.powi(t - shift);
        bids.push(x);
        if x >= top {
            return bids;
        }
        t += 1;
    }
}

/// Best geometric strategy of the given base for `mu`.
///
/// The expected cost is piecewise in `lambda` with minima where a bid lands
/// on a predicted point, so only `lambda = mu_i base^{-j}` in `[1, r]` and
/// `lambda = r` are tried. Starting points below one are never better: the
/// same strategy without its first bid is also a candidate. Ties go to the
/// largest `lambda`.
pub fn heuristic_strategy(kind: HeuristicKind, mu: &DiscretePrediction, r: RobustnessReq) -> Result<HeuristicStrategy> {
    let base = kind.base(r);
    if !(base > 1.0) {
        return Err(Error::Invalid(format!("base {base} must exceed 1")));
    }
    let top = mu.max_value();
    let mut candidates: Vec<(f64, Vec<f64>)> = vec![(r.value(), geometric(r.value(), 0, base, top))];
    for v in mu.values() {
        let mut j = 0;
        loop {
            let lambda = v * base.powi(-j);
            if lambda < 1.0 {
                break;
            }
            if lambda <= r.value() {
                candidates.push((lambda, geometric(v, j, base, top)));
            }
            j += 1;
        }
    }
    let mut best: Option<(f64, f64, BidSequence)> = None;
    for (lambda, bids) in candidates {
        let x = BidSequence::new(bids)?;
        let cost = expected_cost(&x, mu)?;
        let better = match &best {
            None => true,
            Some((c, l, _)) => {
                let tol = 1e-12 * c.abs().max(1.0);
                cost < c - tol || (cost <= c + tol && lambda > *l)
            }
        };
        if better {
            best = Some((cost, lambda, x));
        }
    }
    let (expected_cost, lambda, bids) = best.expect("lambda = r is always a candidate");
    Ok(HeuristicStrategy { kind, base, lambda, bids, expected_cost, consistency: expected_cost / mu.mean() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdversarialKind {
    /// `{(5000, 1/2), (2500 + 5000 r / 4, 1/2)}`.
    HalfR,
    /// `{(5000, 1/2), (2500 + 5000 zeta2 / 2, 1/2)}`.
    Zeta2,
    /// `{(1, 1 - 1/D), (D, 1/D)}` with `D = 2R`, for `r >= D^2`.
    PropD1 {
        #[serde(rename = "R")]
        big_r: f64,
    },
}

impl AdversarialKind {
    pub fn label(&self) -> String {
        match self {
            AdversarialKind::HalfR => "adv-half-r".into(),
            AdversarialKind::Zeta2 => "adv-zeta2".into(),
            AdversarialKind::PropD1 { big_r } => format!("propD1-R{big_r}"),
        }
    }
}

/// Two-point instances on which `r`-increasing heuristics do badly. They may
/// exceed the dataset support.
pub fn adversarial_prediction(kind: AdversarialKind, r: RobustnessReq) -> Result<DiscretePrediction> {
    let mu1 = 5000.0;
    match kind {
        AdversarialKind::HalfR => DiscretePrediction::from_pairs(&[(mu1, 0.5), (0.5 * mu1 + 0.25 * r.value() * mu1, 0.5)]),
        AdversarialKind::Zeta2 => {
            DiscretePrediction::from_pairs(&[(mu1, 0.5), (0.5 * mu1 + 0.5 * r.roots().zeta2 * mu1, 0.5)])
        }
        AdversarialKind::PropD1 { big_r } => {
            let delta = 2.0 * big_r;
            if !(delta > 1.0 && delta.is_finite() && r.value() >= delta * delta) {
                return Err(Error::Invalid(format!(
                    "parameters violate the gap construction: need 2R > 1 and r >= (2R)^2, got R = {big_r}, r = {}",
                    r.value()
                )));
            }
            DiscretePrediction::from_pairs(&[(1.0, 1.0 - 1.0 / delta), (delta, 1.0 / delta)])
        }
    }
}
