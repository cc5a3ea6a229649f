//! Contract scheduling when predictions of the interruption time arrive over
//! time.
//!
//! Each prediction opens an epoch. At time `T` with last completed contract
//! `last`, the epoch prefix `x_0 <= ... <= x_j` is the solution of
//!
//! ```text
//! maximize    x_j
//! subject to  x_0 <= r * last - T
//!             x_{i+1} <= r * x_i - (T + x_0 + ... + x_i)
//!             T + x_0 + ... + x_j <= u_hat
//!             T + x_0 + ... + x_j <= zeta2 * x_j
//!             x_i <= x_{i+1}
//! ```
//!
//! maximized also over `j`. A fresh state has `T = 0` and a virtual last
//! contract of length 1.

use serde::{Deserialize, Serialize};

use crate::bidding::{RobustnessReq, TightExtension, FEAS_TOL};
use crate::error::{Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpOutcome};
use crate::pareto::slow_rate;

/// Everything executed so far.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleState {
    pub contracts: Vec<f64>,
    pub t_now: f64,
    pub last: f64,
    pub r: RobustnessReq,
}

/// One epoch's synthesized prefix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochSchedule {
    pub contracts: Vec<f64>,
    pub j_star: usize,
    pub consistency: f64,
    /// Start time of the epoch.
    pub t_start: f64,
    pub u_hat: f64,
    pub r: RobustnessReq,
}

impl EpochSchedule {
    /// Largest completed contract if the interruption happens at `u_hat`.
    pub fn best_contract(&self) -> f64 {
        self.contracts[self.j_star]
    }

    pub fn end_time(&self) -> f64 {
        self.t_start + self.contracts.iter().sum::<f64>()
    }

    /// Tight continuation after the prefix, used when no new prediction arrives.
    pub fn extension(&self) -> TightExtension {
        TightExtension::new(self.r.value(), self.end_time(), self.best_contract())
    }
}

impl ScheduleState {
    pub fn fresh(r: RobustnessReq) -> Self {
        ScheduleState { contracts: Vec::new(), t_now: 0.0, last: 1.0, r }
    }

    /// State after running every contract of `epoch`.
    pub fn advance(&self, epoch: &EpochSchedule) -> Self {
        let mut contracts = self.contracts.clone();
        contracts.extend_from_slice(&epoch.contracts);
        let t_now = contracts.iter().sum();
        ScheduleState { contracts, t_now, last: *epoch.contracts.last().unwrap_or(&self.last), r: self.r }
    }
}

/// The LP for an epoch prefix of `j + 1` contracts, as a minimization of `-x_j`.
pub fn build_update_lp(state: &ScheduleState, u_hat: f64, j: usize) -> LinearProgram {
    let r = state.r.value();
    let zeta2 = state.r.roots().zeta2;
    let t = state.t_now;
    let n = j + 1;
    let mut lp = LinearProgram::new(n);
    lp.objective_mut()[j] = -1.0;
    lp.add_le_sparse(&[(0, 1.0)], r * state.last - t);
    for i in 0..j {
        let mut row = vec![0.0; n];
        row[..=i].iter_mut().for_each(|c| *c = 1.0);
        row[i] -= r;
        row[i + 1] = 1.0;
        lp.add_le(row, -t);
        lp.add_le_sparse(&[(i, 1.0), (i + 1, -1.0)], 0.0);
    }
    lp.add_le(vec![1.0; n], u_hat - t);
    let mut ext = vec![1.0; n];
    ext[j] -= zeta2;
    lp.add_le(ext, -t);
    lp
}

/// Largest contract count index tried by [`schedule_update`].
pub fn max_contract_index(u_hat: f64, r: RobustnessReq) -> usize {
    ((u_hat.ln() / slow_rate(r).ln()).ceil().max(0.0) as usize) + 2
}

/// Synthesize the next epoch for prediction `u_hat`.
pub fn schedule_update(state: &ScheduleState, u_hat: f64) -> Result<EpochSchedule> {
    if !(u_hat.is_finite() && u_hat > state.t_now) {
        return Err(Error::Invalid(format!("prediction {u_hat} must exceed current time {}", state.t_now)));
    }
    let mut best: Option<(usize, Vec<f64>, f64)> = None;
    for j in 0..=max_contract_index(u_hat, state.r) {
        let lp = build_update_lp(state, u_hat, j);
        let point = match lp_solve(&lp)? {
            LpOutcome::Optimal { point, .. } => point,
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => return Err(Error::Numerical("unbounded schedule LP".into())),
        };
        let value = point[j];
        if value <= 0.0 || point[0] <= 0.0 {
            continue;
        }
        // Ties go to the shorter prefix.
        if best.as_ref().is_none_or(|(_, _, v)| value > v * (1.0 + FEAS_TOL)) {
            best = Some((j, point, value));
        }
    }
    let (j_star, contracts, value) = best.ok_or(Error::InfeasibleUpdate)?;
    Ok(EpochSchedule {
        contracts,
        j_star,
        consistency: u_hat / value,
        t_start: state.t_now,
        u_hat,
        r: state.r,
    })
}

/// Worst ratio `T / l(T)` over all interruption times, `l` being the longest
/// completed contract (at least the virtual unit contract).
///
/// The supremum is approached right before each completion.
pub fn acceleration_ratio(contracts: &[f64]) -> Result<f64> {
    if contracts.is_empty() || contracts.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::Invalid("contracts must be a non-empty list of positive lengths".into()));
    }
    let mut elapsed = 0.0;
    let mut longest: f64 = 1.0;
    let mut worst: f64 = 0.0;
    for &c in contracts {
        elapsed += c;
        worst = worst.max(elapsed / longest);
        longest = longest.max(c);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionArrival {
    pub u_hat: f64,
}

/// A stream of predictions. Each one arrives at the completion of the
/// previous epoch's last prefix contract.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub r: RobustnessReq,
    pub predictions: Vec<PredictionArrival>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub t: f64,
    pub u_hat: f64,
    pub contracts: Vec<f64>,
    pub consistency: f64,
    pub acceleration: f64,
}

pub fn run_scenario(scenario: &Scenario) -> Result<Vec<TraceRow>> {
    let mut state = ScheduleState::fresh(scenario.r);
    let mut trace = Vec::with_capacity(scenario.predictions.len());
    for (epoch, p) in scenario.predictions.iter().enumerate() {
        let sched = schedule_update(&state, p.u_hat)?;
        state = state.advance(&sched);
        trace.push(TraceRow {
            epoch,
            t: sched.t_start,
            u_hat: p.u_hat,
            contracts: sched.contracts,
            consistency: sched.consistency,
            acceleration: acceleration_ratio(&state.contracts)?,
        });
    }
    Ok(trace)
}
