//! Exhaustive optimizer for tiny instances.
//!
//! Start times are restricted to a grid, so the optimum is exact only on that
//! grid. Every combination is evaluated with [`construct_schedule`] and
//! [`evaluate`], the same code path the solvers are judged by.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::{Instance, Trip};
use crate::schedule::{
    construct_schedule, evaluate, Assignment, CostBreakdown, ObjectiveScope, Solution,
};
use crate::time::EPS;

/// Refuse searches larger than this many combinations.
pub const COMBINATION_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleGrid {
    pub step_s: f64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        OracleGrid { step_s: 1.0 }
    }
}

impl OracleGrid {
    /// `e, e + step, ...` up to and including `e + sigma`.
    pub fn starts(&self, trip: &Trip) -> Vec<f64> {
        let e = trip.earliest_departure_s;
        let hi = trip.latest_start_s();
        let mut out = Vec::new();
        let mut k = 0.0;
        loop {
            let s = e + k * self.step_s;
            if s >= hi - EPS {
                break;
            }
            out.push(s);
            k += 1.0;
        }
        out.push(hi);
        out
    }

    pub fn combinations(&self, instance: &Instance) -> u128 {
        instance
            .trips()
            .iter()
            .map(|t| (t.routes.len() * self.starts(t).len()) as u128)
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub solution: Solution,
    pub cost: CostBreakdown,
    pub combinations: u128,
}

/// Minimum-cost assignment over every route and grid start of every trip.
///
/// Ties keep the lexicographically first assignment by (trip id, route
/// index, start). With `feasible_only`, late assignments are skipped.
pub fn solve_exhaustive(
    instance: &Instance,
    grid: &OracleGrid,
    alpha: f64,
    scope: ObjectiveScope,
    feasible_only: bool,
    limit: u128,
) -> Result<OracleResult> {
    if !(grid.step_s > 0.0 && grid.step_s.is_finite()) {
        return Err(Error::InvalidParameter("grid step must be positive".into()));
    }
    let combinations = grid.combinations(instance);
    if combinations > limit.min(COMBINATION_LIMIT) {
        return Err(Error::OracleBudget {
            combinations,
            limit: limit.min(COMBINATION_LIMIT),
        });
    }
    // Digit choices per trip: (route, start).
    let choices: Vec<Vec<Assignment>> = instance
        .trips()
        .iter()
        .map(|t| {
            let starts = grid.starts(t);
            (0..t.routes.len())
                .flat_map(|route| {
                    starts
                        .iter()
                        .map(move |&start_s| Assignment { route, start_s })
                })
                .collect()
        })
        .collect();
    let n = choices.len();
    let mut digits = vec![0usize; n];
    let mut best: Option<(Solution, CostBreakdown)> = None;
    loop {
        let sol = Solution::from_assignments((0..n).map(|i| Some(choices[i][digits[i]])).collect());
        let sched = construct_schedule(instance, &sol);
        let cost = evaluate(instance, &sched, alpha, scope);
        if (!feasible_only || cost.is_feasible())
            && best.as_ref().is_none_or(|(_, b)| cost.cost < b.cost)
        {
            best = Some((sol, cost));
        }
        // Odometer with the last trip as the fastest digit.
        let mut i = n;
        loop {
            if i == 0 {
                let (solution, cost) =
                    best.ok_or_else(|| Error::Domain("no feasible assignment on the grid".into()))?;
                return Ok(OracleResult {
                    solution,
                    cost,
                    combinations,
                });
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < choices[i].len() {
                break;
            }
            digits[i] = 0;
        }
    }
}
