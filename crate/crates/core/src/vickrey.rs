//! Bottleneck-queue validation of the linear congestion model.
//!
//! A unit-capacity bottleneck with deterministic service time `tau` and
//! Poisson arrivals is an M/D/1 queue. Its expected sojourn time is matched
//! by the linear estimator `tau * (1 + phi * f)` with `phi = 1 / (2 - rho)`.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sensitivity that makes the linear estimator exact for intensity `rho`.
pub fn phi_for_rho(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!("rho {rho} is outside (0, 1]")));
    }
    Ok(1.0 / (2.0 - rho))
}

/// Expected M/D/1 sojourn time `tau + tau * rho / (2 (1 - rho))`.
pub fn expected_bottleneck_time(tau: f64, rho: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!(
            "rho {rho} is outside [0, 1): the queue is unstable"
        )));
    }
    Ok(tau + tau * rho / (2.0 * (1.0 - rho)))
}

/// Expected travel time of the linear estimator, `tau + phi tau rho / (1 - phi rho)`.
///
/// Follows from Little's law: the expected flow solves `E[f] = rho (1 + phi E[f])`.
pub fn expected_linear_time(tau: f64, rho: f64, phi: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) || !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::Domain(format!(
            "rho {rho} or phi {phi} out of range"
        )));
    }
    if phi * rho >= 1.0 {
        return Err(Error::Domain(format!("phi * rho = {} >= 1", phi * rho)));
    }
    Ok(tau + phi * tau * rho / (1.0 - phi * rho))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BottleneckConfig {
    pub tau_s: f64,
    /// Arrivals per second.
    pub rate: f64,
}

impl BottleneckConfig {
    pub fn from_rho(tau_s: f64, rho: f64) -> Self {
        BottleneckConfig {
            tau_s,
            rate: rho / tau_s,
        }
    }

    pub fn rho(&self) -> f64 {
        self.rate * self.tau_s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_s > 0.0 && self.tau_s.is_finite()) {
            return Err(Error::Domain("tau must be positive".into()));
        }
        if !(self.rate >= 0.0 && self.rho() < 1.0) {
            return Err(Error::Domain(format!(
                "traffic intensity {} is outside [0, 1)",
                self.rho()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    /// Mean travel time after warm-up.
    pub mean_s: f64,
    /// Batch-means standard error of `mean_s`.
    pub std_error_s: f64,
    /// Mean over all arrivals, warm-up included.
    pub raw_mean_s: f64,
    /// Mean number of trips found in the bottleneck by an arrival (after
    /// warm-up). By PASTA this is the time-average queue length.
    pub mean_in_system: f64,
    pub in_system_std_error: f64,
    pub samples: usize,
}

/// Batch count for standard errors of correlated queue samples.
pub const BATCHES: usize = 100;

/// Mean and batch-means standard error of `xs`.
pub fn batch_means(xs: &[f64], batches: usize) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let b = batches.min(n);
    if b < 2 {
        return (mean, f64::INFINITY);
    }
    let size = n / b;
    let means: Vec<f64> = (0..b)
        .map(|i| xs[i * size..(i + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (b - 1) as f64;
    (mean, libm::sqrt(var / b as f64))
}

/// Simulates `n_arrivals` trips through the bottleneck.
///
/// An arrival that finds the bottleneck empty travels in `tau`. Otherwise it
/// finds `f` trips and travels in `remaining + f * tau`: the residual service
/// of the trip being served, the `f - 1` queued services and its own. The
/// first 1% of arrivals is discarded as warm-up.
pub fn simulate_bottleneck(
    config: &BottleneckConfig,
    n_arrivals: usize,
    seed: u64,
) -> Result<SimulationResult> {
    config.validate()?;
    if n_arrivals == 0 {
        return Err(Error::InvalidParameter(
            "n_arrivals must be at least 1".into(),
        ));
    }
    let tau = config.tau_s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Departure times of trips still in the bottleneck, in service order.
    let mut in_system: VecDeque<f64> = VecDeque::new();
    let mut t = 0.0;
    let mut travel = Vec::with_capacity(n_arrivals);
    let mut found = Vec::with_capacity(n_arrivals);
    for i in 0..n_arrivals {
        if i > 0 {
            let u: f64 = rng.random();
            t += -libm::log(1.0 - u) / config.rate;
        }
        while in_system.front().is_some_and(|&d| d <= t) {
            in_system.pop_front();
        }
        let f = in_system.len();
        let time = match in_system.front() {
            None => tau,
            Some(&front) => (front - t) + f as f64 * tau,
        };
        in_system.push_back(t + time);
        travel.push(time);
        found.push(f as f64);
    }
    let warm = n_arrivals / 100;
    let raw_mean = travel.iter().sum::<f64>() / n_arrivals as f64;
    let (mean, se) = batch_means(&travel[warm..], BATCHES);
    let (l, l_se) = batch_means(&found[warm..], BATCHES);
    Ok(SimulationResult {
        mean_s: mean,
        std_error_s: se,
        raw_mean_s: raw_mean,
        mean_in_system: l,
        in_system_std_error: l_se,
        samples: n_arrivals - warm,
    })
}
