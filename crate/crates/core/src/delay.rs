//! Flow-dependent arc delay functions.
//!
//! A [`DelaySpec`] is the instance-wide configuration. It is resolved once per
//! arc into a [`DelayFunction`] so that evaluation during search is plain
//! arithmetic.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One non-flat segment of a piecewise-linear delay function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    /// Seconds of delay per trip above `threshold`.
    pub slope: f64,
    /// Flow (trips) at which this segment starts contributing.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelaySpec {
    /// `tau * alpha * [((f + beta) / tau)^gamma - (beta / tau)^gamma]`.
    Polynomial { alpha: f64, beta: f64, gamma: f64 },
    /// Capacity-derived piecewise-linear delay. The first breakpoint is
    /// `ceil(tau / headway_s)` trips, breakpoint `k` is `k` times that, and
    /// segment `k` has slope `0.5 * k * tau / p1`.
    Piecewise { headway_s: f64, segments: u32 },
    /// The same explicit segments on every arc.
    PiecewiseExplicit { pieces: Vec<Piece> },
}

impl Default for DelaySpec {
    fn default() -> Self {
        DelaySpec::Polynomial {
            alpha: 0.1,
            beta: 35.0,
            gamma: 3.0,
        }
    }
}

/// Delay function of a single arc.
#[derive(Clone, Debug, PartialEq)]
pub enum DelayFunction {
    Polynomial {
        alpha: f64,
        beta: f64,
        gamma: f64,
        nominal_s: f64,
    },
    PiecewiseLinear {
        pieces: Vec<Piece>,
    },
}

fn check_pieces(pieces: &[Piece]) -> Result<()> {
    if pieces.is_empty() {
        return Err(Error::InvalidDelay(
            "piecewise function needs at least one segment".into(),
        ));
    }
    for (k, p) in pieces.iter().enumerate() {
        if !(p.slope > 0.0 && p.slope.is_finite()) {
            return Err(Error::InvalidDelay(format!(
                "segment {k}: slope must be positive"
            )));
        }
        if !(p.threshold >= 0.0 && p.threshold.is_finite()) {
            return Err(Error::InvalidDelay(format!(
                "segment {k}: threshold must be non-negative"
            )));
        }
        if k > 0 && p.threshold <= pieces[k - 1].threshold {
            return Err(Error::InvalidDelay(format!(
                "segment {k}: thresholds must be strictly increasing"
            )));
        }
    }
    Ok(())
}

impl DelaySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DelaySpec::Polynomial { alpha, beta, gamma } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidDelay(
                        "polynomial alpha must be positive".into(),
                    ));
                }
                if !(beta >= 0.0 && beta.is_finite()) {
                    return Err(Error::InvalidDelay(
                        "polynomial beta must be non-negative".into(),
                    ));
                }
                if !(gamma >= 1.0 && gamma.is_finite()) {
                    return Err(Error::InvalidDelay(
                        "polynomial gamma must be at least 1".into(),
                    ));
                }
                Ok(())
            }
            DelaySpec::Piecewise {
                headway_s,
                segments,
            } => {
                if !(headway_s > 0.0 && headway_s.is_finite()) {
                    return Err(Error::InvalidDelay(
                        "piecewise headway_s must be positive".into(),
                    ));
                }
                if segments == 0 {
                    return Err(Error::InvalidDelay(
                        "piecewise needs at least one segment".into(),
                    ));
                }
                Ok(())
            }
            DelaySpec::PiecewiseExplicit { ref pieces } => check_pieces(pieces),
        }
    }

    /// Resolves the specification for an arc with free-flow time `nominal_s`.
    pub fn resolve(&self, nominal_s: f64) -> Result<DelayFunction> {
        self.validate()?;
        if !(nominal_s > 0.0 && nominal_s.is_finite()) {
            return Err(Error::InvalidDelay("nominal time must be positive".into()));
        }
        Ok(match *self {
            DelaySpec::Polynomial { alpha, beta, gamma } => DelayFunction::Polynomial {
                alpha,
                beta,
                gamma,
                nominal_s,
            },
            DelaySpec::Piecewise {
                headway_s,
                segments,
            } => DelayFunction::PiecewiseLinear {
                pieces: capacity_pieces(nominal_s, headway_s, segments),
            },
            DelaySpec::PiecewiseExplicit { ref pieces } => DelayFunction::PiecewiseLinear {
                pieces: pieces.clone(),
            },
        })
    }
}

/// Breakpoints and slopes of the capacity-derived piecewise delay.
pub fn capacity_pieces(nominal_s: f64, headway_s: f64, segments: u32) -> Vec<Piece> {
    let first = libm::ceil(nominal_s / headway_s).max(1.0);
    (1..=segments)
        .map(|k| {
            let k = f64::from(k);
            Piece {
                slope: 0.5 * k * nominal_s / first,
                threshold: k * first,
            }
        })
        .collect()
}

impl DelayFunction {
    /// Delay in seconds for a trip entering the arc with `flow` trips on it.
    pub fn delay(&self, flow: u32) -> f64 {
        let f = f64::from(flow);
        match *self {
            DelayFunction::Polynomial {
                alpha,
                beta,
                gamma,
                nominal_s,
            } => {
                if flow == 0 {
                    return 0.0;
                }
                let loaded = libm::pow((f + beta) / nominal_s, gamma);
                let base = libm::pow(beta / nominal_s, gamma);
                (nominal_s * alpha * (loaded - base)).max(0.0)
            }
            DelayFunction::PiecewiseLinear { ref pieces } => {
                let mut best = 0.0f64;
                let mut prefix = 0.0;
                for p in pieces {
                    prefix += p.slope * (f - p.threshold);
                    best = best.max(prefix);
                }
                best
            }
        }
    }
}

/// Delay for an arc with free-flow time `nominal_s` carrying `flow` trips.
pub fn compute_delay(spec: &DelaySpec, nominal_s: f64, flow: u32) -> Result<f64> {
    Ok(spec.resolve(nominal_s)?.delay(flow))
}

/// `nominal_s + compute_delay(..)`.
pub fn compute_travel_time(spec: &DelaySpec, nominal_s: f64, flow: u32) -> Result<f64> {
    Ok(nominal_s + compute_delay(spec, nominal_s, flow)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const POLY: DelaySpec = DelaySpec::Polynomial {
        alpha: 0.1,
        beta: 35.0,
        gamma: 3.0,
    };

    #[test]
    fn polynomial_zero_without_other_trips() {
        for tau in [1.0, 17.3, 60.0, 900.0] {
            assert_eq!(compute_delay(&POLY, tau, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn polynomial_reference_value() {
        // 60 * 0.1 * ((60/60)^3 - (35/60)^3) = 4.809027777...
        let d = compute_delay(&POLY, 60.0, 25).unwrap();
        assert!((d - 4.809_027_777_777_778).abs() < 1e-12, "{d}");
        let t = compute_travel_time(&POLY, 60.0, 25).unwrap();
        assert!((t - 64.809_027_777_777_78).abs() < 1e-12);
    }

    #[test]
    fn capacity_recipe_for_one_minute_arc() {
        let pieces = capacity_pieces(60.0, 15.0, 3);
        assert_eq!(
            pieces,
            vec![
                Piece {
                    slope: 7.5,
                    threshold: 4.0
                },
                Piece {
                    slope: 15.0,
                    threshold: 8.0
                },
                Piece {
                    slope: 22.5,
                    threshold: 12.0
                },
            ]
        );
        let spec = DelaySpec::Piecewise {
            headway_s: 15.0,
            segments: 3,
        };
        assert_eq!(compute_delay(&spec, 60.0, 4).unwrap(), 0.0);
        assert_eq!(compute_travel_time(&spec, 60.0, 6).unwrap(), 75.0);
        assert_eq!(compute_travel_time(&spec, 60.0, 0).unwrap(), 60.0);
    }

    #[test]
    fn piecewise_uses_best_prefix() {
        // flow 10: prefixes 45, 45 + 30 = 75; third segment not yet active.
        let spec = DelaySpec::Piecewise {
            headway_s: 15.0,
            segments: 3,
        };
        assert_eq!(compute_delay(&spec, 60.0, 10).unwrap(), 75.0);
        // flow 13: 67.5 + 75 + 22.5 = 165
        assert_eq!(compute_delay(&spec, 60.0, 13).unwrap(), 165.0);
    }

    #[test]
    fn unit_slope_line() {
        let spec = DelaySpec::PiecewiseExplicit {
            pieces: vec![Piece {
                slope: 1.0,
                threshold: 0.0,
            }],
        };
        for f in 0..20 {
            assert_eq!(compute_delay(&spec, 10.0, f).unwrap(), f64::from(f));
        }
    }

    #[test]
    fn validation_happens_at_construction() {
        let bad = [
            DelaySpec::Polynomial {
                alpha: 0.0,
                beta: 1.0,
                gamma: 2.0,
            },
            DelaySpec::Polynomial {
                alpha: 1.0,
                beta: -1.0,
                gamma: 2.0,
            },
            DelaySpec::Polynomial {
                alpha: 1.0,
                beta: 1.0,
                gamma: 0.5,
            },
            DelaySpec::Piecewise {
                headway_s: 0.0,
                segments: 3,
            },
            DelaySpec::Piecewise {
                headway_s: 15.0,
                segments: 0,
            },
            DelaySpec::PiecewiseExplicit { pieces: vec![] },
            DelaySpec::PiecewiseExplicit {
                pieces: vec![
                    Piece {
                        slope: 1.0,
                        threshold: 2.0,
                    },
                    Piece {
                        slope: 1.0,
                        threshold: 2.0,
                    },
                ],
            },
            DelaySpec::PiecewiseExplicit {
                pieces: vec![Piece {
                    slope: 0.0,
                    threshold: 2.0,
                }],
            },
        ];
        for spec in bad {
            assert!(
                matches!(spec.resolve(10.0), Err(Error::InvalidDelay(_))),
                "{spec:?}"
            );
        }
        assert!(POLY.resolve(0.0).is_err());
    }
}
