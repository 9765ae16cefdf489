//! File formats, reports and the command-line front end for
//! [`balstag_core`].

pub mod cli;
pub mod error;
pub mod hash;
pub mod io;
pub mod report;

use std::time::Instant;

use balstag_core::solver::Clock;

pub use crate::error::{AppError, AppResult};

/// Wall-clock time since construction.
#[derive(Clone, Copy, Debug)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }

    pub fn elapsed(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

impl Clock for WallClock {
    fn elapsed_s(&self) -> f64 {
        self.elapsed()
    }
}
