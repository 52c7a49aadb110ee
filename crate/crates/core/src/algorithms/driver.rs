use crate::error::{Error, Result};

use super::Algorithm;

/// Slack when comparing pass counts against grid points.
const GRID_SLACK: f64 = 1e-9;

/// When to stop and when to report, both on the data-pass axis.
///
/// Reported passes are `offset + algorithm.data_passes()`, so work done
/// before the algorithm was built (a warm start) is included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub max_passes: f64,
    pub interval: f64,
    pub offset: f64,
}

impl Schedule {
    pub fn new(max_passes: f64, interval: f64) -> Result<Self> {
        if !(max_passes >= 0.0 && max_passes.is_finite()) {
            return Err(Error::InvalidArgument(format!("max_passes must be >= 0, got {max_passes}")));
        }
        if !(interval > 0.0 && interval.is_finite()) {
            return Err(Error::InvalidArgument(format!("callback interval must be positive, got {interval}")));
        }
        Ok(Self { max_passes, interval, offset: 0.0 })
    }

    pub fn with_offset(self, offset: f64) -> Self {
        Self { offset, ..self }
    }

    /// First grid point strictly after `passes`.
    fn next_after(&self, passes: f64) -> f64 {
        ((passes + GRID_SLACK) / self.interval).floor() * self.interval + self.interval
    }
}

/// Steps `algorithm` until the reported passes reach `max_passes`.
///
/// `callback(passes, algorithm)` fires once before the first step, once
/// after the first step that reaches or crosses each grid point
/// `j * interval`, and after the final step if that was not already
/// reported. The callback only sees a shared reference, so it cannot
/// perturb the run.
pub fn run<A, C>(algorithm: &mut A, schedule: &Schedule, mut callback: C) -> Result<()>
where
    A: Algorithm + ?Sized,
    C: FnMut(f64, &A) -> Result<()>,
{
    let passes = |a: &A| schedule.offset + a.data_passes();
    let mut current = passes(algorithm);
    callback(current, algorithm)?;
    let mut next = schedule.next_after(current);
    let mut reported = true;
    while current < schedule.max_passes - GRID_SLACK {
        algorithm.step()?;
        let now = passes(algorithm);
        if now < current {
            return Err(Error::InvalidArgument("data passes decreased".into()));
        }
        current = now;
        reported = false;
        if current >= next - GRID_SLACK {
            callback(current, algorithm)?;
            reported = true;
            next = schedule.next_after(current);
        }
    }
    if !reported {
        callback(current, algorithm)?;
    }
    Ok(())
}
