//! GPS time representation and calendar conversion.

use serde::{Deserialize, Serialize};

use crate::constants::SECONDS_PER_WEEK;

/// GPS time as week number and seconds of week.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsTime {
    pub week: u32,
    pub tow: f64,
}

impl GpsTime {
    pub fn new(week: u32, tow: f64) -> Self {
        let mut t = GpsTime { week, tow };
        t.normalize();
        t
    }

    fn normalize(&mut self) {
        while self.tow >= SECONDS_PER_WEEK {
            self.tow -= SECONDS_PER_WEEK;
            self.week += 1;
        }
        while self.tow < 0.0 && self.week > 0 {
            self.tow += SECONDS_PER_WEEK;
            self.week -= 1;
        }
    }

    /// Seconds since the GPS epoch (1980-01-06).
    pub fn total_seconds(&self) -> f64 {
        self.week as f64 * SECONDS_PER_WEEK + self.tow
    }

    pub fn add_seconds(&self, dt: f64) -> Self {
        GpsTime::new(self.week, self.tow + dt)
    }

    /// `self - other` in seconds.
    pub fn diff(&self, other: &GpsTime) -> f64 {
        (self.week as f64 - other.week as f64) * SECONDS_PER_WEEK + (self.tow - other.tow)
    }

    /// Converts a UTC-like calendar date (GPS time scale, no leap seconds) to GPS time.
    pub fn from_calendar(year: i32, month: u32, day: u32, hour: u32, minute: u32, second: f64) -> Self {
        let days = days_from_civil(year, month, day) - days_from_civil(1980, 1, 6);
        let secs = days as f64 * 86_400.0 + hour as f64 * 3600.0 + minute as f64 * 60.0 + second;
        let week = (secs / SECONDS_PER_WEEK).floor();
        GpsTime::new(week as u32, secs - week * SECONDS_PER_WEEK)
    }
}

/// Days since 1970-01-01 for a proleptic Gregorian date.
fn days_from_civil(y: i32, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y } as i64;
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let m = m as i64;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + d as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Wraps a time difference into [-302400, 302400) s to handle week crossovers.
pub fn wrap_week_diff(dt: f64) -> f64 {
    let half = SECONDS_PER_WEEK / 2.0;
    if dt >= half {
        dt - SECONDS_PER_WEEK
    } else if dt < -half {
        dt + SECONDS_PER_WEEK
    } else {
        dt
    }
}
