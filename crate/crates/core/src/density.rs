//! Visit times and finite-horizon densities.
//!
//! Orbit points of a vector under successive shift powers either land in a
//! target ball or not; the set of hitting times drives everything else.
//! Densities #(times in [0, n]) / (n + 1) are kept as exact integer
//! rationals so pass/fail never hinges on float rounding.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

use crate::space::{OpenBall, SparseVector};
use crate::weights::WeightFamily;
use crate::{Error, Result};

/// Unreduced nonnegative rational. Comparisons cross-multiply in u128, so
/// no gcd and no overflow for any u64 operands.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den >= 1, "denominator must be positive");
        Rational { num, den }
    }

    pub fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        self.num as u128 * other.den as u128 == other.num as u128 * self.den as u128
    }
}

impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Hitting times of one orbit against one target ball, up to a horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisitProfile {
    times: Vec<u64>,
    horizon: u64,
}

impl VisitProfile {
    pub fn new(times: Vec<u64>, horizon: u64) -> Result<Self> {
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("visit times must be strictly increasing".into()));
        }
        if let Some(&last) = times.last() {
            if last > horizon {
                return Err(Error::InvalidInput(format!(
                    "visit time {last} exceeds horizon {horizon}"
                )));
            }
        }
        Ok(VisitProfile { times, horizon })
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Number of visits at or before n.
    pub fn count_through(&self, n: u64) -> u64 {
        self.times.partition_point(|&t| t <= n) as u64
    }
}

/// Best finite-horizon density found at or after the starting index,
/// against a fixed threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub best_density: Rational,
    pub achieved_at: u64,
    pub threshold: Rational,
    pub passed: bool,
}

/// All hitting times n <= horizon of the orbit of x against v.
///
/// Once n exceeds the top of x's support the orbit is identically zero, so
/// the scan short-circuits: the remaining times are all in or all out
/// depending on whether v contains the origin.
pub fn visiting_times(
    fam: &WeightFamily,
    lambda: f64,
    x: &SparseVector,
    v: &OpenBall,
    horizon: u64,
) -> Result<VisitProfile> {
    let mut times = Vec::new();
    let dead = x.max_index().map_or(0, |j| j + 1);
    for n in 0..=horizon {
        if n >= dead {
            if v.contains(&SparseVector::zero()) {
                times.extend(n..=horizon);
            }
            break;
        }
        let orbit = fam.shift_power(lambda, n, x)?;
        if v.contains(&orbit) {
            times.push(n);
        }
    }
    VisitProfile::new(times, horizon)
}

/// Hitting times restricted to an explicit schedule; the profile's horizon
/// is taken from the caller so densities stay comparable with a full scan.
pub fn visits_at(
    fam: &WeightFamily,
    lambda: f64,
    x: &SparseVector,
    v: &OpenBall,
    schedule: &[u64],
    horizon: u64,
) -> Result<VisitProfile> {
    if !schedule.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("schedule must be strictly increasing".into()));
    }
    let mut times = Vec::with_capacity(schedule.len());
    for &n in schedule {
        if n > horizon {
            return Err(Error::InvalidInput(format!(
                "scheduled time {n} exceeds horizon {horizon}"
            )));
        }
        let orbit = fam.shift_power(lambda, n, x)?;
        if v.contains(&orbit) {
            times.push(n);
        }
    }
    VisitProfile::new(times, horizon)
}

/// #(times in [0, n]) / (n + 1), exact.
pub fn finite_density(profile: &VisitProfile, n: u64) -> Result<Rational> {
    if n > profile.horizon {
        return Err(Error::InvalidInput(format!(
            "n = {n} beyond profile horizon {}",
            profile.horizon
        )));
    }
    Ok(Rational::new(profile.count_through(n), n + 1))
}

/// Maximum of finite_density over n in [start, horizon], with the smallest
/// maximizing n.
///
/// Between visits the count is frozen while the denominator grows, so the
/// density is strictly decreasing there; the maximum over the window is
/// attained at the window start or at a visit time, and only those n are
/// examined.
pub fn best_density_from(
    profile: &VisitProfile,
    start: u64,
    threshold: Rational,
) -> Result<DensityReport> {
    if start > profile.horizon {
        return Err(Error::InvalidInput(format!(
            "start index {start} beyond profile horizon {}",
            profile.horizon
        )));
    }
    let mut best = finite_density(profile, start)?;
    let mut achieved_at = start;
    for &t in profile.times.iter().filter(|&&t| t > start) {
        let d = finite_density(profile, t)?;
        if d > best {
            best = d;
            achieved_at = t;
        }
    }
    Ok(DensityReport { best_density: best, achieved_at, threshold, passed: best > threshold })
}

/// CSV rows "lambda,n,count,density", one per visit time.
pub fn profile_csv(lambda: f64, profile: &VisitProfile) -> String {
    let mut out = String::from("lambda,n,count,density\n");
    for (i, &t) in profile.times.iter().enumerate() {
        let d = Rational::new(i as u64 + 1, t + 1);
        out.push_str(&format!("{lambda},{t},{},{}\n", i + 1, d.as_f64()));
    }
    out
}
