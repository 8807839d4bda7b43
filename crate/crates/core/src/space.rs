//! Finite-support sequences and the norms used to measure them.
//!
//! Vectors are sparse lists of (index, coefficient) pairs. Two metrics are
//! supported: the plain l^p norm, and a bounded F-norm built from a finite
//! ladder of seminorms with dyadic weights, where the last seminorm stands
//! in for the infinite remainder of the ladder.

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sparse sequence with finitely many nonzero coefficients.
///
/// Entries are sorted by index, strictly increasing, and never hold an
/// explicit zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u64, f64)>,
}

impl SparseVector {
    pub fn zero() -> Self {
        SparseVector { entries: Vec::new() }
    }

    pub fn basis(index: u64) -> Self {
        SparseVector { entries: vec![(index, 1.0)] }
    }

    /// Multiple of a basis vector; a zero coefficient collapses to the zero
    /// vector.
    pub fn scaled_basis(index: u64, coeff: f64) -> Self {
        Self::from_entries([(index, coeff)])
    }

    /// Builds a vector from arbitrary (index, coefficient) pairs: sorts,
    /// sums duplicates, and drops zeros.
    pub fn from_entries<I: IntoIterator<Item = (u64, f64)>>(entries: I) -> Self {
        let mut raw: Vec<(u64, f64)> = entries.into_iter().filter(|&(_, c)| c != 0.0).collect();
        raw.sort_by_key(|&(i, _)| i);
        let mut out: Vec<(u64, f64)> = Vec::with_capacity(raw.len());
        for (i, c) in raw {
            debug_assert!(c.is_finite(), "coefficient at {i} is not finite");
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        SparseVector { entries: out }
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn coeff(&self, index: u64) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.entries.last().map(|&(i, _)| i)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_entries(self.entries.iter().map(|&(i, v)| (i, v * c)))
    }

    /// self + scale * other, merging supports and dropping exact
    /// cancellations.
    pub fn add_scaled(&self, scale: f64, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(i, x)), Some(&&(j, y))) => {
                    if i < j {
                        out.push((i, x));
                        a.next();
                    } else if j < i {
                        out.push((j, scale * y));
                        b.next();
                    } else {
                        out.push((i, x + scale * y));
                        a.next();
                        b.next();
                    }
                }
                (Some(&&(i, x)), None) => {
                    out.push((i, x));
                    a.next();
                }
                (None, Some(&&(j, y))) => {
                    out.push((j, scale * y));
                    b.next();
                }
                (None, None) => break,
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        SparseVector { entries: out }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }
}

// JSON shape is an array of [index, coefficient] pairs.
impl Serialize for SparseVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SparseVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<(u64, f64)>::deserialize(deserializer)?;
        Ok(SparseVector::from_entries(raw))
    }
}

fn raw_p_norm<'a, I: Iterator<Item = &'a (u64, f64)>>(entries: I, p: f64) -> f64 {
    if p == 1.0 {
        entries.map(|&(_, c)| c.abs()).sum()
    } else if p == 2.0 {
        entries.map(|&(_, c)| c * c).sum::<f64>().sqrt()
    } else {
        entries.map(|&(_, c)| c.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidInput(format!("norm exponent p = {p} must be finite and >= 1")));
    }
    Ok(())
}

/// l^p norm of a sparse vector. Rejects p < 1.
pub fn p_norm(x: &SparseVector, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(raw_p_norm(x.entries.iter(), p))
}

/// One rung of an F-norm ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Seminorm {
    /// Full l^p norm.
    Lp { p: f64 },
    /// l^p norm of the coordinates with index <= cutoff.
    TruncatedLp { p: f64, cutoff: u64 },
}

impl Seminorm {
    pub fn exponent(&self) -> f64 {
        match *self {
            Seminorm::Lp { p } | Seminorm::TruncatedLp { p, .. } => p,
        }
    }

    pub fn eval(&self, x: &SparseVector) -> f64 {
        match *self {
            Seminorm::Lp { p } => raw_p_norm(x.entries.iter(), p),
            Seminorm::TruncatedLp { p, cutoff } => {
                raw_p_norm(x.entries.iter().take_while(|&&(i, _)| i <= cutoff), p)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        check_exponent(self.exponent())
    }
}

/// Finite seminorm ladder defining an F-norm
///   sum_k 2^-k min(1, p_k(x)),
/// with the last listed seminorm repeated for every k past the end of the
/// list. The value is always <= 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FNormLadder {
    seminorms: Vec<Seminorm>,
}

impl FNormLadder {
    pub fn new(seminorms: Vec<Seminorm>) -> Result<Self> {
        if seminorms.is_empty() {
            return Err(Error::InvalidInput("F-norm ladder must list at least one seminorm".into()));
        }
        for s in &seminorms {
            s.validate()?;
        }
        Ok(FNormLadder { seminorms })
    }

    pub fn seminorms(&self) -> &[Seminorm] {
        &self.seminorms
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.seminorms.clone()).map(|_| ())
    }
}

/// F-norm of x under the ladder.
///
/// Evaluated as a nested Horner sum over the capped seminorm values, so a
/// ladder whose rungs all produce the same value m returns exactly m.
pub fn f_norm(x: &SparseVector, ladder: &FNormLadder) -> f64 {
    let capped: Vec<f64> = ladder.seminorms.iter().map(|s| s.eval(x).min(1.0)).collect();
    // F = 2^-1 (m_1 + 2^-1 (m_2 + ... + 2^-1 (m_K + m_K)...)); the doubled
    // innermost term accounts for the repeated tail of the ladder.
    let last = capped[capped.len() - 1];
    let mut acc = last + last;
    for &m in capped[..capped.len() - 1].iter().rev() {
        acc = m + 0.5 * acc;
    }
    0.5 * acc
}

/// Metric on the sequence space: either a plain l^p norm or an F-norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceMetric {
    Lp { p: f64 },
    FNorm { ladder: FNormLadder },
}

impl SpaceMetric {
    pub fn lp(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(SpaceMetric::Lp { p })
    }

    pub fn f_norm(ladder: FNormLadder) -> Self {
        SpaceMetric::FNorm { ladder }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceMetric::Lp { p } => check_exponent(*p),
            SpaceMetric::FNorm { ladder } => ladder.validate(),
        }
    }

    pub fn norm(&self, x: &SparseVector) -> f64 {
        match self {
            SpaceMetric::Lp { p } => raw_p_norm(x.entries.iter(), *p),
            SpaceMetric::FNorm { ladder } => f_norm(x, ladder),
        }
    }

    pub fn distance(&self, x: &SparseVector, y: &SparseVector) -> f64 {
        self.norm(&x.sub(y))
    }
}

impl std::fmt::Display for SpaceMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpaceMetric::Lp { p } => write!(f, "lp(p={p})"),
            SpaceMetric::FNorm { ladder } => {
                write!(f, "fnorm({} seminorms)", ladder.seminorms.len())
            }
        }
    }
}

/// Open metric ball. Membership is strict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenBall {
    pub center: SparseVector,
    pub radius: f64,
    pub metric: SpaceMetric,
}

impl OpenBall {
    pub fn new(center: SparseVector, radius: f64, metric: SpaceMetric) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "ball radius {radius} must be finite and positive"
            )));
        }
        metric.validate()?;
        Ok(OpenBall { center, radius, metric })
    }

    pub fn contains(&self, x: &SparseVector) -> bool {
        in_ball(x, self)
    }
}

/// Strict membership test: distance to the center must be < radius.
pub fn in_ball(x: &SparseVector, ball: &OpenBall) -> bool {
    ball.metric.distance(x, &ball.center) < ball.radius
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[(u64, f64)]) -> SparseVector {
        SparseVector::from_entries(entries.iter().copied())
    }

    #[test]
    fn from_entries_sorts_merges_and_drops_zeros() {
        let x = v(&[(5, 1.0), (2, 3.0), (5, -1.0), (7, 0.0), (1, 2.0)]);
        assert_eq!(x.entries(), &[(1, 2.0), (2, 3.0)]);
        assert_eq!(x.coeff(5), 0.0);
        assert_eq!(x.coeff(2), 3.0);
        assert_eq!(x.max_index(), Some(2));
    }

    #[test]
    fn add_scaled_merges_and_cancels() {
        let x = v(&[(0, 1.0), (3, 2.0)]);
        let y = v(&[(1, 5.0), (3, 2.0)]);
        let s = x.add_scaled(-1.0, &y);
        assert_eq!(s.entries(), &[(0, 1.0), (1, -5.0)]);
        let z = x.add_scaled(-1.0, &x);
        assert!(z.is_zero());
        assert_eq!(z.support_size(), 0);
    }

    #[test]
    fn p_norm_values() {
        let x = v(&[(0, 3.0), (1, -4.0)]);
        assert_eq!(p_norm(&x, 2.0).unwrap(), 5.0);
        let y = v(&[(0, 1.0), (1, 1.0), (2, 1.0)]);
        assert_eq!(p_norm(&y, 1.0).unwrap(), 3.0);
        let cube = p_norm(&y, 3.0).unwrap();
        assert!((cube - 3f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert!(p_norm(&x, 0.9).is_err());
        assert!(p_norm(&x, f64::NAN).is_err());
    }

    #[test]
    fn f_norm_single_rung_is_capped_l2() {
        let ladder = FNormLadder::new(vec![Seminorm::Lp { p: 2.0 }]).unwrap();
        assert_eq!(f_norm(&SparseVector::scaled_basis(0, 0.5), &ladder), 0.5);
        assert_eq!(f_norm(&SparseVector::scaled_basis(0, 7.0), &ladder), 1.0);
        assert_eq!(f_norm(&SparseVector::zero(), &ladder), 0.0);
    }

    #[test]
    fn f_norm_equal_ladder_collapses_exactly() {
        let ladder =
            FNormLadder::new(vec![Seminorm::Lp { p: 2.0 }; 5]).unwrap();
        for c in [0.1, 0.3777, 0.9, 1.0, 2.5] {
            let x = SparseVector::scaled_basis(3, c);
            let expect = p_norm(&x, 2.0).unwrap().min(1.0);
            assert_eq!(f_norm(&x, &ladder), expect);
        }
    }

    #[test]
    fn f_norm_mixed_ladder_weights_rungs_dyadically() {
        // Two rungs: the second (repeated for the whole tail) sees nothing
        // above index 0.
        let ladder = FNormLadder::new(vec![
            Seminorm::Lp { p: 1.0 },
            Seminorm::TruncatedLp { p: 1.0, cutoff: 0 },
        ])
        .unwrap();
        let x = v(&[(0, 0.2), (5, 0.3)]);
        // 2^-1 * 0.5 + (2^-2 + 2^-2 + ...) * 0.2 = 0.25 + 0.1
        assert!((f_norm(&x, &ladder) - 0.35).abs() < 1e-15);
    }

    #[test]
    fn empty_ladder_rejected() {
        assert!(FNormLadder::new(vec![]).is_err());
        assert!(FNormLadder::new(vec![Seminorm::Lp { p: 0.5 }]).is_err());
    }

    #[test]
    fn ball_membership_is_strict() {
        let metric = SpaceMetric::lp(1.0).unwrap();
        let y = v(&[(2, 1.0)]);
        let ball = OpenBall::new(y.clone(), 0.25, metric).unwrap();
        let on_boundary = y.add_scaled(0.25, &SparseVector::basis(0));
        assert!(!in_ball(&on_boundary, &ball));
        let inside = y.add_scaled(0.2499, &SparseVector::basis(0));
        assert!(in_ball(&inside, &ball));
        assert!(OpenBall::new(y, 0.0, SpaceMetric::lp(1.0).unwrap()).is_err());
    }

    #[test]
    fn serde_round_trip_uses_pair_arrays() {
        let x = v(&[(0, 0.5), (9, -2.0)]);
        let text = serde_json::to_string(&x).unwrap();
        assert_eq!(text, "[[0,0.5],[9,-2.0]]");
        let back: SparseVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, x);
        let messy: SparseVector = serde_json::from_str("[[4,1.0],[1,2.0],[4,-1.0]]").unwrap();
        assert_eq!(messy.entries(), &[(1, 2.0)]);
    }

    #[test]
    fn metric_distance_matches_norm_of_difference() {
        let m = SpaceMetric::lp(2.0).unwrap();
        let x = v(&[(0, 3.0)]);
        let y = v(&[(1, 4.0)]);
        assert_eq!(m.distance(&x, &y), 5.0);
    }
}
