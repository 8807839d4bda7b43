//! Parametric weight families for backward shifts.
//!
//! A family assigns to each parameter lambda a positive weight sequence
//! w_n(lambda), n >= 1. The shift maps e_nu to w_nu(lambda) e_{nu-1} (and
//! e_0 to 0); its right inverse divides by the skipped weights on the way
//! up. Everything downstream needs three things from a family: weight
//! products over index ranges (kept in log space), Lipschitz control of
//! log w_n in lambda on a compact interval, and a certified upper bound on
//! the tails of the inverse-product series at the left end of the interval.

use serde::{Deserialize, Serialize};

use crate::space::SparseVector;
use crate::{Error, Result};

/// Compact parameter interval [a, b], a <= b. Degenerate intervals are
/// allowed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactInterval {
    a: f64,
    b: f64,
}

impl CompactInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a > b {
            return Err(Error::InvalidInput(format!(
                "interval [{a}, {b}] must be finite with a <= b"
            )));
        }
        Ok(CompactInterval { a, b })
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.a <= lambda && lambda <= self.b
    }
}

/// Closed-form scalar sequence u_n, n >= 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqDescriptor {
    /// u_n = value
    Constant { value: f64 },
    /// u_n = ratio^n
    Geometric { ratio: f64 },
    /// u_n = n^exponent
    Power { exponent: f64 },
}

impl SeqDescriptor {
    fn validate(&self, role: &str, allow_zero: bool) -> Result<()> {
        let ok = match *self {
            SeqDescriptor::Constant { value } => {
                value.is_finite() && (value > 0.0 || (allow_zero && value == 0.0))
            }
            SeqDescriptor::Geometric { ratio } => {
                ratio.is_finite() && (ratio > 0.0 || (allow_zero && ratio == 0.0))
            }
            SeqDescriptor::Power { exponent } => exponent.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "{role} descriptor {self:?} must stay {} and finite",
                if allow_zero { "nonnegative" } else { "positive" }
            )))
        }
    }

    pub fn eval(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        match *self {
            SeqDescriptor::Constant { value } => value,
            SeqDescriptor::Geometric { ratio } => ratio.powf(n as f64),
            SeqDescriptor::Power { exponent } => (n as f64).powf(exponent),
        }
    }

    /// ln u_n; requires u_n > 0.
    fn log_eval(&self, n: u64) -> f64 {
        match *self {
            SeqDescriptor::Constant { value } => value.ln(),
            SeqDescriptor::Geometric { ratio } => n as f64 * ratio.ln(),
            SeqDescriptor::Power { exponent } => exponent * (n as f64).ln(),
        }
    }

    /// Sum of u_i over from <= i <= to. Closed form except for Power, which
    /// sums modest ranges directly and bounds the rest of a long range by a
    /// one-sided integral (always from above, within one term of the truth).
    pub fn partial_sum(&self, from: u64, to: u64) -> f64 {
        if to < from {
            return 0.0;
        }
        debug_assert!(from >= 1);
        let count = to - from + 1;
        match *self {
            SeqDescriptor::Constant { value } => count as f64 * value,
            SeqDescriptor::Geometric { ratio } => {
                if ratio == 1.0 {
                    count as f64
                } else {
                    ratio.powf(from as f64) * (1.0 - ratio.powf(count as f64)) / (1.0 - ratio)
                }
            }
            SeqDescriptor::Power { exponent } => {
                if count <= 1_000_000 {
                    kahan_sum((from..=to).map(|i| (i as f64).powf(exponent)))
                } else {
                    let head_to = from + 999;
                    let head =
                        kahan_sum((from..=head_to).map(|i| (i as f64).powf(exponent)));
                    let m = head_to as f64 + 1.0;
                    let rest = if exponent >= 0.0 {
                        // increasing terms: each i^e <= integral over [i, i+1]
                        power_integral(m, to as f64 + 1.0, exponent)
                    } else {
                        // decreasing terms: each i^e <= integral over [i-1, i]
                        power_integral(m - 1.0, to as f64, exponent)
                    };
                    head + rest
                }
            }
        }
    }

    /// Sum of ln u_i over from <= i <= to.
    fn log_partial_sum(&self, from: u64, to: u64) -> f64 {
        if to < from {
            return 0.0;
        }
        let count = to - from + 1;
        match *self {
            SeqDescriptor::Constant { value } => count as f64 * value.ln(),
            SeqDescriptor::Geometric { ratio } => {
                // sum of i over the range, exact in integers
                let total = (from as u128 + to as u128) * count as u128 / 2;
                total as f64 * ratio.ln()
            }
            SeqDescriptor::Power { exponent } => {
                if count <= 1_000_000 {
                    exponent * kahan_sum((from..=to).map(|i| (i as f64).ln()))
                } else {
                    // sum ln i = ln Gamma(to + 1) - ln Gamma(from); both
                    // arguments are huge here, where Stirling is exact to
                    // well below f64 resolution
                    exponent * (stirling_ln_gamma(to as f64 + 1.0) - stirling_ln_gamma(from as f64))
                }
            }
        }
    }

    /// Whether the series sum_{n>=1} u_n converges.
    pub fn sum_converges(&self) -> bool {
        match *self {
            SeqDescriptor::Constant { value } => value == 0.0,
            SeqDescriptor::Geometric { ratio } => ratio < 1.0,
            SeqDescriptor::Power { exponent } => exponent < -1.0,
        }
    }

    /// Certified upper bound on sum_{n>=1} u_n when it converges.
    pub fn total_sum_upper(&self) -> Option<f64> {
        if !self.sum_converges() {
            return None;
        }
        Some(match *self {
            SeqDescriptor::Constant { .. } => 0.0,
            SeqDescriptor::Geometric { ratio } => ratio / (1.0 - ratio),
            SeqDescriptor::Power { exponent } => {
                // partial sum plus integral remainder
                let head = self.partial_sum(1, 1000);
                head + 1000f64.powf(exponent + 1.0) / (-exponent - 1.0)
            }
        })
    }

    /// Bounds (inf, sup) of u_n over n > m, using monotonicity of each
    /// closed form. Limits that are approached but not attained are still
    /// valid one-sided bounds.
    fn bounds_beyond(&self, m: u64) -> (f64, f64) {
        let first = self.eval(m + 1);
        match *self {
            SeqDescriptor::Constant { value } => (value, value),
            SeqDescriptor::Geometric { ratio } => {
                if ratio < 1.0 {
                    (0.0, first)
                } else if ratio == 1.0 {
                    (1.0, 1.0)
                } else {
                    (first, f64::INFINITY)
                }
            }
            SeqDescriptor::Power { exponent } => {
                if exponent < 0.0 {
                    (0.0, first)
                } else if exponent == 0.0 {
                    (1.0, 1.0)
                } else {
                    (first, f64::INFINITY)
                }
            }
        }
    }
}

/// Integral of t^e over [lo, hi].
fn power_integral(lo: f64, hi: f64, e: f64) -> f64 {
    if (e + 1.0).abs() < 1e-12 {
        (hi / lo).ln()
    } else {
        (hi.powf(e + 1.0) - lo.powf(e + 1.0)) / (e + 1.0)
    }
}

/// Stirling series for ln Gamma(x); absolute error below 1/(360 x^3),
/// vanishing for the large arguments this is reserved for.
fn stirling_ln_gamma(x: f64) -> f64 {
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_74;
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + 1.0 / (12.0 * x)
}

/// x * f with 0 and infinity kept absorbing, so 0 * inf cannot poison a
/// certified bound with NaN.
fn mul_bound(x: f64, f: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x.is_infinite() {
        f64::INFINITY
    } else {
        x * f
    }
}

fn kahan_sum<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Weight family kinds.
///
/// - `RatioPower`: w_n(lambda) = ((n+1)/n)^lambda
/// - `Exp`: w_n(lambda) = base_n * e^(lambda * rate_n), base positive and
///   rate nonnegative
/// - `ConstantMultiple`: w_n(lambda) = lambda
/// - `Tabulated`: an explicit positive head followed by one of the
///   parametric tails (indices past the head keep their global n)
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFamily {
    RatioPower,
    Exp { base: SeqDescriptor, rate: SeqDescriptor },
    ConstantMultiple,
    Tabulated { head: Vec<f64>, tail: Box<WeightFamily> },
}

impl WeightFamily {
    pub fn exp(base: SeqDescriptor, rate: SeqDescriptor) -> Result<Self> {
        let fam = WeightFamily::Exp { base, rate };
        fam.validate()?;
        Ok(fam)
    }

    pub fn tabulated(head: Vec<f64>, tail: WeightFamily) -> Result<Self> {
        let fam = WeightFamily::Tabulated { head, tail: Box::new(tail) };
        fam.validate()?;
        Ok(fam)
    }

    /// Structural validation; deserialized values should be passed through
    /// here before use.
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFamily::RatioPower | WeightFamily::ConstantMultiple => Ok(()),
            WeightFamily::Exp { base, rate } => {
                base.validate("base", false)?;
                rate.validate("rate", true)
            }
            WeightFamily::Tabulated { head, tail } => {
                if head.is_empty() {
                    return Err(Error::InvalidInput("tabulated head must be nonempty".into()));
                }
                if head.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                    return Err(Error::InvalidInput(
                        "tabulated head weights must be positive and finite".into(),
                    ));
                }
                if matches!(**tail, WeightFamily::Tabulated { .. }) {
                    return Err(Error::InvalidInput("tabulated tail must be parametric".into()));
                }
                tail.validate()
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            WeightFamily::RatioPower => "ratio_power",
            WeightFamily::Exp { .. } => "exp",
            WeightFamily::ConstantMultiple => "constant_multiple",
            WeightFamily::Tabulated { .. } => "tabulated",
        }
    }

    /// Rejects parameters where the weights stop being positive.
    pub fn require_evaluable(&self, lambda: f64) -> Result<()> {
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda = {lambda} must be finite")));
        }
        match self {
            WeightFamily::ConstantMultiple if lambda <= 0.0 => Err(Error::DomainViolation {
                family: self.label().into(),
                lambda,
            }),
            WeightFamily::Tabulated { tail, .. } => tail.require_evaluable(lambda),
            _ => Ok(()),
        }
    }

    /// Exclusive lower end of the parameter range on which the family
    /// criterion can hold in an l^p space, where one exists.
    pub fn theorem_lower_bound(&self, p: f64) -> Option<f64> {
        match self {
            WeightFamily::RatioPower => Some(1.0 / p),
            WeightFamily::ConstantMultiple => Some(1.0),
            WeightFamily::Exp { .. } => None,
            WeightFamily::Tabulated { tail, .. } => tail.theorem_lower_bound(p),
        }
    }

    pub fn weight(&self, n: u64, lambda: f64) -> Result<f64> {
        self.require_evaluable(lambda)?;
        if n == 0 {
            return Err(Error::InvalidInput("weight indices start at 1".into()));
        }
        Ok(match self {
            WeightFamily::RatioPower => ((n as f64 + 1.0) / n as f64).powf(lambda),
            WeightFamily::Exp { base, rate } => base.eval(n) * (lambda * rate.eval(n)).exp(),
            WeightFamily::ConstantMultiple => lambda,
            WeightFamily::Tabulated { head, tail } => {
                if n as usize <= head.len() {
                    head[n as usize - 1]
                } else {
                    tail.weight(n, lambda)?
                }
            }
        })
    }

    pub fn log_weight(&self, n: u64, lambda: f64) -> Result<f64> {
        self.require_evaluable(lambda)?;
        if n == 0 {
            return Err(Error::InvalidInput("weight indices start at 1".into()));
        }
        Ok(match self {
            WeightFamily::RatioPower => lambda * (1.0 / n as f64).ln_1p(),
            WeightFamily::Exp { base, rate } => base.log_eval(n) + lambda * rate.eval(n),
            WeightFamily::ConstantMultiple => lambda.ln(),
            WeightFamily::Tabulated { head, tail } => {
                if n as usize <= head.len() {
                    head[n as usize - 1].ln()
                } else {
                    tail.log_weight(n, lambda)?
                }
            }
        })
    }

    /// ln of the product w_from * ... * w_to at lambda, in closed form
    /// where one exists. An empty range (to < from) gives 0.
    pub fn log_weight_product(&self, from: u64, to: u64, lambda: f64) -> Result<f64> {
        self.require_evaluable(lambda)?;
        if to < from {
            return Ok(0.0);
        }
        if from == 0 {
            return Err(Error::InvalidInput("weight indices start at 1".into()));
        }
        Ok(match self {
            WeightFamily::RatioPower => {
                // telescoping: sum ln((i+1)/i) = ln((to+1)/from)
                lambda * ((to + 1 - from) as f64 / from as f64).ln_1p()
            }
            WeightFamily::Exp { base, rate } => {
                base.log_partial_sum(from, to) + lambda * rate.partial_sum(from, to)
            }
            WeightFamily::ConstantMultiple => (to - from + 1) as f64 * lambda.ln(),
            WeightFamily::Tabulated { head, tail } => {
                let h = head.len() as u64;
                let mut total = 0.0;
                if from <= h {
                    for i in from..=to.min(h) {
                        total += head[i as usize - 1].ln();
                    }
                }
                if to > h {
                    total += tail.log_weight_product(from.max(h + 1), to, lambda)?;
                }
                total
            }
        })
    }

    /// m-th shift power applied to x: e_nu goes to the product of the m
    /// trailing weights times e_{nu-m}, and entries with nu < m vanish.
    pub fn shift_power(&self, lambda: f64, m: u64, x: &SparseVector) -> Result<SparseVector> {
        if m == 0 {
            return Ok(x.clone());
        }
        let mut out = Vec::with_capacity(x.support_size());
        for &(nu, c) in x.entries() {
            if nu < m {
                continue;
            }
            out.push((nu - m, self.scale_by_product(c, nu - m + 1, nu, lambda, false)?));
        }
        Ok(SparseVector::from_entries(out))
    }

    /// m-th power of the right inverse applied to x: e_nu goes to
    /// e_{nu+m} divided by the product of the m skipped weights.
    pub fn right_inverse_power(&self, lambda: f64, m: u64, x: &SparseVector) -> Result<SparseVector> {
        if m == 0 {
            return Ok(x.clone());
        }
        let mut out = Vec::with_capacity(x.support_size());
        for &(nu, c) in x.entries() {
            out.push((nu + m, self.scale_by_product(c, nu + 1, nu + m, lambda, true)?));
        }
        Ok(SparseVector::from_entries(out))
    }

    /// c scaled by the weight product over from..=to (divided by it when
    /// invert is set). Constant families multiply exactly via powi; other
    /// families exponentiate the closed-form log product. A product far
    /// outside f64 range folds c into the exponent first so the small
    /// coefficient can pull an astronomically large product back into
    /// range before anything overflows.
    fn scale_by_product(&self, c: f64, from: u64, to: u64, lambda: f64, invert: bool) -> Result<f64> {
        if let WeightFamily::ConstantMultiple = self {
            self.require_evaluable(lambda)?;
            let count = to - from + 1;
            if count <= i32::MAX as u64 {
                let e = count as i32;
                let p = lambda.powi(if invert { -e } else { e });
                if p.is_finite() && p != 0.0 {
                    return Ok(c * p);
                }
            }
        }
        let log_prod = self.log_weight_product(from, to, lambda)?;
        let lp = if invert { -log_prod } else { log_prod };
        if lp.abs() < 700.0 {
            Ok(c * lp.exp())
        } else {
            Ok(c.signum() * (c.abs().ln() + lp).exp())
        }
    }

    /// A Lipschitz constant for lambda -> ln w_n(lambda) on k. Assumes k
    /// lies inside the evaluable domain.
    pub fn lipschitz_constant(&self, k: &CompactInterval, n: u64) -> f64 {
        debug_assert!(n >= 1);
        match self {
            WeightFamily::RatioPower => (1.0 / n as f64).ln_1p(),
            WeightFamily::Exp { rate, .. } => rate.eval(n),
            WeightFamily::ConstantMultiple => 1.0 / k.lower(),
            // Head weights do not depend on lambda, so the tail's constant
            // is valid (if loose) at every index.
            WeightFamily::Tabulated { tail, .. } => tail.lipschitz_constant(k, n),
        }
    }

    /// Closed form for the cumulative sum of lipschitz_constant over
    /// 1..=n.
    pub fn lipschitz_sum(&self, k: &CompactInterval, n: u64) -> f64 {
        match self {
            WeightFamily::RatioPower => (n as f64 + 1.0).ln(),
            WeightFamily::Exp { rate, .. } => rate.partial_sum(1, n),
            WeightFamily::ConstantMultiple => n as f64 / k.lower(),
            WeightFamily::Tabulated { tail, .. } => tail.lipschitz_sum(k, n),
        }
    }

    /// Certified upper bound on the l^p norm of
    ///   sum_{n>=s} e_{nu+n} / (w_{nu+1}(a) * ... * w_{nu+n}(a)),
    /// which also dominates the same sum over any subset of {s, s+1, ...}.
    ///
    /// Computed as an exact partial sum of p-th powers up to a cutoff plus
    /// a per-family analytic majorant for the remainder: an integral bound
    /// for RatioPower, a geometric bound from a weight floor for Exp and
    /// Tabulated, and the exact geometric series for ConstantMultiple.
    pub fn inverse_tail_bound(&self, a: f64, nu: u64, s: u64, p: f64) -> Result<f64> {
        self.require_evaluable(a)?;
        if s == 0 {
            return Err(Error::InvalidInput("tail start s must be >= 1".into()));
        }
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidInput(format!("p = {p} must be finite and >= 1")));
        }
        if let WeightFamily::ConstantMultiple = self {
            // exact geometric series, no cutoff needed
            if a <= 1.0 {
                return Err(self.non_summable(a));
            }
            let log2a = a.log2();
            let q = (-p * log2a).exp2();
            let power_sum = (-(s as f64) * p * log2a).exp2() / (1.0 - q);
            return Ok(root_p(power_sum, p));
        }

        // Cutoff: enough terms for the majorant to be slack, and past any
        // tabulated head so the remainder sees only the parametric tail.
        let head_len = match self {
            WeightFamily::Tabulated { head, .. } => head.len() as u64,
            _ => 0,
        };
        let cutoff = (s + 63).max(head_len.saturating_sub(nu) + 1);
        // Closed-form jump over the first s-1 factors keeps the cost flat
        // in s; only the 64-term window past the start is walked directly.
        let mut log_cum = self.log_weight_product(nu + 1, nu + s - 1, a)?;
        let mut partial = 0.0;
        let mut carry = 0.0;
        for n in s..=cutoff {
            log_cum += self.log_weight(nu + n, a)?;
            // Kahan-accumulated sum of exp(-p * log products)
            let term = (-p * log_cum).exp();
            let y = term - carry;
            let t = partial + y;
            carry = (t - partial) - y;
            partial = t;
        }
        let t_cutoff = (-p * log_cum).exp();
        let remainder = self.fresh_tail_ratio_bound(a, nu + cutoff, p)? * t_cutoff;
        // One-sided rounding guard so accumulated float error cannot pull
        // the certified value under the true tail.
        let power_sum = partial * (1.0 + 1e-12) + remainder;
        Ok(root_p(power_sum, p))
    }

    /// Certified (inf, sup) bounds for w_n(a) over all n > m. Limits that
    /// are approached but not attained still count as one-sided bounds.
    pub(crate) fn weight_bounds_beyond(&self, a: f64, m: u64) -> (f64, f64) {
        match self {
            WeightFamily::RatioPower => {
                // (1 + 1/n)^a is monotone in n toward 1
                let first = (1.0 + 1.0 / (m as f64 + 1.0)).powf(a);
                if a >= 0.0 {
                    (1.0, first)
                } else {
                    (first, 1.0)
                }
            }
            WeightFamily::ConstantMultiple => (a, a),
            WeightFamily::Exp { base, rate } => {
                let (base_inf, base_sup) = base.bounds_beyond(m);
                let (rate_inf, rate_sup) = rate.bounds_beyond(m);
                let (f_lo, f_hi) = if a >= 0.0 {
                    ((a * rate_inf).exp(), (a * rate_sup).exp())
                } else {
                    ((a * rate_sup).exp(), (a * rate_inf).exp())
                };
                (mul_bound(base_inf, f_lo), mul_bound(base_sup, f_hi))
            }
            WeightFamily::Tabulated { head, tail } => {
                let h = head.len() as u64;
                let (mut lo, mut hi) = tail.weight_bounds_beyond(a, m.max(h));
                for &w in head.iter().skip(m as usize) {
                    lo = lo.min(w);
                    hi = hi.max(w);
                }
                (lo, hi)
            }
        }
    }

    /// Upper bound on sum_{j>=1} of the inverse products starting after
    /// global index m, i.e. products of w_{m+1}(a)..w_{m+j}(a) inverted and
    /// raised to the p-th power.
    fn fresh_tail_ratio_bound(&self, a: f64, m: u64, p: f64) -> Result<f64> {
        match self {
            WeightFamily::RatioPower => {
                let ap = a * p;
                if ap <= 1.0 {
                    return Err(self.non_summable(a));
                }
                // terms are ((m+1)/(m+1+j))^(a p); integral comparison
                Ok((m as f64 + 1.0) / (ap - 1.0))
            }
            WeightFamily::ConstantMultiple => {
                if a <= 1.0 {
                    return Err(self.non_summable(a));
                }
                let q = a.powf(-p);
                Ok(q / (1.0 - q))
            }
            WeightFamily::Exp { .. } => {
                let (floor, _) = self.weight_bounds_beyond(a, m);
                if !(floor > 1.0) {
                    return Err(self.non_summable(a));
                }
                let q = floor.powf(-p);
                Ok(q / (1.0 - q))
            }
            WeightFamily::Tabulated { head, tail } => {
                debug_assert!(m >= head.len() as u64, "cutoff must clear the head");
                tail.fresh_tail_ratio_bound(a, m, p)
            }
        }
    }

    fn non_summable(&self, a: f64) -> Error {
        Error::NonSummable { family: self.label().into(), lambda: a }
    }
}

fn root_p(power_sum: f64, p: f64) -> f64 {
    if p == 1.0 {
        power_sum
    } else if p == 2.0 {
        power_sum.sqrt()
    } else {
        power_sum.powf(1.0 / p)
    }
}
