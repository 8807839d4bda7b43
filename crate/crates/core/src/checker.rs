//! Applicability checks for the common-vector construction.
//!
//! The construction goes through for a weight family on a compact
//! parameter interval when four conditions hold: weights nondecreasing in
//! the parameter, the inverse-product series summable at the left
//! endpoint, log-weights Lipschitz in the parameter, and cumulative
//! Lipschitz sums growing slowly enough that their reciprocals diverge
//! along every geometric subsequence. Verdicts are decided by closed-form
//! tests per family; numeric probes only corroborate, because convergence
//! is not decidable from finite partial sums.

use serde::{Deserialize, Serialize};

use crate::weights::{CompactInterval, SeqDescriptor, WeightFamily};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Each w_n is nondecreasing in lambda.
    MonotoneInLambda,
    /// sum_nu e_nu / (w_1(a)..w_nu(a)) converges in l^p.
    InverseSeriesSummable,
    /// |log w_n(lambda) - log w_n(mu)| <= L_n |lambda - mu| on K.
    LogLipschitz,
    /// sum_t 1 / (L_1 + .. + L_{s^t}) diverges for every base s >= 2.
    SlowLipschitzGrowth,
    /// sum_n L_n(K) converges (strictly stronger than the above).
    LipschitzSeriesConverges,
    /// Exp-family base sequence is positive and bounded.
    BoundedPositiveBase,
    /// Exp-family rate series converges.
    RateSeriesConverges,
    /// sum_n (a_1..a_n)^{-p} converges for the Exp-family base.
    InverseBaseProductsSummable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub condition: Condition,
    pub status: Status,
    pub witness: String,
}

impl Verdict {
    fn new(condition: Condition, status: Status, witness: impl Into<String>) -> Self {
        Verdict { condition, status, witness: witness.into() }
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }
}

fn require_interval(fam: &WeightFamily, k: &CompactInterval) -> Result<()> {
    fam.require_evaluable(k.lower())?;
    fam.require_evaluable(k.upper())
}

/// The four core conditions on K, in order. s_list supplies the bases for
/// which per-base numeric evidence is attached to the slow-growth verdict;
/// n_probe caps the index range of the monotonicity/Lipschitz cross-checks.
pub fn check_family_criterion(
    fam: &WeightFamily,
    k: &CompactInterval,
    p: f64,
    s_list: &[u64],
    n_probe: u64,
) -> Result<Vec<Verdict>> {
    fam.validate()?;
    require_interval(fam, k)?;
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidInput(format!("p = {p} must be finite and >= 1")));
    }
    Ok(vec![
        check_monotone(fam, k, n_probe),
        check_inverse_summable(fam, k, p),
        check_lipschitz(fam, k, n_probe),
        check_slow_growth(fam, k, s_list),
    ])
}

/// Same checks with default probe settings (bases 2, 3, 10; indices to 40).
pub fn check_family_criterion_default(
    fam: &WeightFamily,
    k: &CompactInterval,
    p: f64,
) -> Result<Vec<Verdict>> {
    check_family_criterion(fam, k, p, &[2, 3, 10], 40)
}

fn check_monotone(fam: &WeightFamily, k: &CompactInterval, n_probe: u64) -> Verdict {
    let symbolic: (Status, String) = match fam {
        WeightFamily::RatioPower => (
            Status::Holds,
            "d/dlambda log w_n = log((n+1)/n) > 0 for every n".into(),
        ),
        WeightFamily::Exp { rate, .. } => (
            Status::Holds,
            format!("log w_n is affine in lambda with slope rate_n >= 0 ({rate:?})"),
        ),
        WeightFamily::ConstantMultiple => (
            Status::Holds,
            format!("d/dlambda log lambda = 1/lambda > 0 on [{}, {}]", k.lower(), k.upper()),
        ),
        WeightFamily::Tabulated { tail, .. } => {
            let inner = check_monotone(tail, k, n_probe);
            (inner.status, format!("head is constant in lambda; tail: {}", inner.witness))
        }
    };
    // grid cross-check; a symbolic claim contradicted by evaluation is a bug
    // worth surfacing as a failure, not papering over
    if symbolic.0 == Status::Holds && !k.is_degenerate() {
        for n in 1..=n_probe.max(1) {
            let mut prev = f64::NEG_INFINITY;
            for j in 0..=8 {
                let lambda = k.lower() + k.width() * j as f64 / 8.0;
                let w = match fam.weight(n, lambda) {
                    Ok(w) => w,
                    Err(_) => continue,
                };
                if w < prev - 1e-12 * prev.abs().max(1.0) {
                    return Verdict::new(
                        Condition::MonotoneInLambda,
                        Status::Fails,
                        format!("probe found w_{n} decreasing near lambda = {lambda}"),
                    );
                }
                prev = w;
            }
        }
    }
    Verdict::new(Condition::MonotoneInLambda, symbolic.0, symbolic.1)
}

fn check_inverse_summable(fam: &WeightFamily, k: &CompactInterval, p: f64) -> Verdict {
    let a = k.lower();
    match fam.inverse_tail_bound(a, 0, 1, p) {
        Ok(bound) => Verdict::new(
            Condition::InverseSeriesSummable,
            Status::Holds,
            format!("certified l^{p} bound {bound:.6e} on the full inverse-product series at lambda = {a}"),
        ),
        Err(Error::NonSummable { .. }) => divergence_verdict(fam, a, p),
        Err(e) => Verdict::new(
            Condition::InverseSeriesSummable,
            Status::Inconclusive,
            format!("tail bound unavailable: {e}"),
        ),
    }
}

/// Called when the certified majorant diverges; decide between a provable
/// failure and an honest inconclusive.
fn divergence_verdict(fam: &WeightFamily, a: f64, p: f64) -> Verdict {
    let c = Condition::InverseSeriesSummable;
    match fam {
        WeightFamily::RatioPower => Verdict::new(
            c,
            Status::Fails,
            format!("a*p = {} <= 1: terms (nu+1)^(-a p) form a divergent p-series", a * p),
        ),
        WeightFamily::ConstantMultiple => Verdict::new(
            c,
            Status::Fails,
            format!("a = {a} <= 1: inverse products a^(-nu) do not decay"),
        ),
        WeightFamily::Exp { .. } | WeightFamily::Tabulated { .. } => {
            // weights eventually capped by 1 keep the inverse products from
            // vanishing, which settles divergence; otherwise stay agnostic
            let probe_from = match fam {
                WeightFamily::Tabulated { head, .. } => head.len() as u64,
                _ => 0,
            };
            let (_, sup) = fam.weight_bounds_beyond(a, probe_from);
            if sup <= 1.0 {
                Verdict::new(
                    c,
                    Status::Fails,
                    format!("weights beyond n = {probe_from} stay <= {sup} <= 1, so inverse products never vanish"),
                )
            } else {
                Verdict::new(
                    c,
                    Status::Inconclusive,
                    "certified weight floor is <= 1 but weights are not provably capped by 1; no closed-form test applies".to_string(),
                )
            }
        }
    }
}

fn check_lipschitz(fam: &WeightFamily, k: &CompactInterval, n_probe: u64) -> Verdict {
    let formula = match fam {
        WeightFamily::RatioPower => "L_n = log((n+1)/n)".to_string(),
        WeightFamily::Exp { rate, .. } => format!("L_n = rate_n ({rate:?})"),
        WeightFamily::ConstantMultiple => format!("L_n = 1/{} (mean value bound on log)", k.lower()),
        WeightFamily::Tabulated { tail, .. } => {
            let inner = check_lipschitz(tail, k, n_probe);
            format!("head constant in lambda (slope 0); tail {}", inner.witness)
        }
    };
    if !k.is_degenerate() {
        for n in 1..=n_probe.max(1) {
            let l = fam.lipschitz_constant(k, n);
            for (lo_j, hi_j) in [(0, 8), (2, 3), (0, 1), (5, 8)] {
                let lo = k.lower() + k.width() * lo_j as f64 / 8.0;
                let hi = k.lower() + k.width() * hi_j as f64 / 8.0;
                let (wl, wh) = match (fam.log_weight(n, lo), fam.log_weight(n, hi)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => continue,
                };
                if (wh - wl).abs() > l * (hi - lo) + 1e-12 {
                    return Verdict::new(
                        Condition::LogLipschitz,
                        Status::Fails,
                        format!("probe: |dlog w_{n}| = {} exceeds L_n * dlambda = {}", (wh - wl).abs(), l * (hi - lo)),
                    );
                }
            }
        }
    }
    Verdict::new(Condition::LogLipschitz, Status::Holds, formula)
}

/// Growth class of the cumulative sums L_1 + .. + L_m, which decides
/// whether the reciprocal series along s^t diverges.
enum CumulativeGrowth {
    /// bounded, or logarithmic in m: reciprocals along s^t dominate a
    /// harmonic series
    Slow(String),
    /// at least a positive power of m: reciprocals along s^t are summable
    /// geometrically
    Fast(String),
}

fn cumulative_growth(fam: &WeightFamily, k: &CompactInterval) -> CumulativeGrowth {
    match fam {
        WeightFamily::RatioPower => CumulativeGrowth::Slow(
            "cumulative sums are log(m+1); along m = s^t the reciprocals are ~ 1/(t log s), a divergent harmonic comparison".into(),
        ),
        WeightFamily::ConstantMultiple => CumulativeGrowth::Fast(format!(
            "cumulative sums are m/{a}; the reciprocal series along s^t is {a} * sum_t s^(-t) = {a}/(s-1), finite for every s >= 2",
            a = k.lower(),
        )),
        WeightFamily::Exp { rate, .. } => {
            if rate.sum_converges() {
                let total = rate.total_sum_upper().unwrap_or(f64::INFINITY);
                CumulativeGrowth::Slow(format!(
                    "cumulative rate sums stay below {total:.6}, so reciprocal terms have the positive floor {:.6}",
                    1.0 / total.max(f64::MIN_POSITIVE),
                ))
            } else if matches!(rate, SeqDescriptor::Power { exponent } if *exponent == -1.0) {
                CumulativeGrowth::Slow(
                    "cumulative rate sums grow like log m; harmonic comparison along s^t".into(),
                )
            } else {
                CumulativeGrowth::Fast(format!(
                    "cumulative rate sums grow at least like a positive power of m ({rate:?}); reciprocals along s^t are geometrically summable"
                ))
            }
        }
        WeightFamily::Tabulated { tail, .. } => {
            match cumulative_growth(tail, k) {
                CumulativeGrowth::Slow(w) => {
                    CumulativeGrowth::Slow(format!("head shifts cumulative sums by a constant; {w}"))
                }
                CumulativeGrowth::Fast(w) => {
                    CumulativeGrowth::Fast(format!("head shifts cumulative sums by a constant; {w}"))
                }
            }
        }
    }
}

fn check_slow_growth(fam: &WeightFamily, k: &CompactInterval, s_list: &[u64]) -> Verdict {
    let (status, mut witness) = match cumulative_growth(fam, k) {
        CumulativeGrowth::Slow(w) => (Status::Holds, w),
        CumulativeGrowth::Fast(w) => (Status::Fails, w),
    };
    // numeric corroboration per requested base
    for &s in s_list {
        if s < 2 {
            continue;
        }
        let mut partial = 0.0;
        let mut count = 0u32;
        let mut m = s;
        while m <= 1_000_000_000_000 && count < 40 {
            let cum = fam.lipschitz_sum(k, m);
            if cum > 0.0 {
                partial += 1.0 / cum;
            } else {
                partial = f64::INFINITY;
                break;
            }
            count += 1;
            m = match m.checked_mul(s) {
                Some(next) => next,
                None => break,
            };
        }
        witness.push_str(&format!("; s = {s}: partial sum {partial:.4} over {count} terms"));
    }
    Verdict::new(Condition::SlowLipschitzGrowth, status, witness)
}

/// Does sum_n L_n(K) converge. Families passing this automatically pass
/// the slow-growth condition, since bounded cumulative sums have
/// reciprocals bounded away from zero.
pub fn check_summable_lipschitz(fam: &WeightFamily, k: &CompactInterval) -> Result<Verdict> {
    fam.validate()?;
    require_interval(fam, k)?;
    let c = Condition::LipschitzSeriesConverges;
    Ok(match fam {
        WeightFamily::RatioPower => Verdict::new(
            c,
            Status::Fails,
            "partial sums telescope to log(n+1), unbounded",
        ),
        WeightFamily::ConstantMultiple => Verdict::new(
            c,
            Status::Fails,
            format!("L_n = 1/{} is constant; partial sums grow linearly", k.lower()),
        ),
        WeightFamily::Exp { rate, .. } => {
            if rate.sum_converges() {
                Verdict::new(
                    c,
                    Status::Holds,
                    format!(
                        "sum of rates converges with certified total <= {:.6}",
                        rate.total_sum_upper().unwrap_or(f64::INFINITY)
                    ),
                )
            } else {
                Verdict::new(c, Status::Fails, format!("rate series diverges ({rate:?})"))
            }
        }
        WeightFamily::Tabulated { tail, .. } => {
            let inner = check_summable_lipschitz(tail, k)?;
            Verdict::new(
                c,
                inner.status,
                format!("head contributes finitely many terms; tail: {}", inner.witness),
            )
        }
    })
}

/// Sufficient conditions specific to Exp families on l^p: bounded positive
/// base, summable rates, summable inverse base products.
pub fn check_exp_family_criterion(fam: &WeightFamily, p: f64) -> Result<Vec<Verdict>> {
    fam.validate()?;
    let (base, rate) = match fam {
        WeightFamily::Exp { base, rate } => (base, rate),
        _ => {
            return Err(Error::InvalidInput(format!(
                "exp-family criterion applies only to exp families, got {}",
                fam.label()
            )))
        }
    };
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidInput(format!("p = {p} must be finite and >= 1")));
    }

    let base_verdict = match *base {
        SeqDescriptor::Constant { value } => Verdict::new(
            Condition::BoundedPositiveBase,
            Status::Holds,
            format!("constant base {value} > 0"),
        ),
        SeqDescriptor::Geometric { ratio } if ratio <= 1.0 => Verdict::new(
            Condition::BoundedPositiveBase,
            Status::Holds,
            format!("geometric base with ratio {ratio} <= 1 is positive and bounded by {ratio}"),
        ),
        SeqDescriptor::Geometric { ratio } => Verdict::new(
            Condition::BoundedPositiveBase,
            Status::Fails,
            format!("geometric base with ratio {ratio} > 1 is unbounded"),
        ),
        SeqDescriptor::Power { exponent } if exponent <= 0.0 => Verdict::new(
            Condition::BoundedPositiveBase,
            Status::Holds,
            format!("n^{exponent} with exponent <= 0 is positive and bounded by 1"),
        ),
        SeqDescriptor::Power { exponent } => Verdict::new(
            Condition::BoundedPositiveBase,
            Status::Fails,
            format!("n^{exponent} with exponent > 0 is unbounded"),
        ),
    };

    let rate_verdict = if rate.sum_converges() {
        Verdict::new(
            Condition::RateSeriesConverges,
            Status::Holds,
            format!(
                "rate series converges with certified total <= {:.6}",
                rate.total_sum_upper().unwrap_or(f64::INFINITY)
            ),
        )
    } else {
        Verdict::new(
            Condition::RateSeriesConverges,
            Status::Fails,
            format!("rate series diverges ({rate:?})"),
        )
    };

    let products_verdict = match *base {
        SeqDescriptor::Constant { value } if value > 1.0 => {
            let q = value.powf(-p);
            Verdict::new(
                Condition::InverseBaseProductsSummable,
                Status::Holds,
                format!("geometric series sum_n {value}^(-p n) = {:.6}", q / (1.0 - q)),
            )
        }
        SeqDescriptor::Constant { value } => Verdict::new(
            Condition::InverseBaseProductsSummable,
            Status::Fails,
            format!("base {value} <= 1: inverse products (1/{value})^n do not decay"),
        ),
        SeqDescriptor::Geometric { ratio } if ratio > 1.0 => Verdict::new(
            Condition::InverseBaseProductsSummable,
            Status::Holds,
            format!("products are {ratio}^(n(n+1)/2); inverse p-th powers decay superexponentially"),
        ),
        SeqDescriptor::Geometric { ratio } => Verdict::new(
            Condition::InverseBaseProductsSummable,
            Status::Fails,
            format!("products {ratio}^(n(n+1)/2) with ratio <= 1 never grow"),
        ),
        SeqDescriptor::Power { exponent } if exponent > 0.0 => Verdict::new(
            Condition::InverseBaseProductsSummable,
            Status::Holds,
            format!("products are (n!)^{exponent}; inverse p-th powers vanish faster than any geometric"),
        ),
        SeqDescriptor::Power { exponent } => Verdict::new(
            Condition::InverseBaseProductsSummable,
            Status::Fails,
            format!("products (n!)^{exponent} with exponent <= 0 never grow"),
        ),
    };

    Ok(vec![base_verdict, rate_verdict, products_verdict])
}

/// Gate for the planner: the monotone, summable, and Lipschitz conditions
/// must hold always; slow growth is only needed when the interval has
/// positive width, because a single parameter point needs no subdivision.
pub fn require_applicable(
    fam: &WeightFamily,
    k: &CompactInterval,
    p: f64,
) -> Result<Vec<Verdict>> {
    let verdicts = check_family_criterion_default(fam, k, p)?;
    let required_ok = verdicts.iter().all(|v| {
        v.holds() || (k.is_degenerate() && v.condition == Condition::SlowLipschitzGrowth)
    });
    if required_ok {
        Ok(verdicts)
    } else {
        Err(Error::NotApplicable { verdicts })
    }
}

/// Partial sum of the p-th powers of the inverse weight products at
/// lambda = a, for probing verdicts against direct summation.
pub fn probe_inverse_power_sum(fam: &WeightFamily, a: f64, p: f64, terms: u64) -> Result<f64> {
    let mut log_cum = 0.0;
    let mut sum = 0.0;
    for nu in 1..=terms {
        log_cum += fam.log_weight(nu, a)?;
        sum += (-p * log_cum).exp();
    }
    Ok(sum)
}

/// Partial sums of the reciprocal cumulative Lipschitz series along the
/// base-s geometric index sequence, one running value per term.
pub fn probe_reciprocal_cumulative(
    fam: &WeightFamily,
    k: &CompactInterval,
    s: u64,
    max_terms: u32,
) -> Vec<f64> {
    let mut out = Vec::new();
    let mut partial = 0.0;
    let mut m = s;
    for _ in 0..max_terms {
        let cum = fam.lipschitz_sum(k, m);
        if cum <= 0.0 {
            break;
        }
        partial += 1.0 / cum;
        out.push(partial);
        m = match m.checked_mul(s) {
            Some(next) if next <= 1_000_000_000_000 => next,
            _ => break,
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(a: f64, b: f64) -> CompactInterval {
        CompactInterval::new(a, b).unwrap()
    }

    fn exp_geo() -> WeightFamily {
        WeightFamily::exp(
            SeqDescriptor::Constant { value: 2.0 },
            SeqDescriptor::Geometric { ratio: 0.5 },
        )
        .unwrap()
    }

    fn status_of(verdicts: &[Verdict], c: Condition) -> Status {
        verdicts.iter().find(|v| v.condition == c).unwrap().status
    }

    #[test]
    fn ratio_power_all_hold_on_valid_interval() {
        let v = check_family_criterion_default(&WeightFamily::RatioPower, &interval(1.0, 1.1), 2.0)
            .unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.iter().all(Verdict::holds), "{v:#?}");
        assert!(v.iter().all(|x| !x.witness.is_empty()));
    }

    #[test]
    fn ratio_power_below_summability_threshold() {
        let v = check_family_criterion_default(&WeightFamily::RatioPower, &interval(0.4, 0.45), 2.0)
            .unwrap();
        assert_eq!(status_of(&v, Condition::InverseSeriesSummable), Status::Fails);
        let w = v.iter().find(|x| x.condition == Condition::InverseSeriesSummable).unwrap();
        assert!(w.witness.contains("divergent p-series"), "{}", w.witness);
    }

    #[test]
    fn constant_multiple_fails_slow_growth_only() {
        let v = check_family_criterion_default(&WeightFamily::ConstantMultiple, &interval(2.0, 3.0), 2.0)
            .unwrap();
        assert_eq!(status_of(&v, Condition::MonotoneInLambda), Status::Holds);
        assert_eq!(status_of(&v, Condition::InverseSeriesSummable), Status::Holds);
        assert_eq!(status_of(&v, Condition::LogLipschitz), Status::Holds);
        assert_eq!(status_of(&v, Condition::SlowLipschitzGrowth), Status::Fails);
        let w = v.iter().find(|x| x.condition == Condition::SlowLipschitzGrowth).unwrap();
        assert!(w.witness.contains("2/(s-1)"), "{}", w.witness);
    }

    #[test]
    fn exp_family_with_summable_rates_holds() {
        let v = check_family_criterion_default(&exp_geo(), &interval(0.0, 1.0), 2.0).unwrap();
        assert!(v.iter().all(Verdict::holds), "{v:#?}");
    }

    #[test]
    fn summable_lipschitz_verdicts() {
        let k = interval(1.0, 2.0);
        assert_eq!(
            check_summable_lipschitz(&exp_geo(), &k).unwrap().status,
            Status::Holds
        );
        assert_eq!(
            check_summable_lipschitz(&WeightFamily::RatioPower, &k).unwrap().status,
            Status::Fails
        );
        let harmonic_rates = WeightFamily::exp(
            SeqDescriptor::Constant { value: 2.0 },
            SeqDescriptor::Power { exponent: -1.0 },
        )
        .unwrap();
        assert_eq!(
            check_summable_lipschitz(&harmonic_rates, &k).unwrap().status,
            Status::Fails
        );
    }

    #[test]
    fn summable_lipschitz_implies_slow_growth() {
        // strengthened hypothesis consistency, on several families
        let k = interval(0.5, 1.5);
        let fams = vec![
            exp_geo(),
            WeightFamily::exp(
                SeqDescriptor::Power { exponent: -0.5 },
                SeqDescriptor::Power { exponent: -2.0 },
            )
            .unwrap(),
            WeightFamily::RatioPower,
        ];
        for fam in fams {
            let corollary = check_summable_lipschitz(&fam, &k).unwrap();
            if corollary.status == Status::Holds {
                let v = check_family_criterion_default(&fam, &k, 2.0).unwrap();
                assert_eq!(
                    status_of(&v, Condition::SlowLipschitzGrowth),
                    Status::Holds,
                    "{fam:?}"
                );
            }
        }
    }

    #[test]
    fn exp_criterion_verdicts() {
        let all_hold = check_exp_family_criterion(&exp_geo(), 2.0).unwrap();
        assert!(all_hold.iter().all(Verdict::holds), "{all_hold:#?}");
        assert!(all_hold[2].witness.contains("0.333333"), "{}", all_hold[2].witness);

        let flat_base = WeightFamily::exp(
            SeqDescriptor::Constant { value: 1.0 },
            SeqDescriptor::Geometric { ratio: 0.5 },
        )
        .unwrap();
        let v = check_exp_family_criterion(&flat_base, 2.0).unwrap();
        assert_eq!(v[0].status, Status::Holds);
        assert_eq!(v[1].status, Status::Holds);
        assert_eq!(v[2].status, Status::Fails);

        let constant_rate = WeightFamily::exp(
            SeqDescriptor::Constant { value: 2.0 },
            SeqDescriptor::Constant { value: 1.0 },
        )
        .unwrap();
        let v = check_exp_family_criterion(&constant_rate, 2.0).unwrap();
        assert_eq!(v[1].status, Status::Fails);

        assert!(check_exp_family_criterion(&WeightFamily::RatioPower, 2.0).is_err());
    }

    #[test]
    fn applicability_gate() {
        assert!(require_applicable(&WeightFamily::RatioPower, &interval(1.0, 1.1), 2.0).is_ok());
        // positive-width interval needs slow growth
        let err = require_applicable(&WeightFamily::ConstantMultiple, &interval(2.0, 3.0), 2.0)
            .unwrap_err();
        match err {
            Error::NotApplicable { verdicts } => {
                assert_eq!(status_of(&verdicts, Condition::SlowLipschitzGrowth), Status::Fails);
            }
            other => panic!("expected NotApplicable, got {other:?}"),
        }
        // a single parameter point does not
        assert!(require_applicable(&WeightFamily::ConstantMultiple, &interval(2.0, 2.0), 2.0).is_ok());
    }

    #[test]
    fn probes_corroborate_verdicts() {
        // summable case: partial sums stay under the certified bound
        let fam = WeightFamily::RatioPower;
        let bound = fam.inverse_tail_bound(1.0, 0, 1, 2.0).unwrap();
        let partial = probe_inverse_power_sum(&fam, 1.0, 2.0, 100_000).unwrap();
        assert!(partial <= bound.powi(2) * (1.0 + 1e-9));

        // divergent case: partial sums keep visibly growing
        let p10k = probe_inverse_power_sum(&fam, 0.4, 2.0, 10_000).unwrap();
        let p100k = probe_inverse_power_sum(&fam, 0.4, 2.0, 100_000).unwrap();
        assert!(p100k > p10k * 1.1, "{p100k} vs {p10k}");

        // slow growth: increments stay bounded below
        let k = interval(1.0, 1.1);
        let partials = probe_reciprocal_cumulative(&fam, &k, 2, 30);
        let last_increment = partials[partials.len() - 1] - partials[partials.len() - 2];
        assert!(last_increment > 0.01);

        // fast growth: partial sums approach the closed-form limit
        let cm = WeightFamily::ConstantMultiple;
        let kcm = interval(2.0, 3.0);
        let partials = probe_reciprocal_cumulative(&cm, &kcm, 2, 40);
        let limit = 2.0 / (2.0 - 1.0);
        assert!(*partials.last().unwrap() <= limit + 1e-9);
        assert!(limit - partials.last().unwrap() < 1e-6);
    }

    #[test]
    fn hard_domain_violations_error_out() {
        assert!(matches!(
            check_family_criterion_default(&WeightFamily::ConstantMultiple, &interval(-1.0, 3.0), 2.0),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn tabulated_inherits_tail_classification() {
        let fam = WeightFamily::tabulated(vec![9.0, 0.1], WeightFamily::RatioPower).unwrap();
        let v = check_family_criterion_default(&fam, &interval(1.0, 1.2), 2.0).unwrap();
        assert!(v.iter().all(Verdict::holds), "{v:#?}");
        let w = v.iter().find(|x| x.condition == Condition::SlowLipschitzGrowth).unwrap();
        assert!(w.witness.contains("head"), "{}", w.witness);
    }

    #[test]
    fn verdicts_serialize_snake_case() {
        let v = Verdict::new(Condition::SlowLipschitzGrowth, Status::Fails, "w");
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("slow_lipschitz_growth"));
        assert!(json.contains("fails"));
        let back: Verdict = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }
}
